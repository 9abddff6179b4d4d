//! Two-layer classifier, degree rescaling head and Adam.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// `σ(w2 · relu(W1 x + b1) + b2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub input_dim: usize,
    pub hidden: usize,
    /// Row-major `hidden × input_dim`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Output of [`Mlp::backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrad {
    pub loss: f64,
    /// Gradient in [`Mlp::flatten`] order.
    pub params: Vec<f64>,
    /// Gradient with respect to the input.
    pub input: Vec<f64>,
}

impl Mlp {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input_dim,
            hidden,
            w1: vec![0.0; hidden * input_dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    /// Uniform `±1/√fan_in` initialization.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = stream(seed, Domain::Init, 0);
        let a1 = 1.0 / (input_dim.max(1) as f64).sqrt();
        let a2 = 1.0 / (hidden.max(1) as f64).sqrt();
        let mut draw = |a: f64, len: usize| -> Vec<f64> { (0..len).map(|_| rng.random_range(-a..a)).collect() };
        let w1 = draw(a1, hidden * input_dim);
        let b1 = draw(a1, hidden);
        let w2 = draw(a2, hidden);
        let b2 = draw(a2, 1)[0];
        Self { input_dim, hidden, w1, b1, w2, b2 }
    }

    pub fn num_parameters(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    pub fn assign(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_parameters());
        let (w1, rest) = flat.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim);
        self.w1
            .chunks_exact(self.input_dim.max(1))
            .zip(&self.b1)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>())
            .take(self.hidden)
            .collect()
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        let pre = self.hidden_pre(x);
        self.b2 + pre.iter().zip(&self.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Binary cross-entropy of one example and its gradients.
    pub fn backward(&self, x: &[f64], label: f64) -> MlpGrad {
        let pre = self.hidden_pre(x);
        let act: Vec<f64> = pre.iter().map(|z| z.max(0.0)).collect();
        let z = self.b2 + act.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>();
        let loss = bce_with_logit(z, label);
        let dz = sigmoid(z) - label;

        let mut params = vec![0.0; self.num_parameters()];
        let mut input = vec![0.0; self.input_dim];
        let (gw1, rest) = params.split_at_mut(self.w1.len());
        let (gb1, rest) = rest.split_at_mut(self.hidden);
        let (gw2, gb2) = rest.split_at_mut(self.hidden);
        gb2[0] = dz;
        for j in 0..self.hidden {
            gw2[j] = dz * act[j];
            if pre[j] <= 0.0 {
                continue;
            }
            let dh = dz * self.w2[j];
            gb1[j] = dh;
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            for i in 0..self.input_dim {
                gw1[j * self.input_dim + i] = dh * x[i];
                input[i] += dh * row[i];
            }
        }
        MlpGrad { loss, params, input }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-y ln σ(z) - (1-y) ln(1-σ(z))` without overflow.
pub fn bce_with_logit(z: f64, label: f64) -> f64 {
    z.max(0.0) - z * label + (-z.abs()).exp().ln_1p()
}

/// `f(x) = w2 · tanh(w1 x + b1) + b2` with scalar input `x = ln(1 + d)`.
///
/// Starts with `w2 = 0` and `b2 = 1`, so every weight is exactly 1 until
/// the first update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleHead {
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl RescaleHead {
    pub fn init(hidden: usize, seed: u64) -> Self {
        let mut rng = stream(seed, Domain::Init, 1);
        let w1 = (0..hidden).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b1 = (0..hidden).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { hidden, w1, b1, w2: vec![0.0; hidden], b2: 1.0 }
    }

    pub fn num_parameters(&self) -> usize {
        3 * self.hidden + 1
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    pub fn assign(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_parameters());
        let h = self.hidden;
        self.w1.copy_from_slice(&flat[..h]);
        self.b1.copy_from_slice(&flat[h..2 * h]);
        self.w2.copy_from_slice(&flat[2 * h..3 * h]);
        self.b2 = flat[3 * h];
    }

    pub fn input(degree: usize) -> f64 {
        (degree as f64).ln_1p()
    }

    pub fn eval(&self, degree: usize) -> f64 {
        let x = Self::input(degree);
        let hidden: f64 = (0..self.hidden)
            .map(|j| self.w2[j] * (self.w1[j] * x + self.b1[j]).tanh())
            .sum();
        hidden + self.b2
    }

    /// Adds `upstream · ∂f(degree)/∂θ` into `grad`.
    pub fn accumulate_grad(&self, degree: usize, upstream: f64, grad: &mut [f64]) {
        let x = Self::input(degree);
        let h = self.hidden;
        for j in 0..h {
            let t = (self.w1[j] * x + self.b1[j]).tanh();
            let dpre = upstream * self.w2[j] * (1.0 - t * t);
            grad[j] += dpre * x;
            grad[h + j] += dpre;
            grad[2 * h + j] += upstream * t;
        }
        grad[3 * h] += upstream;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| (0.0..1.0).contains(&b);
        if !(self.learning_rate > 0.0 && unit(self.beta1) && unit(self.beta2) && self.epsilon > 0.0) {
            return Err(Error::Config(format!("invalid optimizer settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(cfg: AdamConfig, len: usize) -> Self {
        Self { cfg, m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * grad[i];
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric(f: impl Fn(&[f64]) -> f64, at: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..at.len())
            .map(|i| {
                let mut p = at.to_vec();
                p[i] += h;
                let up = f(&p);
                p[i] -= 2.0 * h;
                (up - f(&p)) / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale = a.iter().chain(b).map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        diff / scale
    }

    #[test]
    fn zero_weights_give_half() {
        let mlp = Mlp::zeros(8, 16);
        assert_eq!(mlp.forward(&[3.0; 8]), 0.5);
        let g = mlp.backward(&[3.0; 8], 1.0);
        assert!((g.loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn logistic_gradient_is_p_minus_y_times_x() {
        // one hidden unit with identity-like path: w1 = 1, b1 = 0, w2 = w
        let mut mlp = Mlp::zeros(1, 1);
        mlp.w1[0] = 1.0;
        mlp.w2[0] = 0.7;
        mlp.b2 = -0.2;
        let x = 1.5;
        let g = mlp.backward(&[x], 1.0);
        let p = sigmoid(0.7 * x - 0.2);
        // ∂/∂w2 = (p - y)·relu(x), ∂/∂b2 = p - y
        assert!((g.params[2] - (p - 1.0) * x).abs() < 1e-15);
        assert!((g.params[3] - (p - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn classifier_gradient_matches_finite_differences() {
        let mlp = Mlp::init(8, 16, 5);
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
        for label in [0.0, 1.0] {
            let g = mlp.backward(&x, label);
            let loss_at = |flat: &[f64]| {
                let mut m = mlp.clone();
                m.assign(flat);
                bce_with_logit(m.logit(&x), label)
            };
            assert!(rel_err(&g.params, &numeric(loss_at, &mlp.flatten())) < 1e-6);
            let loss_x = |xs: &[f64]| bce_with_logit(mlp.logit(xs), label);
            assert!(rel_err(&g.input, &numeric(loss_x, &x)) < 1e-6);
        }
    }

    #[test]
    fn head_starts_at_one() {
        let head = RescaleHead::init(32, 9);
        for d in [0, 1, 5, 1000] {
            assert_eq!(head.eval(d), 1.0);
        }
        assert_eq!(head.num_parameters() + Mlp::zeros(8, 16).num_parameters(), 258);
    }

    #[test]
    fn head_gradient_matches_finite_differences() {
        let mut head = RescaleHead::init(32, 2);
        let mut flat = head.flatten();
        for (i, p) in flat.iter_mut().enumerate().skip(64) {
            *p = ((i as f64) * 0.11).cos();
        }
        head.assign(&flat);
        let mut grad = vec![0.0; head.num_parameters()];
        head.accumulate_grad(7, 1.0, &mut grad);
        let f = |p: &[f64]| {
            let mut h = head.clone();
            h.assign(p);
            h.eval(7)
        };
        assert!(rel_err(&grad, &numeric(f, &flat)) < 1e-6);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = vec![5.0, -3.0];
        let mut opt = Adam::new(AdamConfig { learning_rate: 0.1, ..AdamConfig::default() }, 2);
        for _ in 0..500 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
            opt.step(&mut p, &g);
        }
        assert!(p.iter().all(|x| x.abs() < 1e-2));
    }

    #[test]
    fn bce_is_stable() {
        assert!(bce_with_logit(1000.0, 1.0).abs() < 1e-12);
        assert!((bce_with_logit(-1000.0, 1.0) - 1000.0).abs() < 1e-9);
    }
}

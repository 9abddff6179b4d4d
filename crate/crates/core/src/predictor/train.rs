use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{
    endpoints, link_state, signed_log1p, signed_log1p_grad, weight_grad, FeatureLayout, FeatureSource,
};
use super::mlp::{bce_with_logit, Adam, AdamConfig, Mlp, RescaleHead};
use crate::error::{Error, Result};
use crate::eval::hits_at_k;
use crate::graph::{hop_neighborhoods_for, masked_view, sample_negatives, BatchMask, DatasetSplit, Graph, Topology};
use crate::linalg::Matrix;
use crate::rng::{stream, Domain};
use crate::sketch::{sample_signatures, Rescale, SignatureMatrix, SketchConfig};

pub const CHECKPOINT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub schema: u32,
    pub sketch: SketchConfig,
    /// Append the summed endpoint triangle estimate.
    pub triangles: bool,
    pub hidden: usize,
    pub head_hidden: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: AdamConfig,
    /// Sampled negatives per training positive, redrawn every epoch.
    pub negative_ratio: usize,
    pub seed: u64,
    /// Hide each batch's positive links while featurizing it.
    pub shortcut_removal: bool,
    /// Let validation edges into the observed graph.
    pub include_valid: bool,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    /// `K` of the validation Hits@K used for model selection.
    pub eval_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schema: CHECKPOINT_SCHEMA,
            sketch: SketchConfig::default(),
            triangles: false,
            hidden: 16,
            head_hidden: 32,
            batch_size: 512,
            epochs: 100,
            optimizer: AdamConfig::default(),
            negative_ratio: 1,
            seed: 0,
            shortcut_removal: true,
            include_valid: false,
            patience: 20,
            eval_k: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema != CHECKPOINT_SCHEMA {
            return Err(Error::Config(format!("unsupported schema {}, expected {CHECKPOINT_SCHEMA}", self.schema)));
        }
        self.sketch.validate()?;
        self.optimizer.validate()?;
        for (name, value) in [
            ("hidden", self.hidden),
            ("head_hidden", self.head_hidden),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("negative_ratio", self.negative_ratio),
            ("eval_k", self.eval_k),
        ] {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn layout(&self, node_feature_dim: usize) -> FeatureLayout {
        FeatureLayout { radius: self.sketch.hops, triangles: self.triangles, node_feature_dim }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Classifier plus the optional learned rescaling head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub classifier: Mlp,
    pub rescale_head: Option<RescaleHead>,
}

impl MlpParams {
    pub fn init(cfg: &TrainConfig, input_dim: usize) -> Self {
        let rescale_head =
            (cfg.sketch.rescale == Rescale::Learned).then(|| RescaleHead::init(cfg.head_hidden, cfg.seed));
        Self { classifier: Mlp::init(input_dim, cfg.hidden, cfg.seed), rescale_head }
    }

    pub fn num_parameters(&self) -> usize {
        self.classifier.num_parameters() + self.rescale_head.as_ref().map_or(0, RescaleHead::num_parameters)
    }

    /// Classifier parameters followed by the head's.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.classifier.flatten();
        if let Some(head) = &self.rescale_head {
            out.extend(head.flatten());
        }
        out
    }

    pub fn assign(&mut self, flat: &[f64]) {
        let (c, h) = flat.split_at(self.classifier.num_parameters());
        self.classifier.assign(c);
        if let Some(head) = &mut self.rescale_head {
            head.assign(h);
        }
    }

    fn all_finite(&self) -> bool {
        self.flatten().iter().all(|p| p.is_finite())
    }
}

/// Signatures and norm weights for one observed graph.
#[derive(Debug, Clone)]
pub struct FeatureEngine<'g> {
    graph: &'g Graph,
    signatures: SignatureMatrix,
    rescale: Rescale,
    layout: FeatureLayout,
    node_features: Option<&'g Matrix>,
}

impl<'g> FeatureEngine<'g> {
    pub fn new(graph: &'g Graph, cfg: &TrainConfig, node_features: Option<&'g Matrix>) -> Result<Self> {
        let signatures = sample_signatures(&cfg.sketch, graph)?;
        let layout = cfg.layout(node_features.map_or(0, Matrix::cols));
        Ok(Self { graph, signatures, rescale: cfg.sketch.rescale, layout, node_features })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    /// Per-node norm multipliers from degrees of the observed graph.
    pub fn weights(&self, params: &MlpParams) -> Result<Option<Vec<f64>>> {
        match self.rescale {
            Rescale::None => Ok(None),
            Rescale::Fixed(w) => Ok(Some(w.weights(self.graph))),
            Rescale::Learned => {
                let head = params
                    .rescale_head
                    .as_ref()
                    .ok_or_else(|| Error::Config("learned rescaling needs a rescale head".into()))?;
                let mut by_degree = BTreeMap::new();
                let w = (0..self.graph.num_nodes())
                    .map(|k| *by_degree.entry(self.graph.degree(k)).or_insert_with_key(|&d| head.eval(d)))
                    .collect();
                Ok(Some(w))
            }
        }
    }

    fn source<'a>(&'a self, weights: Option<&'a [f64]>) -> FeatureSource<'a> {
        FeatureSource { signatures: &self.signatures, weights, layout: self.layout, node_features: self.node_features }
    }

    /// Raw (untransformed) features on the observed graph, optionally with
    /// `mask` removed.
    pub fn features(&self, params: &MlpParams, links: &[(usize, usize)], mask: Option<&BatchMask>) -> Result<Matrix> {
        let weights = self.weights(params)?;
        super::features::assemble_features(self.graph, links, mask, &self.source(weights.as_deref()))
    }

    /// Link probabilities on the unmasked observed graph.
    pub fn score(&self, params: &MlpParams, links: &[(usize, usize)]) -> Result<Vec<f64>> {
        let x = self.features(params, links, None)?;
        Ok((0..x.rows())
            .map(|i| {
                let t: Vec<f64> = x.row(i).iter().map(|&f| signed_log1p(f)).collect();
                params.classifier.forward(&t)
            })
            .collect())
    }
}

/// Mean loss and gradient of one batch, in [`MlpParams::flatten`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
}

struct LinkGrad {
    loss: f64,
    classifier: Vec<f64>,
    weights: Vec<(usize, f64)>,
}

fn run_batch<T: Topology>(
    engine: &FeatureEngine<'_>,
    topo: &T,
    params: &MlpParams,
    links: &[(usize, usize)],
    labels: &[f64],
) -> Result<BatchGrad> {
    if links.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: links.len(), found: labels.len() });
    }
    if links.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let weights = engine.weights(params)?;
    let src = engine.source(weights.as_deref());
    let learned = params.rescale_head.is_some() && engine.rescale == Rescale::Learned;
    let hops = hop_neighborhoods_for(topo, engine.layout.radius, &endpoints(links))?;
    let counts = engine.layout.num_counts();

    let per_link: Vec<LinkGrad> = links
        .par_iter()
        .zip(labels)
        .map(|(&link, &label)| {
            let state = link_state(&src, topo, &hops, link)?;
            let x: Vec<f64> = state.features.iter().map(|&f| signed_log1p(f)).collect();
            let g = params.classifier.backward(&x, label);
            let weights = if learned {
                let raw_grad: Vec<f64> = g.input[..counts]
                    .iter()
                    .zip(&state.features)
                    .map(|(gi, &f)| gi * signed_log1p_grad(f))
                    .collect();
                weight_grad(&src, &hops, link, &state, &raw_grad)?
            } else {
                Vec::new()
            };
            Ok(LinkGrad { loss: g.loss, classifier: g.params, weights })
        })
        .collect::<Result<_>>()?;

    let scale = 1.0 / links.len() as f64;
    let mut grad = vec![0.0; params.num_parameters()];
    let mut loss = 0.0;
    let mut weight_grads = vec![0.0; engine.graph.num_nodes()];
    for link in &per_link {
        loss += link.loss;
        for (g, c) in grad.iter_mut().zip(&link.classifier) {
            *g += c;
        }
        for &(k, gk) in &link.weights {
            weight_grads[k] += gk;
        }
    }
    if let (true, Some(head)) = (learned, &params.rescale_head) {
        let mut by_degree: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, &gk) in weight_grads.iter().enumerate() {
            if gk != 0.0 {
                *by_degree.entry(engine.graph.degree(k)).or_default() += gk;
            }
        }
        let offset = params.classifier.num_parameters();
        for (d, gd) in by_degree {
            head.accumulate_grad(d, gd, &mut grad[offset..]);
        }
    }
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(BatchGrad { loss: loss * scale, grad })
}

/// Mean binary cross-entropy of a batch and its gradient with respect to
/// the classifier and, under learned rescaling, the head.
pub fn batch_gradient(
    engine: &FeatureEngine<'_>,
    params: &MlpParams,
    links: &[(usize, usize)],
    labels: &[f64],
    mask: Option<&BatchMask>,
) -> Result<BatchGrad> {
    match mask {
        Some(mask) => run_batch(engine, &masked_view(engine.graph, mask)?, params, links, labels),
        None => run_batch(engine, engine.graph, params, links, labels),
    }
}

pub fn batch_loss(
    engine: &FeatureEngine<'_>,
    params: &MlpParams,
    links: &[(usize, usize)],
    labels: &[f64],
    mask: Option<&BatchMask>,
) -> Result<f64> {
    let x = engine.features(params, links, mask)?;
    let total: f64 = (0..x.rows())
        .zip(labels)
        .map(|(i, &y)| {
            let t: Vec<f64> = x.row(i).iter().map(|&f| signed_log1p(f)).collect();
            bce_with_logit(params.classifier.logit(&t), y)
        })
        .sum();
    Ok(total / links.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub valid_hits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters at the best validation epoch.
    pub params: MlpParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_valid_hits: f64,
}

/// Trains on `split.train_pos` against freshly sampled negatives and keeps
/// the parameters with the best validation Hits@K.
pub fn train(split: &DatasetSplit, cfg: &TrainConfig, node_features: Option<&Matrix>) -> Result<TrainOutcome> {
    cfg.validate()?;
    if split.train_pos.is_empty() || split.valid_pos.is_empty() {
        return Err(Error::Empty("train or validation positives"));
    }
    let observed = split.observed_graph(cfg.include_valid);
    let engine = FeatureEngine::new(&observed, cfg, node_features)?;
    let mut params = MlpParams::init(cfg, engine.layout.width());
    let mut flat = params.flatten();
    let mut opt = Adam::new(cfg.optimizer, flat.len());

    let mut best = (params.clone(), 0, f64::NEG_INFINITY);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut stale = 0;
    for epoch in 1..=cfg.epochs {
        let negatives = sample_negatives(
            &observed,
            split.train_pos.len() * cfg.negative_ratio,
            cfg.seed,
            epoch as u64,
        )?;
        let mut order: Vec<((usize, usize), f64)> = split
            .train_pos
            .iter()
            .map(|&e| (e, 1.0))
            .chain(negatives.into_iter().map(|e| (e, 0.0)))
            .collect();
        order.shuffle(&mut stream(cfg.seed, Domain::Epoch, epoch as u64));

        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let links: Vec<(usize, usize)> = chunk.iter().map(|&(e, _)| e).collect();
            let labels: Vec<f64> = chunk.iter().map(|&(_, y)| y).collect();
            let mask = cfg.shortcut_removal.then(|| {
                BatchMask::new(chunk.iter().filter(|&&(_, y)| y == 1.0).map(|&(e, _)| e).collect())
            });
            let step = batch_gradient(&engine, &params, &links, &labels, mask.as_ref())?;
            if !step.loss.is_finite() || step.grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
            epoch_loss += step.loss * chunk.len() as f64;
            opt.step(&mut flat, &step.grad);
            params.assign(&flat);
        }
        if !params.all_finite() {
            return Err(Error::Divergence { epoch });
        }
        let loss = epoch_loss / order.len() as f64;
        let valid_hits = hits_at_k(
            &engine.score(&params, &split.valid_pos)?,
            &engine.score(&params, &split.valid_neg)?,
            cfg.eval_k,
        )?;
        log::debug!("epoch {epoch}: loss {loss:.5}, valid hits@{} {valid_hits:.4}", cfg.eval_k);
        history.push(EpochRecord { epoch, loss, valid_hits });
        if valid_hits > best.2 {
            best = (params.clone(), epoch, valid_hits);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let (params, best_epoch, best_valid_hits) = best;
    Ok(TrainOutcome { params, history, best_epoch, best_valid_hits })
}

/// Everything `eval` needs to rebuild a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub schema: u32,
    pub config: TrainConfig,
    pub num_nodes: usize,
    pub best_epoch: usize,
    pub best_valid_hits: f64,
    pub params: MlpParams,
}

impl Checkpoint {
    pub fn new(config: TrainConfig, num_nodes: usize, outcome: &TrainOutcome) -> Self {
        Self {
            schema: CHECKPOINT_SCHEMA,
            config,
            num_nodes,
            best_epoch: outcome.best_epoch,
            best_valid_hits: outcome.best_valid_hits,
            params: outcome.params.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if ckpt.schema != CHECKPOINT_SCHEMA {
            return Err(Error::Config(format!("unsupported checkpoint schema {}", ckpt.schema)));
        }
        ckpt.config.validate()?;
        Ok(ckpt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            hidden: 16,
            epochs: 50,
            batch_size: 32,
            optimizer: AdamConfig { learning_rate: 1e-2, ..AdamConfig::default() },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub mlp: Mlp,
    /// Full-data loss after each epoch.
    pub losses: Vec<f64>,
    pub accuracy: f64,
}

/// Fits the classifier alone to fixed feature rows.
pub fn fit_classifier(x: &Matrix, labels: &[f64], cfg: &FitConfig) -> Result<FitOutcome> {
    if x.rows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), found: labels.len() });
    }
    if x.rows() == 0 {
        return Err(Error::Empty("training rows"));
    }
    cfg.optimizer.validate()?;
    let mut mlp = Mlp::init(x.cols(), cfg.hidden, cfg.seed);
    let mut flat = mlp.flatten();
    let mut opt = Adam::new(cfg.optimizer, flat.len());
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let full_loss = |m: &Mlp| (0..x.rows()).map(|i| bce_with_logit(m.logit(x.row(i)), labels[i])).sum::<f64>() / x.rows() as f64;
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut stream(cfg.seed, Domain::Epoch, epoch as u64));
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let mut grad = vec![0.0; flat.len()];
            for &i in chunk {
                for (g, d) in grad.iter_mut().zip(mlp.backward(x.row(i), labels[i]).params) {
                    *g += d / chunk.len() as f64;
                }
            }
            opt.step(&mut flat, &grad);
            mlp.assign(&flat);
        }
        let loss = full_loss(&mlp);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        losses.push(loss);
    }
    let correct = (0..x.rows())
        .filter(|&i| (mlp.forward(x.row(i)) >= 0.5) == (labels[i] >= 0.5))
        .count();
    Ok(FitOutcome { mlp, losses, accuracy: correct as f64 / x.rows() as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{barabasi_albert, split_edges, SplitRatios};
    use rand::Rng;

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            sketch: SketchConfig { dim: 64, ..SketchConfig::default() },
            epochs: 3,
            batch_size: 64,
            eval_k: 10,
            ..TrainConfig::default()
        }
    }

    fn small_split() -> DatasetSplit {
        let g = barabasi_albert(150, 3, 1).unwrap();
        split_edges(&g, SplitRatios::default(), 2).unwrap()
    }

    #[test]
    fn config_json() {
        let cfg = TrainConfig::from_json(r#"{"schema": 1, "batch_size": 1024, "sketch": {"dim": 256}}"#).unwrap();
        assert_eq!(cfg.batch_size, 1024);
        assert_eq!(cfg.sketch.dim, 256);
        assert!(TrainConfig::from_json(r#"{"schema": 2}"#).is_err());
        assert!(TrainConfig::from_json(r#"{"schema": 1, "batchsize": 3}"#).is_err());
        assert!(TrainConfig::from_json(r#"{"schema": 1, "batch_size": 0}"#).is_err());
    }

    #[test]
    fn toy_task_is_learned() {
        let mut rng = stream(11, Domain::Generator, 0);
        let labels: Vec<f64> = (0..400).map(|i| (i % 2) as f64).collect();
        let x = Matrix::from_fn(400, 4, |i, _| labels[i] + rng.random_range(-0.01..0.01));
        let fit = fit_classifier(&x, &labels, &FitConfig::default()).unwrap();
        assert!(fit.accuracy > 0.99);
        assert!(fit.losses.windows(2).all(|w| w[1] <= w[0]), "{:?}", fit.losses);
    }

    #[test]
    fn training_is_deterministic() {
        let split = small_split();
        let a = train(&split, &small_cfg(), None).unwrap();
        let b = train(&split, &small_cfg(), None).unwrap();
        let bits = |o: &TrainOutcome| o.params.flatten().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn learned_head_starts_at_unscaled_features() {
        let split = small_split();
        let g = split.observed_graph(false);
        let plain_cfg = small_cfg();
        let learned_cfg = TrainConfig {
            sketch: SketchConfig { rescale: Rescale::Learned, ..plain_cfg.sketch.clone() },
            ..plain_cfg.clone()
        };
        let plain = FeatureEngine::new(&g, &plain_cfg, None).unwrap();
        let learned = FeatureEngine::new(&g, &learned_cfg, None).unwrap();
        let p0 = MlpParams::init(&plain_cfg, 8);
        let p1 = MlpParams::init(&learned_cfg, 8);
        assert_eq!(
            plain.features(&p0, &split.valid_pos, None).unwrap(),
            learned.features(&p1, &split.valid_pos, None).unwrap()
        );
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        let split = small_split();
        let g = split.observed_graph(false);
        let cfg = TrainConfig {
            sketch: SketchConfig { dim: 32, rescale: Rescale::Learned, ..SketchConfig::default() },
            ..small_cfg()
        };
        let engine = FeatureEngine::new(&g, &cfg, None).unwrap();
        let mut params = MlpParams::init(&cfg, 8);
        // move the head away from its constant start
        let mut flat = params.flatten();
        let n_cls = params.classifier.num_parameters();
        for (i, p) in flat[n_cls..].iter_mut().enumerate().skip(64) {
            *p = 0.3 * ((i as f64) * 0.7).sin() + if i == 96 { 1.0 } else { 0.0 };
        }
        params.assign(&flat);
        let links: Vec<_> = split.train_pos[..6].iter().copied().chain(split.valid_neg[..6].iter().copied()).collect();
        let labels: Vec<f64> = (0..12).map(|i| if i < 6 { 1.0 } else { 0.0 }).collect();
        let mask = BatchMask::new(split.train_pos[..6].to_vec());
        let analytic = batch_gradient(&engine, &params, &links, &labels, Some(&mask)).unwrap();
        let h = 1e-6;
        let mut max_rel: f64 = 0.0;
        for i in 0..flat.len() {
            let mut p = params.clone();
            let mut f = flat.clone();
            f[i] += h;
            p.assign(&f);
            let up = batch_loss(&engine, &p, &links, &labels, Some(&mask)).unwrap();
            f[i] -= 2.0 * h;
            p.assign(&f);
            let down = batch_loss(&engine, &p, &links, &labels, Some(&mask)).unwrap();
            let numeric = (up - down) / (2.0 * h);
            let err = (numeric - analytic.grad[i]).abs() / numeric.abs().max(analytic.grad[i].abs()).max(1e-6);
            max_rel = max_rel.max(err);
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn checkpoint_round_trip() {
        let split = small_split();
        let cfg = small_cfg();
        let outcome = train(&split, &cfg, None).unwrap();
        let ckpt = Checkpoint::new(cfg, split.num_nodes, &outcome);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        ckpt.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), ckpt);
    }
}

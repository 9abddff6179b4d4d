use crate::error::{Error, Result};

/// Fraction of positives scoring strictly above the `k`-th highest
/// negative. A positive tied with that threshold counts as a miss.
pub fn hits_at_k(pos: &[f64], neg: &[f64], k: usize) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::Empty("positive scores"));
    }
    if neg.is_empty() {
        return Err(Error::Empty("negative scores"));
    }
    if k == 0 || k > neg.len() {
        return Err(Error::KTooLarge { k, available: neg.len() });
    }
    if pos.iter().chain(neg).any(|s| s.is_nan()) {
        return Err(Error::NonFinite("score"));
    }
    let mut sorted = neg.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k - 1];
    let hits = pos.iter().filter(|&&p| p > threshold).count();
    Ok(hits as f64 / pos.len() as f64)
}

/// Mean reciprocal rank, where each positive ranks behind every one of its
/// own negatives scoring at least as high.
pub fn mrr(pos: &[f64], neg: &[Vec<f64>]) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::Empty("positive scores"));
    }
    if pos.len() != neg.len() {
        return Err(Error::DimensionMismatch { expected: pos.len(), found: neg.len() });
    }
    let mut total = 0.0;
    for (&p, candidates) in pos.iter().zip(neg) {
        if candidates.is_empty() {
            return Err(Error::Empty("negative candidates"));
        }
        if p.is_nan() || candidates.iter().any(|s| s.is_nan()) {
            return Err(Error::NonFinite("score"));
        }
        let rank = 1 + candidates.iter().filter(|&&s| s >= p).count();
        total += 1.0 / rank as f64;
    }
    Ok(total / pos.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hits_examples() {
        assert_eq!(hits_at_k(&[0.9, 0.8], &[0.1, 0.2, 0.3], 2).unwrap(), 1.0);
        assert_eq!(hits_at_k(&[0.05], &[0.1, 0.2, 0.3], 1).unwrap(), 0.0);
        assert_eq!(hits_at_k(&[0.9, 0.1], &[0.5; 60], 50).unwrap(), 0.5);
        // tie with the threshold loses
        assert_eq!(hits_at_k(&[0.5], &[0.5; 60], 50).unwrap(), 0.0);
        assert!(matches!(hits_at_k(&[1.0], &[0.0; 3], 4), Err(Error::KTooLarge { k: 4, available: 3 })));
        assert!(hits_at_k(&[], &[0.0], 1).is_err());
    }

    #[test]
    fn mrr_examples() {
        assert_eq!(mrr(&[1.0], &[vec![0.1, 0.2]]).unwrap(), 1.0);
        assert_eq!(mrr(&[0.0], &[vec![0.1, 0.2, 0.3]]).unwrap(), 0.25);
        let two = mrr(&[1.0, 0.5], &[vec![0.0, 0.1], vec![0.6, 0.7, 0.5, 0.1]]).unwrap();
        assert_eq!(two, 0.625);
        assert!(mrr(&[1.0], &[vec![]]).is_err());
    }

    proptest! {
        #[test]
        fn hits_invariant_under_monotone_maps(
            pos in prop::collection::vec(-5.0f64..5.0, 1..20),
            neg in prop::collection::vec(-5.0f64..5.0, 5..40),
            k in 1usize..5,
        ) {
            let h = hits_at_k(&pos, &neg, k).unwrap();
            let f = |x: &f64| x.exp() * 3.0 + 1.0;
            let h2 = hits_at_k(&pos.iter().map(f).collect::<Vec<_>>(), &neg.iter().map(f).collect::<Vec<_>>(), k).unwrap();
            prop_assert_eq!(h, h2);
            prop_assert!((0.0..=1.0).contains(&h));
        }

        #[test]
        fn mrr_in_unit_interval(
            pos in prop::collection::vec(-5.0f64..5.0, 1..10),
            m in 1usize..10,
        ) {
            let neg: Vec<Vec<f64>> = pos.iter().enumerate().map(|(i, _)| (0..m).map(|j| ((i * 7 + j * 3) % 11) as f64 - 5.0).collect()).collect();
            let r = mrr(&pos, &neg).unwrap();
            prop_assert!(r > 0.0 && r <= 1.0);
        }
    }
}

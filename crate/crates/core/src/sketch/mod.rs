//! Quasi-orthogonal signatures and the estimators built on them.

mod config;
mod estimate;
mod propagate;
mod signatures;

pub use config::{DegreeWeight, Rescale, SketchConfig, MAX_HOPS};
pub(crate) use estimate::assemble;
pub use estimate::{
    dot, estimate_cn, estimate_de_counts, estimate_triangles, estimate_walk_features, feature_pairs,
    predicted_variance, StructuralFeature,
};
pub use propagate::{aggregate, propagate_hops, propagate_walk, HopSketch, PropagatedSignatures};
pub use signatures::{rescale_norms, sample_signatures, SignatureMatrix, SignatureSampler, Stage};

//! Structural-feature link classifier.
//!
//! Each link is described by the estimated label counts `#(p, q)` of its
//! endpoints, squashed with [`signed_log1p`] and scored by a two-layer
//! MLP. With [`Rescale::Learned`](crate::sketch::Rescale::Learned) a small
//! network of node degree sets signature norms and is trained jointly
//! through the inner-product estimates.

mod features;
mod mlp;
mod train;

pub use features::{assemble_features, assemble_on, signed_log1p, FeatureLayout, FeatureSource};
pub use mlp::{bce_with_logit, sigmoid, Adam, AdamConfig, Mlp, MlpGrad, RescaleHead};
pub use train::{
    batch_gradient, batch_loss, fit_classifier, train, BatchGrad, Checkpoint, EpochRecord, FeatureEngine,
    FitConfig, FitOutcome, MlpParams, TrainConfig, TrainOutcome, CHECKPOINT_SCHEMA,
};

//! Linear classification head over fixed embeddings, plus the evaluation
//! statistics reported for it: confusion metrics, percentile-bootstrap
//! intervals and Cohen's kappa.

pub mod head;
pub mod metrics;
pub mod split;

pub use head::{predict, train_head, LinearModel, Prediction, TrainParams, TrainReport};
pub use metrics::{bootstrap_ci, cohens_kappa, evaluate, BootstrapCi, MetricKind, Metrics};
pub use split::{stratified_split, Partition, Split, SplitSpec};

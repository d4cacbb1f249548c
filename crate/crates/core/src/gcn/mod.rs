//! Two-layer GCN with skip connections, trained full-batch under the DMoN
//! clustering loss or masked cross-entropy.

mod adam;
mod loss;
mod model;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use loss::{cross_entropy_loss, dmon_loss, softmax_rows};
pub use model::{gcn_backward, gcn_forward, xavier_bound, xavier_init, ForwardTrace, GcnModel, Gradients};
pub use train::{
    argmax_rows, train_supervised, train_unsupervised, write_trace_csv, EpochRecord, SupervisedOutcome,
    TrainConfig, UnsupervisedOutcome,
};
pub(crate) use train::overlay;

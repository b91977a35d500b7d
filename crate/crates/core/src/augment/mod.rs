//! Structure-imbalance augmentations: neighbor pruning for head nodes and
//! anomaly-guided neighbor completion for tail nodes.

mod complete;
mod prune;
mod window;

pub use complete::{
    build_completed_view, complete_tail_node, mixup_phi, sample_auxiliary, CompletionContext,
    DegreeSampler, EmpiricalDegrees, MixupNeighborhood,
};
pub use prune::{build_pruned_view, prune_head_node, pruning_weights};
pub use window::ScoreWindow;

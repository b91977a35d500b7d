//! Random walk with restart, used to draw the contextual neighbor set that
//! the readout pools over.

use rand::Rng;

use crate::graph::AttributedGraph;

/// Walk-step budget per requested node before giving up on a small component.
const STEPS_PER_TARGET: usize = 64;

/// Collects up to `target_size` distinct nodes visited by a restarting walk
/// from `anchor`, in visiting order. The anchor itself is never returned,
/// except for an isolated anchor, which yields `[anchor]` so that pooling
/// stays defined.
pub fn rwr_sample<R: Rng + ?Sized>(
    g: &AttributedGraph,
    anchor: usize,
    restart_prob: f64,
    target_size: usize,
    rng: &mut R,
) -> Vec<usize> {
    debug_assert!(restart_prob > 0.0 && restart_prob < 1.0);
    debug_assert!(target_size >= 1);
    if g.degree(anchor) == 0 {
        return vec![anchor];
    }
    let mut visited: Vec<usize> = Vec::with_capacity(target_size);
    let mut current = anchor;
    let budget = STEPS_PER_TARGET * target_size.max(4);
    for _ in 0..budget {
        if current != anchor && rng.random::<f64>() < restart_prob {
            current = anchor;
            continue;
        }
        let nb = g.neighbors(current);
        current = nb[rng.random_range(0..nb.len())];
        if current != anchor && !visited.contains(&current) {
            visited.push(current);
            if visited.len() == target_size {
                break;
            }
        }
    }
    visited
}

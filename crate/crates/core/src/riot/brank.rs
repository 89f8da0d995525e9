use rand::Rng;

use crate::workflow::{TaskIdx, Workflow};

/// Hop-distance rank: 1 for the exit task, otherwise one more than the
/// highest-ranked successor.
pub fn b_ranks(workflow: &Workflow) -> Vec<u32> {
    let mut rank = vec![0u32; workflow.len()];
    for &t in workflow.topo_order().iter().rev() {
        rank[t] = 1 + workflow
            .succs(t)
            .iter()
            .map(|&(s, _)| rank[s])
            .max()
            .unwrap_or(0);
    }
    rank
}

/// Tasks sorted by decreasing rank, equal ranks shuffled by `rng`.
///
/// Every edge strictly decreases the rank, so the result is always a
/// topological order.
pub fn b_rank<R: Rng + ?Sized>(workflow: &Workflow, rng: &mut R) -> Vec<TaskIdx> {
    let keys: Vec<u64> = (0..workflow.len()).map(|_| rng.gen()).collect();
    sorted_by_rank(workflow, |t| keys[t])
}

/// Like [`b_rank`] but ties keep task-index order; used where no randomness
/// is allowed.
pub fn b_rank_stable(workflow: &Workflow) -> Vec<TaskIdx> {
    sorted_by_rank(workflow, |t| t as u64)
}

fn sorted_by_rank(workflow: &Workflow, tie: impl Fn(TaskIdx) -> u64) -> Vec<TaskIdx> {
    let rank = b_ranks(workflow);
    let mut order: Vec<TaskIdx> = (0..workflow.len()).collect();
    order.sort_by(|&a, &b| {
        rank[b]
            .cmp(&rank[a])
            .then_with(|| tie(a).cmp(&tie(b)))
            .then(a.cmp(&b))
    });
    order
}

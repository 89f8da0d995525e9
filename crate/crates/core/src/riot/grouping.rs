//! Probabilistic grouping of tasks into clusters (one VM each).
//!
//! Critical tasks (the start task and tasks with the highest in-degrees)
//! always open a new cluster. Every other task opens one with probability
//! `eta` times the mean probability of its predecessors, and otherwise joins
//! a cluster of one of its predecessors. Probabilities therefore decay
//! geometrically along chains and reset at joins.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::workflow::{TaskIdx, Workflow};

/// Task-to-cluster assignment with contiguous cluster ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    pub task_to_cluster: Vec<usize>,
    pub n_clusters: usize,
}

impl Clustering {
    /// Relabels arbitrary labels to `0..k` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let task_to_cluster = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Clustering {
            task_to_cluster,
            n_clusters: map.len(),
        }
    }
}

/// In-degree of every task counting only edges between real tasks.
fn real_in_degrees(workflow: &Workflow) -> Vec<Option<usize>> {
    (0..workflow.len())
        .map(|t| {
            (!workflow.task(t).synthetic).then(|| {
                workflow
                    .preds(t)
                    .iter()
                    .filter(|&&(p, _)| !workflow.task(p).synthetic)
                    .count()
            })
        })
        .collect()
}

/// Critical-task mask: the start task, plus every real task whose in-degree
/// is in the top third of the distinct in-degree values of real tasks.
pub fn critical_mask(workflow: &Workflow) -> Vec<bool> {
    let degrees = real_in_degrees(workflow);
    let mut distinct: Vec<usize> = degrees.iter().flatten().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    let mut mask = vec![false; workflow.len()];
    if let Some(threshold) = top_third_threshold(&distinct) {
        for (t, d) in degrees.iter().enumerate() {
            if matches!(d, Some(d) if *d >= threshold) {
                mask[t] = true;
            }
        }
    }
    mask[workflow.start()] = true;
    mask
}

/// Smallest value among the top `ceil(len / 3)` of sorted distinct values.
fn top_third_threshold(sorted_distinct: &[usize]) -> Option<usize> {
    let n = sorted_distinct.len();
    if n == 0 {
        return None;
    }
    Some(sorted_distinct[n - n.div_ceil(3)])
}

pub fn critical_tasks(workflow: &Workflow) -> Vec<TaskIdx> {
    critical_mask(workflow)
        .into_iter()
        .enumerate()
        .filter_map(|(t, c)| c.then_some(t))
        .collect()
}

/// New-cluster probability of every task for control parameter `eta`.
pub fn assign_probabilities(workflow: &Workflow, eta: f64) -> Vec<f64> {
    probabilities_with(workflow, eta, &critical_mask(workflow))
}

fn probabilities_with(workflow: &Workflow, eta: f64, critical: &[bool]) -> Vec<f64> {
    let mut p = vec![0.0; workflow.len()];
    for &t in workflow.topo_order() {
        let preds = workflow.preds(t);
        p[t] = if critical[t] || preds.is_empty() {
            1.0
        } else {
            let mean = preds.iter().map(|&(j, _)| p[j]).sum::<f64>() / preds.len() as f64;
            eta * mean
        };
    }
    p
}

/// Groups tasks into clusters for one value of `eta`.
pub fn task_group<R: Rng + ?Sized>(workflow: &Workflow, eta: f64, rng: &mut R) -> Clustering {
    let critical = critical_mask(workflow);
    let prob = probabilities_with(workflow, eta, &critical);
    let mut cluster = vec![usize::MAX; workflow.len()];
    let mut n_clusters = 0usize;
    let mut pred_clusters: Vec<usize> = Vec::new();

    for &t in workflow.topo_order() {
        let draw: f64 = rng.gen();
        if n_clusters == 0 || draw < prob[t] {
            cluster[t] = n_clusters;
            n_clusters += 1;
        } else if critical[t] {
            cluster[t] = rng.gen_range(0..n_clusters);
        } else {
            pred_clusters.clear();
            pred_clusters.extend(workflow.preds(t).iter().map(|&(p, _)| cluster[p]));
            pred_clusters.sort_unstable();
            pred_clusters.dedup();
            cluster[t] = *pred_clusters
                .choose(rng)
                .expect("topological visiting clusters every predecessor first");
        }
    }
    Clustering {
        task_to_cluster: cluster,
        n_clusters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::workflow::fixtures::{chain, three_chains};
    use crate::workflow::{DataEdge, Task};

    fn ids(wf: &Workflow, set: &[TaskIdx]) -> Vec<String> {
        set.iter().map(|&t| wf.task(t).id.clone()).collect()
    }

    #[test]
    fn three_chain_critical_tasks() {
        let wf = three_chains();
        assert_eq!(ids(&wf, &critical_tasks(&wf)), vec!["Ts", "d"]);
    }

    #[test]
    fn chain_critical_tasks_are_all_tasks() {
        // All in-degrees besides the start are 1, so the boundary tie admits them all.
        let wf = chain(5);
        assert_eq!(critical_tasks(&wf), vec![0, 1, 2, 3, 4]);
        // Relabeling (reversing declaration order) gives the same set by id.
        let tasks = (0..5).rev().map(|i| Task::new(format!("t{i}"), 1.0)).collect();
        let edges = (1..5)
            .map(|i| DataEdge::new(format!("t{}", i - 1), format!("t{i}"), 0.0))
            .collect();
        let relabeled = Workflow::validate(tasks, edges).unwrap();
        let mut a = ids(&wf, &critical_tasks(&wf));
        let mut b = ids(&relabeled, &critical_tasks(&relabeled));
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn star_join_critical_tasks() {
        let mut tasks: Vec<Task> = (0..5).map(|i| Task::new(format!("leaf{i}"), 1.0)).collect();
        tasks.push(Task::new("hub", 1.0));
        let edges = (0..5).map(|i| DataEdge::new(format!("leaf{i}"), "hub", 0.0)).collect();
        let wf = Workflow::validate(tasks, edges).unwrap();
        let crit = critical_tasks(&wf);
        assert_eq!(crit.len(), 2);
        assert!(crit.contains(&wf.start()) && wf.task(wf.start()).synthetic);
        assert!(crit.contains(&wf.index_of("hub").unwrap()));
    }

    fn layer_probs(wf: &Workflow, p: &[f64], layer: usize) -> Vec<f64> {
        ["a", "b", "c"]
            .iter()
            .map(|c| p[wf.index_of(&format!("{c}{layer}")).unwrap()])
            .collect()
    }

    #[test]
    fn three_chain_probabilities() {
        let wf = three_chains();
        for (eta, expected) in [(0.3, [0.3, 0.09, 0.027]), (0.7, [0.7, 0.49, 0.343])] {
            let p = assign_probabilities(&wf, eta);
            for (layer, want) in expected.iter().enumerate() {
                for got in layer_probs(&wf, &p, layer + 1) {
                    assert!((got - want).abs() < 1e-12, "eta {eta} layer {}: {got}", layer + 1);
                }
            }
            assert_eq!(p[wf.index_of("d").unwrap()], 1.0);
            assert!((p[wf.index_of("Te").unwrap()] - eta).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_eta_zeroes_non_critical() {
        let wf = three_chains();
        let crit = critical_mask(&wf);
        for (t, p) in assign_probabilities(&wf, 0.0).into_iter().enumerate() {
            assert_eq!(p, if crit[t] { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn zero_eta_opens_clusters_only_at_critical_tasks() {
        let wf = three_chains();
        for seed in 0..500 {
            let c = task_group(&wf, 0.0, &mut rng::stream(seed, 1));
            assert_eq!(c.n_clusters, 2, "seed {seed}");
            let d = c.task_to_cluster[wf.index_of("d").unwrap()];
            assert_eq!(d, 1);
            assert_eq!(c.task_to_cluster[wf.index_of("Te").unwrap()], d);
            for chain in ["a", "b", "c"] {
                for k in 1..=3 {
                    assert_eq!(c.task_to_cluster[wf.index_of(&format!("{chain}{k}")).unwrap()], 0);
                }
            }
        }
    }

    #[test]
    fn unit_eta_gives_one_cluster_per_task() {
        let wf = three_chains();
        let c = task_group(&wf, 1.0, &mut rng::stream(3, 1));
        assert_eq!(c.n_clusters, wf.len());
    }

    #[test]
    fn grouping_is_deterministic() {
        let wf = three_chains();
        let a = task_group(&wf, 0.5, &mut rng::stream(9, 1));
        let b = task_group(&wf, 0.5, &mut rng::stream(9, 1));
        assert_eq!(a, b);
        let mut seen = vec![false; a.n_clusters];
        for &c in &a.task_to_cluster {
            seen[c] = true;
        }
        assert!(seen.into_iter().all(|s| s), "cluster ids are contiguous");
    }

    #[test]
    fn relabeling_is_contiguous() {
        let c = Clustering::from_labels(&[7, 3, 7, 9]);
        assert_eq!(c.task_to_cluster, vec![0, 1, 0, 2]);
        assert_eq!(c.n_clusters, 3);
    }
}

//! Comparison schedulers: random search and a HEFT-style earliest-finish
//! list scheduler (single objective; not a multi-objective HEFT).

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::BYTES_PER_MB;
use crate::frontier::{FrontierPoint, Provenance, ScheduleFrontier};
use crate::riot::{b_rank, b_rank_stable, Clustering};
use crate::sim::{Schedule, SimError, Simulator};
use crate::workflow::Workflow;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("simulation budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Number of simulator calls a scheduler may make.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    max_simulations: usize,
}

impl Budget {
    pub fn new(max_simulations: usize) -> Result<Self, BaselineError> {
        if max_simulations == 0 {
            return Err(BaselineError::ZeroBudget);
        }
        Ok(Budget { max_simulations })
    }

    pub fn max_simulations(self) -> usize {
        self.max_simulations
    }
}

/// One uniformly random schedule: a cluster count `k`, uniform labels
/// relabelled to contiguous ids, and a uniform type per cluster.
pub fn random_schedule<R: Rng + ?Sized>(
    workflow: &Workflow,
    n_types: usize,
    order: &[usize],
    rng: &mut R,
) -> (Clustering, Vec<usize>) {
    let k_max = workflow.len().min(2 * n_types).max(1);
    let k = rng.gen_range(1..=k_max);
    let labels: Vec<usize> = (0..workflow.len()).map(|_| rng.gen_range(0..k)).collect();
    let clustering = Clustering::from_labels(&labels);
    let types = (0..clustering.n_clusters).map(|_| rng.gen_range(0..n_types)).collect();
    debug_assert!(workflow.is_topological(order));
    (clustering, types)
}

/// Simulates exactly `budget` random schedules and returns the
/// non-dominated ones. All draws happen before the (parallel) simulations.
pub fn random_search<S: Simulator + ?Sized, R: Rng + ?Sized>(
    workflow: &Workflow,
    budget: Budget,
    simulator: &S,
    rng: &mut R,
) -> Result<ScheduleFrontier, BaselineError> {
    let catalog = simulator.catalog();
    let order = b_rank(workflow, rng);
    let draws: Vec<(Clustering, Vec<usize>)> = (0..budget.max_simulations)
        .map(|_| random_schedule(workflow, catalog.len(), &order, rng))
        .collect();
    let points = draws
        .into_par_iter()
        .map(|(clustering, types)| {
            let schedule = crate::riot::schedule_for(&clustering, &types, &order, catalog);
            let ev = simulator.simulate(workflow, &schedule)?;
            Ok(FrontierPoint {
                schedule,
                makespan: ev.makespan,
                cost: ev.cost,
                eta: None,
                provenance: Provenance::Simulated,
            })
        })
        .collect::<Result<Vec<_>, BaselineError>>()?;
    Ok(ScheduleFrontier::from_candidates(points))
}

/// Earliest-finish-time list scheduling on a pool holding one VM of every
/// catalog type.
///
/// Tasks are taken in B-rank order (ties by index). A task's ready time on a
/// VM is the latest predecessor finish plus, for predecessors on another VM,
/// the transfer time at the slower of the two bandwidths. The task goes to
/// the VM with the smallest `max(ready, vm_free) + compute`; ties go to the
/// cheaper type. VMs that receive no task are dropped, and the resulting
/// schedule is simulated to give a one-point frontier.
pub fn heft_schedule<S: Simulator + ?Sized>(workflow: &Workflow, simulator: &S) -> Result<ScheduleFrontier, BaselineError> {
    let catalog = simulator.catalog();
    let order = b_rank_stable(workflow);
    let mut vm_free = vec![0.0f64; catalog.len()];
    let mut vm_of = vec![usize::MAX; workflow.len()];
    let mut finish = vec![0.0f64; workflow.len()];

    for &t in &order {
        let mut best = (usize::MAX, f64::INFINITY);
        for (v, ty) in catalog.types().iter().enumerate() {
            let ready = workflow
                .preds(t)
                .iter()
                .map(|&(p, bytes)| {
                    let from = catalog.by_rank(vm_of[p]);
                    let transfer = if vm_of[p] == v {
                        0.0
                    } else {
                        bytes / (from.bandwidth.min(ty.bandwidth) * BYTES_PER_MB)
                    };
                    finish[p] + transfer
                })
                .fold(0.0, f64::max);
            let eft = ready.max(vm_free[v]) + workflow.task(t).workload / ty.compute_units;
            if eft < best.1 {
                best = (v, eft);
            }
        }
        let (v, eft) = best;
        vm_of[t] = v;
        finish[t] = eft;
        vm_free[v] = eft;
    }

    let clustering = Clustering::from_labels(&vm_of);
    let mut types = vec![0; clustering.n_clusters];
    for (t, &c) in clustering.task_to_cluster.iter().enumerate() {
        types[c] = vm_of[t];
    }
    let schedule = Schedule {
        task_to_cluster: clustering.task_to_cluster,
        cluster_to_type: types.iter().map(|&r| catalog.by_rank(r).name.clone()).collect(),
        secondary_order: order,
    };
    let ev = simulator.simulate(workflow, &schedule)?;
    Ok(ScheduleFrontier::from_candidates(vec![FrontierPoint {
        schedule,
        makespan: ev.makespan,
        cost: ev.cost,
        eta: None,
        provenance: Provenance::Simulated,
    }]))
}

//! The RIOT scheduler.
//!
//! 1. Order tasks once by B-rank.
//! 2. For every η in the grid, group tasks into clusters and score many
//!    VM-type mappings for that clustering, a few by simulation (anchors) and
//!    the rest by extrapolating from the anchors.
//! 3. Keep the non-dominated candidates, simulate each of them, and return
//!    the non-dominated set of the simulated results.
//!
//! RNG streams derived from the seed: stream 0 drives B-rank tie breaking;
//! for the k-th η value, stream `1 + 2k` drives grouping and `2 + 2k` the
//! mapping draws.

mod brank;
mod grouping;
mod surrogate;

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

pub use brank::{b_rank, b_rank_stable, b_ranks};
pub use grouping::{assign_probabilities, critical_mask, critical_tasks, task_group, Clustering};
pub use surrogate::{
    anchor_mappings, mapping_distance, random_mapping, rank_distance, schedule_for, surrogate_evaluate, Surrogate,
    TypeMapping,
};

use crate::frontier::{FrontierPoint, Provenance, ScheduleFrontier};
use crate::metrics::{nondominated_indices, ObjectivePoint};
use crate::rng;
use crate::sim::{CountingSimulator, SimError, Simulator};
use crate::workflow::{TaskIdx, Workflow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiotError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("all anchors coincide; no direction to extrapolate along")]
    DegenerateAnchors,
    #[error("mappings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("unknown VM type `{0}`")]
    UnknownType(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiotParams {
    /// Random mappings scored per clustering (N).
    pub n_random: usize,
    /// Random anchors on top of the iso-mappings (n₀).
    pub n_anchor_extra: usize,
    pub eta_grid: Vec<f64>,
    /// Minkowski exponent of the rank distance.
    pub distance_alpha: f64,
    pub seed: u64,
    /// Also offer every simulated anchor to the final non-dominated filter,
    /// instead of only the re-simulated members of S_B. Off by default.
    ///
    /// Estimates can be far too optimistic (extrapolation may even produce
    /// negative makespans), and such estimates push truly good anchors out
    /// of S_B. Anchors already have exact objectives, so keeping them costs
    /// no simulations; anchors are then not re-simulated either.
    pub keep_anchors: bool,
}

impl Default for RiotParams {
    fn default() -> Self {
        RiotParams {
            n_random: 500,
            n_anchor_extra: 30,
            eta_grid: default_eta_grid(),
            distance_alpha: 1.0,
            seed: 0,
            keep_anchors: false,
        }
    }
}

/// 0.05, 0.10, …, 1.00.
pub fn default_eta_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

impl RiotParams {
    pub fn validate(&self) -> Result<(), RiotError> {
        if self.n_random == 0 {
            return Err(RiotError::InvalidParams("n_random must be positive".into()));
        }
        if self.eta_grid.is_empty() {
            return Err(RiotError::InvalidParams("eta grid is empty".into()));
        }
        if let Some(eta) = self.eta_grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(RiotError::InvalidParams(format!("eta {eta} is outside [0, 1]")));
        }
        if !(self.distance_alpha >= 1.0 && self.distance_alpha.is_finite()) {
            return Err(RiotError::InvalidParams(format!(
                "distance exponent {} must be a finite value >= 1",
                self.distance_alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiotOutcome {
    pub frontier: ScheduleFrontier,
    /// Simulator calls made, anchors plus re-simulations.
    pub simulations: usize,
    /// Candidates scored over the whole η sweep (|S|).
    pub candidates: usize,
    /// Candidates re-simulated (|S_B|, minus anchors with `keep_anchors`).
    pub resimulated: usize,
}

struct Candidate {
    clustering: usize,
    eta: f64,
    mapping: TypeMapping,
}

/// Runs the full RIOT pipeline.
pub fn riot_schedule<S: Simulator + ?Sized>(
    workflow: &Workflow,
    params: &RiotParams,
    simulator: &S,
) -> Result<RiotOutcome, RiotError> {
    params.validate()?;
    let counter = CountingSimulator::new(simulator);
    let order = b_rank(workflow, &mut rng::stream(params.seed, 0));

    let per_eta: Vec<(Clustering, Vec<TypeMapping>)> = params
        .eta_grid
        .par_iter()
        .enumerate()
        .map(|(k, &eta)| {
            let k = k as u64;
            let clustering = task_group(workflow, eta, &mut rng::stream(params.seed, 1 + 2 * k));
            let mut draws = rng::stream(params.seed, 2 + 2 * k);
            let mappings = match surrogate_evaluate(&clustering, workflow, &order, &counter, params, &mut draws) {
                Ok(m) => m,
                Err(RiotError::DegenerateAnchors) => anchors_only(&clustering, workflow, &order, &counter, params, &mut draws)?,
                Err(e) => return Err(e),
            };
            Ok((clustering, mappings))
        })
        .collect::<Result<_, RiotError>>()?;

    let mut candidates = Vec::new();
    let mut clusterings = Vec::with_capacity(per_eta.len());
    for (k, (clustering, mappings)) in per_eta.into_iter().enumerate() {
        candidates.extend(mappings.into_iter().map(|mapping| Candidate {
            clustering: k,
            eta: params.eta_grid[k],
            mapping,
        }));
        clusterings.push(clustering);
    }
    let n_candidates = candidates.len();

    let objectives: Vec<ObjectivePoint> = candidates
        .iter()
        .map(|c| {
            let (m, s) = c.mapping.objectives.expect("every candidate is scored");
            ObjectivePoint::new(m, s)
        })
        .collect();
    // Identical schedules may come from different η values; simulate once.
    let mut seen = HashSet::new();
    let best: Vec<&Candidate> = nondominated_indices(&objectives)
        .into_iter()
        .map(|i| &candidates[i])
        .filter(|c| seen.insert((&clusterings[c.clustering], &c.mapping.assignment)))
        .collect();

    let catalog = simulator.catalog();
    let mut resimulated: Vec<FrontierPoint> = best
        .par_iter()
        .filter(|c| !(params.keep_anchors && c.mapping.provenance == Provenance::AnchorSimulated))
        .map(|c| {
            let schedule = schedule_for(&clusterings[c.clustering], &c.mapping.assignment, &order, catalog);
            let ev = counter.simulate(workflow, &schedule)?;
            Ok(FrontierPoint {
                schedule,
                makespan: ev.makespan,
                cost: ev.cost,
                eta: Some(c.eta),
                provenance: Provenance::Resimulated,
            })
        })
        .collect::<Result<_, RiotError>>()?;
    let n_resimulated = resimulated.len();
    if params.keep_anchors {
        let mut kept: HashSet<_> = best
            .iter()
            .filter(|c| c.mapping.provenance != Provenance::AnchorSimulated)
            .map(|c| (&clusterings[c.clustering], &c.mapping.assignment))
            .collect();
        for c in candidates.iter().filter(|c| c.mapping.provenance == Provenance::AnchorSimulated) {
            if !kept.insert((&clusterings[c.clustering], &c.mapping.assignment)) {
                continue;
            }
            let (makespan, cost) = c.mapping.objectives.expect("anchors are simulated");
            resimulated.push(FrontierPoint {
                schedule: schedule_for(&clusterings[c.clustering], &c.mapping.assignment, &order, catalog),
                makespan,
                cost,
                eta: Some(c.eta),
                provenance: Provenance::AnchorSimulated,
            });
        }
    }

    Ok(RiotOutcome {
        frontier: ScheduleFrontier::from_candidates(resimulated),
        simulations: counter.calls(),
        candidates: n_candidates,
        resimulated: n_resimulated,
    })
}

/// Fallback when the anchors cannot support extrapolation: only the
/// simulated anchors become candidates.
fn anchors_only<S: Simulator + ?Sized>(
    clustering: &Clustering,
    workflow: &Workflow,
    order: &[TaskIdx],
    simulator: &S,
    params: &RiotParams,
    rng: &mut rng::StreamRng,
) -> Result<Vec<TypeMapping>, RiotError> {
    let anchors = anchor_mappings(
        clustering.n_clusters,
        simulator.catalog().len(),
        params.n_anchor_extra,
        rng,
    );
    surrogate::simulate_anchors(clustering, workflow, order, &simulator, anchors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{default_catalog, Catalog, VmType};
    use crate::sim::{simulate, EventSimulator};
    use crate::workflow::fixtures::three_chains;
    use crate::workflow::Task;

    fn small_params(seed: u64) -> RiotParams {
        RiotParams {
            n_random: 60,
            n_anchor_extra: 6,
            eta_grid: vec![0.2, 0.5, 0.8],
            seed,
            ..RiotParams::default()
        }
    }

    #[test]
    fn defaults() {
        let p = RiotParams::default();
        assert_eq!((p.n_random, p.n_anchor_extra, p.distance_alpha), (500, 30, 1.0));
        assert_eq!(p.eta_grid.len(), 20);
        assert!((p.eta_grid[0] - 0.05).abs() < 1e-15 && p.eta_grid[19] == 1.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_bad_params() {
        let bad = [
            RiotParams { n_random: 0, ..RiotParams::default() },
            RiotParams { eta_grid: vec![1.5], ..RiotParams::default() },
            RiotParams { eta_grid: vec![], ..RiotParams::default() },
            RiotParams { distance_alpha: 0.5, ..RiotParams::default() },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(RiotError::InvalidParams(_))), "{p:?}");
        }
    }

    #[test]
    fn single_task_frontier_is_subset_of_iso_options() {
        let wf = Workflow::validate(vec![Task::new("solo", 3.75 * 1000.0)], vec![]).unwrap();
        let cat = default_catalog();
        let out = riot_schedule(&wf, &small_params(3), &EventSimulator::new(&cat)).unwrap();
        let options: Vec<(f64, f64)> = (0..cat.len())
            .map(|r| {
                let s = schedule_for(&Clustering { task_to_cluster: vec![0], n_clusters: 1 }, &[r], &[0], &cat);
                let ev = simulate(&wf, &s, &cat).unwrap();
                (ev.makespan, ev.cost)
            })
            .collect();
        assert!(out.frontier.points.iter().any(|p| p.makespan == 1000.0 && p.cost == 0.067));
        for p in &out.frontier.points {
            assert!(options.contains(&(p.makespan, p.cost)));
            let me = ObjectivePoint::new(p.makespan, p.cost);
            assert!(options.iter().all(|&(m, c)| !ObjectivePoint::new(m, c).dominates(&me)));
            assert_eq!(p.provenance, Provenance::Resimulated);
        }
    }

    #[test]
    fn deterministic_and_within_budget() {
        let wf = three_chains();
        let cat = default_catalog();
        let sim = EventSimulator::new(&cat);
        let params = small_params(11);
        let a = riot_schedule(&wf, &params, &sim).unwrap();
        let b = riot_schedule(&wf, &params, &sim).unwrap();
        assert_eq!(a, b);
        assert!(a.simulations <= 3 * (8 + 6) + a.resimulated);
        assert_eq!(a.candidates, 3 * (8 + 6 + 60));
        for (i, p) in a.frontier.points.iter().enumerate() {
            let ev = simulate(&wf, &p.schedule, &cat).unwrap();
            assert_eq!((ev.makespan, ev.cost), (p.makespan, p.cost));
            for q in &a.frontier.points[i + 1..] {
                let (pp, qq) = (ObjectivePoint::new(p.makespan, p.cost), ObjectivePoint::new(q.makespan, q.cost));
                assert!(!pp.dominates(&qq) && !qq.dominates(&pp));
            }
        }
    }

    #[test]
    fn keeping_anchors_never_loses_simulated_points() {
        let wf = three_chains();
        let cat = default_catalog();
        let sim = EventSimulator::new(&cat);
        let plain = riot_schedule(&wf, &small_params(5), &sim).unwrap();
        let kept = riot_schedule(&wf, &RiotParams { keep_anchors: true, ..small_params(5) }, &sim).unwrap();
        assert!(kept.simulations <= plain.simulations);
        // Every kept point is either simulated anew or an exact anchor value.
        for p in &kept.frontier.points {
            let ev = simulate(&wf, &p.schedule, &cat).unwrap();
            assert_eq!((ev.makespan, ev.cost), (p.makespan, p.cost));
        }
        // No iso-mapping of the η = 0.2 clustering dominates the kept frontier.
        let front: Vec<ObjectivePoint> = kept.frontier.objective_points();
        let clustering = task_group(&wf, 0.2, &mut rng::stream(5, 1));
        let order = b_rank(&wf, &mut rng::stream(5, 0));
        for r in 0..cat.len() {
            let s = schedule_for(&clustering, &vec![r; clustering.n_clusters], &order, &cat);
            let ev = simulate(&wf, &s, &cat).unwrap();
            let iso = ObjectivePoint::new(ev.makespan, ev.cost);
            assert!(front.iter().all(|p| !iso.dominates(p)));
        }
    }

    #[test]
    fn single_type_catalog_falls_back_to_anchors() {
        let cat = Catalog::new(vec![VmType::new("only", 2.0, 100.0, 0.5)], 3600.0).unwrap();
        let wf = three_chains();
        let params = RiotParams { n_anchor_extra: 0, ..small_params(1) };
        let out = riot_schedule(&wf, &params, &EventSimulator::new(&cat)).unwrap();
        assert!(!out.frontier.is_empty());
        assert_eq!(out.candidates, 3);
    }
}

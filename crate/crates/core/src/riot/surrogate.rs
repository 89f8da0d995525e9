//! Anchor-based surrogate scoring of VM-type mappings.
//!
//! A mapping assigns a catalog type to every cluster; it is handled as the
//! vector of the types' price ranks. A few anchor mappings are simulated.
//! Any other mapping `r` is scored per objective by projecting it onto the
//! segment from its nearest anchor `a_n` to the anchor `a_f` furthest from
//! `a_n`:
//!
//! ```text
//! o(r) = o(a_n) + dist(a_n, r) / dist(a_n, a_f) * cos(theta) * (o(a_f) - o(a_n))
//! ```
//!
//! where `dist` is the rank-space Minkowski distance and `theta` the angle
//! between `r - a_n` and `a_f - a_n`.

use rand::Rng;
use rayon::prelude::*;

use super::{Clustering, RiotError, RiotParams};
use crate::catalog::Catalog;
use crate::frontier::Provenance;
use crate::sim::{Schedule, Simulator};
use crate::workflow::{TaskIdx, Workflow};

/// VM-type ranks indexed by cluster, with objectives once known.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeMapping {
    pub assignment: Vec<usize>,
    /// (makespan, cost)
    pub objectives: Option<(f64, f64)>,
    pub provenance: Provenance,
}

impl TypeMapping {
    pub fn names(&self, catalog: &Catalog) -> Vec<String> {
        self.assignment
            .iter()
            .map(|&r| catalog.by_rank(r).name.clone())
            .collect()
    }

    /// Builds a mapping from type names.
    pub fn from_names<S: AsRef<str>>(names: &[S], catalog: &Catalog) -> Result<Self, RiotError> {
        let assignment = names
            .iter()
            .map(|n| {
                catalog
                    .rank(n.as_ref())
                    .ok_or_else(|| RiotError::UnknownType(n.as_ref().to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(TypeMapping {
            assignment,
            objectives: None,
            provenance: Provenance::SurrogateEstimated,
        })
    }
}

/// Minkowski distance of order `alpha` between two rank vectors of equal length.
pub fn rank_distance(x: &[usize], y: &[usize], alpha: f64) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    if alpha == 1.0 {
        return x.iter().zip(y).map(|(&a, &b)| a.abs_diff(b) as f64).sum();
    }
    x.iter()
        .zip(y)
        .map(|(&a, &b)| (a.abs_diff(b) as f64).powf(alpha))
        .sum::<f64>()
        .powf(alpha.recip())
}

pub fn mapping_distance(x: &TypeMapping, y: &TypeMapping, alpha: f64) -> Result<f64, RiotError> {
    if x.assignment.len() != y.assignment.len() {
        return Err(RiotError::LengthMismatch(x.assignment.len(), y.assignment.len()));
    }
    Ok(rank_distance(&x.assignment, &y.assignment, alpha))
}

/// Simulated anchors plus, for each anchor, the index of the anchor furthest
/// from it.
#[derive(Debug, Clone)]
pub struct Surrogate {
    anchors: Vec<(Vec<usize>, [f64; 2])>,
    furthest: Vec<usize>,
    alpha: f64,
}

impl Surrogate {
    /// Fails with [`RiotError::DegenerateAnchors`] when all anchors coincide.
    pub fn new(anchors: Vec<(Vec<usize>, [f64; 2])>, alpha: f64) -> Result<Self, RiotError> {
        if anchors.is_empty() {
            return Err(RiotError::DegenerateAnchors);
        }
        let furthest: Vec<usize> = (0..anchors.len())
            .map(|i| {
                let mut best = (i, 0.0);
                for (j, (a, _)) in anchors.iter().enumerate() {
                    let d = rank_distance(&anchors[i].0, a, alpha);
                    if d > best.1 {
                        best = (j, d);
                    }
                }
                best.0
            })
            .collect();
        if furthest.iter().enumerate().all(|(i, &f)| i == f) {
            return Err(RiotError::DegenerateAnchors);
        }
        Ok(Surrogate {
            anchors,
            furthest,
            alpha,
        })
    }

    pub fn nearest(&self, r: &[usize]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, (a, _)) in self.anchors.iter().enumerate() {
            let d = rank_distance(a, r, self.alpha);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Estimated (makespan, cost) of mapping `r`.
    pub fn estimate(&self, r: &[usize]) -> [f64; 2] {
        let n = self.nearest(r);
        let (a_n, o_n) = &self.anchors[n];
        let (a_f, o_f) = &self.anchors[self.furthest[n]];
        let d0 = rank_distance(a_n, r, self.alpha);
        if d0 == 0.0 {
            return *o_n;
        }
        let d1 = rank_distance(a_n, a_f, self.alpha);
        if d1 == 0.0 {
            // a_n has no distinct anchor to extrapolate towards.
            return *o_n;
        }
        let scale = d0 / d1 * cos_angle(a_n, r, a_f);
        [
            o_n[0] + scale * (o_f[0] - o_n[0]),
            o_n[1] + scale * (o_f[1] - o_n[1]),
        ]
    }
}

/// Cosine of the angle at `origin` between `r - origin` and `f - origin`.
fn cos_angle(origin: &[usize], r: &[usize], f: &[usize]) -> f64 {
    let (mut dot, mut nr, mut nf) = (0.0, 0.0, 0.0);
    for ((&o, &a), &b) in origin.iter().zip(r).zip(f) {
        let u = a as f64 - o as f64;
        let v = b as f64 - o as f64;
        dot += u * v;
        nr += u * u;
        nf += v * v;
    }
    dot / (nr.sqrt() * nf.sqrt())
}

/// Anchors for one clustering: one iso-mapping per catalog type followed by
/// `extra` uniformly random mappings.
pub fn anchor_mappings<R: Rng + ?Sized>(
    n_clusters: usize,
    n_types: usize,
    extra: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let mut anchors: Vec<Vec<usize>> = (0..n_types).map(|t| vec![t; n_clusters]).collect();
    anchors.extend((0..extra).map(|_| random_mapping(n_clusters, n_types, rng)));
    anchors
}

pub fn random_mapping<R: Rng + ?Sized>(n_clusters: usize, n_types: usize, rng: &mut R) -> Vec<usize> {
    (0..n_clusters).map(|_| rng.gen_range(0..n_types)).collect()
}

pub fn schedule_for(clustering: &Clustering, mapping: &[usize], order: &[TaskIdx], catalog: &Catalog) -> Schedule {
    Schedule {
        task_to_cluster: clustering.task_to_cluster.clone(),
        cluster_to_type: mapping.iter().map(|&r| catalog.by_rank(r).name.clone()).collect(),
        secondary_order: order.to_vec(),
    }
}

/// Simulates every anchor mapping (in parallel, results in input order).
pub(crate) fn simulate_anchors(
    clustering: &Clustering,
    workflow: &Workflow,
    order: &[TaskIdx],
    simulator: &dyn Simulator,
    anchors: Vec<Vec<usize>>,
) -> Result<Vec<TypeMapping>, RiotError> {
    let catalog = simulator.catalog();
    anchors
        .into_par_iter()
        .map(|a| {
            let ev = simulator.simulate(workflow, &schedule_for(clustering, &a, order, catalog))?;
            Ok(TypeMapping {
                assignment: a,
                objectives: Some((ev.makespan, ev.cost)),
                provenance: Provenance::AnchorSimulated,
            })
        })
        .collect()
}

/// Scores `params.n_random` random mappings for one clustering.
///
/// Returns the simulated anchors followed by the estimated random mappings.
/// Random draws happen before any parallel work, so the result only depends
/// on `rng`'s state.
pub fn surrogate_evaluate<R: Rng + ?Sized>(
    clustering: &Clustering,
    workflow: &Workflow,
    order: &[TaskIdx],
    simulator: &dyn Simulator,
    params: &RiotParams,
    rng: &mut R,
) -> Result<Vec<TypeMapping>, RiotError> {
    if clustering.n_clusters == 0 {
        return Err(RiotError::InvalidParams("clustering has no clusters".into()));
    }
    let n_types = simulator.catalog().len();
    let anchor_maps = anchor_mappings(clustering.n_clusters, n_types, params.n_anchor_extra, rng);
    let randoms: Vec<Vec<usize>> = (0..params.n_random)
        .map(|_| random_mapping(clustering.n_clusters, n_types, rng))
        .collect();
    let anchors = simulate_anchors(clustering, workflow, order, simulator, anchor_maps)?;
    let surrogate = Surrogate::new(
        anchors
            .iter()
            .map(|a| {
                let (m, c) = a.objectives.expect("anchors are simulated");
                (a.assignment.clone(), [m, c])
            })
            .collect(),
        params.distance_alpha,
    )?;
    let estimated: Vec<TypeMapping> = randoms
        .into_par_iter()
        .map(|r| {
            let [m, c] = surrogate.estimate(&r);
            TypeMapping {
                assignment: r,
                objectives: Some((m, c)),
                provenance: Provenance::SurrogateEstimated,
            }
        })
        .collect();
    let mut out = anchors;
    out.extend(estimated);
    Ok(out)
}

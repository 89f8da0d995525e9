//! Pareto filtering and frontier quality measures for the two minimized
//! objectives (makespan, cost).
//!
//! Hypervolume, IGD and spread are defined on normalized points: both
//! objectives mapped to `[0, 1]` with bounds shared by every frontier under
//! comparison (see [`Bounds::from_union`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate bounds for {0}: max equals min")]
    DegenerateBounds(&'static str),
    #[error("point ({0}, {1}) lies outside the unit square")]
    OutOfRange(f64, f64),
    #[error("need at least two points, got {0}")]
    NotEnoughPoints(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub makespan: f64,
    pub cost: f64,
    /// Caller-defined reference back to the schedule behind the point.
    #[serde(default)]
    pub tag: usize,
}

impl ObjectivePoint {
    pub fn new(makespan: f64, cost: f64) -> Self {
        ObjectivePoint {
            makespan,
            cost,
            tag: 0,
        }
    }

    pub fn tagged(makespan: f64, cost: f64, tag: usize) -> Self {
        ObjectivePoint { makespan, cost, tag }
    }

    /// At least as good in both objectives and strictly better in one.
    pub fn dominates(&self, other: &ObjectivePoint) -> bool {
        self.makespan <= other.makespan
            && self.cost <= other.cost
            && (self.makespan < other.makespan || self.cost < other.cost)
    }
}

/// Indices of the non-dominated points, in input order. Points with
/// identical objectives are all kept.
pub fn nondominated_indices(points: &[ObjectivePoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .makespan
            .total_cmp(&points[b].makespan)
            .then(points[a].cost.total_cmp(&points[b].cost))
    });
    let mut keep = Vec::new();
    // Lowest cost among points with strictly smaller makespan.
    let mut best_before = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        let mk = points[order[i]].makespan;
        let mut j = i;
        while j < order.len() && points[order[j]].makespan == mk {
            j += 1;
        }
        // Sorted by cost within the group, so the first one has the group minimum.
        let group_min = points[order[i]].cost;
        if group_min < best_before {
            keep.extend(
                order[i..j]
                    .iter()
                    .copied()
                    .take_while(|&k| points[k].cost == group_min),
            );
            best_before = group_min;
        }
        i = j;
    }
    keep.sort_unstable();
    keep
}

pub fn nondominated(points: &[ObjectivePoint]) -> Result<Vec<ObjectivePoint>, MetricsError> {
    if points.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(nondominated_indices(points).into_iter().map(|i| points[i]).collect())
}

/// Per-objective (min, max) used for normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub makespan: (f64, f64),
    pub cost: (f64, f64),
}

impl Bounds {
    /// Bounds spanning every point of every given frontier.
    pub fn from_union<'a, I>(frontiers: I) -> Result<Bounds, MetricsError>
    where
        I: IntoIterator<Item = &'a [ObjectivePoint]>,
    {
        let mut b = Bounds {
            makespan: (f64::INFINITY, f64::NEG_INFINITY),
            cost: (f64::INFINITY, f64::NEG_INFINITY),
        };
        let mut any = false;
        for p in frontiers.into_iter().flatten() {
            any = true;
            b.makespan = (b.makespan.0.min(p.makespan), b.makespan.1.max(p.makespan));
            b.cost = (b.cost.0.min(p.cost), b.cost.1.max(p.cost));
        }
        if any {
            Ok(b)
        } else {
            Err(MetricsError::EmptyInput)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub points: Vec<ObjectivePoint>,
    /// Set when some coordinate fell outside the bounds and was clamped.
    pub clamped: bool,
}

/// Affine map of both objectives onto `[0, 1]`.
pub fn normalize(points: &[ObjectivePoint], bounds: &Bounds) -> Result<Normalized, MetricsError> {
    let (m0, m1) = bounds.makespan;
    let (c0, c1) = bounds.cost;
    if m1.partial_cmp(&m0) != Some(std::cmp::Ordering::Greater) {
        return Err(MetricsError::DegenerateBounds("makespan"));
    }
    if c1.partial_cmp(&c0) != Some(std::cmp::Ordering::Greater) {
        return Err(MetricsError::DegenerateBounds("cost"));
    }
    let mut clamped = false;
    let mut scale = |v: f64, lo: f64, hi: f64| {
        let x = (v - lo) / (hi - lo);
        if !(0.0..=1.0).contains(&x) {
            clamped = true;
        }
        x.clamp(0.0, 1.0)
    };
    let points = points
        .iter()
        .map(|p| ObjectivePoint {
            makespan: scale(p.makespan, m0, m1),
            cost: scale(p.cost, c0, c1),
            tag: p.tag,
        })
        .collect();
    Ok(Normalized { points, clamped })
}

fn check_unit(points: &[ObjectivePoint]) -> Result<(), MetricsError> {
    match points
        .iter()
        .find(|p| !(0.0..=1.0).contains(&p.makespan) || !(0.0..=1.0).contains(&p.cost))
    {
        Some(p) => Err(MetricsError::OutOfRange(p.makespan, p.cost)),
        None => Ok(()),
    }
}

/// Area of the unit square dominated by the points, with reference point
/// (1, 1). Dominated input points are harmless.
pub fn hypervolume(normalized: &[ObjectivePoint]) -> Result<f64, MetricsError> {
    check_unit(normalized)?;
    let mut pts: Vec<(f64, f64)> = normalized.iter().map(|p| (p.makespan, p.cost)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = 1.0;
    for (x, y) in pts {
        if y < ceiling {
            area += (1.0 - x) * (ceiling - y);
            ceiling = y;
        }
    }
    Ok(area)
}

/// Which set the IGD average runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IgdDirection {
    /// Mean over reference points of the distance to the nearest obtained
    /// point (the usual IGD).
    #[default]
    ReferenceToFrontier,
    /// Mean over obtained points of the distance to the nearest reference
    /// point (generational distance).
    FrontierToReference,
}

pub fn igd(
    frontier: &[ObjectivePoint],
    reference: &[ObjectivePoint],
    direction: IgdDirection,
) -> Result<f64, MetricsError> {
    if frontier.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (from, to) = match direction {
        IgdDirection::ReferenceToFrontier => (reference, frontier),
        IgdDirection::FrontierToReference => (frontier, reference),
    };
    let total: f64 = from
        .iter()
        .map(|a| {
            to.iter()
                .map(|b| distance(a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / from.len() as f64)
}

fn distance(a: &ObjectivePoint, b: &ObjectivePoint) -> f64 {
    (a.makespan - b.makespan).hypot(a.cost - b.cost)
}

/// Gap uniformity of a frontier: sort by makespan, take Euclidean gaps
/// between consecutive points and return their mean absolute deviation
/// divided by the mean gap. 0 means perfectly even spacing.
pub fn spread(normalized: &[ObjectivePoint]) -> Result<f64, MetricsError> {
    if normalized.len() < 2 {
        return Err(MetricsError::NotEnoughPoints(normalized.len()));
    }
    let mut pts = normalized.to_vec();
    pts.sort_by(|a, b| a.makespan.total_cmp(&b.makespan).then(a.cost.total_cmp(&b.cost)));
    let gaps: Vec<f64> = pts.windows(2).map(|w| distance(&w[0], &w[1])).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if mean == 0.0 {
        return Ok(0.0);
    }
    let deviation = gaps.iter().map(|g| (g - mean).abs()).sum::<f64>() / gaps.len() as f64;
    Ok(deviation / mean)
}

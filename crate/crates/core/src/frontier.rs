//! Scheduler output: Pareto sets of complete schedules, plus their CSV and
//! JSON encodings.
//!
//! CSV columns are fixed: `makespan_s,cost_usd,n_vms,eta,provenance,mapping`
//! where `eta` is empty for schedulers without one and `mapping` lists the
//! VM type of each cluster separated by `;`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{nondominated_indices, ObjectivePoint};
use crate::sim::{Schedule, ScheduleDoc, SimError};
use crate::workflow::Workflow;

#[derive(Debug, Error)]
pub enum FrontierError {
    #[error("malformed frontier: {0}")]
    Malformed(String),
    #[error(transparent)]
    Schedule(#[from] SimError),
}

/// Where a point's objectives came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Simulated as one of the anchors of the surrogate.
    AnchorSimulated,
    /// Estimated by extrapolating between anchors.
    SurrogateEstimated,
    /// Estimated first, then confirmed by simulation.
    Resimulated,
    /// Simulated directly by a baseline.
    Simulated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::AnchorSimulated => "anchor-simulated",
            Provenance::SurrogateEstimated => "surrogate-estimated",
            Provenance::Resimulated => "resimulated",
            Provenance::Simulated => "simulated",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = FrontierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Provenance::AnchorSimulated,
            Provenance::SurrogateEstimated,
            Provenance::Resimulated,
            Provenance::Simulated,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| FrontierError::Malformed(format!("unknown provenance `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub schedule: Schedule,
    pub makespan: f64,
    pub cost: f64,
    pub eta: Option<f64>,
    pub provenance: Provenance,
}

impl FrontierPoint {
    pub fn n_vms(&self) -> usize {
        self.schedule.n_clusters()
    }
}

/// A set of mutually non-dominated schedules, sorted by makespan then cost.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScheduleFrontier {
    pub points: Vec<FrontierPoint>,
}

impl ScheduleFrontier {
    /// Keeps the non-dominated candidates and sorts them.
    pub fn from_candidates(candidates: Vec<FrontierPoint>) -> Self {
        let objectives: Vec<ObjectivePoint> = candidates
            .iter()
            .map(|p| ObjectivePoint::new(p.makespan, p.cost))
            .collect();
        let keep = nondominated_indices(&objectives);
        let mut slots: Vec<Option<FrontierPoint>> = candidates.into_iter().map(Some).collect();
        let mut points: Vec<FrontierPoint> = keep
            .into_iter()
            .map(|i| slots[i].take().expect("indices are unique"))
            .collect();
        points.sort_by(|a, b| a.makespan.total_cmp(&b.makespan).then(a.cost.total_cmp(&b.cost)));
        ScheduleFrontier { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Objective points tagged with their index in `points`.
    pub fn objective_points(&self) -> Vec<ObjectivePoint> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| ObjectivePoint::tagged(p.makespan, p.cost, i))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for p in &self.points {
            w.write_record([
                p.makespan.to_string(),
                p.cost.to_string(),
                p.n_vms().to_string(),
                p.eta.map(|e| e.to_string()).unwrap_or_default(),
                p.provenance.to_string(),
                p.schedule.cluster_to_type.join(";"),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_doc(&self, workflow: &Workflow, meta: RunMeta) -> FrontierDoc {
        FrontierDoc {
            meta,
            points: self
                .points
                .iter()
                .map(|p| FrontierPointDoc {
                    makespan_s: p.makespan,
                    cost_usd: p.cost,
                    n_vms: p.n_vms(),
                    eta: p.eta,
                    provenance: p.provenance,
                    schedule: p.schedule.to_doc(workflow),
                })
                .collect(),
        }
    }
}

pub const CSV_HEADER: [&str; 6] = ["makespan_s", "cost_usd", "n_vms", "eta", "provenance", "mapping"];

/// Provenance of a run, embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub catalog_sha256: String,
    pub version: String,
    pub simulations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierDoc {
    pub meta: RunMeta,
    pub points: Vec<FrontierPointDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPointDoc {
    pub makespan_s: f64,
    pub cost_usd: f64,
    pub n_vms: usize,
    pub eta: Option<f64>,
    pub provenance: Provenance,
    pub schedule: ScheduleDoc,
}

/// Reads the objective values from a frontier file in either encoding.
pub fn read_objectives(text: &str) -> Result<Vec<ObjectivePoint>, FrontierError> {
    if text.trim_start().starts_with('{') {
        let doc: FrontierDoc = serde_json::from_str(text).map_err(|e| {
            FrontierError::Malformed(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        return Ok(doc
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| ObjectivePoint::tagged(p.makespan_s, p.cost_usd, i))
            .collect());
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| FrontierError::Malformed(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FrontierError::Malformed(format!("missing column `{name}`")))
    };
    let (mi, ci) = (column("makespan_s")?, column("cost_usd")?);
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FrontierError::Malformed(e.to_string()))?;
        let field = |i: usize| -> Result<f64, FrontierError> {
            let raw = record.get(i).unwrap_or("");
            raw.parse().map_err(|_| {
                FrontierError::Malformed(format!("row {}: `{raw}` is not a number", row + 2))
            })
        };
        out.push(ObjectivePoint::tagged(field(mi)?, field(ci)?, row));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(m: f64, c: f64, eta: Option<f64>) -> FrontierPoint {
        FrontierPoint {
            schedule: Schedule {
                task_to_cluster: vec![0],
                cluster_to_type: vec!["m3.medium".into()],
                secondary_order: vec![0],
            },
            makespan: m,
            cost: c,
            eta,
            provenance: Provenance::Resimulated,
        }
    }

    #[test]
    fn from_candidates_filters_and_sorts() {
        let f = ScheduleFrontier::from_candidates(vec![
            point(3.0, 1.0, None),
            point(1.0, 3.0, None),
            point(3.0, 3.0, None),
            point(2.0, 2.0, None),
        ]);
        let obj: Vec<(f64, f64)> = f.points.iter().map(|p| (p.makespan, p.cost)).collect();
        assert_eq!(obj, vec![(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]);
    }

    #[test]
    fn csv_round_trips_objectives() {
        let f = ScheduleFrontier::from_candidates(vec![point(1.5, 0.2, Some(0.05)), point(0.75, 0.4, None)]);
        let csv = f.to_csv();
        assert!(csv.starts_with("makespan_s,cost_usd,n_vms,eta,provenance,mapping\n"));
        assert!(csv.contains("1.5,0.2,1,0.05,resimulated,m3.medium"));
        let back = read_objectives(&csv).unwrap();
        assert_eq!(back, f.objective_points());
    }

    #[test]
    fn malformed_csv_is_reported() {
        assert!(matches!(read_objectives("a,b\n1,2\n"), Err(FrontierError::Malformed(_))));
        assert!(matches!(
            read_objectives("makespan_s,cost_usd\nx,2\n"),
            Err(FrontierError::Malformed(_))
        ));
        assert!(matches!(read_objectives("{\"meta\": 1}"), Err(FrontierError::Malformed(_))));
    }

    #[test]
    fn provenance_names_parse() {
        for p in ["anchor-simulated", "surrogate-estimated", "resimulated", "simulated"] {
            assert_eq!(p.parse::<Provenance>().unwrap().as_str(), p);
        }
    }
}

//! Workflow DAGs: tasks with reference workloads, data edges with file sizes,
//! and the single start/exit normalization every scheduler relies on.
//!
//! A [`Workflow`] is only ever built through [`Workflow::validate`] (or the
//! parsers and generators that call it), so holding one means the graph is
//! acyclic, has exactly one source and one sink, and every task lies on a
//! path from the start task to the exit task.

mod dax;
mod generate;
mod json;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dax::parse_dax;
pub use generate::{generate, generate_with, GeneratorConfig, Shape};
pub use json::{parse_json, to_json};

/// Id prefix used for the synthetic start task inserted by validation.
pub const SYNTHETIC_START: &str = "__start__";
/// Id prefix used for the synthetic exit task inserted by validation.
pub const SYNTHETIC_EXIT: &str = "__exit__";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkflowError {
    #[error("workflow has no tasks")]
    EmptyWorkflow,
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("edge refers to undeclared task `{0}`")]
    DanglingEdge(String),
    #[error("duplicate task id `{0}`")]
    DuplicateTask(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("self loop on task `{0}`")]
    SelfLoop(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("malformed input at {position}: {reason}")]
    MalformedInput { position: String, reason: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("unknown workflow shape `{0}`")]
    UnknownShape(String),
    #[error("shape `{shape}` needs at least {min} tasks, got {requested}")]
    TooSmall {
        shape: String,
        min: usize,
        requested: usize,
    },
}

/// A unit of computation. `workload` is the execution time in seconds on a
/// machine with one compute unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub workload: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl Task {
    pub fn new(id: impl Into<String>, workload: f64) -> Self {
        Task {
            id: id.into(),
            workload,
            label: None,
            synthetic: false,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Data dependency: `to` may start only after `from` finished, and `bytes`
/// must be shipped between them when they run on different VMs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataEdge {
    pub from: String,
    pub to: String,
    pub bytes: f64,
}

impl DataEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, bytes: f64) -> Self {
        DataEdge {
            from: from.into(),
            to: to.into(),
            bytes,
        }
    }
}

/// Dense index of a task inside a [`Workflow`].
pub type TaskIdx = usize;

/// A validated, immutable workflow DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    tasks: Vec<Task>,
    edges: Vec<DataEdge>,
    index: HashMap<String, TaskIdx>,
    preds: Vec<Vec<(TaskIdx, f64)>>,
    succs: Vec<Vec<(TaskIdx, f64)>>,
    topo: Vec<TaskIdx>,
    start: TaskIdx,
    exit: TaskIdx,
}

impl Workflow {
    /// Validates raw tasks and edges, inserting a synthetic zero-workload
    /// start (exit) task when there are several sources (sinks).
    pub fn validate(mut tasks: Vec<Task>, mut edges: Vec<DataEdge>) -> Result<Self, WorkflowError> {
        if tasks.is_empty() {
            return Err(WorkflowError::EmptyWorkflow);
        }
        let mut index = HashMap::with_capacity(tasks.len() + 2);
        for (i, t) in tasks.iter().enumerate() {
            if !t.workload.is_finite() || t.workload < 0.0 {
                return Err(WorkflowError::InvalidValue(format!(
                    "task `{}` has workload {}",
                    t.id, t.workload
                )));
            }
            if index.insert(t.id.clone(), i).is_some() {
                return Err(WorkflowError::DuplicateTask(t.id.clone()));
            }
        }

        let n = tasks.len();
        let mut preds: Vec<Vec<(TaskIdx, f64)>> = vec![Vec::new(); n];
        let mut succs: Vec<Vec<(TaskIdx, f64)>> = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            let from = *index
                .get(&e.from)
                .ok_or_else(|| WorkflowError::DanglingEdge(e.from.clone()))?;
            let to = *index
                .get(&e.to)
                .ok_or_else(|| WorkflowError::DanglingEdge(e.to.clone()))?;
            if from == to {
                return Err(WorkflowError::SelfLoop(e.from.clone()));
            }
            if !e.bytes.is_finite() || e.bytes < 0.0 {
                return Err(WorkflowError::InvalidValue(format!(
                    "edge `{}` -> `{}` has {} bytes",
                    e.from, e.to, e.bytes
                )));
            }
            if !seen.insert((from, to)) {
                return Err(WorkflowError::DuplicateEdge(e.from.clone(), e.to.clone()));
            }
            succs[from].push((to, e.bytes));
            preds[to].push((from, e.bytes));
        }

        // Cycle check before normalization so reported cycles only name real tasks.
        if let Err(cycle) = kahn(&preds, &succs) {
            let names = cycle.into_iter().map(|i| tasks[i].id.clone()).collect();
            return Err(WorkflowError::CycleDetected(names));
        }

        let sources: Vec<TaskIdx> = (0..n).filter(|&i| preds[i].is_empty()).collect();
        let sinks: Vec<TaskIdx> = (0..n).filter(|&i| succs[i].is_empty()).collect();

        let start = if sources.len() == 1 {
            sources[0]
        } else {
            let id = fresh_id(&index, SYNTHETIC_START);
            let s = push_synthetic(&mut tasks, &mut index, &mut preds, &mut succs, id.clone());
            for &src in &sources {
                succs[s].push((src, 0.0));
                preds[src].push((s, 0.0));
                edges.push(DataEdge::new(id.clone(), tasks[src].id.clone(), 0.0));
            }
            s
        };
        let exit = if sinks.len() == 1 {
            sinks[0]
        } else {
            let id = fresh_id(&index, SYNTHETIC_EXIT);
            let x = push_synthetic(&mut tasks, &mut index, &mut preds, &mut succs, id.clone());
            for &snk in &sinks {
                preds[x].push((snk, 0.0));
                succs[snk].push((x, 0.0));
                edges.push(DataEdge::new(tasks[snk].id.clone(), id.clone(), 0.0));
            }
            x
        };

        for list in preds.iter_mut().chain(succs.iter_mut()) {
            list.sort_by_key(|&(j, _)| j);
        }
        let topo = kahn(&preds, &succs).expect("normalization cannot introduce a cycle");

        Ok(Workflow {
            tasks,
            edges,
            index,
            preds,
            succs,
            topo,
            start,
            exit,
        })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Number of tasks excluding synthetic start/exit nodes.
    pub fn real_task_count(&self) -> usize {
        self.tasks.iter().filter(|t| !t.synthetic).count()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, idx: TaskIdx) -> &Task {
        &self.tasks[idx]
    }

    /// All edges, including the zero-byte edges attached to synthetic nodes.
    pub fn edges(&self) -> &[DataEdge] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<TaskIdx> {
        self.index.get(id).copied()
    }

    /// Predecessors of `idx` with edge sizes, sorted by task index.
    pub fn preds(&self, idx: TaskIdx) -> &[(TaskIdx, f64)] {
        &self.preds[idx]
    }

    /// Successors of `idx` with edge sizes, sorted by task index.
    pub fn succs(&self, idx: TaskIdx) -> &[(TaskIdx, f64)] {
        &self.succs[idx]
    }

    /// A topological order (Kahn's algorithm, smallest index first).
    pub fn topo_order(&self) -> &[TaskIdx] {
        &self.topo
    }

    pub fn start(&self) -> TaskIdx {
        self.start
    }

    pub fn exit(&self) -> TaskIdx {
        self.exit
    }

    /// Checks that `order` is a permutation of all tasks consistent with every edge.
    pub fn is_topological(&self, order: &[TaskIdx]) -> bool {
        if order.len() != self.len() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (p, &t) in order.iter().enumerate() {
            if t >= self.len() || pos[t] != usize::MAX {
                return false;
            }
            pos[t] = p;
        }
        (0..self.len()).all(|i| self.succs[i].iter().all(|&(j, _)| pos[i] < pos[j]))
    }

    /// Tasks and edges as stored, synthetic nodes included and flagged.
    /// Re-validating them yields an identical workflow.
    pub fn raw_parts(&self) -> (Vec<Task>, Vec<DataEdge>) {
        (self.tasks.clone(), self.edges.clone())
    }
}

fn fresh_id(index: &HashMap<String, TaskIdx>, base: &str) -> String {
    if !index.contains_key(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|c| !index.contains_key(c))
        .expect("unbounded search")
}

fn push_synthetic(
    tasks: &mut Vec<Task>,
    index: &mut HashMap<String, TaskIdx>,
    preds: &mut Vec<Vec<(TaskIdx, f64)>>,
    succs: &mut Vec<Vec<(TaskIdx, f64)>>,
    id: String,
) -> TaskIdx {
    let idx = tasks.len();
    index.insert(id.clone(), idx);
    tasks.push(Task {
        id,
        workload: 0.0,
        label: None,
        synthetic: true,
    });
    preds.push(Vec::new());
    succs.push(Vec::new());
    idx
}

/// Kahn's algorithm with a FIFO seeded in index order. On failure returns
/// one cycle found among the unprocessed nodes.
fn kahn(
    preds: &[Vec<(TaskIdx, f64)>],
    succs: &[Vec<(TaskIdx, f64)>],
) -> Result<Vec<TaskIdx>, Vec<TaskIdx>> {
    let n = preds.len();
    let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut queue: VecDeque<TaskIdx> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &(j, _) in &succs[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every leftover node has a leftover predecessor; walk backwards until a
    // node repeats.
    let mut on_path = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut cur = (0..n).find(|&i| indeg[i] > 0).expect("leftover node");
    loop {
        if on_path[cur] != usize::MAX {
            let mut cycle = path[on_path[cur]..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Err(cycle);
        }
        on_path[cur] = path.len();
        path.push(cur);
        cur = preds[cur]
            .iter()
            .map(|&(p, _)| p)
            .find(|&p| indeg[p] > 0)
            .expect("leftover node has a leftover predecessor");
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The seven-task example with three VMs: T_s -> {1,2}, 1->3, 2->4, {3,4}->5, 5->T_e.
    pub fn fig2(workload: f64, bytes: f64) -> Workflow {
        let ids = ["Ts", "1", "2", "3", "4", "5", "Te"];
        let tasks = ids.iter().map(|id| Task::new(*id, workload)).collect();
        let edges = [
            ("Ts", "1"),
            ("Ts", "2"),
            ("1", "3"),
            ("2", "4"),
            ("3", "5"),
            ("4", "5"),
            ("5", "Te"),
        ]
        .iter()
        .map(|(a, b)| DataEdge::new(*a, *b, bytes))
        .collect();
        Workflow::validate(tasks, edges).unwrap()
    }

    /// Start task fanning out to three 3-task chains that join at `d`, then `Te`.
    pub fn three_chains() -> Workflow {
        let mut ids = vec!["Ts".to_string()];
        for c in ["a", "b", "c"] {
            for k in 1..=3 {
                ids.push(format!("{c}{k}"));
            }
        }
        ids.push("d".into());
        ids.push("Te".into());
        let tasks = ids.iter().map(|id| Task::new(id.clone(), 1.0)).collect();
        let mut edges = Vec::new();
        for c in ["a", "b", "c"] {
            edges.push(DataEdge::new("Ts", format!("{c}1"), 0.0));
            edges.push(DataEdge::new(format!("{c}1"), format!("{c}2"), 0.0));
            edges.push(DataEdge::new(format!("{c}2"), format!("{c}3"), 0.0));
            edges.push(DataEdge::new(format!("{c}3"), "d", 0.0));
        }
        edges.push(DataEdge::new("d", "Te", 0.0));
        Workflow::validate(tasks, edges).unwrap()
    }

    pub fn chain(k: usize) -> Workflow {
        let tasks = (0..k).map(|i| Task::new(format!("t{i}"), 1.0)).collect();
        let edges = (1..k)
            .map(|i| DataEdge::new(format!("t{}", i - 1), format!("t{i}"), 0.0))
            .collect();
        Workflow::validate(tasks, edges).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn two_task_workflow_needs_no_synthetic_nodes() {
        let wf = Workflow::validate(
            vec![Task::new("a", 1.0), Task::new("b", 2.0)],
            vec![DataEdge::new("a", "b", 10.0)],
        )
        .unwrap();
        assert_eq!(wf.len(), 2);
        assert_eq!(wf.task(wf.start()).id, "a");
        assert_eq!(wf.task(wf.exit()).id, "b");
        assert!(wf.tasks().iter().all(|t| !t.synthetic));
    }

    #[test]
    fn fig2_topology_is_valid() {
        let wf = fig2(1.0, 0.0);
        assert_eq!(wf.len(), 7);
        assert_eq!(wf.task(wf.start()).id, "Ts");
        assert_eq!(wf.task(wf.exit()).id, "Te");
        assert_eq!(wf.edges().len(), 7);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = Workflow::validate(
            vec![Task::new("a", 1.0), Task::new("b", 1.0)],
            vec![DataEdge::new("a", "b", 0.0), DataEdge::new("b", "a", 0.0)],
        )
        .unwrap_err();
        match err {
            WorkflowError::CycleDetected(c) => {
                assert_eq!(c.len(), 3);
                assert_eq!(c.first(), c.last());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn longer_cycle_is_reported_in_edge_direction() {
        let tasks = ["s", "a", "b", "c"].iter().map(|i| Task::new(*i, 1.0)).collect();
        let edges = vec![
            DataEdge::new("s", "a", 0.0),
            DataEdge::new("a", "b", 0.0),
            DataEdge::new("b", "c", 0.0),
            DataEdge::new("c", "a", 0.0),
        ];
        let Err(WorkflowError::CycleDetected(c)) = Workflow::validate(tasks, edges) else {
            panic!("expected cycle");
        };
        assert_eq!(c.len(), 4);
        for w in c.windows(2) {
            let next = match w[0].as_str() {
                "a" => "b",
                "b" => "c",
                "c" => "a",
                _ => panic!("s is not on the cycle"),
            };
            assert_eq!(w[1], next);
        }
    }

    #[test]
    fn dangling_and_empty_inputs() {
        assert_eq!(
            Workflow::validate(vec![], vec![]).unwrap_err(),
            WorkflowError::EmptyWorkflow
        );
        assert_eq!(
            Workflow::validate(vec![Task::new("a", 1.0)], vec![DataEdge::new("a", "zz", 0.0)])
                .unwrap_err(),
            WorkflowError::DanglingEdge("zz".into())
        );
        assert!(matches!(
            Workflow::validate(vec![Task::new("a", -1.0)], vec![]),
            Err(WorkflowError::InvalidValue(_))
        ));
        assert!(matches!(
            Workflow::validate(vec![Task::new("a", 1.0), Task::new("a", 1.0)], vec![]),
            Err(WorkflowError::DuplicateTask(_))
        ));
    }

    #[test]
    fn multiple_sources_and_sinks_get_synthetic_nodes() {
        let tasks = ["a", "b", "c", "d"].iter().map(|i| Task::new(*i, 1.0)).collect();
        let edges = vec![DataEdge::new("a", "c", 5.0), DataEdge::new("b", "d", 5.0)];
        let wf = Workflow::validate(tasks, edges).unwrap();
        assert_eq!(wf.len(), 6);
        assert_eq!(wf.real_task_count(), 4);
        let s = wf.task(wf.start());
        let e = wf.task(wf.exit());
        assert!(s.synthetic && e.synthetic);
        assert_eq!(s.workload, 0.0);
        assert_eq!(wf.succs(wf.start()).len(), 2);
        assert!(wf.succs(wf.start()).iter().all(|&(_, b)| b == 0.0));
        assert_eq!(wf.preds(wf.exit()).len(), 2);
        assert!(wf.is_topological(wf.topo_order()));
    }

    #[test]
    fn synthetic_id_avoids_collisions() {
        let tasks = vec![Task::new(SYNTHETIC_START, 1.0), Task::new("b", 1.0)];
        let wf = Workflow::validate(tasks, vec![]).unwrap();
        assert_eq!(wf.task(wf.start()).id, format!("{SYNTHETIC_START}1"));
    }

    #[test]
    fn pred_succ_are_consistent() {
        let wf = three_chains();
        for i in 0..wf.len() {
            for &(j, _) in wf.succs(i) {
                assert!(wf.preds(j).iter().any(|&(p, _)| p == i));
            }
            for &(p, _) in wf.preds(i) {
                assert!(wf.succs(p).iter().any(|&(s, _)| s == i));
            }
        }
        assert!(wf.preds(wf.start()).is_empty());
        assert!(wf.succs(wf.exit()).is_empty());
    }

    #[test]
    fn single_task_is_both_start_and_exit() {
        let wf = Workflow::validate(vec![Task::new("only", 3.0)], vec![]).unwrap();
        assert_eq!(wf.start(), wf.exit());
        assert_eq!(chain(1).len(), 1);
    }
}

//! Deterministic discrete-event evaluation of a schedule.
//!
//! Each cluster of a [`Schedule`] is one VM that runs at most one task at a
//! time. Whenever a VM is idle it starts, among its tasks whose predecessors
//! have all finished, the one that comes first in the secondary order. A
//! task's duration is `workload / compute_units` plus the time to ship its
//! outputs to successors placed on other VMs; the transfer occupies the
//! sending VM, so successors see the data at the sender's finish time.
//!
//! A VM is billed from the start of its first task to the finish of its last
//! one, rounded up to whole billing periods.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, VmType, BYTES_PER_MB};
use crate::workflow::{TaskIdx, Workflow};

pub type ClusterId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("incomplete schedule: {0}")]
    IncompleteSchedule(String),
    #[error("secondary order is not a topological order of the workflow: {0}")]
    NonTopologicalOrder(String),
    #[error("unknown VM type `{0}`")]
    UnknownType(String),
    #[error("schedule refers to unknown task `{0}`")]
    UnknownTask(String),
}

/// Task placement, VM types and secondary ordering. Tasks are addressed by
/// their index in the workflow; see [`ScheduleDoc`] for the id-based form.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub task_to_cluster: Vec<ClusterId>,
    pub cluster_to_type: Vec<String>,
    pub secondary_order: Vec<TaskIdx>,
}

impl Schedule {
    pub fn n_clusters(&self) -> usize {
        self.cluster_to_type.len()
    }

    pub fn to_doc(&self, workflow: &Workflow) -> ScheduleDoc {
        ScheduleDoc {
            task_to_cluster: self
                .task_to_cluster
                .iter()
                .enumerate()
                .map(|(t, &c)| (workflow.task(t).id.clone(), c))
                .collect(),
            cluster_to_type: self.cluster_to_type.clone(),
            secondary_order: self
                .secondary_order
                .iter()
                .map(|&t| workflow.task(t).id.clone())
                .collect(),
        }
    }

    /// Checks coverage, cluster ids and the secondary order.
    pub fn check(&self, workflow: &Workflow) -> Result<(), SimError> {
        if self.task_to_cluster.len() != workflow.len() {
            let missing = workflow
                .tasks()
                .get(self.task_to_cluster.len())
                .map_or_else(|| "too many task entries".to_string(), |t| format!("task `{}` has no cluster", t.id));
            return Err(SimError::IncompleteSchedule(missing));
        }
        if let Some((t, &c)) = self
            .task_to_cluster
            .iter()
            .enumerate()
            .find(|&(_, &c)| c >= self.cluster_to_type.len())
        {
            return Err(SimError::IncompleteSchedule(format!(
                "task `{}` is on cluster {c} which has no VM type",
                workflow.task(t).id
            )));
        }
        if !workflow.is_topological(&self.secondary_order) {
            let reason = if self.secondary_order.len() != workflow.len() {
                format!(
                    "covers {} of {} tasks",
                    self.secondary_order.len(),
                    workflow.len()
                )
            } else {
                "a task precedes one of its predecessors or appears twice".to_string()
            };
            return Err(SimError::NonTopologicalOrder(reason));
        }
        Ok(())
    }
}

/// Serialized schedule keyed by task ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub task_to_cluster: BTreeMap<String, ClusterId>,
    pub cluster_to_type: Vec<String>,
    pub secondary_order: Vec<String>,
}

impl ScheduleDoc {
    pub fn resolve(&self, workflow: &Workflow) -> Result<Schedule, SimError> {
        let mut task_to_cluster = vec![usize::MAX; workflow.len()];
        for (id, &c) in &self.task_to_cluster {
            let t = workflow
                .index_of(id)
                .ok_or_else(|| SimError::UnknownTask(id.clone()))?;
            task_to_cluster[t] = c;
        }
        if let Some(t) = task_to_cluster.iter().position(|&c| c == usize::MAX) {
            return Err(SimError::IncompleteSchedule(format!(
                "task `{}` has no cluster",
                workflow.task(t).id
            )));
        }
        let secondary_order = self
            .secondary_order
            .iter()
            .map(|id| workflow.index_of(id).ok_or_else(|| SimError::UnknownTask(id.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let schedule = Schedule {
            task_to_cluster,
            cluster_to_type: self.cluster_to_type.clone(),
            secondary_order,
        };
        schedule.check(workflow)?;
        Ok(schedule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskTiming {
    pub st: f64,
    pub ft: f64,
    pub dur: f64,
    pub filetime: f64,
}

/// Lifetime of one VM (a used cluster).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmSpan {
    pub cluster: ClusterId,
    /// Catalog rank of the VM's type.
    pub vm_type: usize,
    pub boot: f64,
    pub shutdown: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub makespan: f64,
    pub cost: f64,
    /// Indexed by task.
    pub task_times: Vec<TaskTiming>,
    /// One entry per cluster that has at least one task, by cluster id.
    pub vm_spans: Vec<VmSpan>,
}

/// Compute and transfer time of a task for a given placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskDuration {
    pub compute: f64,
    pub filetime: f64,
    pub dur: f64,
}

/// Cluster assignment and resolved VM type for every cluster.
#[derive(Debug, Clone, Copy)]
pub struct Placement<'a> {
    pub cluster_of: &'a [ClusterId],
    pub cluster_types: &'a [&'a VmType],
}

/// Duration of `task` on its cluster's VM type: compute time plus the serial
/// sum of transfers to successors on other clusters, each limited by the
/// slower of the two VMs' bandwidths.
pub fn task_duration(workflow: &Workflow, task: TaskIdx, placement: Placement) -> TaskDuration {
    let own_cluster = placement.cluster_of[task];
    let own = placement.cluster_types[own_cluster];
    let compute = workflow.task(task).workload / own.compute_units;
    let mut filetime = 0.0;
    for &(succ, bytes) in workflow.succs(task) {
        let succ_cluster = placement.cluster_of[succ];
        if succ_cluster != own_cluster {
            let other = placement.cluster_types[succ_cluster];
            filetime += bytes / (own.bandwidth.min(other.bandwidth) * BYTES_PER_MB);
        }
    }
    TaskDuration {
        compute,
        filetime,
        dur: compute + filetime,
    }
}

/// Resolves type names against the catalog.
pub fn resolve_types<'c>(schedule: &Schedule, catalog: &'c Catalog) -> Result<Vec<&'c VmType>, SimError> {
    schedule
        .cluster_to_type
        .iter()
        .map(|name| catalog.get(name).ok_or_else(|| SimError::UnknownType(name.clone())))
        .collect()
}

/// Sum over VMs of whole billing periods times the hourly price. Zero-length
/// spans cost nothing.
pub fn billed_cost(vm_spans: &[VmSpan], catalog: &Catalog) -> f64 {
    vm_spans
        .iter()
        .map(|s| billed_periods(s.shutdown - s.boot, catalog.billing_seconds()) * catalog.by_rank(s.vm_type).price)
        .sum()
}

pub fn billed_periods(span: f64, billing_seconds: f64) -> f64 {
    (span.max(0.0) / billing_seconds).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn simulate(workflow: &Workflow, schedule: &Schedule, catalog: &Catalog) -> Result<Evaluation, SimError> {
    schedule.check(workflow)?;
    let types = resolve_types(schedule, catalog)?;
    let rank_of: Vec<usize> = schedule
        .cluster_to_type
        .iter()
        .map(|n| catalog.rank(n).expect("resolved above"))
        .collect();

    let n = workflow.len();
    let m = schedule.n_clusters();
    let placement = Placement {
        cluster_of: &schedule.task_to_cluster,
        cluster_types: &types,
    };
    let mut position = vec![0usize; n];
    for (p, &t) in schedule.secondary_order.iter().enumerate() {
        position[t] = p;
    }

    let mut timing = vec![
        TaskTiming {
            st: f64::NAN,
            ft: f64::NAN,
            dur: 0.0,
            filetime: 0.0,
        };
        n
    ];
    let mut waiting: Vec<usize> = (0..n).map(|t| workflow.preds(t).len()).collect();
    let mut ready: Vec<BinaryHeap<Reverse<(usize, TaskIdx)>>> = vec![BinaryHeap::new(); m];
    let mut busy = vec![false; m];
    let mut events: BinaryHeap<Reverse<(Time, TaskIdx)>> = BinaryHeap::new();
    let mut dirty: Vec<ClusterId> = Vec::new();

    for t in (0..n).filter(|&t| waiting[t] == 0) {
        let c = schedule.task_to_cluster[t];
        ready[c].push(Reverse((position[t], t)));
        dirty.push(c);
    }

    let mut now = 0.0;
    let mut started = 0usize;
    loop {
        for c in dirty.drain(..) {
            if busy[c] {
                continue;
            }
            if let Some(Reverse((_, t))) = ready[c].pop() {
                let d = task_duration(workflow, t, placement);
                timing[t] = TaskTiming {
                    st: now,
                    ft: now + d.dur,
                    dur: d.dur,
                    filetime: d.filetime,
                };
                busy[c] = true;
                started += 1;
                events.push(Reverse((Time(timing[t].ft), t)));
            }
        }
        let Some(Reverse((Time(t_next), first))) = events.pop() else {
            break;
        };
        now = t_next;
        let mut finished = vec![first];
        while let Some(&Reverse((Time(t2), other))) = events.peek() {
            if t2 != now {
                break;
            }
            events.pop();
            finished.push(other);
        }
        for t in finished {
            let c = schedule.task_to_cluster[t];
            busy[c] = false;
            dirty.push(c);
            for &(s, _) in workflow.succs(t) {
                waiting[s] -= 1;
                if waiting[s] == 0 {
                    let cs = schedule.task_to_cluster[s];
                    ready[cs].push(Reverse((position[s], s)));
                    dirty.push(cs);
                }
            }
        }
    }
    debug_assert_eq!(started, n, "work-conserving dispatch runs every task of a DAG");

    let mut spans: Vec<Option<VmSpan>> = vec![None; m];
    for (&c, &tt) in schedule.task_to_cluster.iter().zip(&timing) {
        let span = spans[c].get_or_insert(VmSpan {
            cluster: c,
            vm_type: rank_of[c],
            boot: tt.st,
            shutdown: tt.ft,
        });
        span.boot = span.boot.min(tt.st);
        span.shutdown = span.shutdown.max(tt.ft);
    }
    let vm_spans: Vec<VmSpan> = spans.into_iter().flatten().collect();
    let cost = billed_cost(&vm_spans, catalog);
    Ok(Evaluation {
        makespan: timing[workflow.exit()].ft,
        cost,
        task_times: timing,
        vm_spans,
    })
}

/// JSON form of an [`Evaluation`], keyed by task ids and VM type names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDoc {
    pub makespan: f64,
    pub cost: f64,
    pub tasks: Vec<TaskTimingDoc>,
    pub vms: Vec<VmSpanDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTimingDoc {
    pub id: String,
    pub cluster: ClusterId,
    pub st: f64,
    pub ft: f64,
    pub dur: f64,
    pub filetime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmSpanDoc {
    pub cluster: ClusterId,
    pub vm_type: String,
    pub boot: f64,
    pub shutdown: f64,
    pub billed_periods: f64,
    pub cost: f64,
}

impl Evaluation {
    pub fn to_doc(&self, workflow: &Workflow, schedule: &Schedule, catalog: &Catalog) -> EvaluationDoc {
        EvaluationDoc {
            makespan: self.makespan,
            cost: self.cost,
            tasks: self
                .task_times
                .iter()
                .enumerate()
                .map(|(t, tt)| TaskTimingDoc {
                    id: workflow.task(t).id.clone(),
                    cluster: schedule.task_to_cluster[t],
                    st: tt.st,
                    ft: tt.ft,
                    dur: tt.dur,
                    filetime: tt.filetime,
                })
                .collect(),
            vms: self
                .vm_spans
                .iter()
                .map(|s| {
                    let vm = catalog.by_rank(s.vm_type);
                    let periods = billed_periods(s.shutdown - s.boot, catalog.billing_seconds());
                    VmSpanDoc {
                        cluster: s.cluster,
                        vm_type: vm.name.clone(),
                        boot: s.boot,
                        shutdown: s.shutdown,
                        billed_periods: periods,
                        cost: periods * vm.price,
                    }
                })
                .collect(),
        }
    }
}

/// Anything that can score a schedule. Schedulers take this instead of the
/// concrete simulator so calls can be counted or redirected.
pub trait Simulator: Sync {
    fn simulate(&self, workflow: &Workflow, schedule: &Schedule) -> Result<Evaluation, SimError>;

    fn catalog(&self) -> &Catalog;
}

impl<S: Simulator + ?Sized> Simulator for &S {
    fn simulate(&self, workflow: &Workflow, schedule: &Schedule) -> Result<Evaluation, SimError> {
        (**self).simulate(workflow, schedule)
    }

    fn catalog(&self) -> &Catalog {
        (**self).catalog()
    }
}

/// The event-driven simulator bound to a catalog.
#[derive(Debug, Clone, Copy)]
pub struct EventSimulator<'c> {
    catalog: &'c Catalog,
}

impl<'c> EventSimulator<'c> {
    pub fn new(catalog: &'c Catalog) -> Self {
        EventSimulator { catalog }
    }
}

impl Simulator for EventSimulator<'_> {
    fn simulate(&self, workflow: &Workflow, schedule: &Schedule) -> Result<Evaluation, SimError> {
        simulate(workflow, schedule, self.catalog)
    }

    fn catalog(&self) -> &Catalog {
        self.catalog
    }
}

/// Wraps a simulator and counts invocations.
#[derive(Debug)]
pub struct CountingSimulator<S> {
    inner: S,
    calls: AtomicUsize,
}

impl<S: Simulator> CountingSimulator<S> {
    pub fn new(inner: S) -> Self {
        CountingSimulator {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<S: Simulator> Simulator for CountingSimulator<S> {
    fn simulate(&self, workflow: &Workflow, schedule: &Schedule) -> Result<Evaluation, SimError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.simulate(workflow, schedule)
    }

    fn catalog(&self) -> &Catalog {
        self.inner.catalog()
    }
}

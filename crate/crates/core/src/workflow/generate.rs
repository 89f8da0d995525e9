//! Seeded synthetic workflows shaped after common scientific pipelines.
//!
//! Only the fan-in / fan-out pattern of each family is reproduced. Task
//! workloads and edge sizes are drawn log-uniformly from the ranges in
//! [`GeneratorConfig`]. Shapes that have a natural tail absorb leftover task
//! budget as a short post-processing chain, so every call yields exactly
//! `n_tasks` real tasks.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataEdge, Task, Workflow, WorkflowError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    MontageLike,
    EpigenomicsLike,
    InspiralLike,
    CybershakeLike,
    SiphtLike,
    Pipeline,
    ForkJoin,
}

impl Shape {
    pub const ALL: [Shape; 7] = [
        Shape::MontageLike,
        Shape::EpigenomicsLike,
        Shape::InspiralLike,
        Shape::CybershakeLike,
        Shape::SiphtLike,
        Shape::Pipeline,
        Shape::ForkJoin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::MontageLike => "montage-like",
            Shape::EpigenomicsLike => "epigenomics-like",
            Shape::InspiralLike => "inspiral-like",
            Shape::CybershakeLike => "cybershake-like",
            Shape::SiphtLike => "sipht-like",
            Shape::Pipeline => "pipeline",
            Shape::ForkJoin => "fork-join",
        }
    }

    /// Smallest task count for which the family's pattern can be built.
    pub fn min_tasks(self) -> usize {
        match self {
            Shape::MontageLike => 11,
            Shape::EpigenomicsLike => 5,
            Shape::InspiralLike => 6,
            Shape::CybershakeLike => 5,
            Shape::SiphtLike => 13,
            Shape::Pipeline | Shape::ForkJoin => 3,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = WorkflowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.name() == s)
            .ok_or_else(|| WorkflowError::UnknownShape(s.to_string()))
    }
}

/// Log-uniform ranges for generated values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    /// Workload range in seconds at one compute unit.
    pub workload_range: (f64, f64),
    /// Edge file-size range in bytes (values are rounded to whole bytes).
    pub bytes_range: (f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            workload_range: (10.0, 2000.0),
            bytes_range: (1.0e5, 5.0e8),
        }
    }
}

/// Generates a workflow with the default [`GeneratorConfig`].
pub fn generate(shape: Shape, n_tasks: usize, seed: u64) -> Result<Workflow, WorkflowError> {
    generate_with(shape, n_tasks, seed, &GeneratorConfig::default())
}

pub fn generate_with(
    shape: Shape,
    n_tasks: usize,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<Workflow, WorkflowError> {
    if n_tasks < shape.min_tasks() {
        return Err(WorkflowError::TooSmall {
            shape: shape.name().to_string(),
            min: shape.min_tasks(),
            requested: n_tasks,
        });
    }
    let mut b = Builder::new(seed, config);
    match shape {
        Shape::Pipeline => pipeline(&mut b, n_tasks),
        Shape::ForkJoin => fork_join(&mut b, n_tasks),
        Shape::MontageLike => montage(&mut b, n_tasks),
        Shape::EpigenomicsLike => epigenomics(&mut b, n_tasks),
        Shape::InspiralLike => inspiral(&mut b, n_tasks),
        Shape::CybershakeLike => cybershake(&mut b, n_tasks),
        Shape::SiphtLike => sipht(&mut b, n_tasks),
    }
    debug_assert_eq!(b.tasks.len(), n_tasks);
    Workflow::validate(b.tasks, b.edges)
}

struct Builder<'a> {
    rng: ChaCha8Rng,
    config: &'a GeneratorConfig,
    tasks: Vec<Task>,
    edges: Vec<DataEdge>,
}

impl<'a> Builder<'a> {
    fn new(seed: u64, config: &'a GeneratorConfig) -> Self {
        Builder {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
            tasks: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn log_uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        if hi <= lo {
            return lo;
        }
        (self.rng.gen_range(lo.ln()..hi.ln())).exp()
    }

    fn task(&mut self, label: &str) -> usize {
        let idx = self.tasks.len();
        let workload = self.log_uniform(self.config.workload_range);
        self.tasks
            .push(Task::new(format!("t{idx:04}"), workload).with_label(label));
        idx
    }

    fn layer(&mut self, label: &str, width: usize) -> Vec<usize> {
        (0..width).map(|_| self.task(label)).collect()
    }

    fn link(&mut self, from: usize, to: usize) {
        let bytes = self.log_uniform(self.config.bytes_range).round();
        let e = DataEdge::new(self.tasks[from].id.clone(), self.tasks[to].id.clone(), bytes);
        self.edges.push(e);
    }

    /// Appends a chain of `len` tasks after `after`; returns the last task.
    fn tail_chain(&mut self, after: usize, len: usize, label: &str) -> usize {
        let mut prev = after;
        for _ in 0..len {
            let t = self.task(label);
            self.link(prev, t);
            prev = t;
        }
        prev
    }
}

fn pipeline(b: &mut Builder, n: usize) {
    let first = b.task("stage");
    b.tail_chain(first, n - 1, "stage");
}

fn fork_join(b: &mut Builder, n: usize) {
    let fork = b.task("fork");
    let workers = b.layer("work", n - 2);
    let join = b.task("join");
    for &w in &workers {
        b.link(fork, w);
        b.link(w, join);
    }
}

/// Projections feed pairwise difference fits which all join in one fit
/// concatenation; a background model fans back out to per-image background
/// corrections that join again for the final mosaic.
fn montage(b: &mut Builder, n: usize) {
    let mut k = ((n - 6) * 2 / 7).max(2);
    while n < 2 * k + 7 {
        k -= 1;
    }
    let d = n - 6 - 2 * k;

    let projects = b.layer("mProjectPP", k);
    let diffs = b.layer("mDiffFit", d);
    for (j, &diff) in diffs.iter().enumerate() {
        let a = j % k;
        let mut c = (j + 1 + j / k) % k;
        if c == a {
            c = (a + 1) % k;
        }
        b.link(projects[a.min(c)], diff);
        b.link(projects[a.max(c)], diff);
    }
    let concat = b.task("mConcatFit");
    for &diff in &diffs {
        b.link(diff, concat);
    }
    let model = b.task("mBgModel");
    b.link(concat, model);
    let backgrounds = b.layer("mBackground", k);
    for (i, &bg) in backgrounds.iter().enumerate() {
        b.link(model, bg);
        b.link(projects[i], bg);
    }
    let table = b.task("mImgtbl");
    let add = b.task("mAdd");
    for &bg in &backgrounds {
        b.link(bg, table);
        b.link(bg, add);
    }
    b.link(table, add);
    let shrink = b.task("mShrink");
    b.link(add, shrink);
    let jpeg = b.task("mJPEG");
    b.link(shrink, jpeg);
}

/// One split fans out to parallel lanes of up to four sequential steps that
/// merge back into a short sequential tail.
fn epigenomics(b: &mut Builder, n: usize) {
    const STEPS: [&str; 4] = ["filterContams", "sol2sanger", "fastq2bfq", "map"];
    let split = b.task("fastqSplit");
    let mid = n - 4;
    let lanes = mid.div_ceil(4);
    let mut ends = Vec::with_capacity(lanes);
    for lane in 0..lanes {
        let len = mid / lanes + usize::from(lane < mid % lanes);
        let mut prev = split;
        for step in STEPS.iter().take(len) {
            let t = b.task(step);
            b.link(prev, t);
            prev = t;
        }
        ends.push(prev);
    }
    let merge = b.task("mapMerge");
    for &e in &ends {
        b.link(e, merge);
    }
    let index = b.task("maqIndex");
    b.link(merge, index);
    let pileup = b.task("pileup");
    b.link(index, pileup);
}

/// Independent groups: template banks feed 1:1 inspiral jobs that join in a
/// coincidence step, fan out again to trigger banks and a second inspiral
/// pass, and join once more.
fn inspiral(b: &mut Builder, n: usize) {
    let mut groups = (n / 30).max(1);
    let mut width = (n / groups - 2) / 4;
    while width == 0 {
        groups -= 1;
        width = (n / groups - 2) / 4;
    }
    let mut first_end = None;
    for _ in 0..groups {
        let banks = b.layer("TmpltBank", width);
        let first = b.layer("Inspiral", width);
        let thinca = b.task("Thinca");
        for i in 0..width {
            b.link(banks[i], first[i]);
            b.link(first[i], thinca);
        }
        let triggers = b.layer("TrigBank", width);
        let second = b.layer("Inspiral", width);
        let thinca2 = b.task("Thinca");
        for i in 0..width {
            b.link(thinca, triggers[i]);
            b.link(triggers[i], second[i]);
            b.link(second[i], thinca2);
        }
        first_end.get_or_insert(thinca2);
    }
    let used = groups * (4 * width + 2);
    b.tail_chain(first_end.expect("at least one group"), n - used, "Thinca");
}

/// Few SGT extractions fan out to many seismogram syntheses; every
/// seismogram feeds both a global zip and its own peak calculation, and the
/// peaks join in a second zip.
fn cybershake(b: &mut Builder, n: usize) {
    let sources = (n / 20).max(1);
    let seis_count = (n - sources - 2) / 2;
    let extracts = b.layer("ExtractSGT", sources);
    let seis = b.layer("SeismogramSynthesis", seis_count);
    let peaks = b.layer("PeakValCalc", seis_count);
    let zip_seis = b.task("ZipSeis");
    let zip_psa = b.task("ZipPSA");
    for i in 0..seis_count {
        b.link(extracts[i % sources], seis[i]);
        b.link(seis[i], zip_seis);
        b.link(seis[i], peaks[i]);
        b.link(peaks[i], zip_psa);
    }
    let used = sources + 2 * seis_count + 2;
    b.tail_chain(zip_psa, n - used, "ZipPSA");
}

/// A wide, flat fan-in of pattern searches next to a small pipeline of
/// independent predictors, all joined by one annotation step.
fn sipht(b: &mut Builder, n: usize) {
    let patsers = b.layer("Patser", n - 12);
    let concate = b.task("Patser_concate");
    for &p in &patsers {
        b.link(p, concate);
    }
    let pre: Vec<usize> = ["Transterm", "Findterm", "RNAMotif", "Blast"]
        .iter()
        .map(|l| b.task(l))
        .collect();
    let srna = b.task("SRNA");
    for &p in &pre {
        b.link(p, srna);
    }
    let parse = b.task("FFN_Parse");
    b.link(srna, parse);
    let blasts: Vec<usize> = ["BlastSynteny", "BlastCandidate", "BlastQRNA", "BlastParalogues"]
        .iter()
        .map(|l| b.task(l))
        .collect();
    let annotate = b.task("SRNA_annotate");
    for &bl in &blasts {
        b.link(parse, bl);
        b.link(bl, annotate);
    }
    b.link(concate, annotate);
    b.link(srna, annotate);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_degrees(wf: &Workflow) -> Vec<usize> {
        (0..wf.len())
            .filter(|&i| !wf.task(i).synthetic)
            .map(|i| wf.preds(i).iter().filter(|&&(p, _)| !wf.task(p).synthetic).count())
            .collect()
    }

    #[test]
    fn pipeline_is_a_chain() {
        let wf = generate(Shape::Pipeline, 5, 42).unwrap();
        assert_eq!(wf.len(), 5);
        let mut cur = wf.start();
        for _ in 0..4 {
            assert_eq!(wf.succs(cur).len(), 1);
            let next = wf.succs(cur)[0].0;
            assert_eq!(wf.preds(next).len(), 1);
            cur = next;
        }
        assert_eq!(cur, wf.exit());
    }

    #[test]
    fn fork_join_is_deterministic() {
        let a = generate(Shape::ForkJoin, 10, 7).unwrap();
        let b = generate(Shape::ForkJoin, 10, 7).unwrap();
        assert_eq!(a, b);
        let c = generate(Shape::ForkJoin, 10, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn montage_has_high_fan_in_join() {
        let wf = generate(Shape::MontageLike, 25, 1).unwrap();
        assert_eq!(wf.real_task_count(), 25);
        assert!(in_degrees(&wf).iter().any(|&d| d >= 4));
    }

    #[test]
    fn every_shape_hits_exact_size() {
        for shape in Shape::ALL {
            for n in [shape.min_tasks(), 13, 25, 30, 50, 61, 100, 257] {
                if n < shape.min_tasks() {
                    continue;
                }
                let wf = generate(shape, n, 3).unwrap();
                assert_eq!(wf.real_task_count(), n, "{shape} n={n}");
                assert!(wf.is_topological(wf.topo_order()));
            }
        }
    }

    #[test]
    fn too_small_and_unknown_shape() {
        assert!(matches!(
            generate(Shape::MontageLike, 10, 0),
            Err(WorkflowError::TooSmall { min: 11, .. })
        ));
        assert!(matches!(generate(Shape::Pipeline, 2, 0), Err(WorkflowError::TooSmall { .. })));
        assert_eq!(
            "ligo".parse::<Shape>().unwrap_err(),
            WorkflowError::UnknownShape("ligo".into())
        );
        assert_eq!("sipht-like".parse::<Shape>().unwrap(), Shape::SiphtLike);
    }

    #[test]
    fn values_stay_in_configured_ranges() {
        let cfg = GeneratorConfig::default();
        let wf = generate(Shape::CybershakeLike, 60, 11).unwrap();
        for t in wf.tasks().iter().filter(|t| !t.synthetic) {
            assert!(t.workload >= cfg.workload_range.0 && t.workload <= cfg.workload_range.1);
        }
        for e in wf.edges().iter().filter(|e| e.bytes > 0.0) {
            assert_eq!(e.bytes.fract(), 0.0);
            assert!(e.bytes >= cfg.bytes_range.0 && e.bytes <= cfg.bytes_range.1);
        }
    }

    #[test]
    fn fan_patterns_match_family() {
        // Sipht: one very wide join.
        let wf = generate(Shape::SiphtLike, 40, 2).unwrap();
        assert!(in_degrees(&wf).iter().any(|&d| d >= 28));
        // Cybershake: few sources with large fan-out.
        let wf = generate(Shape::CybershakeLike, 50, 2).unwrap();
        let max_out = (0..wf.len()).map(|i| wf.succs(i).len()).max().unwrap();
        assert!(max_out >= 10);
        // Epigenomics: a single split task fans out to lanes.
        let wf = generate(Shape::EpigenomicsLike, 24, 2).unwrap();
        assert_eq!(wf.succs(wf.start()).len(), 5);
    }
}

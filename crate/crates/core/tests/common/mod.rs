#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use riot_core::workflow::{DataEdge, Task, Workflow};

/// Random DAG over `n` tasks: edge `i -> j` (i < j) with probability
/// `edge_prob`. With `rooted`, task 0 precedes every task without a
/// predecessor and the last task follows every task without a successor, so
/// validation adds no synthetic nodes and every workload is positive.
pub fn random_workflow<R: Rng>(
    rng: &mut R,
    n: usize,
    edge_prob: f64,
    workload: (f64, f64),
    bytes: (f64, f64),
    rooted: bool,
) -> Workflow {
    let tasks: Vec<Task> = (0..n)
        .map(|i| Task::new(format!("t{i}"), rng.gen_range(workload.0..=workload.1)))
        .collect();
    let mut adj = vec![vec![false; n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        for cell in &mut row[i + 1..] {
            *cell = rng.gen_bool(edge_prob);
        }
    }
    if rooted && n > 1 {
        for j in 1..n {
            if !(0..j).any(|i| adj[i][j]) {
                adj[0][j] = true;
            }
        }
        for i in 0..n - 1 {
            if !(i + 1..n).any(|j| adj[i][j]) {
                adj[i][n - 1] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for (i, row) in adj.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            if e {
                let b = rng.gen_range(bytes.0..=bytes.1).round();
                edges.push(DataEdge::new(format!("t{i}"), format!("t{j}"), b));
            }
        }
    }
    Workflow::validate(tasks, edges).expect("forward edges form a DAG")
}

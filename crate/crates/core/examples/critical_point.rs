//! Estimate critical points by invasion percolation.
//!
//! cargo run --release --example critical_point -- [target_size] [seeds]

use std::time::Instant;

use treeperc::invasion::estimate_critical_point;
use treeperc::tree::ProductGraph;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let target: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seeds: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);

    for graph in [ProductGraph::tree(3), ProductGraph::txt(3), ProductGraph::txz(3)] {
        let start = Instant::now();
        let pt = estimate_critical_point(graph, 1.0, target, seeds, 2024).expect("valid parameters");
        println!(
            "{:>4} d=3  p1_hat = {:.4} (sd {:.4} over {} seeds)  p2_hat = {:.4}  [{:.1}s]",
            graph.kind,
            pt.p1_hat,
            pt.uncertainty,
            pt.runs.len(),
            pt.p2_hat,
            start.elapsed().as_secs_f64()
        );
        for run in &pt.runs {
            println!("      seed {:>20}  q3 {:.4}  q4 {:.4}", run.seed, run.q3_max, run.q4_max);
        }
    }
}

//! Critical curves of T×T and T×Z by invasion along rays p₂ = ρp₁.
//!
//! cargo run --release --example critical_curve -- [target_size] [seeds]

use treeperc::invasion::{critical_curve, symmetric_rho_grid};
use treeperc::tree::ProductGraph;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let target: usize = args.first().map_or(20_000, |s| s.parse().unwrap());
    let seeds: usize = args.get(1).map_or(2, |s| s.parse().unwrap());
    let grid = symmetric_rho_grid(1e-3, &[0.05, 0.25, 0.5]);
    for graph in [ProductGraph::txt(3), ProductGraph::txz(3)] {
        println!("{}:", graph.kind);
        for pt in critical_curve(graph, &grid, target, seeds, 11).unwrap() {
            println!("  rho {:>8.3}  p1 {:.4}  p2 {:.4}  (sd {:.4})", pt.rho, pt.p1_hat, pt.p2_hat, pt.uncertainty);
        }
    }
}

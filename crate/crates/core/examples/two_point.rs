//! Two-point function by level class, and its decay along the diagonal.
//!
//! cargo run --release --example two_point -- [p] [trials]

use treeperc::diagrams::fit_oded_constant;
use treeperc::percolation::{class_census, Caps, Model, Sampling};
use treeperc::stats::least_squares;
use treeperc::tree::{LevelSpec, ProductGraph};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map_or(0.2151, |s| s.parse().unwrap());
    let trials: usize = args.get(1).map_or(10_000, |s| s.parse().unwrap());
    let model = Model::isotropic(ProductGraph::txt(3), p).unwrap();
    let table = class_census(&model, 12, None, &Sampling::new(trials, Caps::cluster(100_000), 3)).unwrap();

    println!("P(0 ↔ x) for |x| = (k1, k2), lower bracket:");
    for k1 in 0..=6 {
        let row: Vec<String> = (0..=6).map(|k2| format!("{:.2e}", table.lower(k1, k2))).collect();
        println!("  k1={k1}: {}", row.join("  "));
    }
    let ks = [2u32, 3, 4, 5, 6];
    let xs: Vec<f64> = ks.iter().map(|&k| 2.0 * k as f64).collect();
    let ys: Vec<f64> = ks.iter().map(|&k| table.lower(k, k).ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    println!("diagonal decay slope {slope:.4} (ln 2 = {:.4})", 2f64.ln());
    let values: Vec<(LevelSpec, f64)> = table.table.iter().map(|(k, e)| (*k, e.lower)).collect();
    println!("smallest C with P(0↔x) ≤ C|x|²2^(−|x|/2): {:.3}", fit_oded_constant(3, &values));
}

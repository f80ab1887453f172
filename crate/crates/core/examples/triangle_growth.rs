//! Closed triangle from census estimates of the two-point function, for a
//! doubling sequence of radii.
//!
//! cargo run --release --example triangle_growth -- [p] [trials] [r_max]

use treeperc::diagrams::reduced_triangle;
use treeperc::percolation::{class_census, Caps, Model, Sampling};
use treeperc::tree::ProductGraph;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map_or(0.2138, |s| s.parse().unwrap());
    let trials: usize = args.get(1).map_or(20_000, |s| s.parse().unwrap());
    let r_max: u32 = args.get(2).map_or(16, |s| s.parse().unwrap());
    let g = ProductGraph::txt(3);
    let model = Model::isotropic(g, p).unwrap();
    let mut prev = None;
    let mut r = 1;
    while r <= r_max {
        let table = class_census(&model, 2 * r, Some(r), &Sampling::new(trials, Caps::cluster(1_000_000), 9)).unwrap();
        let tri = reduced_triangle(&g, |a, b| table.lower(a, b), r).unwrap();
        match prev {
            Some(q) => println!("r = {r:>3}  triangle {tri:.4}  increment {:.4}", tri - q),
            None => println!("r = {r:>3}  triangle {tri:.4}"),
        }
        prev = Some(tri);
        r *= 2;
    }
}

//! Expected chemical-ball size G(r) = E|B_chem(0, r)| at a chosen p.
//!
//! cargo run --release --example ball_growth -- [p] [trials]

use treeperc::percolation::{estimate_g, Caps, Model, Sampling};
use treeperc::tree::ProductGraph;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map_or(0.2151, |s| s.parse().unwrap());
    let trials: usize = args.get(1).map_or(5000, |s| s.parse().unwrap());
    let model = Model::isotropic(ProductGraph::txt(3), p).unwrap();
    let est = estimate_g(&model, 32, &Sampling::new(trials, Caps::cluster(100_000), 5)).unwrap();
    for r in [1, 2, 4, 8, 16, 32] {
        println!("G({r:>2}) = {:>8.3} ± {:.3}", est.mean[r], est.stderr[r]);
    }
    for (lo, hi) in [(4, 8), (8, 16), (16, 32)] {
        let (ratio, se) = est.ratio(hi, lo);
        println!("G({hi})/G({lo}) = {ratio:.3} ± {se:.3}");
    }
    println!("{} of {} trials hit the vertex cap", est.truncated_trials, est.trials);
}

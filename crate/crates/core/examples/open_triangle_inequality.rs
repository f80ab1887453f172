//! Both sides of the open-triangle inequality at one (r, w).
//!
//! cargo run --release --example open_triangle_inequality -- [p] [r] [|w|]

use treeperc::acceptance::balanced_opening;
use treeperc::diagrams::{offpointa_check, OffpointSettings};
use treeperc::percolation::Model;
use treeperc::tree::ProductGraph;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map_or(0.2151, |s| s.parse().unwrap());
    let r: u32 = args.get(1).map_or(4, |s| s.parse().unwrap());
    let wn: u32 = args.get(2).map_or(6, |s| s.parse().unwrap());
    let model = Model::isotropic(ProductGraph::txt(3), p).unwrap();
    let settings = OffpointSettings {
        trials: 1000,
        census_trials: 5000,
        seed: 8,
        ..Default::default()
    };
    let rep = offpointa_check(&model, r, balanced_opening(wn), &settings).unwrap();
    println!("r = {r}, w = {:?}", rep.w);
    println!("pair count   {:.3} .. {:.3} ± {:.3}", rep.lhs_low, rep.lhs_high, rep.lhs_stderr);
    println!("G(r)         {:.3} ± {:.3}", rep.g_hat, rep.g_stderr);
    println!("triangle     {:.4} ± {:.4}", rep.triangle, rep.triangle_stderr);
    println!("G²(1 − ∇)    {:.3} ± {:.3}", rep.rhs, rep.rhs_stderr);
    println!("{}", if rep.passed { "holds within 3σ" } else { "violated" });
}

//! Cluster shape at and below criticality: moments of the chemical ball,
//! extrinsic distance on the chemical shell, and the subcritical mean size.
//!
//! cargo run --release --example cluster_shape -- [p] [trials]

use treeperc::percolation::{extrinsic_ballisticity, median_ratio, moment_tail_check, subcritical_stability, Caps, Model, Sampling};
use treeperc::tree::ProductGraph;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map_or(0.2151, |s| s.parse().unwrap());
    let trials: usize = args.get(1).map_or(5000, |s| s.parse().unwrap());
    let g = ProductGraph::txt(3);
    let model = Model::isotropic(g, p).unwrap();
    let sampling = Sampling::new(trials, Caps::cluster(100_000), 12);

    let m = moment_tail_check(&model, 8, &sampling).unwrap();
    for n in 0..3 {
        println!("E|B(8)|^{} = {:.3e}  bound {:.3e}", n + 1, m.moments[n], m.bounds[n]);
    }

    let shells = extrinsic_ballisticity(&model, &[8, 16, 32], &sampling).unwrap();
    for s in &shells {
        println!("r = {:>2}: |x| on the shell has quartiles {:?} ({} empty trials)", s.r, s.quartiles, s.empty_trials);
    }
    if let Some(mr) = median_ratio(&shells[1], &shells[2], 200, 13) {
        println!("median ratio r=32 vs r=16: {:.3} [{:.3}, {:.3}]", mr.ratio, mr.lower, mr.upper);
    }

    let sub = Model::isotropic(g, 0.9 * p).unwrap();
    let st = subcritical_stability(&sub, &[1000, 2000, 4000, 8000, 16000], trials, 14).unwrap();
    println!("p = {:.4}: E min(|C|, cap) = {:?}, stable: {}", sub.p1, st.estimates, st.stable);
}

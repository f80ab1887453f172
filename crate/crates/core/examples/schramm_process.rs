//! Schramm's branching random walk on a level set, and the percolation
//! experiments built on it.
//!
//! cargo run --release --example schramm_process -- [p] [trials]

use treeperc::percolation::{Caps, Model};
use treeperc::schramm::{grow, invariance_test, mean_root_degree, return_probability, transience_threshold, SchrammParams};
use treeperc::seed::rng_from_seed;
use treeperc::tree::{LevelSpec, ProductGraph};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map_or(0.2151, |s| s.parse().unwrap());
    let trials: usize = args.get(1).map_or(2000, |s| s.parse().unwrap());
    let g = ProductGraph::txt(3);
    let model = Model::isotropic(g, p).unwrap();

    for (k1, k2) in [(3, 3), (6, 6), (10, 10)] {
        let spec = LevelSpec::new(k1, k2);
        println!("spec ({k1},{k2}): transience threshold m = {}", transience_threshold(spec, 3, 0.5).unwrap());
    }

    let spec = LevelSpec::new(2, 2);
    let params = SchrammParams::new(model, spec, 2, 3);
    let tree = grow(&params, &mut rng_from_seed(4)).unwrap();
    let norms: Vec<usize> = tree.generation_ids(3).take(6).map(|i| tree.positions[i].norm()).collect();
    println!("particle tree: {} particles, last generation at norms {norms:?} ...", tree.positions.len());

    for l in 1..=3 {
        let rep = return_probability(&g, spec, l, 20_000, 6).unwrap();
        println!("return after {l} steps: {:.4} ± {:.4} (exact {:.4})", rep.joint, rep.joint_stderr, rep.exact[2]);
    }

    let caps = Caps::cluster(20_000);
    let deg = mean_root_degree(&SchrammParams::new(model, LevelSpec::new(3, 3), 2, 1), trials, 7, caps).unwrap();
    println!("mean root degree in W: {:.4} (99% upper {:.4})", deg.mean, deg.upper_99);
    let inv = invariance_test(&SchrammParams::new(model, LevelSpec::new(3, 3), 1, 2), trials, 8, caps).unwrap();
    println!("invariance: McNemar p {:.3}, degree homogeneity p {:.3}", inv.mcnemar_p, inv.homogeneity_p);
}

//! Words, distances and boundaries on the d-regular tree and its products.
//!
//! cargo run --example tree_geometry

use treeperc::seed::rng_from_seed;
use treeperc::tree::{edge_boundary, random_subtree, sphere_size, LevelSpec, ProductGraph, TreeWord};

fn main() {
    let d = 3;
    let x = TreeWord::product([0, 1, 2, 1]);
    let y = TreeWord::product([0, 1, 0]);
    println!("x = {:?}, y = {:?}, d(x, y) = {}", x.letters(), y.letters(), x.distance(&y));
    println!("x·x⁻¹ is the root: {}", x.mul(&x.inverse()).is_root());

    println!("sphere sizes, d = {d}: {:?}", (0..6).map(|k| sphere_size(d, k)).collect::<Vec<_>>());

    let mut rng = rng_from_seed(1);
    for size in [1, 10, 100] {
        let a = random_subtree(d, size, &mut rng);
        let b = edge_boundary(d, &a).unwrap();
        println!("subtree of {size:>3} vertices: |∂A| = {b} = (d−2)|A| + 2 = {}", (d as usize - 2) * size + 2);
    }

    let g = ProductGraph::txt(d);
    for (k1, k2) in [(1, 0), (2, 2), (3, 1)] {
        let spec = LevelSpec::new(k1, k2);
        let v = g.sample_level_point(spec, &mut rng);
        println!("T×T class ({k1},{k2}): {} points, sample at graph distance {} from 0", g.level_size(spec), g.distance(&g.origin(), &v));
    }
    println!("|B(3)| in T×T = {}, in T×Z = {}", g.ball_size(3), ProductGraph::txz(d).ball_size(3));
}

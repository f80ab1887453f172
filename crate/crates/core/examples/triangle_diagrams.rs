//! Closed and open triangle sums: reduced formula against enumeration, in
//! floating point and exact rationals.
//!
//! cargo run --release --example triangle_diagrams

use num_rational::BigRational;
use treeperc::diagrams::{
    brute_open_triangle, brute_triangle, level_sum_identity, open_triangle, reduced_triangle, test_functions as tf, yzr_bound, yzr_sum,
};
use treeperc::tree::{LevelSpec, ProductGraph};

fn main() {
    let g = ProductGraph::txt(3);
    let geo = tf::geometric(3, 1.0);
    for r in 1..=4 {
        let brute: f64 = brute_triangle(&g, &geo, r).unwrap();
        let reduced: f64 = reduced_triangle(&g, &geo, r).unwrap();
        println!("closed, r={r}: brute {brute:.10}  reduced {reduced:.10}");
    }
    for w in [LevelSpec::new(1, 0), LevelSpec::new(2, 2)] {
        let brute: BigRational = brute_open_triangle(&g, tf::anisotropic_exact, w, 3).unwrap();
        let reduced: BigRational = open_triangle(&g, tf::anisotropic_exact, w, 3).unwrap();
        println!("open, w={w:?}, r=3: exact {} ({})", reduced, if brute == reduced { "equal" } else { "DIFFERENT" });
    }
    // reduction only, far beyond enumeration
    let big: f64 = reduced_triangle(&g, &geo, 40).unwrap();
    println!("closed, r=40: {big:.6}");

    for s in [1, 5, 20] {
        let (with_root, without) = level_sum_identity(3, s).unwrap();
        println!("level sum s={s}: {without} (with the root term {with_root})");
    }
    let w = LevelSpec::new(2, 1);
    for s in [1, 3, 6] {
        // the s⁸ form undercounts the j = 0 terms at small s; (s+1)⁸ dominates everywhere
        println!(
            "s={s}: level sum at w={w:?} is {:.4}; 9s⁸ form {:.4}, 9(s+1)⁸ form {:.4}",
            yzr_sum(3, s, w),
            yzr_bound(3, s, w),
            yzr_bound(3, s + 1, w)
        );
    }
}

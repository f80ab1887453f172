//! Statistical checks around the invasion estimate of p_c.

use treeperc::diagrams::reduced_triangle;
use treeperc::invasion::{critical_curve, estimate_critical_point};
use treeperc::percolation::{class_census, subcritical_stability, survival_fraction, Caps, Model, Sampling};
use treeperc::tree::ProductGraph;

const SEED: u64 = 77;

fn pc() -> f64 {
    estimate_critical_point(ProductGraph::txt(3), 1.0, 20_000, 2, SEED).unwrap().p1_hat
}

#[test]
fn estimate_brackets_the_transition() {
    let pc = pc();
    let g = ProductGraph::txt(3);
    let below = Model::isotropic(g, pc - 0.03).unwrap();
    let above = Model::isotropic(g, pc + 0.03).unwrap();
    let stab = subcritical_stability(&below, &[2000, 4000, 8000, 16000], 4000, SEED).unwrap();
    assert!(stab.stable, "{stab:?}");
    let s = |seed| Sampling::new(4000, Caps::cluster(16_000), seed);
    let (lo, lo_se) = survival_fraction(&below, &s(1)).unwrap();
    let (hi, hi_se) = survival_fraction(&above, &s(2)).unwrap();
    println!("pc {pc:.4}: survival {lo:.4} ± {lo_se:.4} below, {hi:.4} ± {hi_se:.4} above");
    assert!(hi - lo > 4.0 * (lo_se.powi(2) + hi_se.powi(2)).sqrt());
}

#[test]
fn critical_p1_decreases_with_rho() {
    let pts = critical_curve(ProductGraph::txt(3), &[0.25, 1.0, 4.0], 20_000, 2, SEED).unwrap();
    let p1: Vec<f64> = pts.iter().map(|p| p.p1_hat).collect();
    println!("{p1:?}");
    assert!(p1[0] > p1[1] && p1[1] > p1[2]);
}

#[test]
fn tail_quarters_agree() {
    let pt = estimate_critical_point(ProductGraph::txt(3), 1.0, 50_000, 4, SEED).unwrap();
    for run in &pt.runs {
        println!("q3 {:.5} q4 {:.5} sd {:.5}", run.q3_max, run.q4_max, pt.uncertainty);
        assert!((run.q3_max - run.q4_max).abs() < 2.0 * pt.uncertainty.max(1e-3));
    }
}

// One seed for every radius: the restricted explorations are then nested,
// so the increments are compared on the same clusters.
#[test]
fn closed_triangle_saturates() {
    let g = ProductGraph::txt(3);
    let model = Model::isotropic(g, pc()).unwrap();
    let tri: Vec<f64> = [2u32, 4, 8]
        .iter()
        .map(|&r| {
            let table = class_census(&model, 2 * r, Some(r), &Sampling::new(40_000, Caps::cluster(100_000), SEED)).unwrap();
            reduced_triangle(&g, |a, b| table.lower(a, b), r).unwrap()
        })
        .collect();
    println!("{tri:?}");
    assert!(tri[0] <= tri[1] && tri[1] <= tri[2]);
    assert!(tri[2] - tri[1] < tri[1] - tri[0]);
}

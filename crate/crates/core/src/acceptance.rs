//! The acceptance suite: fourteen checks, each returning an [`Outcome`]
//! with the measured value, the threshold it was held to and a JSON report.
//! Used by the `verify` subcommand and by the `acceptance` test target.

use std::collections::HashSet;
use std::sync::OnceLock;
use std::time::Instant;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagrams::{self, test_functions as tf, BRUTE_BUDGET};
use crate::invasion::{critical_curve, estimate_critical_point, invade, run_seed, symmetric_rho_grid, CurvePoint, InvasionParams};
use crate::percolation::{
    class_census, estimate_g, extrinsic_ballisticity, median_ratio, moment_tail_check, subcritical_stability, Caps, Model, Sampling,
};
use crate::schramm::{connection_vs_2_over_m, invariance_test, mean_root_degree, transience_threshold, SchrammParams};
use crate::seed::{rng_from_seed, stream_seed};
use crate::stats::{least_squares, z_upper};
use crate::tree::{connected_subtree_boundary, component_count, edge_boundary, random_subtree, LevelSpec, ProductGraph};

/// Every threshold the suite applies.
pub mod tol {
    pub const BOUNDARY_DEGREES: [u8; 3] = [3, 4, 5];
    pub const BOUNDARY_SUBTREES: usize = 1000;
    pub const BOUNDARY_MAX_SIZE: usize = 200;
    pub const LEVEL_SUM_DEGREES: [u8; 3] = [3, 4, 5];
    pub const LEVEL_SUM_MAX_S: u32 = 20;
    pub const DIAGRAM_REL_TOL: f64 = 1e-12;
    pub const DIAGRAM_MAX_R: u32 = 5;
    pub const DIAGRAM_MAX_OPENING: u32 = 4;
    pub const TREE_DEGREE: u8 = 3;
    pub const TREE_PC_RANGE: (f64, f64) = (0.49, 0.51);
    pub const INVASION_TARGET: usize = 100_000;
    pub const CURVE_RHO_EXTREME: f64 = 1e-3;
    pub const CURVE_ENDPOINT: (f64, f64) = (0.5, 0.0);
    pub const CURVE_ENDPOINT_TOL: f64 = 0.01;
    pub const CURVE_SYMMETRY_TOL: f64 = 0.01;
    pub const SAFETY_C: f64 = 0.5;
    pub const DEGREE_SPEC: (u32, u32) = (6, 6);
    pub const DEGREE_LIMIT: f64 = 2.0;
    pub const DEGREE_CONFIDENCE: f64 = 0.99;
    pub const DEGREE_MIN_TRIALS: usize = 10_000;
    pub const TWO_OVER_M_SPEC: (u32, u32) = (8, 8);
    pub const TWO_OVER_M_SIGMAS: f64 = 3.0;
    pub const DECAY_KS: [u32; 5] = [2, 3, 4, 5, 6];
    pub const DECAY_SLACK: f64 = 0.10;
    pub const DECAY_SHARP_SLACK: f64 = 0.15;
    pub const GROWTH_RADII: (u32, u32) = (16, 32);
    pub const GROWTH_EXPONENT: f64 = 2.0;
    pub const GROWTH_CONFIDENCE: f64 = 0.95;
    pub const MOMENT_RADIUS: u32 = 8;
    pub const MOMENT_ORDERS: usize = 3;
    pub const OFFPOINT_CASES: [(u32, u32); 2] = [(4, 6), (6, 8)];
    pub const OFFPOINT_SIGMAS: f64 = 3.0;
    pub const BALLISTIC_RADII: (u32, u32) = (16, 32);
    pub const BALLISTIC_RATIO: f64 = 1.5;
    pub const BALLISTIC_CONFIDENCE: f64 = 0.95;
    pub const SUBCRITICAL_FACTOR: f64 = 0.9;
    pub const STABILITY_TOL: f64 = 0.02;
    pub const INVARIANCE_SPEC: (u32, u32) = (3, 3);
    pub const INVARIANCE_DEPTH: u32 = 2;
    pub const INVARIANCE_TRIALS: usize = 10_000;
    pub const INVARIANCE_ALPHA: f64 = 0.001;
}

/// Trial counts and budgets. [`Scale::full`] is what the test target and
/// `verify` run; [`Scale::smoke`] only exercises the code paths.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scale {
    pub pc_seeds: usize,
    pub invasion_target: usize,
    pub curve_seeds: usize,
    pub degree_trials: usize,
    pub connection_trials: usize,
    pub census_trials: usize,
    pub growth_trials: usize,
    pub moment_trials: usize,
    pub offpoint_trials: usize,
    pub offpoint_census_trials: usize,
    pub ballistic_trials: usize,
    pub bootstrap: usize,
    pub stability_trials: usize,
    pub stability_caps: [usize; 2],
    pub invariance_trials: usize,
    pub n_cap: usize,
}

impl Scale {
    pub fn full() -> Self {
        Self {
            pc_seeds: 4,
            invasion_target: tol::INVASION_TARGET,
            curve_seeds: 4,
            degree_trials: tol::DEGREE_MIN_TRIALS,
            connection_trials: 10_000,
            census_trials: 20_000,
            growth_trials: 20_000,
            moment_trials: 20_000,
            offpoint_trials: 4_000,
            offpoint_census_trials: 20_000,
            ballistic_trials: 40_000,
            bootstrap: 400,
            stability_trials: 20_000,
            stability_caps: [1_000, 64_000],
            invariance_trials: tol::INVARIANCE_TRIALS,
            n_cap: 100_000,
        }
    }

    pub fn smoke() -> Self {
        Self {
            pc_seeds: 2,
            invasion_target: 5_000,
            curve_seeds: 2,
            degree_trials: 200,
            connection_trials: 200,
            census_trials: 500,
            growth_trials: 200,
            moment_trials: 200,
            offpoint_trials: 50,
            offpoint_census_trials: 200,
            ballistic_trials: 500,
            bootstrap: 50,
            stability_trials: 200,
            stability_caps: [250, 4_000],
            invariance_trials: 200,
            n_cap: 20_000,
        }
    }

    fn caps(&self) -> Caps {
        Caps::cluster(self.n_cap)
    }

    fn stability_schedule(&self) -> Vec<usize> {
        let [mut cap, last] = self.stability_caps;
        let mut out = vec![cap];
        while cap < last {
            cap *= 2;
            out.push(cap);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
    pub warnings: Vec<String>,
    pub report: Value,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

/// Shared state: master seed, scale and the cached estimate of `p_c` for
/// `T×T` with `d = 3`.
pub struct Context {
    pub scale: Scale,
    pub seed: u64,
    pc: OnceLock<CurvePoint>,
}

impl Context {
    pub fn new(scale: Scale, seed: u64) -> Self {
        Self {
            scale,
            seed,
            pc: OnceLock::new(),
        }
    }

    /// Invasion estimate of `p_c(T×T)`, `d = 3`, `ρ = 1`.
    pub fn pc(&self) -> &CurvePoint {
        self.pc.get_or_init(|| {
            estimate_critical_point(ProductGraph::txt(3), 1.0, self.scale.invasion_target, self.scale.pc_seeds, self.seed)
                .expect("valid invasion parameters")
        })
    }

    pub fn critical_model(&self) -> Model {
        Model::isotropic(ProductGraph::txt(3), self.pc().p1_hat).expect("estimate lies in [0, 1]")
    }

    fn sampling(&self, trials: usize, stream: u64) -> Sampling {
        Sampling::new(trials, self.scale.caps(), stream_seed(self.seed, stream, 0xacce))
    }
}

pub const TITLES: [&str; 14] = [
    "boundary identity",
    "level-sum identity",
    "diagram oracle equivalence",
    "single-tree p_c",
    "critical-curve endpoints and symmetry",
    "mass-transport degree bound",
    "connection vs 2/(m+1)",
    "two-point decay",
    "growth ratio",
    "moment bounds",
    "open-triangle inequality",
    "ballisticity",
    "subcritical stabilization",
    "Schramm-process invariance",
];

pub fn run(id: u8, ctx: &Context) -> Outcome {
    let start = Instant::now();
    let mut out = match id {
        1 => boundary_identity(ctx),
        2 => level_sum(),
        3 => diagram_equivalence(),
        4 => tree_pc(ctx),
        5 => curve(ctx),
        6 => mass_transport(ctx),
        7 => two_over_m(ctx),
        8 => decay(ctx),
        9 => growth(ctx),
        10 => moments(ctx),
        11 => offpoint(ctx),
        12 => ballistic(ctx),
        13 => subcritical(ctx),
        14 => invariance(ctx),
        _ => panic!("no criterion {id}"),
    };
    out.id = id;
    out.title = TITLES[id as usize - 1];
    out.seconds = start.elapsed().as_secs_f64();
    out
}

pub fn run_all(ctx: &Context) -> Vec<Outcome> {
    (1..=14).map(|id| run(id, ctx)).collect()
}

fn outcome(passed: bool, value: f64, threshold: f64, detail: String, report: Value) -> Outcome {
    Outcome {
        id: 0,
        title: "",
        passed,
        value,
        threshold,
        detail,
        warnings: Vec::new(),
        report,
        seconds: 0.0,
    }
}

fn boundary_identity(ctx: &Context) -> Outcome {
    let mut rng = rng_from_seed(stream_seed(ctx.seed, 1, 0xb0));
    let mut mismatches = 0u64;
    let mut checked = 0u64;
    let mut nonamenable = true;
    for d in tol::BOUNDARY_DEGREES {
        for _ in 0..tol::BOUNDARY_SUBTREES {
            let size = rand::Rng::random_range(&mut rng, 1..=tol::BOUNDARY_MAX_SIZE);
            let set = random_subtree(d, size, &mut rng);
            let boundary = connected_subtree_boundary(d, &set).expect("nonempty");
            if boundary != (d as u64 - 2) * set.len() as u64 + 2 || component_count(d, &set) != 1 {
                mismatches += 1;
            }
            checked += 1;
            // a subset with holes is a forest: the bound |∂A| ≥ (d−2)|A| still holds
            let thinned: HashSet<_> = set.iter().filter(|w| w.len() % 3 != 2).cloned().collect();
            if !thinned.is_empty() {
                let b = edge_boundary(d, &thinned).expect("nonempty");
                nonamenable &= b >= (d as u64 - 2) * thinned.len() as u64;
            }
        }
    }
    outcome(
        mismatches == 0 && nonamenable,
        mismatches as f64,
        0.0,
        format!("{checked} subtrees, {mismatches} mismatches, forest bound {}", if nonamenable { "holds" } else { "violated" }),
        json!({ "checked": checked, "mismatches": mismatches, "nonamenable": nonamenable }),
    )
}

fn level_sum() -> Outcome {
    let mut bad = Vec::new();
    for d in tol::LEVEL_SUM_DEGREES {
        for s in 1..=tol::LEVEL_SUM_MAX_S {
            let (with_root, without_root) = diagrams::level_sum_identity(d, s).expect("s ≥ 1");
            if without_root != BigRational::from_integer(s.into()) || with_root != BigRational::from_integer((s + 1).into()) {
                bad.push((d, s));
            }
        }
    }
    outcome(
        bad.is_empty(),
        bad.len() as f64,
        0.0,
        format!("{} (d, s) pairs exact, {} mismatches", 3 * tol::LEVEL_SUM_MAX_S, bad.len()),
        json!({ "mismatches": bad }),
    )
}

/// Openings with `|w| ≤ 4` used by the oracle grid.
pub const ORACLE_OPENINGS: [LevelSpec; 6] = [
    LevelSpec::new(0, 0),
    LevelSpec::new(1, 0),
    LevelSpec::new(2, 1),
    LevelSpec::new(0, 3),
    LevelSpec::new(2, 2),
    LevelSpec::new(4, 0),
];

fn diagram_equivalence() -> Outcome {
    let graph = ProductGraph::txt(3);
    let d = graph.d;
    let geometric = tf::geometric(d, 1.0);
    let oded = tf::oded_shaped(d, 1.0);
    let functions: [(&str, &dyn Fn(u32, u32) -> f64); 3] = [("geometric", &geometric), ("oded", &oded), ("anisotropic", &tf::anisotropic)];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (_, g) in functions {
        for r in 1..=tol::DIAGRAM_MAX_R {
            for w in ORACLE_OPENINGS {
                let brute: f64 = diagrams::brute_open_triangle_with(&graph, r, w, g, g, g, BRUTE_BUDGET).expect("within budget");
                let reduced: f64 = diagrams::open_triangle(&graph, g, w, r).expect("TxT");
                worst = worst.max((brute - reduced).abs() / brute.abs().max(f64::MIN_POSITIVE));
                cases += 1;
            }
            let brute: f64 = diagrams::brute_triangle(&graph, g, r).expect("within budget");
            let reduced: f64 = diagrams::reduced_triangle(&graph, g, r).expect("TxT");
            worst = worst.max((brute - reduced).abs() / brute.abs().max(f64::MIN_POSITIVE));
            cases += 1;
        }
    }
    // exact rational agreement on the rational test functions
    debug_assert!(ORACLE_OPENINGS.iter().all(|w| w.k1 + w.k2 <= tol::DIAGRAM_MAX_OPENING));
    let mut exact_mismatches = 0;
    for r in 1..=3 {
        for w in ORACLE_OPENINGS {
            let a = diagrams::brute_open_triangle(&graph, tf::geometric_exact(d), w, r).expect("within budget");
            let b = diagrams::open_triangle(&graph, tf::geometric_exact(d), w, r).expect("TxT");
            let c = diagrams::brute_open_triangle(&graph, tf::anisotropic_exact, w, r).expect("within budget");
            let e = diagrams::open_triangle(&graph, tf::anisotropic_exact, w, r).expect("TxT");
            exact_mismatches += (a != b) as u32 + (c != e) as u32;
        }
    }
    outcome(
        worst <= tol::DIAGRAM_REL_TOL && exact_mismatches == 0,
        worst,
        tol::DIAGRAM_REL_TOL,
        format!("{cases} floating cases, max relative error {worst:.2e}; {exact_mismatches} exact mismatches"),
        json!({ "cases": cases, "max_rel_error": worst, "exact_mismatches": exact_mismatches }),
    )
}

fn tree_pc(ctx: &Context) -> Outcome {
    let s = invade(InvasionParams::new(ProductGraph::tree(tol::TREE_DEGREE), 1.0, ctx.scale.invasion_target, run_seed(ctx.seed, 0)))
        .expect("valid parameters");
    let (lo, hi) = tol::TREE_PC_RANGE;
    outcome(
        (lo..=hi).contains(&s.p1_hat) && !s.memory_exceeded,
        s.p1_hat,
        0.5,
        format!("p̂ = {:.4} in [{lo}, {hi}] (target {})", s.p1_hat, s.cluster_size),
        serde_json::to_value(&s).unwrap(),
    )
}

fn curve(ctx: &Context) -> Outcome {
    let grid = symmetric_rho_grid(tol::CURVE_RHO_EXTREME, &[0.25, 0.5]);
    let pts = critical_curve(ProductGraph::txt(3), &grid, ctx.scale.invasion_target, ctx.scale.curve_seeds, ctx.seed).expect("valid parameters");
    let end = &pts[0];
    let endpoint_err = (end.p1_hat - tol::CURVE_ENDPOINT.0).abs().max((end.p2_hat - tol::CURVE_ENDPOINT.1).abs());
    let mut symmetry_err = 0.0f64;
    for (a, b) in pts.iter().zip(pts.iter().rev()) {
        symmetry_err = symmetry_err.max((a.p1_hat - b.p2_hat).abs()).max((a.p2_hat - b.p1_hat).abs());
    }
    let failures: usize = pts.iter().map(|p| p.failures).sum();
    let points: Vec<Value> = pts
        .iter()
        .map(|p| json!({ "rho": p.rho, "p1_hat": p.p1_hat, "p2_hat": p.p2_hat, "sd": p.uncertainty }))
        .collect();
    outcome(
        endpoint_err <= tol::CURVE_ENDPOINT_TOL && symmetry_err <= tol::CURVE_SYMMETRY_TOL && failures == 0,
        endpoint_err.max(symmetry_err),
        tol::CURVE_ENDPOINT_TOL,
        format!(
            "endpoint ρ={} at ({:.4}, {:.4}), off by {endpoint_err:.4}; max mirror gap {symmetry_err:.4}",
            end.rho, end.p1_hat, end.p2_hat
        ),
        json!({ "points": points, "endpoint_error": endpoint_err, "symmetry_error": symmetry_err }),
    )
}

fn mass_transport(ctx: &Context) -> Outcome {
    let spec = LevelSpec::new(tol::DEGREE_SPEC.0, tol::DEGREE_SPEC.1);
    let m = transience_threshold(spec, 3, tol::SAFETY_C).expect("|x| ≥ 1");
    let params = SchrammParams::new(ctx.critical_model(), spec, m, 1);
    let rep = mean_root_degree(&params, ctx.scale.degree_trials, stream_seed(ctx.seed, 6, 0xacce), ctx.scale.caps()).expect("valid");
    debug_assert!((z_upper(1.0 - tol::DEGREE_CONFIDENCE) - 2.326).abs() < 1e-3);
    outcome(
        rep.upper_99 < tol::DEGREE_LIMIT,
        rep.upper_99,
        tol::DEGREE_LIMIT,
        format!("m = {m}, mean degree {:.4} (99% upper {:.4}) over {} realizations", rep.mean, rep.upper_99, rep.trials),
        serde_json::to_value(&rep).unwrap(),
    )
}

fn two_over_m(ctx: &Context) -> Outcome {
    let spec = LevelSpec::new(tol::TWO_OVER_M_SPEC.0, tol::TWO_OVER_M_SPEC.1);
    let m = transience_threshold(spec, 3, tol::SAFETY_C).expect("|x| ≥ 1");
    let rep = connection_vs_2_over_m(&ctx.critical_model(), spec, m, &ctx.sampling(ctx.scale.connection_trials, 7)).expect("valid");
    outcome(
        rep.holds,
        rep.entry.upper,
        rep.bound,
        format!("m = {m}, P(0↔x) in [{:.2e}, {:.2e}] vs 2/(m+1) = {:.3}", rep.entry.lower, rep.entry.upper, rep.bound),
        serde_json::to_value(&rep).unwrap(),
    )
}

fn decay(ctx: &Context) -> Outcome {
    let model = ctx.critical_model();
    let max_k = *tol::DECAY_KS.last().unwrap();
    let census = class_census(&model, 2 * max_k, None, &ctx.sampling(ctx.scale.census_trials, 8)).expect("valid");
    let xs: Vec<f64> = tol::DECAY_KS.iter().map(|&k| 2.0 * k as f64).collect();
    let values: Vec<f64> = tol::DECAY_KS.iter().map(|&k| census.lower(k, k)).collect();
    let ln2 = 2f64.ln();
    let threshold = -0.5 * ln2 + tol::DECAY_SLACK;
    let sharp = -ln2 + tol::DECAY_SHARP_SLACK;
    let table: Vec<Value> = tol::DECAY_KS
        .iter()
        .map(|&k| {
            let e = census.get(k, k).unwrap();
            json!({ "k": k, "lower": e.lower, "upper": e.upper, "stderr": e.stderr, "censored": e.censored })
        })
        .collect();
    if values.iter().any(|&v| v <= 0.0) {
        return outcome(false, f64::NAN, threshold, "a diagonal class was never reached; slope undefined".into(), json!({ "table": table }));
    }
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    let mut out = outcome(
        slope <= threshold,
        slope,
        threshold,
        format!("slope {slope:.4} ≤ {threshold:.4} (sharper target {sharp:.4})"),
        json!({ "table": table, "slope": slope, "threshold": threshold, "sharp_threshold": sharp, "p": model.p1 }),
    );
    if slope > sharp {
        out.warnings.push(format!("slope {slope:.4} above the sharper target {sharp:.4}"));
    }
    out
}

fn growth(ctx: &Context) -> Outcome {
    let (lo, hi) = tol::GROWTH_RADII;
    let est = estimate_g(&ctx.critical_model(), hi, &ctx.sampling(ctx.scale.growth_trials, 9)).expect("valid");
    let (ratio, se) = est.ratio(hi, lo);
    let upper = ratio + z_upper(1.0 - tol::GROWTH_CONFIDENCE) * se;
    let cap = (hi as f64 / lo as f64).powf(tol::GROWTH_EXPONENT);
    outcome(
        upper <= cap,
        upper,
        cap,
        format!(
            "Ĝ({hi})/Ĝ({lo}) = {ratio:.3} ± {se:.3}, 95% upper {upper:.3} ≤ {cap}; Ĝ({lo}) = {:.1}, Ĝ({hi}) = {:.1}",
            est.mean[lo as usize], est.mean[hi as usize]
        ),
        json!({ "ratio": ratio, "stderr": se, "upper": upper, "g": est.mean, "g_stderr": est.stderr, "truncated": est.truncated_trials }),
    )
}

fn moments(ctx: &Context) -> Outcome {
    let rep = moment_tail_check(&ctx.critical_model(), tol::MOMENT_RADIUS, &ctx.sampling(ctx.scale.moment_trials, 10)).expect("valid");
    let margin = (0..tol::MOMENT_ORDERS).map(|k| rep.bounds[k] / rep.moments[k]).fold(f64::INFINITY, f64::min);
    outcome(
        rep.passed(),
        margin,
        1.0,
        format!(
            "E|B|ⁿ = {:.3e}, {:.3e}, {:.3e} vs bounds {:.3e}, {:.3e}, {:.3e} (smallest margin ×{margin:.1})",
            rep.moments[0], rep.moments[1], rep.moments[2], rep.bounds[0], rep.bounds[1], rep.bounds[2]
        ),
        serde_json::to_value(&rep).unwrap(),
    )
}

/// Splits `|w|` evenly over the coordinates.
pub fn balanced_opening(norm: u32) -> LevelSpec {
    LevelSpec::new(norm - norm / 2, norm / 2)
}

fn offpoint(ctx: &Context) -> Outcome {
    let model = ctx.critical_model();
    let mut reports = Vec::new();
    let mut passed = true;
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for (i, &(r, wn)) in tol::OFFPOINT_CASES.iter().enumerate() {
        let settings = diagrams::OffpointSettings {
            trials: ctx.scale.offpoint_trials,
            census_trials: ctx.scale.offpoint_census_trials,
            blocks: 20,
            n_cap: ctx.scale.n_cap.min(20_000),
            seed: stream_seed(ctx.seed, 11 + i as u64, 0xacce),
        };
        let rep = diagrams::offpointa_check(&model, r, balanced_opening(wn), &settings).expect("valid");
        let slack = (rep.lhs_low - rep.rhs) / rep.sigma.max(f64::MIN_POSITIVE);
        worst = worst.min(slack);
        passed &= rep.passed && rep.lhs_low >= rep.rhs - tol::OFFPOINT_SIGMAS * rep.sigma;
        parts.push(format!("(r={r},|w|={wn}) LHS {:.2} vs RHS {:.2} ± {:.2}, ∇̂ {:.4}", rep.lhs_low, rep.rhs, rep.sigma, rep.triangle));
        reports.push(serde_json::to_value(&rep).unwrap());
    }
    outcome(passed, worst, -tol::OFFPOINT_SIGMAS, parts.join("; "), Value::Array(reports))
}

fn ballistic(ctx: &Context) -> Outcome {
    let (lo, hi) = tol::BALLISTIC_RADII;
    let s = extrinsic_ballisticity(&ctx.critical_model(), &[lo, hi], &ctx.sampling(ctx.scale.ballistic_trials, 12)).expect("valid");
    let seed = stream_seed(ctx.seed, 12, 0xb007);
    let Some(mr) = median_ratio(&s[0], &s[1], ctx.scale.bootstrap, seed) else {
        return outcome(false, f64::NAN, tol::BALLISTIC_RATIO, "a shell was never reached".into(), json!({}));
    };
    debug_assert!((tol::BALLISTIC_CONFIDENCE - 0.95).abs() < 1e-12);
    outcome(
        mr.lower >= tol::BALLISTIC_RATIO,
        mr.lower,
        tol::BALLISTIC_RATIO,
        format!(
            "median |x| {:?} → {:?}, ratio {:.3} (95% lower {:.3}); {} / {} trials reached r = {hi}",
            s[0].median(),
            s[1].median(),
            mr.ratio,
            mr.lower,
            s[1].trials - s[1].empty_trials,
            s[1].trials
        ),
        json!({ "inner": s[0], "outer": s[1], "ratio": mr }),
    )
}

fn subcritical(ctx: &Context) -> Outcome {
    let pc = ctx.pc();
    let p = tol::SUBCRITICAL_FACTOR * pc.p1_hat;
    let model = Model::isotropic(ProductGraph::txt(3), p).expect("p in range");
    let rep = subcritical_stability(&model, &ctx.scale.stability_schedule(), ctx.scale.stability_trials, stream_seed(ctx.seed, 13, 0xacce))
        .expect("valid schedule");
    let last = *rep.relative_changes.last().unwrap();
    let below = p < pc.p1_hat - 3.0 * pc.uncertainty;
    outcome(
        rep.stable && last < tol::STABILITY_TOL && below,
        last,
        tol::STABILITY_TOL,
        format!(
            "p = {p:.4}: E min(|C|, cap) = {:.3} → {:.3} over the last doubling ({:+.3}%)",
            rep.estimates[rep.estimates.len() - 2],
            rep.estimates.last().unwrap(),
            100.0 * last
        ),
        serde_json::to_value(&rep).unwrap(),
    )
}

fn invariance(ctx: &Context) -> Outcome {
    let spec = LevelSpec::new(tol::INVARIANCE_SPEC.0, tol::INVARIANCE_SPEC.1);
    let m = transience_threshold(spec, 3, tol::SAFETY_C).expect("|x| ≥ 1");
    let params = SchrammParams::new(ctx.critical_model(), spec, m, tol::INVARIANCE_DEPTH);
    let rep = invariance_test(&params, ctx.scale.invariance_trials, stream_seed(ctx.seed, 14, 0xacce), ctx.scale.caps()).expect("valid");
    outcome(
        rep.passed && rep.adjusted_p >= tol::INVARIANCE_ALPHA,
        rep.adjusted_p,
        tol::INVARIANCE_ALPHA,
        format!(
            "edge rates {:.4} / {:.4} (McNemar p {:.3}); degree homogeneity p {:.3}; adjusted p {:.3}",
            rep.root_edge_rate, rep.child_edge_rate, rep.mcnemar_p, rep.homogeneity_p, rep.adjusted_p
        ),
        serde_json::to_value(&rep).unwrap(),
    )
}

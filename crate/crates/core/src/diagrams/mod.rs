//! Triangle diagram sums on `T×T` for two-point functions that depend only
//! on the symmetry class `(|x₁|, |x₂|)`.
//!
//! The restricted open triangle is
//!
//! ```text
//! ∇(w; r) = Σ_{|u| ≤ r, d(v,w) ≤ r} f(u)·h(u⁻¹v)·f'(v⁻¹w)
//! ```
//!
//! and the closed triangle is the case `w = 0`. [`brute_open_triangle`]
//! enumerates both balls; [`open_triangle`] sums over per-coordinate
//! multiplicities instead. In a single tree, fix `w` at depth `ℓ`: the
//! number of pairs `(u, v)` with `|u| = a`, `d(u,v) = c`, `d(v,w) = e`
//! factors through `n = |v|` as `Σₙ K(ℓ; n, e)·K(n; a, c)`, where
//! `K(n; a, c)` counts the points at depth `a` and distance `c` from a fixed
//! point at depth `n`. Those points leave the root-to-`v` geodesic at depth
//! `j = (n + a − c)/2` and then make an excursion of length `a − j`, whose
//! first letter avoids both the parent and the geodesic direction.

mod offpoint;

pub use offpoint::*;

use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::percolation::ClassFunction;
pub use crate::tree::shell_overlap;
use crate::tree::{alternating_word, GraphKind, LevelSpec, ProductGraph, ProductVertex, TreeError, TreeWord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("diagram sums are implemented for TxT only, got {0}")]
    Graph(GraphKind),
    #[error("s must be at least 1")]
    Level,
    #[error(transparent)]
    Percolation(#[from] crate::percolation::PercolationError),
}

/// A value type the reducers can sum in: floating point or exact rationals.
pub trait Weight: Clone + Zero + Add<Output = Self> + Mul<Output = Self> {
    fn from_count(n: u128) -> Self;
}

impl Weight for f64 {
    fn from_count(n: u128) -> Self {
        n as f64
    }
}

impl Weight for BigRational {
    fn from_count(n: u128) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Brute,
    Reduced,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramResult {
    pub value: f64,
    pub r: u32,
    /// `None` for the closed triangle.
    pub w: Option<LevelSpec>,
    pub method: Method,
    pub stderr: Option<f64>,
}

/// Nonzero `(a, c, e, multiplicity)` entries for one tree coordinate with
/// `|w_i| = ell`, `a ≤ a_max`, `e ≤ e_max`.
fn coordinate_table(d: u8, ell: u32, a_max: u32, e_max: u32) -> Vec<(u32, u32, u32, u128)> {
    let mut out = Vec::new();
    for a in 0..=a_max {
        for e in 0..=e_max {
            let n_max = ell + e;
            for c in 0..=a + n_max {
                let mut m = 0u128;
                for n in 0..=n_max {
                    let j = shell_overlap(d, ell, n, e);
                    if j != 0 {
                        m += j * shell_overlap(d, n, a, c);
                    }
                }
                if m != 0 {
                    out.push((a, c, e, m));
                }
            }
        }
    }
    out
}

/// Class-indexed table of a two-point function up to norm `max_norm`.
struct ClassTable<W> {
    width: usize,
    values: Vec<W>,
}

impl<W: Weight> ClassTable<W> {
    fn new(max_k: u32, g: &impl Fn(u32, u32) -> W) -> Self {
        let width = max_k as usize + 1;
        let mut values = Vec::with_capacity(width * width);
        for k1 in 0..=max_k {
            for k2 in 0..=max_k {
                values.push(g(k1, k2));
            }
        }
        Self { width, values }
    }

    #[inline]
    fn get(&self, k1: u32, k2: u32) -> &W {
        &self.values[k1 as usize * self.width + k2 as usize]
    }
}

fn check_txt(graph: &ProductGraph) -> Result<(), DiagramError> {
    match graph.kind {
        GraphKind::Txt => Ok(()),
        other => Err(DiagramError::Graph(other)),
    }
}

/// The opening point used for class `w`: alternating words in each
/// coordinate (any representative gives the same sum).
pub fn opening_point(w: LevelSpec) -> ProductVertex {
    ProductVertex::new(alternating_word(w.k1), alternating_word(w.k2))
}

/// Open triangle by per-coordinate reduction, with three possibly different
/// two-point functions.
pub fn open_triangle_with<W, F, H, G>(graph: &ProductGraph, r: u32, w: LevelSpec, f: F, h: H, f2: G) -> Result<W, DiagramError>
where
    W: Weight,
    F: Fn(u32, u32) -> W,
    H: Fn(u32, u32) -> W,
    G: Fn(u32, u32) -> W,
{
    check_txt(graph)?;
    let t1 = coordinate_table(graph.d, w.k1, r, r);
    let t2 = coordinate_table(graph.d, w.k2, r, r);
    let f_tab = ClassTable::new(r, &f);
    let h_tab = ClassTable::new(2 * r + w.k1.max(w.k2), &h);
    let f2_tab = ClassTable::new(r, &f2);
    let mut total = W::zero();
    for &(a1, c1, e1, m1) in &t1 {
        let mut inner = W::zero();
        for &(a2, c2, e2, m2) in &t2 {
            if a1 + a2 > r || e1 + e2 > r {
                continue;
            }
            let term = f_tab.get(a1, a2).clone() * h_tab.get(c1, c2).clone() * f2_tab.get(e1, e2).clone();
            inner = inner + W::from_count(m2) * term;
        }
        total = total + W::from_count(m1) * inner;
    }
    Ok(total)
}

pub fn open_triangle<W: Weight, F: Fn(u32, u32) -> W>(graph: &ProductGraph, g: F, w: LevelSpec, r: u32) -> Result<W, DiagramError> {
    open_triangle_with(graph, r, w, &g, &g, &g)
}

/// Closed restricted triangle by reduction.
pub fn reduced_triangle<W: Weight, F: Fn(u32, u32) -> W>(graph: &ProductGraph, g: F, r: u32) -> Result<W, DiagramError> {
    open_triangle(graph, g, LevelSpec::new(0, 0), r)
}

/// Default enumeration budget for the brute-force oracle (vertices of `B(r)`).
pub const BRUTE_BUDGET: u128 = 20_000;

/// Open triangle by explicit enumeration of `u ∈ B(r)` and `v ∈ B(w, r)`.
pub fn brute_open_triangle_with<W, F, H, G>(
    graph: &ProductGraph,
    r: u32,
    w: LevelSpec,
    f: F,
    h: H,
    f2: G,
    budget: u128,
) -> Result<W, DiagramError>
where
    W: Weight,
    F: Fn(u32, u32) -> W,
    H: Fn(u32, u32) -> W,
    G: Fn(u32, u32) -> W,
{
    check_txt(graph)?;
    let ball = graph.enumerate_ball(r, budget)?;
    let wv = opening_point(w);
    let around_w: Vec<ProductVertex> = ball.iter().map(|z| graph.mul(&wv, z)).collect();
    let mut memo: HashMap<(u32, u32), W> = HashMap::new();
    let mut h_of = |k1: u32, k2: u32| memo.entry((k1, k2)).or_insert_with(|| h(k1, k2)).clone();
    let mut total = W::zero();
    for u in &ball {
        let fu = f(u.a.len() as u32, u.b.norm() as u32);
        let mut inner = W::zero();
        for (z, v) in ball.iter().zip(&around_w) {
            // d(v, w) = |z| since v = w·z
            let c1 = u.a.distance(&v.a) as u32;
            let c2 = u.b.distance(&v.b) as u32;
            let term = h_of(c1, c2) * f2(z.a.len() as u32, z.b.norm() as u32);
            inner = inner + term;
        }
        total = total + fu * inner;
    }
    Ok(total)
}

pub fn brute_triangle<W: Weight, F: Fn(u32, u32) -> W>(graph: &ProductGraph, g: F, r: u32) -> Result<W, DiagramError> {
    brute_open_triangle_with(graph, r, LevelSpec::new(0, 0), &g, &g, &g, BRUTE_BUDGET)
}

pub fn brute_open_triangle<W: Weight, F: Fn(u32, u32) -> W>(
    graph: &ProductGraph,
    g: F,
    w: LevelSpec,
    r: u32,
) -> Result<W, DiagramError> {
    brute_open_triangle_with(graph, r, w, &g, &g, &g, BRUTE_BUDGET)
}

/// Analytic test functions used to cross-check the reducers.
pub mod test_functions {
    use super::*;

    pub fn indicator<W: Weight + One>(k1: u32, k2: u32) -> W {
        if k1 == 0 && k2 == 0 {
            W::one()
        } else {
            W::zero()
        }
    }

    /// `(d−1)^{−α(k₁+k₂)}`.
    pub fn geometric(d: u8, alpha: f64) -> impl Fn(u32, u32) -> f64 {
        move |k1, k2| ((d - 1) as f64).powf(-alpha * (k1 + k2) as f64)
    }

    /// `(d−1)^{−(k₁+k₂)}` exactly.
    pub fn geometric_exact(d: u8) -> impl Fn(u32, u32) -> BigRational {
        move |k1, k2| BigRational::new(BigInt::one(), BigInt::from(d - 1).pow(k1 + k2))
    }

    /// `min(1, C·max(1,|x|)²·(d−1)^{−|x|/2})`.
    pub fn oded_shaped(d: u8, c: f64) -> impl Fn(u32, u32) -> f64 {
        move |k1, k2| {
            let n = (k1 + k2) as f64;
            (c * n.max(1.0).powi(2) * ((d - 1) as f64).powf(-n / 2.0)).min(1.0)
        }
    }

    /// `2^{−k₁}·3^{−k₂}`: not symmetric in the coordinates.
    pub fn anisotropic(k1: u32, k2: u32) -> f64 {
        2f64.powi(-(k1 as i32)) * 3f64.powi(-(k2 as i32))
    }

    pub fn anisotropic_exact(k1: u32, k2: u32) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(2).pow(k1) * BigInt::from(3).pow(k2))
    }
}

/// `C·|x|²·(d−1)^{−|x|/2}`.
pub fn oded_bound(d: u8, x: LevelSpec, c: f64) -> f64 {
    let n = x.norm() as f64;
    c * n * n * ((d - 1) as f64).powf(-n / 2.0)
}

/// Smallest `C` with `values(k) ≤ oded_bound(k, C)` on every listed class of
/// positive norm.
pub fn fit_oded_constant(d: u8, values: &[(LevelSpec, f64)]) -> f64 {
    values
        .iter()
        .filter(|(k, _)| k.norm() > 0)
        .map(|&(k, v)| v / oded_bound(d, k, 1.0))
        .fold(0.0, f64::max)
}

/// `9·s⁸·(d−1)^{−|w|/2}`.
pub fn yzr_bound(d: u8, s: u32, w: LevelSpec) -> f64 {
    9.0 * (s as f64).powi(8) * ((d - 1) as f64).powf(-(w.norm() as f64) / 2.0)
}

/// `Σ_{|u₁|,|v₁| ≤ s} (d−1)^{−(|u₁| + d(u₁,v₁) + d(v₁,w₁))/2}` in one tree,
/// for `|w₁| = ell`, exactly.
pub fn yzr_coordinate_sum(d: u8, s: u32, ell: u32) -> f64 {
    let base = (d - 1) as f64;
    let mut total = 0.0;
    for a in 0..=s {
        for n in 0..=s {
            for e in 0..=n + ell {
                let j = shell_overlap(d, ell, n, e);
                if j == 0 {
                    continue;
                }
                for c in 0..=a + n {
                    let k = shell_overlap(d, n, a, c);
                    if k != 0 {
                        total += (j * k) as f64 * base.powf(-((a + c + e) as f64) / 2.0);
                    }
                }
            }
        }
    }
    total
}

/// The full product-form sum bounded by `9s⁸(d−1)^{−|w|/2}`.
pub fn yzr_sum(d: u8, s: u32, w: LevelSpec) -> f64 {
    yzr_coordinate_sum(d, s, w.k1) * yzr_coordinate_sum(d, s, w.k2)
}

/// `Σ_{j} #{forward-subtree vertices at distance j}·(d−1)^{−j}` over
/// `j ≤ s`, once including `j = 0` and once over `j ≥ 1` only. Level sizes
/// are counted from the tree's neighbour structure along a representative
/// geodesic.
pub fn level_sum_identity(d: u8, s: u32) -> Result<(BigRational, BigRational), DiagramError> {
    if s < 1 {
        return Err(DiagramError::Level);
    }
    let graph = ProductGraph::tree(d);
    // forward subtree of a = [0]: children are the neighbours farther from 0
    let mut rep = TreeWord::product([0]);
    let mut level = BigInt::one();
    let mut with_root = BigRational::one();
    let mut without_root = BigRational::zero();
    for j in 1..=s {
        let here = ProductVertex::new(rep.clone(), TreeWord::root());
        let forward: Vec<ProductVertex> = graph
            .neighbors(&here)
            .into_iter()
            .filter(|n| n.a.len() > rep.len())
            .collect();
        level *= BigInt::from(forward.len());
        let term = BigRational::new(level.clone(), BigInt::from(d - 1).pow(j));
        with_root += term.clone();
        without_root += term;
        rep = forward[0].a.clone();
    }
    Ok((with_root, without_root))
}

/// Monte Carlo triangle from estimated two-point tables: `f` is the
/// radius-restricted census lower bracket, `h` the unrestricted one.
pub fn estimated_open_triangle(
    graph: &ProductGraph,
    restricted: &ClassFunction,
    unrestricted: &ClassFunction,
    w: LevelSpec,
    r: u32,
) -> Result<f64, DiagramError> {
    open_triangle_with(
        graph,
        r,
        w,
        |a, b| restricted.lower(a, b),
        |a, b| unrestricted.lower(a, b),
        |a, b| restricted.lower(a, b),
    )
}

#[cfg(test)]
mod tests {
    use super::test_functions::*;
    use super::*;
    use crate::tree::words_of_length;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn shell_overlap_matches_enumeration() {
        let d = 3;
        for n in 0..=4u32 {
            let v = alternating_word(n);
            for a in 0..=4u32 {
                let words = words_of_length(d, a);
                for c in 0..=8u32 {
                    let count = words.iter().filter(|u| u.distance(&v) == c as usize).count() as u128;
                    assert_eq!(shell_overlap(d, n, a, c), count, "n={n} a={a} c={c}");
                }
            }
        }
    }

    #[test]
    fn golden_closed_triangle() {
        // computed once by an independent enumeration in exact arithmetic
        let g = ProductGraph::txt(3);
        let half = |k1: u32, k2: u32| BigRational::new(BigInt::one(), BigInt::from(2).pow(k1 + k2));
        assert_eq!(brute_triangle(&g, half, 1).unwrap(), BigRational::new(59.into(), 8.into()));
        assert_eq!(brute_triangle(&g, half, 2).unwrap(), BigRational::new(1351.into(), 64.into()));
        assert_eq!(reduced_triangle(&g, half, 2).unwrap(), BigRational::new(1351.into(), 64.into()));
    }

    #[test]
    fn indicator_gives_one() {
        let g = ProductGraph::txt(3);
        for r in 0..=4 {
            assert_eq!(brute_triangle(&g, indicator::<f64>, r).unwrap(), 1.0);
            assert_eq!(reduced_triangle(&g, indicator::<f64>, r).unwrap(), 1.0);
        }
    }

    #[test]
    fn reduced_equals_brute_exactly() {
        let g = ProductGraph::txt(3);
        for r in 0..=3 {
            for w in [LevelSpec::new(0, 0), LevelSpec::new(1, 0), LevelSpec::new(2, 1), LevelSpec::new(0, 3)] {
                let a = brute_open_triangle(&g, anisotropic_exact, w, r).unwrap();
                let b = open_triangle(&g, anisotropic_exact, w, r).unwrap();
                assert_eq!(a, b, "r={r} w={w:?}");
            }
        }
    }

    #[test]
    fn reduced_equals_brute_in_floating_point_for_mixed_functions() {
        let g = ProductGraph::txt(4);
        let f = geometric(4, 0.7);
        let h = oded_shaped(4, 1.0);
        for r in 1..=3 {
            for w in [LevelSpec::new(0, 0), LevelSpec::new(2, 2), LevelSpec::new(3, 0)] {
                let a: f64 = brute_open_triangle_with(&g, r, w, &f, &h, anisotropic, BRUTE_BUDGET).unwrap();
                let b: f64 = open_triangle_with(&g, r, w, &f, &h, anisotropic).unwrap();
                assert!(close(a, b), "r={r} w={w:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn coordinate_swap_symmetry() {
        let g = ProductGraph::txt(3);
        let swapped = |k1, k2| anisotropic(k2, k1);
        for r in 1..=4 {
            let a = reduced_triangle(&g, anisotropic, r).unwrap();
            let b = reduced_triangle(&g, swapped, r).unwrap();
            assert!(close(a, b));
        }
    }

    #[test]
    fn monotone_in_r() {
        let g = ProductGraph::txt(3);
        let f = oded_shaped(3, 1.0);
        let values: Vec<f64> = (0..=6).map(|r| reduced_triangle(&g, &f, r).unwrap()).collect();
        assert!(values.windows(2).all(|p| p[0] <= p[1]));
        assert!(values[0] >= 1.0);
    }

    #[test]
    fn open_triangle_decreases_with_opening() {
        let g = ProductGraph::txt(3);
        for alpha in [0.5, 0.75, 1.0] {
            let f = geometric(3, alpha);
            for r in 1..=4 {
                let mut prev = f64::INFINITY;
                for ell in 0..=4 {
                    let w = LevelSpec::new(ell / 2 + ell % 2, ell / 2);
                    let v = open_triangle(&g, &f, w, r).unwrap();
                    let oracle = brute_open_triangle(&g, &f, w, r).unwrap();
                    assert!(close(v, oracle));
                    assert!(v <= prev * (1.0 + 1e-12), "alpha={alpha} r={r} |w|={ell}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn bounds_arithmetic() {
        assert_eq!(oded_bound(3, LevelSpec::new(0, 0), 1.0), 0.0);
        assert!((oded_bound(3, LevelSpec::new(2, 2), 1.0) - 4.0).abs() < 1e-12);
        assert!((yzr_bound(3, 1, LevelSpec::new(2, 0)) - 4.5).abs() < 1e-12);
        assert!((fit_oded_constant(3, &[(LevelSpec::new(2, 2), 2.0), (LevelSpec::new(1, 0), 0.1)]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn yzr_coordinate_sum_matches_enumeration() {
        let d = 3;
        let base = 2f64;
        for s in 1..=3u32 {
            for ell in 0..=3u32 {
                let w1 = alternating_word(ell);
                let ball: Vec<TreeWord> = (0..=s).flat_map(|k| words_of_length(d, k)).collect();
                let mut brute = 0.0;
                for u in &ball {
                    for v in &ball {
                        let x = u.len() + u.distance(v) + v.distance(&w1);
                        brute += base.powf(-(x as f64) / 2.0);
                    }
                }
                assert!(close(brute, yzr_coordinate_sum(d, s, ell)), "s={s} ell={ell}");
            }
        }
    }

    #[test]
    fn yzr_domination_with_shifted_polynomial() {
        // the per-coordinate sum stays below 3(s+1)⁴(d−1)^{−ℓ/2}
        for d in [3u8, 4] {
            for s in 1..=8 {
                for ell in 0..=8 {
                    let bound = 3.0 * ((s + 1) as f64).powi(4) * ((d - 1) as f64).powf(-(ell as f64) / 2.0);
                    assert!(yzr_coordinate_sum(d, s, ell) <= bound);
                }
            }
        }
        // the literal 3s⁴ fails at s = 1, w = 0: the sum is 7
        assert!((yzr_coordinate_sum(3, 1, 0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn level_sums() {
        for (d, s) in [(3u8, 20u32), (5, 7), (4, 1)] {
            let (with_root, without_root) = level_sum_identity(d, s).unwrap();
            assert_eq!(with_root, BigRational::from_integer((s + 1).into()));
            assert_eq!(without_root, BigRational::from_integer(s.into()));
        }
        assert_eq!(level_sum_identity(3, 0), Err(DiagramError::Level));
    }

    #[test]
    fn level_sum_by_subtree_enumeration() {
        // explicit forward subtree of [0]: words starting with 0 of length ≥ 1
        for (d, s) in [(3u8, 10u32), (4, 6), (5, 5)] {
            let mut sum = BigRational::zero();
            for j in 1..=s {
                let count = words_of_length(d, j + 1).iter().filter(|w| w.letters()[0] == 0).count();
                sum += BigRational::new(count.into(), BigInt::from(d - 1).pow(j));
            }
            assert_eq!(sum, level_sum_identity(d, s).unwrap().1);
        }
    }

    #[test]
    fn rejects_other_graphs() {
        assert_eq!(
            reduced_triangle(&ProductGraph::txz(3), indicator::<f64>, 2),
            Err(DiagramError::Graph(GraphKind::Txz))
        );
    }
}

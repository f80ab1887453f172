//! Schramm's branching walk: an auxiliary tree whose root has `m+1`
//! children and every other vertex `m`, mapped into the product graph by
//! steps that are uniform on a level set. Two auxiliary vertices are joined
//! in `W` when their positions are connected in one percolation
//! configuration.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::percolation::{connection_prob_class, explore_with, run_trials, Caps, ClassEntry, Config, Model, PercolationError, Sampling};
use crate::seed::{rng_from_seed, stream_seed, tag};
use crate::stats::{chi_square_sf, z_upper};
use crate::tree::{shell_overlap, sphere_size, Fiber, GraphKind, LevelSpec, ProductGraph, ProductVertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchrammError {
    #[error("auxiliary tree of depth {depth} with m = {m} has {nodes} nodes, over the budget of {budget}")]
    Budget { depth: u32, m: u64, nodes: u128, budget: u128 },
    #[error("m and depth must be at least 1")]
    Shape,
    #[error("|x| must be at least 1")]
    Norm,
    #[error(transparent)]
    Percolation(#[from] PercolationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchrammParams {
    pub model: Model,
    pub spec: LevelSpec,
    pub m: u64,
    pub depth: u32,
    pub node_budget: u128,
}

impl SchrammParams {
    pub const DEFAULT_NODE_BUDGET: u128 = 1_000_000;

    pub fn new(model: Model, spec: LevelSpec, m: u64, depth: u32) -> Self {
        Self {
            model,
            spec,
            m,
            depth,
            node_budget: Self::DEFAULT_NODE_BUDGET,
        }
    }

    /// `1 + (m+1)(1 + m + … + m^{depth−1})`.
    pub fn node_count(&self) -> u128 {
        let m = self.m as u128;
        let mut level = m + 1;
        let mut total = 1u128;
        for _ in 0..self.depth {
            total = total.saturating_add(level);
            level = level.saturating_mul(m);
        }
        total
    }
}

/// Positions of the auxiliary tree, in breadth-first id order: `0` is the
/// root, `1..=m+1` its children, and so on.
#[derive(Debug, Clone)]
pub struct ParticleTree {
    pub positions: Vec<ProductVertex>,
    pub parent: Vec<Option<usize>>,
    pub generation: Vec<u32>,
}

impl ParticleTree {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        (id + 1..self.len()).filter(move |&c| self.parent[c] == Some(id))
    }

    pub fn generation_ids(&self, g: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.generation[i] == g)
    }
}

/// Grows the auxiliary tree to `params.depth`; each child sits at
/// `parent·X` with `X` uniform on the level set of `params.spec`.
pub fn grow<R: Rng + ?Sized>(params: &SchrammParams, rng: &mut R) -> Result<ParticleTree, SchrammError> {
    if params.m == 0 || params.depth == 0 {
        return Err(SchrammError::Shape);
    }
    let nodes = params.node_count();
    if nodes > params.node_budget {
        return Err(SchrammError::Budget {
            depth: params.depth,
            m: params.m,
            nodes,
            budget: params.node_budget,
        });
    }
    let graph = params.model.graph;
    let mut tree = ParticleTree {
        positions: vec![graph.origin()],
        parent: vec![None],
        generation: vec![0],
    };
    let mut frontier = vec![0usize];
    for g in 1..=params.depth {
        let mut next = Vec::new();
        for &id in &frontier {
            let kids = if id == 0 { params.m + 1 } else { params.m };
            for _ in 0..kids {
                let pos = graph.sample_level_point_from(&tree.positions[id], params.spec, rng);
                tree.positions.push(pos);
                tree.parent.push(Some(id));
                tree.generation.push(g);
                next.push(tree.positions.len() - 1);
            }
        }
        frontier = next;
    }
    Ok(tree)
}

pub const DEFAULT_SAFETY: f64 = 0.5;

/// `max(1, ⌊c·(d−1)^{|x|/2}/|x|²⌋)`.
pub fn transience_threshold(spec: LevelSpec, d: u8, c: f64) -> Result<u64, SchrammError> {
    let n = spec.norm();
    if n == 0 {
        return Err(SchrammError::Norm);
    }
    let raw = c * ((d - 1) as f64).powf(n as f64 / 2.0) / (n as f64).powi(2);
    Ok((raw.floor() as u64).max(1))
}

/// Exact law of `|position|` in one tree coordinate after `l` level steps of
/// length `k` from the root.
pub fn coordinate_depth_law(d: u8, k: u32, l: u32) -> Vec<f64> {
    let mut law = vec![1.0];
    let total = sphere_size(d, k) as f64;
    for _ in 0..l {
        let mut next = vec![0.0; law.len() + k as usize];
        for (n, &p) in law.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (n2, slot) in next.iter_mut().enumerate() {
                let c = shell_overlap(d, n as u32, n2 as u32, k);
                if c != 0 {
                    *slot += p * c as f64 / total;
                }
            }
        }
        law = next;
    }
    law
}

/// Exact law of the `Z` coordinate after `l` steps of `±k` (`k = 0` stays).
fn line_return_probability(k: u32, l: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if l % 2 == 1 {
        return 0.0;
    }
    // binomial(l, l/2)/2^l
    let mut p = 1.0;
    for i in 0..l / 2 {
        p *= (l - i) as f64 / (l / 2 - i) as f64 / 4.0;
    }
    p
}

/// `[P(first coordinate returns), P(second returns), P(both)]` after `l`
/// generations.
pub fn exact_return_probability(graph: &ProductGraph, spec: LevelSpec, l: u32) -> [f64; 3] {
    let first = coordinate_depth_law(graph.d, spec.k1, l)[0];
    let second = match graph.kind {
        GraphKind::Tree => 1.0,
        GraphKind::Txt => coordinate_depth_law(graph.d, spec.k2, l)[0],
        GraphKind::Txz => line_return_probability(spec.k2, l),
    };
    [first, second, first * second]
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnReport {
    pub spec: LevelSpec,
    pub l: u32,
    pub trials: usize,
    pub per_coordinate: [f64; 2],
    pub joint: f64,
    pub joint_stderr: f64,
    /// One-sided 95% upper bound, meaningful when no return was seen.
    pub joint_upper: f64,
    pub exact: [f64; 3],
    /// Smallest `C₁ ≥ 1` with `joint ≤ (C₁|x|²(d−1)^{−|x|/2})ˡ`.
    pub fitted_c1: f64,
    pub degenerate: bool,
}

pub fn return_probability(graph: &ProductGraph, spec: LevelSpec, l: u32, trials: usize, seed: u64) -> Result<ReturnReport, SchrammError> {
    if l == 0 {
        return Err(SchrammError::Shape);
    }
    if trials == 0 {
        return Err(PercolationError::NoTrials.into());
    }
    let origin = graph.origin();
    let hits = run_trials(trials, |t| {
        let mut rng = rng_from_seed(stream_seed(seed, t, tag::RETURNS));
        let mut pos = origin.clone();
        for _ in 0..l {
            pos = graph.sample_level_point_from(&pos, spec, &mut rng);
        }
        let second = match &pos.b {
            Fiber::Tree(w) => w.is_root(),
            Fiber::Line(z) => *z == 0,
        };
        (pos.a.is_root(), second)
    });
    let n = trials as f64;
    let first = hits.iter().filter(|h| h.0).count() as f64 / n;
    let second = hits.iter().filter(|h| h.1).count() as f64 / n;
    let both = hits.iter().filter(|h| h.0 && h.1).count() as u64;
    let joint = both as f64 / n;
    let joint_stderr = crate::stats::proportion_stderr(both, trials as u64);
    let joint_upper = if both == 0 {
        1.0 - 0.05f64.powf(1.0 / n)
    } else {
        joint + z_upper(0.05) * joint_stderr
    };
    let norm = spec.norm() as f64;
    let scale = norm.max(1.0).powi(2) * ((graph.d - 1) as f64).powf(-norm / 2.0);
    let fitted_c1 = (joint.powf(1.0 / l as f64) / scale).max(1.0);
    Ok(ReturnReport {
        spec,
        l,
        trials,
        per_coordinate: [first, second],
        joint,
        joint_stderr,
        joint_upper,
        exact: exact_return_probability(graph, spec, l),
        fitted_c1,
        degenerate: both == 0,
    })
}

/// Degree of the root in `W` for one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RootDegree {
    pub degree: u64,
    /// Children whose connection to the root was not resolved.
    pub censored: u64,
}

/// Which of `targets` lie in the open cluster of `from`; unresolved ones are
/// reported separately. Explores until every target is found, the cluster is
/// exhausted, or the cap is hit.
pub fn connected_targets(cfg: &mut Config, from: &ProductVertex, targets: &[ProductVertex], caps: Caps) -> (Vec<bool>, Vec<bool>) {
    let mut remaining: rustc_hash::FxHashSet<&ProductVertex> = targets.iter().collect();
    remaining.remove(from);
    let ball = explore_with(cfg, from, caps, |v| {
        remaining.remove(v);
        remaining.is_empty()
    });
    let found: Vec<bool> = targets.iter().map(|t| ball.contains(t)).collect();
    let resolved = ball.exhausted || ball.stopped;
    let censored = found.iter().map(|f| !f && !resolved).collect();
    (found, censored)
}

pub fn w_root_degree(params: &SchrammParams, seed: u64, caps: Caps) -> Result<RootDegree, SchrammError> {
    let shallow = SchrammParams { depth: 1, ..*params };
    let mut rng = rng_from_seed(stream_seed(seed, 0, tag::SCHRAMM_WALK));
    let tree = grow(&shallow, &mut rng)?;
    let mut cfg = Config::unmemoized(params.model, stream_seed(seed, 0, tag::SCHRAMM_PERC));
    let (found, censored) = connected_targets(&mut cfg, &tree.positions[0], &tree.positions[1..], caps);
    Ok(RootDegree {
        degree: found.iter().filter(|&&f| f).count() as u64,
        censored: censored.iter().filter(|&&c| c).count() as u64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub m: u64,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Mean when censored children are counted as connected.
    pub mean_high: f64,
    /// One-sided 99% upper bound from `mean_high`.
    pub upper_99: f64,
    pub censored: u64,
    pub below_two: bool,
}

pub fn mean_root_degree(params: &SchrammParams, trials: usize, seed: u64, caps: Caps) -> Result<DegreeReport, SchrammError> {
    if trials == 0 {
        return Err(PercolationError::NoTrials.into());
    }
    let outcomes = run_trials(trials, |t| w_root_degree(params, stream_seed(seed, t, tag::SCHRAMM_WALK), caps));
    let outcomes: Vec<RootDegree> = outcomes.into_iter().collect::<Result<_, _>>()?;
    let lows: Vec<f64> = outcomes.iter().map(|o| o.degree as f64).collect();
    let highs: Vec<f64> = outcomes.iter().map(|o| (o.degree + o.censored) as f64).collect();
    let (mean, stderr) = crate::stats::mean_stderr(&lows);
    let (mean_high, stderr_high) = crate::stats::mean_stderr(&highs);
    let upper_99 = mean_high + z_upper(0.01) * stderr_high;
    Ok(DegreeReport {
        m: params.m,
        trials,
        mean,
        stderr,
        mean_high,
        upper_99,
        censored: outcomes.iter().map(|o| o.censored).sum(),
        below_two: upper_99 < 2.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoOverMReport {
    pub spec: LevelSpec,
    pub m: u64,
    pub bound: f64,
    pub entry: ClassEntry,
    pub holds: bool,
}

/// `P(0 ↔ x) ≤ 2/(m+1)` on the class of `spec`, using the upper bracket.
pub fn connection_vs_2_over_m(model: &Model, spec: LevelSpec, m: u64, sampling: &Sampling) -> Result<TwoOverMReport, SchrammError> {
    let entry = connection_prob_class(model, spec, sampling)?;
    let bound = 2.0 / (m + 1) as f64;
    // σ from the upper bracket's binomial error
    let sigma = crate::stats::proportion_stderr((entry.upper * entry.trials as f64).round() as u64, entry.trials);
    Ok(TwoOverMReport {
        spec,
        m,
        bound,
        entry,
        holds: entry.upper <= bound + 3.0 * sigma,
    })
}

/// Two-sample tests of automorphism invariance at depth 2.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub trials: usize,
    pub m: u64,
    /// `(root, child₁) ∈ W` frequency.
    pub root_edge_rate: f64,
    /// `(child₁, grandchild₁) ∈ W` frequency.
    pub child_edge_rate: f64,
    pub discordant: [u64; 2],
    pub mcnemar_stat: f64,
    pub mcnemar_p: f64,
    /// Degree histograms over `0..=m+1` (root: its `m+1` children; child:
    /// its `m` children plus its parent).
    pub root_degree_hist: Vec<u64>,
    pub child_degree_hist: Vec<u64>,
    pub homogeneity_stat: f64,
    pub homogeneity_dof: f64,
    pub homogeneity_p: f64,
    /// Bonferroni-adjusted minimum p-value.
    pub adjusted_p: f64,
    pub censored: u64,
    pub alpha: f64,
    pub passed: bool,
}

pub const INVARIANCE_ALPHA: f64 = 0.001;

struct Realization {
    root_edge: bool,
    child_edge: bool,
    root_degree: usize,
    child_degree: usize,
    censored: u64,
}

fn realize(params: &SchrammParams, seed: u64, caps: Caps) -> Result<Realization, SchrammError> {
    let mut rng = rng_from_seed(stream_seed(seed, 0, tag::SCHRAMM_WALK));
    let tree = grow(&SchrammParams { depth: 2, ..*params }, &mut rng)?;
    let mut cfg = Config::unmemoized(params.model, stream_seed(seed, 0, tag::SCHRAMM_PERC));
    let kids: Vec<usize> = tree.children(0).collect();
    let child = kids[0];
    let grandkids: Vec<usize> = tree.children(child).collect();

    let root_targets: Vec<ProductVertex> = kids.iter().map(|&k| tree.positions[k].clone()).collect();
    let (root_found, root_cens) = connected_targets(&mut cfg, &tree.positions[0], &root_targets, caps);

    let mut child_targets = vec![tree.positions[0].clone()];
    child_targets.extend(grandkids.iter().map(|&g| tree.positions[g].clone()));
    let (child_found, child_cens) = connected_targets(&mut cfg, &tree.positions[child], &child_targets, caps);

    Ok(Realization {
        root_edge: root_found[0],
        child_edge: child_found[1],
        root_degree: root_found.iter().filter(|&&f| f).count(),
        child_degree: child_found.iter().filter(|&&f| f).count(),
        censored: (root_cens.iter().chain(&child_cens).filter(|&&c| c).count()) as u64,
    })
}

/// Chi-square test of homogeneity for two histograms; empty columns are
/// dropped. Returns `(statistic, dof, p)`.
pub fn homogeneity_test(a: &[u64], b: &[u64]) -> (f64, f64, f64) {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let n = (na + nb) as f64;
    let mut stat = 0.0;
    let mut cols = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cols += 1;
        for (obs, row) in [(x, na), (y, nb)] {
            let expected = col * row as f64 / n;
            if expected > 0.0 {
                stat += (obs as f64 - expected).powi(2) / expected;
            }
        }
    }
    let dof = (cols.max(1) - 1) as f64;
    (stat, dof, chi_square_sf(stat, dof))
}

/// McNemar's test with continuity correction on discordant counts.
pub fn mcnemar(b: u64, c: u64) -> (f64, f64) {
    if b + c == 0 {
        return (0.0, 1.0);
    }
    let diff = (b as f64 - c as f64).abs() - 1.0;
    let stat = diff.max(0.0).powi(2) / (b + c) as f64;
    (stat, chi_square_sf(stat, 1.0))
}

/// (a) paired comparison of the W-indicators of `(root, child₁)` and
/// `(child₁, grandchild₁)`; (b) root degree from even realizations against
/// child degree from odd ones, so the two samples are independent.
pub fn invariance_test(params: &SchrammParams, trials: usize, seed: u64, caps: Caps) -> Result<InvarianceReport, SchrammError> {
    if trials < 2 {
        return Err(PercolationError::NoTrials.into());
    }
    let rs: Vec<Realization> = run_trials(trials, |t| realize(params, stream_seed(seed, t, tag::INVARIANCE), caps))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let n = rs.len() as f64;
    let b = rs.iter().filter(|r| r.root_edge && !r.child_edge).count() as u64;
    let c = rs.iter().filter(|r| !r.root_edge && r.child_edge).count() as u64;
    let (mcnemar_stat, mcnemar_p) = mcnemar(b, c);
    let width = params.m as usize + 2;
    let mut root_degree_hist = vec![0u64; width];
    let mut child_degree_hist = vec![0u64; width];
    for (i, r) in rs.iter().enumerate() {
        if i % 2 == 0 {
            root_degree_hist[r.root_degree] += 1;
        } else {
            child_degree_hist[r.child_degree] += 1;
        }
    }
    let (homogeneity_stat, homogeneity_dof, homogeneity_p) = homogeneity_test(&root_degree_hist, &child_degree_hist);
    let adjusted_p = (2.0 * mcnemar_p.min(homogeneity_p)).min(1.0);
    Ok(InvarianceReport {
        trials,
        m: params.m,
        root_edge_rate: rs.iter().filter(|r| r.root_edge).count() as f64 / n,
        child_edge_rate: rs.iter().filter(|r| r.child_edge).count() as f64 / n,
        discordant: [b, c],
        mcnemar_stat,
        mcnemar_p,
        root_degree_hist,
        child_degree_hist,
        homogeneity_stat,
        homogeneity_dof,
        homogeneity_p,
        adjusted_p,
        censored: rs.iter().map(|r| r.censored).sum(),
        alpha: INVARIANCE_ALPHA,
        passed: adjusted_p >= INVARIANCE_ALPHA,
    })
}

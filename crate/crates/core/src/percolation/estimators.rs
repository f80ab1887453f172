use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{explore, explore_with, Caps, Config, Model, PercolationError};
use crate::seed::{rng_from_seed, stream_seed, tag};
use crate::stats::{histogram_quantile, proportion_stderr, resample_indices, sorted_quantile, CountMoments};
use crate::tree::LevelSpec;

/// Trial count, exploration caps and master seed of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sampling {
    pub trials: usize,
    pub caps: Caps,
    pub seed: u64,
}

impl Sampling {
    pub fn new(trials: usize, caps: Caps, seed: u64) -> Self {
        Self { trials, caps, seed }
    }

    fn check(&self) -> Result<(), PercolationError> {
        if self.trials == 0 {
            Err(PercolationError::NoTrials)
        } else {
            Ok(())
        }
    }
}

/// Runs `f` on every trial index in parallel and returns results in index
/// order, so aggregation never depends on the worker count.
pub fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// `G(r') = E|B_chem(r')|` for `r' ≤ radius`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub radius: u32,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: usize,
    pub truncated_trials: usize,
    /// Per-trial `|B_chem(r')|`, `r' = 0..=radius`.
    #[serde(skip)]
    pub sizes: Vec<Vec<u64>>,
}

impl GrowthEstimate {
    pub fn truncated_fraction(&self) -> f64 {
        self.truncated_trials as f64 / self.trials as f64
    }

    /// `Ĝ(hi)/Ĝ(lo)` with a delta-method standard error that uses the
    /// within-trial covariance of the two sizes.
    pub fn ratio(&self, hi: u32, lo: u32) -> (f64, f64) {
        let n = self.sizes.len() as f64;
        let xs: Vec<f64> = self.sizes.iter().map(|s| s[hi as usize] as f64).collect();
        let ys: Vec<f64> = self.sizes.iter().map(|s| s[lo as usize] as f64).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            sxx += (x - mx).powi(2);
            syy += (y - my).powi(2);
            sxy += (x - mx) * (y - my);
        }
        let d = (n - 1.0).max(1.0);
        let (sxx, syy, sxy) = (sxx / d, syy / d, sxy / d);
        let ratio = mx / my;
        let var = (sxx / my.powi(2) - 2.0 * mx * sxy / my.powi(3) + mx.powi(2) * syy / my.powi(4)) / n;
        (ratio, var.max(0.0).sqrt())
    }
}

/// Estimates `G(r')` for every `r' ≤ radius` from independent configurations.
pub fn estimate_g(model: &Model, radius: u32, sampling: &Sampling) -> Result<GrowthEstimate, PercolationError> {
    sampling.check()?;
    let origin = model.graph.origin();
    let caps = Caps::new(radius, sampling.caps.n_cap);
    let per_trial = run_trials(sampling.trials, |t| {
        let mut cfg = Config::unmemoized(*model, stream_seed(sampling.seed, t, tag::BALL));
        let ball = explore(&mut cfg, &origin, caps);
        let mut cum = ball.stats().cumulative();
        let last = *cum.last().unwrap();
        cum.resize(radius as usize + 1, last);
        (cum, ball.truncated)
    });
    let truncated_trials = per_trial.iter().filter(|(_, t)| *t).count();
    let sizes: Vec<Vec<u64>> = per_trial.into_iter().map(|(c, _)| c).collect();
    let mut mean = Vec::with_capacity(radius as usize + 1);
    let mut stderr = Vec::with_capacity(radius as usize + 1);
    for r in 0..=radius as usize {
        let mut m = CountMoments::default();
        sizes.iter().for_each(|s| m.push(s[r]));
        mean.push(m.mean());
        stderr.push(m.stderr());
    }
    Ok(GrowthEstimate {
        radius,
        mean,
        stderr,
        trials: sampling.trials,
        truncated_trials,
        sizes,
    })
}

/// Bracketed estimate of `P(0 ↔ x)` for one symmetry class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassEntry {
    pub lower: f64,
    pub upper: f64,
    pub stderr: f64,
    pub trials: u64,
    pub censored: u64,
}

impl ClassEntry {
    pub fn exact(value: f64) -> Self {
        Self {
            lower: value,
            upper: value,
            stderr: 0.0,
            trials: 0,
            censored: 0,
        }
    }
}

/// A two-point function tabulated over symmetry classes.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ClassFunction {
    pub table: BTreeMap<LevelSpec, ClassEntry>,
}

impl ClassFunction {
    pub fn get(&self, k1: u32, k2: u32) -> Option<&ClassEntry> {
        self.table.get(&LevelSpec::new(k1, k2))
    }

    /// Lower estimate, zero outside the table.
    pub fn lower(&self, k1: u32, k2: u32) -> f64 {
        self.get(k1, k2).map_or(0.0, |e| e.lower)
    }

    pub fn upper(&self, k1: u32, k2: u32) -> f64 {
        self.get(k1, k2).map_or(0.0, |e| e.upper)
    }
}

/// `P(0 ↔ x)` for `x` uniform on the class `spec`: the lower estimate counts
/// trials where `x` was reached, the upper one adds trials where the
/// exploration stopped on a cap before resolving the question.
pub fn connection_prob_class(model: &Model, spec: LevelSpec, sampling: &Sampling) -> Result<ClassEntry, PercolationError> {
    sampling.check()?;
    let graph = model.graph;
    let origin = graph.origin();
    let outcomes = run_trials(sampling.trials, |t| {
        let seed = stream_seed(sampling.seed, t, tag::CONNECTION);
        let mut rng = rng_from_seed(stream_seed(seed, 0, tag::LEVEL_SAMPLE));
        let x = graph.sample_level_point(spec, &mut rng);
        let mut cfg = Config::unmemoized(*model, seed);
        let ball = explore_with(&mut cfg, &origin, sampling.caps, |v| *v == x);
        if ball.contains(&x) {
            Resolution::Connected
        } else if ball.exhausted {
            Resolution::Separated
        } else {
            Resolution::Censored
        }
    });
    let n = outcomes.len() as u64;
    let hits = outcomes.iter().filter(|o| **o == Resolution::Connected).count() as u64;
    let censored = outcomes.iter().filter(|o| **o == Resolution::Censored).count() as u64;
    let lower = hits as f64 / n as f64;
    Ok(ClassEntry {
        lower,
        upper: (hits + censored) as f64 / n as f64,
        stderr: proportion_stderr(hits, n),
        trials: n,
        censored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Connected,
    Separated,
    Censored,
}

/// One trial of a cluster census: vertex counts per class.
#[derive(Debug, Clone, Default)]
pub struct CensusTrial {
    pub counts: BTreeMap<LevelSpec, u64>,
    pub censored: bool,
}

/// Counts the explored vertices per class, for classes of norm ≤ `max_norm`.
pub fn census_of(ball: &super::Ball, max_norm: u32) -> BTreeMap<LevelSpec, u64> {
    let mut counts = BTreeMap::new();
    for v in ball.shells.iter().flatten() {
        let c = v.class();
        if c.norm() <= max_norm {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    counts
}

/// Aggregates census trials into a class function: the per-trial fraction
/// `N_k/|L_k|` is an unbiased estimate of `P(0 ↔ x)` on class `k`.
pub fn aggregate_census(model: &Model, max_norm: u32, trials: &[CensusTrial]) -> ClassFunction {
    let graph = model.graph;
    let n = trials.len() as f64;
    let mut table = BTreeMap::new();
    let second_max = match graph.kind {
        crate::tree::GraphKind::Tree => 0,
        _ => max_norm,
    };
    for k1 in 0..=max_norm {
        for k2 in 0..=second_max.min(max_norm - k1) {
            let spec = LevelSpec::new(k1, k2);
            let size = graph.level_size(spec) as f64;
            let (mut sum, mut sum_sq, mut deficit) = (0.0, 0.0, 0.0);
            let mut censored = 0;
            for trial in trials {
                let frac = trial.counts.get(&spec).copied().unwrap_or(0) as f64 / size;
                sum += frac;
                sum_sq += frac * frac;
                if trial.censored {
                    censored += 1;
                    deficit += 1.0 - frac;
                }
            }
            let lower = sum / n;
            let var = if n > 1.0 { ((sum_sq - n * lower * lower) / (n - 1.0)).max(0.0) } else { 0.0 };
            table.insert(
                spec,
                ClassEntry {
                    lower,
                    upper: (lower + deficit / n).min(1.0),
                    stderr: (var / n).sqrt(),
                    trials: trials.len() as u64,
                    censored,
                },
            );
        }
    }
    ClassFunction { table }
}

/// Two-point function by cluster census: every vertex of the explored
/// cluster of 0 is credited to its class. With `restrict = Some(r)` only the
/// chemical ball of radius `r` is explored, estimating `P(0 ↔ʳ x)`.
pub fn class_census(
    model: &Model,
    max_norm: u32,
    restrict: Option<u32>,
    sampling: &Sampling,
) -> Result<ClassFunction, PercolationError> {
    sampling.check()?;
    let origin = model.graph.origin();
    let caps = Caps::new(restrict.unwrap_or(sampling.caps.r_cap), sampling.caps.n_cap);
    let trials = run_trials(sampling.trials, |t| {
        let mut cfg = Config::unmemoized(*model, stream_seed(sampling.seed, t, tag::CENSUS));
        let ball = explore(&mut cfg, &origin, caps);
        CensusTrial {
            counts: census_of(&ball, max_norm),
            censored: if restrict.is_some() { ball.truncated } else { !ball.exhausted },
        }
    });
    Ok(aggregate_census(model, max_norm, &trials))
}

/// Distribution of `|x|` over the chemical shell at distance exactly `r`.
#[derive(Debug, Clone, Serialize)]
pub struct BallisticSummary {
    pub r: u32,
    pub trials: usize,
    pub empty_trials: usize,
    pub truncated_trials: usize,
    pub pooled: Vec<u64>,
    pub mean: f64,
    pub min: Option<u32>,
    pub quartiles: Option<[u32; 3]>,
    pub max: Option<u32>,
    /// Per-trial histograms (empty when the shell was empty).
    #[serde(skip)]
    pub per_trial: Vec<Vec<u64>>,
}

impl BallisticSummary {
    fn from_trials(r: u32, per_trial: Vec<Vec<u64>>, truncated_trials: usize) -> Self {
        let pooled = pool(&per_trial, None);
        let total: u64 = pooled.iter().sum();
        let mean = if total == 0 {
            f64::NAN
        } else {
            pooled.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum::<f64>() / total as f64
        };
        let quartiles = match (
            histogram_quantile(&pooled, 0.25),
            histogram_quantile(&pooled, 0.5),
            histogram_quantile(&pooled, 0.75),
        ) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        Self {
            r,
            trials: per_trial.len(),
            empty_trials: per_trial.iter().filter(|h| h.is_empty()).count(),
            truncated_trials,
            min: pooled.iter().position(|&c| c > 0).map(|v| v as u32),
            max: pooled.iter().rposition(|&c| c > 0).map(|v| v as u32),
            mean,
            quartiles,
            pooled,
            per_trial,
        }
    }

    pub fn median(&self) -> Option<u32> {
        self.quartiles.map(|q| q[1])
    }
}

fn pool(per_trial: &[Vec<u64>], indices: Option<&[usize]>) -> Vec<u64> {
    let mut pooled: Vec<u64> = Vec::new();
    let mut add = |h: &Vec<u64>| {
        if pooled.len() < h.len() {
            pooled.resize(h.len(), 0);
        }
        for (i, c) in h.iter().enumerate() {
            pooled[i] += c;
        }
    };
    match indices {
        Some(idx) => idx.iter().for_each(|&i| add(&per_trial[i])),
        None => per_trial.iter().for_each(&mut add),
    }
    pooled
}

/// Extrinsic norms on the chemical shells `radii`, all from one exploration
/// per trial.
pub fn extrinsic_ballisticity(
    model: &Model,
    radii: &[u32],
    sampling: &Sampling,
) -> Result<Vec<BallisticSummary>, PercolationError> {
    sampling.check()?;
    let origin = model.graph.origin();
    let r_max = radii.iter().copied().max().unwrap_or(0);
    let caps = Caps::new(r_max, sampling.caps.n_cap);
    let per_trial = run_trials(sampling.trials, |t| {
        let mut cfg = Config::unmemoized(*model, stream_seed(sampling.seed, t, tag::BALLISTIC));
        let ball = explore(&mut cfg, &origin, caps);
        let hists: Vec<Vec<u64>> = radii
            .iter()
            .map(|&r| {
                let mut h = Vec::new();
                if let Some(shell) = ball.shells.get(r as usize) {
                    for v in shell {
                        let n = v.norm();
                        if h.len() <= n {
                            h.resize(n + 1, 0);
                        }
                        h[n] += 1;
                    }
                }
                h
            })
            .collect();
        (hists, ball.truncated)
    });
    let truncated = per_trial.iter().filter(|(_, t)| *t).count();
    Ok(radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let trials: Vec<Vec<u64>> = per_trial.iter().map(|(h, _)| h[i].clone()).collect();
            BallisticSummary::from_trials(r, trials, truncated)
        })
        .collect())
}

/// Ratio of pooled shell medians with a paired bootstrap over trials.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MedianRatio {
    pub ratio: f64,
    /// 5% bootstrap quantile (one-sided 95% lower bound).
    pub lower: f64,
    pub upper: f64,
}

pub fn median_ratio(lo: &BallisticSummary, hi: &BallisticSummary, resamples: usize, seed: u64) -> Option<MedianRatio> {
    assert_eq!(lo.per_trial.len(), hi.per_trial.len(), "summaries must come from the same trials");
    let ratio = hi.median()? as f64 / lo.median()? as f64;
    let mut rng = rng_from_seed(stream_seed(seed, 0, tag::BOOTSTRAP));
    let mut boot = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let idx = resample_indices(lo.per_trial.len(), &mut rng);
        let (a, b) = (pool(&lo.per_trial, Some(&idx)), pool(&hi.per_trial, Some(&idx)));
        if let (Some(ma), Some(mb)) = (histogram_quantile(&a, 0.5), histogram_quantile(&b, 0.5)) {
            if ma > 0 {
                boot.push(mb as f64 / ma as f64);
            }
        } else {
            boot.push(0.0);
        }
    }
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(MedianRatio {
        ratio,
        lower: sorted_quantile(&boot, 0.05),
        upper: sorted_quantile(&boot, 0.95),
    })
}

/// Moment and tail checks of `|B_chem(r)|` against `(2n·G(r)²)ⁿ` and
/// `2e^{−cλ}`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub r: u32,
    pub trials: usize,
    pub g_hat: f64,
    pub g_stderr: f64,
    pub moments: [f64; 3],
    pub moment_stderr: [f64; 3],
    pub bounds: [f64; 3],
    pub holds: [bool; 3],
    pub tail: Vec<TailPoint>,
    /// Largest `c` with `2e^{−cλ} ≥` the observed tail at every `λ`; `None`
    /// when no trial exceeded any threshold.
    pub best_c: Option<f64>,
    pub truncated_fraction: f64,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailPoint {
    pub lambda: f64,
    pub frequency: f64,
    pub bound_at_best_c: f64,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        !self.inconclusive && self.holds.iter().all(|&h| h)
    }
}

pub const TAIL_LAMBDAS: [f64; 3] = [2.0, 4.0, 8.0];

pub fn moment_tail_check(model: &Model, r: u32, sampling: &Sampling) -> Result<MomentReport, PercolationError> {
    sampling.check()?;
    let origin = model.graph.origin();
    let caps = Caps::new(r, sampling.caps.n_cap);
    let sizes = run_trials(sampling.trials, |t| {
        let mut cfg = Config::unmemoized(*model, stream_seed(sampling.seed, t, tag::MOMENTS));
        let ball = explore(&mut cfg, &origin, caps);
        (ball.len() as u64, ball.truncated)
    });
    let n = sizes.len() as f64;
    let truncated_fraction = sizes.iter().filter(|(_, t)| *t).count() as f64 / n;
    let xs: Vec<f64> = sizes.iter().map(|(s, _)| *s as f64).collect();
    let mut moments = [0.0; 3];
    let mut moment_stderr = [0.0; 3];
    for k in 0..3 {
        let powered: Vec<f64> = xs.iter().map(|x| x.powi(k as i32 + 1)).collect();
        let (m, se) = crate::stats::mean_stderr(&powered);
        moments[k] = m;
        moment_stderr[k] = se;
    }
    let g_hat = moments[0];
    let g_stderr = moment_stderr[0];
    let mut bounds = [0.0; 3];
    let mut holds = [false; 3];
    for k in 0..3 {
        let order = (k + 1) as f64;
        bounds[k] = (2.0 * order * g_hat * g_hat).powf(order);
        holds[k] = moments[k] - 3.0 * moment_stderr[k] <= bounds[k];
    }
    let freqs: Vec<f64> = TAIL_LAMBDAS
        .iter()
        .map(|&l| xs.iter().filter(|&&x| x > l * g_hat * g_hat).count() as f64 / n)
        .collect();
    let best_c = TAIL_LAMBDAS
        .iter()
        .zip(&freqs)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&l, &f)| (2.0 / f).ln() / l)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))));
    let tail = TAIL_LAMBDAS
        .iter()
        .zip(&freqs)
        .map(|(&lambda, &frequency)| TailPoint {
            lambda,
            frequency,
            bound_at_best_c: best_c.map_or(0.0, |c| 2.0 * (-c * lambda).exp()),
        })
        .collect();
    Ok(MomentReport {
        r,
        trials: sizes.len(),
        g_hat,
        g_stderr,
        moments,
        moment_stderr,
        bounds,
        holds,
        tail,
        best_c,
        truncated_fraction,
        inconclusive: truncated_fraction > 0.01,
    })
}

/// `E min(|C(0)|, cap)` along a doubling cap schedule.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub caps: Vec<usize>,
    pub estimates: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `(E_{i+1} − E_i)/E_i`.
    pub relative_changes: Vec<f64>,
    pub trials: usize,
    /// Relative change across the final doubling is below 2%.
    pub stable: bool,
}

pub const STABILITY_TOLERANCE: f64 = 0.02;

/// Sizes of the open cluster of 0, truncated at `sampling.caps.n_cap`.
pub fn cluster_sizes(model: &Model, sampling: &Sampling, stream: u64) -> Result<Vec<(u64, bool)>, PercolationError> {
    sampling.check()?;
    let origin = model.graph.origin();
    let caps = Caps::cluster(sampling.caps.n_cap);
    Ok(run_trials(sampling.trials, |t| {
        let mut cfg = Config::unmemoized(*model, stream_seed(sampling.seed, t, stream));
        let ball = explore(&mut cfg, &origin, caps);
        (ball.len() as u64, ball.truncated)
    }))
}

pub fn subcritical_stability(
    model: &Model,
    caps_schedule: &[usize],
    trials: usize,
    seed: u64,
) -> Result<StabilityReport, PercolationError> {
    if caps_schedule.len() < 2 {
        return Err(PercolationError::Caps("need at least two caps".into()));
    }
    if caps_schedule.windows(2).any(|w| w[1] != 2 * w[0]) || caps_schedule[0] == 0 {
        return Err(PercolationError::Caps(format!("{caps_schedule:?} is not a doubling schedule")));
    }
    let max_cap = *caps_schedule.last().unwrap();
    let sampling = Sampling::new(trials, Caps::cluster(max_cap), seed);
    let sizes = cluster_sizes(model, &sampling, tag::SUBCRITICAL)?;
    let mut estimates = Vec::new();
    let mut stderr = Vec::new();
    for &cap in caps_schedule {
        let mut m = CountMoments::default();
        sizes.iter().for_each(|(s, _)| m.push((*s).min(cap as u64)));
        estimates.push(m.mean());
        stderr.push(m.stderr());
    }
    let relative_changes: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    let stable = *relative_changes.last().unwrap() < STABILITY_TOLERANCE;
    Ok(StabilityReport {
        caps: caps_schedule.to_vec(),
        estimates,
        stderr,
        relative_changes,
        trials,
        stable,
    })
}

/// Fraction of clusters that reach the vertex budget.
pub fn survival_fraction(model: &Model, sampling: &Sampling) -> Result<(f64, f64), PercolationError> {
    let sizes = cluster_sizes(model, sampling, tag::SURVIVAL)?;
    let hits = sizes.iter().filter(|(_, t)| *t).count() as u64;
    Ok((hits as f64 / sizes.len() as f64, proportion_stderr(hits, sizes.len() as u64)))
}

/// `blocks` contiguous, nearly equal index ranges covering `0..n`.
pub fn split_blocks(n: usize, blocks: usize) -> Vec<std::ops::Range<usize>> {
    let blocks = blocks.clamp(1, n.max(1));
    (0..blocks).map(|b| (b * n / blocks)..((b + 1) * n / blocks)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ProductGraph;

    fn sampling(trials: usize) -> Sampling {
        Sampling::new(trials, Caps::cluster(100_000), 17)
    }

    #[test]
    fn g_at_p_zero_and_one() {
        let g = ProductGraph::txt(3);
        let zero = estimate_g(&Model::isotropic(g, 0.0).unwrap(), 6, &sampling(20)).unwrap();
        assert!(zero.mean.iter().all(|&m| m == 1.0));
        let one = estimate_g(&Model::isotropic(g, 1.0).unwrap(), 4, &sampling(5)).unwrap();
        for r in 0..=4 {
            assert_eq!(one.mean[r], g.ball_size(r as u32) as f64);
            assert_eq!(one.stderr[r], 0.0);
        }
        assert_eq!(
            estimate_g(&Model::isotropic(g, 0.5).unwrap(), 3, &sampling(0)).unwrap_err(),
            PercolationError::NoTrials
        );
    }

    #[test]
    fn g_is_monotone_in_r() {
        let g = ProductGraph::txt(3);
        let est = estimate_g(&Model::isotropic(g, 0.22).unwrap(), 10, &sampling(300)).unwrap();
        assert!(est.mean.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn connection_trivial_classes() {
        let g = ProductGraph::txt(3);
        let m = Model::isotropic(g, 0.3).unwrap();
        let e = connection_prob_class(&m, LevelSpec::new(0, 0), &sampling(50)).unwrap();
        assert_eq!((e.lower, e.upper), (1.0, 1.0));
        let m0 = Model::isotropic(g, 0.0).unwrap();
        let e = connection_prob_class(&m0, LevelSpec::new(2, 1), &sampling(50)).unwrap();
        assert_eq!((e.lower, e.upper, e.censored), (0.0, 0.0, 0));
    }

    #[test]
    fn census_agrees_with_point_sampling() {
        // both are unbiased for P(0 ↔ x) on the class; compare within 4σ
        let g = ProductGraph::txt(3);
        let m = Model::isotropic(g, 0.2).unwrap();
        let s = sampling(4000);
        let census = class_census(&m, 4, None, &s).unwrap();
        for spec in [LevelSpec::new(1, 0), LevelSpec::new(1, 1), LevelSpec::new(2, 1)] {
            let point = connection_prob_class(&m, spec, &s).unwrap();
            let c = census.get(spec.k1, spec.k2).unwrap();
            let sigma = (point.stderr.powi(2) + c.stderr.powi(2)).sqrt();
            assert!((point.lower - c.lower).abs() < 4.0 * sigma, "{spec:?} {point:?} {c:?}");
        }
        assert_eq!(census.lower(0, 0), 1.0);
        // symmetric under swapping coordinates
        let a = census.get(2, 1).unwrap();
        let b = census.get(1, 2).unwrap();
        assert!((a.lower - b.lower).abs() < 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
    }

    #[test]
    fn ballisticity_extremes() {
        let g = ProductGraph::txt(3);
        let one = extrinsic_ballisticity(&Model::isotropic(g, 1.0).unwrap(), &[3], &sampling(2)).unwrap();
        assert_eq!(one[0].max, Some(3));
        let zero = extrinsic_ballisticity(&Model::isotropic(g, 0.0).unwrap(), &[1, 2], &sampling(10)).unwrap();
        assert!(zero.iter().all(|s| s.empty_trials == 10 && s.median().is_none()));
    }

    #[test]
    fn moments_extremes() {
        let g = ProductGraph::txt(3);
        let zero = moment_tail_check(&Model::isotropic(g, 0.0).unwrap(), 5, &sampling(10)).unwrap();
        assert_eq!(zero.moments, [1.0, 1.0, 1.0]);
        assert_eq!(zero.bounds, [2.0, 16.0, 216.0]);
        assert!(zero.passed());
        let one = moment_tail_check(&Model::isotropic(g, 1.0).unwrap(), 3, &sampling(3)).unwrap();
        let b = g.ball_size(3) as f64;
        assert_eq!(one.moments[0], b);
        assert_eq!(one.bounds[0], 2.0 * b * b);
        assert!(one.passed());
    }

    #[test]
    fn stability_at_p_zero() {
        let g = ProductGraph::txt(3);
        let rep = subcritical_stability(&Model::isotropic(g, 0.0).unwrap(), &[4, 8, 16], 10, 1).unwrap();
        assert_eq!(rep.estimates, vec![1.0, 1.0, 1.0]);
        assert!(rep.stable);
        assert!(subcritical_stability(&Model::isotropic(g, 0.0).unwrap(), &[4, 9], 10, 1).is_err());
    }

    /// Exact `E|C(0) ∩ B(depth)|` on a single tree by enumerating every
    /// configuration of the depth-capped tree.
    fn brute_force_tree_cluster_mean(d: u8, depth: u32, p: f64) -> f64 {
        // edges of the depth-capped tree indexed by their child endpoint
        let mut children: Vec<Vec<usize>> = vec![Vec::new()];
        let mut frontier = vec![(0usize, None::<u8>)];
        let mut edges = 0usize;
        for _ in 0..depth {
            let mut next = Vec::new();
            for &(node, last) in &frontier {
                for s in 0..d {
                    if Some(s) == last {
                        continue;
                    }
                    edges += 1;
                    let child = children.len();
                    children.push(Vec::new());
                    children[node].push(child);
                    next.push((child, Some(s)));
                }
            }
            frontier = next;
        }
        let mut expectation = 0.0;
        for mask in 0u64..(1u64 << edges) {
            let open = mask.count_ones() as i32;
            let weight = p.powi(open) * (1.0 - p).powi(edges as i32 - open);
            // node i (> 0) is joined to its parent by edge i-1
            let mut size = 0u32;
            let mut stack = vec![0usize];
            while let Some(u) = stack.pop() {
                size += 1;
                for &c in &children[u] {
                    if mask >> (c - 1) & 1 == 1 {
                        stack.push(c);
                    }
                }
            }
            expectation += weight * size as f64;
        }
        expectation
    }

    #[test]
    fn tree_cluster_mean_matches_enumeration() {
        let d = 3;
        let p = 0.25;
        let g = ProductGraph::tree(d);
        let model = Model::isotropic(g, p).unwrap();
        for depth in [2u32, 3] {
            let exact = brute_force_tree_cluster_mean(d, depth, p);
            let est = estimate_g(&model, depth, &Sampling::new(200_000, Caps::cluster(10_000), 3)).unwrap();
            let (m, se) = (est.mean[depth as usize], est.stderr[depth as usize]);
            assert!((m - exact).abs() < 4.0 * se, "depth {depth}: {m} ± {se} vs {exact}");
        }
        // the uncapped subcritical mean stabilizes
        let rep = subcritical_stability(&model, &[64, 128, 256], 20_000, 5).unwrap();
        assert!(rep.stable, "{rep:?}");
    }
}

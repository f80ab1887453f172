use serde::Serialize;

use super::{estimated_open_triangle, opening_point, DiagramError};
use crate::percolation::{
    aggregate_census, census_of, estimate_g, explore, explore_with, run_trials, split_blocks, Caps, CensusTrial, Config,
    Model, PercolationError, Sampling,
};
use crate::seed::{stream_seed, tag};
use crate::tree::{LevelSpec, ProductGraph};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OffpointSettings {
    /// Trials for the pair count.
    pub trials: usize,
    /// Trials for each of `Ĝ(r)` and the two census tables.
    pub census_trials: usize,
    pub blocks: usize,
    pub n_cap: usize,
    pub seed: u64,
}

impl Default for OffpointSettings {
    fn default() -> Self {
        Self {
            trials: 2000,
            census_trials: 20_000,
            blocks: 20,
            n_cap: 20_000,
            seed: 0,
        }
    }
}

/// Both sides of `E|{(x,y): 0 ↔ʳ x, xw ↔ʳ y, 0 ↮ y}| ≥ G(r)²(1 − ∇(w;r))`.
#[derive(Debug, Clone, Serialize)]
pub struct OffpointReport {
    pub r: u32,
    pub w: LevelSpec,
    pub lhs_low: f64,
    pub lhs_high: f64,
    pub lhs_stderr: f64,
    pub g_hat: f64,
    pub g_stderr: f64,
    pub triangle: f64,
    pub triangle_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub sigma: f64,
    pub trials: usize,
    /// Fraction of pair-count trials with at least one unresolved `0 ↮ y`.
    pub censored_fraction: f64,
    pub inconclusive: bool,
    pub passed: bool,
}

pub const OFFPOINT_MAX_CENSORED: f64 = 0.05;

fn count_pairs(model: &Model, r: u32, w: LevelSpec, n_cap: usize, seed: u64) -> (u64, u64) {
    let graph = model.graph;
    let wv = opening_point(w);
    let mut cfg = Config::unmemoized(*model, seed);
    let origin = graph.origin();
    let near = explore(&mut cfg, &origin, Caps::new(r, n_cap));
    let cluster = explore(&mut cfg, &origin, Caps::cluster(n_cap));
    let (mut low, mut high) = (0u64, 0u64);
    for x in near.shells.iter().flatten() {
        let xw = graph.mul(x, &wv);
        if cluster.contains(&xw) {
            continue;
        }
        let ys = explore(&mut cfg, &xw, Caps::new(r, n_cap)).len() as u64;
        if cluster.exhausted {
            low += ys;
            high += ys;
            continue;
        }
        // does the cluster of xw run into the explored part of C(0)?
        let other = explore_with(&mut cfg, &xw, Caps::cluster(n_cap), |v| cluster.contains(v));
        if other.stopped {
            continue;
        }
        if other.exhausted {
            low += ys;
        }
        high += ys;
    }
    (low, high)
}

pub fn offpointa_check(model: &Model, r: u32, w: LevelSpec, settings: &OffpointSettings) -> Result<OffpointReport, DiagramError> {
    if settings.trials == 0 || settings.census_trials == 0 {
        return Err(DiagramError::Percolation(PercolationError::NoTrials));
    }
    let graph: ProductGraph = model.graph;
    let pairs = run_trials(settings.trials, |t| {
        count_pairs(model, r, w, settings.n_cap, stream_seed(settings.seed, t, tag::OFFPOINT))
    });
    let n = pairs.len() as f64;
    let lows: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
    let (lhs_low, lhs_stderr) = crate::stats::mean_stderr(&lows);
    let lhs_high = pairs.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let censored_fraction = pairs.iter().filter(|p| p.0 != p.1).count() as f64 / n;

    let g = estimate_g(
        model,
        r,
        &Sampling::new(settings.census_trials, Caps::new(r, settings.n_cap), stream_seed(settings.seed, 1, tag::BALL)),
    )?;
    let (g_hat, g_stderr) = (g.mean[r as usize], g.stderr[r as usize]);

    let max_norm = 2 * r + w.norm();
    let census_seed = stream_seed(settings.seed, 2, tag::CENSUS);
    let trials = run_trials(settings.census_trials, |t| {
        let mut cfg = Config::unmemoized(*model, stream_seed(census_seed, t, tag::CENSUS));
        let ball = explore(&mut cfg, &graph.origin(), Caps::cluster(settings.n_cap));
        let mut near = ball.clone();
        near.shells.truncate(r as usize + 1);
        let restricted_censored = ball.truncated && ball.shells.len() <= r as usize + 1;
        (
            CensusTrial {
                counts: census_of(&near, max_norm),
                censored: restricted_censored,
            },
            CensusTrial {
                counts: census_of(&ball, max_norm),
                censored: !ball.exhausted,
            },
        )
    });
    let (restricted, unrestricted): (Vec<CensusTrial>, Vec<CensusTrial>) = trials.into_iter().unzip();
    let triangle_of = |rs: &[CensusTrial], us: &[CensusTrial]| -> Result<f64, DiagramError> {
        let f = aggregate_census(model, max_norm, rs);
        let h = aggregate_census(model, max_norm, us);
        estimated_open_triangle(&graph, &f, &h, w, r)
    };
    let triangle = triangle_of(&restricted, &unrestricted)?;
    // delete-one-block jackknife
    let blocks = split_blocks(restricted.len(), settings.blocks);
    let mut leave_out = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let keep = |v: &[CensusTrial]| -> Vec<CensusTrial> {
            v.iter()
                .enumerate()
                .filter(|(i, _)| !b.contains(i))
                .map(|(_, c)| c.clone())
                .collect()
        };
        leave_out.push(triangle_of(&keep(&restricted), &keep(&unrestricted))?);
    }
    let nb = leave_out.len() as f64;
    let mean_b = leave_out.iter().sum::<f64>() / nb;
    let triangle_stderr = if nb > 1.0 {
        ((nb - 1.0) / nb * leave_out.iter().map(|t| (t - mean_b).powi(2)).sum::<f64>()).sqrt()
    } else {
        0.0
    };

    let rhs = g_hat * g_hat * (1.0 - triangle);
    let rhs_stderr = ((2.0 * g_hat * (1.0 - triangle) * g_stderr).powi(2) + (g_hat * g_hat * triangle_stderr).powi(2)).sqrt();
    let sigma = (lhs_stderr.powi(2) + rhs_stderr.powi(2)).sqrt();
    let inconclusive = censored_fraction > OFFPOINT_MAX_CENSORED;
    Ok(OffpointReport {
        r,
        w,
        lhs_low,
        lhs_high,
        lhs_stderr,
        g_hat,
        g_stderr,
        triangle,
        triangle_stderr,
        rhs,
        rhs_stderr,
        sigma,
        trials: settings.trials,
        censored_fraction,
        inconclusive,
        passed: !inconclusive && lhs_low >= rhs - 3.0 * sigma,
    })
}

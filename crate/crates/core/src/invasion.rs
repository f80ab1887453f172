//! Invasion percolation. The cluster of the origin repeatedly absorbs the
//! boundary edge of least effective weight; coordinate-1 edges weigh their
//! uniform `u` and coordinate-2 edges weigh `u/ρ`, so one run traces the ray
//! `p₂ = ρ·p₁`. Late accepted weights sit near the critical point of that
//! ray: the estimate is the largest weight accepted in the second half of
//! the run.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashSet;
use serde::Serialize;
use thiserror::Error;

use crate::percolation::run_trials;
use crate::seed::{stream_seed, tag, unit_f64};
use crate::stats::mean_stderr;
use crate::tree::{apply_step, Coord, EdgeKey, GraphKind, ProductGraph, ProductVertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvasionError {
    #[error("target size must be at least 2")]
    Target,
    #[error("rho must be positive and finite, got {0}")]
    Rho(f64),
    #[error("no seeds given")]
    Seeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvasionParams {
    pub graph: ProductGraph,
    pub rho: f64,
    pub target_size: usize,
    pub seed: u64,
    /// Largest frontier allowed before the run stops with a partial result.
    pub max_frontier: usize,
}

impl InvasionParams {
    pub const DEFAULT_TARGET: usize = 100_000;
    pub const DEFAULT_MAX_FRONTIER: usize = 50_000_000;

    pub fn new(graph: ProductGraph, rho: f64, target_size: usize, seed: u64) -> Self {
        Self {
            graph,
            rho,
            target_size,
            seed,
            max_frontier: Self::DEFAULT_MAX_FRONTIER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    weight_bits: u64,
    seq: u64,
}

/// Live state of one invasion run.
pub struct InvasionState {
    params: InvasionParams,
    frontier: BinaryHeap<Reverse<(Candidate, usize)>>,
    targets: Vec<Option<ProductVertex>>,
    invaded: FxHashSet<ProductVertex>,
    trace: Vec<f64>,
    seq: u64,
}

impl InvasionState {
    pub fn new(params: InvasionParams) -> Result<Self, InvasionError> {
        if params.target_size < 2 {
            return Err(InvasionError::Target);
        }
        if !(params.rho > 0.0 && params.rho.is_finite()) {
            return Err(InvasionError::Rho(params.rho));
        }
        let origin = params.graph.origin();
        let mut state = Self {
            params,
            frontier: BinaryHeap::new(),
            targets: Vec::new(),
            invaded: FxHashSet::default(),
            trace: Vec::with_capacity(params.target_size),
            seq: 0,
        };
        state.invaded.insert(origin.clone());
        state.push_boundary(&origin);
        Ok(state)
    }

    fn effective_weight(&self, v: &ProductVertex, step: crate::tree::Step) -> f64 {
        let u = unit_f64(EdgeKey::fingerprint_of_step(self.params.seed, v, step));
        match step.coord {
            Coord::First => u,
            Coord::Second => u / self.params.rho,
        }
    }

    fn push_boundary(&mut self, v: &ProductVertex) {
        for step in self.params.graph.steps(v) {
            let n = apply_step(v, step);
            if self.invaded.contains(&n) {
                continue;
            }
            let w = self.effective_weight(v, step);
            let slot = self.targets.len();
            self.targets.push(Some(n));
            self.seq += 1;
            self.frontier.push(Reverse((
                Candidate {
                    weight_bits: w.to_bits(),
                    seq: self.seq,
                },
                slot,
            )));
        }
    }

    pub fn size(&self) -> usize {
        self.invaded.len()
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn contains(&self, v: &ProductVertex) -> bool {
        self.invaded.contains(v)
    }

    /// Invades one vertex; returns the accepted weight, or `None` when the
    /// frontier is empty.
    pub fn step(&mut self) -> Option<f64> {
        loop {
            let Reverse((cand, slot)) = self.frontier.pop()?;
            let target = self.targets[slot].take().expect("each frontier slot is popped once");
            if self.invaded.contains(&target) {
                continue;
            }
            debug_assert!(
                self.frontier.peek().is_none_or(|Reverse((next, _))| next.weight_bits >= cand.weight_bits),
                "accepted weight exceeds a remaining frontier weight"
            );
            let w = f64::from_bits(cand.weight_bits);
            self.invaded.insert(target.clone());
            self.push_boundary(&target);
            self.trace.push(w);
            return Some(w);
        }
    }

    /// Runs to the target size (or until the frontier budget is exceeded).
    pub fn run(mut self) -> InvasionSummary {
        let mut memory_exceeded = false;
        while self.size() < self.params.target_size {
            if self.frontier.len() > self.params.max_frontier {
                memory_exceeded = true;
                break;
            }
            if self.step().is_none() {
                break;
            }
        }
        InvasionSummary::from_trace(&self.params, &self.trace, self.size(), self.frontier.len(), memory_exceeded)
    }
}

/// Result of one invasion run.
#[derive(Debug, Clone, Serialize)]
pub struct InvasionSummary {
    pub graph: GraphKind,
    pub d: u8,
    pub rho: f64,
    pub seed: u64,
    pub target_size: usize,
    pub cluster_size: usize,
    pub frontier_size: usize,
    pub p1_hat: f64,
    pub p2_hat: f64,
    /// Largest accepted weight over the third and fourth quarters.
    pub q3_max: f64,
    pub q4_max: f64,
    pub memory_exceeded: bool,
}

impl InvasionSummary {
    fn from_trace(params: &InvasionParams, trace: &[f64], cluster_size: usize, frontier_size: usize, memory_exceeded: bool) -> Self {
        // acceptance i produced cluster size i + 2
        let n = cluster_size;
        let window_max = |lo: usize, hi: usize| -> f64 {
            trace
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let size = i + 2;
                    size > lo && size <= hi
                })
                .map(|(_, &w)| w)
                .fold(0.0, f64::max)
        };
        let q3_max = window_max(n / 2, 3 * n / 4);
        let q4_max = window_max(3 * n / 4, n);
        let p1_hat = q3_max.max(q4_max);
        let p2_hat = match params.graph.kind {
            GraphKind::Tree => 0.0,
            _ => (params.rho * p1_hat).min(1.0),
        };
        Self {
            graph: params.graph.kind,
            d: params.graph.d,
            rho: params.rho,
            seed: params.seed,
            target_size: params.target_size,
            cluster_size,
            frontier_size,
            p1_hat: p1_hat.min(1.0),
            p2_hat,
            q3_max,
            q4_max,
            memory_exceeded,
        }
    }
}

pub fn invade(params: InvasionParams) -> Result<InvasionSummary, InvasionError> {
    Ok(InvasionState::new(params)?.run())
}

/// Per-run seed for the `(rho index, seed index)` grid cell.
pub fn run_seed(master: u64, seed_index: u64) -> u64 {
    stream_seed(master, seed_index, tag::INVASION)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub rho: f64,
    pub p1_hat: f64,
    pub p2_hat: f64,
    pub cluster_size: usize,
    /// Standard deviation of `p̂₁` across seeds.
    pub uncertainty: f64,
    pub p2_uncertainty: f64,
    pub runs: Vec<InvasionSummary>,
    pub failures: usize,
}

/// One invasion per `(rho, seed)`, aggregated per `rho`. The same seeds are
/// reused for every `rho`, so the edge uniforms are shared along the curve.
pub fn critical_curve(graph: ProductGraph, rho_grid: &[f64], target_size: usize, seeds: usize, master_seed: u64) -> Result<Vec<CurvePoint>, InvasionError> {
    if seeds == 0 {
        return Err(InvasionError::Seeds);
    }
    let cells: Vec<(usize, u64)> = (0..rho_grid.len()).flat_map(|i| (0..seeds as u64).map(move |s| (i, s))).collect();
    let results = run_trials(cells.len(), |c| {
        let (i, s) = cells[c as usize];
        invade(InvasionParams::new(graph, rho_grid[i], target_size, run_seed(master_seed, s)))
    });
    let mut points = Vec::with_capacity(rho_grid.len());
    for (i, &rho) in rho_grid.iter().enumerate() {
        let mut runs = Vec::new();
        let mut failures = 0;
        for (cell, r) in cells.iter().zip(&results) {
            if cell.0 != i {
                continue;
            }
            match r {
                Ok(s) if !s.memory_exceeded => runs.push(s.clone()),
                Ok(_) | Err(_) => failures += 1,
            }
        }
        if runs.is_empty() {
            if let Some(Err(e)) = results.iter().find(|r| r.is_err()) {
                return Err(e.clone());
            }
        }
        let p1: Vec<f64> = runs.iter().map(|r| r.p1_hat).collect();
        let p2: Vec<f64> = runs.iter().map(|r| r.p2_hat).collect();
        let (p1_hat, _) = mean_stderr(&p1);
        let (p2_hat, _) = mean_stderr(&p2);
        points.push(CurvePoint {
            rho,
            p1_hat,
            p2_hat,
            cluster_size: runs.iter().map(|r| r.cluster_size).min().unwrap_or(0),
            uncertainty: crate::stats::sample_sd(&p1),
            p2_uncertainty: crate::stats::sample_sd(&p2),
            runs,
            failures,
        });
    }
    Ok(points)
}

/// Mean and spread of `p̂₁` over independent seeds at one `rho`.
pub fn estimate_critical_point(graph: ProductGraph, rho: f64, target_size: usize, seeds: usize, master_seed: u64) -> Result<CurvePoint, InvasionError> {
    Ok(critical_curve(graph, &[rho], target_size, seeds, master_seed)?.remove(0))
}

/// `ρ` grid symmetric under `ρ ↔ 1/ρ`.
pub fn symmetric_rho_grid(extreme: f64, inner: &[f64]) -> Vec<f64> {
    let mut grid = vec![extreme.min(1.0 / extreme)];
    let mut lows: Vec<f64> = inner.iter().map(|&r| r.min(1.0 / r)).filter(|&r| r < 1.0).collect();
    lows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lows.dedup();
    grid.extend(&lows);
    grid.push(1.0);
    grid.extend(lows.iter().rev().map(|r| 1.0 / r));
    grid.push(1.0 / grid[0]);
    grid
}

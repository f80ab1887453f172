//! Lazily sampled bond percolation on product graphs.
//!
//! A [`Config`] never materializes the graph. The state of an edge is drawn
//! the first time it is looked at, from a uniform variable that is a fixed
//! hash of `(seed, canonical edge)`: the same edge always gets the same
//! uniform, whatever order the queries come in, and configurations at
//! different `p` built from the same seed are monotonically coupled.

mod estimators;
mod explore;

pub use estimators::*;
pub use explore::*;

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::seed::unit_f64;
use crate::tree::{Coord, EdgeKey, ProductGraph, ProductVertex, Step, TreeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("invalid cap schedule: {0}")]
    Caps(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Graph plus per-coordinate retention probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    pub graph: ProductGraph,
    pub p1: f64,
    pub p2: f64,
}

impl Model {
    pub fn new(graph: ProductGraph, p1: f64, p2: f64) -> Result<Self, PercolationError> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(PercolationError::Probability(p));
            }
        }
        Ok(Self { graph, p1, p2 })
    }

    pub fn isotropic(graph: ProductGraph, p: f64) -> Result<Self, PercolationError> {
        Self::new(graph, p, p)
    }

    #[inline]
    pub fn p(&self, coord: Coord) -> f64 {
        match coord {
            Coord::First => self.p1,
            Coord::Second => self.p2,
        }
    }

    pub fn with_p(&self, p1: f64, p2: f64) -> Result<Self, PercolationError> {
        Self::new(self.graph, p1, p2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeState {
    Open,
    Closed,
}

/// One percolation configuration. Single-threaded: the memo is mutable.
#[derive(Debug, Clone)]
pub struct Config {
    model: Model,
    seed: u64,
    memo: Option<FxHashMap<EdgeKey, EdgeState>>,
}

impl Config {
    /// A configuration that records every edge it has revealed.
    pub fn new(model: Model, seed: u64) -> Self {
        Self {
            model,
            seed,
            memo: Some(FxHashMap::default()),
        }
    }

    /// A configuration without the edge memo. States are still a pure
    /// function of `(seed, edge)`, so consistency is unaffected; only the
    /// record of revealed edges is dropped.
    pub fn unmemoized(model: Model, seed: u64) -> Self {
        Self {
            model,
            seed,
            memo: None,
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn graph(&self) -> &ProductGraph {
        &self.model.graph
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of edges revealed so far, when memoizing.
    pub fn revealed(&self) -> Option<usize> {
        self.memo.as_ref().map(|m| m.len())
    }

    /// The raw uniform attached to an edge.
    pub fn edge_uniform(&self, e: &EdgeKey) -> f64 {
        unit_f64(e.fingerprint(self.seed))
    }

    pub fn edge_state(&mut self, e: &EdgeKey) -> EdgeState {
        let e = e.canonical();
        if let Some(state) = self.memo.as_ref().and_then(|m| m.get(&e)) {
            return *state;
        }
        let state = if self.edge_uniform(&e) < self.model.p(e.coord) {
            EdgeState::Open
        } else {
            EdgeState::Closed
        };
        if let Some(memo) = self.memo.as_mut() {
            memo.insert(e, state);
        }
        state
    }

    /// Whether the edge crossed by `step` from `v` is open.
    #[inline]
    pub fn step_open(&mut self, v: &ProductVertex, step: Step) -> bool {
        let p = self.model.p(step.coord);
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        match self.memo.as_mut() {
            None => unit_f64(EdgeKey::fingerprint_of_step(self.seed, v, step)) < p,
            Some(_) => self.edge_state(&EdgeKey::from_step(v, step)) == EdgeState::Open,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{rng_from_seed, stream_seed};
    use crate::tree::{apply_step, LevelSpec};
    use rand::Rng;

    #[test]
    fn extreme_probabilities() {
        let g = ProductGraph::txt(3);
        let mut rng = rng_from_seed(1);
        let mut closed = Config::new(Model::isotropic(g, 0.0).unwrap(), 1);
        let mut open = Config::new(Model::isotropic(g, 1.0).unwrap(), 1);
        for _ in 0..1000 {
            let v = g.sample_level_point(LevelSpec::new(rng.random_range(0..8), rng.random_range(0..8)), &mut rng);
            for s in g.steps(&v) {
                let e = EdgeKey::from_step(&v, s);
                assert_eq!(closed.edge_state(&e), EdgeState::Closed);
                assert_eq!(open.edge_state(&e), EdgeState::Open);
            }
        }
    }

    #[test]
    fn rejects_bad_probability() {
        assert_eq!(
            Model::isotropic(ProductGraph::txt(3), 1.5),
            Err(PercolationError::Probability(1.5))
        );
    }

    #[test]
    fn single_edge_marginal() {
        // 10^6 fresh configurations, one edge each: binomial with p = 0.3.
        let g = ProductGraph::txt(3);
        let model = Model::isotropic(g, 0.3).unwrap();
        let v = g.origin();
        let step = g.steps(&v)[0];
        let e = EdgeKey::from_step(&v, step);
        let n = 1_000_000u64;
        let open = (0..n)
            .filter(|&i| {
                let mut cfg = Config::unmemoized(model, stream_seed(99, i, 0));
                cfg.edge_state(&e) == EdgeState::Open
            })
            .count() as f64;
        let sigma = (n as f64 * 0.3 * 0.7).sqrt();
        assert!((open - 0.3 * n as f64).abs() < 4.0 * sigma, "open = {open}");
    }

    #[test]
    fn distinct_edges_are_independent() {
        // the two coordinates and two distinct edges of one vertex: joint
        // frequency of both open is p1·p2 within 4σ
        let g = ProductGraph::txt(3);
        let model = Model::new(g, 0.4, 0.7).unwrap();
        let v = g.origin();
        let steps = g.steps(&v);
        let (s1, s2) = (steps[0], steps[3]);
        let n = 200_000u64;
        let both = (0..n)
            .filter(|&i| {
                let mut cfg = Config::unmemoized(model, stream_seed(5, i, 0));
                cfg.step_open(&v, s1) && cfg.step_open(&v, s2)
            })
            .count() as f64;
        let p = 0.28;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((both - p * n as f64).abs() < 4.0 * sigma);
    }

    #[test]
    fn memo_is_consistent_under_any_query_order() {
        let g = ProductGraph::txz(4);
        let model = Model::isotropic(g, 0.5).unwrap();
        let mut rng = rng_from_seed(3);
        let mut edges = Vec::new();
        for _ in 0..300 {
            let v = g.sample_level_point(LevelSpec::new(rng.random_range(0..6), rng.random_range(0..6)), &mut rng);
            for s in g.steps(&v) {
                edges.push((v.clone(), s));
            }
        }
        let mut a = Config::new(model, 77);
        let mut b = Config::unmemoized(model, 77);
        let first: Vec<bool> = edges.iter().map(|(v, s)| a.step_open(v, *s)).collect();
        for _ in 0..3 {
            let mut order: Vec<usize> = (0..edges.len()).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            for &i in &order {
                let (v, s) = &edges[i];
                assert_eq!(a.step_open(v, *s), first[i]);
                assert_eq!(b.step_open(v, *s), first[i]);
                // the same edge seen from the far endpoint
                let u = apply_step(v, *s);
                let back = g.steps(&u).into_iter().find(|t| apply_step(&u, *t) == *v).unwrap();
                assert_eq!(a.step_open(&u, back), first[i]);
            }
        }
        assert!(a.revealed().unwrap() > 0);
        assert!(b.revealed().is_none());
    }
}

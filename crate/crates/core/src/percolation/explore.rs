use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::Config;
use crate::tree::{apply_step, ProductVertex};

/// Exploration budget: chemical radius and number of vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub r_cap: u32,
    pub n_cap: usize,
}

impl Caps {
    pub const DEFAULT_N_CAP: usize = 1_000_000;

    pub const fn new(r_cap: u32, n_cap: usize) -> Self {
        Self { r_cap, n_cap }
    }

    /// `r_cap = 4·r`, `n_cap = 10⁶`.
    pub fn for_radius(r: u32) -> Self {
        Self::new(r.saturating_mul(4), Self::DEFAULT_N_CAP)
    }

    /// Whole-cluster exploration limited only by the vertex budget.
    pub const fn cluster(n_cap: usize) -> Self {
        Self::new(u32::MAX, n_cap)
    }
}

/// The result of a breadth-first exploration over open edges.
#[derive(Debug, Clone)]
pub struct Ball {
    /// `shells[k]` holds the vertices at chemical distance `k` (the last
    /// shell is partial when the exploration was truncated).
    pub shells: Vec<Vec<ProductVertex>>,
    pub members: FxHashSet<ProductVertex>,
    /// The vertex budget was hit.
    pub truncated: bool,
    /// The whole open cluster was explored.
    pub exhausted: bool,
    /// Discovered vertices whose edges were not examined when the
    /// exploration stopped.
    pub frontier_alive: u64,
    pub explored_edges: u64,
    /// Exploration was stopped by the caller's predicate.
    pub stopped: bool,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &ProductVertex) -> bool {
        self.members.contains(v)
    }

    /// Size of the chemical ball of radius `r` (exact only if the exploration
    /// reached radius `r` without truncation).
    pub fn size_within(&self, r: u32) -> u64 {
        self.shells.iter().take(r as usize + 1).map(|s| s.len() as u64).sum()
    }

    pub fn stats(&self) -> ClusterStats {
        let shell_counts: Vec<u64> = self.shells.iter().map(|s| s.len() as u64).collect();
        let mut norm_histogram = Vec::new();
        for v in self.shells.iter().flatten() {
            bump(&mut norm_histogram, v.norm());
        }
        let mut outer_shell_norms = Vec::new();
        if let Some(outer) = self.shells.last() {
            for v in outer {
                bump(&mut outer_shell_norms, v.norm());
            }
        }
        ClusterStats {
            shell_counts,
            norm_histogram,
            outer_shell_norms,
            truncated: self.truncated,
            frontier_alive: self.frontier_alive,
            explored_edges: self.explored_edges,
        }
    }
}

fn bump(hist: &mut Vec<u64>, i: usize) {
    if hist.len() <= i {
        hist.resize(i + 1, 0);
    }
    hist[i] += 1;
}

/// Per-exploration summary of the chemical ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterStats {
    /// Vertices at each chemical distance `0..`.
    pub shell_counts: Vec<u64>,
    /// Counts of `|x|` over explored vertices.
    pub norm_histogram: Vec<u64>,
    /// Counts of `|x|` over the outermost explored shell.
    pub outer_shell_norms: Vec<u64>,
    pub truncated: bool,
    pub frontier_alive: u64,
    pub explored_edges: u64,
}

impl ClusterStats {
    pub fn total(&self) -> u64 {
        self.shell_counts.iter().sum()
    }

    /// `|B_chem(r)|` for every `r` covered by the exploration.
    pub fn cumulative(&self) -> Vec<u64> {
        self.shell_counts
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }
}

/// Breadth-first exploration of the open cluster of `origin`.
///
/// Shells are processed in insertion order and neighbours in the graph's
/// enumeration order. `stop` is called on every newly reached vertex;
/// returning `true` ends the exploration immediately.
pub fn explore_with<F>(cfg: &mut Config, origin: &ProductVertex, caps: Caps, mut stop: F) -> Ball
where
    F: FnMut(&ProductVertex) -> bool,
{
    let graph = *cfg.graph();
    let mut members = FxHashSet::default();
    members.insert(origin.clone());
    let mut shells = vec![vec![origin.clone()]];
    let mut ball = Ball {
        shells: Vec::new(),
        members: FxHashSet::default(),
        truncated: false,
        exhausted: false,
        frontier_alive: 0,
        explored_edges: 0,
        stopped: false,
    };
    if stop(origin) {
        ball.stopped = true;
        ball.frontier_alive = 1;
        ball.shells = shells;
        ball.members = members;
        return ball;
    }
    let mut depth = 0u32;
    'outer: loop {
        if depth >= caps.r_cap {
            ball.frontier_alive = shells[depth as usize].len() as u64;
            break;
        }
        let mut next = Vec::new();
        let current = std::mem::take(&mut shells[depth as usize]);
        for (i, v) in current.iter().enumerate() {
            for step in graph.steps(v) {
                let n = apply_step(v, step);
                if members.contains(&n) {
                    continue;
                }
                ball.explored_edges += 1;
                if !cfg.step_open(v, step) {
                    continue;
                }
                if members.len() >= caps.n_cap {
                    ball.truncated = true;
                    ball.frontier_alive = (current.len() - i + next.len()) as u64;
                    shells[depth as usize] = current;
                    shells.push(next);
                    break 'outer;
                }
                members.insert(n.clone());
                let halt = stop(&n);
                next.push(n);
                if halt {
                    ball.stopped = true;
                    ball.frontier_alive = (current.len() - i + next.len()) as u64;
                    shells[depth as usize] = current;
                    shells.push(next);
                    break 'outer;
                }
            }
        }
        shells[depth as usize] = current;
        if next.is_empty() {
            ball.exhausted = true;
            break;
        }
        shells.push(next);
        depth += 1;
    }
    ball.shells = shells;
    ball.members = members;
    ball
}

pub fn explore(cfg: &mut Config, origin: &ProductVertex, caps: Caps) -> Ball {
    explore_with(cfg, origin, caps, |_| false)
}

/// `B_chem(origin, r_cap)` under a vertex budget.
pub fn chemical_ball(cfg: &mut Config, origin: &ProductVertex, r_cap: u32, n_cap: usize) -> ClusterStats {
    explore(cfg, origin, Caps::new(r_cap, n_cap.max(1))).stats()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::Model;
    use crate::tree::ProductGraph;

    #[test]
    fn radius_zero_is_origin() {
        let g = ProductGraph::txt(3);
        let mut cfg = Config::new(Model::isotropic(g, 1.0).unwrap(), 0);
        let s = chemical_ball(&mut cfg, &g.origin(), 0, 10);
        assert_eq!(s.shell_counts, vec![1]);
        assert_eq!(s.frontier_alive, 1);
    }

    #[test]
    fn full_ball_at_p_one() {
        let g = ProductGraph::txt(3);
        let mut cfg = Config::unmemoized(Model::isotropic(g, 1.0).unwrap(), 0);
        let s = chemical_ball(&mut cfg, &g.origin(), 1, 1000);
        assert_eq!(s.total(), 7);
        for r in 0..=5u32 {
            let s = chemical_ball(&mut cfg, &g.origin(), r, usize::MAX);
            for (k, &c) in s.shell_counts.iter().enumerate() {
                let k = k as u32;
                let expected = g.ball_size(k) - if k == 0 { 0 } else { g.ball_size(k - 1) };
                assert_eq!(c as u128, expected);
            }
            assert_eq!(s.shell_counts.len(), r as usize + 1);
            assert_eq!(*s.outer_shell_norms.iter().rposition(|&c| c > 0).as_ref().unwrap(), r as usize);
        }
    }

    #[test]
    fn p_zero_is_isolated() {
        let g = ProductGraph::txz(3);
        let mut cfg = Config::new(Model::isotropic(g, 0.0).unwrap(), 0);
        let s = chemical_ball(&mut cfg, &g.origin(), 10, 100);
        assert_eq!(s.shell_counts, vec![1]);
        assert!(!s.truncated);
        assert_eq!(s.frontier_alive, 0);
    }

    #[test]
    fn truncation_is_reported() {
        let g = ProductGraph::txt(3);
        let mut cfg = Config::new(Model::isotropic(g, 1.0).unwrap(), 0);
        let s = chemical_ball(&mut cfg, &g.origin(), 10, 50);
        assert!(s.truncated);
        assert_eq!(s.total(), 50);
        assert!(s.frontier_alive > 0);
    }

    #[test]
    fn stats_invariants_and_determinism() {
        let g = ProductGraph::txt(3);
        let model = Model::isotropic(g, 0.3).unwrap();
        for seed in 0..50 {
            let a = chemical_ball(&mut Config::new(model, seed), &g.origin(), 20, 5000);
            let b = chemical_ball(&mut Config::unmemoized(model, seed), &g.origin(), 20, 5000);
            assert_eq!(a, b);
            assert_eq!(a.shell_counts[0], 1);
            assert_eq!(a.total(), a.norm_histogram.iter().sum::<u64>());
            let cum = a.cumulative();
            assert!(cum.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn monotone_coupling() {
        let g = ProductGraph::txt(3);
        for seed in 0..100 {
            let lo = chemical_ball(&mut Config::unmemoized(Model::isotropic(g, 0.2).unwrap(), seed), &g.origin(), 12, 100_000);
            let hi = chemical_ball(&mut Config::unmemoized(Model::isotropic(g, 0.25).unwrap(), seed), &g.origin(), 12, 100_000);
            let (cl, ch) = (lo.cumulative(), hi.cumulative());
            for r in 0..cl.len() {
                let h = ch.get(r).or(ch.last()).copied().unwrap();
                assert!(cl[r] <= h, "seed {seed} r {r}");
            }
        }
    }

    #[test]
    fn stop_predicate_halts() {
        let g = ProductGraph::txt(3);
        let mut cfg = Config::new(Model::isotropic(g, 1.0).unwrap(), 0);
        let target = g.neighbors(&g.origin())[4].clone();
        let ball = explore_with(&mut cfg, &g.origin(), Caps::cluster(1000), |v| *v == target);
        assert!(ball.stopped && ball.contains(&target));
        assert!(ball.len() <= 7);
    }
}

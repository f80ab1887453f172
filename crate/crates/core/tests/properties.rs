//! Property tests over the public API.

use proptest::prelude::*;
use treeperc::percolation::{chemical_ball, explore, Caps, Config, EdgeState, Model};
use treeperc::schramm::{grow, SchrammParams};
use treeperc::seed::rng_from_seed;
use treeperc::tree::{apply_step, EdgeKey, GraphKind, LevelSpec, ProductGraph, ProductVertex, TreeWord};

fn graph_of(kind: u8, d: u8) -> ProductGraph {
    let kind = [GraphKind::Tree, GraphKind::Txt, GraphKind::Txz][kind as usize % 3];
    ProductGraph::new(kind, d).unwrap()
}

fn vertex(g: &ProductGraph, a: &[u8], b: &[u8], z: i64) -> ProductVertex {
    let wa = TreeWord::product(a.iter().map(|x| x % g.d));
    match g.kind {
        GraphKind::Tree => ProductVertex::new(wa, TreeWord::root()),
        GraphKind::Txt => ProductVertex::new(wa, TreeWord::product(b.iter().map(|x| x % g.d))),
        GraphKind::Txz => ProductVertex::on_line(wa, z),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn edge_keys_are_canonical(
        kind in 0u8..3, d in 3u8..6,
        a in prop::collection::vec(0u8..8, 0..10),
        b in prop::collection::vec(0u8..8, 0..10),
        z in -20i64..20,
    ) {
        let g = graph_of(kind, d);
        let v = vertex(&g, &a, &b, z);
        let steps = g.steps(&v);
        prop_assert_eq!(steps.len(), g.degree());
        for s in steps {
            let key = EdgeKey::from_step(&v, s);
            let u = apply_step(&v, s);
            let back = g.steps(&u).into_iter().find(|t| apply_step(&u, *t) == v).expect("edges are undirected");
            prop_assert_eq!(&EdgeKey::from_step(&u, back), &key);
            // canonicalizing from the key's own base is a fixed point
            let again = EdgeKey::from_step(&key.base, treeperc::tree::Step { coord: key.coord, letter: key.letter });
            prop_assert_eq!(again, key);
        }
    }

    #[test]
    fn memo_consistent_under_shuffled_queries(seed in any::<u64>(), p in 0.05f64..0.95, order in prop::collection::vec(0usize..64, 1..200)) {
        let g = ProductGraph::txt(3);
        let model = Model::isotropic(g, p).unwrap();
        let mut keys = Vec::new();
        let mut frontier = vec![g.origin()];
        while keys.len() < 64 {
            let v = frontier.remove(0);
            for s in g.steps(&v) {
                keys.push(EdgeKey::from_step(&v, s));
                frontier.push(apply_step(&v, s));
            }
        }
        let mut memo = Config::new(model, seed);
        let mut fresh = Config::unmemoized(model, seed);
        let first: Vec<EdgeState> = keys.iter().map(|k| memo.edge_state(k)).collect();
        for i in order {
            prop_assert_eq!(memo.edge_state(&keys[i]), first[i]);
            prop_assert_eq!(fresh.edge_state(&keys[i]), first[i]);
        }
    }

    #[test]
    fn exploration_is_deterministic_and_additive(kind in 0u8..3, seed in any::<u64>(), p in 0.1f64..0.6, r in 0u32..8) {
        let g = graph_of(kind, 3);
        let model = Model::isotropic(g, p).unwrap();
        let a = chemical_ball(&mut Config::new(model, seed), &g.origin(), r, 5000);
        let b = chemical_ball(&mut Config::unmemoized(model, seed), &g.origin(), r, 5000);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.shell_counts.len() as u32 <= r + 1);
        prop_assert_eq!(a.shell_counts[0], 1);
        prop_assert_eq!(a.norm_histogram.iter().sum::<u64>(), a.total());
        // a smaller radius explores a prefix of the same shells
        if r > 0 {
            let c = chemical_ball(&mut Config::new(model, seed), &g.origin(), r - 1, 5000);
            if !a.truncated && !c.truncated {
                prop_assert_eq!(&c.shell_counts[..], &a.shell_counts[..c.shell_counts.len()]);
            }
        }
    }

    #[test]
    fn coupling_is_monotone_pathwise(seed in any::<u64>(), p in 0.05f64..0.5, dp in 0.0f64..0.3) {
        let g = ProductGraph::txt(3);
        let lo = Model::isotropic(g, p).unwrap();
        let hi = Model::isotropic(g, p + dp).unwrap();
        let caps = Caps::new(6, 100_000);
        let small = explore(&mut Config::new(lo, seed), &g.origin(), caps);
        let large = explore(&mut Config::new(hi, seed), &g.origin(), caps);
        prop_assert!(small.members.is_subset(&large.members));
    }

    #[test]
    fn particle_steps_land_in_the_level_set(seed in any::<u64>(), k1 in 0u32..4, k2 in 0u32..4, m in 1u64..4, depth in 1u32..4) {
        let g = ProductGraph::txt(3);
        let spec = LevelSpec::new(k1, k2);
        let params = SchrammParams::new(Model::isotropic(g, 0.2).unwrap(), spec, m, depth);
        let tree = grow(&params, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(tree.positions.len() as u128, params.node_count());
        for (i, parent) in tree.parent.iter().enumerate() {
            if let Some(p) = parent {
                let step = g.mul(&g.inverse(&tree.positions[*p]), &tree.positions[i]);
                prop_assert_eq!(step.class(), spec);
                // the law is symmetric: the reverse step lies in the same class
                prop_assert_eq!(g.inverse(&step).class(), spec);
            }
        }
    }
}

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hamembed::conditions::{check_sum_condition, meets_large_radius};
use hamembed::family::{binom2, build_gdd, conforms_to_gdd, family_vertices};
use hamembed::io::{instance_file, parse_instance, serialize_instance};
use hamembed::{ClassStats, ColoredMultigraph, GddParams, VertexId};

fn params_strategy() -> impl Strategy<Value = GddParams> {
    (2u64..=4, 1u64..=4, 0u64..=4, 1u64..=3)
        .prop_filter_map("λ = μ", |(a, p, lambda, mu)| GddParams::new(a, p, lambda, mu, None).ok())
}

fn recolored(g: &ColoredMultigraph, k: u32, seed: u64) -> ColoredMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ColoredMultigraph::with_vertices(k, g.vertices());
    for e in g.edges() {
        out.add_edge(e.a, e.b, rng.gen_range(1..=k)).unwrap();
    }
    out
}

proptest! {
    #[test]
    fn loops_count_twice(n in 1u32..6, pairs in prop::collection::vec((1u32..6, 1u32..6), 0..30)) {
        let vs: Vec<_> = (1..=n).map(|i| VertexId::original(1, i)).collect();
        let mut g = ColoredMultigraph::with_vertices(1, vs.iter().copied());
        let mut loops = 0u64;
        for (x, y) in pairs {
            let (x, y) = ((x - 1) % n + 1, (y - 1) % n + 1);
            loops += u64::from(x == y);
            g.add_edge(VertexId::original(1, x), VertexId::original(1, y), 1).unwrap();
        }
        let total: u64 = vs.iter().map(|&v| g.degree(v, None).unwrap()).sum();
        prop_assert_eq!(total, 2 * g.edge_count() as u64);
        let loop_total: u64 = vs.iter().map(|&v| g.loop_count(v).unwrap()).sum();
        prop_assert_eq!(loop_total, loops);
    }

    #[test]
    fn family_shape(params in params_strategy(), extra in 0u64..3) {
        let parts = params.p + extra;
        let g = build_gdd(&params, parts).unwrap();
        prop_assert!(conforms_to_gdd(&g, &params, parts));
        prop_assert_eq!(g.edge_count() as u64, params.edge_total(parts));
        let n = params.a * parts;
        prop_assert_eq!(g.vertex_count() as u64, n);
        for v in family_vertices(params.a, parts) {
            prop_assert_eq!(g.degree(v, None).unwrap(), params.vertex_degree(parts));
        }
        // handshake against the closed form
        prop_assert_eq!(2 * params.edge_total(parts), n * params.vertex_degree(parts));
        prop_assert_eq!(
            params.edge_total(parts),
            parts * params.lambda * binom2(params.a) + params.mu * params.a * params.a * binom2(parts)
        );
    }

    #[test]
    fn dropping_an_edge_breaks_conformance(params in params_strategy(), pick in any::<prop::sample::Index>()) {
        let g = build_gdd(&params, params.p).unwrap();
        prop_assume!(g.edge_count() > 0);
        let skip = pick.index(g.edge_count());
        let mut h = ColoredMultigraph::with_vertices(1, g.vertices());
        for (i, e) in g.edges().iter().enumerate() {
            if i != skip {
                h.add_edge(e.a, e.b, e.color).unwrap();
            }
        }
        prop_assert!(!conforms_to_gdd(&h, &params, params.p));
    }

    #[test]
    fn large_radius_implies_sum_condition(
        (a, p, lambda, mu) in (2u64..=5, 1u64..=5, 0u64..=8, 1u64..=3),
        r in 1u64..=8,
        seed in any::<u64>(),
    ) {
        let Ok(params) = GddParams::embedding(a, p, lambda, mu, r) else { return Ok(()) };
        prop_assume!(meets_large_radius(&params, r));
        let degree = params.vertex_degree(p + r);
        prop_assume!(degree % 2 == 0);
        let k = degree / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stats: Vec<_> = (1..=k as u32)
            .map(|color| {
                let s = rng.gen_range(1..=r);
                ClassStats { color, omega: s, s, mixed_edges: 0, pure_edges_per_part: vec![0; p as usize] }
            })
            .collect();
        prop_assert!(check_sum_condition(&stats, &params).unwrap());
    }

    #[test]
    fn instance_text_is_canonical(params in params_strategy(), k in 1u32..5, seed in any::<u64>()) {
        let g = recolored(&build_gdd(&params, params.p).unwrap(), k, seed);
        let text = serialize_instance(&params, &g);
        let (back, h) = parse_instance(&text).unwrap();
        prop_assert_eq!(back, params);
        prop_assert_eq!(h.edge_multiset(), g.edge_multiset());
        prop_assert_eq!(serialize_instance(&back, &h), text.clone());

        // record order and endpoint order do not matter
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut file = instance_file(&params, &g);
        file.edges.shuffle(&mut rng);
        for rec in &mut file.edges {
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut rec.from, &mut rec.to);
            }
        }
        let (back, h) = parse_instance(&serde_json::to_string(&file).unwrap()).unwrap();
        prop_assert_eq!(serialize_instance(&back, &h), text);
    }

    #[test]
    fn amalgamation_keeps_colors_and_degrees(params in params_strategy(), k in 1u32..5, seed in any::<u64>()) {
        let g = recolored(&build_gdd(&params, params.p).unwrap(), k, seed);
        // collapse each part to its first slot
        let h = g.amalgamate(|v| VertexId::original(v.part, 1));
        prop_assert_eq!(h.vertex_count() as u64, params.p);
        let hist = |g: &ColoredMultigraph| {
            let mut m = BTreeMap::new();
            for e in g.edges() {
                *m.entry(e.color).or_insert(0usize) += 1;
            }
            m
        };
        prop_assert_eq!(hist(&h), hist(&g));
        for part in 1..=params.p as u32 {
            let merged: u64 = (1..=params.a as u32)
                .map(|slot| g.degree(VertexId::original(part, slot), None).unwrap())
                .sum();
            prop_assert_eq!(h.degree(VertexId::original(part, 1), None).unwrap(), merged);
        }
    }
}

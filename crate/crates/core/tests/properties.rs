use std::collections::BTreeSet;

use proptest::prelude::*;

use cbt_topo::connectivity::{boundary_matrix, connected_components, reduced_betti};
use cbt_topo::simplicial::barycentric_subdivide;
use cbt_topo::{Complex, Simplex};

/// Random complexes on vertices `0..8`, facets of at most `max_size` vertices.
fn complex(max_facets: usize, max_size: usize) -> impl Strategy<Value = Complex<u8>> {
    prop::collection::vec(prop::collection::btree_set(0u8..8, 1..=max_size), 1..=max_facets)
        .prop_map(|sets| Complex::from_vertex_lists(sets).unwrap())
}

/// Brute-force f-vector: count every nonempty subset of every facet once.
fn f_vector_oracle(k: &Complex<u8>) -> Vec<usize> {
    let mut all = BTreeSet::new();
    for f in k.facets() {
        let vs = f.vertices();
        for mask in 1u32..(1 << vs.len()) {
            let sub: Vec<u8> = (0..vs.len()).filter(|i| mask >> i & 1 == 1).map(|i| vs[i]).collect();
            all.insert(sub);
        }
    }
    let top = all.iter().map(Vec::len).max().unwrap();
    (1..=top).map(|l| all.iter().filter(|s| s.len() == l).count()).collect()
}

/// Components of the 1-skeleton by repeated flooding.
fn components_oracle(k: &Complex<u8>) -> usize {
    let mut unseen = k.vertices();
    let edges = k.simplices_of_dim(1);
    let mut count = 0;
    while let Some(&start) = unseen.iter().next() {
        count += 1;
        let mut stack = vec![start];
        unseen.remove(&start);
        while let Some(x) = stack.pop() {
            for e in &edges {
                let [a, b] = e.vertices() else { unreachable!() };
                for (p, q) in [(a, b), (b, a)] {
                    if *p == x && unseen.remove(q) {
                        stack.push(*q);
                    }
                }
            }
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_vector_matches_subset_count(k in complex(12, 5)) {
        prop_assert_eq!(k.f_vector(), f_vector_oracle(&k));
    }

    #[test]
    fn skeleton_is_idempotent_and_bounded(k in complex(12, 5), d in 0usize..5) {
        let s = k.skeleton(d);
        prop_assert_eq!(s.skeleton(d), s.clone());
        prop_assert!(s.dimension() <= d as isize);
        prop_assert!(s.is_subcomplex_of(&k));
        let expect: Vec<usize> = k.f_vector().into_iter().take(d + 1).collect();
        prop_assert_eq!(s.f_vector(), expect);
    }

    #[test]
    fn induced_subcomplex_is_maximal(k in complex(12, 5), w in prop::collection::btree_set(0u8..8, 1..8)) {
        let w: BTreeSet<u8> = w.intersection(&k.vertices()).copied().collect();
        prop_assume!(!w.is_empty());
        let sub = k.induced_subcomplex(&w).unwrap();
        for s in k.simplices() {
            let inside = s.vertices().iter().all(|v| w.contains(v));
            prop_assert_eq!(sub.contains(&s), inside);
        }
    }

    #[test]
    fn components_agree_with_flooding_and_betti_zero(k in complex(12, 4)) {
        let comps = connected_components(&k);
        prop_assert_eq!(comps.len(), components_oracle(&k));
        let b = reduced_betti(&k, 0).unwrap();
        prop_assert_eq!(b.components, comps.len());
        prop_assert_eq!(b.reduced_betti[0] + 1, comps.len());
    }

    #[test]
    fn boundary_of_boundary_vanishes(k in complex(10, 5)) {
        for d in 2..=k.dimension() as usize {
            let lower = boundary_matrix(&k, d - 1).unwrap();
            let upper = boundary_matrix(&k, d).unwrap();
            prop_assert!(lower.mul(&upper).is_zero());
        }
    }

    #[test]
    fn euler_characteristic_is_alternating_sum(k in complex(12, 5)) {
        let b = reduced_betti(&k, k.dimension() as usize).unwrap();
        let alt: i64 = b.reduced_betti.iter().enumerate()
            .map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) })
            .sum();
        prop_assert_eq!(k.euler_characteristic(), alt + 1);
    }

    #[test]
    fn first_subdivision_preserves_invariants(k in complex(50, 4)) {
        let sd = barycentric_subdivide(&k, 1);
        prop_assert_eq!(sd.complex.euler_characteristic(), k.euler_characteristic());
        prop_assert_eq!(connected_components(&sd.complex).len(), connected_components(&k).len());
        prop_assert_eq!(sd.vertex_count(), k.simplices().len());
        prop_assert!(sd.complex.is_pure() || !k.is_pure());
    }

    #[test]
    fn second_subdivision_preserves_invariants(k in complex(8, 3)) {
        let sd = barycentric_subdivide(&k, 2);
        prop_assert_eq!(sd.complex.euler_characteristic(), k.euler_characteristic());
        prop_assert_eq!(connected_components(&sd.complex).len(), connected_components(&k).len());
    }

    #[test]
    fn subdivision_preserves_homology(k in complex(6, 4)) {
        let d = k.dimension() as usize;
        let sd = barycentric_subdivide(&k, 1);
        prop_assert_eq!(
            reduced_betti(&sd.complex, d).unwrap().reduced_betti,
            reduced_betti(&k, d).unwrap().reduced_betti
        );
    }

    #[test]
    fn subdivision_carriers_form_flags(k in complex(10, 4), depth in 1usize..3) {
        let sd = barycentric_subdivide(&k, depth);
        for f in sd.complex.facets() {
            let mut carriers: Vec<&Simplex<u8>> = f.vertices().iter().map(|&u| sd.carrier_of(u)).collect();
            carriers.sort_by_key(|c| c.len());
            for w in carriers.windows(2) {
                prop_assert!(w[0].is_face_of(w[1]));
            }
            prop_assert!(k.contains(&sd.carrier_of_simplex(f)));
        }
    }

    #[test]
    fn complex_json_round_trips(k in complex(12, 5)) {
        let text = serde_json::to_string(&k).unwrap();
        let back: Complex<u8> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, k);
    }
}

mod common;

use common::{dense_laplacian, jacobi_eigenvalues};
use graphon_sampling::poincare::{gamma_graph, neighborhood, poincare_constant, verify_poincare};
use graphon_sampling::sampling::uniqueness_rank;
use graphon_sampling::{eig_sym, normalized_laplacian, Graph};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Connected graph with a proper subset `S`, `|S| <= n / 2`.
fn arb_instance() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    common::arb_connected_graph(100).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n / 2))
    })
}

#[test]
fn path_end_certificate_matches_oracle() {
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let gamma = gamma_graph(&g, &[0]).unwrap();
    let oracle = jacobi_eigenvalues(&dense_laplacian(&gamma.graph));
    for (a, b) in oracle.iter().zip([0.0, 1.0, 2.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    let cert = poincare_constant(&g, &[0]).unwrap();
    assert!((cert.lambda1 - 1.0).abs() < 1e-12);
    assert!((cert.poincare_constant - 1.0).abs() < 1e-12);
    assert_eq!(cert.bandwidth, cert.lambda1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn inequality_holds_on_random_instances((g, s) in arb_instance(), seed in any::<u64>()) {
        let report = verify_poincare(&g, &s, 1000, seed).unwrap();
        prop_assert!(report.max_ratio <= report.poincare_constant + 1e-9);
        let cert = poincare_constant(&g, &s).unwrap();
        prop_assert!(cert.lambda1 > 0.0);
        prop_assert!((cert.poincare_constant * cert.lambda1 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mirror_swap_is_an_automorphism((g, s) in arb_instance()) {
        let gamma = gamma_graph(&g, &s).unwrap();
        let (k, m) = (s.len(), gamma.neighborhood.len());
        let n = 2 * k + m;
        let swap: Vec<usize> = (0..n).map(|i| if i < k { i + k + m } else if i >= k + m { i - k - m } else { i }).collect();
        let a = gamma.graph.to_dense();
        let p = DMatrix::from_fn(n, n, |i, j| if swap[i] == j { 1.0 } else { 0.0 });
        prop_assert_eq!(&p * &a, &a * &p);
    }

    #[test]
    fn neighborhood_degrees_count_both_mirrors((g, s) in arb_instance()) {
        let gamma = gamma_graph(&g, &s).unwrap();
        let nb = neighborhood(&g, &s).unwrap();
        let k = s.len();
        for (i, &w) in nb.iter().enumerate() {
            let into = |set: &[usize]| set.iter().map(|&u| g.weight(w, u)).sum::<f64>();
            let closed: Vec<usize> = s.iter().chain(&nb).copied().collect();
            let expected = into(&closed) + into(&s);
            prop_assert!((gamma.graph.degree(k + i) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn complement_certified_below_bandwidth((g, s) in arb_instance()) {
        let cert = poincare_constant(&g, &s).unwrap();
        let spec = eig_sym(&normalized_laplacian(&g), None).unwrap();
        let rest: Vec<usize> = (0..g.n()).filter(|u| !s.contains(u)).collect();
        let k = spec.eigenvalues.iter().take_while(|&&l| l < cert.bandwidth).count().min(rest.len());
        for band in 1..=k {
            prop_assert!(uniqueness_rank(&spec, &rest, band, None).unwrap().certified);
        }
    }
}

//! Randomised invariants over small weighted graphs.

use kcut_core::bounds;
use kcut_core::hamming::{self, KravchukTable};
use kcut_core::io::{read_graph, write_graph, GraphFormat};
use kcut_core::oracle;
use kcut_core::relax::{self, RelaxationKind};
use kcut_core::sdp::{self, SolverOptions};
use kcut_core::spectra;
use kcut_core::{cut_weight, Graph, Partition};
use proptest::prelude::*;

fn small_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec(prop_oneof![3 => Just(0u8), 2 => 1u8..=4], pairs).prop_map(move |codes| {
            let mut edges = Vec::new();
            let mut t = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if codes[t] > 0 {
                        edges.push((i, j, codes[t] as f64 * 0.5));
                    }
                    t += 1;
                }
            }
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn graph_and_partition(max_n: usize) -> impl Strategy<Value = (Graph, Vec<usize>, usize)> {
    (small_graph(max_n), 2..=4usize).prop_flat_map(|(g, k)| {
        let n = g.n();
        (Just(g), prop::collection::vec(0..k, n), Just(k))
    })
}

/// Smallest k with a max-k-cut equal to the total weight.
fn chromatic_number(g: &Graph) -> usize {
    if g.edge_count() == 0 {
        return 1;
    }
    let total = g.total_weight();
    (2..g.n()).find(|&k| (oracle::brute_force_maxkcut(g, k).unwrap().value - total).abs() < 1e-9).unwrap_or(g.n())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cut_weight_matches_laplacian_quadratic_form((g, assignment, k) in graph_and_partition(9)) {
        let p = Partition::new(assignment, k).unwrap();
        let x = p.incidence();
        let quad = 0.5 * x.transpose().matmul(&g.laplacian().matrix).matmul(&x).trace();
        prop_assert!((quad - cut_weight(&g, &p).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn relabelling_parts_keeps_cut_weight((g, assignment, k) in graph_and_partition(9)) {
        let p = Partition::new(assignment.clone(), k).unwrap();
        let shifted = Partition::new(assignment.iter().map(|&a| (a + 1) % k).collect(), k).unwrap();
        prop_assert_eq!(cut_weight(&g, &p).unwrap(), cut_weight(&g, &shifted).unwrap());
        prop_assert_eq!(cut_weight(&g, &p).unwrap(), cut_weight(&g, &p.canonical()).unwrap());
    }

    #[test]
    fn eigenvalue_bound_dominates_every_cut((g, assignment, k) in graph_and_partition(9)) {
        prop_assume!(k <= g.n());
        let bound = bounds::eigenvalue_bound(&g, k).unwrap().value;
        let exact = oracle::brute_force_maxkcut(&g, k).unwrap();
        let p = Partition::new(assignment, k).unwrap();
        prop_assert!(cut_weight(&g, &p).unwrap() <= exact.value + 1e-9);
        prop_assert!(exact.value <= bound + 1e-9);
        prop_assert!(exact.value <= g.total_weight() + 1e-9);
    }

    #[test]
    fn chromatic_bound_is_below_chromatic_number(g in small_graph(7)) {
        prop_assume!(g.edge_count() > 0);
        let unit = Graph::from_unit_edges(g.n(), &g.edges().map(|(i, j, _)| (i, j)).collect::<Vec<_>>()).unwrap();
        let chi = chromatic_number(&unit) as i64;
        let ours = bounds::chromatic_lower_bound(&unit).unwrap();
        prop_assert!(ours.integer_value.unwrap() <= chi);
        prop_assert!(bounds::hoffman_bound(&unit).unwrap().integer_value.unwrap() <= chi);
    }

    #[test]
    fn laplacian_spectrum_sits_in_gershgorin_range(g in small_graph(10)) {
        let values = spectra::symmetric_eigenvalues(&g.laplacian().matrix).unwrap();
        let max_degree = (0..g.n()).map(|v| g.degree(v)).fold(0.0, f64::max);
        prop_assert!(values[0].abs() < 1e-9);
        prop_assert!(values[values.len() - 1] <= 2.0 * max_degree + 1e-9);
        prop_assert!(values[values.len() - 1] + 1e-9 >= max_degree);
        let sum: f64 = values.iter().sum();
        prop_assert!((sum - 2.0 * g.total_weight()).abs() < 1e-8);
    }

    #[test]
    fn edge_list_and_dimacs_round_trip(g in small_graph(12)) {
        for format in [GraphFormat::EdgeList, GraphFormat::Dimacs] {
            let mut buf = Vec::new();
            write_graph(&mut buf, &g, format).unwrap();
            let back = read_graph(buf.as_slice(), format).unwrap();
            prop_assert_eq!(back.weights(), g.weights());
        }
    }

    #[test]
    fn kravchuk_rows_are_hamming_spectra(d in 1usize..=3, q in 2usize..=4, j_seed in 0usize..3) {
        let j = 1 + j_seed % d;
        let table = KravchukTable::new(d, q).unwrap();
        prop_assert!(table.verify_identities());
        let g = hamming::hamming_graph(d, q, j).unwrap();
        let mut adjacency = spectra::symmetric_eigenvalues(g.weights()).unwrap();
        adjacency.sort_by(f64::total_cmp);
        let mut expected = Vec::new();
        for i in 0..=d {
            expected.extend(std::iter::repeat_n(table.value_f64(j, i), table.multiplicity_usize(i)));
        }
        expected.sort_by(f64::total_cmp);
        prop_assert_eq!(adjacency.len(), expected.len());
        for (a, b) in adjacency.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn relaxations_sit_between_exact_value_and_eigenvalue_bound(g in small_graph(6), k in 2usize..=3) {
        prop_assume!(k <= g.n() && g.edge_count() > 0);
        let opts = SolverOptions { tol_eq: 1e-8, tol_psd: 1e-8, tol_gap: 1e-7, ..SolverOptions::default() };
        let exact = oracle::brute_force_maxkcut(&g, k).unwrap().value;
        let eig = bounds::eigenvalue_bound(&g, k).unwrap().value;
        let main = sdp::solve(&relax::build(&g, k, RelaxationKind::MainSdp).unwrap(), &opts).unwrap();
        let fj = sdp::solve(&relax::build(&g, k, RelaxationKind::FriezeJerrum).unwrap(), &opts).unwrap();
        prop_assert!(main.is_optimal());
        prop_assert!(exact <= main.objective_value + 1e-5);
        prop_assert!(main.objective_value <= eig + 1e-5);
        prop_assert!((main.objective_value - fj.objective_value).abs() < 1e-5);
        let rounded = oracle::hyperplane_round(&main.y, &g, k, 50, 3).unwrap();
        prop_assert!(rounded.value <= exact + 1e-9);
    }
}

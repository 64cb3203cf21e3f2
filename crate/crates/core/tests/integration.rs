//! End-to-end checks across graph construction, spectra, bounds, the SDP
//! solver and the oracles.

use kcut_core::bounds::{self, BoundKind, BoundSource};
use kcut_core::catalogue;
use kcut_core::io::{read_graph, write_graph, GraphFormat};
use kcut_core::oracle::{self, GapOptions};
use kcut_core::relax::{self, CutOptions, RelaxationKind};
use kcut_core::sdp::{self, SolveStatus, SolverOptions};
use kcut_core::spectra;
use kcut_core::Error;

fn tight() -> SolverOptions {
    SolverOptions { tol_eq: 1e-8, tol_psd: 1e-8, tol_gap: 1e-7, ..SolverOptions::default() }
}

#[test]
fn catalogue_spectra_match_closed_forms() {
    let cases: &[(&str, &[usize])] = &[
        ("complete", &[7]),
        ("complete_multipartite", &[3, 4]),
        ("cycle", &[9]),
        ("petersen", &[]),
        ("coxeter", &[]),
        ("kneser", &[7, 3]),
        ("hamming", &[3, 3, 2]),
    ];
    for &(name, params) in cases {
        let g = catalogue::named_graph(name, params).unwrap();
        let mut expected: Vec<f64> = catalogue::known_laplacian_spectrum(name, params)
            .unwrap()
            .into_iter()
            .flat_map(|(v, m)| std::iter::repeat_n(v, m))
            .collect();
        expected.sort_by(f64::total_cmp);
        let numeric = spectra::symmetric_eigenvalues(&g.laplacian().matrix).unwrap();
        assert_eq!(numeric.len(), expected.len(), "{name}");
        for (a, b) in numeric.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn bound_reports_carry_kind_and_source() {
    let g = catalogue::petersen().unwrap();
    let eig = bounds::eigenvalue_bound(&g, 3).unwrap();
    assert_eq!(eig.source, BoundSource::EigenvalueBound);
    assert_eq!(eig.kind, BoundKind::UpperBoundMaxkcut);
    assert!((eig.value - 10.0 * 2.0 / 6.0 * 5.0).abs() < 1e-12);
    let chi = bounds::chromatic_lower_bound(&g).unwrap();
    assert_eq!(chi.kind, BoundKind::LowerBoundChromatic);
    assert_eq!(chi.integer_value, Some(3));
}

#[test]
fn every_relaxation_bounds_the_exact_value() {
    let g = catalogue::kneser(6, 2).unwrap();
    let exact = oracle::brute_force_maxkcut(&g, 3).unwrap().value;
    let eig = bounds::eigenvalue_bound(&g, 3).unwrap().value;
    for kind in RelaxationKind::ALL {
        let sol = sdp::solve(&relax::build(&g, 3, kind).unwrap(), &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "{kind}");
        assert!(sol.objective_value + 1e-5 >= exact, "{kind}");
        assert!(sol.objective_value <= eig + 1e-5, "{kind}");
        let report = sdp::certify(&relax::build(&g, 3, kind).unwrap(), &sol.y, 1e-6).unwrap();
        assert!(report.pass(), "{kind}: {report:?}");
    }
}

#[test]
fn perturbed_with_lower_bound_equals_main() {
    let g = catalogue::cycle(7).unwrap();
    for k in 2..=4 {
        let main = sdp::solve(&relax::build(&g, k, RelaxationKind::MainSdp).unwrap(), &tight()).unwrap();
        let bounded = sdp::solve(&relax::build_perturbed_bounded(&g, k).unwrap(), &tight()).unwrap();
        assert!((main.objective_value - bounded.objective_value).abs() < 1e-5, "k={k}");
    }
}

#[test]
fn separated_triangles_reach_the_all_triangle_value() {
    let g = catalogue::cycle(7).unwrap();
    let all = relax::cutting_plane_loop(&g, 2, RelaxationKind::MainSdp, &CutOptions::all_triangles(), &tight())
        .unwrap()
        .solution
        .objective_value;
    let separated =
        relax::cutting_plane_loop(&g, 2, RelaxationKind::MainSdp, &CutOptions::separated_triangles(), &tight())
            .unwrap();
    assert!((all - separated.solution.objective_value).abs() < 1e-5);
    assert!(!separated.history.is_empty());
}

#[test]
fn solver_dump_round_trips_through_text() {
    let g = catalogue::petersen().unwrap();
    let model = relax::build(&g, 3, RelaxationKind::MainSdp).unwrap();
    let mut text = Vec::new();
    model.dump(&mut text).unwrap();
    let back = sdp::SdpModel::read_dump(text.as_slice()).unwrap();
    let a = sdp::solve(&model, &tight()).unwrap().objective_value;
    let b = sdp::solve(&back, &tight()).unwrap().objective_value;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn file_graphs_solve_like_catalogue_graphs() {
    let g = catalogue::coxeter().unwrap();
    let mut buf = Vec::new();
    write_graph(&mut buf, &g, GraphFormat::Dimacs).unwrap();
    let back = read_graph(buf.as_slice(), GraphFormat::Dimacs).unwrap();
    assert_eq!(bounds::eigenvalue_bound(&back, 2).unwrap().value, bounds::eigenvalue_bound(&g, 2).unwrap().value);
}

#[test]
fn malformed_input_is_rejected_with_line_numbers() {
    let text = "3 2\n0 1\n1 1\n";
    match read_graph(text.as_bytes(), GraphFormat::EdgeList) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let text = "p edge 3 1\ne 1 4\n";
    assert!(matches!(read_graph(text.as_bytes(), GraphFormat::Dimacs), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn gap_report_orders_bounds() {
    let g = catalogue::cycle(5).unwrap();
    let report = oracle::gap_report(&g, 2, &GapOptions { solver: tight(), ..GapOptions::default() }).unwrap();
    let value = |name: &str| report.row(name).unwrap().value;
    assert_eq!(report.exact, 4.0);
    assert!(value("eigenvalue bound") + 1e-5 >= value("perturbed"));
    assert!(value("perturbed") + 1e-5 >= value("main sdp"));
    assert!(value("main sdp") + 1e-5 >= value("+triangles"));
    assert!((value("+independent sets") - 4.0).abs() < 1e-5);
    assert_eq!(value("best rounded"), 4.0);
}

#[test]
fn hamming_certificate_for_small_instance() {
    let cert = kcut_core::hamming::hamming_tightness_certificate(2, 3, 2, &Default::default()).unwrap();
    assert!(cert.tight);
    assert!(cert.sdp_checks.iter().all(|c| c.agrees));
    assert!((cert.lambda_max_numeric.unwrap() - 6.0).abs() < 1e-9);
    assert!(kcut_core::hamming::hamming_tightness_certificate(3, 2, 1, &Default::default()).is_err());
}

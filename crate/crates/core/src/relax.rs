//! The four SDP relaxations of max-k-cut, the triangle and independent-set
//! cut families, and a cutting-plane driver.
//!
//! Cuts are always stated on the partition matrix `Y` (1 where two vertices
//! share a part). Relaxations whose variable is an affine image of that
//! matrix get their cuts rewritten through [`RelaxationKind::cut_for`].

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::BoundSource;
use crate::catalogue::subsets;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::sdp::{self, Cone, Cut, DiagConstraint, SdpModel, SdpSolution, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationKind {
    /// `½tr(LY)`, `diag(Y) = 1`, `kY − J ⪰ 0`, `Y ≥ 0`.
    MainSdp,
    /// `(k−1)/(2k)·tr(LY)`, `diag(Y) = 1`, `Y ⪰ 0`, `Y ≥ −1/(k−1)`.
    FriezeJerrum,
    /// `½tr(LY)`, `tr(Y) = n`, `kY − J ⪰ 0`.
    EigSdp,
    /// `½tr(LY)`, `diag(Y) = (k−1)/k`, `Y ⪰ 0`.
    PerturbedSdp,
}

impl RelaxationKind {
    pub const ALL: [RelaxationKind; 4] =
        [RelaxationKind::MainSdp, RelaxationKind::FriezeJerrum, RelaxationKind::EigSdp, RelaxationKind::PerturbedSdp];

    pub fn as_str(self) -> &'static str {
        match self {
            RelaxationKind::MainSdp => "main_sdp",
            RelaxationKind::FriezeJerrum => "frieze_jerrum",
            RelaxationKind::EigSdp => "eig_sdp",
            RelaxationKind::PerturbedSdp => "perturbed_sdp",
        }
    }

    pub fn source(self) -> BoundSource {
        match self {
            RelaxationKind::MainSdp => BoundSource::MainSdp,
            RelaxationKind::FriezeJerrum => BoundSource::FriezeJerrum,
            RelaxationKind::EigSdp => BoundSource::EigSdp,
            RelaxationKind::PerturbedSdp => BoundSource::PerturbedSdp,
        }
    }

    /// `(a, b)` such that the partition matrix is `a·Y + b·J` in terms of this
    /// relaxation's variable `Y`.
    fn partition_map(self, k: usize) -> (f64, f64) {
        let k = k as f64;
        match self {
            RelaxationKind::MainSdp | RelaxationKind::EigSdp => (1.0, 0.0),
            RelaxationKind::FriezeJerrum => ((k - 1.0) / k, 1.0 / k),
            RelaxationKind::PerturbedSdp => (1.0, 1.0 / k),
        }
    }

    /// Maps a solution of this relaxation to partition-matrix coordinates.
    pub fn partition_matrix(self, y: &Matrix, k: usize) -> Matrix {
        let (a, b) = self.partition_map(k);
        Matrix::from_fn(y.rows(), y.cols(), |i, j| a * y[(i, j)] + b)
    }

    /// Rewrites a cut on the partition matrix as a cut on this relaxation's variable.
    pub fn cut_for(self, cut: &Cut, k: usize) -> Cut {
        let (a, b) = self.partition_map(k);
        let coeff_sum: f64 = cut.terms.iter().map(|t| t.2).sum();
        Cut { terms: cut.terms.iter().map(|&(i, j, c)| (i, j, a * c)).collect(), rhs: cut.rhs - b * coeff_sum }
    }
}

impl fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelaxationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelaxationKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown relaxation `{s}`")))
    }
}

/// Builds the SDP model of `kind` for `g` and `k` parts.
pub fn build(g: &Graph, k: usize, kind: RelaxationKind) -> Result<SdpModel> {
    let n = g.n();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n = {n}, got k = {k}")));
    }
    let laplacian = g.laplacian().matrix;
    let kf = k as f64;
    let model = match kind {
        RelaxationKind::MainSdp => SdpModel {
            n,
            objective: laplacian,
            obj_scale: 0.5,
            diag: DiagConstraint::Entries(vec![1.0; n]),
            cone: Cone::ShiftedPsd { k },
            lower: Some(Matrix::zeros(n, n)),
            cuts: Vec::new(),
        },
        RelaxationKind::FriezeJerrum => SdpModel {
            n,
            objective: laplacian,
            obj_scale: (kf - 1.0) / (2.0 * kf),
            diag: DiagConstraint::Entries(vec![1.0; n]),
            cone: Cone::Psd,
            lower: Some(Matrix::filled(n, n, -1.0 / (kf - 1.0))),
            cuts: Vec::new(),
        },
        RelaxationKind::EigSdp => SdpModel {
            n,
            objective: laplacian,
            obj_scale: 0.5,
            diag: DiagConstraint::Trace(n as f64),
            cone: Cone::ShiftedPsd { k },
            lower: None,
            cuts: Vec::new(),
        },
        RelaxationKind::PerturbedSdp => SdpModel {
            n,
            objective: laplacian,
            obj_scale: 0.5,
            diag: DiagConstraint::Entries(vec![(kf - 1.0) / kf; n]),
            cone: Cone::Psd,
            lower: None,
            cuts: Vec::new(),
        },
    };
    Ok(model)
}

/// The perturbed relaxation with the extra bound `Y ≥ −J/k`, whose value
/// coincides with the main relaxation.
pub fn build_perturbed_bounded(g: &Graph, k: usize) -> Result<SdpModel> {
    let mut model = build(g, k, RelaxationKind::PerturbedSdp)?;
    model.lower = Some(Matrix::filled(g.n(), g.n(), -1.0 / k as f64));
    Ok(model)
}

/// Triangle inequality with apex `apex`: `y_{apex,a} + y_{apex,b} − y_{a,b} ≤ 1`.
pub fn triangle_cut(apex: usize, a: usize, b: usize) -> Cut {
    let ord = |i: usize, j: usize| (i.min(j), i.max(j));
    let (i1, j1) = ord(apex, a);
    let (i2, j2) = ord(apex, b);
    let (i3, j3) = ord(a, b);
    Cut { terms: vec![(i1, j1, 1.0), (i2, j2, 1.0), (i3, j3, -1.0)], rhs: 1.0 }
}

/// All `3·C(n,3)` triangle inequalities, by triple `i < j < l` then apex.
pub fn triangle_cuts(n: usize) -> Vec<Cut> {
    let mut cuts = Vec::with_capacity(n * n.saturating_sub(1) * n.saturating_sub(2) / 2);
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                cuts.push(triangle_cut(i, j, l));
                cuts.push(triangle_cut(j, i, l));
                cuts.push(triangle_cut(l, i, j));
            }
        }
    }
    cuts
}

/// Triangle key `(apex, a, b)` with `a < b`.
type TriangleKey = (usize, usize, usize);

fn violated_triangles(y: &Matrix, violation_tol: f64) -> Vec<(f64, TriangleKey)> {
    let n = y.rows();
    let mut found = Vec::new();
    for apex in 0..n {
        for a in 0..n {
            if a == apex {
                continue;
            }
            for b in a + 1..n {
                if b == apex {
                    continue;
                }
                let v = y[(apex, a)] + y[(apex, b)] - y[(a, b)] - 1.0;
                if v > violation_tol {
                    found.push((v, (apex, a, b)));
                }
            }
        }
    }
    found.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    found
}

/// The at most `max_cuts` most violated triangle inequalities of the partition
/// matrix `y`, by decreasing violation, ties broken by `(apex, a, b)`.
pub fn separate_triangles(y: &Matrix, max_cuts: usize, violation_tol: f64) -> Vec<Cut> {
    violated_triangles(y, violation_tol)
        .into_iter()
        .take(max_cuts)
        .map(|(_, (apex, a, b))| triangle_cut(apex, a, b))
        .collect()
}

/// Default bound on the number of independent-set inequalities generated.
pub const DEFAULT_INDEPENDENT_SET_CAP: f64 = 1e6;

/// `Σ_{i<j ∈ Q} y_ij ≥ 1` for every `(k+1)`-subset `Q`, stored as `−Σ y ≤ −1`.
pub fn independent_set_cuts(n: usize, k: usize, cap: f64) -> Result<Vec<Cut>> {
    if k + 1 > n {
        return Err(Error::InvalidParameter(format!("independent-set cuts need k + 1 <= n, got n = {n}, k = {k}")));
    }
    let count = (0..k + 1).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round();
    if count > cap {
        return Err(Error::CapExceeded { what: "independent-set cuts".into(), estimate: count, cap });
    }
    Ok(subsets(n, k + 1)
        .into_iter()
        .map(|q| {
            let mut terms = Vec::with_capacity(q.len() * (q.len() - 1) / 2);
            for (a, &i) in q.iter().enumerate() {
                for &j in &q[a + 1..] {
                    terms.push((i, j, -1.0));
                }
            }
            Cut { terms, rhs: -1.0 }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleMode {
    None,
    All,
    Separated,
}

#[derive(Clone, Debug)]
pub struct CutOptions {
    pub triangles: TriangleMode,
    pub independent_sets: bool,
    pub max_cuts_per_round: usize,
    pub violation_tol: f64,
    pub rounds: usize,
    pub independent_set_cap: f64,
}

impl CutOptions {
    pub fn none() -> Self {
        CutOptions {
            triangles: TriangleMode::None,
            independent_sets: false,
            max_cuts_per_round: 2000,
            violation_tol: 1e-5,
            rounds: 20,
            independent_set_cap: DEFAULT_INDEPENDENT_SET_CAP,
        }
    }

    pub fn all_triangles() -> Self {
        CutOptions { triangles: TriangleMode::All, ..CutOptions::none() }
    }

    pub fn separated_triangles() -> Self {
        CutOptions { triangles: TriangleMode::Separated, ..CutOptions::none() }
    }

    pub fn with_independent_sets(mut self) -> Self {
        self.independent_sets = true;
        self
    }
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions::none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub cuts_added: usize,
    pub total_cuts: usize,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct CuttingPlaneResult {
    pub model: SdpModel,
    pub solution: SdpSolution,
    pub history: Vec<RoundRecord>,
}

/// Builds `base`, adds the requested cut families and solves; with separated
/// triangles, repeatedly adds the most violated ones and re-solves.
pub fn cutting_plane_loop(
    g: &Graph,
    k: usize,
    base: RelaxationKind,
    cuts: &CutOptions,
    solver: &SolverOptions,
) -> Result<CuttingPlaneResult> {
    let mut model = build(g, k, base)?;
    if cuts.independent_sets {
        let family = independent_set_cuts(g.n(), k, cuts.independent_set_cap)?;
        model.cuts.extend(family.iter().map(|c| base.cut_for(c, k)));
    }
    if cuts.triangles == TriangleMode::All {
        model.cuts.extend(triangle_cuts(g.n()).iter().map(|c| base.cut_for(c, k)));
    }
    let mut solution = sdp::solve(&model, solver)?;
    let mut history = vec![RoundRecord {
        round: 0,
        cuts_added: model.cuts.len(),
        total_cuts: model.cuts.len(),
        objective: solution.objective_value,
        iterations: solution.iterations,
    }];
    if cuts.triangles != TriangleMode::Separated {
        return Ok(CuttingPlaneResult { model, solution, history });
    }
    let mut present: HashSet<TriangleKey> = HashSet::new();
    for round in 1..=cuts.rounds {
        let partition = base.partition_matrix(&solution.y, k);
        let fresh: Vec<TriangleKey> = violated_triangles(&partition, cuts.violation_tol)
            .into_iter()
            .map(|(_, key)| key)
            .filter(|key| !present.contains(key))
            .take(cuts.max_cuts_per_round)
            .collect();
        if fresh.is_empty() {
            break;
        }
        for &(apex, a, b) in &fresh {
            present.insert((apex, a, b));
            model.cuts.push(base.cut_for(&triangle_cut(apex, a, b), k));
        }
        solution = sdp::solve_warm(&model, solver, solution.warm_start.as_ref())?;
        history.push(RoundRecord {
            round,
            cuts_added: fresh.len(),
            total_cuts: model.cuts.len(),
            objective: solution.objective_value,
            iterations: solution.iterations,
        });
    }
    Ok(CuttingPlaneResult { model, solution, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    fn tight() -> SolverOptions {
        SolverOptions { tol_eq: 1e-9, tol_gap: 1e-9, ..SolverOptions::default() }
    }

    #[test]
    fn triangle_counts() {
        assert_eq!(triangle_cuts(3).len(), 3);
        assert_eq!(triangle_cuts(5).len(), 30);
        assert_eq!(triangle_cuts(28).len(), 9828);
    }

    #[test]
    fn independent_set_counts() {
        assert_eq!(independent_set_cuts(5, 2, 1e6).unwrap().len(), 10);
        assert_eq!(independent_set_cuts(28, 2, 1e6).unwrap().len(), 3276);
        assert!(matches!(independent_set_cuts(40, 5, 1e6), Err(Error::CapExceeded { .. })));
        assert!(independent_set_cuts(3, 3, 1e6).is_err());
    }

    #[test]
    fn separation_examples() {
        assert!(separate_triangles(&Matrix::ones(4), 10, 1e-5).is_empty());
        assert!(separate_triangles(&Matrix::identity(4), 10, 1e-5).is_empty());
        let mut y = Matrix::identity(3);
        for (i, j) in [(0, 1), (0, 2)] {
            y[(i, j)] = 1.0;
            y[(j, i)] = 1.0;
        }
        let cuts = separate_triangles(&y, 10, 1e-5);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0], triangle_cut(0, 1, 2));
        assert!((cuts[0].violation(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_matrices_satisfy_all_cuts() {
        let p = crate::graph::Partition::new(vec![0, 1, 0, 2, 1, 2], 3).unwrap();
        let y = p.gram();
        assert!(triangle_cuts(6).iter().all(|c| c.violation(&y) <= 0.0));
        assert!(independent_set_cuts(6, 3, 1e6).unwrap().iter().all(|c| c.violation(&y) <= 0.0));
    }

    #[test]
    fn cut_rewriting_preserves_partition_points() {
        let p = crate::graph::Partition::new(vec![0, 1, 1, 0, 2], 3).unwrap();
        let part = p.gram();
        let k = 3;
        for kind in RelaxationKind::ALL {
            let (a, b) = kind.partition_map(k);
            let y = Matrix::from_fn(5, 5, |i, j| (part[(i, j)] - b) / a);
            assert!(kind.partition_matrix(&y, k).sub(&part).max_abs() < 1e-12);
            for cut in triangle_cuts(5) {
                let mapped = kind.cut_for(&cut, k);
                assert!((mapped.violation(&y) - cut.violation(&part)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn build_rejects_bad_k() {
        let g = catalogue::cycle(5).unwrap();
        assert!(build(&g, 1, RelaxationKind::MainSdp).is_err());
        assert!(build(&g, 6, RelaxationKind::EigSdp).is_err());
    }

    #[test]
    fn pentagon_values() {
        let g = catalogue::cycle(5).unwrap();
        let eig = sdp::solve(&build(&g, 2, RelaxationKind::EigSdp).unwrap(), &tight()).unwrap();
        assert!((eig.objective_value - 4.52254).abs() < 1e-4);
        let tri = cutting_plane_loop(&g, 2, RelaxationKind::MainSdp, &CutOptions::all_triangles(), &tight()).unwrap();
        assert!((tri.solution.objective_value - 25.0 / 6.0).abs() < 1e-5, "{}", tri.solution.objective_value);
        let both = cutting_plane_loop(
            &g,
            2,
            RelaxationKind::MainSdp,
            &CutOptions::all_triangles().with_independent_sets(),
            &tight(),
        )
        .unwrap();
        assert!((both.solution.objective_value - 4.0).abs() < 1e-5);
    }

    #[test]
    fn separation_loop_matches_full_family() {
        let g = catalogue::cycle(5).unwrap();
        let sep =
            cutting_plane_loop(&g, 2, RelaxationKind::MainSdp, &CutOptions::separated_triangles(), &tight()).unwrap();
        assert!((sep.solution.objective_value - 25.0 / 6.0).abs() < 1e-5);
        for w in sep.history.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-6);
        }
    }
}

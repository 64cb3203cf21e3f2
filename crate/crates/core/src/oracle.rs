//! Exact max-k-cut by exhaustive enumeration, randomized rounding of SDP
//! solutions, and a bound-versus-optimum gap report.
//!
//! Enumeration fixes vertex 0 in part 0 and only visits partitions whose
//! parts are first used in increasing order (restricted growth strings). For
//! `k = 2` this is a Gray-code walk over `2^(n−1)` labelings with O(degree)
//! updates per step.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::graph::{cut_weight, Graph, Partition};
use crate::linalg::Matrix;
use crate::relax::{self, CutOptions, RelaxationKind};
use crate::sdp::{self, SolverOptions};
use crate::spectra::{self, EigenMethod};

/// Default cap on the number of enumerated partitions.
pub const DEFAULT_WORK_CAP: f64 = 4e9;

#[derive(Clone, Debug, Serialize)]
pub struct ExactCut {
    pub partition: Vec<usize>,
    pub k: usize,
    pub value: f64,
}

impl ExactCut {
    pub fn partition(&self) -> Partition {
        Partition::new(self.partition.clone(), self.k).expect("enumerated partitions are valid")
    }
}

/// Number of partitions of `n` labelled vertices into at most `k` nonempty
/// unlabelled parts, `Σ_{j≤k} S(n, j)`.
pub fn enumeration_size(n: usize, k: usize) -> f64 {
    // Stirling numbers of the second kind, row by row.
    let mut row = vec![0.0f64; k + 1];
    row[0] = 1.0;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[1..].iter().sum()
}

pub fn brute_force_maxkcut(g: &Graph, k: usize) -> Result<ExactCut> {
    brute_force_maxkcut_with_cap(g, k, DEFAULT_WORK_CAP)
}

pub fn brute_force_maxkcut_with_cap(g: &Graph, k: usize, cap: f64) -> Result<ExactCut> {
    let n = g.n();
    if k < 1 {
        return Err(Error::InvalidParameter("brute force needs k >= 1".into()));
    }
    let estimate = enumeration_size(n, k.min(n));
    if estimate > cap {
        return Err(Error::CapExceeded { what: format!("max-{k}-cut enumeration on {n} vertices"), estimate, cap });
    }
    if k == 1 || n == 1 {
        return Ok(ExactCut { partition: vec![0; n], k, value: 0.0 });
    }
    if k == 2 {
        return Ok(gray_code_maxcut(g));
    }
    Ok(restricted_growth_search(g, k))
}

fn adjacency(g: &Graph) -> Vec<Vec<(usize, f64)>> {
    (0..g.n()).map(|v| g.neighbors(v).map(|u| (u, g.weight(v, u))).collect()).collect()
}

fn tie_tolerance(g: &Graph) -> f64 {
    1e-12 * (1.0 + g.total_weight())
}

fn gray_code_maxcut(g: &Graph) -> ExactCut {
    let n = g.n();
    let adj = adjacency(g);
    let tol = tie_tolerance(g);
    let mut side = vec![false; n];
    let mut value = 0.0;
    let mut best = 0.0;
    let mut best_side = side.clone();
    let steps: u64 = 1 << (n - 1);
    for step in 1..steps {
        // Flip the vertex given by the lowest set bit of the step counter.
        let v = step.trailing_zeros() as usize + 1;
        let mut delta = 0.0;
        for &(u, w) in &adj[v] {
            delta += if side[u] == side[v] { w } else { -w };
        }
        side[v] = !side[v];
        value += delta;
        if value > best + tol || (value >= best - tol && side < best_side) {
            if value > best + tol {
                best = value;
            }
            best_side.copy_from_slice(&side);
        }
    }
    let partition: Vec<usize> = best_side.iter().map(|&s| usize::from(s)).collect();
    let value = cut_weight(g, &Partition::new(partition.clone(), 2).expect("valid")).expect("sizes match");
    ExactCut { partition, k: 2, value }
}

struct Search<'a> {
    adj: &'a [Vec<(usize, f64)>],
    /// `remaining[v]`: weight of edges whose larger endpoint is at least `v`.
    remaining: Vec<f64>,
    k: usize,
    tol: f64,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Option<Vec<usize>>,
}

impl Search<'_> {
    fn visit(&mut self, v: usize, used: usize, value: f64) {
        let n = self.assignment.len();
        if v == n {
            if self.best_assignment.is_none() || value > self.best + self.tol {
                self.best = value;
                self.best_assignment = Some(self.assignment.clone());
            }
            return;
        }
        if self.best_assignment.is_some() && value + self.remaining[v] <= self.best + self.tol {
            return;
        }
        let limit = (used + 1).min(self.k);
        for part in 0..limit {
            let gain: f64 =
                self.adj[v].iter().filter(|&&(u, _)| u < v && self.assignment[u] != part).map(|&(_, w)| w).sum();
            self.assignment[v] = part;
            self.visit(v + 1, used.max(part + 1), value + gain);
        }
    }
}

fn restricted_growth_search(g: &Graph, k: usize) -> ExactCut {
    let n = g.n();
    let adj = adjacency(g);
    let mut remaining = vec![0.0; n + 1];
    for (i, j, w) in g.edges() {
        remaining[i.max(j)] += w;
    }
    for v in (0..n).rev() {
        remaining[v] += remaining[v + 1];
    }
    let mut search = Search {
        adj: &adj,
        remaining,
        k,
        tol: tie_tolerance(g),
        assignment: vec![0; n],
        best: 0.0,
        best_assignment: None,
    };
    search.visit(1, 1, 0.0);
    let partition = search.best_assignment.unwrap_or_else(|| vec![0; n]);
    let value = cut_weight(g, &Partition::new(partition.clone(), k).expect("valid")).expect("sizes match");
    ExactCut { partition, k, value }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundedCut {
    pub partition: Vec<usize>,
    pub k: usize,
    pub value: f64,
    /// Trial that produced the partition.
    pub trial: usize,
}

/// Random-vector rounding of a partition matrix `y` (1 on the diagonal,
/// entries near 1 for vertices that should share a part).
///
/// The Gram matrix `(kY − J)/(k−1)` is clipped to its PSD part and factored as
/// `V Vᵀ`. Each trial draws `k` standard normal vectors `r_1..r_k` from
/// ChaCha8 seeded with `seed + t` and puts vertex `v` in the part maximizing
/// `⟨r_p, V_v⟩` (lowest index on ties). The best trial wins, earliest first.
pub fn hyperplane_round(y: &Matrix, g: &Graph, k: usize, trials: usize, seed: u64) -> Result<RoundedCut> {
    let n = g.n();
    if y.rows() != n || y.cols() != n {
        return Err(Error::Dimension { expected: n, got: y.rows() });
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("rounding needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    let mut gram = Matrix::from_fn(n, n, |i, j| (kf * y[(i, j)] - 1.0) / (kf - 1.0));
    gram.symmetrize();
    let eig = spectra::symmetric_eigen(&gram, EigenMethod::Auto)?;
    let factors: Vec<(usize, f64)> =
        eig.values.iter().enumerate().filter(|(_, &l)| l > 0.0).map(|(c, &l)| (c, l.sqrt())).collect();
    let v = Matrix::from_fn(n, factors.len(), |i, c| factors[c].1 * eig.vectors[(i, factors[c].0)]);

    let mut best: Option<RoundedCut> = None;
    let mut scores = vec![0.0; n * k];
    for t in 0..trials.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let directions: Vec<Vec<f64>> =
            (0..k).map(|_| (0..v.cols()).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        for i in 0..n {
            let row = v.row(i);
            for (p, r) in directions.iter().enumerate() {
                scores[i * k + p] = row.iter().zip(r).map(|(a, b)| a * b).sum();
            }
        }
        let assignment: Vec<usize> = (0..n)
            .map(|i| {
                let s = &scores[i * k..(i + 1) * k];
                (1..k).fold(0, |arg, p| if s[p] > s[arg] { p } else { arg })
            })
            .collect();
        let partition = Partition::new(assignment, k)?.canonical();
        let value = cut_weight(g, &partition)?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(RoundedCut { partition: partition.assignment().to_vec(), k, value, trial: t });
        }
    }
    Ok(best.expect("at least one trial"))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub name: String,
    pub value: f64,
    pub absolute_gap: f64,
    pub relative_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub graph: String,
    pub n: usize,
    pub k: usize,
    pub exact: f64,
    pub rows: Vec<GapRow>,
}

impl GapReport {
    pub fn row(&self, name: &str) -> Option<&GapRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gap report serializes")
    }

    /// Aligned text table.
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{} (n = {}, k = {})", self.graph, self.n, self.k);
        let _ = writeln!(out, "{:<width$}  {:>12}  {:>12}  {:>10}", "bound", "value", "abs gap", "rel gap");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.4}  {:>12.4}  {:>10.4}",
                r.name, r.value, r.absolute_gap, r.relative_gap
            );
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct GapOptions {
    pub solver: SolverOptions,
    /// Include triangle and independent-set cuts.
    pub cuts: bool,
    pub rounding_trials: usize,
    pub seed: u64,
    pub work_cap: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            solver: SolverOptions::default(),
            cuts: true,
            rounding_trials: 1000,
            seed: 0,
            work_cap: DEFAULT_WORK_CAP,
        }
    }
}

/// Exact value against every bound and the best rounded cut.
pub fn gap_report(g: &Graph, k: usize, opts: &GapOptions) -> Result<GapReport> {
    let exact = brute_force_maxkcut_with_cap(g, k, opts.work_cap)?.value;
    let mut values: Vec<(String, f64)> = Vec::new();
    values.push(("exact".into(), exact));
    values.push(("eigenvalue bound".into(), bounds::eigenvalue_bound(g, k)?.value));
    let perturbed = sdp::solve(&relax::build(g, k, RelaxationKind::PerturbedSdp)?, &opts.solver)?;
    values.push(("perturbed".into(), perturbed.objective_value));
    let main = sdp::solve(&relax::build(g, k, RelaxationKind::MainSdp)?, &opts.solver)?;
    values.push(("main sdp".into(), main.objective_value));
    if opts.cuts && g.n() >= 3 {
        let tri = relax::cutting_plane_loop(g, k, RelaxationKind::MainSdp, &CutOptions::all_triangles(), &opts.solver)?;
        values.push(("+triangles".into(), tri.solution.objective_value));
        let cuts = CutOptions::all_triangles().with_independent_sets();
        match relax::cutting_plane_loop(g, k, RelaxationKind::MainSdp, &cuts, &opts.solver) {
            Ok(both) => values.push(("+independent sets".into(), both.solution.objective_value)),
            Err(Error::CapExceeded { .. } | Error::InvalidParameter(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let rounded = hyperplane_round(&main.y, g, k, opts.rounding_trials, opts.seed)?;
    values.push(("best rounded".into(), rounded.value));
    let rows = values
        .into_iter()
        .map(|(name, value)| {
            let absolute_gap = value - exact;
            let relative_gap = if exact != 0.0 { absolute_gap / exact } else { 0.0 };
            GapRow { name, value, absolute_gap, relative_gap }
        })
        .collect();
    Ok(GapReport { graph: g.name().unwrap_or("graph").to_string(), n: g.n(), k, exact, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumeration_size(5, 2), 16.0);
        assert_eq!(enumeration_size(4, 4), 15.0);
        assert_eq!(enumeration_size(3, 3), 5.0);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_maxkcut(&catalogue::complete(4).unwrap(), 2).unwrap().value, 4.0);
        assert_eq!(brute_force_maxkcut(&catalogue::cycle(5).unwrap(), 2).unwrap().value, 4.0);
        assert_eq!(brute_force_maxkcut(&catalogue::petersen().unwrap(), 2).unwrap().value, 12.0);
        assert_eq!(brute_force_maxkcut(&catalogue::petersen().unwrap(), 3).unwrap().value, 15.0);
        assert_eq!(brute_force_maxkcut(&catalogue::complete(7).unwrap(), 3).unwrap().value, 16.0);
        let k32 = catalogue::complete_multipartite(3, 2).unwrap();
        assert_eq!(brute_force_maxkcut(&k32, 3).unwrap().value, 12.0);
    }

    #[test]
    fn brute_force_is_canonical_and_lexicographically_first() {
        let r = brute_force_maxkcut(&catalogue::cycle(4).unwrap(), 2).unwrap();
        assert_eq!(r.partition, vec![0, 1, 0, 1]);
        let r = brute_force_maxkcut(&catalogue::complete(4).unwrap(), 2).unwrap();
        assert_eq!(r.partition, vec![0, 0, 1, 1]);
        let r = brute_force_maxkcut(&catalogue::complete(4).unwrap(), 3).unwrap();
        assert_eq!(r.partition, vec![0, 0, 1, 2]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = catalogue::cycle(30).unwrap();
        assert!(matches!(brute_force_maxkcut_with_cap(&g, 2, 1e6), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn rounding_degenerate_and_deterministic() {
        let g = catalogue::cycle(5).unwrap();
        let r = hyperplane_round(&Matrix::ones(5), &g, 2, 20, 7).unwrap();
        assert_eq!(r.value, 0.0);
        let y = Matrix::identity(5);
        let a = hyperplane_round(&y, &g, 3, 50, 11).unwrap();
        let b = hyperplane_round(&y, &g, 3, 50, 11).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.trial, b.trial);
    }

    #[test]
    fn rounding_reaches_pentagon_optimum() {
        let g = catalogue::cycle(5).unwrap();
        let sol =
            sdp::solve(&relax::build(&g, 2, RelaxationKind::MainSdp).unwrap(), &SolverOptions::default()).unwrap();
        let r = hyperplane_round(&sol.y, &g, 2, 1000, 0).unwrap();
        assert_eq!(r.value, 4.0);
        assert!(r.value <= sol.objective_value + 1e-6);
    }

    #[test]
    fn gap_report_for_complete_multipartite() {
        let g = catalogue::complete_multipartite(3, 2).unwrap();
        let opts = GapOptions { cuts: false, ..GapOptions::default() };
        let report = gap_report(&g, 3, &opts).unwrap();
        assert_eq!(report.exact, 12.0);
        assert!(report.row("eigenvalue bound").unwrap().absolute_gap.abs() < 1e-9);
        assert!(report.to_table().contains("best rounded"));
        assert!(report.to_json().contains("\"exact\""));
    }
}

//! Closed-form bounds: the Laplacian eigenvalue bound on max-k-cut, the
//! chromatic number bound derived from it, the Hoffman bound, the
//! strongly-regular closed form, and the exact max-k-cut of complete graphs.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectra;

/// Slack used when snapping a real bound to an integer.
pub const INTEGER_SNAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    UpperBoundMaxkcut,
    LowerBoundChromatic,
    Exact,
}

/// Where a bound value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// `n(k−1)/(2k) · λmax(L)`.
    EigenvalueBound,
    /// `1 + 2|E| / (n λmax(L) − 2|E|)`.
    LaplacianChromatic,
    Hoffman,
    SrgClosedForm,
    CompleteGraphExact,
    MainSdp,
    FriezeJerrum,
    EigSdp,
    PerturbedSdp,
    BruteForce,
}

impl BoundSource {
    pub fn kind(self) -> BoundKind {
        match self {
            BoundSource::LaplacianChromatic | BoundSource::Hoffman => BoundKind::LowerBoundChromatic,
            BoundSource::CompleteGraphExact | BoundSource::BruteForce => BoundKind::Exact,
            _ => BoundKind::UpperBoundMaxkcut,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::EigenvalueBound => "eigenvalue_bound",
            BoundSource::LaplacianChromatic => "laplacian_chromatic",
            BoundSource::Hoffman => "hoffman",
            BoundSource::SrgClosedForm => "srg_closed_form",
            BoundSource::CompleteGraphExact => "complete_graph_exact",
            BoundSource::MainSdp => "main_sdp",
            BoundSource::FriezeJerrum => "frieze_jerrum",
            BoundSource::EigSdp => "eig_sdp",
            BoundSource::PerturbedSdp => "perturbed_sdp",
            BoundSource::BruteForce => "brute_force",
        }
    }
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub kind: BoundKind,
    pub source: BoundSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Integer form usable as a bound (ceiling for lower bounds).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integer_value: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    pub metadata: BTreeMap<String, Value>,
}

impl BoundReport {
    pub fn new(source: BoundSource, value: f64, k: Option<usize>) -> Self {
        BoundReport {
            value,
            kind: source.kind(),
            source,
            k,
            integer_value: None,
            flags: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    pub fn metadata_f64(&self, key: &str) -> Option<f64> {
        self.metadata.get(key).and_then(Value::as_f64)
    }
}

/// Ceiling that ignores floating-point noise just above an integer.
pub fn snapped_ceil(x: f64) -> i64 {
    (x - INTEGER_SNAP).ceil() as i64
}

/// Floor that ignores floating-point noise just below an integer.
pub fn snapped_floor(x: f64) -> i64 {
    (x + INTEGER_SNAP).floor() as i64
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k < 2 || k > g.n() {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n = {}, got k = {k}", g.n())));
    }
    Ok(())
}

/// `n(k−1)/(2k) · λmax(L)`, an upper bound on the max-k-cut.
pub fn eigenvalue_bound(g: &Graph, k: usize) -> Result<BoundReport> {
    check_k(g, k)?;
    let lambda = spectra::lambda_max(g);
    let n = g.n() as f64;
    let value = n * (k as f64 - 1.0) / (2.0 * k as f64) * lambda;
    Ok(BoundReport::new(BoundSource::EigenvalueBound, value, Some(k)).with("lambda_max", lambda))
}

/// `χ(G) ≥ 1 + 2|E| / (n λmax(L) − 2|E|)`. For weighted graphs `2|E|` is the
/// total weighted degree and the report is flagged.
pub fn chromatic_lower_bound(g: &Graph) -> Result<BoundReport> {
    let lap = g.laplacian();
    let two_e = lap.degree_sum;
    if two_e == 0.0 {
        let mut r = BoundReport::new(BoundSource::LaplacianChromatic, 1.0, None).flag("edgeless");
        r.integer_value = Some(1);
        return Ok(r);
    }
    let lambda = spectra::lambda_max(g);
    let n = g.n() as f64;
    let denom = n * lambda - two_e;
    if denom <= 0.0 {
        return Err(Error::Solver(format!("degenerate chromatic bound: n·λmax − 2|E| = {denom}")));
    }
    let value = 1.0 + two_e / denom;
    let mut r = BoundReport::new(BoundSource::LaplacianChromatic, value, None)
        .with("lambda_max", lambda)
        .with("degree_sum", two_e);
    if !g.is_unweighted() {
        r = r.flag("weighted: |E| replaced by total edge weight");
    }
    r.integer_value = Some(snapped_ceil(value));
    Ok(r)
}

/// `χ(G) ≥ 1 − θmax(A)/θmin(A)`.
pub fn hoffman_bound(g: &Graph) -> Result<BoundReport> {
    if g.edge_count() == 0 {
        return Err(Error::InvalidParameter("Hoffman bound needs at least one edge".into()));
    }
    let theta = spectra::symmetric_eigenvalues(g.weights())?;
    let (theta_min, theta_max) = (theta[0], theta[theta.len() - 1]);
    let value = 1.0 - theta_max / theta_min;
    let mut r =
        BoundReport::new(BoundSource::Hoffman, value, None).with("theta_max", theta_max).with("theta_min", theta_min);
    r.integer_value = Some(snapped_ceil(value));
    Ok(r)
}

/// Parameters `(n, κ, λ, μ)` of a strongly regular graph with its restricted
/// eigenvalues `r ≥ 0 > s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SrgParameters {
    pub n: usize,
    pub kappa: usize,
    pub lambda: usize,
    pub mu: usize,
    pub r: f64,
    pub s: f64,
}

impl SrgParameters {
    pub fn new(n: usize, kappa: usize, lambda: usize, mu: usize) -> Result<Self> {
        let infeasible =
            |why: &str| Error::InvalidParameter(format!("infeasible SRG({n},{kappa},{lambda},{mu}): {why}"));
        if kappa == 0 || kappa + 1 >= n {
            return Err(infeasible("graph would be edgeless or complete"));
        }
        if lambda + 1 > kappa || (n - kappa - 1) * mu != kappa * (kappa - lambda - 1) {
            return Err(infeasible("(n−κ−1)μ ≠ κ(κ−λ−1)"));
        }
        let b = lambda as f64 - mu as f64;
        let c = kappa as f64 - mu as f64;
        let disc = b * b + 4.0 * c;
        if disc < 0.0 {
            return Err(infeasible("restricted eigenvalues are not real"));
        }
        let r = 0.5 * (b + disc.sqrt());
        let s = 0.5 * (b - disc.sqrt());
        if !(r >= 0.0 && s < 0.0) {
            return Err(infeasible("need r >= 0 > s"));
        }
        Ok(SrgParameters { n, kappa, lambda, mu, r, s })
    }

    /// Detects strong regularity of an unweighted graph.
    pub fn from_graph(g: &Graph) -> Option<Self> {
        if !g.is_unweighted() {
            return None;
        }
        let n = g.n();
        let kappa = g.regular_degree()? as usize;
        let adj = |i: usize, j: usize| g.weight(i, j) > 0.0;
        let mut lambda = None;
        let mut mu = None;
        for i in 0..n {
            for j in i + 1..n {
                let common = (0..n).filter(|&v| adj(i, v) && adj(j, v)).count();
                let slot = if adj(i, j) { &mut lambda } else { &mut mu };
                match slot {
                    None => *slot = Some(common),
                    Some(c) if *c != common => return None,
                    _ => {}
                }
            }
        }
        SrgParameters::new(n, kappa, lambda?, mu?).ok()
    }
}

/// mainSDP value of a strongly regular graph:
/// `min{ n(k−1)/(2k) (κ − s), κ n / 2 }`.
pub fn srg_sdp_bound(p: &SrgParameters, k: usize) -> Result<BoundReport> {
    if k < 2 || k > p.n {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n = {}, got k = {k}", p.n)));
    }
    let n = p.n as f64;
    let kappa = p.kappa as f64;
    let kf = k as f64;
    let eigen_term = n * (kf - 1.0) / (2.0 * kf) * (kappa - p.s);
    let edge_term = 0.5 * kappa * n;
    let eigen_active = eigen_term <= edge_term;
    Ok(BoundReport::new(BoundSource::SrgClosedForm, eigen_term.min(edge_term), Some(k))
        .with("eigenvalue_term", eigen_term)
        .with("edge_term", edge_term)
        .with("active_term", if eigen_active { "eigenvalue" } else { "edges" })
        .with("ratio_k", (kf - 1.0) / kf)
        .with("ratio_spectrum", kappa / (kappa - p.s)))
}

/// Exact max-k-cut of `K_n`, with the comparison against the rounded
/// eigenvalue bound `⌊n²(k−1)/(2k)⌋`.
pub fn complete_graph_maxkcut(n: usize, k: usize) -> Result<BoundReport> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n = {n}, got k = {k}")));
    }
    let (n128, k128) = (n as i128, k as i128);
    let e = n128 % k128;
    // Balanced part sizes: e parts of ⌈n/k⌉ and k−e parts of ⌊n/k⌋.
    let small = n128 / k128;
    let squares = e * (small + 1) * (small + 1) + (k128 - e) * small * small;
    let exact = (n128 * n128 - squares) / 2;
    let numerator = n128 * n128 * (k128 - 1) - e * (k128 - e);
    debug_assert_eq!(numerator % (2 * k128), 0);
    debug_assert_eq!(numerator / (2 * k128), exact);
    let rounded_bound = n128 * n128 * (k128 - 1) / (2 * k128);
    let predicate = e * (k128 - e) < 2 * k128;
    let mut r = BoundReport::new(BoundSource::CompleteGraphExact, exact as f64, Some(k))
        .with("e", e as i64)
        .with("eigenvalue_bound", (n128 * n128 * (k128 - 1)) as f64 / (2 * k128) as f64)
        .with("rounded_eigenvalue_bound", rounded_bound as i64)
        .with("rounded_bound_equals_exact", rounded_bound == exact)
        .with("predicate_e_gap_below_one", predicate);
    r.integer_value = Some(exact as i64);
    Ok(r)
}

/// True when the eigenvalue bound is strictly below the total edge weight,
/// which certifies `χ(G) ≥ k + 1`.
pub fn maxkcut_feasibility_flag(g: &Graph, k: usize) -> Result<bool> {
    let bound = eigenvalue_bound(g, k)?.value;
    Ok(bound < g.total_weight() - INTEGER_SNAP)
}

//! Graphs of the q-ary Hamming scheme and their Kravchuk spectra.
//!
//! Vertex `x = (x_1, …, x_d)` with `x_t ∈ {0, …, q−1}` is numbered
//! `Σ_t x_t · q^(t−1)`, so the first coordinate is the least significant digit.
//! All Kravchuk values and multiplicities are exact big integers.

use std::thread;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::bounds;
use crate::error::{Error, Result};
use crate::graph::{cut_weight, Graph, Partition};
use crate::relax::{self, RelaxationKind};
use crate::sdp::SolverOptions;
use crate::spectra;

/// Default cap on `q^d` for explicit graph construction.
pub const DEFAULT_VERTEX_CAP: usize = 4096;

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn pow(base: i64, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

fn check_dq(d: usize, q: usize) -> Result<()> {
    if d == 0 || q < 2 {
        return Err(Error::InvalidParameter(format!("Hamming scheme needs d >= 1 and q >= 2, got d={d}, q={q}")));
    }
    Ok(())
}

/// `K_j(i) = Σ_h (−q)^h (q−1)^(j−h) C(d−h, j−h) C(i, h)`.
pub fn kravchuk(d: usize, q: usize, j: usize, i: usize) -> Result<BigInt> {
    check_dq(d, q)?;
    if i > d || j > d {
        return Err(Error::InvalidParameter(format!("need 0 <= i, j <= d, got i={i}, j={j}, d={d}")));
    }
    Ok(kravchuk_unchecked(d, q, j, i))
}

fn kravchuk_unchecked(d: usize, q: usize, j: usize, i: usize) -> BigInt {
    let q = q as i64;
    (0..=j.min(i)).map(|h| pow(-q, h) * pow(q - 1, j - h) * binomial(d - h, j - h) * binomial(i, h)).sum()
}

/// The full table `K[j][i] = K_j(i)` for `0 ≤ i, j ≤ d` with multiplicities.
#[derive(Clone, Debug)]
pub struct KravchukTable {
    pub d: usize,
    pub q: usize,
    values: Vec<Vec<BigInt>>,
    multiplicities: Vec<BigInt>,
}

impl KravchukTable {
    pub fn new(d: usize, q: usize) -> Result<Self> {
        check_dq(d, q)?;
        let values = (0..=d).map(|j| (0..=d).map(|i| kravchuk_unchecked(d, q, j, i)).collect()).collect();
        let multiplicities = (0..=d).map(|i| binomial(d, i) * pow(q as i64 - 1, i)).collect();
        Ok(KravchukTable { d, q, values, multiplicities })
    }

    pub fn value(&self, j: usize, i: usize) -> &BigInt {
        &self.values[j][i]
    }

    pub fn value_f64(&self, j: usize, i: usize) -> f64 {
        self.values[j][i].to_f64().unwrap_or(f64::NAN)
    }

    /// `m_i = C(d, i)(q−1)^i`.
    pub fn multiplicity(&self, i: usize) -> &BigInt {
        &self.multiplicities[i]
    }

    pub fn multiplicity_usize(&self, i: usize) -> usize {
        self.multiplicities[i].to_usize().unwrap_or(usize::MAX)
    }

    /// Checks the degree row, the multiplicity sum and the orthogonality
    /// relations `Σ_i m_i K_j(i) K_l(i) = δ_jl q^d C(d,j)(q−1)^j`.
    pub fn verify_identities(&self) -> bool {
        let (d, q) = (self.d, self.q);
        let qd = pow(q as i64, d);
        let degree = |j: usize| binomial(d, j) * pow(q as i64 - 1, j);
        if (0..=d).any(|j| self.values[j][0] != degree(j)) {
            return false;
        }
        if self.multiplicities.iter().sum::<BigInt>() != qd {
            return false;
        }
        for j in 0..=d {
            for l in j..=d {
                let s: BigInt =
                    (0..=d).map(|i| &self.multiplicities[i] * &self.values[j][i] * &self.values[l][i]).sum();
                let want = if j == l { &qd * degree(j) } else { BigInt::zero() };
                if s != want {
                    return false;
                }
            }
        }
        true
    }
}

/// Graph `H(d, q, j)`: d-tuples over a q-letter alphabet, adjacent when they
/// differ in exactly `j` positions.
pub fn hamming_graph(d: usize, q: usize, j: usize) -> Result<Graph> {
    hamming_graph_with_cap(d, q, j, DEFAULT_VERTEX_CAP)
}

pub fn hamming_graph_with_cap(d: usize, q: usize, j: usize, cap: usize) -> Result<Graph> {
    check_dq(d, q)?;
    if j == 0 || j > d {
        return Err(Error::InvalidParameter(format!("need 1 <= j <= d, got j={j}, d={d}")));
    }
    let n = vertex_count(d, q, cap)?;
    let digits: Vec<Vec<usize>> = (0..n).map(|v| to_digits(v, d, q)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let differing = digits[a].iter().zip(&digits[b]).filter(|(x, y)| x != y).count();
            if differing == j {
                edges.push((a, b));
            }
        }
    }
    Ok(Graph::from_unit_edges(n, &edges)?.with_name(format!("H({d},{q},{j})")))
}

fn vertex_count(d: usize, q: usize, cap: usize) -> Result<usize> {
    let n = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if n > cap as u128 {
        return Err(Error::CapExceeded {
            what: format!("H({d},{q},·) vertex count"),
            estimate: n as f64,
            cap: cap as f64,
        });
    }
    Ok(n as usize)
}

fn to_digits(mut v: usize, d: usize, q: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push(v % q);
        v /= q;
    }
    out
}

/// Whether `(d, q, j)` satisfies `j ≥ d − (d−1)/q` (and `j` even when `q = 2`).
pub fn in_conjecture_range(d: usize, q: usize, j: usize) -> bool {
    j >= 1 && j <= d && q * j + (d - 1) >= q * d && (q != 2 || j.is_multiple_of(2))
}

/// One row of the conjecture check for a fixed `j`.
#[derive(Clone, Debug)]
pub struct ConjectureRow {
    pub d: usize,
    pub q: usize,
    pub j: usize,
    pub in_hypothesis: bool,
    pub k_j1: BigInt,
    pub min_value: BigInt,
    /// Smallest `i` attaining the minimum.
    pub argmin: usize,
    /// `min_i K_j(i) = K_j(1)`.
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ConjectureReport {
    pub d: usize,
    pub q: usize,
    pub rows: Vec<ConjectureRow>,
}

impl ConjectureReport {
    /// True when every row inside the hypothesis passes.
    pub fn pass(&self) -> bool {
        self.rows.iter().filter(|r| r.in_hypothesis).all(|r| r.pass)
    }

    pub fn first_counterexample(&self) -> Option<&ConjectureRow> {
        self.rows.iter().find(|r| r.in_hypothesis && !r.pass)
    }
}

/// Tests whether `λ = K_j(0) − K_j(1)` is the largest Laplacian eigenvalue of
/// `H(d, q, j)`, i.e. whether `K_j(1)` is the smallest Kravchuk value, for
/// every `j`. Rows outside the hypothesis are informational.
pub fn check_conjecture(d: usize, q: usize) -> Result<ConjectureReport> {
    let table = KravchukTable::new(d, q)?;
    let rows = (1..=d)
        .map(|j| {
            let (argmin, min_value) = (0..=d)
                .map(|i| (i, table.value(j, i)))
                .fold((0, table.value(j, 0)), |best, cur| if cur.1 < best.1 { cur } else { best });
            let k_j1 = table.value(j, 1).clone();
            ConjectureRow {
                d,
                q,
                j,
                in_hypothesis: in_conjecture_range(d, q, j),
                pass: *min_value == k_j1,
                k_j1,
                min_value: min_value.clone(),
                argmin,
            }
        })
        .collect();
    Ok(ConjectureReport { d, q, rows })
}

/// Runs [`check_conjecture`] for all `1 ≤ d ≤ dmax`, `2 ≤ q ≤ qmax`, split
/// across `threads` workers. Reports come back ordered by `(d, q)`.
pub fn conjecture_grid(dmax: usize, qmax: usize, threads: usize) -> Vec<ConjectureReport> {
    let pairs: Vec<(usize, usize)> = (1..=dmax).flat_map(|d| (2..=qmax).map(move |q| (d, q))).collect();
    let threads = threads.max(1).min(pairs.len().max(1));
    let chunk = pairs.len().div_ceil(threads).max(1);
    let mut reports: Vec<ConjectureReport> = thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(d, q)| check_conjecture(d, q).expect("valid grid parameters"))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("conjecture worker panicked")).collect()
    });
    reports.sort_by_key(|r| (r.d, r.q));
    reports
}

/// `λ = K_j(0) − K_j(1)`, checked against `q (q−1)^(j−1) C(d−1, j−1)`.
pub fn hamming_lambda(d: usize, q: usize, j: usize) -> Result<BigInt> {
    if j == 0 || j > d {
        return Err(Error::InvalidParameter(format!("need 1 <= j <= d, got j={j}, d={d}")));
    }
    let lambda = kravchuk(d, q, j, 0)? - kravchuk(d, q, j, 1)?;
    let closed = BigInt::from(q) * pow(q as i64 - 1, j - 1) * binomial(d - 1, j - 1);
    assert_eq!(lambda, closed, "Kravchuk difference disagrees with closed form");
    Ok(lambda)
}

/// The partition by first coordinate, `V_i = {x : x_1 = i}`, with its cut
/// weight in `H(d, q, j)`.
pub fn first_coordinate_qcut(d: usize, q: usize, j: usize) -> Result<(Partition, f64)> {
    first_coordinate_qcut_with_cap(d, q, j, DEFAULT_VERTEX_CAP)
}

pub fn first_coordinate_qcut_with_cap(d: usize, q: usize, j: usize, cap: usize) -> Result<(Partition, f64)> {
    let g = hamming_graph_with_cap(d, q, j, cap)?;
    let partition = Partition::new((0..g.n()).map(|v| v % q).collect(), q)?;
    let value = cut_weight(&g, &partition)?;
    Ok((partition, value))
}

/// Number of edges cut by the first-coordinate partition, counted without
/// building the graph: `½ q(q−1) q^(d−1) C(d−1, j−1)(q−1)^(j−1)`.
pub fn first_coordinate_cut_count(d: usize, q: usize, j: usize) -> BigInt {
    let qi = q as i64;
    pow(qi, d - 1) * binomial(d - 1, j - 1) * pow(qi - 1, j - 1) * BigInt::from(q * (q - 1)) / BigInt::from(2)
}

/// Outcome of one numerical mainSDP solve inside a tightness certificate.
#[derive(Clone, Debug)]
pub struct SdpCheck {
    pub k: usize,
    pub solved: f64,
    pub eigenvalue_bound: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug)]
pub struct TightnessCertificate {
    pub d: usize,
    pub q: usize,
    pub j: usize,
    pub n: usize,
    pub lambda: BigInt,
    /// Numerical `λmax(L)` of the constructed graph, when `n` is at most
    /// [`CertificateOptions::spectral_max_order`].
    pub lambda_max_numeric: Option<f64>,
    pub cut_value: f64,
    /// `n (q−1) λ / (2q)` as an exact fraction `numerator / (2q)`.
    pub bound_numerator: BigInt,
    pub bound_denominator: BigInt,
    /// Cut value equals the max-q-cut eigenvalue bound exactly.
    pub tight: bool,
    pub sdp_checks: Vec<SdpCheck>,
}

/// Options for [`hamming_tightness_certificate`].
#[derive(Clone, Debug)]
pub struct CertificateOptions {
    pub vertex_cap: usize,
    /// Solve mainSDP for every `2 ≤ k ≤ q` when `q^d` is at most this.
    pub sdp_max_order: usize,
    /// Compute `λmax(L)` numerically when `q^d` is at most this.
    pub spectral_max_order: usize,
    pub sdp_tolerance: f64,
    pub solver: SolverOptions,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            vertex_cap: DEFAULT_VERTEX_CAP,
            sdp_max_order: 32,
            spectral_max_order: 1024,
            sdp_tolerance: 1e-5,
            solver: SolverOptions::default(),
        }
    }
}

/// Certifies that the first-coordinate q-cut meets the eigenvalue bound for
/// `k = q`, and (for small graphs) that mainSDP equals the eigenvalue bound for
/// every `k ≤ q`. Refused when `(d, q, j)` is outside the hypothesis or the
/// Kravchuk check for this `j` fails.
pub fn hamming_tightness_certificate(
    d: usize,
    q: usize,
    j: usize,
    opts: &CertificateOptions,
) -> Result<TightnessCertificate> {
    if !in_conjecture_range(d, q, j) {
        return Err(Error::InvalidParameter(format!(
            "H({d},{q},{j}) is outside the range j >= d - (d-1)/q (j even for q = 2); certificate refused"
        )));
    }
    let report = check_conjecture(d, q)?;
    let row = &report.rows[j - 1];
    if !row.pass {
        return Err(Error::InvalidParameter(format!(
            "K_{j}(1) is not the smallest Kravchuk value for (d, q) = ({d}, {q}) (minimum at i = {}); \
             λ is not certified maximal, certificate refused",
            row.argmin
        )));
    }
    let lambda = hamming_lambda(d, q, j)?;
    let g = hamming_graph_with_cap(d, q, j, opts.vertex_cap)?;
    let n = g.n();
    let partition = Partition::new((0..n).map(|v| v % q).collect(), q)?;
    let cut_value = cut_weight(&g, &partition)?;

    let bound_numerator = BigInt::from(n) * BigInt::from(q - 1) * &lambda;
    let bound_denominator = BigInt::from(2 * q);
    let cut_exact = BigInt::from(cut_value.round() as u128);
    let tight = cut_value.fract() == 0.0 && &cut_exact * &bound_denominator == bound_numerator;

    let lambda_max_numeric = (n <= opts.spectral_max_order).then(|| spectra::lambda_max(&g));

    let mut sdp_checks = Vec::new();
    if n <= opts.sdp_max_order {
        for k in 2..=q.min(n) {
            let bound = bounds::eigenvalue_bound(&g, k)?.value;
            let model = relax::build(&g, k, RelaxationKind::MainSdp)?;
            let sol = crate::sdp::solve(&model, &opts.solver)?;
            sdp_checks.push(SdpCheck {
                k,
                solved: sol.objective_value,
                eigenvalue_bound: bound,
                agrees: (sol.objective_value - bound).abs() <= opts.sdp_tolerance,
            });
        }
    }

    Ok(TightnessCertificate {
        d,
        q,
        j,
        n,
        lambda,
        lambda_max_numeric,
        cut_value,
        bound_numerator,
        bound_denominator,
        tight,
        sdp_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kravchuk_examples() {
        // K_d(i) = (−1)^i (q−1)^(d−i)
        for (d, q) in [(3, 2), (4, 3), (5, 5)] {
            for i in 0..=d {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                assert_eq!(kravchuk(d, q, d, i).unwrap(), BigInt::from(sign) * pow(q as i64 - 1, d - i));
            }
        }
        // K_j(0) = C(d,j)(q−1)^j
        assert_eq!(kravchuk(6, 4, 3, 0).unwrap(), binomial(6, 3) * pow(3, 3));
        let k1: Vec<_> = (0..=3).map(|i| kravchuk(3, 2, 1, i).unwrap()).collect();
        assert_eq!(k1, [3, 1, -1, -3].map(BigInt::from));
        assert!(kravchuk(3, 1, 1, 1).is_err());
        assert!(kravchuk(3, 2, 4, 1).is_err());
    }

    #[test]
    fn table_identities() {
        for d in 1..=8 {
            for q in 2..=6 {
                assert!(KravchukTable::new(d, q).unwrap().verify_identities(), "d={d} q={q}");
            }
        }
    }

    #[test]
    fn hamming_graph_shapes() {
        let c4 = hamming_graph(2, 2, 1).unwrap();
        assert_eq!((c4.n(), c4.edge_count(), c4.regular_degree()), (4, 4, Some(2.0)));
        assert_eq!(crate::graph::connected_components(&c4).len(), 1);
        let h = hamming_graph(2, 3, 2).unwrap();
        assert_eq!((h.n(), h.regular_degree()), (9, Some(4.0)));
        let h = hamming_graph(3, 2, 2).unwrap();
        assert_eq!((h.n(), h.regular_degree()), (8, Some(3.0)));
        assert!(matches!(hamming_graph(13, 2, 1), Err(Error::CapExceeded { .. })));
        assert!(hamming_graph(2, 2, 3).is_err());
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(hamming_lambda(2, 3, 1).unwrap(), BigInt::from(3));
        assert_eq!(hamming_lambda(3, 2, 2).unwrap(), BigInt::from(4));
        for (d, q) in [(2, 3), (4, 2), (3, 5)] {
            assert_eq!(hamming_lambda(d, q, d).unwrap(), BigInt::from(q) * pow(q as i64 - 1, d - 1));
        }
    }

    #[test]
    fn hypothesis_range() {
        assert!(!in_conjecture_range(4, 2, 3));
        assert!(in_conjecture_range(4, 2, 4));
        assert!(in_conjecture_range(1, 3, 1));
        assert!(!in_conjecture_range(1, 2, 1));
        // d=5, q=3: j >= 5 - 4/3 = 3.67
        assert!(!in_conjecture_range(5, 3, 3));
        assert!(in_conjecture_range(5, 3, 4));
    }

    #[test]
    fn conjecture_small_cases() {
        let r = check_conjecture(1, 2).unwrap();
        assert!(r.pass());
        assert!(!r.rows[0].in_hypothesis);
        for d in 1..=6 {
            for q in 2..=5 {
                let r = check_conjecture(d, q).unwrap();
                assert!(r.pass(), "d={d} q={q}");
                assert!(r.rows[d - 1].pass, "j = d always passes");
            }
        }
    }

    #[test]
    fn first_coordinate_cuts() {
        assert_eq!(first_coordinate_qcut(2, 3, 2).unwrap().1, 18.0);
        assert_eq!(first_coordinate_qcut(1, 2, 1).unwrap().1, 1.0);
        assert_eq!(first_coordinate_qcut(2, 2, 2).unwrap().1, 2.0);
        assert_eq!(first_coordinate_qcut(2, 3, 1).unwrap().1, 9.0);
        for (d, q, j) in [(2, 3, 2), (3, 3, 3), (4, 2, 2), (3, 4, 2)] {
            let (_, cut) = first_coordinate_qcut(d, q, j).unwrap();
            assert_eq!(BigInt::from(cut as u64), first_coordinate_cut_count(d, q, j));
        }
    }
}

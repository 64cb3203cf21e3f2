//! Dense symmetric eigensolvers and the spectral idempotents of a Laplacian.
//!
//! Two solvers are provided: cyclic Jacobi rotations (used for n ≤ 64) and
//! Householder tridiagonalization followed by implicit QL iteration (larger n,
//! and the inner loop of the SDP solver).

use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;

/// Largest order handled by Jacobi under [`EigenMethod::Auto`].
pub const JACOBI_MAX_ORDER: usize = 64;

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_QL_ITERATIONS_PER_VALUE: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Auto,
    Jacobi,
    TridiagonalQl,
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    /// `Q diag(f(λ)) Qᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (c, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            add_outer(&mut out, &self.vectors, c, w);
        }
        out
    }
}

/// `out += w · q_c q_cᵀ` for column `c` of `q`.
fn add_outer(out: &mut Matrix, q: &Matrix, c: usize, w: f64) {
    let n = q.rows();
    let col: Vec<f64> = (0..n).map(|i| q[(i, c)]).collect();
    for i in 0..n {
        let wi = w * col[i];
        let row = out.row_mut(i);
        for (o, cj) in row.iter_mut().zip(&col) {
            *o += wi * cj;
        }
    }
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension { expected: m.rows(), got: m.cols() });
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * (1.0 + m.max_abs()) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
pub fn symmetric_eigen(m: &Matrix, method: EigenMethod) -> Result<EigenDecomposition> {
    check_symmetric(m)?;
    let n = m.rows();
    let use_jacobi = match method {
        EigenMethod::Auto => n <= JACOBI_MAX_ORDER,
        EigenMethod::Jacobi => true,
        EigenMethod::TridiagonalQl => false,
    };
    let (values, vectors) = if use_jacobi { jacobi(m)? } else { tridiagonal_ql(m, true)? };
    Ok(sorted(values, vectors))
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation for large n.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let mut values = if m.rows() <= JACOBI_MAX_ORDER { jacobi(m)?.0 } else { tridiagonal_ql(m, false)?.0 };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn sorted(values: Vec<f64>, vectors: Matrix) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = Matrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    EigenDecomposition { values: sorted_values, vectors: sorted_vectors }
}

fn jacobi(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = m.rows();
    let mut a = m.clone();
    a.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += a[(p, q)] * a[(p, q)];
            }
        }
        s.sqrt()
    };
    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_norm(&a) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let residual = off_norm(&a);
        if residual > 1e-12 * scale {
            return Err(Error::NoConvergence { iterations: MAX_JACOBI_SWEEPS, residual });
        }
    }
    Ok((a.diag(), v))
}

/// Householder reduction to tridiagonal form followed by implicit QL with
/// Wilkinson-style shifts. Returns unsorted eigenvalues and, when requested,
/// the eigenvector matrix (columns). Without vectors the returned matrix is
/// empty.
pub(crate) fn tridiagonal_ql(m: &Matrix, want_vectors: bool) -> Result<(Vec<f64>, Matrix)> {
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let mut v = m.clone();
    v.symmetrize();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut v, &mut d, &mut e, want_vectors);
    ql_implicit(&mut d, &mut e, if want_vectors { Some(&mut v) } else { None })?;
    if want_vectors {
        Ok((d, v))
    } else {
        Ok((d, Matrix::zeros(0, 0)))
    }
}

fn householder_tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        // The tridiagonal diagonal sits on the diagonal of `v`.
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = v[(j, j)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn ql_implicit(d: &mut [f64], e: &mut [f64], mut v: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        let m = m.min(n - 1);
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS_PER_VALUE {
                    return Err(Error::NoConvergence { iterations, residual: e[l].abs() });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let vk = v.row_mut(k);
                            let h = vk[i + 1];
                            vk[i + 1] = s * vk[i] + c * h;
                            vk[i] = c * vk[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Distinct eigenvalues with multiplicities and a grouped orthonormal eigenbasis.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub distinct_values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Orthonormal eigenvectors as columns, grouped by eigenvalue.
    pub eigenbasis: Matrix,
    pub grouping_tolerance: f64,
    groups: Vec<Range<usize>>,
}

impl Spectrum {
    pub fn order(&self) -> usize {
        self.eigenbasis.rows()
    }

    /// Column range of the eigenbasis belonging to distinct value `i`.
    pub fn group(&self, i: usize) -> Range<usize> {
        self.groups[i].clone()
    }

    pub fn max(&self) -> f64 {
        *self.distinct_values.last().expect("non-empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.distinct_values[0]
    }

    /// Orthogonal projector onto the eigenspace of distinct value `i`.
    pub fn projector(&self, i: usize) -> Matrix {
        let n = self.order();
        let mut p = Matrix::zeros(n, n);
        for c in self.group(i) {
            add_outer(&mut p, &self.eigenbasis, c, 1.0);
        }
        p
    }
}

/// Default eigenvalue merge threshold `1e-7 · (1 + ‖M‖∞)`.
pub fn default_grouping_tolerance(m: &Matrix) -> f64 {
    1e-7 * (1.0 + m.norm_inf())
}

pub fn eigendecompose(m: &Matrix) -> Result<Spectrum> {
    eigendecompose_with(m, default_grouping_tolerance(m))
}

/// Eigendecomposition with eigenvalues closer than `tol` (chained) merged.
pub fn eigendecompose_with(m: &Matrix, tol: f64) -> Result<Spectrum> {
    let eig = symmetric_eigen(m, EigenMethod::Auto)?;
    let mut groups: Vec<Range<usize>> = Vec::new();
    for (i, &v) in eig.values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - eig.values[g.end - 1] <= tol => g.end = i + 1,
            _ => groups.push(i..i + 1),
        }
    }
    let distinct_values = groups.iter().map(|g| eig.values[g.clone()].iter().sum::<f64>() / g.len() as f64).collect();
    let multiplicities = groups.iter().map(|g| g.len()).collect();
    Ok(Spectrum { distinct_values, multiplicities, eigenbasis: eig.vectors, grouping_tolerance: tol, groups })
}

/// Largest Laplacian eigenvalue.
pub fn lambda_max(g: &Graph) -> f64 {
    let l = g.laplacian().matrix;
    let values = symmetric_eigenvalues(&l).expect("Laplacian is symmetric");
    values.last().copied().unwrap_or(0.0).max(0.0)
}

/// The basis of spectral idempotents of a Laplacian, with `F_0 = J/n`.
#[derive(Clone, Debug)]
pub struct IdempotentBasis {
    /// Eigenvalue attached to each idempotent; ascending, with a repeated 0
    /// when the graph is disconnected.
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub projectors: Vec<Matrix>,
}

impl IdempotentBasis {
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// The idempotent of the largest eigenvalue.
    pub fn top(&self) -> &Matrix {
        self.projectors.last().expect("non-empty basis")
    }
}

pub fn idempotent_basis(g: &Graph) -> Result<IdempotentBasis> {
    let l = g.laplacian().matrix;
    let spectrum = eigendecompose(&l)?;
    let n = g.n();
    let all_ones = Matrix::filled(n, n, 1.0 / n as f64);

    let mut values = Vec::new();
    let mut multiplicities = Vec::new();
    let mut projectors = Vec::new();
    for (i, (&lambda, &mult)) in spectrum.distinct_values.iter().zip(&spectrum.multiplicities).enumerate() {
        if i == 0 {
            // The kernel of a Laplacian contains u; split J/n off first.
            values.push(0.0);
            multiplicities.push(1);
            projectors.push(all_ones.clone());
            if mult > 1 {
                values.push(0.0);
                multiplicities.push(mult - 1);
                projectors.push(spectrum.projector(0).sub(&all_ones));
            }
        } else {
            values.push(lambda);
            multiplicities.push(mult);
            projectors.push(spectrum.projector(i));
        }
    }
    Ok(IdempotentBasis { values, multiplicities, projectors })
}

/// Whether the idempotent of `λmax(L)` has constant diagonal (max − min ≤ tol).
pub fn top_idempotent_diag_constant(g: &Graph, tol: f64) -> Result<bool> {
    let basis = idempotent_basis(g)?;
    let diag = basis.top().diag();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(hi - lo <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    fn residuals(m: &Matrix, eig: &EigenDecomposition) -> (f64, f64) {
        let q = &eig.vectors;
        let orth = q.transpose().matmul(q).sub(&Matrix::identity(m.rows())).max_abs();
        let lambda = Matrix::diagonal(&eig.values);
        let res = m.matmul(q).sub(&q.matmul(&lambda)).max_abs();
        (orth, res)
    }

    fn sample_matrix(n: usize, seed: u64) -> Matrix {
        // Small LCG so the unit tests stay dependency-free.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = Matrix::from_fn(n, n, |_, _| next());
        m.symmetrize();
        m
    }

    #[test]
    fn both_methods_agree() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (40, 5)] {
            let m = sample_matrix(n, seed);
            let a = symmetric_eigen(&m, EigenMethod::Jacobi).unwrap();
            let b = symmetric_eigen(&m, EigenMethod::TridiagonalQl).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
            }
            for eig in [&a, &b] {
                let (orth, res) = residuals(&m, eig);
                assert!(orth < 1e-12 && res < 1e-11, "n={n}: {orth:e} {res:e}");
            }
            let only = tridiagonal_ql(&m, false).unwrap().0;
            let mut only = only;
            only.sort_by(f64::total_cmp);
            for (x, y) in only.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(symmetric_eigen(&m, EigenMethod::Auto), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn identity_has_one_distinct_value() {
        let s = eigendecompose(&Matrix::identity(3)).unwrap();
        assert_eq!(s.distinct_values.len(), 1);
        assert!((s.distinct_values[0] - 1.0).abs() < 1e-14);
        assert_eq!(s.multiplicities, vec![3]);
    }

    #[test]
    fn complete_graph_laplacian_spectrum() {
        let g = catalogue::complete(7).unwrap();
        let s = eigendecompose(&g.laplacian().matrix).unwrap();
        assert_eq!(s.multiplicities, vec![1, 6]);
        assert!(s.distinct_values[0].abs() < 1e-12);
        assert!((s.distinct_values[1] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn petersen_laplacian_spectrum() {
        let g = catalogue::petersen().unwrap();
        let s = eigendecompose(&g.laplacian().matrix).unwrap();
        assert_eq!(s.multiplicities, vec![1, 5, 4]);
        for (v, want) in s.distinct_values.iter().zip([0.0, 2.0, 5.0]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_max_examples() {
        let k32 = catalogue::complete_multipartite(3, 2).unwrap();
        assert!((lambda_max(&k32) - 6.0).abs() < 1e-12);
        let c5 = catalogue::cycle(5).unwrap();
        let want = 2.0 - 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((lambda_max(&c5) - want).abs() < 1e-12);
        assert!((want - 3.618034).abs() < 1e-6);
    }

    #[test]
    fn idempotents_of_single_edge() {
        let g = Graph::from_unit_edges(2, &[(0, 1)]).unwrap();
        let b = idempotent_basis(&g).unwrap();
        assert_eq!(b.len(), 2);
        let half = Matrix::filled(2, 2, 0.5);
        assert!(b.projectors[0].sub(&half).max_abs() < 1e-12);
        assert!(b.projectors[1].sub(&Matrix::identity(2).sub(&half)).max_abs() < 1e-12);
    }

    #[test]
    fn idempotents_split_kernel_of_disconnected_graph() {
        let k2 = Graph::from_unit_edges(2, &[(0, 1)]).unwrap();
        let g = k2.disjoint_union(&k2);
        let b = idempotent_basis(&g).unwrap();
        assert_eq!(b.values, vec![0.0, 0.0, b.values[2]]);
        assert_eq!(b.multiplicities, vec![1, 1, 2]);
        assert!(b.projectors[0].sub(&Matrix::filled(4, 4, 0.25)).max_abs() < 1e-12);
        assert!((b.projectors[1].trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_idempotent_diagonal() {
        assert!(top_idempotent_diag_constant(&catalogue::petersen().unwrap(), 1e-8).unwrap());
        assert!(top_idempotent_diag_constant(&catalogue::cycle(6).unwrap(), 1e-8).unwrap());
        let star = Graph::from_unit_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!top_idempotent_diag_constant(&star, 1e-8).unwrap());
    }
}

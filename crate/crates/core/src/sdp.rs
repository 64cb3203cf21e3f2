//! ADMM solver for the structured semidefinite programs produced by
//! [`crate::relax`].
//!
//! Every model is
//!
//! ```text
//! maximize  s · tr(C Y)
//! subject to  diag(Y) = d            (or tr(Y) = t)
//!             Y ⪰ 0                  (or kY − J ⪰ 0)
//!             Y ≥ B                  (entrywise, optional)
//!             Σ a_ij y_ij ≤ b        (cuts)
//! ```
//!
//! The solver works in the cone variable `X` (`X = Y` or `X = kY − J`), stored
//! as `svec(X)` with off-diagonal entries scaled by √2 so that the Euclidean
//! inner product matches the trace inner product. The iteration is the
//! operator-splitting scheme of OSQP with the PSD cone as an extra constraint
//! block: one linear solve, a box projection for the linear rows and an
//! eigenvalue-clipping projection for the cone per iteration.
//!
//! A rigorous upper bound on the optimum is derived from the dual iterate:
//! for any multipliers `y` of the linear rows, weak duality with the fixed
//! trace of `X` gives `h(y) + tr(X) · λmin(q + Aᵀy)`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spectra;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub enum DiagConstraint {
    /// `diag(Y) = d`.
    Entries(Vec<f64>),
    /// `tr(Y) = t`.
    Trace(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    /// `Y ⪰ 0`.
    Psd,
    /// `kY − J ⪰ 0`.
    ShiftedPsd { k: usize },
}

/// Sparse inequality `Σ a · y_ij ≤ rhs` over entries with `i ≤ j`. Each term
/// refers to the single matrix entry `y_ij`, not to `y_ij + y_ji`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub terms: Vec<(usize, usize, f64)>,
    pub rhs: f64,
}

impl Cut {
    pub fn lhs(&self, y: &Matrix) -> f64 {
        self.terms.iter().map(|&(i, j, a)| a * y[(i, j)]).sum()
    }

    /// Positive when the cut is violated.
    pub fn violation(&self, y: &Matrix) -> f64 {
        self.lhs(y) - self.rhs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpModel {
    pub n: usize,
    pub objective: Matrix,
    pub obj_scale: f64,
    pub diag: DiagConstraint,
    pub cone: Cone,
    /// Entrywise lower bound; `-inf` entries are ignored.
    pub lower: Option<Matrix>,
    pub cuts: Vec<Cut>,
}

impl SdpModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidParameter("SDP model needs n >= 1".into()));
        }
        if self.objective.rows() != n || self.objective.cols() != n {
            return Err(Error::Dimension { expected: n, got: self.objective.rows() });
        }
        if self.objective.asymmetry() > 1e-12 * (1.0 + self.objective.max_abs()) {
            return Err(Error::NotSymmetric(self.objective.asymmetry()));
        }
        if let DiagConstraint::Entries(d) = &self.diag {
            if d.len() != n {
                return Err(Error::Dimension { expected: n, got: d.len() });
            }
        }
        if let Cone::ShiftedPsd { k } = self.cone {
            if k < 2 {
                return Err(Error::InvalidParameter(format!("shifted cone needs k >= 2, got {k}")));
            }
        }
        if let Some(b) = &self.lower {
            if b.rows() != n || b.cols() != n {
                return Err(Error::Dimension { expected: n, got: b.rows() });
            }
        }
        for (c, cut) in self.cuts.iter().enumerate() {
            if cut.terms.iter().any(|&(i, j, _)| i > j || j >= n) {
                return Err(Error::InvalidParameter(format!("cut {c} has an entry outside the upper triangle")));
            }
            if !cut.rhs.is_finite() {
                return Err(Error::InvalidParameter(format!("cut {c} has a non-finite right-hand side")));
            }
        }
        Ok(())
    }

    pub fn objective_of(&self, y: &Matrix) -> f64 {
        self.obj_scale * self.objective.trace_product(y)
    }

    /// `Y` or `kY − J`, whichever must be PSD.
    pub fn cone_matrix(&self, y: &Matrix) -> Matrix {
        match self.cone {
            Cone::Psd => y.clone(),
            Cone::ShiftedPsd { k } => Matrix::from_fn(self.n, self.n, |i, j| k as f64 * y[(i, j)] - 1.0),
        }
    }

    /// Coefficients `(α, β)` with `Y = αX + βJ`.
    fn cone_map(&self) -> (f64, f64) {
        match self.cone {
            Cone::Psd => (1.0, 0.0),
            Cone::ShiftedPsd { k } => (1.0 / k as f64, 1.0 / k as f64),
        }
    }

    fn trace_y(&self) -> f64 {
        match &self.diag {
            DiagConstraint::Entries(d) => d.iter().sum(),
            DiagConstraint::Trace(t) => *t,
        }
    }

    /// Writes the model as plain text for cross-checking with other solvers.
    pub fn dump(&self, mut sink: impl Write) -> Result<()> {
        let num = |x: f64| format!("{x:.16e}");
        let mut out = String::new();
        let _ = writeln!(out, "kcut-sdp 1");
        let _ = writeln!(out, "n {}", self.n);
        let _ = writeln!(out, "obj_scale {}", num(self.obj_scale));
        let _ = writeln!(out, "objective");
        for i in 0..self.n {
            let row: Vec<String> = self.objective.row(i).iter().map(|&x| num(x)).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        match &self.diag {
            DiagConstraint::Entries(d) => {
                let vals: Vec<String> = d.iter().map(|&x| num(x)).collect();
                let _ = writeln!(out, "diag {}", vals.join(" "));
            }
            DiagConstraint::Trace(t) => {
                let _ = writeln!(out, "trace {}", num(*t));
            }
        }
        match self.cone {
            Cone::Psd => {
                let _ = writeln!(out, "cone psd");
            }
            Cone::ShiftedPsd { k } => {
                let _ = writeln!(out, "cone shifted_psd {k}");
            }
        }
        match &self.lower {
            None => {
                let _ = writeln!(out, "lower none");
            }
            Some(b) => {
                let _ = writeln!(out, "lower dense");
                for i in 0..self.n {
                    let row: Vec<String> = b.row(i).iter().map(|&x| num(x)).collect();
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
        }
        let _ = writeln!(out, "cuts {}", self.cuts.len());
        for cut in &self.cuts {
            let _ = write!(out, "{} {}", num(cut.rhs), cut.terms.len());
            for &(i, j, a) in &cut.terms {
                let _ = write!(out, " {i} {j} {}", num(a));
            }
            let _ = writeln!(out);
        }
        sink.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Reads a model written by [`SdpModel::dump`].
    pub fn read_dump(source: impl BufRead) -> Result<SdpModel> {
        let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = move || -> Result<(usize, String)> {
            match lines.next() {
                Some((no, line)) => Ok((no, line?)),
                None => Err(Error::Parse { line: 0, message: "unexpected end of model dump".into() }),
            }
        };
        let bad = |line: usize, message: &str| Error::Parse { line, message: message.to_string() };
        let floats = |line: usize, s: &str| -> Result<Vec<f64>> {
            s.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| bad(line, "invalid number"))).collect()
        };
        let (no, header) = next()?;
        if header.trim() != "kcut-sdp 1" {
            return Err(bad(no, "missing `kcut-sdp 1` header"));
        }
        let (no, line) = next()?;
        let n: usize = line
            .strip_prefix("n ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(no, "expected `n <order>`"))?;
        let (no, line) = next()?;
        let obj_scale = line
            .strip_prefix("obj_scale ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(no, "expected `obj_scale <value>`"))?;
        let read_dense = |next: &mut dyn FnMut() -> Result<(usize, String)>| -> Result<Matrix> {
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let (no, line) = next()?;
                let row = floats(no, &line)?;
                if row.len() != n {
                    return Err(bad(no, "dense row has the wrong length"));
                }
                rows.push(row);
            }
            Ok(Matrix::from_rows(&rows))
        };
        let (no, line) = next()?;
        if line.trim() != "objective" {
            return Err(bad(no, "expected `objective`"));
        }
        let objective = read_dense(&mut next)?;
        let (no, line) = next()?;
        let diag = if let Some(rest) = line.strip_prefix("diag ") {
            DiagConstraint::Entries(floats(no, rest)?)
        } else if let Some(rest) = line.strip_prefix("trace ") {
            DiagConstraint::Trace(rest.trim().parse().map_err(|_| bad(no, "invalid trace"))?)
        } else {
            return Err(bad(no, "expected `diag` or `trace`"));
        };
        let (no, line) = next()?;
        let cone = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["cone", "psd"] => Cone::Psd,
            ["cone", "shifted_psd", k] => Cone::ShiftedPsd { k: k.parse().map_err(|_| bad(no, "invalid k"))? },
            _ => return Err(bad(no, "expected `cone psd` or `cone shifted_psd <k>`")),
        };
        let (no, line) = next()?;
        let lower = match line.trim() {
            "lower none" => None,
            "lower dense" => Some(read_dense(&mut next)?),
            _ => return Err(bad(no, "expected `lower none` or `lower dense`")),
        };
        let (no, line) = next()?;
        let count: usize = line
            .strip_prefix("cuts ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(no, "expected `cuts <count>`"))?;
        let mut cuts = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, line) = next()?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let rhs: f64 = tokens.first().and_then(|t| t.parse().ok()).ok_or_else(|| bad(no, "invalid cut"))?;
            let len: usize = tokens.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| bad(no, "invalid cut"))?;
            if tokens.len() != 2 + 3 * len {
                return Err(bad(no, "cut has the wrong number of tokens"));
            }
            let mut terms = Vec::with_capacity(len);
            for t in 0..len {
                let base = 2 + 3 * t;
                let i = tokens[base].parse().map_err(|_| bad(no, "invalid index"))?;
                let j = tokens[base + 1].parse().map_err(|_| bad(no, "invalid index"))?;
                let a = tokens[base + 2].parse().map_err(|_| bad(no, "invalid coefficient"))?;
                terms.push((i, j, a));
            }
            cuts.push(Cut { terms, rhs });
        }
        let model = SdpModel { n, objective, obj_scale, diag, cone, lower, cuts };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol_eq: f64,
    pub tol_psd: f64,
    /// Relative gap tolerance: stop when `ub − obj ≤ tol_gap · (1 + |obj|)`.
    pub tol_gap: f64,
    pub rho: f64,
    pub sigma: f64,
    pub relaxation: f64,
    pub adaptive_rho: bool,
    pub check_every: usize,
    pub max_order: usize,
    /// Wall-clock limit in seconds; the best iterate is returned on expiry.
    pub time_limit: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 200_000,
            tol_eq: 1e-7,
            tol_psd: 1e-7,
            tol_gap: 1e-6,
            rho: 0.1,
            sigma: 1e-6,
            relaxation: 1.6,
            adaptive_rho: true,
            check_every: 20,
            max_order: 500,
            time_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Residuals {
    /// Max violation of the diagonal or trace equalities.
    pub equality: f64,
    /// Smallest eigenvalue of the cone matrix.
    pub cone_min_eigenvalue: f64,
    /// Max violation of the entrywise lower bound.
    pub lower_bound: f64,
    /// Max violation over cuts.
    pub cuts: f64,
    pub dual_bound: Option<f64>,
    pub gap: Option<f64>,
}

/// Iterate state for warm-starting a re-solve with additional cuts appended.
#[derive(Clone, Debug)]
pub struct WarmStart {
    x: Vec<f64>,
    z_psd: Vec<f64>,
    y_psd: Vec<f64>,
    y_rows: Vec<f64>,
    rho: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: Matrix,
    pub objective_value: f64,
    pub status: SolveStatus,
    pub residuals: Residuals,
    pub iterations: usize,
    pub warm_start: Option<WarmStart>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// The dual bound when available, otherwise the primal objective.
    pub fn upper_estimate(&self) -> f64 {
        self.residuals.dual_bound.unwrap_or(self.objective_value)
    }
}

fn svec(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        v.push(m[(i, i)]);
        for j in i + 1..n {
            v.push(SQRT2 * m[(i, j)]);
        }
    }
    v
}

fn smat(v: &[f64], n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let mut t = 0;
    for i in 0..n {
        m[(i, i)] = v[t];
        t += 1;
        for j in i + 1..n {
            let x = v[t] / SQRT2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            t += 1;
        }
    }
    m
}

/// One linear row `l ≤ aᵀx ≤ u`, normalised to unit length.
#[derive(Clone, Debug)]
struct Row {
    terms: Vec<(usize, f64)>,
    lo: f64,
    hi: f64,
}

impl Row {
    fn is_eq(&self) -> bool {
        self.lo == self.hi
    }

    fn dot(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, a)| a * x[i]).sum()
    }
}

/// The model rewritten in `svec(X)` coordinates.
struct Problem {
    n: usize,
    alpha: f64,
    beta: f64,
    q: Vec<f64>,
    cost_scale: f64,
    rows: Vec<Row>,
    trace_x: f64,
}

impl Problem {
    fn new(model: &SdpModel) -> Problem {
        let n = model.n;
        let (alpha, beta) = model.cone_map();
        let mut rows = Vec::new();
        // Σ a_ij y_ij with y_ij = α x_ij + β, in svec coordinates.
        let mut push = |terms: &[(usize, usize, f64)], lo: f64, hi: f64| {
            let mut constant = 0.0;
            let mut mapped: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
            for &(i, j, a) in terms {
                constant += beta * a;
                let coeff = if i == j { alpha * a } else { alpha * a / SQRT2 };
                let idx = packed_index(n, i, j);
                match mapped.iter_mut().find(|(t, _)| *t == idx) {
                    Some(entry) => entry.1 += coeff,
                    None => mapped.push((idx, coeff)),
                }
            }
            mapped.retain(|&(_, a)| a != 0.0);
            let norm = mapped.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                return;
            }
            for entry in &mut mapped {
                entry.1 /= norm;
            }
            rows.push(Row { terms: mapped, lo: (lo - constant) / norm, hi: (hi - constant) / norm });
        };
        match &model.diag {
            DiagConstraint::Entries(d) => {
                for (i, &di) in d.iter().enumerate() {
                    push(&[(i, i, 1.0)], di, di);
                }
            }
            DiagConstraint::Trace(t) => {
                let terms: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
                push(&terms, *t, *t);
            }
        }
        if let Some(b) = &model.lower {
            let skip_diag = matches!(model.diag, DiagConstraint::Entries(_));
            for i in 0..n {
                for j in i..n {
                    if (skip_diag && i == j) || !b[(i, j)].is_finite() {
                        continue;
                    }
                    push(&[(i, j, 1.0)], b[(i, j)], f64::INFINITY);
                }
            }
        }
        for cut in &model.cuts {
            push(&cut.terms, f64::NEG_INFINITY, cut.rhs);
        }
        let c = svec(&model.objective);
        let q: Vec<f64> = c.iter().map(|&ci| -model.obj_scale * alpha * ci).collect();
        let qmax = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let cost_scale = if qmax > 0.0 { 1.0 / qmax } else { 1.0 };
        let q = q.into_iter().map(|x| x * cost_scale).collect();
        let trace_x = (model.trace_y() - n as f64 * beta) / alpha;
        Problem { n, alpha, beta, q, cost_scale, rows, trace_x }
    }

    fn m(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn y_from_x(&self, x: &[f64]) -> Matrix {
        let mut y = smat(x, self.n);
        for v in y.as_mut_slice() {
            *v = self.alpha * *v + self.beta;
        }
        y
    }

    fn x_from_y(&self, y: &Matrix) -> Vec<f64> {
        let x = Matrix::from_fn(self.n, self.n, |i, j| (y[(i, j)] - self.beta) / self.alpha);
        svec(&x)
    }

    /// `Aᵀy` accumulated into `out`.
    fn add_at_y(&self, y: &[f64], out: &mut [f64]) {
        for (row, &yr) in self.rows.iter().zip(y) {
            if yr != 0.0 {
                for &(i, a) in &row.terms {
                    out[i] += a * yr;
                }
            }
        }
    }

    /// Lower bound on `min qᵀx` from row multipliers, valid for every
    /// feasible `x` because `tr(X)` is fixed. Returned in scaled units.
    fn dual_lower_bound(&self, y_rows: &[f64]) -> Result<f64> {
        let mut h = 0.0;
        let mut s = self.q.clone();
        let mut clipped = Vec::with_capacity(y_rows.len());
        for (row, &y) in self.rows.iter().zip(y_rows) {
            let mut y = y;
            if row.hi == f64::INFINITY {
                y = y.min(0.0);
            }
            if row.lo == f64::NEG_INFINITY {
                y = y.max(0.0);
            }
            if y > 0.0 {
                h -= y * row.hi;
            } else if y < 0.0 {
                h -= y * row.lo;
            }
            clipped.push(y);
        }
        self.add_at_y(&clipped, &mut s);
        let lambda_min = spectra::symmetric_eigenvalues(&smat(&s, self.n))?[0];
        Ok(h + self.trace_x * lambda_min)
    }
}

/// Position of entry `(i, j)` in the packed upper-triangular row-major layout.
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

/// `(σ + ρ_psd) I + Σ ρ_r a_r a_rᵀ`, factored as a diagonal on indices that no
/// multi-entry row touches plus a dense Cholesky factor on the rest.
struct KktFactor {
    diag: Vec<f64>,
    coupled: Vec<usize>,
    position: Vec<usize>,
    chol: Vec<f64>,
}

impl KktFactor {
    fn new(problem: &Problem, rho_rows: &[f64], shift: f64) -> Result<KktFactor> {
        let m = problem.m();
        let mut is_coupled = vec![false; m];
        for row in &problem.rows {
            if row.terms.len() > 1 {
                for &(i, _) in &row.terms {
                    is_coupled[i] = true;
                }
            }
        }
        let coupled: Vec<usize> = (0..m).filter(|&i| is_coupled[i]).collect();
        let mut position = vec![usize::MAX; m];
        for (p, &i) in coupled.iter().enumerate() {
            position[i] = p;
        }
        let c = coupled.len();
        let mut diag = vec![shift; m];
        let mut dense = vec![0.0; c * c];
        for (row, &rho) in problem.rows.iter().zip(rho_rows) {
            if row.terms.len() == 1 {
                let (i, a) = row.terms[0];
                diag[i] += rho * a * a;
            } else {
                for &(i, a) in &row.terms {
                    let pi = position[i];
                    for &(j, b) in &row.terms {
                        dense[pi * c + position[j]] += rho * a * b;
                    }
                }
            }
        }
        for (p, &i) in coupled.iter().enumerate() {
            dense[p * c + p] += diag[i];
        }
        cholesky_in_place(&mut dense, c)?;
        Ok(KktFactor { diag, coupled, position, chol: dense })
    }

    fn solve(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) {
        let c = self.coupled.len();
        for (i, r) in rhs.iter_mut().enumerate() {
            if self.position[i] == usize::MAX {
                *r /= self.diag[i];
            }
        }
        if c == 0 {
            return;
        }
        scratch.clear();
        scratch.extend(self.coupled.iter().map(|&i| rhs[i]));
        cholesky_solve(&self.chol, c, scratch);
        for (p, &i) in self.coupled.iter().enumerate() {
            rhs[i] = scratch[p];
        }
    }
}

/// Lower-triangular Cholesky factor of a row-major SPD matrix, in place.
fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 {
            return Err(Error::Solver("KKT matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Projection onto the PSD cone by clipping negative eigenvalues.
fn project_psd(v: &[f64], n: usize) -> Result<Vec<f64>> {
    let m = smat(v, n);
    let (values, vectors) = spectra::tridiagonal_ql(&m, true)?;
    let negatives = values.iter().filter(|&&l| l < 0.0).count();
    if negatives == 0 {
        return Ok(v.to_vec());
    }
    // Either add the positive part or subtract the negative part, whichever is cheaper.
    let keep_positive = negatives * 2 > n;
    let mut out = if keep_positive { Matrix::zeros(n, n) } else { m };
    let mut col = vec![0.0; n];
    for (c, &lambda) in values.iter().enumerate() {
        let w = if keep_positive {
            if lambda > 0.0 {
                lambda
            } else {
                continue;
            }
        } else if lambda < 0.0 {
            -lambda
        } else {
            continue;
        };
        for (i, ci) in col.iter_mut().enumerate() {
            *ci = vectors[(i, c)];
        }
        for i in 0..n {
            let wi = w * col[i];
            let row = out.row_mut(i);
            for j in i..n {
                row[j] += wi * col[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            out[(i, j)] = out[(j, i)];
        }
    }
    Ok(svec(&out))
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Independently recomputed feasibility of `Y` against a model.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub tolerance: f64,
    pub symmetry: f64,
    pub equality: f64,
    pub equality_pass: bool,
    pub cone_min_eigenvalue: f64,
    pub cone_pass: bool,
    pub lower_bound: f64,
    pub lower_bound_pass: bool,
    /// `(cut index, violation)` for every cut violated by more than the tolerance.
    pub violated_cuts: Vec<(usize, f64)>,
    pub cuts_pass: bool,
    pub objective: f64,
}

impl CertificationReport {
    pub fn pass(&self) -> bool {
        self.equality_pass && self.cone_pass && self.lower_bound_pass && self.cuts_pass
    }
}

fn equality_residual(model: &SdpModel, y: &Matrix) -> f64 {
    match &model.diag {
        DiagConstraint::Entries(d) => d.iter().enumerate().map(|(i, &di)| (y[(i, i)] - di).abs()).fold(0.0, f64::max),
        DiagConstraint::Trace(t) => (y.trace() - t).abs(),
    }
}

fn lower_residual(model: &SdpModel, y: &Matrix) -> f64 {
    let Some(b) = &model.lower else { return 0.0 };
    let mut worst = 0.0f64;
    for i in 0..model.n {
        for j in 0..model.n {
            if b[(i, j)].is_finite() {
                worst = worst.max(b[(i, j)] - y[(i, j)]);
            }
        }
    }
    worst
}

fn cut_residual(model: &SdpModel, y: &Matrix) -> f64 {
    model.cuts.iter().map(|c| c.violation(y)).fold(0.0, f64::max)
}

/// Recomputes every residual of `y` against `model` from scratch.
pub fn certify(model: &SdpModel, y: &Matrix, tol: f64) -> Result<CertificationReport> {
    if y.rows() != model.n || y.cols() != model.n {
        return Err(Error::Dimension { expected: model.n, got: y.rows() });
    }
    let symmetry = y.asymmetry();
    let mut sym = y.clone();
    sym.symmetrize();
    let equality = equality_residual(model, &sym);
    let cone_min_eigenvalue = spectra::symmetric_eigenvalues(&model.cone_matrix(&sym))?[0];
    let lower_bound = lower_residual(model, &sym);
    let violated_cuts: Vec<(usize, f64)> =
        model.cuts.iter().enumerate().map(|(c, cut)| (c, cut.violation(&sym))).filter(|&(_, v)| v > tol).collect();
    Ok(CertificationReport {
        tolerance: tol,
        symmetry,
        equality,
        equality_pass: equality <= tol && symmetry <= tol,
        cone_min_eigenvalue,
        cone_pass: cone_min_eigenvalue >= -tol,
        lower_bound,
        lower_bound_pass: lower_bound <= tol,
        cuts_pass: violated_cuts.is_empty(),
        violated_cuts,
        objective: model.objective_of(&sym),
    })
}

pub fn solve(model: &SdpModel, opts: &SolverOptions) -> Result<SdpSolution> {
    solve_warm(model, opts, None)
}

/// Solves `model`, optionally starting from the state of an earlier solve of
/// the same model with fewer cuts.
pub fn solve_warm(model: &SdpModel, opts: &SolverOptions, warm: Option<&WarmStart>) -> Result<SdpSolution> {
    model.validate()?;
    if model.n > opts.max_order {
        return Err(Error::CapExceeded {
            what: "SDP matrix order".into(),
            estimate: model.n as f64,
            cap: opts.max_order as f64,
        });
    }
    let started = Instant::now();
    let problem = Problem::new(model);
    let n = problem.n;
    let m = problem.m();
    let p = problem.rows.len();
    let relax = opts.relaxation;
    let eq_weight = 1e3;

    let (mut x, mut z_psd, mut y_psd, mut y_rows, mut rho) = match warm {
        Some(w) if w.x.len() == m && w.y_rows.len() <= p => {
            let mut y_rows = w.y_rows.clone();
            y_rows.resize(p, 0.0);
            (w.x.clone(), w.z_psd.clone(), w.y_psd.clone(), y_rows, w.rho)
        }
        _ => {
            let x0 = problem.x_from_y(&Matrix::identity(n));
            (x0.clone(), x0, vec![0.0; m], vec![0.0; p], opts.rho)
        }
    };
    let mut z_rows: Vec<f64> = problem.rows.iter().map(|r| r.dot(&x).clamp(r.lo, r.hi)).collect();

    let rho_for =
        |rho: f64| -> Vec<f64> { problem.rows.iter().map(|r| if r.is_eq() { rho * eq_weight } else { rho }).collect() };
    let mut rho_rows = rho_for(rho);
    let mut factor = KktFactor::new(&problem, &rho_rows, opts.sigma + rho)?;
    let mut last_adapt = 0;

    let mut rhs = vec![0.0; m];
    let mut scratch = Vec::new();
    let mut prev_y_rows = y_rows.clone();
    let mut prev_y_psd = y_psd.clone();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut certified: Option<(f64, f64)> = None;

    for iter in 1..=opts.max_iter {
        iterations = iter;
        let check = iter % opts.check_every.max(1) == 0;
        if check {
            prev_y_rows.copy_from_slice(&y_rows);
            prev_y_psd.copy_from_slice(&y_psd);
        }
        for i in 0..m {
            rhs[i] = opts.sigma * x[i] - problem.q[i] + rho * z_psd[i] - y_psd[i];
        }
        for (r, row) in problem.rows.iter().enumerate() {
            let w = rho_rows[r] * z_rows[r] - y_rows[r];
            for &(i, a) in &row.terms {
                rhs[i] += a * w;
            }
        }
        factor.solve(&mut rhs, &mut scratch);
        let x_tilde = &rhs;

        for (r, row) in problem.rows.iter().enumerate() {
            let zt = row.dot(x_tilde);
            let v = relax * zt + (1.0 - relax) * z_rows[r];
            let z_new = (v + y_rows[r] / rho_rows[r]).clamp(row.lo, row.hi);
            y_rows[r] += rho_rows[r] * (v - z_new);
            z_rows[r] = z_new;
        }
        let mut v_psd = vec![0.0; m];
        let mut w_psd = vec![0.0; m];
        for i in 0..m {
            v_psd[i] = relax * x_tilde[i] + (1.0 - relax) * z_psd[i];
            w_psd[i] = v_psd[i] + y_psd[i] / rho;
        }
        let z_new = project_psd(&w_psd, n)?;
        for i in 0..m {
            y_psd[i] += rho * (v_psd[i] - z_new[i]);
            x[i] = relax * x_tilde[i] + (1.0 - relax) * x[i];
        }
        z_psd = z_new;

        if !check {
            continue;
        }
        // Scaled residuals drive ρ adaptation and the infeasibility test.
        let mut ax = vec![0.0; p];
        let mut r_prim = 0.0f64;
        for (r, row) in problem.rows.iter().enumerate() {
            ax[r] = row.dot(&x);
            r_prim = r_prim.max((ax[r] - z_rows[r]).abs());
        }
        for i in 0..m {
            r_prim = r_prim.max((x[i] - z_psd[i]).abs());
        }
        let mut aty = vec![0.0; m];
        problem.add_at_y(&y_rows, &mut aty);
        let mut r_dual = 0.0f64;
        for i in 0..m {
            r_dual = r_dual.max((problem.q[i] + aty[i] + y_psd[i]).abs());
        }
        let prim_scale = norm_inf(&ax).max(norm_inf(&z_rows)).max(norm_inf(&x)).max(norm_inf(&z_psd)).max(1e-12);
        let dual_scale = norm_inf(&aty).max(norm_inf(&y_psd)).max(norm_inf(&problem.q)).max(1e-12);

        if infeasibility_certificate(&problem, &y_rows, &prev_y_rows, &y_psd, &prev_y_psd)? {
            status = SolveStatus::Infeasible;
            break;
        }

        let y_mat = problem.y_from_x(&z_psd);
        let eq = equality_residual(model, &y_mat);
        let lo = lower_residual(model, &y_mat);
        let cut = cut_residual(model, &y_mat);
        if eq <= opts.tol_eq && lo <= opts.tol_eq && cut <= opts.tol_eq {
            let obj = model.objective_of(&y_mat);
            let ub = -problem.dual_lower_bound(&y_rows)? / problem.cost_scale;
            if ub - obj <= opts.tol_gap * (1.0 + obj.abs()) {
                certified = Some((ub, ub - obj));
                status = SolveStatus::Optimal;
                break;
            }
        }
        if let Some(limit) = opts.time_limit {
            if started.elapsed().as_secs_f64() > limit {
                break;
            }
        }
        if opts.adaptive_rho && iter - last_adapt >= 5 * opts.check_every && r_dual > 0.0 {
            let ratio = ((r_prim / prim_scale) / (r_dual / dual_scale)).sqrt();
            if !(0.2..=5.0).contains(&ratio) {
                rho = (rho * ratio).clamp(1e-6, 1e6);
                rho_rows = rho_for(rho);
                factor = KktFactor::new(&problem, &rho_rows, opts.sigma + rho)?;
                last_adapt = iter;
            }
        }
    }

    let y = problem.y_from_x(&z_psd);
    let objective_value = model.objective_of(&y);
    let (dual_bound, gap) = match certified {
        Some((ub, gap)) => (Some(ub), Some(gap)),
        None if status != SolveStatus::Infeasible => {
            let ub = -problem.dual_lower_bound(&y_rows)? / problem.cost_scale;
            (Some(ub), Some(ub - objective_value))
        }
        None => (None, None),
    };
    let residuals = Residuals {
        equality: equality_residual(model, &y),
        cone_min_eigenvalue: spectra::symmetric_eigenvalues(&model.cone_matrix(&y))?[0],
        lower_bound: lower_residual(model, &y),
        cuts: cut_residual(model, &y),
        dual_bound,
        gap,
    };
    Ok(SdpSolution {
        y,
        objective_value,
        status,
        residuals,
        iterations,
        warm_start: Some(WarmStart { x, z_psd, y_psd, y_rows, rho }),
    })
}

/// Primal infeasibility test on the dual increment `δy`: `Aᵀδy ≈ 0`, the PSD
/// part of `δy` negative semidefinite, and the box support value negative.
fn infeasibility_certificate(
    problem: &Problem,
    y_rows: &[f64],
    prev_rows: &[f64],
    y_psd: &[f64],
    prev_psd: &[f64],
) -> Result<bool> {
    let eps = 1e-5;
    let d_rows: Vec<f64> = y_rows.iter().zip(prev_rows).map(|(a, b)| a - b).collect();
    let d_psd: Vec<f64> = y_psd.iter().zip(prev_psd).map(|(a, b)| a - b).collect();
    let scale = norm_inf(&d_rows).max(norm_inf(&d_psd));
    if scale < 1e-10 {
        return Ok(false);
    }
    let mut support = 0.0;
    for (row, &d) in problem.rows.iter().zip(&d_rows) {
        let d = d / scale;
        if d > eps * 1e-3 {
            if row.hi == f64::INFINITY {
                return Ok(false);
            }
            support += d * row.hi;
        } else if d < -eps * 1e-3 {
            if row.lo == f64::NEG_INFINITY {
                return Ok(false);
            }
            support += d * row.lo;
        }
    }
    if support >= -eps {
        return Ok(false);
    }
    let mut aty: Vec<f64> = d_psd.iter().map(|v| v / scale).collect();
    let normalized: Vec<f64> = d_rows.iter().map(|v| v / scale).collect();
    problem.add_at_y(&normalized, &mut aty);
    if norm_inf(&aty) > eps {
        return Ok(false);
    }
    let psd_part = smat(&d_psd.iter().map(|v| v / scale).collect::<Vec<_>>(), problem.n);
    let top = *spectra::symmetric_eigenvalues(&psd_part)?.last().unwrap_or(&0.0);
    Ok(top <= eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    fn tight() -> SolverOptions {
        SolverOptions { tol_eq: 1e-9, tol_gap: 1e-9, ..SolverOptions::default() }
    }

    fn main_model(g: &crate::graph::Graph, k: usize) -> SdpModel {
        SdpModel {
            n: g.n(),
            objective: g.laplacian().matrix,
            obj_scale: 0.5,
            diag: DiagConstraint::Entries(vec![1.0; g.n()]),
            cone: Cone::ShiftedPsd { k },
            lower: Some(Matrix::zeros(g.n(), g.n())),
            cuts: Vec::new(),
        }
    }

    #[test]
    fn svec_round_trip_and_inner_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![3.0, 5.0, 6.0]]);
        let b = Matrix::from_rows(&[vec![0.5, -1.0, 0.0], vec![-1.0, 2.0, 1.5], vec![0.0, 1.5, -3.0]]);
        assert_eq!(smat(&svec(&a), 3), a);
        let dot: f64 = svec(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
        assert!((dot - a.trace_product(&b)).abs() < 1e-12);
        for (i, j) in [(0, 0), (0, 2), (1, 1), (1, 2), (2, 2)] {
            let mut e = Matrix::zeros(3, 3);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            let v = svec(&e);
            assert_ne!(v[packed_index(3, i, j)], 0.0);
        }
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let p = smat(&project_psd(&svec(&m), 2).unwrap(), 2);
        let want = Matrix::from_rows(&[vec![1.5, 1.5], vec![1.5, 1.5]]);
        assert!(p.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves() {
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        cholesky_in_place(&mut a, 2).unwrap();
        let mut b = vec![2.0, 1.0];
        cholesky_solve(&a, 2, &mut b);
        assert!((4.0 * b[0] + 2.0 * b[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * b[0] + 3.0 * b[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_max_three_cut() {
        let g = catalogue::complete(3).unwrap();
        let sol = solve(&main_model(&g, 3), &tight()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective_value - 3.0).abs() < 1e-6, "{}", sol.objective_value);
    }

    #[test]
    fn pentagon_eigenvalue_model() {
        let g = catalogue::cycle(5).unwrap();
        let mut model = main_model(&g, 2);
        model.diag = DiagConstraint::Trace(5.0);
        model.lower = None;
        let sol = solve(&model, &tight()).unwrap();
        assert!(sol.is_optimal());
        let want = 5.0 / 4.0 * (2.0 - 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos());
        assert!((sol.objective_value - want).abs() < 1e-6);
        let gap = sol.residuals.gap.unwrap();
        assert!((-1e-9..1e-6).contains(&gap));
    }

    #[test]
    fn certify_flags_violations() {
        let g = catalogue::cycle(5).unwrap();
        let mut model = main_model(&g, 2);
        let report = certify(&model, &Matrix::zeros(5, 5), 1e-7).unwrap();
        assert!((report.equality - 1.0).abs() < 1e-12);
        assert!(!report.pass());
        let sol = solve(&model, &tight()).unwrap();
        assert!(certify(&model, &sol.y, 1e-7).unwrap().pass());

        model.cuts.push(Cut { terms: vec![(0, 1, 1.0)], rhs: sol.y[(0, 1)] - 0.1 });
        let report = certify(&model, &sol.y, 1e-7).unwrap();
        assert_eq!(report.violated_cuts.len(), 1);
        assert!((report.violated_cuts[0].1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_cuts_are_infeasible() {
        let g = catalogue::cycle(4).unwrap();
        let mut model = main_model(&g, 2);
        model.cuts.push(Cut { terms: vec![(0, 1, 1.0)], rhs: -0.5 });
        let sol = solve(&model, &SolverOptions { max_iter: 20_000, ..SolverOptions::default() }).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn order_cap_is_enforced() {
        let g = catalogue::cycle(6).unwrap();
        let opts = SolverOptions { max_order: 5, ..SolverOptions::default() };
        assert!(matches!(solve(&main_model(&g, 2), &opts), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn dump_round_trip() {
        let g = catalogue::cycle(4).unwrap();
        let mut model = main_model(&g, 3);
        model.cuts.push(Cut { terms: vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, -1.0)], rhs: 1.0 });
        let mut buf = Vec::new();
        model.dump(&mut buf).unwrap();
        let back = SdpModel::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back, model);
    }
}

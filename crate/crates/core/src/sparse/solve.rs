use crate::error::SolveError;

use super::csr::CsrMatrix;

/// Default relative residual target for every substep system.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Krylov method selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Conjugate gradients for symmetric matrices with a positive diagonal,
    /// BiCGStab otherwise.
    Auto,
    Cg,
    BiCgStab,
}

/// A fixed linear approximation of `A^{-1}`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolveError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolveError::DimensionMismatch {
                rows: n,
                cols: a.ncols(),
                len: n,
            });
        }
        let mut lu = a.clone();
        let row_ptr = lu.row_ptr().to_vec();
        let col_idx = lu.col_idx().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            if let Ok(k) = col_idx[row_ptr[i]..row_ptr[i + 1]].binary_search(&i) {
                diag[i] = row_ptr[i] + k;
            } else {
                return Err(SolveError::SingularSystem(format!("no diagonal entry in row {i}")));
            }
        }
        let vals = lu.values_mut();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            for k in start..end {
                pos[col_idx[k]] = k;
            }
            for kk in start..end {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                let lik = vals[kk] / pivot;
                vals[kk] = lik;
                for kj in diag[k] + 1..row_ptr[k + 1] {
                    let p = pos[col_idx[kj]];
                    if p != usize::MAX {
                        vals[p] -= lik * vals[kj];
                    }
                }
            }
            let d = vals[diag[i]];
            if d == 0.0 || !d.is_finite() {
                return Err(SolveError::SingularSystem(format!("zero pivot in row {i}")));
            }
            for k in start..end {
                pos[col_idx[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// Solves `L U z = r`.
    pub fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag.len();
        let (rp, ci, v) = (self.lu.row_ptr(), self.lu.col_idx(), self.lu.values());
        for i in 0..n {
            let mut s = r[i];
            for k in rp[i]..self.diag[i] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s / v[self.diag[i]];
        }
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve_into(r, z)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// A factorized solver bound to one matrix; the preconditioner is reused
/// across right-hand sides.
#[derive(Debug)]
pub struct LinearSolver<'a> {
    a: &'a CsrMatrix,
    precond: Ilu0,
    method: Method,
}

impl<'a> LinearSolver<'a> {
    pub fn new(a: &'a CsrMatrix, method: Method) -> Result<Self, SolveError> {
        let method = match method {
            Method::Auto => {
                if a.is_symmetric(1e-14) && a.diagonal().iter().all(|&d| d > 0.0) {
                    Method::Cg
                } else {
                    Method::BiCgStab
                }
            }
            m => m,
        };
        Ok(LinearSolver {
            a,
            precond: Ilu0::new(a)?,
            method,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Returns `x` with `||Ax - b|| <= tol * max(||b||, 1e-30)`.
    pub fn solve(&self, b: &[f64], x0: Option<&[f64]>, tol: f64) -> Result<Vec<f64>, SolveError> {
        self.solve_counted(b, x0, tol).map(|(x, _)| x)
    }

    /// Like [`LinearSolver::solve`], also returning the iteration count.
    pub fn solve_counted(&self, b: &[f64], x0: Option<&[f64]>, tol: f64) -> Result<(Vec<f64>, usize), SolveError> {
        let n = self.a.nrows();
        if b.len() != n {
            return Err(SolveError::DimensionMismatch {
                rows: n,
                cols: self.a.ncols(),
                len: b.len(),
            });
        }
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok((vec![0.0; n], 0));
        }
        let target = tol * bnorm.max(1e-30);
        let mut x = match x0 {
            Some(g) if g.len() == n => g.to_vec(),
            _ => vec![0.0; n],
        };
        let max_iter = 10 * n.max(1);
        let pc = |r: &[f64], z: &mut [f64]| self.precond.solve_into(r, z);
        let result = match self.method {
            Method::Cg => match pcg(self.a, b, &mut x, target, max_iter, &pc) {
                Err(SolveError::SingularSystem(_)) => {
                    x = vec![0.0; n];
                    bicgstab(self.a, b, &mut x, target, max_iter, &pc)
                }
                other => other,
            },
            _ => bicgstab(self.a, b, &mut x, target, max_iter, &pc),
        };
        result.map(|it| (x, it)).map_err(|e| match e {
            SolveError::NonConvergence { iterations, residual, .. } => SolveError::NonConvergence {
                iterations,
                residual: residual / bnorm,
                target: tol,
            },
            e => e,
        })
    }
}

/// BiCGStab with a caller-supplied preconditioner; returns the solution and
/// the iteration count under the same residual contract as
/// [`LinearSolver::solve`].
pub fn bicgstab_with<P: Preconditioner + ?Sized>(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    precond: &P,
) -> Result<(Vec<f64>, usize), SolveError> {
    let n = a.nrows();
    if b.len() != n || a.ncols() != n {
        return Err(SolveError::DimensionMismatch {
            rows: n,
            cols: a.ncols(),
            len: b.len(),
        });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut x = match x0 {
        Some(g) if g.len() == n => g.to_vec(),
        _ => vec![0.0; n],
    };
    let pc = |r: &[f64], z: &mut [f64]| precond.apply(r, z);
    match bicgstab(a, b, &mut x, tol * bnorm.max(1e-30), 10 * n.max(1), &pc) {
        Ok(it) => Ok((x, it)),
        Err(SolveError::NonConvergence { iterations, residual, .. }) => Err(SolveError::NonConvergence {
            iterations,
            residual: residual / bnorm,
            target: tol,
        }),
        Err(e) => Err(e),
    }
}

/// One-shot solve with automatic method selection.
pub fn solve(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>, SolveError> {
    LinearSolver::new(a, Method::Auto)?.solve(b, None, tol)
}

/// Preconditioned conjugate gradients; the final residual is recomputed from
/// scratch before acceptance.
pub(crate) fn pcg<P: Fn(&[f64], &mut [f64])>(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    target: f64,
    max_iter: usize,
    precond: &P,
) -> Result<usize, SolveError> {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut it = 0;
    loop {
        residual(a, x, b, &mut r);
        let mut rn = norm(&r);
        if rn <= target {
            return Ok(it);
        }
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let restart_at = it;
        while it < max_iter {
            it += 1;
            a.mul_vec_into(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 || !pq.is_finite() {
                return Err(SolveError::SingularSystem("indefinite direction in CG".into()));
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            rn = norm(&r);
            if rn <= target {
                break;
            }
            precond(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if it >= max_iter && rn > target {
            residual(a, x, b, &mut r);
            return Err(SolveError::NonConvergence {
                iterations: it,
                residual: norm(&r),
                target,
            });
        }
        if it == restart_at {
            return Err(SolveError::NonConvergence {
                iterations: it,
                residual: rn,
                target,
            });
        }
    }
}

/// Right-preconditioned BiCGStab with restart on breakdown.
pub(crate) fn bicgstab<P: Fn(&[f64], &mut [f64])>(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    target: f64,
    max_iter: usize,
    precond: &P,
) -> Result<usize, SolveError> {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut it = 0;
    let mut restarts = 0;
    loop {
        residual(a, x, b, &mut r);
        if norm(&r) <= target {
            return Ok(it);
        }
        if it >= max_iter || restarts > 50 {
            return Err(SolveError::NonConvergence {
                iterations: it,
                residual: norm(&r),
                target,
            });
        }
        restarts += 1;
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        while it < max_iter {
            it += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new.abs() < 1e-300 || !rho_new.is_finite() {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precond(&p, &mut ph);
            a.mul_vec_into(&ph, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 || !rv.is_finite() {
                break;
            }
            alpha = rho / rv;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if norm(&s) <= target {
                for i in 0..n {
                    x[i] += alpha * ph[i];
                }
                break;
            }
            precond(&s, &mut sh);
            a.mul_vec_into(&sh, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 || !tt.is_finite() {
                break;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm(&r) <= target || omega == 0.0 {
                break;
            }
        }
        if x.iter().any(|e| !e.is_finite()) {
            return Err(SolveError::SingularSystem("BiCGStab produced non-finite iterates".into()));
        }
    }
}

/// Solution of a pure-Neumann problem on the zero-mean subspace.
#[derive(Clone, Debug)]
pub struct ZeroMeanSolution {
    pub x: Vec<f64>,
    /// Lagrange multiplier absorbing the incompatible part of the data.
    pub multiplier: f64,
}

/// Solves `[[K, m], [m^T, 0]] (x; mu) = (b; 0)` for a symmetric `K` whose
/// kernel is the constants.
///
/// The multiplier is eliminated exactly: `mu = 1^T b / 1^T m`, after which the
/// consistent singular system is solved by Jacobi-preconditioned CG and the
/// result projected onto `m^T x = 0`.
pub fn solve_zero_mean(
    k: &CsrMatrix,
    m: &[f64],
    b: &[f64],
    tol: f64,
) -> Result<ZeroMeanSolution, SolveError> {
    let n = k.nrows();
    if m.len() != n || b.len() != n {
        return Err(SolveError::DimensionMismatch {
            rows: n,
            cols: k.ncols(),
            len: b.len(),
        });
    }
    let msum: f64 = m.iter().sum();
    if msum == 0.0 {
        return Err(SolveError::SingularSystem("mean vector sums to zero".into()));
    }
    let mu = b.iter().sum::<f64>() / msum;
    let rhs: Vec<f64> = b.iter().zip(m).map(|(bi, mi)| bi - mu * mi).collect();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if norm(&rhs) > 0.0 {
        let inv_diag: Vec<f64> = k
            .diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        let pc = |r: &[f64], z: &mut [f64]| {
            for i in 0..r.len() {
                z[i] = inv_diag[i] * r[i];
            }
        };
        let target = tol * bnorm.max(1e-30);
        pcg(k, &rhs, &mut x, target, 10 * n.max(1), &pc).map_err(|e| match e {
            SolveError::NonConvergence { iterations, residual, .. } => SolveError::NonConvergence {
                iterations,
                residual: residual / bnorm,
                target: tol,
            },
            e => e,
        })?;
    }
    let shift = dot(m, &x) / msum;
    x.iter_mut().for_each(|e| *e -= shift);
    Ok(ZeroMeanSolution { x, multiplier: mu })
}

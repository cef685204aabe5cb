//! Thin dense complex linear algebra layer over `faer`.
//!
//! Everything the pipeline factorizes fits in memory at desk scale, so all
//! solves are dense. Factorizations run sequentially by default, which keeps
//! outputs bit-reproducible; callers may opt into threads globally through
//! `faer::set_global_parallelism`.

use faer::linalg::solvers::{Llt, PartialPivLu, Solve};
use faer::{c64, Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

// faer's c64 is num_complex::Complex64; keep one visible alias.
const _: fn(c64) -> Complex64 = |x| x;

pub type CMat = Mat<c64>;

pub fn col_ref(values: &[Complex64]) -> MatRef<'_, c64> {
    MatRef::from_column_major_slice(values, values.len(), 1)
}

pub fn col_to_vec(m: &CMat) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

pub fn matvec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.ncols(), v.len());
    let out = m * col_ref(v);
    col_to_vec(&out)
}

/// `I - A·diag(s)` (the discrete Lippmann-Schwinger system matrix).
pub fn identity_minus_col_scaled(a: &CMat, s: &[Complex64]) -> CMat {
    let n = a.nrows();
    assert_eq!(a.ncols(), s.len());
    let mut m = Mat::from_fn(n, s.len(), |i, j| -a[(i, j)] * s[j]);
    for i in 0..n.min(s.len()) {
        m[(i, i)] += 1.0;
    }
    m
}

/// LU-prefactored square system, reusable across many right-hand sides.
pub struct Factored {
    lu: PartialPivLu<c64>,
    n: usize,
}

impl Factored {
    pub fn new(m: CMat) -> Result<Self> {
        let n = m.nrows();
        if !m.as_ref().is_all_finite() {
            return Err(Error::Factorization(
                "system matrix has non-finite entries".into(),
            ));
        }
        let lu = m.partial_piv_lu();
        // partial pivoting never fails structurally; detect numerical
        // singularity from the U diagonal instead
        let u = lu.U();
        let mut dmin = f64::INFINITY;
        let mut dmax: f64 = 0.0;
        for i in 0..n {
            let d = u[(i, i)].norm();
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        if dmin <= dmax * 1e-14 {
            return Err(Error::Factorization(format!(
                "system is numerically singular (pivot ratio {:.2e}); \
                 the wavenumber may sit near a discrete resonance - perturb k",
                dmin / dmax.max(f64::MIN_POSITIVE)
            )));
        }
        Ok(Factored { lu, n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve_vec(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let x = self.lu.solve(col_ref(rhs));
        col_to_vec(&x)
    }

    pub fn solve_mat(&self, rhs: &CMat) -> CMat {
        self.lu.solve(rhs)
    }

    /// Solves `Mᵀ X = B`; used to apply the inverse from the left.
    pub fn solve_transpose_mat(&self, rhs: &CMat) -> CMat {
        self.lu.solve_transpose(rhs)
    }
}

/// Minimizer of `‖Ax - d‖² + λ‖x‖²` given the assembled normal equations.
/// Returns the solution of `(AᴴA + λI) x = Aᴴd`.
pub fn tikhonov_solve(mut normal: CMat, rhs: &[Complex64], lambda: f64) -> Result<Vec<Complex64>> {
    let n = normal.nrows();
    assert_eq!(n, rhs.len());
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::IllPosed(format!("invalid regularization parameter {lambda}")));
    }
    for i in 0..n {
        normal[(i, i)] += lambda;
    }
    match normal.llt(faer::Side::Lower) {
        Ok(chol) => Ok(col_to_vec(&chol.solve(col_ref(rhs)))),
        Err(_) => {
            // lambda too small to make the system definite; fall back to LU
            let f = Factored::new(normal).map_err(|_| {
                Error::IllPosed(
                    "normal equations are rank-deficient beyond regularization rescue; \
                     add densities or observation directions, or raise lambda"
                        .into(),
                )
            })?;
            Ok(f.solve_vec(rhs))
        }
    }
}

/// Rank-one style accumulation `N += diag(conj s) · B · diag(s)`.
pub fn accumulate_scaled(normal: &mut CMat, base: &CMat, s: &[Complex64]) {
    let n = base.nrows();
    assert_eq!(base.ncols(), n);
    assert_eq!(s.len(), n);
    assert_eq!(normal.nrows(), n);
    for j in 0..n {
        let sj = s[j];
        for i in 0..n {
            normal[(i, j)] += s[i].conj() * base[(i, j)] * sj;
        }
    }
}

/// Scale used to make the config-level regularization parameter relative:
/// mean diagonal magnitude of the normal matrix.
pub fn normal_scale(normal: &CMat) -> f64 {
    let n = normal.nrows();
    if n == 0 {
        return 0.0;
    }
    let tr: f64 = (0..n).map(|i| normal[(i, i)].re).sum();
    (tr / n as f64).max(f64::MIN_POSITIVE)
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    let f = m.norm_l2();
    f * f
}

/// Least-squares slope of y against x.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

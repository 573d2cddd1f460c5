//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here operates on `ndarray` storage with `Complex64` scalars.
//! The sizes encountered in this crate are desk-scale (matrices up to about
//! 1024 columns), so all routines are straightforward dense implementations:
//! a Hermitian eigensolver (Householder tridiagonalization followed by
//! implicit-shift QL), power iteration for spectral norms, Householder QR for
//! least squares and range-space projections, and a Cholesky factorization
//! for the basis-pursuit constraint projection.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Conjugated inner product `a^H b`.
pub fn inner(a: ArrayView1<C64>, b: ArrayView1<C64>) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn norm(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `m^H v` without materializing the adjoint.
pub fn adjoint_matvec(m: ArrayView2<C64>, v: ArrayView1<C64>) -> Array1<C64> {
    debug_assert_eq!(m.nrows(), v.len());
    Array1::from_iter(m.columns().into_iter().map(|c| inner(c, v)))
}

/// `a^H b` for two matrices sharing a row space.
pub fn adjoint_matmul(a: ArrayView2<C64>, b: ArrayView2<C64>) -> Array2<C64> {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut out = Array2::zeros((a.ncols(), b.ncols()));
    for i in 0..a.ncols() {
        for j in 0..b.ncols() {
            out[[i, j]] = inner(a.column(i), b.column(j));
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Householder reduction to real symmetric tridiagonal form followed by
/// implicit-shift QL iteration (eigenvalues only). The input is read from its
/// lower triangle; the strict upper triangle is ignored.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigenvalues needs a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut work = a.clone();
    let (mut d, mut e) = tridiagonalize(&mut work);
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalue is NaN"));
    Ok(d)
}

/// Singular values of a rectangular matrix, ascending.
///
/// Computed from the eigenvalues of the smaller Gram matrix, which limits the
/// absolute accuracy of tiny singular values to about `sqrt(eps) * sigma_max`.
/// When the smallest value lands in that noise zone, it is recomputed from
/// the eigenvalues of the Hermitian embedding `[[0, M], [M^H, 0]]` (whose
/// spectrum is plus/minus the singular values), which resolves values all the
/// way down to `eps * sigma_max`.
pub fn singular_values(m: ArrayView2<C64>) -> Result<Vec<f64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let gram = if cols <= rows {
        gram_adjoint(m)
    } else {
        gram_direct(m)
    };
    let eigs = hermitian_eigenvalues(&gram)?;
    let mut svs: Vec<f64> = eigs.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    let noise_floor = 1e-6 * svs.last().copied().unwrap_or(0.0);
    if svs.first().copied().unwrap_or(0.0) < noise_floor {
        svs = singular_values_embedded(m)?;
    }
    Ok(svs)
}

/// Singular values from the Jordan-Wielandt embedding; accurate for tiny
/// values but quadratically more expensive than the Gram route.
fn singular_values_embedded(m: ArrayView2<C64>) -> Result<Vec<f64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let n = rows + cols;
    let mut h = Array2::zeros((n, n));
    for i in 0..rows {
        for j in 0..cols {
            h[[i, rows + j]] = m[[i, j]];
            h[[rows + j, i]] = m[[i, j]].conj();
        }
    }
    let eigs = hermitian_eigenvalues(&h)?;
    // Spectrum is {+sigma_i, -sigma_i} plus |rows - cols| zeros; the largest
    // min(rows, cols) eigenvalues are the singular values, ascending.
    let k = rows.min(cols);
    Ok(eigs[n - k..].iter().map(|&l| l.max(0.0)).collect())
}

/// `m^H m` (cols x cols), Hermitian by construction.
pub fn gram_adjoint(m: ArrayView2<C64>) -> Array2<C64> {
    let n = m.ncols();
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = inner(m.column(i), m.column(j));
            g[[i, j]] = v;
            g[[j, i]] = v.conj();
        }
    }
    g
}

/// `m m^H` (rows x rows).
pub fn gram_direct(m: ArrayView2<C64>) -> Array2<C64> {
    let r = m.nrows();
    let mut g = Array2::zeros((r, r));
    for i in 0..r {
        for j in 0..=i {
            // (M M^H)[i][j] = sum_k M[i][k] conj(M[j][k]).
            let v = inner(m.row(j), m.row(i));
            g[[i, j]] = v;
            g[[j, i]] = v.conj();
        }
    }
    g
}

/// Householder reduction of a Hermitian matrix (lower triangle) to a real
/// symmetric tridiagonal (d, e). `e` has length n-1.
fn tridiagonalize(a: &mut Array2<C64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];

    for k in 0..n.saturating_sub(1) {
        // Reflector annihilating a[k+2.., k], leaving a real subdiagonal.
        let alpha = a[[k + 1, k]];
        let tail_norm_sqr: f64 = (k + 2..n).map(|i| a[[i, k]].norm_sqr()).sum();
        let full = (alpha.norm_sqr() + tail_norm_sqr).sqrt();

        if full == 0.0 {
            e[k] = 0.0;
            continue;
        }
        // beta is real with sign opposite Re(alpha) to avoid cancellation.
        let beta = if alpha.re >= 0.0 { -full } else { full };
        let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);

        if tau == C64::new(0.0, 0.0) {
            e[k] = beta;
            continue;
        }

        // v has implicit leading 1; scale the stored tail by 1/(alpha - beta).
        let scale = C64::new(1.0, 0.0) / (alpha - C64::new(beta, 0.0));
        let mut v = vec![C64::new(0.0, 0.0); n - k - 1];
        v[0] = C64::new(1.0, 0.0);
        for i in k + 2..n {
            v[i - k - 1] = a[[i, k]] * scale;
        }

        // p = tau * A22 * v, reading A22 from the lower triangle.
        let nb = n - k - 1;
        let mut p = vec![C64::new(0.0, 0.0); nb];
        for i in 0..nb {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..nb {
                let aij = if i >= j {
                    a[[k + 1 + i, k + 1 + j]]
                } else {
                    a[[k + 1 + j, k + 1 + i]].conj()
                };
                acc += aij * v[j];
            }
            p[i] = tau * acc;
        }
        // w = p - (tau (v^H p) / 2) v; v^H A22 v is real, so the correction is too.
        let vhp: C64 = v.iter().zip(p.iter()).map(|(x, y)| x.conj() * y).sum();
        let c = tau.conj() * vhp * 0.5;
        let w: Vec<C64> = p.iter().zip(v.iter()).map(|(pi, vi)| pi - c * vi).collect();

        // A22 <- A22 - v w^H - w v^H (lower triangle only).
        for i in 0..nb {
            for j in 0..=i {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[[k + 1 + i, k + 1 + j]] -= upd;
            }
        }

        e[k] = beta;
        a[[k + 1, k]] = C64::new(beta, 0.0);
    }

    for i in 0..n {
        d[i] = a[[i, i]].re;
    }
    (d, e)
}

/// Implicit-shift QL on a real symmetric tridiagonal; eigenvalues land in `d`.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = {
        let mut buf = e.to_vec();
        buf.push(0.0);
        buf
    };

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    last_estimate: d[l],
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Largest singular value by power iteration on `m^H m`.
///
/// Deterministic all-ones start vector; stops when the Rayleigh quotient
/// changes by less than `tol` relatively. Returns the estimate and the
/// iteration count, or an error carrying the last iterate if the cap is hit.
pub fn power_iteration_sigma_max(
    m: ArrayView2<C64>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return Ok((0.0, 0));
    }
    let mut v = Array1::from_elem(n, C64::new(1.0, 0.0));
    let nv = norm(v.view());
    v.mapv_inplace(|x| x / nv);

    let mut lambda_prev = f64::NAN;
    for it in 1..=max_iter {
        let w = m.dot(&v);
        let u = adjoint_matvec(m, w.view());
        // v is unit, so lambda = v^H (M^H M) v = ||M v||^2.
        let lambda = w.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let nu = norm(u.view());
        if nu == 0.0 {
            return Ok((0.0, it));
        }
        v = u.mapv(|x| x / nu);
        if lambda_prev.is_finite() && (lambda - lambda_prev).abs() <= tol * lambda.max(1e-300) {
            return Ok((lambda.sqrt(), it));
        }
        lambda_prev = lambda;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_estimate: lambda_prev.max(0.0).sqrt(),
    })
}

/// Compact Householder QR of an m x n matrix.
///
/// Stores the reflectors below the diagonal of `factors` and R on and above
/// it. Supports applying `Q^H` and thin-`Q`, and triangular solves with R,
/// which covers least squares, range-space projections, and the dual
/// certificate construction.
pub struct Qr {
    factors: Array2<C64>,
    taus: Vec<C64>,
    rows: usize,
    cols: usize,
}

impl Qr {
    pub fn new(a: Array2<C64>) -> Self {
        let (rows, cols) = a.dim();
        let mut f = a;
        let k = rows.min(cols);
        let mut taus = vec![C64::new(0.0, 0.0); k];

        for j in 0..k {
            let alpha = f[[j, j]];
            let tail_norm_sqr: f64 = (j + 1..rows).map(|i| f[[i, j]].norm_sqr()).sum();
            let full = (alpha.norm_sqr() + tail_norm_sqr).sqrt();
            if full == 0.0 {
                continue;
            }
            let beta = if alpha.re >= 0.0 { -full } else { full };
            let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
            let scale = C64::new(1.0, 0.0) / (alpha - C64::new(beta, 0.0));
            for i in j + 1..rows {
                f[[i, j]] *= scale;
            }
            f[[j, j]] = C64::new(beta, 0.0);
            taus[j] = tau;

            // Apply (I - tau v v^H)^H = I - conj(tau) v v^H to the trailing block.
            for c in j + 1..cols {
                let mut dot = f[[j, c]];
                for i in j + 1..rows {
                    dot += f[[i, j]].conj() * f[[i, c]];
                }
                let corr = tau.conj() * dot;
                f[[j, c]] -= corr;
                for i in j + 1..rows {
                    let vij = f[[i, j]];
                    f[[i, c]] -= corr * vij;
                }
            }
        }
        Qr {
            factors: f,
            taus,
            rows,
            cols,
        }
    }

    /// In-place `v <- Q^H v` for a length-m vector.
    pub fn apply_q_adjoint(&self, v: &mut Array1<C64>) {
        assert_eq!(v.len(), self.rows);
        for j in 0..self.taus.len() {
            let tau = self.taus[j];
            if tau == C64::new(0.0, 0.0) {
                continue;
            }
            let mut dot = v[j];
            for i in j + 1..self.rows {
                dot += self.factors[[i, j]].conj() * v[i];
            }
            let corr = tau.conj() * dot;
            v[j] -= corr;
            for i in j + 1..self.rows {
                let vij = self.factors[[i, j]];
                v[i] -= corr * vij;
            }
        }
    }

    /// In-place `v <- Q v` for a length-m vector.
    pub fn apply_q(&self, v: &mut Array1<C64>) {
        assert_eq!(v.len(), self.rows);
        for j in (0..self.taus.len()).rev() {
            let tau = self.taus[j];
            if tau == C64::new(0.0, 0.0) {
                continue;
            }
            let mut dot = v[j];
            for i in j + 1..self.rows {
                dot += self.factors[[i, j]].conj() * v[i];
            }
            let corr = tau * dot;
            v[j] -= corr;
            for i in j + 1..self.rows {
                let vij = self.factors[[i, j]];
                v[i] -= corr * vij;
            }
        }
    }

    /// Back-substitution `R x = y` on the leading n x n triangle.
    pub fn r_solve(&self, y: &[C64]) -> Result<Vec<C64>> {
        let n = self.cols;
        assert_eq!(y.len(), n);
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            for j in i + 1..n {
                let rij = self.factors[[i, j]];
                let xj = x[j];
                x[i] -= rij * xj;
            }
            let rii = self.factors[[i, i]];
            if rii.norm() == 0.0 {
                return Err(Error::RankDeficient { sigma_min: 0.0 });
            }
            x[i] /= rii;
        }
        Ok(x)
    }

    /// Forward substitution `R^H x = y`.
    pub fn r_adjoint_solve(&self, y: &[C64]) -> Result<Vec<C64>> {
        let n = self.cols;
        assert_eq!(y.len(), n);
        let mut x = y.to_vec();
        for i in 0..n {
            for j in 0..i {
                let rji = self.factors[[j, i]].conj();
                let xj = x[j];
                x[i] -= rji * xj;
            }
            let rii = self.factors[[i, i]].conj();
            if rii.norm() == 0.0 {
                return Err(Error::RankDeficient { sigma_min: 0.0 });
            }
            x[i] /= rii;
        }
        Ok(x)
    }

    /// Least-squares solution of `A x = z` for a tall matrix (m >= n) plus the
    /// residual norm `||A x - z||`.
    pub fn least_squares(&self, z: ArrayView1<C64>) -> Result<(Vec<C64>, f64)> {
        assert!(self.rows >= self.cols, "least_squares expects m >= n");
        let mut w = z.to_owned();
        self.apply_q_adjoint(&mut w);
        let head: Vec<C64> = w.iter().take(self.cols).copied().collect();
        let x = self.r_solve(&head)?;
        let resid = w
            .iter()
            .skip(self.cols)
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok((x, resid))
    }

    /// Norm of the projection of `v` onto the range of A (thin-Q coordinates).
    pub fn projection_norm(&self, v: ArrayView1<C64>) -> f64 {
        let mut w = v.to_owned();
        self.apply_q_adjoint(&mut w);
        w.iter()
            .take(self.cols.min(self.rows))
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest and largest |R_ii|; a cheap full-rank screen.
    pub fn diag_extent(&self) -> (f64, f64) {
        let k = self.rows.min(self.cols);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..k {
            let v = self.factors[[i, i]].norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if k == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

/// Cholesky factor L (lower, real positive diagonal) of a Hermitian
/// positive-definite matrix. Returns `None` when a pivot is not positive.
pub fn cholesky(a: &Array2<C64>) -> Option<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut l: Array2<C64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]].conj();
            }
            if i == j {
                let piv = sum.re;
                if !(piv > 0.0) || !piv.is_finite() {
                    return None;
                }
                l[[i, i]] = C64::new(piv.sqrt(), 0.0);
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solves `L L^H x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &Array2<C64>, b: ArrayView1<C64>) -> Array1<C64> {
    let n = l.nrows();
    assert_eq!(b.len(), n);
    let mut y = b.to_owned();
    for i in 0..n {
        for j in 0..i {
            let lij = l[[i, j]];
            let yj = y[j];
            y[i] -= lij * yj;
        }
        y[i] /= l[[i, i]];
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let lji = l[[j, i]].conj();
            let yj = y[j];
            y[i] -= lji * yj;
        }
        y[i] /= l[[i, i]];
    }
    y
}

//! Shared test support: an independent second-order-cone oracle for
//! equality-constrained l1 minimization.
//!
//! The oracle is a log-barrier path-following method with exact Newton steps
//! on the real embedding of `min sum t_i  s.t.  D s = z, |s_i| <= t_i`. It
//! shares nothing with the operator-splitting solver it is used to check:
//! different algorithm class (second-order interior path vs first-order
//! splitting) and its own Gaussian-elimination linear algebra.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64 as C64;

/// Dense Gaussian elimination with partial pivoting on a real system.
fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Minimum-norm feasible point of `D s = z` via the normal equations of the
/// adjoint, solved in the real embedding.
fn min_norm_solution(d: &Array2<C64>, z: ArrayView1<C64>) -> Option<Vec<C64>> {
    let m = d.nrows();
    let n = d.ncols();
    // G = D D^H (m x m complex); solve G w = z, then s = D^H w.
    let mut g = vec![vec![C64::new(0.0, 0.0); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += d[[i, k]] * d[[j, k]].conj();
            }
            g[i][j] = acc;
        }
    }
    // Real embedding: [Re -Im; Im Re] [Re w; Im w] = [Re z; Im z].
    let mut a = vec![vec![0.0; 2 * m]; 2 * m];
    let mut b = vec![0.0; 2 * m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = g[i][j].re;
            a[i][m + j] = -g[i][j].im;
            a[m + i][j] = g[i][j].im;
            a[m + i][m + j] = g[i][j].re;
        }
        b[i] = z[i].re;
        b[m + i] = z[i].im;
    }
    let w = solve_real(a, b)?;
    let mut s = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..m {
            acc += d[[i, k]].conj() * C64::new(w[i], w[m + i]);
        }
        s[k] = acc;
    }
    Some(s)
}

/// Optimal objective of `min ||s||_1  s.t.  D s = z` over complex vectors,
/// to roughly 1e-9 absolute accuracy. Returns `None` when no feasible point
/// is found (z outside the range of D).
pub fn l1_oracle_objective(d: &Array2<C64>, z: ArrayView1<C64>) -> Option<f64> {
    let m = d.nrows();
    let n = d.ncols();
    let s0 = min_norm_solution(d, z)?;
    // Check feasibility of the start.
    let mut resid = 0.0f64;
    for i in 0..m {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += d[[i, k]] * s0[k];
        }
        resid += (acc - z[i]).norm_sqr();
    }
    let znorm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if resid.sqrt() > 1e-8 * znorm.max(1.0) {
        return None;
    }

    // Variables v = [p_0..p_{n-1}, q_0..q_{n-1}, t_0..t_{n-1}].
    let nv = 3 * n;
    let nc = 2 * m;
    let mut v = vec![0.0; nv];
    for k in 0..n {
        v[k] = s0[k].re;
        v[n + k] = s0[k].im;
        v[2 * n + k] = s0[k].norm() + 1.0;
    }

    // Equality rows: real and imaginary parts of D s = z; t is unconstrained.
    let mut a_eq = vec![vec![0.0; nv]; nc];
    for i in 0..m {
        for k in 0..n {
            a_eq[i][k] = d[[i, k]].re;
            a_eq[i][n + k] = -d[[i, k]].im;
            a_eq[m + i][k] = d[[i, k]].im;
            a_eq[m + i][n + k] = d[[i, k]].re;
        }
    }

    // Strict interior of the second-order cone t >= sqrt(p^2 + q^2). The
    // t > 0 check pins the connected component: without it an iterate whose
    // (p, q) passes through the origin can slide onto the t < 0 branch of
    // t^2 > p^2 + q^2 and the objective diverges.
    let cone_ok = |v: &[f64], k: usize| -> bool {
        let (p, q, t) = (v[k], v[n + k], v[2 * n + k]);
        t > 0.0 && t * t - p * p - q * q > 0.0
    };
    let cone_slack = |v: &[f64], k: usize| -> f64 {
        let (p, q, t) = (v[k], v[n + k], v[2 * n + k]);
        t * t - p * p - q * q
    };

    let mut tau = 1.0f64;
    let target_gap = 1e-11;
    while 2.0 * n as f64 / tau > target_gap {
        // Newton iterations at this barrier weight.
        for _ in 0..60 {
            // Gradient and Hessian of tau * sum t + barrier.
            let mut g = vec![0.0; nv];
            let mut h = vec![vec![0.0; nv]; nv];
            for k in 0..n {
                let (p, q, t) = (v[k], v[n + k], v[2 * n + k]);
                let w = t * t - p * p - q * q;
                g[k] += 2.0 * p / w;
                g[n + k] += 2.0 * q / w;
                g[2 * n + k] += tau - 2.0 * t / w;
                let w2 = w * w;
                h[k][k] = 2.0 / w + 4.0 * p * p / w2;
                h[n + k][n + k] = 2.0 / w + 4.0 * q * q / w2;
                h[2 * n + k][2 * n + k] = -2.0 / w + 4.0 * t * t / w2;
                h[k][n + k] = 4.0 * p * q / w2;
                h[n + k][k] = h[k][n + k];
                h[k][2 * n + k] = -4.0 * p * t / w2;
                h[2 * n + k][k] = h[k][2 * n + k];
                h[n + k][2 * n + k] = -4.0 * q * t / w2;
                h[2 * n + k][n + k] = h[n + k][2 * n + k];
            }

            // KKT system [[H, A^T], [A, 0]] [dv; lam] = [-g; 0].
            let dim = nv + nc;
            let mut kkt = vec![vec![0.0; dim]; dim];
            let mut rhs = vec![0.0; dim];
            for r in 0..nv {
                for c in 0..nv {
                    kkt[r][c] = h[r][c];
                }
                rhs[r] = -g[r];
            }
            for r in 0..nc {
                for c in 0..nv {
                    kkt[nv + r][c] = a_eq[r][c];
                    kkt[c][nv + r] = a_eq[r][c];
                }
            }
            let sol = solve_real(kkt, rhs)?;
            let dv = &sol[..nv];

            let decrement: f64 = -(0..nv).map(|i| g[i] * dv[i]).sum::<f64>();
            if decrement / 2.0 < 1e-14 {
                break;
            }

            // Largest cone-feasible step, then backtrack on the objective.
            let mut step = 1.0f64;
            loop {
                let trial: Vec<f64> = (0..nv).map(|i| v[i] + step * dv[i]).collect();
                if (0..n).all(|k| cone_ok(&trial, k)) {
                    break;
                }
                step *= 0.5;
                if step < 1e-16 {
                    break;
                }
            }
            step *= 0.99;
            let f_of = |v: &[f64]| -> f64 {
                let mut f = 0.0;
                for k in 0..n {
                    if !cone_ok(v, k) {
                        return f64::INFINITY;
                    }
                    f += tau * v[2 * n + k] - cone_slack(v, k).ln();
                }
                f
            };
            let f0 = f_of(&v);
            loop {
                let trial: Vec<f64> = (0..nv).map(|i| v[i] + step * dv[i]).collect();
                if f_of(&trial) <= f0 - 1e-4 * step * decrement {
                    v = trial;
                    break;
                }
                step *= 0.5;
                if step < 1e-16 {
                    break;
                }
            }
            if step < 1e-16 {
                break;
            }
        }
        tau *= 8.0;
    }

    // Newton steps keep A dv = 0 only up to the conditioning of the KKT
    // system, which degrades at large barrier weight; the iterate can drift
    // off the constraint by enough to under-report the objective. Re-project
    // the s part onto the affine set before reading it off.
    let s_raw: Vec<C64> = (0..n).map(|k| C64::new(v[k], v[n + k])).collect();
    let mut violation = vec![C64::new(0.0, 0.0); m];
    for i in 0..m {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += d[[i, k]] * s_raw[k];
        }
        violation[i] = acc - z[i];
    }
    let viol_arr = ndarray::Array1::from_vec(violation);
    let correction = min_norm_solution(d, viol_arr.view())?;
    let obj: f64 = (0..n).map(|k| (s_raw[k] - correction[k]).norm()).sum();
    Some(obj)
}

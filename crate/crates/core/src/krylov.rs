//! Right-preconditioned GMRES: a flexible variant for outer solves with a
//! preconditioner that may change between iterations, and a standard
//! variant for inner solves. Preconditioned MINRES for symmetric
//! (possibly indefinite) systems with an SPD preconditioner.

use crate::error::{check_dim, Result};
use crate::la::vector::{axpy, dot, norm2, scale};
use crate::la::LinearOperator;

/// Stopping and storage parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual target `‖b - Ax‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Restart length; `None` keeps the full Krylov basis.
    pub restart: Option<usize>,
}

impl GmresOptions {
    /// Outer solver defaults: tol 1e-8, 500 iterations, no restart.
    pub fn outer() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            restart: None,
        }
    }

    /// Inner solver defaults: tol 1e-3, 200 iterations.
    pub fn inner() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 200,
            restart: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

/// Outcome of a Krylov solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovResult {
    pub iterations: usize,
    /// Estimated relative residual, starting with 1 for the zero guess.
    pub history: Vec<f64>,
    pub converged: bool,
    /// True relative residual of the returned iterate.
    pub relres: f64,
}

/// Identity preconditioner.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Flexible GMRES from a zero initial guess.
pub fn fgmres<A, P>(a: &A, b: &[f64], precond: &P, opts: &GmresOptions) -> Result<(Vec<f64>, KrylovResult)>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    gmres_core(a, b, precond, opts, true)
}

/// Standard right-preconditioned GMRES from a zero initial guess. The
/// preconditioner must be a fixed linear operator.
pub fn gmres<A, P>(a: &A, b: &[f64], precond: &P, opts: &GmresOptions) -> Result<(Vec<f64>, KrylovResult)>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    gmres_core(a, b, precond, opts, false)
}

/// Preconditioned conjugate gradients from a zero initial guess. `a` and
/// `precond` must be symmetric positive definite; convergence is measured in
/// the preconditioned residual norm `sqrt(rᵀ P r)` relative to its initial
/// value, which tracks the energy norm of the error.
pub fn pcg<A, P>(a: &A, b: &[f64], precond: &P, opts: &GmresOptions) -> Result<(Vec<f64>, KrylovResult)>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    let n = a.nrows();
    check_dim("cg rhs", n, b.len())?;
    check_dim("cg operator (square)", n, a.ncols())?;
    check_dim("cg preconditioner", n, precond.nrows())?;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Ok((
            x,
            KrylovResult {
                iterations: 0,
                history: vec![0.0],
                converged: rz == 0.0,
                relres: if rz == 0.0 { 0.0 } else { f64::NAN },
            },
        ));
    }
    let rz0 = rz;
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let rel = (rz_new.max(0.0) / rz0).sqrt();
        history.push(rel);
        if rel <= opts.tol {
            converged = true;
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let relres = *history.last().expect("history starts at 1");
    Ok((
        x,
        KrylovResult {
            iterations: it,
            history,
            converged,
            relres,
        },
    ))
}

/// Preconditioned MINRES from a zero initial guess. `a` must be symmetric
/// and `precond` symmetric positive definite; convergence is measured in the
/// `precond`-weighted residual norm `‖b - Ax‖_P / ‖b‖_P`, which is what
/// `relres` and `history` report.
pub fn minres<A, P>(a: &A, b: &[f64], precond: &P, opts: &GmresOptions) -> Result<(Vec<f64>, KrylovResult)>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    let n = a.nrows();
    check_dim("minres rhs", n, b.len())?;
    check_dim("minres operator (square)", n, a.ncols())?;
    check_dim("minres preconditioner", n, precond.nrows())?;
    let mut x = vec![0.0; n];
    let mut v_old = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&v, &mut z);
    let vz = dot(&z, &v);
    if !(vz > 0.0) {
        return Ok((
            x,
            KrylovResult {
                iterations: 0,
                history: vec![0.0],
                converged: vz == 0.0,
                relres: if vz == 0.0 { 0.0 } else { f64::NAN },
            },
        ));
    }
    let mut gamma = vz.sqrt();
    let gamma0 = gamma;
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s) = (0.0, 0.0);
    let (mut c_old, mut c) = (1.0, 1.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        scale(1.0 / gamma, &mut z);
        a.apply(&z, &mut az);
        let delta = dot(&az, &z);
        // v_new = A z - (δ/γ) v - (γ/γ_old) v_old
        let mut v_new = az.clone();
        axpy(-delta / gamma, &v, &mut v_new);
        axpy(-gamma / gamma_old, &v_old, &mut v_new);
        let mut z_new = vec![0.0; n];
        precond.apply(&v_new, &mut z_new);
        let gamma_new = dot(&z_new, &v_new).max(0.0).sqrt();
        let a0 = c * delta - c_old * s * gamma;
        let a1 = a0.hypot(gamma_new);
        let a2 = s * delta + c_old * c * gamma;
        let a3 = s_old * gamma;
        let c_new = a0 / a1;
        let s_new = gamma_new / a1;
        let mut w_new = z.clone();
        axpy(-a3, &w_old, &mut w_new);
        axpy(-a2, &w, &mut w_new);
        scale(1.0 / a1, &mut w_new);
        axpy(c_new * eta, &w_new, &mut x);
        eta *= -s_new;
        let rel = eta.abs() / gamma0;
        history.push(rel);
        w_old = std::mem::replace(&mut w, w_new);
        v_old = std::mem::replace(&mut v, v_new);
        z = z_new;
        gamma_old = gamma;
        gamma = gamma_new;
        s_old = s;
        s = s_new;
        c_old = c;
        c = c_new;
        if rel <= opts.tol {
            converged = true;
            break;
        }
        if gamma == 0.0 {
            // invariant subspace: the iterate is exact
            converged = true;
            break;
        }
    }
    let relres = *history.last().expect("history starts at 1");
    Ok((
        x,
        KrylovResult {
            iterations: it,
            history,
            converged,
            relres,
        },
    ))
}

fn gmres_core<A, P>(
    a: &A,
    b: &[f64],
    precond: &P,
    opts: &GmresOptions,
    flexible: bool,
) -> Result<(Vec<f64>, KrylovResult)>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    let n = a.nrows();
    check_dim("gmres rhs", n, b.len())?;
    check_dim("gmres operator (square)", n, a.ncols())?;
    check_dim("gmres preconditioner", n, precond.nrows())?;
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            KrylovResult {
                iterations: 0,
                history: vec![0.0],
                converged: true,
                relres: 0.0,
            },
        ));
    }
    let cycle_len = opts.restart.unwrap_or(opts.max_iter).max(1);
    let mut history = vec![1.0];
    let mut total_it = 0;
    let mut r = b.to_vec();
    let mut rnorm = bnorm;
    let mut converged = rnorm / bnorm <= opts.tol;
    let mut tmp = vec![0.0; n];

    while !converged && total_it < opts.max_iter {
        let m = cycle_len.min(opts.max_iter - total_it);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(if flexible { m } else { 0 });
        // column-major Hessenberg, already rotated
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = rnorm;
        let mut v0 = r.clone();
        scale(1.0 / rnorm, &mut v0);
        v.push(v0);

        let mut k = 0;
        while k < m {
            let mut zk = vec![0.0; n];
            precond.apply(&v[k], &mut zk);
            let mut w = vec![0.0; n];
            a.apply(&zk, &mut w);
            if flexible {
                z.push(zk);
            }
            let mut hk = vec![0.0; k + 2];
            let before = norm2(&w);
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                hk[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            let mut wn = norm2(&w);
            if wn < 0.7 * before {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    hk[i] += c;
                    axpy(-c, vi, &mut w);
                }
                wn = norm2(&w);
            }
            hk[k + 1] = wn;
            for i in 0..k {
                let t = cs[i] * hk[i] + sn[i] * hk[i + 1];
                hk[i + 1] = -sn[i] * hk[i] + cs[i] * hk[i + 1];
                hk[i] = t;
            }
            let rho = hk[k].hypot(hk[k + 1]);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (hk[k] / rho, hk[k + 1] / rho) };
            cs.push(c);
            sn.push(s);
            hk[k] = rho;
            hk[k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.push(hk);
            k += 1;
            total_it += 1;
            let est = g[k].abs() / bnorm;
            history.push(est);
            let breakdown = wn <= 1e-14 * before.max(f64::MIN_POSITIVE);
            if est <= opts.tol || breakdown {
                break;
            }
            let mut vk = w;
            scale(1.0 / wn, &mut vk);
            v.push(vk);
        }

        // back substitution for y
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in (i + 1)..k {
                s -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        if flexible {
            for (j, yj) in y.iter().enumerate() {
                axpy(*yj, &z[j], &mut x);
            }
        } else {
            let mut u = vec![0.0; n];
            for (j, yj) in y.iter().enumerate() {
                axpy(*yj, &v[j], &mut u);
            }
            precond.apply(&u, &mut tmp);
            axpy(1.0, &tmp, &mut x);
        }
        a.apply(&x, &mut tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
        rnorm = norm2(&r);
        let est = *history.last().unwrap();
        converged = est <= opts.tol || rnorm / bnorm <= opts.tol;
        if k < m && !converged {
            // breakdown without convergence: nothing more to gain
            break;
        }
    }
    let relres = rnorm / bnorm;
    Ok((
        x,
        KrylovResult {
            iterations: total_it,
            history,
            converged,
            relres,
        },
    ))
}

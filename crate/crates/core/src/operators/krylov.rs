//! Krylov solvers on flat `f64` vectors.

use serde::Serialize;

use crate::field::dot;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 5000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KrylovStats {
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖`, recomputed from the returned iterate
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn true_residual(apply: &mut impl FnMut(&[f64], &mut [f64]), b: &[f64], x: &[f64], out: &mut [f64]) -> f64 {
    apply(x, out);
    for (o, bi) in out.iter_mut().zip(b) {
        *o = bi - *o;
    }
    norm(out)
}

/// Preconditioned MINRES for a symmetric (possibly indefinite) operator.
///
/// `precond` must apply a symmetric positive definite map. Whatever it
/// does to its input is also what restricts the search space, so a
/// projection folded into it keeps every iterate inside the range of that
/// projection. The recurrence's residual estimate is measured in the
/// preconditioner norm, so convergence is confirmed on the true residual
/// and the solve restarts from the current iterate when the two disagree.
pub fn minres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    opts: KrylovOptions,
) -> (Vec<f64>, KrylovStats) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, KrylovStats { iterations: 0, residual: 0.0, converged: true });
    }
    let mut scratch = vec![0.0; n];
    let mut r0 = b.to_vec();
    let mut total = 0;
    let mut inner_tol = 0.1 * opts.tol;
    let mut residual = 1.0;
    while total < opts.max_iter {
        let (dx, used) = minres_cycle(&mut apply, &mut precond, &r0, inner_tol, opts.max_iter - total);
        total += used;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        residual = true_residual(&mut apply, b, &x, &mut scratch) / bnorm;
        if residual <= opts.tol {
            return (x, KrylovStats { iterations: total, residual, converged: true });
        }
        if used == 0 {
            break;
        }
        r0.copy_from_slice(&scratch);
        inner_tol = (inner_tol * 0.1).max(1e-16);
    }
    (x, KrylovStats { iterations: total, residual, converged: false })
}

fn minres_cycle(
    apply: &mut impl FnMut(&[f64], &mut [f64]),
    precond: &mut impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = vec![0.0; n];
    precond(&r1, &mut y);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return (x, 0);
    }
    let mut r2 = r1.clone();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        apply(&v, &mut y);
        if itn >= 2 {
            let f = beta / oldb;
            for (yi, r) in y.iter_mut().zip(&r1) {
                *yi -= f * r;
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for (yi, r) in y.iter_mut().zip(&r2) {
            *yi -= f * r;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond(&r2, &mut y);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        let denom = 1.0 / gamma;
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        if phibar <= tol * beta1 || beta == 0.0 {
            return (x, itn);
        }
    }
    (x, max_iter)
}

/// Restarted GMRES(m) with modified Gram–Schmidt; no preconditioning.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    restart: usize,
    opts: KrylovOptions,
) -> (Vec<f64>, KrylovStats) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, KrylovStats { iterations: 0, residual: 0.0, converged: true });
    }
    let m = restart.max(1);
    let mut r = vec![0.0; n];
    let mut total = 0;
    let mut residual = true_residual(&mut apply, b, &x, &mut r) / bnorm;
    while total < opts.max_iter && residual > opts.tol {
        let beta = norm(&r);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut k = 0;
        while k < m && total < opts.max_iter {
            let mut wv = vec![0.0; n];
            apply(&basis[k], &mut wv);
            total += 1;
            for (j, q) in basis.iter().enumerate() {
                h[j][k] = dot(&wv, q);
                for (wi, qi) in wv.iter_mut().zip(q) {
                    *wi -= h[j][k] * qi;
                }
            }
            let next = norm(&wv);
            h[k + 1][k] = next;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            if g[k].abs() <= 0.1 * opts.tol * bnorm || next == 0.0 {
                break;
            }
            basis.push(wv.iter().map(|wi| wi / next).collect());
        }
        let mut coef = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * coef[j]).sum();
            coef[i] = (g[i] - s) / h[i][i];
        }
        for (j, cj) in coef.iter().enumerate() {
            for (xi, qi) in x.iter_mut().zip(&basis[j]) {
                *xi += cj * qi;
            }
        }
        residual = true_residual(&mut apply, b, &x, &mut r) / bnorm;
    }
    (x, KrylovStats { iterations: total, residual, converged: residual <= opts.tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64], y: &mut [f64], diag: &[f64]) {
        let n = x.len();
        for i in 0..n {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s -= x[i - 1];
            }
            if i + 1 < n {
                s -= x[i + 1];
            }
            y[i] = s;
        }
    }

    #[test]
    fn minres_solves_an_indefinite_system() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| if i % 7 == 0 { -3.0 } else { 3.5 }).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 13 % 17) as f64 - 8.0) / 8.0).collect();
        let (x, stats) = minres(|x, y| tridiag(x, y, &diag), |r, z| z.copy_from_slice(r), &b, KrylovOptions::default());
        assert!(stats.converged, "{stats:?}");
        let mut ax = vec![0.0; n];
        tridiag(&x, &mut ax, &diag);
        let err: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * norm(&b));
    }

    #[test]
    fn minres_with_diagonal_preconditioner() {
        let n = 100;
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + i as f64).collect();
        let b = vec![1.0; n];
        let d2 = diag.clone();
        let (_, plain) = minres(|x, y| tridiag(x, y, &diag), |r, z| z.copy_from_slice(r), &b, KrylovOptions::default());
        let (_, pre) = minres(
            |x, y| tridiag(x, y, &diag),
            |r, z| z.iter_mut().zip(r).zip(&d2).for_each(|((zi, ri), di)| *zi = ri / di),
            &b,
            KrylovOptions::default(),
        );
        assert!(pre.converged && plain.converged);
        assert!(pre.iterations < plain.iterations);
    }

    #[test]
    fn gmres_solves_a_nonsymmetric_system() {
        let n = 80;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = 2.0 * x[i] + if i > 0 { 0.7 * x[i - 1] } else { 0.0 } - if i + 2 < n { 0.3 * x[i + 2] } else { 0.0 };
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, stats) = gmres(apply, &b, 30, KrylovOptions::default());
        assert!(stats.converged, "{stats:?}");
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let (x, s) = minres(|x, y| y.copy_from_slice(x), |r, z| z.copy_from_slice(r), &[0.0; 4], KrylovOptions::default());
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(s.iterations, 0);
    }
}

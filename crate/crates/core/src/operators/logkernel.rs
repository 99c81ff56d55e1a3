//! Free-space evaluation of `S_c h` through the fundamental solution of
//! `Δ_c = Δ − c²∂₁²`.
//!
//! With `ν = √(1 − c²)` and stretched coordinates `z = (y₁/ν, y₂)`,
//!
//! ```text
//! S_c h(y) = c² Δ_c⁻¹ ∂₁² h(y) = κ ∫ ln|z − z'|² ∂₁²h(y') dy',   κ = c² / (4πν)
//! ```
//!
//! The integral is a punctured rectangle rule over the grid nodes with
//! corrections on a 13-point stencil around the singular node, calibrated
//! per `ν` on anisotropic Gaussian moments.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use super::multiplier::{apply_multiplier, MultiplierSpec};
use crate::field::{Grid2D, RealField};
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A candidate normalisation `sign · c² / (4 π^power ν)` of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelPrefactor {
    pub sign: f64,
    pub pi_power: i32,
}

impl KernelPrefactor {
    pub const DERIVED: KernelPrefactor = KernelPrefactor { sign: 1.0, pi_power: 1 };
    pub const CANDIDATES: [KernelPrefactor; 4] = [
        KernelPrefactor { sign: 1.0, pi_power: 1 },
        KernelPrefactor { sign: -1.0, pi_power: 1 },
        KernelPrefactor { sign: 1.0, pi_power: 2 },
        KernelPrefactor { sign: -1.0, pi_power: 2 },
    ];

    pub fn value(&self, c: f64) -> f64 {
        let nu = (1.0 - c * c).sqrt();
        self.sign * c * c / (4.0 * PI.powi(self.pi_power) * nu)
    }

    pub fn label(&self) -> String {
        let s = if self.sign > 0.0 { "+" } else { "-" };
        match self.pi_power {
            1 => format!("{s}c^2/(4 pi)"),
            p => format!("{s}c^2/(4 pi^{p})"),
        }
    }
}

/// `∫ ln|z − z'|² g(y') dy'` at grid nodes, for a fixed source `g`.
pub struct LogKernelQuadrature {
    grid: Grid2D,
    nu: f64,
    g: Vec<f64>,
    sources: Vec<(i64, i64, f64)>,
    weights: [f64; 6],
}

impl LogKernelQuadrature {
    /// Sources below `1e-17 · max|g|` are skipped.
    pub fn new(g: &RealField, nu: f64) -> Self {
        let grid = g.grid().clone();
        let n = grid.n();
        let cutoff = 1e-17 * g.max_abs();
        let sources = g
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > cutoff)
            .map(|(idx, &v)| ((idx / n) as i64, (idx % n) as i64, v))
            .collect();
        Self {
            nu,
            g: g.values().to_vec(),
            sources,
            weights: correction_weights(nu),
            grid,
        }
    }

    pub fn at_node(&self, i0: usize, j0: usize) -> f64 {
        let n = self.grid.n();
        let dx = self.grid.spacing();
        let inv_nu2 = 1.0 / (self.nu * self.nu);
        let log_dx2 = (dx * dx).ln();
        let (i0, j0) = (i0 as i64, j0 as i64);
        let mut sum = 0.0;
        for &(i, j, v) in &self.sources {
            let (di, dj) = ((i - i0) as f64, (j - j0) as f64);
            let q = di * di * inv_nu2 + dj * dj;
            if q > 0.0 {
                sum += (log_dx2 + q.ln()) * v;
            }
        }
        let at = |i: i64, j: i64| {
            if (0..n as i64).contains(&i) && (0..n as i64).contains(&j) {
                self.g[i as usize * n + j as usize]
            } else {
                0.0
            }
        };
        sum += log_dx2 * at(i0, j0);
        for (w, offsets) in self.weights.iter().zip(STENCIL) {
            sum += w * offsets.iter().map(|&(di, dj)| at(i0 + di, j0 + dj)).sum::<f64>();
        }
        sum * dx * dx
    }
}

/// Lattice offsets sharing one correction weight.
const STENCIL: [&[(i64, i64)]; 6] = [
    &[(0, 0)],
    &[(1, 0), (-1, 0)],
    &[(0, 1), (0, -1)],
    &[(2, 0), (-2, 0)],
    &[(0, 2), (0, -2)],
    &[(1, 1), (1, -1), (-1, 1), (-1, -1)],
];

/// Correction weights on the unit lattice making the rule exact for
/// `p(t) e^{−|t|²/s²}` with `p ∈ {1, t₁², t₂², t₁⁴, t₂⁴, t₁²t₂²}`,
/// `t = (i/ν, j)`, at `s = 16`.
fn correction_weights(nu: f64) -> [f64; 6] {
    static CACHE: OnceLock<Mutex<HashMap<u64, [f64; 6]>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(w) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&nu.to_bits()) {
        return *w;
    }
    let s: f64 = 16.0;
    let s2 = s * s;
    let inv_nu = 1.0 / nu;
    let monomials = |t1: f64, t2: f64| {
        let (a, b) = (t1 * t1, t2 * t2);
        [1.0, a, b, a * a, b * b, a * b]
    };
    let reach_j = (6.5 * s).ceil() as i64;
    let reach_i = (6.5 * s * nu).ceil() as i64;
    let mut punctured = [0.0; 6];
    for i in -reach_i..=reach_i {
        for j in -reach_j..=reach_j {
            if i == 0 && j == 0 {
                continue;
            }
            let (t1, t2) = (i as f64 * inv_nu, j as f64);
            let q = t1 * t1 + t2 * t2;
            let l = q.ln() * (-q / s2).exp();
            for (acc, m) in punctured.iter_mut().zip(monomials(t1, t2)) {
                *acc += m * l;
            }
        }
    }
    // ∫ ln|t|² p(t) e^{−|t|²/s²} dt in closed form, times the Jacobian ν
    let ls = s2.ln();
    let exact = [
        PI * s2 * (ls - EULER_GAMMA),
        0.5 * PI * s2 * s2 * (ls + 1.0 - EULER_GAMMA),
        0.5 * PI * s2 * s2 * (ls + 1.0 - EULER_GAMMA),
        0.75 * PI * s2 * s2 * s2 * (ls + 1.5 - EULER_GAMMA),
        0.75 * PI * s2 * s2 * s2 * (ls + 1.5 - EULER_GAMMA),
        0.25 * PI * s2 * s2 * s2 * (ls + 1.5 - EULER_GAMMA),
    ];
    let mut a = [[0.0; 7]; 6];
    for k in 0..6 {
        for (g, offsets) in STENCIL.iter().enumerate() {
            a[k][g] = offsets
                .iter()
                .map(|&(i, j)| {
                    let (t1, t2) = (i as f64 * inv_nu, j as f64);
                    monomials(t1, t2)[k] * (-(t1 * t1 + t2 * t2) / s2).exp()
                })
                .sum();
        }
        a[k][6] = nu * exact[k] - punctured[k];
    }
    let w = solve6(a);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(nu.to_bits(), w);
    w
}

/// Gaussian elimination with partial pivoting on an augmented 6×7 matrix.
fn solve6(mut a: [[f64; 7]; 6]) -> [f64; 6] {
    for col in 0..6 {
        let piv = (col..6).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        for row in col + 1..6 {
            let f = a[row][col] / a[col][col];
            for k in col..7 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let s: f64 = (row + 1..6).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][6] - s) / a[row][row];
    }
    x
}

fn node_of(grid: &Grid2D, y: [f64; 2]) -> Result<(usize, usize)> {
    let dx = grid.spacing();
    let half = 0.5 * grid.length();
    let margin = grid.length() / 8.0;
    let mut idx = [0usize; 2];
    for axis in 0..2 {
        if y[axis].abs() > half - margin {
            return Err(Error::InvalidArgument(format!(
                "evaluation point {y:?} lies within L/8 of the boundary"
            )));
        }
        let s = (y[axis] + half) / dx;
        let r = s.round();
        if (s - r).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("evaluation point {y:?} is not a grid node")));
        }
        idx[axis] = r as usize;
    }
    Ok((idx[0], idx[1]))
}

/// `∫ ln|z − z'|² ∂₁²h(y') dy'` at each point, before the prefactor.
pub fn logkernel_integrals(h: &RealField, c: f64, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    if !(c.abs() < 1.0) {
        return Err(Error::SpeedOutOfRange(c.abs()));
    }
    let nodes = points.iter().map(|&p| node_of(h.grid(), p)).collect::<Result<Vec<_>>>()?;
    let nu = (1.0 - c * c).sqrt();
    let quad = LogKernelQuadrature::new(&h.derivative(2, 0), nu);
    Ok(nodes.into_iter().map(|(i, j)| quad.at_node(i, j)).collect())
}

/// Free-space `S_c h` at grid nodes, `c` along `e₁`.
pub fn logkernel_sc_oracle(h: &RealField, c: f64, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    if c == 0.0 {
        points.iter().try_for_each(|&p| node_of(h.grid(), p).map(|_| ()))?;
        return Ok(vec![0.0; points.len()]);
    }
    let k = KernelPrefactor::DERIVED.value(c);
    Ok(logkernel_integrals(h, c, points)?.into_iter().map(|v| k * v).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PrefactorReport {
    pub c: f64,
    /// (candidate label, relative L² mismatch against the periodic multiplier)
    pub candidates: Vec<(String, f64)>,
    pub best: String,
    pub best_error: f64,
}

/// Compares every candidate normalisation against the spectral `S_c h` at the
/// given nodes.
pub fn resolve_prefactor(h: &RealField, c: f64, points: &[[f64; 2]]) -> Result<PrefactorReport> {
    let raw = logkernel_integrals(h, c, points)?;
    let periodic = apply_multiplier(h, &MultiplierSpec::sc(c)?)?;
    let reference: Vec<f64> = points.iter().map(|&p| sample_node(&periodic, p)).collect();
    let ref_norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut candidates = Vec::new();
    for cand in KernelPrefactor::CANDIDATES {
        let k = cand.value(c);
        let err = raw
            .iter()
            .zip(&reference)
            .map(|(r, p)| (k * r - p).powi(2))
            .sum::<f64>()
            .sqrt()
            / ref_norm;
        candidates.push((cand.label(), err));
    }
    let (best, best_error) = candidates
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .expect("four candidates");
    Ok(PrefactorReport { c, candidates, best, best_error })
}

pub(crate) fn sample_node(f: &RealField, p: [f64; 2]) -> f64 {
    let (i, j) = node_of(f.grid(), p).expect("node checked by caller");
    f.at(i, j)
}

/// Grid nodes with `|y| ≤ radius`, every `stride`-th along each axis,
/// symmetric about the origin.
pub fn nodes_in_disc(grid: &Grid2D, radius: f64, stride: usize) -> Vec<[f64; 2]> {
    let n = grid.n();
    let o = grid.origin() / n;
    let stride = stride.max(1);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if (i as i64 - o as i64) % stride as i64 != 0 || (j as i64 - o as i64) % stride as i64 != 0 {
                continue;
            }
            let p = [grid.coord(i), grid.coord(j)];
            if p[0].hypot(p[1]) <= radius {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_matches_closed_form_on_gaussian() {
        // ∫ ln|t|² e^{−|t|²/s²} dy with t = (y₁/ν, y₂): νπs²(ln s² − γ)
        let g = Grid2D::new(128, 24.0).unwrap();
        let nu: f64 = 0.8;
        let s: f64 = 1.7;
        let f = RealField::from_fn(&g, |a, b| (-((a / nu).powi(2) + b * b) / (s * s)).exp());
        let quad = LogKernelQuadrature::new(&f, nu);
        let o = g.origin();
        let got = quad.at_node(o / 128, o % 128);
        let exact = nu * PI * s * s * ((s * s).ln() - EULER_GAMMA);
        assert!((got - exact).abs() < 1e-7 * exact.abs(), "{got} vs {exact}");
    }

    #[test]
    fn off_centre_node() {
        // shifted Gaussian evaluated at its own centre
        let g = Grid2D::new(256, 24.0).unwrap();
        let nu: f64 = 0.6;
        let (x0, y0) = (g.coord(140), g.coord(116));
        let f = RealField::from_fn(&g, |a, b| (-(((a - x0) / nu).powi(2) + (b - y0).powi(2))).exp());
        let got = LogKernelQuadrature::new(&f, nu).at_node(140, 116);
        let exact = nu * PI * (0.0 - EULER_GAMMA);
        assert!((got - exact).abs() < 1e-7, "{got} vs {exact}");
    }

    #[test]
    fn zero_speed_and_boundary() {
        let g = Grid2D::new(64, 16.0).unwrap();
        let h = RealField::from_fn(&g, |a, b| (-(a * a + b * b)).exp());
        let v = logkernel_sc_oracle(&h, 0.0, &[[0.0, 0.0], [g.coord(40), g.coord(30)]]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
        assert!(logkernel_sc_oracle(&h, 0.3, &[[g.coord(2), 0.0]]).is_err());
        assert!(logkernel_sc_oracle(&h, 0.3, &[[0.01, 0.0]]).is_err());
    }

    #[test]
    fn odd_sources_give_odd_values() {
        let g = Grid2D::new(64, 16.0).unwrap();
        let h = RealField::from_fn(&g, |a, b| a * (-(a * a + 2.0 * b * b)).exp());
        let (p, m) = ([g.coord(36), g.coord(35)], [g.coord(28), g.coord(35)]);
        let v = logkernel_sc_oracle(&h, 0.3, &[p, m]).unwrap();
        assert!((v[0] + v[1]).abs() < 1e-13 * v[0].abs());
    }

    #[test]
    fn prefactor_labels() {
        let labels: Vec<_> = KernelPrefactor::CANDIDATES.iter().map(|k| k.label()).collect();
        assert_eq!(labels, ["+c^2/(4 pi)", "-c^2/(4 pi)", "+c^2/(4 pi^2)", "-c^2/(4 pi^2)"]);
    }
}

//! Tail behaviour of the profile: exponential decay of `U_c`, algebraic
//! tails of `N_c` and `V_c`, and the large-`|y|` pseudo-moment expansion of
//! `N_c`.
//!
//! Algebraic tails are measured on a zero-padded copy of `|U_c|²` (the
//! periodic images of a `|y|⁻²` field are not small on the solve box).

use std::f64::consts::PI;

use serde::Serialize;

use crate::field::{ComplexField, Grid2D, RealField};
use crate::ground_state::least_squares;
use crate::operators::{apply_multiplier, logkernel_sc_oracle, MultiplierKind, MultiplierSpec};
use crate::solver::SolitonProfile;
use crate::{Error, Result};

/// Minimum number of radial shells a fit may use.
pub const MIN_SHELLS: usize = 50;

/// Largest RMS log-residual for which a fit is taken to describe the data.
pub const CLEAN_FIT_RESIDUAL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    /// `A e^{−α|y|}`
    Exponential,
    /// `A |y|^{−p}`
    Algebraic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Annulus {
    pub r_min: f64,
    pub r_max: f64,
}

impl Annulus {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        Self { r_min, r_max }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// `α` or `p`
    pub rate: f64,
    pub amplitude: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// RMS of the log residuals
    pub residual: f64,
    pub shells: usize,
}

impl DecayFit {
    pub fn is_clean(&self) -> bool {
        self.residual <= CLEAN_FIT_RESIDUAL
    }
}

/// `(radius of the maximiser, max |f|)` per shell of width one grid spacing.
pub fn shell_maxima(field: &RealField, annulus: Annulus) -> Result<Vec<(f64, f64)>> {
    let grid = field.grid();
    let limit = 0.5 * grid.length() - 2.0;
    if annulus.r_max > limit + 1e-12 || annulus.r_min >= annulus.r_max || annulus.r_min < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "annulus [{}, {}] must lie inside [0, L/2 − 2 = {limit}]",
            annulus.r_min, annulus.r_max
        )));
    }
    let width = grid.spacing();
    let count = ((annulus.r_max - annulus.r_min) / width).floor() as usize;
    let mut best = vec![(0.0, -1.0); count];
    for (idx, &v) in field.values().iter().enumerate() {
        let r = grid.radius(idx);
        if r < annulus.r_min || r >= annulus.r_min + count as f64 * width {
            continue;
        }
        let k = ((r - annulus.r_min) / width) as usize;
        if v.abs() > best[k].1 {
            best[k] = (r, v.abs());
        }
    }
    Ok(best.into_iter().filter(|s| s.1 >= 0.0).collect())
}

/// Least-squares fit of `log max_shell |f|` against `−α r` or `−p log r`.
pub fn fit_decay(field: &RealField, model: DecayModel, annulus: Annulus) -> Result<DecayFit> {
    let shells = shell_maxima(field, annulus)?;
    let floor = 10.0 * f64::EPSILON * field.max_abs();
    let usable: Vec<(f64, f64)> = shells.into_iter().filter(|s| s.1 > floor).collect();
    if usable.is_empty() {
        return Err(Error::DegenerateFit(format!(
            "field below 10 eps on the whole annulus [{}, {}]",
            annulus.r_min, annulus.r_max
        )));
    }
    if usable.len() < MIN_SHELLS {
        return Err(Error::DegenerateFit(format!(
            "only {} usable shells in [{}, {}], need {MIN_SHELLS}",
            usable.len(),
            annulus.r_min,
            annulus.r_max
        )));
    }
    let x = |r: f64| match model {
        DecayModel::Exponential => r,
        DecayModel::Algebraic => r.ln(),
    };
    let pts: Vec<(f64, f64)> = usable.iter().map(|&(r, v)| (x(r), v.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    let residual = (pts.iter().map(|&(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(DecayFit {
        model,
        rate: -slope,
        amplitude: intercept.exp(),
        r_min: annulus.r_min,
        r_max: annulus.r_max,
        residual,
        shells: pts.len(),
    })
}

/// `exp(mean log(max_b / max_a))` over the shells of `annulus`.
pub fn amplitude_ratio(a: &RealField, b: &RealField, annulus: Annulus) -> Result<f64> {
    let sa = shell_maxima(a, annulus)?;
    let sb = shell_maxima(b, annulus)?;
    if sa.len() != sb.len() || sa.is_empty() {
        return Err(Error::GridMismatch);
    }
    let mean = sa.iter().zip(&sb).map(|(x, y)| (y.1 / x.1).ln()).sum::<f64>() / sa.len() as f64;
    Ok(mean.exp())
}

/// Radius beyond 2 where `e^{−r} = c²/r²`; infinite for `c = 0`.
pub fn crossover_radius(c: f64) -> f64 {
    if c == 0.0 {
        return f64::INFINITY;
    }
    let f = |r: f64| -r - (c * c).ln() + 2.0 * r.ln();
    let (mut lo, mut hi) = (2.0, 2.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `|U|²`, `N` and `V` recomputed on a zero-padded box `factor` times larger.
#[derive(Clone, Debug)]
pub struct FarField {
    pub c: [f64; 2],
    pub h: RealField,
    pub n: RealField,
    pub v: [RealField; 2],
}

pub fn far_field(profile: &SolitonProfile, factor: usize) -> Result<FarField> {
    let h = profile.u.abs_sqr().extend(factor)?;
    let c = profile.c;
    let sc = apply_multiplier(&h, &MultiplierSpec::new(MultiplierKind::Sc, c)?)?;
    let n = h.add(&sc).scale(-1.0);
    let v = [
        apply_multiplier(&h, &MultiplierSpec::new(MultiplierKind::Tc1, c)?)?.scale(-1.0),
        apply_multiplier(&h, &MultiplierSpec::new(MultiplierKind::Tc2, c)?)?.scale(-1.0),
    ];
    Ok(FarField { c, h, n, v })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepOptions {
    pub m_max: u32,
    /// annulus for the exponential fits of `∂^m U` (solve grid)
    pub u_annulus: Annulus,
    /// outer radius of the algebraic fits (padded grid)
    pub far_radius: f64,
    /// inner radius of the `V` fits
    pub v_inner: f64,
    pub padding: usize,
    pub min_rate: f64,
    pub power_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            m_max: 2,
            u_annulus: Annulus::new(6.0, 16.0),
            far_radius: 30.0,
            v_inner: 8.0,
            padding: 4,
            min_rate: 0.5,
            power_tol: 0.2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub field: &'static str,
    pub m: [u32; 2],
    pub fit: DecayFit,
    /// expected algebraic power `|m| + 2`, or `None` for the exponential fits
    pub expected_power: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecaySweep {
    pub c: [f64; 2],
    pub crossover: f64,
    pub rows: Vec<SweepRow>,
}

impl DecaySweep {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Tail fits of `∂^m U`, `∂^m N`, `∂^m V_j` for `|m| ≤ m_max`. `N` is fitted
/// beyond 1.5× the exponential crossover radius.
pub fn derivative_decay_sweep(profile: &SolitonProfile, opts: SweepOptions) -> Result<DecaySweep> {
    if opts.m_max > 3 {
        return Err(Error::InvalidArgument(format!("m_max = {} exceeds 3", opts.m_max)));
    }
    let far = far_field(profile, opts.padding)?;
    let crossover = crossover_radius(profile.speed());
    let n_annulus = Annulus::new(1.5 * crossover, opts.far_radius);
    let v_annulus = Annulus::new(opts.v_inner, opts.far_radius);
    let mut rows = Vec::new();
    for order in 0..=opts.m_max {
        for m1 in (0..=order).rev() {
            let m = [m1, order - m1];
            let du = complex_derivative(&profile.u, m).abs();
            let fit = fit_decay(&du, DecayModel::Exponential, opts.u_annulus)?;
            let pass = fit.rate >= opts.min_rate;
            rows.push(SweepRow { field: "U", m, fit, expected_power: None, pass });
            let expected = (order + 2) as f64;
            for (name, f, annulus) in [
                ("N", &far.n, n_annulus),
                ("V1", &far.v[0], v_annulus),
                ("V2", &far.v[1], v_annulus),
            ] {
                let fit = fit_decay(&f.derivative(m[0], m[1]), DecayModel::Algebraic, annulus)?;
                let pass = (fit.rate - expected).abs() <= opts.power_tol;
                rows.push(SweepRow {
                    field: name,
                    m,
                    fit,
                    expected_power: Some(expected),
                    pass,
                });
            }
        }
    }
    Ok(DecaySweep {
        c: profile.c,
        crossover,
        rows,
    })
}

fn complex_derivative(u: &ComplexField, m: [u32; 2]) -> ComplexField {
    if m == [0, 0] {
        u.clone()
    } else {
        u.derivative(m[0], m[1])
    }
}

/// `C_{c,K} = (2K + 5)! (1 + 8ν⁻²)^{2K+3}`.
pub fn expansion_constant(c: f64, k: usize) -> f64 {
    let nu2 = 1.0 - c * c;
    let fact: f64 = (1..=(2 * k + 5)).map(|i| i as f64).product();
    fact * (1.0 + 8.0 / nu2).powi(2 * k as i32 + 3)
}

/// Quadrature nodes `(ζ, weight · h)` of the pseudo-moments, with
/// `ζ = (y₁/ν, y₂)` and `dζ = dy/ν`.
struct MomentNodes {
    nodes: Vec<(f64, f64, f64)>,
}

impl MomentNodes {
    fn new(h: &RealField, nu: f64) -> Self {
        let grid = h.grid();
        let w = grid.cell_area() / nu;
        let nodes = h
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(idx, &v)| {
                let (a, b) = grid.point(idx);
                (a / nu, b, w * v)
            })
            .collect();
        Self { nodes }
    }

    /// `T_n(z) = |z|^{−2n−2} ∫ (2 − 4(n+1)(z₁ − ζ₁)²/|z|²)(2z·ζ − |ζ|²)^n H(ζ) dζ`, `n = 0..=k`.
    fn terms(&self, z: [f64; 2], k: usize) -> Vec<f64> {
        let z2 = z[0] * z[0] + z[1] * z[1];
        let mut acc = vec![0.0; k + 1];
        for &(s1, s2, w) in &self.nodes {
            let base = 2.0 * (z[0] * s1 + z[1] * s2) - (s1 * s1 + s2 * s2);
            let d1 = (z[0] - s1).powi(2) / z2;
            let mut pow = w;
            for (n, a) in acc.iter_mut().enumerate() {
                *a += (2.0 - 4.0 * (n as f64 + 1.0) * d1) * pow;
                pow *= base;
            }
        }
        let mut scale = 1.0 / z2;
        for a in acc.iter_mut() {
            *a *= scale;
            scale /= z2;
        }
        acc
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionSums {
    pub y: [f64; 2],
    pub z: [f64; 2],
    /// `T_n(z)`, `n = 0..=K`
    pub terms: Vec<f64>,
    /// cumulative sums with prefactor `−c²/(4πν²)`
    pub sums_pi: Vec<f64>,
    /// cumulative sums with prefactor `−c²/(4π²ν²)`
    pub sums_pi2: Vec<f64>,
}

fn check_expansion_args(y: [f64; 2], k: usize) -> Result<()> {
    if y[0].hypot(y[1]) < 4.0 {
        return Err(Error::InvalidArgument(format!("expansion needs |y| ≥ 4, got {y:?}")));
    }
    if k > 6 {
        return Err(Error::InvalidArgument(format!("expansion order {k} exceeds 6")));
    }
    Ok(())
}

fn cumulative(terms: &[f64], prefactor: f64) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |s, t| {
            *s += prefactor * t;
            Some(*s)
        })
        .collect()
}

/// Partial sums `n = 0..=K` of the far-field expansion of `N_c` at `y`,
/// for `c = c e₁` and `h = |U_c|²`.
pub fn expansion_eval(h: &RealField, c: f64, y: [f64; 2], k: usize) -> Result<ExpansionSums> {
    check_expansion_args(y, k)?;
    let nu = (1.0 - c * c).sqrt();
    let nodes = MomentNodes::new(h, nu);
    Ok(expansion_at(&nodes, c, y, k))
}

fn expansion_at(nodes: &MomentNodes, c: f64, y: [f64; 2], k: usize) -> ExpansionSums {
    let nu2 = 1.0 - c * c;
    let z = [y[0] / nu2.sqrt(), y[1]];
    let terms = nodes.terms(z, k);
    ExpansionSums {
        y,
        z,
        sums_pi: cumulative(&terms, -c * c / (4.0 * PI * nu2)),
        sums_pi2: cumulative(&terms, -c * c / (4.0 * PI * PI * nu2)),
        terms,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub y: [f64; 2],
    pub z: [f64; 2],
    pub radius: f64,
    /// free-space `N_c(y)`
    pub n_value: f64,
    /// partial sums `n = 0..=K` with the better prefactor
    pub partial_sums: Vec<f64>,
    /// `|N_c(y) − Σ_{n≤K}|`
    pub error: f64,
    /// `|N_c(y) − Σ_{n≤0}|`
    pub error_k0: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayScan {
    pub direction: [f64; 2],
    pub rows: Vec<ExpansionRow>,
    /// log-log slope of the error against `|y|`
    pub slope: f64,
    /// `K`-sum error below the `K = 0` error at every row
    pub beats_leading_term: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub c: f64,
    pub nu: f64,
    pub k: usize,
    pub rays: Vec<RayScan>,
    /// relative L² error of the order-`K` sum over all scan points, for
    /// `a = 1` (`π`) and `a = 2` (`π²`)
    pub prefactor_errors: [f64; 2],
    pub best_pi_power: u32,
    /// `C_{c,K}`, recorded only
    pub constant: f64,
    /// share of the order-`K` pseudo-moments carried by samples with `|y| ≥ L/2 − 2`
    pub truncation_tail: f64,
}

/// Ray directions of the scan.
pub const SCAN_RAYS: [[i64; 2]; 3] = [[1, 0], [0, 1], [1, 1]];

/// Compares the expansion against the free-space `N_c = −h − S_c h`
/// (log-kernel quadrature on a zero-padded `h`) at grid nodes along the
/// rays `e₁`, `e₂` and the diagonal, for `r_min ≤ |y| ≤ r_max`.
pub fn expansion_error_scan(profile: &SolitonProfile, k: usize, r_min: f64, r_max: f64) -> Result<ExpansionReport> {
    if profile.c[1] != 0.0 {
        return Err(Error::InvalidArgument("the expansion is stated for c along e₁".into()));
    }
    if r_min < 4.0 || k > 6 {
        return Err(Error::InvalidArgument(format!("need r_min ≥ 4 and K ≤ 6, got {r_min}, {k}")));
    }
    let c = profile.c[0];
    let nu = (1.0 - c * c).sqrt();
    let h = profile.u.abs_sqr();
    let factor = (((r_max + 2.0) * 8.0 / 3.0) / h.grid().length()).ceil().max(1.0) as usize;
    let padded = h.extend(factor)?;
    let grid = padded.grid();
    let nodes = MomentNodes::new(&h, nu);

    let mut rays = Vec::new();
    let (mut err_pi, mut err_pi2, mut norm) = (0.0, 0.0, 0.0);
    for dir in SCAN_RAYS {
        let points = ray_nodes(grid, dir, r_min, r_max);
        let sc = logkernel_sc_oracle(&padded, c, &points)?;
        let mut rows = Vec::new();
        for (p, s) in points.iter().zip(&sc) {
            let hv = crate::operators::sample_node(&padded, *p);
            let n_value = -hv - s;
            let e = expansion_at(&nodes, c, *p, k);
            err_pi += (n_value - e.sums_pi[k]).powi(2);
            err_pi2 += (n_value - e.sums_pi2[k]).powi(2);
            norm += n_value * n_value;
            rows.push((n_value, e));
        }
        rays.push((dir, rows));
    }
    let prefactor_errors = [(err_pi / norm).sqrt(), (err_pi2 / norm).sqrt()];
    let best_pi_power = if prefactor_errors[0] <= prefactor_errors[1] { 1 } else { 2 };

    let rays = rays
        .into_iter()
        .map(|(dir, rows)| {
            let rows: Vec<ExpansionRow> = rows
                .into_iter()
                .map(|(n_value, e)| {
                    let sums = if best_pi_power == 1 { e.sums_pi } else { e.sums_pi2 };
                    ExpansionRow {
                        y: e.y,
                        z: e.z,
                        radius: e.y[0].hypot(e.y[1]),
                        n_value,
                        error: (n_value - sums[k]).abs(),
                        error_k0: (n_value - sums[0]).abs(),
                        partial_sums: sums,
                    }
                })
                .collect();
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius.ln(), r.error.ln())).collect();
            let slope = if pts.len() >= 2 { least_squares(&pts).0 } else { f64::NAN };
            let beats_leading_term = rows.iter().all(|r| r.error < r.error_k0);
            let norm = (dir[0] as f64).hypot(dir[1] as f64);
            RayScan {
                direction: [dir[0] as f64 / norm, dir[1] as f64 / norm],
                rows,
                slope,
                beats_leading_term,
            }
        })
        .collect();

    Ok(ExpansionReport {
        c,
        nu,
        k,
        rays,
        prefactor_errors,
        best_pi_power,
        constant: expansion_constant(c, k),
        truncation_tail: truncation_tail(&h, nu, k),
    })
}

fn ray_nodes(grid: &Grid2D, dir: [i64; 2], r_min: f64, r_max: f64) -> Vec<[f64; 2]> {
    let step = grid.spacing() * (dir[0] as f64).hypot(dir[1] as f64);
    let o = grid.origin();
    let (i0, j0) = ((o / grid.n()) as i64, (o % grid.n()) as i64);
    (1..)
        .map(|s: i64| (s, s as f64 * step))
        .take_while(|&(_, r)| r <= r_max + 1e-12)
        .filter(|&(_, r)| r >= r_min - 1e-12)
        .map(|(s, _)| {
            [
                grid.coord((i0 + s * dir[0]) as usize),
                grid.coord((j0 + s * dir[1]) as usize),
            ]
        })
        .collect()
}

fn truncation_tail(h: &RealField, nu: f64, k: usize) -> f64 {
    let grid = h.grid();
    let edge = 0.5 * grid.length() - 2.0;
    let (mut outer, mut total) = (0.0, 0.0);
    for (idx, &v) in h.values().iter().enumerate() {
        let (a, b) = grid.point(idx);
        let w = v.abs() * ((a / nu).powi(2) + b * b).powi(k as i32 + 1);
        total += w;
        if grid.radius(idx) >= edge {
            outer += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_solves_its_equation() {
        let r = crossover_radius(0.2);
        assert!(((-r).exp() - 0.04 / (r * r)).abs() < 1e-15);
        assert!(crossover_radius(0.1) > r);
        assert!(crossover_radius(0.0).is_infinite());
    }

    #[test]
    fn synthetic_fits() {
        let g = Grid2D::new(256, 40.0).unwrap();
        let e = RealField::from_fn(&g, |a, b| 3.0 * (-0.7 * a.hypot(b)).exp());
        let fit = fit_decay(&e, DecayModel::Exponential, Annulus::new(6.0, 16.0)).unwrap();
        assert!((fit.rate - 0.7).abs() < 0.01 && fit.is_clean());
        let p = RealField::from_fn(&g, |a, b| 2.0 / (a * a + b * b).max(1.0).powf(1.5));
        let fit = fit_decay(&p, DecayModel::Algebraic, Annulus::new(8.0, 18.0)).unwrap();
        assert!((fit.rate - 3.0).abs() < 0.01, "{}", fit.rate);
    }

    #[test]
    fn fit_rejects_bad_annuli_and_empty_fields() {
        let g = Grid2D::new(128, 40.0).unwrap();
        let f = RealField::from_fn(&g, |a, b| (-a.hypot(b)).exp());
        assert!(fit_decay(&f, DecayModel::Exponential, Annulus::new(6.0, 19.0)).is_err());
        assert!(fit_decay(&f, DecayModel::Exponential, Annulus::new(6.0, 8.0)).is_err());
        let z = RealField::zeros(&g);
        assert!(fit_decay(&z, DecayModel::Exponential, Annulus::new(2.0, 18.0)).is_err());
    }

    #[test]
    fn expansion_constant_value() {
        let fact11: f64 = (1..=11).map(|i| i as f64).product();
        let expect = fact11 * (1.0 + 8.0 / 0.96f64).powi(9);
        assert!((expansion_constant(0.2, 3) / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expansion_argument_checks() {
        let g = Grid2D::new(64, 20.0).unwrap();
        let h = RealField::zeros(&g);
        assert!(expansion_eval(&h, 0.2, [1.0, 1.0], 3).is_err());
        assert!(expansion_eval(&h, 0.2, [10.0, 0.0], 7).is_err());
    }
}

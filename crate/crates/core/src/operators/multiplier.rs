//! The anisotropic multipliers
//!
//! ```text
//! S_c     : (c·ξ)² / (|ξ|² − (c·ξ)²)
//! T_{c,j} : (c·ξ) ξ_j / (|ξ|² − (c·ξ)²)
//! ∂_{c_j} S_c : 2|ξ|² (c·ξ) ξ_j / (|ξ|² − (c·ξ)²)²
//! ```
//!
//! All five symbols are homogeneous of degree zero, so they have no limit at
//! `ξ = 0`. On the torus the zero mode is assigned the lattice-regularised
//! value of the symbol (see [`zero_mode_value`]), which makes the periodic
//! operator agree with the free-space one near the box centre up to image
//! terms of order `L⁻⁴`. Leaving the zero mode at 0 instead shifts the result
//! by a constant of order `c² ∫f / L²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::field::{Grid2D, Mode, RealField};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultiplierKind {
    Sc,
    Tc1,
    Tc2,
    DScDc1,
    DScDc2,
}

impl MultiplierKind {
    pub const ALL: [MultiplierKind; 5] = [
        MultiplierKind::Sc,
        MultiplierKind::Tc1,
        MultiplierKind::Tc2,
        MultiplierKind::DScDc1,
        MultiplierKind::DScDc2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MultiplierKind::Sc => "S_c",
            MultiplierKind::Tc1 => "T_c1",
            MultiplierKind::Tc2 => "T_c2",
            MultiplierKind::DScDc1 => "dS_c/dc1",
            MultiplierKind::DScDc2 => "dS_c/dc2",
        }
    }
}

/// A multiplier kind together with the speed vector it is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    pub speed: [f64; 2],
}

impl MultiplierSpec {
    pub fn new(kind: MultiplierKind, speed: [f64; 2]) -> Result<Self> {
        let c = speed[0].hypot(speed[1]);
        if !(c < 1.0) || !c.is_finite() {
            return Err(Error::SpeedOutOfRange(c));
        }
        Ok(Self { kind, speed })
    }

    pub fn sc(c: f64) -> Result<Self> {
        Self::new(MultiplierKind::Sc, [c, 0.0])
    }

    pub fn speed_norm(&self) -> f64 {
        self.speed[0].hypot(self.speed[1])
    }

    /// Symbol at a nonzero frequency.
    pub fn symbol(&self, xi: [f64; 2]) -> f64 {
        symbol(self.kind, self.speed, xi)
    }

    /// Sup of `|σ|` over `ξ ≠ 0`, from the elementary inequality
    /// `(c·ξ)² ≤ |c|²|ξ|²`.
    pub fn analytic_bound(&self) -> f64 {
        let c = self.speed_norm();
        let d = 1.0 - c * c;
        match self.kind {
            MultiplierKind::Sc => c * c / d,
            MultiplierKind::Tc1 | MultiplierKind::Tc2 => c / d,
            MultiplierKind::DScDc1 | MultiplierKind::DScDc2 => 2.0 * c / (d * d),
        }
    }

    fn lattice_symbol(&self, m: &Mode) -> f64 {
        if m.is_zero() {
            zero_mode_value(self.kind, self.speed)
        } else {
            // odd-safe wavenumbers: with c off-axis the signed Nyquist value
            // would break σ(-ξ) = σ(ξ)
            self.symbol(m.dxi)
        }
    }
}

pub(crate) fn symbol(kind: MultiplierKind, c: [f64; 2], xi: [f64; 2]) -> f64 {
    let cxi = c[0] * xi[0] + c[1] * xi[1];
    let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
    let den = xi2 - cxi * cxi;
    if den <= 0.0 {
        return 0.0;
    }
    match kind {
        MultiplierKind::Sc => cxi * cxi / den,
        MultiplierKind::Tc1 => cxi * xi[0] / den,
        MultiplierKind::Tc2 => cxi * xi[1] / den,
        MultiplierKind::DScDc1 => 2.0 * xi2 * cxi * xi[0] / (den * den),
        MultiplierKind::DScDc2 => 2.0 * xi2 * cxi * xi[1] / (den * den),
    }
}

/// Pointwise symbol multiplication in frequency space.
pub fn apply_multiplier(field: &RealField, spec: &MultiplierSpec) -> Result<RealField> {
    if !(spec.speed_norm() < 1.0) {
        return Err(Error::SpeedOutOfRange(spec.speed_norm()));
    }
    if spec.speed == [0.0, 0.0] {
        return Ok(RealField::zeros(field.grid()));
    }
    Ok(field.apply_symbol(|m| spec.lattice_symbol(m)))
}

/// Largest `|σ|` over the grid's nonzero modes.
pub fn multiplier_norm_certificate(spec: &MultiplierSpec, grid: &Grid2D) -> f64 {
    let n = grid.n();
    let mut best = 0.0f64;
    for k1 in 0..n {
        for k2 in 0..n {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let xi = [grid.deriv_wavenumber(k1), grid.deriv_wavenumber(k2)];
            best = best.max(spec.symbol(xi).abs());
        }
    }
    best
}

/// Lattice-regularised value of a degree-zero symbol at the origin,
///
/// ```text
/// σ₀ = lim_{ε→0} [ ∫ σ(ξ) e^{−ε²|ξ|²} dξ − Σ_{k ∈ ℤ², k≠0} σ(k) e^{−ε²|k|²} ]
/// ```
///
/// i.e. the weight the Riemann sum over a square lattice is missing at
/// `k = 0`. For `g` smooth and localised, the periodic sum
/// `|B|⁻¹ Σ_k σ(ξ_k) ĝ(ξ_k)` with this value at `k = 0` matches the free-space
/// integral up to terms that vanish faster than `|B|⁻¹`. The value does not
/// depend on the lattice spacing. It is computed at `ε = 0.1` and `0.05`,
/// then Richardson-extrapolated (the error is `O(ε²)`).
pub fn zero_mode_value(kind: MultiplierKind, c: [f64; 2]) -> f64 {
    if c == [0.0, 0.0] {
        return 0.0;
    }
    static CACHE: OnceLock<Mutex<HashMap<(MultiplierKind, u64, u64), f64>>> = OnceLock::new();
    let key = (kind, c[0].to_bits(), c[1].to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return *v;
    }
    let coarse = regularised_defect(kind, c, 0.1);
    let fine = regularised_defect(kind, c, 0.05);
    let value = fine + (fine - coarse) / 3.0;
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, value);
    value
}

fn regularised_defect(kind: MultiplierKind, c: [f64; 2], eps: f64) -> f64 {
    let integral = PI / (eps * eps) * angular_mean(kind, c);
    let reach = (40.0f64.sqrt() / eps).ceil() as i64;
    let mut sum = 0.0;
    for k1 in -reach..=reach {
        let mut row = 0.0;
        for k2 in -reach..=reach {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let (a, b) = (k1 as f64, k2 as f64);
            row += symbol(kind, c, [a, b]) * (-(eps * eps) * (a * a + b * b)).exp();
        }
        sum += row;
    }
    integral - sum
}

/// `(2π)⁻¹ ∫ σ(cos θ, sin θ) dθ` by the trapezoid rule (spectrally accurate
/// for smooth periodic integrands).
fn angular_mean(kind: MultiplierKind, c: [f64; 2]) -> f64 {
    let m = 8192;
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            symbol(kind, c, [t.cos(), t.sin()])
        })
        .sum::<f64>()
        / m as f64
}

/// Norms entering the Lipschitz-in-`c` estimates, and whether they hold.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub c: [f64; 2],
    pub c_tilde: [f64; 2],
    /// per `s ∈ {0, 2}`: (`‖S_c f − S_c̃ f‖_{H^s}`, bound)
    pub sc_difference: Vec<(f64, f64, f64)>,
    /// per `s` and `j`: (`‖∂_{c_j}S_c f − ∂_{c_j}S_c̃ f‖_{H^s}`, bound)
    pub dsc_difference: Vec<(f64, usize, f64, f64)>,
    /// relative mismatch between the `∂_{c_j}S_c` symbol and the centred
    /// difference of `S_c` in `c_j` (worst over the lattice and `j`)
    pub finite_difference_error: f64,
    pub passed: bool,
}

pub const FD_STEP: f64 = 1e-5;

/// Checks
/// `‖S_c f − S_c̃ f‖ ≤ 2|c − c̃| / ((1−|c|²)(1−|c̃|²)) ‖f‖` and
/// `‖∂S_c f − ∂S_c̃ f‖ ≤ 6|c − c̃| / ((1−|c|²)²(1−|c̃|²)²) ‖f‖` in `H⁰`, `H²`,
/// plus the derivative symbol against a centred difference with step
/// [`FD_STEP`].
pub fn lipschitz_in_c_check(f: &RealField, c: [f64; 2], c_tilde: [f64; 2]) -> Result<LipschitzReport> {
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let (a, b) = (norm(c), norm(c_tilde));
    let dc = norm([c[0] - c_tilde[0], c[1] - c_tilde[1]]);
    let (da, db) = (1.0 - a * a, 1.0 - b * b);
    let sc_const = 2.0 * dc / (da * db);
    let dsc_const = 6.0 * dc / (da * da * db * db);

    let s_c = apply_multiplier(f, &MultiplierSpec::new(MultiplierKind::Sc, c)?)?;
    let s_ct = apply_multiplier(f, &MultiplierSpec::new(MultiplierKind::Sc, c_tilde)?)?;
    let diff = s_c.sub(&s_ct);
    let mut passed = true;
    let mut sc_difference = Vec::new();
    let mut dsc_difference = Vec::new();
    for s in [0.0, 2.0] {
        let lhs = diff.sobolev_norm(s);
        let rhs = sc_const * f.sobolev_norm(s);
        passed &= lhs <= rhs * (1.0 + 1e-12) + 1e-300;
        sc_difference.push((s, lhs, rhs));
    }
    for (j, kind) in [(1, MultiplierKind::DScDc1), (2, MultiplierKind::DScDc2)] {
        let d1 = apply_multiplier(f, &MultiplierSpec::new(kind, c)?)?;
        let d2 = apply_multiplier(f, &MultiplierSpec::new(kind, c_tilde)?)?;
        let diff = d1.sub(&d2);
        for s in [0.0, 2.0] {
            let lhs = diff.sobolev_norm(s);
            let rhs = dsc_const * f.sobolev_norm(s);
            passed &= lhs <= rhs * (1.0 + 1e-12) + 1e-300;
            dsc_difference.push((s, j, lhs, rhs));
        }
    }
    let finite_difference_error = derivative_symbol_fd_error(c, f.grid());
    passed &= finite_difference_error <= 1e-6;
    Ok(LipschitzReport {
        c,
        c_tilde,
        sc_difference,
        dsc_difference,
        finite_difference_error,
        passed,
    })
}

/// Worst relative gap, over the grid's nonzero modes and `j ∈ {1, 2}`,
/// between the closed-form `∂_{c_j}` symbol and
/// `(σ_{S,c+h e_j} − σ_{S,c−h e_j}) / 2h`. Modes where the derivative symbol is
/// below `1e-8` of its sup are compared in absolute terms against that sup.
pub fn derivative_symbol_fd_error(c: [f64; 2], grid: &Grid2D) -> f64 {
    let h = FD_STEP;
    let n = grid.n();
    let scale = 2.0 * c[0].hypot(c[1]).max(1e-3) / (1.0 - c[0].hypot(c[1]).powi(2)).powi(2);
    let mut worst = 0.0f64;
    for (j, kind) in [(0usize, MultiplierKind::DScDc1), (1, MultiplierKind::DScDc2)] {
        let mut cp = c;
        let mut cm = c;
        cp[j] += h;
        cm[j] -= h;
        for k1 in 0..n {
            for k2 in 0..n {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let xi = [grid.deriv_wavenumber(k1), grid.deriv_wavenumber(k2)];
                let exact = symbol(kind, c, xi);
                let fd = (symbol(MultiplierKind::Sc, cp, xi) - symbol(MultiplierKind::Sc, cm, xi)) / (2.0 * h);
                let denom = exact.abs().max(1e-8 * scale);
                worst = worst.max((exact - fd).abs() / denom);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{symmetry_defect, SymmetryClass};

    fn torus() -> Grid2D {
        Grid2D::new(32, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_speed_gives_zero() {
        let g = torus();
        let f = RealField::from_fn(&g, |a, b| a.cos() + (2.0 * b).sin() + 0.3);
        for kind in MultiplierKind::ALL {
            let out = apply_multiplier(&f, &MultiplierSpec::new(kind, [0.0, 0.0]).unwrap()).unwrap();
            assert_eq!(out.max_abs(), 0.0);
        }
        assert_eq!(multiplier_norm_certificate(&MultiplierSpec::sc(0.0).unwrap(), &g), 0.0);
    }

    #[test]
    fn single_modes() {
        let g = torus();
        let spec = MultiplierSpec::sc(0.5).unwrap();
        let f = RealField::from_fn(&g, |a, _| a.cos());
        let out = apply_multiplier(&f, &spec).unwrap();
        let expect = f.scale(0.25 / 0.75);
        assert!(out.sub(&expect).max_abs() < 1e-14);
        let f = RealField::from_fn(&g, |_, b| b.cos());
        assert!(apply_multiplier(&f, &spec).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn rejects_superluminal_speed() {
        assert!(MultiplierSpec::sc(1.0).is_err());
        assert!(MultiplierSpec::new(MultiplierKind::Tc1, [0.8, 0.7]).is_err());
    }

    #[test]
    fn certificates_respect_bounds() {
        let g = Grid2D::new(64, 20.0).unwrap();
        let sc = MultiplierSpec::sc(0.5).unwrap();
        let cert = multiplier_norm_certificate(&sc, &g);
        assert!(cert <= 1.0 / 3.0 + 1e-15);
        assert!(cert >= 1.0 / 3.0 - 1e-12);
        let tc = MultiplierSpec::new(MultiplierKind::Tc1, [0.5, 0.0]).unwrap();
        assert!(multiplier_norm_certificate(&tc, &g) <= 2.0 / 3.0 + 1e-15);
        for kind in MultiplierKind::ALL {
            let spec = MultiplierSpec::new(kind, [0.3, 0.2]).unwrap();
            assert!(multiplier_norm_certificate(&spec, &g) <= spec.analytic_bound() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn zero_mode_value_for_sc_matches_direct_sum() {
        // reference from a direct ε-sweep at c = 0.3 (ε = 0.01 gives 0.0464200)
        let v = zero_mode_value(MultiplierKind::Sc, [0.3, 0.0]);
        assert!((v - 0.046420).abs() < 2e-6, "{v}");
        // odd-odd symbol averages out
        assert!(zero_mode_value(MultiplierKind::Tc2, [0.3, 0.0]).abs() < 1e-12);
        // T_c1 = S_c / c along e₁
        let t = zero_mode_value(MultiplierKind::Tc1, [0.3, 0.0]);
        assert!((t - v / 0.3).abs() < 1e-9);
        // bounded by the symbol's sup
        assert!(v > 0.0 && v < 0.09 / 0.91);
    }

    #[test]
    fn parity_is_preserved() {
        let g = Grid2D::new(64, 16.0).unwrap();
        let spec = MultiplierSpec::sc(0.4).unwrap();
        let ee = RealField::from_fn(&g, |a, b| (-(a * a) - 0.5 * b * b).exp());
        let oe = RealField::from_fn(&g, |a, b| a * (-(a * a) - b * b).exp());
        let out = apply_multiplier(&ee, &spec).unwrap();
        assert!(symmetry_defect(&out, SymmetryClass::Ee) < 1e-12);
        let out = apply_multiplier(&oe, &spec).unwrap();
        assert!(symmetry_defect(&out, SymmetryClass::Oe) < 1e-12);
        let t2 = MultiplierSpec::new(MultiplierKind::Tc2, [0.4, 0.0]).unwrap();
        assert!(symmetry_defect(&apply_multiplier(&ee, &t2).unwrap(), SymmetryClass::Oo) < 1e-12);
    }

    #[test]
    fn derivative_symbol_matches_finite_difference() {
        let g = Grid2D::new(32, 10.0).unwrap();
        for c in [[0.2, 0.0], [0.5, 0.0], [0.3, 0.25]] {
            let err = derivative_symbol_fd_error(c, &g);
            assert!(err < 1e-6, "c = {c:?}: {err}");
        }
    }

    #[test]
    fn lipschitz_identity_case() {
        let g = Grid2D::new(64, 16.0).unwrap();
        let f = RealField::from_fn(&g, |a, b| (-(a * a + b * b)).exp());
        let r = lipschitz_in_c_check(&f, [0.2, 0.0], [0.2, 0.0]).unwrap();
        assert!(r.passed);
        assert!(r.sc_difference.iter().all(|&(_, lhs, _)| lhs == 0.0));
        assert!(r.dsc_difference.iter().all(|&(_, _, lhs, _)| lhs == 0.0));
    }
}

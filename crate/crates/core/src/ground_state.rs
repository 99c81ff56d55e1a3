//! The ground state `Q > 0`, `ΔQ = Q − Q³`.

use log::debug;
use serde::Serialize;

use crate::field::{project, Grid2D, RealField, SymmetryClass};
use crate::operators::{invert_l_on_subspace, LinearizedOp};
use crate::{Error, Result};

const PETVIASHVILI_CAP: usize = 500;
const POLISH_SWITCH: f64 = 1e-4;
const NEWTON_CAP: usize = 12;

#[derive(Clone, Debug)]
pub struct GroundState {
    pub q: RealField,
    /// `‖ΔQ − Q + Q³‖_{L²}`
    pub residual: f64,
    pub peak: f64,
    /// `‖Q‖²_{L²}`
    pub mass: f64,
    pub petviashvili_iterations: usize,
    pub newton_iterations: usize,
}

impl GroundState {
    pub fn grid(&self) -> &Grid2D {
        self.q.grid()
    }

    /// Wraps an externally supplied profile (e.g. loaded from disk).
    pub fn from_field(q: RealField) -> Self {
        let residual = profile_residual(&q).norm_l2();
        Self {
            peak: q.max_abs(),
            mass: q.inner(&q),
            residual,
            q,
            petviashvili_iterations: 0,
            newton_iterations: 0,
        }
    }
}

/// `ΔQ − Q + Q³`.
pub fn profile_residual(q: &RealField) -> RealField {
    let lin = q.apply_symbol(|m| -(m.norm_sqr() + 1.0));
    lin.zip_map(q, |l, v| l + v * v * v)
}

/// Petviashvili iteration
/// `Q ← M^{3/2} (1 − Δ)⁻¹ Q³`, `M = ⟨(1 − Δ)Q, Q⟩ / ⟨Q³, Q⟩`,
/// from `2.2 e^{−|y|²/2}` with a RADIAL projection every step, then Newton
/// steps `L₊δ = ΔQ − Q + Q³` once the relative residual is below `1e-4`.
/// Stops at `‖ΔQ − Q + Q³‖ ≤ tol · ‖Q‖` (polishing past it while that
/// still pays off).
pub fn compute_q(grid: &Grid2D, tol: f64) -> Result<GroundState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if (-0.5 * grid.length()).exp() >= tol {
        return Err(Error::InvalidGrid(format!(
            "box length {} too small for tolerance {tol}: e^(-L/2) must be below it",
            grid.length()
        )));
    }
    let mut q = RealField::from_fn(grid, |a, b| 2.2 * (-0.5 * (a * a + b * b)).exp());
    let mut rel = relative_residual(&q);
    let mut petviashvili_iterations = 0;
    while rel > POLISH_SWITCH && petviashvili_iterations < PETVIASHVILI_CAP {
        let cube = q.map(|v| v * v * v);
        let num = q.apply_symbol(|m| 1.0 + m.norm_sqr()).inner(&q);
        let den = cube.inner(&q);
        if !(den > 0.0) || !num.is_finite() {
            return Err(Error::Stagnation("Petviashvili iterate collapsed"));
        }
        let factor = (num / den).powf(1.5);
        q = project(&cube.apply_symbol(|m| factor / (1.0 + m.norm_sqr())), SymmetryClass::Radial);
        if !q.is_finite() {
            return Err(Error::NonFinite("Petviashvili iterate"));
        }
        if q.max_abs() < 1e-8 {
            return Err(Error::Stagnation("Petviashvili iterate collapsed to zero"));
        }
        rel = relative_residual(&q);
        petviashvili_iterations += 1;
    }
    if rel > POLISH_SWITCH {
        return Err(Error::NoConvergence {
            solver: "Petviashvili",
            iterations: petviashvili_iterations,
            residual: rel,
        });
    }
    debug!("Petviashvili: {petviashvili_iterations} iterations, residual {rel:.3e}");

    let mut newton_iterations = 0;
    let floor = 1e-13;
    while newton_iterations < NEWTON_CAP && rel > floor {
        let f = project(&profile_residual(&q), SymmetryClass::Radial);
        let step = invert_l_on_subspace(&LinearizedOp::plus(&q), &f, SymmetryClass::Radial)?;
        let candidate = project(&q.add(&step.solution), SymmetryClass::Radial);
        let next = relative_residual(&candidate);
        newton_iterations += 1;
        if next >= rel && rel <= tol {
            break;
        }
        q = candidate;
        rel = next;
        debug!("Newton step {newton_iterations}: residual {rel:.3e}");
    }
    if rel > tol {
        return Err(Error::NoConvergence {
            solver: "ground-state Newton",
            iterations: newton_iterations,
            residual: rel,
        });
    }
    let gs = GroundState::from_field(q);
    if gs.q.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("computed ground state is not positive".into()));
    }
    Ok(GroundState {
        petviashvili_iterations,
        newton_iterations,
        ..gs
    })
}

fn relative_residual(q: &RealField) -> f64 {
    profile_residual(q).norm_l2() / q.norm_l2()
}

#[derive(Clone, Debug, Serialize)]
pub struct QDecayReport {
    /// `d/dr` of the fitted `log Q + ½ log r`
    pub slope: f64,
    pub intercept: f64,
    /// `max Q(r) r^{1/2} e^{r}` over the annulus
    pub max_weighted: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
}

/// Least-squares fit of `log Q(r) + ½ log r` against `r` on
/// `5 ≤ r ≤ L/2 − 2`.
pub fn q_decay_check(gs: &GroundState) -> Result<QDecayReport> {
    let grid = gs.grid();
    let (r_min, r_max) = (5.0, 0.5 * grid.length() - 2.0);
    let mut pts = Vec::new();
    for (idx, &v) in gs.q.values().iter().enumerate() {
        let r = grid.radius(idx);
        if r >= r_min && r <= r_max {
            if v <= 0.0 {
                return Err(Error::DegenerateFit(format!("non-positive Q = {v:e} at r = {r:.3}")));
            }
            pts.push((r, v.ln() + 0.5 * r.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("decay annulus is empty".into()));
    }
    let (slope, intercept) = least_squares(&pts);
    let max_weighted = pts.iter().map(|&(r, y)| (y + r).exp()).fold(0.0, f64::max);
    Ok(QDecayReport {
        slope,
        intercept,
        max_weighted,
        r_min,
        r_max,
        samples: pts.len(),
    })
}

/// Ordinary least squares `y ≈ a x + b`; returns `(a, b)`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PohozaevReport {
    /// `|∫|∇Q|² + ∫Q² − ∫Q⁴| / ∫Q⁴`
    pub energy_defect: f64,
    /// `|∫Q² − ½∫Q⁴| / ∫Q²`
    pub virial_defect: f64,
}

pub fn pohozaev_check(q: &RealField) -> PohozaevReport {
    let [g1, g2] = q.gradient();
    let grad = g1.inner(&g1) + g2.inner(&g2);
    let mass = q.inner(q);
    let q4 = q.map(|v| v.powi(4)).integral();
    PohozaevReport {
        energy_defect: (grad + mass - q4).abs() / q4,
        virial_defect: (mass - 0.5 * q4).abs() / mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_boxes_and_bad_tolerances() {
        let g = Grid2D::new(64, 16.0).unwrap();
        assert!(matches!(compute_q(&g, 1e-8), Err(Error::InvalidGrid(_))));
        assert!(compute_q(&g, 0.0).is_err());
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let (a, b) = least_squares(&pts);
        assert!((a + 0.5).abs() < 1e-14 && (b - 3.0).abs() < 1e-13);
    }

    #[test]
    fn decay_check_rejects_zero_field() {
        let g = Grid2D::new(64, 24.0).unwrap();
        let gs = GroundState::from_field(RealField::zeros(&g));
        assert!(q_decay_check(&gs).is_err());
    }
}

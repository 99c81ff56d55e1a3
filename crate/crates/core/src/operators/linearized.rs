//! `L₊ = −Δ + 1 − 3Q²` and `L₋ = −Δ + 1 − Q²`, and their inversion on
//! parity classes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::krylov::{minres, KrylovOptions, KrylovStats};
use crate::field::{project, project_in_place, symmetry_defect, Grid2D, RealField, SymmetryClass};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinearizedKind {
    Lplus,
    Lminus,
}

#[derive(Clone, Debug)]
pub struct LinearizedOp {
    kind: LinearizedKind,
    ground_state: RealField,
    potential: RealField,
}

impl LinearizedOp {
    pub fn new(kind: LinearizedKind, ground_state: &RealField) -> Self {
        let k = match kind {
            LinearizedKind::Lplus => 3.0,
            LinearizedKind::Lminus => 1.0,
        };
        Self {
            kind,
            ground_state: ground_state.clone(),
            potential: ground_state.map(|q| k * q * q),
        }
    }

    pub fn plus(q: &RealField) -> Self {
        Self::new(LinearizedKind::Lplus, q)
    }

    pub fn minus(q: &RealField) -> Self {
        Self::new(LinearizedKind::Lminus, q)
    }

    pub fn kind(&self) -> LinearizedKind {
        self.kind
    }

    pub fn ground_state(&self) -> &RealField {
        &self.ground_state
    }

    pub fn grid(&self) -> &Grid2D {
        self.ground_state.grid()
    }

    fn apply_raw(&self, w: &[f64], out: &mut [f64]) {
        let field = RealField::from_vec_unchecked(self.grid().clone(), w.to_vec());
        let shifted = field.apply_symbol(|m| 1.0 + m.norm_sqr());
        for ((o, s), (wi, p)) in out.iter_mut().zip(shifted.values()).zip(w.iter().zip(self.potential.values())) {
            *o = s - p * wi;
        }
    }
}

pub fn apply_l(op: &LinearizedOp, w: &RealField) -> Result<RealField> {
    if w.grid() != op.grid() {
        return Err(Error::GridMismatch);
    }
    let mut out = vec![0.0; w.values().len()];
    op.apply_raw(w.values(), &mut out);
    Ok(RealField::from_vec_unchecked(w.grid().clone(), out))
}

/// Result of a Krylov inversion, with its bound certificate
/// `‖g‖_{H²} / ‖f‖_{L²}`.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub solution: RealField,
    pub stats: KrylovStats,
    pub bound_ratio: f64,
}

fn pairing_allowed(kind: LinearizedKind, class: SymmetryClass) -> bool {
    matches!(
        (kind, class),
        (LinearizedKind::Lplus, SymmetryClass::Ee | SymmetryClass::Radial) | (LinearizedKind::Lminus, SymmetryClass::Oe)
    )
}

/// Solves `L g = f` inside `class` with the default tolerance `1e-10`.
pub fn invert_l_on_subspace(op: &LinearizedOp, f: &RealField, class: SymmetryClass) -> Result<Inversion> {
    invert_l_with(op, f, class, KrylovOptions::default())
}

/// MINRES preconditioned by `(1 − Δ)⁻¹`, with the class projection folded
/// into the preconditioner so the right-hand side and every iterate stay in
/// the class. On EE the kernel directions `∂_j Q` are odd and drop out; on
/// OE, `Q` is even and drops out.
pub fn invert_l_with(op: &LinearizedOp, f: &RealField, class: SymmetryClass, opts: KrylovOptions) -> Result<Inversion> {
    if !pairing_allowed(op.kind, class) {
        return Err(Error::InvalidArgument(format!("{:?} cannot be inverted on {}", op.kind, class.name())));
    }
    if f.grid() != op.grid() {
        return Err(Error::GridMismatch);
    }
    let fnorm = f.norm_l2();
    let defect = symmetry_defect(f, class);
    let tol = 1e-10 * fnorm;
    if defect > tol {
        return Err(Error::SymmetryViolation { what: "right-hand side", defect, tol });
    }
    let n = op.grid().n();
    let rhs = project(f, class);
    let grid = op.grid().clone();
    let precond = |r: &[f64], z: &mut [f64]| {
        let field = RealField::from_vec_unchecked(grid.clone(), r.to_vec());
        z.copy_from_slice(field.apply_symbol(|m| 1.0 / (1.0 + m.norm_sqr())).values());
        project_in_place(n, z, class);
    };
    let (x, stats) = minres(|w, out| op.apply_raw(w, out), precond, rhs.values(), opts);
    if !stats.converged {
        return Err(Error::NoConvergence {
            solver: "MINRES",
            iterations: stats.iterations,
            residual: stats.residual,
        });
    }
    let mut x = x;
    project_in_place(n, &mut x, class);
    let solution = RealField::from_vec_unchecked(grid, x);
    let bound_ratio = if fnorm > 0.0 { solution.sobolev_norm(2.0) / fnorm } else { 0.0 };
    Ok(Inversion { solution, stats, bound_ratio })
}

/// The radial `ρ` with `L₊ρ = |y|²Q/4`.
pub fn solve_rho(q: &RealField) -> Result<Inversion> {
    let rhs = RealField::from_fn(q.grid(), |a, b| 0.25 * (a * a + b * b)).mul(q);
    let rhs = project(&rhs, SymmetryClass::Radial);
    invert_l_on_subspace(&LinearizedOp::plus(q), &rhs, SymmetryClass::Radial)
}

/// The OE profile `R` with `L₋R = ∂_{y₁}Q`.
pub fn solve_r(q: &RealField) -> Result<Inversion> {
    let rhs = project(&q.derivative(1, 0), SymmetryClass::Oe);
    invert_l_on_subspace(&LinearizedOp::minus(q), &rhs, SymmetryClass::Oe)
}

/// `⟨L w, w⟩` in the discrete `L²` pairing.
pub fn quadratic_form(op: &LinearizedOp, w: &RealField) -> Result<f64> {
    Ok(apply_l(op, w)?.inner(w))
}

/// `⟨L₋w, w⟩ / ‖w‖²_{H¹}` for `count` random smooth `w` made orthogonal to
/// `ρ`, `∂_{y₁}Q` and `∂_{y₂}Q`.
pub fn coercivity(q: &RealField, rho: &RealField, count: usize, seed: u64) -> Result<Vec<f64>> {
    let grid = q.grid();
    let [d1, d2] = q.gradient();
    let mut basis: Vec<RealField> = Vec::new();
    for v in [rho.clone(), d1, d2] {
        let mut v = v;
        for b in &basis {
            let c = v.inner(b);
            v.axpy(-c, b);
        }
        let nv = v.norm_l2();
        basis.push(v.scale(1.0 / nv));
    }
    let op = LinearizedOp::minus(q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 0.2 * grid.length();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let bumps: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-reach..reach),
                    rng.gen_range(-reach..reach),
                    rng.gen_range(0.5..3.0),
                )
            })
            .collect();
        let mut w = RealField::from_fn(grid, |a, b| {
            bumps
                .iter()
                .map(|&(amp, x, y, s)| amp * (-((a - x).powi(2) + (b - y).powi(2)) / (s * s)).exp())
                .sum()
        });
        for b in &basis {
            let c = w.inner(b);
            w.axpy(-c, b);
        }
        out.push(quadratic_form(&op, &w)? / w.sobolev_norm(1.0).powi(2));
    }
    Ok(out)
}

//! Fixed-point construction of the travelling profile `(U_c, N_c, V_c)`.
//!
//! With `U = Q + η₁ + iη₂` and `c = c e₁`, the profile equation becomes
//! `L₊η₁ = F⁺(η)`, `L₋η₂ = F⁻(η)`, solved by iterating
//! `G(η) = (L₊⁻¹F⁺(η), L₋⁻¹F⁻(η))` on EE × OE.

use std::f64::consts::FRAC_PI_2;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::{project, symmetry_defect, ComplexField, Grid2D, RealField, SymmetryClass};
use crate::operators::{
    apply_multiplier, gmres, invert_l_with, KrylovOptions, KrylovStats, LinearizedOp, MultiplierKind, MultiplierSpec,
};
use crate::{Error, Result};

/// Consecutive growing updates after which the iteration is declared
/// divergent.
pub const DIVERGENCE_STREAK: usize = 5;

/// `(η₁, η₂)` with `η₁` EE and `η₂` OE.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaPair {
    pub eta1: RealField,
    pub eta2: RealField,
}

impl EtaPair {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            eta1: RealField::zeros(grid),
            eta2: RealField::zeros(grid),
        }
    }

    pub fn new(eta1: RealField, eta2: RealField) -> Result<Self> {
        eta1.check_grid(&eta2)?;
        Ok(Self { eta1, eta2 })
    }

    pub fn grid(&self) -> &Grid2D {
        self.eta1.grid()
    }

    /// `‖η₁‖_{H²} + ‖η₂‖_{H²}`
    pub fn e_norm(&self) -> f64 {
        self.eta1.sobolev_norm(2.0) + self.eta2.sobolev_norm(2.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            eta1: self.eta1.sub(&other.eta1),
            eta2: self.eta2.sub(&other.eta2),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            eta1: self.eta1.add(&other.eta1),
            eta2: self.eta2.add(&other.eta2),
        }
    }

    /// EE defect of `η₁` and OE defect of `η₂`.
    pub fn symmetry_defects(&self) -> (f64, f64) {
        (
            symmetry_defect(&self.eta1, SymmetryClass::Ee),
            symmetry_defect(&self.eta2, SymmetryClass::Oe),
        )
    }

    fn check_admissible(&self) -> Result<()> {
        let (d1, d2) = self.symmetry_defects();
        let scale = self.eta1.norm_l2() + self.eta2.norm_l2();
        let tol = 1e-8 * scale;
        if d1 > tol {
            return Err(Error::SymmetryViolation { what: "eta1 (EE)", defect: d1, tol });
        }
        if d2 > tol {
            return Err(Error::SymmetryViolation { what: "eta2 (OE)", defect: d2, tol });
        }
        Ok(())
    }

    fn to_vec(&self) -> Vec<f64> {
        let mut v = self.eta1.values().to_vec();
        v.extend_from_slice(self.eta2.values());
        v
    }

    fn from_slice(grid: &Grid2D, v: &[f64]) -> Self {
        let n = grid.len();
        Self {
            eta1: RealField::from_vec_unchecked(grid.clone(), v[..n].to_vec()),
            eta2: RealField::from_vec_unchecked(grid.clone(), v[n..].to_vec()),
        }
    }
}

/// Smooth random admissible perturbation with the given E-norm.
pub fn random_admissible_eta(grid: &Grid2D, e_norm: f64, seed: u64) -> EtaPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bumps = |count: usize| -> Vec<(f64, f64, f64, f64)> {
        (0..count)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(0.7..2.0),
                )
            })
            .collect()
    };
    let field = |b: Vec<(f64, f64, f64, f64)>| {
        RealField::from_fn(grid, move |y1, y2| {
            b.iter()
                .map(|&(a, x, y, s)| a * (-((y1 - x).powi(2) + (y2 - y).powi(2)) / (s * s)).exp())
                .sum()
        })
    };
    let eta = EtaPair {
        eta1: project(&field(bumps(4)), SymmetryClass::Ee),
        eta2: project(&field(bumps(4)), SymmetryClass::Oe),
    };
    let s = e_norm / eta.e_norm();
    EtaPair {
        eta1: eta.eta1.scale(s),
        eta2: eta.eta2.scale(s),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// stop when the E-norm of the update is at most this
    pub tol: f64,
    pub max_iter: usize,
    pub newton: bool,
    pub dealias: bool,
    /// largest admissible `|c|`
    pub c_cap: f64,
    pub krylov: KrylovOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            newton: false,
            dealias: false,
            c_cap: 0.5,
            // the inner solves must sit well below the outer tolerance
            krylov: KrylovOptions { tol: 1e-12, max_iter: 5000 },
        }
    }
}

/// The pieces of `F±` that do not depend on `η`: `Q`, `S_c(Q²)` and the
/// two linearised operators.
#[derive(Clone, Debug)]
pub struct FixedPointProblem {
    pub c: f64,
    q: RealField,
    sc_q2: RealField,
    spec: MultiplierSpec,
    lplus: LinearizedOp,
    lminus: LinearizedOp,
    dealias: bool,
}

impl FixedPointProblem {
    pub fn new(c: f64, q: &RealField, dealias: bool) -> Result<Self> {
        let spec = MultiplierSpec::sc(c)?;
        let mut q2 = q.mul(q);
        if dealias {
            q2 = two_thirds(&q2);
        }
        Ok(Self {
            c,
            sc_q2: apply_multiplier(&q2, &spec)?,
            q: q.clone(),
            spec,
            lplus: LinearizedOp::plus(q),
            lminus: LinearizedOp::minus(q),
            dealias,
        })
    }

    pub fn ground_state(&self) -> &RealField {
        &self.q
    }

    fn sc(&self, f: &RealField) -> RealField {
        let f = if self.dealias { two_thirds(f) } else { f.clone() };
        apply_multiplier(&f, &self.spec).expect("speed validated at construction")
    }

    fn finish(&self, f: RealField) -> RealField {
        if self.dealias {
            two_thirds(&f)
        } else {
            f
        }
    }

    /// `F⁺`, term by term.
    pub fn f_plus(&self, eta: &EtaPair) -> Result<RealField> {
        eta.check_admissible()?;
        let (q, e1, e2) = (&self.q, &eta.eta1, &eta.eta2);
        let s_q2 = &self.sc_q2;
        let s_qe1 = self.sc(&q.mul(e1));
        let s_e1e1 = self.sc(&e1.mul(e1));
        let s_e2e2 = self.sc(&e2.mul(e2));
        let mut sum = s_q2.mul(q);
        let terms = [
            s_q2.mul(e1),
            s_qe1.mul(q).scale(2.0),
            q.mul(e1).mul(e1).scale(3.0),
            q.mul(e2).mul(e2),
            s_qe1.mul(e1).scale(2.0),
            s_e1e1.mul(q),
            s_e2e2.mul(q),
            e1.mul(e1).mul(e1),
            e1.mul(e2).mul(e2),
            s_e1e1.mul(e1),
            s_e2e2.mul(e1),
        ];
        for t in &terms {
            sum.axpy(1.0, t);
        }
        Ok(self.finish(sum))
    }

    /// `F⁻`, term by term.
    pub fn f_minus(&self, eta: &EtaPair) -> Result<RealField> {
        eta.check_admissible()?;
        let (q, e1, e2) = (&self.q, &eta.eta1, &eta.eta2);
        let s_qe1 = self.sc(&q.mul(e1));
        let s_e1e1 = self.sc(&e1.mul(e1));
        let s_e2e2 = self.sc(&e2.mul(e2));
        let mut sum = self.sc_q2.mul(e2);
        let terms = [
            q.mul(e1).mul(e2).scale(2.0),
            s_qe1.mul(e2).scale(2.0),
            e1.mul(e1).mul(e2),
            e2.mul(e2).mul(e2),
            s_e1e1.mul(e2),
            s_e2e2.mul(e2),
        ];
        for t in &terms {
            sum.axpy(1.0, t);
        }
        Ok(self.finish(sum))
    }

    /// `G(η)`; both inversions run inside their class.
    pub fn g_map(&self, eta: &EtaPair, krylov: KrylovOptions) -> Result<EtaPair> {
        let fp = project(&self.f_plus(eta)?, SymmetryClass::Ee);
        let fm = project(&self.f_minus(eta)?, SymmetryClass::Oe);
        let g1 = invert_l_with(&self.lplus, &fp, SymmetryClass::Ee, krylov)?;
        let g2 = invert_l_with(&self.lminus, &fm, SymmetryClass::Oe, krylov)?;
        Ok(EtaPair {
            eta1: g1.solution,
            eta2: g2.solution,
        })
    }

    /// `dG(η)[δ]`, from the compact forms
    /// `F⁺ = |U|²(Q + η₁) − Q³ − 3Q²η₁ + S_c(|U|²)(Q + η₁)` and
    /// `F⁻ = (|U|² − Q² + S_c(|U|²)) η₂`.
    fn dg(&self, eta: &EtaPair, delta: &EtaPair, krylov: KrylovOptions) -> Result<EtaPair> {
        let (q, e1, e2) = (&self.q, &eta.eta1, &eta.eta2);
        let re = q.add(e1);
        let u2 = re.mul(&re).add(&e2.mul(e2));
        let s_u2 = self.sc(&u2);
        let m = re.mul(&delta.eta1).add(&e2.mul(&delta.eta2)).scale(2.0);
        let s_m = self.sc(&m);
        let q2 = q.mul(q);
        let dfp = m
            .mul(&re)
            .add(&u2.mul(&delta.eta1))
            .sub(&q2.mul(&delta.eta1).scale(3.0))
            .add(&s_m.mul(&re))
            .add(&s_u2.mul(&delta.eta1));
        let dfm = m
            .mul(e2)
            .add(&u2.sub(&q2).add(&s_u2).mul(&delta.eta2))
            .add(&s_m.mul(e2));
        let dfp = project(&self.finish(dfp), SymmetryClass::Ee);
        let dfm = project(&self.finish(dfm), SymmetryClass::Oe);
        Ok(EtaPair {
            eta1: invert_l_with(&self.lplus, &dfp, SymmetryClass::Ee, krylov)?.solution,
            eta2: invert_l_with(&self.lminus, &dfm, SymmetryClass::Oe, krylov)?.solution,
        })
    }
}

/// 2/3-rule truncation.
fn two_thirds(f: &RealField) -> RealField {
    let n = f.grid().n() as i64;
    let cut = n / 3;
    let grid = f.grid().clone();
    f.apply_symbol(|m| {
        let k1 = grid.freq_index(m.index[0]).abs();
        let k2 = grid.freq_index(m.index[1]).abs();
        if k1 > cut || k2 > cut {
            0.0
        } else {
            1.0
        }
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IterationReport {
    /// E-norm of `G(η_k) − η_k` per iteration
    pub update_norms: Vec<f64>,
    /// ratios of successive update norms
    pub contraction_factors: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub newton_steps: usize,
    /// `‖G(η*) − η*‖_E` at the returned iterate
    pub fixed_point_residual: f64,
    pub tol: f64,
}

impl IterationReport {
    /// Largest ratio of successive update norms while the updates are still
    /// above `10 · tol` (below that the ratios measure round-off, not the map).
    pub fn contraction_factor(&self) -> f64 {
        let floor = 10.0 * self.tol;
        self.update_norms
            .windows(2)
            .filter(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

pub fn f_plus(eta: &EtaPair, c: f64, q: &RealField) -> Result<RealField> {
    FixedPointProblem::new(c, q, false)?.f_plus(eta)
}

pub fn f_minus(eta: &EtaPair, c: f64, q: &RealField) -> Result<RealField> {
    FixedPointProblem::new(c, q, false)?.f_minus(eta)
}

pub fn g_map(eta: &EtaPair, c: f64, q: &RealField) -> Result<EtaPair> {
    FixedPointProblem::new(c, q, false)?.g_map(eta, SolverOptions::default().krylov)
}

/// Picard iteration from `η = 0`.
pub fn solve_eta(c: f64, q: &RealField, opts: SolverOptions) -> Result<(EtaPair, IterationReport)> {
    solve_eta_from(EtaPair::zeros(q.grid()), c, q, opts)
}

/// Picard iteration `η ← G(η)` from `seed`, optionally finished by Newton
/// steps on `η − G(η) = 0` (GMRES on the exact linearisation). The result
/// is returned with `converged = false` when `max_iter` runs out; five
/// consecutive growing updates are reported as divergence.
pub fn solve_eta_from(seed: EtaPair, c: f64, q: &RealField, opts: SolverOptions) -> Result<(EtaPair, IterationReport)> {
    if c.abs() > opts.c_cap {
        return Err(Error::InvalidArgument(format!("|c| = {} exceeds the cap {}", c.abs(), opts.c_cap)));
    }
    eta_seed_check(&seed, q)?;
    let problem = FixedPointProblem::new(c, q, opts.dealias)?;
    let mut eta = seed;
    let mut report = IterationReport {
        tol: opts.tol,
        ..Default::default()
    };
    let mut streak = 0;
    let mut next = problem.g_map(&eta, opts.krylov)?;
    while report.iterations < opts.max_iter {
        let update = next.sub(&eta).e_norm();
        report.iterations += 1;
        if let Some(&prev) = report.update_norms.last() {
            report.contraction_factors.push(update / prev);
            streak = if update > prev { streak + 1 } else { 0 };
        }
        report.update_norms.push(update);
        debug!("c = {c}: iteration {} update {update:.3e}", report.iterations);
        if !update.is_finite() || update > 1e6 || streak >= DIVERGENCE_STREAK {
            return Err(Error::Divergence { c, streak });
        }
        eta = next;
        if update <= opts.tol {
            report.converged = true;
            break;
        }
        if opts.newton && update < 1e-3 {
            let (polished, steps) = newton_polish(&problem, eta, opts)?;
            eta = polished;
            report.newton_steps += steps;
            let residual = problem.g_map(&eta, opts.krylov)?.sub(&eta).e_norm();
            report.converged = residual <= opts.tol;
            if report.converged {
                break;
            }
        }
        next = problem.g_map(&eta, opts.krylov)?;
    }
    report.fixed_point_residual = problem.g_map(&eta, opts.krylov)?.sub(&eta).e_norm();
    Ok((eta, report))
}

fn eta_seed_check(seed: &EtaPair, q: &RealField) -> Result<()> {
    seed.eta1.check_grid(q)?;
    seed.check_admissible()
}

fn newton_polish(problem: &FixedPointProblem, mut eta: EtaPair, opts: SolverOptions) -> Result<(EtaPair, usize)> {
    let grid = eta.grid().clone();
    let mut steps = 0;
    for _ in 0..8 {
        let g = problem.g_map(&eta, opts.krylov)?;
        let residual = g.sub(&eta);
        if residual.e_norm() <= opts.tol {
            break;
        }
        let b = residual.to_vec();
        let mut failure = None;
        let (delta, stats): (Vec<f64>, KrylovStats) = gmres(
            |x, out| {
                let d = EtaPair::from_slice(&grid, x);
                match problem.dg(&eta, &d, opts.krylov) {
                    Ok(dg) => {
                        let jx = d.sub(&dg).to_vec();
                        out.copy_from_slice(&jx);
                    }
                    Err(e) => {
                        failure = Some(e);
                        out.iter_mut().for_each(|o| *o = 0.0);
                    }
                }
            },
            &b,
            30,
            KrylovOptions { tol: 1e-8, max_iter: 120 },
        );
        if let Some(e) = failure {
            return Err(e);
        }
        debug!("Newton step: GMRES {} iterations, residual {:.2e}", stats.iterations, stats.residual);
        let d = EtaPair::from_slice(&grid, &delta);
        eta = EtaPair {
            eta1: project(&eta.eta1.add(&d.eta1), SymmetryClass::Ee),
            eta2: project(&eta.eta2.add(&d.eta2), SymmetryClass::Oe),
        };
        steps += 1;
    }
    Ok((eta, steps))
}

/// Relative residuals of the three stationary equations.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct StationaryResiduals {
    /// `‖ΔU − ωU − NU‖ / ‖U‖_{H²}`
    pub line1: f64,
    /// `‖∇(N + |U|²) − (c·∇)V‖ / ‖|U|²‖_{H¹}`
    pub line2: f64,
    /// `‖(c·∇)N − ∇·V‖ / ‖|U|²‖_{H¹}`
    pub line3: f64,
}

impl StationaryResiduals {
    pub fn max(&self) -> f64 {
        self.line1.max(self.line2).max(self.line3)
    }
}

pub fn stationary_residuals(
    u: &ComplexField,
    n: &RealField,
    v: &[RealField; 2],
    c: [f64; 2],
    omega: f64,
) -> StationaryResiduals {
    let lap = u.laplacian();
    let line1 = ComplexField::from_fn_indexed(u.grid(), |idx| {
        lap.values()[idx] - u.values()[idx] * (omega + n.values()[idx])
    });
    let h = u.abs_sqr();
    let scale = h.sobolev_norm(1.0).max(f64::MIN_POSITIVE);
    let [g1, g2] = n.add(&h).gradient();
    let dv = |f: &RealField| f.derivative(1, 0).scale(c[0]).add(&f.derivative(0, 1).scale(c[1]));
    let r2a = g1.sub(&dv(&v[0]));
    let r2b = g2.sub(&dv(&v[1]));
    let div = v[0].derivative(1, 0).add(&v[1].derivative(0, 1));
    let r3 = dv(n).sub(&div);
    StationaryResiduals {
        line1: line1.norm_l2() / u.sobolev_norm(2.0),
        line2: (r2a.norm_l2().powi(2) + r2b.norm_l2().powi(2)).sqrt() / scale,
        line3: r3.norm_l2() / scale,
    }
}

/// `(U_c, N_c, V_c)` with its certificates.
#[derive(Clone, Debug)]
pub struct SolitonProfile {
    pub c: [f64; 2],
    pub omega: f64,
    pub u: ComplexField,
    pub n: RealField,
    pub v: [RealField; 2],
    pub residuals: StationaryResiduals,
    pub iterations: Option<IterationReport>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileSymmetry {
    pub re_u_ee: f64,
    pub im_u_oe: f64,
    pub n_ee: f64,
    pub v1_ee: f64,
    pub v2_oo: f64,
    /// diagnostic only: distance of `Re U` from the diagonal-swap-invariant class
    pub re_u_radial: f64,
}

impl SolitonProfile {
    pub fn grid(&self) -> &Grid2D {
        self.u.grid()
    }

    pub fn speed(&self) -> f64 {
        self.c[0].hypot(self.c[1])
    }

    /// Defects relative to the norm of the respective field (0 for zero fields).
    pub fn symmetry_defects(&self) -> ProfileSymmetry {
        let rel = |f: &RealField, class| {
            let nf = f.norm_l2();
            if nf == 0.0 {
                0.0
            } else {
                symmetry_defect(f, class) / nf
            }
        };
        let re = self.u.re();
        ProfileSymmetry {
            re_u_ee: rel(&re, SymmetryClass::Ee),
            im_u_oe: rel(&self.u.im(), SymmetryClass::Oe),
            n_ee: rel(&self.n, SymmetryClass::Ee),
            v1_ee: rel(&self.v[0], SymmetryClass::Ee),
            v2_oo: rel(&self.v[1], SymmetryClass::Oo),
            re_u_radial: rel(&re, SymmetryClass::Radial),
        }
    }

    pub fn recompute_residuals(&mut self) {
        self.residuals = stationary_residuals(&self.u, &self.n, &self.v, self.c, self.omega);
    }
}

/// `U = Q + η₁ + iη₂`, `N = −|U|² − S_c|U|²`, `V = −(T_{c,1}|U|², T_{c,2}|U|²)`.
pub fn assemble_profile(eta: &EtaPair, c: f64, q: &RealField) -> Result<SolitonProfile> {
    eta.eta1.check_grid(q)?;
    let re = q.add(&eta.eta1);
    let u = ComplexField::from_parts(&re, &eta.eta2);
    let cv = [c, 0.0];
    let h = u.abs_sqr();
    let sc = apply_multiplier(&h, &MultiplierSpec::new(MultiplierKind::Sc, cv)?)?;
    let n = h.add(&sc).scale(-1.0);
    let v = [
        apply_multiplier(&h, &MultiplierSpec::new(MultiplierKind::Tc1, cv)?)?.scale(-1.0),
        apply_multiplier(&h, &MultiplierSpec::new(MultiplierKind::Tc2, cv)?)?.scale(-1.0),
    ];
    let residuals = stationary_residuals(&u, &n, &v, cv, 1.0);
    Ok(SolitonProfile {
        c: cv,
        omega: 1.0,
        u,
        n,
        v,
        residuals,
        iterations: None,
    })
}

/// Solve and assemble in one go.
pub fn compute_profile(c: f64, q: &RealField, opts: SolverOptions) -> Result<SolitonProfile> {
    let (eta, report) = solve_eta(c, q, opts)?;
    let mut profile = assemble_profile(&eta, c, q)?;
    profile.iterations = Some(report);
    Ok(profile)
}

/// Profile for speed `R_{−θ} c`: `Ũ(ỹ) = U(R_θ ỹ)`, `Ñ(ỹ) = N(R_θ ỹ)`,
/// `Ṽ(ỹ) = R_{−θ} V(R_θ ỹ)`, with `R_θ = [[cos θ, sin θ], [−sin θ, cos θ]]`.
/// Multiples of `π/2` permute grid points exactly; other angles resample
/// bilinearly (second-order interpolation error, visible in the residuals).
pub fn rotate_frame(profile: &SolitonProfile, theta: f64) -> SolitonProfile {
    let (s, co) = theta.sin_cos();
    let grid = profile.grid().clone();
    let quarter = theta / FRAC_PI_2;
    let exact = (quarter - quarter.round()).abs() < 1e-12;
    let n = grid.n();
    let (u, nn, v1, v2);
    if exact {
        let k = (quarter.round() as i64).rem_euclid(4);
        let map = |i: usize, j: usize| -> (usize, usize) {
            let neg = |a: usize| (n - a) % n;
            match k {
                0 => (i, j),
                1 => (j, neg(i)),
                2 => (neg(i), neg(j)),
                _ => (neg(j), i),
            }
        };
        let pull = |f: &RealField| {
            RealField::from_fn_indexed(&grid, |idx| {
                let (a, b) = map(idx / n, idx % n);
                f.values()[a * n + b]
            })
        };
        u = ComplexField::from_fn_indexed(&grid, |idx| {
            let (a, b) = map(idx / n, idx % n);
            profile.u.values()[a * n + b]
        });
        nn = pull(&profile.n);
        v1 = pull(&profile.v[0]);
        v2 = pull(&profile.v[1]);
    } else {
        let at = |idx: usize| {
            let (a, b) = grid.point(idx);
            (co * a + s * b, -s * a + co * b)
        };
        u = ComplexField::from_fn_indexed(&grid, |idx| {
            let (a, b) = at(idx);
            profile.u.sample_bilinear(a, b)
        });
        let pull = |f: &RealField| {
            RealField::from_fn_indexed(&grid, |idx| {
                let (a, b) = at(idx);
                f.sample_bilinear(a, b)
            })
        };
        nn = pull(&profile.n);
        v1 = pull(&profile.v[0]);
        v2 = pull(&profile.v[1]);
    }
    // R_{−θ} = [[cos, −sin], [sin, cos]]
    let (co_r, s_r) = if exact {
        (co.round(), s.round())
    } else {
        (co, s)
    };
    let rv1 = v1.scale(co_r).sub(&v2.scale(s_r));
    let rv2 = v1.scale(s_r).add(&v2.scale(co_r));
    let c = profile.c;
    let c_new = [co_r * c[0] - s_r * c[1], s_r * c[0] + co_r * c[1]];
    let v = [rv1, rv2];
    let residuals = stationary_residuals(&u, &nn, &v, c_new, profile.omega);
    SolitonProfile {
        c: c_new,
        omega: profile.omega,
        u,
        n: nn,
        v,
        residuals,
        iterations: profile.iterations.clone(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub omega: f64,
    pub box_length: f64,
    pub residuals: StationaryResiduals,
    pub base_residuals: StationaryResiduals,
}

/// The `ω`-scaled profile `√ω U(√ω ·)`, `ω N(√ω ·)`, `ω V(√ω ·)` on the grid
/// with box `L/√ω` (same samples), and its residuals in the `ω` system.
pub fn scale_profile(profile: &SolitonProfile, omega: f64) -> Result<SolitonProfile> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let k = omega.sqrt();
    let grid = profile.grid().rescaled(1.0 / k)?;
    let rewrap = |f: &RealField, s: f64| RealField::from_vec_unchecked(grid.clone(), f.values().iter().map(|v| s * v).collect());
    let u = ComplexField::from_fn_indexed(&grid, |idx| profile.u.values()[idx] * k);
    let n = rewrap(&profile.n, omega);
    let v = [rewrap(&profile.v[0], omega), rewrap(&profile.v[1], omega)];
    let residuals = stationary_residuals(&u, &n, &v, profile.c, omega * profile.omega);
    Ok(SolitonProfile {
        c: profile.c,
        omega: omega * profile.omega,
        u,
        n,
        v,
        residuals,
        iterations: profile.iterations.clone(),
    })
}

pub fn scaling_family_check(profile: &SolitonProfile, omega: f64) -> Result<ScalingReport> {
    let scaled = scale_profile(profile, omega)?;
    Ok(ScalingReport {
        omega,
        box_length: scaled.grid().length(),
        residuals: scaled.residuals,
        base_residuals: profile.residuals,
    })
}

//! Time integration of the full system
//!
//! ```text
//! ∂t u = iΔu − inu,   ∂t n = −∇·v,   ∂t v = −∇n − ∇|u|²
//! ```
//!
//! by Strang splitting. The linear part (free Schrödinger flow and the
//! unit-speed acoustic system) is solved exactly mode by mode; the coupling
//! part leaves `n` and `|u|` unchanged, so it is solved exactly too:
//! `u ← e^{−inτ}u`, `v ← v − τ∇|u|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::field::{ComplexField, Grid2D, RealField};
use crate::solver::SolitonProfile;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub u: ComplexField,
    pub n: RealField,
    pub v: [RealField; 2],
}

impl EvolutionState {
    pub fn new(u: ComplexField, n: RealField, v: [RealField; 2]) -> Result<Self> {
        if n.grid() != u.grid() || v[0].grid() != u.grid() || v[1].grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        let state = EvolutionState { t: 0.0, u, n, v };
        state.check_finite()?;
        Ok(state)
    }

    /// Travelling-wave data at `t = 0`: `u = U e^{ic·y/2}`, `n = N`, `v = V`.
    pub fn from_profile(profile: &SolitonProfile) -> Result<Self> {
        let c = profile.c;
        let g = profile.grid();
        let u = ComplexField::from_fn_indexed(g, |idx| {
            let (a, b) = g.point(idx);
            profile.u.values()[idx] * Complex64::from_polar(1.0, 0.5 * (c[0] * a + c[1] * b))
        });
        Self::new(u, profile.n.clone(), profile.v.clone())
    }

    /// `(Q, −Q², 0)`, which evolves as `e^{it}Q`.
    pub fn standing_wave(q: &RealField) -> Result<Self> {
        let g = q.grid();
        Self::new(q.to_complex(), q.mul(q).scale(-1.0), [RealField::zeros(g), RealField::zeros(g)])
    }

    /// The standing wave with a Galilean phase `e^{ic·y/2}` and unchanged `n`, `v`.
    pub fn boosted_standing_wave(q: &RealField, c: [f64; 2]) -> Result<Self> {
        let g = q.grid();
        let u = ComplexField::from_fn_indexed(g, |idx| {
            let (a, b) = g.point(idx);
            Complex64::from_polar(q.values()[idx], 0.5 * (c[0] * a + c[1] * b))
        });
        Self::new(u, q.mul(q).scale(-1.0), [RealField::zeros(g), RealField::zeros(g)])
    }

    pub fn grid(&self) -> &Grid2D {
        self.u.grid()
    }

    /// `‖∂₁v₂ − ∂₂v₁‖ / ‖∇v‖`.
    pub fn curl_defect(&self) -> f64 {
        let [d11, d12] = self.v[0].gradient();
        let [d21, d22] = self.v[1].gradient();
        let scale = (d11.norm_l2().powi(2) + d12.norm_l2().powi(2) + d21.norm_l2().powi(2) + d22.norm_l2().powi(2)).sqrt();
        if scale == 0.0 {
            return 0.0;
        }
        d21.sub(&d12).norm_l2() / scale
    }

    /// Largest relative difference between two states, field by field.
    pub fn distance(&self, other: &Self) -> f64 {
        let rel = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
        let du = rel(self.u.sub(&other.u).norm_l2(), other.u.norm_l2());
        let dn = rel(self.n.sub(&other.n).norm_l2(), other.n.norm_l2());
        let vn = (other.v[0].norm_l2().powi(2) + other.v[1].norm_l2().powi(2)).sqrt();
        let dv = (self.v[0].sub(&other.v[0]).norm_l2().powi(2) + self.v[1].sub(&other.v[1]).norm_l2().powi(2)).sqrt();
        du.max(dn).max(rel(dv, vn))
    }

    fn check_finite(&self) -> Result<()> {
        if !self.u.is_finite() {
            return Err(Error::NonFinite("u"));
        }
        if !self.n.is_finite() {
            return Err(Error::NonFinite("n"));
        }
        if !self.v[0].is_finite() || !self.v[1].is_finite() {
            return Err(Error::NonFinite("v"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservedQuantities {
    pub mass: f64,
    pub energy: f64,
    pub momentum: [f64; 2],
}

/// Relative changes between two sets of conserved quantities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConservedDrift {
    pub mass: f64,
    pub energy: f64,
    pub momentum: f64,
}

impl ConservedQuantities {
    /// Energy and momentum drifts are relative to `|H₀|` and `|P₀|`, or to
    /// `M₀` when those vanish.
    pub fn drift_from(&self, start: &ConservedQuantities) -> ConservedDrift {
        let scale = |x: f64| if x > 1e-8 * start.mass { x } else { start.mass };
        let dp = (self.momentum[0] - start.momentum[0]).hypot(self.momentum[1] - start.momentum[1]);
        ConservedDrift {
            mass: (self.mass - start.mass).abs() / start.mass,
            energy: (self.energy - start.energy).abs() / scale(start.energy.abs()),
            momentum: dp / scale(start.momentum[0].hypot(start.momentum[1])),
        }
    }
}

/// `M = ∫|u|²`, `H = ∫|∇u|² + n|u|² + n²/2 + |v|²/2`, `P = Im∫ū∇u + ∫nv`.
pub fn conserved(state: &EvolutionState) -> ConservedQuantities {
    let g = state.grid();
    let da = g.cell_area();
    let spec = state.u.spectrum();
    let (mut grad2, mut p) = (0.0, [0.0; 2]);
    for (m, c) in spec.modes().zip(spec.coeffs()) {
        let w = c.norm_sqr();
        grad2 += m.norm_sqr() * w;
        p[0] += m.dxi[0] * w;
        p[1] += m.dxi[1] * w;
    }
    let parseval = da / g.len() as f64;
    let (mut mass, mut pot, mut nv) = (0.0, 0.0, [0.0; 2]);
    let (u, n, v1, v2) = (state.u.values(), state.n.values(), state.v[0].values(), state.v[1].values());
    for i in 0..g.len() {
        let h = u[i].norm_sqr();
        mass += h;
        pot += n[i] * h + 0.5 * n[i] * n[i] + 0.5 * (v1[i] * v1[i] + v2[i] * v2[i]);
        nv[0] += n[i] * v1[i];
        nv[1] += n[i] * v2[i];
    }
    ConservedQuantities {
        mass: da * mass,
        energy: parseval * grad2 + da * pot,
        momentum: [parseval * p[0] + da * nv[0], parseval * p[1] + da * nv[1]],
    }
}

/// Default step-size cap `dx²/π`.
pub fn dt_cap(grid: &Grid2D) -> f64 {
    grid.spacing().powi(2) / PI
}

/// Strang-splitting integrator with its per-mode tables for one `(grid, dt)`.
pub struct Integrator {
    grid: Grid2D,
    dt: f64,
    schrodinger: Vec<Complex64>,
    acoustic: Vec<(f64, f64)>,
    direction: Vec<[f64; 2]>,
    dxi: Vec<[f64; 2]>,
}

impl Integrator {
    /// Negative `dt` integrates backwards. Steps above `cap` are allowed with
    /// a warning.
    pub fn new(grid: &Grid2D, dt: f64, cap: f64) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step {dt}")));
        }
        if dt.abs() > cap {
            log::warn!("time step {} exceeds the cap {:.3e}", dt.abs(), cap);
        }
        let n = grid.n();
        let len = grid.len();
        let mut schrodinger = Vec::with_capacity(len);
        let mut acoustic = Vec::with_capacity(len);
        let mut direction = Vec::with_capacity(len);
        let mut dxi = Vec::with_capacity(len);
        for idx in 0..len {
            let (k1, k2) = (idx / n, idx % n);
            let xi = [grid.wavenumber(k1), grid.wavenumber(k2)];
            let d = [grid.deriv_wavenumber(k1), grid.deriv_wavenumber(k2)];
            schrodinger.push(Complex64::from_polar(1.0, -(xi[0] * xi[0] + xi[1] * xi[1]) * dt));
            let kappa = d[0].hypot(d[1]);
            acoustic.push(((kappa * dt).cos(), (kappa * dt).sin()));
            direction.push(if kappa > 0.0 { [d[0] / kappa, d[1] / kappa] } else { [0.0; 2] });
            dxi.push(d);
        }
        Ok(Integrator { grid: grid.clone(), dt, schrodinger, acoustic, direction, dxi })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn advance(&self, state: &mut EvolutionState) -> Result<()> {
        self.run(state, 1)
    }

    /// `steps` consecutive Strang steps. The coupling half-steps that meet
    /// between two steps are merged, and `(n, v)` stay in Fourier space
    /// throughout.
    pub fn run(&self, state: &mut EvolutionState, steps: usize) -> Result<()> {
        if state.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if steps == 0 {
            return Ok(());
        }
        let g = &self.grid;
        let spectral = |f: &RealField| -> Vec<Complex64> {
            let mut w: Vec<Complex64> = f.values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
            g.forward(&mut w);
            w
        };
        let mut u: Vec<Complex64> = state.u.values().to_vec();
        let mut n: Vec<f64> = state.n.values().to_vec();
        let mut nh = spectral(&state.n);
        let mut v1 = spectral(&state.v[0]);
        let mut v2 = spectral(&state.v[1]);
        let mut scratch = vec![Complex64::default(); g.len()];

        let mut tau = 0.5 * self.dt;
        for _ in 0..steps {
            self.couple(&mut u, &n, &mut v1, &mut v2, &mut scratch, tau);
            tau = self.dt;

            for i in 0..g.len() {
                let (cos, sin) = self.acoustic[i];
                let k = self.direction[i];
                let a = k[0] * v1[i] + k[1] * v2[i];
                let (t1, t2) = (v1[i] - k[0] * a, v2[i] - k[1] * a);
                let i_sin = Complex64::new(0.0, sin);
                let a_new = cos * a - i_sin * nh[i];
                nh[i] = cos * nh[i] - i_sin * a;
                v1[i] = t1 + k[0] * a_new;
                v2[i] = t2 + k[1] * a_new;
            }

            g.forward(&mut u);
            u.iter_mut().zip(&self.schrodinger).for_each(|(z, s)| *z *= s);
            g.inverse(&mut u);

            scratch.copy_from_slice(&nh);
            g.inverse(&mut scratch);
            n.iter_mut().zip(&scratch).for_each(|(x, z)| *x = z.re);
        }
        self.couple(&mut u, &n, &mut v1, &mut v2, &mut scratch, 0.5 * self.dt);
        g.inverse(&mut v1);
        g.inverse(&mut v2);

        let real = |w: Vec<Complex64>| RealField::new(g.clone(), w.into_iter().map(|z| z.re).collect());
        state.u = ComplexField::new(g.clone(), u)?;
        state.n = RealField::new(g.clone(), n)?;
        state.v = [real(v1)?, real(v2)?];
        state.t += steps as f64 * self.dt;
        state.check_finite()
    }

    /// Exact coupling flow over `tau`: `u ← e^{−inτ}u`, `v̂ ← v̂ − τ iξ (|u|²)^`.
    fn couple(&self, u: &mut [Complex64], n: &[f64], v1: &mut [Complex64], v2: &mut [Complex64], h: &mut [Complex64], tau: f64) {
        for ((z, &nn), hz) in u.iter_mut().zip(n).zip(h.iter_mut()) {
            *z *= Complex64::from_polar(1.0, -nn * tau);
            *hz = Complex64::new(z.norm_sqr(), 0.0);
        }
        self.grid.forward(h);
        for i in 0..h.len() {
            let ih = Complex64::new(0.0, tau) * h[i];
            v1[i] -= self.dxi[i][0] * ih;
            v2[i] -= self.dxi[i][1] * ih;
        }
    }
}

/// One Strang step of size `dt` (negative steps run backwards).
pub fn step(state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    let integrator = Integrator::new(state.grid(), dt, dt_cap(state.grid()))?;
    let mut next = state.clone();
    integrator.advance(&mut next)?;
    Ok(next)
}

/// Integrate to `t_end` with a step no larger than `dt`.
pub fn evolve(state: &EvolutionState, t_end: f64, dt: f64) -> Result<EvolutionState> {
    let steps = step_count(t_end - state.t, dt)?;
    let integrator = Integrator::new(state.grid(), (t_end - state.t) / steps as f64, dt_cap(state.grid()))?;
    let mut s = state.clone();
    integrator.run(&mut s, steps)?;
    s.t = t_end;
    Ok(s)
}

fn step_count(span: f64, dt: f64) -> Result<usize> {
    if !(span > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time span {span} with step {dt}")));
    }
    Ok(((span / dt) - 1e-9).ceil().max(1.0) as usize)
}

/// Circular mean of `|u|²` along each axis.
pub fn centroid(u: &ComplexField) -> [f64; 2] {
    let g = u.grid();
    let l = g.length();
    let mut acc = [Complex64::default(); 2];
    for (idx, z) in u.values().iter().enumerate() {
        let w = z.norm_sqr();
        let (a, b) = g.point(idx);
        acc[0] += w * Complex64::from_polar(1.0, 2.0 * PI * a / l);
        acc[1] += w * Complex64::from_polar(1.0, 2.0 * PI * b / l);
    }
    acc.map(|s| s.arg() * l / (2.0 * PI))
}

#[derive(Clone, Copy, Debug)]
pub struct TrackOptions {
    /// Steps between trajectory samples.
    pub sample_every: usize,
    /// The centre must stay within `(1/2 − margin)·L` of the origin on each axis.
    pub margin: f64,
    pub dt_cap: Option<f64>,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { sample_every: 100, margin: 0.25, dt_cap: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub center: [f64; 2],
    pub conserved: ConservedQuantities,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryReport {
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    pub velocity: [f64; 2],
    pub drift: ConservedDrift,
    /// `min_y ‖|u(T)| − |u(0)|(· − y)‖`
    pub shape_error: f64,
    /// `shape_error / ‖u(0)‖`
    pub relative_shape_error: f64,
    pub shift: [f64; 2],
    #[serde(skip)]
    pub final_state: EvolutionState,
}

/// Start from the travelling-wave data of `profile` and track it to `t_end`.
pub fn evolve_and_track(profile: &SolitonProfile, t_end: f64, dt: f64) -> Result<TrajectoryReport> {
    track(&EvolutionState::from_profile(profile)?, t_end, dt, TrackOptions::default(), |_, _| Ok(()))
}

/// Integrate `initial` to `t_end`, sampling the centre and the conserved
/// quantities every `opts.sample_every` steps (and at both ends). `observer`
/// sees every sample.
pub fn track(
    initial: &EvolutionState,
    t_end: f64,
    dt: f64,
    opts: TrackOptions,
    mut observer: impl FnMut(&EvolutionState, &TrajectorySample) -> Result<()>,
) -> Result<TrajectoryReport> {
    let g = initial.grid().clone();
    let steps = step_count(t_end - initial.t, dt)?;
    let h = (t_end - initial.t) / steps as f64;
    let integrator = Integrator::new(&g, h, opts.dt_cap.unwrap_or_else(|| dt_cap(&g)))?;
    let limit = (0.5 - opts.margin) * g.length();
    let every = opts.sample_every.max(1);

    let mut state = initial.clone();
    let mut samples: Vec<TrajectorySample> = Vec::new();
    let mut unwrapped: Vec<[f64; 2]> = Vec::new();
    let mut record = |state: &EvolutionState, samples: &mut Vec<TrajectorySample>| -> Result<()> {
        let raw = centroid(&state.u);
        let center = match unwrapped.last() {
            None => raw,
            Some(prev) => [0, 1].map(|j| raw[j] - g.length() * ((raw[j] - prev[j]) / g.length()).round()),
        };
        unwrapped.push(center);
        if center[0].abs() > limit || center[1].abs() > limit {
            return Err(Error::SafeRegion { t: state.t, center });
        }
        let sample = TrajectorySample { t: state.t, center, conserved: conserved(state) };
        observer(state, &sample)?;
        samples.push(sample);
        Ok(())
    };
    record(&state, &mut samples)?;
    let mut done = 0;
    while done < steps {
        let chunk = every.min(steps - done);
        integrator.run(&mut state, chunk)?;
        done += chunk;
        if done == steps {
            state.t = t_end;
        }
        record(&state, &mut samples)?;
    }

    let velocity = fit_velocity(&samples);
    let first = samples[0].conserved;
    let drift = samples.last().unwrap().conserved.drift_from(&first);
    let displacement = {
        let (a, b) = (samples[0].center, samples.last().unwrap().center);
        [b[0] - a[0], b[1] - a[1]]
    };
    let reference = initial.u.abs();
    let (shape_error, shift) = shape_error(&state.u.abs(), &reference, displacement);
    Ok(TrajectoryReport {
        dt: h,
        samples,
        velocity,
        drift,
        shape_error,
        relative_shape_error: shape_error / reference.norm_l2(),
        shift,
        final_state: state,
    })
}

fn fit_velocity(samples: &[TrajectorySample]) -> [f64; 2] {
    let m = samples.len() as f64;
    let tm = samples.iter().map(|s| s.t).sum::<f64>() / m;
    let stt: f64 = samples.iter().map(|s| (s.t - tm).powi(2)).sum();
    [0, 1].map(|j| {
        if stt == 0.0 {
            return 0.0;
        }
        let cm = samples.iter().map(|s| s.center[j]).sum::<f64>() / m;
        samples.iter().map(|s| (s.t - tm) * (s.center[j] - cm)).sum::<f64>() / stt
    })
}

/// `min_s ‖target − reference(· − s)‖` and the minimising `s`, searched by
/// cyclic golden-section passes within one cell of `guess`.
pub fn shape_error(target: &RealField, reference: &RealField, guess: [f64; 2]) -> (f64, [f64; 2]) {
    let spec = reference.to_complex();
    let misfit = |s: [f64; 2]| spec.translate(s).re().sub(target).norm_l2();
    let dx = target.grid().spacing();
    let mut s = guess;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..3 {
        for j in 0..2 {
            let at = |x: f64| {
                let mut p = s;
                p[j] = x;
                misfit(p)
            };
            let (mut a, mut b) = (s[j] - dx, s[j] + dx);
            let mut x1 = b - ratio * (b - a);
            let mut x2 = a + ratio * (b - a);
            let (mut f1, mut f2) = (at(x1), at(x2));
            for _ in 0..30 {
                if f1 < f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - ratio * (b - a);
                    f1 = at(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + ratio * (b - a);
                    f2 = at(x2);
                }
            }
            s[j] = 0.5 * (a + b);
        }
    }
    (misfit(s), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_rounds_up() {
        assert_eq!(step_count(1.0, 1e-3).unwrap(), 1000);
        assert_eq!(step_count(1.0, 0.3).unwrap(), 4);
        assert!(step_count(-1.0, 0.1).is_err());
    }

    #[test]
    fn centroid_of_shifted_bump() {
        let g = Grid2D::new(64, 20.0).unwrap();
        let u = ComplexField::from_fn(&g, |a, b| Complex64::new((-((a - 2.3).powi(2) + (b + 1.1).powi(2))).exp(), 0.0));
        let c = centroid(&u);
        assert!((c[0] - 2.3).abs() < 1e-10 && (c[1] + 1.1).abs() < 1e-10, "{c:?}");
    }
}

//! Reference computations that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Radial ground state by shooting: `Q'' + Q'/r = Q − Q³`, `Q'(0) = 0`.
pub struct Shooting {
    pub peak: f64,
    pub mass: f64,
    /// `(r, Q(r))` samples up to where the trajectory is still trustworthy
    pub profile: Vec<(f64, f64)>,
}

fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, q - q * q * q - p / r)
}

/// Integrates from `r₀ = 1e-4` with the series start; stops at `r_max`, at a
/// sign change of `Q` (overshoot, +1) or when `Q` turns back up (undershoot, -1).
fn shoot(a: f64, h: f64, r_max: f64, record: bool) -> (i32, Vec<(f64, f64)>) {
    let r0 = 1e-4;
    let mut r = r0;
    let mut q = a + 0.25 * (a - a * a * a) * r0 * r0;
    let mut p = 0.5 * (a - a * a * a) * r0;
    let mut out = Vec::new();
    if record {
        out.push((0.0, a));
    }
    while r < r_max {
        let (k1q, k1p) = rhs(r, q, p);
        let (k2q, k2p) = rhs(r + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p);
        let (k3q, k3p) = rhs(r + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p);
        let (k4q, k4p) = rhs(r + h, q + h * k3q, p + h * k3p);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
        if record {
            out.push((r, q));
        }
        if q < 0.0 {
            return (1, out);
        }
        if p > 0.0 {
            return (-1, out);
        }
    }
    (0, out)
}

pub fn shooting_ground_state() -> Shooting {
    let h = 1e-3;
    let (mut lo, mut hi) = (2.0, 2.5);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, h, 40.0, false).0 {
            1 => hi = mid,
            _ => lo = mid,
        }
    }
    let peak = 0.5 * (lo + hi);
    let (_, mut profile) = shoot(peak, h, 40.0, true);
    // keep the part where Q still decays monotonically and sits above the
    // shooting noise floor
    profile.retain(|&(r, q)| r < 14.0 && q > 0.0);
    let mut mass = 0.0;
    for w in profile.windows(2) {
        let (r0, q0) = w[0];
        let (r1, q1) = w[1];
        mass += 0.5 * (r1 - r0) * (q0 * q0 * r0 + q1 * q1 * r1);
    }
    Shooting {
        peak,
        mass: 2.0 * PI * mass,
        profile,
    }
}

/// Free-space `σ(D) e^{−|y|²}` at `y` by polar quadrature of
/// `(2π)⁻² ∫ σ(ξ) π e^{−|ξ|²/4} e^{iξ·y} dξ`, for a degree-zero even symbol.
pub fn gaussian_multiplier_oracle(symbol: impl Fn(f64, f64) -> f64, y: [f64; 2]) -> f64 {
    let (nt, nr, rmax) = (720, 4000, 16.0);
    let dr = rmax / nr as f64;
    let mut total = 0.0;
    for k in 0..nt {
        let t = 2.0 * PI * k as f64 / nt as f64;
        let (ct, st) = (t.cos(), t.sin());
        let proj = y[0] * ct + y[1] * st;
        let mut radial = 0.0;
        for m in 1..=nr {
            let r = m as f64 * dr;
            let w = if m == nr { 0.5 } else { 1.0 };
            radial += w * r * (-0.25 * r * r).exp() * (r * proj).cos();
        }
        // Euler–Maclaurin end correction: the integrand starts like r
        total += symbol(ct, st) * (radial * dr + dr * dr / 12.0);
    }
    total * (2.0 * PI / nt as f64) * PI / (4.0 * PI * PI)
}

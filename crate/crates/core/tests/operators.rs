mod common;

use proptest::prelude::*;
use std::sync::OnceLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zakharov::field::{project, symmetry_defect, Grid2D, RealField, SymmetryClass};
use zakharov::ground_state::compute_q;
use zakharov::operators::*;

fn random_smooth(grid: &Grid2D, rng: &mut ChaCha8Rng) -> RealField {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..5)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.4..2.0)))
        .collect();
    RealField::from_fn(grid, |a, b| {
        bumps
            .iter()
            .map(|&(amp, x, y, s)| amp * (-((a - x).powi(2) + (b - y).powi(2)) / (s * s)).exp())
            .sum()
    })
}

#[test]
fn tc1_on_gaussian_matches_polar_quadrature() {
    // images of the free-space result enter at O(L⁻⁴); L = 240 puts them near 2e-7
    let grid = Grid2D::new(1024, 240.0).unwrap();
    let f = RealField::from_fn(&grid, |a, b| (-(a * a + b * b)).exp());
    let spec = MultiplierSpec::new(MultiplierKind::Tc1, [0.3, 0.0]).unwrap();
    let out = apply_multiplier(&f, &spec).unwrap();
    let pts = nodes_in_disc(&grid, 5.0, 4);
    let (mut num, mut den) = (0.0, 0.0);
    for p in &pts {
        let oracle = common::gaussian_multiplier_oracle(|a, b| spec.symbol([a, b]), *p);
        let got = out.sample_bilinear(p[0], p[1]);
        num += (got - oracle).powi(2);
        den += oracle * oracle;
    }
    let rel = (num / den).sqrt();
    println!("Tc1 relative L2 mismatch: {rel:.3e}");
    assert!(rel <= 1e-6, "{rel}");
}

#[test]
fn logkernel_oracle_agrees_with_periodic_sc() {
    let grid = Grid2D::new(512, 60.0).unwrap();
    let h = RealField::from_fn(&grid, |a, b| (-(a * a + b * b)).exp());
    let pts = nodes_in_disc(&grid, 5.0, 3);
    let report = resolve_prefactor(&h, 0.3, &pts).unwrap();
    println!("{report:?}");
    assert_eq!(report.best, KernelPrefactor::DERIVED.label());
    assert!(report.best_error <= 1e-4, "{}", report.best_error);
    let oracle = logkernel_sc_oracle(&h, 0.3, &pts[..4]).unwrap();
    let periodic = apply_multiplier(&h, &MultiplierSpec::sc(0.3).unwrap()).unwrap();
    for (p, v) in pts.iter().zip(&oracle) {
        assert!((periodic.sample_bilinear(p[0], p[1]) - v).abs() < 1e-4 * periodic.max_abs());
    }
}

#[test]
fn sc_cos_example() {
    let grid = Grid2D::new(16, 2.0 * std::f64::consts::PI).unwrap();
    let f = RealField::from_fn(&grid, |a, _| a.cos());
    let out = apply_multiplier(&f, &MultiplierSpec::sc(0.5).unwrap()).unwrap();
    assert!(out.sub(&f.scale(1.0 / 3.0)).max_abs() < 1e-14);
}

#[test]
fn sc_bound_approached_along_axis() {
    for n in [16, 64, 256] {
        let grid = Grid2D::new(n, 30.0).unwrap();
        let v = multiplier_norm_certificate(&MultiplierSpec::sc(0.5).unwrap(), &grid);
        assert!(v <= (1.0 / 3.0) * (1.0 + 1e-15) && v >= 1.0 / 3.0 - 1e-12);
    }
}

#[test]
fn lipschitz_example() {
    let grid = Grid2D::new(64, 20.0).unwrap();
    let f = RealField::from_fn(&grid, |a, b| (-(a * a + b * b)).exp());
    let r = lipschitz_in_c_check(&f, [0.2, 0.0], [0.25, 0.0]).unwrap();
    assert!(r.passed, "{r:?}");
    let (_, lhs, rhs) = r.sc_difference[0];
    assert!((rhs - 2.0 * 0.05 / (0.96 * 0.9375) * f.norm_l2()).abs() < 1e-12);
    assert!(lhs <= rhs);
    assert!(r.finite_difference_error <= 1e-6);
}

fn ground_state() -> &'static RealField {
    static Q: OnceLock<RealField> = OnceLock::new();
    Q.get_or_init(|| compute_q(&Grid2D::new(256, 40.0).unwrap(), 1e-8).unwrap().q)
}

#[test]
fn lplus_on_q_is_minus_two_q_cubed() {
    let q = ground_state();
    let lq = apply_l(&LinearizedOp::plus(q), q).unwrap();
    let expected = q.map(|v| -2.0 * v * v * v);
    assert!(lq.sub(&expected).norm_l2() <= 1e-8 * q.norm_l2());
}

#[test]
fn inversion_round_trip() {
    let q = ground_state();
    let op = LinearizedOp::plus(q);
    let w = RealField::from_fn(q.grid(), |a, b| (-(a * a + b * b)).exp());
    let f = apply_l(&op, &w).unwrap();
    let g = invert_l_on_subspace(&op, &f, SymmetryClass::Ee).unwrap();
    assert!(g.solution.sub(&w).norm_l2() <= 1e-8 * w.norm_l2());
    assert!(apply_l(&op, &g.solution).unwrap().sub(&f).norm_l2() <= 1e-10 * f.norm_l2());
}

#[test]
fn inversion_rejects_bad_pairings_and_inputs() {
    let q = ground_state();
    let f = project(&q.derivative(1, 0), SymmetryClass::Oe);
    assert!(invert_l_on_subspace(&LinearizedOp::plus(q), &f, SymmetryClass::Oe).is_err());
    assert!(invert_l_on_subspace(&LinearizedOp::minus(q), q, SymmetryClass::Ee).is_err());
    // an EE right-hand side is not in OE
    assert!(invert_l_on_subspace(&LinearizedOp::minus(q), q, SymmetryClass::Oe).is_err());
}

#[test]
fn r_profile_is_minus_half_y1_q() {
    // L₋(y₁Q) = −2∂₁Q, so R = −y₁Q/2
    let q = ground_state();
    let r = solve_r(q).unwrap();
    let d1 = q.derivative(1, 0);
    let lr = apply_l(&LinearizedOp::minus(q), &r.solution).unwrap();
    assert!(lr.sub(&d1).norm_l2() <= 1e-8 * d1.norm_l2());
    assert!(symmetry_defect(&r.solution, SymmetryClass::Oe) <= 1e-12 * r.solution.norm_l2());
    let closed = RealField::from_fn(q.grid(), |a, _| -0.5 * a).mul(q);
    assert!(r.solution.sub(&closed).norm_l2() <= 1e-6 * closed.norm_l2());
}

#[test]
fn rho_and_coercivity() {
    let q = ground_state();
    let rho = solve_rho(q).unwrap();
    let rhs = RealField::from_fn(q.grid(), |a, b| 0.25 * (a * a + b * b)).mul(q);
    let res = apply_l(&LinearizedOp::plus(q), &rho.solution).unwrap().sub(&rhs);
    assert!(res.norm_l2() <= 1e-8 * rhs.norm_l2());
    assert!(symmetry_defect(&rho.solution, SymmetryClass::Ee) <= 1e-10 * rho.solution.norm_l2());
    let values = coercivity(q, &rho.solution, 20, 7).unwrap();
    assert_eq!(values.len(), 20);
    assert!(values.iter().all(|&v| v > 0.0), "{values:?}");
}

#[test]
fn oe_inverse_bound_ratio_stays_moderate() {
    let q = ground_state();
    let op = LinearizedOp::minus(q);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let f = project(&random_smooth(q.grid(), &mut rng), SymmetryClass::Oe);
        let g = invert_l_on_subspace(&op, &f, SymmetryClass::Oe).unwrap();
        assert!(g.bound_ratio < 1e3, "{}", g.bound_ratio);
    }
}

#[test]
fn linearized_operators_are_self_adjoint() {
    let q = ground_state();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for op in [LinearizedOp::plus(q), LinearizedOp::minus(q)] {
        let w1 = random_smooth(q.grid(), &mut rng);
        let w2 = random_smooth(q.grid(), &mut rng);
        let a = apply_l(&op, &w1).unwrap().inner(&w2);
        let b = w1.inner(&apply_l(&op, &w2).unwrap());
        assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
    }
}

fn white_noise(grid: &Grid2D, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RealField::new(grid.clone(), (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn multipliers_map_real_to_real(seed in any::<u64>(), c1 in -0.6f64..0.6, c2 in -0.6f64..0.6, k in 0usize..5) {
        let grid = Grid2D::new(32, 12.0).unwrap();
        let f = white_noise(&grid, seed);
        let spec = MultiplierSpec::new(MultiplierKind::ALL[k], [c1, c2]).unwrap();
        let out = apply_multiplier(&f, &spec).unwrap();
        let residue = out.to_complex().spectrum().imaginary_residue();
        prop_assert!(residue <= 1e-12 * out.max_abs().max(1e-300));
    }

    #[test]
    fn sc_respects_norm_bound(seed in any::<u64>(), c in 0.0f64..0.9, s in 0usize..3) {
        let grid = Grid2D::new(32, 12.0).unwrap();
        let f = white_noise(&grid, seed);
        let out = apply_multiplier(&f, &MultiplierSpec::sc(c).unwrap()).unwrap();
        let s = s as f64;
        prop_assert!(out.sobolev_norm(s) <= c * c / (1.0 - c * c) * f.sobolev_norm(s) * (1.0 + 1e-12));
    }

    #[test]
    fn sc_preserves_parity(seed in any::<u64>(), c in 0.0f64..0.9, odd in any::<bool>()) {
        let grid = Grid2D::new(32, 12.0).unwrap();
        let class = if odd { SymmetryClass::Oe } else { SymmetryClass::Ee };
        let f = project(&white_noise(&grid, seed), class);
        let out = apply_multiplier(&f, &MultiplierSpec::sc(c).unwrap()).unwrap();
        prop_assert!(symmetry_defect(&out, class) <= 1e-10 * f.norm_l2());
    }

    #[test]
    fn sc_is_self_adjoint(seed in any::<u64>(), c in 0.0f64..0.9) {
        let grid = Grid2D::new(32, 12.0).unwrap();
        let (f, g) = (white_noise(&grid, seed), white_noise(&grid, seed ^ 0x5555));
        let spec = MultiplierSpec::sc(c).unwrap();
        let a = apply_multiplier(&f, &spec).unwrap().inner(&g);
        let b = f.inner(&apply_multiplier(&g, &spec).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * f.norm_l2() * g.norm_l2());
    }
}

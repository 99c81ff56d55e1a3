use std::sync::OnceLock;

use zakharov::asymptotics::*;
use zakharov::field::{Grid2D, RealField};
use zakharov::ground_state::compute_q;
use zakharov::solver::{compute_profile, SolitonProfile, SolverOptions};

fn profiles() -> &'static [SolitonProfile; 3] {
    static P: OnceLock<[SolitonProfile; 3]> = OnceLock::new();
    P.get_or_init(|| {
        let q = compute_q(&Grid2D::new(256, 40.0).unwrap(), 1e-8).unwrap().q;
        [0.0, 0.1, 0.2].map(|c| compute_profile(c, &q, SolverOptions::default()).unwrap())
    })
}

#[test]
fn u_decays_exponentially() {
    let p = &profiles()[2];
    let fit = fit_decay(&p.u.abs(), DecayModel::Exponential, Annulus::new(6.0, 16.0)).unwrap();
    println!("|U_0.2| rate {:.4} (residual {:.3e})", fit.rate, fit.residual);
    assert!(fit.rate >= 0.5);
    assert!(fit.shells >= MIN_SHELLS);
}

#[test]
fn velocity_tail_is_inverse_square() {
    let p = &profiles()[2];
    let far = far_field(p, 4).unwrap();
    for v in &far.v {
        let fit = fit_decay(v, DecayModel::Algebraic, Annulus::new(8.0, 20.0)).unwrap();
        println!("V tail power {:.4}", fit.rate);
        assert!((fit.rate - 2.0).abs() <= 0.15);
    }
}

#[test]
fn derivative_sweep() {
    let sweep = derivative_decay_sweep(&profiles()[2], SweepOptions::default()).unwrap();
    for row in &sweep.rows {
        println!("{:>2} {:?}: {:.4} (expected {:?})", row.field, row.m, row.fit.rate, row.expected_power);
    }
    assert!(sweep.passed());
    let n10 = sweep.rows.iter().find(|r| r.field == "N" && r.m == [0, 0]).unwrap();
    assert!((n10.fit.rate - 2.0).abs() <= 0.2);
    let v10 = sweep.rows.iter().find(|r| r.field == "V1" && r.m == [1, 0]).unwrap();
    assert!((v10.fit.rate - 3.0).abs() <= 0.3);
    assert!(derivative_decay_sweep(&profiles()[2], SweepOptions { m_max: 4, ..Default::default() }).is_err());
}

#[test]
fn tail_amplitudes_scale_with_speed() {
    let (a, b) = (far_field(&profiles()[1], 4).unwrap(), far_field(&profiles()[2], 4).unwrap());
    let n_annulus = Annulus::new(1.5 * crossover_radius(0.1), 30.0);
    let rn = amplitude_ratio(&a.n, &b.n, n_annulus).unwrap();
    let v_annulus = Annulus::new(8.0, 20.0);
    let rv1 = amplitude_ratio(&a.v[0], &b.v[0], v_annulus).unwrap();
    let rv2 = amplitude_ratio(&a.v[1], &b.v[1], v_annulus).unwrap();
    println!("amplitude ratios: N {rn:.4}, V1 {rv1:.4}, V2 {rv2:.4}");
    assert!((rn / 4.0 - 1.0).abs() <= 0.2);
    assert!((rv1 / 2.0 - 1.0).abs() <= 0.2);
    assert!((rv2 / 2.0 - 1.0).abs() <= 0.2);
}

#[test]
fn standing_wave_has_no_algebraic_tail() {
    let far = far_field(&profiles()[0], 4).unwrap();
    let fit = fit_decay(&far.n, DecayModel::Algebraic, Annulus::new(6.0, 16.0)).unwrap();
    assert!(!fit.is_clean(), "{fit:?}");
    let h = profiles()[0].u.abs_sqr();
    let e = expansion_eval(&h, 0.0, [0.0, 10.0], 3).unwrap();
    assert!(e.sums_pi.iter().chain(&e.sums_pi2).all(|&s| s == 0.0));
}

#[test]
fn leading_term_on_the_transverse_axis() {
    // at z₁ = 0 the n = 0 term is (2∫H − 4∫ζ₁²H/|z|²)/|z|²
    let h = profiles()[2].u.abs_sqr();
    let c: f64 = 0.2;
    let nu = (1.0 - c * c).sqrt();
    let g = h.grid();
    let (mut m0, mut m2) = (0.0, 0.0);
    for (idx, &v) in h.values().iter().enumerate() {
        let (a, _) = g.point(idx);
        m0 += v * g.cell_area() / nu;
        m2 += (a / nu).powi(2) * v * g.cell_area() / nu;
    }
    let z2 = 144.0;
    let expect = (2.0 * m0 - 4.0 * m2 / z2) / z2;
    let e = expansion_eval(&h, c, [0.0, 12.0], 0).unwrap();
    assert!((e.terms[0] - expect).abs() <= 1e-13 * expect.abs());
}

#[test]
fn expansion_respects_parity() {
    let h = profiles()[2].u.abs_sqr();
    for y in [[7.0, 3.0], [-2.0, 9.0]] {
        let a = expansion_eval(&h, 0.2, y, 3).unwrap();
        let b = expansion_eval(&h, 0.2, [-y[0], y[1]], 3).unwrap();
        for (x, y) in a.sums_pi.iter().zip(&b.sums_pi) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }
}

#[test]
fn expansion_error_scan_at_order_three() {
    let report = expansion_error_scan(&profiles()[2], 3, 6.0, 18.0).unwrap();
    println!("prefactor errors (pi, pi^2): {:?}", report.prefactor_errors);
    assert_eq!(report.best_pi_power, 1);
    assert!(report.prefactor_errors[0] < 0.2 && report.prefactor_errors[1] > 0.5);
    let fact11: f64 = (1..=11).map(|i| i as f64).product();
    assert!((report.constant / (fact11 * (1.0 + 8.0 / 0.96f64).powi(9)) - 1.0).abs() < 1e-14);
    assert!(report.truncation_tail < 1e-6);
    for ray in &report.rays {
        println!("ray {:?}: slope {:.3}, beats K=0 everywhere: {}", ray.direction, ray.slope, ray.beats_leading_term);
        assert!(ray.slope <= -3.5);
    }
    let e2 = &report.rays[1];
    assert!(e2.beats_leading_term);
    assert!(e2.rows.iter().all(|r| r.error < r.n_value.abs()));
    let at = |ray: &RayScan, r: f64| ray.rows.iter().min_by(|a, b| (a.radius - r).abs().total_cmp(&(b.radius - r).abs())).unwrap().clone();
    let y10 = at(e2, 10.0);
    assert!(y10.error < y10.error_k0);
    // along e₁ the order-3 sum only overtakes the leading term from |y| ≈ 15 on
    let e1 = &report.rays[0];
    assert!(e1.rows.iter().filter(|r| r.radius >= 15.5).all(|r| r.error < r.error_k0));
}

#[test]
fn fits_are_stable_under_refinement() {
    let q = compute_q(&Grid2D::new(512, 40.0).unwrap(), 1e-8).unwrap().q;
    let fine = compute_profile(0.2, &q, SolverOptions::default()).unwrap();
    let coarse = &profiles()[2];
    let rate = |p: &SolitonProfile| fit_decay(&p.u.abs(), DecayModel::Exponential, Annulus::new(6.0, 16.0)).unwrap().rate;
    assert!((rate(&fine) - rate(coarse)).abs() < 0.05);
    let power = |p: &SolitonProfile| {
        let far = far_field(p, 2).unwrap();
        fit_decay(&far.n, DecayModel::Algebraic, Annulus::new(11.0, 30.0)).unwrap().rate
    };
    let (pf, pc) = (power(&fine), power(coarse));
    println!("N tail power: N=256 {pc:.4}, N=512 {pf:.4}");
    assert!((pf - pc).abs() < 0.05);
}

#[test]
fn fit_rejects_noise_level_fields() {
    let g = Grid2D::new(256, 40.0).unwrap();
    let f = RealField::from_fn(&g, |a, b| (-3.0 * a.hypot(b)).exp());
    assert!(fit_decay(&f, DecayModel::Exponential, Annulus::new(14.0, 18.0)).is_err());
}

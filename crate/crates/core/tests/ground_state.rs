mod common;

use std::time::Instant;

use zakharov::field::{symmetry_defect, Grid2D, SymmetryClass};
use zakharov::ground_state::{compute_q, pohozaev_check, q_decay_check};
use zakharov::operators::{apply_l, LinearizedOp};

#[test]
fn shooting_oracle_is_self_consistent() {
    let s = common::shooting_ground_state();
    assert!((s.peak - 2.2062).abs() < 2e-4, "{}", s.peak);
    assert!((s.mass - 11.701).abs() < 2e-3, "{}", s.mass);
}

#[test]
fn ground_state_matches_shooting() {
    let grid = Grid2D::new(256, 40.0).unwrap();
    let start = Instant::now();
    let gs = compute_q(&grid, 1e-8).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let oracle = common::shooting_ground_state();
    assert!((gs.peak - oracle.peak).abs() < 1e-4, "{} vs {}", gs.peak, oracle.peak);
    assert!((gs.mass - oracle.mass).abs() < 1e-3, "{} vs {}", gs.mass, oracle.mass);
    let qn = gs.q.norm_l2();
    assert!(gs.residual <= 1e-8 * qn);
    assert!(symmetry_defect(&gs.q, SymmetryClass::Radial) <= 1e-8 * qn);
    assert_eq!(gs.q.values().iter().cloned().fold(f64::MIN, f64::max), gs.q.values()[grid.origin()]);
    assert!(elapsed < 30.0, "{elapsed} s");

    // samples along the first axis against the shooting profile
    let n = grid.n();
    let o = n / 2;
    for k in [0usize, 8, 16, 32, 48] {
        let r = grid.coord(o + k);
        let idx = oracle.profile.iter().position(|&(rr, _)| rr >= r).unwrap();
        let (r0, q0) = oracle.profile[idx.saturating_sub(1)];
        let (r1, q1) = oracle.profile[idx];
        let reference = if r1 > r0 { q0 + (q1 - q0) * (r - r0) / (r1 - r0) } else { q1 };
        assert!((gs.q.at(o + k, o) - reference).abs() < 1e-5, "r = {r}");
    }

    let p = pohozaev_check(&gs.q);
    assert!(p.energy_defect < 1e-6 && p.virial_defect < 1e-6, "{p:?}");

    let d = q_decay_check(&gs).unwrap();
    assert!((d.slope + 1.0).abs() < 0.05, "{d:?}");
    assert!(d.max_weighted < 10.0, "{d:?}");

    let [d1, _] = gs.q.gradient();
    let k = apply_l(&LinearizedOp::plus(&gs.q), &d1).unwrap();
    assert!(k.norm_l2() <= 1e-5 * d1.norm_l2());
    let k = apply_l(&LinearizedOp::minus(&gs.q), &gs.q).unwrap();
    assert!(k.norm_l2() <= 1e-6 * qn);
}

#[test]
fn refinement_changes_little() {
    let coarse = compute_q(&Grid2D::new(256, 40.0).unwrap(), 1e-8).unwrap();
    let fine = compute_q(&Grid2D::new(512, 40.0).unwrap(), 1e-8).unwrap();
    assert!((coarse.peak - fine.peak).abs() < 1e-6 * fine.peak);
    assert!((coarse.mass - fine.mass).abs() < 1e-6 * fine.mass);
}

//! The pipeline stages. Each returns whether every verdict passed.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use zakharov::asymptotics::{
    derivative_decay_sweep, expansion_error_scan, fit_decay, shell_maxima, Annulus, DecayModel, SweepOptions,
};
use zakharov::evolution::{centroid, shape_error, track, EvolutionState, TrackOptions};
use zakharov::field::{ComplexField, Grid2D, RealField, Snapshot};
use zakharov::ground_state::{compute_q, q_decay_check};
use zakharov::operators::{
    apply_l, apply_multiplier, coercivity, derivative_symbol_fd_error, lipschitz_in_c_check, solve_r, solve_rho,
    KrylovOptions, LinearizedOp, MultiplierSpec,
};
use zakharov::solver::{
    compute_profile, random_admissible_eta, rotate_frame, scale_profile, stationary_residuals, EtaPair,
    FixedPointProblem, SolitonProfile, SolverOptions,
};

use crate::config::RunConfig;
use crate::report::{num, write_csv, Report, Verdict};
use crate::CliError;

pub const Q_FILE: &str = "Q.zkf";
pub const PROFILE_FILES: [&str; 3] = ["U.zkf", "N.zkf", "V.zkf"];
pub const SOLVE_REPORT: &str = "solve.json";

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.output)?;
    Ok(cfg.output.clone())
}

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingArtifact(format!("{what} ({}); run the upstream step first", path.display())))
    }
}

fn load_q(dir: &Path) -> Result<RealField, CliError> {
    let path = dir.join(Q_FILE);
    require(&path, "ground state")?;
    Ok(Snapshot::load(&path)?.into_real()?)
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol_fixed_point,
        max_iter: cfg.max_iter,
        newton: cfg.newton_accel,
        dealias: cfg.dealias,
        c_cap: cfg.c_cap,
        krylov: KrylovOptions { tol: cfg.tol_krylov, ..Default::default() },
    }
}

fn on_grid(f: &RealField, grid: &Grid2D) -> Result<RealField, CliError> {
    Ok(RealField::new(grid.clone(), f.values().to_vec())?)
}

pub fn ground_state(cfg: &RunConfig) -> Result<bool, CliError> {
    let dir = out_dir(cfg)?;
    let grid = Grid2D::new(cfg.n, cfg.box_length)?;
    let gs = compute_q(&grid, cfg.tol_ground_state)?;
    Snapshot::from(gs.q.clone()).save(dir.join(Q_FILE))?;
    let decay = q_decay_check(&gs)?;
    let mut report = Report::new("ground-state", cfg);
    report.output(&dir, Q_FILE)?;
    let rel = gs.residual / gs.q.norm_l2();
    report.data = json!({
        "peak": gs.peak,
        "mass": gs.mass,
        "residual": gs.residual,
        "relative_residual": rel,
        "slope": decay.slope,
        "petviashvili_iterations": gs.petviashvili_iterations,
        "newton_iterations": gs.newton_iterations,
    });
    report.verdict(Verdict::at_most("ground_state.residual", rel, cfg.tol_ground_state, "‖ΔQ − Q + Q³‖ / ‖Q‖"));
    report.verdict(Verdict::within("ground_state.exponential_decay", decay.slope, -1.0, 0.05, "d/dr log(Q r^{1/2})"));
    report.write(&dir.join("ground_state.json"))?;
    Ok(report.passed)
}

pub fn solve(cfg: &RunConfig) -> Result<bool, CliError> {
    let dir = out_dir(cfg)?;
    let q = load_q(&dir)?;
    if q.grid().n() != cfg.n || q.grid().length() != cfg.box_length {
        return Err(CliError::Config(format!(
            "the stored ground state lives on N = {}, L = {}, the config asks for N = {}, L = {}",
            q.grid().n(),
            q.grid().length(),
            cfg.n,
            cfg.box_length
        )));
    }
    let mut report = Report::new("solve", cfg);
    report.input(&dir, Q_FILE)?;
    let speed = cfg.speed();
    let in_region = speed <= cfg.c_cap;
    report.verdict(Verdict::at_most(
        "prop.fixed_point.speed_in_region",
        speed,
        cfg.c_cap,
        "|c| within the region where the contraction is certified",
    ));
    let mut opts = solver_options(cfg);
    // outside the region the iteration still runs, for the diagnostic
    opts.c_cap = opts.c_cap.max(speed);
    let base = match compute_profile(speed, &q, opts) {
        Ok(p) => p,
        Err(e @ (zakharov::Error::Divergence { .. } | zakharov::Error::NoConvergence { .. })) => {
            report.data = json!({ "c": cfg.c, "diagnostic": e.to_string() });
            report.verdict(Verdict::flag("prop.fixed_point.converged", false, e.to_string()));
            report.write(&dir.join(SOLVE_REPORT))?;
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let it = base.iterations.clone().unwrap_or_default();
    let eta = EtaPair::new(base.u.re().sub(&q), base.u.im())?;
    let contraction = it.contraction_factor();
    report.verdict(Verdict::flag(
        "prop.fixed_point.converged",
        it.converged,
        format!("{} iterations", it.iterations),
    ));
    report.verdict(Verdict::below(
        "prop.fixed_point.contraction",
        contraction,
        1.0,
        "largest ratio of successive update norms",
    ));
    report.verdict(Verdict::at_most(
        "prop.fixed_point.residual",
        it.fixed_point_residual,
        2.0 * cfg.tol_fixed_point,
        "‖G(η*) − η*‖_E",
    ));
    report.verdict(Verdict::at_most(
        "prop.stationary_residuals",
        base.residuals.max(),
        1e-8,
        "relative residuals of the profile equations",
    ));
    if !in_region {
        log::warn!(
            "c = {speed} lies outside the contraction region |c| ≤ {}: measured contraction factor {contraction:.3}",
            cfg.c_cap
        );
    }

    let mut profile = base.clone();
    let theta = cfg.c[1].atan2(cfg.c[0]);
    if theta != 0.0 {
        // rotate_frame maps c to R_{−θ}c
        profile = rotate_frame(&profile, theta);
        profile.c = cfg.c;
    }
    if cfg.omega != 1.0 {
        profile = scale_profile(&profile, cfg.omega)?;
    }
    save_profile(&dir, &profile)?;
    for f in PROFILE_FILES {
        report.output(&dir, f)?;
    }
    report.data = json!({
        "c": cfg.c,
        "omega": cfg.omega,
        "grid": { "n": profile.grid().n(), "box": profile.grid().length() },
        "E_norm": eta.e_norm(),
        "contraction_history": it.update_norms,
        "contraction_factors": it.contraction_factors,
        "contraction_factor": contraction,
        "iterations": it.iterations,
        "newton_steps": it.newton_steps,
        "fixed_point_residual": it.fixed_point_residual,
        "residuals": base.residuals,
        "residuals_written": profile.residuals,
        "symmetry_defects": base.symmetry_defects(),
    });
    report.write(&dir.join(SOLVE_REPORT))?;
    Ok(report.passed)
}

pub fn save_profile(dir: &Path, p: &SolitonProfile) -> Result<(), CliError> {
    Snapshot::from(p.u.clone()).save(dir.join(PROFILE_FILES[0]))?;
    Snapshot::from(p.n.clone()).save(dir.join(PROFILE_FILES[1]))?;
    Snapshot::from(ComplexField::from_parts(&p.v[0], &p.v[1])).save(dir.join(PROFILE_FILES[2]))?;
    Ok(())
}

/// Profile as written by `solve`, with `c` and `ω` from its report.
pub fn load_profile(dir: &Path) -> Result<SolitonProfile, CliError> {
    for f in PROFILE_FILES.iter().chain([&SOLVE_REPORT]) {
        require(&dir.join(f), "solved profile")?;
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(SOLVE_REPORT))?)?;
    let data = &meta["data"];
    let c = data["c"]
        .as_array()
        .and_then(|a| Some([a.first()?.as_f64()?, a.get(1)?.as_f64()?]))
        .ok_or_else(|| CliError::MissingArtifact(format!("no solved profile in {}", dir.join(SOLVE_REPORT).display())))?;
    let omega = data["omega"].as_f64().unwrap_or(1.0);
    let u = Snapshot::load(dir.join(PROFILE_FILES[0]))?.into_complex()?;
    let n = Snapshot::load(dir.join(PROFILE_FILES[1]))?.into_real()?;
    let v = Snapshot::load(dir.join(PROFILE_FILES[2]))?.into_complex()?;
    let v = [v.re(), v.im()];
    let residuals = stationary_residuals(&u, &n, &v, c, omega);
    Ok(SolitonProfile { c, omega, u, n, v, residuals, iterations: None })
}

/// Undo the scaling and rotation applied by `solve`: `ω = 1`, `c` along
/// `e₁`, on the ground-state grid.
fn canonical(p: &SolitonProfile, grid: &Grid2D) -> Result<SolitonProfile, CliError> {
    let mut p = p.clone();
    if p.omega != 1.0 {
        p = scale_profile(&p, 1.0 / p.omega)?;
        p.omega = 1.0;
    }
    let theta = p.c[1].atan2(p.c[0]);
    if theta != 0.0 {
        let speed = p.speed();
        p = rotate_frame(&p, -theta);
        p.c = [speed, 0.0];
    }
    let u = ComplexField::new(grid.clone(), p.u.values().to_vec())?;
    let n = on_grid(&p.n, grid)?;
    let v = [on_grid(&p.v[0], grid)?, on_grid(&p.v[1], grid)?];
    let residuals = stationary_residuals(&u, &n, &v, p.c, 1.0);
    Ok(SolitonProfile { c: p.c, omega: 1.0, u, n, v, residuals, iterations: None })
}

type Estimate<'a> = Box<dyn Fn() -> Result<Vec<Verdict>, CliError> + Send + Sync + 'a>;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let dir = out_dir(cfg)?;
    let stored = load_profile(&dir)?;
    let q = load_q(&dir)?;
    let mut report = Report::new("verify", cfg);
    report.input(&dir, Q_FILE)?;
    for f in PROFILE_FILES {
        report.input(&dir, f)?;
    }
    let p = canonical(&stored, q.grid())?;
    let c = p.c[0];
    let opts = solver_options(cfg);
    let (p, q) = (&p, &q);
    let sweep = derivative_decay_sweep(p, SweepOptions::default())?;
    let sweep = &sweep;

    let estimates: Vec<Estimate> = vec![
        Box::new(move || {
            let eta = EtaPair::new(p.u.re().sub(q), p.u.im())?;
            let problem = FixedPointProblem::new(c, q, opts.dealias)?;
            let g = problem.g_map(&eta, opts.krylov)?;
            Ok(vec![Verdict::at_most(
                "prop.fixed_point.residual",
                g.sub(&eta).e_norm(),
                2.0 * opts.tol,
                "‖G(η) − η‖_E recomputed from the stored profile",
            )])
        }),
        Box::new(move || {
            Ok(vec![Verdict::at_most("prop.stationary_residuals", p.residuals.max(), 1e-8, "profile equations")])
        }),
        Box::new(move || {
            let s = p.symmetry_defects();
            Ok(vec![
                Verdict::at_most("rk1.re_U_even_even", s.re_u_ee, 1e-7, "relative EE defect of Re U"),
                Verdict::at_most("rk1.im_U_odd_even", s.im_u_oe, 1e-7, "relative OE defect of Im U"),
                Verdict::at_most("rk1.N_even_even", s.n_ee, 1e-7, "relative EE defect of N"),
                Verdict::at_most("rk1.V1_even_even", s.v1_ee, 1e-7, "relative EE defect of V₁"),
                Verdict::at_most("rk1.V2_odd_odd", s.v2_oo, 1e-7, "relative OO defect of V₂"),
            ])
        }),
        Box::new(move || {
            let speeds = [c / 8.0, c / 4.0, c / 2.0, c];
            let mut du = Vec::new();
            let mut dn = Vec::new();
            let mut dv = Vec::new();
            let q2 = q.mul(q);
            for &s in &speeds {
                let prof = if s == c { p.clone() } else { compute_profile(s, q, opts)? };
                du.push(prof.u.sub(&q.to_complex()).sobolev_norm(2.0));
                dn.push(prof.n.add(&q2).sobolev_norm(2.0));
                dv.push(prof.v[0].sobolev_norm(2.0).hypot(prof.v[1].sobolev_norm(2.0)));
            }
            let detail = format!("log-log slope over c = {speeds:?}");
            Ok(vec![
                Verdict::within("thm1.U_minus_Q_quadratic", slope(&speeds, &du), 2.0, 0.1, detail.clone()),
                Verdict::within("thm1.N_plus_Q2_quadratic", slope(&speeds, &dn), 2.0, 0.1, detail.clone()),
                Verdict::within("thm1.V_linear", slope(&speeds, &dv), 1.0, 0.1, detail),
            ])
        }),
        Box::new(move || {
            let spec = MultiplierSpec::sc(c)?;
            let bound = spec.analytic_bound();
            let mut worst: f64 = 0.0;
            for k in 0..20 {
                let eta = random_admissible_eta(q.grid(), 1.0, cfg.seed.wrapping_add(k));
                for f in [eta.eta1, eta.eta2] {
                    let sf = apply_multiplier(&f, &spec)?;
                    for s in [0.0, 1.0, 2.0] {
                        worst = worst.max(sf.sobolev_norm(s) / f.sobolev_norm(s));
                    }
                }
            }
            Ok(vec![Verdict::at_most(
                "lemma.Sc1.norm_bound",
                worst,
                bound * (1.0 + 1e-12),
                "max ‖S_c f‖_{H^s} / ‖f‖_{H^s} over 40 random fields, s = 0, 1, 2",
            )])
        }),
        Box::new(move || {
            let f = random_admissible_eta(q.grid(), 1.0, cfg.seed).eta1;
            let r = lipschitz_in_c_check(&f, [c, 0.0], [1.25 * c, 0.0])?;
            let fd = derivative_symbol_fd_error([c, 0.0], q.grid());
            Ok(vec![
                Verdict::flag("lemma.Sc2.lipschitz", r.passed, format!("c̃ = {}", 1.25 * c)),
                Verdict::at_most("eq.e3.finite_difference", fd, 1e-6, "∂_c symbol against centred differences"),
            ])
        }),
        Box::new(move || {
            let fit = fit_decay(&p.u.abs(), DecayModel::Exponential, Annulus::new(6.0, 16.0))?;
            Ok(vec![Verdict::at_least(
                "lemma.agmon.U_exponential_decay",
                fit.rate,
                0.5,
                format!("fitted rate of |U| on 6 ≤ |y| ≤ 16 (residual {:.2e})", fit.residual),
            )])
        }),
        Box::new(move || {
            let mut out = Vec::new();
            let tail = |field: &str| sweep.rows.iter().find(|r| r.field == field && r.m == [0, 0]).map(|r| r.fit.rate);
            if let Some(pn) = tail("N") {
                out.push(Verdict::within("eq.decrN.tail_power", pn, 2.0, 0.2, "far tail of |N|"));
            }
            for (key, field) in [("eq.decrV.tail_power_V1", "V1"), ("eq.decrV.tail_power_V2", "V2")] {
                if let Some(pv) = tail(field) {
                    out.push(Verdict::within(key, pv, 2.0, 0.15, format!("tail of |{field}|")));
                }
            }
            for field in ["N", "V1", "V2"] {
                let rows: Vec<_> = sweep.rows.iter().filter(|r| r.field == field && r.expected_power.is_some()).collect();
                let worst = rows
                    .iter()
                    .map(|r| (r.fit.rate - r.expected_power.unwrap()).abs())
                    .fold(0.0, f64::max);
                let key = if field == "N" { "eq.decrN.derivatives".to_string() } else { format!("eq.decrV.derivatives_{field}") };
                out.push(Verdict::at_most(&key, worst, 0.3, "max |p − (|m| + 2)| over |m| ≤ 2"));
            }
            Ok(out)
        }),
        Box::new(move || {
            let r = solve_r(q)?;
            let d1 = q.derivative(1, 0);
            let lr = apply_l(&LinearizedOp::minus(q), &r.solution)?.sub(&d1).norm_l2() / d1.norm_l2();
            let rho = solve_rho(q)?;
            let rhs = RealField::from_fn(q.grid(), |a, b| 0.25 * (a * a + b * b)).mul(q);
            let lrho = apply_l(&LinearizedOp::plus(q), &rho.solution)?.sub(&rhs).norm_l2() / rhs.norm_l2();
            let values = coercivity(q, &rho.solution, 20, cfg.seed)?;
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(vec![
                Verdict::at_most("appendix.R_solves_L_minus", lr, 1e-8, "‖L₋R − ∂₁Q‖ / ‖∂₁Q‖"),
                Verdict::at_most("appendix.rho_solves_L_plus", lrho, 1e-8, "‖L₊ρ − |y|²Q/4‖ / ‖|y|²Q/4‖"),
                Verdict::at_least(
                    "appendix.L_minus_coercive",
                    min,
                    f64::MIN_POSITIVE,
                    "min ⟨L₋w, w⟩ / ‖w‖²_{H¹} over 20 random w ⊥ {ρ, ∂₁Q, ∂₂Q}",
                ),
            ])
        }),
    ];
    let results: Vec<Result<Vec<Verdict>, CliError>> = estimates.par_iter().map(|e| e()).collect();
    for r in results {
        for v in r? {
            report.verdict(v);
        }
    }

    let mut rows = Vec::new();
    let far = zakharov::asymptotics::far_field(p, SweepOptions::default().padding)?;
    for row in &sweep.rows {
        let field = match (row.field, row.m) {
            ("U", m) => p.u.abs().derivative(m[0], m[1]),
            (f, m) => {
                let base = match f {
                    "N" => &far.n,
                    "V1" => &far.v[0],
                    _ => &far.v[1],
                };
                base.derivative(m[0], m[1])
            }
        }
        .map(f64::abs);
        let annulus = Annulus::new(row.fit.r_min, row.fit.r_max);
        for (r, value) in shell_maxima(&field, annulus)? {
            let fit = match row.fit.model {
                DecayModel::Exponential => row.fit.amplitude * (-row.fit.rate * r).exp(),
                DecayModel::Algebraic => row.fit.amplitude * r.powf(-row.fit.rate),
            };
            rows.push(vec![
                row.field.to_string(),
                row.m[0].to_string(),
                row.m[1].to_string(),
                num(r),
                num(value),
                num(fit),
                num((value - fit).abs()),
            ]);
        }
    }
    write_csv(&dir.join("decay.csv"), &["field", "m1", "m2", "radius", "value", "fit", "error"], &rows)?;
    report.output(&dir, "decay.csv")?;
    report.data = json!({
        "c": stored.c,
        "canonical_residuals": p.residuals,
        "symmetry_defects": p.symmetry_defects(),
        "decay_sweep": sweep,
    });
    report.write(&dir.join("verify.json"))?;
    Ok(report.passed)
}

pub fn expand(cfg: &RunConfig) -> Result<bool, CliError> {
    let dir = out_dir(cfg)?;
    let stored = load_profile(&dir)?;
    let q = load_q(&dir)?;
    let mut report = Report::new("expand", cfg);
    for f in PROFILE_FILES {
        report.input(&dir, f)?;
    }
    let p = canonical(&stored, q.grid())?;
    let scan = expansion_error_scan(&p, cfg.expand_k, cfg.expand_r_min, cfg.expand_r_max)?;
    let mut rows = Vec::new();
    for ray in &scan.rays {
        for row in &ray.rows {
            rows.push(vec![
                num(ray.direction[0]),
                num(ray.direction[1]),
                num(row.radius),
                num(row.n_value),
                num(*row.partial_sums.last().unwrap_or(&0.0)),
                num(row.error),
                num(row.error_k0),
            ]);
        }
    }
    write_csv(
        &dir.join("expansion.csv"),
        &["ray_x", "ray_y", "radius", "value", "fit", "error", "error_k0"],
        &rows,
    )?;
    report.output(&dir, "expansion.csv")?;
    let e2 = scan
        .rays
        .iter()
        .find(|r| r.direction == [0.0, 1.0])
        .ok_or_else(|| CliError::Config("no e₂ ray in the scan".into()))?;
    report.verdict(Verdict::at_most(
        "eq.expanN.error_slope",
        e2.slope,
        -3.5,
        format!("log-log slope of the order-{} error along e₂", scan.k),
    ));
    report.verdict(Verdict::flag(
        "eq.expanN.beats_leading_term",
        e2.beats_leading_term,
        format!("order-{} error below the order-0 error at every point of the e₂ ray", scan.k),
    ));
    report.data = json!({
        "c": p.c[0],
        "nu": scan.nu,
        "k": scan.k,
        "prefactor_errors": { "pi": scan.prefactor_errors[0], "pi_squared": scan.prefactor_errors[1] },
        "best_pi_power": scan.best_pi_power,
        "constant": scan.constant,
        "truncation_tail": scan.truncation_tail,
        "rays": scan.rays.iter().map(|r| json!({
            "direction": r.direction,
            "slope": r.slope,
            "beats_leading_term": r.beats_leading_term,
        })).collect::<Vec<_>>(),
    });
    report.write(&dir.join("expand.json"))?;
    Ok(report.passed)
}

pub fn evolve(cfg: &RunConfig, profile_dir: Option<&Path>) -> Result<bool, CliError> {
    let dir = out_dir(cfg)?;
    let src = profile_dir.map(Path::to_path_buf).unwrap_or_else(|| dir.clone());
    let profile = load_profile(&src)?;
    let mut report = Report::new("evolve", cfg);
    for f in PROFILE_FILES {
        report.inputs.insert(f.to_string(), crate::report::hash_file(&src.join(f))?);
    }
    let initial = EvolutionState::from_profile(&profile)?;
    let reference = initial.u.abs();
    let start = centroid(&initial.u);
    let snap_dir = dir.join("snapshots");
    if cfg.snap_every > 0 {
        fs::create_dir_all(&snap_dir)?;
    }
    let opts = TrackOptions {
        sample_every: if cfg.snap_every > 0 { cfg.snap_every } else { 500 },
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut snaps = Vec::new();
    let mut step_index = 0usize;
    let result = track(&initial, cfg.evolve_t, cfg.evolve_dt, opts, |state, sample| {
        let guess = [sample.center[0] - start[0], sample.center[1] - start[1]];
        let (err, _) = shape_error(&state.u.abs(), &reference, guess);
        let c = &sample.conserved;
        rows.push(vec![
            num(sample.t),
            num(sample.center[0]),
            num(sample.center[1]),
            num(c.mass),
            num(c.energy),
            num(c.momentum[0]),
            num(c.momentum[1]),
            num(err),
        ]);
        if cfg.snap_every > 0 {
            for (name, snap) in [
                ("u", Snapshot::from(state.u.clone())),
                ("n", Snapshot::from(state.n.clone())),
                ("v", Snapshot::from(ComplexField::from_parts(&state.v[0], &state.v[1]))),
            ] {
                let file = format!("{name}_{step_index:07}.zkf");
                snap.save(snap_dir.join(&file))?;
                snaps.push(format!("snapshots/{file}"));
            }
        }
        step_index += opts.sample_every;
        Ok(())
    })?;
    write_csv(
        &dir.join("trajectory.csv"),
        &["t", "center_x", "center_y", "M", "H", "P1", "P2", "shape_error"],
        &rows,
    )?;
    report.output(&dir, "trajectory.csv")?;
    for s in &snaps {
        report.output(&dir, s)?;
    }
    let c = profile.c;
    let speed = c[0].hypot(c[1]);
    let dv = (result.velocity[0] - c[0]).hypot(result.velocity[1] - c[1]);
    let (value, limit) = if speed > 0.0 { (dv / speed, 0.02) } else { (dv, 2e-3) };
    report.verdict(Verdict::at_most("eq.unv.velocity", value, limit, "fitted centroid velocity against c"));
    report.verdict(Verdict::at_most("intro.mass_conservation", result.drift.mass, 1e-8, "relative drift of M"));
    report.verdict(Verdict::at_most("intro.energy_conservation", result.drift.energy, 1e-5, "relative drift of H"));
    report.verdict(Verdict::at_most("intro.momentum_conservation", result.drift.momentum, 1e-5, "relative drift of P"));
    report.data = json!({
        "c": c,
        "dt": result.dt,
        "T": cfg.evolve_t,
        "velocity": result.velocity,
        "drift": result.drift,
        "shape_error": result.shape_error,
        "relative_shape_error": result.relative_shape_error,
        "shift": result.shift,
    });
    report.write(&dir.join("evolve.json"))?;
    Ok(report.passed)
}

/// Every stage in order. Stops at the first runtime error; a failed solve
/// stops the pipeline since nothing downstream has a profile to work on.
pub fn all(cfg: &RunConfig) -> Result<bool, CliError> {
    let mut ok = ground_state(cfg)?;
    if !solve(cfg)? {
        return Ok(false);
    }
    ok &= verify(cfg)?;
    ok &= expand(cfg)?;
    ok &= evolve(cfg, None)?;
    Ok(ok)
}

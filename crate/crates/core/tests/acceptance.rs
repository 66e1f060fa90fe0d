//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and fails
//! when its criterion does not hold.

use std::sync::OnceLock;

use singular_wave::coefficients::{
    glaeser_report, regularize, CoefficientSpec, LowerOrderTerms, RegularizedCoefficient, SmoothFn,
};
use singular_wave::config::{parse_config, Experiment};
use singular_wave::diagnostics::{l2_norm, SweepReport};
use singular_wave::exact::{
    check_compatibility, dalembert, default_g0, default_g0_prime, default_g1, ExactSolution, InitialData,
};
use singular_wave::grid::Grid1D;
use singular_wave::harness::{run_alpha_sweep, run_blowup, run_convergence, AlphaSweep};
use singular_wave::mollifier::{
    bump_derivative_l1, bump_value, mollifier_derivative, mollifier_mass, mollifier_value,
};
use singular_wave::solver::{evolve, SolveConfig};

const JOBS: usize = 4;

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!("{} criterion {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn convergence(preset: &str) -> SweepReport {
    let cfg = parse_config(&format!("preset = {preset}"), Experiment::Convergence).unwrap();
    run_convergence(&cfg, JOBS).unwrap()
}

fn desk_convergence() -> &'static SweepReport {
    static R: OnceLock<SweepReport> = OnceLock::new();
    R.get_or_init(|| convergence("desk"))
}

fn desk_blowup() -> &'static SweepReport {
    static R: OnceLock<SweepReport> = OnceLock::new();
    R.get_or_init(|| run_blowup(&parse_config("", Experiment::Blowup).unwrap(), JOBS).unwrap())
}

fn desk_alpha_sweep() -> &'static AlphaSweep {
    static R: OnceLock<AlphaSweep> = OnceLock::new();
    R.get_or_init(|| run_alpha_sweep(&parse_config("", Experiment::AlphaSweep).unwrap(), JOBS).unwrap())
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn column(report: &SweepReport) -> Vec<f64> {
    report.values().into_iter().map(|(_, v)| v).collect()
}

fn convergence_holds(report: &SweepReport) -> (bool, String) {
    let errs = column(report);
    let ok = report.all_succeeded()
        && errs.len() == 6
        && strictly(&errs, false)
        && errs[5] < 0.2 * errs[0];
    (ok, format!("errors {}, ratio last/first {:.3e}", list(&errs), errs[5] / errs[0]))
}

#[test]
fn criterion_1_convergence_to_the_piecewise_solution() {
    let (ok, detail) = convergence_holds(desk_convergence());
    verdict("1 (desk, dx = 0.002)", ok, &detail);
    // eps below the grid spacing: the paper resolution separates the last rows
    let (paper_ok, paper_detail) = convergence_holds(&convergence("paper"));
    verdict("1 (paper, dx = 0.0005, supplementary)", paper_ok, &paper_detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_2_delta_blowup() {
    let r = desk_blowup();
    let norms = column(r);
    let n = r.fitted_exponent();
    let ok = r.all_succeeded() && norms.len() == 6 && strictly(&norms, true) && n.is_some_and(|n| n > 0.0);
    let detail = format!("norms {norms:?}, exponent {n:?}");
    verdict("2", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_3_alpha_sweep_ordering() {
    let sweep = desk_alpha_sweep();
    let exps: Vec<(f64, f64)> = sweep
        .exponents()
        .into_iter()
        .map(|(a, n)| (a, n.unwrap_or(f64::NAN)))
        .collect();
    let ordered = exps.windows(2).all(|w| w[1].1 >= w[0].1);
    let alpha0 = exps.iter().find(|(a, _)| *a == 0.0).map(|p| p.1).unwrap();
    let delta = sweep.reports.iter().find(|(a, _)| *a == -1.0).unwrap();
    let same_as_delta = delta.1.values() == desk_blowup().values();
    let ok = sweep.all_succeeded() && ordered && alpha0 <= 0.1 && same_as_delta;
    let detail = format!(
        "exponents {}; non-decreasing {ordered}, alpha=0 {alpha0:.3e} <= 0.1, alpha=-1 equals delta {same_as_delta}",
        exps.iter().map(|(a, n)| format!("{a}: {n:.3e}")).collect::<Vec<_>>().join(", ")
    );
    verdict("3", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_4_constant_coefficient_first_order() {
    let data = InitialData::paper_default();
    let mut errs = Vec::new();
    for dx in [0.002, 0.001] {
        let grid = Grid1D::with_spacing(-4.0, 4.0, dx).unwrap();
        let a = RegularizedCoefficient::unmollified(&SmoothFn::constant(1.0), &grid);
        let cfg = SolveConfig {
            t_final: 0.5,
            cfl_target: 0.9,
            ..Default::default()
        };
        let ev = evolve(&data, &a, &LowerOrderTerms::default(), &cfg).unwrap();
        let diff: Vec<f64> = grid
            .nodes()
            .zip(&ev.state.u)
            .map(|(x, u)| u - dalembert(&data, 0.5, x))
            .collect();
        errs.push(l2_norm(&diff, &grid).unwrap());
    }
    let ratio = errs[0] / errs[1];
    let ok = (1.6..=2.4).contains(&ratio);
    let detail = format!("error {:.4e} at dx = 0.002, {:.4e} at dx = 0.001, ratio {ratio:.4}", errs[0], errs[1]);
    verdict("4", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_5_exact_solution_properties() {
    let data = InitialData::paper_default();
    let exact = ExactSolution::new(data.clone(), 2.0).unwrap();
    let mut failures = Vec::new();

    let scale = 1.0
        + (0..=20_000)
            .map(|i| {
                let x = -1.0 + i as f64 * 1e-4;
                data.g0_prime(x).abs().max(data.g1(x).abs())
            })
            .fold(0.0, f64::max);
    for t in [0.5, 1.0, 2.0] {
        let j0 = (exact.u(t, 1e-8).unwrap() - exact.u(t, -1e-8).unwrap()).abs();
        let jt = (exact.u(t, t + 1e-8).unwrap() - exact.u(t, t - 1e-8).unwrap()).abs();
        if j0 > 1e-7 * scale || jt > 1e-7 * scale {
            failures.push(format!("continuity at t = {t}: {j0:e}, {jt:e}"));
        }
    }
    for i in 0..1000 {
        let x = -3.0 + 6.0 * i as f64 / 999.0;
        let du = (exact.u(0.0, x).unwrap() - default_g0(x)).abs();
        let dv = (exact.ut(0.0, x).unwrap() - default_g1(x)).abs();
        if du > 1e-12 || dv > 1e-12 {
            failures.push(format!("initial condition at x = {x}"));
            break;
        }
    }
    let residual = check_compatibility(&data, 2.0).unwrap();
    if residual > 1e-12 {
        failures.push(format!("compatibility residual {residual:e}"));
    }
    let u1 = exact.u(2.0, 2.5).unwrap();
    let u2 = exact.u(2.0, -0.5).unwrap();
    if (u1 + 0.019_775_390_625).abs() > 1e-12 || (u2 + 0.125_244_140_625).abs() > 1e-12 {
        failures.push(format!("spot values {u1}, {u2}"));
    }
    let ok = failures.is_empty();
    let detail = if ok {
        format!("continuity, initial data, residual {residual:e}, u(2, 2.5) = {u1}, u(2, -0.5) = {u2}")
    } else {
        failures.join("; ")
    };
    verdict("5", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_6_energy_is_non_increasing() {
    let mut worst = f64::NEG_INFINITY;
    let mut runs = 0;
    let mut reports: Vec<&SweepReport> = vec![desk_convergence(), desk_blowup()];
    reports.extend(desk_alpha_sweep().reports.iter().map(|(_, r)| r));
    for r in reports {
        for row in r.rows() {
            worst = worst.max(row.energy_gain.unwrap_or(f64::INFINITY));
            runs += 1;
        }
    }
    let ok = worst <= 1e-12;
    let detail = format!("{runs} runs, largest per-step gain {worst:.3e} E(0)");
    verdict("6", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_7_mollification_properties() {
    let mut failures = Vec::new();
    for eps in [1.0, 0.1, 0.01, 0.001] {
        let m = mollifier_mass(eps).unwrap();
        if (m - 1.0).abs() > 1e-6 {
            failures.push(format!("mass {m} at eps {eps}"));
        }
        for k in 0..=200 {
            let x = eps * (1.0 + k as f64 / 100.0);
            for v in [
                mollifier_value(eps, x).unwrap(),
                mollifier_value(eps, -x).unwrap(),
                mollifier_derivative(eps, x, 1).unwrap(),
                mollifier_derivative(eps, -x, 2).unwrap(),
            ] {
                if v != 0.0 {
                    failures.push(format!("support leak at eps {eps}, |x| = {x}"));
                }
            }
        }
    }
    let desk = Grid1D::with_spacing(-4.0, 4.0, 0.002).unwrap();
    let phi1 = bump_derivative_l1(1);
    let mut ratios = Vec::new();
    for eps in [0.1, 0.01] {
        let h = regularize(&CoefficientSpec::heaviside(), eps, eps, &desk).unwrap();
        let d1 = h.d1_samples().unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if d1 > phi1 / eps * (1.0 + 1e-8) {
            failures.push(format!("derivative bound at eps {eps}: {d1} > {}", phi1 / eps));
        }
        // Glaeser with M1 sampled on the grid; the chi kernel needs ~50 nodes per radius
        let fine = Grid1D::with_spacing(-0.5, 4.0, eps / 50.0).unwrap();
        let chi = regularize(&CoefficientSpec::chi_alpha(-0.5).unwrap(), eps, eps, &fine).unwrap();
        for (label, a) in [("heaviside", &h), ("chi_alpha(-0.5)", &chi)] {
            let r = glaeser_report(a).unwrap();
            ratios.push(format!("{label} eps {eps}: {:.6}", r.worst_ratio));
            if r.worst_ratio > 1.0 + 1e-8 {
                failures.push(format!("Glaeser {label} eps {eps}: ratio {}", r.worst_ratio));
            }
        }
    }
    let ok = failures.is_empty();
    let detail = if ok {
        format!("mass, support, derivative bound; Glaeser ratios [{}]", ratios.join(", "))
    } else {
        failures.join("; ")
    };
    verdict("7", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_8_negligible_perturbation() {
    let delta = 1e-8;
    let grid = Grid1D::with_spacing(-4.0, 4.0, 0.002).unwrap();
    let a = regularize(&CoefficientSpec::heaviside(), 0.01, 0.01, &grid).unwrap();
    let cfg = SolveConfig {
        t_final: 2.0,
        cfl_target: 1.0,
        ..Default::default()
    };
    let base = InitialData::paper_default();
    let perturbed = InitialData::new(
        move |x| default_g0(x) + delta * bump_value(x),
        move |x| default_g0_prime(x) + delta * mollifier_derivative(1.0, x, 1).unwrap(),
        default_g1,
        1.0,
    )
    .unwrap();
    let lot = LowerOrderTerms::default();
    let u0 = evolve(&base, &a, &lot, &cfg).unwrap().state.u;
    let u1 = evolve(&perturbed, &a, &lot, &cfg).unwrap().state.u;
    let diff: Vec<f64> = u0.iter().zip(&u1).map(|(a, b)| b - a).collect();
    let change = l2_norm(&diff, &grid).unwrap();
    let bump_norm = l2_norm(&grid.sample(bump_value), &grid).unwrap();
    let bound = 10.0 * delta * bump_norm;
    let ok = change <= bound;
    let detail = format!("||u_pert - u|| = {change:.4e}, bound 10 delta ||bump|| = {bound:.4e}");
    verdict("8", ok, &detail);
    assert!(ok, "{detail}");
}

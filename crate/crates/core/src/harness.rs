//! Sweep orchestration for the experiments.
//!
//! Every `(alpha, eps)` row is an independent task. Rows run on a rayon pool
//! of `jobs` workers and are sorted by descending `eps` before reporting, so
//! the output does not depend on the number of workers.

use std::fs::File;
use std::io::BufWriter;

use log::info;
use rayon::prelude::*;

use crate::coefficients::{
    default_levi_floor, glaeser_report, levi_constant, regularize, GlaeserReport,
    LowerOrderTerms, RegularizedCoefficient, SmoothFn,
};
use crate::config::{CoefficientChoice, Experiment, ExperimentConfig};
use crate::diagnostics::{
    l2_error_vs_exact, l2_norm, SweepMetadata, SweepReport, SweepRow, ValueKind,
};
use crate::error::{Error, Result};
use crate::exact::{ExactSolution, InitialData};
use crate::grid::Grid1D;
use crate::mollifier::{mollifier_mass, MollifierSpec};
use crate::solver::{evolve, Evolution, SolveConfig, TimeStep};

/// Samples the configured coefficient at `eps`.
pub fn build_coefficient(
    choice: CoefficientChoice,
    cfg: &ExperimentConfig,
    eps: f64,
    grid: &Grid1D,
) -> Result<RegularizedCoefficient> {
    match choice {
        CoefficientChoice::Constant(c) => Ok(RegularizedCoefficient::unmollified(&SmoothFn::constant(c), grid)),
        _ => regularize(&choice.spec(cfg.jump_location)?, eps, cfg.scale.omega(eps), grid),
    }
}

fn solve_config(cfg: &ExperimentConfig) -> SolveConfig {
    SolveConfig {
        t_final: cfg.t_final,
        dt: TimeStep::Auto,
        cfl_target: cfg.cfl_target,
        dissipation: cfg.dissipation,
        record_every: cfg.record_every,
        track_energy: true,
        ..Default::default()
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

/// Runs one row and converts any failure into a failure marker.
fn run_row(
    cfg: &ExperimentConfig,
    choice: CoefficientChoice,
    alpha: Option<f64>,
    eps: f64,
    grid: &Grid1D,
    measure: &(dyn Fn(&Evolution) -> Result<f64> + Sync),
    kind: ValueKind,
) -> SweepRow {
    let attempt = || -> Result<Evolution> {
        let a = build_coefficient(choice, cfg, eps, grid)?;
        evolve(&InitialData::paper_default(), &a, &LowerOrderTerms::default(), &solve_config(cfg))
    };
    let outcome = attempt().and_then(|ev| measure(&ev).map(|v| (v, ev)));
    match outcome {
        Ok((value, ev)) => {
            info!("{choice} eps={eps}: {kind} {value:e} ({} steps, dt={:e})", ev.steps, ev.dt);
            SweepRow {
                eps,
                alpha,
                kind,
                value: Some(value),
                dt: ev.dt,
                energy_gain: ev.max_relative_energy_gain(),
                failure: None,
            }
        }
        Err(e) => SweepRow {
            eps,
            alpha,
            kind,
            value: None,
            dt: f64::NAN,
            energy_gain: None,
            failure: Some(e.to_string()),
        },
    }
}

fn metadata(cfg: &ExperimentConfig, coefficient: String, notes: Vec<String>) -> SweepMetadata {
    let mut notes = notes;
    notes.push("exponent estimated at the report time only, for u itself".into());
    SweepMetadata {
        t_final: cfg.t_final,
        dx: cfg.dx(),
        cfl: cfg.cfl_target,
        coefficient,
        notes,
    }
}

fn expect(cfg: &ExperimentConfig, experiment: Experiment) -> Result<Grid1D> {
    if cfg.experiment != experiment {
        return Err(Error::Validation(format!(
            "config is for '{}', not '{experiment}'",
            cfg.experiment
        )));
    }
    cfg.validate()?;
    cfg.grid()
}

/// `||u_eps - u_exact||` at `t_final` for each `eps` (Heaviside coefficient).
pub fn run_convergence(cfg: &ExperimentConfig, jobs: usize) -> Result<SweepReport> {
    let grid = expect(cfg, Experiment::Convergence)?;
    let exact = ExactSolution::new(InitialData::paper_default(), cfg.t_final.max(1.0))?;
    let measure = |ev: &Evolution| l2_error_vs_exact(&ev.state, &exact, &grid);
    let rows = pool(jobs)?.install(|| {
        cfg.eps_list
            .par_iter()
            .map(|&eps| run_row(cfg, cfg.coefficient, None, eps, &grid, &measure, ValueKind::Error))
            .collect()
    });
    Ok(SweepReport::new(rows, metadata(cfg, cfg.coefficient.to_string(), vec![])))
}

/// `||u_eps||` at `t_final` for each `eps`.
pub fn run_blowup(cfg: &ExperimentConfig, jobs: usize) -> Result<SweepReport> {
    let grid = expect(cfg, Experiment::Blowup)?;
    let measure = |ev: &Evolution| l2_norm(&ev.state.u, &grid);
    let rows = pool(jobs)?.install(|| {
        cfg.eps_list
            .par_iter()
            .map(|&eps| run_row(cfg, cfg.coefficient, None, eps, &grid, &measure, ValueKind::Norm))
            .collect()
    });
    Ok(SweepReport::new(rows, metadata(cfg, cfg.coefficient.to_string(), vec![])))
}

/// One norm sweep per `alpha`, in the order of `alpha_list`.
#[derive(Debug, Clone)]
pub struct AlphaSweep {
    pub reports: Vec<(f64, SweepReport)>,
}

impl AlphaSweep {
    /// `(alpha, fitted exponent)` for each sweep.
    pub fn exponents(&self) -> Vec<(f64, Option<f64>)> {
        self.reports
            .iter()
            .map(|(a, r)| (*a, r.fitted_exponent()))
            .collect()
    }

    pub fn all_succeeded(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.all_succeeded())
    }
}

pub fn run_alpha_sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<AlphaSweep> {
    let grid = expect(cfg, Experiment::AlphaSweep)?;
    let alphas = cfg
        .alpha_list
        .clone()
        .ok_or_else(|| Error::Validation("alpha_sweep needs alpha_list".into()))?;
    let measure = |ev: &Evolution| l2_norm(&ev.state.u, &grid);
    let tasks: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| cfg.eps_list.iter().map(move |&e| (a, e)))
        .collect();
    let rows: Vec<SweepRow> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(alpha, eps)| {
                run_row(cfg, CoefficientChoice::ChiAlpha(alpha), Some(alpha), eps, &grid, &measure, ValueKind::Norm)
            })
            .collect()
    });
    let reports = alphas
        .iter()
        .map(|&alpha| {
            let mine = rows.iter().filter(|r| r.alpha == Some(alpha)).cloned().collect();
            let (label, notes) = if alpha == -1.0 {
                ("delta".to_string(), vec!["alpha = -1 dispatched to the delta coefficient".to_string()])
            } else if alpha == 0.0 {
                ("heaviside".to_string(), vec!["alpha = 0 dispatched to the Heaviside coefficient".to_string()])
            } else {
                (format!("chi_alpha({alpha})"), vec![])
            };
            (alpha, SweepReport::new(mine, metadata(cfg, label, notes)))
        })
        .collect();
    Ok(AlphaSweep { reports })
}

/// A single run at the first `eps` of the config.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub evolution: Evolution,
    pub report: SweepReport,
}

pub fn solve(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    let grid = expect(cfg, Experiment::Solve)?;
    let eps = cfg.eps_list[0];
    let a = build_coefficient(cfg.coefficient, cfg, eps, &grid)?;
    let data = InitialData::paper_default();
    let evolution = evolve(&data, &a, &LowerOrderTerms::default(), &solve_config(cfg))?;
    if let Some(path) = &cfg.snapshots {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let states = if evolution.snapshots.is_empty() {
            std::slice::from_ref(&evolution.state)
        } else {
            &evolution.snapshots[..]
        };
        for s in states {
            s.write_snapshot(&grid, &mut out).map_err(|e| Error::io(path, e))?;
        }
    }
    let mut rows = vec![SweepRow {
        eps,
        alpha: None,
        kind: ValueKind::Norm,
        value: Some(l2_norm(&evolution.state.u, &grid)?),
        dt: evolution.dt,
        energy_gain: evolution.max_relative_energy_gain(),
        failure: None,
    }];
    if cfg.coefficient == CoefficientChoice::Heaviside && cfg.jump_location == 0.0 {
        let exact = ExactSolution::new(data, cfg.t_final.max(1.0))?;
        let mut row = rows[0].clone();
        row.kind = ValueKind::Error;
        row.value = Some(l2_error_vs_exact(&evolution.state, &exact, &grid)?);
        rows.push(row);
    }
    let report = SweepReport::new(rows, metadata(cfg, cfg.coefficient.to_string(), vec![]));
    Ok(SolveOutcome { evolution, report })
}

/// Coefficient diagnostics at one `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub eps: f64,
    pub omega: f64,
    pub kernel_mass: f64,
    pub max_a: f64,
    pub levi: Option<f64>,
    pub glaeser: Option<GlaeserReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    /// Recomputed integral behind the kernel's normalization constant.
    pub bump_integral: f64,
    pub coefficient: String,
    pub rows: Vec<CheckRow>,
}

pub fn check(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let grid = expect(cfg, Experiment::Check)?;
    let bump_integral = MollifierSpec::default().self_check()?;
    let mut rows = Vec::new();
    for &eps in &cfg.eps_list {
        let omega = cfg.scale.omega(eps);
        let a = build_coefficient(cfg.coefficient, cfg, eps, &grid)?;
        let levi = match a.negated_derivative() {
            Ok(b1) => Some(levi_constant(&b1, &a, default_levi_floor(&a))?),
            Err(_) => None,
        };
        rows.push(CheckRow {
            eps,
            omega,
            kernel_mass: mollifier_mass(omega)?,
            max_a: a.max_value(),
            levi,
            glaeser: glaeser_report(&a).ok(),
        });
    }
    Ok(CheckReport {
        bump_integral,
        coefficient: cfg.coefficient.to_string(),
        rows,
    })
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use singular_wave::config::{parse_config, Experiment, ExperimentConfig, Preset};
use singular_wave::diagnostics::SweepReport;
use singular_wave::harness::{self, CheckReport};
use singular_wave::report::{emit_csv, emit_csv_many, emit_svg, emit_svg_many, Series};
use singular_wave::Error;

/// Wave equations with singular coefficients: regularize, solve, sweep.
#[derive(Debug, Parser)]
#[command(name = "singular-wave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Error against the exact solution of the Heaviside model, per eps.
    Convergence(Common),
    /// L2 norm of the delta-coefficient solutions, per eps.
    Blowup(Common),
    /// L2 norms for the homogeneous distributions chi^alpha_+, per alpha and eps.
    AlphaSweep(Common),
    /// A single run, optionally dumping snapshots.
    Solve(Common),
    /// Coefficient diagnostics: Levi constant, Glaeser ratio, kernel checks.
    Check(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resolution preset (desk: dx = 0.002, paper: dx = 0.0005).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Number of worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

enum Failure {
    Config(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Validation(_) | Error::InvalidArgument(_) => Failure::Config(e),
            e => Failure::Run(e),
        }
    }
}

fn load(common: &Common, experiment: Experiment) -> Result<ExperimentConfig, Failure> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Config(Error::io(path, e)))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text, experiment)?;
    if let Some(p) = &common.preset {
        cfg.preset = p.parse::<Preset>().map_err(Error::Validation)?;
    }
    if common.csv.is_some() {
        cfg.output_csv = common.csv.clone();
    }
    if common.svg.is_some() {
        cfg.output_svg = common.svg.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(label: &str, report: &SweepReport) {
    println!("{label}: {} at t = {}, dx = {}", report.metadata.coefficient, report.metadata.t_final, report.metadata.dx);
    println!("{:>10} {:>8} {:>22} {:>12} {:>12}", "eps", "kind", "value", "dt", "energy_gain");
    for row in report.rows() {
        let value = match (row.value, &row.failure) {
            (Some(v), _) => format!("{v:.15e}"),
            (None, Some(f)) => format!("FAILED: {f}"),
            (None, None) => "FAILED".into(),
        };
        let gain = row.energy_gain.map(|g| format!("{g:.2e}")).unwrap_or_default();
        println!("{:>10} {:>8} {:>22} {:>12.4e} {:>12}", row.eps, row.kind, value, row.dt, gain);
    }
    match report.fitted_exponent() {
        Some(n) => println!("fitted exponent N = {n:.6}"),
        None => println!("fitted exponent: n/a (fewer than 3 successful rows)"),
    }
    for note in &report.metadata.notes {
        println!("note: {note}");
    }
}

fn print_check(r: &CheckReport) {
    println!("bump integral {:.9} (normalization 0.443994)", r.bump_integral);
    println!("coefficient {}", r.coefficient);
    println!(
        "{:>10} {:>10} {:>12} {:>14} {:>14} {:>14} {:>12}",
        "eps", "omega", "mass", "max a", "Levi M2", "Glaeser M1", "ratio"
    );
    for row in &r.rows {
        let levi = row.levi.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        let (m1, ratio) = row
            .glaeser
            .map(|g| (format!("{:.6e}", g.m1_eps), format!("{:.6}", g.worst_ratio)))
            .unwrap_or_else(|| ("-".into(), "-".into()));
        println!(
            "{:>10} {:>10.6} {:>12.9} {:>14.6e} {:>14} {:>14} {:>12}",
            row.eps, row.omega, row.kernel_mass, row.max_a, levi, m1, ratio
        );
    }
}

fn check_csv(r: &CheckReport) -> String {
    let mut out = String::from("epsilon,omega,kernel_mass,max_a,levi,glaeser_m1,glaeser_ratio\n");
    for row in &r.rows {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.eps,
            row.omega,
            row.kernel_mass,
            row.max_a,
            opt(row.levi),
            opt(row.glaeser.map(|g| g.m1_eps)),
            opt(row.glaeser.map(|g| g.worst_ratio)),
        ));
    }
    out
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Convergence(c) => single(&c, Experiment::Convergence),
        Command::Blowup(c) => single(&c, Experiment::Blowup),
        Command::Solve(c) => single(&c, Experiment::Solve),
        Command::AlphaSweep(c) => {
            let cfg = load(&c, Experiment::AlphaSweep)?;
            let sweep = harness::run_alpha_sweep(&cfg, c.jobs)?;
            for (alpha, report) in &sweep.reports {
                print_report(&format!("alpha = {alpha}"), report);
                println!();
            }
            println!("alpha, fitted exponent");
            for (alpha, n) in sweep.exponents() {
                match n {
                    Some(n) => println!("{alpha:>6} {n:.6}"),
                    None => println!("{alpha:>6} n/a"),
                }
            }
            let reports: Vec<&SweepReport> = sweep.reports.iter().map(|(_, r)| r).collect();
            if let Some(path) = &cfg.output_csv {
                emit_csv_many(&reports, path)?;
            }
            if let Some(path) = &cfg.output_svg {
                let series: Vec<Series> = sweep
                    .reports
                    .iter()
                    .map(|(a, r)| Series {
                        label: format!("alpha = {a}"),
                        report: r,
                    })
                    .collect();
                emit_svg_many(&format!("L2 norm at t = {}", cfg.t_final), &series, path)?;
            }
            Ok(sweep.all_succeeded())
        }
        Command::Check(c) => {
            let cfg = load(&c, Experiment::Check)?;
            let report = harness::check(&cfg)?;
            print_check(&report);
            if let Some(path) = &cfg.output_csv {
                std::fs::write(path, check_csv(&report)).map_err(|e| Error::io(path, e))?;
            }
            Ok(true)
        }
    }
}

fn single(c: &Common, experiment: Experiment) -> Result<bool, Failure> {
    let cfg = load(c, experiment)?;
    let report = match experiment {
        Experiment::Convergence => harness::run_convergence(&cfg, c.jobs)?,
        Experiment::Blowup => harness::run_blowup(&cfg, c.jobs)?,
        _ => harness::solve(&cfg)?.report,
    };
    print_report(&experiment.to_string(), &report);
    if let Some(path) = &cfg.output_csv {
        emit_csv(&report, path)?;
    }
    if let Some(path) = &cfg.output_svg {
        emit_svg(&report, path)?;
    }
    Ok(report.all_succeeded())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some rows failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

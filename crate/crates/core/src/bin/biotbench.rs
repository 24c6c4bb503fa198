//! Command-line driver for the Biot benchmarks and analysis checks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use biot_core::analysis::{
    constants_report, fov_check, inf_sup_constant, lsl_decomposition_check, schur_complement_check,
    verify_inequalities, NormMatrix, CONSTANTS_HEADER,
};
use biot_core::bench::{build_problem, export_all, parse_mesh_size, run_case, run_sweep, CaseSpec, SweepSpec, CSV_HEADER};
use biot_core::biot::{BiotSystem, Variant};
use biot_core::mesh::ProblemKind;
use biot_core::precond::{Family, PrecondId};
use biot_core::{BiotError, Result};

#[derive(Parser)]
#[command(name = "biotbench", version, about = "Block-preconditioned Biot benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one backward-Euler step and print a CSV row.
    Run(RunArgs),
    /// Run a parameter grid read from a key = value file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the `out` key of the file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense checks of the stability constants on small meshes.
    Analyze(AnalyzeArgs),
    /// Write the full, diagonal-bubble and eliminated systems as Matrix Market.
    ExportMm(ExportArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, default_value = "mandel2d")]
    problem: String,
    /// Mesh size as `1/n` or a decimal.
    #[arg(long, default_value = "1/16")]
    h: String,
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    /// Poisson ratio; defaults to 0 for Mandel and 0.2 for the footing.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    perm: f64,
    /// Permeability for `x ≥ 0.5` (footing only).
    #[arg(long)]
    perm_jump: Option<f64>,
    #[arg(long, default_value = "bl")]
    precond: String,
    #[arg(long)]
    inexact: bool,
    /// `full`, `diag` or `elim`; defaults to the one matching the preconditioner.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Infsup,
    Fov,
    Inequalities,
    Lsl,
    Constants,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    check: Check,
    #[arg(long, default_value = "mandel2d")]
    problem: String,
    /// Comma-separated mesh sizes.
    #[arg(long, default_value = "1/2,1/4")]
    h: String,
    #[arg(long, default_value = "0.1,0.0001")]
    tau: String,
    #[arg(long, default_value = "0,0.4")]
    nu: String,
    #[arg(long, default_value = "1,1e-6,1e-10")]
    perm: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExportArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "mandel2d")]
    problem: String,
    #[arg(long, default_value = "1/8")]
    h: String,
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    perm: f64,
    #[arg(long)]
    perm_jump: Option<f64>,
}

fn default_nu(problem: ProblemKind) -> f64 {
    match problem {
        ProblemKind::Mandel2d => 0.0,
        ProblemKind::Footing3d => 0.2,
    }
}

fn floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| BiotError::Parse(format!("invalid number '{v}'"))))
        .collect()
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(args: &RunArgs) -> Result<bool> {
    let problem: ProblemKind = args.problem.parse()?;
    let precond: PrecondId = args.precond.parse()?;
    let mut case = CaseSpec::new(problem, parse_mesh_size(&args.h)?, args.tau, precond)
        .with_nu(args.nu.unwrap_or(default_nu(problem)))
        .with_k(args.perm)
        .with_k_jump(args.perm_jump)
        .with_inexact(args.inexact);
    if let Some(v) = &args.variant {
        case = case.with_variant(v.parse()?);
    }
    case.tol = args.tol;
    case.max_iter = args.max_iter;
    let report = run_case(&case)?;
    let mut w = sink(&args.out)?;
    writeln!(w, "{CSV_HEADER}")?;
    writeln!(w, "{}", report.csv_row())?;
    w.flush()?;
    if report.inner_failures > 0 {
        eprintln!("warning: {} inner solves hit their iteration cap", report.inner_failures);
    }
    Ok(report.converged)
}

fn sweep(spec: &PathBuf, out: &Option<PathBuf>) -> Result<bool> {
    let mut s = SweepSpec::parse(&std::fs::read_to_string(spec)?)?;
    if out.is_some() {
        s.out = out.clone();
    }
    let result = run_sweep(&s)?;
    let mut w = sink(&s.out)?;
    result.write_csv(&mut w)?;
    w.flush()?;
    for (name, inexact, ratio) in result.iteration_ratios() {
        eprintln!("{name}{} max/min iterations {ratio:.2}", if inexact { " (inexact)" } else { "" });
    }
    Ok(result.all_converged())
}

const ANALYSIS_HEADER: &str = "kind,check,problem,h,tau,nu,k,quantity,value,bound,pass";

fn analyze(args: &AnalyzeArgs) -> Result<bool> {
    let problem: ProblemKind = args.problem.parse()?;
    let ns = args
        .h
        .split(',')
        .map(parse_mesh_size)
        .collect::<Result<Vec<_>>>()?;
    let taus = floats(&args.tau)?;
    let nus = floats(&args.nu)?;
    let ks = floats(&args.perm)?;
    let mut w = sink(&args.out)?;
    let check_name = match args.check {
        Check::Infsup => "infsup",
        Check::Fov => "fov",
        Check::Inequalities => "inequalities",
        Check::Lsl => "lsl",
        Check::Constants => "constants",
    };
    writeln!(
        w,
        "{}",
        if args.check == Check::Constants {
            CONSTANTS_HEADER
        } else {
            ANALYSIS_HEADER
        }
    )?;
    let mut ok = true;
    for &n in &ns {
        for &tau in &taus {
            for &nu in &nus {
                for &k in &ks {
                    let params = biot_core::bench::ProblemParams { nu, k, k_jump: None };
                    if args.check == Check::Constants {
                        for elim in [false, true] {
                            writeln!(w, "{}", constants_report(problem, n, tau, params, elim)?.csv_row())?;
                        }
                        continue;
                    }
                    let (_, bp) = build_problem(problem, n, params)?;
                    let prefix = format!("analysis,{check_name},{},{},{tau},{nu},{k}", problem.name(), 1.0 / n as f64);
                    let mut row = |q: &str, value: f64, bound: f64, pass: bool| -> Result<()> {
                        ok &= pass;
                        writeln!(w, "{prefix},{q},{value:.6e},{bound:.6e},{pass}")?;
                        Ok(())
                    };
                    match args.check {
                        Check::Infsup => {
                            for variant in [Variant::DiagBubble, Variant::Eliminated] {
                                let sys = BiotSystem::build(&bp, tau, variant)?;
                                let c = inf_sup_constant(&sys.op, &NormMatrix::for_system(&sys)?)?;
                                row(&format!("gamma_{}", variant.name()), c.gamma, 0.0, c.gamma > 0.0)?;
                                row(&format!("varsigma_{}", variant.name()), c.varsigma, c.gamma, c.varsigma >= c.gamma)?;
                            }
                        }
                        Check::Fov => {
                            for variant in [Variant::Full, Variant::Eliminated] {
                                let sys = BiotSystem::build(&bp, tau, variant)?;
                                for family in [Family::Lower, Family::Upper] {
                                    let f = fov_check(&sys, family)?;
                                    let id = PrecondId {
                                        family,
                                        eliminated: variant == Variant::Eliminated,
                                    }
                                    .name();
                                    row(&format!("sigma_{id}"), f.bounds.sigma, 0.0, f.bounds.sigma > 0.0)?;
                                    row(&format!("upsilon_{id}"), f.bounds.upsilon, f.bounds.sigma, true)?;
                                    let last = f.history.len() - 1;
                                    row(
                                        &format!("envelope_{id}"),
                                        f.history[last],
                                        f.bounds.envelope(last),
                                        f.violation.is_none(),
                                    )?;
                                }
                            }
                        }
                        Check::Inequalities => {
                            let rep = verify_inequalities(&bp, tau)?;
                            for c in &rep.checks {
                                row(c.name, c.value, c.bound, c.pass)?;
                            }
                        }
                        Check::Lsl => {
                            let sys = BiotSystem::diag_bubble(&bp, tau)?;
                            let r = lsl_decomposition_check(&sys)?;
                            row("identity_error", r.identity_error, 1e-11, r.identity_error < 1e-11)?;
                            row("submatrix_error", r.submatrix_error, 1e-11, r.submatrix_error < 1e-11)?;
                            row("leading_block_exact", f64::from(u8::from(r.leading_block_exact)), 1.0, r.leading_block_exact)?;
                            let s = schur_complement_check(&sys)?;
                            row("schur_error", s, 1e-12, s < 1e-12)?;
                        }
                        Check::Constants => unreachable!("handled above"),
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(ok)
}

fn export(args: &ExportArgs) -> Result<bool> {
    let problem: ProblemKind = args.problem.parse()?;
    let params = biot_core::bench::ProblemParams {
        nu: args.nu.unwrap_or(default_nu(problem)),
        k: args.perm,
        k_jump: args.perm_jump,
    };
    let (_, bp) = build_problem(problem, parse_mesh_size(&args.h)?, params)?;
    for p in export_all(&bp, args.tau, &args.out)? {
        println!("{}", p.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep { spec, out } => sweep(spec, out),
        Command::Analyze(a) => analyze(a),
        Command::ExportMm(a) => export(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

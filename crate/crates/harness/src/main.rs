use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use rarn::objective::{check_gradient_fd, check_hessvec_fd, Objective};
use rarn::report::{RunReport, SolverKind, Status};
use rarn_harness::config::{ExperimentConfig, ProblemConfig, SweepConfig};
use rarn_harness::invariants::{hard_count, verify_invariants, Violation};
use rarn_harness::{io, run_single, run_sweep_with_reports, HarnessError};

const EXIT_BUDGET: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const FD_TOLERANCE: f64 = 1e-4;
const FD_POINTS: u64 = 5;

#[derive(Parser)]
#[command(name = "rarn", version, about = "Riemannian adaptive regularized Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one problem.
    Run(Common),
    /// Run an eps sweep and fit complexity exponents.
    Sweep(Common),
    /// Re-verify the invariants of a saved report.json.
    Check { report: PathBuf },
    /// Finite-difference validation of the problem's gradient and Hessian.
    Fdtest(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Rar,
    Rtr,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Built-in problem: rayleigh, holder_well or quadratic.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig, HarnessError> {
        let preset = match &self.problem {
            Some(name) => Some(ProblemConfig::preset(name).ok_or_else(|| {
                HarnessError::Invalid(format!("unknown problem {name:?} (expected rayleigh, holder_well or quadratic)"))
            })?),
            None => None,
        };
        let mut cfg = match (&self.config, preset.clone()) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(p)) => ExperimentConfig::new(p),
            (None, None) => return Err(HarnessError::Invalid("pass --config or --problem".into())),
        };
        if let Some(p) = preset {
            cfg.problem = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.solver {
            cfg.solver = match s {
                SolverArg::Rar => SolverKind::Rar,
                SolverArg::Rtr => SolverKind::Rtr,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_violations(v: &[Violation]) {
    for x in v {
        let at = x.k.map_or_else(|| "run".to_string(), |k| format!("k={k}"));
        println!("  {:?} {:?} at {at}: {}", x.severity, x.rule, x.detail);
    }
}

fn summarize(r: &RunReport) {
    println!(
        "{} on {}: {:?} after {} iterations ({} successful), f = {:.12e}, |g| = {:.3e}, certificate {}, {} Hessian products",
        r.solver(),
        r.problem,
        r.status,
        r.outer_iters(),
        r.successful_iters(),
        r.final_value,
        r.final_grad_norm,
        r.certificate.map_or_else(|| "none".to_string(), |c| format!("{c:.3e}")),
        r.counters.hess_vec_products
    );
}

fn cmd_run(args: &Common) -> Result<u8, HarnessError> {
    let cfg = args.experiment()?;
    let report = run_single(&cfg)?;
    summarize(&report);
    io::write_file(&args.out.join("report.json"), &io::report_to_json(&report)?)?;
    if let Format::Csv = args.format {
        io::write_file(&args.out.join("trace.csv"), &io::trace_to_csv(&report.records)?)?;
    }
    let v = verify_invariants(&report);
    print_violations(&v);
    Ok(if hard_count(&v) > 0 {
        EXIT_VIOLATION
    } else if report.status == Status::BudgetExhausted {
        EXIT_BUDGET
    } else {
        0
    })
}

fn cmd_sweep(args: &Common) -> Result<u8, HarnessError> {
    let mut cfg = args.experiment()?;
    if cfg.sweep.is_none() {
        cfg.sweep = Some(SweepConfig {
            eps_g: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            eps_h: None,
            parallel: true,
        });
    }
    let (sweep, reports) = run_sweep_with_reports(&cfg)?;
    println!("{:>10} {:>10} {:>8} {:>8} {:>12} {:>10}", "eps_g", "eps_h", "iters", "succ", "hv", "max_param");
    for p in &sweep.points {
        println!(
            "{:>10.3e} {:>10.3e} {:>8} {:>8} {:>12} {:>10.3e}{}",
            p.eps_g,
            p.eps_h,
            p.outer_iters,
            p.succ_iters,
            p.hv_products,
            p.max_param,
            if p.converged { "" } else { "  (budget)" }
        );
    }
    let show = |s: Option<f64>| s.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
    println!("iter_slope = {}, hv_slope = {}", show(sweep.iter_slope), show(sweep.hv_slope));
    io::write_file(&args.out.join("sweep.csv"), &io::sweep_to_csv(&sweep)?)?;
    if let Format::Json = args.format {
        io::write_file(&args.out.join("sweep.json"), &io::sweep_to_json(&sweep)?)?;
    }
    let mut hard = 0;
    for (p, r) in sweep.points.iter().zip(&reports) {
        let v = verify_invariants(r);
        if !v.is_empty() {
            println!("eps_g = {:e}:", p.eps_g);
            print_violations(&v);
        }
        hard += hard_count(&v);
    }
    Ok(if hard > 0 {
        EXIT_VIOLATION
    } else if sweep.partial {
        EXIT_BUDGET
    } else {
        0
    })
}

fn cmd_check(path: &Path) -> Result<u8, HarnessError> {
    let report = io::report_from_json(&io::read_file(path)?)?;
    summarize(&report);
    let v = verify_invariants(&report);
    print_violations(&v);
    let hard = hard_count(&v);
    println!("{} hard, {} soft violations", hard, v.len() - hard);
    Ok(if hard > 0 { EXIT_VIOLATION } else { 0 })
}

fn cmd_fdtest(args: &Common) -> Result<u8, HarnessError> {
    let cfg = args.experiment()?;
    let problem = cfg.problem.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for i in 0..FD_POINTS {
        let x = Arc::new(problem.manifold().random_point(&mut rng));
        let g = check_gradient_fd(&problem, &x, &mut rng)?;
        let h = check_hessvec_fd(&problem, &x, &mut rng)?;
        println!("point {i}: gradient error {g:.3e}, Hessian error {h:.3e}");
        worst = worst.max(g).max(h);
    }
    let ok = worst <= FD_TOLERANCE;
    println!("{}: worst relative error {worst:.3e} (tolerance {FD_TOLERANCE:e})", if ok { "ok" } else { "FAILED" });
    Ok(if ok { 0 } else { EXIT_VIOLATION })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Check { report } => cmd_check(report),
        Command::Fdtest(a) => cmd_fdtest(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

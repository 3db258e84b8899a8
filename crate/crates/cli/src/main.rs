//! Command-line front end: certification, rate sweeps, grid search, and the
//! LASSO benchmark. Emits CSV/JSON artifacts; plotting is external.
//!
//! Exit codes: 0 success (certificate found where applicable), 2 clean
//! "no certificate", 1 runtime error, 64 usage error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aadmm::certify::{min_rate, theoretical_rates, BisectOpts};
use aadmm::lasso::{
    aadmm_lasso_run, error_trace, fista_run, iterations_to_level, lasso_generate,
    reference_solution,
};
use aadmm::lure::{
    build_plant, closed_loop_matrix, spectral_radius, AlgorithmParams, ProblemClass,
};
use aadmm::tune::{grid_search, log_kappas, sweep_kappa, GridSpec, SchemePreset};

const EXIT_NO_CERT: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "aadmm", version, about = "Accelerated over-relaxed ADMM: certification, tuning, and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the worst-case linear rate of one parameter selection.
    Certify(CertifyArgs),
    /// Sweep certified rates over a log-spaced condition-number range.
    Sweep(SweepArgs),
    /// Exhaustive parameter grid search at one condition number.
    Gridsearch(GridArgs),
    /// LASSO benchmark: error traces for the ADMM family and FISTA.
    Lasso(LassoArgs),
    /// Quadratic-oracle soundness suite for the certifier.
    Selftest,
}

#[derive(Args)]
struct CertifyArgs {
    /// Preset: vanilla, vanilla-or, nm, tm, tm-damped, gs, gs-or.
    #[arg(long)]
    scheme: Option<SchemePreset>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Multiplier filter order.
    #[arg(long)]
    n_ozf: Option<usize>,
    /// Step-size override.
    #[arg(long)]
    nu1: Option<f64>,
    /// Momentum override.
    #[arg(long)]
    nu2: Option<f64>,
    /// Over-relaxation override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Dual damping override.
    #[arg(long)]
    d: Option<f64>,
    /// Certificate output path (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scheme: Option<SchemePreset>,
    #[arg(long)]
    kappa_min: Option<f64>,
    #[arg(long)]
    kappa_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    n_ozf: Option<usize>,
    /// Dual damping override applied to every point.
    #[arg(long)]
    d: Option<f64>,
    /// Curve output path (CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    kappa: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Add the over-relaxation axis.
    #[arg(long)]
    with_alpha: bool,
    #[arg(long)]
    n_ozf: Option<usize>,
    /// Full grid output path (CSV).
    #[arg(long)]
    out_grid: Option<PathBuf>,
    /// Winning-point certificate output path (JSON).
    #[arg(long)]
    out_best: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct LassoArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated list or "all": admm, or-admm, a-admm-tm,
    /// a-admm-tm-damped, a-admm-gs, or-a-admm-gs, fista.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// Directory for per-scheme trace CSVs and the summary CSV.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Certify(args) => cmd_certify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gridsearch(args) => cmd_gridsearch(args),
        Command::Lasso(args) => cmd_lasso(args),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<aadmm::Error> for CliError {
    fn from(e: aadmm::Error) -> Self {
        match e {
            aadmm::Error::Domain(m) | aadmm::Error::Shape(m) => CliError::Usage(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult = Result<ExitCode, CliError>;

/// Loads a JSON config file as a flat object; explicit flags win on merge.
fn load_config(path: &Option<PathBuf>) -> Result<serde_json::Map<String, serde_json::Value>, CliError> {
    let Some(path) = path else {
        return Ok(serde_json::Map::new());
    };
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
    value
        .as_object()
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("config {} must be a JSON object", path.display())))
}

fn cfg_f64(cfg: &serde_json::Map<String, serde_json::Value>, key: &str) -> Option<f64> {
    cfg.get(key).and_then(|v| v.as_f64())
}

fn cfg_usize(cfg: &serde_json::Map<String, serde_json::Value>, key: &str) -> Option<usize> {
    cfg.get(key).and_then(|v| v.as_u64()).map(|v| v as usize)
}

fn cfg_str<'a>(cfg: &'a serde_json::Map<String, serde_json::Value>, key: &str) -> Option<&'a str> {
    cfg.get(key).and_then(|v| v.as_str())
}

/// Bounds the rayon pool: explicit flag, then AADMM_WORKERS, then default.
fn init_workers(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("AADMM_WORKERS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn cmd_certify(args: CertifyArgs) -> CliResult {
    let cfg = load_config(&args.config)?;
    let scheme = match args.scheme {
        Some(s) => s,
        None => cfg_str(&cfg, "scheme")
            .ok_or_else(|| CliError::Usage("--scheme is required".into()))?
            .parse::<SchemePreset>()?,
    };
    let kappa = args
        .kappa
        .or_else(|| cfg_f64(&cfg, "kappa"))
        .ok_or_else(|| CliError::Usage("--kappa is required".into()))?;
    let n_ozf = args.n_ozf.or_else(|| cfg_usize(&cfg, "n_ozf")).unwrap_or(6);
    let out = args
        .out
        .or_else(|| cfg_str(&cfg, "out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cert.json"));

    let pc = ProblemClass::from_kappa(kappa)?;
    let preset = scheme.params(&pc, args.d.or_else(|| cfg_f64(&cfg, "d")))?;
    let params = AlgorithmParams::new(
        args.nu1.or_else(|| cfg_f64(&cfg, "nu1")).unwrap_or(preset.nu1),
        args.nu2.or_else(|| cfg_f64(&cfg, "nu2")).unwrap_or(preset.nu2),
        args.alpha.or_else(|| cfg_f64(&cfg, "alpha")).unwrap_or(preset.alpha),
        args.d.or_else(|| cfg_f64(&cfg, "d")).unwrap_or(preset.d),
    )?;

    match min_rate(&params, &pc, n_ozf, &BisectOpts::default()).map_err(CliError::from)? {
        Some(cert) => {
            write_file(&out, &cert.to_json()?)?;
            println!("rho = {:.6} (kappa_P = {:.3e}) -> {}", cert.rho, cert.kappa_p, out.display());
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("no certificate: the LMI is infeasible for every rate below 1");
            Ok(ExitCode::from(EXIT_NO_CERT))
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let cfg = load_config(&args.config)?;
    init_workers(args.workers.or_else(|| cfg_usize(&cfg, "workers")));
    let scheme = match args.scheme {
        Some(s) => s,
        None => cfg_str(&cfg, "scheme")
            .ok_or_else(|| CliError::Usage("--scheme is required".into()))?
            .parse::<SchemePreset>()?,
    };
    let lo = args.kappa_min.or_else(|| cfg_f64(&cfg, "kappa_min")).unwrap_or(1.0);
    let hi = args.kappa_max.or_else(|| cfg_f64(&cfg, "kappa_max")).unwrap_or(1000.0);
    let points = args.points.or_else(|| cfg_usize(&cfg, "points")).unwrap_or(20);
    let n_ozf = args.n_ozf.or_else(|| cfg_usize(&cfg, "n_ozf")).unwrap_or(6);
    let d = args.d.or_else(|| cfg_f64(&cfg, "d"));
    let out = args
        .out
        .or_else(|| cfg_str(&cfg, "out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));

    let kappas = log_kappas(lo, hi, points)?;
    let curve = sweep_kappa(scheme, &kappas, n_ozf, d, &BisectOpts::default())?;
    write_file(&out, &curve.to_csv())?;
    println!("{} rows -> {}", curve.rows.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gridsearch(args: GridArgs) -> CliResult {
    let cfg = load_config(&args.config)?;
    init_workers(args.workers.or_else(|| cfg_usize(&cfg, "workers")));
    let kappa = args
        .kappa
        .or_else(|| cfg_f64(&cfg, "kappa"))
        .ok_or_else(|| CliError::Usage("--kappa is required".into()))?;
    let points = args.grid.or_else(|| cfg_usize(&cfg, "grid")).unwrap_or(20);
    let n_ozf = args.n_ozf.or_else(|| cfg_usize(&cfg, "n_ozf")).unwrap_or(2);
    let with_alpha = args.with_alpha || cfg.get("with_alpha").and_then(|v| v.as_bool()).unwrap_or(false);
    let out_grid = args
        .out_grid
        .or_else(|| cfg_str(&cfg, "out_grid").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("grid.csv"));
    let out_best = args
        .out_best
        .or_else(|| cfg_str(&cfg, "out_best").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("best.json"));

    let pc = ProblemClass::from_kappa(kappa)?;
    let spec = GridSpec::centered(&pc, points, with_alpha)?;
    let result = grid_search(&pc, &spec, n_ozf, &BisectOpts::default())?;

    let mut csv = String::from("nu1,nu2,alpha,d,rho,kappa_P,feasible\n");
    for p in &result.grid {
        let rho = p.rho.map(|v| format!("{v:.6}")).unwrap_or_default();
        let kp = p.kappa_p.map(|v| format!("{v:.6}")).unwrap_or_default();
        let feasible = if p.failed {
            "error"
        } else if p.rho.is_some() {
            "true"
        } else {
            "false"
        };
        csv.push_str(&format!("{},{},{},{},{},{},{}\n", p.nu1, p.nu2, p.alpha, p.d, rho, kp, feasible));
    }
    write_file(&out_grid, &csv)?;

    match result.best {
        Some((params, cert)) => {
            write_file(&out_best, &cert.to_json()?)?;
            println!(
                "best: nu1={:.6e} nu2={:.4} alpha={:.2} rho={:.6} -> {}, {}",
                params.nu1,
                params.nu2,
                params.alpha,
                cert.rho,
                out_grid.display(),
                out_best.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("no certificate anywhere on the grid");
            Ok(ExitCode::from(EXIT_NO_CERT))
        }
    }
}

const LASSO_SCHEMES: [(&str, Option<SchemePreset>); 7] = [
    ("admm", Some(SchemePreset::Vanilla)),
    ("or-admm", Some(SchemePreset::VanillaOr)),
    ("a-admm-tm", Some(SchemePreset::Tm)),
    ("a-admm-tm-damped", Some(SchemePreset::TmDamped)),
    ("a-admm-gs", Some(SchemePreset::Gs)),
    ("or-a-admm-gs", Some(SchemePreset::GsOr)),
    ("fista", None),
];

fn cmd_lasso(args: LassoArgs) -> CliResult {
    let cfg = load_config(&args.config)?;
    let seed = args.seed.or_else(|| cfg.get("seed").and_then(|v| v.as_u64())).unwrap_or(0);
    let schemes_arg = args
        .schemes
        .or_else(|| cfg_str(&cfg, "schemes").map(String::from))
        .unwrap_or_else(|| "all".into());
    let iters = args.iters.or_else(|| cfg_usize(&cfg, "iters")).unwrap_or(500);
    let tau = args.tau.or_else(|| cfg_f64(&cfg, "tau")).unwrap_or(0.01);
    let out_dir = args
        .out_dir
        .or_else(|| cfg_str(&cfg, "out_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;

    let selected: Vec<&str> = if schemes_arg == "all" {
        LASSO_SCHEMES.iter().map(|(n, _)| *n).collect()
    } else {
        schemes_arg.split(',').map(str::trim).collect()
    };
    for name in &selected {
        if !LASSO_SCHEMES.iter().any(|(n, _)| n == name) {
            return Err(CliError::Usage(format!("unknown lasso scheme '{name}'")));
        }
    }

    let inst = lasso_generate(250, 100, 50, 1e-3, tau, seed)?;
    let reference = reference_solution(&inst, 1e-12, 5_000_000)?;
    let pc = ProblemClass::new(inst.m, inst.l)?;

    let mut summary = String::from("scheme,iters_to_1e-6,final_delta\n");
    for name in &selected {
        let preset = LASSO_SCHEMES.iter().find(|(n, _)| n == name).unwrap().1;
        let trace = match preset {
            Some(p) => aadmm_lasso_run(&inst, &p.params(&pc, None)?, iters, 1e-14)?,
            None => fista_run(&inst, iters, 1e-14)?,
        };
        let errs = error_trace(&trace, &reference.x_star);
        let path = out_dir.join(format!("lasso_{name}.csv"));
        let mut csv = String::from("k,delta\n");
        for (k, e) in errs.iter().enumerate() {
            csv.push_str(&format!("{k},{e:.12e}\n"));
        }
        write_file(&path, &csv)?;
        let hit = iterations_to_level(&errs, 1e-6)
            .map(|k| k.to_string())
            .unwrap_or_default();
        summary.push_str(&format!("{name},{hit},{:.12e}\n", errs.last().unwrap()));
    }
    let summary_path = out_dir.join("lasso_summary.csv");
    write_file(&summary_path, &summary)?;
    println!("{} traces + summary -> {}", selected.len(), out_dir.display());
    Ok(ExitCode::SUCCESS)
}

/// Certifies a handful of preset/problem pairings at low filter order and
/// replays each certificate against the quadratic closed-loop oracle.
fn cmd_selftest() -> CliResult {
    let mut ok = true;
    for (scheme, kappa) in [
        (SchemePreset::Nm, 4.0),
        (SchemePreset::Nm, 50.0),
        (SchemePreset::TmDamped, 50.0),
        (SchemePreset::Gs, 10.0),
    ] {
        let pc = ProblemClass::from_kappa(kappa)?;
        let params = scheme.params(&pc, None)?;
        let cert = match min_rate(&params, &pc, 2, &BisectOpts::default())? {
            Some(c) => c,
            None => {
                println!("FAIL {scheme} kappa={kappa}: no certificate");
                ok = false;
                continue;
            }
        };
        let plant = build_plant(&params);
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let theta_f = pc.m_hat() + (pc.l_hat() - pc.m_hat()) * i as f64 / 19.0;
            for theta_g in [0.0, 0.1, 1.0, 10.0, 100.0] {
                let a_cl = closed_loop_matrix(&plant, &pc, theta_f, theta_g)?;
                let sr = spectral_radius(&nalgebra_dyn(&a_cl));
                worst = worst.max(sr);
            }
        }
        let sound = worst <= cert.rho + 1e-6;
        let (rho1, rho2) = theoretical_rates(kappa)?;
        println!(
            "{} {scheme} kappa={kappa}: rho={:.4} worst-case quadratic {:.4} (rho1={:.3}, rho2={:.3})",
            if sound { "PASS" } else { "FAIL" },
            cert.rho,
            worst,
            rho1,
            rho2
        );
        ok &= sound;
    }
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CliError::Runtime("selftest found unsound certificates".into()))
    }
}

fn nalgebra_dyn(m: &nalgebra::Matrix4<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_iterator(4, 4, m.iter().copied())
}

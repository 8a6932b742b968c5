use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use vieq_cli::{
    builtin_with_dim, load_problem, parse_report, run, verify_report, CliError, Mode, RunOptions, RunReport,
};

/// Variational-inequality, equilibrium-price and fixed-point solver.
#[derive(Parser, Debug)]
#[command(name = "vieq", version)]
struct Args {
    /// vi, gnd, gnd-general, brouwer, kakutani, retract or verify
    mode: Option<String>,

    /// Same as the positional mode.
    #[arg(long = "mode", value_name = "MODE")]
    mode_flag: Option<String>,

    #[arg(long, conflicts_with = "spec")]
    builtin: Option<String>,

    /// Dimension for builtins that take one (neg-identity-simplex).
    #[arg(long, requires = "builtin")]
    dim: Option<usize>,

    /// Problem file, or a directory of problem files for a batch run.
    #[arg(long)]
    spec: Option<PathBuf>,

    /// Report to check in verify mode.
    #[arg(long)]
    report: Option<PathBuf>,

    #[arg(long)]
    tol: Option<f64>,

    #[arg(long)]
    max_iter: Option<usize>,

    /// Falls back to VI_EQ_SEED, then to the problem's own seed.
    #[arg(long)]
    seed: Option<u64>,

    /// CSV trace path (a directory in batch runs).
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Attach a brute-force grid comparison to the report.
    #[arg(long)]
    oracle: bool,

    /// Report path (a directory in batch runs); stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Worker threads for batch runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn mode(args: &Args) -> Result<Option<Mode>, CliError> {
    let pos = args.mode.as_deref().map(Mode::parse).transpose()?;
    let flag = args.mode_flag.as_deref().map(Mode::parse).transpose()?;
    match (pos, flag) {
        (Some(a), Some(b)) if a != b => Err(CliError::Usage(format!(
            "positional mode `{}` disagrees with --mode `{}`",
            a.name(),
            b.name()
        ))),
        (a, b) => Ok(a.or(b)),
    }
}

fn seed(args: &Args) -> Result<Option<u64>, CliError> {
    if args.seed.is_some() {
        return Ok(args.seed);
    }
    match std::env::var("VI_EQ_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("VI_EQ_SEED must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summary(report: &RunReport) -> String {
    let failures = report.checks.failures();
    if report.passed {
        format!("{}: certificate passed", report.mode.name())
    } else {
        format!("{}: certificate failed ({})", report.mode.name(), failures.join(", "))
    }
}

fn verify(args: &Args) -> Result<bool, CliError> {
    let path = args
        .report
        .as_ref()
        .ok_or_else(|| CliError::Usage("verify needs --report <path>".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let report = parse_report(&text)?;
    let spec = args.spec.as_deref().map(load_problem).transpose()?;
    let v = verify_report(&report, spec.as_ref())?;
    write(args.output.as_deref(), &serde_json::to_string_pretty(&v).expect("serializable"))?;
    for c in v.checks.checks.iter().filter(|c| !c.passed) {
        eprintln!("failed check `{}`: {:e} > {:e}", c.name, c.value, c.tol);
    }
    Ok(v.passed)
}

fn batch(args: &Args, dir: &Path, opts: &RunOptions) -> Result<bool, CliError> {
    let io = |e| CliError::Io {
        path: dir.display().to_string(),
        source: e,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    for d in [&args.output, &args.trace].into_iter().flatten() {
        std::fs::create_dir_all(d).map_err(|e| CliError::Io {
            path: d.display().to_string(),
            source: e,
        })?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<(PathBuf, Result<bool, CliError>)> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let one = || -> Result<bool, CliError> {
                    let spec = load_problem(f)?;
                    let mut o = opts.clone();
                    o.trace = args.trace.as_ref().map(|d| d.join(format!("{stem}.trace.csv")));
                    let report = run(&spec, &o)?;
                    if let Some(d) = &args.output {
                        write(Some(&d.join(format!("{stem}.report.json"))), &report.to_json())?;
                    }
                    Ok(report.passed)
                };
                (f.clone(), one())
            })
            .collect()
    });
    let mut all = true;
    for (f, r) in results {
        match r {
            Ok(p) => {
                println!("{}: {}", f.display(), if p { "passed" } else { "failed" });
                all &= p;
            }
            Err(e) => {
                println!("{}: error: {e}", f.display());
                all = false;
            }
        }
    }
    Ok(all)
}

fn main_inner(args: &Args) -> Result<bool, CliError> {
    let mode = mode(args)?;
    if mode == Some(Mode::Verify) {
        return verify(args);
    }
    let opts = RunOptions {
        mode,
        tol: args.tol,
        max_iter: args.max_iter,
        seed: seed(args)?,
        trace: args.trace.clone(),
        oracle: args.oracle,
    };
    let spec = match (&args.builtin, &args.spec) {
        (Some(name), _) => builtin_with_dim(name, args.dim)?,
        (None, Some(path)) if path.is_dir() => return batch(args, path, &opts),
        (None, Some(path)) => load_problem(path)?,
        (None, None) => return Err(CliError::Usage("give --builtin <name> or --spec <path>".into())),
    };
    let report = run(&spec, &opts)?;
    write(args.output.as_deref(), &report.to_json())?;
    eprintln!("{}", summary(&report));
    Ok(report.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

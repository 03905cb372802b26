//! `ecmfit` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use ecmfit::bench::{emit_overlay, emit_report, run_suite, LoadOptions, Manifest, ReportFormat};
use ecmfit::ecm::{fit_ocv, simulate_terminal_voltage, CellSpec, EcmParams, OcvCurve};
use ecmfit::kv::{read_kv, KeyValues};
use ecmfit::optimize::{fit, Method, OptimizerConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ecmfit",
    version,
    about = "Second-order RC battery model identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identify model parameters from a cycler CSV.
    Fit(FitArgs),
    /// Simulate terminal voltage for a current profile.
    Simulate(SimulateArgs),
    /// Run every method on every problem of a manifest.
    Benchmark(BenchmarkArgs),
    /// Fit an OCV polynomial to (soc, voltage) points.
    OcvFit(OcvFitArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Cycler time-series CSV.
    #[arg(long)]
    input: PathBuf,
    /// One of ls, pso, sa, ga.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fixed OCV curve; without it the OCV polynomial is fitted jointly.
    #[arg(long)]
    ocv: Option<PathBuf>,
    /// Ampere-hour.
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long)]
    soc_init: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cycle index to fit; defaults to the first usable cycle.
    #[arg(long)]
    cycle: Option<i64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Treat negative current as discharge.
    #[arg(long)]
    invert_current: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// key=value file with r0, r1, c1, r2, c2, capacity and soc_init.
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    ocv: PathBuf,
    /// CSV with time_s and current_a columns.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Runs executed concurrently; 1 keeps timings comparable.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct OcvFitArgs {
    /// CSV whose first two columns are soc and voltage.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5)]
    degree: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

#[derive(Debug)]
struct Usage(String);

impl Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<ecmfit::Error>() {
        Some(e) if !e.is_data_error() => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Resolved settings with where each value came from.
struct Settings<'a> {
    kv: &'a KeyValues,
    log: Vec<(String, String, &'static str)>,
}

impl<'a> Settings<'a> {
    fn new(kv: &'a KeyValues) -> Self {
        Self {
            kv,
            log: Vec::new(),
        }
    }

    fn pick<T>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> anyhow::Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let (value, source) = if let Some(v) = flag {
            (Some(v), "flag")
        } else if let Some(raw) = self.kv.get(key) {
            let v = raw
                .parse::<T>()
                .map_err(|e| Usage(format!("config {key}={raw}: {e}")))?;
            (Some(v), "config")
        } else {
            (default, "default")
        };
        if let Some(v) = &value {
            self.log.push((key.to_string(), v.to_string(), source));
        }
        Ok(value)
    }

    fn print(&self) {
        for (k, v, src) in &self.log {
            eprintln!("{k} = {v} ({src})");
        }
    }
}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(anyhow!("{}: no such file", path.display()));
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> anyhow::Result<u8> {
    require_file(&args.input)?;
    for p in [&args.config, &args.ocv].into_iter().flatten() {
        require_file(p)?;
    }
    let kv = match &args.config {
        Some(p) => read_kv(p)?,
        None => KeyValues::new(),
    };

    let mut s = Settings::new(&kv);
    let method = s
        .pick("method", args.method, None)?
        .ok_or_else(|| Usage("no method given; valid methods: ls, pso, sa, ga".into()))?;
    let capacity = s.pick("capacity", args.capacity, Some(2.0))?.unwrap();
    let soc_init = s.pick("soc_init", args.soc_init, Some(1.0))?.unwrap();
    let seed = s.pick("seed", args.seed, Some(42))?.unwrap();
    let workers = s.pick("workers", args.workers, Some(1))?.unwrap();
    let cycle = s.pick("cycle", args.cycle, None)?;
    let invert = s
        .pick(
            "invert_current",
            args.invert_current.then_some(true),
            Some(false),
        )?
        .unwrap();

    let mut options = LoadOptions::from_kv(&kv)?;
    options.invert_current = invert;
    options.ocv = args.ocv.as_ref().map(OcvCurve::read).transpose()?;
    if options.ocv.is_none() {
        options.ocv_degree = s
            .pick("ocv_degree", None, Some(options.ocv_degree))?
            .unwrap();
    }
    options.resample = s.pick("resample", None::<f64>, None)?;
    let config = OptimizerConfig::from_kv(&kv)?;
    config.validate()?;

    if args.verbose {
        s.print();
        for (k, v) in kv.iter().filter(|(k, _)| k.contains('.')) {
            eprintln!("{k} = {v} (config)");
        }
    }

    let cell = CellSpec::new(capacity, soc_init).map_err(|e| Usage(e.to_string()))?;
    let cell_id = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cell".into());
    let problems = ecmfit::bench::load_problems(&args.input, &cell_id, &cell, &options)?;
    let problem = match cycle {
        Some(c) => problems
            .into_iter()
            .find(|p| p.segment().cycle_index == c)
            .ok_or_else(|| anyhow!("cycle {c} has no usable discharge window"))?,
        None => problems
            .into_iter()
            .next()
            .ok_or(ecmfit::Error::EmptyInput)?,
    };

    let report = fit(method, &problem, &config, seed, workers)?;
    fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    let name = format!(
        "fit_{}_{}_{}.json",
        sanitize(&cell_id),
        problem.segment().cycle_index,
        method.key()
    );
    let report_path = args.out.join(name);
    fs::write(&report_path, report.to_json()?)
        .with_context(|| report_path.display().to_string())?;
    let overlay = emit_overlay(&problem, &report, &args.out)?;

    println!(
        "{} mse={:e} et={:.3}s converged={}",
        method.key(),
        report.mse,
        report.execution_time,
        report.converged
    );
    println!("{}", report_path.display());
    println!("{}", overlay.display());
    if report.converged {
        Ok(0)
    } else {
        eprintln!("warning: optimizer did not converge");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn read_profile(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(ecmfit::Error::from)?;
    let headers = rdr.headers().map_err(ecmfit::Error::from)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ecmfit::Error::MissingColumn(name.into()))
    };
    let (ti, ci) = (col("time_s")?, col("current_a")?);
    let (mut time, mut current) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(ecmfit::Error::from)?;
        let num = |j: usize| {
            rec[j]
                .trim()
                .parse::<f64>()
                .map_err(|e| ecmfit::Error::Parse {
                    line: line + 2,
                    message: format!("`{}`: {e}", &rec[j]),
                })
        };
        time.push(num(ti)?);
        current.push(num(ci)?);
    }
    Ok((time, current))
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<u8> {
    for p in [&args.params, &args.ocv, &args.profile] {
        require_file(p)?;
    }
    let kv = read_kv(&args.params)?;
    let get = |key: &str| -> anyhow::Result<f64> {
        let raw = kv
            .get(key)
            .ok_or_else(|| ecmfit::Error::InvalidParams(format!("missing `{key}`")))?;
        Ok(raw
            .parse::<f64>()
            .map_err(|e| ecmfit::Error::InvalidParams(format!("{key}={raw}: {e}")))?)
    };
    let params = EcmParams::new(get("r0")?, get("r1")?, get("c1")?, get("r2")?, get("c2")?)?;
    let cell = CellSpec::new(get("capacity")?, get("soc_init")?)
        .map_err(|e| ecmfit::Error::InvalidParams(e.to_string()))?;
    let ocv = OcvCurve::read(&args.ocv)?;
    let (time, current) = read_profile(&args.profile)?;
    if args.verbose {
        eprintln!("{params:?}");
        eprintln!("{cell:?}");
        eprintln!("ocv coefficients {:?}", ocv.coefficients());
    }
    let sim = simulate_terminal_voltage(&params, &ocv, &cell, &time, &current)?;

    fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    let path = args.out.join("simulation.csv");
    let mut w = csv::Writer::from_path(&path).map_err(ecmfit::Error::from)?;
    w.write_record(["time_s", "voltage_v"])
        .map_err(ecmfit::Error::from)?;
    for (t, v) in time.iter().zip(&sim.voltage) {
        w.write_record([t.to_string(), v.to_string()])
            .map_err(ecmfit::Error::from)?;
    }
    w.flush().with_context(|| path.display().to_string())?;
    println!("{}", path.display());
    Ok(0)
}

fn cmd_benchmark(args: BenchmarkArgs) -> anyhow::Result<u8> {
    require_file(&args.manifest)?;
    let manifest = Manifest::read(&args.manifest)?;
    let suite = manifest.load_suite()?.with_workers(args.workers);
    if args.verbose {
        eprintln!(
            "{} problems, methods {:?}, seeds {:?}, workers {}",
            suite.problems.len(),
            suite.methods.iter().map(|m| m.key()).collect::<Vec<_>>(),
            suite.seeds,
            args.workers
        );
        eprintln!("{:?}", suite.config);
    }
    let report = run_suite(&suite)?;
    let written = emit_report(&report, &args.out, &ReportFormat::ALL)?;
    for a in &report.aggregates {
        println!(
            "{} runs={} failed={} median_mse={} median_et={}",
            a.method.key(),
            a.runs,
            a.failed,
            a.median_mse.map_or("n/a".into(), |v| format!("{v:e}")),
            a.median_et.map_or("n/a".into(), |v| format!("{v:.4}"))
        );
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}

fn cmd_ocv_fit(args: OcvFitArgs) -> anyhow::Result<u8> {
    require_file(&args.input)?;
    let mut rdr = csv::Reader::from_path(&args.input).map_err(ecmfit::Error::from)?;
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(ecmfit::Error::from)?;
        if rec.len() < 2 {
            return Err(ecmfit::Error::Parse {
                line: line + 2,
                message: "expected soc,voltage".into(),
            }
            .into());
        }
        let num = |j: usize| {
            rec[j]
                .trim()
                .parse::<f64>()
                .map_err(|e| ecmfit::Error::Parse {
                    line: line + 2,
                    message: format!("`{}`: {e}", &rec[j]),
                })
        };
        points.push((num(0)?, num(1)?));
    }
    let curve = fit_ocv(&points, args.degree)?;
    fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    let path = args.out.join("ocv.txt");
    curve.write(&path)?;
    println!("{}", path.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::OcvFit(a) => cmd_ocv_fit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

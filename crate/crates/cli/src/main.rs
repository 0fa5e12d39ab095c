//! `pal`: run, verify, transform and benchmark IL programs.
//!
//! Exit codes: 0 success, 1 trap / verification / validation / I/O
//! failure, 2 usage error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pal_core::bench::{
    mandelbrot_reference, run_sweep_with, write_csv, write_pgm, MandelbrotConfig, SweepSpec, DEFAULT_LINES_PER_TASK,
    DEFAULT_MAX_ITER, DEFAULT_RESOLUTIONS,
};
use pal_core::diag::has_errors;
use pal_core::il::{emit_assembly, parse_with_mode, validate_program, ParseMode};
use pal_core::runtime::{run_on, RunError};
use pal_core::transform::transform;
use pal_core::{verify_parallel_constraints, Diagnostic, PlatformInfo, Program};

#[derive(Parser, Debug)]
#[command(name = "pal", version, about = "Annotation-driven load-time parallelization of IL programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify, transform and execute a program.
    Run(RunArgs),
    /// Check the @Parallel constraints of a program.
    Verify(VerifyArgs),
    /// Write the transformed form of a program.
    Transform(TransformArgs),
    /// Benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args, Debug)]
struct CoresArg {
    /// Processor count to assume instead of the detected one.
    #[arg(long, env = "PAL_CORES", value_parser = clap::value_parser!(u32).range(1..))]
    cores: Option<u32>,
}

impl CoresArg {
    fn platform(&self) -> PlatformInfo {
        PlatformInfo::resolve(self.cores).expect("clap enforces cores >= 1")
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    file: PathBuf,
    #[command(flatten)]
    cores: CoresArg,
    /// Ignore the annotations and run the sequential program.
    #[arg(long)]
    no_transform: bool,
    /// Write execution statistics as JSON to this path.
    #[arg(long, value_name = "PATH")]
    stats_json: Option<PathBuf>,
    /// Accept already-transformed input (`#transformed`, SPAWN).
    #[arg(long)]
    trusted: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    file: PathBuf,
}

#[derive(Args, Debug)]
struct TransformArgs {
    input: PathBuf,
    #[arg(short, long, value_name = "PATH")]
    output: PathBuf,
    #[command(flatten)]
    cores: CoresArg,
    /// Also write the transform report as JSON.
    #[arg(long, value_name = "PATH")]
    report_json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// Mandelbrot resolution / granularity sweep.
    Mandelbrot(MandelbrotArgs),
}

#[derive(Args, Debug)]
struct MandelbrotArgs {
    /// Image sizes, e.g. 600x400,1200x800.
    #[arg(long, value_delimiter = ',', value_parser = parse_resolution, default_values_t = DEFAULT_RESOLUTIONS.map(Resolution))]
    resolutions: Vec<Resolution>,
    /// Lines of the image computed by one task.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LINES_PER_TASK)]
    lines: Vec<u32>,
    /// parDegree values of the worker method.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 4])]
    par_degree: Vec<u32>,
    #[command(flatten)]
    cores: CoresArg,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write one PGM image per resolution into this directory.
    #[arg(long, value_name = "DIR")]
    pgm: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER, value_parser = clap::value_parser!(u32).range(1..))]
    max_iter: u32,
    /// Timed runs per cell; the median is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    repetitions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Resolution((u32, u32));

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.0 .0, self.0 .1)
    }
}

fn parse_resolution(s: &str) -> Result<Resolution, String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let dim = |v: &str| v.trim().parse::<u32>().ok().filter(|&n| n > 0).ok_or_else(|| format!("invalid size `{s}`"));
    Ok(Resolution((dim(w)?, dim(h)?)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(&args),
        Command::Verify(args) => verify(&args),
        Command::Transform(args) => transform_cmd(&args),
        Command::Bench(BenchCommand::Mandelbrot(args)) => bench_mandelbrot(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path, mode: ParseMode) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_with_mode(&text, mode).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Structural validation followed by the parallel-constraint verifier.
/// Prints every diagnostic to standard error; true when none is an error.
fn check(program: &Program) -> bool {
    let mut diags = validate_program(program);
    if !has_errors(&diags) {
        diags.extend(verify_parallel_constraints(program));
    }
    report(&diags);
    !has_errors(&diags)
}

fn report(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let mode = if args.trusted { ParseMode::Trusted } else { ParseMode::Source };
    let program = load(&args.file, mode)?;
    let platform = args.cores.platform();
    if !check(&program) {
        return Ok(ExitCode::from(1));
    }
    let program = if args.no_transform || program.transformed {
        program
    } else {
        let (p, report) = transform(&program, platform)?;
        log::info!("rewrote {} call sites in {:?}", report.rewritten_sites.len(), report.elapsed);
        p
    };

    match run_on(&program, platform) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{}", out.value)?;
            for (name, value) in &out.globals {
                writeln!(stdout, "{name} = {value}")?;
            }
            if let Some(path) = &args.stats_json {
                let json = serde_json::to_string_pretty(&out.stats.to_json())?;
                fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(RunError::Trap(info)) => {
            eprintln!("trap: {info}");
            Ok(ExitCode::from(1))
        }
        Err(RunError::Invalid(diags)) => {
            report(&diags);
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let program = load(&args.file, ParseMode::Source)?;
    Ok(if check(&program) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn transform_cmd(args: &TransformArgs) -> Result<ExitCode> {
    let program = load(&args.input, ParseMode::Source)?;
    if !check(&program) {
        return Ok(ExitCode::from(1));
    }
    let (out, report) = transform(&program, args.cores.platform())?;
    fs::write(&args.output, emit_assembly(&out)).with_context(|| format!("cannot write {}", args.output.display()))?;

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{:<24} mode", "method")?;
    for (method, mode) in &report.mode_per_method {
        writeln!(stdout, "{method:<24} {mode}")?;
    }
    writeln!(stdout, "rewritten sites: {}", report.rewritten_sites.len())?;
    for site in &report.rewritten_sites {
        writeln!(stdout, "  {}#{} -> {}", site.method, site.instruction_index, site.target)?;
    }
    writeln!(stdout, "elapsed: {:.3} ms", report.elapsed.as_secs_f64() * 1e3)?;
    if let Some(path) = &args.report_json {
        let json = serde_json::to_string_pretty(&report)?;
        fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_mandelbrot(args: &MandelbrotArgs) -> Result<ExitCode> {
    if args.lines.is_empty() || args.par_degree.is_empty() || args.resolutions.is_empty() {
        bail!("--resolutions, --lines and --par-degree need at least one value each");
    }
    let mut spec = SweepSpec::new(args.par_degree.clone(), args.cores.platform());
    spec.resolutions = args.resolutions.iter().map(|r| r.0).collect();
    spec.lines_per_task = args.lines.clone();
    spec.max_iter = args.max_iter;
    spec.repetitions = args.repetitions as usize;
    for cfg in spec.configs() {
        cfg.validate()?;
    }

    let records = run_sweep_with(&spec, |r| {
        eprintln!(
            "{}x{} l={} pd={} cores={}: t_seq {:.1} ms, t_par {:.1} ms, speedup {:.3}, efficiency {:.3}",
            r.config.width,
            r.config.height,
            r.config.lines_per_task,
            r.config.par_degree,
            r.cores,
            r.t_seq.as_secs_f64() * 1e3,
            r.t_par.as_secs_f64() * 1e3,
            r.speedup,
            r.efficiency
        );
    })?;

    match &args.csv {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            write_csv(file, &records)?;
        }
        None => write_csv(io::stdout().lock(), &records)?,
    }

    if let Some(dir) = &args.pgm {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for &(w, h) in &spec.resolutions {
            // Every timed run matched this image exactly.
            let cfg = MandelbrotConfig::new(w, h, 1, 1).with_max_iter(args.max_iter);
            let path = dir.join(format!("mandelbrot_{w}x{h}.pgm"));
            let file = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            write_pgm(io::BufWriter::new(file), &cfg, &mandelbrot_reference(&cfg))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

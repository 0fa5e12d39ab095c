//! The Mandelbrot workload: IL generator, native oracle, and the
//! resolution / granularity sweep that measures speedup and efficiency.

use std::fmt::Write as _;
use std::io;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::il::{parse_assembly, ParseErrors, Program};
use crate::platform::PlatformInfo;
use crate::runtime::{run_on, RunError, RunOutcome, Value};
use crate::transform::{transform, TransformError};

pub const DEFAULT_MAX_ITER: u32 = 1000;
/// Image sizes of the reference sweep.
pub const DEFAULT_RESOLUTIONS: [(u32, u32); 3] = [(600, 400), (1200, 800), (2400, 1600)];
pub const DEFAULT_LINES_PER_TASK: [u32; 4] = [5, 10, 20, 40];
/// Name of the annotated per-block method in generated programs.
pub const WORKER_METHOD: &str = "createLines";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{mode} output of {width}x{height} (lines_per_task={lines_per_task}, par_degree={par_degree}) differs from the reference at pixel {pixel}")]
    ValidationFailed { mode: &'static str, width: u32, height: u32, lines_per_task: u32, par_degree: u32, pixel: usize },
    #[error("{width}x{height} with lines_per_task={lines_per_task}: expected {expected} createLines invocations, got {actual}")]
    TaskCountMismatch { width: u32, height: u32, lines_per_task: u32, expected: u64, actual: u64 },
    #[error("generated program does not parse: {0}")]
    Parse(#[from] ParseErrors),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Rectangle of the complex plane mapped onto the image, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Viewport {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Default for Viewport {
    fn default() -> Self {
        Self { re_min: -2.5, re_max: 1.0, im_min: -1.0, im_max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MandelbrotConfig {
    pub width: u32,
    pub height: u32,
    pub lines_per_task: u32,
    pub par_degree: u32,
    pub max_iter: u32,
    pub viewport: Viewport,
}

impl MandelbrotConfig {
    /// Default `max_iter` and viewport.
    pub fn new(width: u32, height: u32, lines_per_task: u32, par_degree: u32) -> Self {
        Self { width, height, lines_per_task, par_degree, max_iter: DEFAULT_MAX_ITER, viewport: Viewport::default() }
    }

    pub fn with_max_iter(mut self, max_iter: u32) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!("image size {}x{} must be positive", self.width, self.height));
        }
        if (self.width as u64) * (self.height as u64) > i32::MAX as u64 {
            return bad(format!("image size {}x{} is too large", self.width, self.height));
        }
        if self.lines_per_task == 0 || self.lines_per_task > self.height {
            return bad(format!("lines_per_task {} must be in 1..={}", self.lines_per_task, self.height));
        }
        if self.par_degree == 0 {
            return bad("par_degree must be at least 1".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        let v = &self.viewport;
        let finite = [v.re_min, v.re_max, v.im_min, v.im_max].iter().all(|x| x.is_finite());
        if !finite || v.re_min > v.re_max || v.im_min > v.im_max {
            return bad(format!("viewport {v:?} is not a finite rectangle"));
        }
        Ok(())
    }

    /// `ceil(height / lines_per_task)`.
    pub fn task_count(&self) -> u32 {
        self.height.div_ceil(self.lines_per_task)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    fn mapping(&self) -> Mapping {
        let v = &self.viewport;
        Mapping {
            re_min: v.re_min,
            span_re: v.re_max - v.re_min,
            denom_re: f64::from(self.width.saturating_sub(1).max(1)),
            im_max: v.im_max,
            span_im: v.im_max - v.im_min,
            denom_im: f64::from(self.height.saturating_sub(1).max(1)),
        }
    }
}

/// Constants of the pixel to complex-plane mapping. The generated IL and
/// the oracle evaluate exactly the same expressions on these values.
struct Mapping {
    re_min: f64,
    span_re: f64,
    denom_re: f64,
    im_max: f64,
    span_im: f64,
    denom_im: f64,
}

impl Mapping {
    fn re(&self, xf: f64) -> f64 {
        self.re_min + (self.span_re * xf) / self.denom_re
    }

    fn im(&self, yf: f64) -> f64 {
        self.im_max - (self.span_im * yf) / self.denom_im
    }
}

/// Escape-time count of `c = cr + ci*i`, capped at `max_iter`.
pub fn escape_time(cr: f64, ci: f64, max_iter: u32) -> u32 {
    let (mut zr, mut zi) = (0.0f64, 0.0f64);
    let mut it = 0;
    while it < max_iter {
        let zr2 = zr * zr;
        let zi2 = zi * zi;
        if 4.0 < zr2 + zi2 {
            break;
        }
        zi = 2.0 * zr * zi + ci;
        zr = (zr2 - zi2) + cr;
        it += 1;
    }
    it
}

/// Row-major iteration counts computed natively.
pub fn mandelbrot_reference(config: &MandelbrotConfig) -> Vec<i64> {
    let map = config.mapping();
    let mut out = Vec::with_capacity(config.pixel_count());
    // Coordinates advance by repeated +1.0, as in the IL, which has no
    // int-to-float conversion. Exact for any realistic image size.
    let mut yf = 0.0f64;
    for _ in 0..config.height {
        let ci = map.im(yf);
        let mut xf = 0.0f64;
        for _ in 0..config.width {
            out.push(i64::from(escape_time(map.re(xf), ci, config.max_iter)));
            xf += 1.0;
        }
        yf += 1.0;
    }
    out
}

/// Assembly source of the Mandelbrot program for `config`. The escape loop
/// is tested at the bottom (`max_iter >= 1`), which computes the same
/// counts as [`escape_time`] in fewer instructions. `main` issues
/// one `createLines` call per block of lines, keeps the futures in an
/// array, then touches them in order to assemble the image, which it
/// returns as an `Array<Int>` in row-major order.
pub fn gen_mandelbrot_program(config: &MandelbrotConfig) -> Result<String, BenchError> {
    config.validate()?;
    let m = config.mapping();
    let w = config.width;
    let h = config.height;
    let l = config.lines_per_task;
    let blocks = config.task_count();
    let f = |x: f64| format!("{x:?}");

    let mut s = String::new();
    let _ = writeln!(s, "program mandelbrot_{w}x{h}_l{l};");
    let _ = writeln!(s, "entry main;");
    let _ = write!(
        s,
        r"
@Parallel(parDegree={pd})
method createLines(start: Int, count: Int) -> Future<Array<Int>> {{
    local out: Array<Int>;
    local y: Int;
    local x: Int;
    local k: Int;
    local idx: Int;
    local it: Int;
    local yf: Float;
    local xf: Float;
    local cr: Float;
    local ci: Float;
    local zr: Float;
    local zi: Float;
    local zr2: Float;
    local zi2: Float;
    local mag: Float;
    LOAD count; CONST_I {w}; MUL; NEWARR Int; STORE out;
    CONST_F 0.0; STORE yf;
    CONST_I 0; STORE k;
skip:
    LOAD k; LOAD start; CMP_LT; JZ rows;
    LOAD yf; CONST_F 1.0; ADD; STORE yf;
    LOAD k; CONST_I 1; ADD; STORE k;
    JMP skip;
rows:
    CONST_I 0; STORE y;
    CONST_I 0; STORE idx;
row:
    LOAD y; LOAD count; CMP_LT; JZ done;
    CONST_F {im_max}; CONST_F {span_im}; LOAD yf; MUL; CONST_F {denom_im}; DIV; SUB; STORE ci;
    CONST_F 0.0; STORE xf;
    CONST_I 0; STORE x;
col:
    LOAD x; CONST_I {w}; CMP_LT; JZ next_row;
    CONST_F {re_min}; CONST_F {span_re}; LOAD xf; MUL; CONST_F {denom_re}; DIV; ADD; STORE cr;
    CONST_F 0.0; STORE zr;
    CONST_F 0.0; STORE zi;
    CONST_I 0; STORE it;
iter:
    LOAD zr; LOAD zr; MUL; STORE zr2;
    LOAD zi; LOAD zi; MUL; STORE zi2;
    LOAD zr2; LOAD zi2; ADD; STORE mag;
    CONST_F 4.0; LOAD mag; CMP_LT; JZ step;
    JMP escaped;
step:
    CONST_F 2.0; LOAD zr; MUL; LOAD zi; MUL; LOAD ci; ADD; STORE zi;
    LOAD zr2; LOAD zi2; SUB; LOAD cr; ADD; STORE zr;
    LOAD it; CONST_I 1; ADD; STORE it;
    LOAD it; CONST_I {max_iter}; CMP_EQ; JZ iter;
escaped:
    LOAD out; LOAD idx; LOAD it; ASTORE;
    LOAD idx; CONST_I 1; ADD; STORE idx;
    LOAD xf; CONST_F 1.0; ADD; STORE xf;
    LOAD x; CONST_I 1; ADD; STORE x;
    JMP col;
next_row:
    LOAD yf; CONST_F 1.0; ADD; STORE yf;
    LOAD y; CONST_I 1; ADD; STORE y;
    JMP row;
done:
    LOAD out; RET;
}}

method main() -> Array<Int> {{
    local futures: Array<Future<Array<Int>>>;
    local pixels: Array<Int>;
    local part: Array<Int>;
    local b: Int;
    local start: Int;
    local count: Int;
    local base: Int;
    local n: Int;
    local i: Int;
    CONST_I {blocks}; NEWARR Future<Array<Int>>; STORE futures;
    CONST_I 0; STORE b;
issue:
    LOAD b; CONST_I {blocks}; CMP_LT; JZ gather;
    LOAD b; CONST_I {l}; MUL; STORE start;
    CONST_I {h}; LOAD start; SUB; STORE count;
    LOAD count; CONST_I {l}; CMP_LT; JZ full_block;
    JMP call;
full_block:
    CONST_I {l}; STORE count;
call:
    LOAD futures; LOAD b; LOAD start; LOAD count; CALL createLines; ASTORE;
    LOAD b; CONST_I 1; ADD; STORE b;
    JMP issue;
gather:
    CONST_I {pixels}; NEWARR Int; STORE pixels;
    CONST_I 0; STORE b;
    CONST_I 0; STORE base;
touch_next:
    LOAD b; CONST_I {blocks}; CMP_LT; JZ finish;
    LOAD futures; LOAD b; ALOAD; TOUCH; STORE part;
    LOAD part; ALEN; STORE n;
    CONST_I 0; STORE i;
copy:
    LOAD i; LOAD n; CMP_LT; JZ copied;
    LOAD pixels; LOAD base; LOAD i; ADD; LOAD part; LOAD i; ALOAD; ASTORE;
    LOAD i; CONST_I 1; ADD; STORE i;
    JMP copy;
copied:
    LOAD base; LOAD n; ADD; STORE base;
    LOAD b; CONST_I 1; ADD; STORE b;
    JMP touch_next;
finish:
    LOAD pixels; RET;
}}
",
        pd = config.par_degree,
        max_iter = config.max_iter,
        pixels = config.pixel_count(),
        im_max = f(m.im_max),
        span_im = f(m.span_im),
        denom_im = f(m.denom_im),
        re_min = f(m.re_min),
        span_re = f(m.span_re),
        denom_re = f(m.denom_re),
    );
    Ok(s)
}

/// [`gen_mandelbrot_program`], parsed.
pub fn mandelbrot_program(config: &MandelbrotConfig) -> Result<Program, BenchError> {
    Ok(parse_assembly(&gen_mandelbrot_program(config)?)?)
}

/// `(speedup, efficiency)` with `speedup = t_seq / t_par` and
/// `efficiency = speedup / p`.
pub fn compute_efficiency(t_seq: Duration, t_par: Duration, p: u32) -> Result<(f64, f64), BenchError> {
    if t_seq.is_zero() || t_par.is_zero() {
        return Err(BenchError::InvalidInput(format!("durations must be positive (t_seq={t_seq:?}, t_par={t_par:?})")));
    }
    if p == 0 {
        return Err(BenchError::InvalidInput("processing element count must be at least 1".into()));
    }
    let speedup = t_seq.as_secs_f64() / t_par.as_secs_f64();
    Ok((speedup, speedup / f64::from(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyRecord {
    pub config: MandelbrotConfig,
    pub cores: u32,
    pub t_seq: Duration,
    pub t_par: Duration,
    pub speedup: f64,
    /// `speedup / min(par_degree, cores)`.
    pub efficiency: f64,
    /// `createLines` executions in the transformed run, spawned or inline.
    pub tasks: u64,
    /// Set when `cores < par_degree`: the pool was capped by the host.
    pub insufficient_cores: bool,
}

impl EfficiencyRecord {
    pub fn processing_elements(&self) -> u32 {
        self.config.par_degree.min(self.cores)
    }
}

pub const CSV_HEADER: [&str; 9] =
    ["width", "height", "lines_per_task", "par_degree", "cores", "t_seq_ms", "t_par_ms", "speedup", "efficiency"];

pub fn write_csv<W: io::Write>(out: W, records: &[EfficiencyRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.config.width.to_string(),
            r.config.height.to_string(),
            r.config.lines_per_task.to_string(),
            r.config.par_degree.to_string(),
            r.cores.to_string(),
            format!("{:.3}", r.t_seq.as_secs_f64() * 1e3),
            format!("{:.3}", r.t_par.as_secs_f64() * 1e3),
            format!("{:.4}", r.speedup),
            format!("{:.4}", r.efficiency),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plain (P2) PGM with `maxval = max_iter`.
pub fn write_pgm<W: io::Write>(mut out: W, config: &MandelbrotConfig, pixels: &[i64]) -> io::Result<()> {
    writeln!(out, "P2")?;
    writeln!(out, "{} {}", config.width, config.height)?;
    writeln!(out, "{}", config.max_iter)?;
    for row in pixels.chunks(config.width as usize) {
        let line: Vec<String> = row.iter().map(i64::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Axes and settings of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub resolutions: Vec<(u32, u32)>,
    pub lines_per_task: Vec<u32>,
    pub par_degrees: Vec<u32>,
    pub platform: PlatformInfo,
    pub max_iter: u32,
    /// Timed runs per mode; the median is recorded.
    pub repetitions: usize,
}

impl SweepSpec {
    /// The reference grid on `platform` with the given parallelism degrees.
    pub fn new(par_degrees: Vec<u32>, platform: PlatformInfo) -> Self {
        Self {
            resolutions: DEFAULT_RESOLUTIONS.to_vec(),
            lines_per_task: DEFAULT_LINES_PER_TASK.to_vec(),
            par_degrees,
            platform,
            max_iter: DEFAULT_MAX_ITER,
            repetitions: 3,
        }
    }

    /// Cells in the order they are measured: resolution, then lines per
    /// task, then parallelism degree.
    pub fn configs(&self) -> Vec<MandelbrotConfig> {
        let mut out = Vec::new();
        for &(width, height) in &self.resolutions {
            for &lines in &self.lines_per_task {
                for &pd in &self.par_degrees {
                    out.push(MandelbrotConfig::new(width, height, lines, pd).with_max_iter(self.max_iter));
                }
            }
        }
        out
    }
}

/// Runs one sweep cell: sequential and transformed executions, each
/// checked against the oracle and timed `repetitions` times.
pub fn measure(
    config: &MandelbrotConfig,
    platform: PlatformInfo,
    repetitions: usize,
    reference: &[i64],
) -> Result<EfficiencyRecord, BenchError> {
    let program = mandelbrot_program(config)?;
    let (parallel, _) = transform(&program, platform)?;
    let repetitions = repetitions.max(1);

    let mut seq_times = Vec::with_capacity(repetitions);
    let mut par_times = Vec::with_capacity(repetitions);
    let mut tasks = 0;
    for _ in 0..repetitions {
        let (t, _) = timed_checked(&program, platform, config, reference, "sequential")?;
        seq_times.push(t);
        let (t, out) = timed_checked(&parallel, platform, config, reference, "transformed")?;
        par_times.push(t);
        tasks = out.stats.per_method.get(WORKER_METHOD).map_or(0, |m| m.invocations());
    }

    let expected = u64::from(config.task_count());
    if tasks != expected {
        return Err(BenchError::TaskCountMismatch {
            width: config.width,
            height: config.height,
            lines_per_task: config.lines_per_task,
            expected,
            actual: tasks,
        });
    }

    let t_seq = median(&mut seq_times);
    let t_par = median(&mut par_times);
    let pes = config.par_degree.min(platform.cores());
    let (speedup, efficiency) = compute_efficiency(t_seq, t_par, pes)?;
    Ok(EfficiencyRecord {
        config: *config,
        cores: platform.cores(),
        t_seq,
        t_par,
        speedup,
        efficiency,
        tasks,
        insufficient_cores: platform.cores() < config.par_degree,
    })
}

/// Measures every cell of `spec` in [`SweepSpec::configs`] order. The
/// first output mismatch aborts the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<EfficiencyRecord>, BenchError> {
    run_sweep_with(spec, |_| {})
}

/// [`run_sweep`], calling `progress` after each record.
pub fn run_sweep_with(
    spec: &SweepSpec,
    mut progress: impl FnMut(&EfficiencyRecord),
) -> Result<Vec<EfficiencyRecord>, BenchError> {
    let mut records = Vec::new();
    let mut reference: Option<(MandelbrotConfig, Vec<i64>)> = None;
    for config in spec.configs() {
        config.validate()?;
        // The image only depends on size, iterations and viewport.
        let stale = reference.as_ref().is_none_or(|(c, _)| {
            (c.width, c.height, c.max_iter, c.viewport)
                != (config.width, config.height, config.max_iter, config.viewport)
        });
        if stale {
            reference = Some((config, mandelbrot_reference(&config)));
        }
        let pixels = &reference.as_ref().expect("computed above").1;
        let record = measure(&config, spec.platform, spec.repetitions, pixels)?;
        if record.insufficient_cores {
            log::warn!(
                "{}x{}: par_degree {} exceeds the {} available cores",
                config.width,
                config.height,
                config.par_degree,
                record.cores
            );
        }
        progress(&record);
        records.push(record);
    }
    Ok(records)
}

fn timed_checked(
    program: &Program,
    platform: PlatformInfo,
    config: &MandelbrotConfig,
    reference: &[i64],
    mode: &'static str,
) -> Result<(Duration, RunOutcome), BenchError> {
    let started = Instant::now();
    let out = run_on(program, platform)?;
    let elapsed = started.elapsed();
    if let Some(pixel) = first_mismatch(&out.value, reference) {
        return Err(BenchError::ValidationFailed {
            mode,
            width: config.width,
            height: config.height,
            lines_per_task: config.lines_per_task,
            par_degree: config.par_degree,
            pixel,
        });
    }
    Ok((elapsed, out))
}

/// Index of the first pixel of `value` that differs from `reference`
/// (`reference.len()` when the shapes differ).
pub fn first_mismatch(value: &Value, reference: &[i64]) -> Option<usize> {
    match value.to_int_vec() {
        Some(px) if px.len() == reference.len() => px.iter().zip(reference).position(|(a, b)| a != b),
        _ => Some(reference.len()),
    }
}

fn median(times: &mut [Duration]) -> Duration {
    times.sort_unstable();
    times[times.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::verify_parallel_constraints;

    #[test]
    fn config_invariants() {
        assert!(MandelbrotConfig::new(600, 400, 5, 2).validate().is_ok());
        assert!(MandelbrotConfig::new(600, 400, 0, 2).validate().is_err());
        assert!(MandelbrotConfig::new(600, 400, 401, 2).validate().is_err());
        assert!(MandelbrotConfig::new(600, 400, 5, 0).validate().is_err());
        assert!(MandelbrotConfig::new(0, 400, 5, 1).validate().is_err());
        assert_eq!(MandelbrotConfig::new(600, 400, 5, 2).task_count(), 80);
        assert_eq!(MandelbrotConfig::new(2400, 1600, 40, 4).task_count(), 40);
        assert_eq!(MandelbrotConfig::new(10, 7, 3, 1).task_count(), 3);
    }

    #[test]
    fn mapping_endpoints() {
        let m = MandelbrotConfig::new(600, 400, 5, 2).mapping();
        assert_eq!(m.re(0.0), -2.5);
        assert_eq!(m.re(599.0), 1.0);
        assert_eq!(m.im(0.0), 1.0);
        assert_eq!(m.im(399.0), -1.0);
    }

    #[test]
    fn interior_point_reaches_max_iter() {
        assert_eq!(escape_time(0.0, 0.0, 1000), 1000);
        assert_eq!(escape_time(2.0, 2.0, 1000), 1);
    }

    #[test]
    fn efficiency_arithmetic() {
        let s = Duration::from_secs;
        assert_eq!(compute_efficiency(s(10), s(10), 1).unwrap(), (1.0, 1.0));
        assert_eq!(compute_efficiency(s(10), s(5), 2).unwrap(), (2.0, 1.0));
        let (sp, eff) = compute_efficiency(s(10), s(6), 4).unwrap();
        assert!((sp - 10.0 / 6.0).abs() < 1e-12);
        assert!((eff - 10.0 / 24.0).abs() < 1e-12);
        assert!(compute_efficiency(Duration::ZERO, s(1), 1).is_err());
        assert!(compute_efficiency(s(1), s(1), 0).is_err());
    }

    #[test]
    fn generated_program_verifies_clean() {
        let p = mandelbrot_program(&MandelbrotConfig::new(60, 40, 5, 2)).unwrap();
        assert!(verify_parallel_constraints(&p).is_empty());
        assert!(crate::il::validate_program(&p).is_empty());
    }

    #[test]
    fn degenerate_image() {
        let c = MandelbrotConfig::new(1, 1, 1, 1).with_max_iter(50);
        let p = mandelbrot_program(&c).unwrap();
        let out = run_on(&p, PlatformInfo::overridden(1).unwrap()).unwrap();
        assert_eq!(out.value.to_int_vec().unwrap(), mandelbrot_reference(&c));
        assert_eq!(out.stats.per_method[WORKER_METHOD].invocations(), 1);
    }

    #[test]
    fn small_image_matches_reference_in_both_modes() {
        let c = MandelbrotConfig::new(31, 17, 4, 2).with_max_iter(60);
        let reference = mandelbrot_reference(&c);
        let platform = PlatformInfo::overridden(2).unwrap();
        let record = measure(&c, platform, 1, &reference).unwrap();
        assert_eq!(record.tasks, 5);
        assert!(!record.insufficient_cores);
    }

    #[test]
    fn csv_header_is_exact() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "width,height,lines_per_task,par_degree,cores,t_seq_ms,t_par_ms,speedup,efficiency\n"
        );
    }

    #[test]
    fn pgm_layout() {
        let c = MandelbrotConfig::new(2, 2, 1, 1).with_max_iter(9);
        let mut buf = Vec::new();
        write_pgm(&mut buf, &c, &[1, 2, 3, 9]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "P2\n2 2\n9\n1 2\n3 9\n");
    }
}

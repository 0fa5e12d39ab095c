use pal_core::bench::{
    escape_time, mandelbrot_program, mandelbrot_reference, run_sweep, write_csv, write_pgm, MandelbrotConfig,
    SweepSpec, CSV_HEADER,
};
use pal_core::transform::transform;
use pal_core::{verify_parallel_constraints, PlatformInfo};
use proptest::prelude::*;

/// Straight-line escape-time count, written independently of the library.
fn naive_count(cr: f64, ci: f64, max_iter: u32) -> u32 {
    let (mut zr, mut zi) = (0.0f64, 0.0f64);
    for it in 0..max_iter {
        if zr * zr + zi * zi > 4.0 {
            return it;
        }
        let t = zr * zr - zi * zi + cr;
        zi = 2.0 * zr * zi + ci;
        zr = t;
    }
    max_iter
}

#[test]
fn escape_time_matches_naive_loop_on_a_grid() {
    for i in 0..60 {
        for j in 0..40 {
            let (cr, ci) = (-2.5 + 3.5 * f64::from(i) / 59.0, 1.0 - 2.0 * f64::from(j) / 39.0);
            assert_eq!(escape_time(cr, ci, 200), naive_count(cr, ci, 200), "({cr}, {ci})");
        }
    }
}

#[test]
fn known_points() {
    assert_eq!(escape_time(0.0, 0.0, 1000), 1000);
    assert_eq!(escape_time(-1.0, 0.0, 1000), 1000);
    // |c| > 2 escapes after the first step.
    assert_eq!(escape_time(3.0, 0.0, 1000), 1);
}

#[test]
fn small_sweep_records_and_csv() {
    let mut spec = SweepSpec::new(vec![1, 2], PlatformInfo::overridden(2).unwrap());
    spec.resolutions = vec![(24, 16), (48, 32)];
    spec.lines_per_task = vec![5, 10];
    spec.max_iter = 50;
    spec.repetitions = 1;
    let records = run_sweep(&spec).unwrap();
    assert_eq!(records.len(), 8);
    for r in &records {
        assert_eq!(r.tasks, u64::from(r.config.height.div_ceil(r.config.lines_per_task)));
        assert!(r.speedup > 0.0 && r.efficiency > 0.0);
    }

    let mut buf = Vec::new();
    write_csv(&mut buf, &records).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(&rows[0][0], "24");
    assert_eq!(&rows[0][4], "2");
}

#[test]
fn pgm_is_plain_text() {
    let cfg = MandelbrotConfig::new(4, 3, 1, 1).with_max_iter(10);
    let pixels = mandelbrot_reference(&cfg);
    let mut buf = Vec::new();
    write_pgm(&mut buf, &cfg, &pixels).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut tokens = text.split_whitespace();
    assert_eq!(tokens.next(), Some("P2"));
    assert_eq!(tokens.next(), Some("4"));
    assert_eq!(tokens.next(), Some("3"));
    assert_eq!(tokens.count(), 1 + 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The generated IL agrees with the native reference for any shape.
    #[test]
    fn il_matches_reference(w in 1u32..24, h in 1u32..20, l in 1u32..8, pd in 1u32..=4, cores in 1u32..=4, mi in 1u32..40) {
        let cfg = MandelbrotConfig::new(w, h, l.min(h), pd).with_max_iter(mi);
        let program = mandelbrot_program(&cfg).unwrap();
        prop_assert!(verify_parallel_constraints(&program).is_empty());
        let reference = mandelbrot_reference(&cfg);
        let platform = PlatformInfo::overridden(cores).unwrap();
        let (parallel, _) = transform(&program, platform).unwrap();
        for p in [&program, &parallel] {
            let out = pal_core::runtime::run_on(p, platform).unwrap();
            prop_assert_eq!(out.value.to_int_vec().unwrap(), reference.clone());
        }
    }
}

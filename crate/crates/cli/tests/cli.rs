use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pal_core::gen::{generate_source, GenConfig};
use tempfile::TempDir;

const OK: &str = "global total: Int;
@Parallel(parDegree=2)
method sq(x: Int) -> Future<Int> { LOAD x; LOAD x; MUL; RET; }
method main() -> Int { CONST_I 7; CALL sq; TOUCH; PUTSTATIC total; GETSTATIC total; RET; }
";

const FIELD_ACCESS: &str = "global total: Int;
@Parallel(parDegree=2)
method sq(x: Int) -> Future<Int> { GETSTATIC total; RET; }
method main() -> Int { CONST_I 7; CALL sq; TOUCH; RET; }
";

const TRAPS: &str = "@Parallel(parDegree=2)
method inv(x: Int) -> Future<Int> { CONST_I 1; LOAD x; DIV; RET; }
method main() -> Int { CONST_I 0; CALL inv; TOUCH; RET; }
";

fn pal(args: &[&str]) -> Output {
    pal_env(args, &[])
}

fn pal_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pal"));
    cmd.args(args).env_remove("PAL_CORES");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("pal runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_clean_and_dirty() {
    let dir = TempDir::new().unwrap();
    let ok = pal(&["verify", s(&write(&dir, "ok.pal", OK))]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stderr(&ok).is_empty());

    let bad = pal(&["verify", s(&write(&dir, "bad.pal", FIELD_ACCESS))]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stderr(&bad).trim(), "ERROR FieldAccessInParallel sq#0: GETSTATIC of global `total`");
    assert!(stdout(&bad).is_empty());
}

#[test]
fn run_rejects_unverifiable_programs() {
    let dir = TempDir::new().unwrap();
    let out = pal(&["run", s(&write(&dir, "bad.pal", FIELD_ACCESS)), "--cores", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FieldAccessInParallel"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn run_prints_result_and_globals() {
    let dir = TempDir::new().unwrap();
    let out = pal(&["run", s(&write(&dir, "ok.pal", OK)), "--cores", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "49\ntotal = 49\n");
}

#[test]
fn sequential_and_parallel_output_agree_over_a_corpus() {
    let dir = TempDir::new().unwrap();
    for seed in 0..12 {
        let file = write(&dir, &format!("g{seed}.pal"), &generate_source(seed, &GenConfig::default()));
        let seq = pal(&["run", s(&file), "--no-transform"]);
        let par = pal(&["run", s(&file), "--cores", "4"]);
        assert_eq!(seq.status.code(), Some(0), "{}", stderr(&seq));
        assert_eq!(par.status.code(), Some(0), "{}", stderr(&par));
        assert_eq!(stdout(&seq), stdout(&par), "seed {seed}");
    }
}

#[test]
fn trap_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "trap.pal", TRAPS);
    for extra in [["--cores", "4"], ["--cores", "1"]] {
        let out = pal(&["run", s(&file), extra[0], extra[1]]);
        assert_eq!(out.status.code(), Some(1));
        assert!(stderr(&out).contains("integer division by zero"), "{}", stderr(&out));
    }
}

#[test]
fn stats_json_has_exactly_the_documented_fields() {
    let dir = TempDir::new().unwrap();
    let stats = dir.path().join("stats.json");
    let out = pal(&["run", s(&write(&dir, "ok.pal", OK)), "--cores", "4", "--stats-json", s(&stats)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["peak_concurrency", "per_method", "tasks_spawned", "touch_block_ms", "wall_ms"]);
    assert_eq!(json["tasks_spawned"], 1);
    let mut method_keys: Vec<&str> = json["per_method"]["sq"].as_object().unwrap().keys().map(String::as_str).collect();
    method_keys.sort_unstable();
    assert_eq!(method_keys, ["max_ms", "mean_ms", "tasks"]);
}

#[test]
fn transform_writes_trusted_output_and_report() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ok.pal", OK);
    let output = dir.path().join("out.pal");
    let report = dir.path().join("report.json");
    let out = pal(&["transform", s(&input), "-o", s(&output), "--cores", "4", "--report-json", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("sq                       Threaded(2)"));
    let text = fs::read_to_string(&output).unwrap();
    assert!(text.starts_with("#transformed\n"));
    assert!(text.contains("SPAWN sq;"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["rewritten_sites"].as_array().unwrap().len(), 1);

    // Untrusted input may not contain SPAWN.
    assert_eq!(pal(&["run", s(&output)]).status.code(), Some(1));
    let trusted = pal(&["run", s(&output), "--trusted", "--cores", "4"]);
    assert_eq!(stdout(&trusted), "49\ntotal = 49\n");
}

#[test]
fn cores_flag_beats_environment() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ok.pal", OK);
    let output = dir.path().join("out.pal");
    let env_only = pal_env(&["transform", s(&input), "-o", s(&output)], &[("PAL_CORES", "1")]);
    assert!(stdout(&env_only).contains("rewritten sites: 0"), "{}", stdout(&env_only));
    let both = pal_env(&["transform", s(&input), "-o", s(&output), "--cores", "2"], &[("PAL_CORES", "1")]);
    assert!(stdout(&both).contains("rewritten sites: 1"), "{}", stdout(&both));
}

#[test]
fn usage_errors_exit_two_and_help_exits_zero() {
    assert_eq!(pal(&["run"]).status.code(), Some(2));
    assert_eq!(pal(&["run", "x.pal", "--bogus"]).status.code(), Some(2));
    assert_eq!(pal(&["run", "x.pal", "--cores", "0"]).status.code(), Some(2));
    assert_eq!(pal(&["frobnicate"]).status.code(), Some(2));
    let bad = pal(&["bench", "mandelbrot", "--resolutions", "600by400"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!stderr(&bad).is_empty());
    for sub in [&["run"][..], &["verify"], &["transform"], &["bench"], &["bench", "mandelbrot"]] {
        let mut args = sub.to_vec();
        args.push("--help");
        let out = pal(&args);
        assert_eq!(out.status.code(), Some(0), "{sub:?}");
        assert!(stdout(&out).contains("Usage"));
    }
}

#[test]
fn missing_file_fails_cleanly() {
    let out = pal(&["verify", "/nonexistent/prog.pal"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: cannot read"));
}

#[test]
fn bench_writes_csv_and_pgm() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let pgm_dir = dir.path().join("img");
    let out = pal(&[
        "bench",
        "mandelbrot",
        "--resolutions",
        "24x16,48x32",
        "--lines",
        "5,10",
        "--par-degree",
        "1,2",
        "--cores",
        "2",
        "--max-iter",
        "40",
        "--repetitions",
        "1",
        "--csv",
        s(&csv_path),
        "--pgm",
        s(&pgm_dir),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        "width,height,lines_per_task,par_degree,cores,t_seq_ms,t_par_ms,speedup,efficiency"
    );
    assert_eq!(reader.records().count(), 8);
    let pgm = fs::read_to_string(pgm_dir.join("mandelbrot_24x16.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n24 16\n40\n"));
    assert!(pgm_dir.join("mandelbrot_48x32.pgm").exists());
}

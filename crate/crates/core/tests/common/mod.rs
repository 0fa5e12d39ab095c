#![allow(dead_code)]

use std::time::{Duration, Instant};

use pal_core::il::parse_assembly;
use pal_core::runtime::run_on;
use pal_core::{PlatformInfo, Program};

pub fn platform(cores: u32) -> PlatformInfo {
    PlatformInfo::overridden(cores).expect("cores >= 1")
}

pub fn parse(src: &str) -> Program {
    parse_assembly(src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

/// `main` spawns one `busy(task_spin)`, spins `main_spin` iterations
/// itself, then touches the future twice.
pub fn busy_program(task_spin: i64, main_spin: i64) -> Program {
    parse(&format!(
        "@Parallel(parDegree=2)
method busy(n: Int) -> Future<Int> {{
    local i: Int;
    local acc: Int;
top:
    LOAD i; LOAD n; CMP_LT; JZ done;
    LOAD acc; LOAD i; ADD; CONST_I 3; MUL; STORE acc;
    LOAD i; CONST_I 1; ADD; STORE i;
    JMP top;
done:
    LOAD acc; RET;
}}
method main() -> Int {{
    local f: Future<Int>;
    local i: Int;
    local a: Int;
    CONST_I {task_spin}; CALL busy; STORE f;
top:
    LOAD i; CONST_I {main_spin}; CMP_LT; JZ touch;
    LOAD i; CONST_I 1; ADD; STORE i;
    JMP top;
touch:
    LOAD f; TOUCH; STORE a;
    LOAD f; TOUCH; LOAD a; SUB; RET;
}}"
    ))
}

/// Iterations of the `busy` loop that take about `target` here.
pub fn calibrate_spin(target: Duration) -> i64 {
    let probe = 200_000;
    let program = busy_program(probe, 0);
    let best = (0..3)
        .map(|_| {
            let t = Instant::now();
            run_on(&program, platform(1)).expect("busy program runs");
            t.elapsed()
        })
        .min()
        .expect("three samples");
    let per_iter = best.as_secs_f64() / probe as f64;
    (target.as_secs_f64() / per_iter).ceil() as i64
}

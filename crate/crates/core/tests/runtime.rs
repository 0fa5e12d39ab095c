mod common;

use std::time::Duration;

use common::{busy_program, calibrate_spin, parse, platform};
use pal_core::gen::{generate_program, stress_program, GenConfig};
use pal_core::runtime::{run_on, RunError};
use pal_core::transform::transform;
use pal_core::{Program, Trap};
use proptest::prelude::*;

fn transformed(p: &Program, cores: u32) -> Program {
    transform(p, platform(cores)).expect("transformable").0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Results and globals do not depend on whether, or on how many
    /// workers, the program runs in parallel.
    #[test]
    fn transformed_equals_sequential(seed in any::<u64>(), pd in 1u32..=8, cores in 1u32..=8) {
        let config = GenConfig { par_degree: Some(pd), ..GenConfig::default() };
        let program = generate_program(seed, &config);
        let reference = run_on(&program, platform(cores)).unwrap();
        let parallel = run_on(&transformed(&program, cores), platform(cores)).unwrap();
        prop_assert!(parallel.same_result(&reference), "{:?} vs {:?}", parallel.value, reference.value);
        prop_assert_eq!(reference.stats.tasks_spawned, 0);
    }

    /// Peak concurrency never exceeds min(parDegree, cores).
    #[test]
    fn cap_invariant(pd in prop::sample::select(vec![1u32, 2, 4, 8]), cores in 1u32..=8, tasks in 1u32..24) {
        let program = transformed(&parse(&stress_program(pd, tasks, 2_000)), cores);
        let out = run_on(&program, platform(cores)).unwrap();
        prop_assert!(out.stats.peak_concurrency <= pd.min(cores) as usize);
        let threaded = pd.min(cores) >= 2;
        prop_assert_eq!(out.stats.tasks_spawned, if threaded { u64::from(tasks) } else { 0 });
        prop_assert_eq!(out.stats.per_method["work"].invocations(), u64::from(tasks));
    }
}

#[test]
fn array_arguments_are_copied() {
    let src = "@Parallel(parDegree=4)
method bump(a: Array<Int>) -> Future<Array<Int>> {
    LOAD a; CONST_I 0; LOAD a; CONST_I 0; ALOAD; CONST_I 1; ADD; ASTORE;
    LOAD a; RET;
}
method main() -> Int {
    local a: Array<Int>;
    local f: Future<Array<Int>>;
    CONST_I 1; NEWARR Int; STORE a;
    LOAD a; CONST_I 0; CONST_I 10; ASTORE;
    LOAD a; CALL bump; STORE f;
    LOAD a; CONST_I 0; CONST_I 500; ASTORE;
    LOAD f; TOUCH; CONST_I 0; ALOAD;
    LOAD a; CONST_I 0; ALOAD; CONST_I 1000; MUL; ADD; RET;
}";
    let program = parse(src);
    for cores in [1, 4] {
        for p in [program.clone(), transformed(&program, cores)] {
            let out = run_on(&p, platform(cores)).unwrap();
            assert_eq!(out.value.as_int(), Some(500_011), "cores {cores}");
        }
    }
}

const TRAPPING: &str = "@Parallel(parDegree=4)
method div(x: Int, y: Int) -> Future<Int> { LOAD x; LOAD y; DIV; RET }
method main() -> Int {
    local a: Future<Int>;
    local b: Future<Int>;
    local c: Future<Int>;
    local s: Int;
    CONST_I 10; CONST_I 2; CALL div; STORE a;
    CONST_I 1; CONST_I 0; CALL div; STORE b;
    CONST_I 9; CONST_I 3; CALL div; STORE c;
    LOAD a; TOUCH; LOAD c; TOUCH; ADD; STORE s;
    LOAD b; TOUCH; LOAD s; ADD; RET;
}";

#[test]
fn task_trap_surfaces_at_touch() {
    let program = transformed(&parse(TRAPPING), 4);
    let touch_b = program.method_by_name("main").unwrap().body.len() - 4;
    match run_on(&program, platform(4)) {
        Err(RunError::Trap(info)) => {
            assert_eq!(info.method, "main");
            // The healthy tasks were touched first without trouble.
            assert_eq!(info.instruction_index, touch_b);
            assert_eq!(info.trap.root_cause(), &Trap::DivideByZero);
            match &info.trap {
                Trap::TaskTrapped(inner) => assert_eq!(inner.method, "div"),
                other => panic!("{other:?}"),
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn inline_trap_surfaces_at_call() {
    let program = parse(TRAPPING);
    match run_on(&program, platform(1)) {
        Err(RunError::Trap(info)) => {
            assert_eq!(info.method, "div");
            assert_eq!(info.trap, Trap::DivideByZero);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn touch_blocks_only_while_needed() {
    let spin = calibrate_spin(Duration::from_millis(60));
    // Touch right away: blocks for roughly the task's run time.
    let out = run_on(&transformed(&busy_program(spin, 0), 2), platform(2)).unwrap();
    assert_eq!(out.value.as_int(), Some(0));
    let t = &out.stats.touch_times;
    assert_eq!(t.len(), 2);
    assert!(t[0] >= Duration::from_millis(30), "{t:?}");
    assert!(t[1] < Duration::from_millis(1), "{t:?}");
    assert_eq!(out.stats.tasks_spawned, 1);
}

#[test]
fn halt_in_a_task_traps() {
    let src = "@Parallel(parDegree=2)
method f() -> Future<Int> { HALT }
method main() -> Int { CALL f; TOUCH; RET }";
    let program = transformed(&parse(src), 2);
    match run_on(&program, platform(2)) {
        Err(RunError::Trap(info)) => assert_eq!(info.trap.root_cause(), &Trap::HaltInTask),
        other => panic!("{other:?}"),
    }
}

//! Seeded generators of valid IL programs, used by the equivalence and
//! stress tests and by the benchmarks.
//!
//! Generated programs pass validation and verification, always terminate,
//! and never trap: divisors are non-zero constants, array indices are
//! constants below the (fixed) array length, and loops have constant trip
//! counts. Annotated methods only see their (deep-copied) arguments, so
//! results do not depend on scheduling.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::il::{parse_assembly, Program};

/// Knobs of [`generate_source`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    /// Forces every annotation to this degree; random in `1..=8` otherwise.
    pub par_degree: Option<u32>,
    pub max_helpers: usize,
    pub max_parallel: usize,
    /// Statements at the top level of `main`.
    pub main_statements: usize,
    /// Nesting limit for loops and conditionals.
    pub max_nesting: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { par_degree: None, max_helpers: 3, max_parallel: 3, main_statements: 14, max_nesting: 2 }
    }
}

/// A random program for `seed`; see [`generate_source`].
pub fn generate_program(seed: u64, config: &GenConfig) -> Program {
    let src = generate_source(seed, config);
    parse_assembly(&src).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{src}"))
}

/// Assembly text of a random program. The same seed and configuration
/// always give the same text.
pub fn generate_source(seed: u64, config: &GenConfig) -> String {
    Generator::new(seed, config).program()
}

/// A program whose `main` spawns `tasks` calls of an annotated `work`
/// method (each spinning `spin` iterations) before touching any of them,
/// and returns the sum of their results.
pub fn stress_program(par_degree: u32, tasks: u32, spin: u32) -> String {
    format!(
        r"program stress;

@Parallel(parDegree={par_degree})
method work(id: Int, n: Int) -> Future<Int> {{
    local i: Int;
    local acc: Int;
    LOAD id; STORE acc;
loop:
    LOAD i; LOAD n; CMP_LT; JZ done;
    LOAD acc; CONST_I 31; MUL; LOAD i; ADD; CONST_I 1000003; DIV; LOAD acc; ADD; STORE acc;
    LOAD i; CONST_I 1; ADD; STORE i;
    JMP loop;
done:
    LOAD acc; RET;
}}

method main() -> Int {{
    local futures: Array<Future<Int>>;
    local k: Int;
    local sum: Int;
    CONST_I {tasks}; NEWARR Future<Int>; STORE futures;
spawn:
    LOAD k; CONST_I {tasks}; CMP_LT; JZ gather;
    LOAD futures; LOAD k; LOAD k; CONST_I {spin}; CALL work; ASTORE;
    LOAD k; CONST_I 1; ADD; STORE k;
    JMP spawn;
gather:
    CONST_I 0; STORE k;
touch:
    LOAD k; CONST_I {tasks}; CMP_LT; JZ done;
    LOAD sum; LOAD futures; LOAD k; ALOAD; TOUCH; ADD; STORE sum;
    LOAD k; CONST_I 1; ADD; STORE k;
    JMP touch;
done:
    LOAD sum; RET;
}}
"
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ret {
    Int,
    Float,
    /// An `Array<Int>` of the program's array length.
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Param {
    Int,
    Float,
    Array,
}

struct ParallelSig {
    name: String,
    params: Vec<Param>,
    ret: Ret,
}

/// Names visible to the code being generated.
#[derive(Default, Clone)]
struct Scope {
    ints: Vec<String>,
    /// Int slots that statements may assign (excludes loop counters).
    writable_ints: Vec<String>,
    floats: Vec<String>,
    arrays: Vec<String>,
    int_globals: Vec<String>,
    float_globals: Vec<String>,
    /// Helpers callable from here (`h0 .. h{n-1}`).
    helpers: usize,
}

/// Future slots of `main` and what they hold.
struct FutureSlot {
    name: String,
    callee: usize,
}

struct Generator<'a> {
    rng: ChaCha8Rng,
    config: &'a GenConfig,
    labels: usize,
    array_len: i64,
    parallel: Vec<ParallelSig>,
    helper_count: usize,
}

impl<'a> Generator<'a> {
    fn new(seed: u64, config: &'a GenConfig) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
            labels: 0,
            array_len: 4,
            parallel: Vec::new(),
            helper_count: 0,
        }
    }

    fn label(&mut self, prefix: &str) -> String {
        self.labels += 1;
        format!("{prefix}{}", self.labels)
    }

    fn program(mut self) -> String {
        self.array_len = self.rng.gen_range(1..=6);
        self.helper_count = self.rng.gen_range(0..=self.config.max_helpers);
        let parallel_count = self.rng.gen_range(1..=self.config.max_parallel.max(1));
        let int_globals: Vec<String> = (0..self.rng.gen_range(0..=2)).map(|i| format!("gi{i}")).collect();
        let float_globals: Vec<String> = (0..self.rng.gen_range(0..=1)).map(|i| format!("gf{i}")).collect();

        let mut out = String::from("program generated;\nentry main;\n\n");
        for g in &int_globals {
            let _ = writeln!(out, "global {g}: Int;");
        }
        for g in &float_globals {
            let _ = writeln!(out, "global {g}: Float;");
        }
        out.push_str("global result_f: Float;\n\n");

        for i in 0..self.helper_count {
            out.push_str(&self.helper(i));
        }
        for i in 0..parallel_count {
            let sig = self.parallel_sig(i);
            out.push_str(&self.parallel_method(&sig));
            self.parallel.push(sig);
        }
        out.push_str(&self.main(int_globals, float_globals));
        out
    }

    fn helper(&mut self, index: usize) -> String {
        let scope = Scope {
            ints: vec!["a".into(), "b".into(), "t".into()],
            writable_ints: vec!["t".into()],
            helpers: index,
            ..Scope::default()
        };
        let mut body = String::new();
        let e = self.int_expr(&scope, 2);
        let _ = writeln!(body, "    {e} STORE t;");
        if self.rng.gen_bool(0.5) {
            let n = self.rng.gen_range(1..=4);
            let e = self.int_expr(&scope, 2);
            let update = format!("{e} LOAD t; ADD; STORE t;");
            body.push_str(&self.counted_loop("i", n, &update));
        }
        let e = self.int_expr(&scope, 2);
        let _ = writeln!(body, "    {e} LOAD t; ADD; RET;");
        format!("method h{index}(a: Int, b: Int) -> Int {{\n    local t: Int;\n    local i: Int;\n{body}}}\n\n")
    }

    fn parallel_sig(&mut self, index: usize) -> ParallelSig {
        let params = (0..self.rng.gen_range(0..=3))
            .map(|_| *[Param::Int, Param::Float, Param::Array].choose(&mut self.rng).expect("non-empty"))
            .collect();
        let ret = *[Ret::Int, Ret::Float, Ret::Array].choose(&mut self.rng).expect("non-empty");
        ParallelSig { name: format!("p{index}"), params, ret }
    }

    fn parallel_method(&mut self, sig: &ParallelSig) -> String {
        let pd = self.config.par_degree.unwrap_or_else(|| self.rng.gen_range(1..=8));
        let mut scope = Scope { helpers: self.helper_count, ..Scope::default() };
        let mut params = Vec::new();
        for (i, p) in sig.params.iter().enumerate() {
            let name = format!("x{i}");
            let kind = match p {
                Param::Int => {
                    scope.ints.push(name.clone());
                    "Int"
                }
                Param::Float => {
                    scope.floats.push(name.clone());
                    "Float"
                }
                Param::Array => {
                    scope.arrays.push(name.clone());
                    "Array<Int>"
                }
            };
            params.push(format!("{name}: {kind}"));
        }
        scope.ints.push("t".into());
        scope.writable_ints.push("t".into());
        scope.floats.push("u".into());
        scope.arrays.push("r".into());

        let mut body = format!("    CONST_I {}; NEWARR Int; STORE r;\n", self.array_len);
        for _ in 0..self.rng.gen_range(1..=4) {
            body.push_str(&self.statement(&scope, 1, None));
        }
        let (ret_kind, tail) = match sig.ret {
            Ret::Int => ("Int", format!("    {} RET;\n", self.int_expr(&scope, 2))),
            Ret::Float => ("Float", format!("    {} RET;\n", self.float_expr(&scope, 2))),
            Ret::Array => {
                let arr = scope.arrays.choose(&mut self.rng).expect("r is always present").clone();
                ("Array<Int>", format!("    LOAD {arr}; RET;\n"))
            }
        };
        format!(
            "@Parallel(parDegree={pd})\nmethod {}({}) -> Future<{ret_kind}> {{\n    local t: Int;\n    local u: Float;\n    local r: Array<Int>;\n    local i: Int;\n    local j: Int;\n{body}{tail}}}\n\n",
            sig.name,
            params.join(", ")
        )
    }

    fn main(&mut self, int_globals: Vec<String>, float_globals: Vec<String>) -> String {
        let futures: Vec<FutureSlot> = (0..self.rng.gen_range(1..=4))
            .map(|i| FutureSlot { name: format!("fut{i}"), callee: self.rng.gen_range(0..self.parallel.len()) })
            .collect();
        let scope = Scope {
            ints: vec!["v0".into(), "v1".into(), "v2".into(), "acc".into()],
            writable_ints: vec!["v0".into(), "v1".into(), "v2".into()],
            floats: vec!["w0".into(), "w1".into(), "facc".into()],
            arrays: vec!["arr0".into(), "arr1".into()],
            int_globals,
            float_globals,
            helpers: self.helper_count,
        };

        let mut decls = String::from(
            "    local v0: Int;\n    local v1: Int;\n    local v2: Int;\n    local acc: Int;\n    local w0: Float;\n    local w1: Float;\n    local facc: Float;\n    local arr0: Array<Int>;\n    local arr1: Array<Int>;\n    local i: Int;\n    local j: Int;\n",
        );
        for f in &futures {
            let kind = match self.parallel[f.callee].ret {
                Ret::Int => "Int",
                Ret::Float => "Float",
                Ret::Array => "Array<Int>",
            };
            let _ = writeln!(decls, "    local {}: Future<{kind}>;", f.name);
        }

        let mut body = String::new();
        for arr in &scope.arrays {
            let _ = writeln!(body, "    CONST_I {}; NEWARR Int; STORE {arr};", self.array_len);
        }
        // Every future slot is filled up front so any later TOUCH is valid.
        for f in &futures {
            body.push_str(&self.parallel_call(&scope, f));
        }
        for _ in 0..self.config.main_statements {
            if self.rng.gen_bool(0.3) {
                let f = futures.choose(&mut self.rng).expect("at least one future");
                if self.rng.gen_bool(0.5) {
                    body.push_str(&self.parallel_call(&scope, f));
                    // Mutate an argument array after the call: the task
                    // must not observe it.
                    let arr = scope.arrays.choose(&mut self.rng).expect("arrays").clone();
                    let idx = self.rng.gen_range(0..self.array_len);
                    let _ = writeln!(body, "    LOAD {arr}; CONST_I {idx}; CONST_I 7777; ASTORE;");
                } else {
                    body.push_str(&self.touch(f));
                }
            } else {
                body.push_str(&self.statement(&scope, 0, Some(&futures)));
            }
        }
        for f in &futures {
            body.push_str(&self.touch(f));
        }
        body.push_str("    LOAD facc; PUTSTATIC result_f;\n");
        for g in &scope.int_globals {
            let _ = writeln!(body, "    LOAD acc; GETSTATIC {g}; ADD; STORE acc;");
        }
        body.push_str("    LOAD acc; RET;\n");
        format!("method main() -> Int {{\n{decls}{body}}}\n")
    }

    fn parallel_call(&mut self, scope: &Scope, slot: &FutureSlot) -> String {
        let params = self.parallel[slot.callee].params.clone();
        let mut code = String::from("    ");
        for p in params {
            let arg = match p {
                Param::Int => self.int_expr(scope, 2),
                Param::Float => self.float_expr(scope, 2),
                Param::Array => format!("LOAD {};", scope.arrays.choose(&mut self.rng).expect("arrays")),
            };
            code.push_str(&arg);
            code.push(' ');
        }
        let _ = writeln!(code, "CALL {}; STORE {};", self.parallel[slot.callee].name, slot.name);
        code
    }

    /// Touches `slot` and folds the value into `acc` / `facc`.
    fn touch(&mut self, slot: &FutureSlot) -> String {
        match self.parallel[slot.callee].ret {
            Ret::Int => format!("    LOAD acc; LOAD {}; TOUCH; ADD; STORE acc;\n", slot.name),
            Ret::Float => format!("    LOAD facc; LOAD {}; TOUCH; ADD; STORE facc;\n", slot.name),
            Ret::Array => {
                let idx = self.rng.gen_range(0..self.array_len);
                format!(
                    "    LOAD acc; LOAD {0}; TOUCH; CONST_I {idx}; ALOAD; ADD; LOAD {0}; TOUCH; ALEN; ADD; STORE acc;\n",
                    slot.name
                )
            }
        }
    }

    fn statement(&mut self, scope: &Scope, depth: usize, futures: Option<&[FutureSlot]>) -> String {
        let nest = depth < self.config.max_nesting;
        let choice = self.rng.gen_range(0..if nest { 9 } else { 7 });
        match choice {
            0 | 1 if !scope.writable_ints.is_empty() => {
                let dst = scope.writable_ints.choose(&mut self.rng).expect("non-empty").clone();
                format!("    {} STORE {dst};\n", self.int_expr(scope, 3))
            }
            2 if !scope.floats.is_empty() => {
                let dst = scope.floats.choose(&mut self.rng).expect("non-empty").clone();
                format!("    {} STORE {dst};\n", self.float_expr(scope, 2))
            }
            3 if !scope.arrays.is_empty() => {
                let arr = scope.arrays.choose(&mut self.rng).expect("non-empty").clone();
                let idx = self.rng.gen_range(0..self.array_len);
                format!("    LOAD {arr}; CONST_I {idx}; {} ASTORE;\n", self.int_expr(scope, 2))
            }
            4 if !scope.int_globals.is_empty() => {
                let g = scope.int_globals.choose(&mut self.rng).expect("non-empty").clone();
                format!("    {} PUTSTATIC {g};\n", self.int_expr(scope, 2))
            }
            5 if !scope.float_globals.is_empty() => {
                let g = scope.float_globals.choose(&mut self.rng).expect("non-empty").clone();
                format!("    {} PUTSTATIC {g};\n", self.float_expr(scope, 2))
            }
            6 if scope.ints.contains(&"acc".to_string()) => {
                format!("    LOAD acc; {} ADD; STORE acc;\n", self.int_expr(scope, 3))
            }
            7 => {
                let n = self.rng.gen_range(1..=4);
                let counter = if depth == 0 { "i" } else { "j" };
                let mut inner = scope.clone();
                inner.ints.push(counter.into());
                let mut body = String::new();
                for _ in 0..self.rng.gen_range(1..=3) {
                    body.push_str(&self.loop_statement(&inner, depth + 1, futures));
                }
                self.counted_loop(counter, n, &body)
            }
            8 => {
                let (else_l, end_l) = (self.label("else"), self.label("endif"));
                let cond = format!("{} {} CMP_LT;", self.int_expr(scope, 2), self.int_expr(scope, 2));
                let then = self.statement(scope, depth + 1, futures);
                let other = self.statement(scope, depth + 1, futures);
                format!("    {cond} JZ {else_l};\n{then}    JMP {end_l};\n{else_l}:\n{other}{end_l}:\n")
            }
            _ => format!("    {} STORE t_or_acc;\n", self.int_expr(scope, 1))
                .replace("t_or_acc", scope.writable_ints.first().map(String::as_str).unwrap_or("t")),
        }
    }

    /// A statement inside a loop; in `main` loops may also spawn.
    fn loop_statement(&mut self, scope: &Scope, depth: usize, futures: Option<&[FutureSlot]>) -> String {
        match futures {
            Some(futures) if self.rng.gen_bool(0.35) => {
                let f = futures.choose(&mut self.rng).expect("non-empty");
                let call = self.parallel_call(scope, f);
                let touch = self.touch(f);
                if self.rng.gen_bool(0.5) {
                    call + &touch
                } else {
                    call
                }
            }
            _ => self.statement(scope, depth, futures),
        }
    }

    fn counted_loop(&mut self, counter: &str, n: i64, body: &str) -> String {
        let (top, end) = (self.label("loop"), self.label("endloop"));
        format!(
            "    CONST_I 0; STORE {counter};\n{top}:\n    LOAD {counter}; CONST_I {n}; CMP_LT; JZ {end};\n{body}    LOAD {counter}; CONST_I 1; ADD; STORE {counter};\n    JMP {top};\n{end}:\n"
        )
    }

    fn int_expr(&mut self, scope: &Scope, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.int_leaf(scope);
        }
        match self.rng.gen_range(0..7) {
            0..=2 => {
                let op = ["ADD", "SUB", "MUL"].choose(&mut self.rng).expect("non-empty");
                format!("{} {} {op};", self.int_expr(scope, depth - 1), self.int_expr(scope, depth - 1))
            }
            3 => format!("{} NEG;", self.int_expr(scope, depth - 1)),
            4 => {
                let mut d: i64 = self.rng.gen_range(-9..=9);
                if d == 0 {
                    d = 3;
                }
                format!("{} CONST_I {d}; DIV;", self.int_expr(scope, depth - 1))
            }
            5 if scope.helpers > 0 => {
                let h = self.rng.gen_range(0..scope.helpers);
                format!("{} {} CALL h{h};", self.int_expr(scope, depth - 1), self.int_expr(scope, depth - 1))
            }
            _ => self.int_leaf(scope),
        }
    }

    fn int_leaf(&mut self, scope: &Scope) -> String {
        match self.rng.gen_range(0..6) {
            0 | 1 if !scope.ints.is_empty() => {
                format!("LOAD {};", scope.ints.choose(&mut self.rng).expect("non-empty"))
            }
            2 if !scope.int_globals.is_empty() => {
                format!("GETSTATIC {};", scope.int_globals.choose(&mut self.rng).expect("non-empty"))
            }
            3 if !scope.arrays.is_empty() => {
                let arr = scope.arrays.choose(&mut self.rng).expect("non-empty");
                if self.rng.gen_bool(0.8) {
                    format!("LOAD {arr}; CONST_I {}; ALOAD;", self.rng.gen_range(0..self.array_len))
                } else {
                    format!("LOAD {arr}; ALEN;")
                }
            }
            4 => format!("CONST_I {};", self.rng.gen_range(i64::MIN / 4..i64::MAX / 4)),
            _ => format!("CONST_I {};", self.rng.gen_range(-100..=100)),
        }
    }

    fn float_expr(&mut self, scope: &Scope, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.float_leaf(scope);
        }
        match self.rng.gen_range(0..5) {
            0..=3 => {
                let op = ["ADD", "SUB", "MUL", "DIV"].choose(&mut self.rng).expect("non-empty");
                format!("{} {} {op};", self.float_expr(scope, depth - 1), self.float_expr(scope, depth - 1))
            }
            _ => format!("{} NEG;", self.float_expr(scope, depth - 1)),
        }
    }

    fn float_leaf(&mut self, scope: &Scope) -> String {
        match self.rng.gen_range(0..4) {
            0 | 1 if !scope.floats.is_empty() => {
                format!("LOAD {};", scope.floats.choose(&mut self.rng).expect("non-empty"))
            }
            2 if !scope.float_globals.is_empty() => {
                format!("GETSTATIC {};", scope.float_globals.choose(&mut self.rng).expect("non-empty"))
            }
            _ => format!("CONST_F {:?};", f64::from(self.rng.gen_range(-400i32..=400)) / 16.0),
        }
    }
}

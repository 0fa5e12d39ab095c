//! Constraints on `@Parallel` methods.
//!
//! An annotated method becomes a task that runs on another thread with a
//! private copy of its arguments. For that to preserve the sequential
//! meaning of the program, the code a task can reach must not touch
//! global slots and must not start further parallel work. Reachability is
//! followed through `CALL`s, so a helper that reads a global is flagged as
//! soon as some annotated method can call it.

use std::collections::BTreeSet;

use crate::diag::{DiagCode, Diagnostic};
use crate::il::{Instruction, MethodId, Program};

/// Checks every `@Parallel` method of `program`. An empty result means the
/// program can be transformed; warnings alone do not block it.
///
/// Assumes `validate_program` found no errors. Dangling method or global
/// ids are skipped rather than reported.
pub fn verify_parallel_constraints(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (index, method) in program.methods.iter().enumerate() {
        let Some(annotation) = method.annotation else {
            if method.return_kind.is_future() {
                out.push(Diagnostic::warning(
                    DiagCode::UnusedFutureReturn,
                    &method.name,
                    None,
                    format!("returns {} but is not annotated @Parallel", method.return_kind),
                ));
            }
            continue;
        };
        let name = method.name.as_str();

        if annotation.par_degree < 1 {
            out.push(Diagnostic::error(
                DiagCode::BadParDegree,
                name,
                None,
                format!("parDegree must be at least 1, found {}", annotation.par_degree),
            ));
        }
        if !method.return_kind.is_future() {
            out.push(Diagnostic::error(
                DiagCode::MissingFutureReturn,
                name,
                None,
                format!("@Parallel method must return Future<_>, found {}", method.return_kind),
            ));
        }
        for param in &method.params {
            if !param.kind.is_plain_data() {
                out.push(Diagnostic::error(
                    DiagCode::BadParallelArgument,
                    name,
                    None,
                    format!(
                        "parameter `{}` has kind {}; only Int, Float, Bool and arrays of them may be passed to a task",
                        param.name, param.kind
                    ),
                ));
            }
        }

        for reached in reachable_from(program, MethodId(index as u32)) {
            let callee = &program.methods[reached.0 as usize];
            let via = if reached.0 as usize == index {
                String::new()
            } else {
                format!(" (reached from @Parallel method `{name}`)")
            };
            for (at, instr) in callee.body.iter().enumerate() {
                match instr {
                    Instruction::GetStatic(g) | Instruction::PutStatic(g) => {
                        let global = program.global(*g).map_or("?", |s| s.name.as_str());
                        out.push(Diagnostic::error(
                            DiagCode::FieldAccessInParallel,
                            &callee.name,
                            Some(at),
                            format!("{} of global `{global}`{via}", instr.mnemonic()),
                        ));
                    }
                    Instruction::Call(t) | Instruction::Spawn(t) => {
                        if let Some(target) = program.method(*t).filter(|m| m.is_parallel()) {
                            out.push(Diagnostic::error(
                                DiagCode::NestedParallelCall,
                                &callee.name,
                                Some(at),
                                format!("calls @Parallel method `{}`{via}", target.name),
                            ));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    out
}

/// `root` plus every method reachable from it through `CALL`/`SPAWN`, in
/// ascending id order.
fn reachable_from(program: &Program, root: MethodId) -> BTreeSet<MethodId> {
    let mut seen = BTreeSet::from([root]);
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let Some(method) = program.method(id) else { continue };
        for instr in &method.body {
            if let Instruction::Call(t) | Instruction::Spawn(t) = instr {
                if program.method(*t).is_some() && seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::parse_assembly;

    fn codes(src: &str) -> Vec<DiagCode> {
        verify_parallel_constraints(&parse_assembly(src).unwrap()).into_iter().map(|d| d.code).collect()
    }

    const MAIN: &str = "method main() -> Int { CONST_I 0; RET }";

    #[test]
    fn field_access_in_annotated_method() {
        let src = format!(
            "global total: Int;\n@Parallel(parDegree=2)\nmethod f() -> Future<Int> {{ GETSTATIC total; RET }}\n{MAIN}"
        );
        let d = verify_parallel_constraints(&parse_assembly(&src).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagCode::FieldAccessInParallel);
        assert_eq!(d[0].method, "f");
        assert_eq!(d[0].instruction_index, Some(0));
    }

    #[test]
    fn field_access_through_helper() {
        let src = format!(
            "global total: Int;\nmethod h() -> Int {{ CONST_I 1; PUTSTATIC total; CONST_I 2; RET }}\n\
             @Parallel(parDegree=2)\nmethod f() -> Future<Int> {{ CALL h; RET }}\n{MAIN}"
        );
        let d = verify_parallel_constraints(&parse_assembly(&src).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(
            (d[0].code, d[0].method.as_str(), d[0].instruction_index),
            (DiagCode::FieldAccessInParallel, "h", Some(1))
        );
    }

    #[test]
    fn missing_future_return() {
        let src = format!("@Parallel(parDegree=2)\nmethod f() -> Int {{ CONST_I 1; RET }}\n{MAIN}");
        assert_eq!(codes(&src), vec![DiagCode::MissingFutureReturn]);
    }

    #[test]
    fn bad_par_degree() {
        let src = format!("@Parallel(parDegree=0)\nmethod f() -> Future<Int> {{ CONST_I 1; RET }}\n{MAIN}");
        assert_eq!(codes(&src), vec![DiagCode::BadParDegree]);
    }

    #[test]
    fn nested_parallel_calls() {
        let src = format!(
            "@Parallel(parDegree=2)\nmethod g() -> Future<Int> {{ CONST_I 1; RET }}\n\
             @Parallel(parDegree=2)\nmethod f() -> Future<Int> {{ CALL g; TOUCH; RET }}\n{MAIN}"
        );
        assert_eq!(codes(&src), vec![DiagCode::NestedParallelCall]);

        let recursive =
            format!("@Parallel(parDegree=2)\nmethod f(n: Int) -> Future<Int> {{ LOAD n; CALL f; TOUCH; RET }}\n{MAIN}");
        assert_eq!(codes(&recursive), vec![DiagCode::NestedParallelCall]);
    }

    #[test]
    fn future_arguments_rejected() {
        let src = format!(
            "@Parallel(parDegree=2)\nmethod f(x: Future<Int>, y: Array<Float>) -> Future<Int> {{ CONST_I 1; RET }}\n{MAIN}"
        );
        assert_eq!(codes(&src), vec![DiagCode::BadParallelArgument]);
    }

    #[test]
    fn unannotated_future_return_warns() {
        let src = format!("method h() -> Future<Int> {{ CONST_I 1; RET }}\n{MAIN}");
        let d = verify_parallel_constraints(&parse_assembly(&src).unwrap());
        assert_eq!(d.len(), 1);
        assert!(!d[0].is_error());
        assert_eq!(d[0].code, DiagCode::UnusedFutureReturn);
    }

    #[test]
    fn clean_annotated_method() {
        let src = format!(
            "@Parallel(parDegree=4)\nmethod f(a: Int, xs: Array<Int>) -> Future<Array<Int>> {{ LOAD xs; RET }}\n{MAIN}"
        );
        assert!(codes(&src).is_empty());
    }
}

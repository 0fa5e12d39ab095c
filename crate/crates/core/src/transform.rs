//! Load-time rewriting of annotated call sites.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::diag::{has_errors, Diagnostic};
use crate::il::{validate_program, Instruction, ParallelAnnotation, Program};
use crate::platform::PlatformInfo;
use crate::verifier::verify_parallel_constraints;

/// How calls to one annotated method are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExecutionMode {
    /// Tasks on a pool of `workers` (always at least 2) threads.
    Threaded { workers: u32 },
    /// Synchronous call whose result is wrapped in an already filled future.
    Inline,
}

impl ExecutionMode {
    pub fn workers(&self) -> u32 {
        match self {
            ExecutionMode::Threaded { workers } => *workers,
            ExecutionMode::Inline => 1,
        }
    }

    pub fn is_threaded(&self) -> bool {
        matches!(self, ExecutionMode::Threaded { .. })
    }
}

impl std::fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExecutionMode::Threaded { workers } => write!(f, "Threaded({workers})"),
            ExecutionMode::Inline => f.write_str("Inline"),
        }
    }
}

/// Multithreaded when both the annotation and the host allow at least two
/// processing elements, inline otherwise.
pub fn decide_mode(annotation: ParallelAnnotation, platform: PlatformInfo) -> ExecutionMode {
    let workers = annotation.par_degree.min(platform.cores());
    if workers >= 2 {
        ExecutionMode::Threaded { workers }
    } else {
        ExecutionMode::Inline
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewrittenSite {
    pub method: String,
    pub instruction_index: usize,
    pub target: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformReport {
    pub rewritten_sites: Vec<RewrittenSite>,
    pub mode_per_method: BTreeMap<String, ExecutionMode>,
    #[serde(rename = "elapsed_ms", serialize_with = "serialize_ms")]
    pub elapsed: Duration,
}

fn serialize_ms<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum TransformError {
    #[error("program is already transformed")]
    AlreadyTransformed,
    #[error("program failed verification ({} diagnostics)", .0.len())]
    VerificationFailed(Vec<Diagnostic>),
}

/// Rewrites every `CALL` of a threaded annotated method into `SPAWN`.
///
/// Nothing else changes: methods keep their bodies, no instruction is added
/// or removed, and calls to inline methods stay `CALL`s.
pub fn transform(program: &Program, platform: PlatformInfo) -> Result<(Program, TransformReport), TransformError> {
    let started = Instant::now();
    if program.transformed {
        return Err(TransformError::AlreadyTransformed);
    }
    let mut diags = validate_program(program);
    if !has_errors(&diags) {
        diags.extend(verify_parallel_constraints(program));
    }
    if has_errors(&diags) {
        return Err(TransformError::VerificationFailed(diags));
    }

    let modes: Vec<Option<ExecutionMode>> =
        program.methods.iter().map(|m| m.annotation.map(|a| decide_mode(a, platform))).collect();

    let mut out = program.clone();
    out.transformed = true;
    let mut rewritten_sites = Vec::new();
    for method in &mut out.methods {
        for (index, instr) in method.body.iter_mut().enumerate() {
            if let Instruction::Call(target) = *instr {
                if modes[target.0 as usize].is_some_and(|m| m.is_threaded()) {
                    *instr = Instruction::Spawn(target);
                    rewritten_sites.push(RewrittenSite {
                        method: method.name.clone(),
                        instruction_index: index,
                        target: program.methods[target.0 as usize].name.clone(),
                    });
                }
            }
        }
    }

    let mode_per_method =
        program.methods.iter().zip(&modes).filter_map(|(m, mode)| mode.map(|mode| (m.name.clone(), mode))).collect();
    debug_assert!(validate_program(&out).is_empty());
    Ok((out, TransformReport { rewritten_sites, mode_per_method, elapsed: started.elapsed() }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::parse_assembly;

    fn platform(cores: u32) -> PlatformInfo {
        PlatformInfo::overridden(cores).unwrap()
    }

    #[test]
    fn mode_rule() {
        let a = ParallelAnnotation::new;
        assert_eq!(decide_mode(a(4), platform(2)), ExecutionMode::Threaded { workers: 2 });
        assert_eq!(decide_mode(a(2), platform(8)), ExecutionMode::Threaded { workers: 2 });
        assert_eq!(decide_mode(a(4), platform(1)), ExecutionMode::Inline);
        assert_eq!(decide_mode(a(1), platform(8)), ExecutionMode::Inline);
    }

    #[test]
    fn no_annotations_is_a_noop() {
        let p = parse_assembly("method main() -> Int { CONST_I 0; RET }").unwrap();
        let (out, report) = transform(&p, platform(4)).unwrap();
        assert!(report.rewritten_sites.is_empty());
        assert!(report.mode_per_method.is_empty());
        assert_eq!(out.methods, p.methods);
        assert!(out.transformed);
    }

    const TWO_SITES: &str = "@Parallel(parDegree=2)\nmethod f(x: Int) -> Future<Int> { LOAD x; RET }\n\
        method main() -> Int { CONST_I 1; CALL f; TOUCH; CONST_I 2; CALL f; TOUCH; ADD; RET }";

    #[test]
    fn rewrites_threaded_sites_only() {
        let p = parse_assembly(TWO_SITES).unwrap();
        let (out, report) = transform(&p, platform(4)).unwrap();
        assert_eq!(report.rewritten_sites.len(), 2);
        assert_eq!(report.rewritten_sites[0].instruction_index, 1);
        assert_eq!(report.rewritten_sites[1].instruction_index, 4);
        assert_eq!(out.methods[1].body[1], Instruction::Spawn(crate::il::MethodId(0)));
        assert_eq!(report.mode_per_method["f"], ExecutionMode::Threaded { workers: 2 });

        let (single, report) = transform(&p, platform(1)).unwrap();
        assert!(report.rewritten_sites.is_empty());
        assert_eq!(report.mode_per_method["f"], ExecutionMode::Inline);
        assert_eq!(single.methods, p.methods);
    }

    #[test]
    fn twice_is_rejected() {
        let p = parse_assembly(TWO_SITES).unwrap();
        let (out, _) = transform(&p, platform(4)).unwrap();
        assert!(matches!(transform(&out, platform(4)), Err(TransformError::AlreadyTransformed)));
    }

    #[test]
    fn verification_failure_blocks() {
        let p = parse_assembly(
            "@Parallel(parDegree=2)\nmethod f() -> Int { CONST_I 1; RET }\nmethod main() -> Int { CALL f; RET }",
        )
        .unwrap();
        match transform(&p, platform(4)) {
            Err(TransformError::VerificationFailed(d)) => {
                assert_eq!(d[0].code, crate::diag::DiagCode::MissingFutureReturn)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

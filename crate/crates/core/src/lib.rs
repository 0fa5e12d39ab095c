//! Annotation-driven parallelization of a small stack IL.
//!
//! Methods marked `@Parallel(parDegree=N)` are candidates for asynchronous
//! execution. At load time the [`transform`](transform::transform) pass
//! looks at the host's processor count and rewrites their call sites into
//! `SPAWN`s, which the [`runtime`] executes on bounded worker pools,
//! handing back wait-by-necessity futures. Ignoring the annotations (not
//! transforming) runs the very same program sequentially with the same
//! results.
//!
//! ```
//! use pal_core::{il, runtime, transform, PlatformInfo};
//!
//! let src = "@Parallel(parDegree=2)
//! method square(x: Int) -> Future<Int> { LOAD x; LOAD x; MUL; RET }
//! method main() -> Int { CONST_I 7; CALL square; TOUCH; RET }";
//! let program = il::parse_assembly(src).unwrap();
//! let platform = PlatformInfo::overridden(4).unwrap();
//! let (parallel, report) = transform::transform(&program, platform).unwrap();
//! assert_eq!(report.rewritten_sites.len(), 1);
//! let out = runtime::run_on(&parallel, platform).unwrap();
//! assert_eq!(out.value.as_int(), Some(49));
//! assert_eq!(out.stats.tasks_spawned, 1);
//! ```

pub mod bench;
pub mod diag;
pub mod gen;
pub mod il;
pub mod platform;
pub mod runtime;
pub mod transform;
pub mod verifier;

pub use diag::{DiagCode, Diagnostic, Severity};
pub use il::{Instruction, MethodDef, ParallelAnnotation, Program, ValueKind};
pub use platform::{PlatformInfo, PlatformSource};
pub use runtime::{ExecutionStats, FutureRef, RunOutcome, RuntimeConfig, Trap, Value};
pub use transform::{decide_mode, ExecutionMode, TransformReport};
pub use verifier::verify_parallel_constraints;

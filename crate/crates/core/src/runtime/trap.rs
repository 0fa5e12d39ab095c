use std::fmt;

/// A runtime fault. Traps end the thread of control that raised them; a
/// trap inside a task is stored in the task's future and re-raised where
/// the future is touched.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Trap {
    #[error("integer division by zero")]
    DivideByZero,
    #[error("array index {index} out of bounds for length {len}")]
    OutOfBoundsArray { index: i64, len: usize },
    #[error("invalid array length {0}")]
    InvalidArrayLength(i64),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("operand stack underflow")]
    StackUnderflow,
    #[error("call depth limit exceeded")]
    CallDepthExceeded,
    #[error("global slot accessed from a spawned task")]
    GlobalAccessInTask,
    #[error("SPAWN executed inside a spawned task")]
    SpawnInTask,
    #[error("HALT executed inside a spawned task")]
    HaltInTask,
    #[error("spawned task trapped: {0}")]
    TaskTrapped(Box<TrapInfo>),
    #[error("worker pool shut down before the task ran")]
    PoolShutdown,
    #[error("deadlock: touched a future that no live worker can fill")]
    DeadlockDetected,
}

impl Trap {
    pub(crate) fn mismatch(op: &str, found: &str) -> Trap {
        Trap::TypeMismatch(format!("{op} cannot operate on {found}"))
    }

    /// The innermost trap, looking through task boundaries.
    pub fn root_cause(&self) -> &Trap {
        match self {
            Trap::TaskTrapped(info) => info.trap.root_cause(),
            other => other,
        }
    }
}

/// A trap together with where it was raised.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapInfo {
    pub trap: Trap,
    pub method: String,
    pub instruction_index: usize,
}

impl fmt::Display for TrapInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}: {}", self.method, self.instruction_index, self.trap)
    }
}

impl std::error::Error for TrapInfo {}

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

/// Every diagnostic the structural validator and the parallel-constraint
/// verifier can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiagCode {
    // structural
    InvalidIdentifier,
    DuplicateGlobal,
    DuplicateMethod,
    DuplicateSlot,
    MissingEntry,
    EntryHasParams,
    InvalidKind,
    MissingReturn,
    InvalidJumpTarget,
    InvalidSlot,
    UnknownMethod,
    UnknownGlobal,
    SpawnInUntransformed,
    SpawnOfUnannotated,
    // parallel constraints
    FieldAccessInParallel,
    MissingFutureReturn,
    BadParDegree,
    NestedParallelCall,
    BadParallelArgument,
    UnusedFutureReturn,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        use DiagCode::*;
        match self {
            InvalidIdentifier => "InvalidIdentifier",
            DuplicateGlobal => "DuplicateGlobal",
            DuplicateMethod => "DuplicateMethod",
            DuplicateSlot => "DuplicateSlot",
            MissingEntry => "MissingEntry",
            EntryHasParams => "EntryHasParams",
            InvalidKind => "InvalidKind",
            MissingReturn => "MissingReturn",
            InvalidJumpTarget => "InvalidJumpTarget",
            InvalidSlot => "InvalidSlot",
            UnknownMethod => "UnknownMethod",
            UnknownGlobal => "UnknownGlobal",
            SpawnInUntransformed => "SpawnInUntransformed",
            SpawnOfUnannotated => "SpawnOfUnannotated",
            FieldAccessInParallel => "FieldAccessInParallel",
            MissingFutureReturn => "MissingFutureReturn",
            BadParDegree => "BadParDegree",
            NestedParallelCall => "NestedParallelCall",
            BadParallelArgument => "BadParallelArgument",
            UnusedFutureReturn => "UnusedFutureReturn",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    /// Method the diagnostic is attached to; empty for program-level issues.
    pub method: String,
    pub instruction_index: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagCode, method: impl Into<String>, index: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            code,
            method: method.into(),
            instruction_index: index,
            message: message.into(),
        }
    }

    pub fn warning(
        code: DiagCode,
        method: impl Into<String>,
        index: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            severity: Severity::Warning,
            code,
            method: method.into(),
            instruction_index: index,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `SEVERITY CODE method[#idx]: message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.severity, self.code, self.method)?;
        if let Some(i) = self.instruction_index {
            write!(f, "#{i}")?;
        }
        write!(f, ": {}", self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_format() {
        let d = Diagnostic::error(DiagCode::FieldAccessInParallel, "createLines", Some(3), "reads global `total`");
        assert_eq!(d.to_string(), "ERROR FieldAccessInParallel createLines#3: reads global `total`");
        let w = Diagnostic::warning(DiagCode::UnusedFutureReturn, "helper", None, "x");
        assert_eq!(w.to_string(), "WARNING UnusedFutureReturn helper: x");
    }
}

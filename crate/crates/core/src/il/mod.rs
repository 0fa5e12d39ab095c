//! The stack-based intermediate language.
//!
//! A [`Program`] is a flat list of methods plus a table of named global
//! slots. Methods address their parameters and locals by slot index
//! (parameters first), call each other by name, and may carry a
//! [`ParallelAnnotation`] marking them as candidates for asynchronous
//! execution.

mod emit;
mod parse;
mod validate;

use std::fmt;

pub use emit::emit_assembly;
pub use parse::{
    parse_assembly, parse_assembly_bytes, parse_with_mode, ParseError, ParseErrorKind, ParseErrors, ParseMode,
};
pub use validate::validate_program;

/// Static type of a slot, array element, or method result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Int,
    Float,
    Bool,
    Array(Box<ValueKind>),
    Future(Box<ValueKind>),
    Void,
}

impl ValueKind {
    pub fn array_of(elem: ValueKind) -> Self {
        ValueKind::Array(Box::new(elem))
    }

    pub fn future_of(inner: ValueKind) -> Self {
        ValueKind::Future(Box::new(inner))
    }

    pub fn is_future(&self) -> bool {
        matches!(self, ValueKind::Future(_))
    }

    /// `Int`, `Float`, `Bool`, or an array (of arrays) of those.
    pub fn is_plain_data(&self) -> bool {
        match self {
            ValueKind::Int | ValueKind::Float | ValueKind::Bool => true,
            ValueKind::Array(elem) => elem.is_plain_data(),
            ValueKind::Future(_) | ValueKind::Void => false,
        }
    }

    /// Checks the structural rules for a kind used in a slot or array:
    /// no `Void` below the top level and no future of a future.
    pub(crate) fn well_formed(&self, allow_void: bool) -> Result<(), &'static str> {
        match self {
            ValueKind::Void if allow_void => Ok(()),
            ValueKind::Void => Err("Void is only allowed as a return kind"),
            ValueKind::Int | ValueKind::Float | ValueKind::Bool => Ok(()),
            ValueKind::Array(elem) => elem.well_formed(false),
            ValueKind::Future(inner) => {
                if inner.is_future() {
                    Err("futures may not be nested")
                } else {
                    inner.well_formed(false)
                }
            }
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Int => f.write_str("Int"),
            ValueKind::Float => f.write_str("Float"),
            ValueKind::Bool => f.write_str("Bool"),
            ValueKind::Void => f.write_str("Void"),
            ValueKind::Array(elem) => write!(f, "Array<{elem}>"),
            ValueKind::Future(inner) => write!(f, "Future<{inner}>"),
        }
    }
}

/// The `@Parallel(parDegree=N)` marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParallelAnnotation {
    /// Maximum number of processing elements for the method's tasks. Zero is
    /// representable so the verifier can reject it.
    pub par_degree: u32,
}

impl ParallelAnnotation {
    pub fn new(par_degree: u32) -> Self {
        Self { par_degree }
    }
}

#[derive(Debug, Clone)]
pub enum Instruction {
    ConstI(i64),
    ConstF(f64),
    Load(u32),
    Store(u32),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    CmpLt,
    CmpEq,
    Jmp(u32),
    Jz(u32),
    Call(MethodId),
    Spawn(MethodId),
    Touch,
    NewArr(ValueKind),
    ALoad,
    AStore,
    ALen,
    GetStatic(GlobalId),
    PutStatic(GlobalId),
    Ret,
    Halt,
}

/// Index into [`Program::methods`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId(pub u32);

/// Index into [`Program::globals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalId(pub u32);

impl PartialEq for Instruction {
    fn eq(&self, other: &Self) -> bool {
        use Instruction::*;
        match (self, other) {
            (ConstI(a), ConstI(b)) => a == b,
            // Signed zeros differ; all NaNs are one constant.
            (ConstF(a), ConstF(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            (Load(a), Load(b)) | (Store(a), Store(b)) => a == b,
            (Jmp(a), Jmp(b)) | (Jz(a), Jz(b)) => a == b,
            (Call(a), Call(b)) | (Spawn(a), Spawn(b)) => a == b,
            (NewArr(a), NewArr(b)) => a == b,
            (GetStatic(a), GetStatic(b)) | (PutStatic(a), PutStatic(b)) => a == b,
            _ => std::mem::discriminant(self) == std::mem::discriminant(other) && !self.has_operand(),
        }
    }
}

impl Instruction {
    pub fn mnemonic(&self) -> &'static str {
        use Instruction::*;
        match self {
            ConstI(_) => "CONST_I",
            ConstF(_) => "CONST_F",
            Load(_) => "LOAD",
            Store(_) => "STORE",
            Add => "ADD",
            Sub => "SUB",
            Mul => "MUL",
            Div => "DIV",
            Neg => "NEG",
            CmpLt => "CMP_LT",
            CmpEq => "CMP_EQ",
            Jmp(_) => "JMP",
            Jz(_) => "JZ",
            Call(_) => "CALL",
            Spawn(_) => "SPAWN",
            Touch => "TOUCH",
            NewArr(_) => "NEWARR",
            ALoad => "ALOAD",
            AStore => "ASTORE",
            ALen => "ALEN",
            GetStatic(_) => "GETSTATIC",
            PutStatic(_) => "PUTSTATIC",
            Ret => "RET",
            Halt => "HALT",
        }
    }

    fn has_operand(&self) -> bool {
        use Instruction::*;
        matches!(
            self,
            ConstI(_)
                | ConstF(_)
                | Load(_)
                | Store(_)
                | Jmp(_)
                | Jz(_)
                | Call(_)
                | Spawn(_)
                | NewArr(_)
                | GetStatic(_)
                | PutStatic(_)
        )
    }

    /// Whether control can continue to the next instruction.
    pub fn falls_through(&self) -> bool {
        !matches!(self, Instruction::Jmp(_) | Instruction::Ret | Instruction::Halt)
    }

    pub fn jump_target(&self) -> Option<u32> {
        match self {
            Instruction::Jmp(t) | Instruction::Jz(t) => Some(*t),
            _ => None,
        }
    }
}

/// A named, typed slot: a parameter, a local, or a global.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Slot {
    pub name: String,
    pub kind: ValueKind,
}

impl Slot {
    pub fn new(name: impl Into<String>, kind: ValueKind) -> Self {
        Self { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDef {
    pub name: String,
    pub params: Vec<Slot>,
    pub locals: Vec<Slot>,
    pub return_kind: ValueKind,
    pub body: Vec<Instruction>,
    pub annotation: Option<ParallelAnnotation>,
}

impl MethodDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn slot_count(&self) -> usize {
        self.params.len() + self.locals.len()
    }

    /// Slot `index` in the combined parameter-then-local numbering.
    pub fn slot(&self, index: u32) -> Option<&Slot> {
        let index = index as usize;
        if index < self.params.len() {
            self.params.get(index)
        } else {
            self.locals.get(index - self.params.len())
        }
    }

    pub fn slots(&self) -> impl Iterator<Item = &Slot> {
        self.params.iter().chain(self.locals.iter())
    }

    pub fn is_parallel(&self) -> bool {
        self.annotation.is_some()
    }
}

/// A whole IL program, before or after transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub name: String,
    pub globals: Vec<Slot>,
    pub methods: Vec<MethodDef>,
    pub entry: String,
    pub transformed: bool,
}

impl Program {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            globals: Vec::new(),
            methods: Vec::new(),
            entry: "main".to_string(),
            transformed: false,
        }
    }

    pub fn method(&self, id: MethodId) -> Option<&MethodDef> {
        self.methods.get(id.0 as usize)
    }

    pub fn method_id(&self, name: &str) -> Option<MethodId> {
        self.methods.iter().position(|m| m.name == name).map(|i| MethodId(i as u32))
    }

    pub fn method_by_name(&self, name: &str) -> Option<&MethodDef> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn global(&self, id: GlobalId) -> Option<&Slot> {
        self.globals.get(id.0 as usize)
    }

    pub fn entry_id(&self) -> Option<MethodId> {
        self.method_id(&self.entry)
    }
}

/// Lexical rule shared by the parser, emitter, and validator.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

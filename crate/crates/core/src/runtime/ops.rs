//! Internal instruction form executed by the interpreter.
//!
//! Every method body is lowered twice, index for index: `plain` mirrors the
//! IL one to one, and `fast` additionally replaces common sequences such as
//! `LOAD a; LOAD b; MUL; STORE c` by a single fused op at the index of the
//! first instruction. The instructions a fused op covers keep their plain
//! form in `fast` too, so jumps into the middle of a sequence stay valid.
//! A fused op only handles the all-scalar, trap-free case; anything else
//! falls back to the plain op at the same index, which keeps traps and
//! their positions identical to unfused execution.

use crate::il::{Instruction, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    CmpLt,
    CmpEq,
}

impl BinOp {
    fn of(ins: &Instruction) -> Option<BinOp> {
        Some(match ins {
            Instruction::Add => BinOp::Add,
            Instruction::Sub => BinOp::Sub,
            Instruction::Mul => BinOp::Mul,
            Instruction::Div => BinOp::Div,
            Instruction::CmpLt => BinOp::CmpLt,
            Instruction::CmpEq => BinOp::CmpEq,
            _ => return None,
        })
    }

    fn is_compare(self) -> bool {
        matches!(self, BinOp::CmpLt | BinOp::CmpEq)
    }
}

/// Where a fused op takes an input from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Src<T> {
    Stack,
    Local(u32),
    Const(T),
}

/// Operand class of a fused op, fixed at lowering time from the declared
/// kinds of the local slots and constants involved.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Class {
    Int,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Operand {
    Stack,
    Local(u32, Class),
    Int(i64),
    Float(f64),
}

impl Operand {
    fn of(ins: &Instruction, slots: &[ValueKind]) -> Option<Operand> {
        Some(match ins {
            Instruction::Load(s) => match slots.get(*s as usize)? {
                ValueKind::Int => Operand::Local(*s, Class::Int),
                ValueKind::Float => Operand::Local(*s, Class::Float),
                _ => return None,
            },
            Instruction::ConstI(v) => Operand::Int(*v),
            Instruction::ConstF(v) => Operand::Float(*v),
            _ => return None,
        })
    }

    fn class(self) -> Option<Class> {
        match self {
            Operand::Stack => None,
            Operand::Local(_, c) => Some(c),
            Operand::Int(_) => Some(Class::Int),
            Operand::Float(_) => Some(Class::Float),
        }
    }

    fn int(self) -> Option<Src<i64>> {
        match self {
            Operand::Stack => Some(Src::Stack),
            Operand::Local(s, Class::Int) => Some(Src::Local(s)),
            Operand::Int(v) => Some(Src::Const(v)),
            _ => None,
        }
    }

    fn float(self) -> Option<Src<f64>> {
        match self {
            Operand::Stack => Some(Src::Stack),
            Operand::Local(s, Class::Float) => Some(Src::Local(s)),
            Operand::Float(v) => Some(Src::Const(v)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
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
    Call(u32),
    Spawn(u32),
    Touch,
    /// Index into [`Lowered::kinds`].
    NewArr(u32),
    ALoad,
    AStore,
    ALen,
    GetStatic(u32),
    PutStatic(u32),
    Ret,
    Halt,
    /// `a op b` on integers, pushed or stored into a local of the result
    /// kind; covers `len` instructions.
    IntBin {
        op: BinOp,
        a: Src<i64>,
        b: Src<i64>,
        dst: Option<u32>,
        len: u8,
    },
    FloatBin {
        op: BinOp,
        a: Src<f64>,
        b: Src<f64>,
        dst: Option<u32>,
        len: u8,
    },
    /// Comparison followed by `JZ target`; covers `len` instructions.
    IntCmpJz {
        op: BinOp,
        a: Src<i64>,
        b: Src<i64>,
        target: u32,
        len: u8,
    },
    FloatCmpJz {
        op: BinOp,
        a: Src<f64>,
        b: Src<f64>,
        target: u32,
        len: u8,
    },
}

pub(crate) struct Lowered {
    pub plain: Vec<Op>,
    pub fast: Vec<Op>,
    /// Element kinds used by `NEWARR`.
    pub kinds: Vec<ValueKind>,
}

/// `slots` are the declared kinds of the method's parameters and locals.
pub(crate) fn lower(body: &[Instruction], slots: &[ValueKind]) -> Lowered {
    let mut kinds: Vec<ValueKind> = Vec::new();
    let plain: Vec<Op> = body
        .iter()
        .map(|ins| match ins {
            Instruction::ConstI(v) => Op::ConstI(*v),
            Instruction::ConstF(v) => Op::ConstF(*v),
            Instruction::Load(s) => Op::Load(*s),
            Instruction::Store(s) => Op::Store(*s),
            Instruction::Add => Op::Add,
            Instruction::Sub => Op::Sub,
            Instruction::Mul => Op::Mul,
            Instruction::Div => Op::Div,
            Instruction::Neg => Op::Neg,
            Instruction::CmpLt => Op::CmpLt,
            Instruction::CmpEq => Op::CmpEq,
            Instruction::Jmp(t) => Op::Jmp(*t),
            Instruction::Jz(t) => Op::Jz(*t),
            Instruction::Call(m) => Op::Call(m.0),
            Instruction::Spawn(m) => Op::Spawn(m.0),
            Instruction::Touch => Op::Touch,
            Instruction::NewArr(kind) => {
                let idx = kinds.iter().position(|k| k == kind).unwrap_or_else(|| {
                    kinds.push(kind.clone());
                    kinds.len() - 1
                });
                Op::NewArr(idx as u32)
            }
            Instruction::ALoad => Op::ALoad,
            Instruction::AStore => Op::AStore,
            Instruction::ALen => Op::ALen,
            Instruction::GetStatic(g) => Op::GetStatic(g.0),
            Instruction::PutStatic(g) => Op::PutStatic(g.0),
            Instruction::Ret => Op::Ret,
            Instruction::Halt => Op::Halt,
        })
        .collect();
    let fast = (0..body.len()).map(|i| fuse(&body[i..], slots).unwrap_or(plain[i])).collect();
    Lowered { plain, fast, kinds }
}

/// The fused op for the sequence starting at `code[0]`, if any.
fn fuse(code: &[Instruction], slots: &[ValueKind]) -> Option<Op> {
    let at = |i: usize| code.get(i);
    let operand = |i: usize| at(i).and_then(|ins| Operand::of(ins, slots));
    let binop = |i: usize| at(i).and_then(BinOp::of);
    let (op, a, b, len) = match (operand(0), operand(1)) {
        (Some(a), Some(b)) if binop(2).is_some() => (binop(2)?, a, b, 3u8),
        (Some(b), _) if binop(1).is_some() => (binop(1)?, Operand::Stack, b, 2),
        _ => (binop(0)?, Operand::Stack, Operand::Stack, 1),
    };
    let next = at(len as usize);
    let dst_kind = match next {
        Some(Instruction::Store(slot)) => slots.get(*slot as usize),
        _ => None,
    };
    // Both operands on the stack: the destination decides the class.
    let class = match (a.class(), b.class()) {
        (Some(x), Some(y)) if x != y => return None,
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) if op.is_compare() => return None,
        (None, None) => match dst_kind {
            Some(ValueKind::Int) => Class::Int,
            Some(ValueKind::Float) => Class::Float,
            _ => return None,
        },
    };
    let result_kind = match (op.is_compare(), class) {
        (true, _) => ValueKind::Bool,
        (false, Class::Int) => ValueKind::Int,
        (false, Class::Float) => ValueKind::Float,
    };

    match next {
        Some(Instruction::Jz(target)) if op.is_compare() => {
            let (target, len) = (*target, len + 1);
            Some(match class {
                Class::Int => Op::IntCmpJz { op, a: a.int()?, b: b.int()?, target, len },
                Class::Float => Op::FloatCmpJz { op, a: a.float()?, b: b.float()?, target, len },
            })
        }
        Some(Instruction::Store(slot)) if dst_kind == Some(&result_kind) => {
            let (dst, len) = (Some(*slot), len + 1);
            Some(match class {
                Class::Int => Op::IntBin { op, a: a.int()?, b: b.int()?, dst, len },
                Class::Float => Op::FloatBin { op, a: a.float()?, b: b.float()?, dst, len },
            })
        }
        _ if len > 1 => Some(match class {
            Class::Int => Op::IntBin { op, a: a.int()?, b: b.int()?, dst: None, len },
            Class::Float => Op::FloatBin { op, a: a.float()?, b: b.float()?, dst: None, len },
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::parse_assembly;

    fn lowered(src: &str) -> Lowered {
        let p = parse_assembly(&format!(
            "method main() -> Int {{ local a: Int; local b: Int; local f: Float; local g: Float; {src} }}"
        ))
        .unwrap();
        let m = &p.methods[0];
        let slots: Vec<ValueKind> = m.slots().map(|s| s.kind.clone()).collect();
        lower(&m.body, &slots)
    }

    #[test]
    fn fuses_load_load_op_store() {
        let l = lowered("LOAD a; LOAD b; MUL; STORE a; LOAD a; RET");
        assert_eq!(l.fast[0], Op::IntBin { op: BinOp::Mul, a: Src::Local(0), b: Src::Local(1), dst: Some(0), len: 4 });
        // Covered positions keep a usable form for jumps into the middle.
        assert_eq!(l.fast[1], Op::IntBin { op: BinOp::Mul, a: Src::Stack, b: Src::Local(1), dst: Some(0), len: 3 });
        assert_eq!(l.fast[2], Op::IntBin { op: BinOp::Mul, a: Src::Stack, b: Src::Stack, dst: Some(0), len: 2 });
        assert_eq!(l.plain[0], Op::Load(0));
        assert_eq!(l.fast[3], Op::Store(0));
    }

    #[test]
    fn fuses_compare_and_branch() {
        let l = lowered("top: LOAD f; CONST_F 4.0; CMP_LT; JZ out; JMP top; out: CONST_I 0; RET");
        assert_eq!(
            l.fast[0],
            Op::FloatCmpJz { op: BinOp::CmpLt, a: Src::Local(2), b: Src::Const(4.0), target: 5, len: 4 }
        );
    }

    #[test]
    fn mixed_or_mismatched_kinds_are_not_fused() {
        let l = lowered("LOAD a; LOAD f; ADD; STORE b; LOAD f; LOAD g; ADD; STORE a; CONST_I 0; RET");
        assert_eq!(l.fast[0], Op::Load(0));
        assert_eq!(l.fast[4], Op::FloatBin { op: BinOp::Add, a: Src::Local(2), b: Src::Local(3), dst: None, len: 3 });
    }

    #[test]
    fn lone_operator_is_not_fused() {
        let l = lowered("LOAD a; NEG; LOAD b; ADD; RET");
        assert_eq!(l.fast[0], Op::Load(0));
        assert_eq!(l.fast[1], Op::Neg);
        assert_eq!(l.fast[2], Op::IntBin { op: BinOp::Add, a: Src::Stack, b: Src::Local(1), dst: None, len: 2 });
        assert_eq!(l.fast[3], Op::Add);
    }
}

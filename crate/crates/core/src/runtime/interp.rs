//! The bytecode interpreter shared by the main thread and pool workers.

use std::mem;
use std::sync::Arc;

use super::future::FutureRef;
use super::ops::{lower, BinOp, Lowered, Op, Src};
use super::trap::{Trap, TrapInfo};
use super::value::{ArrayRef, Value};
use crate::il::{GlobalId, MethodId, Program, ValueKind};

const MAX_CALL_DEPTH: usize = 4096;
/// Upper bound on `NEWARR` lengths, so a bad operand traps instead of
/// aborting the process on allocation failure.
const MAX_ARRAY_LEN: i64 = 1 << 28;

/// Per-method facts computed once before execution.
pub(crate) struct MethodMeta {
    pub arity: usize,
    pub slot_kinds: Vec<ValueKind>,
    pub returns_void: bool,
    pub wraps_future: bool,
    /// Annotated methods receive deep copies of their arguments in every
    /// mode, so inline and threaded execution observe the same data.
    pub parallel: bool,
}

/// A validated program plus what the interpreter derives from it.
pub(crate) struct Linked {
    pub program: Program,
    pub meta: Vec<MethodMeta>,
    pub code: Vec<Lowered>,
}

impl Linked {
    pub fn new(program: Program) -> Arc<Self> {
        let meta = program
            .methods
            .iter()
            .map(|m| MethodMeta {
                arity: m.arity(),
                slot_kinds: m.slots().map(|s| s.kind.clone()).collect(),
                returns_void: m.return_kind == ValueKind::Void,
                wraps_future: m.return_kind.is_future(),
                parallel: m.is_parallel(),
            })
            .collect();
        let code = program
            .methods
            .iter()
            .zip(&meta)
            .map(|(m, meta): (_, &MethodMeta)| lower(&m.body, &meta.slot_kinds))
            .collect();
        Arc::new(Self { program, meta, code })
    }
}

pub(crate) enum SpawnOutcome {
    Spawned(FutureRef),
    /// The method's pool runs inline; the arguments come back to be used
    /// for an ordinary call.
    Inline(Vec<Value>),
}

/// What differs between the main thread of control and a pool worker.
pub(crate) trait Env {
    const IS_TASK: bool;
    fn get_static(&mut self, id: GlobalId) -> Result<Value, Trap>;
    fn put_static(&mut self, id: GlobalId, value: Value) -> Result<(), Trap>;
    fn spawn(&mut self, method: MethodId, args: Vec<Value>) -> Result<SpawnOutcome, Trap>;
    fn touch(&mut self, future: &FutureRef) -> Result<Value, Trap>;
    /// Called for every synchronous entry into an annotated method.
    fn parallel_call(&mut self, _method: MethodId) {}
}

struct Frame {
    method: usize,
    /// Index of the instruction after the call.
    return_pc: usize,
    locals_base: usize,
    stack_base: usize,
}

#[derive(Clone, Copy)]
enum Num {
    I(i64),
    F(f64),
    B(bool),
}

#[inline(always)]
fn num(v: &Value) -> Option<Num> {
    match v {
        Value::Int(x) => Some(Num::I(*x)),
        Value::Float(x) => Some(Num::F(*x)),
        Value::Bool(x) => Some(Num::B(*x)),
        _ => None,
    }
}

/// The trap-free cases of the binary operators; `None` means "take the
/// slow path", which reproduces any trap.
#[inline(always)]
fn eval(op: BinOp, x: Num, y: Num) -> Option<Value> {
    use Num::*;
    Some(match (op, x, y) {
        (BinOp::Add, I(a), I(b)) => Value::Int(a.wrapping_add(b)),
        (BinOp::Add, F(a), F(b)) => Value::Float(a + b),
        (BinOp::Sub, I(a), I(b)) => Value::Int(a.wrapping_sub(b)),
        (BinOp::Sub, F(a), F(b)) => Value::Float(a - b),
        (BinOp::Mul, I(a), I(b)) => Value::Int(a.wrapping_mul(b)),
        (BinOp::Mul, F(a), F(b)) => Value::Float(a * b),
        (BinOp::Div, I(_), I(0)) => return None,
        (BinOp::Div, I(a), I(b)) => Value::Int(a.wrapping_div(b)),
        (BinOp::Div, F(a), F(b)) => Value::Float(a / b),
        (BinOp::CmpLt, I(a), I(b)) => Value::Bool(a < b),
        (BinOp::CmpLt, F(a), F(b)) => Value::Bool(a < b),
        (BinOp::CmpEq, I(a), I(b)) => Value::Bool(a == b),
        (BinOp::CmpEq, F(a), F(b)) => Value::Bool(a == b),
        (BinOp::CmpEq, B(a), B(b)) => Value::Bool(a == b),
        _ => return None,
    })
}

#[inline(always)]
fn eval_int(op: BinOp, a: i64, b: i64) -> Option<Value> {
    Some(match op {
        BinOp::Add => Value::Int(a.wrapping_add(b)),
        BinOp::Sub => Value::Int(a.wrapping_sub(b)),
        BinOp::Mul => Value::Int(a.wrapping_mul(b)),
        BinOp::Div if b == 0 => return None,
        BinOp::Div => Value::Int(a.wrapping_div(b)),
        BinOp::CmpLt => Value::Bool(a < b),
        BinOp::CmpEq => Value::Bool(a == b),
    })
}

#[inline(always)]
fn eval_float(op: BinOp, a: f64, b: f64) -> Option<Value> {
    Some(match op {
        BinOp::Add => Value::Float(a + b),
        BinOp::Sub => Value::Float(a - b),
        BinOp::Mul => Value::Float(a * b),
        BinOp::Div => Value::Float(a / b),
        BinOp::CmpLt => Value::Bool(a < b),
        BinOp::CmpEq => Value::Bool(a == b),
    })
}

/// Drops `v`, skipping the drop glue for scalars.
#[inline(always)]
fn discard(v: Value) {
    match v {
        Value::Array(_) | Value::Future(_) => drop(v),
        _ => mem::forget(v),
    }
}

#[inline(always)]
fn fits_scalar_slot(v: &Value, kind: &ValueKind) -> bool {
    matches!(
        (v, kind),
        (Value::Int(_), ValueKind::Int) | (Value::Float(_), ValueKind::Float) | (Value::Bool(_), ValueKind::Bool)
    )
}

/// Runs `entry` with `args` to completion and returns its raw result (a
/// future-returning method yields its payload, unwrapped).
pub(crate) fn execute<E: Env>(
    linked: &Linked,
    env: &mut E,
    entry: MethodId,
    args: Vec<Value>,
) -> Result<Value, TrapInfo> {
    let mut method = entry.0 as usize;
    let mut pc = 0usize;
    let mut locals: Vec<Value> = Vec::with_capacity(64);
    let mut stack: Vec<Value> = Vec::with_capacity(64);
    let mut frames: Vec<Frame> = Vec::new();
    let mut locals_base = 0usize;
    let mut stack_base = 0usize;

    let methods = &linked.program.methods;
    let mut code: &Lowered = &linked.code[method];
    let mut meta = &linked.meta[method];

    macro_rules! trap {
        ($t:expr) => {
            return Err(TrapInfo { trap: $t, method: methods[method].name.clone(), instruction_index: pc - 1 })
        };
    }
    macro_rules! pop {
        () => {
            if stack.len() > stack_base {
                stack.pop().unwrap()
            } else {
                trap!(Trap::StackUnderflow)
            }
        };
    }
    macro_rules! pop_int {
        ($op:expr) => {
            match pop!() {
                Value::Int(v) => v,
                other => trap!(Trap::mismatch($op, other.type_name())),
            }
        };
    }
    macro_rules! pop_array {
        ($op:expr) => {
            match pop!() {
                Value::Array(a) => a,
                other => trap!(Trap::mismatch($op, other.type_name())),
            }
        };
    }
    macro_rules! binary {
        ($name:expr, $op:expr) => {{
            let n = stack.len();
            if n < stack_base + 2 {
                trap!(Trap::StackUnderflow);
            }
            let (a, b) = (&stack[n - 2], &stack[n - 1]);
            let r = match (num(a), num(b)) {
                (Some(x), Some(y)) => eval($op, x, y),
                _ => None,
            };
            let r = match r {
                Some(r) => r,
                None if $op == BinOp::Div && matches!((a, b), (Value::Int(_), Value::Int(0))) => {
                    trap!(Trap::DivideByZero)
                }
                None => trap!(Trap::TypeMismatch(format!("{} of {} and {}", $name, a.type_name(), b.type_name()))),
            };
            // Both operands are scalars: nothing to drop.
            mem::forget(stack.pop());
            mem::forget(mem::replace(&mut stack[n - 2], r));
        }};
    }
    // Reads a fused-op operand of variant `$v`; `depth` counts from the
    // top of the stack.
    macro_rules! operand {
        ($src:expr, $v:ident, $depth:expr, $n:expr) => {
            match $src {
                Src::Stack => match &stack[$n - 1 - $depth] {
                    Value::$v(x) => Some(*x),
                    _ => None,
                },
                Src::Local(s) => match &locals[locals_base + s as usize] {
                    Value::$v(x) => Some(*x),
                    _ => None,
                },
                Src::Const(c) => Some(c),
            }
        };
    }
    // Evaluates a fused op without side effects, or `None` for the slow path.
    macro_rules! fused {
        ($v:ident, $eval:ident, $op:expr, $a:expr, $b:expr) => {{
            let n = stack.len();
            let pops = ($a == Src::Stack) as usize + ($b == Src::Stack) as usize;
            if n < stack_base + pops {
                None
            } else {
                let a_depth = ($b == Src::Stack) as usize;
                match (operand!($a, $v, a_depth, n), operand!($b, $v, 0, n)) {
                    (Some(x), Some(y)) => $eval($op, x, y).map(|r| (r, pops)),
                    _ => None,
                }
            }
        }};
    }
    // Completes a fused op whose result is `$r`.
    macro_rules! retire {
        ($r:expr, $pops:expr, $dst:expr, $next:expr) => {{
            for _ in 0..$pops {
                mem::forget(stack.pop());
            }
            match $dst {
                None => stack.push($r),
                Some(slot) => discard(mem::replace(&mut locals[locals_base + slot as usize], $r)),
            }
            pc = $next;
        }};
    }

    // Entry frame.
    if args.len() != meta.arity {
        return Err(TrapInfo {
            trap: Trap::TypeMismatch(format!("expected {} arguments, got {}", meta.arity, args.len())),
            method: methods[method].name.clone(),
            instruction_index: 0,
        });
    }
    locals.extend(args);
    for kind in &meta.slot_kinds[meta.arity..] {
        locals.push(Value::default_for(kind));
    }

    // Set when a fused op hands its instruction over to the plain form.
    let mut slow = false;
    'run: loop {
        let start = pc;
        pc += 1;
        let op = if slow {
            slow = false;
            &code.plain[start]
        } else {
            &code.fast[start]
        };
        match *op {
            Op::IntBin { op: bin, a, b, dst, len } => {
                if let Some((r, pops)) = fused!(Int, eval_int, bin, a, b) {
                    retire!(r, pops, dst, start + len as usize);
                    continue 'run;
                }
                pc = start;
                slow = true;
                continue 'run;
            }
            Op::FloatBin { op: bin, a, b, dst, len } => {
                if let Some((r, pops)) = fused!(Float, eval_float, bin, a, b) {
                    retire!(r, pops, dst, start + len as usize);
                    continue 'run;
                }
                pc = start;
                slow = true;
                continue 'run;
            }
            Op::IntCmpJz { op: cmp, a, b, target, len } => {
                if let Some((Value::Bool(r), pops)) = fused!(Int, eval_int, cmp, a, b) {
                    for _ in 0..pops {
                        mem::forget(stack.pop());
                    }
                    pc = if r { start + len as usize } else { target as usize };
                    continue 'run;
                }
                pc = start;
                slow = true;
                continue 'run;
            }
            Op::FloatCmpJz { op: cmp, a, b, target, len } => {
                if let Some((Value::Bool(r), pops)) = fused!(Float, eval_float, cmp, a, b) {
                    for _ in 0..pops {
                        mem::forget(stack.pop());
                    }
                    pc = if r { start + len as usize } else { target as usize };
                    continue 'run;
                }
                pc = start;
                slow = true;
                continue 'run;
            }
            Op::ConstI(v) => stack.push(Value::Int(v)),
            Op::ConstF(v) => stack.push(Value::Float(v)),
            Op::Load(slot) => {
                let v = match &locals[locals_base + slot as usize] {
                    Value::Int(x) => Value::Int(*x),
                    Value::Float(x) => Value::Float(*x),
                    other => other.clone(),
                };
                stack.push(v);
            }
            Op::Store(slot) => {
                let v = pop!();
                let kind = &meta.slot_kinds[slot as usize];
                if !fits_scalar_slot(&v, kind) && !v.conforms_to(kind) {
                    trap!(Trap::TypeMismatch(format!("cannot store {} in slot of kind {kind}", v.type_name())));
                }
                discard(mem::replace(&mut locals[locals_base + slot as usize], v));
            }
            Op::Add => binary!("ADD", BinOp::Add),
            Op::Sub => binary!("SUB", BinOp::Sub),
            Op::Mul => binary!("MUL", BinOp::Mul),
            Op::Div => binary!("DIV", BinOp::Div),
            Op::CmpLt => binary!("CMP_LT", BinOp::CmpLt),
            Op::CmpEq => binary!("CMP_EQ", BinOp::CmpEq),
            Op::Neg => {
                let r = match pop!() {
                    Value::Int(x) => Value::Int(x.wrapping_neg()),
                    Value::Float(x) => Value::Float(-x),
                    other => trap!(Trap::mismatch("NEG", other.type_name())),
                };
                stack.push(r);
            }
            Op::Jmp(target) => pc = target as usize,
            Op::Jz(target) => {
                let zero = match stack.last() {
                    Some(Value::Bool(b)) if stack.len() > stack_base => !*b,
                    Some(Value::Int(v)) if stack.len() > stack_base => *v == 0,
                    _ => {
                        let other = pop!();
                        trap!(Trap::mismatch("JZ", other.type_name()))
                    }
                };
                mem::forget(stack.pop());
                if zero {
                    pc = target as usize;
                }
            }
            Op::Call(target) | Op::Spawn(target) => {
                let callee = target as usize;
                let callee_meta = &linked.meta[callee];
                if stack.len() < stack_base + callee_meta.arity {
                    trap!(Trap::StackUnderflow);
                }
                let first_arg = stack.len() - callee_meta.arity;
                for (value, kind) in stack[first_arg..].iter().zip(&callee_meta.slot_kinds) {
                    if !value.conforms_to(kind) {
                        trap!(Trap::TypeMismatch(format!(
                            "argument of kind {} passed for parameter of kind {kind} of `{}`",
                            value.type_name(),
                            methods[callee].name
                        )));
                    }
                }
                if callee_meta.parallel {
                    for v in &mut stack[first_arg..] {
                        *v = v.deep_copy();
                    }
                }

                if let Op::Spawn(_) = *op {
                    if E::IS_TASK {
                        trap!(Trap::SpawnInTask);
                    }
                    let args: Vec<Value> = stack.drain(first_arg..).collect();
                    match env.spawn(MethodId(target), args) {
                        Ok(SpawnOutcome::Spawned(future)) => {
                            stack.push(Value::Future(future));
                            continue 'run;
                        }
                        Ok(SpawnOutcome::Inline(args)) => stack.extend(args),
                        Err(t) => trap!(t),
                    }
                }
                if callee_meta.parallel {
                    env.parallel_call(MethodId(target));
                }
                if frames.len() >= MAX_CALL_DEPTH {
                    trap!(Trap::CallDepthExceeded);
                }

                frames.push(Frame { method, return_pc: pc, locals_base, stack_base });
                locals_base = locals.len();
                locals.extend(stack.drain(first_arg..));
                for kind in &callee_meta.slot_kinds[callee_meta.arity..] {
                    locals.push(Value::default_for(kind));
                }
                stack_base = stack.len();
                method = callee;
                meta = callee_meta;
                code = &linked.code[method];
                pc = 0;
            }
            Op::Touch => match pop!() {
                Value::Future(f) => match env.touch(&f) {
                    Ok(v) => stack.push(v),
                    Err(t) => trap!(t),
                },
                other => trap!(Trap::mismatch("TOUCH", other.type_name())),
            },
            Op::NewArr(kind) => {
                let kind = &code.kinds[kind as usize];
                let n = pop_int!("NEWARR");
                if !(0..=MAX_ARRAY_LEN).contains(&n) {
                    trap!(Trap::InvalidArrayLength(n));
                }
                let data = (0..n).map(|_| Value::default_for(kind)).collect();
                stack.push(Value::Array(ArrayRef::new(kind.clone(), data)));
            }
            Op::ALoad => {
                let index = pop_int!("ALOAD");
                let array = pop_array!("ALOAD");
                let data = array.lock();
                let v = match usize::try_from(index).ok().and_then(|i| data.get(i)) {
                    Some(v) => v.clone(),
                    None => {
                        let len = data.len();
                        drop(data);
                        trap!(Trap::OutOfBoundsArray { index, len })
                    }
                };
                drop(data);
                stack.push(v);
            }
            Op::AStore => {
                let value = pop!();
                let index = pop_int!("ASTORE");
                let array = pop_array!("ASTORE");
                if !value.conforms_to(array.elem_kind()) {
                    trap!(Trap::TypeMismatch(format!(
                        "cannot store {} in array of {}",
                        value.type_name(),
                        array.elem_kind()
                    )));
                }
                let mut data = array.lock();
                let len = data.len();
                match usize::try_from(index).ok().and_then(|i| data.get_mut(i)) {
                    Some(slot) => discard(mem::replace(slot, value)),
                    None => {
                        drop(data);
                        trap!(Trap::OutOfBoundsArray { index, len })
                    }
                }
            }
            Op::ALen => {
                let array = pop_array!("ALEN");
                let len = array.len() as i64;
                stack.push(Value::Int(len));
            }
            Op::GetStatic(id) => match env.get_static(GlobalId(id)) {
                Ok(v) => stack.push(v),
                Err(t) => trap!(t),
            },
            Op::PutStatic(id) => {
                let v = pop!();
                if let Err(t) = env.put_static(GlobalId(id), v) {
                    trap!(t);
                }
            }
            Op::Ret => {
                let result = if meta.returns_void {
                    None
                } else {
                    let v = pop!();
                    let declared = &methods[method].return_kind;
                    let ok = match declared {
                        ValueKind::Future(inner) => matches!(v, Value::Future(_)) || v.conforms_to(inner),
                        kind => v.conforms_to(kind),
                    };
                    if !ok {
                        trap!(Trap::TypeMismatch(format!("RET of {} from method returning {declared}", v.type_name())));
                    }
                    Some(v)
                };
                let wraps = meta.wraps_future;
                locals.truncate(locals_base);
                stack.truncate(stack_base);
                let Some(frame) = frames.pop() else {
                    return Ok(result.unwrap_or(Value::Void));
                };
                if let Some(v) = result {
                    let v = match v {
                        Value::Future(_) => v,
                        v if wraps => Value::Future(FutureRef::filled(v)),
                        v => v,
                    };
                    stack.push(v);
                }
                method = frame.method;
                pc = frame.return_pc;
                locals_base = frame.locals_base;
                stack_base = frame.stack_base;
                meta = &linked.meta[method];
                code = &linked.code[method];
            }
            Op::Halt => {
                if E::IS_TASK {
                    trap!(Trap::HaltInTask);
                }
                return Ok(Value::Void);
            }
        }
    }
}

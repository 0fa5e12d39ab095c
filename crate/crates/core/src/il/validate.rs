use std::collections::HashSet;

use super::{is_identifier, Instruction, Program};
use crate::diag::{DiagCode, Diagnostic};

/// Structural checks over a whole program. Returns an empty list iff every
/// program and method invariant holds. Output order follows program order.
pub fn validate_program(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let err = |code, method: &str, index, message: String| Diagnostic::error(code, method, index, message);

    if !is_identifier(&program.name) {
        out.push(err(
            DiagCode::InvalidIdentifier,
            "",
            None,
            format!("program name `{}` is not an identifier", program.name),
        ));
    }

    let mut seen = HashSet::new();
    for g in &program.globals {
        if !is_identifier(&g.name) {
            out.push(err(
                DiagCode::InvalidIdentifier,
                "",
                None,
                format!("global name `{}` is not an identifier", g.name),
            ));
        }
        if !seen.insert(g.name.as_str()) {
            out.push(err(DiagCode::DuplicateGlobal, "", None, format!("global `{}` declared twice", g.name)));
        }
        if let Err(why) = g.kind.well_formed(false) {
            out.push(err(DiagCode::InvalidKind, "", None, format!("global `{}`: {why}", g.name)));
        }
    }

    let mut seen = HashSet::new();
    for m in &program.methods {
        if !seen.insert(m.name.as_str()) {
            out.push(err(DiagCode::DuplicateMethod, &m.name, None, format!("method `{}` defined twice", m.name)));
        }
    }

    match program.method_by_name(&program.entry) {
        None => out.push(err(
            DiagCode::MissingEntry,
            &program.entry,
            None,
            format!("entry method `{}` is not defined", program.entry),
        )),
        Some(m) if m.arity() != 0 => out.push(err(
            DiagCode::EntryHasParams,
            &m.name,
            None,
            format!("entry method takes {} parameters, expected 0", m.arity()),
        )),
        Some(_) => {}
    }

    for m in &program.methods {
        let name = m.name.as_str();
        if !is_identifier(name) {
            out.push(err(
                DiagCode::InvalidIdentifier,
                name,
                None,
                format!("method name `{name}` is not an identifier"),
            ));
        }
        let mut slot_names = HashSet::new();
        for slot in m.slots() {
            if !is_identifier(&slot.name) {
                out.push(err(
                    DiagCode::InvalidIdentifier,
                    name,
                    None,
                    format!("slot name `{}` is not an identifier", slot.name),
                ));
            }
            if !slot_names.insert(slot.name.as_str()) {
                out.push(err(DiagCode::DuplicateSlot, name, None, format!("slot `{}` declared twice", slot.name)));
            }
            if let Err(why) = slot.kind.well_formed(false) {
                out.push(err(DiagCode::InvalidKind, name, None, format!("slot `{}`: {why}", slot.name)));
            }
        }
        if let Err(why) = m.return_kind.well_formed(true) {
            out.push(err(DiagCode::InvalidKind, name, None, format!("return kind: {why}")));
        }
        if m.body.last().is_none_or(Instruction::falls_through) {
            out.push(err(DiagCode::MissingReturn, name, None, "control can fall off the end of the body".into()));
        }

        let len = m.body.len();
        for (i, instr) in m.body.iter().enumerate() {
            let at = Some(i);
            match instr {
                Instruction::Jmp(t) | Instruction::Jz(t) if *t as usize >= len => {
                    out.push(err(
                        DiagCode::InvalidJumpTarget,
                        name,
                        at,
                        format!("jump target {t} is outside the body (length {len})"),
                    ));
                }
                Instruction::Load(s) | Instruction::Store(s) if *s as usize >= m.slot_count() => {
                    out.push(err(
                        DiagCode::InvalidSlot,
                        name,
                        at,
                        format!("slot {s} is not declared ({} slots)", m.slot_count()),
                    ));
                }
                Instruction::Call(id) | Instruction::Spawn(id) => {
                    let is_spawn = matches!(instr, Instruction::Spawn(_));
                    match program.method(*id) {
                        None => out.push(err(
                            DiagCode::UnknownMethod,
                            name,
                            at,
                            format!("call target #{} does not exist", id.0),
                        )),
                        Some(target) if is_spawn && !target.is_parallel() => out.push(err(
                            DiagCode::SpawnOfUnannotated,
                            name,
                            at,
                            format!("SPAWN of `{}` which carries no @Parallel annotation", target.name),
                        )),
                        Some(_) => {}
                    }
                    if is_spawn && !program.transformed {
                        out.push(err(
                            DiagCode::SpawnInUntransformed,
                            name,
                            at,
                            "SPAWN in a program that was not transformed".into(),
                        ));
                    }
                }
                Instruction::GetStatic(id) | Instruction::PutStatic(id) if program.global(*id).is_none() => {
                    out.push(err(DiagCode::UnknownGlobal, name, at, format!("global #{} does not exist", id.0)));
                }
                Instruction::NewArr(kind) => {
                    if let Err(why) = kind.well_formed(false) {
                        out.push(err(DiagCode::InvalidKind, name, at, format!("array element kind: {why}")));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

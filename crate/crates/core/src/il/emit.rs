use std::collections::BTreeSet;
use std::fmt::Write;

use super::parse::TRANSFORMED_MARKER;
use super::{Instruction, MethodDef, Program};

/// Renders `program` in the textual assembly format.
///
/// Jump targets become `L<index>` labels and slots are referenced by name.
/// Transformed programs start with the `#transformed` marker line.
pub fn emit_assembly(program: &Program) -> String {
    let mut out = String::new();
    if program.transformed {
        out.push_str(TRANSFORMED_MARKER);
        out.push('\n');
    }
    let _ = writeln!(out, "program {};", program.name);
    let _ = writeln!(out, "entry {};", program.entry);
    for g in &program.globals {
        let _ = writeln!(out, "global {}: {};", g.name, g.kind);
    }
    for method in &program.methods {
        out.push('\n');
        emit_method(&mut out, program, method);
    }
    out
}

fn emit_method(out: &mut String, program: &Program, method: &MethodDef) {
    if let Some(a) = method.annotation {
        let _ = writeln!(out, "@Parallel(parDegree={})", a.par_degree);
    }
    let params: Vec<String> = method.params.iter().map(|p| format!("{}: {}", p.name, p.kind)).collect();
    let _ = writeln!(out, "method {}({}) -> {} {{", method.name, params.join(", "), method.return_kind);
    for local in &method.locals {
        let _ = writeln!(out, "    local {}: {};", local.name, local.kind);
    }
    let targets: BTreeSet<u32> = method.body.iter().filter_map(Instruction::jump_target).collect();
    for (index, instr) in method.body.iter().enumerate() {
        if targets.contains(&(index as u32)) {
            let _ = writeln!(out, "L{index}:");
        }
        let _ = writeln!(out, "    {};", render(program, method, instr));
    }
    out.push_str("}\n");
}

fn render(program: &Program, method: &MethodDef, instr: &Instruction) -> String {
    let mn = instr.mnemonic();
    let slot = |i: u32| method.slot(i).map_or_else(|| i.to_string(), |s| s.name.clone());
    let callee = |id: super::MethodId| program.method(id).map_or_else(|| format!("?{}", id.0), |m| m.name.clone());
    let global = |id: super::GlobalId| program.global(id).map_or_else(|| format!("?{}", id.0), |g| g.name.clone());
    match instr {
        Instruction::ConstI(v) => format!("{mn} {v}"),
        Instruction::ConstF(v) => format!("{mn} {}", float_literal(*v)),
        Instruction::Load(i) | Instruction::Store(i) => format!("{mn} {}", slot(*i)),
        Instruction::Jmp(t) | Instruction::Jz(t) => format!("{mn} L{t}"),
        Instruction::Call(id) | Instruction::Spawn(id) => format!("{mn} {}", callee(*id)),
        Instruction::NewArr(kind) => format!("{mn} {kind}"),
        Instruction::GetStatic(id) | Instruction::PutStatic(id) => format!("{mn} {}", global(*id)),
        _ => mn.to_string(),
    }
}

/// Shortest text that parses back to the identical bit pattern.
fn float_literal(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        // `{:?}` is round-trip exact and always carries a `.` or exponent.
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::{parse_assembly, parse_with_mode, ParseErrorKind, ParseMode};

    #[test]
    fn trivial_roundtrip_is_normalized() {
        let p = parse_assembly("method main() -> Int { CONST_I 0; RET }").unwrap();
        let text = emit_assembly(&p);
        assert_eq!(text, "program program;\nentry main;\n\nmethod main() -> Int {\n    CONST_I 0;\n    RET;\n}\n");
        assert_eq!(parse_assembly(&text).unwrap(), p);
    }

    #[test]
    fn empty_program_reparses_to_entry_resolution_error() {
        let p = Program::new("empty");
        let text = emit_assembly(&p);
        let err = parse_assembly(&text).unwrap_err();
        assert!(err.has_kind(ParseErrorKind::Resolution));
    }

    #[test]
    fn transformed_programs_carry_the_marker() {
        let mut p = parse_assembly("method main() -> Int { CONST_I 0; RET }").unwrap();
        p.transformed = true;
        let text = emit_assembly(&p);
        assert!(text.starts_with("#transformed\n"));
        assert_eq!(parse_with_mode(&text, ParseMode::Trusted).unwrap(), p);
    }

    #[test]
    fn float_literals_roundtrip_bitwise() {
        for v in [0.0, -0.0, 1.0, -2.5, 1e-300, f64::MAX, f64::MIN_POSITIVE, 5e-324, f64::INFINITY, f64::NEG_INFINITY] {
            let lit = float_literal(v);
            assert_eq!(lit.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{lit}");
        }
        assert_eq!(float_literal(f64::NAN), "NaN");
    }
}

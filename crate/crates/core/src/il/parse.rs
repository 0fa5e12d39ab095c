//! Assembly text to [`Program`].
//!
//! The format is free-form apart from the optional `#transformed` marker,
//! which must be the very first line. Instructions are terminated by `;`
//! (optional right before `}`), `//` starts a comment, and `name:` defines
//! a jump label inside a method body.

use std::collections::HashMap;
use std::fmt;

use super::{GlobalId, Instruction, MethodDef, MethodId, ParallelAnnotation, Program, Slot, ValueKind};

pub const TRANSFORMED_MARKER: &str = "#transformed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Encoding,
    Syntax,
    Resolution,
    RestrictedOpcode,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Encoding => "EncodingError",
            ParseErrorKind::Syntax => "SyntaxError",
            ParseErrorKind::Resolution => "ResolutionError",
            ParseErrorKind::RestrictedOpcode => "RestrictedOpcode",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.kind, self.message)
    }
}

/// A nonempty list of parse diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseErrors(Vec<ParseError>);

impl ParseErrors {
    fn single(e: ParseError) -> Self {
        Self(vec![e])
    }

    pub fn errors(&self) -> &[ParseError] {
        &self.0
    }

    pub fn first(&self) -> &ParseError {
        &self.0[0]
    }

    pub fn has_kind(&self, kind: ParseErrorKind) -> bool {
        self.0.iter().any(|e| e.kind == kind)
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Whether `#transformed` input (and with it `SPAWN`) is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Source,
    Trusted,
}

/// Parses untrusted source text. `SPAWN` and the `#transformed` marker are
/// rejected.
pub fn parse_assembly(text: &str) -> Result<Program, ParseErrors> {
    parse_with_mode(text, ParseMode::Source)
}

pub fn parse_assembly_bytes(bytes: &[u8], mode: ParseMode) -> Result<Program, ParseErrors> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_with_mode(text, mode),
        Err(e) => {
            let (line, column) = position_of(bytes, e.valid_up_to());
            Err(ParseErrors::single(ParseError {
                kind: ParseErrorKind::Encoding,
                line,
                column,
                message: "input is not valid UTF-8".into(),
            }))
        }
    }
}

fn position_of(bytes: &[u8], offset: usize) -> (usize, usize) {
    let prefix = String::from_utf8_lossy(&bytes[..offset]);
    let line = prefix.matches('\n').count() + 1;
    let column = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_with_mode(text: &str, mode: ParseMode) -> Result<Program, ParseErrors> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let (transformed, body) = match text.strip_prefix(TRANSFORMED_MARKER) {
        Some(rest) if rest.is_empty() || rest.starts_with('\n') || rest.starts_with("\r\n") => {
            if mode != ParseMode::Trusted {
                return Err(ParseErrors::single(ParseError {
                    kind: ParseErrorKind::RestrictedOpcode,
                    line: 1,
                    column: 1,
                    message: "transformed programs are only accepted in trusted mode".into(),
                }));
            }
            (true, rest)
        }
        _ => (false, text),
    };
    let start_column = if transformed { TRANSFORMED_MARKER.len() + 1 } else { 1 };
    let tokens = Lexer::new(body, start_column).tokenize().map_err(ParseErrors::single)?;
    let ast = Parser { tokens: &tokens, pos: 0 }.file().map_err(ParseErrors::single)?;
    resolve(ast, transformed)
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, start_column: usize) -> Self {
        Self { chars: text.chars().peekable(), line: 1, column: start_column }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            // whitespace and comments
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '/' {
                    let mut look = self.chars.clone();
                    look.next();
                    if look.peek() == Some(&'/') {
                        while let Some(&c) = self.chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let Some(&c) = self.chars.peek() else {
                out.push(Token { tok: Tok::Eof, line, column });
                return Ok(out);
            };
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            } else if c.is_ascii_digit() || c == '-' || c == '+' {
                self.bump();
                let next = self.chars.peek().copied();
                if c == '-' && next == Some('>') {
                    self.bump();
                    Tok::Punct("->")
                } else if (c == '-' || c == '+') && !next.is_some_and(|n| n.is_ascii_alphanumeric() || n == '.') {
                    return Err(self.error(line, column, format!("unexpected character `{c}`")));
                } else {
                    let mut s = String::from(c);
                    let mut prev = c;
                    while let Some(&n) = self.chars.peek() {
                        let exp_sign = (n == '-' || n == '+') && (prev == 'e' || prev == 'E');
                        if n.is_ascii_alphanumeric() || n == '.' || n == '_' || exp_sign {
                            s.push(n);
                            prev = n;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Number(s)
                }
            } else {
                const PUNCT: [&str; 10] = ["{", "}", "(", ")", "<", ">", ",", ";", ":", "="];
                let p = if c == '@' {
                    "@"
                } else if let Some(p) = PUNCT.iter().find(|p| p.starts_with(c)) {
                    p
                } else {
                    return Err(self.error(line, column, format!("unexpected character `{c}`")));
                };
                self.bump();
                Tok::Punct(p)
            };
            out.push(Token { tok, line, column });
        }
    }

    fn error(&self, line: usize, column: usize, message: String) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax, line, column, message }
    }
}

// ---------------------------------------------------------------------------
// Syntax tree, before name resolution

#[derive(Debug)]
struct Spanned<T> {
    value: T,
    line: usize,
    column: usize,
}

#[derive(Debug, Default)]
struct FileAst {
    name: Option<String>,
    entry: Option<Spanned<String>>,
    globals: Vec<Spanned<Slot>>,
    methods: Vec<MethodAst>,
}

#[derive(Debug)]
struct MethodAst {
    name: Spanned<String>,
    annotation: Option<ParallelAnnotation>,
    params: Vec<Spanned<Slot>>,
    locals: Vec<Spanned<Slot>>,
    return_kind: ValueKind,
    labels: Vec<(Spanned<String>, usize)>,
    body: Vec<Spanned<RawInstr>>,
}

#[derive(Debug)]
enum Operand {
    None,
    Name(String),
    Number(String),
    Kind(ValueKind),
}

#[derive(Debug)]
struct RawInstr {
    mnemonic: String,
    operand: Operand,
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

const NO_OPERAND: &[&str] =
    &["ADD", "SUB", "MUL", "DIV", "NEG", "CMP_LT", "CMP_EQ", "TOUCH", "ALOAD", "ASTORE", "ALEN", "RET", "HALT"];
const NAME_OPERAND: &[&str] = &["LOAD", "STORE", "JMP", "JZ", "CALL", "SPAWN", "GETSTATIC", "PUTSTATIC"];

impl<'t> Parser<'t> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax, line: tok.line, column: tok.column, message: message.into() }
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        let tok = self.peek();
        if matches!(&tok.tok, Tok::Punct(q) if *q == p) {
            self.next();
            Ok(())
        } else {
            Err(self.error_at(tok, format!("expected `{p}`, found {}", Self::describe(&tok.tok))))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn expect_ident(&mut self) -> Result<Spanned<String>, ParseError> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Ident(s) => {
                self.next();
                Ok(Spanned { value: s.clone(), line: tok.line, column: tok.column })
            }
            other => Err(self.error_at(&tok, format!("expected identifier, found {}", Self::describe(other)))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let tok = self.peek();
        if matches!(&tok.tok, Tok::Ident(s) if s == kw) {
            self.next();
            Ok(())
        } else {
            Err(self.error_at(tok, format!("expected `{kw}`, found {}", Self::describe(&tok.tok))))
        }
    }

    fn file(mut self) -> Result<FileAst, ParseError> {
        let mut file = FileAst::default();
        let mut pending_annotation: Option<(ParallelAnnotation, Token)> = None;
        loop {
            let tok = self.peek().clone();
            match &tok.tok {
                Tok::Eof => {
                    if let Some((_, at)) = pending_annotation {
                        return Err(self.error_at(&at, "annotation is not followed by a method"));
                    }
                    return Ok(file);
                }
                Tok::Punct("@") => {
                    if pending_annotation.is_some() {
                        return Err(self.error_at(&tok, "a method takes at most one annotation"));
                    }
                    pending_annotation = Some((self.annotation()?, tok));
                }
                Tok::Ident(kw) if kw == "method" => {
                    let annotation = pending_annotation.take().map(|(a, _)| a);
                    file.methods.push(self.method(annotation)?);
                }
                Tok::Ident(_) if pending_annotation.is_some() => {
                    return Err(self.error_at(&tok, "annotation must directly precede `method`"));
                }
                Tok::Ident(kw) if kw == "program" => {
                    self.next();
                    let name = self.expect_ident()?;
                    self.expect_punct(";")?;
                    if file.name.replace(name.value).is_some() {
                        return Err(self.error_at(&tok, "duplicate `program` declaration"));
                    }
                }
                Tok::Ident(kw) if kw == "entry" => {
                    self.next();
                    let name = self.expect_ident()?;
                    self.expect_punct(";")?;
                    if file.entry.replace(name).is_some() {
                        return Err(self.error_at(&tok, "duplicate `entry` declaration"));
                    }
                }
                Tok::Ident(kw) if kw == "global" => {
                    self.next();
                    file.globals.push(self.slot_decl()?);
                    self.expect_punct(";")?;
                }
                other => {
                    return Err(self.error_at(
                        &tok,
                        format!(
                            "expected `method`, `global`, `entry`, `program` or annotation, found {}",
                            Self::describe(other)
                        ),
                    ))
                }
            }
        }
    }

    fn annotation(&mut self) -> Result<ParallelAnnotation, ParseError> {
        self.expect_punct("@")?;
        let name = self.expect_ident()?;
        if name.value != "Parallel" {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax,
                line: name.line,
                column: name.column,
                message: format!("unknown annotation `@{}`", name.value),
            });
        }
        self.expect_punct("(")?;
        self.expect_keyword("parDegree")?;
        self.expect_punct("=")?;
        let tok = self.next().clone();
        let par_degree = match &tok.tok {
            Tok::Number(s) => s.parse::<u32>().map_err(|_| self.error_at(&tok, format!("invalid parDegree `{s}`")))?,
            other => return Err(self.error_at(&tok, format!("expected integer, found {}", Self::describe(other)))),
        };
        self.expect_punct(")")?;
        Ok(ParallelAnnotation { par_degree })
    }

    fn slot_decl(&mut self) -> Result<Spanned<Slot>, ParseError> {
        let name = self.expect_ident()?;
        self.expect_punct(":")?;
        let kind = self.kind()?;
        Ok(Spanned { value: Slot { name: name.value, kind }, line: name.line, column: name.column })
    }

    fn kind(&mut self) -> Result<ValueKind, ParseError> {
        let name = self.expect_ident()?;
        let kind = match name.value.as_str() {
            "Int" => ValueKind::Int,
            "Float" => ValueKind::Float,
            "Bool" => ValueKind::Bool,
            "Void" => ValueKind::Void,
            "Array" | "Future" => {
                self.expect_punct("<")?;
                let inner = Box::new(self.kind()?);
                self.expect_punct(">")?;
                if name.value == "Array" {
                    ValueKind::Array(inner)
                } else {
                    ValueKind::Future(inner)
                }
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    line: name.line,
                    column: name.column,
                    message: format!("unknown kind `{other}`"),
                })
            }
        };
        Ok(kind)
    }

    fn method(&mut self, annotation: Option<ParallelAnnotation>) -> Result<MethodAst, ParseError> {
        self.expect_keyword("method")?;
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                params.push(self.slot_decl()?);
                if self.is_punct(",") {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.expect_punct("->")?;
        let return_kind = self.kind()?;
        self.expect_punct("{")?;

        let mut locals = Vec::new();
        let mut labels = Vec::new();
        let mut body = Vec::new();
        loop {
            let tok = self.peek().clone();
            match &tok.tok {
                Tok::Punct("}") => {
                    self.next();
                    break;
                }
                Tok::Ident(word) => {
                    if matches!(self.peek_at(1).tok, Tok::Punct(":")) {
                        let label = self.expect_ident()?;
                        self.next();
                        labels.push((label, body.len()));
                    } else if word == "local" && matches!(self.peek_at(1).tok, Tok::Ident(_)) {
                        self.next();
                        locals.push(self.slot_decl()?);
                        self.expect_punct(";")?;
                    } else {
                        body.push(self.instruction()?);
                    }
                }
                other => {
                    return Err(self.error_at(&tok, format!("expected instruction, found {}", Self::describe(other))))
                }
            }
        }
        Ok(MethodAst { name, annotation, params, locals, return_kind, labels, body })
    }

    fn instruction(&mut self) -> Result<Spanned<RawInstr>, ParseError> {
        let head = self.expect_ident()?;
        let mnemonic = head.value.clone();
        let operand = if NO_OPERAND.contains(&mnemonic.as_str()) {
            Operand::None
        } else if mnemonic == "CONST_I" || mnemonic == "CONST_F" {
            let tok = self.next().clone();
            match &tok.tok {
                Tok::Number(s) => Operand::Number(s.clone()),
                Tok::Ident(s) if mnemonic == "CONST_F" && (s == "inf" || s == "NaN") => Operand::Number(s.clone()),
                other => {
                    return Err(
                        self.error_at(&tok, format!("expected numeric literal, found {}", Self::describe(other)))
                    )
                }
            }
        } else if NAME_OPERAND.contains(&mnemonic.as_str()) {
            let tok = self.next().clone();
            match &tok.tok {
                Tok::Ident(s) => Operand::Name(s.clone()),
                Tok::Number(s) => Operand::Number(s.clone()),
                other => return Err(self.error_at(&tok, format!("expected operand, found {}", Self::describe(other)))),
            }
        } else if mnemonic == "NEWARR" {
            Operand::Kind(self.kind()?)
        } else {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax,
                line: head.line,
                column: head.column,
                message: format!("unknown opcode `{mnemonic}`"),
            });
        };
        if self.is_punct(";") {
            self.next();
        } else if !self.is_punct("}") {
            let tok = self.peek();
            return Err(self.error_at(tok, format!("expected `;`, found {}", Self::describe(&tok.tok))));
        }
        Ok(Spanned { value: RawInstr { mnemonic, operand }, line: head.line, column: head.column })
    }
}

// ---------------------------------------------------------------------------
// Name resolution

fn resolve(ast: FileAst, transformed: bool) -> Result<Program, ParseErrors> {
    let mut errors = Vec::new();
    let mut err = |kind, line, column, message: String| errors.push(ParseError { kind, line, column, message });

    let method_ids: HashMap<&str, u32> =
        ast.methods.iter().enumerate().rev().map(|(i, m)| (m.name.value.as_str(), i as u32)).collect();
    let global_ids: HashMap<&str, u32> =
        ast.globals.iter().enumerate().rev().map(|(i, g)| (g.value.name.as_str(), i as u32)).collect();

    let entry = match &ast.entry {
        Some(e) => {
            if !method_ids.contains_key(e.value.as_str()) {
                err(ParseErrorKind::Resolution, e.line, e.column, format!("entry method `{}` is not defined", e.value));
            }
            e.value.clone()
        }
        None => {
            if !method_ids.contains_key("main") {
                err(ParseErrorKind::Resolution, 1, 1, "entry method `main` is not defined".into());
            }
            "main".to_string()
        }
    };

    let mut methods = Vec::with_capacity(ast.methods.len());
    for m in &ast.methods {
        let mut slots: HashMap<&str, u32> = HashMap::new();
        for (i, s) in m.params.iter().chain(m.locals.iter()).enumerate() {
            slots.entry(s.value.name.as_str()).or_insert(i as u32);
        }
        let mut labels: HashMap<&str, usize> = HashMap::new();
        for (label, at) in &m.labels {
            if labels.insert(label.value.as_str(), *at).is_some() {
                err(ParseErrorKind::Syntax, label.line, label.column, format!("duplicate label `{}`", label.value));
            }
        }

        let mut body = Vec::with_capacity(m.body.len());
        for instr in &m.body {
            let (line, column) = (instr.line, instr.column);
            let RawInstr { mnemonic, operand } = &instr.value;
            let number = |s: &str| s.parse::<u32>().ok();
            let resolved = match (mnemonic.as_str(), operand) {
                ("CONST_I", Operand::Number(s)) => match s.parse::<i64>() {
                    Ok(v) => Some(Instruction::ConstI(v)),
                    Err(_) => {
                        err(ParseErrorKind::Syntax, line, column, format!("invalid integer literal `{s}`"));
                        None
                    }
                },
                ("CONST_F", Operand::Number(s)) => match parse_float(s) {
                    Some(v) => Some(Instruction::ConstF(v)),
                    None => {
                        err(ParseErrorKind::Syntax, line, column, format!("invalid float literal `{s}`"));
                        None
                    }
                },
                ("LOAD" | "STORE", op) => {
                    let slot = match op {
                        Operand::Name(n) => slots.get(n.as_str()).copied(),
                        Operand::Number(n) => number(n).filter(|i| (*i as usize) < m.params.len() + m.locals.len()),
                        _ => None,
                    };
                    match slot {
                        Some(s) if mnemonic == "LOAD" => Some(Instruction::Load(s)),
                        Some(s) => Some(Instruction::Store(s)),
                        None => {
                            err(
                                ParseErrorKind::Resolution,
                                line,
                                column,
                                format!("unknown slot {} in `{}`", operand_text(op), m.name.value),
                            );
                            None
                        }
                    }
                }
                ("JMP" | "JZ", op) => {
                    let target = match op {
                        Operand::Name(n) => labels.get(n.as_str()).map(|t| *t as u32),
                        Operand::Number(n) => number(n),
                        _ => None,
                    };
                    match target {
                        Some(t) if mnemonic == "JMP" => Some(Instruction::Jmp(t)),
                        Some(t) => Some(Instruction::Jz(t)),
                        None => {
                            err(
                                ParseErrorKind::Resolution,
                                line,
                                column,
                                format!("unknown label {}", operand_text(op)),
                            );
                            None
                        }
                    }
                }
                ("CALL" | "SPAWN", op) => {
                    if mnemonic == "SPAWN" && !transformed {
                        err(
                            ParseErrorKind::RestrictedOpcode,
                            line,
                            column,
                            "SPAWN is emitted by the transformer and may not appear in source".into(),
                        );
                        None
                    } else {
                        match op {
                            Operand::Name(n) => match method_ids.get(n.as_str()) {
                                Some(&id) if mnemonic == "CALL" => Some(Instruction::Call(MethodId(id))),
                                Some(&id) => Some(Instruction::Spawn(MethodId(id))),
                                None => {
                                    err(ParseErrorKind::Resolution, line, column, format!("unknown method `{n}`"));
                                    None
                                }
                            },
                            other => {
                                err(
                                    ParseErrorKind::Syntax,
                                    line,
                                    column,
                                    format!("expected method name, found {}", operand_text(other)),
                                );
                                None
                            }
                        }
                    }
                }
                ("GETSTATIC" | "PUTSTATIC", op) => match op {
                    Operand::Name(n) => match global_ids.get(n.as_str()) {
                        Some(&id) if mnemonic == "GETSTATIC" => Some(Instruction::GetStatic(GlobalId(id))),
                        Some(&id) => Some(Instruction::PutStatic(GlobalId(id))),
                        None => {
                            err(ParseErrorKind::Resolution, line, column, format!("unknown global `{n}`"));
                            None
                        }
                    },
                    other => {
                        err(
                            ParseErrorKind::Syntax,
                            line,
                            column,
                            format!("expected global name, found {}", operand_text(other)),
                        );
                        None
                    }
                },
                ("NEWARR", Operand::Kind(k)) => Some(Instruction::NewArr(k.clone())),
                (mn, Operand::None) => Some(match mn {
                    "ADD" => Instruction::Add,
                    "SUB" => Instruction::Sub,
                    "MUL" => Instruction::Mul,
                    "DIV" => Instruction::Div,
                    "NEG" => Instruction::Neg,
                    "CMP_LT" => Instruction::CmpLt,
                    "CMP_EQ" => Instruction::CmpEq,
                    "TOUCH" => Instruction::Touch,
                    "ALOAD" => Instruction::ALoad,
                    "ASTORE" => Instruction::AStore,
                    "ALEN" => Instruction::ALen,
                    "RET" => Instruction::Ret,
                    "HALT" => Instruction::Halt,
                    other => unreachable!("operand-free mnemonic {other}"),
                }),
                (mn, _) => unreachable!("operand shape checked while parsing {mn}"),
            };
            if let Some(r) = resolved {
                body.push(r);
            }
        }

        methods.push(MethodDef {
            name: m.name.value.clone(),
            params: m.params.iter().map(|s| s.value.clone()).collect(),
            locals: m.locals.iter().map(|s| s.value.clone()).collect(),
            return_kind: m.return_kind.clone(),
            body,
            annotation: m.annotation,
        });
    }

    if !errors.is_empty() {
        return Err(ParseErrors(errors));
    }
    Ok(Program {
        name: ast.name.unwrap_or_else(|| "program".to_string()),
        globals: ast.globals.into_iter().map(|g| g.value).collect(),
        methods,
        entry,
        transformed,
    })
}

fn operand_text(op: &Operand) -> String {
    match op {
        Operand::None => "<none>".into(),
        Operand::Name(n) | Operand::Number(n) => format!("`{n}`"),
        Operand::Kind(k) => format!("`{k}`"),
    }
}

fn parse_float(s: &str) -> Option<f64> {
    // Rust's float grammar accepts "infinity" and friends; the assembly only
    // knows the spellings the emitter produces plus plain decimal forms.
    let body = s.trim_start_matches(['-', '+']);
    let special = matches!(body, "inf" | "NaN");
    let numeric = body.chars().next().is_some_and(|c| c.is_ascii_digit())
        && body.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'));
    if special || numeric {
        s.parse().ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_assembly("method main() -> Int { CONST_I 0; RET }").unwrap();
        assert_eq!(p.methods.len(), 1);
        assert_eq!(p.entry, "main");
        assert!(!p.transformed);
        assert_eq!(p.methods[0].body, vec![Instruction::ConstI(0), Instruction::Ret]);
    }

    #[test]
    fn spawn_is_restricted_in_source() {
        let src = "@Parallel(parDegree=2)\nmethod f() -> Future<Int> { CONST_I 1; RET }\n\
                   method main() -> Int { SPAWN f; TOUCH; RET }";
        let err = parse_assembly(src).unwrap_err();
        assert!(err.has_kind(ParseErrorKind::RestrictedOpcode));
        assert_eq!(err.first().line, 3);
    }

    #[test]
    fn transformed_marker_needs_trusted_mode() {
        let src = "#transformed\nmethod main() -> Int { CONST_I 0; RET }";
        assert!(parse_assembly(src).unwrap_err().has_kind(ParseErrorKind::RestrictedOpcode));
        let p = parse_with_mode(src, ParseMode::Trusted).unwrap();
        assert!(p.transformed);
    }

    #[test]
    fn diagnostics_carry_positions() {
        let err = parse_assembly("method main() -> Int {\n  CONST_I 0;\n  LOAD nope;\n  RET\n}").unwrap_err();
        let e = err.first();
        assert_eq!((e.kind, e.line, e.column), (ParseErrorKind::Resolution, 3, 3));

        let err = parse_assembly("method main() -> Int {\n  FROB;\n}").unwrap_err();
        assert_eq!((err.first().kind, err.first().line, err.first().column), (ParseErrorKind::Syntax, 2, 3));
    }

    #[test]
    fn missing_entry_is_a_resolution_error() {
        let err = parse_assembly("program empty;\nentry main;\n").unwrap_err();
        assert!(err.has_kind(ParseErrorKind::Resolution));
    }

    #[test]
    fn labels_comments_and_crlf() {
        let src = "// leading comment\r\nmethod main() -> Int {\r\n  local i: Int;\r\ntop:\r\n  LOAD i; JZ done; // trailing\r\n  JMP top;\r\ndone:\r\n  LOAD i; RET;\r\n}\r\n";
        let p = parse_assembly(src).unwrap();
        assert_eq!(p.methods[0].body[1], Instruction::Jz(3));
        assert_eq!(p.methods[0].body[2], Instruction::Jmp(0));
    }

    #[test]
    fn float_literals() {
        let p = parse_assembly(
            "method main() -> Float { CONST_F -2.5; CONST_F 1e-7; CONST_F NaN; CONST_F -inf; CONST_F -0.0; RET }",
        )
        .unwrap();
        let body = &p.methods[0].body;
        assert_eq!(body[0], Instruction::ConstF(-2.5));
        assert_eq!(body[1], Instruction::ConstF(1e-7));
        assert!(matches!(body[2], Instruction::ConstF(v) if v.is_nan()));
        assert_eq!(body[3], Instruction::ConstF(f64::NEG_INFINITY));
        assert_eq!(body[4], Instruction::ConstF(-0.0));
        assert!(parse_assembly("method main() -> Float { CONST_F infinity; RET }").is_err());
    }

    #[test]
    fn annotation_parsing() {
        let src = "@Parallel(parDegree=0)\nmethod f() -> Future<Int> { CONST_I 1; RET }\nmethod main() -> Int { CONST_I 0; RET }";
        let p = parse_assembly(src).unwrap();
        assert_eq!(p.methods[0].annotation, Some(ParallelAnnotation { par_degree: 0 }));
        assert!(parse_assembly("@Parallel(parDegree=2)\nglobal g: Int;").is_err());
        assert!(parse_assembly("@Serial\nmethod main() -> Int { CONST_I 0; RET }").is_err());
    }

    #[test]
    fn invalid_utf8_is_reported() {
        let err = parse_assembly_bytes(b"method \xff", ParseMode::Source).unwrap_err();
        assert_eq!(err.first().kind, ParseErrorKind::Encoding);
        assert_eq!((err.first().line, err.first().column), (1, 8));
    }
}

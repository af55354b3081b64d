//! Line-oriented parser for `.tasm` program files.
//!
//! ```text
//! file      := line*
//! line      := [directive | instr] [comment] NEWLINE
//! comment   := '#' <anything>
//! directive := '.api' NAME 'arity=' N ['types=' TYPE (',' TYPE)*]
//!            | '.entry' LABEL
//! TYPE      := 'in' | 'out' | 'in|out' | 'out|in'
//! instr     := LABEL ':' op
//! op        := 'push' operand | 'mov' REG operand | 'pop' REG
//!            | 'call' (API | LABEL) | 'jmp' LABEL | 'jz' LABEL | 'jnz' LABEL
//!            | 'ret' | 'halt'
//! operand   := REG | INT | IDENT
//! ```
//!
//! Integer literals (decimal, optionally negative, or `0x` hex) are
//! normalized to decimal text. Anything after the last expected token is an
//! error.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{ParamType, ParseError, ParseErrorKind};

/// Every x86 general purpose register name the parser recognizes.
pub const KNOWN_REGISTERS: [&str; 8] = ["eax", "ebx", "ecx", "edx", "esi", "edi", "ebp", "esp"];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Reg(String),
    Lit(String),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => f.write_str(r),
            Operand::Lit(l) => f.write_str(l),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Opcode {
    Push(Operand),
    Mov(String, Operand),
    Pop(String),
    CallApi(String),
    CallLabel(String),
    Jmp(String),
    /// Conditional jumps; the condition is not modeled, both branches are taken.
    Jz(String),
    Jnz(String),
    Ret,
    Halt,
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Opcode::Push(o) => write!(f, "push {o}"),
            Opcode::Mov(r, o) => write!(f, "mov {r} {o}"),
            Opcode::Pop(r) => write!(f, "pop {r}"),
            Opcode::CallApi(n) | Opcode::CallLabel(n) => write!(f, "call {n}"),
            Opcode::Jmp(l) => write!(f, "jmp {l}"),
            Opcode::Jz(l) => write!(f, "jz {l}"),
            Opcode::Jnz(l) => write!(f, "jnz {l}"),
            Opcode::Ret => f.write_str("ret"),
            Opcode::Halt => f.write_str("halt"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instruction {
    pub label: String,
    pub op: Opcode,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApiDecl {
    pub name: String,
    pub params: Vec<ParamType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub apis: Vec<ApiDecl>,
    pub entry: String,
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn api(&self, name: &str) -> Option<&ApiDecl> {
        self.apis.iter().find(|a| a.name == name)
    }

    /// Re-emits the program in `.tasm` syntax.
    pub fn to_tasm(&self) -> String {
        let mut s = String::new();
        for a in &self.apis {
            s.push_str(&format!(".api {} arity={}", a.name, a.params.len()));
            if !a.params.is_empty() {
                let ts: Vec<String> = a.params.iter().map(|t| t.to_string()).collect();
                s.push_str(&format!(" types={}", ts.join(",")));
            }
            s.push('\n');
        }
        s.push_str(&format!(".entry {}\n", self.entry));
        for i in &self.instructions {
            s.push_str(&format!("{}: {}\n", i.label, i.op));
        }
        s
    }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in code.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &code[s..i], col: code[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &code[s..], col: code[..s].chars().count() + 1 });
    }
    out
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Decimal text of an integer literal, or `None` if `s` is not one.
pub fn normalize_int(s: &str) -> Option<String> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v: i128 = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        if hex.is_empty() {
            return None;
        }
        i128::from_str_radix(hex, 16).ok()?
    } else {
        if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        body.parse().ok()?
    };
    Some(if neg { (-v).to_string() } else { v.to_string() })
}

struct LineParser<'a> {
    line: usize,
    toks: Vec<Token<'a>>,
    pos: usize,
    registers: &'a [String],
}

impl<'a> LineParser<'a> {
    fn err(&self, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column: col, kind }
    }

    fn end_col(&self) -> usize {
        self.toks.last().map(|t| t.col + t.text.chars().count()).unwrap_or(1)
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.text)
            }
            None => Err(self.err(self.end_col(), ParseErrorKind::Syntax(format!("expected {what}")))),
        }
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos.saturating_sub(1)).map(|t| t.col).unwrap_or(1)
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => Err(self.err(t.col, ParseErrorKind::Syntax(format!("trailing input `{}`", t.text)))),
            None => Ok(()),
        }
    }

    fn register(&mut self) -> Result<String, ParseError> {
        let t = self.next("register")?;
        let col = self.col();
        if self.registers.iter().any(|r| r == t) {
            Ok(t.to_string())
        } else if KNOWN_REGISTERS.contains(&t) {
            Err(self.err(col, ParseErrorKind::RegisterOverflow(t.to_string())))
        } else {
            Err(self.err(col, ParseErrorKind::Syntax(format!("expected register, found `{t}`"))))
        }
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let t = self.next("operand")?;
        let col = self.col();
        if self.registers.iter().any(|r| r == t) {
            return Ok(Operand::Reg(t.to_string()));
        }
        if KNOWN_REGISTERS.contains(&t) {
            return Err(self.err(col, ParseErrorKind::RegisterOverflow(t.to_string())));
        }
        if let Some(n) = normalize_int(t) {
            return Ok(Operand::Lit(n));
        }
        if is_ident(t) {
            return Ok(Operand::Lit(t.to_string()));
        }
        Err(self.err(col, ParseErrorKind::Syntax(format!("invalid operand `{t}`"))))
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let t = self.next(what)?;
        if is_ident(t) {
            Ok(t.to_string())
        } else {
            Err(self.err(self.col(), ParseErrorKind::Syntax(format!("invalid {what} `{t}`"))))
        }
    }
}

fn parse_types(s: &str) -> Option<Vec<ParamType>> {
    s.split(',')
        .map(|t| match t {
            "in" => Some(ParamType::IN),
            "out" => Some(ParamType::OUT),
            "in|out" | "out|in" => Some(ParamType::IN_OUT),
            _ => None,
        })
        .collect()
}

/// Parses `.tasm` text. `registers` is the tracked register set.
pub fn parse_source(text: &str, registers: &[String]) -> Result<Program, ParseError> {
    let mut apis: Vec<ApiDecl> = Vec::new();
    let mut api_lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut entry: Option<(String, usize, usize)> = None;
    let mut instructions: Vec<Instruction> = Vec::new();
    let mut calls: Vec<(usize, String, usize)> = Vec::new();
    let mut targets: Vec<(String, usize, usize)> = Vec::new();
    let mut labels: BTreeSet<String> = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser { line, toks, pos: 0, registers };
        let head = p.next("statement")?;
        match head {
            ".api" => {
                let name = p.ident("API name")?;
                let name_col = p.col();
                let ar_tok = p.next("arity=N")?;
                let arity: usize = ar_tok
                    .strip_prefix("arity=")
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| p.err(p.col(), ParseErrorKind::Syntax(format!("expected arity=N, found `{ar_tok}`"))))?;
                let params = if arity == 0 && p.pos == p.toks.len() {
                    Vec::new()
                } else {
                    let ty_tok = p.next("types=...")?;
                    let ty_col = p.col();
                    let params = ty_tok
                        .strip_prefix("types=")
                        .and_then(parse_types)
                        .ok_or_else(|| p.err(ty_col, ParseErrorKind::Syntax(format!("invalid parameter types `{ty_tok}`"))))?;
                    if params.len() != arity {
                        return Err(p.err(ty_col, ParseErrorKind::ArityMismatch { api: name, arity, types: params.len() }));
                    }
                    params
                };
                p.finish()?;
                if api_lines.insert(name.clone(), line).is_some() {
                    return Err(p.err(name_col, ParseErrorKind::DuplicateApi(name)));
                }
                apis.push(ApiDecl { name, params });
            }
            ".entry" => {
                let l = p.ident("entry label")?;
                let col = p.col();
                p.finish()?;
                if entry.is_some() {
                    return Err(p.err(1, ParseErrorKind::Syntax("duplicate .entry".into())));
                }
                entry = Some((l, line, col));
            }
            _ => {
                let Some(label) = head.strip_suffix(':').filter(|l| is_ident(l)) else {
                    return Err(p.err(1, ParseErrorKind::Syntax(format!("expected `label:` or directive, found `{head}`"))));
                };
                if !labels.insert(label.to_string()) {
                    return Err(p.err(1, ParseErrorKind::DuplicateLabel(label.to_string())));
                }
                let mnemonic = p.next("instruction")?;
                let mcol = p.col();
                let op = match mnemonic {
                    "push" => Opcode::Push(p.operand()?),
                    "mov" => {
                        let r = p.register()?;
                        Opcode::Mov(r, p.operand()?)
                    }
                    "pop" => Opcode::Pop(p.register()?),
                    "call" => {
                        let target = p.ident("call target")?;
                        calls.push((instructions.len(), target, p.col()));
                        Opcode::Halt
                    }
                    "jmp" | "jz" | "jnz" => {
                        let target = p.ident("jump target")?;
                        targets.push((target.clone(), line, p.col()));
                        match mnemonic {
                            "jmp" => Opcode::Jmp(target),
                            "jz" => Opcode::Jz(target),
                            _ => Opcode::Jnz(target),
                        }
                    }
                    "ret" => Opcode::Ret,
                    "halt" => Opcode::Halt,
                    other => {
                        return Err(p.err(mcol, ParseErrorKind::Syntax(format!("unknown instruction `{other}`"))));
                    }
                };
                p.finish()?;
                instructions.push(Instruction { label: label.to_string(), op, line });
            }
        }
    }

    for (idx, target, col) in calls {
        let line = instructions[idx].line;
        let is_api = api_lines.contains_key(&target);
        let is_label = labels.contains(&target);
        instructions[idx].op = match (is_api, is_label) {
            (true, false) => Opcode::CallApi(target),
            (false, true) => Opcode::CallLabel(target),
            (true, true) => {
                return Err(ParseError {
                    line,
                    column: col,
                    kind: ParseErrorKind::Syntax(format!("`{target}` is both an API and a label")),
                })
            }
            (false, false) => {
                return Err(ParseError { line, column: col, kind: ParseErrorKind::UndeclaredApi(target) })
            }
        };
    }
    for (target, line, col) in targets {
        if !labels.contains(&target) {
            return Err(ParseError { line, column: col, kind: ParseErrorKind::UnresolvedLabel(target) });
        }
    }
    let Some((entry, line, col)) = entry else {
        return Err(ParseError { line: 1, column: 1, kind: ParseErrorKind::MissingEntry });
    };
    if !labels.contains(&entry) {
        return Err(ParseError { line, column: col, kind: ParseErrorKind::UnresolvedLabel(entry) });
    }
    Ok(Program { apis, entry, instructions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regs() -> Vec<String> {
        ["eax", "ebx", "ecx", "edx"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn int_normalization() {
        assert_eq!(normalize_int("0x10").as_deref(), Some("16"));
        assert_eq!(normalize_int("007").as_deref(), Some("7"));
        assert_eq!(normalize_int("-3").as_deref(), Some("-3"));
        assert_eq!(normalize_int("m"), None);
        assert_eq!(normalize_int("0x"), None);
    }

    #[test]
    fn trailing_garbage_rejected() {
        let err = parse_source(".entry a\na: push m extra\n", &regs()).unwrap_err();
        assert_eq!((err.line, err.column), (2, 11));
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn untracked_register_is_overflow() {
        let err = parse_source(".entry a\na: push esi\n", &regs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::RegisterOverflow("esi".into()));
    }

    #[test]
    fn duplicate_label() {
        let err = parse_source(".entry a\na: halt\na: halt\n", &regs()).unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.kind, ParseErrorKind::DuplicateLabel("a".into()));
    }

    #[test]
    fn unresolved_jump() {
        let err = parse_source(".entry a\na: jmp nowhere\n", &regs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnresolvedLabel("nowhere".into()));
    }

    #[test]
    fn types_and_arity_must_agree() {
        let err = parse_source(".api F arity=2 types=in\n.entry a\na: halt\n", &regs()).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityMismatch { .. }));
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = parse_source("# header\n\n.api F arity=1 types=in|out # trailing\n.entry a\na: call F\n", &regs()).unwrap();
        assert_eq!(p.apis[0].params, vec![ParamType::IN_OUT]);
        assert_eq!(p.instructions[0].op, Opcode::CallApi("F".into()));
    }

    #[test]
    fn missing_entry() {
        let err = parse_source("a: halt\n", &regs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingEntry);
    }
}

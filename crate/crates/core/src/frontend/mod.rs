//! Toy-assembly frontend: turns a `.tasm` program into a pushdown system
//! together with the table of API entry points, their arities and their
//! parameter types.
//!
//! Control points pair an instruction label with the valuation of the
//! tracked registers; a register is either a literal or unknown. Stack
//! symbols are program literals, return addresses, the unknown value `#top`
//! and the bottom marker `#bot`.

mod parser;
mod translate;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::pds::{Config, ControlPoint, Pds};

pub use parser::{normalize_int, ApiDecl, Instruction, Opcode, Operand, Program, KNOWN_REGISTERS};
pub use translate::{build_pds, END_LABEL};

/// The non-empty set of directions a parameter may be used in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamType {
    input: bool,
    output: bool,
}

impl ParamType {
    pub const IN: ParamType = ParamType { input: true, output: false };
    pub const OUT: ParamType = ParamType { input: false, output: true };
    pub const IN_OUT: ParamType = ParamType { input: true, output: true };

    pub fn is_in(self) -> bool {
        self.input
    }

    pub fn is_out(self) -> bool {
        self.output
    }
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.input, self.output) {
            (true, true) => f.write_str("in|out"),
            (true, false) => f.write_str("in"),
            _ => f.write_str("out"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),

    #[error("call to undeclared API `{0}`")]
    UndeclaredApi(String),

    #[error("unresolved label `{0}`")]
    UnresolvedLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("API `{0}` declared twice")]
    DuplicateApi(String),

    #[error("register `{0}` is outside the tracked register file")]
    RegisterOverflow(String),

    #[error("API `{api}` has arity {arity} but {types} parameter types")]
    ArityMismatch { api: String, arity: usize, types: usize },

    #[error("missing .entry directive")]
    MissingEntry,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// Name and parameter types of the API reached at one entry point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApiEntry {
    pub name: String,
    pub params: Vec<ParamType>,
}

impl ApiEntry {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Type of the 1-based parameter `n`.
    pub fn param(&self, n: usize) -> Option<ParamType> {
        n.checked_sub(1).and_then(|i| self.params.get(i).copied())
    }
}

/// API entry control points of a model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApiTable {
    entries: BTreeMap<ControlPoint, ApiEntry>,
}

impl ApiTable {
    pub fn insert(&mut self, point: ControlPoint, entry: ApiEntry) {
        self.entries.insert(point, entry);
    }

    pub fn get(&self, point: &ControlPoint) -> Option<&ApiEntry> {
        self.entries.get(point)
    }

    pub fn contains(&self, point: &ControlPoint) -> bool {
        self.entries.contains_key(point)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ControlPoint, &ApiEntry)> + '_ {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A parsed and translated program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramModel {
    pub source_name: String,
    pub program: Program,
    pub pds: Pds,
    pub api: ApiTable,
    /// `<entry, #bot>`.
    pub entry: Config,
}

/// Frontend settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontendOptions {
    /// Registers whose literal values are tracked in control points.
    pub registers: Vec<String>,
}

impl Default for FrontendOptions {
    fn default() -> Self {
        FrontendOptions { registers: ["eax", "ebx", "ecx", "edx"].iter().map(|s| s.to_string()).collect() }
    }
}

impl FrontendOptions {
    pub fn parse(&self, source_name: &str, text: &str) -> Result<ProgramModel, ParseError> {
        let program = parser::parse_source(text, &self.registers)?;
        let (pds, api, entry) = build_pds(&program, &self.registers);
        Ok(ProgramModel { source_name: source_name.to_string(), program, pds, api, entry })
    }
}

/// Parses and translates `.tasm` text with the default options.
pub fn parse_program(text: &str) -> Result<ProgramModel, ParseError> {
    FrontendOptions::default().parse("<input>", text)
}

/// True for the decimal text of an integer, as produced by the parser.
pub fn is_numeric_literal(s: &str) -> bool {
    normalize_int(s).as_deref() == Some(s)
}

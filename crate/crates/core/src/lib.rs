//! Behavioral malware signatures from pushdown models of programs.
//!
//! The pipeline parses a toy-assembly program into a pushdown system
//! ([`frontend`]), computes reachable API call configurations ([`pds`]),
//! links them into system-call dependency trees ([`extract`], [`trees`]),
//! mines trees shared by a malware corpus ([`miner`]) and stores them in a
//! tree automaton that flags programs containing one of them ([`helta`]).

pub mod extract;
pub mod frontend;
pub mod helta;
pub mod miner;
pub mod pds;
pub mod testkit;
pub mod trees;

pub use extract::{extract_scdts, ExtractError, ExtractionConfig, Extractor, ValueMatching};
pub use frontend::{parse_program, ApiTable, FrontendOptions, ParseError, ProgramModel};
pub use helta::{embedding_oracle, DbError, Helta, SignatureDb, Verdict};
pub use miner::{frequent_subtrees, mine, Corpus, MalScdtSet, MinerConfig, MinerError, SupportUnit};
pub use pds::{post_star, pre_star, Config, ControlPoint, MultiAutomaton, Pds, PdsError, Rule, StackSymbol};
pub use trees::{canonicalize, parse_scdt, Color, RawTree, Scdt, TreeError};

//! Shared fixtures for the benchmarks: the committed example programs,
//! parsed once.

use std::collections::BTreeSet;

use malsig_core::testkit::{golden_dir, golden_files};
use malsig_core::{extract_scdts, parse_program, Corpus, ExtractionConfig, ProgramModel, Scdt, ValueMatching};

/// Parsed models of every program under `corpus/<subdir>`.
pub fn models(subdir: &str) -> Vec<ProgramModel> {
    golden_files(subdir)
        .iter()
        .map(|p| parse_program(&std::fs::read_to_string(p).expect("readable corpus file")).expect("valid corpus file"))
        .collect()
}

/// The single-program self-copy example.
pub fn self_copy() -> ProgramModel {
    let src = std::fs::read_to_string(golden_dir().join("self_copy.tasm")).expect("readable corpus file");
    parse_program(&src).expect("valid corpus file")
}

pub fn trees(m: &ProgramModel, matching: ValueMatching) -> BTreeSet<Scdt> {
    extract_scdts(m, ExtractionConfig::new(2, matching)).expect("extraction within limits")
}

/// The training programs as a mining corpus, one entry per program.
pub fn training_corpus() -> Corpus {
    let mut c = Corpus::new();
    for (i, m) in models("train").iter().enumerate() {
        c.push(format!("train{i}"), trees(m, ValueMatching::Strict));
    }
    c
}

//! Frequent subtree mining.
//!
//! A pattern occurs in a tree when it embeds at some node: labels agree and
//! the pattern's children map injectively onto children with equal colors.
//! Support is the fraction of transactions containing the pattern, where a
//! transaction is either a single tree or the whole tree set of a program.
//!
//! [`mine`] grows patterns one leaf at a time by reverse search: every
//! pattern has a unique canonical parent (the smallest tree obtained by
//! deleting one leaf), so each frequent pattern is generated exactly once
//! and only from a frequent parent.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::trees::{embeds, enumerate_subtrees, insert_subtree, Color, Scdt, TreeError};

/// Default limit on the number of mined patterns.
pub const PATTERN_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinerError {
    #[error("support threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("more than {cap} frequent patterns; raise the support threshold")]
    PatternCap { cap: usize },

    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// What one unit of support counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SupportUnit {
    /// Every extracted tree is a transaction.
    #[default]
    Tree,
    /// Every program, with all its trees, is a transaction.
    Program,
}

/// Extracted trees grouped by source program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    programs: Vec<(String, BTreeSet<Scdt>)>,
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    pub fn push(&mut self, name: impl Into<String>, trees: BTreeSet<Scdt>) {
        self.programs.push((name.into(), trees));
    }

    /// A corpus with one single-tree program per tree.
    pub fn from_trees(trees: impl IntoIterator<Item = Scdt>) -> Self {
        let mut c = Corpus::new();
        for (i, t) in trees.into_iter().enumerate() {
            c.push(format!("tree{i}"), BTreeSet::from([t]));
        }
        c
    }

    pub fn programs(&self) -> &[(String, BTreeSet<Scdt>)] {
        &self.programs
    }

    /// Every tree of every program, repeats across programs included.
    pub fn trees(&self) -> impl Iterator<Item = &Scdt> + '_ {
        self.programs.iter().flat_map(|(_, ts)| ts.iter())
    }

    pub fn tree_count(&self) -> usize {
        self.programs.iter().map(|(_, ts)| ts.len()).sum()
    }

    fn transactions(&self, unit: SupportUnit) -> Vec<Vec<&Scdt>> {
        match unit {
            SupportUnit::Tree => self.trees().map(|t| vec![t]).collect(),
            SupportUnit::Program => self.programs.iter().map(|(_, ts)| ts.iter().collect()).collect(),
        }
    }
}

/// Frequent patterns of a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct MalScdtSet {
    pub patterns: BTreeSet<Scdt>,
    pub threshold: f64,
    /// Number of transactions support was computed over.
    pub corpus_size: usize,
}

impl MalScdtSet {
    /// Drops patterns with fewer than `min_nodes` nodes.
    pub fn with_min_nodes(mut self, min_nodes: usize) -> Self {
        self.patterns.retain(|p| p.size() >= min_nodes);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinerConfig {
    pub threshold: f64,
    pub unit: SupportUnit,
    pub cap: usize,
}

impl MinerConfig {
    pub fn new(threshold: f64) -> Self {
        MinerConfig { threshold, unit: SupportUnit::Tree, cap: PATTERN_CAP }
    }
}

fn contains(tx: &[&Scdt], p: &Scdt) -> bool {
    tx.iter().any(|t| embeds(p, t))
}

/// Smallest number of transactions reaching support `k` out of `total`.
fn min_count(k: f64, total: usize) -> usize {
    ((k * total as f64) - 1e-9).ceil().max(0.0) as usize
}

fn check_threshold(k: f64) -> Result<(), MinerError> {
    if k > 0.0 && k <= 1.0 {
        Ok(())
    } else {
        Err(MinerError::InvalidThreshold(k))
    }
}

/// Fraction of transactions containing `t`; 0 for an empty corpus.
pub fn support_in(t: &Scdt, corpus: &Corpus, unit: SupportUnit) -> f64 {
    let txs = corpus.transactions(unit);
    if txs.is_empty() {
        return 0.0;
    }
    txs.iter().filter(|tx| contains(tx, t)).count() as f64 / txs.len() as f64
}

/// Fraction of corpus trees containing `t`.
pub fn support(t: &Scdt, corpus: &Corpus) -> f64 {
    support_in(t, corpus, SupportUnit::Tree)
}

/// Removes the leaf at preorder position `target`. The result may be
/// smaller by more than one node when siblings collapse.
fn remove_leaf(t: &Scdt, target: usize, counter: &mut usize) -> Scdt {
    *counter += 1;
    let mut children = Vec::with_capacity(t.children().len());
    for (c, s) in t.children() {
        let start = *counter;
        if start == target && s.is_leaf() {
            *counter += 1;
            continue;
        }
        if start <= target && target < start + s.size() {
            children.push((*c, remove_leaf(s, target, counter)));
        } else {
            *counter += s.size();
            children.push((*c, s.clone()));
        }
    }
    Scdt::new(t.root(), children)
}

/// The smallest tree with one node fewer obtained by deleting a leaf.
fn canonical_parent(t: &Scdt) -> Option<Scdt> {
    let n = t.size();
    (1..n)
        .filter_map(|i| {
            let p = remove_leaf(t, i, &mut 0);
            (p.size() == n - 1).then_some(p)
        })
        .min()
}

/// Rebuilds `t` with `c(leaf)` added below preorder node `target`.
fn add_leaf(t: &Scdt, target: usize, counter: &mut usize, c: Color, leaf: &Scdt) -> Scdt {
    if *counter == target {
        *counter += t.size();
        return insert_subtree(c, leaf.clone(), t);
    }
    *counter += 1;
    let mut children = Vec::with_capacity(t.children().len());
    for (cc, s) in t.children() {
        if *counter <= target && target < *counter + s.size() {
            children.push((*cc, add_leaf(s, target, counter, c, leaf)));
        } else {
            *counter += s.size();
            children.push((*cc, s.clone()));
        }
    }
    Scdt::new(t.root(), children)
}

struct Growth<'a> {
    txs: Vec<Vec<&'a Scdt>>,
    need: usize,
    cap: usize,
    /// Frequent (parent symbol, color, child symbol) edges.
    edges: BTreeMap<String, Vec<(Color, Scdt)>>,
    out: BTreeSet<Scdt>,
}

impl Growth<'_> {
    fn record(&mut self, p: Scdt) -> Result<(), MinerError> {
        self.out.insert(p);
        if self.out.len() > self.cap {
            return Err(MinerError::PatternCap { cap: self.cap });
        }
        Ok(())
    }

    fn grow(&mut self, p: &Scdt, tids: &[usize]) -> Result<(), MinerError> {
        let n = p.size();
        let preorder = preorder_symbols(p);
        let mut children = BTreeSet::new();
        for (pos, sym) in preorder.iter().enumerate() {
            let Some(exts) = self.edges.get(sym) else {
                continue;
            };
            for (c, leaf) in exts {
                let q = add_leaf(p, pos, &mut 0, *c, leaf);
                if q.size() == n + 1 && canonical_parent(&q).as_ref() == Some(p) {
                    children.insert(q);
                }
            }
        }
        for q in children {
            let sub: Vec<usize> = tids.iter().copied().filter(|&i| contains(&self.txs[i], &q)).collect();
            if sub.len() >= self.need {
                self.record(q.clone())?;
                self.grow(&q, &sub)?;
            }
        }
        Ok(())
    }
}

fn preorder_symbols(t: &Scdt) -> Vec<String> {
    let mut out = vec![t.root().to_string()];
    for (_, c) in t.children() {
        out.extend(preorder_symbols(c));
    }
    out
}

/// Every pattern whose support is at least `cfg.threshold`.
pub fn mine(corpus: &Corpus, cfg: &MinerConfig) -> Result<MalScdtSet, MinerError> {
    check_threshold(cfg.threshold)?;
    let txs = corpus.transactions(cfg.unit);
    let total = txs.len();
    let need = min_count(cfg.threshold, total).max(1);
    let mut result = MalScdtSet { patterns: BTreeSet::new(), threshold: cfg.threshold, corpus_size: total };
    if total == 0 {
        return Ok(result);
    }

    // Frequent single symbols and frequent one-edge patterns.
    let mut symbol_tids: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    let mut edge_tids: BTreeMap<(String, Color, String), BTreeSet<usize>> = BTreeMap::new();
    for (i, tx) in txs.iter().enumerate() {
        for t in tx {
            for node in t.nodes() {
                symbol_tids.entry(node.root().to_string()).or_default().insert(i);
                for (c, child) in node.children() {
                    edge_tids
                        .entry((node.root().to_string(), *c, child.root().to_string()))
                        .or_default()
                        .insert(i);
                }
            }
        }
    }
    let mut edges: BTreeMap<String, Vec<(Color, Scdt)>> = BTreeMap::new();
    for ((a, c, b), tids) in &edge_tids {
        if tids.len() >= need {
            edges.entry(a.clone()).or_default().push((*c, Scdt::leaf(b)));
        }
    }

    let mut g = Growth { txs, need, cap: cfg.cap, edges, out: BTreeSet::new() };
    for (sym, tids) in symbol_tids {
        if tids.len() >= need {
            let p = Scdt::leaf(&sym);
            g.record(p.clone())?;
            let tids: Vec<usize> = tids.into_iter().collect();
            g.grow(&p, &tids)?;
        }
    }
    result.patterns = g.out;
    Ok(result)
}

/// [`mine`] with per-tree support and the default cap.
pub fn frequent_subtrees(corpus: &Corpus, k: f64) -> Result<MalScdtSet, MinerError> {
    mine(corpus, &MinerConfig::new(k))
}

/// Exhaustive reference miner: enumerates every subtree of every corpus
/// tree and counts the transactions it occurs in.
pub fn brute_force_frequent_in(corpus: &Corpus, k: f64, unit: SupportUnit) -> Result<MalScdtSet, MinerError> {
    check_threshold(k)?;
    let txs = corpus.transactions(unit);
    let total = txs.len();
    let need = min_count(k, total).max(1);
    let mut counts: BTreeMap<Scdt, usize> = BTreeMap::new();
    for tx in &txs {
        let mut seen = BTreeSet::new();
        for t in tx {
            seen.extend(enumerate_subtrees(t)?);
        }
        for p in seen {
            *counts.entry(p).or_default() += 1;
        }
    }
    let patterns = if total == 0 {
        BTreeSet::new()
    } else {
        counts.into_iter().filter(|(_, n)| *n >= need).map(|(p, _)| p).collect()
    };
    Ok(MalScdtSet { patterns, threshold: k, corpus_size: total })
}

/// [`brute_force_frequent_in`] with per-tree support.
pub fn brute_force_frequent(corpus: &Corpus, k: f64) -> Result<MalScdtSet, MinerError> {
    brute_force_frequent_in(corpus, k, SupportUnit::Tree)
}

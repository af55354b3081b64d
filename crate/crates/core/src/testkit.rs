//! Seeded generators and explicit-state oracles for the property suites.
//!
//! Everything here is deterministic for a given seed and independent of the
//! algorithms it is used to check.

use std::collections::{BTreeSet, VecDeque};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::miner::Corpus;
use crate::pds::{Config, ControlPoint, Pds, Rule, StackSymbol};
use crate::trees::{random_tree, Scdt};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every configuration reachable from `start` by direct rule application,
/// never exploring stacks deeper than `depth_cap` and stopping after
/// `count_cap` configurations.
pub fn bfs_configs(pds: &Pds, start: &Config, depth_cap: usize, count_cap: usize) -> BTreeSet<Config> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start.clone());
    while let Some(c) = queue.pop_front() {
        for next in pds.successors(&c) {
            if next.stack.len() > depth_cap || seen.contains(&next) {
                continue;
            }
            if seen.len() >= count_cap {
                return seen;
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    seen
}

#[derive(Clone, Copy, Debug)]
pub struct PdsBounds {
    pub points: usize,
    pub symbols: usize,
    pub rules: usize,
}

impl Default for PdsBounds {
    fn default() -> Self {
        PdsBounds { points: 5, symbols: 4, rules: 12 }
    }
}

/// A random normalized pushdown system together with a start configuration
/// `<p0, a>` for a random symbol `a`.
pub fn gen_pds(seed: u64, bounds: PdsBounds) -> (Pds, Config) {
    let mut rng = rng(seed);
    let n_points = rng.gen_range(1..=bounds.points);
    let n_syms = rng.gen_range(1..=bounds.symbols);
    let n_rules = rng.gen_range(0..=bounds.rules);
    let points: Vec<ControlPoint> = (0..n_points).map(|i| ControlPoint::new(format!("p{i}"))).collect();
    let syms: Vec<StackSymbol> = (0..n_syms)
        .map(|i| StackSymbol::value(((b'a' + i as u8) as char).to_string()))
        .collect();
    let mut rules = Vec::with_capacity(n_rules);
    for _ in 0..n_rules {
        let from = points.choose(&mut rng).unwrap().clone();
        let to = points.choose(&mut rng).unwrap().clone();
        let top = syms.choose(&mut rng).unwrap().clone();
        let len = rng.gen_range(0..=2);
        let push = (0..len).map(|_| syms.choose(&mut rng).unwrap().clone()).collect();
        rules.push(Rule::new(from, top, to, push));
    }
    let start = Config::new(points[0].clone(), vec![syms.choose(&mut rng).unwrap().clone()]);
    (Pds::new(points, syms, rules), start)
}

/// All configurations of `pds` with stack length at most `depth`.
pub fn all_configs(pds: &Pds, depth: usize) -> Vec<Config> {
    let mut words: Vec<Vec<StackSymbol>> = vec![Vec::new()];
    let mut layer: Vec<Vec<StackSymbol>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for a in pds.alphabet() {
                let mut w2 = w.clone();
                w2.push(a.clone());
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    pds.points()
        .iter()
        .flat_map(|p| words.iter().map(move |w| Config::new(p.clone(), w.clone())))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct TreeBounds {
    pub nodes: usize,
    pub symbols: usize,
    /// Largest parameter index used in edge colors.
    pub max_index: u32,
}

impl Default for TreeBounds {
    fn default() -> Self {
        TreeBounds { nodes: 6, symbols: 4, max_index: 2 }
    }
}

const TREE_SYMBOLS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// A random canonical tree with between 1 and `bounds.nodes` nodes.
pub fn gen_tree(rng: &mut impl Rng, bounds: TreeBounds) -> Scdt {
    let size = rng.gen_range(1..=bounds.nodes.max(1));
    let alphabet = &TREE_SYMBOLS[..bounds.symbols.clamp(1, TREE_SYMBOLS.len())];
    random_tree(rng, size, alphabet, bounds.max_index.max(1))
}

/// A corpus of between 1 and `max_trees` random single-tree programs.
pub fn gen_corpus(seed: u64, max_trees: usize, bounds: TreeBounds) -> Corpus {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=max_trees.max(1));
    Corpus::from_trees((0..n).map(|_| gen_tree(&mut rng, bounds)))
}

/// Directory holding the committed golden corpus.
pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Sorted `.tasm` files of a golden corpus subdirectory.
pub fn golden_files(subdir: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(golden_dir().join(subdir))
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    files.retain(|p| p.extension().is_some_and(|e| e == "tasm"));
    files.sort();
    files
}

/// Header of every program produced by [`gen_tasm`].
pub const GEN_TASM_APIS: &str = "\
.api F arity=2 types=out,in
.api G arity=1 types=in
.api H arity=2 types=in|out,in
";

/// A random `.tasm` program of up to `max_len` instructions. Jumps and
/// procedure calls only go forward, so the reachable configuration space
/// is finite and small.
pub fn gen_tasm(seed: u64, max_len: usize) -> String {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=max_len.max(2));
    let lits = ["m", "n", "0", "1"];
    let mut s = format!("{GEN_TASM_APIS}.entry L0\n");
    for i in 0..n {
        let forward = |rng: &mut ChaCha8Rng| format!("L{}", rng.gen_range(i + 1..=n - 1));
        let op = match (rng.gen_range(0..12), i + 1 < n) {
            (0..=2, _) => format!("push {}", lits.choose(&mut rng).unwrap()),
            (3, _) => "push eax".to_string(),
            (4, _) => format!("mov eax {}", lits.choose(&mut rng).unwrap()),
            (5, _) => "pop eax".to_string(),
            (6..=8, _) => format!("call {}", ["F", "G", "H"].choose(&mut rng).unwrap()),
            (9, true) => format!("jz {}", forward(&mut rng)),
            (10, true) => format!("call {}", forward(&mut rng)),
            (11, _) => "ret".to_string(),
            _ => "halt".to_string(),
        };
        s.push_str(&format!("L{i}: {op}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_node_bound_gives_leaf() {
        let mut r = rng(1);
        let t = gen_tree(&mut r, TreeBounds { nodes: 1, ..TreeBounds::default() });
        assert!(t.is_leaf());
    }

    #[test]
    fn same_seed_same_output() {
        assert_eq!(gen_corpus(7, 8, TreeBounds::default()), gen_corpus(7, 8, TreeBounds::default()));
        assert_eq!(gen_pds(7, PdsBounds::default()), gen_pds(7, PdsBounds::default()));
    }

    #[test]
    fn generated_trees_are_canonical() {
        let mut r = rng(3);
        for _ in 0..1000 {
            let t = gen_tree(&mut r, TreeBounds::default());
            assert!(t.is_canonical() && t.size() <= 6);
        }
    }

    #[test]
    fn bfs_without_rules_is_start() {
        let pds = Pds::new([ControlPoint::new("p")], [StackSymbol::value("a")], []);
        let start = Config::new(ControlPoint::new("p"), vec![StackSymbol::value("a")]);
        assert_eq!(bfs_configs(&pds, &start, 4, 100), BTreeSet::from([start]));
    }
}

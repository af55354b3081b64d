//! Hedge edge-labeled tree automata recognizing every tree that contains a
//! stored pattern.
//!
//! States are one state per symbol and one state per distinct subtree of
//! the stored patterns; the final states are the patterns themselves. Three
//! kinds of rules are used:
//!
//! - every node labeled `f` reaches the symbol state of `f`, whatever its
//!   children (this default also covers symbols never seen in a pattern);
//! - a node reaches the state of subtree `s` when its label is the root of
//!   `s` and the children of `s` can be matched injectively to distinct
//!   children of the node with the same color that reach the matching states;
//! - a node carries every final state reached by one of its descendants.
//!
//! Carried final states are kept apart from the states a node reaches
//! itself, so that a pattern which is also a subtree of another pattern is
//! not mistaken for a child of that pattern. A tree is accepted when its
//! root reaches or carries a final state, which happens exactly when some
//! pattern embeds somewhere in the tree.

mod db;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::trees::{embeds, perfect_matching, Color, Scdt};

pub use db::{DbError, SignatureDb, DB_VERSION};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeltaState {
    Symbol(Arc<str>),
    Pattern(Scdt),
}

impl fmt::Display for HeltaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeltaState::Symbol(s) => write!(f, "q[{s}]"),
            HeltaState::Pattern(t) => write!(f, "q<{t}>"),
        }
    }
}

/// `root(... c1(q1) ... cn(qn) ...) -> target`: the required colored
/// children must be matched by distinct children; others are ignored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HeltaRule {
    pub root: Arc<str>,
    pub required: Vec<(Color, usize)>,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Helta {
    states: Vec<HeltaState>,
    index: HashMap<HeltaState, usize>,
    rules: Vec<HeltaRule>,
    by_root: HashMap<Arc<str>, Vec<usize>>,
    finals: BTreeSet<usize>,
    symbols: BTreeSet<Arc<str>>,
}

/// Outcome of running an automaton on the trees of one program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Benign,
    Malicious { pattern: Scdt, tree: Scdt },
}

impl Verdict {
    pub fn is_malicious(&self) -> bool {
        matches!(self, Verdict::Malicious { .. })
    }
}

impl Helta {
    fn state(&mut self, s: HeltaState) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        self.states.push(s.clone());
        self.index.insert(s, self.states.len() - 1);
        self.states.len() - 1
    }

    /// Builds the automaton for `patterns`.
    pub fn infer<'a>(patterns: impl IntoIterator<Item = &'a Scdt>) -> Helta {
        let mut h = Helta {
            states: Vec::new(),
            index: HashMap::new(),
            rules: Vec::new(),
            by_root: HashMap::new(),
            finals: BTreeSet::new(),
            symbols: BTreeSet::new(),
        };
        let patterns: BTreeSet<&Scdt> = patterns.into_iter().collect();
        let mut subtrees: BTreeSet<&Scdt> = BTreeSet::new();
        for p in &patterns {
            subtrees.extend(p.nodes());
        }
        for s in &subtrees {
            h.symbols.insert(Arc::from(s.root()));
        }
        for sym in h.symbols.clone() {
            h.state(HeltaState::Symbol(sym));
        }
        // Children are strictly smaller, so ascending size order declares
        // every required state before the rule that uses it.
        let mut by_size: Vec<&Scdt> = subtrees.into_iter().collect();
        by_size.sort_by_key(|s| (s.size(), (*s).clone()));
        let mut rules = BTreeSet::new();
        for s in by_size {
            let required = s
                .children()
                .iter()
                .map(|(c, child)| (*c, h.index[&HeltaState::Pattern(child.clone())]))
                .collect();
            let target = h.state(HeltaState::Pattern(s.clone()));
            rules.insert(HeltaRule { root: Arc::from(s.root()), required, target });
        }
        for r in rules {
            h.by_root.entry(r.root.clone()).or_default().push(h.rules.len());
            h.rules.push(r);
        }
        for p in patterns {
            let f = h.index[&HeltaState::Pattern(p.clone())];
            h.finals.insert(f);
        }
        h
    }

    pub fn states(&self) -> &[HeltaState] {
        &self.states
    }

    /// Rules for the subtrees of the patterns; the symbol and propagation
    /// rules are implicit.
    pub fn rules(&self) -> &[HeltaRule] {
        &self.rules
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    /// Symbols occurring in the patterns.
    pub fn symbols(&self) -> &BTreeSet<Arc<str>> {
        &self.symbols
    }

    /// Patterns recognized by the automaton, in canonical order.
    pub fn patterns(&self) -> Vec<&Scdt> {
        let mut out: Vec<&Scdt> = self
            .finals
            .iter()
            .map(|&f| match &self.states[f] {
                HeltaState::Pattern(t) => t,
                HeltaState::Symbol(_) => unreachable!("finals are pattern states"),
            })
            .collect();
        out.sort();
        out
    }

    /// Pattern states reached at the root of `t`, and the final states
    /// reached at `t` or anywhere below it. Subtree rules only look at the
    /// first set of each child: a final state inherited from deep below a
    /// child says nothing about the child itself.
    fn eval(&self, t: &Scdt) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let kids: Vec<(BTreeSet<usize>, BTreeSet<usize>)> = t.children().iter().map(|(_, c)| self.eval(c)).collect();
        let mut here: BTreeSet<usize> = BTreeSet::new();
        if let Some(rs) = self.by_root.get(t.root()) {
            for &ri in rs {
                let r = &self.rules[ri];
                if r.required.len() > kids.len() {
                    continue;
                }
                let compat: Vec<Vec<usize>> = r
                    .required
                    .iter()
                    .map(|(c, q)| {
                        t.children()
                            .iter()
                            .zip(&kids)
                            .enumerate()
                            .filter(|(_, ((cc, _), (ks, _)))| cc == c && ks.contains(q))
                            .map(|(j, _)| j)
                            .collect()
                    })
                    .collect();
                if perfect_matching(&compat, kids.len()) {
                    here.insert(r.target);
                }
            }
        }
        let mut finals: BTreeSet<usize> = here.intersection(&self.finals).copied().collect();
        for (_, below) in &kids {
            finals.extend(below.iter().copied());
        }
        (here, finals)
    }

    /// Patterns occurring in `t`, in canonical order.
    pub fn matched(&self, t: &Scdt) -> Vec<&Scdt> {
        let (_, finals) = self.eval(t);
        let mut out: Vec<&Scdt> = finals
            .iter()
            .map(|&f| match &self.states[f] {
                HeltaState::Pattern(p) => p,
                HeltaState::Symbol(_) => unreachable!("finals are pattern states"),
            })
            .collect();
        out.sort();
        out
    }

    pub fn accepts(&self, t: &Scdt) -> bool {
        !self.eval(t).1.is_empty()
    }

    /// Malicious with the first accepted tree and its largest matched
    /// pattern (ties broken by canonical order), or benign.
    pub fn detect<'a>(&self, trees: impl IntoIterator<Item = &'a Scdt>) -> Verdict {
        for t in trees {
            if let Some(p) = self.matched(t).into_iter().max_by_key(|p| (p.size(), *p)) {
                return Verdict::Malicious { pattern: p.clone(), tree: t.clone() };
            }
        }
        Verdict::Benign
    }

    /// Counts of states, explicit rules, implicit symbol rules and implicit
    /// propagation rules.
    pub fn stats(&self) -> BTreeMap<&'static str, usize> {
        BTreeMap::from([
            ("states", self.states.len()),
            ("finals", self.finals.len()),
            ("symbols", self.symbols.len()),
            ("subtree_rules", self.rules.len()),
            ("symbol_rules", self.symbols.len()),
            ("propagation_rules", self.finals.len() * self.symbols.len()),
        ])
    }

    /// One state per line, then one rule per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("states {}\n", self.states.len()));
        for (i, q) in self.states.iter().enumerate() {
            let mark = if self.finals.contains(&i) { " final" } else { "" };
            s.push_str(&format!("  {i}: {q}{mark}\n"));
        }
        s.push_str(&format!("rules {}\n", self.rules.len()));
        for r in &self.rules {
            let req: Vec<String> = r.required.iter().map(|(c, q)| format!("{c}({q})")).collect();
            s.push_str(&format!("  {}(..{}..) -> {}\n", r.root, req.join(".."), r.target));
        }
        s
    }
}

/// Reference check: does `pattern` embed at some node of `t`?
pub fn embedding_oracle(pattern: &Scdt, t: &Scdt) -> bool {
    embeds(pattern, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_scdt;

    fn t(s: &str) -> Scdt {
        parse_scdt(s).unwrap()
    }

    #[test]
    fn copy_sig_states() {
        let copy_sig = t("GetModuleFileName(1(0),2>1(CopyFile))");
        let h = Helta::infer([&copy_sig]);
        let patterns: Vec<String> = h
            .states()
            .iter()
            .filter_map(|q| match q {
                HeltaState::Pattern(p) => Some(p.to_string()),
                _ => None,
            })
            .collect();
        assert_eq!(patterns, vec!["0", "CopyFile", "GetModuleFileName(1(0),2>1(CopyFile))"]);
        assert_eq!(h.states().len(), 3 + 3);
        assert_eq!(h.patterns(), vec![&copy_sig]);
    }

    #[test]
    fn copy_sig_acceptance() {
        let copy_sig = t("GetModuleFileName(1(0),2>1(CopyFile))");
        let h = Helta::infer([&copy_sig]);
        assert!(h.accepts(&copy_sig));
        assert!(h.accepts(&t("GetModuleFileName(1(0),1>1(ExitProcess),2>1(CopyFile))")));
        assert!(!h.accepts(&t("GetModuleFileName(1(0))")));
        assert!(h.accepts(&t("Main(1>1(X(2(GetModuleFileName(1(0),2>1(CopyFile(1(7))))))))")));
    }

    #[test]
    fn leaf_pattern_matches_symbol_anywhere() {
        let h = Helta::infer([&t("a")]);
        assert!(h.accepts(&t("x(1(y(2(a))))")));
        assert!(!h.accepts(&t("x(1(y(2(b))))")));
    }

    #[test]
    fn same_color_siblings_need_distinct_children() {
        let p = t("f(1(a),1(a(1(b))))");
        let h = Helta::infer([&p]);
        assert!(h.accepts(&t("f(1(a(1(b))),1(a(1(c))))")));
        assert!(!h.accepts(&t("f(1(a(1(b))))")));
    }

    #[test]
    fn nested_final_is_not_a_child_state() {
        let h = Helta::infer([&t("a"), &t("a(2(a))")]);
        assert_eq!(h.matched(&t("a(2(b(1(a))))")), vec![&t("a")]);
        assert_eq!(h.matched(&t("a(2(a))")), vec![&t("a"), &t("a(2(a))")]);
    }

    #[test]
    fn detect_examples() {
        let copy_sig = t("GetModuleFileName(1(0),2>1(CopyFile))");
        let copy_with_exit = t("GetModuleFileName(1(0),1>1(ExitProcess),2>1(CopyFile))");
        let h = Helta::infer([&copy_sig]);
        assert_eq!(h.detect([]), Verdict::Benign);
        assert_eq!(h.detect([&copy_with_exit]), Verdict::Malicious { pattern: copy_sig.clone(), tree: copy_with_exit.clone() });
        let h = Helta::infer([&copy_sig, &t("GetModuleFileName(1(0))")]);
        assert_eq!(h.detect([&copy_with_exit]), Verdict::Malicious { pattern: copy_sig.clone(), tree: copy_with_exit.clone() });
        let empty = Helta::infer([]);
        assert_eq!(empty.detect([&copy_with_exit]), Verdict::Benign);
    }
}

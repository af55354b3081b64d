//! System-call dependency trees.
//!
//! An [`Scdt`] is an unranked tree whose nodes carry API names or values and
//! whose edges carry a [`Color`]: a parameter index, or a data flow from an
//! output parameter of one call to an input parameter of another. Trees are
//! always kept in canonical form: every node's children are sorted strictly
//! ascending under the derived total order, without repetitions.

mod omega;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use omega::{omega_sample, random_tree, OMEGA_ALPHABET};
pub use text::parse_scdt;

/// Largest number of distinct subtrees [`enumerate_subtrees`] produces by default.
pub const SUBTREE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("more than {cap} distinct subtrees")]
    TooManySubtrees { cap: usize },

    #[error("tree of {size} nodes plus a budget of {budget} exceeds the {cap}-node limit")]
    BudgetExhausted { size: usize, budget: usize, cap: usize },

    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
}

/// Edge label. `Param(n)` links a call to the value of its parameter `n`;
/// `Flow(n, m)` links it to a later call whose input parameter `m` reads
/// the value written to output parameter `n`. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Param(u32),
    Flow(u32, u32),
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Param(n) => write!(f, "{n}"),
            Color::Flow(n, m) => write!(f, "{n}>{m}"),
        }
    }
}

/// A tree in canonical form. The derived order compares the root symbol
/// first, then the child lists lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scdt {
    root: Arc<str>,
    children: Vec<(Color, Scdt)>,
}

/// A tree with children in arbitrary order, possibly repeated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTree {
    pub root: String,
    pub children: Vec<(Color, RawTree)>,
}

impl RawTree {
    pub fn leaf(root: impl Into<String>) -> Self {
        RawTree { root: root.into(), children: Vec::new() }
    }

    pub fn node(root: impl Into<String>, children: Vec<(Color, RawTree)>) -> Self {
        RawTree { root: root.into(), children }
    }
}

/// Canonical form of `raw`.
pub fn canonicalize(raw: &RawTree) -> Scdt {
    Scdt::new(&raw.root, raw.children.iter().map(|(c, t)| (*c, canonicalize(t))).collect())
}

impl Scdt {
    /// Builds a node, sorting and deduplicating `children`.
    pub fn new(root: impl AsRef<str>, mut children: Vec<(Color, Scdt)>) -> Self {
        children.sort();
        children.dedup();
        Scdt { root: Arc::from(root.as_ref()), children }
    }

    pub fn leaf(root: impl AsRef<str>) -> Self {
        Scdt { root: Arc::from(root.as_ref()), children: Vec::new() }
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn children(&self) -> &[(Color, Scdt)] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.size()).sum::<usize>()
    }

    /// Length in edges of the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.children.iter().map(|(_, c)| c.height() + 1).max().unwrap_or(0)
    }

    /// All nodes in preorder.
    pub fn nodes(&self) -> Vec<&Scdt> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let n = out[i];
            out.extend(n.children.iter().map(|(_, c)| c));
            i += 1;
        }
        out
    }

    /// Every root symbol occurring in the tree.
    pub fn symbols(&self) -> BTreeSet<&str> {
        self.nodes().into_iter().map(|n| n.root()).collect()
    }

    /// Does the tree satisfy the canonical-form invariant? Always true for
    /// values built through this module.
    pub fn is_canonical(&self) -> bool {
        self.children.windows(2).all(|w| w[0] < w[1]) && self.children.iter().all(|(_, c)| c.is_canonical())
    }

    pub fn to_raw(&self) -> RawTree {
        RawTree {
            root: self.root.to_string(),
            children: self.children.iter().map(|(c, t)| (*c, t.to_raw())).collect(),
        }
    }
}

impl fmt::Display for Scdt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root)?;
        if self.children.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, (c, t)) in self.children.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}({t})")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Scdt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Adds `c(t)` below the root of `into`, keeping canonical form. Adding a
/// child that is already present leaves the tree unchanged.
pub fn insert_subtree(c: Color, t: Scdt, into: &Scdt) -> Scdt {
    let mut out = into.clone();
    let item = (c, t);
    if let Err(pos) = out.children.binary_search(&item) {
        out.children.insert(pos, item);
    }
    out
}

/// Exact containment: some node of `hay` equals `t`.
pub fn subtree_of(t: &Scdt, hay: &Scdt) -> bool {
    if t.size() > hay.size() {
        return false;
    }
    hay.nodes().into_iter().any(|n| n == t)
}

/// Does `pattern` embed in `t` with its root mapped to the root of `t`?
/// Labels must agree and the pattern's children must map injectively onto
/// children of `t` with the same color, recursively.
pub fn embeds_at(pattern: &Scdt, t: &Scdt) -> bool {
    if pattern.root != t.root || pattern.children.len() > t.children.len() {
        return false;
    }
    let compat: Vec<Vec<usize>> = pattern
        .children
        .iter()
        .map(|(pc, ps)| {
            t.children
                .iter()
                .enumerate()
                .filter(|(_, (tc, ts))| tc == pc && embeds_at(ps, ts))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    perfect_matching(&compat, t.children.len())
}

/// Does `pattern` embed at some node of `t`?
pub fn embeds(pattern: &Scdt, t: &Scdt) -> bool {
    t.nodes().into_iter().any(|n| embeds_at(pattern, n))
}

/// Can every left vertex `i` be matched to a distinct right vertex from
/// `compat[i]`? Augmenting-path bipartite matching.
pub(crate) fn perfect_matching(compat: &[Vec<usize>], right: usize) -> bool {
    fn augment(i: usize, compat: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &compat[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, compat, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..compat.len()).all(|i| {
        let mut seen = vec![false; right];
        augment(i, compat, &mut owner, &mut seen)
    })
}

/// Every tree that embeds at some node of `t`: a node together with any
/// subset of its children, each reduced the same way. Fails once more than
/// `cap` distinct trees have been produced.
pub fn enumerate_subtrees_capped(t: &Scdt, cap: usize) -> Result<BTreeSet<Scdt>, TreeError> {
    fn rooted(t: &Scdt, cap: usize) -> Result<BTreeSet<Scdt>, TreeError> {
        let mut acc = BTreeSet::from([Scdt::leaf(t.root())]);
        for (c, child) in &t.children {
            let subs = rooted(child, cap)?;
            let mut next = acc.clone();
            for base in &acc {
                for s in &subs {
                    next.insert(insert_subtree(*c, s.clone(), base));
                    if next.len() > cap {
                        return Err(TreeError::TooManySubtrees { cap });
                    }
                }
            }
            acc = next;
        }
        Ok(acc)
    }
    let mut out = BTreeSet::new();
    for n in t.nodes() {
        out.extend(rooted(n, cap)?);
        if out.len() > cap {
            return Err(TreeError::TooManySubtrees { cap });
        }
    }
    Ok(out)
}

/// [`enumerate_subtrees_capped`] with the default cap.
pub fn enumerate_subtrees(t: &Scdt) -> Result<BTreeSet<Scdt>, TreeError> {
    enumerate_subtrees_capped(t, SUBTREE_CAP)
}

//! Pushdown systems and regular configuration sets.
//!
//! A [`Pds`] is a finite set of control points, a finite stack alphabet and
//! a set of rules `<p, a> -> <q, w>`. Regular (possibly infinite) sets of
//! configurations are represented by a [`MultiAutomaton`] whose initial
//! states are the control points. [`post_star`] and [`pre_star`] compute the
//! forward and backward reachability closures by saturation.

mod automaton;
mod saturation;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use automaton::{MaState, MultiAutomaton, StateId};
pub use saturation::{post_star, pre_star};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdsError {
    #[error("rule `{0}` pushes more than two symbols; normalize the pushdown system first")]
    Unnormalized(String),

    #[error("unknown control point `{0}`")]
    UnknownControlPoint(String),

    #[error("automaton control points do not match the pushdown system")]
    SeedMismatch,
}

/// A control point of a pushdown system.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ControlPoint(Arc<str>);

impl ControlPoint {
    pub fn new(name: impl AsRef<str>) -> Self {
        ControlPoint(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ControlPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ControlPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A stack symbol.
///
/// `Top` is the single "unknown value" symbol. `Bottom` marks the bottom of
/// the stack: whatever lies below it is unknown, so popping it yields an
/// unknown value and leaves the marker in place.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StackSymbol {
    Value(Arc<str>),
    /// Return address; carries the label execution resumes at.
    Ret(Arc<str>),
    Top,
    Bottom,
}

impl StackSymbol {
    pub fn value(text: impl AsRef<str>) -> Self {
        StackSymbol::Value(Arc::from(text.as_ref()))
    }

    pub fn ret(label: impl AsRef<str>) -> Self {
        StackSymbol::Ret(Arc::from(label.as_ref()))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, StackSymbol::Value(_))
    }

    pub fn as_literal(&self) -> Option<&str> {
        match self {
            StackSymbol::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for StackSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackSymbol::Value(v) => f.write_str(v),
            StackSymbol::Ret(l) => write!(f, "ret:{l}"),
            StackSymbol::Top => f.write_str("#top"),
            StackSymbol::Bottom => f.write_str("#bot"),
        }
    }
}

impl fmt::Debug for StackSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `<from, top> -> <to, push>`; `push[0]` becomes the new top of stack.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rule {
    pub from: ControlPoint,
    pub top: StackSymbol,
    pub to: ControlPoint,
    pub push: Vec<StackSymbol>,
}

impl Rule {
    pub fn new(
        from: ControlPoint,
        top: StackSymbol,
        to: ControlPoint,
        push: Vec<StackSymbol>,
    ) -> Self {
        Rule { from, top, to, push }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}> -> <{},", self.from, self.top, self.to)?;
        if self.push.is_empty() {
            f.write_str(" eps")?;
        }
        for s in &self.push {
            write!(f, " {s}")?;
        }
        f.write_str(">")
    }
}

/// A configuration `<point, stack>`; `stack[0]` is the top.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Config {
    pub point: ControlPoint,
    pub stack: Vec<StackSymbol>,
}

impl Config {
    pub fn new(point: ControlPoint, stack: Vec<StackSymbol>) -> Self {
        Config { point, stack }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{} |", self.point)?;
        for s in &self.stack {
            write!(f, " {s}")?;
        }
        f.write_str(">")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pds {
    points: Vec<ControlPoint>,
    alphabet: Vec<StackSymbol>,
    rules: Vec<Rule>,
    index: HashMap<ControlPoint, usize>,
}

impl Pds {
    /// Builds a pushdown system. Control points and stack symbols mentioned
    /// by rules are added to the given ones; everything is kept sorted.
    pub fn new(
        points: impl IntoIterator<Item = ControlPoint>,
        alphabet: impl IntoIterator<Item = StackSymbol>,
        rules: impl IntoIterator<Item = Rule>,
    ) -> Self {
        let rules: BTreeSet<Rule> = rules.into_iter().collect();
        let mut pts: BTreeSet<ControlPoint> = points.into_iter().collect();
        let mut syms: BTreeSet<StackSymbol> = alphabet.into_iter().collect();
        for r in &rules {
            pts.insert(r.from.clone());
            pts.insert(r.to.clone());
            syms.insert(r.top.clone());
            syms.extend(r.push.iter().cloned());
        }
        let points: Vec<ControlPoint> = pts.into_iter().collect();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Pds {
            points,
            alphabet: syms.into_iter().collect(),
            rules: rules.into_iter().collect(),
            index,
        }
    }

    pub fn points(&self) -> &[ControlPoint] {
        &self.points
    }

    pub fn alphabet(&self) -> &[StackSymbol] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn point_index(&self, p: &ControlPoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains_point(&self, p: &ControlPoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn is_normalized(&self) -> bool {
        self.rules.iter().all(|r| r.push.len() <= 2)
    }

    /// Splits every rule pushing more than two symbols into a chain of
    /// push-2 rules through fresh control points `from~i~k`, where `i` is
    /// the rule's position in the sorted rule list.
    pub fn normalize(&self) -> Pds {
        let mut out = Vec::with_capacity(self.rules.len());
        for (i, r) in self.rules.iter().enumerate() {
            let k = r.push.len();
            if k <= 2 {
                out.push(r.clone());
                continue;
            }
            let fresh = |j: usize| ControlPoint::new(format!("{}~{}~{}", r.from, i, j));
            out.push(Rule::new(
                r.from.clone(),
                r.top.clone(),
                fresh(1),
                vec![r.push[k - 2].clone(), r.push[k - 1].clone()],
            ));
            // At fresh(j) the top is push[k-1-j]; expand it to push[k-2-j] push[k-1-j].
            for j in 1..k - 1 {
                let top = r.push[k - 1 - j].clone();
                let below = r.push[k - 2 - j].clone();
                let to = if j == k - 2 { r.to.clone() } else { fresh(j + 1) };
                out.push(Rule::new(fresh(j), top.clone(), to, vec![below, top]));
            }
        }
        Pds::new(self.points.iter().cloned(), self.alphabet.iter().cloned(), out)
    }

    /// Immediate successors of a configuration.
    pub fn successors(&self, c: &Config) -> Vec<Config> {
        let Some(top) = c.stack.first() else {
            return Vec::new();
        };
        self.rules
            .iter()
            .filter(|r| r.from == c.point && &r.top == top)
            .map(|r| {
                let mut stack = r.push.clone();
                stack.extend_from_slice(&c.stack[1..]);
                Config::new(r.to.clone(), stack)
            })
            .collect()
    }

    /// Debug dump: points, alphabet, then one rule per line, sorted.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("points {}\n", self.points.len()));
        for p in &self.points {
            s.push_str(&format!("  {p}\n"));
        }
        let syms: Vec<String> = self.alphabet.iter().map(|a| a.to_string()).collect();
        s.push_str(&format!("alphabet {}\n", syms.join(" ")));
        s.push_str(&format!("rules {}\n", self.rules.len()));
        for r in &self.rules {
            s.push_str(&format!("  {r}\n"));
        }
        s
    }
}

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::{Config, ControlPoint, Pds, PdsError, StackSymbol};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Where an automaton state came from. Names are derived from provenance so
/// that dumps are reproducible.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum MaState {
    /// Initial state standing for a control point.
    Control(ControlPoint),
    /// State `q_{p,a}` created by post* for push rules targeting `<p, a ...>`.
    Mid(ControlPoint, StackSymbol),
    /// Copy of a control point's state used to remove incoming transitions.
    Shadow(ControlPoint),
    /// Any other non-initial state.
    Aux(usize),
}

impl fmt::Display for MaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaState::Control(p) => write!(f, "{p}"),
            MaState::Mid(p, a) => write!(f, "mid({p},{a})"),
            MaState::Shadow(p) => write!(f, "shadow({p})"),
            MaState::Aux(n) => write!(f, "aux{n}"),
        }
    }
}

/// A finite automaton over the stack alphabet whose initial states are the
/// control points of a pushdown system. It accepts `<p, w>` iff some path
/// labelled `w` leads from `p` to a final state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiAutomaton {
    states: Vec<MaState>,
    controls: usize,
    control_index: HashMap<ControlPoint, StateId>,
    transitions: BTreeSet<(StateId, StackSymbol, StateId)>,
    finals: BTreeSet<StateId>,
}

impl MultiAutomaton {
    /// An automaton with one state per control point and nothing accepted.
    pub fn empty(pds: &Pds) -> Self {
        let states: Vec<MaState> = pds
            .points()
            .iter()
            .map(|p| MaState::Control(p.clone()))
            .collect();
        let control_index = pds
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), StateId(i)))
            .collect();
        MultiAutomaton {
            controls: states.len(),
            states,
            control_index,
            transitions: BTreeSet::new(),
            finals: BTreeSet::new(),
        }
    }

    /// Accepts exactly the given configurations (a trie over the stacks).
    pub fn from_configs<'a>(
        pds: &Pds,
        configs: impl IntoIterator<Item = &'a Config>,
    ) -> Result<Self, PdsError> {
        let mut ma = Self::empty(pds);
        let mut edges: HashMap<(StateId, StackSymbol), StateId> = HashMap::new();
        let mut sorted: Vec<&Config> = configs.into_iter().collect();
        sorted.sort();
        sorted.dedup();
        for c in sorted {
            let mut cur = ma.control_state(&c.point)?;
            for sym in &c.stack {
                cur = match edges.get(&(cur, sym.clone())) {
                    Some(&s) => s,
                    None => {
                        let s = ma.add_state(MaState::Aux(ma.states.len()));
                        ma.transitions.insert((cur, sym.clone(), s));
                        edges.insert((cur, sym.clone()), s);
                        s
                    }
                };
            }
            ma.finals.insert(cur);
        }
        Ok(ma)
    }

    pub fn add_state(&mut self, label: MaState) -> StateId {
        self.states.push(label);
        StateId(self.states.len() - 1)
    }

    pub fn add_transition(&mut self, from: StateId, sym: StackSymbol, to: StateId) {
        debug_assert!(from.0 < self.states.len() && to.0 < self.states.len());
        self.transitions.insert((from, sym, to));
    }

    pub fn set_final(&mut self, s: StateId) {
        self.finals.insert(s);
    }

    pub fn control_state(&self, p: &ControlPoint) -> Result<StateId, PdsError> {
        self.control_index
            .get(p)
            .copied()
            .ok_or_else(|| PdsError::UnknownControlPoint(p.to_string()))
    }

    pub fn control_points(&self) -> impl Iterator<Item = &ControlPoint> + '_ {
        self.states[..self.controls].iter().map(|s| match s {
            MaState::Control(p) => p,
            _ => unreachable!("initial states are control points"),
        })
    }

    pub fn num_controls(&self) -> usize {
        self.controls
    }

    pub fn is_control(&self, s: StateId) -> bool {
        s.0 < self.controls
    }

    pub fn states(&self) -> &[MaState] {
        &self.states
    }

    pub fn transitions(&self) -> &BTreeSet<(StateId, StackSymbol, StateId)> {
        &self.transitions
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals.contains(&s)
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (
        &mut Vec<MaState>,
        &mut BTreeSet<(StateId, StackSymbol, StateId)>,
        &mut BTreeSet<StateId>,
    ) {
        (&mut self.states, &mut self.transitions, &mut self.finals)
    }

    fn successors_map(&self) -> HashMap<(StateId, &StackSymbol), Vec<StateId>> {
        let mut m: HashMap<(StateId, &StackSymbol), Vec<StateId>> = HashMap::new();
        for (a, s, b) in &self.transitions {
            m.entry((*a, s)).or_default().push(*b);
        }
        m
    }

    /// Does the automaton accept `c`? Fails if `c.point` is not a control
    /// point of the automaton.
    pub fn accepts(&self, c: &Config) -> Result<bool, PdsError> {
        let start = self.control_state(&c.point)?;
        let succ = self.successors_map();
        let mut cur: BTreeSet<StateId> = BTreeSet::from([start]);
        for sym in &c.stack {
            let mut next = BTreeSet::new();
            for s in &cur {
                if let Some(ts) = succ.get(&(*s, sym)) {
                    next.extend(ts.iter().copied());
                }
            }
            if next.is_empty() {
                return Ok(false);
            }
            cur = next;
        }
        Ok(cur.iter().any(|s| self.finals.contains(s)))
    }

    /// All distinct `(word, end state)` pairs with `|word| = len` readable
    /// from `p`. Unknown control points yield the empty set.
    pub fn enumerate_from(
        &self,
        p: &ControlPoint,
        len: usize,
    ) -> BTreeSet<(Vec<StackSymbol>, StateId)> {
        let Ok(start) = self.control_state(p) else {
            return BTreeSet::new();
        };
        let mut out_edges: BTreeMap<StateId, Vec<(&StackSymbol, StateId)>> = BTreeMap::new();
        for (a, s, b) in &self.transitions {
            out_edges.entry(*a).or_default().push((s, *b));
        }
        let mut frontier: BTreeSet<(Vec<StackSymbol>, StateId)> =
            BTreeSet::from([(Vec::new(), start)]);
        for _ in 0..len {
            let mut next = BTreeSet::new();
            for (word, s) in &frontier {
                if let Some(es) = out_edges.get(s) {
                    for (sym, t) in es {
                        let mut w = word.clone();
                        w.push((*sym).clone());
                        next.insert((w, *t));
                    }
                }
            }
            frontier = next;
        }
        frontier
    }

    /// `co[s]` is true iff a final state is reachable from `s`.
    pub fn coaccessible(&self) -> Vec<bool> {
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); self.states.len()];
        for (a, _, b) in &self.transitions {
            preds[b.0].push(*a);
        }
        let mut co = vec![false; self.states.len()];
        let mut stack: Vec<StateId> = self.finals.iter().copied().collect();
        for s in &stack {
            co[s.0] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &preds[s.0] {
                if !co[p.0] {
                    co[p.0] = true;
                    stack.push(p);
                }
            }
        }
        co
    }

    /// Every accepted configuration with stack length at most `depth`.
    pub fn configs_up_to(&self, depth: usize) -> BTreeSet<Config> {
        let mut out = BTreeSet::new();
        for p in self.control_points() {
            for len in 0..=depth {
                for (word, s) in self.enumerate_from(p, len) {
                    if self.is_final(s) {
                        out.insert(Config::new(p.clone(), word));
                    }
                }
            }
        }
        out
    }

    /// Language-preserving copy with no transitions entering initial states,
    /// as required by the saturation procedures.
    pub fn without_initial_incoming(&self) -> MultiAutomaton {
        let entered: BTreeSet<StateId> = self
            .transitions
            .iter()
            .filter(|(_, _, b)| self.is_control(*b))
            .map(|(_, _, b)| *b)
            .collect();
        if entered.is_empty() {
            return self.clone();
        }
        let mut ma = self.clone();
        let mut shadow: HashMap<StateId, StateId> = HashMap::new();
        for &c in &entered {
            let label = match &self.states[c.0] {
                MaState::Control(p) => MaState::Shadow(p.clone()),
                _ => unreachable!(),
            };
            let s = ma.add_state(label);
            shadow.insert(c, s);
            if self.is_final(c) {
                ma.finals.insert(s);
            }
        }
        let redirect = |s: StateId| shadow.get(&s).copied().unwrap_or(s);
        let mut transitions = BTreeSet::new();
        for (a, sym, b) in &self.transitions {
            transitions.insert((*a, sym.clone(), redirect(*b)));
            if let Some(&sa) = shadow.get(a) {
                transitions.insert((sa, sym.clone(), redirect(*b)));
            }
        }
        ma.transitions = transitions;
        ma
    }

    /// Debug dump: states, finals, one transition per line, sorted.
    pub fn dump(&self) -> String {
        let name = |s: &StateId| format!("{}:{}", s, self.states[s.0]);
        let mut out = format!(
            "states {} (initial {})\n",
            self.states.len(),
            self.controls
        );
        let finals: Vec<String> = self.finals.iter().map(name).collect();
        out.push_str(&format!("finals {}\n", finals.join(" ")));
        out.push_str(&format!("transitions {}\n", self.transitions.len()));
        let mut lines: Vec<String> = self
            .transitions
            .iter()
            .map(|(a, sym, b)| format!("  {} --{}--> {}", name(a), sym, name(b)))
            .collect();
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}

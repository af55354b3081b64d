//! Saturation procedures for post* and pre* on multi-automata.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::automaton::{MaState, MultiAutomaton, StateId};
use super::{Pds, PdsError, StackSymbol};

fn check_inputs(pds: &Pds, seed: &MultiAutomaton) -> Result<(), PdsError> {
    if let Some(r) = pds.rules().iter().find(|r| r.push.len() > 2) {
        return Err(PdsError::Unnormalized(r.to_string()));
    }
    if seed.num_controls() != pds.points().len()
        || !seed.control_points().eq(pds.points().iter())
    {
        return Err(PdsError::SeedMismatch);
    }
    Ok(())
}

/// Automaton accepting every configuration reachable from one accepted by
/// `seed`.
pub fn post_star(pds: &Pds, seed: &MultiAutomaton) -> Result<MultiAutomaton, PdsError> {
    check_inputs(pds, seed)?;
    let mut ma = seed.without_initial_incoming();

    // Rules grouped by head (control state, top symbol).
    let mut by_head: HashMap<(StateId, &StackSymbol), Vec<(StateId, &[StackSymbol])>> =
        HashMap::new();
    let mut mid: HashMap<(StateId, StackSymbol), StateId> = HashMap::new();
    for r in pds.rules() {
        let from = StateId(pds.point_index(&r.from).expect("rule point"));
        let to = StateId(pds.point_index(&r.to).expect("rule point"));
        by_head.entry((from, &r.top)).or_default().push((to, &r.push));
        if r.push.len() == 2 && !mid.contains_key(&(to, r.push[0].clone())) {
            let s = ma.add_state(MaState::Mid(r.to.clone(), r.push[0].clone()));
            mid.insert((to, r.push[0].clone()), s);
        }
    }

    // `None` labels an epsilon transition; those only leave control states.
    type Trans = (StateId, Option<StackSymbol>, StateId);
    let mut rel: HashSet<Trans> = HashSet::new();
    let mut out: HashMap<StateId, Vec<(StackSymbol, StateId)>> = HashMap::new();
    let mut eps_into: HashMap<StateId, Vec<StateId>> = HashMap::new();
    let mut work: VecDeque<Trans> = VecDeque::new();

    for (a, sym, b) in ma.transitions() {
        let t = (*a, Some(sym.clone()), *b);
        if ma.is_control(*a) {
            work.push_back(t);
        } else {
            out.entry(*a).or_default().push((sym.clone(), *b));
            rel.insert(t);
        }
    }

    while let Some(t) = work.pop_front() {
        if rel.contains(&t) {
            continue;
        }
        rel.insert(t.clone());
        let (p, label, q) = t;
        match label {
            Some(gamma) => {
                out.entry(p).or_default().push((gamma.clone(), q));
                let Some(rules) = by_head.get(&(p, &gamma)) else {
                    continue;
                };
                for &(to, push) in rules {
                    match push {
                        [] => work.push_back((to, None, q)),
                        [g1] => work.push_back((to, Some(g1.clone()), q)),
                        [g1, g2] => {
                            let m = mid[&(to, g1.clone())];
                            work.push_back((to, Some(g1.clone()), m));
                            let inner = (m, Some(g2.clone()), q);
                            if rel.insert(inner) {
                                out.entry(m).or_default().push((g2.clone(), q));
                            }
                            if let Some(srcs) = eps_into.get(&m) {
                                for &src in srcs {
                                    work.push_back((src, Some(g2.clone()), q));
                                }
                            }
                        }
                        _ => unreachable!("checked by check_inputs"),
                    }
                }
            }
            None => {
                eps_into.entry(q).or_default().push(p);
                if let Some(edges) = out.get(&q) {
                    for (g, q2) in edges.clone() {
                        work.push_back((p, Some(g), q2));
                    }
                }
            }
        }
    }

    let mut result: BTreeSet<(StateId, StackSymbol, StateId)> = BTreeSet::new();
    let mut eps: Vec<(StateId, StateId)> = Vec::new();
    for (a, label, b) in rel {
        match label {
            Some(g) => {
                result.insert((a, g, b));
            }
            None => eps.push((a, b)),
        }
    }
    let (_, transitions, finals) = ma.parts_mut();
    *transitions = result;
    for (a, b) in eps {
        if finals.contains(&b) {
            finals.insert(a);
        }
    }
    Ok(ma)
}

/// Automaton accepting every configuration from which some configuration
/// accepted by `seed` is reachable.
pub fn pre_star(pds: &Pds, seed: &MultiAutomaton) -> Result<MultiAutomaton, PdsError> {
    check_inputs(pds, seed)?;
    let mut ma = seed.without_initial_incoming();
    let idx = |p| StateId(pds.point_index(p).expect("rule point"));

    // <p1, g1> -> <q, g>: keyed by (q, g).
    let mut swaps: HashMap<(StateId, StackSymbol), Vec<(StateId, StackSymbol)>> = HashMap::new();
    // <p1, g1> -> <q, g g2>: keyed by (q, g).
    let mut pushes: HashMap<(StateId, StackSymbol), Vec<(StateId, StackSymbol, StackSymbol)>> =
        HashMap::new();
    let mut work: VecDeque<(StateId, StackSymbol, StateId)> =
        ma.transitions().iter().cloned().collect();
    for r in pds.rules() {
        let from = idx(&r.from);
        let to = idx(&r.to);
        match r.push.as_slice() {
            [] => work.push_back((from, r.top.clone(), to)),
            [g] => swaps
                .entry((to, g.clone()))
                .or_default()
                .push((from, r.top.clone())),
            [g, g2] => pushes
                .entry((to, g.clone()))
                .or_default()
                .push((from, r.top.clone(), g2.clone())),
            _ => unreachable!("checked by check_inputs"),
        }
    }

    let mut rel: HashSet<(StateId, StackSymbol, StateId)> = HashSet::new();
    let mut out: HashMap<(StateId, StackSymbol), Vec<StateId>> = HashMap::new();
    while let Some(t) = work.pop_front() {
        if !rel.insert(t.clone()) {
            continue;
        }
        let (q, gamma, q2) = t;
        out.entry((q, gamma.clone())).or_default().push(q2);
        if let Some(srcs) = swaps.get(&(q, gamma.clone())) {
            for (p1, g1) in srcs {
                work.push_back((*p1, g1.clone(), q2));
            }
        }
        if let Some(srcs) = pushes.get(&(q, gamma.clone())).cloned() {
            for (p1, g1, g2) in srcs {
                // Derived rule <p1, g1> -> <q2, g2>.
                swaps
                    .entry((q2, g2.clone()))
                    .or_default()
                    .push((p1, g1.clone()));
                if let Some(ends) = out.get(&(q2, g2.clone())) {
                    for &q3 in ends {
                        work.push_back((p1, g1.clone(), q3));
                    }
                }
            }
        }
    }

    let (_, transitions, _) = ma.parts_mut();
    *transitions = rel.into_iter().collect();
    Ok(ma)
}

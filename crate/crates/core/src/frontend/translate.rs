//! Translation of a parsed program into a pushdown system.
//!
//! Only the `(label, valuation)` pairs reachable from the entry point are
//! materialized. Every rule that does not inspect the stack is expanded
//! over the whole stack alphabet.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::pds::{Config, ControlPoint, Pds, Rule, StackSymbol};

use super::parser::{Opcode, Operand, Program};
use super::{ApiEntry, ApiTable};

/// Label execution falls through to after the last instruction.
pub const END_LABEL: &str = "@end";

type Valuation = Vec<Option<String>>;

struct Translator<'a> {
    program: &'a Program,
    registers: &'a [String],
    index: BTreeMap<&'a str, usize>,
    gamma: Vec<StackSymbol>,
    points: BTreeSet<ControlPoint>,
    rules: Vec<Rule>,
    api: ApiTable,
    seen: BTreeSet<(String, Valuation)>,
    queue: VecDeque<(String, Valuation)>,
}

impl<'a> Translator<'a> {
    fn suffix(&self, val: &Valuation) -> String {
        let known: Vec<String> = self
            .registers
            .iter()
            .zip(val)
            .filter_map(|(r, v)| v.as_ref().map(|v| format!("{r}={v}")))
            .collect();
        if known.is_empty() {
            String::new()
        } else {
            format!("[{}]", known.join(","))
        }
    }

    fn point(&mut self, name: String) -> ControlPoint {
        let p = ControlPoint::new(name);
        self.points.insert(p.clone());
        p
    }

    /// Control point for `(label, val)`, scheduling it for translation.
    fn visit(&mut self, label: &str, val: &Valuation) -> ControlPoint {
        let key = (label.to_string(), val.clone());
        if self.seen.insert(key.clone()) {
            self.queue.push_back(key);
        }
        let name = format!("{label}{}", self.suffix(val));
        self.point(name)
    }

    fn successor(&self, idx: usize) -> &'a str {
        self.program
            .instructions
            .get(idx + 1)
            .map(|i| i.label.as_str())
            .unwrap_or(END_LABEL)
    }

    fn reg(&self, r: &str) -> usize {
        self.registers.iter().position(|x| x == r).expect("parser checks registers")
    }

    fn value(&self, op: &Operand, val: &Valuation) -> StackSymbol {
        match op {
            Operand::Lit(l) => StackSymbol::value(l),
            Operand::Reg(r) => match &val[self.reg(r)] {
                Some(v) => StackSymbol::value(v),
                None => StackSymbol::Top,
            },
        }
    }

    /// `<from, g> -> <to, push g>` for every stack symbol `g`.
    fn for_all(&mut self, from: &ControlPoint, to: &ControlPoint, push: &[StackSymbol]) {
        for g in self.gamma.clone() {
            let mut w = push.to_vec();
            w.push(g.clone());
            self.rules.push(Rule::new(from.clone(), g, to.clone(), w));
        }
    }

    fn translate(&mut self, label: &str, val: &Valuation) {
        let Some(&idx) = self.index.get(label) else {
            return;
        };
        let from = self.visit(label, val);
        let succ = self.successor(idx);
        match &self.program.instructions[idx].op {
            Opcode::Push(op) => {
                let v = self.value(op, val);
                let to = self.visit(succ, val);
                self.for_all(&from, &to, &[v]);
            }
            Opcode::Mov(r, op) => {
                let mut next = val.clone();
                next[self.reg(r)] = self.value(op, val).as_literal().map(str::to_string);
                let to = self.visit(succ, &next);
                self.for_all(&from, &to, &[]);
            }
            Opcode::Pop(r) => {
                let ri = self.reg(r);
                for g in self.gamma.clone() {
                    let mut next = val.clone();
                    next[ri] = g.as_literal().map(str::to_string);
                    let to = self.visit(succ, &next);
                    let push = if g == StackSymbol::Bottom { vec![StackSymbol::Bottom] } else { vec![] };
                    self.rules.push(Rule::new(from.clone(), g, to, push));
                }
            }
            Opcode::CallApi(name) => {
                let decl = self.program.api(name).expect("parser resolves calls");
                let suffix = self.suffix(val);
                let entry = self.point(format!("api:{name}{suffix}"));
                self.api.insert(entry.clone(), ApiEntry { name: name.clone(), params: decl.params.clone() });
                let ret = StackSymbol::ret(succ);
                self.for_all(&from, &entry, std::slice::from_ref(&ret));

                // Caller-side cleanup: pop the return address, then the parameters.
                let back = self.visit(succ, val);
                let arity = decl.params.len();
                let chain = |k: usize, t: &mut Self| {
                    if k == 0 {
                        back.clone()
                    } else {
                        t.point(format!("api:{name}>{succ}#{k}{suffix}"))
                    }
                };
                let first = chain(arity, self);
                self.rules.push(Rule::new(entry, ret, first, vec![]));
                for k in (1..=arity).rev() {
                    let here = chain(k, self);
                    let next = chain(k - 1, self);
                    for g in self.gamma.clone() {
                        let push = if g == StackSymbol::Bottom { vec![StackSymbol::Bottom] } else { vec![] };
                        self.rules.push(Rule::new(here.clone(), g, next.clone(), push));
                    }
                }
            }
            Opcode::CallLabel(target) => {
                let to = self.visit(target, val);
                self.for_all(&from, &to, &[StackSymbol::ret(succ)]);
            }
            Opcode::Ret => {
                for g in self.gamma.clone() {
                    if let StackSymbol::Ret(x) = &g {
                        let to = self.visit(x, val);
                        self.rules.push(Rule::new(from.clone(), g.clone(), to, vec![]));
                    }
                }
            }
            Opcode::Jmp(target) => {
                let to = self.visit(target, val);
                self.for_all(&from, &to, &[]);
            }
            Opcode::Jz(target) | Opcode::Jnz(target) => {
                for l in [target.as_str(), succ] {
                    let to = self.visit(l, val);
                    self.for_all(&from, &to, &[]);
                }
            }
            Opcode::Halt => {}
        }
    }
}

/// The stack alphabet: program literals, return addresses of every call
/// site, `#top` and `#bot`.
fn alphabet(program: &Program) -> Vec<StackSymbol> {
    let mut gamma = BTreeSet::from([StackSymbol::Top, StackSymbol::Bottom]);
    for (i, ins) in program.instructions.iter().enumerate() {
        match &ins.op {
            Opcode::Push(Operand::Lit(l)) | Opcode::Mov(_, Operand::Lit(l)) => {
                gamma.insert(StackSymbol::value(l));
            }
            Opcode::CallApi(_) | Opcode::CallLabel(_) => {
                let succ = program.instructions.get(i + 1).map(|n| n.label.as_str()).unwrap_or(END_LABEL);
                gamma.insert(StackSymbol::ret(succ));
            }
            _ => {}
        }
    }
    gamma.into_iter().collect()
}

/// Translates `program` into a pushdown system, its API table and the entry
/// configuration `<entry, #bot>`. All tracked registers start unknown.
pub fn build_pds(program: &Program, registers: &[String]) -> (Pds, ApiTable, Config) {
    let mut t = Translator {
        program,
        registers,
        index: program.instructions.iter().enumerate().map(|(i, ins)| (ins.label.as_str(), i)).collect(),
        gamma: alphabet(program),
        points: BTreeSet::new(),
        rules: Vec::new(),
        api: ApiTable::default(),
        seen: BTreeSet::new(),
        queue: VecDeque::new(),
    };
    let start: Valuation = vec![None; registers.len()];
    let entry = t.visit(&program.entry, &start);
    while let Some((label, val)) = t.queue.pop_front() {
        t.translate(&label, &val);
    }
    let pds = Pds::new(t.points, t.gamma, t.rules);
    (pds, t.api, Config::new(entry, vec![StackSymbol::Bottom]))
}

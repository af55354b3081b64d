//! Extraction of system-call dependency trees from a program model.
//!
//! Reachable configurations are computed with post*, trimmed to API entry
//! points with exactly the return address and the parameters on the stack,
//! and linked into trees by data flows between output and input parameters.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::frontend::{is_numeric_literal, ApiTable, ProgramModel};
use crate::pds::{post_star, Config, MultiAutomaton, PdsError, StackSymbol};
use crate::trees::{insert_subtree, Color, Scdt};

/// Default limit on the number of nodes of one extracted tree.
pub const NODE_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error(transparent)]
    Pds(#[from] PdsError),

    #[error("tree rooted at `{origin}` exceeds {cap} nodes")]
    NodeCap { origin: String, cap: usize },
}

/// How stack symbols are compared when looking for data flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueMatching {
    /// Both symbols are literals and equal.
    Strict,
    /// Equal literals, or either side is the unknown value.
    Permissive,
}

impl ValueMatching {
    pub fn matches(self, out: &StackSymbol, input: &StackSymbol) -> bool {
        match self {
            ValueMatching::Strict => out.is_literal() && out == input,
            ValueMatching::Permissive => {
                (out.is_literal() && out == input) || *out == StackSymbol::Top || *input == StackSymbol::Top
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractionConfig {
    /// Maximum length of a chain of flow edges.
    pub height: usize,
    pub value_matching: ValueMatching,
    pub node_cap: usize,
}

impl ExtractionConfig {
    pub fn new(height: usize, value_matching: ValueMatching) -> Self {
        ExtractionConfig { height, value_matching, node_cap: NODE_CAP }
    }
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig::new(2, ValueMatching::Strict)
    }
}

/// API entry configurations accepted by `ma`, cut to the return address
/// plus the parameters. A stack that runs out (reaches `#bot`) before that
/// length is padded with `#top`.
pub fn trim(ma: &MultiAutomaton, api: &ApiTable) -> BTreeSet<Config> {
    let co = ma.coaccessible();
    let mut out = BTreeSet::new();
    for (p, entry) in api.iter() {
        let len = entry.arity() + 1;
        for l in 1..=len {
            for (w, s) in ma.enumerate_from(p, l) {
                let bottom_at = w.iter().position(|x| *x == StackSymbol::Bottom);
                match bottom_at {
                    Some(i) if i == l - 1 && ma.is_final(s) => {
                        let mut padded = w;
                        padded.truncate(l - 1);
                        padded.resize(len, StackSymbol::Top);
                        out.insert(Config::new(p.clone(), padded));
                    }
                    None if l == len && co[s.0] => {
                        out.insert(Config::new(p.clone(), w));
                    }
                    _ => {}
                }
            }
        }
    }
    out
}

/// Runs extraction for one model, caching reachability per origin.
pub struct Extractor<'a> {
    model: &'a ProgramModel,
    cfg: ExtractionConfig,
    reach: HashMap<Config, Rc<BTreeSet<Config>>>,
    built: HashMap<(Config, usize), Scdt>,
}

impl<'a> Extractor<'a> {
    pub fn new(model: &'a ProgramModel, cfg: ExtractionConfig) -> Self {
        Extractor { model, cfg, reach: HashMap::new(), built: HashMap::new() }
    }

    /// Trimmed configurations reachable from the model's entry.
    pub fn origins(&self) -> Result<BTreeSet<Config>, ExtractError> {
        let seed = MultiAutomaton::from_configs(&self.model.pds, [&self.model.entry])?;
        let post = post_star(&self.model.pds, &seed)?;
        Ok(trim(&post, &self.model.api))
    }

    /// Trimmed configurations reachable from the trimmed configuration `c`,
    /// whose stack is continued by `#bot`.
    pub fn successors(&mut self, c: &Config) -> Result<Rc<BTreeSet<Config>>, ExtractError> {
        if let Some(r) = self.reach.get(c) {
            return Ok(r.clone());
        }
        let mut stack = c.stack.clone();
        stack.push(StackSymbol::Bottom);
        let start = Config::new(c.point.clone(), stack);
        let seed = MultiAutomaton::from_configs(&self.model.pds, [&start])?;
        let post = post_star(&self.model.pds, &seed)?;
        let r = Rc::new(trim(&post, &self.model.api));
        self.reach.insert(c.clone(), r.clone());
        Ok(r)
    }

    /// The tree rooted at the trimmed configuration `origin`, following flow
    /// edges at most `h` levels deep.
    pub fn build(&mut self, origin: &Config, h: usize) -> Result<Scdt, ExtractError> {
        let key = (origin.clone(), h);
        if let Some(t) = self.built.get(&key) {
            return Ok(t.clone());
        }
        let api = &self.model.api;
        let entry = api.get(&origin.point).expect("origin is an API entry point");
        let mut t = Scdt::leaf(&entry.name);
        for n in 1..=entry.arity() {
            if let Some(v) = origin.stack.get(n).and_then(StackSymbol::as_literal) {
                if is_numeric_literal(v) {
                    t = insert_subtree(Color::Param(n as u32), Scdt::leaf(v), &t);
                }
            }
        }
        if h > 0 {
            let dests = self.successors(origin)?;
            for d in dests.iter().filter(|d| *d != origin) {
                let dentry = api.get(&d.point).expect("trimmed to API entry points");
                for n in 1..=entry.arity() {
                    if !entry.param(n).is_some_and(|t| t.is_out()) {
                        continue;
                    }
                    for m in 1..=dentry.arity() {
                        if !dentry.param(m).is_some_and(|t| t.is_in()) {
                            continue;
                        }
                        if self.cfg.value_matching.matches(&origin.stack[n], &d.stack[m]) {
                            let child = self.build(d, h - 1)?;
                            t = insert_subtree(Color::Flow(n as u32, m as u32), child, &t);
                            if t.size() > self.cfg.node_cap {
                                return Err(ExtractError::NodeCap { origin: origin.to_string(), cap: self.cfg.node_cap });
                            }
                        }
                    }
                }
            }
        }
        self.built.insert(key, t.clone());
        Ok(t)
    }

    /// One tree per trimmed configuration reachable from the entry.
    pub fn extract(&mut self) -> Result<BTreeSet<Scdt>, ExtractError> {
        let mut out = BTreeSet::new();
        for o in self.origins()? {
            out.insert(self.build(&o, self.cfg.height)?);
        }
        Ok(out)
    }
}

/// All trees extracted from `model`.
pub fn extract_scdts(model: &ProgramModel, cfg: ExtractionConfig) -> Result<BTreeSet<Scdt>, ExtractError> {
    Extractor::new(model, cfg).extract()
}

/// Drops flow edges deeper than `h` levels; parameter edges are kept.
pub fn prune(t: &Scdt, h: usize) -> Scdt {
    let children = t
        .children()
        .iter()
        .filter_map(|(c, s)| match c {
            Color::Param(_) => Some((*c, s.clone())),
            Color::Flow(..) if h > 0 => Some((*c, prune(s, h - 1))),
            Color::Flow(..) => None,
        })
        .collect();
    Scdt::new(t.root(), children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    const SELF_COPY: &str = "\
.api GetModuleFileName arity=3 types=in,out,in
.api CopyFile          arity=3 types=in,in,in
.entry l1
l1: push m
l2: mov ebx 0
l3: push ebx
l4: call GetModuleFileName
l5: push m
l6: call CopyFile
l7: halt
";

    fn strings(set: &BTreeSet<Scdt>) -> Vec<String> {
        set.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn self_copy_trim() {
        let m = parse_program(SELF_COPY).unwrap();
        let origins = Extractor::new(&m, ExtractionConfig::default()).origins().unwrap();
        let got: Vec<String> = origins.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            got,
            vec![
                "<api:CopyFile[ebx=0] | ret:l7 m #top #top>",
                "<api:GetModuleFileName[ebx=0] | ret:l5 0 m #top>",
            ]
        );
    }

    #[test]
    fn self_copy_gives_copy_sig() {
        let m = parse_program(SELF_COPY).unwrap();
        let got = extract_scdts(&m, ExtractionConfig::default()).unwrap();
        assert_eq!(strings(&got), vec!["CopyFile", "GetModuleFileName(1(0),2>1(CopyFile))"]);
    }

    #[test]
    fn height_zero_has_no_flows() {
        let m = parse_program(SELF_COPY).unwrap();
        let got = extract_scdts(&m, ExtractionConfig::new(0, ValueMatching::Strict)).unwrap();
        assert_eq!(strings(&got), vec!["CopyFile", "GetModuleFileName(1(0))"]);
    }

    #[test]
    fn api_free_model_is_empty() {
        let m = parse_program(".entry a\na: push x\nb: halt\n").unwrap();
        assert!(extract_scdts(&m, ExtractionConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn exit_process_adds_flow_child() {
        let src = "\
.api GetModuleFileName arity=3 types=in,out,in
.api CopyFile          arity=3 types=in,in,in
.api ExitProcess       arity=1 types=in
.entry l1
l1: push m
l2: mov ebx 0
l3: push ebx
l4: call GetModuleFileName
l5: push m
l6: call CopyFile
l7: push m
l8: call ExitProcess
l9: halt
";
        let m = parse_program(src).unwrap();
        let got = extract_scdts(&m, ExtractionConfig::default()).unwrap();
        assert!(strings(&got).contains(&"GetModuleFileName(1(0),2>1(CopyFile),2>1(ExitProcess))".to_string()));
    }

    #[test]
    fn matching_table() {
        let lit = StackSymbol::value("m");
        let other = StackSymbol::value("n");
        let top = StackSymbol::Top;
        let cases = [
            (&lit, &lit, true, true),
            (&lit, &other, false, false),
            (&lit, &top, false, true),
            (&top, &lit, false, true),
            (&top, &top, false, true),
        ];
        for (a, b, strict, permissive) in cases {
            assert_eq!(ValueMatching::Strict.matches(a, b), strict, "{a} {b}");
            assert_eq!(ValueMatching::Permissive.matches(a, b), permissive, "{a} {b}");
        }
    }

    #[test]
    fn prune_keeps_params() {
        let t = crate::trees::parse_scdt("A(1(0),1>1(B(1(5),1>1(C))))").unwrap();
        assert_eq!(prune(&t, 0).to_string(), "A(1(0))");
        assert_eq!(prune(&t, 1).to_string(), "A(1(0),1>1(B(1(5))))");
        assert_eq!(prune(&t, 2), t);
    }
}

use std::collections::BTreeSet;

use malsig_core::extract::{extract_scdts, prune, trim, ExtractionConfig, Extractor, ValueMatching};
use malsig_core::frontend::{parse_program, ProgramModel};
use malsig_core::pds::{post_star, Config, MultiAutomaton, StackSymbol};
use malsig_core::testkit::{bfs_configs, gen_tasm, golden_dir};
use malsig_core::trees::{embeds_at, Color};

const PROGRAMS: u64 = 150;

fn model(seed: u64) -> ProgramModel {
    parse_program(&gen_tasm(seed, 7)).unwrap()
}

/// Cuts an explicit configuration the way trimming does: return address
/// and parameters, with `#top` for whatever lies below the bottom marker.
fn cut(m: &ProgramModel, c: &Config) -> Option<Config> {
    let entry = m.api.get(&c.point)?;
    let len = entry.arity() + 1;
    let mut w: Vec<StackSymbol> = c.stack.iter().take_while(|s| **s != StackSymbol::Bottom).take(len).cloned().collect();
    w.resize(len, StackSymbol::Top);
    Some(Config::new(c.point.clone(), w))
}

fn explicit_trim(m: &ProgramModel, start: &Config) -> BTreeSet<Config> {
    bfs_configs(&m.pds, start, 64, 200_000).iter().filter_map(|c| cut(m, c)).collect()
}

#[test]
fn self_copy_golden() {
    let src = std::fs::read_to_string(golden_dir().join("self_copy.tasm")).unwrap();
    let m = parse_program(&src).unwrap();
    let got = extract_scdts(&m, ExtractionConfig::new(2, ValueMatching::Strict)).unwrap();
    let lines: Vec<String> = got.iter().map(|t| t.to_string()).collect();
    assert!(lines.contains(&"GetModuleFileName(1(0),2>1(CopyFile))".to_string()), "{lines:?}");
}

#[test]
fn trim_matches_explicit_search() {
    for seed in 0..PROGRAMS {
        let m = model(seed);
        let post = post_star(&m.pds, &MultiAutomaton::from_configs(&m.pds, [&m.entry]).unwrap()).unwrap();
        let got = trim(&post, &m.api);
        assert_eq!(got, explicit_trim(&m, &m.entry), "seed {seed}\n{}", gen_tasm(seed, 7));
        for c in &got {
            assert_eq!(c.stack.len(), m.api.get(&c.point).unwrap().arity() + 1);
        }
    }
}

#[test]
fn api_free_program_has_no_trees() {
    let m = parse_program(".api F arity=1 types=in\n.entry a\na: push 1\nb: jmp d\nc: call F\nd: halt\n").unwrap();
    assert!(extract_scdts(&m, ExtractionConfig::default()).unwrap().is_empty());
}

#[test]
fn flow_edges_are_witnessed() {
    for matching in [ValueMatching::Strict, ValueMatching::Permissive] {
        for seed in 0..PROGRAMS {
            let m = model(seed);
            let mut ex = Extractor::new(&m, ExtractionConfig::new(2, matching));
            for o in ex.origins().unwrap() {
                let t = ex.build(&o, 2).unwrap();
                let mut start = o.stack.clone();
                start.push(StackSymbol::Bottom);
                let reach = explicit_trim(&m, &Config::new(o.point.clone(), start));
                let oe = m.api.get(&o.point).unwrap();
                for (c, child) in t.children() {
                    let Color::Flow(n, k) = *c else { continue };
                    let (n, k) = (n as usize, k as usize);
                    let witnessed = reach.iter().filter(|d| **d != o).any(|d| {
                        let de = m.api.get(&d.point).unwrap();
                        de.name == child.root()
                            && oe.param(n).unwrap().is_out()
                            && de.param(k).is_some_and(|p| p.is_in())
                            && matching.matches(&o.stack[n], &d.stack[k])
                    });
                    assert!(witnessed, "seed {seed}: {c}({child}) from {o}");
                }
            }
        }
    }
}

#[test]
fn trees_are_canonical_and_bounded() {
    for seed in 0..PROGRAMS {
        let m = model(seed);
        for h in 0..=3 {
            for t in extract_scdts(&m, ExtractionConfig::new(h, ValueMatching::Permissive)).unwrap() {
                assert!(t.is_canonical());
                assert!(t.height() <= h + 1, "seed {seed}, h {h}: {t}");
            }
        }
    }
}

#[test]
fn pruning_a_taller_extraction_gives_the_shorter_one() {
    for seed in 0..PROGRAMS {
        let m = model(seed);
        for matching in [ValueMatching::Strict, ValueMatching::Permissive] {
            let tall = extract_scdts(&m, ExtractionConfig::new(3, matching)).unwrap();
            for h in 0..3 {
                let short = extract_scdts(&m, ExtractionConfig::new(h, matching)).unwrap();
                let pruned: BTreeSet<_> = tall.iter().map(|t| prune(t, h)).collect();
                assert_eq!(pruned, short, "seed {seed}, h {h}");
            }
        }
    }
}

#[test]
fn strict_edges_are_permissive_edges() {
    for seed in 0..PROGRAMS {
        let m = model(seed);
        let mut strict = Extractor::new(&m, ExtractionConfig::new(2, ValueMatching::Strict));
        let mut permissive = Extractor::new(&m, ExtractionConfig::new(2, ValueMatching::Permissive));
        for o in strict.origins().unwrap() {
            let s = strict.build(&o, 2).unwrap();
            let p = permissive.build(&o, 2).unwrap();
            assert!(embeds_at(&s, &p), "seed {seed}: {s} vs {p}");
        }
    }
}

#[test]
fn node_cap_is_enforced() {
    let src = "\
.api F arity=1 types=out
.api G arity=1 types=in
.entry a
a: call F
b: call G
c: call G
d: jz a
e: halt
";
    let m = parse_program(src).unwrap();
    let mut cfg = ExtractionConfig::new(4, ValueMatching::Permissive);
    assert!(extract_scdts(&m, cfg).is_ok());
    cfg.node_cap = 1;
    assert!(extract_scdts(&m, cfg).is_err());
}

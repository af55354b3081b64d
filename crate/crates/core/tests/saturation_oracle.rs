use std::collections::BTreeSet;

use malsig_core::pds::{post_star, pre_star, Config, MultiAutomaton};
use malsig_core::testkit::{all_configs, bfs_configs, gen_pds, PdsBounds};

const EXPLORE_DEPTH: usize = 8;
const EXPLORE_CAP: usize = 10_000;

#[test]
fn post_star_matches_explicit_search() {
    for seed in 0..300 {
        let (pds, start) = gen_pds(seed, PdsBounds::default());
        let seed_ma = MultiAutomaton::from_configs(&pds, [&start]).unwrap();
        let got = post_star(&pds, &seed_ma).unwrap().configs_up_to(4);
        let want: BTreeSet<Config> = bfs_configs(&pds, &start, EXPLORE_DEPTH, EXPLORE_CAP)
            .into_iter()
            .filter(|c| c.stack.len() <= 4)
            .collect();
        assert_eq!(got, want, "seed {seed}\n{}", pds.dump());
    }
}

#[test]
fn pre_star_matches_explicit_search() {
    for seed in 0..150 {
        let (pds, target) = gen_pds(seed, PdsBounds::default());
        let seed_ma = MultiAutomaton::from_configs(&pds, [&target]).unwrap();
        let pre = pre_star(&pds, &seed_ma).unwrap();
        for c in all_configs(&pds, 2) {
            let reaches = bfs_configs(&pds, &c, EXPLORE_DEPTH, EXPLORE_CAP).contains(&target);
            assert_eq!(pre.accepts(&c).unwrap(), reaches, "seed {seed}, config {c}\n{}", pds.dump());
        }
    }
}

#[test]
fn post_and_pre_agree() {
    for seed in 300..400 {
        let (pds, start) = gen_pds(seed, PdsBounds::default());
        let post = post_star(&pds, &MultiAutomaton::from_configs(&pds, [&start]).unwrap()).unwrap();
        for c in post.configs_up_to(3) {
            let pre = pre_star(&pds, &MultiAutomaton::from_configs(&pds, [&c]).unwrap()).unwrap();
            assert!(pre.accepts(&start).unwrap(), "seed {seed}: {c} reachable but start not in pre*");
        }
    }
}

#[test]
fn normalization_preserves_reachability() {
    use malsig_core::pds::{ControlPoint, Pds, Rule, StackSymbol};
    let v = StackSymbol::value;
    let p = ControlPoint::new("p");
    let q = ControlPoint::new("q");
    let pds = Pds::new(
        [],
        [],
        [
            Rule::new(p.clone(), v("a"), q.clone(), vec![v("b"), v("c"), v("d")]),
            Rule::new(q.clone(), v("b"), p.clone(), vec![]),
        ],
    );
    let n = pds.normalize();
    let start = Config::new(p.clone(), vec![v("a")]);
    let post = post_star(&n, &MultiAutomaton::from_configs(&n, [&start]).unwrap()).unwrap();
    assert!(post.accepts(&Config::new(q, vec![v("b"), v("c"), v("d")])).unwrap());
    assert!(post.accepts(&Config::new(p, vec![v("c"), v("d")])).unwrap());
}

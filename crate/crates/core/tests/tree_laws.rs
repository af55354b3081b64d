use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use malsig_core::testkit::{gen_tree, rng, TreeBounds};
use malsig_core::trees::{
    canonicalize, enumerate_subtrees, insert_subtree, parse_scdt, subtree_of, Color, RawTree, Scdt,
};

fn shuffled(t: &RawTree, r: &mut impl Rng) -> RawTree {
    let mut children: Vec<(Color, RawTree)> = t.children.iter().map(|(c, s)| (*c, shuffled(s, r))).collect();
    children.shuffle(r);
    RawTree::node(t.root.clone(), children)
}

fn with_duplicates(t: &RawTree, r: &mut impl Rng) -> RawTree {
    let mut children: Vec<(Color, RawTree)> = t.children.iter().map(|(c, s)| (*c, with_duplicates(s, r))).collect();
    if let Some(first) = children.first().cloned() {
        if r.gen_bool(0.5) {
            children.push(first);
        }
    }
    RawTree::node(t.root.clone(), children)
}

#[test]
fn canonicalization_is_idempotent_and_permutation_invariant() {
    let mut r = rng(11);
    let bounds = TreeBounds { nodes: 8, symbols: 3, max_index: 2 };
    for _ in 0..10_000 {
        let t = gen_tree(&mut r, bounds);
        assert!(t.is_canonical());
        assert_eq!(canonicalize(&t.to_raw()), t);
        assert_eq!(canonicalize(&shuffled(&t.to_raw(), &mut r)), t);
        assert_eq!(canonicalize(&with_duplicates(&t.to_raw(), &mut r)), t);
    }
}

#[test]
fn order_is_total() {
    let mut r = rng(12);
    let bounds = TreeBounds { nodes: 4, symbols: 2, max_index: 2 };
    for _ in 0..10_000 {
        let a = gen_tree(&mut r, bounds);
        let b = gen_tree(&mut r, bounds);
        let c = gen_tree(&mut r, bounds);
        assert_eq!(a.cmp(&a), Ordering::Equal);
        assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        assert_eq!(a.cmp(&b) == Ordering::Equal, a == b);
        if a <= b && b <= c {
            assert!(a <= c, "{a} {b} {c}");
        }
    }
}

#[test]
fn insert_is_commutative_and_idempotent() {
    let mut r = rng(13);
    let bounds = TreeBounds { nodes: 4, symbols: 3, max_index: 2 };
    for _ in 0..2_000 {
        let base = gen_tree(&mut r, bounds);
        let (s1, s2) = (gen_tree(&mut r, bounds), gen_tree(&mut r, bounds));
        let (c1, c2) = (Color::Param(r.gen_range(1..=2)), Color::Flow(1, r.gen_range(1..=2)));
        let a = insert_subtree(c2, s2.clone(), &insert_subtree(c1, s1.clone(), &base));
        let b = insert_subtree(c1, s1.clone(), &insert_subtree(c2, s2.clone(), &base));
        assert_eq!(a, b);
        assert!(a.is_canonical());
        assert_eq!(insert_subtree(c1, s1, &a), a);
    }
}

#[test]
fn subtree_relation_laws() {
    let mut r = rng(14);
    let bounds = TreeBounds { nodes: 6, symbols: 2, max_index: 2 };
    for _ in 0..2_000 {
        let t = gen_tree(&mut r, bounds);
        assert!(subtree_of(&t, &t));
        let nodes = t.nodes();
        let mid = nodes[r.gen_range(0..nodes.len())];
        let inner = mid.nodes()[r.gen_range(0..mid.size())];
        assert!(subtree_of(mid, &t) && subtree_of(inner, mid) && subtree_of(inner, &t));
        let other = gen_tree(&mut r, bounds);
        if subtree_of(&other, &t) {
            assert!(other.size() <= t.size());
        }
    }
}

#[test]
fn enumeration_contains_tree_and_leaves() {
    let mut r = rng(15);
    for _ in 0..500 {
        let t = gen_tree(&mut r, TreeBounds::default());
        let all = enumerate_subtrees(&t).unwrap();
        assert!(all.contains(&t));
        for n in t.nodes() {
            assert!(all.contains(&Scdt::leaf(n.root())));
        }
    }
}

#[test]
fn text_round_trip() {
    let mut r = rng(16);
    for _ in 0..2_000 {
        let t = gen_tree(&mut r, TreeBounds { nodes: 8, symbols: 4, max_index: 3 });
        assert_eq!(parse_scdt(&t.to_string()).unwrap(), t);
    }
}

//! Random members of the closure of a pattern under extra children and
//! enclosing contexts. Every sample contains the pattern as an embedding.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{insert_subtree, Color, Scdt, TreeError};

/// Symbols used for the nodes added by [`omega_sample`].
pub const OMEGA_ALPHABET: [&str; 8] = ["GetModuleFileName", "CopyFile", "ExitProcess", "0", "m", "a", "b", "c"];

/// Hard limit on the size of a sample.
const NODE_CAP: usize = 10_000;

fn random_color(rng: &mut impl Rng, max_index: u32) -> Color {
    if rng.gen_bool(0.5) {
        Color::Param(rng.gen_range(1..=max_index))
    } else {
        Color::Flow(rng.gen_range(1..=max_index), rng.gen_range(1..=max_index))
    }
}

/// A random canonical tree with at most `size` nodes (duplicate siblings
/// collapse), labels drawn from `alphabet` and edge indices from
/// `1..=max_index`.
pub fn random_tree(rng: &mut impl Rng, size: usize, alphabet: &[&str], max_index: u32) -> Scdt {
    let root = *alphabet.choose(rng).expect("non-empty alphabet");
    if size <= 1 {
        return Scdt::leaf(root);
    }
    let mut remaining = size - 1;
    let mut children = Vec::new();
    while remaining > 0 {
        let k = rng.gen_range(1..=remaining);
        children.push((random_color(rng, max_index), random_tree(rng, k, alphabet, max_index)));
        remaining -= k;
    }
    Scdt::new(root, children)
}

/// Rebuilds `t` with `c(s)` added below its preorder node `target`.
fn insert_at(t: &Scdt, target: usize, counter: &mut usize, c: Color, s: &Scdt) -> Scdt {
    if *counter == target {
        *counter += t.size();
        return insert_subtree(c, s.clone(), t);
    }
    *counter += 1;
    let children = t
        .children()
        .iter()
        .map(|(cc, ct)| {
            if *counter <= target && target < *counter + ct.size() {
                (*cc, insert_at(ct, target, counter, c, s))
            } else {
                *counter += ct.size();
                (*cc, ct.clone())
            }
        })
        .collect();
    Scdt::new(t.root(), children)
}

/// Samples a tree containing `t`: up to `budget` extra nodes are spent on
/// random subtrees attached anywhere in the tree and on fresh roots placed
/// above it. A budget of 0 returns `t`. Deterministic for a given seed.
pub fn omega_sample(t: &Scdt, seed: u64, budget: usize) -> Result<Scdt, TreeError> {
    if t.size().saturating_add(budget) > NODE_CAP {
        return Err(TreeError::BudgetExhausted { size: t.size(), budget, cap: NODE_CAP });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining = rng.gen_range(0..=budget);
    let mut cur = t.clone();
    while remaining > 0 {
        if rng.gen_bool(0.25) {
            let root = *OMEGA_ALPHABET.choose(&mut rng).unwrap();
            cur = Scdt::new(root, vec![(random_color(&mut rng, 3), cur)]);
            remaining -= 1;
        } else {
            let k = rng.gen_range(1..=remaining.min(3));
            let extra = random_tree(&mut rng, k, &OMEGA_ALPHABET, 3);
            let target = rng.gen_range(0..cur.size());
            let c = random_color(&mut rng, 3);
            cur = insert_at(&cur, target, &mut 0, c, &extra);
            remaining -= k;
        }
    }
    Ok(cur)
}

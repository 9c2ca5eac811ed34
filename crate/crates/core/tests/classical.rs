//! The classical rule against a direct truth-table oracle.

mod common;

use common::{placeholders, tautology_over};
use dynck_core::kernel::{classical, KernelError};
use dynck_core::Formula;
use rand::{Rng, SeedableRng};

/// Every formula of connective depth at most `depth` over `leaves`.
fn all_formulas(leaves: &[Formula], depth: usize) -> Vec<Formula> {
    let mut level: Vec<Formula> = leaves.to_vec();
    for _ in 0..depth {
        let mut next = leaves.to_vec();
        for a in &level {
            next.push(Formula::not(a.clone()));
        }
        for a in &level {
            for b in &level {
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::or(a.clone(), b.clone()));
                next.push(Formula::imp(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level
}

fn agrees(f: &Formula, leaves: &[Formula]) -> bool {
    let expected = tautology_over(f, leaves);
    match classical(f) {
        Ok(j) => expected && j.formula() == f,
        Err(KernelError::NotTautology(g)) => !expected && &g == f,
        Err(_) => false,
    }
}

fn exhaustive_four_placeholders_depth_two() -> usize {
    let mut leaves = placeholders();
    leaves.extend([Formula::True, Formula::False]);
    let all = all_formulas(&leaves, 2);
    for f in &all {
        assert!(agrees(f, &placeholders()), "{f}");
    }
    all.len()
}

fn exhaustive_two_placeholders_depth_three() -> usize {
    let leaves = placeholders()[..2].to_vec();
    let all = all_formulas(&leaves, 3);
    for f in &all {
        assert!(agrees(f, &leaves), "{f}");
    }
    all.len()
}

fn random_skeleton<R: Rng>(rng: &mut R, leaves: &[Formula], depth: usize) -> Formula {
    if depth == 0 {
        return leaves[rng.gen_range(0..leaves.len())].clone();
    }
    let a = random_skeleton(rng, leaves, depth - 1);
    let b = random_skeleton(rng, leaves, depth - 1);
    match rng.gen_range(0..4) {
        0 => Formula::not(a),
        1 => Formula::and(a, b),
        2 => Formula::or(a, b),
        _ => Formula::imp(a, b),
    }
}

#[test]
fn depth_two_over_four_placeholders() {
    assert_eq!(exhaustive_four_placeholders_depth_two(), 43_326);
}

#[test]
fn depth_three_over_two_placeholders() {
    assert!(exhaustive_two_placeholders_depth_three() > 1_000_000);
}

#[test]
fn random_depth_four() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    let mut leaves = placeholders();
    leaves.extend([Formula::True, Formula::False]);
    let mut tautologies = 0;
    for _ in 0..50_000 {
        let f = random_skeleton(&mut rng, &leaves, 4);
        assert!(agrees(&f, &placeholders()), "{f}");
        tautologies += usize::from(classical(&f).is_ok());
    }
    assert!(tautologies > 100);
}

#[test]
fn placeholder_budget() {
    let many = (0..30).fold(Formula::True, |acc, j| Formula::or(acc, Formula::lambda(j)));
    assert!(matches!(classical(&many), Err(KernelError::Budget { placeholders: 30, budget: 24 })));
    let mid = (0..10).fold(Formula::False, |acc, j| Formula::or(Formula::lambda(j), acc));
    let taut = Formula::imp(mid.clone(), mid);
    assert!(classical(&taut).is_ok());
}

//! Seeded random CSPs for cross-checking engines.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{atom, Atom, Csp};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub min_vars: usize,
    pub max_vars: usize,
    /// Atoms are drawn from the first `max_atoms` of `a, b, c, …`.
    pub max_atoms: usize,
    /// Chance that a variable pair gets a constraint.
    pub density: f64,
    /// Chance that an allowed pair of values is kept in a constraint.
    pub looseness: f64,
    /// Chance that a constrained pair gets a second constraint.
    pub duplicate: f64,
    /// Chance of one extra ternary constraint (needs three variables).
    pub ternary: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_vars: 2,
            max_vars: 4,
            max_atoms: 3,
            density: 0.7,
            looseness: 0.6,
            duplicate: 0.0,
            ternary: 0.0,
        }
    }
}

impl GeneratorConfig {
    /// Binary constraints only, at most one per pair.
    pub fn binary() -> Self {
        GeneratorConfig::default()
    }

    /// Allows repeated pairs and a ternary constraint.
    pub fn mixed() -> Self {
        GeneratorConfig {
            duplicate: 0.2,
            ternary: 0.3,
            ..GeneratorConfig::default()
        }
    }
}

const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn random_subset(rng: &mut ChaCha8Rng, items: &[Atom], keep: f64) -> Vec<Atom> {
    items.iter().filter(|_| rng.gen_bool(keep)).cloned().collect()
}

fn random_tuples(rng: &mut ChaCha8Rng, domains: &[&BTreeSet<Atom>], keep: f64) -> BTreeSet<Vec<Atom>> {
    let mut all: Vec<Vec<Atom>> = vec![Vec::new()];
    for d in domains {
        all = all
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |a| {
                    let mut t = prefix.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    all.into_iter().filter(|_| rng.gen_bool(keep)).collect()
}

/// A random CSP determined by `seed`. Variables are `v0, v1, …`; every
/// domain is a non-empty subset of the atom pool.
pub fn random_csp(seed: u64, config: &GeneratorConfig) -> Csp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(config.min_vars..=config.max_vars);
    let pool: Vec<Atom> = NAMES[..config.max_atoms.min(NAMES.len())].iter().map(|s| atom(s)).collect();
    let mut p = Csp::new();
    for i in 0..n {
        let mut d = random_subset(&mut rng, &pool, 0.8);
        if d.is_empty() {
            d.push(pool.choose(&mut rng).expect("non-empty pool").clone());
        }
        p.add_variable(&format!("v{i}"), d.iter().map(|a| a.as_ref()))
            .expect("distinct names");
    }
    for i in 0..n {
        for j in i + 1..n {
            if !rng.gen_bool(config.density) {
                continue;
            }
            let copies = if rng.gen_bool(config.duplicate) { 2 } else { 1 };
            for _ in 0..copies {
                let tuples = random_tuples(&mut rng, &[p.domain(i), p.domain(j)], config.looseness);
                p.add_constraint_on(None, vec![i, j], tuples).expect("valid constraint");
            }
        }
    }
    if n >= 3 && rng.gen_bool(config.ternary) {
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(&mut rng);
        let mut scope = vars[..3].to_vec();
        scope.sort_unstable();
        let tuples = random_tuples(
            &mut rng,
            &[p.domain(scope[0]), p.domain(scope[1]), p.domain(scope[2])],
            config.looseness,
        );
        p.add_constraint_on(None, scope, tuples).expect("valid constraint");
    }
    p
}

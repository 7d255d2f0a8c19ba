//! Brute-force references used to cross-check the engines.
//!
//! Nothing here goes through the worklist code: fixpoints are computed by
//! plain round-robin, extensions are re-implemented locally, and the
//! algebraic checkers enumerate (or sample) every state on the joint
//! scheme of the functions involved.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Atom, Csp};
use crate::error::{Error, Result};
use crate::iterate::UpdateContext;
use crate::order::{CompoundValue, Element, SchemedFunction};

/// Default bound on the number of assignments [`enumerate_solutions`] visits.
pub const SOLUTION_CAP: u128 = 1_000_000;

/// Default bound on the number of states an exhaustive check visits.
pub const STATE_CAP: u128 = 10_000;

/// Minimum number of random states used when sampling replaces exhaustion.
pub const MIN_SAMPLES: usize = 1_000;

/// A failed check: the offending functions, the input, and the two
/// outputs that were compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample<T: Element> {
    pub property: String,
    pub functions: Vec<String>,
    pub input: Vec<BTreeSet<T>>,
    pub left: Vec<BTreeSet<T>>,
    pub right: Vec<BTreeSet<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport<T: Element> {
    pub passed: bool,
    pub counterexample: Option<Counterexample<T>>,
    /// Number of states examined.
    pub states: u64,
    /// False when the state space exceeded the cap and was sampled.
    pub exhaustive: bool,
}

impl<T: Element> CheckReport<T> {
    fn pass(states: u64, exhaustive: bool) -> Self {
        CheckReport {
            passed: true,
            counterexample: None,
            states,
            exhaustive,
        }
    }

    fn fail(c: Counterexample<T>, states: u64, exhaustive: bool) -> Self {
        CheckReport {
            passed: false,
            counterexample: Some(c),
            states,
            exhaustive,
        }
    }
}

/// How checkers bound their work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub cap: u128,
    /// When set, state spaces above `cap` are sampled with this many
    /// random states from this seed instead of raising a capacity error.
    pub sample: Option<(u64, usize)>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            cap: STATE_CAP,
            sample: None,
        }
    }
}

impl CheckOptions {
    pub fn sampled(seed: u64, count: usize) -> Self {
        CheckOptions {
            cap: STATE_CAP,
            sample: Some((seed, count.max(MIN_SAMPLES))),
        }
    }
}

/// All solutions of `p`, by enumerating the product of the domains.
pub fn enumerate_solutions(p: &Csp) -> Result<BTreeSet<Vec<Atom>>> {
    enumerate_solutions_capped(p, SOLUTION_CAP)
}

pub fn enumerate_solutions_capped(p: &Csp, cap: u128) -> Result<BTreeSet<Vec<Atom>>> {
    let domains: Vec<Vec<Atom>> = p.domains().iter().map(|d| d.iter().cloned().collect()).collect();
    let states = domains
        .iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128))
        .unwrap_or(u128::MAX);
    if states > cap {
        return Err(Error::Capacity { states, cap });
    }
    let mut out = BTreeSet::new();
    if domains.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    let mut digits = vec![0usize; domains.len()];
    loop {
        let assignment: Vec<Atom> = digits
            .iter()
            .zip(&domains)
            .map(|(&k, d)| d[k].clone())
            .collect();
        let ok = p.constraints().iter().all(|c| {
            let t: Vec<Atom> = c.scope().iter().map(|&i| assignment[i].clone()).collect();
            c.tuples().contains(&t)
        });
        if ok {
            out.insert(assignment);
        }
        // odometer increment, last variable fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < domains[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn extend<T: Element>(f: &SchemedFunction<T>, x: &[BTreeSet<T>]) -> Result<Vec<BTreeSet<T>>> {
    let idx = f.scheme().indices();
    let sub: Vec<BTreeSet<T>> = idx.iter().map(|&i| x[i].clone()).collect();
    let out = f.eval(&sub)?;
    let mut y = x.to_vec();
    for (&i, v) in idx.iter().zip(out) {
        y[i] = v;
    }
    Ok(y)
}

/// Round-robin iteration in list order until a full pass changes nothing.
pub fn chaotic_fixpoint<T: Element>(
    functions: &[SchemedFunction<T>],
    bottom: &CompoundValue<T>,
) -> Result<CompoundValue<T>> {
    let order: Vec<usize> = (0..functions.len()).collect();
    chaotic_fixpoint_permuted(functions, bottom, &order)
}

/// Round-robin iteration visiting `functions` in the order given by `order`.
pub fn chaotic_fixpoint_permuted<T: Element>(
    functions: &[SchemedFunction<T>],
    bottom: &CompoundValue<T>,
    order: &[usize],
) -> Result<CompoundValue<T>> {
    let mut seen = vec![false; functions.len()];
    for &k in order {
        if k >= functions.len() || std::mem::replace(&mut seen[k], true) {
            return Err(Error::Config(format!("order is not a permutation of 0..{}", functions.len())));
        }
    }
    if order.len() != functions.len() {
        return Err(Error::Config(format!("order is not a permutation of 0..{}", functions.len())));
    }
    let mut x: Vec<BTreeSet<T>> = bottom.components().to_vec();
    loop {
        let mut changed = false;
        for &k in order {
            let y = extend(&functions[k], &x)?;
            if y != x {
                changed = true;
                x = y;
            }
        }
        if !changed {
            return bottom.replaced(x);
        }
    }
}

/// The reference update `{f ∈ F − G | f(d) = d ∧ f(g(d)) ≠ g(d)}` plus `g`
/// when `g(g(d)) ≠ g(d)`. Correct for any functions, and expensive.
pub fn obvious_update<T: Element>(ctx: &UpdateContext<'_, T>) -> Result<BTreeSet<usize>> {
    let d = ctx.before.components();
    let gd = ctx.after.components();
    let mut out = BTreeSet::new();
    for (k, f) in ctx.functions.iter().enumerate() {
        if ctx.pending[k] || k == ctx.chosen {
            continue;
        }
        if extend(f, d)? == d && extend(f, gd)? != gd {
            out.insert(k);
        }
    }
    if extend(&ctx.functions[ctx.chosen], gd)? != gd {
        out.insert(ctx.chosen);
    }
    Ok(out)
}

/// Every state over the components in `joint`, other components fixed at
/// their universe. Exhaustive under the cap, otherwise sampled or refused.
struct States<T: Element> {
    universes: Vec<BTreeSet<T>>,
    joint: Vec<usize>,
    exhaustive: bool,
    total: u128,
}

impl<T: Element> States<T> {
    fn new(universes: &[BTreeSet<T>], joint: Vec<usize>, options: &CheckOptions) -> Result<Self> {
        if let Some(&bad) = joint.iter().find(|&&i| i >= universes.len()) {
            return Err(Error::Arity(format!("scheme index {bad} outside {} universes", universes.len())));
        }
        let bits: u32 = joint.iter().map(|&i| universes[i].len() as u32).sum();
        let total = if bits >= 127 { u128::MAX } else { 1u128 << bits };
        let exhaustive = total <= options.cap;
        if !exhaustive && options.sample.is_none() {
            return Err(Error::Capacity {
                states: total,
                cap: options.cap,
            });
        }
        Ok(States {
            universes: universes.to_vec(),
            joint,
            exhaustive,
            total,
        })
    }

    fn from_mask(&self, elems: &[(usize, T)], mask: u128) -> Vec<BTreeSet<T>> {
        let mut x = self.universes.clone();
        for &i in &self.joint {
            x[i].clear();
        }
        for (bit, (i, v)) in elems.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                x[*i].insert(v.clone());
            }
        }
        x
    }

    /// Calls `visit` on each state; stops at the first `Some`.
    fn find<R>(
        &self,
        options: &CheckOptions,
        mut visit: impl FnMut(&[BTreeSet<T>]) -> Result<Option<R>>,
    ) -> Result<(Option<R>, u64)> {
        let elems: Vec<(usize, T)> = self
            .joint
            .iter()
            .flat_map(|&i| self.universes[i].iter().map(move |v| (i, v.clone())))
            .collect();
        let mut count = 0u64;
        if self.exhaustive {
            // from ⊥ (every element present) downwards
            for mask in (0..self.total).rev() {
                count += 1;
                if let Some(r) = visit(&self.from_mask(&elems, mask))? {
                    return Ok((Some(r), count));
                }
            }
            return Ok((None, count));
        }
        let (seed, samples) = options.sample.expect("checked in new");
        // ⊥, then every value with one joint component cut to a singleton,
        // then uniform random subsets
        let mut fixed = vec![self.universes.clone()];
        for &i in &self.joint {
            for v in &self.universes[i] {
                let mut x = self.universes.clone();
                x[i] = BTreeSet::from([v.clone()]);
                fixed.push(x);
            }
        }
        for x in fixed {
            count += 1;
            if let Some(r) = visit(&x)? {
                return Ok((Some(r), count));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut x = self.universes.clone();
            for &i in &self.joint {
                x[i].retain(|_| rng.gen_bool(0.5));
            }
            count += 1;
            if let Some(r) = visit(&x)? {
                return Ok((Some(r), count));
            }
        }
        Ok((None, count))
    }
}

fn joint_scheme<T: Element>(functions: &[&SchemedFunction<T>]) -> Vec<usize> {
    functions
        .iter()
        .flat_map(|f| f.scheme().indices().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn componentwise_subset<T: Element>(a: &[BTreeSet<T>], b: &[BTreeSet<T>]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.is_subset(y))
}

/// Checks that `f` is inflationary, monotonic and idempotent w.r.t.
/// componentwise `⊇`. Monotonicity is checked on covering pairs (one
/// element removed), which implies it for all pairs.
pub fn check_closure<T: Element>(
    f: &SchemedFunction<T>,
    universes: &[BTreeSet<T>],
    options: &CheckOptions,
) -> Result<CheckReport<T>> {
    let states = States::new(universes, joint_scheme(&[f]), options)?;
    let name = vec![f.label().to_string()];
    let fail = |property: &str, input: &[BTreeSet<T>], left, right| Counterexample {
        property: property.to_string(),
        functions: name.clone(),
        input: input.to_vec(),
        left,
        right,
    };
    let (found, count) = states.find(options, |x| {
        let fx = extend(f, x)?;
        if !componentwise_subset(&fx, x) {
            return Ok(Some(fail("inflationary", x, fx, x.to_vec())));
        }
        let ffx = extend(f, &fx)?;
        if ffx != fx {
            return Ok(Some(fail("idempotent", x, ffx, fx)));
        }
        for &i in f.scheme().indices() {
            for v in &x[i] {
                let mut y = x.to_vec();
                y[i].remove(v);
                let fy = extend(f, &y)?;
                if !componentwise_subset(&fy, &fx) {
                    return Ok(Some(fail("monotonic", &y, fy, fx)));
                }
            }
        }
        Ok(None)
    })?;
    Ok(match found {
        Some(c) => CheckReport::fail(c, count, states.exhaustive),
        None => CheckReport::pass(count, states.exhaustive),
    })
}

/// Checks `f⁺g⁺(x) = g⁺f⁺(x)` for every state `x` on the joint scheme.
/// In a counterexample `left` is `f⁺g⁺(x)` (g applied first).
pub fn check_commute<T: Element>(
    f: &SchemedFunction<T>,
    g: &SchemedFunction<T>,
    universes: &[BTreeSet<T>],
    options: &CheckOptions,
) -> Result<CheckReport<T>> {
    compare_orders(f, g, universes, options, "commute", |fg, gf| fg == gf)
}

/// Checks that `f` semi-commutes with `g`: `f⁺g⁺(x) ⊑ g⁺f⁺(x)`, which
/// under the `⊇` order means `g⁺f⁺(x)` is componentwise a subset of
/// `f⁺g⁺(x)`. In a counterexample `left` is `f⁺g⁺(x)`.
pub fn check_semi_commute<T: Element>(
    f: &SchemedFunction<T>,
    g: &SchemedFunction<T>,
    universes: &[BTreeSet<T>],
    options: &CheckOptions,
) -> Result<CheckReport<T>> {
    compare_orders(f, g, universes, options, "semi-commute", |fg, gf| {
        componentwise_subset(gf, fg)
    })
}

fn compare_orders<T: Element>(
    f: &SchemedFunction<T>,
    g: &SchemedFunction<T>,
    universes: &[BTreeSet<T>],
    options: &CheckOptions,
    property: &str,
    holds: impl Fn(&[BTreeSet<T>], &[BTreeSet<T>]) -> bool,
) -> Result<CheckReport<T>> {
    let states = States::new(universes, joint_scheme(&[f, g]), options)?;
    let (found, count) = states.find(options, |x| {
        let fg = extend(f, &extend(g, x)?)?;
        let gf = extend(g, &extend(f, x)?)?;
        Ok((!holds(&fg, &gf)).then(|| Counterexample {
            property: property.to_string(),
            functions: vec![f.label().to_string(), g.label().to_string()],
            input: x.to_vec(),
            left: fg,
            right: gf,
        }))
    })?;
    Ok(match found {
        Some(c) => CheckReport::fail(c, count, states.exhaustive),
        None => CheckReport::pass(count, states.exhaustive),
    })
}

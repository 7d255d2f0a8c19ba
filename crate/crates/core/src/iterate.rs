//! Generic worklist iteration towards the least common fixpoint.
//!
//! [`run_gi`] is the generic loop: pick a pending function `g`, drop it from
//! the worklist, add whatever the update function asks for, and replace `d`
//! by `g⁺(d)`. Correctness rests on three assumptions about the update
//! function, checked in verification mode:
//!
//! * **A**: every `f` outside the worklist that fixed `d` but does not fix
//!   `g⁺(d)` is re-added;
//! * **B**: nothing is added when `g⁺(d) = d`;
//! * **C**: `g` itself is re-added when `g⁺(g⁺(d)) ≠ g⁺(d)`.
//!
//! [`run_cd`] specialises the update to "every function depending on a
//! component that changed", optionally pruned by idempotence and by
//! declared commutativity ([`UpdatePolicy`]). [`run_si`] is the loop-free
//! variant that applies a semi-commuting sequence of closures once each.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::order::{CompoundValue, Element, SchemedFunction};

/// How the engine chooses the next pending function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Oldest pending function first.
    #[default]
    Fifo,
    /// Most recently added pending function first.
    Lifo,
    /// Uniformly random pending function, from a seeded generator.
    Random(u64),
}

/// Which pruning rules are applied on top of the dependency-based update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    #[default]
    Plain,
    /// Drop `g` from its own update when `g` is idempotent.
    Idempotent,
    /// Drop `Comm(g)` from the update.
    Commutativity,
    /// Both of the above.
    Both,
}

impl UpdateMode {
    pub const ALL: [UpdateMode; 4] = [
        UpdateMode::Plain,
        UpdateMode::Idempotent,
        UpdateMode::Commutativity,
        UpdateMode::Both,
    ];

    pub fn prunes_idempotent(self) -> bool {
        matches!(self, UpdateMode::Idempotent | UpdateMode::Both)
    }

    pub fn prunes_commuting(self) -> bool {
        matches!(self, UpdateMode::Commutativity | UpdateMode::Both)
    }
}

/// Pruning configuration. `comm[g]` lists the functions known to commute
/// with function `g` (indices into the engine's function list).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UpdatePolicy {
    pub mode: UpdateMode,
    pub comm: Vec<BTreeSet<usize>>,
}

impl UpdatePolicy {
    pub fn plain() -> Self {
        UpdatePolicy::default()
    }

    pub fn idempotent() -> Self {
        UpdatePolicy {
            mode: UpdateMode::Idempotent,
            comm: Vec::new(),
        }
    }

    pub fn new(mode: UpdateMode, comm: Vec<BTreeSet<usize>>) -> Self {
        UpdatePolicy { mode, comm }
    }

    /// Checks the Comm table against a function list of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !self.mode.prunes_commuting() {
            return Ok(());
        }
        if self.comm.len() != n {
            return Err(Error::Config(format!(
                "commutativity table has {} entries for {n} functions",
                self.comm.len()
            )));
        }
        for (g, set) in self.comm.iter().enumerate() {
            if set.contains(&g) {
                return Err(Error::Config(format!("function {g} listed in its own Comm set")));
            }
            if let Some(&bad) = set.iter().find(|&&f| f >= n) {
                return Err(Error::Config(format!(
                    "Comm set of function {g} references unknown function {bad}"
                )));
            }
        }
        Ok(())
    }
}

/// Observable scheduling cost of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    /// Transform evaluations.
    pub applications: u64,
    /// Insertions into the worklist, counting initial seeding and
    /// re-insertions of already pending functions.
    pub additions: u64,
    /// Largest worklist size observed.
    pub peak: u64,
}

/// Engine options shared by every worklist algorithm in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub select: Selection,
    /// Assert invariant I, assumptions A/B/C and the termination metric on
    /// every iteration. Expensive.
    pub verify: bool,
}

impl RunOptions {
    pub fn with_select(select: Selection) -> Self {
        RunOptions {
            select,
            verify: false,
        }
    }

    pub fn verified(mut self) -> Self {
        self.verify = true;
        self
    }
}

/// Result of an engine run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run<T: Element> {
    pub value: CompoundValue<T>,
    pub stats: RunStats,
}

/// Pending-set with set semantics and a pluggable choice rule.
#[derive(Debug)]
pub(crate) struct Worklist {
    queue: VecDeque<usize>,
    pending: Vec<bool>,
    select: Selection,
    rng: Option<ChaCha8Rng>,
    pub(crate) stats: RunStats,
}

impl Worklist {
    pub(crate) fn new(n: usize, select: Selection) -> Self {
        let rng = match select {
            Selection::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Worklist {
            queue: VecDeque::new(),
            pending: vec![false; n],
            select,
            rng,
            stats: RunStats::default(),
        }
    }

    pub(crate) fn push(&mut self, item: usize) {
        self.stats.additions += 1;
        if !self.pending[item] {
            self.pending[item] = true;
            self.queue.push_back(item);
            self.stats.peak = self.stats.peak.max(self.queue.len() as u64);
        }
    }

    pub(crate) fn pop(&mut self) -> Option<usize> {
        let item = match self.select {
            Selection::Fifo => self.queue.pop_front(),
            Selection::Lifo => self.queue.pop_back(),
            Selection::Random(_) => {
                if self.queue.is_empty() {
                    None
                } else {
                    let rng = self.rng.as_mut().expect("seeded for random selection");
                    let at = rng.gen_range(0..self.queue.len());
                    self.queue.remove(at)
                }
            }
        }?;
        self.pending[item] = false;
        Some(item)
    }

    /// Removes a specific pending item; false when it was not pending.
    pub(crate) fn take(&mut self, item: usize) -> bool {
        if !self.pending[item] {
            return false;
        }
        let at = self
            .queue
            .iter()
            .position(|&x| x == item)
            .expect("pending items are queued");
        self.queue.remove(at);
        self.pending[item] = false;
        true
    }

    pub(crate) fn is_pending(&self, item: usize) -> bool {
        self.pending[item]
    }

    pub(crate) fn pending(&self) -> &[bool] {
        &self.pending
    }

    pub(crate) fn len(&self) -> usize {
        self.queue.len()
    }
}

/// Everything an update function may look at.
pub struct UpdateContext<'a, T: Element> {
    pub functions: &'a [SchemedFunction<T>],
    /// Membership of the worklist after the chosen function was removed.
    pub pending: &'a [bool],
    pub chosen: usize,
    /// `d` before the step.
    pub before: &'a CompoundValue<T>,
    /// `g⁺(d)`.
    pub after: &'a CompoundValue<T>,
}

/// The `update(G, g, d)` parameter of the generic loop.
pub trait Update<T: Element> {
    fn update(&self, ctx: &UpdateContext<'_, T>) -> Result<BTreeSet<usize>>;
}

impl<T: Element, F> Update<T> for F
where
    F: Fn(&UpdateContext<'_, T>) -> Result<BTreeSet<usize>>,
{
    fn update(&self, ctx: &UpdateContext<'_, T>) -> Result<BTreeSet<usize>> {
        self(ctx)
    }
}

/// Dependency-based update: every function depending on a component the
/// chosen function changed. Precomputes the component-to-function index.
#[derive(Debug, Clone)]
pub struct DependencyUpdate {
    dependents: Vec<Vec<usize>>,
}

impl DependencyUpdate {
    pub fn new<T: Element>(functions: &[SchemedFunction<T>], n: usize) -> Self {
        let mut dependents = vec![Vec::new(); n];
        for (idx, f) in functions.iter().enumerate() {
            for &i in f.scheme().indices() {
                if i < n {
                    dependents[i].push(idx);
                }
            }
        }
        DependencyUpdate { dependents }
    }
}

impl<T: Element> Update<T> for DependencyUpdate {
    fn update(&self, ctx: &UpdateContext<'_, T>) -> Result<BTreeSet<usize>> {
        let g = &ctx.functions[ctx.chosen];
        let mut out = BTreeSet::new();
        for &i in g.scheme().indices() {
            if ctx.before.component(i) != ctx.after.component(i) {
                out.extend(self.dependents[i].iter().copied());
            }
        }
        Ok(out)
    }
}

/// A base update followed by [`prune_update`].
pub struct Pruned<'p, U> {
    pub base: U,
    pub policy: &'p UpdatePolicy,
}

impl<T: Element, U: Update<T>> Update<T> for Pruned<'_, U> {
    fn update(&self, ctx: &UpdateContext<'_, T>) -> Result<BTreeSet<usize>> {
        let base = self.base.update(ctx)?;
        prune_update(base, ctx.chosen, ctx.functions, self.policy)
    }
}

/// `{f ∈ all | f depends on some i in g's scheme with d[i] ≠ d_new[i]}`.
pub fn default_update<T: Element>(
    g: &SchemedFunction<T>,
    d: &CompoundValue<T>,
    d_new: &CompoundValue<T>,
    all: &[SchemedFunction<T>],
) -> BTreeSet<usize> {
    let changed: Vec<usize> = g
        .scheme()
        .indices()
        .iter()
        .copied()
        .filter(|&i| d.component(i) != d_new.component(i))
        .collect();
    all.iter()
        .enumerate()
        .filter(|(_, f)| changed.iter().any(|&i| f.depends_on(i)))
        .map(|(idx, _)| idx)
        .collect()
}

/// Removes `Idemp(g)` and/or `Comm(g)` from an update set.
pub fn prune_update<T: Element>(
    mut base: BTreeSet<usize>,
    g: usize,
    functions: &[SchemedFunction<T>],
    policy: &UpdatePolicy,
) -> Result<BTreeSet<usize>> {
    let f = functions
        .get(g)
        .ok_or_else(|| Error::Config(format!("unknown function {g}")))?;
    if policy.mode.prunes_idempotent() && f.is_idempotent() {
        base.remove(&g);
    }
    if policy.mode.prunes_commuting() {
        let comm = policy
            .comm
            .get(g)
            .ok_or_else(|| Error::Config(format!("no Comm set for function {g}")))?;
        if let Some(&bad) = comm.iter().find(|&&c| c >= functions.len()) {
            return Err(Error::Config(format!(
                "Comm set of function {g} references unknown function {bad}"
            )));
        }
        base.retain(|h| !comm.contains(h));
    }
    Ok(base)
}

/// The generic iteration loop on the canonic extensions of `functions`,
/// starting from `bottom`. The worklist is seeded with every function in
/// list order.
pub fn run_gi<T: Element>(
    functions: &[SchemedFunction<T>],
    bottom: CompoundValue<T>,
    update: &dyn Update<T>,
    options: &RunOptions,
) -> Result<Run<T>> {
    let mut work = Worklist::new(functions.len(), options.select);
    for idx in 0..functions.len() {
        work.push(idx);
    }
    let mut d = bottom;

    loop {
        if options.verify {
            check_invariant(functions, work.pending(), &d)?;
        }
        let size_before = work.len();
        let Some(g) = work.pop() else { break };
        let d_new = functions[g].apply_extended(&d)?;
        work.stats.applications += 1;

        let added = update.update(&UpdateContext {
            functions,
            pending: work.pending(),
            chosen: g,
            before: &d,
            after: &d_new,
        })?;
        if let Some(&bad) = added.iter().find(|&&f| f >= functions.len()) {
            return Err(Error::Config(format!("update returned unknown function {bad}")));
        }
        if options.verify {
            check_assumptions(functions, work.pending(), g, &d, &d_new, &added)?;
        }
        for f in added {
            work.push(f);
        }
        if options.verify && d_new == d && work.len() >= size_before {
            return Err(Error::Invariant(format!(
                "termination metric did not decrease after applying {}",
                functions[g].label()
            )));
        }
        d = d_new;
    }
    Ok(Run {
        value: d,
        stats: work.stats,
    })
}

/// Compound-domain iteration: [`run_gi`] with the dependency-based update
/// pruned by `policy`. `Plain` is CD, `Idempotent` is CDI and `Both` is CDC.
pub fn run_cd<T: Element>(
    functions: &[SchemedFunction<T>],
    bottom: CompoundValue<T>,
    policy: &UpdatePolicy,
    options: &RunOptions,
) -> Result<Run<T>> {
    policy.validate(functions.len())?;
    for f in functions {
        if let Some(&last) = f.scheme().indices().last() {
            if last >= bottom.len() {
                return Err(Error::Arity(format!(
                    "{} reads component {last} of a {}-component value",
                    f.label(),
                    bottom.len()
                )));
            }
        }
    }
    let update = Pruned {
        base: DependencyUpdate::new(functions, bottom.len()),
        policy,
    };
    run_gi(functions, bottom, &update, options)
}

/// Simple iteration: with `sequence = f₁ … f_k`, computes
/// `f₁⁺ f₂⁺ … f_k⁺(bottom)`, i.e. applies `f_k` first and `f₁` last,
/// exactly once each.
///
/// The result is the least common fixpoint provided every `fᵢ` is a
/// closure and `fᵢ` semi-commutes with `fⱼ` whenever `i > j`. With
/// `verify` set the result is re-checked to be a common fixpoint.
pub fn run_si<T: Element>(
    sequence: &[SchemedFunction<T>],
    bottom: CompoundValue<T>,
    verify: bool,
) -> Result<Run<T>> {
    let mut d = bottom;
    let mut stats = RunStats::default();
    for f in sequence.iter().rev() {
        d = f.apply_extended(&d)?;
        stats.applications += 1;
    }
    if verify {
        for f in sequence {
            if f.apply_extended(&d)? != d {
                return Err(Error::SemiCommutativity(format!(
                    "result of the single pass is not a fixpoint of {}",
                    f.label()
                )));
            }
        }
    }
    Ok(Run { value: d, stats })
}

fn check_invariant<T: Element>(
    functions: &[SchemedFunction<T>],
    pending: &[bool],
    d: &CompoundValue<T>,
) -> Result<()> {
    for (idx, f) in functions.iter().enumerate() {
        if !pending[idx] && f.apply_extended(d)? != *d {
            return Err(Error::Invariant(format!(
                "{} is outside the worklist but does not fix the current value",
                f.label()
            )));
        }
    }
    Ok(())
}

fn check_assumptions<T: Element>(
    functions: &[SchemedFunction<T>],
    pending: &[bool],
    g: usize,
    d: &CompoundValue<T>,
    d_new: &CompoundValue<T>,
    added: &BTreeSet<usize>,
) -> Result<()> {
    let label = functions[g].label();
    if d_new == d && !added.is_empty() {
        return Err(Error::Assumption {
            assumption: 'B',
            detail: format!("{label} changed nothing but the update added {added:?}"),
        });
    }
    if functions[g].apply_extended(d_new)? != *d_new && !added.contains(&g) {
        return Err(Error::Assumption {
            assumption: 'C',
            detail: format!("{label} is not stable on its own output and was not re-added"),
        });
    }
    for (idx, f) in functions.iter().enumerate() {
        if pending[idx] || added.contains(&idx) {
            continue;
        }
        if f.apply_extended(d)? == *d && f.apply_extended(d_new)? != *d_new {
            return Err(Error::Assumption {
                assumption: 'A',
                detail: format!(
                    "{} was stable before {label} fired, is unstable after, and was not re-added",
                    f.label()
                ),
            });
        }
    }
    Ok(())
}

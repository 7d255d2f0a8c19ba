//! Hyper-arc and arc consistency.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::csp::{Atom, Csp};
use crate::error::{Error, Result};
use crate::iterate::{run_cd, RunOptions, RunStats, Selection, UpdateMode, UpdatePolicy, Worklist};
use crate::order::{CompoundValue, Scheme, SchemedFunction};

/// The projection function of one constraint position: it shrinks the
/// domain at `position` to the values supported by some tuple lying in
/// the current domains.
#[derive(Debug, Clone)]
pub struct PiFunction {
    pub constraint: usize,
    pub position: usize,
    pub function: SchemedFunction<Atom>,
}

impl PiFunction {
    /// The CSP variable this function writes.
    pub fn output_variable(&self) -> usize {
        self.function.scheme().indices()[self.position]
    }
}

fn pi_transform(tuples: Arc<Vec<Vec<Atom>>>, position: usize) -> impl Fn(&[BTreeSet<Atom>]) -> Vec<BTreeSet<Atom>> {
    move |boxes| {
        let supported: BTreeSet<Atom> = tuples
            .iter()
            .filter(|t| t.iter().zip(boxes).all(|(v, b)| b.contains(v)))
            .map(|t| t[position].clone())
            .collect();
        let mut out = boxes.to_vec();
        out[position] = supported;
        out
    }
}

/// One function per (constraint, position), in constraint order.
pub fn make_pi_functions(p: &Csp) -> Vec<PiFunction> {
    let n = p.num_variables();
    let mut out = Vec::new();
    for (k, c) in p.constraints().iter().enumerate() {
        let tuples: Arc<Vec<Vec<Atom>>> = Arc::new(c.tuples().iter().cloned().collect());
        let scheme = Scheme::new(c.scope().to_vec(), n).expect("constraint scope is a valid scheme");
        for position in 0..c.arity() {
            let label = format!("pi{} {}", position + 1, c.name());
            let function = SchemedFunction::new(label, scheme.clone(), pi_transform(Arc::clone(&tuples), position))
                .with_idempotent(true);
            out.push(PiFunction {
                constraint: k,
                position,
                function,
            });
        }
    }
    out
}

/// The bare schemed functions of [`make_pi_functions`].
pub fn pi_functions(p: &Csp) -> Vec<SchemedFunction<Atom>> {
    make_pi_functions(p).into_iter().map(|f| f.function).collect()
}

/// The domains of `p` as a compound value over per-variable universes.
pub fn domain_value(p: &Csp) -> CompoundValue<Atom> {
    CompoundValue::bottom(p.domains().to_vec())
}

/// Indices in `all` of the functions known to commute with `all[f]`: the
/// other positions of the same constraint, and any position of another
/// constraint that writes the same variable.
pub fn arc_comm_set(f: usize, all: &[PiFunction]) -> BTreeSet<usize> {
    let me = &all[f];
    let out_var = me.output_variable();
    all.iter()
        .enumerate()
        .filter(|&(k, g)| {
            k != f
                && if g.constraint == me.constraint {
                    g.position != me.position
                } else {
                    g.output_variable() == out_var
                }
        })
        .map(|(k, _)| k)
        .collect()
}

/// Hyper-arc consistency by compound iteration with idempotence pruning.
pub fn hyper_arc(p: &Csp) -> Result<(Csp, RunStats)> {
    hyper_arc_with(p, UpdateMode::Idempotent, &RunOptions::default())
}

/// Hyper-arc consistency under an explicit pruning mode. Commutativity
/// pruning uses [`arc_comm_set`].
pub fn hyper_arc_with(p: &Csp, mode: UpdateMode, options: &RunOptions) -> Result<(Csp, RunStats)> {
    let pis = make_pi_functions(p);
    let comm = if mode.prunes_commuting() {
        (0..pis.len()).map(|k| arc_comm_set(k, &pis)).collect()
    } else {
        Vec::new()
    };
    let functions: Vec<_> = pis.into_iter().map(|f| f.function).collect();
    let run = run_cd(&functions, domain_value(p), &UpdatePolicy::new(mode, comm), options)?;
    Ok((p.with_domains(run.value.into_components())?, run.stats))
}

/// Options for [`ac3_with`].
#[derive(Debug, Clone, Default)]
pub struct Ac3Options {
    pub select: Selection,
    pub verify: bool,
    /// Arcs `(i, j)` (variable indices) to take first, in order. A listed
    /// arc that is not pending when its turn comes is skipped.
    pub script: Vec<(usize, usize)>,
}

/// A directed arc: constraint `k` read from `from` to `to`.
#[derive(Debug, Clone)]
struct Arc3 {
    from: usize,
    to: usize,
    pairs: Vec<(Atom, Atom)>,
}

/// AC-3 with FIFO selection.
pub fn ac3(p: &Csp) -> Result<(Csp, RunStats)> {
    ac3_with(p, &Ac3Options::default())
}

/// AC-3 on the binary constraints of `p`. The worklist holds every
/// constraint followed by its transpose. When some pair of variables
/// carries more than one constraint, arcs into the revised variable are
/// re-queued without excluding the one coming from the arc just revised.
pub fn ac3_with(p: &Csp, options: &Ac3Options) -> Result<(Csp, RunStats)> {
    let mut arcs = Vec::new();
    let mut pairs_seen = BTreeSet::new();
    let mut strict = true;
    for c in p.constraints() {
        if !c.is_binary() {
            return Err(Error::Arity(format!(
                "AC-3 needs binary constraints; {} has arity {}",
                c.name(),
                c.arity()
            )));
        }
        let (x, y) = (c.scope()[0], c.scope()[1]);
        strict &= pairs_seen.insert((x, y));
        let forward: Vec<(Atom, Atom)> = c.tuples().iter().map(|t| (t[0].clone(), t[1].clone())).collect();
        let backward = forward.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        arcs.push(Arc3 { from: x, to: y, pairs: forward });
        arcs.push(Arc3 { from: y, to: x, pairs: backward });
    }
    let mut script = Vec::with_capacity(options.script.len());
    for &(i, j) in &options.script {
        let k = arcs
            .iter()
            .position(|a| a.from == i && a.to == j)
            .ok_or_else(|| Error::Config(format!("no arc on ({i},{j}) in the scripted order")))?;
        script.push(k);
    }
    let mut script = script.into_iter();

    let revise = |a: &Arc3, d: &[BTreeSet<Atom>]| -> BTreeSet<Atom> {
        d[a.from]
            .iter()
            .filter(|v| a.pairs.iter().any(|(x, y)| x == *v && d[a.to].contains(y)))
            .cloned()
            .collect()
    };

    let mut d: Vec<BTreeSet<Atom>> = p.domains().to_vec();
    let mut work = Worklist::new(arcs.len(), options.select);
    for k in 0..arcs.len() {
        work.push(k);
    }
    loop {
        if options.verify {
            for (k, a) in arcs.iter().enumerate() {
                if !work.is_pending(k) && revise(a, &d) != d[a.from] {
                    return Err(Error::Invariant(format!(
                        "arc ({},{}) is not pending but not arc consistent",
                        p.variables()[a.from],
                        p.variables()[a.to]
                    )));
                }
            }
        }
        let next = script.by_ref().find(|&k| work.take(k)).or_else(|| work.pop());
        let Some(k) = next else { break };
        let a = &arcs[k];
        let revised = revise(a, &d);
        work.stats.applications += 1;
        if revised != d[a.from] {
            d[a.from] = revised;
            for (k2, b) in arcs.iter().enumerate() {
                if b.to == a.from && (!strict || b.from != a.to) {
                    work.push(k2);
                }
            }
        }
    }
    Ok((p.with_domains(d)?, work.stats))
}

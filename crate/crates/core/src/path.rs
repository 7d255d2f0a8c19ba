//! Path consistency over standardized binary CSPs.
//!
//! The compound value has one component per constraint, holding its
//! current set of pairs.

use std::collections::{BTreeMap, BTreeSet};

use crate::csp::{compose, transpose, Atom, Csp, Relation};
use crate::error::Result;
use crate::iterate::{run_cd, RunOptions, RunStats, Selection, UpdateMode, UpdatePolicy, Worklist};
use crate::order::{CompoundValue, Scheme, SchemedFunction};

pub type Pair = (Atom, Atom);

/// Which of the three constraints of a triple `x < y < z` is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathKind {
    /// `C_xy := C_xy ∩ C_xz · C_yzᵀ`
    ReduceXyViaZ,
    /// `C_xz := C_xz ∩ C_xy · C_yz`
    ReduceXzViaY,
    /// `C_yz := C_yz ∩ C_xyᵀ · C_xz`
    ReduceYzViaX,
}

impl PathKind {
    pub const ALL: [PathKind; 3] = [PathKind::ReduceXyViaZ, PathKind::ReduceXzViaY, PathKind::ReduceYzViaX];
}

#[derive(Debug, Clone)]
pub struct PathFunction {
    pub kind: PathKind,
    /// Variable indices `x < y < z`.
    pub triple: [usize; 3],
    /// Constraint indices of `C_xy`, `C_xz`, `C_yz`.
    pub constraints: [usize; 3],
    pub function: SchemedFunction<Pair>,
}

impl PathFunction {
    /// The variable pair whose constraint this function reduces, and the
    /// third variable it goes through.
    pub fn reduced_pair(&self) -> ((usize, usize), usize) {
        let [x, y, z] = self.triple;
        match self.kind {
            PathKind::ReduceXyViaZ => ((x, y), z),
            PathKind::ReduceXzViaY => ((x, z), y),
            PathKind::ReduceYzViaX => ((y, z), x),
        }
    }
}

/// Applies one path function to `(C_xy, C_xz, C_yz)`.
pub fn apply_path_function(kind: PathKind, p: &Relation, q: &Relation, r: &Relation) -> (Relation, Relation, Relation) {
    match kind {
        PathKind::ReduceXyViaZ => (p.intersect(&compose(q, &transpose(r))), q.clone(), r.clone()),
        PathKind::ReduceXzViaY => (p.clone(), q.intersect(&compose(p, r)), r.clone()),
        PathKind::ReduceYzViaX => (p.clone(), q.clone(), r.intersect(&compose(&transpose(p), q))),
    }
}

fn to_relation(s: &BTreeSet<Pair>) -> Relation {
    Relation::new(s.clone())
}

/// One function per kind for every triple `x < y < z`, triples in
/// lexicographic order.
pub fn make_path_functions(p: &Csp) -> Result<Vec<PathFunction>> {
    let pairs = p.standard_pairs()?;
    let n = p.num_variables();
    let k = p.constraints().len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                let cs = [pairs[&(x, y)], pairs[&(x, z)], pairs[&(y, z)]];
                let mut sorted = cs.to_vec();
                sorted.sort_unstable();
                let scheme = Scheme::new(sorted.clone(), k)?;
                // scheme position of each role
                let role = cs.map(|c| sorted.iter().position(|&s| s == c).expect("present"));
                let names = [x, y, z].map(|v| p.variables()[v].as_str());
                for kind in PathKind::ALL {
                    let label = match kind {
                        PathKind::ReduceXyViaZ => format!("path {},{} via {}", names[0], names[1], names[2]),
                        PathKind::ReduceXzViaY => format!("path {},{} via {}", names[0], names[2], names[1]),
                        PathKind::ReduceYzViaX => format!("path {},{} via {}", names[1], names[2], names[0]),
                    };
                    let function = SchemedFunction::new(label, scheme.clone(), move |xs: &[BTreeSet<Pair>]| {
                        let (a, b, c) = apply_path_function(
                            kind,
                            &to_relation(&xs[role[0]]),
                            &to_relation(&xs[role[1]]),
                            &to_relation(&xs[role[2]]),
                        );
                        let mut out = xs.to_vec();
                        out[role[0]] = a.into_pairs();
                        out[role[1]] = b.into_pairs();
                        out[role[2]] = c.into_pairs();
                        out
                    })
                    .with_idempotent(true);
                    out.push(PathFunction {
                        kind,
                        triple: [x, y, z],
                        constraints: cs,
                        function,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The constraints of `p` as a compound value of pair sets.
pub fn relation_value(p: &Csp) -> CompoundValue<Pair> {
    CompoundValue::bottom(
        p.constraints()
            .iter()
            .map(|c| c.tuples().iter().map(|t| (t[0].clone(), t[1].clone())).collect())
            .collect(),
    )
}

/// Writes a compound value of pair sets back into the constraints of `p`.
pub fn with_relation_value(p: &Csp, value: CompoundValue<Pair>) -> Result<Csp> {
    let relations: BTreeMap<usize, Relation> = value
        .into_components()
        .into_iter()
        .map(Relation::new)
        .enumerate()
        .collect();
    p.with_relations(&relations)
}

/// Indices of the functions that reduce the same pair as `all[f]` through
/// a different third variable.
pub fn path_comm_set(f: usize, all: &[PathFunction]) -> BTreeSet<usize> {
    let (pair, via) = all[f].reduced_pair();
    all.iter()
        .enumerate()
        .filter(|(_, g)| {
            let (p2, v2) = g.reduced_pair();
            p2 == pair && v2 != via
        })
        .map(|(k, _)| k)
        .collect()
}

/// Path consistency by compound iteration with idempotence pruning.
pub fn path(p: &Csp) -> Result<(Csp, RunStats)> {
    path_with(p, UpdateMode::Idempotent, &RunOptions::default())
}

pub fn path_with(p: &Csp, mode: UpdateMode, options: &RunOptions) -> Result<(Csp, RunStats)> {
    let fs = make_path_functions(p)?;
    let comm = if mode.prunes_commuting() {
        (0..fs.len()).map(|k| path_comm_set(k, &fs)).collect()
    } else {
        Vec::new()
    };
    let functions: Vec<_> = fs.into_iter().map(|f| f.function).collect();
    let run = run_cd(&functions, relation_value(p), &UpdatePolicy::new(mode, comm), options)?;
    Ok((with_relation_value(p, run.value)?, run.stats))
}

/// Current relations of a standardized CSP, with transposes on demand.
struct Network {
    index: BTreeMap<(usize, usize), usize>,
    rels: Vec<Relation>,
}

impl Network {
    fn new(p: &Csp) -> Result<Self> {
        let index = p.standard_pairs()?;
        let rels = p.constraints().iter().map(|c| c.relation()).collect::<Result<_>>()?;
        Ok(Network { index, rels })
    }

    /// `E_ij` for `i ≠ j`, transposed when `i > j`.
    fn get(&self, i: usize, j: usize) -> Relation {
        if i < j {
            self.rels[self.index[&(i, j)]].clone()
        } else {
            transpose(&self.rels[self.index[&(j, i)]])
        }
    }

    fn set(&mut self, i: usize, j: usize, r: Relation) {
        let k = self.index[&(i, j)];
        self.rels[k] = r;
    }

    fn into_csp(self, p: &Csp) -> Result<Csp> {
        p.with_relations(&self.rels.into_iter().enumerate().collect())
    }
}

/// `E_xy ∩ E_xu · E_uy` for `x < y`, with reversed pairs read through
/// transposes. The three relative positions of `u` give the three
/// concrete forms.
fn revise_triple(net: &Network, x: usize, u: usize, y: usize) -> Relation {
    let exy = net.get(x, y);
    let via = if u < x {
        compose(&transpose(&net.get(u, x)), &net.get(u, y))
    } else if u < y {
        compose(&net.get(x, u), &net.get(u, y))
    } else {
        compose(&net.get(x, u), &transpose(&net.get(y, u)))
    };
    exy.intersect(&via)
}

/// Options for [`pc2_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Pc2Options {
    pub select: Selection,
    pub verify: bool,
}

pub fn pc2(p: &Csp) -> Result<(Csp, RunStats)> {
    pc2_with(p, &Pc2Options::default())
}

/// PC-2: a worklist of triples `(x, u, y)` with `x < y`, each meaning
/// "reduce `E_xy` through `u`".
pub fn pc2_with(p: &Csp, options: &Pc2Options) -> Result<(Csp, RunStats)> {
    let mut net = Network::new(p)?;
    let n = p.num_variables();
    let mut triples = Vec::new();
    let mut id = BTreeMap::new();
    for x in 0..n {
        for y in x + 1..n {
            for u in (0..n).filter(|&u| u != x && u != y) {
                id.insert((x, u, y), triples.len());
                triples.push((x, u, y));
            }
        }
    }
    let mut work = Worklist::new(triples.len(), options.select);
    for k in 0..triples.len() {
        work.push(k);
    }
    loop {
        if options.verify {
            for (k, &(x, u, y)) in triples.iter().enumerate() {
                if !work.is_pending(k) && revise_triple(&net, x, u, y) != net.get(x, y) {
                    return Err(crate::Error::Invariant(format!(
                        "triple ({},{},{}) is not pending but not path consistent",
                        p.variables()[x],
                        p.variables()[u],
                        p.variables()[y]
                    )));
                }
            }
        }
        let Some(k) = work.pop() else { break };
        let (x, u, y) = triples[k];
        let revised = revise_triple(&net, x, u, y);
        work.stats.applications += 1;
        if revised != net.get(x, y) {
            net.set(x, y, revised);
            let others = || (0..n).filter(|&w| w != x && w != y);
            let v_xy = others()
                .filter(|&w| x < w)
                .map(|w| (x, y, w))
                .chain(others().filter(|&w| y < w).map(|w| (y, x, w)))
                .chain(others().filter(|&w| w < y).map(|w| (w, x, y)))
                .chain(others().filter(|&w| w < x).map(|w| (w, y, x)));
            for t in v_xy {
                work.push(id[&t]);
            }
        }
    }
    Ok((net.into_csp(p)?, work.stats))
}

/// `C_xz ⊆ C_xy · C_yz` for all pairwise distinct `x, y, z`, reading
/// reversed pairs through transposes.
pub fn is_path_consistent(p: &Csp) -> Result<bool> {
    let net = Network::new(p)?;
    let n = p.num_variables();
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            for z in (0..n).filter(|&z| z != x && z != y) {
                if !net.get(x, z).is_subset(&compose(&net.get(x, y), &net.get(y, z))) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The three inclusions on each triple `x < y < z`:
/// `C_xy ⊆ C_xz · C_yzᵀ`, `C_xz ⊆ C_xy · C_yz`, `C_yz ⊆ C_xyᵀ · C_xz`.
pub fn is_path_consistent_ordered(p: &Csp) -> Result<bool> {
    let net = Network::new(p)?;
    let n = p.num_variables();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                let (a, b, c) = (net.get(x, y), net.get(x, z), net.get(y, z));
                for kind in PathKind::ALL {
                    if apply_path_function(kind, &a, &b, &c) != (a.clone(), b.clone(), c.clone()) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

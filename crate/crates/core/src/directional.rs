//! Directional arc and path consistency along a variable ordering, run as
//! single passes of the simple iteration engine.
//!
//! Every entry point reorders the CSP along the ordering, works on the
//! reordered copy and maps the result back to the original variable order.

use std::collections::{BTreeMap, BTreeSet};

use crate::arc::{domain_value, make_pi_functions};
use crate::csp::{compose, transpose, Atom, Csp, Relation};
use crate::error::{Error, Result};
use crate::iterate::{run_si, RunStats};
use crate::oracle::{check_semi_commute, CheckOptions, CheckReport};
use crate::order::{Element, SchemedFunction};
use crate::path::{make_path_functions, relation_value, with_relation_value, Pair, PathKind};

/// A linear ordering of the variables: `sequence[k]` is the index of the
/// `k`-th variable in the ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableOrder {
    sequence: Vec<usize>,
}

impl VariableOrder {
    pub fn new(sequence: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; sequence.len()];
        for &v in &sequence {
            if v >= sequence.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Ordering(format!("{sequence:?} is not a permutation")));
            }
        }
        Ok(VariableOrder { sequence })
    }

    pub fn identity(n: usize) -> Self {
        VariableOrder {
            sequence: (0..n).collect(),
        }
    }

    /// An ordering given by variable names; must name every variable of
    /// `p` exactly once.
    pub fn from_names<S: AsRef<str>>(p: &Csp, names: &[S]) -> Result<Self> {
        let sequence = names
            .iter()
            .map(|n| {
                p.variable_index(n.as_ref())
                    .ok_or_else(|| Error::Ordering(format!("unknown variable {}", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        if sequence.len() != p.num_variables() {
            return Err(Error::Ordering(format!(
                "ordering names {} variables, the CSP has {}",
                sequence.len(),
                p.num_variables()
            )));
        }
        VariableOrder::new(sequence)
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn inverse(&self) -> VariableOrder {
        let mut inv = vec![0; self.sequence.len()];
        for (k, &v) in self.sequence.iter().enumerate() {
            inv[v] = k;
        }
        VariableOrder { sequence: inv }
    }
}

/// The CSP with its variables listed along `ord`. Each constraint keeps its
/// position in the constraint list; its variables and tuple entries are
/// permuted into the new order.
pub fn reorder(p: &Csp, ord: &VariableOrder) -> Result<Csp> {
    if ord.len() != p.num_variables() {
        return Err(Error::Ordering(format!(
            "ordering has {} variables, the CSP has {}",
            ord.len(),
            p.num_variables()
        )));
    }
    let position = ord.inverse();
    let mut q = Csp::new();
    for &v in ord.sequence() {
        q.add_variable(&p.variables()[v], p.domain(v).iter().map(|a| a.as_ref()))?;
    }
    for c in p.constraints() {
        let mut slots: Vec<(usize, usize)> = c
            .scope()
            .iter()
            .enumerate()
            .map(|(k, &v)| (position.sequence[v], k))
            .collect();
        slots.sort_unstable();
        let scope = slots.iter().map(|&(s, _)| s).collect();
        let tuples = c
            .tuples()
            .iter()
            .map(|t| slots.iter().map(|&(_, k)| t[k].clone()).collect())
            .collect();
        q.add_constraint_on(Some(c.name()), scope, tuples)?;
    }
    Ok(q)
}

/// The π₁ functions of the binary constraints of `q` (already ordered),
/// in the order they are to be applied: constraints on `(x, z)` with
/// larger `z` first, ties by `x` ascending, then by constraint order.
fn darc_application_order(q: &Csp) -> Vec<SchemedFunction<Atom>> {
    let mut firsts: Vec<(usize, usize, usize, SchemedFunction<Atom>)> = make_pi_functions(q)
        .into_iter()
        .filter(|f| f.position == 0 && q.constraint(f.constraint).is_binary())
        .map(|f| {
            let s = q.constraint(f.constraint).scope();
            (s[1], s[0], f.constraint, f.function)
        })
        .collect();
    firsts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    firsts.into_iter().map(|t| t.3).collect()
}

/// The formal sequence `f₁ … f_k` for simple iteration on the reordered
/// CSP: `f_k` is applied first.
pub fn darc_sequence(p: &Csp, ord: &VariableOrder) -> Result<Vec<SchemedFunction<Atom>>> {
    let q = reorder(p, ord)?;
    let mut seq = darc_application_order(&q);
    seq.reverse();
    Ok(seq)
}

/// Directional arc consistency: one pass over the π₁ functions of the
/// binary constraints. Non-binary constraints are ignored.
pub fn darc(p: &Csp, ord: &VariableOrder) -> Result<(Csp, RunStats)> {
    darc_with(p, ord, false)
}

/// [`darc`], optionally re-checking that the single pass reached a common
/// fixpoint.
pub fn darc_with(p: &Csp, ord: &VariableOrder, verify: bool) -> Result<(Csp, RunStats)> {
    let q = reorder(p, ord)?;
    let seq = darc_sequence(p, ord)?;
    let run = run_si(&seq, domain_value(&q), verify)?;
    let q2 = q.with_domains(run.value.into_components())?;
    Ok((reorder(&q2, &ord.inverse())?, run.stats))
}

/// The double loop: `j` from the last variable down to the second, `i`
/// over the variables before `j`, keeping in `D_i` the values with a
/// support in `D_j` under `C_ij`.
pub fn dac(p: &Csp, ord: &VariableOrder) -> Result<(Csp, RunStats)> {
    let q = reorder(p, ord)?;
    let pairs = q.standard_pairs()?;
    let n = q.num_variables();
    let mut d: Vec<BTreeSet<Atom>> = q.domains().to_vec();
    let mut stats = RunStats::default();
    for j in (1..n).rev() {
        for i in 0..j {
            let c = q.constraint(pairs[&(i, j)]).relation()?;
            d[i] = d[i]
                .iter()
                .filter(|a| d[j].iter().any(|b| c.contains(a, b)))
                .cloned()
                .collect();
            stats.applications += 1;
        }
    }
    let q2 = q.with_domains(d)?;
    Ok((reorder(&q2, &ord.inverse())?, stats))
}

/// Functions reducing `C_ij` through `x_m` with `i < j < m`, in
/// application order: `m` descending, then `(j, i)` lexicographic.
fn dpath_application_order(q: &Csp) -> Result<Vec<SchemedFunction<Pair>>> {
    let by_triple: BTreeMap<[usize; 3], SchemedFunction<Pair>> = make_path_functions(q)?
        .into_iter()
        .filter(|f| f.kind == PathKind::ReduceXyViaZ)
        .map(|f| (f.triple, f.function))
        .collect();
    let n = q.num_variables();
    let mut out = Vec::new();
    for m in (2..n).rev() {
        for j in 1..m {
            for i in 0..j {
                out.push(by_triple[&[i, j, m]].clone());
            }
        }
    }
    Ok(out)
}

/// The formal simple-iteration sequence for directional path consistency.
pub fn dpath_sequence(p: &Csp, ord: &VariableOrder) -> Result<Vec<SchemedFunction<Pair>>> {
    let q = reorder(p, ord)?;
    let mut seq = dpath_application_order(&q)?;
    seq.reverse();
    Ok(seq)
}

/// Directional path consistency: one pass over the functions reducing
/// `C_ij` through a later variable.
pub fn dpath(p: &Csp, ord: &VariableOrder) -> Result<(Csp, RunStats)> {
    dpath_with(p, ord, false)
}

/// [`dpath`], optionally re-checking that the single pass reached a
/// common fixpoint.
pub fn dpath_with(p: &Csp, ord: &VariableOrder, verify: bool) -> Result<(Csp, RunStats)> {
    let q = reorder(p, ord)?;
    let seq = dpath_sequence(p, ord)?;
    let run = run_si(&seq, relation_value(&q), verify)?;
    let q2 = with_relation_value(&q, run.value)?;
    Ok((reorder(&q2, &ord.inverse())?, run.stats))
}

/// The triple loop: `m` from the last variable down to the third, `j`
/// from the second to `m − 1`, `i` before `j`:
/// `C_ij := C_ij ∩ C_im · C_jmᵀ`.
pub fn dpc(p: &Csp, ord: &VariableOrder) -> Result<(Csp, RunStats)> {
    let q = reorder(p, ord)?;
    let pairs = q.standard_pairs()?;
    let mut rels: Vec<Relation> = q.constraints().iter().map(|c| c.relation()).collect::<Result<_>>()?;
    let n = q.num_variables();
    let mut stats = RunStats::default();
    for m in (2..n).rev() {
        for j in 1..m {
            for i in 0..j {
                let (ij, im, jm) = (pairs[&(i, j)], pairs[&(i, m)], pairs[&(j, m)]);
                rels[ij] = rels[ij].intersect(&compose(&rels[im], &transpose(&rels[jm])));
                stats.applications += 1;
            }
        }
    }
    let q2 = q.with_relations(&rels.into_iter().enumerate().collect())?;
    Ok((reorder(&q2, &ord.inverse())?, stats))
}

/// Checks the simple-iteration condition on `sequence`: `fᵢ` semi-commutes
/// with `fⱼ` for every `i > j`. Returns the first failing report, or a
/// passing one summing the states examined.
pub fn si_precondition_check<T: Element>(
    sequence: &[SchemedFunction<T>],
    universes: &[BTreeSet<T>],
    options: &CheckOptions,
) -> Result<CheckReport<T>> {
    let mut total = CheckReport {
        passed: true,
        counterexample: None,
        states: 0,
        exhaustive: true,
    };
    for i in 0..sequence.len() {
        for j in 0..i {
            let r = check_semi_commute(&sequence[i], &sequence[j], universes, options)?;
            if !r.passed {
                return Ok(r);
            }
            total.states += r.states;
            total.exhaustive &= r.exhaustive;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::standardize;
    use crate::oracle::chaotic_fixpoint;

    fn atoms(items: &[&str]) -> BTreeSet<Atom> {
        items.iter().map(|s| Atom::from(*s)).collect()
    }

    fn two_vars() -> Csp {
        let mut p = Csp::new();
        p.add_variable("x", ["a", "b"]).unwrap();
        p.add_variable("y", ["c", "d"]).unwrap();
        p.add_constraint(Some("C"), &["x", "y"], [["a", "c"]]).unwrap();
        p
    }

    #[test]
    fn order_validation() {
        assert!(VariableOrder::new(vec![0, 0]).is_err());
        assert!(VariableOrder::new(vec![1, 2]).is_err());
        let p = two_vars();
        assert!(VariableOrder::from_names(&p, &["x"]).is_err());
        assert!(VariableOrder::from_names(&p, &["x", "q"]).is_err());
        assert_eq!(VariableOrder::from_names(&p, &["y", "x"]).unwrap().sequence(), &[1, 0]);
    }

    #[test]
    fn reorder_transposes_under_swap() {
        let p = two_vars();
        assert_eq!(reorder(&p, &VariableOrder::identity(2)).unwrap(), p);
        let swap = VariableOrder::new(vec![1, 0]).unwrap();
        let q = reorder(&p, &swap).unwrap();
        assert_eq!(q.variables(), &["y".to_string(), "x".to_string()]);
        assert_eq!(q.constraint(0).relation().unwrap(), Relation::from_strs(&[("c", "a")]));
        assert_eq!(reorder(&q, &swap.inverse()).unwrap(), p);
    }

    #[test]
    fn darc_is_only_directional() {
        let (q, stats) = darc(&two_vars(), &VariableOrder::identity(2)).unwrap();
        assert_eq!(q.domain(0), &atoms(&["a"]));
        assert_eq!(q.domain(1), &atoms(&["c", "d"]));
        assert_eq!(stats.applications, 1);

        let (q, _) = darc(&two_vars(), &VariableOrder::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(q.domain(0), &atoms(&["a", "b"]));
        assert_eq!(q.domain(1), &atoms(&["c"]));
    }

    fn chain3() -> Csp {
        let mut p = Csp::new();
        p.add_variable("x", ["a", "b"]).unwrap();
        p.add_variable("y", ["a", "b"]).unwrap();
        p.add_variable("z", ["a", "b"]).unwrap();
        p.add_constraint(None, &["x", "y"], [["a", "a"], ["b", "b"]]).unwrap();
        p.add_constraint(None, &["y", "z"], [["b", "a"]]).unwrap();
        p
    }

    #[test]
    fn darc_on_a_chain_reaches_the_fixpoint() {
        let p = chain3();
        let ord = VariableOrder::identity(3);
        let (q, _) = darc(&p, &ord).unwrap();
        assert_eq!(q.domain(0), &atoms(&["b"]));
        assert_eq!(q.domain(1), &atoms(&["b"]));
        let seq = darc_sequence(&p, &ord).unwrap();
        assert_eq!(seq.iter().map(|f| f.label()).collect::<Vec<_>>(), ["pi1 C_x_y", "pi1 C_y_z"]);
        let oracle = chaotic_fixpoint(&seq, &domain_value(&p)).unwrap();
        assert_eq!(oracle.components(), q.domains());
    }

    #[test]
    fn dac_matches_darc_and_needs_standardization() {
        let p = chain3();
        let ord = VariableOrder::new(vec![2, 0, 1]).unwrap();
        assert!(matches!(dac(&p, &ord), Err(Error::NotStandardized(_))));
        let s = standardize(&p).unwrap();
        assert_eq!(dac(&s, &ord).unwrap(), darc(&s, &ord).unwrap());
    }

    #[test]
    fn dpath_and_dpc_agree_with_one_function_for_three_variables() {
        let s = standardize(&chain3()).unwrap();
        let ord = VariableOrder::identity(3);
        let (a, sa) = dpath(&s, &ord).unwrap();
        let (b, sb) = dpc(&s, &ord).unwrap();
        assert_eq!(a, b);
        assert_eq!((sa.applications, sb.applications), (1, 1));
        // C_xy ∩ C_xz · C_yzᵀ = {(a,a),(b,b)} ∩ {(a,b),(b,b)} = {(b,b)}
        assert_eq!(a.constraint(0).relation().unwrap(), Relation::from_strs(&[("b", "b")]));
    }

    #[test]
    fn directional_sequences_semi_commute() {
        let s = standardize(&chain3()).unwrap();
        let ord = VariableOrder::identity(3);
        let o = CheckOptions::sampled(5, 1000);
        let seq = darc_sequence(&s, &ord).unwrap();
        assert!(si_precondition_check(&seq, s.domains(), &o).unwrap().passed);
        let rev: Vec<_> = seq.into_iter().rev().collect();
        assert!(!si_precondition_check(&rev, s.domains(), &o).unwrap().passed);
    }
}

use std::collections::BTreeSet;

use proptest::prelude::*;

use propagation::arc::{ac3, domain_value, hyper_arc, hyper_arc_with, pi_functions};
use propagation::csp::{compose, standardize, transpose, Atom, Csp, Relation};
use propagation::directional::{
    darc, darc_sequence, dpath, dpath_sequence, reorder, VariableOrder,
};
use propagation::generate::{random_csp, GeneratorConfig};
use propagation::iterate::{run_cd, run_gi, run_si, RunOptions, UpdateMode, UpdatePolicy};
use propagation::oracle::{chaotic_fixpoint, chaotic_fixpoint_permuted, enumerate_solutions, obvious_update};
use propagation::path::{
    is_path_consistent, is_path_consistent_ordered, make_path_functions, path, path_comm_set, path_with, pc2,
    relation_value,
};

fn mixed(seed: u64) -> Csp {
    random_csp(seed, &GeneratorConfig::mixed())
}

fn binary(seed: u64) -> Csp {
    random_csp(seed, &GeneratorConfig { duplicate: 0.2, ..GeneratorConfig::binary() })
}

fn order_for(seed: u64, n: usize) -> VariableOrder {
    let mut v: Vec<usize> = (0..n).collect();
    v.rotate_left((seed as usize) % n.max(1));
    if seed % 2 == 1 {
        v.reverse();
    }
    VariableOrder::new(v).unwrap()
}

fn hyper_arc_consistent(p: &Csp) -> bool {
    p.constraints().iter().all(|c| {
        c.scope().iter().enumerate().all(|(pos, &i)| {
            p.domain(i).iter().all(|a| {
                c.tuples()
                    .iter()
                    .any(|t| t[pos] == *a && t.iter().zip(c.scope()).all(|(v, &j)| p.domain(j).contains(v)))
            })
        })
    })
}

/// Solutions of `q` equal those of `p`.
fn same_solutions(p: &Csp, q: &Csp) -> bool {
    enumerate_solutions(p).unwrap() == enumerate_solutions(q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hyper_arc_fixpoint_characterization(seed in any::<u64>()) {
        let p = mixed(seed);
        let fixed = |q: &Csp| pi_functions(q).iter().all(|f| f.apply_extended(&domain_value(q)).unwrap() == domain_value(q));
        prop_assert_eq!(fixed(&p), hyper_arc_consistent(&p));
        let (q, _) = hyper_arc(&p).unwrap();
        prop_assert!(fixed(&q));
        prop_assert!(hyper_arc_consistent(&q));
        prop_assert!(same_solutions(&p, &q));
    }

    #[test]
    fn hyper_arc_has_largest_domains(seed in any::<u64>()) {
        // any hyper-arc consistent reduction containing a solution's values
        // is below the result: every solution value survives
        let p = mixed(seed);
        let (q, _) = hyper_arc(&p).unwrap();
        for s in enumerate_solutions(&p).unwrap() {
            for (i, a) in s.iter().enumerate() {
                prop_assert!(q.domain(i).contains(a));
            }
        }
    }

    #[test]
    fn ac3_agrees_with_hyper_arc(seed in any::<u64>()) {
        let p = binary(seed);
        let (a, _) = ac3(&p).unwrap();
        let (h, _) = hyper_arc(&p).unwrap();
        prop_assert_eq!(a.domains(), h.domains());
    }

    #[test]
    fn pruning_modes_reach_the_same_value(seed in any::<u64>()) {
        let p = mixed(seed);
        let runs: Vec<_> = UpdateMode::ALL
            .iter()
            .map(|&m| hyper_arc_with(&p, m, &RunOptions::default().verified()).unwrap())
            .collect();
        for r in &runs[1..] {
            prop_assert_eq!(&r.0, &runs[0].0);
        }
        let s = standardize(&binary(seed)).unwrap();
        let runs: Vec<_> = UpdateMode::ALL
            .iter()
            .map(|&m| path_with(&s, m, &RunOptions::default()).unwrap())
            .collect();
        for r in &runs[1..] {
            prop_assert_eq!(&r.0, &runs[0].0);
        }
    }

    #[test]
    fn standardize_preserves_solutions(seed in any::<u64>()) {
        let p = binary(seed);
        let s = standardize(&p).unwrap();
        prop_assert!(s.is_standardized());
        prop_assert!(same_solutions(&p, &s));
    }

    #[test]
    fn path_results(seed in any::<u64>()) {
        let s = standardize(&binary(seed)).unwrap();
        prop_assert_eq!(is_path_consistent(&s).unwrap(), is_path_consistent_ordered(&s).unwrap());
        let (q, stats) = path(&s).unwrap();
        prop_assert!(is_path_consistent(&q).unwrap());
        prop_assert!(is_path_consistent_ordered(&q).unwrap());
        prop_assert!(same_solutions(&s, &q));
        let fs: Vec<_> = make_path_functions(&q).unwrap().into_iter().map(|f| f.function).collect();
        let v = relation_value(&q);
        prop_assert!(fs.iter().all(|f| f.apply_extended(&v).unwrap() == v));
        let (q2, stats2) = pc2(&s).unwrap();
        prop_assert_eq!(q2, q);
        prop_assert!(stats2.additions <= stats.additions);
    }

    #[test]
    fn darc_meets_the_directional_condition(seed in any::<u64>()) {
        let p = binary(seed);
        let ord = order_for(seed, p.num_variables());
        let (q, stats) = darc(&p, &ord).unwrap();
        prop_assert!(same_solutions(&p, &q));
        prop_assert_eq!(stats.applications as usize, darc_sequence(&p, &ord).unwrap().len());
        let pos = ord.inverse();
        for c in q.constraints() {
            let (x, y) = (c.scope()[0], c.scope()[1]);
            let r = c.relation().unwrap();
            let (first, second, rel) = if pos.sequence()[x] < pos.sequence()[y] { (x, y, r) } else { (y, x, transpose(&r)) };
            for a in q.domain(first) {
                prop_assert!(q.domain(second).iter().any(|b| rel.contains(a, b)));
            }
        }
        // single pass equals compound iteration on the same functions
        let r = reorder(&p, &ord).unwrap();
        let seq = darc_sequence(&p, &ord).unwrap();
        let si = run_si(&seq, domain_value(&r), true).unwrap();
        let cd = run_cd(&seq, domain_value(&r), &UpdatePolicy::idempotent(), &RunOptions::default()).unwrap();
        prop_assert_eq!(si.value, cd.value);
    }

    #[test]
    fn dpath_meets_the_directional_condition(seed in any::<u64>()) {
        let s = standardize(&binary(seed)).unwrap();
        let ord = order_for(seed, s.num_variables());
        let (q, _) = dpath(&s, &ord).unwrap();
        prop_assert!(same_solutions(&s, &q));
        let r = reorder(&q, &ord).unwrap();
        let pairs = r.standard_pairs().unwrap();
        let rel = |i: usize, j: usize| r.constraint(pairs[&(i, j)]).relation().unwrap();
        let n = r.num_variables();
        for m in 0..n {
            for j in 0..m {
                for i in 0..j {
                    prop_assert!(rel(i, j).is_subset(&compose(&rel(i, m), &transpose(&rel(j, m)))));
                }
            }
        }
        let seq = dpath_sequence(&s, &ord).unwrap();
        let v = relation_value(&r);
        prop_assert!(seq.iter().all(|f| f.apply_extended(&v).unwrap() == v));
    }

    #[test]
    fn reorder_round_trip(seed in any::<u64>()) {
        let p = mixed(seed);
        let ord = order_for(seed, p.num_variables());
        let q = reorder(&p, &ord).unwrap();
        prop_assert_eq!(reorder(&q, &ord.inverse()).unwrap(), p.clone());
        let permuted: BTreeSet<Vec<Atom>> = enumerate_solutions(&p)
            .unwrap()
            .into_iter()
            .map(|s| ord.sequence().iter().map(|&v| s[v].clone()).collect())
            .collect();
        prop_assert_eq!(enumerate_solutions(&q).unwrap(), permuted);
    }

    #[test]
    fn reference_update_reaches_the_same_fixpoint(seed in any::<u64>()) {
        let p = mixed(seed);
        let fs = pi_functions(&p);
        let run = run_gi(&fs, domain_value(&p), &obvious_update, &RunOptions::default().verified()).unwrap();
        prop_assert_eq!(&run.value, &chaotic_fixpoint(&fs, &domain_value(&p)).unwrap());
        let reversed: Vec<usize> = (0..fs.len()).rev().collect();
        prop_assert_eq!(run.value, chaotic_fixpoint_permuted(&fs, &domain_value(&p), &reversed).unwrap());
    }

    #[test]
    fn shared_pair_path_functions_commute_on_random_relations(
        rels in proptest::collection::vec(proptest::collection::btree_set((0u8..2, 0u8..2), 0..=4), 6)
    ) {
        // four variables over {0, 1}; every pair's relation random
        let mut p = Csp::new();
        for v in ["w", "x", "y", "z"] {
            p.add_variable(v, ["0", "1"]).unwrap();
        }
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                let tuples = rels[k].iter().map(|(a, b)| vec![Atom::from(a.to_string()), Atom::from(b.to_string())]).collect();
                p.add_constraint_on(None, vec![i, j], tuples).unwrap();
                k += 1;
            }
        }
        let fs = make_path_functions(&p).unwrap();
        let v = relation_value(&p);
        for a in 0..fs.len() {
            for b in path_comm_set(a, &fs) {
                let (f, g) = (&fs[a].function, &fs[b].function);
                let fg = f.apply_extended(&g.apply_extended(&v).unwrap()).unwrap();
                let gf = g.apply_extended(&f.apply_extended(&v).unwrap()).unwrap();
                prop_assert_eq!(fg, gf);
            }
        }
    }
}

#[test]
fn pc2_saves_additions_on_some_instance() {
    let strict = (0..200u64).any(|seed| {
        let s = standardize(&binary(seed)).unwrap();
        pc2(&s).unwrap().1.additions < path(&s).unwrap().1.additions
    });
    assert!(strict);
}

#[test]
fn dpath_is_weaker_than_path_on_some_instance() {
    let found = (0..500u64).find(|&seed| {
        let s = standardize(&random_csp(seed, &GeneratorConfig { min_vars: 4, ..GeneratorConfig::binary() })).unwrap();
        let ord = VariableOrder::identity(s.num_variables());
        dpath(&s, &ord).unwrap().0 != path(&s).unwrap().0
    });
    assert!(found.is_some());
}

#[test]
fn composition_reading_of_a_relation() {
    let r = Relation::from_strs(&[("a", "b")]);
    assert_eq!(compose(&r, &transpose(&r)), Relation::from_strs(&[("a", "a")]));
}

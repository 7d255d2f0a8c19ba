//! Finite-domain CSPs with extensional constraints, and the binary-relation
//! algebra (transpose, composition) used by the path algorithms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An opaque domain value. Atoms compare by their text.
pub type Atom = Arc<str>;

pub fn atom(text: &str) -> Atom {
    Arc::from(text)
}

/// A finite binary relation.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation(BTreeSet<(Atom, Atom)>);

impl Relation {
    pub fn new(pairs: BTreeSet<(Atom, Atom)>) -> Self {
        Relation(pairs)
    }

    /// Convenience constructor from string pairs.
    pub fn from_strs(pairs: &[(&str, &str)]) -> Self {
        pairs.iter().map(|(a, b)| (atom(a), atom(b))).collect()
    }

    pub fn pairs(&self) -> &BTreeSet<(Atom, Atom)> {
        &self.0
    }

    pub fn into_pairs(self) -> BTreeSet<(Atom, Atom)> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &Atom, b: &Atom) -> bool {
        self.0.contains(&(a.clone(), b.clone()))
    }

    pub fn transpose(&self) -> Relation {
        transpose(self)
    }

    /// `self · other`.
    pub fn compose(&self, other: &Relation) -> Relation {
        compose(self, other)
    }

    pub fn intersect(&self, other: &Relation) -> Relation {
        Relation(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.0.is_subset(&other.0)
    }

    /// The Cartesian product `xs × ys`.
    pub fn product(xs: &BTreeSet<Atom>, ys: &BTreeSet<Atom>) -> Relation {
        xs.iter()
            .flat_map(|a| ys.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    }
}

impl FromIterator<(Atom, Atom)> for Relation {
    fn from_iter<I: IntoIterator<Item = (Atom, Atom)>>(iter: I) -> Self {
        Relation(iter.into_iter().collect())
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.0.iter().map(|(a, b)| format!("({a},{b})")))
            .finish()
    }
}

/// `{(b, a) | (a, b) ∈ r}`.
pub fn transpose(r: &Relation) -> Relation {
    r.0.iter().map(|(a, b)| (b.clone(), a.clone())).collect()
}

/// `{(a, b) | ∃c (a, c) ∈ r ∧ (c, b) ∈ s}`.
pub fn compose(r: &Relation, s: &Relation) -> Relation {
    let mut by_first: BTreeMap<&Atom, Vec<&Atom>> = BTreeMap::new();
    for (c, b) in &s.0 {
        by_first.entry(c).or_default().push(b);
    }
    let mut out = BTreeSet::new();
    for (a, c) in &r.0 {
        if let Some(bs) = by_first.get(c) {
            out.extend(bs.iter().map(|b| (a.clone(), (*b).clone())));
        }
    }
    Relation(out)
}

/// A constraint: a set of tuples over a subsequence of the CSP variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    name: String,
    scope: Vec<usize>,
    tuples: BTreeSet<Vec<Atom>>,
}

impl Constraint {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Variable indices, strictly increasing.
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<Atom>> {
        &self.tuples
    }

    pub fn is_binary(&self) -> bool {
        self.scope.len() == 2
    }

    /// The tuple set of a binary constraint as a relation.
    pub fn relation(&self) -> Result<Relation> {
        if !self.is_binary() {
            return Err(Error::Arity(format!(
                "constraint {} has arity {}, expected 2",
                self.name,
                self.arity()
            )));
        }
        Ok(self
            .tuples
            .iter()
            .map(|t| (t[0].clone(), t[1].clone()))
            .collect())
    }
}

/// A CSP `⟨C ; x₁ ∈ D₁, …, xₙ ∈ Dₙ⟩`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Csp {
    variables: Vec<String>,
    domains: Vec<BTreeSet<Atom>>,
    constraints: Vec<Constraint>,
}

impl Csp {
    pub fn new() -> Self {
        Csp::default()
    }

    pub fn add_variable<I, S>(&mut self, name: &str, domain: I) -> Result<usize>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if self.variable_index(name).is_some() {
            return Err(Error::Model(format!("variable {name} declared twice")));
        }
        self.variables.push(name.to_string());
        self.domains
            .push(domain.into_iter().map(|s| atom(s.as_ref())).collect());
        Ok(self.variables.len() - 1)
    }

    /// Adds a constraint on the named variables, which must appear in
    /// declaration order. `name = None` generates `C_x_y`.
    pub fn add_constraint<I, T, S>(
        &mut self,
        name: Option<&str>,
        vars: &[&str],
        tuples: I,
    ) -> Result<usize>
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let scope = vars
            .iter()
            .map(|v| {
                self.variable_index(v)
                    .ok_or_else(|| Error::Model(format!("unknown variable {v}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let tuples = tuples
            .into_iter()
            .map(|t| t.into_iter().map(|s| atom(s.as_ref())).collect())
            .collect();
        self.add_constraint_on(name, scope, tuples)
    }

    /// Index-based variant of [`Csp::add_constraint`].
    pub fn add_constraint_on(
        &mut self,
        name: Option<&str>,
        scope: Vec<usize>,
        tuples: BTreeSet<Vec<Atom>>,
    ) -> Result<usize> {
        if scope.is_empty() {
            return Err(Error::Model("constraint on no variables".into()));
        }
        if let Some(&bad) = scope.iter().find(|&&i| i >= self.variables.len()) {
            return Err(Error::Model(format!("unknown variable index {bad}")));
        }
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            let names: Vec<&str> = scope.iter().map(|&i| self.variables[i].as_str()).collect();
            return Err(Error::Model(format!(
                "constraint variables ({}) are not a subsequence of the declaration order",
                names.join(",")
            )));
        }
        for t in &tuples {
            if t.len() != scope.len() {
                return Err(Error::Arity(format!(
                    "tuple of length {} on {} variables",
                    t.len(),
                    scope.len()
                )));
            }
            for (v, &i) in t.iter().zip(&scope) {
                if !self.domains[i].contains(v) {
                    return Err(Error::Domain(format!(
                        "value {v} is not in the domain of {}",
                        self.variables[i]
                    )));
                }
            }
        }
        let name = match name {
            Some(n) => n.to_string(),
            None => self.fresh_name(&scope),
        };
        self.constraints.push(Constraint {
            name,
            scope,
            tuples,
        });
        Ok(self.constraints.len() - 1)
    }

    fn fresh_name(&self, scope: &[usize]) -> String {
        let base = std::iter::once("C")
            .chain(scope.iter().map(|&i| self.variables[i].as_str()))
            .collect::<Vec<_>>()
            .join("_");
        let taken = |n: &str| self.constraints.iter().any(|c| c.name == n);
        if !taken(&base) {
            return base;
        }
        (2..)
            .map(|k| format!("{base}_{k}"))
            .find(|n| !taken(n))
            .expect("unbounded suffixes")
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn domains(&self) -> &[BTreeSet<Atom>] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> &BTreeSet<Atom> {
        &self.domains[i]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, i: usize) -> &Constraint {
        &self.constraints[i]
    }

    /// Replaces the domains (each must shrink) and restricts every
    /// constraint to them.
    pub fn with_domains(&self, domains: Vec<BTreeSet<Atom>>) -> Result<Csp> {
        if domains.len() != self.domains.len() {
            return Err(Error::Arity(format!(
                "{} domains for {} variables",
                domains.len(),
                self.domains.len()
            )));
        }
        if let Some(i) = (0..domains.len()).find(|&i| !domains[i].is_subset(&self.domains[i])) {
            return Err(Error::Domain(format!(
                "new domain of {} is not a subset of the old one",
                self.variables[i]
            )));
        }
        let constraints = self
            .constraints
            .iter()
            .map(|c| Constraint {
                name: c.name.clone(),
                scope: c.scope.clone(),
                tuples: c
                    .tuples
                    .iter()
                    .filter(|t| t.iter().zip(&c.scope).all(|(v, &i)| domains[i].contains(v)))
                    .cloned()
                    .collect(),
            })
            .collect();
        Ok(Csp {
            variables: self.variables.clone(),
            domains,
            constraints,
        })
    }

    /// Replaces the tuple set of every constraint (each must shrink).
    pub fn with_constraint_tuples(&self, tuples: Vec<BTreeSet<Vec<Atom>>>) -> Result<Csp> {
        if tuples.len() != self.constraints.len() {
            return Err(Error::Arity(format!(
                "{} tuple sets for {} constraints",
                tuples.len(),
                self.constraints.len()
            )));
        }
        let mut out = self.clone();
        for (c, t) in out.constraints.iter_mut().zip(tuples) {
            if !t.is_subset(&c.tuples) {
                return Err(Error::Contract(format!("constraint {} would grow", c.name)));
            }
            c.tuples = t;
        }
        Ok(out)
    }

    /// Binary constraints with the given relation replacing each one, in
    /// constraint order. Non-binary constraints keep their tuples.
    pub fn with_relations(&self, relations: &BTreeMap<usize, Relation>) -> Result<Csp> {
        let tuples = self
            .constraints
            .iter()
            .enumerate()
            .map(|(k, c)| match relations.get(&k) {
                Some(r) => r.pairs().iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect(),
                None => c.tuples.clone(),
            })
            .collect();
        self.with_constraint_tuples(tuples)
    }

    /// True when some domain is empty.
    pub fn has_empty_domain(&self) -> bool {
        self.domains.iter().any(BTreeSet::is_empty)
    }

    /// True when some constraint has no tuples.
    pub fn has_empty_constraint(&self) -> bool {
        self.constraints.iter().any(|c| c.tuples.is_empty())
    }

    /// Maps each variable pair `(i, j)`, `i < j`, to the index of its
    /// unique binary constraint. Fails unless the CSP is standardized.
    pub fn standard_pairs(&self) -> Result<BTreeMap<(usize, usize), usize>> {
        let mut pairs = BTreeMap::new();
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.is_binary() {
                return Err(Error::NotStandardized(format!(
                    "constraint {} has arity {}",
                    c.name,
                    c.arity()
                )));
            }
            if pairs.insert((c.scope[0], c.scope[1]), k).is_some() {
                return Err(Error::NotStandardized(format!(
                    "more than one constraint on ({},{})",
                    self.variables[c.scope[0]], self.variables[c.scope[1]]
                )));
            }
        }
        let n = self.variables.len();
        for i in 0..n {
            for j in i + 1..n {
                if !pairs.contains_key(&(i, j)) {
                    return Err(Error::NotStandardized(format!(
                        "no constraint on ({},{})",
                        self.variables[i], self.variables[j]
                    )));
                }
            }
        }
        Ok(pairs)
    }

    pub fn is_standardized(&self) -> bool {
        self.standard_pairs().is_ok()
    }
}

/// `{t[j] | t ∈ c, t[i] ∈ boxes[i] for all i}`, with `j` 0-based and
/// `boxes` given in the constraint's variable order.
pub fn project_constraint(
    c: &Constraint,
    j: usize,
    boxes: &[BTreeSet<Atom>],
) -> Result<BTreeSet<Atom>> {
    if j >= c.arity() {
        return Err(Error::Arity(format!(
            "position {j} out of range for constraint {} of arity {}",
            c.name(),
            c.arity()
        )));
    }
    if boxes.len() != c.arity() {
        return Err(Error::Arity(format!(
            "{} boxes for constraint {} of arity {}",
            boxes.len(),
            c.name(),
            c.arity()
        )));
    }
    Ok(c.tuples
        .iter()
        .filter(|t| t.iter().zip(boxes).all(|(v, b)| b.contains(v)))
        .map(|t| t[j].clone())
        .collect())
}

/// Standardizes a binary CSP: one constraint per variable pair `(x, y)`
/// with `x` before `y`, in lexicographic pair order. Pairs without a
/// constraint get the universal relation; several constraints on one pair
/// are intersected.
pub fn standardize(p: &Csp) -> Result<Csp> {
    if let Some(c) = p.constraints.iter().find(|c| !c.is_binary()) {
        return Err(Error::Arity(format!(
            "cannot standardize: constraint {} has arity {}",
            c.name,
            c.arity()
        )));
    }
    let mut out = Csp {
        variables: p.variables.clone(),
        domains: p.domains.clone(),
        constraints: Vec::new(),
    };
    let n = p.variables.len();
    for i in 0..n {
        for j in i + 1..n {
            let on_pair: Vec<&Constraint> = p
                .constraints
                .iter()
                .filter(|c| c.scope == [i, j])
                .collect();
            let tuples: BTreeSet<Vec<Atom>> = match on_pair.split_first() {
                None => p.domains[i]
                    .iter()
                    .flat_map(|a| p.domains[j].iter().map(move |b| vec![a.clone(), b.clone()]))
                    .collect(),
                Some((first, rest)) => first
                    .tuples
                    .iter()
                    .filter(|t| rest.iter().all(|c| c.tuples.contains(*t)))
                    .cloned()
                    .collect(),
            };
            let name = match on_pair.as_slice() {
                [only] => Some(only.name.as_str()),
                _ => None,
            };
            out.add_constraint_on(name, vec![i, j], tuples)?;
        }
    }
    Ok(out)
}

/// Whether `assignment` (one value per variable) satisfies every
/// constraint.
pub fn is_solution(p: &Csp, assignment: &[Atom]) -> Result<bool> {
    if assignment.len() != p.variables.len() {
        return Err(Error::Arity(format!(
            "assignment of length {} for {} variables",
            assignment.len(),
            p.variables.len()
        )));
    }
    for (i, v) in assignment.iter().enumerate() {
        if !p.domains[i].contains(v) {
            return Err(Error::Domain(format!(
                "value {v} is not in the domain of {}",
                p.variables[i]
            )));
        }
    }
    Ok(p.constraints.iter().all(|c| {
        let projected: Vec<Atom> = c.scope.iter().map(|&i| assignment[i].clone()).collect();
        c.tuples.contains(&projected)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(items: &[&str]) -> BTreeSet<Atom> {
        items.iter().map(|s| atom(s)).collect()
    }

    fn assignment(items: &[&str]) -> Vec<Atom> {
        items.iter().map(|s| atom(s)).collect()
    }

    #[test]
    fn transpose_examples() {
        let r = Relation::from_strs(&[("a", "c"), ("b", "d")]);
        assert_eq!(transpose(&r), Relation::from_strs(&[("c", "a"), ("d", "b")]));
        assert!(transpose(&Relation::default()).is_empty());
    }

    #[test]
    fn compose_examples() {
        let r = Relation::from_strs(&[("a", "c")]);
        let s = Relation::from_strs(&[("c", "b")]);
        assert_eq!(compose(&r, &s), Relation::from_strs(&[("a", "b")]));
        assert!(compose(&Relation::default(), &s).is_empty());
        assert!(compose(&r, &Relation::default()).is_empty());

        let r = Relation::from_strs(&[("a", "c"), ("a", "d")]);
        let s = Relation::from_strs(&[("c", "b"), ("d", "e")]);
        assert_eq!(compose(&r, &s), Relation::from_strs(&[("a", "b"), ("a", "e")]));
    }

    fn example_one_i() -> Csp {
        let mut p = Csp::new();
        p.add_variable("x", ["a", "b"]).unwrap();
        p.add_variable("y", ["c", "d"]).unwrap();
        p.add_constraint(Some("C1"), &["x", "y"], [["a", "c"], ["b", "d"]]).unwrap();
        p.add_constraint(Some("C2"), &["x", "y"], [["a", "d"]]).unwrap();
        p
    }

    #[test]
    fn project_constraint_examples() {
        let p = example_one_i();
        let c1 = p.constraint(0);
        assert_eq!(
            project_constraint(c1, 0, &[atoms(&["a", "b"]), atoms(&["c", "d"])]).unwrap(),
            atoms(&["a", "b"])
        );
        let c2 = p.constraint(1);
        assert_eq!(
            project_constraint(c2, 0, &[atoms(&["a", "b"]), atoms(&["d"])]).unwrap(),
            atoms(&["a"])
        );
        assert!(project_constraint(c1, 1, &[atoms(&[]), atoms(&["c", "d"])]).unwrap().is_empty());
        assert!(matches!(project_constraint(c1, 2, &[atoms(&["a"]), atoms(&["c"])]), Err(Error::Arity(_))));
    }

    #[test]
    fn constraint_validation() {
        let mut p = Csp::new();
        p.add_variable("x", ["a"]).unwrap();
        p.add_variable("y", ["b"]).unwrap();
        assert!(p.add_variable("x", ["a"]).is_err());
        assert!(matches!(p.add_constraint(None, &["y", "x"], [["b", "a"]]), Err(Error::Model(_))));
        assert!(matches!(p.add_constraint(None, &["x", "z"], [["a", "a"]]), Err(Error::Model(_))));
        assert!(matches!(p.add_constraint(None, &["x", "y"], [vec!["a"]]), Err(Error::Arity(_))));
        assert!(matches!(p.add_constraint(None, &["x", "y"], [["a", "q"]]), Err(Error::Domain(_))));
        p.add_constraint(None, &["x", "y"], [["a", "b"]]).unwrap();
        p.add_constraint(None, &["x", "y"], [["a", "b"]]).unwrap();
        assert_eq!(p.constraint(0).name(), "C_x_y");
        assert_eq!(p.constraint(1).name(), "C_x_y_2");
    }

    #[test]
    fn standardize_examples() {
        let mut p = Csp::new();
        p.add_variable("x", ["a"]).unwrap();
        p.add_variable("y", ["b"]).unwrap();
        let s = standardize(&p).unwrap();
        assert_eq!(s.constraints().len(), 1);
        assert_eq!(s.constraint(0).relation().unwrap(), Relation::from_strs(&[("a", "b")]));

        let mut p = Csp::new();
        p.add_variable("x", ["a", "b"]).unwrap();
        p.add_variable("y", ["c", "d"]).unwrap();
        p.add_constraint(None, &["x", "y"], [["a", "c"], ["b", "d"]]).unwrap();
        p.add_constraint(None, &["x", "y"], [["a", "c"]]).unwrap();
        let s = standardize(&p).unwrap();
        assert_eq!(s.constraints().len(), 1);
        assert_eq!(s.constraint(0).relation().unwrap(), Relation::from_strs(&[("a", "c")]));
        assert!(s.is_standardized());
        assert!(!p.is_standardized());

        let again = standardize(&s).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn standardize_rejects_non_binary() {
        let mut p = Csp::new();
        p.add_variable("x", ["a"]).unwrap();
        p.add_constraint(Some("U"), &["x"], [["a"]]).unwrap();
        let err = standardize(&p).unwrap_err();
        assert!(matches!(&err, Error::Arity(m) if m.contains('U')), "{err}");
    }

    #[test]
    fn is_solution_examples() {
        let mut p = Csp::new();
        p.add_variable("x", ["a", "b"]).unwrap();
        p.add_variable("y", ["c"]).unwrap();
        assert!(is_solution(&p, &assignment(&["b", "c"])).unwrap());
        assert!(matches!(is_solution(&p, &assignment(&["z", "c"])), Err(Error::Domain(_))));

        let mut q = Csp::new();
        q.add_variable("x", ["a", "b"]).unwrap();
        q.add_variable("y", ["b"]).unwrap();
        q.add_variable("z", ["c", "d"]).unwrap();
        q.add_constraint(Some("C1"), &["x", "y"], [["a", "b"]]).unwrap();
        q.add_constraint(Some("C2"), &["x", "z"], [["a", "c"], ["b", "d"]]).unwrap();
        assert!(is_solution(&q, &assignment(&["a", "b", "c"])).unwrap());
        assert!(!is_solution(&q, &assignment(&["a", "b", "d"])).unwrap());
        assert!(!is_solution(&q, &assignment(&["b", "b", "d"])).unwrap());
    }

    #[test]
    fn with_domains_restricts_constraints() {
        let p = example_one_i();
        let q = p.with_domains(vec![atoms(&["b"]), atoms(&["c", "d"])]).unwrap();
        assert_eq!(q.constraint(0).relation().unwrap(), Relation::from_strs(&[("b", "d")]));
        assert!(q.constraint(1).tuples().is_empty());
        assert!(p.with_domains(vec![atoms(&["q"]), atoms(&[])]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn relation() -> impl Strategy<Value = Relation> {
            proptest::collection::btree_set((0u8..3, 0u8..3), 0..=9).prop_map(|pairs| {
                pairs
                    .into_iter()
                    .map(|(a, b)| (atom(&a.to_string()), atom(&b.to_string())))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn compose_is_associative(r in relation(), s in relation(), t in relation()) {
                prop_assert_eq!(compose(&compose(&r, &s), &t), compose(&r, &compose(&s, &t)));
            }

            #[test]
            fn transpose_reverses_composition(r in relation(), s in relation()) {
                prop_assert_eq!(transpose(&compose(&r, &s)), compose(&transpose(&s), &transpose(&r)));
                prop_assert_eq!(transpose(&transpose(&r)), r);
            }

            #[test]
            fn compose_matches_brute_force(r in relation(), s in relation()) {
                let universe: Vec<Atom> = (0..3).map(|i| atom(&i.to_string())).collect();
                let mut expected = BTreeSet::new();
                for a in &universe {
                    for c in &universe {
                        for b in &universe {
                            if r.contains(a, c) && s.contains(c, b) {
                                expected.insert((a.clone(), b.clone()));
                            }
                        }
                    }
                }
                prop_assert_eq!(compose(&r, &s), Relation::new(expected));
            }
        }
    }
}

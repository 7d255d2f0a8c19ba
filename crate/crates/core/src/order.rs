//! Compound values over Cartesian products of finite power-set orderings.
//!
//! A [`CompoundValue`] is an `n`-tuple of finite sets. Each component lives
//! inside a fixed universe, which is also the least element of that
//! component: the orderings are reversed inclusion, so "going up" means
//! removing elements. A [`SchemedFunction`] reads and writes only the
//! components named by its [`Scheme`]; [`apply_extended`] lifts it to the
//! whole tuple (the canonic extension) and leaves every other component
//! untouched.
//!
//! Component indices are 0-based throughout the crate.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Bound satisfied by every component element type.
pub trait Element: Ord + Clone + fmt::Debug + Send + Sync + 'static {}

impl<T: Ord + Clone + fmt::Debug + Send + Sync + 'static> Element for T {}

/// A strictly increasing, nonempty sequence of component indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scheme(Vec<usize>);

impl Scheme {
    /// Builds a scheme on `n` components.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Arity("a scheme needs at least one index".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Arity(format!(
                "scheme index {bad} out of range for {n} components"
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Arity(format!(
                "scheme {indices:?} is not strictly increasing"
            )));
        }
        Ok(Scheme(indices))
    }

    /// The scheme `0, 1, ..., n-1`.
    pub fn full(n: usize) -> Result<Self> {
        Scheme::new((0..n).collect(), n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Position of component `i` inside the scheme.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    /// The indices of `0..n` not in this scheme (may be empty).
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.contains(*i)).collect()
    }

    /// Sorted union of two schemes.
    pub fn union(&self, other: &Scheme) -> Scheme {
        let joint: BTreeSet<usize> = self.0.iter().chain(&other.0).copied().collect();
        Scheme(joint.into_iter().collect())
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::Arity(format!(
                "scheme index {last} out of range for {n} components"
            ))),
            _ => Ok(()),
        }
    }
}

/// An `n`-tuple of finite sets, each a subset of its component universe.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CompoundValue<T: Element> {
    components: Vec<BTreeSet<T>>,
    universes: Arc<Vec<BTreeSet<T>>>,
}

impl<T: Element> CompoundValue<T> {
    /// The least element: every component equal to its universe.
    pub fn bottom(universes: Vec<BTreeSet<T>>) -> Self {
        CompoundValue {
            components: universes.clone(),
            universes: Arc::new(universes),
        }
    }

    /// A value with explicit components, checked against the universes.
    pub fn with_components(
        universes: Vec<BTreeSet<T>>,
        components: Vec<BTreeSet<T>>,
    ) -> Result<Self> {
        let bottom = CompoundValue::bottom(universes);
        bottom.replaced(components)
    }

    /// Same universes, new components.
    pub fn replaced(&self, components: Vec<BTreeSet<T>>) -> Result<Self> {
        if components.len() != self.universes.len() {
            return Err(Error::Arity(format!(
                "{} components given for {} universes",
                components.len(),
                self.universes.len()
            )));
        }
        for (i, (c, u)) in components.iter().zip(self.universes.iter()).enumerate() {
            if !c.is_subset(u) {
                return Err(Error::Contract(format!(
                    "component {i} is not a subset of its universe"
                )));
            }
        }
        Ok(CompoundValue {
            components,
            universes: Arc::clone(&self.universes),
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[BTreeSet<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &BTreeSet<T> {
        &self.components[i]
    }

    pub fn universes(&self) -> &[BTreeSet<T>] {
        &self.universes
    }

    pub fn into_components(self) -> Vec<BTreeSet<T>> {
        self.components
    }

    /// The bottom element with the same universes.
    pub fn to_bottom(&self) -> Self {
        CompoundValue {
            components: self.universes.as_ref().clone(),
            universes: Arc::clone(&self.universes),
        }
    }

    /// Componentwise `self ⊆ other`, i.e. `other ⊑ self` in the reversed
    /// inclusion order.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.is_subset(b))
    }

    /// True when some component is empty.
    pub fn has_empty_component(&self) -> bool {
        self.components.iter().any(BTreeSet::is_empty)
    }

    /// `d[s]`.
    pub fn project(&self, scheme: &Scheme) -> Result<Vec<BTreeSet<T>>> {
        scheme.check_arity(self.len())?;
        Ok(scheme
            .indices()
            .iter()
            .map(|&i| self.components[i].clone())
            .collect())
    }

    /// Writes `values` into the components selected by `scheme`.
    pub fn inject(&mut self, scheme: &Scheme, values: Vec<BTreeSet<T>>) -> Result<()> {
        scheme.check_arity(self.len())?;
        if values.len() != scheme.len() {
            return Err(Error::Arity(format!(
                "{} values for a scheme of length {}",
                values.len(),
                scheme.len()
            )));
        }
        for (&i, v) in scheme.indices().iter().zip(&values) {
            if !v.is_subset(&self.universes[i]) {
                return Err(Error::Contract(format!(
                    "injected component {i} is not a subset of its universe"
                )));
            }
        }
        for (&i, v) in scheme.indices().iter().zip(values) {
            self.components[i] = v;
        }
        Ok(())
    }
}

impl<T: Element> fmt::Debug for CompoundValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("CompoundValue").field(&self.components).finish()
    }
}

/// `d[s]` as a free function.
pub fn project<T: Element>(d: &CompoundValue<T>, s: &Scheme) -> Result<Vec<BTreeSet<T>>> {
    d.project(s)
}

/// The indices where `d` and `e` differ.
pub fn differing_components<T: Element>(
    d: &CompoundValue<T>,
    e: &CompoundValue<T>,
) -> Result<BTreeSet<usize>> {
    if d.len() != e.len() {
        return Err(Error::Arity(format!(
            "cannot compare values of arity {} and {}",
            d.len(),
            e.len()
        )));
    }
    Ok(d.components
        .iter()
        .zip(&e.components)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect())
}

/// The pure mapping carried by a [`SchemedFunction`]. It receives the
/// sub-tuple selected by the scheme and returns a sub-tuple of the same
/// arity.
pub type Transform<T> = Arc<dyn Fn(&[BTreeSet<T>]) -> Vec<BTreeSet<T>> + Send + Sync>;

/// A transformer on the components named by a scheme.
#[derive(Clone)]
pub struct SchemedFunction<T: Element> {
    label: String,
    scheme: Scheme,
    transform: Transform<T>,
    idempotent: bool,
}

impl<T: Element> SchemedFunction<T> {
    pub fn new<F>(label: impl Into<String>, scheme: Scheme, transform: F) -> Self
    where
        F: Fn(&[BTreeSet<T>]) -> Vec<BTreeSet<T>> + Send + Sync + 'static,
    {
        SchemedFunction {
            label: label.into(),
            scheme,
            transform: Arc::new(transform),
            idempotent: false,
        }
    }

    /// Declares the function idempotent. The engines trust this flag;
    /// [`crate::oracle::check_closure`] can confirm it on small universes.
    pub fn with_idempotent(mut self, idempotent: bool) -> Self {
        self.idempotent = idempotent;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn is_idempotent(&self) -> bool {
        self.idempotent
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.scheme.contains(i)
    }

    /// Runs the raw transform on a sub-tuple, checking arity and that each
    /// output set is contained in the corresponding input set.
    pub fn eval(&self, input: &[BTreeSet<T>]) -> Result<Vec<BTreeSet<T>>> {
        if input.len() != self.scheme.len() {
            return Err(Error::Arity(format!(
                "{}: expected {} inputs, got {}",
                self.label,
                self.scheme.len(),
                input.len()
            )));
        }
        let output = (self.transform)(input);
        if output.len() != input.len() {
            return Err(Error::Contract(format!(
                "{}: transform returned {} sets for {} inputs",
                self.label,
                output.len(),
                input.len()
            )));
        }
        if let Some(pos) = output
            .iter()
            .zip(input)
            .position(|(out, inp)| !out.is_subset(inp))
        {
            return Err(Error::Contract(format!(
                "{}: output at scheme position {pos} grew its input set",
                self.label
            )));
        }
        Ok(output)
    }

    /// The canonic extension `f⁺` applied to `d`.
    pub fn apply_extended(&self, d: &CompoundValue<T>) -> Result<CompoundValue<T>> {
        let output = self.eval(&d.project(&self.scheme)?)?;
        let mut e = d.clone();
        e.inject(&self.scheme, output)?;
        Ok(e)
    }
}

impl<T: Element> fmt::Debug for SchemedFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemedFunction")
            .field("label", &self.label)
            .field("scheme", &self.scheme)
            .field("idempotent", &self.idempotent)
            .finish()
    }
}

/// `f⁺(d)` as a free function.
pub fn apply_extended<T: Element>(
    f: &SchemedFunction<T>,
    d: &CompoundValue<T>,
) -> Result<CompoundValue<T>> {
    f.apply_extended(d)
}

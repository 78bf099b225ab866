//! Monotone set functions over items, with exact values.
//!
//! A [`Valuation`] is one of three concrete representations (additive weights,
//! an XOS clause list, or an explicit table). Everything that consumes values
//! works through the [`SetFunction`] trait, so derived views (marginal,
//! conjugate, restriction, projection through copies) compose freely.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::itemset::{ItemSet, MAX_ITEMS};
use crate::rational::Rational;

/// Explicit tables hold `2^m` entries; this caps `m`.
pub const MAX_EXPLICIT_ITEMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("item set {set} is not contained in the ground set of {items} items")]
    Domain { set: ItemSet, items: usize },
    #[error("malformed valuation: {0}")]
    Malformed(String),
    #[error("valuation is not monotone: v({smaller}) > v({larger})")]
    NotMonotone { smaller: ItemSet, larger: ItemSet },
    #[error("{what} needs at most {limit} items, got {items}")]
    TooLarge {
        what: &'static str,
        items: usize,
        limit: usize,
    },
}

/// A normalized set function over the ground set `{0, .., item_count()-1}`.
pub trait SetFunction: Sync {
    fn item_count(&self) -> usize;

    /// Value of `set`. Callers keep `set` inside the ground set; views document
    /// any narrower domain they need.
    fn value(&self, set: ItemSet) -> Rational;

    fn ground_set(&self) -> ItemSet {
        ItemSet::full(self.item_count())
    }
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn item_count(&self) -> usize {
        (**self).item_count()
    }

    fn value(&self, set: ItemSet) -> Rational {
        (**self).value(set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Additive { weights: Vec<Rational> },
    Xos { clauses: Vec<Vec<Rational>> },
    Explicit { items: usize, table: Vec<Rational> },
}

impl Valuation {
    pub fn additive(weights: Vec<Rational>) -> Result<Self, ValuationError> {
        if weights.len() > MAX_ITEMS {
            return Err(ValuationError::TooLarge {
                what: "additive valuation",
                items: weights.len(),
                limit: MAX_ITEMS,
            });
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(ValuationError::Malformed(format!("negative weight {w}")));
        }
        Ok(Valuation::Additive { weights })
    }

    /// Convenience constructor from integer weights.
    pub fn additive_ints(weights: &[i64]) -> Result<Self, ValuationError> {
        Self::additive(weights.iter().map(|&w| Rational::from(w)).collect())
    }

    pub fn xos(clauses: Vec<Vec<Rational>>) -> Result<Self, ValuationError> {
        let Some(first) = clauses.first() else {
            return Err(ValuationError::Malformed("XOS valuation without clauses".into()));
        };
        let m = first.len();
        if m > MAX_ITEMS {
            return Err(ValuationError::TooLarge {
                what: "XOS valuation",
                items: m,
                limit: MAX_ITEMS,
            });
        }
        for c in &clauses {
            if c.len() != m {
                return Err(ValuationError::Malformed(format!(
                    "XOS clauses disagree on item count ({} vs {m})",
                    c.len()
                )));
            }
            if let Some(w) = c.iter().find(|w| w.is_negative()) {
                return Err(ValuationError::Malformed(format!("negative clause weight {w}")));
            }
        }
        Ok(Valuation::Xos { clauses })
    }

    pub fn xos_ints(clauses: &[&[i64]]) -> Result<Self, ValuationError> {
        Self::xos(
            clauses
                .iter()
                .map(|c| c.iter().map(|&w| Rational::from(w)).collect())
                .collect(),
        )
    }

    /// Table indexed by subset code. Must be complete, normalized and monotone.
    pub fn explicit(items: usize, table: Vec<Rational>) -> Result<Self, ValuationError> {
        if items > MAX_EXPLICIT_ITEMS {
            return Err(ValuationError::TooLarge {
                what: "explicit valuation",
                items,
                limit: MAX_EXPLICIT_ITEMS,
            });
        }
        if table.len() != 1usize << items {
            return Err(ValuationError::Malformed(format!(
                "explicit table has {} entries, expected {}",
                table.len(),
                1usize << items
            )));
        }
        if !table[0].is_zero() {
            return Err(ValuationError::Malformed(format!(
                "value of the empty set is {}, expected 0",
                table[0]
            )));
        }
        let v = Valuation::Explicit { items, table };
        if let Some(w) = first_monotonicity_violation(&v, v.ground_set()) {
            return Err(ValuationError::NotMonotone {
                smaller: w.0,
                larger: w.1,
            });
        }
        Ok(v)
    }

    /// Builds an explicit table from `code -> value` entries; every code in
    /// `0..2^items` must be present.
    pub fn explicit_from_codes(
        items: usize,
        entries: &BTreeMap<u64, Rational>,
    ) -> Result<Self, ValuationError> {
        if items > MAX_EXPLICIT_ITEMS {
            return Err(ValuationError::TooLarge {
                what: "explicit valuation",
                items,
                limit: MAX_EXPLICIT_ITEMS,
            });
        }
        let size = 1u64 << items;
        if let Some((&code, _)) = entries.range(size..).next() {
            return Err(ValuationError::Malformed(format!(
                "subset code {code} outside ground set of {items} items"
            )));
        }
        let mut table = Vec::with_capacity(size as usize);
        for code in 0..size {
            match entries.get(&code) {
                Some(&v) => table.push(v),
                None => {
                    return Err(ValuationError::Malformed(format!(
                        "explicit table is missing subset code {code}"
                    )))
                }
            }
        }
        Self::explicit(items, table)
    }

    /// Tabulates any set function over its ground set.
    pub fn tabulate(f: &dyn SetFunction) -> Result<Self, ValuationError> {
        let m = f.item_count();
        if m > MAX_EXPLICIT_ITEMS {
            return Err(ValuationError::TooLarge {
                what: "explicit valuation",
                items: m,
                limit: MAX_EXPLICIT_ITEMS,
            });
        }
        let table = (0..1u64 << m).map(|c| f.value(ItemSet::from_bits(c))).collect();
        Self::explicit(m, table)
    }

    /// Checked evaluation: rejects sets outside the ground set.
    pub fn eval(&self, set: ItemSet) -> Result<Rational, ValuationError> {
        if !set.is_subset(self.ground_set()) {
            return Err(ValuationError::Domain {
                set,
                items: self.item_count(),
            });
        }
        Ok(self.value(set))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Valuation::Additive { .. } => "additive",
            Valuation::Xos { .. } => "xos",
            Valuation::Explicit { .. } => "explicit",
        }
    }
}

fn additive_sum(weights: &[Rational], set: ItemSet) -> Rational {
    set.iter().map(|i| weights[i]).sum()
}

impl SetFunction for Valuation {
    fn item_count(&self) -> usize {
        match self {
            Valuation::Additive { weights } => weights.len(),
            Valuation::Xos { clauses } => clauses[0].len(),
            Valuation::Explicit { items, .. } => *items,
        }
    }

    fn value(&self, set: ItemSet) -> Rational {
        debug_assert!(set.is_subset(self.ground_set()), "{set} outside ground set");
        match self {
            Valuation::Additive { weights } => additive_sum(weights, set),
            Valuation::Xos { clauses } => clauses
                .iter()
                .map(|c| additive_sum(c, set))
                .max()
                .unwrap_or(Rational::ZERO),
            Valuation::Explicit { table, .. } => table[set.bits() as usize],
        }
    }
}

/// Which derived function a [`ValuationView`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewKind {
    /// `T -> base(T ∪ U) - base(U)`
    Marginal(ItemSet),
    /// `T -> base(M) - base(M \ T)`, for `T ⊆ M`
    Conjugate(ItemSet),
    /// `T -> base(T)`, for `T ⊆ S`
    Restriction(ItemSet),
}

#[derive(Clone, Copy)]
pub struct ValuationView<'a> {
    base: &'a dyn SetFunction,
    kind: ViewKind,
}

impl<'a> ValuationView<'a> {
    pub fn new(base: &'a dyn SetFunction, kind: ViewKind) -> Self {
        ValuationView { base, kind }
    }

    pub fn kind(&self) -> ViewKind {
        self.kind
    }

    /// The sets this view is defined on.
    pub fn domain(&self) -> ItemSet {
        match self.kind {
            ViewKind::Marginal(_) => self.base.ground_set(),
            ViewKind::Conjugate(m) => m,
            ViewKind::Restriction(s) => s,
        }
    }

    pub fn eval(&self, set: ItemSet) -> Result<Rational, ValuationError> {
        if !set.is_subset(self.domain()) {
            return Err(ValuationError::Domain {
                set,
                items: self.item_count(),
            });
        }
        Ok(self.value(set))
    }
}

impl SetFunction for ValuationView<'_> {
    fn item_count(&self) -> usize {
        self.base.item_count()
    }

    fn value(&self, set: ItemSet) -> Rational {
        match self.kind {
            ViewKind::Marginal(u) => self.base.value(set.union(u)) - self.base.value(u),
            ViewKind::Conjugate(m) => {
                debug_assert!(set.is_subset(m));
                self.base.value(m) - self.base.value(m.difference(set))
            }
            ViewKind::Restriction(s) => {
                debug_assert!(set.is_subset(s));
                self.base.value(set)
            }
        }
    }
}

pub fn marginal(v: &dyn SetFunction, held: ItemSet) -> ValuationView<'_> {
    ValuationView::new(v, ViewKind::Marginal(held))
}

pub fn conjugate(v: &dyn SetFunction, items: ItemSet) -> ValuationView<'_> {
    ValuationView::new(v, ViewKind::Conjugate(items))
}

pub fn restriction(v: &dyn SetFunction, items: ItemSet) -> ValuationView<'_> {
    ValuationView::new(v, ViewKind::Restriction(items))
}

/// Evaluates a base function through an index map: local item `k` stands for
/// base item `sources[k]`, or for a worthless item when `None`. Duplicate
/// sources collapse, so holding two copies of one item counts it once.
#[derive(Clone)]
pub struct Projected<'a> {
    base: &'a dyn SetFunction,
    sources: Vec<Option<usize>>,
}

impl<'a> Projected<'a> {
    pub fn new(base: &'a dyn SetFunction, sources: Vec<Option<usize>>) -> Self {
        assert!(sources.len() <= MAX_ITEMS);
        Projected { base, sources }
    }

    pub fn project(&self, set: ItemSet) -> ItemSet {
        set.iter().filter_map(|k| self.sources[k]).collect()
    }
}

impl SetFunction for Projected<'_> {
    fn item_count(&self) -> usize {
        self.sources.len()
    }

    fn value(&self, set: ItemSet) -> Rational {
        self.base.value(self.project(set))
    }
}

/// `max_{e ∈ S} v({e})`, zero for the empty set.
pub fn max_item_value(v: &dyn SetFunction, set: ItemSet) -> Rational {
    set.iter()
        .map(|e| v.value(ItemSet::singleton(e)))
        .max()
        .unwrap_or(Rational::ZERO)
}

/// `max_{e ∈ M} [v(M) - v(M \ {e})]`, zero for the empty set.
pub fn marginal_delta(v: &dyn SetFunction, items: ItemSet) -> Rational {
    let whole = v.value(items);
    items
        .iter()
        .map(|e| whole - v.value(items.without(e)))
        .max()
        .unwrap_or(Rational::ZERO)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxiomClass {
    Monotone,
    /// Monotone and subadditive.
    Subadditive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Monotone,
    Subadditive,
}

/// A witness pair: `v(s) > v(t)` with `s ⊆ t` for monotonicity, or
/// `v(s) + v(t) < v(s ∪ t)` for subadditivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub s: ItemSet,
    pub t: ItemSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomReport {
    pub class: AxiomClass,
    pub violation: Option<Violation>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the requested class. Additive and XOS valuations belong to both
/// classes by construction; explicit tables are checked exhaustively.
pub fn check_axioms(v: &Valuation, class: AxiomClass) -> Result<AxiomReport, ValuationError> {
    match v {
        Valuation::Additive { .. } | Valuation::Xos { .. } => Ok(AxiomReport {
            class,
            violation: None,
        }),
        Valuation::Explicit { .. } => check_axioms_exhaustive(v, v.ground_set(), class),
    }
}

/// Exhaustive check over all subsets of `ground`.
///
/// Monotonicity is tested on covering pairs `(S, S ∪ {e})`. Given
/// monotonicity, subadditivity only needs disjoint pairs, since
/// `v(S) + v(T) >= v(S) + v(T \ S) >= v(S ∪ T)`.
pub fn check_axioms_exhaustive(
    v: &dyn SetFunction,
    ground: ItemSet,
    class: AxiomClass,
) -> Result<AxiomReport, ValuationError> {
    if ground.len() > MAX_EXPLICIT_ITEMS {
        return Err(ValuationError::TooLarge {
            what: "exhaustive axiom check",
            items: ground.len(),
            limit: MAX_EXPLICIT_ITEMS,
        });
    }
    if let Some((s, t)) = first_monotonicity_violation(v, ground) {
        return Ok(AxiomReport {
            class,
            violation: Some(Violation {
                axiom: Axiom::Monotone,
                s,
                t,
            }),
        });
    }
    if class == AxiomClass::Subadditive {
        if let Some((s, t)) = first_subadditivity_violation(v, ground) {
            return Ok(AxiomReport {
                class,
                violation: Some(Violation {
                    axiom: Axiom::Subadditive,
                    s,
                    t,
                }),
            });
        }
    }
    Ok(AxiomReport {
        class,
        violation: None,
    })
}

fn first_monotonicity_violation(v: &dyn SetFunction, ground: ItemSet) -> Option<(ItemSet, ItemSet)> {
    for s in ground.subsets() {
        let vs = v.value(s);
        for e in ground.difference(s) {
            let t = s.with(e);
            if vs > v.value(t) {
                return Some((s, t));
            }
        }
    }
    None
}

fn first_subadditivity_violation(
    v: &dyn SetFunction,
    ground: ItemSet,
) -> Option<(ItemSet, ItemSet)> {
    for s in ground.subsets().skip(1) {
        let vs = v.value(s);
        for t in ground.difference(s).subsets() {
            if t <= s {
                continue;
            }
            if vs + v.value(t) < v.value(s.union(t)) {
                return Some((s, t));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    /// max(|T ∩ {e1,e2}|, |T ∩ {e3,e4}|), zero-indexed.
    fn pair_max() -> Valuation {
        Valuation::xos_ints(&[&[1, 1, 0, 0], &[0, 0, 1, 1]]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        assert_eq!(add.eval(set(&[0, 1])).unwrap(), r(5));
        assert_eq!(pair_max().eval(set(&[1, 3])).unwrap(), r(1));

        let mut table = vec![Rational::ZERO; 16];
        for (code, slot) in table.iter_mut().enumerate().skip(1) {
            *slot = r(code.count_ones().min(3) as i64);
        }
        table[0b1010] = r(5);
        for code in 0..16usize {
            if code & 0b1010 == 0b1010 {
                table[code] = table[code].max(r(5));
            }
        }
        let explicit = Valuation::explicit(4, table).unwrap();
        assert_eq!(explicit.eval(set(&[1, 3])).unwrap(), r(5));
    }

    #[test]
    fn eval_rejects_outside_ground_set() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        assert!(matches!(
            add.eval(set(&[3])),
            Err(ValuationError::Domain { .. })
        ));
    }

    #[test]
    fn explicit_requires_complete_table() {
        let mut entries = BTreeMap::new();
        entries.insert(0, r(0));
        entries.insert(1, r(1));
        entries.insert(3, r(1));
        let err = Valuation::explicit_from_codes(2, &entries).unwrap_err();
        assert!(matches!(err, ValuationError::Malformed(ref m) if m.contains("code 2")));
        entries.insert(2, r(1));
        assert!(Valuation::explicit_from_codes(2, &entries).is_ok());
        entries.insert(4, r(1));
        assert!(Valuation::explicit_from_codes(2, &entries).is_err());
    }

    #[test]
    fn explicit_rejects_non_normalized_and_non_monotone() {
        assert!(Valuation::explicit(1, vec![r(1), r(2)]).is_err());
        let err = Valuation::explicit(2, vec![r(0), r(2), r(1), r(1)]).unwrap_err();
        assert_eq!(
            err,
            ValuationError::NotMonotone {
                smaller: set(&[0]),
                larger: set(&[0, 1])
            }
        );
    }

    #[test]
    fn check_axioms_examples() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        assert!(check_axioms(&add, AxiomClass::Subadditive).unwrap().pass());
        assert!(check_axioms(&pair_max(), AxiomClass::Subadditive).unwrap().pass());

        let super_add = Valuation::explicit(2, vec![r(0), r(1), r(1), r(3)]).unwrap();
        assert!(check_axioms(&super_add, AxiomClass::Monotone).unwrap().pass());
        let report = check_axioms(&super_add, AxiomClass::Subadditive).unwrap();
        assert_eq!(
            report.violation,
            Some(Violation {
                axiom: Axiom::Subadditive,
                s: set(&[0]),
                t: set(&[1])
            })
        );
    }

    #[test]
    fn max_item_value_examples() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        assert_eq!(max_item_value(&add, add.ground_set()), r(3));
        assert_eq!(max_item_value(&pair_max(), ItemSet::full(4)), r(1));
        assert_eq!(max_item_value(&add, ItemSet::EMPTY), r(0));
    }

    #[test]
    fn marginal_delta_examples() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        assert_eq!(marginal_delta(&add, add.ground_set()), r(3));
        assert_eq!(marginal_delta(&pair_max(), ItemSet::full(4)), r(0));
        let single = Valuation::additive_ints(&[7]).unwrap();
        assert_eq!(marginal_delta(&single, single.ground_set()), r(7));
    }

    #[test]
    fn conjugate_examples() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        let m = add.ground_set();
        let c = conjugate(&add, m);
        for t in m.subsets() {
            assert_eq!(c.value(t), add.value(t));
        }
        let pm = pair_max();
        let c = conjugate(&pm, ItemSet::full(4));
        assert_eq!(c.eval(set(&[0])).unwrap(), r(0));
        assert_eq!(c.eval(ItemSet::full(4)).unwrap(), r(2));
    }

    #[test]
    fn marginal_examples() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        let same = marginal(&add, ItemSet::EMPTY);
        for t in add.ground_set().subsets() {
            assert_eq!(same.value(t), add.value(t));
        }
        assert_eq!(marginal(&add, set(&[0])).value(set(&[1])), r(2));
        let pm = pair_max();
        assert_eq!(marginal(&pm, set(&[0])).value(set(&[1])), r(1));
    }

    #[test]
    fn restriction_domain() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        let res = restriction(&add, set(&[0, 2]));
        assert_eq!(res.eval(set(&[2])).unwrap(), r(1));
        assert!(res.eval(set(&[1])).is_err());
    }

    #[test]
    fn projected_collapses_duplicates() {
        let add = Valuation::additive_ints(&[3, 2, 1]).unwrap();
        let p = Projected::new(&add, vec![Some(0), Some(0), Some(2), None]);
        assert_eq!(p.value(set(&[0, 1])), r(3));
        assert_eq!(p.value(set(&[0, 1, 2, 3])), r(4));
    }
}

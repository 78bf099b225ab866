//! Unoptimized reference computations used to cross-check the real ones.

use thiserror::Error;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::picking_game::{PickSequence, Player};
use crate::rational::Rational;
use crate::valuations::SetFunction;

pub const MAX_ORACLE_GAME_ITEMS: usize = 8;
pub const MAX_ORACLE_LEAVES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} is too large for the oracle ({size} > {limit})")]
    TooLarge {
        what: &'static str,
        size: u64,
        limit: u64,
    },
    #[error("sequence length {sequence} differs from item count {items}")]
    LengthMismatch { sequence: usize, items: usize },
    #[error("expected one bound per agent ({agents}), got {bounds}")]
    BoundCount { agents: usize, bounds: usize },
}

/// Plain minimax over the whole game tree, no memoization, no pruning.
pub fn oracle_omega(
    sequence: &PickSequence,
    items: ItemSet,
    v: &dyn SetFunction,
) -> Result<Rational, OracleError> {
    if items.len() > MAX_ORACLE_GAME_ITEMS {
        return Err(OracleError::TooLarge {
            what: "game",
            size: items.len() as u64,
            limit: MAX_ORACLE_GAME_ITEMS as u64,
        });
    }
    if sequence.len() != items.len() {
        return Err(OracleError::LengthMismatch {
            sequence: sequence.len(),
            items: items.len(),
        });
    }
    fn go(turns: &[Player], held: ItemSet, remaining: ItemSet, v: &dyn SetFunction) -> Rational {
        let Some((&mover, rest)) = turns.split_first() else {
            return v.value(held);
        };
        let outcomes = remaining.iter().map(|e| {
            let next_held = if mover == Player::P { held.with(e) } else { held };
            go(rest, next_held, remaining.without(e), v)
        });
        match mover {
            Player::P => outcomes.max(),
            Player::Q => outcomes.min(),
        }
        .expect("remaining matches the turns left")
    }
    Ok(go(sequence.turns(), ItemSet::EMPTY, items, v))
}

/// MMS by trying every labeling of items with `n` bundle labels.
pub fn oracle_mms(items: ItemSet, v: &dyn SetFunction, n: usize) -> Result<Rational, OracleError> {
    assert!(n >= 1, "at least one part");
    let m = items.len() as u32;
    let leaves = (n as u64).checked_pow(m).unwrap_or(u64::MAX);
    if leaves > MAX_ORACLE_LEAVES {
        return Err(OracleError::TooLarge {
            what: "labeling space",
            size: leaves,
            limit: MAX_ORACLE_LEAVES,
        });
    }
    let order: Vec<usize> = items.iter().collect();
    let mut best: Option<Rational> = None;
    for code in 0..leaves {
        let mut parts = vec![ItemSet::EMPTY; n];
        let mut c = code;
        for &e in &order {
            parts[(c % n as u64) as usize].insert(e);
            c /= n as u64;
        }
        let worst = parts.iter().map(|&p| v.value(p)).min().expect("n >= 1");
        best = Some(best.map_or(worst, |b| b.max(worst)));
    }
    Ok(best.expect("at least one labeling"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestAllocation {
    /// `max over allocations of min_i (v_i(A'_i) - bound_i)`
    pub slack: Rational,
    pub allocation: MultiAllocation,
}

/// Enumerates every allocation with `A'_i ⊆ A_i` that hands each held item
/// to one of its holders and maximizes the smallest `v_i(A'_i) - bounds[i]`.
pub fn oracle_best_allocation(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    bounds: &[Rational],
) -> Result<BestAllocation, OracleError> {
    let n = alloc.agent_count();
    if bounds.len() != n || valuations.len() != n {
        return Err(OracleError::BoundCount {
            agents: n,
            bounds: bounds.len().min(valuations.len()),
        });
    }
    let space = (n as u64).checked_pow(alloc.item_count() as u32).unwrap_or(u64::MAX);
    if space > MAX_ORACLE_LEAVES {
        return Err(OracleError::TooLarge {
            what: "allocation space",
            size: space,
            limit: MAX_ORACLE_LEAVES,
        });
    }
    let held: Vec<(usize, Vec<usize>)> = (0..alloc.item_count())
        .map(|e| (e, alloc.holders(e)))
        .filter(|(_, h)| !h.is_empty())
        .collect();
    let mut bundles = vec![ItemSet::EMPTY; n];
    let mut best: Option<(Rational, Vec<ItemSet>)> = None;
    fn go(
        k: usize,
        held: &[(usize, Vec<usize>)],
        valuations: &[&dyn SetFunction],
        bounds: &[Rational],
        bundles: &mut Vec<ItemSet>,
        best: &mut Option<(Rational, Vec<ItemSet>)>,
    ) {
        if k == held.len() {
            let slack = (0..bundles.len())
                .map(|i| valuations[i].value(bundles[i]) - bounds[i])
                .min()
                .unwrap_or(Rational::ZERO);
            if best.as_ref().map_or(true, |(b, _)| slack > *b) {
                *best = Some((slack, bundles.clone()));
            }
            return;
        }
        let (item, holders) = &held[k];
        for &h in holders {
            bundles[h].insert(*item);
            go(k + 1, held, valuations, bounds, bundles, best);
            bundles[h].remove(*item);
        }
    }
    go(0, &held, valuations, bounds, &mut bundles, &mut best);
    let (slack, bundles) = best.expect("at least one allocation");
    Ok(BestAllocation {
        slack,
        allocation: MultiAllocation::new(alloc.item_count(), bundles).expect("bundles in range"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuations::Valuation;

    #[test]
    fn omega_single_item() {
        let v = Valuation::additive_ints(&[5]).unwrap();
        let seq: PickSequence = "p".parse().unwrap();
        assert_eq!(oracle_omega(&seq, ItemSet::full(1), &v).unwrap(), Rational::from(5));
        let seq: PickSequence = "q".parse().unwrap();
        assert_eq!(oracle_omega(&seq, ItemSet::full(1), &v).unwrap(), Rational::ZERO);
    }

    #[test]
    fn mms_oracle_small() {
        let v = Valuation::additive_ints(&[1, 1, 1]).unwrap();
        assert_eq!(oracle_mms(ItemSet::full(3), &v, 2).unwrap(), Rational::ONE);
        assert_eq!(oracle_mms(ItemSet::full(3), &v, 4).unwrap(), Rational::ZERO);
    }

    #[test]
    fn best_allocation_tight_and_width_one() {
        let unit = Valuation::additive_ints(&[1, 1]).unwrap();
        let vals: Vec<&dyn SetFunction> = vec![&unit; 3];
        let shared = MultiAllocation::new(2, vec![ItemSet::full(2); 3]).unwrap();
        let best = oracle_best_allocation(&shared, &vals, &[Rational::ZERO; 3]).unwrap();
        assert_eq!(best.slack, Rational::ZERO);

        let own = MultiAllocation::new(2, vec![ItemSet::singleton(0), ItemSet::singleton(1)])
            .unwrap();
        let vals: Vec<&dyn SetFunction> = vec![&unit; 2];
        let best = oracle_best_allocation(&own, &vals, &[Rational::ZERO; 2]).unwrap();
        assert_eq!(best.allocation, own);
        assert_eq!(best.slack, Rational::ONE);
    }
}

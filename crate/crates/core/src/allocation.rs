use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::itemset::{ItemSet, MAX_ITEMS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("bundle of agent {agent} ({bundle}) is outside the ground set of {items} items")]
    OutsideGround {
        agent: usize,
        bundle: ItemSet,
        items: usize,
    },
    #[error("{items} items exceed the limit of {MAX_ITEMS}")]
    TooManyItems { items: usize },
}

/// Per-agent bundles over items `0..items`, possibly overlapping.
///
/// The width is the largest number of agents holding one item. An allocation
/// in the strict sense is a multi-allocation of width at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiAllocation {
    items: usize,
    bundles: Vec<ItemSet>,
}

impl MultiAllocation {
    pub fn new(items: usize, bundles: Vec<ItemSet>) -> Result<Self, AllocationError> {
        if items > MAX_ITEMS {
            return Err(AllocationError::TooManyItems { items });
        }
        let ground = ItemSet::full(items);
        for (agent, &bundle) in bundles.iter().enumerate() {
            if !bundle.is_subset(ground) {
                return Err(AllocationError::OutsideGround {
                    agent,
                    bundle,
                    items,
                });
            }
        }
        Ok(MultiAllocation { items, bundles })
    }

    pub fn empty(items: usize, agents: usize) -> Self {
        MultiAllocation {
            items,
            bundles: vec![ItemSet::EMPTY; agents],
        }
    }

    pub fn item_count(&self) -> usize {
        self.items
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> ItemSet {
        self.bundles[agent]
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle_mut(&mut self, agent: usize) -> &mut ItemSet {
        &mut self.bundles[agent]
    }

    /// Agents holding `item`, in increasing order.
    pub fn holders(&self, item: usize) -> Vec<usize> {
        (0..self.bundles.len())
            .filter(|&a| self.bundles[a].contains(item))
            .collect()
    }

    pub fn holder_count(&self, item: usize) -> usize {
        self.bundles.iter().filter(|b| b.contains(item)).count()
    }

    pub fn width(&self) -> usize {
        (0..self.items)
            .map(|e| self.holder_count(e))
            .max()
            .unwrap_or(0)
    }

    pub fn is_allocation(&self) -> bool {
        self.width() <= 1
    }

    /// Items held by at least one agent.
    pub fn support(&self) -> ItemSet {
        self.bundles
            .iter()
            .fold(ItemSet::EMPTY, |acc, &b| acc.union(b))
    }

    /// `true` if every bundle here is contained in the matching bundle of `outer`.
    pub fn is_refinement_of(&self, outer: &MultiAllocation) -> bool {
        self.bundles.len() == outer.bundles.len()
            && self
                .bundles
                .iter()
                .zip(&outer.bundles)
                .all(|(inner, outer)| inner.is_subset(*outer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_and_holders() {
        let a = MultiAllocation::new(
            3,
            vec![
                ItemSet::from_bits(0b011),
                ItemSet::from_bits(0b110),
                ItemSet::from_bits(0b010),
            ],
        )
        .unwrap();
        assert_eq!(a.width(), 3);
        assert_eq!(a.holders(1), vec![0, 1, 2]);
        assert_eq!(a.holder_count(0), 1);
        assert!(!a.is_allocation());
        assert_eq!(a.support(), ItemSet::full(3));
    }

    #[test]
    fn rejects_items_outside_ground() {
        assert!(MultiAllocation::new(2, vec![ItemSet::from_bits(0b100)]).is_err());
    }

    #[test]
    fn refinement() {
        let outer = MultiAllocation::new(2, vec![ItemSet::full(2), ItemSet::full(2)]).unwrap();
        let inner =
            MultiAllocation::new(2, vec![ItemSet::singleton(0), ItemSet::singleton(1)]).unwrap();
        assert!(inner.is_refinement_of(&outer));
        assert!(!outer.is_refinement_of(&inner));
        assert!(inner.is_allocation());
    }
}

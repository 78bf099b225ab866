//! Search for width-3 instances where no allocation inside the bundles gives
//! every agent `v_i(A_i)/3 - (2/3)·δ_i`. The transform itself only promises
//! the weaker bound with `d̂ = 4`; a hit here would show the exact-3 bound
//! cannot hold. No claim is made either way.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::rational::Rational;
use crate::reduction::{width_bound, transform};
use crate::valuations::{max_item_value, SetFunction, Valuation};

use super::generate::{random_multi_allocation, random_valuation, trial_rng, Family};
use super::instance::InstanceFile;
use super::oracle::oracle_best_allocation;

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    pub budget: usize,
    pub max_agents: usize,
    pub max_items: usize,
    pub family: Family,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            budget: 1000,
            max_agents: 4,
            max_items: 5,
            family: Family::Xos,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub trial: u64,
    /// Best achievable `min_i (v_i(A'_i) - bound_i)`, negative for a hit.
    pub best_slack: Rational,
    pub instance: InstanceFile,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub seed: u64,
    pub trials: usize,
    /// Smallest best-achievable slack seen over all trials.
    pub tightest_slack: Option<Rational>,
    /// Smallest slack the transform itself achieved against the exact-3 bounds.
    pub transform_worst_slack: Option<Rational>,
    pub findings: Vec<Finding>,
}

/// Exact-3 bounds `v_i(A_i)/3 - (2/3)·δ_i` for every agent.
pub fn exact_three_bounds(alloc: &MultiAllocation, valuations: &[&dyn SetFunction]) -> Vec<Rational> {
    (0..alloc.agent_count())
        .map(|i| {
            let bundle = alloc.bundle(i);
            let v = valuations[i];
            width_bound(v.value(bundle), max_item_value(v, bundle), 3)
        })
        .collect()
}

/// Slack of the best allocation, and of the transform's allocation, against
/// the exact-3 bounds.
pub fn exact_three_slack(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
) -> (Rational, Rational) {
    let bounds = exact_three_bounds(alloc, valuations);
    let best = oracle_best_allocation(alloc, valuations, &bounds)
        .expect("search sizes fit the oracle")
        .slack;
    let out = transform(alloc, valuations, 3).expect("width at most 3");
    let achieved = (0..alloc.agent_count())
        .map(|i| valuations[i].value(out.allocation.bundle(i)) - bounds[i])
        .min()
        .unwrap_or(Rational::ZERO);
    (best, achieved)
}

pub fn search_d3(config: SearchConfig) -> SearchReport {
    let results: Vec<(u64, Rational, Rational, InstanceFile)> = (0..config.budget as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, t);
            let n = rng.gen_range(1..=config.max_agents.max(1));
            let m = rng.gen_range(1..=config.max_items.max(1));
            let alloc = random_multi_allocation(&mut rng, n, m, 3);
            let vals: Vec<Valuation> = (0..n)
                .map(|_| random_valuation(&mut rng, config.family, m).expect("family supports m"))
                .collect();
            let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
            let (best, achieved) = exact_three_slack(&alloc, &refs);
            let instance = InstanceFile::new(m, &vals).with_multi_allocation(&alloc, 3);
            (t, best, achieved, instance)
        })
        .collect();
    let tightest_slack = results.iter().map(|r| r.1).min();
    let transform_worst_slack = results.iter().map(|r| r.2).min();
    let findings = results
        .into_iter()
        .filter(|r| r.1 < Rational::ZERO)
        .map(|(trial, best_slack, _, instance)| Finding {
            trial,
            best_slack,
            instance,
        })
        .collect();
    SearchReport {
        seed: config.seed,
        trials: config.budget,
        tightest_slack,
        transform_worst_slack,
        findings,
    }
}

/// The all-shared instance: `agents` agents each holding all `items` unit items.
pub fn all_shared_unit(agents: usize, items: usize) -> (MultiAllocation, Valuation) {
    let alloc = MultiAllocation::new(items, vec![ItemSet::full(items); agents])
        .expect("items within range");
    let v = Valuation::additive(vec![Rational::ONE; items]).expect("unit weights");
    (alloc, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_budget_is_empty() {
        let report = search_d3(SearchConfig {
            budget: 0,
            ..SearchConfig::default()
        });
        assert!(report.findings.is_empty());
        assert_eq!(report.tightest_slack, None);
    }

    #[test]
    fn all_shared_three_agents_two_items_is_tight() {
        let (alloc, v) = all_shared_unit(3, 2);
        let refs: Vec<&dyn SetFunction> = vec![&v; 3];
        assert_eq!(exact_three_bounds(&alloc, &refs), vec![Rational::ZERO; 3]);
        let (best, achieved) = exact_three_slack(&alloc, &refs);
        assert_eq!(best, Rational::ZERO);
        assert_eq!(achieved, Rational::ZERO);
    }
}

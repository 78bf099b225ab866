//! Maximin shares, the peel-then-transform pipeline, and the arithmetic of
//! which guarantee each population size reaches.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::rational::Rational;
use crate::reduction::{round_up_pow2, transform_with, HalvingOptions, ReductionError, TransformReport};
use crate::valuations::{max_item_value, SetFunction};

/// Size limit for general `n` (restricted-growth enumeration).
pub const MAX_MMS_ITEMS: usize = 12;
/// Size limit for `n = 2` (subset enumeration).
pub const MAX_MMS2_ITEMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MmsError {
    #[error("the number of parts must be at least 1")]
    ZeroParts,
    #[error("{items} items with {parts} parts exceed the enumeration limit of {limit} items")]
    TooLarge {
        items: usize,
        parts: usize,
        limit: usize,
    },
    #[error("removal needs at least two agents")]
    SingleAgent,
    #[error("agent {agent} out of range for {agents} agents")]
    AgentOutOfRange { agent: usize, agents: usize },
    #[error("item {item} is not among the items {items}")]
    ItemOutOfRange { item: usize, items: ItemSet },
}

/// `MMS(items, v, n)`: the best over partitions of `items` into `n` possibly
/// empty bundles of the smallest bundle value. `v` must be monotone.
pub fn mms(items: ItemSet, v: &dyn SetFunction, n: usize) -> Result<Rational, MmsError> {
    mms_with_partition(items, v, n).map(|(value, _)| value)
}

/// Like [`mms`], also returning an optimal partition (`n` bundles).
pub fn mms_with_partition(
    items: ItemSet,
    v: &dyn SetFunction,
    n: usize,
) -> Result<(Rational, Vec<ItemSet>), MmsError> {
    let m = items.len();
    if n == 0 {
        return Err(MmsError::ZeroParts);
    }
    if n == 1 {
        return Ok((v.value(items), vec![items]));
    }
    if n > m {
        let mut parts: Vec<ItemSet> = items.iter().map(ItemSet::singleton).collect();
        parts.resize(n, ItemSet::EMPTY);
        return Ok((v.value(ItemSet::EMPTY), parts));
    }
    if n == 2 {
        if m > MAX_MMS2_ITEMS {
            return Err(MmsError::TooLarge {
                items: m,
                parts: n,
                limit: MAX_MMS2_ITEMS,
            });
        }
        return Ok(mms_two(items, v));
    }
    if m > MAX_MMS_ITEMS {
        return Err(MmsError::TooLarge {
            items: m,
            parts: n,
            limit: MAX_MMS_ITEMS,
        });
    }
    let order: Vec<usize> = items.iter().collect();
    let mut search = PartitionSearch {
        v,
        order: &order,
        parts: n,
        blocks: Vec::with_capacity(n),
        best: None,
    };
    search.run(0, items);
    let (value, mut parts) = search.best.expect("some partition exists");
    parts.resize(n, ItemSet::EMPTY);
    Ok((value, parts))
}

/// Fixes the first item in the first bundle and enumerates the rest.
fn mms_two(items: ItemSet, v: &dyn SetFunction) -> (Rational, Vec<ItemSet>) {
    let first = items.first().expect("n <= m, so items is nonempty");
    let rest = items.without(first);
    let mut best: Option<(Rational, ItemSet)> = None;
    for s in rest.subsets() {
        let a = s.with(first);
        let b = items.difference(a);
        let value = v.value(a).min(v.value(b));
        if best.map_or(true, |(bv, _)| value > bv) {
            best = Some((value, a));
        }
    }
    let (value, a) = best.expect("at least one split");
    (value, vec![a, items.difference(a)])
}

struct PartitionSearch<'a> {
    v: &'a dyn SetFunction,
    order: &'a [usize],
    parts: usize,
    blocks: Vec<ItemSet>,
    best: Option<(Rational, Vec<ItemSet>)>,
}

impl PartitionSearch<'_> {
    /// Restricted-growth assignment of `order[k..]`; `rest` holds those items.
    fn run(&mut self, k: usize, rest: ItemSet) {
        if let Some((best, _)) = &self.best {
            // Every final bundle lies inside its current content plus `rest`.
            let mut bound = self
                .blocks
                .iter()
                .map(|b| self.v.value(b.union(rest)))
                .min();
            if self.blocks.len() < self.parts {
                let open = self.v.value(rest);
                bound = Some(bound.map_or(open, |b| b.min(open)));
            }
            if bound.is_some_and(|b| b <= *best) {
                return;
            }
        }
        if k == self.order.len() {
            let empty = self.v.value(ItemSet::EMPTY);
            let mut value = self.blocks.iter().map(|&b| self.v.value(b)).min().unwrap_or(empty);
            if self.blocks.len() < self.parts {
                value = value.min(empty);
            }
            if self.best.as_ref().map_or(true, |(b, _)| value > *b) {
                self.best = Some((value, self.blocks.clone()));
            }
            return;
        }
        let item = self.order[k];
        let rest = rest.without(item);
        for j in 0..self.blocks.len() {
            self.blocks[j].insert(item);
            self.run(k + 1, rest);
            self.blocks[j].remove(item);
        }
        if self.blocks.len() < self.parts {
            self.blocks.push(ItemSet::singleton(item));
            self.run(k + 1, rest);
            self.blocks.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalEntry {
    pub agent: usize,
    /// `MMS(items, v_j, n)`
    pub before: Rational,
    /// `MMS(items \ {item}, v_j, n - 1)`
    pub after: Rational,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub removed_agent: usize,
    pub removed_item: usize,
    pub survivors: Vec<RemovalEntry>,
}

impl RemovalReport {
    pub fn all_monotone(&self) -> bool {
        self.survivors.iter().all(|e| e.monotone)
    }
}

/// Compares every other agent's MMS before and after removing `agent`
/// together with `item`.
pub fn mms_removal_monotone(
    items: ItemSet,
    valuations: &[&dyn SetFunction],
    agent: usize,
    item: usize,
) -> Result<RemovalReport, MmsError> {
    let n = valuations.len();
    if n < 2 {
        return Err(MmsError::SingleAgent);
    }
    if agent >= n {
        return Err(MmsError::AgentOutOfRange { agent, agents: n });
    }
    if !items.contains(item) {
        return Err(MmsError::ItemOutOfRange { item, items });
    }
    let smaller = items.without(item);
    let survivors = (0..n)
        .filter(|&j| j != agent)
        .map(|j| {
            let before = mms(items, valuations[j], n)?;
            let after = mms(smaller, valuations[j], n - 1)?;
            Ok(RemovalEntry {
                agent: j,
                before,
                after,
                monotone: after >= before,
            })
        })
        .collect::<Result<_, MmsError>>()?;
    Ok(RemovalReport {
        removed_agent: agent,
        removed_item: item,
        survivors,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("rho must be positive")]
    InvalidRho,
    #[error("d must be a positive integer")]
    InvalidDegree,
    #[error(transparent)]
    Mms(#[from] MmsError),
    #[error("provider found no qualifying multi-allocation of the surviving instance")]
    NotFound,
    #[error("provider output is invalid: {0}")]
    InvalidProvision(String),
    #[error("provider gives agent {agent} value {value}, below the required {required}")]
    Insufficient {
        agent: usize,
        value: Rational,
        required: Rational,
    },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// What is left after peeling: the surviving agents (original indices) and
/// the items nobody has taken yet.
pub struct SurvivingInstance<'a> {
    pub item_count: usize,
    pub agents: Vec<usize>,
    pub items: ItemSet,
    pub valuations: Vec<&'a dyn SetFunction>,
}

/// Source of a ρ-MMS d-multi-allocation for the surviving instance.
///
/// The returned multi-allocation has one bundle per surviving agent (in the
/// order of `instance.agents`) over the original item indices, inside
/// `instance.items`. `None` means no qualifying multi-allocation was found.
pub trait MultiAllocationProvider {
    fn provide(
        &self,
        instance: &SurvivingInstance<'_>,
        rho: Rational,
        d: usize,
    ) -> Result<Option<MultiAllocation>, PipelineError>;
}

/// Exhaustive search; see [`brute_multi_provider`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteProvider;

impl MultiAllocationProvider for BruteProvider {
    fn provide(
        &self,
        instance: &SurvivingInstance<'_>,
        rho: Rational,
        d: usize,
    ) -> Result<Option<MultiAllocation>, PipelineError> {
        Ok(brute_multi_provider(
            instance.item_count,
            instance.items,
            &instance.valuations,
            rho,
            d,
        )?)
    }
}

/// A fixed multi-allocation over all original agents; peeled agents' bundles
/// are ignored.
#[derive(Debug, Clone)]
pub struct FileProvider {
    pub allocation: MultiAllocation,
}

impl MultiAllocationProvider for FileProvider {
    fn provide(
        &self,
        instance: &SurvivingInstance<'_>,
        _rho: Rational,
        _d: usize,
    ) -> Result<Option<MultiAllocation>, PipelineError> {
        let given = self.allocation.agent_count();
        if instance.agents.iter().any(|&a| a >= given) {
            return Err(PipelineError::InvalidProvision(format!(
                "file has {given} bundles but the instance has more agents"
            )));
        }
        let bundles = instance.agents.iter().map(|&a| self.allocation.bundle(a)).collect();
        MultiAllocation::new(instance.item_count, bundles)
            .map(Some)
            .map_err(|e| PipelineError::InvalidProvision(e.to_string()))
    }
}

/// Splits the surviving agents into fixed groups and gives each group a
/// width-1 allocation of all surviving items, found by exhaustive search
/// against `ρ·MMS(items, v_i, |group|)`. The merged result has width at most
/// the number of groups.
#[derive(Debug, Clone)]
pub struct GroupSplitProvider {
    /// Groups of original agent indices.
    pub groups: Vec<Vec<usize>>,
}

impl MultiAllocationProvider for GroupSplitProvider {
    fn provide(
        &self,
        instance: &SurvivingInstance<'_>,
        rho: Rational,
        _d: usize,
    ) -> Result<Option<MultiAllocation>, PipelineError> {
        let mut bundles = vec![ItemSet::EMPTY; instance.agents.len()];
        for group in &self.groups {
            let members: Vec<usize> = instance
                .agents
                .iter()
                .enumerate()
                .filter(|(_, a)| group.contains(a))
                .map(|(pos, _)| pos)
                .collect();
            if members.is_empty() {
                continue;
            }
            let vals: Vec<&dyn SetFunction> =
                members.iter().map(|&p| instance.valuations[p]).collect();
            let thresholds = vals
                .iter()
                .map(|v| Ok(rho * mms(instance.items, *v, members.len())?))
                .collect::<Result<Vec<_>, MmsError>>()?;
            match search_width(instance.items, &vals, &thresholds, 1) {
                Some(found) => {
                    for (k, &p) in members.iter().enumerate() {
                        bundles[p] = found[k];
                    }
                }
                None => return Ok(None),
            }
        }
        MultiAllocation::new(instance.item_count, bundles)
            .map(Some)
            .map_err(|e| PipelineError::InvalidProvision(e.to_string()))
    }
}

/// First multi-allocation of `items` with width at most `d` in which every
/// agent `i` gets `v_i(A_i) >= ρ·MMS(items, v_i, n)`, or `None`.
///
/// Items are assigned in increasing order; each item's holder set is tried
/// by decreasing size, then increasing characteristic integer. That order
/// defines "first".
pub fn brute_multi_provider(
    item_count: usize,
    items: ItemSet,
    valuations: &[&dyn SetFunction],
    rho: Rational,
    d: usize,
) -> Result<Option<MultiAllocation>, MmsError> {
    let n = valuations.len();
    if n == 0 {
        return Ok(Some(MultiAllocation::empty(item_count, 0)));
    }
    let thresholds = valuations
        .iter()
        .map(|v| Ok(rho * mms(items, *v, n)?))
        .collect::<Result<Vec<_>, MmsError>>()?;
    Ok(search_width(items, valuations, &thresholds, d).map(|bundles| {
        MultiAllocation::new(item_count, bundles).expect("bundles lie inside items")
    }))
}

fn search_width(
    items: ItemSet,
    valuations: &[&dyn SetFunction],
    thresholds: &[Rational],
    d: usize,
) -> Option<Vec<ItemSet>> {
    let n = valuations.len();
    assert!(n < 32, "holder sets are u32 masks");
    let mut options: Vec<u32> = (0..1u32 << n)
        .filter(|mask| mask.count_ones() as usize <= d)
        .collect();
    options.sort_by_key(|mask| (std::cmp::Reverse(mask.count_ones()), *mask));
    let order: Vec<usize> = items.iter().collect();
    let mut bundles = vec![ItemSet::EMPTY; n];
    fn dfs(
        k: usize,
        order: &[usize],
        options: &[u32],
        valuations: &[&dyn SetFunction],
        thresholds: &[Rational],
        bundles: &mut Vec<ItemSet>,
    ) -> bool {
        let rest: ItemSet = order[k..].iter().copied().collect();
        for i in 0..bundles.len() {
            if valuations[i].value(bundles[i].union(rest)) < thresholds[i] {
                return false;
            }
        }
        if k == order.len() {
            return true;
        }
        let item = order[k];
        for &mask in options {
            for i in 0..bundles.len() {
                if mask >> i & 1 == 1 {
                    bundles[i].insert(item);
                }
            }
            if dfs(k + 1, order, options, valuations, thresholds, bundles) {
                return true;
            }
            for b in bundles.iter_mut() {
                b.remove(item);
            }
        }
        false
    }
    dfs(0, &order, &options, valuations, thresholds, &mut bundles).then_some(bundles)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineOptions {
    /// Recompute thresholds on the shrinking instance after every peel
    /// instead of using the original MMS values.
    pub recompute_thresholds: bool,
    pub halving: HalvingOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineAgent {
    pub agent: usize,
    /// `MMS(M, v_i, n)` on the original instance.
    pub mms: Rational,
    /// `α·MMS_i`
    pub target: Rational,
    pub value: Rational,
    pub peeled_item: Option<usize>,
    /// Provider bundle value, for survivors.
    pub provided: Option<Rational>,
    /// Largest single-item value in the provider bundle, for survivors.
    pub delta: Option<Rational>,
    /// `(ρ·MMS_i - (d̂-1)·δ_i)/d̂ >= α·MMS_i`, checked when `δ_i < α·MMS_i`.
    pub chain: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub rho: Rational,
    pub d: usize,
    pub d_hat: usize,
    pub alpha: Rational,
    pub peeled: Vec<(usize, usize)>,
    pub survivors: Vec<usize>,
    pub surviving_items: ItemSet,
    /// Provider output, one bundle per survivor.
    pub provided: Option<MultiAllocation>,
    pub transform: Option<TransformReport>,
    pub allocation: MultiAllocation,
    pub agents: Vec<PipelineAgent>,
}

impl PipelineReport {
    pub fn all_pass(&self) -> bool {
        self.agents.iter().all(|a| a.pass && a.chain != Some(false))
    }

    pub fn failing_agents(&self) -> Vec<usize> {
        self.agents
            .iter()
            .filter(|a| !a.pass || a.chain == Some(false))
            .map(|a| a.agent)
            .collect()
    }
}

/// `ρ / (2d̂ - 1)` with `d̂` the power of two rounding `d` up.
pub fn pipeline_alpha(rho: Rational, d: usize) -> Rational {
    let d_hat = round_up_pow2(d);
    rho / Rational::from(2 * d_hat - 1)
}

/// Peels every (agent, item) pair whose single item already reaches `α·MMS_i`,
/// obtains a multi-allocation of the rest from `provider`, transforms it and
/// certifies each agent against `α·MMS_i`.
pub fn sampling_pipeline(
    item_count: usize,
    valuations: &[&dyn SetFunction],
    provider: &dyn MultiAllocationProvider,
    rho: Rational,
    d: usize,
) -> Result<PipelineReport, PipelineError> {
    sampling_pipeline_with(item_count, valuations, provider, rho, d, PipelineOptions::default())
}

pub fn sampling_pipeline_with(
    item_count: usize,
    valuations: &[&dyn SetFunction],
    provider: &dyn MultiAllocationProvider,
    rho: Rational,
    d: usize,
    options: PipelineOptions,
) -> Result<PipelineReport, PipelineError> {
    if rho <= Rational::ZERO {
        return Err(PipelineError::InvalidRho);
    }
    if d == 0 {
        return Err(PipelineError::InvalidDegree);
    }
    let n = valuations.len();
    let d_hat = round_up_pow2(d);
    let alpha = pipeline_alpha(rho, d);
    let all_items = ItemSet::full(item_count);
    let mms_values = valuations
        .iter()
        .map(|v| mms(all_items, *v, n))
        .collect::<Result<Vec<_>, MmsError>>()?;

    let mut alive: Vec<usize> = (0..n).collect();
    let mut remaining = all_items;
    let mut peeled = Vec::new();
    let mut thresholds: Vec<Rational> = mms_values.iter().map(|&m| alpha * m).collect();
    'peel: loop {
        for &i in &alive {
            let v = valuations[i];
            if let Some(e) = remaining
                .iter()
                .find(|&e| v.value(ItemSet::singleton(e)) >= thresholds[i])
            {
                peeled.push((i, e));
                alive.retain(|&a| a != i);
                remaining.remove(e);
                if options.recompute_thresholds && !alive.is_empty() {
                    for &j in &alive {
                        thresholds[j] = alpha * mms(remaining, valuations[j], alive.len())?;
                    }
                }
                continue 'peel;
            }
        }
        break;
    }

    let mut final_bundles = vec![ItemSet::EMPTY; n];
    for &(i, e) in &peeled {
        final_bundles[i] = ItemSet::singleton(e);
    }
    let survivor_vals: Vec<&dyn SetFunction> = alive.iter().map(|&i| valuations[i]).collect();
    let mut provided = None;
    let mut transform_report = None;
    if !alive.is_empty() {
        let instance = SurvivingInstance {
            item_count,
            agents: alive.clone(),
            items: remaining,
            valuations: survivor_vals.clone(),
        };
        let multi = provider
            .provide(&instance, rho, d)?
            .ok_or(PipelineError::NotFound)?;
        validate_provision(&instance, &multi, &mms_values, rho, d)?;
        let outcome = transform_with(&multi, &survivor_vals, d, options.halving)?;
        for (pos, &i) in alive.iter().enumerate() {
            final_bundles[i] = outcome.allocation.bundle(pos);
        }
        provided = Some(multi);
        transform_report = Some(outcome.report);
    }

    let allocation =
        MultiAllocation::new(item_count, final_bundles).expect("bundles lie inside the ground set");
    let d_hat_r = Rational::from(d_hat);
    let agents = (0..n)
        .map(|i| {
            let v = valuations[i];
            let value = v.value(allocation.bundle(i));
            let target = alpha * mms_values[i];
            let peeled_item = peeled.iter().find(|(a, _)| *a == i).map(|&(_, e)| e);
            let pos = alive.iter().position(|&a| a == i);
            let (provided_value, delta, chain) = match (pos, &provided) {
                (Some(p), Some(multi)) => {
                    let bundle = multi.bundle(p);
                    let delta = max_item_value(v, bundle);
                    let chain = (delta < target).then(|| {
                        (rho * mms_values[i] - (d_hat_r - Rational::ONE) * delta) / d_hat_r >= target
                    });
                    (Some(v.value(bundle)), Some(delta), chain)
                }
                _ => (None, None, None),
            };
            PipelineAgent {
                agent: i,
                mms: mms_values[i],
                target,
                value,
                peeled_item,
                provided: provided_value,
                delta,
                chain,
                pass: value >= target,
            }
        })
        .collect();

    Ok(PipelineReport {
        rho,
        d,
        d_hat,
        alpha,
        peeled,
        survivors: alive,
        surviving_items: remaining,
        provided,
        transform: transform_report,
        allocation,
        agents,
    })
}

fn validate_provision(
    instance: &SurvivingInstance<'_>,
    multi: &MultiAllocation,
    mms_values: &[Rational],
    rho: Rational,
    d: usize,
) -> Result<(), PipelineError> {
    if multi.agent_count() != instance.agents.len() || multi.item_count() != instance.item_count {
        return Err(PipelineError::InvalidProvision(format!(
            "expected {} bundles over {} items, got {} bundles over {} items",
            instance.agents.len(),
            instance.item_count,
            multi.agent_count(),
            multi.item_count()
        )));
    }
    for (pos, &agent) in instance.agents.iter().enumerate() {
        let bundle = multi.bundle(pos);
        if !bundle.is_subset(instance.items) {
            return Err(PipelineError::InvalidProvision(format!(
                "bundle of agent {agent} contains peeled items {}",
                bundle.difference(instance.items)
            )));
        }
        let value = instance.valuations[pos].value(bundle);
        let required = rho * mms_values[agent];
        if value < required {
            return Err(PipelineError::Insufficient {
                agent,
                value,
                required,
            });
        }
    }
    let width = multi.width();
    if width > d {
        return Err(PipelineError::InvalidProvision(format!(
            "width {width} exceeds d = {d}"
        )));
    }
    Ok(())
}

/// `n_1 = 2`, `n_{k+1} = n_k (n_k + 1)`; returns `n_1..=n_count`.
pub fn n_sequence(count: usize) -> Vec<BigUint> {
    let mut seq = Vec::with_capacity(count);
    let mut cur = BigUint::from(2u32);
    for _ in 0..count {
        seq.push(cur.clone());
        cur = &cur * (&cur + 1u32);
    }
    seq
}

/// Outcome of comparing the guarantee with `1/(8·log2 log2 n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorCheck {
    Holds,
    Fails,
    /// Not resolved at the working precision.
    Undetermined,
    /// `n < 4`, where `log2 log2 n <= 0`.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guarantee {
    pub n: String,
    /// Smallest `d` with `n < n_d`.
    pub d: usize,
    pub d_hat: usize,
    /// `(1/2) / (2d̂ - 1)`
    pub alpha: Rational,
    /// `max(α, 1/n)`
    pub guarantee: Rational,
    pub floor_check: FloorCheck,
}

/// Which MMS fraction the half-MMS multi-allocations for `n` agents reach
/// through the pipeline.
pub fn guarantee_for_n(n: &BigUint) -> Guarantee {
    assert!(!n.is_zero(), "n must be at least 1");
    let mut d = 1;
    let mut n_d = BigUint::from(2u32);
    while *n >= n_d {
        n_d = &n_d * (&n_d + 1u32);
        d += 1;
    }
    let d_hat = round_up_pow2(d);
    let alpha = Rational::new(1, 2) / Rational::from(2 * d_hat - 1);
    let guarantee = match n.to_i128() {
        Some(small) if Rational::new(1, small) > alpha => Rational::new(1, small),
        _ => alpha,
    };
    let floor_check = if *n < BigUint::from(4u32) {
        FloorCheck::NotApplicable
    } else {
        floor_check(n, guarantee)
    };
    Guarantee {
        n: n.to_string(),
        d,
        d_hat,
        alpha,
        guarantee,
        floor_check,
    }
}

/// Decides `g >= 1/(8·log2 log2 n)`, i.e. `(log2 n)^q >= 2^p` where
/// `p/q = 1/(8g)`, by bracketing `log2 n` with bit lengths of `n^(2^s)`.
fn floor_check(n: &BigUint, g: Rational) -> FloorCheck {
    let x = (Rational::from(8) * g).recip();
    let (p, q) = (x.numer(), x.denom());
    let (Ok(p), Ok(q)) = (u32::try_from(p), u32::try_from(q)) else {
        return FloorCheck::Undetermined;
    };
    let two_pow = |e: u64| BigUint::one() << e;
    let mut power = n.clone();
    for s in 0..12u64 {
        // log2 n lies in [(b-1)/2^s, b/2^s], with equality on the left iff
        // n^(2^s) is a power of two.
        let b = power.bits();
        let exact = power.count_ones() == 1;
        let target = two_pow(u64::from(p) + s * u64::from(q));
        let lo = BigUint::from(b - 1).pow(q);
        if lo >= target {
            return FloorCheck::Holds;
        }
        let hi = BigUint::from(b).pow(q);
        if hi < target || (exact && lo < target) {
            return FloorCheck::Fails;
        }
        power = &power * &power;
    }
    FloorCheck::Undetermined
}

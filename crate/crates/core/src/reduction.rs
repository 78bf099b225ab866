//! Turning d-multi-allocations into allocations by repeated halving.
//!
//! One halving level splits every item into `⌈h/2⌉` copies (h = number of
//! holders), hands each copy to at most two holders, runs the token game on
//! the resulting multigraph and maps the won copies back to their items. Each
//! agent keeps at least `(v_i(A_i) - δ_i) / 2` and the width drops from `w` to
//! `⌈w/2⌉`. Running `log2 d̂` levels yields an allocation with
//!
//! ```text
//! v_i(A'_i) >= v_i(A_i) / d̂ - (d̂ - 1) / d̂ · δ_i
//! ```
//!
//! where `d̂` is `d` rounded up to a power of two and `δ_i` is the largest
//! single-item value in `A_i`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::multigraph::{
    pad_even, token_game_with, GraphError, JumpRule, MultiGraph, Orientation, TokenGameConfig,
    TokenTrace,
};
use crate::rational::Rational;
use crate::valuations::{marginal_delta, max_item_value, SetFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("multi-allocation has width {width}, above the declared d = {d}")]
    WidthExceedsD { width: usize, d: usize },
    #[error("item {item} held by agent {agent} has {holders} holders, above d_{agent} = {d}")]
    VectorViolation {
        item: usize,
        agent: usize,
        holders: usize,
        d: usize,
    },
    #[error("d must be a positive integer")]
    InvalidDegree,
    #[error("expected {expected} entries (one per agent), got {got}")]
    AgentCount { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One copy of a source item and the one or two agents that hold it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Copy {
    pub source: usize,
    pub holders: Vec<usize>,
}

/// Copies produced by [`split_copies`]; copy ids index `copies()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyInstance {
    agents: usize,
    items: usize,
    copies: Vec<Copy>,
}

impl CopyInstance {
    pub fn copies(&self) -> &[Copy] {
        &self.copies
    }

    pub fn projection(&self, copy: usize) -> usize {
        self.copies[copy].source
    }

    pub fn agent_count(&self) -> usize {
        self.agents
    }

    pub fn source_item_count(&self) -> usize {
        self.items
    }

    /// Copies held by `agent`.
    pub fn copies_of(&self, agent: usize) -> Vec<usize> {
        (0..self.copies.len())
            .filter(|&c| self.copies[c].holders.contains(&agent))
            .collect()
    }

    /// The copy multi-allocation (width ≤ 2) over copy ids.
    pub fn copy_allocation(&self) -> Result<MultiAllocation, crate::allocation::AllocationError> {
        let mut bundles = vec![ItemSet::EMPTY; self.agents];
        for (id, copy) in self.copies.iter().enumerate() {
            for &h in &copy.holders {
                if id < crate::itemset::MAX_ITEMS {
                    bundles[h].insert(id);
                }
            }
        }
        MultiAllocation::new(self.copies.len(), bundles)
    }

    /// Source items underlying a set of copies.
    pub fn project(&self, copies: ItemSet) -> ItemSet {
        copies.iter().map(|c| self.copies[c].source).collect()
    }
}

/// Splits each item with holders `h_1 < h_2 < ...` into copies held by
/// `{h_1, h_2}`, `{h_3, h_4}`, ...; an odd holder out gets a copy alone.
pub fn split_copies(alloc: &MultiAllocation) -> CopyInstance {
    let mut copies = Vec::new();
    for item in 0..alloc.item_count() {
        for pair in alloc.holders(item).chunks(2) {
            copies.push(Copy {
                source: item,
                holders: pair.to_vec(),
            });
        }
    }
    CopyInstance {
        agents: alloc.agent_count(),
        items: alloc.item_count(),
        copies,
    }
}

/// Options shared by every halving level.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalvingOptions {
    /// Vertex the token starts at.
    pub start: usize,
    pub jump: JumpRule,
}

#[derive(Debug, Clone)]
pub struct HalvingOutcome {
    pub allocation: MultiAllocation,
    /// Padded copy graph the token game ran on; edge items are source items.
    pub graph: MultiGraph,
    pub orientation: Orientation,
    pub trace: TokenTrace,
    /// Copies held by a single agent, given to her directly.
    pub direct: Vec<ItemSet>,
}

fn check_valuations(alloc: &MultiAllocation, n: usize) -> Result<(), ReductionError> {
    if alloc.agent_count() != n {
        return Err(ReductionError::AgentCount {
            expected: alloc.agent_count(),
            got: n,
        });
    }
    Ok(())
}

/// One halving level.
pub fn halve(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
) -> Result<HalvingOutcome, ReductionError> {
    halve_with(alloc, valuations, HalvingOptions::default())
}

pub fn halve_with(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    options: HalvingOptions,
) -> Result<HalvingOutcome, ReductionError> {
    check_valuations(alloc, valuations.len())?;
    let n = alloc.agent_count();
    let copies = split_copies(alloc);
    let mut graph = MultiGraph::new(n);
    let mut direct = vec![ItemSet::EMPTY; n];
    for copy in copies.copies() {
        match copy.holders[..] {
            [a] => direct[a].insert(copy.source),
            [a, b] => {
                graph.add_edge(a, b, copy.source)?;
            }
            _ => unreachable!("copies have one or two holders"),
        }
    }
    let graph = pad_even(&graph);
    let start = if n == 0 { 0 } else { options.start.min(n - 1) };
    let (orientation, trace) = token_game_with(
        &graph,
        valuations,
        &direct,
        TokenGameConfig {
            start,
            jump: options.jump,
        },
    )?;
    let won = orientation.bundles(&graph);
    let bundles = (0..n).map(|i| direct[i].union(won[i])).collect();
    let allocation = MultiAllocation::new(alloc.item_count(), bundles)
        .expect("halving keeps bundles inside the ground set");
    Ok(HalvingOutcome {
        allocation,
        graph,
        orientation,
        trace,
        direct,
    })
}

/// Smallest power of two that is at least `d` (`d >= 1`).
pub fn round_up_pow2(d: usize) -> usize {
    d.next_power_of_two()
}

/// `initial / d - (d - 1) / d · δ`
pub fn width_bound(initial: Rational, delta: Rational, d: usize) -> Rational {
    let d = Rational::from(d);
    initial / d - (d - Rational::ONE) / d * delta
}

/// Applies the one-level bound `b -> (b - δ) / 2` `levels` times.
pub fn halving_chain_bound(initial: Rational, delta: Rational, levels: u32) -> Rational {
    let two = Rational::from(2);
    (0..levels).fold(initial, |b, _| (b - delta) / two)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent: usize,
    /// `v_i(A_i)`
    pub initial: Rational,
    /// `v_i(A'_i)`
    #[serde(rename = "final")]
    pub final_value: Rational,
    /// `max_{e ∈ A_i} v_i({e})`
    pub delta: Rational,
    /// `max_{e ∈ A_i} [v_i(A_i) - v_i(A_i \ {e})]`, informational only.
    pub marginal_delta: Rational,
    pub d_requested: usize,
    pub d_used: usize,
    pub bound: Rational,
    pub pass: bool,
}

impl AgentReport {
    /// Recomputes the pass flag from the stored exact values.
    pub fn recheck(&self) -> bool {
        self.bound == width_bound(self.initial, self.delta, self.d_used)
            && self.final_value >= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub width_before: usize,
    pub width_after: usize,
    pub values_before: Vec<Rational>,
    pub values_after: Vec<Rational>,
    /// Largest single-item value in each agent's bundle at this level.
    pub deltas: Vec<Rational>,
    /// `values_after[i] >= (values_before[i] - deltas[i]) / 2`
    pub pass: Vec<bool>,
    /// Copy count and auxiliary edges of the level's graph.
    pub edges: usize,
    pub auxiliary_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformReport {
    pub depth: u32,
    /// Width before the first level and after each level.
    pub widths: Vec<usize>,
    pub agents: Vec<AgentReport>,
    pub levels: Vec<LevelReport>,
}

impl TransformReport {
    pub fn all_pass(&self) -> bool {
        self.agents.iter().all(|a| a.pass) && self.levels.iter().all(|l| l.pass.iter().all(|&p| p))
    }

    pub fn failing_agents(&self) -> Vec<usize> {
        self.agents.iter().filter(|a| !a.pass).map(|a| a.agent).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TransformOutcome {
    pub allocation: MultiAllocation,
    pub report: TransformReport,
    /// Token traces, one per level.
    pub traces: Vec<TokenTrace>,
}

/// Uniform-width transform: rounds `d` up to `d̂` and halves `log2 d̂` times.
pub fn transform(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    d: usize,
) -> Result<TransformOutcome, ReductionError> {
    transform_with(alloc, valuations, d, HalvingOptions::default())
}

pub fn transform_with(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    d: usize,
    options: HalvingOptions,
) -> Result<TransformOutcome, ReductionError> {
    if d == 0 {
        return Err(ReductionError::InvalidDegree);
    }
    check_valuations(alloc, valuations.len())?;
    let width = alloc.width();
    if width > d {
        return Err(ReductionError::WidthExceedsD { width, d });
    }
    run_levels(alloc, valuations, &vec![d; alloc.agent_count()], options)
}

/// Per-agent variant: every item in `A_i` has at most `d_vec[i]` holders, and
/// agent `i` is certified against her own `d̂_i`.
pub fn transform_vector(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    d_vec: &[usize],
) -> Result<TransformOutcome, ReductionError> {
    transform_vector_with(alloc, valuations, d_vec, HalvingOptions::default())
}

pub fn transform_vector_with(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    d_vec: &[usize],
    options: HalvingOptions,
) -> Result<TransformOutcome, ReductionError> {
    check_valuations(alloc, valuations.len())?;
    if d_vec.len() != alloc.agent_count() {
        return Err(ReductionError::AgentCount {
            expected: alloc.agent_count(),
            got: d_vec.len(),
        });
    }
    if d_vec.contains(&0) {
        return Err(ReductionError::InvalidDegree);
    }
    for (agent, &d) in d_vec.iter().enumerate() {
        for item in alloc.bundle(agent) {
            let holders = alloc.holder_count(item);
            if holders > d {
                return Err(ReductionError::VectorViolation {
                    item,
                    agent,
                    holders,
                    d,
                });
            }
        }
    }
    run_levels(alloc, valuations, d_vec, options)
}

fn run_levels(
    alloc: &MultiAllocation,
    valuations: &[&dyn SetFunction],
    d_vec: &[usize],
    options: HalvingOptions,
) -> Result<TransformOutcome, ReductionError> {
    let n = alloc.agent_count();
    let d_used: Vec<usize> = d_vec.iter().map(|&d| round_up_pow2(d)).collect();
    let depth = d_used.iter().map(|d| d.trailing_zeros()).max().unwrap_or(0);
    let value_of = |a: &MultiAllocation| -> Vec<Rational> {
        (0..n).map(|i| valuations[i].value(a.bundle(i))).collect()
    };

    let mut current = alloc.clone();
    let mut widths = vec![current.width()];
    let mut levels = Vec::new();
    let mut traces = Vec::new();
    for _ in 0..depth {
        let values_before = value_of(&current);
        let deltas: Vec<Rational> = (0..n)
            .map(|i| max_item_value(valuations[i], current.bundle(i)))
            .collect();
        let outcome = halve_with(&current, valuations, options)?;
        let values_after = value_of(&outcome.allocation);
        let two = Rational::from(2);
        let pass = (0..n)
            .map(|i| values_after[i] >= (values_before[i] - deltas[i]) / two)
            .collect();
        let width_after = outcome.allocation.width();
        levels.push(LevelReport {
            width_before: current.width(),
            width_after,
            values_before,
            values_after,
            deltas,
            pass,
            edges: outcome.graph.edges().len() - outcome.graph.auxiliary_count(),
            auxiliary_edges: outcome.graph.auxiliary_count(),
        });
        widths.push(width_after);
        traces.push(outcome.trace);
        current = outcome.allocation;
    }

    let agents = (0..n)
        .map(|i| {
            let v = valuations[i];
            let bundle = alloc.bundle(i);
            let initial = v.value(bundle);
            let delta = max_item_value(v, bundle);
            let final_value = v.value(current.bundle(i));
            let bound = width_bound(initial, delta, d_used[i]);
            AgentReport {
                agent: i,
                initial,
                final_value,
                delta,
                marginal_delta: marginal_delta(v, bundle),
                d_requested: d_vec[i],
                d_used: d_used[i],
                bound,
                pass: final_value >= bound,
            }
        })
        .collect();

    Ok(TransformOutcome {
        allocation: current,
        report: TransformReport {
            depth,
            widths,
            agents,
            levels,
        },
        traces,
    })
}

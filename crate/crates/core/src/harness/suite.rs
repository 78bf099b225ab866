//! Seeded cross-module property checks. Each check runs its trials in
//! parallel with isolated state; results are kept in trial order.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::mms::{mms, mms_removal_monotone, sampling_pipeline, BruteProvider, PipelineError};
use crate::multigraph::{
    certify_graph_allocation, check_local_alternation, pad_even, token_game_with, validate_trace,
    JumpRule, MultiGraph, TokenGameConfig,
};
use crate::picking_game::{omega, omega_alternating, GameQuery, PickSequence, Player};
use crate::rational::Rational;
use crate::reduction::{transform, transform_vector};
use crate::valuations::{marginal_delta, max_item_value, SetFunction, Valuation};

use super::generate::{
    random_graph, random_multi_allocation, random_valuation, random_vector_multi_allocation,
    trial_rng, Family,
};
use super::instance::InstanceFile;
use super::oracle::{oracle_mms, oracle_omega};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteViolation {
    pub check: String,
    pub trial: u64,
    pub detail: String,
    /// Instance reproducing the failure on its own.
    pub witness: Option<InstanceFile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub trials: usize,
    /// Trials that did not apply (for example, no provider output).
    pub skipped: usize,
    pub violations: Vec<SuiteViolation>,
    pub elapsed_ms: u64,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

enum Trial {
    Ok,
    Skipped,
    Violations(Vec<(String, Option<InstanceFile>)>),
}

fn run_check<F>(name: &str, seed: u64, trials: usize, f: F) -> CheckOutcome
where
    F: Fn(u64) -> Trial + Sync,
{
    let start = Instant::now();
    let results: Vec<Trial> = (0..trials as u64).into_par_iter().map(&f).collect();
    let mut skipped = 0;
    let mut violations = Vec::new();
    for (trial, result) in results.into_iter().enumerate() {
        match result {
            Trial::Ok => {}
            Trial::Skipped => skipped += 1,
            Trial::Violations(list) => {
                for (detail, witness) in list {
                    violations.push(SuiteViolation {
                        check: name.to_string(),
                        trial: trial as u64,
                        detail: format!("seed {seed}: {detail}"),
                        witness,
                    });
                }
            }
        }
    }
    CheckOutcome {
        name: name.to_string(),
        trials,
        skipped,
        violations,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// Collects failed conditions of one trial.
#[derive(Default)]
struct Failures(Vec<(String, Option<InstanceFile>)>);

impl Failures {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String, witness: &dyn Fn() -> InstanceFile) {
        if !ok {
            self.0.push((detail(), Some(witness())));
        }
    }

    fn into_trial(self) -> Trial {
        if self.0.is_empty() {
            Trial::Ok
        } else {
            Trial::Violations(self.0)
        }
    }
}

fn two_choice<R: Rng>(rng: &mut R, a: Family, b: Family) -> Family {
    if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

/// Picking-game bounds on random xos and truncated valuations with
/// `m <= max_items`: `ω(S_p) >= ω(S_q)`, `ω(S_p) + ω(S_q) >= v(M)`,
/// `ω(S_p) >= v(M)/2`, `ω(S_q) >= (v(M) - δ)/2` for both readings of `δ`,
/// and `ω(S_q) >= MMS(M, v, 2)/2`.
pub fn check_picking_game(seed: u64, trials: usize, max_items: usize) -> CheckOutcome {
    run_check("picking-game", seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let family = two_choice(&mut rng, Family::Xos, Family::Truncated);
        let m = rng.gen_range(1..=max_items);
        let v = random_valuation(&mut rng, family, m).expect("family supports m");
        let items = ItemSet::full(m);
        let witness = || InstanceFile::new(m, std::slice::from_ref(&v));
        let wp = omega_alternating(Player::P, items, &v).expect("small game").omega;
        let wq = omega_alternating(Player::Q, items, &v).expect("small game").omega;
        let whole = v.value(items);
        let two = Rational::from(2);
        let delta = max_item_value(&v, items);
        let delta_marginal = marginal_delta(&v, items);
        let mms2 = mms(items, &v, 2).expect("small mms");
        let mut f = Failures::default();
        f.check(wp >= wq, || format!("ω_p {wp} < ω_q {wq}"), &witness);
        f.check(wp + wq >= whole, || format!("ω_p + ω_q = {} < v(M) = {whole}", wp + wq), &witness);
        f.check(wp >= whole / two, || format!("ω_p {wp} < v(M)/2"), &witness);
        f.check(
            wq >= (whole - delta) / two,
            || format!("ω_q {wq} < (v(M) - δ)/2 with δ = {delta}"),
            &witness,
        );
        f.check(
            wq >= (whole - delta_marginal) / two,
            || format!("ω_q {wq} < (v(M) - δ')/2 with marginal δ' = {delta_marginal}"),
            &witness,
        );
        f.check(wq >= mms2 / two, || format!("ω_q {wq} < MMS2/2 = {}", mms2 / two), &witness);
        f.into_trial()
    })
}

fn mixed_family<R: Rng>(rng: &mut R, m: usize) -> Family {
    let families: &[Family] = if m <= Family::Explicit.max_items() {
        &Family::ALL
    } else {
        &[Family::Additive, Family::Xos, Family::Truncated]
    };
    families[rng.gen_range(0..families.len())]
}

fn graph_witness(graph: &MultiGraph, vals: &[Valuation]) -> InstanceFile {
    let m = vals.first().map_or(0, |v| v.item_count());
    InstanceFile::new(m, vals).with_graph(graph)
}

/// Token game on random multigraphs (`n <= max_agents`, local degree at most
/// `max_degree`, at most 16 items): trace validity, local alternation, and
/// every agent at least `ω(S_q)`, `(v(M^i) - δ_i)/2` and `MMS(M^i, v_i, 2)/2`.
/// Odd trials use a seeded random jump rule.
pub fn check_token_game(
    seed: u64,
    trials: usize,
    max_agents: usize,
    max_degree: usize,
) -> CheckOutcome {
    run_check("token-game", seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let n = rng.gen_range(2..=max_agents);
        let m = rng.gen_range(1..=16.min(n * max_degree / 2));
        let graph = random_graph(&mut rng, n, m, max_degree);
        let m = graph.edges().len();
        let vals: Vec<Valuation> = (0..n)
            .map(|_| {
                let family = mixed_family(&mut rng, m);
                random_valuation(&mut rng, family, m).expect("family supports m")
            })
            .collect();
        let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
        let witness = || graph_witness(&graph, &vals);
        let padded = pad_even(&graph);
        let jump = if t % 2 == 1 {
            JumpRule::Random(rng.gen())
        } else {
            JumpRule::Lowest
        };
        let config = TokenGameConfig {
            start: rng.gen_range(0..n),
            jump,
        };
        let holdings = vec![ItemSet::EMPTY; n];
        let mut f = Failures::default();
        let (orientation, trace) = match token_game_with(&padded, &refs, &holdings, config) {
            Ok(r) => r,
            Err(e) => {
                f.check(false, || format!("token game failed: {e}"), &witness);
                return f.into_trial();
            }
        };
        match validate_trace(&padded, &trace) {
            Ok(o) => f.check(o == orientation, || "trace disagrees with orientation".into(), &witness),
            Err(e) => f.check(false, || format!("invalid trace: {e}"), &witness),
        }
        if let Err(e) = check_local_alternation(&padded, &trace) {
            f.check(false, || format!("local alternation: {e}"), &witness);
        }
        let certs = certify_graph_allocation(&padded, &refs, &orientation).expect("small graph");
        for c in certs {
            f.check(
                c.pass(),
                || {
                    format!(
                        "agent {}: value {} vs ω_q {}, half gap {}, half MMS2 {}",
                        c.agent, c.value, c.omega_q, c.half_gap, c.half_mms2
                    )
                },
                &witness,
            );
        }
        f.into_trial()
    })
}

fn transform_witness(alloc: &MultiAllocation, vals: &[Valuation], d: usize) -> InstanceFile {
    InstanceFile::new(alloc.item_count(), vals).with_multi_allocation(alloc, d)
}

/// Uniform transform on random width-`d` multi-allocations: the per-agent
/// bound with `d̂`, per-level halving bounds, width halving, refinement and
/// disjointness.
pub fn check_transform(
    seed: u64,
    trials: usize,
    d: usize,
    max_agents: usize,
    max_items: usize,
) -> CheckOutcome {
    run_check("transform", seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let n = rng.gen_range(1..=max_agents);
        let m = rng.gen_range(1..=max_items);
        let alloc = random_multi_allocation(&mut rng, n, m, d);
        let vals: Vec<Valuation> = (0..n)
            .map(|_| {
                let family = mixed_family(&mut rng, m);
                random_valuation(&mut rng, family, m).expect("family supports m")
            })
            .collect();
        let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
        let witness = || transform_witness(&alloc, &vals, d);
        let mut f = Failures::default();
        let out = match transform(&alloc, &refs, d) {
            Ok(out) => out,
            Err(e) => {
                f.check(false, || format!("transform failed: {e}"), &witness);
                return f.into_trial();
            }
        };
        f.check(out.allocation.is_allocation(), || "result is not an allocation".into(), &witness);
        f.check(
            out.allocation.is_refinement_of(&alloc),
            || "result is not inside the input bundles".into(),
            &witness,
        );
        for pair in out.report.widths.windows(2) {
            f.check(
                pair[1] <= pair[0].div_ceil(2),
                || format!("width went from {} to {}", pair[0], pair[1]),
                &witness,
            );
        }
        for (k, level) in out.report.levels.iter().enumerate() {
            for (i, &ok) in level.pass.iter().enumerate() {
                f.check(ok, || format!("level {k}: agent {i} below (before - δ)/2"), &witness);
            }
        }
        for a in &out.report.agents {
            f.check(
                a.pass && a.recheck(),
                || format!("agent {}: final {} < bound {}", a.agent, a.final_value, a.bound),
                &witness,
            );
        }
        f.into_trial()
    })
}

/// Vector transform with per-agent widths `d_vec` on random instances.
pub fn check_transform_vector(
    seed: u64,
    trials: usize,
    d_vec: &[usize],
    max_items: usize,
) -> CheckOutcome {
    run_check("transform-vector", seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let n = d_vec.len();
        let m = rng.gen_range(1..=max_items);
        let alloc = random_vector_multi_allocation(&mut rng, d_vec, m);
        let vals: Vec<Valuation> = (0..n)
            .map(|_| {
                let family = mixed_family(&mut rng, m);
                random_valuation(&mut rng, family, m).expect("family supports m")
            })
            .collect();
        let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
        let d_max = d_vec.iter().copied().max().unwrap_or(1);
        let witness = || transform_witness(&alloc, &vals, d_max);
        let mut f = Failures::default();
        match transform_vector(&alloc, &refs, d_vec) {
            Ok(out) => {
                f.check(out.allocation.is_allocation(), || "result is not an allocation".into(), &witness);
                f.check(
                    out.allocation.is_refinement_of(&alloc),
                    || "result is not inside the input bundles".into(),
                    &witness,
                );
                for a in &out.report.agents {
                    f.check(
                        a.pass,
                        || {
                            format!(
                                "agent {} (d = {}): final {} < bound {}",
                                a.agent, a.d_requested, a.final_value, a.bound
                            )
                        },
                        &witness,
                    );
                }
            }
            Err(e) => f.check(false, || format!("vector transform failed: {e}"), &witness),
        }
        f.into_trial()
    })
}

/// Memoized `ω` against plain minimax on every sequence of length `m`.
pub fn check_oracle_omega(seed: u64, trials: usize, m: usize) -> CheckOutcome {
    run_check(&format!("oracle-omega-m{m}"), seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let family = Family::ALL[rng.gen_range(0..Family::ALL.len())];
        let v = random_valuation(&mut rng, family, m).expect("family supports m");
        let items = ItemSet::full(m);
        let witness = || InstanceFile::new(m, std::slice::from_ref(&v));
        let mut f = Failures::default();
        for sequence in PickSequence::all_of_length(m) {
            let fast = omega(&GameQuery {
                sequence: sequence.clone(),
                items,
                valuation: &v,
            })
            .expect("small game")
            .omega;
            let slow = oracle_omega(&sequence, items, &v).expect("small game");
            f.check(fast == slow, || format!("{sequence}: memoized {fast} vs oracle {slow}"), &witness);
        }
        f.into_trial()
    })
}

/// MMS against labeling enumeration, monotonicity in the number of parts,
/// and monotonicity under removing one agent with one item.
pub fn check_mms(seed: u64, trials: usize, max_items: usize) -> CheckOutcome {
    run_check("mms", seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let m = rng.gen_range(1..=max_items);
        let n = rng.gen_range(2..=4);
        let vals: Vec<Valuation> = (0..n)
            .map(|_| {
                let family = mixed_family(&mut rng, m);
                random_valuation(&mut rng, family, m).expect("family supports m")
            })
            .collect();
        let items = ItemSet::full(m);
        let witness = || InstanceFile::new(m, &vals);
        let mut f = Failures::default();
        let v = &vals[0];
        let mut previous: Option<Rational> = None;
        for parts in 1..=m + 1 {
            let fast = mms(items, v, parts).expect("small mms");
            if let Ok(slow) = oracle_mms(items, v, parts) {
                f.check(fast == slow, || format!("n = {parts}: mms {fast} vs oracle {slow}"), &witness);
            }
            if let Some(p) = previous {
                f.check(fast <= p, || format!("mms rose from {p} to {fast} at n = {parts}"), &witness);
            }
            previous = Some(fast);
        }
        let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
        let agent = rng.gen_range(0..n);
        let item = rng.gen_range(0..m);
        let report = mms_removal_monotone(items, &refs, agent, item).expect("valid removal");
        for e in &report.survivors {
            f.check(
                e.monotone,
                || {
                    format!(
                        "removing agent {agent} with item {item}: agent {} MMS {} -> {}",
                        e.agent, e.before, e.after
                    )
                },
                &witness,
            );
        }
        f.into_trial()
    })
}

/// Pipeline with the exhaustive provider on random additive instances.
/// Trials where the provider finds nothing are counted as skipped.
pub fn check_pipeline(
    seed: u64,
    trials: usize,
    rho: Rational,
    d: usize,
    max_agents: usize,
    max_items: usize,
) -> CheckOutcome {
    run_check(&format!("pipeline-rho{rho}"), seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let n = rng.gen_range(1..=max_agents);
        let m = rng.gen_range(1..=max_items);
        let vals: Vec<Valuation> = (0..n)
            .map(|_| random_valuation(&mut rng, Family::Additive, m).expect("additive"))
            .collect();
        let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
        let witness = || InstanceFile::new(m, &vals);
        let mut f = Failures::default();
        match sampling_pipeline(m, &refs, &BruteProvider, rho, d) {
            Ok(report) => {
                for a in &report.agents {
                    f.check(
                        a.pass && a.chain != Some(false),
                        || format!("agent {}: value {} < target {}", a.agent, a.value, a.target),
                        &witness,
                    );
                }
            }
            Err(PipelineError::NotFound) => return Trial::Skipped,
            Err(e) => f.check(false, || format!("pipeline failed: {e}"), &witness),
        }
        f.into_trial()
    })
}

/// Generated valuations satisfy the monotone and subadditive axioms.
pub fn check_generators(seed: u64, trials: usize) -> CheckOutcome {
    use crate::valuations::{check_axioms, AxiomClass};
    run_check("generators", seed, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let m = rng.gen_range(0..=6);
        let family = Family::ALL[rng.gen_range(0..Family::ALL.len())];
        let v = random_valuation(&mut rng, family, m).expect("family supports m");
        let tab = Valuation::tabulate(&v).expect("small table");
        let witness = || InstanceFile::new(m, std::slice::from_ref(&v));
        let mut f = Failures::default();
        let report = check_axioms(&tab, AxiomClass::Subadditive).expect("small table");
        f.check(report.pass(), || format!("{family} valuation violates {:?}", report.violation), &witness);
        f.into_trial()
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Multiplies the default trial counts; 1 runs the standard suite.
    pub scale: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, scale: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(CheckOutcome::pass)
    }

    pub fn violations(&self) -> impl Iterator<Item = &SuiteViolation> {
        self.checks.iter().flat_map(|c| c.violations.iter())
    }
}

/// Runs every check with the standard sizes.
pub fn run_suite(config: SuiteConfig) -> SuiteReport {
    let s = config.scale.max(1);
    let seed = config.seed;
    let checks = vec![
        check_generators(seed, 100 * s),
        check_picking_game(seed, 500 * s, 6),
        check_oracle_omega(seed, 50 * s, 2),
        check_oracle_omega(seed, 50 * s, 3),
        check_oracle_omega(seed, 50 * s, 4),
        check_token_game(seed, 200 * s, 6, 8),
        check_transform(seed, 200 * s, 4, 5, 6),
        check_transform_vector(seed, 200 * s, &[2, 2, 4, 4], 6),
        check_mms(seed, 100 * s, 6),
        check_pipeline(seed, 100 * s, Rational::new(1, 2), 2, 3, 5),
        check_pipeline(seed, 100 * s, Rational::ONE, 2, 3, 5),
    ];
    SuiteReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_checks_pass_and_are_deterministic() {
        let a = check_picking_game(11, 30, 5);
        let b = check_picking_game(11, 30, 5);
        assert!(a.pass());
        assert_eq!(a.trials, b.trials);
        assert!(check_transform(5, 20, 4, 4, 5).pass());
        assert!(check_mms(5, 10, 5).pass());
    }
}

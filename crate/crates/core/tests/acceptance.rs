//! Acceptance suite: one PASS/FAIL line per criterion, with its time limit.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use multialloc::harness::oracle::oracle_best_allocation;
use multialloc::harness::search::all_shared_unit;
use multialloc::harness::suite::{
    check_mms, check_oracle_omega, check_picking_game, check_pipeline, check_token_game,
    check_transform, check_transform_vector, CheckOutcome,
};
use multialloc::harness::generate::{random_valuation, seeded, Family};
use multialloc::mms::{
    brute_multi_provider, guarantee_for_n, mms, n_sequence, sampling_pipeline, BruteProvider,
    FloorCheck, GroupSplitProvider,
};
use multialloc::picking_game::{omega, omega_alternating, GameQuery, Player};
use multialloc::reduction::{width_bound, transform};
use multialloc::valuations::max_item_value;
use multialloc::{ItemSet, MultiAllocation, Rational, SetFunction, Valuation};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn r(p: i128, q: i128) -> Rational {
    Rational::new(p, q)
}

/// `v(T) = max(|T ∩ {0,1}|, |T ∩ {2,3}|)`
fn pair_max() -> Valuation {
    let table = (0..16u64)
        .map(|c| Rational::from((c & 0b0011).count_ones().max((c & 0b1100).count_ones())))
        .collect();
    Valuation::explicit(4, table).unwrap()
}

fn summarize(checks: &[CheckOutcome]) -> Outcome {
    let pass = checks.iter().all(|c| c.pass() && c.skipped == 0);
    let parts: Vec<String> = checks
        .iter()
        .map(|c| {
            let mut s = format!("{}: {} trials, {} violations", c.name, c.trials, c.violations.len());
            if c.skipped > 0 {
                s.push_str(&format!(", {} without provider output", c.skipped));
            }
            if let Some(v) = c.violations.first() {
                s.push_str(&format!(" (first: trial {} {})", v.trial, v.detail));
            }
            s
        })
        .collect();
    outcome(pass, parts.join("; "))
}

fn ac1() -> Outcome {
    let v = pair_max();
    let run = |s: &str| {
        omega(&GameQuery {
            sequence: s.parse().unwrap(),
            items: ItemSet::full(4),
            valuation: &v,
        })
        .unwrap()
        .omega
    };
    let (a, b) = (run("pqpq"), run("qppq"));
    outcome(
        a == Rational::ONE && b == Rational::from(2),
        format!("ω(pqpq) = {a} (want 1), ω(qppq) = {b} (want 2)"),
    )
}

fn ac2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2usize, 4, 8] {
        let (alloc, v) = all_shared_unit(d, d - 1);
        let vals: Vec<&dyn SetFunction> = vec![&v; d];
        let out = transform(&alloc, &vals, d).unwrap();
        let worst = out.report.agents.iter().map(|a| a.final_value).min().unwrap();
        let bounds: Vec<Rational> = out.report.agents.iter().map(|a| a.bound).collect();
        let achieved = out
            .report
            .agents
            .iter()
            .map(|a| a.final_value - a.bound)
            .min()
            .unwrap();
        let best = oracle_best_allocation(&alloc, &vals, &bounds).unwrap().slack;
        let ok = worst == Rational::ZERO
            && bounds.iter().all(|b| *b == Rational::ZERO)
            && out.report.all_pass()
            && out.allocation.is_allocation()
            && achieved == Rational::ZERO
            && best == Rational::ZERO;
        pass &= ok;
        parts.push(format!("d={d}: worst {worst}, bound 0, oracle best slack {best}"));
    }
    outcome(pass, parts.join("; "))
}

fn ac3() -> Outcome {
    summarize(&[check_picking_game(SEED, 500, 6)])
}

fn ac4() -> Outcome {
    let v = pair_max();
    let wq = omega_alternating(Player::Q, ItemSet::full(4), &v).unwrap().omega;
    let mms2 = mms(ItemSet::full(4), &v, 2).unwrap();
    outcome(
        wq == Rational::ONE && mms2 == Rational::from(2) && wq >= mms2 / Rational::from(2),
        format!("ω(S_q) = {wq} < MMS2 = {mms2}; ½·MMS2 = {} holds with equality", mms2 / Rational::from(2)),
    )
}

fn ac5() -> Outcome {
    summarize(&[check_token_game(SEED, 200, 6, 8)])
}

fn ac6() -> Outcome {
    summarize(&[
        check_transform(SEED, 200, 4, 5, 6),
        check_transform_vector(SEED, 200, &[2, 2, 4, 4], 6),
    ])
}

fn ac7() -> Outcome {
    summarize(&[
        check_oracle_omega(SEED, 50, 2),
        check_oracle_omega(SEED, 50, 3),
        check_oracle_omega(SEED, 50, 4),
    ])
}

fn ac8() -> Outcome {
    summarize(&[check_mms(SEED, 100, 6)])
}

fn ac9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, want) in [
        (BigUint::from(5u32), r(1, 6)),
        (BigUint::from(1805u32), r(1, 14)),
        (BigUint::from(10u32).pow(50), r(1, 30)),
    ] {
        let g = guarantee_for_n(&n);
        pass &= g.alpha == want;
        parts.push(format!("n={}: d={}, α={}", g.n, g.d, g.alpha));
    }
    let seq = n_sequence(6);
    let head: Vec<BigUint> = [2u32, 6, 42, 1806].iter().map(|&x| x.into()).collect();
    pass &= seq[..4] == head[..];
    for d in 2..=6usize {
        let lower = BigUint::from(1u32) << (1u64 << (d - 1));
        pass &= seq[d - 1] > lower;
    }
    parts.push("n_2..n_4 = 6, 42, 1806; n_d > 2^(2^(d-1)) for d = 2..6".into());
    for n in [
        BigUint::from(4u32),
        BigUint::from(16u32),
        BigUint::from(1u32 << 16),
        BigUint::from(10u32).pow(50),
    ] {
        let g = guarantee_for_n(&n);
        pass &= g.floor_check == FloorCheck::Holds;
        parts.push(format!("floor at n={}: {} {:?}", g.n, g.guarantee, g.floor_check));
    }
    outcome(pass, parts.join("; "))
}

fn ac10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();

    let v1 = Valuation::additive_ints(&[10, 1, 1]).unwrap();
    let v2 = Valuation::additive_ints(&[1, 1, 1]).unwrap();
    let vals: Vec<&dyn SetFunction> = vec![&v1, &v2];
    let report = sampling_pipeline(3, &vals, &BruteProvider, r(1, 2), 2).unwrap();
    let worked = report.alpha == r(1, 6)
        && report.agents[0].mms == Rational::from(2)
        && report.agents[1].mms == Rational::ONE
        && report.peeled.first() == Some(&(0, 0))
        && report.all_pass();
    pass &= worked;
    parts.push(format!(
        "worked example: α={}, peeled {:?}, values {:?}",
        report.alpha,
        report.peeled,
        report.agents.iter().map(|a| a.value.to_string()).collect::<Vec<_>>()
    ));

    let random = summarize(&[
        check_pipeline(SEED, 100, r(1, 2), 2, 3, 5),
        check_pipeline(SEED, 100, Rational::ONE, 2, 3, 5),
    ]);
    pass &= random.pass;
    parts.push(random.detail);

    let scenario = group_scenario();
    pass &= scenario.pass;
    parts.push(scenario.detail);
    outcome(pass, parts.join("; "))
}

/// Eight agents in two groups of four. Each group gets a width-1 half-MMS
/// allocation by brute force; merged they form a width-2 multi-allocation.
fn group_scenario() -> Outcome {
    let m = 10;
    let mut rng = seeded(SEED);
    let vals: Vec<Valuation> = (0..8)
        .map(|_| random_valuation(&mut rng, Family::Xos, m).unwrap())
        .collect();
    let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
    let items = ItemSet::full(m);
    let half = r(1, 2);
    let groups = vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]];

    let mut bundles = vec![ItemSet::EMPTY; 8];
    for group in &groups {
        let gvals: Vec<&dyn SetFunction> = group.iter().map(|&i| refs[i]).collect();
        let Some(found) = brute_multi_provider(m, items, &gvals, half, 1).unwrap() else {
            return outcome(false, "group scenario: no half-MMS allocation for a group");
        };
        for (k, &i) in group.iter().enumerate() {
            bundles[i] = found.bundle(k);
        }
    }
    let merged = MultiAllocation::new(m, bundles).unwrap();
    let mut pass = merged.width() <= 2;
    let mms8: Vec<Rational> = refs.iter().map(|v| mms(items, *v, 8).unwrap()).collect();
    for i in 0..8 {
        pass &= refs[i].value(merged.bundle(i)) >= half * mms8[i];
    }
    let out = transform(&merged, &refs, 2).unwrap();
    pass &= out.report.all_pass() && out.allocation.is_allocation();
    for a in &out.report.agents {
        let from_half = width_bound(half * mms8[a.agent], max_item_value(refs[a.agent], merged.bundle(a.agent)), 2);
        pass &= a.final_value >= from_half;
    }

    let report = sampling_pipeline(m, &refs, &GroupSplitProvider { groups }, half, 2);
    let detail = match &report {
        Ok(rep) => {
            pass &= rep.all_pass() && rep.alpha == r(1, 6);
            format!(
                "group scenario: merged width {}, transform certified; pipeline peeled {}, survivors {:?}, all ≥ MMS/6: {}",
                merged.width(),
                rep.peeled.len(),
                rep.survivors,
                rep.all_pass()
            )
        }
        Err(e) => {
            pass = false;
            format!("group scenario pipeline error: {e}")
        }
    };
    outcome(pass, detail)
}

fn main() -> ExitCode {
    type Criterion = (&'static str, &'static str, Option<Duration>, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("AC1", "pair-max fixtures", Some(Duration::from_secs(1)), ac1),
        ("AC2", "tightness fixture", Some(Duration::from_secs(5)), ac2),
        ("AC3", "picking-game properties", Some(Duration::from_secs(60)), ac3),
        ("AC4", "half-factor discrepancy fixture", Some(Duration::from_secs(1)), ac4),
        ("AC5", "token-game certification", Some(Duration::from_secs(120)), ac5),
        ("AC6", "transform certification", Some(Duration::from_secs(120)), ac6),
        ("AC7", "oracle equivalence", Some(Duration::from_secs(30)), ac7),
        ("AC8", "MMS properties", None, ac8),
        ("AC9", "guarantee arithmetic", None, ac9),
        ("AC10", "sampling pipeline", Some(Duration::from_secs(120)), ac10),
    ];
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let limit_text = limit.map_or("no limit".to_string(), |l| format!("limit {}s", l.as_secs()));
        println!(
            "[{}] {id} {name} ({:.2}s, {limit_text}){}: {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { " TIME LIMIT EXCEEDED" },
            out.detail
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

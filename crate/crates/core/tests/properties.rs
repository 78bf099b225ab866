//! Property tests over randomly generated instances. Each case draws a seed
//! and builds its instance with the harness generators.

use proptest::prelude::*;
use rand::Rng;

use multialloc::harness::generate::{random_multi_allocation, random_valuation, seeded, Family};
use multialloc::harness::instance::InstanceFile;
use multialloc::harness::oracle::{oracle_mms, oracle_omega};
use multialloc::harness::report::{AgentRow, RunReport};
use multialloc::mms::mms;
use multialloc::picking_game::{omega, omega_alternating, GameQuery, PickSequence, Player};
use multialloc::reduction::{halving_chain_bound, transform};
use multialloc::valuations::{conjugate, marginal_delta, max_item_value};
use multialloc::{ItemSet, Rational, SetFunction, Valuation};

const SUBADDITIVE: [Family; 3] = [Family::Xos, Family::Truncated, Family::Explicit];

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(SUBADDITIVE.to_vec())
}

fn valuation(family: Family, m: usize, seed: u64) -> Option<Valuation> {
    random_valuation(&mut seeded(seed), family, m).ok()
}

fn two() -> Rational {
    Rational::from(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn xos_is_monotone_and_subadditive(seed: u64, m in 1usize..=6) {
        let v = valuation(Family::Xos, m, seed).unwrap();
        for s in ItemSet::full(m).subsets() {
            for t in ItemSet::full(m).subsets() {
                prop_assert!(v.value(s) + v.value(t) >= v.value(s.union(t)));
                if s.is_subset(t) {
                    prop_assert!(v.value(s) <= v.value(t));
                }
            }
        }
    }

    #[test]
    fn conjugate_is_an_involution_on_additive(seed: u64, m in 1usize..=8, mask: u64) {
        let v = valuation(Family::Additive, m, seed).unwrap();
        let items = ItemSet::from_bits(mask).intersection(ItemSet::full(m));
        let once = conjugate(&v, items);
        let twice = conjugate(&once, items);
        for t in items.subsets() {
            prop_assert_eq!(twice.value(t), v.value(t));
        }
    }

    #[test]
    fn subadditive_dominates_its_conjugate(f in family(), seed: u64, m in 1usize..=6, mask: u64) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::from_bits(mask).intersection(ItemSet::full(m));
        let c = conjugate(&v, items);
        for t in items.subsets() {
            prop_assert!(v.value(t) >= c.value(t));
        }
    }

    #[test]
    fn marginal_delta_at_most_max_item(f in family(), seed: u64, m in 1usize..=8) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::full(m);
        prop_assert!(marginal_delta(&v, items) <= max_item_value(&v, items));
    }

    #[test]
    fn evaluation_is_deterministic(f in family(), seed: u64, m in 1usize..=8, mask: u64) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let s = ItemSet::from_bits(mask).intersection(ItemSet::full(m));
        prop_assert_eq!(v.eval(s).unwrap(), v.eval(s).unwrap());
    }

    #[test]
    fn first_mover_never_worse(seed: u64, m in 0usize..=6, f in prop::sample::select(Family::ALL.to_vec())) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::full(m);
        let wp = omega_alternating(Player::P, items, &v).unwrap().omega;
        let wq = omega_alternating(Player::Q, items, &v).unwrap().omega;
        prop_assert!(wp >= wq);
    }

    #[test]
    fn alternating_games_cover_the_whole_value(f in family(), seed: u64, m in 0usize..=6) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::full(m);
        let wp = omega_alternating(Player::P, items, &v).unwrap().omega;
        let wq = omega_alternating(Player::Q, items, &v).unwrap().omega;
        let total = v.value(items);
        prop_assert!(wp + wq >= total);
        prop_assert!(wp >= total / two());
        prop_assert!(wq >= (total - max_item_value(&v, items)) / two());
        prop_assert!(wq >= (total - marginal_delta(&v, items)) / two());
        prop_assert!(wq >= mms(items, &v, 2).unwrap() / two());
    }

    #[test]
    fn memoized_omega_matches_plain_minimax(f in family(), seed: u64, m in 0usize..=4) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::full(m);
        for sequence in PickSequence::all_of_length(m) {
            let fast = omega(&GameQuery { sequence: sequence.clone(), items, valuation: &v }).unwrap().omega;
            prop_assert_eq!(fast, oracle_omega(&sequence, items, &v).unwrap());
        }
    }

    #[test]
    fn policy_holds_against_random_adversaries(f in family(), seed: u64, m in 1usize..=6, turns: u8) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::full(m);
        let sequence = PickSequence::new(
            (0..m).map(|k| if turns >> k & 1 == 1 { Player::P } else { Player::Q }).collect(),
        );
        let game = omega(&GameQuery { sequence, items, valuation: &v }).unwrap();
        let mut rng = seeded(seed ^ 0x5eed);
        for _ in 0..100 {
            let held = game
                .replay(|state| {
                    let options: Vec<usize> = state.remaining.iter().collect();
                    options[rng.gen_range(0..options.len())]
                })
                .unwrap();
            prop_assert!(v.value(held) >= game.omega);
        }
    }

    #[test]
    fn mms_decreases_with_parts_and_matches_oracle(f in family(), seed: u64, m in 0usize..=6) {
        let Some(v) = valuation(f, m, seed) else { return Ok(()) };
        let items = ItemSet::full(m);
        let mut previous = None;
        for n in 1..=m + 1 {
            let value = mms(items, &v, n).unwrap();
            prop_assert_eq!(value, oracle_mms(items, &v, n).unwrap());
            if let Some(p) = previous {
                prop_assert!(p >= value);
            }
            previous = Some(value);
        }
    }

    #[test]
    fn transform_is_certified(
        f in family(),
        seed: u64,
        n in 1usize..=4,
        m in 1usize..=6,
        d in 1usize..=4,
    ) {
        let mut rng = seeded(seed);
        let mut vals = Vec::new();
        for _ in 0..n {
            match random_valuation(&mut rng, f, m) {
                Ok(v) => vals.push(v),
                Err(_) => return Ok(()),
            }
        }
        let alloc = random_multi_allocation(&mut rng, n, m, d.min(n));
        let refs: Vec<&dyn SetFunction> = vals.iter().map(|v| v as &dyn SetFunction).collect();
        let out = transform(&alloc, &refs, d).unwrap();
        prop_assert!(out.allocation.is_allocation());
        prop_assert!(out.allocation.is_refinement_of(&alloc));
        prop_assert!(out.report.all_pass());
        for pair in out.report.widths.windows(2) {
            prop_assert!(pair[1] <= pair[0].div_ceil(2));
        }
        for a in &out.report.agents {
            prop_assert!(a.recheck());
            prop_assert_eq!(a.final_value, refs[a.agent].value(out.allocation.bundle(a.agent)));
            prop_assert_eq!(
                halving_chain_bound(a.initial, a.delta, out.report.depth),
                a.bound
            );
        }
    }

    #[test]
    fn instance_files_round_trip(f in prop::sample::select(Family::ALL.to_vec()), seed: u64, n in 1usize..=4, m in 0usize..=6, d in 1usize..=4) {
        let mut rng = seeded(seed);
        let mut vals = Vec::new();
        for _ in 0..n {
            match random_valuation(&mut rng, f, m) {
                Ok(v) => vals.push(v),
                Err(_) => return Ok(()),
            }
        }
        let alloc = random_multi_allocation(&mut rng, n, m, d.min(n));
        let file = InstanceFile::new(m, &vals).with_multi_allocation(&alloc, d);
        let parsed = InstanceFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(&parsed, &file);
        prop_assert_eq!(parsed.valuations().unwrap(), vals);
        prop_assert_eq!(parsed.multi_allocation().unwrap(), Some((alloc, d)));
    }

    #[test]
    fn reports_reverify_from_serialized_numbers(values in prop::collection::vec((0i64..50, 0i64..50, 1i64..5), 0..6)) {
        let mut report = RunReport::new("prop", b"input");
        for (agent, (value, bound, q)) in values.into_iter().enumerate() {
            let row = AgentRow::new(agent, None, Rational::from(value))
                .bound("bound", Rational::new(bound as i128, q as i128));
            report.push(row);
        }
        let parsed: RunReport = serde_json::from_str(&report.to_json()).unwrap();
        prop_assert_eq!(&parsed, &report);
        prop_assert!(parsed.reverify());
    }
}

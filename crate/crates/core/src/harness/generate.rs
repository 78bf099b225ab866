//! Seeded random instances. Every draw comes from a `ChaCha8Rng` seeded with
//! `seed_from_u64`; trial `t` of a suite uses stream `t` of the same seed.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::multigraph::MultiGraph;
use crate::rational::Rational;
use crate::valuations::{check_axioms, AxiomClass, Valuation};

use super::instance::InstanceFile;

pub const MAX_XOS_CLAUSES: usize = 4;
pub const MAX_WEIGHT: i64 = 8;
/// Truncated valuations are stored as tables.
pub const MAX_TRUNCATED_ITEMS: usize = 16;
pub const MAX_EXPLICIT_FAMILY_ITEMS: usize = 8;
pub const EXPLICIT_REJECTION_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Additive,
    Xos,
    Truncated,
    Explicit,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Additive,
        Family::Xos,
        Family::Truncated,
        Family::Explicit,
    ];

    pub fn max_items(self) -> usize {
        match self {
            Family::Additive | Family::Xos => crate::itemset::MAX_ITEMS,
            Family::Truncated => MAX_TRUNCATED_ITEMS,
            Family::Explicit => MAX_EXPLICIT_FAMILY_ITEMS,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Additive => "additive",
            Family::Xos => "xos",
            Family::Truncated => "truncated",
            Family::Explicit => "explicit",
        })
    }
}

impl FromStr for Family {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| GenerateError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("unknown family {0:?}; expected additive, xos, truncated or explicit")]
    UnknownFamily(String),
    #[error("family {family} supports at most {limit} items, asked for {items}")]
    TooManyItems {
        family: Family,
        items: usize,
        limit: usize,
    },
    #[error("no subadditive explicit valuation found within {0} attempts")]
    BudgetExhausted(usize),
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn weight<R: Rng>(rng: &mut R) -> Rational {
    Rational::from(rng.gen_range(0..=MAX_WEIGHT))
}

pub fn random_valuation<R: Rng>(
    rng: &mut R,
    family: Family,
    m: usize,
) -> Result<Valuation, GenerateError> {
    if m > family.max_items() {
        return Err(GenerateError::TooManyItems {
            family,
            items: m,
            limit: family.max_items(),
        });
    }
    let v = match family {
        Family::Additive => Valuation::additive((0..m).map(|_| weight(rng)).collect()),
        Family::Xos => {
            let k = rng.gen_range(1..=MAX_XOS_CLAUSES);
            Valuation::xos((0..k).map(|_| (0..m).map(|_| weight(rng)).collect()).collect())
        }
        Family::Truncated => {
            let weights: Vec<Rational> = (0..m).map(|_| weight(rng)).collect();
            let total: Rational = weights.iter().copied().sum();
            let cap = Rational::from(rng.gen_range(0..=total.numer() as i64 + 1));
            truncated(&weights, cap)
        }
        Family::Explicit => return random_explicit(rng, m),
    };
    Ok(v.expect("generated parameters are valid"))
}

/// `v(S) = min(Σ_{e∈S} w_e, cap)` as a table.
pub fn truncated(
    weights: &[Rational],
    cap: Rational,
) -> Result<Valuation, crate::valuations::ValuationError> {
    let m = weights.len();
    let table = (0..1u64 << m)
        .map(|c| {
            let sum: Rational = ItemSet::from_bits(c).iter().map(|e| weights[e]).sum();
            sum.min(cap)
        })
        .collect();
    Valuation::explicit(m, table)
}

/// Random singleton and pair values, closed upward by taking the best
/// singleton or pair inside each set; rejected unless subadditive.
fn random_explicit<R: Rng>(rng: &mut R, m: usize) -> Result<Valuation, GenerateError> {
    for _ in 0..EXPLICIT_REJECTION_BUDGET {
        let single: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=MAX_WEIGHT)).collect();
        // A pair exceeds its two singletons (breaking subadditivity) with
        // probability 1/(2·pairs), so about 40% of draws get rejected.
        let pairs = (m * m.saturating_sub(1) / 2).max(1) as f64;
        let mut pair = vec![vec![0i64; m]; m];
        for a in 0..m {
            for b in a + 1..m {
                let lo = single[a].max(single[b]);
                let hi = single[a] + single[b];
                let bump = i64::from(rng.gen_bool(0.5 / pairs));
                pair[a][b] = rng.gen_range(lo..=hi) + bump;
            }
        }
        let table = (0..1u64 << m)
            .map(|c| {
                let s: Vec<usize> = ItemSet::from_bits(c).iter().collect();
                let mut best = s.iter().map(|&e| single[e]).max().unwrap_or(0);
                for (k, &a) in s.iter().enumerate() {
                    for &b in &s[k + 1..] {
                        best = best.max(pair[a][b]);
                    }
                }
                Rational::from(best)
            })
            .collect();
        let v = Valuation::explicit(m, table).expect("closure is monotone");
        if check_axioms(&v, AxiomClass::Subadditive)
            .expect("within table limits")
            .pass()
        {
            return Ok(v);
        }
    }
    Err(GenerateError::BudgetExhausted(EXPLICIT_REJECTION_BUDGET))
}

/// Each item gets a uniformly random number of holders in `0..=min(d, n)`,
/// drawn as a uniform subset of that size.
pub fn random_multi_allocation<R: Rng>(rng: &mut R, n: usize, m: usize, d: usize) -> MultiAllocation {
    let mut bundles = vec![ItemSet::EMPTY; n];
    for item in 0..m {
        let k = rng.gen_range(0..=d.min(n));
        for agent in sample(rng, n, k) {
            bundles[agent].insert(item);
        }
    }
    MultiAllocation::new(m, bundles).expect("items are in range")
}

/// Multi-allocation where item `e` is held by at most `d_vec[i]` agents for
/// every holder `i`.
pub fn random_vector_multi_allocation<R: Rng>(
    rng: &mut R,
    d_vec: &[usize],
    m: usize,
) -> MultiAllocation {
    let n = d_vec.len();
    let mut bundles = vec![ItemSet::EMPTY; n];
    for item in 0..m {
        let cap = rng.gen_range(0..=*d_vec.iter().max().unwrap_or(&0));
        let eligible: Vec<usize> = (0..n).filter(|&i| d_vec[i] >= cap).collect();
        let k = cap.min(eligible.len());
        for idx in sample(rng, eligible.len(), k) {
            bundles[eligible[idx]].insert(item);
        }
    }
    MultiAllocation::new(m, bundles).expect("items are in range")
}

/// Random multigraph on `n` vertices with `m` edges (item `e` is edge `e`)
/// and every vertex of degree at most `max_degree`. Stops early if no pair
/// has room left.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, m: usize, max_degree: usize) -> MultiGraph {
    let mut graph = MultiGraph::new(n);
    let mut degree = vec![0; n];
    for item in 0..m {
        let open: Vec<usize> = (0..n).filter(|&v| degree[v] < max_degree).collect();
        if open.len() < 2 {
            break;
        }
        let pick = sample(rng, open.len(), 2);
        let (a, b) = (open[pick.index(0)], open[pick.index(1)]);
        graph.add_edge(a, b, item).expect("fresh item ids never collide");
        degree[a] += 1;
        degree[b] += 1;
    }
    graph
}

/// Random instance of `n` agents over `m` items from one family, optionally
/// with a random multi-allocation of width at most `d`.
pub fn generate(
    family: Family,
    n: usize,
    m: usize,
    seed: u64,
    d: Option<usize>,
) -> Result<InstanceFile, GenerateError> {
    let mut rng = seeded(seed);
    let vals = (0..n)
        .map(|_| random_valuation(&mut rng, family, m))
        .collect::<Result<Vec<_>, _>>()?;
    let file = InstanceFile::new(m, &vals);
    Ok(match d {
        Some(d) => {
            let alloc = random_multi_allocation(&mut rng, n, m, d);
            file.with_multi_allocation(&alloc, d)
        }
        None => file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuations::SetFunction;

    #[test]
    fn deterministic() {
        for family in Family::ALL {
            let a = generate(family, 3, 5, 42, Some(2)).unwrap().to_json();
            let b = generate(family, 3, 5, 42, Some(2)).unwrap().to_json();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn families_are_subadditive() {
        let mut rng = seeded(7);
        for family in Family::ALL {
            for _ in 0..20 {
                let v = random_valuation(&mut rng, family, 5).unwrap();
                let tab = Valuation::tabulate(&v).unwrap();
                assert!(check_axioms(&tab, AxiomClass::Subadditive).unwrap().pass());
            }
        }
    }

    #[test]
    fn truncated_above_total_is_additive() {
        let w: Vec<Rational> = [3, 1, 4].iter().map(|&x| Rational::from(x)).collect();
        let t = truncated(&w, Rational::from(8)).unwrap();
        let a = Valuation::additive(w).unwrap();
        for s in ItemSet::full(3).subsets() {
            assert_eq!(t.value(s), a.value(s));
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            generate(Family::Explicit, 1, 9, 0, None),
            Err(GenerateError::TooManyItems { .. })
        ));
        assert_eq!("xos".parse::<Family>().unwrap(), Family::Xos);
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn random_structures_respect_bounds() {
        let mut rng = seeded(3);
        for _ in 0..50 {
            let a = random_multi_allocation(&mut rng, 5, 6, 4);
            assert!(a.width() <= 4);
            let g = random_graph(&mut rng, 6, 16, 8);
            assert!((0..6).all(|v| g.degree(v) <= 8));
            let v = random_vector_multi_allocation(&mut rng, &[2, 2, 4, 4], 6);
            for i in 0..4 {
                for e in v.bundle(i) {
                    assert!(v.holder_count(e) <= [2, 2, 4, 4][i]);
                }
            }
        }
    }
}

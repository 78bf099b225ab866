//! Versioned JSON instance files. Numbers are `"p/q"` strings; explicit
//! valuations are keyed by decimal subset codes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::multigraph::{GraphError, MultiGraph};
use crate::rational::Rational;
use crate::valuations::{SetFunction, Valuation, ValuationError};

pub const INSTANCE_VERSION: &str = "multialloc-instance/1";

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported instance version {0:?}")]
    Version(String),
    #[error("instance declares {declared} {what} but lists {found}")]
    Count {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("valuation of agent {agent}: {source}")]
    Valuation {
        agent: usize,
        source: ValuationError,
    },
    #[error("valuation of agent {agent} covers {got} items, instance has {items}")]
    ValuationItems {
        agent: usize,
        got: usize,
        items: usize,
    },
    #[error("item id {item} out of range for {items} items")]
    ItemOutOfRange { item: usize, items: usize },
    #[error("declared d = {d} but the bundles have width {width}")]
    Width { d: usize, width: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuationSpec {
    Additive(Vec<Rational>),
    Xos(Vec<Vec<Rational>>),
    Explicit(BTreeMap<u64, Rational>),
}

impl ValuationSpec {
    pub fn from_valuation(v: &Valuation) -> Self {
        match v {
            Valuation::Additive { weights } => ValuationSpec::Additive(weights.clone()),
            Valuation::Xos { clauses } => ValuationSpec::Xos(clauses.clone()),
            Valuation::Explicit { table, .. } => ValuationSpec::Explicit(
                table
                    .iter()
                    .enumerate()
                    .map(|(code, &value)| (code as u64, value))
                    .collect(),
            ),
        }
    }

    pub fn to_valuation(&self, items: usize) -> Result<Valuation, ValuationError> {
        match self {
            ValuationSpec::Additive(w) => Valuation::additive(w.clone()),
            ValuationSpec::Xos(c) => Valuation::xos(c.clone()),
            ValuationSpec::Explicit(codes) => Valuation::explicit_from_codes(items, codes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiAllocationSpec {
    pub d: usize,
    /// Item ids per agent.
    pub bundles: Vec<Vec<usize>>,
}

/// `[a, b, item]`
pub type EdgeSpec = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: String,
    pub agents: usize,
    pub items: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_names: Option<Vec<String>>,
    pub valuations: Vec<ValuationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_allocation: Option<MultiAllocationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Vec<EdgeSpec>>,
}

impl InstanceFile {
    pub fn new(items: usize, valuations: &[Valuation]) -> Self {
        InstanceFile {
            version: INSTANCE_VERSION.to_string(),
            agents: valuations.len(),
            items,
            item_names: None,
            valuations: valuations.iter().map(ValuationSpec::from_valuation).collect(),
            multi_allocation: None,
            graph: None,
        }
    }

    pub fn with_multi_allocation(mut self, alloc: &MultiAllocation, d: usize) -> Self {
        self.multi_allocation = Some(MultiAllocationSpec {
            d,
            bundles: alloc.bundles().iter().map(|b| b.iter().collect()).collect(),
        });
        self
    }

    /// Stores the real edges of `graph`; auxiliary edges are dropped since
    /// padding is recomputed on load.
    pub fn with_graph(mut self, graph: &MultiGraph) -> Self {
        self.graph = Some(
            graph
                .edges()
                .iter()
                .filter_map(|e| e.item.map(|item| (e.a, e.b, item)))
                .collect(),
        );
        self
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    /// Checks every structural invariant, including that all parts parse.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.version != INSTANCE_VERSION {
            return Err(InstanceError::Version(self.version.clone()));
        }
        if self.valuations.len() != self.agents {
            return Err(InstanceError::Count {
                what: "agents",
                declared: self.agents,
                found: self.valuations.len(),
            });
        }
        if let Some(names) = &self.item_names {
            if names.len() != self.items {
                return Err(InstanceError::Count {
                    what: "items",
                    declared: self.items,
                    found: names.len(),
                });
            }
        }
        self.valuations()?;
        self.multi_allocation()?;
        self.graph()?;
        Ok(())
    }

    pub fn valuations(&self) -> Result<Vec<Valuation>, InstanceError> {
        self.valuations
            .iter()
            .enumerate()
            .map(|(agent, spec)| {
                let v = spec
                    .to_valuation(self.items)
                    .map_err(|source| InstanceError::Valuation { agent, source })?;
                if v.item_count() != self.items {
                    return Err(InstanceError::ValuationItems {
                        agent,
                        got: v.item_count(),
                        items: self.items,
                    });
                }
                Ok(v)
            })
            .collect()
    }

    /// The declared multi-allocation and its `d`, if any.
    pub fn multi_allocation(&self) -> Result<Option<(MultiAllocation, usize)>, InstanceError> {
        let Some(spec) = &self.multi_allocation else {
            return Ok(None);
        };
        if spec.bundles.len() != self.agents {
            return Err(InstanceError::Count {
                what: "bundles",
                declared: self.agents,
                found: spec.bundles.len(),
            });
        }
        let mut bundles = Vec::with_capacity(self.agents);
        for ids in &spec.bundles {
            let mut set = ItemSet::EMPTY;
            for &item in ids {
                if item >= self.items {
                    return Err(InstanceError::ItemOutOfRange {
                        item,
                        items: self.items,
                    });
                }
                set.insert(item);
            }
            bundles.push(set);
        }
        let alloc = MultiAllocation::new(self.items, bundles).map_err(|_| {
            InstanceError::ItemOutOfRange {
                item: self.items,
                items: self.items,
            }
        })?;
        let width = alloc.width();
        if width > spec.d {
            return Err(InstanceError::Width { d: spec.d, width });
        }
        Ok(Some((alloc, spec.d)))
    }

    pub fn graph(&self) -> Result<Option<MultiGraph>, InstanceError> {
        let Some(edges) = &self.graph else {
            return Ok(None);
        };
        let mut graph = MultiGraph::new(self.agents);
        for &(a, b, item) in edges {
            if item >= self.items {
                return Err(InstanceError::ItemOutOfRange {
                    item,
                    items: self.items,
                });
            }
            graph.add_edge(a, b, item)?;
        }
        Ok(Some(graph))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let vals = vec![
            Valuation::additive(vec![Rational::new(1, 2), Rational::from(3)]).unwrap(),
            Valuation::xos_ints(&[&[1, 0], &[0, 2]]).unwrap(),
            Valuation::explicit(
                2,
                vec![Rational::ZERO, Rational::ONE, Rational::ONE, Rational::ONE],
            )
            .unwrap(),
        ];
        let alloc = MultiAllocation::new(
            2,
            vec![ItemSet::full(2), ItemSet::singleton(0), ItemSet::singleton(1)],
        )
        .unwrap();
        let file = InstanceFile::new(2, &vals).with_multi_allocation(&alloc, 2);
        let text = file.to_json();
        assert!(text.contains("\"1/2\""));
        let back = InstanceFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.valuations().unwrap(), vals);
        assert_eq!(back.multi_allocation().unwrap(), Some((alloc, 2)));
    }

    #[test]
    fn rejects_bad_files() {
        let vals = vec![Valuation::additive_ints(&[1, 1]).unwrap()];
        let mut file = InstanceFile::new(2, &vals);
        file.version = "other".into();
        assert!(matches!(file.validate(), Err(InstanceError::Version(_))));

        let alloc = MultiAllocation::new(2, vec![ItemSet::full(2), ItemSet::full(2)]).unwrap();
        let vals2 = vec![vals[0].clone(), vals[0].clone()];
        let file = InstanceFile::new(2, &vals2).with_multi_allocation(&alloc, 1);
        assert!(matches!(
            file.validate(),
            Err(InstanceError::Width { d: 1, width: 2 })
        ));

        let text = r#"{"version":"multialloc-instance/1","agents":1,"items":3,
            "valuations":[{"additive":["1","2"]}]}"#;
        assert!(matches!(
            InstanceFile::from_json(text),
            Err(InstanceError::ValuationItems { .. })
        ));
    }

    #[test]
    fn explicit_codes_are_decimal_keys() {
        let text = r#"{"version":"multialloc-instance/1","agents":1,"items":1,
            "valuations":[{"explicit":{"0":"0","1":"5/2"}}]}"#;
        let file = InstanceFile::from_json(text).unwrap();
        let v = &file.valuations().unwrap()[0];
        assert_eq!(v.value(ItemSet::singleton(0)), Rational::new(5, 2));
    }
}

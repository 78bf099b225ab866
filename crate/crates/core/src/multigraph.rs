//! Width-2 multi-allocations as multigraphs, and the token walk/jump game
//! that orients their edges.
//!
//! Agents are vertices and each shared item is an edge between its two
//! holders. A token moves around the graph: the agent holding it picks one of
//! her unallocated incident edges and the token walks across it, or, when she
//! has none left, the token jumps to another vertex. Every agent plays the
//! maximin pick of the alternating game on her remaining incident items, valued
//! marginally to what she already holds, which secures her at least
//! `ω(S_q, M^i, v_i)`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::allocation::MultiAllocation;
use crate::itemset::ItemSet;
use crate::mms::{mms, MmsError};
use crate::picking_game::{omega_alternating, GameError, Player, MAX_GAME_ITEMS};
use crate::rational::Rational;
use crate::reduction::split_copies;
use crate::valuations::{marginal, max_item_value, SetFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {vertices} vertices")]
    VertexOutOfRange { vertex: usize, vertices: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} already has an edge for item {item}")]
    DuplicateItem { vertex: usize, item: usize },
    #[error("item {item} is held by {holders} agents; a graph needs width at most 2")]
    WidthTooLarge { item: usize, holders: usize },
    #[error("vertex {0} has odd degree; pad the graph first")]
    OddDegree(usize),
    #[error("vertex {vertex} has {count} real incident edges, above the limit of {limit}")]
    TooManyIncident {
        vertex: usize,
        count: usize,
        limit: usize,
    },
    #[error("expected {expected} valuations, got {got}")]
    ValuationCount { expected: usize, got: usize },
    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Mms(#[from] MmsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Item this edge stands for; `None` marks a zero-value auxiliary edge.
    pub item: Option<usize>,
}

impl Edge {
    pub fn is_auxiliary(&self) -> bool {
        self.item.is_none()
    }

    pub fn touches(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }

    pub fn other(&self, v: usize) -> usize {
        debug_assert!(self.touches(v));
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

/// Undirected multigraph; edge ids are indices into `edges()`.
///
/// Parallel edges are allowed, self-loops are not, and the real edges at any
/// one vertex stand for pairwise distinct items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl MultiGraph {
    pub fn new(vertex_count: usize) -> Self {
        MultiGraph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.vertex_count {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                vertices: self.vertex_count,
            })
        } else {
            Ok(())
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, item: usize) -> Result<usize, GraphError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        for v in [a, b] {
            if self.local_items(v).contains(item) {
                return Err(GraphError::DuplicateItem { vertex: v, item });
            }
        }
        self.edges.push(Edge {
            a,
            b,
            item: Some(item),
        });
        Ok(self.edges.len() - 1)
    }

    pub fn add_auxiliary(&mut self, a: usize, b: usize) -> Result<usize, GraphError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        self.edges.push(Edge { a, b, item: None });
        Ok(self.edges.len() - 1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.touches(v)).count()
    }

    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.touches(v))
            .map(|(id, _)| id)
    }

    /// Items of the real edges at `v` (the agent's local item set `M^v`).
    pub fn local_items(&self, v: usize) -> ItemSet {
        self.edges
            .iter()
            .filter(|e| e.touches(v))
            .filter_map(|e| e.item)
            .collect()
    }

    pub fn auxiliary_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_auxiliary()).count()
    }

    pub fn odd_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count)
            .filter(|&v| self.degree(v) % 2 == 1)
            .collect()
    }
}

/// Builds the graph of a width-2 multi-allocation. Items with two holders
/// become edges (in item order); items with one holder are returned as
/// `(agent, item)` pairs for direct allocation; unheld items are dropped.
pub fn from_two_multi(
    alloc: &MultiAllocation,
) -> Result<(MultiGraph, Vec<(usize, usize)>), GraphError> {
    for item in 0..alloc.item_count() {
        let holders = alloc.holder_count(item);
        if holders > 2 {
            return Err(GraphError::WidthTooLarge { item, holders });
        }
    }
    let copies = split_copies(alloc);
    let mut graph = MultiGraph::new(alloc.agent_count());
    let mut direct = Vec::new();
    for copy in copies.copies() {
        match copy.holders[..] {
            [a] => direct.push((a, copy.source)),
            [a, b] => {
                graph.add_edge(a, b, copy.source)?;
            }
            _ => unreachable!("copies have one or two holders"),
        }
    }
    Ok((graph, direct))
}

/// Pairs odd-degree vertices in increasing order with auxiliary edges.
pub fn pad_even(graph: &MultiGraph) -> MultiGraph {
    let mut padded = graph.clone();
    let odd = graph.odd_vertices();
    debug_assert!(odd.len() % 2 == 0, "handshake lemma");
    for pair in odd.chunks(2) {
        padded
            .add_auxiliary(pair[0], pair[1])
            .expect("odd vertices are distinct and in range");
    }
    padded
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenEvent {
    Jump(usize),
    Pick { vertex: usize, edge: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenTrace {
    pub events: Vec<TokenEvent>,
}

impl TokenTrace {
    /// Line-oriented log: `JUMP v` or `PICK v edge_id`, one event per line.
    pub fn to_log(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TokenTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for event in &self.events {
            match event {
                TokenEvent::Jump(v) => writeln!(f, "JUMP {v}")?,
                TokenEvent::Pick { vertex, edge } => writeln!(f, "PICK {vertex} {edge}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for TokenTrace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut events = Vec::new();
        for (no, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |x: &str| {
                x.parse::<usize>()
                    .map_err(|_| format!("line {}: bad number {x:?}", no + 1))
            };
            let event = match parts[..] {
                ["JUMP", v] => TokenEvent::Jump(num(v)?),
                ["PICK", v, e] => TokenEvent::Pick {
                    vertex: num(v)?,
                    edge: num(e)?,
                },
                _ => return Err(format!("line {}: unrecognized event {line:?}", no + 1)),
            };
            events.push(event);
        }
        Ok(TokenTrace { events })
    }
}

/// Receiving endpoint of every edge, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub receivers: Vec<usize>,
}

impl Orientation {
    pub fn validate(&self, graph: &MultiGraph) -> Result<(), GraphError> {
        if self.receivers.len() != graph.edges().len() {
            return Err(GraphError::InvalidOrientation(format!(
                "{} receivers for {} edges",
                self.receivers.len(),
                graph.edges().len()
            )));
        }
        for (id, (&r, e)) in self.receivers.iter().zip(graph.edges()).enumerate() {
            if !e.touches(r) {
                return Err(GraphError::InvalidOrientation(format!(
                    "edge {id} ({}-{}) given to non-endpoint {r}",
                    e.a, e.b
                )));
            }
        }
        Ok(())
    }

    /// Real items received by each vertex; auxiliary edges are left out.
    pub fn bundles(&self, graph: &MultiGraph) -> Vec<ItemSet> {
        let mut out = vec![ItemSet::EMPTY; graph.vertex_count()];
        for (&r, e) in self.receivers.iter().zip(graph.edges()) {
            if let Some(item) = e.item {
                out[r].insert(item);
            }
        }
        out
    }
}

/// Where the token goes when the current vertex is exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpRule {
    /// Lowest-index vertex with an unallocated incident edge.
    #[default]
    Lowest,
    /// Uniformly random such vertex, from a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TokenGameConfig {
    pub start: usize,
    pub jump: JumpRule,
}

/// Runs the token game from `start` with the lowest-index jump rule.
pub fn token_game(
    graph: &MultiGraph,
    valuations: &[&dyn SetFunction],
    start: usize,
) -> Result<(Orientation, TokenTrace), GraphError> {
    let holdings = vec![ItemSet::EMPTY; graph.vertex_count()];
    token_game_with(
        graph,
        valuations,
        &holdings,
        TokenGameConfig {
            start,
            jump: JumpRule::Lowest,
        },
    )
}

/// Token game where agent `i` already owns `holdings[i]` (items outside the
/// graph). Her picks maximize value marginal to those holdings plus whatever
/// she has won so far.
pub fn token_game_with(
    graph: &MultiGraph,
    valuations: &[&dyn SetFunction],
    holdings: &[ItemSet],
    config: TokenGameConfig,
) -> Result<(Orientation, TokenTrace), GraphError> {
    let n = graph.vertex_count();
    if valuations.len() != n || holdings.len() != n {
        return Err(GraphError::ValuationCount {
            expected: n,
            got: valuations.len().min(holdings.len()),
        });
    }
    if let Some(&v) = graph.odd_vertices().first() {
        return Err(GraphError::OddDegree(v));
    }
    for v in 0..n {
        let count = graph.local_items(v).len();
        if count > MAX_GAME_ITEMS {
            return Err(GraphError::TooManyIncident {
                vertex: v,
                count,
                limit: MAX_GAME_ITEMS,
            });
        }
    }
    if graph.edges().is_empty() {
        return Ok((Orientation { receivers: vec![] }, TokenTrace::default()));
    }
    if config.start >= n {
        return Err(GraphError::VertexOutOfRange {
            vertex: config.start,
            vertices: n,
        });
    }

    let edges = graph.edges();
    let mut receivers: Vec<Option<usize>> = vec![None; edges.len()];
    let mut held = holdings.to_vec();
    let mut trace = TokenTrace::default();
    let mut rng = match config.jump {
        JumpRule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        JumpRule::Lowest => None,
    };
    let open_at = |receivers: &[Option<usize>], v: usize| -> Vec<usize> {
        graph
            .incident(v)
            .filter(|&id| receivers[id].is_none())
            .collect()
    };
    let jump_target = |receivers: &[Option<usize>], rng: &mut Option<ChaCha8Rng>| {
        let live: Vec<usize> = (0..n).filter(|&v| !open_at(receivers, v).is_empty()).collect();
        match rng {
            None => live[0],
            Some(rng) => *live.choose(rng).expect("some edge is unallocated"),
        }
    };

    let mut token = if open_at(&receivers, config.start).is_empty() {
        jump_target(&receivers, &mut rng)
    } else {
        config.start
    };
    trace.events.push(TokenEvent::Jump(token));
    let mut remaining = edges.len();

    while remaining > 0 {
        let open = open_at(&receivers, token);
        if open.is_empty() {
            token = jump_target(&receivers, &mut rng);
            trace.events.push(TokenEvent::Jump(token));
            continue;
        }
        let real: ItemSet = open.iter().filter_map(|&id| edges[id].item).collect();
        let edge = if real.is_empty() {
            open[0]
        } else {
            let view = marginal(valuations[token], held[token]);
            let game = omega_alternating(Player::P, real, &view)?;
            let item = game.best_pick(game.initial_state())?;
            *open
                .iter()
                .find(|&&id| edges[id].item == Some(item))
                .expect("picked item has an open edge")
        };
        receivers[edge] = Some(token);
        if let Some(item) = edges[edge].item {
            held[token].insert(item);
        }
        trace.events.push(TokenEvent::Pick {
            vertex: token,
            edge,
        });
        remaining -= 1;
        token = edges[edge].other(token);
    }

    let receivers = receivers
        .into_iter()
        .map(|r| r.expect("all edges allocated"))
        .collect();
    Ok((Orientation { receivers }, trace))
}

/// Checks the structural invariants of a trace against its graph and returns
/// the orientation it induces.
pub fn validate_trace(graph: &MultiGraph, trace: &TokenTrace) -> Result<Orientation, String> {
    let edges = graph.edges();
    let mut receivers: Vec<Option<usize>> = vec![None; edges.len()];
    let mut token: Option<usize> = None;
    let mut phase_start: Option<usize> = None;
    let open_at = |receivers: &[Option<usize>], v: usize| {
        graph.incident(v).any(|id| receivers[id].is_none())
    };
    for (k, event) in trace.events.iter().enumerate() {
        match *event {
            TokenEvent::Jump(v) => {
                if v >= graph.vertex_count() {
                    return Err(format!("event {k}: jump to missing vertex {v}"));
                }
                if let Some(t) = token {
                    if open_at(&receivers, t) {
                        return Err(format!("event {k}: jump away from {t} which still has edges"));
                    }
                    if Some(t) != phase_start {
                        return Err(format!(
                            "event {k}: phase started at {:?} but ended at {t}",
                            phase_start
                        ));
                    }
                }
                if !open_at(&receivers, v) {
                    return Err(format!("event {k}: jump into exhausted vertex {v}"));
                }
                token = Some(v);
                phase_start = Some(v);
            }
            TokenEvent::Pick { vertex, edge } => {
                if token != Some(vertex) {
                    return Err(format!("event {k}: pick by {vertex} without the token"));
                }
                let Some(e) = edges.get(edge) else {
                    return Err(format!("event {k}: unknown edge {edge}"));
                };
                if !e.touches(vertex) {
                    return Err(format!("event {k}: edge {edge} not incident to {vertex}"));
                }
                if receivers[edge].is_some() {
                    return Err(format!("event {k}: edge {edge} picked twice"));
                }
                receivers[edge] = Some(vertex);
                token = Some(e.other(vertex));
            }
        }
    }
    if let Some(t) = token {
        if Some(t) != phase_start {
            return Err(format!("final phase started at {:?} but ended at {t}", phase_start));
        }
    }
    let receivers = receivers
        .into_iter()
        .enumerate()
        .map(|(id, r)| r.ok_or_else(|| format!("edge {id} never picked")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Orientation { receivers })
}

/// Within a phase, between two consecutive picks by the same vertex exactly
/// one of its incident edges was taken by someone else (the walk back in).
pub fn check_local_alternation(graph: &MultiGraph, trace: &TokenTrace) -> Result<(), String> {
    let n = graph.vertex_count();
    // Edges at v taken by others since v's last pick in the current phase.
    let mut taken_since: Vec<Option<usize>> = vec![None; n];
    for event in &trace.events {
        match *event {
            TokenEvent::Jump(_) => taken_since.iter_mut().for_each(|c| *c = None),
            TokenEvent::Pick { vertex, edge } => {
                if let Some(count) = taken_since[vertex] {
                    if count != 1 {
                        return Err(format!(
                            "vertex {vertex} saw {count} foreign picks between its own picks"
                        ));
                    }
                }
                taken_since[vertex] = Some(0);
                let other = graph.edge(edge).other(vertex);
                if let Some(c) = taken_since[other].as_mut() {
                    *c += 1;
                }
            }
        }
    }
    Ok(())
}

/// Per-agent certificate for a graph allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAgentCertificate {
    pub agent: usize,
    pub value: Rational,
    /// `ω(S_q, M^i, v_i)`
    pub omega_q: Rational,
    /// `(v_i(M^i) - δ_i) / 2`
    pub half_gap: Rational,
    /// `MMS(M^i, v_i, 2) / 2`
    pub half_mms2: Rational,
    pub pass_omega: bool,
    pub pass_gap: bool,
    pub pass_mms: bool,
}

impl GraphAgentCertificate {
    pub fn pass(&self) -> bool {
        self.pass_omega && self.pass_gap && self.pass_mms
    }
}

/// Recomputes every agent's benchmarks independently of the game run and
/// compares them against the value she received.
pub fn certify_graph_allocation(
    graph: &MultiGraph,
    valuations: &[&dyn SetFunction],
    orientation: &Orientation,
) -> Result<Vec<GraphAgentCertificate>, GraphError> {
    orientation.validate(graph)?;
    if valuations.len() != graph.vertex_count() {
        return Err(GraphError::ValuationCount {
            expected: graph.vertex_count(),
            got: valuations.len(),
        });
    }
    let bundles = orientation.bundles(graph);
    let two = Rational::from(2);
    (0..graph.vertex_count())
        .map(|i| {
            let v = valuations[i];
            let local = graph.local_items(i);
            let value = v.value(bundles[i]);
            let omega_q = omega_alternating(Player::Q, local, v)?.omega;
            let half_gap = (v.value(local) - max_item_value(v, local)) / two;
            let half_mms2 = mms(local, v, 2)? / two;
            Ok(GraphAgentCertificate {
                agent: i,
                value,
                omega_q,
                half_gap,
                half_mms2,
                pass_omega: value >= omega_q,
                pass_gap: value >= half_gap,
                pass_mms: value >= half_mms2,
            })
        })
        .collect()
}

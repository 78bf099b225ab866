//! Two-player picking-sequence games.
//!
//! Player `p` owns a monotone valuation and collects items; player `q` picks
//! adversarially to minimize `p`'s final value. [`omega`] computes `p`'s
//! maximin value by exhaustive memoized minimax and keeps the full table, so
//! the optimal pick is available from every reachable state.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::itemset::ItemSet;
use crate::rational::Rational;
use crate::valuations::SetFunction;

/// Largest item set the exact solver accepts. The state space is
/// `(p's holdings, remaining items)`, which grows like `3^m`.
pub const MAX_GAME_ITEMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("picking game over {items} items exceeds the solver limit of {limit}")]
    TooManyItems { items: usize, limit: usize },
    #[error("sequence has {sequence} turns but the game has {items} items")]
    LengthMismatch { sequence: usize, items: usize },
    #[error("items {0} lie outside the valuation's ground set")]
    OutsideGround(ItemSet),
    #[error("invalid sequence character {0:?} (expected 'p' or 'q')")]
    BadSequence(char),
    #[error("state (held {held}, remaining {remaining}) is not a reachable decision state")]
    InvalidState { held: ItemSet, remaining: ItemSet },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    P,
    Q,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::P => Player::Q,
            Player::Q => Player::P,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PickSequence(Vec<Player>);

impl PickSequence {
    pub fn new(turns: Vec<Player>) -> Self {
        PickSequence(turns)
    }

    /// `first, other, first, other, ...` of length `len`.
    pub fn alternating(first: Player, len: usize) -> Self {
        let turns = (0..len)
            .map(|t| if t % 2 == 0 { first } else { first.other() })
            .collect();
        PickSequence(turns)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn turn(&self, index: usize) -> Player {
        self.0[index]
    }

    pub fn turns(&self) -> &[Player] {
        &self.0
    }

    /// Number of `p` turns among the first `t` turns.
    pub fn p_turns_before(&self, t: usize) -> usize {
        self.0[..t].iter().filter(|&&x| x == Player::P).count()
    }

    /// All `2^len` sequences of a given length, `p` = bit clear.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = PickSequence> {
        (0..1u32 << len).map(move |bits| {
            PickSequence(
                (0..len)
                    .map(|t| if bits >> t & 1 == 0 { Player::P } else { Player::Q })
                    .collect(),
            )
        })
    }
}

impl FromStr for PickSequence {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c.to_ascii_lowercase() {
                'p' => Ok(Player::P),
                'q' => Ok(Player::Q),
                other => Err(GameError::BadSequence(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PickSequence)
    }
}

impl fmt::Display for PickSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            f.write_str(match t {
                Player::P => "p",
                Player::Q => "q",
            })?;
        }
        Ok(())
    }
}

pub struct GameQuery<'a> {
    pub sequence: PickSequence,
    pub items: ItemSet,
    pub valuation: &'a dyn SetFunction,
}

/// A position in the game: what `p` holds and what is still unpicked.
/// The turn index is `|items| - |remaining|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameState {
    pub held: ItemSet,
    pub remaining: ItemSet,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    value: Rational,
    pick: u8,
}

/// Outcome of [`omega`]: the maximin value and the optimal policy of both
/// players at every state reachable from the start.
#[derive(Debug, Clone)]
pub struct GameResult {
    pub omega: Rational,
    sequence: PickSequence,
    items: Vec<usize>,
    table: HashMap<(u32, u32), Entry>,
}

impl GameResult {
    pub fn sequence(&self) -> &PickSequence {
        &self.sequence
    }

    pub fn items(&self) -> ItemSet {
        self.items.iter().copied().collect()
    }

    pub fn initial_state(&self) -> GameState {
        GameState {
            held: ItemSet::EMPTY,
            remaining: self.items(),
        }
    }

    /// Number of decision states in the memo table.
    pub fn states(&self) -> usize {
        self.table.len()
    }

    pub fn turn_index(&self, state: GameState) -> usize {
        self.items.len() - state.remaining.len()
    }

    pub fn mover(&self, state: GameState) -> Player {
        self.sequence.turn(self.turn_index(state))
    }

    fn local(&self, set: ItemSet) -> Option<u32> {
        let mut out = 0u32;
        for item in set {
            let k = self.items.iter().position(|&x| x == item)?;
            out |= 1 << k;
        }
        Some(out)
    }

    fn entry(&self, state: GameState) -> Result<Entry, GameError> {
        let invalid = || GameError::InvalidState {
            held: state.held,
            remaining: state.remaining,
        };
        let held = self.local(state.held).ok_or_else(invalid)?;
        let remaining = self.local(state.remaining).ok_or_else(invalid)?;
        if held & remaining != 0 || remaining == 0 {
            return Err(invalid());
        }
        let t = self.turn_index(state);
        if state.held.len() != self.sequence.p_turns_before(t) {
            return Err(invalid());
        }
        self.table.get(&(held, remaining)).copied().ok_or_else(invalid)
    }

    /// Optimal pick for whoever moves at `state` (`p` maximizes, `q`
    /// minimizes); ties go to the lowest item index.
    pub fn best_pick(&self, state: GameState) -> Result<usize, GameError> {
        Ok(self.items[self.entry(state)?.pick as usize])
    }

    /// Minimax value of `p`'s final bundle from `state`.
    pub fn state_value(&self, state: GameState) -> Result<Rational, GameError> {
        Ok(self.entry(state)?.value)
    }

    /// Plays `p`'s policy against an arbitrary opponent and returns `p`'s final
    /// bundle. `opponent` receives the state and must return a remaining item.
    pub fn replay<F>(&self, mut opponent: F) -> Result<ItemSet, GameError>
    where
        F: FnMut(GameState) -> usize,
    {
        let mut state = self.initial_state();
        while !state.remaining.is_empty() {
            let pick = match self.mover(state) {
                Player::P => self.best_pick(state)?,
                Player::Q => opponent(state),
            };
            if !state.remaining.contains(pick) {
                return Err(GameError::InvalidState {
                    held: state.held,
                    remaining: state.remaining,
                });
            }
            if self.mover(state) == Player::P {
                state.held.insert(pick);
            }
            state.remaining.remove(pick);
        }
        Ok(state.held)
    }
}

struct Solver<'a> {
    sequence: &'a PickSequence,
    items: &'a [usize],
    valuation: &'a dyn SetFunction,
    table: HashMap<(u32, u32), Entry>,
}

impl Solver<'_> {
    fn global(&self, local: u32) -> ItemSet {
        let mut set = ItemSet::EMPTY;
        let mut bits = local;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            set.insert(self.items[k]);
            bits &= bits - 1;
        }
        set
    }

    fn solve(&mut self, held: u32, remaining: u32) -> Rational {
        if remaining == 0 {
            return self.valuation.value(self.global(held));
        }
        if let Some(e) = self.table.get(&(held, remaining)) {
            return e.value;
        }
        let turn = self.items.len() - remaining.count_ones() as usize;
        let mover = self.sequence.turn(turn);
        let mut best: Option<Entry> = None;
        let mut bits = remaining;
        while bits != 0 {
            let k = bits.trailing_zeros();
            bits &= bits - 1;
            let next_held = if mover == Player::P { held | 1 << k } else { held };
            let value = self.solve(next_held, remaining & !(1 << k));
            let better = match best {
                None => true,
                Some(b) => match mover {
                    Player::P => value > b.value,
                    Player::Q => value < b.value,
                },
            };
            if better {
                best = Some(Entry {
                    value,
                    pick: k as u8,
                });
            }
        }
        let entry = best.expect("nonempty remaining set");
        self.table.insert((held, remaining), entry);
        entry.value
    }
}

/// `ω(S, M, v)`: the value `p` can guarantee under sequence `S` on items `M`.
pub fn omega(query: &GameQuery<'_>) -> Result<GameResult, GameError> {
    let m = query.items.len();
    if m > MAX_GAME_ITEMS {
        return Err(GameError::TooManyItems {
            items: m,
            limit: MAX_GAME_ITEMS,
        });
    }
    if query.sequence.len() != m {
        return Err(GameError::LengthMismatch {
            sequence: query.sequence.len(),
            items: m,
        });
    }
    let outside = query.items.difference(query.valuation.ground_set());
    if !outside.is_empty() {
        return Err(GameError::OutsideGround(outside));
    }
    let items: Vec<usize> = query.items.iter().collect();
    let mut solver = Solver {
        sequence: &query.sequence,
        items: &items,
        valuation: query.valuation,
        table: HashMap::new(),
    };
    let omega = solver.solve(0, (1u32 << m) - 1);
    Ok(GameResult {
        omega,
        sequence: query.sequence.clone(),
        table: solver.table,
        items,
    })
}

/// `ω(S_p, M, v)` for `first = P`, `ω(S_q, M, v)` for `first = Q`.
pub fn omega_alternating(
    first: Player,
    items: ItemSet,
    valuation: &dyn SetFunction,
) -> Result<GameResult, GameError> {
    omega(&GameQuery {
        sequence: PickSequence::alternating(first, items.len()),
        items,
        valuation,
    })
}

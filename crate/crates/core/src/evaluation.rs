//! Evaluating fixed strategy profiles and the one-step value operator.
//!
//! With both strategies fixed the game collapses to a Markov chain; states
//! that cannot reach the upper level in that chain are worth exactly 0 and
//! the rest solve a linear system. The Bellman operator and a floating-point
//! value iteration serve as independent cross-checks on the exact solvers.

use std::collections::VecDeque;
use std::ops::Index;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::game::{Level, Owner, PureStrategyProfile, StateId, TwoLevelGame};
use crate::linalg::{solve_fraction_free, LinAlgError};
use crate::rational::{rational_to_f64, Rational};

/// Exact value per state, indexed by [`StateId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueVector(Vec<Rational>);

impl ValueVector {
    pub fn new(values: Vec<Rational>) -> Self {
        ValueVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![Rational::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: StateId) -> Option<&Rational> {
        self.0.get(s.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }
}

impl Index<StateId> for ValueVector {
    type Output = Rational;

    fn index(&self, s: StateId) -> &Rational {
        &self.0[s.0]
    }
}

impl From<Vec<Rational>> for ValueVector {
    fn from(v: Vec<Rational>) -> Self {
        ValueVector(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("profile has no choice for state {0}")]
    IncompleteProfile(StateId),
    #[error("chain system is singular")]
    SingularSystem,
}

impl From<LinAlgError> for EvalError {
    fn from(_: LinAlgError) -> Self {
        EvalError::SingularSystem
    }
}

/// One step of the chain induced by a fixed profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ChainStep {
    Move(StateId),
    Draw,
}

pub(crate) fn chain_step_table(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
) -> Result<Vec<ChainStep>, EvalError> {
    game.states()
        .map(|s| match game.owner(s) {
            Owner::Chance => Ok(ChainStep::Draw),
            Owner::Player1 | Owner::Player2 => profile
                .choice(s)
                .map(ChainStep::Move)
                .ok_or(EvalError::IncompleteProfile(s)),
        })
        .collect()
}

pub(crate) fn chain_successors(
    game: &TwoLevelGame,
    table: &[ChainStep],
    s: StateId,
) -> Vec<(StateId, Rational)> {
    match table[s.0] {
        ChainStep::Move(t) => vec![(t, Rational::one())],
        ChainStep::Draw => game
            .distribution(s)
            .expect("chance state carries a distribution")
            .iter()
            .map(|(t, p)| (t, p.clone()))
            .collect(),
    }
}

fn chain_successor_ids(game: &TwoLevelGame, table: &[ChainStep], s: StateId) -> Vec<StateId> {
    match table[s.0] {
        ChainStep::Move(t) => vec![t],
        ChainStep::Draw => game.successors(s).to_vec(),
    }
}

/// States with a chain path to some upper state; the complement is worth 0.
fn reaches_upper(game: &TwoLevelGame, table: &[ChainStep]) -> Vec<bool> {
    let n = game.state_count();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in game.states() {
        for t in chain_successor_ids(game, table, s) {
            preds[t.0].push(s.0);
        }
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in game.upper_states() {
        seen[s.0] = true;
        queue.push_back(s.0);
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Exact value of the chain induced by `profile`.
///
/// Upper states pay `discount * reward` on entry and continue with weight
/// `1 - discount`; lower states continue with weight 1. States that never
/// reach the upper level are pinned to 0, and the remaining states solve the
/// resulting linear system.
pub fn policy_evaluate(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
) -> Result<ValueVector, EvalError> {
    let table = chain_step_table(game, profile)?;
    let live = reaches_upper(game, &table);
    let n = game.state_count();

    let vars: Vec<usize> = (0..n).filter(|&i| live[i]).collect();
    let col_of: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (j, &i) in vars.iter().enumerate() {
            v[i] = Some(j);
        }
        v
    };

    let beta = game.discount().clone();
    let stay = Rational::one() - &beta;
    let m = vars.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (row, &i) in vars.iter().enumerate() {
        let s = StateId(i);
        a[row][row] = Rational::one();
        let weight = match game.level(s) {
            Level::Upper => {
                b[row] = &beta * game.reward(s).expect("upper state carries a reward");
                stay.clone()
            }
            Level::Lower => Rational::one(),
        };
        for (t, p) in chain_successors(game, &table, s) {
            if let Some(col) = col_of[t.0] {
                a[row][col] -= &weight * &p;
            }
        }
    }

    let solved = solve_fraction_free(&a, &[b])?.pop().expect("one rhs in, one out");
    let mut values = vec![Rational::zero(); n];
    for (row, &i) in vars.iter().enumerate() {
        values[i] = solved[row].clone();
    }
    Ok(ValueVector(values))
}

/// One application of the value operator.
///
/// Upper states score `discount * reward + (1 - discount) * V(t)` over the
/// chosen or averaged successor; lower states score `V(t)` directly. Player 1
/// maximizes, player 2 minimizes, chance averages.
pub fn bellman_apply(game: &TwoLevelGame, values: &ValueVector) -> ValueVector {
    let beta = game.discount();
    let stay = Rational::one() - beta;
    let out = game
        .states()
        .map(|s| {
            let continuation = |t: StateId| match game.level(s) {
                Level::Upper => {
                    beta * game.reward(s).expect("upper state carries a reward")
                        + &stay * &values[t]
                }
                Level::Lower => values[t].clone(),
            };
            match game.owner(s) {
                Owner::Player1 => game
                    .successors(s)
                    .iter()
                    .map(|t| continuation(*t))
                    .max()
                    .expect("player states have successors"),
                Owner::Player2 => game
                    .successors(s)
                    .iter()
                    .map(|t| continuation(*t))
                    .min()
                    .expect("player states have successors"),
                Owner::Chance => {
                    let avg: Rational = game
                        .distribution(s)
                        .expect("chance state carries a distribution")
                        .iter()
                        .map(|(t, p)| p * &values[t])
                        .sum();
                    match game.level(s) {
                        Level::Upper => {
                            beta * game.reward(s).expect("upper state carries a reward")
                                + &stay * avg
                        }
                        Level::Lower => avg,
                    }
                }
            }
        })
        .collect();
    ValueVector(out)
}

/// Outcome of floating-point value iteration from the zero vector.
#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    pub values: Vec<f64>,
    pub rounds: u64,
    pub last_change: f64,
    pub converged: bool,
}

struct FloatGame {
    owners: Vec<Owner>,
    succs: Vec<Vec<usize>>,
    chance: Vec<Vec<(usize, f64)>>,
    pay: Vec<f64>,
    stay: Vec<f64>,
}

impl FloatGame {
    fn new(game: &TwoLevelGame) -> Self {
        let beta = rational_to_f64(game.discount());
        let n = game.state_count();
        let mut pay = vec![0.0; n];
        let mut stay = vec![1.0; n];
        let mut chance = vec![Vec::new(); n];
        for s in game.states() {
            if let Some(r) = game.reward(s) {
                pay[s.0] = beta * rational_to_f64(r);
                stay[s.0] = 1.0 - beta;
            }
            if let Some(d) = game.distribution(s) {
                chance[s.0] = d.iter().map(|(t, p)| (t.0, rational_to_f64(p))).collect();
            }
        }
        FloatGame {
            owners: game.states().map(|s| game.owner(s)).collect(),
            succs: game
                .states()
                .map(|s| game.successors(s).iter().map(|t| t.0).collect())
                .collect(),
            chance,
            pay,
            stay,
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for s in 0..v.len() {
            let cont = |t: usize| self.pay[s] + self.stay[s] * v[t];
            out[s] = match self.owners[s] {
                Owner::Player1 => self
                    .succs[s]
                    .iter()
                    .map(|&t| cont(t))
                    .fold(f64::NEG_INFINITY, f64::max),
                Owner::Player2 => self
                    .succs[s]
                    .iter()
                    .map(|&t| cont(t))
                    .fold(f64::INFINITY, f64::min),
                Owner::Chance => {
                    let avg: f64 = self.chance[s].iter().map(|&(t, p)| p * v[t]).sum();
                    self.pay[s] + self.stay[s] * avg
                }
            };
        }
    }
}

/// Iterate the value operator from 0 in floating point until the sup-norm
/// step falls to `tol` or `max_rounds` is hit. Iterates from below, so the
/// limit is the least fixed point.
pub fn value_iteration(game: &TwoLevelGame, tol: f64, max_rounds: u64) -> ValueIterationResult {
    let fg = FloatGame::new(game);
    let n = game.state_count();
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut rounds = 0;
    let mut last_change = f64::INFINITY;
    while rounds < max_rounds {
        fg.apply(&v, &mut next);
        last_change = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        rounds += 1;
        if last_change <= tol {
            return ValueIterationResult {
                values: v,
                rounds,
                last_change,
                converged: true,
            };
        }
    }
    ValueIterationResult {
        values: v,
        rounds,
        last_change,
        converged: false,
    }
}

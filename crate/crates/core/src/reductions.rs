//! Collapsing the lower level: first-hit distributions over upper states
//! and the frozen one-step game they induce.
//!
//! Fixing a profile turns the game into a chain; making upper states
//! absorbing, each lower state hits a first upper state with some exact
//! probability, and the leftover mass escapes (never reaches the upper
//! level). With zero escape everywhere the lower level can be replaced by
//! one-step chance states without changing any value.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::evaluation::{chain_step_table, chain_successors, EvalError};
use crate::game::{
    validate_game, Level, Owner, PureStrategyProfile, RawGame, StateId, TwoLevelGame, Violation,
};
use crate::linalg::solve_fraction_free;
use crate::rational::{format_rational, Rational};

/// First-hit outcome for one lower state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitRow {
    /// Probability that each upper state is the first one reached.
    pub hits: BTreeMap<StateId, Rational>,
    /// Probability of never reaching the upper level.
    pub escape: Rational,
}

/// First-hit rows for every lower state of a game under a fixed profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitDistribution {
    pub rows: BTreeMap<StateId, HitRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("state `{state}` escapes the upper level with probability {escape}")]
    EscapeMassNonzero { state: String, escape: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("frozen game failed validation: {0:?}")]
    Rebuild(Vec<Violation>),
}

/// Exact absorption probabilities of the profile's chain with upper states
/// made absorbing, one row per lower state.
pub fn hit_distribution(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
) -> Result<HitDistribution, ReductionError> {
    let table = chain_step_table(game, profile)?;
    let n = game.state_count();
    let uppers: Vec<StateId> = game.upper_states().collect();

    // Lower states with a chain path to the upper level; the rest escape
    // with probability 1.
    let mut reaches = vec![false; n];
    {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in game.lower_states() {
            for (t, _) in chain_successors(game, &table, s) {
                preds[t.0].push(s.0);
            }
        }
        let mut queue: Vec<usize> = uppers.iter().map(|u| u.0).collect();
        for &u in &queue {
            reaches[u] = true;
        }
        while let Some(t) = queue.pop() {
            for &s in &preds[t] {
                if !reaches[s] {
                    reaches[s] = true;
                    queue.push(s);
                }
            }
        }
    }

    let vars: Vec<usize> = game
        .lower_states()
        .map(|s| s.0)
        .filter(|&i| reaches[i])
        .collect();
    let col_of: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (j, &i) in vars.iter().enumerate() {
            v[i] = Some(j);
        }
        v
    };

    // One linear system, one right-hand side per upper target: the row for
    // a live lower state balances its one-step mass onto other live lower
    // states (matrix) and directly onto the target (constant).
    let m = vars.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut rhs = vec![vec![Rational::zero(); m]; uppers.len()];
    for (row, &i) in vars.iter().enumerate() {
        a[row][row] = Rational::one();
        for (t, p) in chain_successors(game, &table, StateId(i)) {
            if game.is_upper(t) {
                let k = uppers.binary_search(&t).expect("upper targets are sorted");
                rhs[k][row] += &p;
            } else if let Some(col) = col_of[t.0] {
                a[row][col] -= &p;
            }
        }
    }
    let solved = solve_fraction_free(&a, &rhs).map_err(EvalError::from)?;

    let mut rows = BTreeMap::new();
    for s in game.lower_states() {
        let mut hits = BTreeMap::new();
        if let Some(col) = col_of[s.0] {
            for (k, u) in uppers.iter().enumerate() {
                let p = solved[k][col].clone();
                if !p.is_zero() {
                    hits.insert(*u, p);
                }
            }
        }
        let total: Rational = hits.values().sum();
        rows.insert(
            s,
            HitRow {
                hits,
                escape: Rational::one() - total,
            },
        );
    }
    Ok(HitDistribution { rows })
}

/// Replace every lower state by a chance state jumping straight to its
/// first-hit upper state; upper states are untouched. Demands zero escape
/// mass everywhere, which optimal profiles guarantee.
pub fn freeze_lower(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
) -> Result<TwoLevelGame, ReductionError> {
    let hd = hit_distribution(game, profile)?;
    for (s, row) in &hd.rows {
        if !row.escape.is_zero() {
            return Err(ReductionError::EscapeMassNonzero {
                state: game.name(*s).to_string(),
                escape: format_rational(&row.escape),
            });
        }
    }

    let mut raw = RawGame::new(game.discount().clone());
    for s in game.states() {
        match game.level(s) {
            Level::Upper => {
                raw = raw.state(game.name(s), game.owner(s), Level::Upper, game.reward(s).cloned());
                match game.owner(s) {
                    Owner::Chance => {
                        for (t, p) in game.distribution(s).expect("chance distribution").iter() {
                            raw = raw.prob(game.name(s), game.name(t), p.clone());
                        }
                    }
                    _ => {
                        for t in game.successors(s) {
                            raw = raw.edge(game.name(s), game.name(*t));
                        }
                    }
                }
            }
            Level::Lower => {
                raw = raw.state(game.name(s), Owner::Chance, Level::Lower, None);
                for (t, p) in &hd.rows[&s].hits {
                    raw = raw.prob(game.name(s), game.name(*t), p.clone());
                }
            }
        }
    }
    validate_game(&raw).map_err(ReductionError::Rebuild)
}

//! Best responses by policy iteration and hierarchical strategy improvement.
//!
//! The minimizer's policy iteration needs one extra ingredient: the set of
//! states where player 2 can confine the play below the upper level forever.
//! One-step lookahead cannot see the worth of such confinement (dawdling in
//! a value-1 loop looks no better than staying put), so those states are
//! seeded with confining choices up front, which pins their value to 0.
//! The maximizer needs no such set: avoiding the upper level earns 0, never
//! an improvement. Both iterations demand strict progress, keep incumbents
//! on ties, and fall back to enumeration at an iteration cap.

use std::collections::BTreeSet;

use crate::evaluation::{policy_evaluate, ValueVector};
use crate::game::{check_strategy_map, Owner, PureStrategyProfile, StrategyMap, TwoLevelGame};

use super::enumerate::response_enum;
use super::{
    lookahead, solve_enumerate, SolveError, SolveMethod, SolveResult, DEFAULT_ENUMERATION_CAP,
    DEFAULT_POLICY_ITERATION_CAP,
};

/// Largest set of non-upper states where player 2 can keep the play
/// forever, given player 1 plays `sigma`: player-2 states need some
/// successor inside, chance states all of them, player-1 states their
/// sigma choice. Computed by eroding the candidate set to the greatest
/// fixpoint.
fn p2_confinement_set(game: &TwoLevelGame, sigma: &StrategyMap) -> Vec<bool> {
    let mut inside: Vec<bool> = game.states().map(|s| game.is_lower(s)).collect();
    loop {
        let mut changed = false;
        for s in game.states() {
            if !inside[s.0] {
                continue;
            }
            let keep = match game.owner(s) {
                Owner::Player2 => game.successors(s).iter().any(|t| inside[t.0]),
                Owner::Chance => game.successors(s).iter().all(|t| inside[t.0]),
                Owner::Player1 => inside[sigma[&s].0],
            };
            if !keep {
                inside[s.0] = false;
                changed = true;
            }
        }
        if !changed {
            return inside;
        }
    }
}

/// Exact minimal value against a fixed player-1 strategy, with the
/// minimizing strategy. Default iteration and fallback-enumeration caps.
pub fn best_response_p2(
    game: &TwoLevelGame,
    sigma: &StrategyMap,
) -> Result<(ValueVector, StrategyMap), SolveError> {
    best_response_p2_with_caps(game, sigma, DEFAULT_POLICY_ITERATION_CAP, DEFAULT_ENUMERATION_CAP)
}

/// [`best_response_p2`] with explicit policy-iteration and fallback caps.
pub fn best_response_p2_with_caps(
    game: &TwoLevelGame,
    sigma: &StrategyMap,
    iteration_cap: u64,
    enumeration_cap: u64,
) -> Result<(ValueVector, StrategyMap), SolveError> {
    check_strategy_map(game, sigma, Owner::Player1)?;
    let confine = p2_confinement_set(game, sigma);
    let mut pi: StrategyMap = game
        .states_owned_by(Owner::Player2)
        .map(|s| {
            let succs = game.successors(s);
            let choice = if confine[s.0] {
                *succs
                    .iter()
                    .find(|t| confine[t.0])
                    .expect("confined player-2 state keeps a confining successor")
            } else {
                succs[0]
            };
            (s, choice)
        })
        .collect();

    for _ in 0..iteration_cap {
        let profile = PureStrategyProfile::new_unchecked(sigma.clone(), pi.clone());
        let values = policy_evaluate(game, &profile)?;
        let mut switched = false;
        for s in game.states_owned_by(Owner::Player2) {
            let best = game
                .successors(s)
                .iter()
                .map(|t| (lookahead(game, &values, s, *t), *t))
                .min_by(|a, b| a.0.cmp(&b.0))
                .expect("player states have successors");
            if best.0 < values[s] {
                pi.insert(s, best.1);
                switched = true;
            }
        }
        if !switched {
            return Ok((values, pi));
        }
    }
    let (values, pi, _) = response_enum(game, sigma, true, enumeration_cap)?;
    Ok((values, pi))
}

/// Exact maximal value against a fixed player-2 strategy, with the
/// maximizing strategy.
pub fn best_response_p1(
    game: &TwoLevelGame,
    pi: &StrategyMap,
) -> Result<(ValueVector, StrategyMap), SolveError> {
    best_response_p1_with_caps(game, pi, DEFAULT_POLICY_ITERATION_CAP, DEFAULT_ENUMERATION_CAP)
}

fn best_response_p1_with_caps(
    game: &TwoLevelGame,
    pi: &StrategyMap,
    iteration_cap: u64,
    enumeration_cap: u64,
) -> Result<(ValueVector, StrategyMap), SolveError> {
    check_strategy_map(game, pi, Owner::Player2)?;
    let mut sigma: StrategyMap = game
        .states_owned_by(Owner::Player1)
        .map(|s| (s, game.successors(s)[0]))
        .collect();

    for _ in 0..iteration_cap {
        let profile = PureStrategyProfile::new_unchecked(sigma.clone(), pi.clone());
        let values = policy_evaluate(game, &profile)?;
        let mut switched = false;
        for s in game.states_owned_by(Owner::Player1) {
            // min_by under the reversed ordering: the first maximum, so
            // ties go to the lowest-index successor.
            let best = game
                .successors(s)
                .iter()
                .map(|t| (lookahead(game, &values, s, *t), *t))
                .min_by(|a, b| b.0.cmp(&a.0))
                .expect("player states have successors");
            if best.0 > values[s] {
                sigma.insert(s, best.1);
                switched = true;
            }
        }
        if !switched {
            return Ok((values, sigma));
        }
    }
    let (values, sigma, _) = response_enum(game, pi, false, enumeration_cap)?;
    Ok((values, sigma))
}

/// Solve by hierarchical strategy improvement for player 1.
///
/// Start from lowest-index choices; each outer round computes the exact
/// player-2 best response to sigma, then switches every player-1 state with
/// a strictly better one-step lookahead (ties keep the incumbent, equal
/// improvements take the lowest index). The best-response vector grows
/// strictly each round, so termination is certain; a recurring sigma would
/// indicate a defect and aborts to enumeration.
pub fn solve_strategy_improvement(game: &TwoLevelGame) -> Result<SolveResult, SolveError> {
    let mut sigma: StrategyMap = game
        .states_owned_by(Owner::Player1)
        .map(|s| (s, game.successors(s)[0]))
        .collect();
    let mut seen: BTreeSet<StrategyMap> = BTreeSet::new();
    let mut iterations = 0u64;
    let mut previous: Option<ValueVector> = None;

    loop {
        if !seen.insert(sigma.clone()) {
            return solve_enumerate(game);
        }
        let (values, pi) = best_response_p2(game, &sigma)?;
        iterations += 1;
        if let Some(prev) = &previous {
            debug_assert!(
                game.states().all(|s| values[s] >= prev[s]) && values != *prev,
                "best-response vector must strictly grow across outer rounds"
            );
        }

        let mut switched = false;
        for s in game.states_owned_by(Owner::Player1) {
            // First maximum via the reversed ordering, as in the response.
            let best = game
                .successors(s)
                .iter()
                .map(|t| (lookahead(game, &values, s, *t), *t))
                .min_by(|a, b| b.0.cmp(&a.0))
                .expect("player states have successors");
            if best.0 > values[s] {
                sigma.insert(s, best.1);
                switched = true;
            }
        }
        if !switched {
            return Ok(SolveResult {
                values,
                profile: PureStrategyProfile::new_unchecked(sigma, pi),
                method: SolveMethod::StrategyImprovement,
                iterations,
            });
        }
        previous = Some(values);
    }
}

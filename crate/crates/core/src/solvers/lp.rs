//! Exact linear programming solution for player-1 MDPs.
//!
//! Minimize the sum of all state variables subject to one-step dominance:
//! any feasible point lies pointwise above the true values (the constraints
//! force `x >= apply(x)`, and iterating from `x >= 0` squeezes it above the
//! least fixed point), and the values themselves are feasible, so the
//! minimizer is exactly the value vector.

use num_traits::{One, Zero};

use crate::evaluation::ValueVector;
use crate::game::{Level, Owner, TwoLevelGame};
use crate::rational::Rational;

use super::simplex::{solve_lp, LpOutcome, LpProblem, LpRel};
use super::SolveError;

/// Solve a player-1 MDP exactly via the dominance linear program.
pub fn mdp_lp_solve(game: &TwoLevelGame) -> Result<ValueVector, SolveError> {
    let p2: Vec<String> = game
        .states_owned_by(Owner::Player2)
        .map(|s| game.name(s).to_string())
        .collect();
    if !p2.is_empty() {
        return Err(SolveError::NotPlayer1Mdp(format!(
            "player-2 states present: {}",
            p2.join(", ")
        )));
    }

    let n = game.state_count();
    let beta = game.discount();
    let stay = Rational::one() - beta;
    let mut rows: Vec<(Vec<Rational>, LpRel, Rational)> = Vec::new();
    for s in game.states() {
        let payout = match game.level(s) {
            Level::Upper => beta * game.reward(s).expect("upper state carries a reward"),
            Level::Lower => Rational::zero(),
        };
        let weight = match game.level(s) {
            Level::Upper => stay.clone(),
            Level::Lower => Rational::one(),
        };
        match game.owner(s) {
            Owner::Player1 => {
                for t in game.successors(s) {
                    // x_s - weight * x_t >= payout, one row per edge.
                    let mut a = vec![Rational::zero(); n];
                    a[s.0] += Rational::one();
                    a[t.0] -= &weight;
                    rows.push((a, LpRel::Ge, payout.clone()));
                }
            }
            Owner::Chance => {
                // x_s - weight * sum delta(t) x_t = payout.
                let mut a = vec![Rational::zero(); n];
                a[s.0] += Rational::one();
                for (t, p) in game
                    .distribution(s)
                    .expect("chance state carries a distribution")
                    .iter()
                {
                    a[t.0] -= &weight * p;
                }
                rows.push((a, LpRel::Eq, payout));
            }
            Owner::Player2 => unreachable!("checked above"),
        }
    }

    let objective = vec![Rational::one(); n];
    match solve_lp(&LpProblem { objective, rows }) {
        LpOutcome::Optimal(x) => Ok(ValueVector::new(x)),
        LpOutcome::Infeasible => Err(SolveError::InternalInconsistency(
            "value linear program is infeasible".into(),
        )),
        LpOutcome::Unbounded => Err(SolveError::InternalInconsistency(
            "value linear program is unbounded".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::testkit::fixtures;

    #[test]
    fn solves_the_branch_choice() {
        let g = fixtures::g_choice();
        let v = mdp_lp_solve(&g).unwrap();
        assert_eq!(v[g.state_by_name("u").unwrap()], rat(2, 1));
        assert_eq!(v[g.state_by_name("a").unwrap()], rat(1, 1));
        assert_eq!(v[g.state_by_name("b").unwrap()], rat(3, 1));
    }

    #[test]
    fn solves_the_self_loop() {
        let g = fixtures::g_loop();
        let v = mdp_lp_solve(&g).unwrap();
        assert_eq!(v[g.state_by_name("u").unwrap()], rat(1, 1));
    }

    #[test]
    fn handles_chance_absorption() {
        let g = fixtures::g_abs();
        let v = mdp_lp_solve(&g).unwrap();
        assert_eq!(v[g.state_by_name("l").unwrap()], rat(1, 1));
        assert_eq!(v[g.state_by_name("u").unwrap()], rat(1, 1));
    }

    #[test]
    fn rejects_games_with_a_minimizer() {
        let g = fixtures::g_minmax();
        assert!(matches!(
            mdp_lp_solve(&g),
            Err(SolveError::NotPlayer1Mdp(msg)) if msg.contains("u")
        ));
    }

    #[test]
    fn agrees_with_best_response_on_alternation() {
        let g = fixtures::g_alt();
        let v = mdp_lp_solve(&g).unwrap();
        assert_eq!(v[g.state_by_name("u1").unwrap()], rat(10, 3));
        assert_eq!(v[g.state_by_name("u2").unwrap()], rat(14, 3));
    }
}

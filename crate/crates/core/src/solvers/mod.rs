//! Exact game solving.
//!
//! [`solve_enumerate`] is the brute-force oracle over pure memoryless
//! profiles; [`solve_strategy_improvement`] is the practical solver, with
//! best responses computed by policy iteration over an avoid-set-pinned
//! MDP; [`mdp_lp_solve`] solves player-1 MDPs by an exact-rational linear
//! program. [`certify_saddle`] and [`decide`] sit on top.

mod enumerate;
mod improve;
mod lp;
mod simplex;

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::evaluation::{EvalError, ValueVector};
use crate::game::{ProfileError, PureStrategyProfile, StateId, TwoLevelGame};
use crate::rational::Rational;

pub use enumerate::{solve_enumerate, solve_enumerate_with_cap};
pub use improve::{
    best_response_p1, best_response_p2, best_response_p2_with_caps, solve_strategy_improvement,
};
pub use lp::mdp_lp_solve;

/// Refuse enumeration beyond this many profile evaluations.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
/// Policy-iteration rounds before falling back to enumeration.
pub const DEFAULT_POLICY_ITERATION_CAP: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Enumeration,
    StrategyImprovement,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Enumeration => "enumeration",
            SolveMethod::StrategyImprovement => "strategy-improvement",
        })
    }
}

/// Exact solution: the value vector, an optimal profile achieving it, and
/// how much work it took. `values` always equals
/// `policy_evaluate(game, profile)` and is a fixed point of `bellman_apply`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub values: ValueVector,
    pub profile: PureStrategyProfile,
    pub method: SolveMethod,
    /// Profile evaluations for enumeration, outer rounds for improvement.
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("solving needs {required} profile evaluations, cap is {cap}")]
    TooLarge { required: u128, cap: u64 },
    #[error("internal consistency failure: {0}")]
    InternalInconsistency(String),
    #[error("game is not a player-1 MDP: {0}")]
    NotPlayer1Mdp(String),
    #[error("state {0} is not a state of the game")]
    UnknownState(StateId),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Optimality witness for a profile: the exact best-response values against
/// each of its halves. Equal vectors certify a saddle point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaddleCertificate {
    pub profile: PureStrategyProfile,
    /// Player-2 best response against the profile's sigma.
    pub v_sigma_fixed: ValueVector,
    /// Player-1 best response against the profile's pi.
    pub v_pi_fixed: ValueVector,
}

impl SaddleCertificate {
    pub fn is_valid(&self) -> bool {
        self.v_sigma_fixed == self.v_pi_fixed
    }
}

/// Check whether `profile` is a saddle point by computing both exact best
/// responses. Valid certificates pin the game value; either vector then
/// equals `policy_evaluate(game, profile)`.
pub fn certify_saddle(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
) -> Result<SaddleCertificate, SolveError> {
    let (v_sigma_fixed, _) = best_response_p2(game, profile.sigma())?;
    let (v_pi_fixed, _) = best_response_p1(game, profile.pi())?;
    Ok(SaddleCertificate {
        profile: profile.clone(),
        v_sigma_fixed,
        v_pi_fixed,
    })
}

/// Comparison relation for the decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Rel {
    pub fn token(self) -> &'static str {
        match self {
            Rel::Ge => "ge",
            Rel::Gt => "gt",
            Rel::Le => "le",
            Rel::Lt => "lt",
            Rel::Eq => "eq",
        }
    }

    pub fn from_token(s: &str) -> Option<Rel> {
        match s {
            "ge" => Some(Rel::Ge),
            "gt" => Some(Rel::Gt),
            "le" => Some(Rel::Le),
            "lt" => Some(Rel::Lt),
            "eq" => Some(Rel::Eq),
            _ => None,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        let ord = lhs.cmp(rhs);
        match self {
            Rel::Ge => ord != Ordering::Less,
            Rel::Gt => ord == Ordering::Greater,
            Rel::Le => ord != Ordering::Greater,
            Rel::Lt => ord == Ordering::Less,
            Rel::Eq => ord == Ordering::Equal,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Decide whether the exact game value at `state` satisfies `rel` against
/// `q`, solving by strategy improvement.
pub fn decide(
    game: &TwoLevelGame,
    state: StateId,
    rel: Rel,
    q: &Rational,
) -> Result<bool, SolveError> {
    let result = solve_strategy_improvement(game)?;
    let value = result
        .values
        .get(state)
        .ok_or(SolveError::UnknownState(state))?;
    Ok(rel.holds(value, q))
}

fn lookahead(game: &TwoLevelGame, values: &ValueVector, s: StateId, t: StateId) -> Rational {
    use num_traits::One;
    match game.reward(s) {
        Some(r) => {
            let beta = game.discount();
            beta * r + (Rational::one() - beta) * &values[t]
        }
        None => values[t].clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::StrategyMap;
    use crate::rational::rat;
    use crate::testkit::fixtures;

    #[test]
    fn certificate_distinguishes_optimal_from_suboptimal() {
        let g = fixtures::g_choice();
        let u = g.state_by_name("u").unwrap();
        let a = g.state_by_name("a").unwrap();
        let b = g.state_by_name("b").unwrap();
        let base: StrategyMap = [(a, a), (b, b)].into_iter().collect();

        let mut good = base.clone();
        good.insert(u, b);
        let cert = certify_saddle(
            &g,
            &PureStrategyProfile::new(&g, good, StrategyMap::new()).unwrap(),
        )
        .unwrap();
        assert!(cert.is_valid());
        assert_eq!(cert.v_sigma_fixed[u], rat(2, 1));

        let mut bad = base;
        bad.insert(u, a);
        let cert = certify_saddle(
            &g,
            &PureStrategyProfile::new(&g, bad, StrategyMap::new()).unwrap(),
        )
        .unwrap();
        assert!(!cert.is_valid());
        assert_eq!(cert.v_sigma_fixed[u], rat(1, 1));
        assert_eq!(cert.v_pi_fixed[u], rat(2, 1));
    }

    #[test]
    fn choice_free_games_always_certify() {
        let g = fixtures::g_loop();
        let u = g.state_by_name("u").unwrap();
        let sigma: StrategyMap = [(u, u)].into_iter().collect();
        let cert = certify_saddle(
            &g,
            &PureStrategyProfile::new(&g, sigma, StrategyMap::new()).unwrap(),
        )
        .unwrap();
        assert!(cert.is_valid());
    }

    #[test]
    fn decide_compares_exactly() {
        let g = fixtures::g_alt();
        let u1 = g.state_by_name("u1").unwrap();
        assert!(decide(&g, u1, Rel::Eq, &rat(10, 3)).unwrap());
        assert!(!decide(&g, u1, Rel::Gt, &rat(10, 3)).unwrap());
        assert!(decide(&g, u1, Rel::Ge, &rat(10, 3)).unwrap());
        assert!(decide(&g, u1, Rel::Lt, &rat(11, 3)).unwrap());
        assert!(!decide(&g, u1, Rel::Eq, &(rat(10, 3) + rat(1, 1_000_000_000))).unwrap());

        let g = fixtures::g_loop();
        let u = g.state_by_name("u").unwrap();
        assert!(decide(&g, u, Rel::Ge, &rat(1, 1)).unwrap());
        assert_eq!(
            decide(&g, StateId(5), Rel::Eq, &rat(1, 1)),
            Err(SolveError::UnknownState(StateId(5)))
        );
    }

    #[test]
    fn rel_tokens_round_trip() {
        for rel in [Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt, Rel::Eq] {
            assert_eq!(Rel::from_token(rel.token()), Some(rel));
        }
        assert_eq!(Rel::from_token("=="), None);
    }
}

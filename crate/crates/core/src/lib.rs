//! Exact solvers for two-level discounted games on turn-based probabilistic
//! game graphs.
//!
//! A two-level game splits its state space into an *upper* level, where
//! positive rewards accrue under a discount factor, and a *lower* level,
//! where an undiscounted reachability game decides which upper state is
//! entered next. Player 1 maximizes the expected payoff, player 2 minimizes
//! it, and chance states resolve by fixed rational distributions.
//!
//! The crate validates instances ([`game`]), defines play payoffs and a
//! reproducible Monte-Carlo estimator ([`semantics`]), evaluates strategy
//! profiles exactly and runs value iteration ([`evaluation`]), solves games
//! by independent exact routes and certifies optimality ([`solvers`]),
//! collapses the lower level of a solved game ([`reductions`]), generates
//! random instances and cross-checks every route ([`testkit`]), and reads and
//! writes the `tldg/1` text format ([`format`]). All exact computation uses
//! arbitrary-precision rationals.

pub mod evaluation;
pub mod format;
pub mod game;
pub mod linalg;
pub mod rational;
pub mod reductions;
pub mod semantics;
pub mod solvers;
pub mod testkit;

pub use evaluation::ValueVector;
pub use game::{
    Distribution, Level, Owner, PureStrategyProfile, RawGame, StateId, StrategyMap, TwoLevelGame,
    Violation,
};
pub use rational::Rational;
pub use solvers::{Rel, SaddleCertificate, SolveMethod, SolveResult};

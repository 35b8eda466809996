//! Payoff of concrete plays and a reproducible Monte-Carlo estimator.
//!
//! The k-th upper state visited on a play contributes
//! `(1 - discount)^(k-1) * discount * reward`; lower states contribute
//! nothing, and a play that stops visiting the upper level keeps only the
//! terms it earned. The simulator estimates the expectation of this payoff
//! under a fixed profile, truncated at a count of upper visits.

use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::evaluation::{chain_step_table, ChainStep, EvalError};
use crate::game::{PureStrategyProfile, StateId, TwoLevelGame};
use crate::rational::{rational_to_f64, Rational};

/// Raw transitions allowed per sample before giving up on reaching the next
/// upper visit; guards against profiles trapped in lower-level loops.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("step {0} of the sequence is not an edge of the game")]
    NotAPath(usize),
    #[error("path holds {found} upper visits, horizon needs {required}")]
    InsufficientUpperVisits { required: usize, found: usize },
    #[error("simulation needs at least one sample")]
    ZeroSamples,
    #[error("start state {0} is not a state of the game")]
    BadStart(StateId),
    #[error(transparent)]
    Profile(#[from] EvalError),
}

/// Exact payoff of the first `upper_horizon` upper visits along `path`.
///
/// Consecutive states must be edges (distribution support counts for chance
/// states); the path must contain at least `upper_horizon` upper states.
pub fn path_payoff(
    game: &TwoLevelGame,
    path: &[StateId],
    upper_horizon: usize,
) -> Result<Rational, SemanticsError> {
    let n = game.state_count();
    for (i, s) in path.iter().enumerate() {
        if s.0 >= n {
            return Err(SemanticsError::NotAPath(i));
        }
        if i + 1 < path.len() && !game.has_edge(*s, path[i + 1]) {
            return Err(SemanticsError::NotAPath(i));
        }
    }
    let beta = game.discount();
    let stay = Rational::one() - beta;
    let mut weight = Rational::one();
    let mut payoff = Rational::zero();
    let mut visits = 0usize;
    for s in path {
        if visits == upper_horizon {
            break;
        }
        if let Some(r) = game.reward(*s) {
            payoff += &weight * beta * r;
            weight *= &stay;
            visits += 1;
        }
    }
    if visits < upper_horizon {
        return Err(SemanticsError::InsufficientUpperVisits {
            required: upper_horizon,
            found: visits,
        });
    }
    Ok(payoff)
}

/// Outcome of a Monte-Carlo estimate of a profile's value.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: usize,
    /// Upper visits accumulated per sample before truncation.
    pub truncation_horizon: usize,
    pub seed: u64,
    /// `(1 - discount)^horizon * max_reward`, bounding the truncation bias.
    pub truncation_bound: f64,
    /// Samples cut off by the raw step cap before finishing the horizon.
    pub step_capped_samples: usize,
}

enum SimStep {
    Move(usize),
    /// Cumulative u64 thresholds: draw v, take the first entry with v <= t.
    Chance(Vec<(u64, usize)>),
}

struct SimTable {
    steps: Vec<SimStep>,
    /// Discounted one-visit payout per state, 0 on lower states.
    pay: Vec<f64>,
    stay: f64,
}

/// Threshold such that `v <= t` iff `v / 2^64 < cum` for uniform u64 `v`.
fn cum_threshold(cum: &Rational) -> u64 {
    let scaled = (cum.numer() << 64u32) - num_bigint::BigInt::one();
    (scaled / cum.denom()).to_u64().expect("cumulative <= 1 fits")
}

impl SimTable {
    fn new(game: &TwoLevelGame, profile: &PureStrategyProfile) -> Result<Self, EvalError> {
        let table = chain_step_table(game, profile)?;
        let beta = game.discount();
        let steps = game
            .states()
            .map(|s| match table[s.0] {
                ChainStep::Move(t) => SimStep::Move(t.0),
                ChainStep::Draw => {
                    let mut cum = Rational::zero();
                    let thresholds = game
                        .distribution(s)
                        .expect("chance state carries a distribution")
                        .iter()
                        .map(|(t, p)| {
                            cum += p;
                            (cum_threshold(&cum), t.0)
                        })
                        .collect();
                    SimStep::Chance(thresholds)
                }
            })
            .collect();
        let pay = game
            .states()
            .map(|s| match game.reward(s) {
                Some(r) => rational_to_f64(&(beta * r)),
                None => 0.0,
            })
            .collect();
        Ok(SimTable {
            steps,
            pay,
            stay: 1.0 - rational_to_f64(beta),
        })
    }

    fn run_sample(&self, start: usize, horizon: usize, cap: u64, rng: &mut ChaCha8Rng) -> (f64, bool) {
        let mut s = start;
        let mut payoff = 0.0;
        let mut weight = 1.0;
        let mut visits = 0usize;
        let mut steps = 0u64;
        loop {
            if visits == horizon {
                return (payoff, false);
            }
            if self.pay[s] != 0.0 {
                payoff += weight * self.pay[s];
                weight *= self.stay;
                visits += 1;
                if visits == horizon {
                    return (payoff, false);
                }
            }
            if steps == cap {
                return (payoff, true);
            }
            steps += 1;
            s = match &self.steps[s] {
                SimStep::Move(t) => *t,
                SimStep::Chance(thresholds) => {
                    let v = rng.next_u64();
                    thresholds
                        .iter()
                        .find(|(t, _)| v <= *t)
                        .expect("last threshold is u64::MAX")
                        .1
                }
            };
        }
    }
}

/// Estimate the profile's value from `start` by seeded playouts.
///
/// Sample `i` draws from an RNG stream derived from `(seed, i)`, so results
/// are bit-identical across runs and across worker counts.
pub fn simulate_value(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
    start: StateId,
    samples: usize,
    upper_horizon: usize,
    seed: u64,
) -> Result<SimulationReport, SemanticsError> {
    simulate_value_with_cap(game, profile, start, samples, upper_horizon, seed, DEFAULT_STEP_CAP)
}

/// [`simulate_value`] with an explicit raw step cap per sample.
pub fn simulate_value_with_cap(
    game: &TwoLevelGame,
    profile: &PureStrategyProfile,
    start: StateId,
    samples: usize,
    upper_horizon: usize,
    seed: u64,
    step_cap: u64,
) -> Result<SimulationReport, SemanticsError> {
    if samples == 0 {
        return Err(SemanticsError::ZeroSamples);
    }
    if start.0 >= game.state_count() {
        return Err(SemanticsError::BadStart(start));
    }
    let table = SimTable::new(game, profile)?;

    let outcomes: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            table.run_sample(start.0, upper_horizon, step_cap, &mut rng)
        })
        .collect();

    let n = samples as f64;
    let mean = outcomes.iter().map(|(x, _)| x).sum::<f64>() / n;
    let standard_error = if samples > 1 {
        let ss: f64 = outcomes.iter().map(|(x, _)| (x - mean) * (x - mean)).sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let max_reward = game.max_reward().map(|r| rational_to_f64(&r)).unwrap_or(0.0);
    let stay = 1.0 - rational_to_f64(game.discount());
    Ok(SimulationReport {
        estimate: mean,
        standard_error,
        samples,
        truncation_horizon: upper_horizon,
        seed,
        truncation_bound: stay.powf(upper_horizon as f64) * max_reward,
        step_capped_samples: outcomes.iter().filter(|(_, capped)| *capped).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{validate_game, Level, Owner, RawGame, StrategyMap};
    use crate::rational::rat;
    use crate::testkit::fixtures;
    use num_traits::Zero;

    fn by_names(game: &TwoLevelGame, names: &[&str]) -> Vec<StateId> {
        names
            .iter()
            .map(|n| game.state_by_name(n).unwrap())
            .collect()
    }

    #[test]
    fn geometric_partial_sum() {
        let g = fixtures::g_loop();
        let path = by_names(&g, &["u", "u", "u"]);
        assert_eq!(path_payoff(&g, &path, 3).unwrap(), rat(7, 8));
    }

    #[test]
    fn lower_prefix_contributes_nothing() {
        let g = fixtures::g_abs();
        let path = by_names(&g, &["l", "l", "u"]);
        assert_eq!(path_payoff(&g, &path, 1).unwrap(), rat(1, 2));
        let short = by_names(&g, &["u"]);
        assert_eq!(path_payoff(&g, &short, 1).unwrap(), rat(1, 2));
    }

    #[test]
    fn two_visit_expansion() {
        let g = fixtures::g_alt();
        let path = by_names(&g, &["u1", "u2"]);
        assert_eq!(path_payoff(&g, &path, 2).unwrap(), rat(5, 2));
    }

    #[test]
    fn zero_horizon_is_free() {
        let g = fixtures::g_alt();
        assert_eq!(path_payoff(&g, &[], 0).unwrap(), Rational::zero());
        let path = by_names(&g, &["u1"]);
        assert_eq!(path_payoff(&g, &path, 0).unwrap(), Rational::zero());
    }

    #[test]
    fn rejects_non_edges_and_short_paths() {
        let g = fixtures::g_alt();
        let u1 = g.state_by_name("u1").unwrap();
        assert_eq!(
            path_payoff(&g, &[u1, u1], 1),
            Err(SemanticsError::NotAPath(0))
        );
        assert_eq!(
            path_payoff(&g, &[StateId(99)], 0),
            Err(SemanticsError::NotAPath(0))
        );
        assert_eq!(
            path_payoff(&g, &[u1], 2),
            Err(SemanticsError::InsufficientUpperVisits {
                required: 2,
                found: 1
            })
        );
    }

    proptest::proptest! {
        // Walk random edges; payoff grows with the horizon and never beats
        // the maximum reward.
        #[test]
        fn payoff_monotone_in_horizon(choices in proptest::collection::vec(0usize..8, 1..30)) {
            let g = fixtures::g_abs();
            let mut path = vec![g.state_by_name("l").unwrap()];
            for c in choices {
                let here = *path.last().unwrap();
                let succs = g.successors(here);
                path.push(succs[c % succs.len()]);
            }
            let uppers = path.iter().filter(|s| g.is_upper(**s)).count();
            let max_r = g.max_reward().unwrap();
            let mut prev = Rational::zero();
            for h in 0..=uppers {
                let p = path_payoff(&g, &path, h).unwrap();
                proptest::prop_assert!(p >= prev);
                proptest::prop_assert!(p <= max_r);
                prev = p;
            }
        }
    }

    fn loop_profile() -> (TwoLevelGame, PureStrategyProfile) {
        let g = fixtures::g_loop();
        let u = g.state_by_name("u").unwrap();
        let sigma: StrategyMap = [(u, u)].into_iter().collect();
        let p = PureStrategyProfile::new(&g, sigma, StrategyMap::new()).unwrap();
        (g, p)
    }

    #[test]
    fn deterministic_chain_is_exact() {
        let (g, p) = loop_profile();
        let u = g.state_by_name("u").unwrap();
        let rep = simulate_value(&g, &p, u, 1, 40, 123).unwrap();
        assert_eq!(rep.estimate, 1.0 - 0.5f64.powi(40));
        assert_eq!(rep.standard_error, 0.0);
        assert_eq!(rep.step_capped_samples, 0);
        assert_eq!(rep.truncation_bound, 0.5f64.powi(40));
    }

    #[test]
    fn zero_samples_rejected() {
        let (g, p) = loop_profile();
        let u = g.state_by_name("u").unwrap();
        assert_eq!(
            simulate_value(&g, &p, u, 0, 10, 1),
            Err(SemanticsError::ZeroSamples)
        );
        assert_eq!(
            simulate_value(&g, &p, StateId(9), 1, 10, 1),
            Err(SemanticsError::BadStart(StateId(9)))
        );
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        // Every upper visit redraws between rewards 1 and 3, so the payoff
        // genuinely depends on the random stream.
        let raw = RawGame::new(rat(1, 2))
            .state("c", Owner::Chance, Level::Lower, None)
            .state("u1", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("u3", Owner::Player1, Level::Upper, Some(rat(3, 1)))
            .prob("c", "u1", rat(1, 2))
            .prob("c", "u3", rat(1, 2))
            .edge("u1", "c")
            .edge("u3", "c");
        let g = validate_game(&raw).unwrap();
        let c = g.state_by_name("c").unwrap();
        let u1 = g.state_by_name("u1").unwrap();
        let u3 = g.state_by_name("u3").unwrap();
        let sigma: StrategyMap = [(u1, c), (u3, c)].into_iter().collect();
        let p = PureStrategyProfile::new(&g, sigma, StrategyMap::new()).unwrap();
        let a = simulate_value(&g, &p, c, 500, 25, 42).unwrap();
        let b = simulate_value(&g, &p, c, 500, 25, 42).unwrap();
        assert_eq!(a, b);
        let other = simulate_value(&g, &p, c, 500, 25, 43).unwrap();
        assert_ne!(a.estimate, other.estimate);
    }

    #[test]
    fn estimate_tracks_exact_value() {
        let g = fixtures::g_abs();
        let u = g.state_by_name("u").unwrap();
        let l = g.state_by_name("l").unwrap();
        let sigma: StrategyMap = [(u, u)].into_iter().collect();
        let p = PureStrategyProfile::new(&g, sigma, StrategyMap::new()).unwrap();
        // Exact value from l is 1: absorb into u, then earn 1 forever.
        let rep = simulate_value(&g, &p, l, 2_000, 50, 7).unwrap();
        let slack = 3.0 * rep.standard_error + rep.truncation_bound;
        assert!((rep.estimate - 1.0).abs() <= slack + 1e-12);
    }

    #[test]
    fn step_cap_flags_trapped_samples() {
        let raw = RawGame::new(rat(1, 2))
            .state("u", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("l", Owner::Player2, Level::Lower, None)
            .edge("u", "u")
            .edge("l", "l")
            .edge("l", "u");
        let g = crate::game::validate_structure(&raw).unwrap();
        let u = g.state_by_name("u").unwrap();
        let l = g.state_by_name("l").unwrap();
        let sigma: StrategyMap = [(u, u)].into_iter().collect();
        let pi: StrategyMap = [(l, l)].into_iter().collect();
        let p = PureStrategyProfile::new(&g, sigma, pi).unwrap();
        let rep = simulate_value_with_cap(&g, &p, l, 3, 10, 9, 500).unwrap();
        assert_eq!(rep.step_capped_samples, 3);
        assert_eq!(rep.estimate, 0.0);
    }

    #[test]
    fn chance_thresholds_partition_the_draw_space() {
        // 1/3 + 1/3 + 1/3: thresholds floor((k*2^64 - 1)/3).
        let t1 = cum_threshold(&rat(1, 3));
        let t2 = cum_threshold(&rat(2, 3));
        let t3 = cum_threshold(&rat(1, 1));
        assert_eq!(t3, u64::MAX);
        assert!(t1 < t2 && t2 < t3);
        // Category sizes differ by at most one draw value.
        let c1 = t1 as u128 + 1;
        let c2 = (t2 - t1) as u128;
        let c3 = (t3 - t2) as u128;
        assert!(c1.abs_diff(c2) <= 1 && c2.abs_diff(c3) <= 1);
        assert_eq!(c1 + c2 + c3, 1u128 << 64);
    }
}

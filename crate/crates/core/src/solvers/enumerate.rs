//! Brute-force solving by enumeration of pure memoryless profiles.
//!
//! For each player-1 strategy the player-2 best response is the pointwise
//! minimum over all player-2 strategies, attained by a single strategy; the
//! game value is the pointwise maximum of those vectors, again attained.
//! Failure of either attainment is an internal-consistency error.

use crate::evaluation::{policy_evaluate, ValueVector};
use crate::game::{Owner, PureStrategyProfile, StateId, StrategyMap, TwoLevelGame};
use crate::rational::Rational;

use super::{SolveError, SolveMethod, SolveResult, DEFAULT_ENUMERATION_CAP};

/// All pure memoryless strategies of one player, walked in odometer order
/// over owned states sorted by index with successors in index order. A
/// player with no states has exactly one (empty) strategy.
pub(super) struct StrategySpace {
    slots: Vec<StateId>,
    options: Vec<Vec<StateId>>,
}

impl StrategySpace {
    pub(super) fn new(game: &TwoLevelGame, owner: Owner) -> Self {
        let slots: Vec<StateId> = game.states_owned_by(owner).collect();
        let options = slots.iter().map(|s| game.successors(*s).to_vec()).collect();
        StrategySpace { slots, options }
    }

    pub(super) fn count(&self) -> Option<u128> {
        self.options
            .iter()
            .try_fold(1u128, |acc, opts| acc.checked_mul(opts.len() as u128))
    }

    pub(super) fn iter(&self) -> SpaceIter<'_> {
        SpaceIter {
            space: self,
            indices: Some(vec![0; self.slots.len()]),
        }
    }
}

pub(super) struct SpaceIter<'a> {
    space: &'a StrategySpace,
    indices: Option<Vec<usize>>,
}

impl Iterator for SpaceIter<'_> {
    type Item = StrategyMap;

    fn next(&mut self) -> Option<StrategyMap> {
        let indices = self.indices.as_mut()?;
        let map: StrategyMap = self
            .space
            .slots
            .iter()
            .enumerate()
            .map(|(k, s)| (*s, self.space.options[k][indices[k]]))
            .collect();
        // Odometer advance, most-significant slot first.
        let mut k = indices.len();
        loop {
            if k == 0 {
                self.indices = None;
                break;
            }
            k -= 1;
            indices[k] += 1;
            if indices[k] < self.space.options[k].len() {
                break;
            }
            indices[k] = 0;
        }
        Some(map)
    }
}

/// Tracks the pointwise envelope of offered vectors and the first strategy
/// whose vector dominates all others. Replacement needs weak dominance plus
/// strict improvement somewhere, so ties keep the incumbent.
struct Extremal<K> {
    minimize: bool,
    envelope: Option<Vec<Rational>>,
    best: Option<(K, Vec<Rational>)>,
}

impl<K> Extremal<K> {
    fn new(minimize: bool) -> Self {
        Extremal {
            minimize,
            envelope: None,
            best: None,
        }
    }

    fn offer(&mut self, key: K, v: Vec<Rational>) {
        match &mut self.envelope {
            None => self.envelope = Some(v.clone()),
            Some(env) => {
                for (e, x) in env.iter_mut().zip(&v) {
                    let better = if self.minimize { x < e } else { x > e };
                    if better {
                        *e = x.clone();
                    }
                }
            }
        }
        let replace = match &self.best {
            None => true,
            Some((_, incumbent)) => {
                let weak = incumbent.iter().zip(&v).all(|(b, x)| {
                    if self.minimize {
                        x <= b
                    } else {
                        x >= b
                    }
                });
                weak && incumbent != &v
            }
        };
        if replace {
            self.best = Some((key, v));
        }
    }

    fn finish(self) -> Result<(K, Vec<Rational>), SolveError> {
        let envelope = self
            .envelope
            .ok_or_else(|| SolveError::InternalInconsistency("empty strategy space".into()))?;
        let (key, best) = self.best.expect("envelope implies a best entry");
        if best == envelope {
            Ok((key, best))
        } else {
            Err(SolveError::InternalInconsistency(
                "no single strategy attains the pointwise envelope".into(),
            ))
        }
    }
}

/// Exact best response by enumerating the free player's strategies. With
/// `fixed_is_sigma` the fixed map is player 1's and player 2 minimizes;
/// otherwise the roles flip. Returns the value vector, the first responding
/// strategy attaining it, and the number of evaluations spent.
pub(super) fn response_enum(
    game: &TwoLevelGame,
    fixed: &StrategyMap,
    fixed_is_sigma: bool,
    cap: u64,
) -> Result<(ValueVector, StrategyMap, u64), SolveError> {
    let owner = if fixed_is_sigma {
        Owner::Player2
    } else {
        Owner::Player1
    };
    let space = StrategySpace::new(game, owner);
    let required = space.count().unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(SolveError::TooLarge { required, cap });
    }
    let mut extremal = Extremal::new(fixed_is_sigma);
    let mut evals = 0u64;
    for map in space.iter() {
        let profile = if fixed_is_sigma {
            PureStrategyProfile::new_unchecked(fixed.clone(), map.clone())
        } else {
            PureStrategyProfile::new_unchecked(map.clone(), fixed.clone())
        };
        let values = policy_evaluate(game, &profile)?;
        evals += 1;
        extremal.offer(map, values.as_slice().to_vec());
    }
    let (map, values) = extremal.finish()?;
    Ok((ValueVector::new(values), map, evals))
}

/// Solve by full enumeration under the default evaluation cap.
pub fn solve_enumerate(game: &TwoLevelGame) -> Result<SolveResult, SolveError> {
    solve_enumerate_with_cap(game, DEFAULT_ENUMERATION_CAP)
}

/// Solve by evaluating every profile: the best response to each player-1
/// strategy is minimized over player-2 strategies, and the first player-1
/// strategy attaining the pointwise maximum wins. `cap` bounds the total
/// profile evaluations `|sigma space| * |pi space|`.
pub fn solve_enumerate_with_cap(game: &TwoLevelGame, cap: u64) -> Result<SolveResult, SolveError> {
    let sigma_space = StrategySpace::new(game, Owner::Player1);
    let pi_space = StrategySpace::new(game, Owner::Player2);
    let required = sigma_space
        .count()
        .and_then(|a| pi_space.count().and_then(|b| a.checked_mul(b)))
        .unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(SolveError::TooLarge { required, cap });
    }

    let mut outer: Extremal<(StrategyMap, StrategyMap)> = Extremal::new(false);
    let mut evals = 0u64;
    for sigma in sigma_space.iter() {
        let mut inner: Extremal<StrategyMap> = Extremal::new(true);
        for pi in pi_space.iter() {
            let profile = PureStrategyProfile::new_unchecked(sigma.clone(), pi.clone());
            let values = policy_evaluate(game, &profile)?;
            evals += 1;
            inner.offer(pi, values.as_slice().to_vec());
        }
        let (pi, best_response) = inner.finish()?;
        outer.offer((sigma, pi), best_response);
    }
    let ((sigma, pi), values) = outer.finish()?;
    Ok(SolveResult {
        values: ValueVector::new(values),
        profile: PureStrategyProfile::new_unchecked(sigma, pi),
        method: SolveMethod::Enumeration,
        iterations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::testkit::fixtures;

    #[test]
    fn maximizer_picks_the_better_branch() {
        let g = fixtures::g_choice();
        let res = solve_enumerate(&g).unwrap();
        let u = g.state_by_name("u").unwrap();
        let b = g.state_by_name("b").unwrap();
        assert_eq!(res.values[u], rat(2, 1));
        assert_eq!(res.values[g.state_by_name("a").unwrap()], rat(1, 1));
        assert_eq!(res.values[b], rat(3, 1));
        assert_eq!(res.profile.sigma().get(&u), Some(&b));
        assert_eq!(res.method, SolveMethod::Enumeration);
        assert_eq!(res.iterations, 2);
    }

    #[test]
    fn minimizer_picks_the_worse_branch() {
        let g = fixtures::g_minmax();
        let res = solve_enumerate(&g).unwrap();
        let u = g.state_by_name("u").unwrap();
        let a = g.state_by_name("a").unwrap();
        assert_eq!(res.values[u], rat(1, 1));
        assert_eq!(res.profile.pi().get(&u), Some(&a));
    }

    #[test]
    fn choice_free_game_has_empty_maps() {
        let g = fixtures::g_loop();
        let res = solve_enumerate(&g).unwrap();
        assert_eq!(res.values[g.state_by_name("u").unwrap()], rat(1, 1));
        // The single self-loop choice is still recorded for player 1.
        assert_eq!(res.profile.pi().len(), 0);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn cap_is_enforced() {
        let g = fixtures::g_choice();
        assert_eq!(
            solve_enumerate_with_cap(&g, 1),
            Err(SolveError::TooLarge {
                required: 2,
                cap: 1
            })
        );
    }

    #[test]
    fn response_enum_minimizes_against_fixed_sigma() {
        let g = fixtures::g_minmax();
        let sigma: StrategyMap = [
            (g.state_by_name("a").unwrap(), g.state_by_name("a").unwrap()),
            (g.state_by_name("b").unwrap(), g.state_by_name("b").unwrap()),
        ]
        .into_iter()
        .collect();
        let (values, pi, evals) = response_enum(&g, &sigma, true, 100).unwrap();
        let u = g.state_by_name("u").unwrap();
        assert_eq!(values[u], rat(1, 1));
        assert_eq!(pi.get(&u), Some(&g.state_by_name("a").unwrap()));
        assert_eq!(evals, 2);
    }

    #[test]
    fn space_iteration_counts_profiles() {
        let g = fixtures::g_choice();
        let sigma_space = StrategySpace::new(&g, Owner::Player1);
        assert_eq!(sigma_space.count(), Some(2));
        assert_eq!(sigma_space.iter().count(), 2);
        let pi_space = StrategySpace::new(&g, Owner::Player2);
        assert_eq!(pi_space.count(), Some(1));
        let maps: Vec<StrategyMap> = pi_space.iter().collect();
        assert_eq!(maps, vec![StrategyMap::new()]);
    }
}

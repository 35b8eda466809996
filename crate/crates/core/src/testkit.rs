//! Regression fixtures, random game generation with validity repair, and
//! the oracle harness that cross-checks every solver against enumeration.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evaluation::{bellman_apply, value_iteration};
use crate::game::{
    validate_structure, validate_two_level, Owner, RawGame, StateId, StrategyMap, TwoLevelGame,
    Violation,
};
use crate::rational::{format_rational, is_canonical, rat, Rational};
use crate::reductions::freeze_lower;
use crate::semantics::simulate_value;
use crate::solvers::{
    best_response_p1, certify_saddle, mdp_lp_solve, solve_enumerate_with_cap,
    solve_strategy_improvement, SolveError, SolveResult, DEFAULT_ENUMERATION_CAP,
};

/// Small hand-solved games used as regression anchors.
pub mod fixtures {
    use super::*;
    use crate::game::{validate_game, Level};

    /// One upper state, reward 1, self-loop; value 1 at discount 1/2.
    pub fn g_loop() -> TwoLevelGame {
        let raw = RawGame::new(rat(1, 2))
            .state("u", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .edge("u", "u");
        validate_game(&raw).expect("fixture is valid")
    }

    /// Two upper states alternating, rewards 2 and 6; values 10/3 and 14/3.
    pub fn g_alt() -> TwoLevelGame {
        let raw = RawGame::new(rat(1, 2))
            .state("u1", Owner::Player1, Level::Upper, Some(rat(2, 1)))
            .state("u2", Owner::Player1, Level::Upper, Some(rat(6, 1)))
            .edge("u1", "u2")
            .edge("u2", "u1");
        validate_game(&raw).expect("fixture is valid")
    }

    /// Player 1 picks between self-loops worth 1 and 3; value 2 at u.
    pub fn g_choice() -> TwoLevelGame {
        let raw = RawGame::new(rat(1, 2))
            .state("u", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("a", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("b", Owner::Player1, Level::Upper, Some(rat(3, 1)))
            .edge("u", "a")
            .edge("u", "b")
            .edge("a", "a")
            .edge("b", "b");
        validate_game(&raw).expect("fixture is valid")
    }

    /// Same branch choice handed to player 2; value 1 at u.
    pub fn g_minmax() -> TwoLevelGame {
        let raw = RawGame::new(rat(1, 2))
            .state("u", Owner::Player2, Level::Upper, Some(rat(1, 1)))
            .state("a", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("b", Owner::Player1, Level::Upper, Some(rat(3, 1)))
            .edge("u", "a")
            .edge("u", "b")
            .edge("a", "a")
            .edge("b", "b");
        validate_game(&raw).expect("fixture is valid")
    }

    /// A lower chance state that feeds the reward loop with probability 1/2
    /// per round; every state is worth 1.
    pub fn g_abs() -> TwoLevelGame {
        let raw = RawGame::new(rat(1, 2))
            .state("u", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("l", Owner::Chance, Level::Lower, None)
            .edge("u", "l")
            .edge("u", "u")
            .prob("l", "l", rat(1, 2))
            .prob("l", "u", rat(1, 2));
        validate_game(&raw).expect("fixture is valid")
    }

    /// Structurally fine, but the lower state can never reach the upper
    /// level; fails the two-level condition.
    pub fn g_bad() -> TwoLevelGame {
        let raw = RawGame::new(rat(1, 2))
            .state("u", Owner::Player1, Level::Upper, Some(rat(1, 1)))
            .state("l", Owner::Player1, Level::Lower, None)
            .edge("u", "u")
            .edge("l", "l");
        validate_structure(&raw).expect("fixture is structurally valid")
    }
}

/// Knobs for random game generation. Weights may be zero (a zero lower
/// weight yields one-level games); at least one upper state is always
/// forced so rewards exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub min_states: usize,
    pub max_states: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    /// Relative weights for player 1, player 2, chance ownership.
    pub owner_weights: [u32; 3],
    /// Relative weights for upper, lower level.
    pub level_weights: [u32; 2],
    pub max_reward_numer: u32,
    pub max_reward_denom: u32,
    pub betas: Vec<Rational>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_states: 5,
            max_states: 7,
            min_degree: 1,
            max_degree: 3,
            owner_weights: [2, 1, 2],
            level_weights: [2, 1],
            max_reward_numer: 10,
            max_reward_denom: 10,
            betas: vec![rat(1, 3), rat(1, 2), rat(9, 10)],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("seed {seed} not repairable to validity in {rounds} rounds")]
    RepairFailed { seed: u64, rounds: u32 },
    #[error("generator produced an invalid game: {0}")]
    Internal(String),
}

const REPAIR_ROUNDS: u32 = 16;

fn validate_config(config: &GeneratorConfig) -> Result<(), GenError> {
    let bad = |msg: &str| Err(GenError::InvalidConfig(msg.to_string()));
    if config.min_states == 0 || config.min_states > config.max_states {
        return bad("state count range is empty");
    }
    if config.min_degree == 0 || config.min_degree > config.max_degree {
        return bad("degree range is empty");
    }
    if config.owner_weights.iter().sum::<u32>() == 0 {
        return bad("owner weights sum to zero");
    }
    if config.level_weights.iter().sum::<u32>() == 0 {
        return bad("level weights sum to zero");
    }
    if config.max_reward_numer == 0 || config.max_reward_denom == 0 {
        return bad("reward bounds must be positive");
    }
    if config.betas.is_empty() {
        return bad("no discount candidates");
    }
    for b in &config.betas {
        if *b <= Rational::zero() || *b >= Rational::one() {
            return bad("discount candidates must lie strictly between 0 and 1");
        }
    }
    Ok(())
}

fn weighted_pick(rng: &mut ChaCha8Rng, weights: &[u32]) -> usize {
    let total: u32 = weights.iter().sum();
    let mut x = rng.gen_range(0..total);
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    unreachable!("weights sum to total")
}

/// `k` distinct values from `0..n` by partial shuffle, returned sorted.
fn sample_distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

fn state_names(n: usize) -> Vec<String> {
    let width = (n - 1).to_string().len();
    (0..n).map(|i| format!("s{i:0width$}")).collect()
}

fn random_raw(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> RawGame {
    use crate::game::Level;

    let n = rng.gen_range(config.min_states..=config.max_states);
    let names = state_names(n);
    let owners: Vec<Owner> = (0..n)
        .map(|_| match weighted_pick(rng, &config.owner_weights) {
            0 => Owner::Player1,
            1 => Owner::Player2,
            _ => Owner::Chance,
        })
        .collect();
    let mut levels: Vec<Level> = (0..n)
        .map(|_| match weighted_pick(rng, &config.level_weights) {
            0 => Level::Upper,
            _ => Level::Lower,
        })
        .collect();
    if levels.iter().all(|l| *l == Level::Lower) {
        let i = rng.gen_range(0..n);
        levels[i] = Level::Upper;
    }

    let mut raw = RawGame::new(config.betas[rng.gen_range(0..config.betas.len())].clone());
    for i in 0..n {
        let reward = match levels[i] {
            Level::Upper => {
                let numer = rng.gen_range(1..=config.max_reward_numer);
                let denom = rng.gen_range(1..=config.max_reward_denom);
                Some(Rational::new(BigInt::from(numer), BigInt::from(denom)))
            }
            Level::Lower => None,
        };
        raw = raw.state(&names[i], owners[i], levels[i], reward);
    }
    for i in 0..n {
        let degree = rng.gen_range(config.min_degree..=config.max_degree).min(n);
        let targets = sample_distinct(rng, n, degree);
        match owners[i] {
            Owner::Chance => {
                let weights: Vec<u32> = (0..degree).map(|_| rng.gen_range(1..=9)).collect();
                let total: u32 = weights.iter().sum();
                for (t, w) in targets.iter().zip(&weights) {
                    let p = Rational::new(BigInt::from(*w), BigInt::from(total));
                    raw = raw.prob(&names[i], &names[*t], p);
                }
            }
            _ => {
                for t in targets {
                    raw = raw.edge(&names[i], &names[t]);
                }
            }
        }
    }
    raw
}

/// Redirect failing states toward the winning region: players get an edge
/// to the lowest upper state, chance rows blend half their mass onto it.
/// Player-2 states are skipped; they mend only once their successors do.
fn repair(raw: &mut RawGame, game: &TwoLevelGame, failing: &[String]) {
    let target = game.upper_states().next().expect("games carry an upper state");
    let target_name = game.name(target).to_string();
    for name in failing {
        let s = game.state_by_name(name).expect("violation names a state");
        match game.owner(s) {
            Owner::Player1 | Owner::Player2 => {
                if !game.has_edge(s, target) {
                    raw.edges.push((name.clone(), target_name.clone()));
                }
            }
            Owner::Chance => {
                let mut entries: Vec<(String, Rational)> = raw
                    .probs
                    .iter()
                    .filter(|(src, _, _)| src == name)
                    .map(|(_, dst, p)| (dst.clone(), p / rat(2, 1)))
                    .collect();
                raw.probs.retain(|(src, _, _)| src != name);
                match entries.iter_mut().find(|(dst, _)| *dst == target_name) {
                    Some((_, p)) => *p += rat(1, 2),
                    None => entries.push((target_name.clone(), rat(1, 2))),
                }
                for (dst, p) in entries {
                    raw.probs.push((name.clone(), dst, p));
                }
            }
        }
    }
}

/// Generate a random game and repair it until the two-level condition
/// holds. Deterministic per config; fails if some states stay unrepairable
/// (pure player-2 trap cycles), in which case callers advance the seed.
pub fn generate(config: &GeneratorConfig) -> Result<TwoLevelGame, GenError> {
    validate_config(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut raw = random_raw(config, &mut rng);
    let rebuild = |raw: &RawGame| {
        validate_structure(raw).map_err(|v| GenError::Internal(format!("{v:?}")))
    };
    let mut game = rebuild(&raw)?;
    for _ in 0..REPAIR_ROUNDS {
        match validate_two_level(&game) {
            Ok(()) => return Ok(game),
            Err(Violation::LowerStateCannotForceUpper(names)) => {
                repair(&mut raw, &game, &names);
                game = rebuild(&raw)?;
            }
            Err(other) => return Err(GenError::Internal(other.to_string())),
        }
    }
    Err(GenError::RepairFailed {
        seed: config.seed,
        rounds: REPAIR_ROUNDS,
    })
}

/// Generate without the repair stage: structurally valid, but the two-level
/// condition may fail. Useful for exercising the validator itself.
pub fn generate_structural(config: &GeneratorConfig) -> Result<TwoLevelGame, GenError> {
    validate_config(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let raw = random_raw(config, &mut rng);
    validate_structure(&raw).map_err(|v| GenError::Internal(format!("{v:?}")))
}

/// [`generate`], advancing the seed past unrepairable draws. Returns the
/// game and the seed that produced it.
pub fn generate_valid(
    config: &GeneratorConfig,
    max_attempts: u32,
) -> Result<(TwoLevelGame, u64), GenError> {
    let mut cfg = config.clone();
    let mut last = GenError::InvalidConfig("no attempts made".to_string());
    for _ in 0..max_attempts.max(1) {
        match generate(&cfg) {
            Ok(game) => return Ok((game, cfg.seed)),
            Err(e @ GenError::RepairFailed { .. }) => {
                last = e;
                cfg.seed = cfg.seed.wrapping_add(1);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Tolerances and budgets for the oracle suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub enum_cap: u64,
    pub vi_tol: f64,
    pub vi_bound: f64,
    pub vi_max_rounds: u64,
    pub sim_samples: usize,
    pub sim_horizon: usize,
    /// Standard-error multiplier for the simulation check.
    pub sim_sigma: f64,
    pub max_seed_attempts: u32,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            enum_cap: DEFAULT_ENUMERATION_CAP,
            vi_tol: 1e-10,
            vi_bound: 1e-6,
            vi_max_rounds: 200_000,
            sim_samples: 20_000,
            sim_horizon: 40,
            sim_sigma: 5.0,
            max_seed_attempts: 64,
        }
    }
}

/// One failed assertion: which game (by generation seed), which check, and
/// what went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteFailure {
    pub seed: u64,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub requested: usize,
    pub games: usize,
    pub passed: usize,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.games == self.requested
    }

    pub fn first_failing_seed(&self) -> Option<u64> {
        self.failures.first().map(|f| f.seed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite: {}/{} games passed ({} requested)",
            self.passed, self.games, self.requested
        )?;
        for fl in &self.failures {
            write!(f, "\nseed {} [{}] {}", fl.seed, fl.check, fl.detail)?;
        }
        Ok(())
    }
}

fn values_line(game: &TwoLevelGame, values: &crate::evaluation::ValueVector) -> String {
    game.states()
        .map(|s| format!("{}={}", game.name(s), format_rational(&values[s])))
        .collect::<Vec<_>>()
        .join(" ")
}

type Solver<'a> = &'a dyn Fn(&TwoLevelGame) -> Result<SolveResult, SolveError>;

/// All cross-checks for one game. The solver under test is injectable so
/// the harness itself can be tested against a deliberately broken solver.
fn run_checks(
    game: &TwoLevelGame,
    seed: u64,
    opts: &SuiteOptions,
    solver: Solver<'_>,
) -> Vec<SuiteFailure> {
    let mut failures = Vec::new();
    let fail = |check: &str, detail: String| SuiteFailure {
        seed,
        check: check.to_string(),
        detail,
    };

    let enumerated = match solve_enumerate_with_cap(game, opts.enum_cap) {
        Ok(r) => r,
        Err(e) => {
            failures.push(fail("enumeration", e.to_string()));
            return failures;
        }
    };
    let improved = match solver(game) {
        Ok(r) => r,
        Err(e) => {
            failures.push(fail("improvement", e.to_string()));
            return failures;
        }
    };
    if enumerated.values != improved.values {
        failures.push(fail(
            "oracle-equivalence",
            format!(
                "enumeration {} vs improvement {}",
                values_line(game, &enumerated.values),
                values_line(game, &improved.values)
            ),
        ));
    }

    if bellman_apply(game, &improved.values) != improved.values {
        failures.push(fail(
            "bellman-fixed-point",
            values_line(game, &improved.values),
        ));
    }

    let max_r = game.max_reward().expect("valid games carry a reward");
    let floor = game.discount() * game.min_reward().expect("valid games carry a reward");
    for s in game.states() {
        let v = &improved.values[s];
        if !is_canonical(v) {
            failures.push(fail(
                "canonical-rational",
                format!("{} at {}", format_rational(v), game.name(s)),
            ));
        }
        let below = *v < Rational::zero() || (game.is_upper(s) && *v < floor);
        if below || *v > max_r {
            failures.push(fail(
                "value-bounds",
                format!("{} at {}", format_rational(v), game.name(s)),
            ));
        }
    }

    for (label, profile) in [
        ("improvement", &improved.profile),
        ("enumeration", &enumerated.profile),
    ] {
        match certify_saddle(game, profile) {
            Ok(cert) if cert.is_valid() => {}
            Ok(_) => failures.push(fail(
                "saddle-certificate",
                format!("{label} profile fails certification"),
            )),
            Err(e) => failures.push(fail("saddle-certificate", format!("{label}: {e}"))),
        }
    }

    if game.is_player1_mdp() {
        match mdp_lp_solve(game) {
            Ok(v) if v == improved.values => {}
            Ok(v) => failures.push(fail("lp-equivalence", values_line(game, &v))),
            Err(e) => failures.push(fail("lp-equivalence", e.to_string())),
        }
        match best_response_p1(game, &StrategyMap::new()) {
            Ok((v, _)) if v == improved.values => {}
            Ok((v, _)) => failures.push(fail("response-equivalence", values_line(game, &v))),
            Err(e) => failures.push(fail("response-equivalence", e.to_string())),
        }
    }

    match freeze_lower(game, &improved.profile) {
        Ok(frozen) => match solver(&frozen) {
            Ok(fres) => {
                let mismatch = game.states().any(|s| {
                    let t = frozen
                        .state_by_name(game.name(s))
                        .expect("freezing keeps state names");
                    fres.values[t] != improved.values[s]
                });
                if mismatch {
                    failures.push(fail(
                        "freeze-preservation",
                        values_line(&frozen, &fres.values),
                    ));
                }
            }
            Err(e) => failures.push(fail("freeze-preservation", e.to_string())),
        },
        Err(e) => failures.push(fail("freeze-preservation", e.to_string())),
    }

    let vi = value_iteration(game, opts.vi_tol, opts.vi_max_rounds);
    let exact = improved.values.to_f64();
    let distance = vi
        .values
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !vi.converged || distance > opts.vi_bound {
        failures.push(fail(
            "value-iteration",
            format!("converged={} distance={distance:e}", vi.converged),
        ));
    }

    match simulate_value(
        game,
        &improved.profile,
        StateId(0),
        opts.sim_samples,
        opts.sim_horizon,
        seed,
    ) {
        Ok(rep) => {
            let slack = opts.sim_sigma * rep.standard_error + rep.truncation_bound + 1e-9;
            let error = (rep.estimate - exact[0]).abs();
            if error > slack {
                failures.push(fail(
                    "simulation",
                    format!("error {error:e} exceeds slack {slack:e}"),
                ));
            }
        }
        Err(e) => failures.push(fail("simulation", e.to_string())),
    }

    failures
}

/// Run the full cross-check battery on `count` generated games with
/// default tolerances.
pub fn oracle_suite(config: &GeneratorConfig, count: usize) -> SuiteReport {
    oracle_suite_with(config, count, &SuiteOptions::default())
}

/// [`oracle_suite`] with explicit tolerances. Game `i` draws from seed
/// `config.seed + (i << 16)`, leaving room for unrepairable-seed advances;
/// the whole report is a pure function of the arguments.
pub fn oracle_suite_with(
    config: &GeneratorConfig,
    count: usize,
    opts: &SuiteOptions,
) -> SuiteReport {
    let mut report = SuiteReport {
        requested: count,
        games: 0,
        passed: 0,
        failures: Vec::new(),
    };
    for i in 0..count {
        let mut cfg = config.clone();
        cfg.seed = config.seed.wrapping_add((i as u64) << 16);
        match generate_valid(&cfg, opts.max_seed_attempts) {
            Ok((game, used_seed)) => {
                report.games += 1;
                let fails = run_checks(&game, used_seed, opts, &solve_strategy_improvement);
                if fails.is_empty() {
                    report.passed += 1;
                }
                report.failures.extend(fails);
            }
            Err(e) => report.failures.push(SuiteFailure {
                seed: cfg.seed,
                check: "generation".to_string(),
                detail: e.to_string(),
            }),
        }
    }
    report
}

/// Run the cross-check battery on the solvable regression fixtures.
pub fn fixture_suite() -> SuiteReport {
    let games = [
        fixtures::g_loop(),
        fixtures::g_alt(),
        fixtures::g_choice(),
        fixtures::g_minmax(),
        fixtures::g_abs(),
    ];
    let opts = SuiteOptions::default();
    let mut report = SuiteReport {
        requested: games.len(),
        games: games.len(),
        passed: 0,
        failures: Vec::new(),
    };
    for (i, game) in games.iter().enumerate() {
        let fails = run_checks(game, i as u64, &opts, &solve_strategy_improvement);
        if fails.is_empty() {
            report.passed += 1;
        }
        report.failures.extend(fails);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Level, PureStrategyProfile};
    use crate::solvers::SolveMethod;

    #[test]
    fn fixtures_have_documented_shapes() {
        assert!(validate_two_level(&fixtures::g_loop()).is_ok());
        assert!(validate_two_level(&fixtures::g_alt()).is_ok());
        assert!(validate_two_level(&fixtures::g_choice()).is_ok());
        assert!(validate_two_level(&fixtures::g_minmax()).is_ok());
        assert!(validate_two_level(&fixtures::g_abs()).is_ok());
        assert!(validate_two_level(&fixtures::g_bad()).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let config = GeneratorConfig::default();
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a, b);
        let mut other = config;
        other.seed = 1;
        let c = generate(&other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_games_are_valid_and_in_range() {
        let mut config = GeneratorConfig::default();
        for seed in 0..25 {
            config.seed = seed;
            let (game, _) = generate_valid(&config, 64).unwrap();
            assert!(validate_two_level(&game).is_ok());
            assert!(game.state_count() >= 5 && game.state_count() <= 7);
            assert!(game.upper_states().next().is_some());
        }
    }

    #[test]
    fn zero_lower_weight_yields_one_level_games() {
        let config = GeneratorConfig {
            level_weights: [1, 0],
            ..GeneratorConfig::default()
        };
        let game = generate(&config).unwrap();
        assert!(game.states().all(|s| game.level(s) == Level::Upper));
    }

    #[test]
    fn zero_p2_weight_yields_mdps() {
        let config = GeneratorConfig {
            owner_weights: [2, 0, 1],
            ..GeneratorConfig::default()
        };
        let game = generate(&config).unwrap();
        assert!(game.is_player1_mdp());
    }

    #[test]
    fn config_validation_rejects_empty_ranges() {
        let mut config = GeneratorConfig::default();
        config.min_states = 8;
        assert!(matches!(generate(&config), Err(GenError::InvalidConfig(_))));
        let mut config = GeneratorConfig::default();
        config.betas = vec![rat(3, 2)];
        assert!(matches!(generate(&config), Err(GenError::InvalidConfig(_))));
        let mut config = GeneratorConfig::default();
        config.owner_weights = [0, 0, 0];
        assert!(matches!(generate(&config), Err(GenError::InvalidConfig(_))));
    }

    #[test]
    fn empty_suite_is_a_vacuous_pass() {
        let report = oracle_suite(&GeneratorConfig::default(), 0);
        assert!(report.ok());
        assert_eq!(report.games, 0);
    }

    #[test]
    fn fixture_suite_passes() {
        let report = fixture_suite();
        assert!(report.ok(), "{report}");
        assert_eq!(report.passed, 5);
    }

    #[test]
    fn small_random_suite_passes() {
        let report = oracle_suite(&GeneratorConfig::default(), 4);
        assert!(report.ok(), "{report}");
    }

    #[test]
    fn corrupted_solver_is_caught_by_the_harness() {
        // A "solver" that never improves player 1's initial strategy.
        let lazy = |game: &TwoLevelGame| -> Result<SolveResult, SolveError> {
            let sigma: StrategyMap = game
                .states_owned_by(Owner::Player1)
                .map(|s| (s, game.successors(s)[0]))
                .collect();
            let (values, pi) = crate::solvers::best_response_p2(game, &sigma)?;
            let profile = PureStrategyProfile::new(game, sigma, pi).unwrap();
            Ok(SolveResult {
                values,
                profile,
                method: SolveMethod::StrategyImprovement,
                iterations: 1,
            })
        };
        let game = fixtures::g_choice();
        let fails = run_checks(&game, 0, &SuiteOptions::default(), &lazy);
        assert!(fails.iter().any(|f| f.check == "oracle-equivalence"));
    }

    #[test]
    fn suite_reports_are_reproducible() {
        let config = GeneratorConfig::default();
        let a = oracle_suite(&config, 2);
        let b = oracle_suite(&config, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn report_display_lists_failures() {
        let report = SuiteReport {
            requested: 2,
            games: 2,
            passed: 1,
            failures: vec![SuiteFailure {
                seed: 7,
                check: "oracle-equivalence".to_string(),
                detail: "mismatch".to_string(),
            }],
        };
        let text = report.to_string();
        assert!(text.contains("1/2"));
        assert!(text.contains("seed 7 [oracle-equivalence] mismatch"));
    }

    #[test]
    fn structural_generation_skips_repair() {
        // Some seed in this range must produce a game failing the
        // two-level condition; repair would have fixed it.
        let mut config = GeneratorConfig::default();
        let mut saw_invalid = false;
        for seed in 0..40 {
            config.seed = seed;
            let game = generate_structural(&config).unwrap();
            if validate_two_level(&game).is_err() {
                saw_invalid = true;
                break;
            }
        }
        assert!(saw_invalid);
    }
}

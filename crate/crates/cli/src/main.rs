//! `tldg`: validate, solve, check, simulate, freeze, and generate two-level
//! discounted games in the `tldg/1` text format.
//!
//! Exit codes: 0 success (or `check` true), 1 `check` false or failing
//! suite, 2 parse/validation/computation error, 3 usage error. Diagnostics
//! go to the error stream; all regular output is deterministic given the
//! arguments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tldg_core::evaluation::value_iteration;
use tldg_core::format::{parse_game, parse_strategy, serialize_game};
use tldg_core::game::validate_two_level;
use tldg_core::rational::{format_rational, parse_rational};
use tldg_core::reductions::freeze_lower;
use tldg_core::semantics::simulate_value;
use tldg_core::solvers::{
    best_response_p1, decide, mdp_lp_solve, solve_enumerate, solve_strategy_improvement, Rel,
};
use tldg_core::testkit::{generate_valid, oracle_suite, GenError, GeneratorConfig};
use tldg_core::{Owner, PureStrategyProfile, Rational, StrategyMap, TwoLevelGame, ValueVector};

const VI_MAX_ROUNDS: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "tldg", version, about = "Two-level discounted game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a game file and check every validity condition.
    Validate { file: PathBuf },
    /// Compute game values and optimal strategies.
    Solve {
        file: PathBuf,
        /// si: strategy improvement; enum: strategy enumeration;
        /// lp: linear program (player-1 MDPs only); vi: value iteration
        /// (approximate, prints `~value` lines).
        #[arg(long, value_enum, default_value_t = Method::Si)]
        method: Method,
        /// Convergence tolerance for `--method vi`.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Decide a relation between a state's exact value and a rational.
    Check {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long, value_enum)]
        rel: RelArg,
        #[arg(long, value_parser = rational_arg)]
        value: Rational,
    },
    /// Estimate a state's value under fixed strategies by seeded sampling.
    Simulate {
        file: PathBuf,
        /// Player-1 strategy file; defaults to the empty strategy.
        #[arg(long)]
        sigma: Option<PathBuf>,
        /// Player-2 strategy file; defaults to the empty strategy.
        #[arg(long)]
        pi: Option<PathBuf>,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Number of upper-level visits per sample path.
        #[arg(long, default_value_t = 40)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replace the lower level by direct chance moves to upper states,
    /// preserving values under the given profile.
    Freeze {
        file: PathBuf,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        pi: Option<PathBuf>,
        /// Output file; defaults to standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random valid game.
    Gen {
        #[command(flatten)]
        config: ConfigFlags,
        /// Output file; defaults to standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-check all solvers on generated games.
    Suite {
        #[command(flatten)]
        config: ConfigFlags,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Si,
    Vi,
    Enum,
    Lp,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelArg {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl RelArg {
    fn to_rel(self) -> Rel {
        match self {
            RelArg::Ge => Rel::Ge,
            RelArg::Gt => Rel::Gt,
            RelArg::Le => Rel::Le,
            RelArg::Lt => Rel::Lt,
            RelArg::Eq => Rel::Eq,
        }
    }
}

/// Generator knobs shared by `gen` and `suite`.
#[derive(Args)]
struct ConfigFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    min_states: usize,
    #[arg(long, default_value_t = 7)]
    max_states: usize,
    #[arg(long, default_value_t = 1)]
    min_degree: usize,
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    /// Relative weights `p1,p2,chance` for state ownership.
    #[arg(long, default_value = "2,1,2")]
    owner_weights: String,
    /// Relative weights `upper,lower` for state levels.
    #[arg(long, default_value = "2,1")]
    level_weights: String,
    #[arg(long, default_value_t = 10)]
    max_reward_numer: u32,
    #[arg(long, default_value_t = 10)]
    max_reward_denom: u32,
    /// Comma-separated discount candidates.
    #[arg(long, default_value = "1/3,1/2,9/10")]
    betas: String,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// A diagnostic plus the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("tldg: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate { file } => {
            load_game(&file)?;
            Ok(0)
        }
        Command::Solve { file, method, tol } => run_solve(&file, method, tol),
        Command::Check {
            file,
            state,
            rel,
            value,
        } => {
            let game = load_game(&file)?;
            let s = resolve_state(&game, &state)?;
            let holds = decide(&game, s, rel.to_rel(), &value)
                .map_err(|e| fail(2, e.to_string()))?;
            println!("{}", if holds { "true" } else { "false" });
            Ok(if holds { 0 } else { 1 })
        }
        Command::Simulate {
            file,
            sigma,
            pi,
            start,
            samples,
            horizon,
            seed,
        } => {
            let game = load_game(&file)?;
            let profile = load_profile(&game, sigma.as_deref(), pi.as_deref())?;
            let s = resolve_state(&game, &start)?;
            let report = simulate_value(&game, &profile, s, samples, horizon, seed)
                .map_err(|e| fail(2, e.to_string()))?;
            println!("estimate {}", report.estimate);
            println!("stderr {}", report.standard_error);
            println!("samples {}", report.samples);
            println!("horizon {}", report.truncation_horizon);
            println!("seed {}", report.seed);
            println!("truncation_bound {}", report.truncation_bound);
            println!("capped {}", report.step_capped_samples);
            Ok(0)
        }
        Command::Freeze {
            file,
            sigma,
            pi,
            output,
        } => {
            let game = load_game(&file)?;
            let profile = load_profile(&game, sigma.as_deref(), pi.as_deref())?;
            let frozen =
                freeze_lower(&game, &profile).map_err(|e| fail(2, e.to_string()))?;
            emit(output.as_deref(), &serialize_game(&frozen))?;
            Ok(0)
        }
        Command::Gen { config, output } => {
            let config = build_config(&config)?;
            let (game, _) = generate_valid(&config, 64).map_err(|e| match e {
                GenError::InvalidConfig(_) => fail(3, e.to_string()),
                _ => fail(2, e.to_string()),
            })?;
            emit(output.as_deref(), &serialize_game(&game))?;
            Ok(0)
        }
        Command::Suite { config, count } => {
            let config = build_config(&config)?;
            let report = oracle_suite(&config, count);
            println!("{report}");
            Ok(if report.ok() { 0 } else { 1 })
        }
    }
}

fn run_solve(file: &Path, method: Method, tol: f64) -> Result<u8, Failure> {
    let game = load_game(file)?;
    match method {
        Method::Si | Method::Enum => {
            let result = if method == Method::Si {
                solve_strategy_improvement(&game)
            } else {
                solve_enumerate(&game)
            }
            .map_err(|e| fail(2, e.to_string()))?;
            print_values(&game, &result.values);
            print_strategy(&game, "p1", result.profile.sigma());
            print_strategy(&game, "p2", result.profile.pi());
        }
        Method::Lp => {
            let values = mdp_lp_solve(&game).map_err(|e| fail(2, e.to_string()))?;
            let (check, sigma) = best_response_p1(&game, &StrategyMap::new())
                .map_err(|e| fail(2, e.to_string()))?;
            if check != values {
                return Err(fail(2, "internal: linear program and policy iteration disagree"));
            }
            print_values(&game, &values);
            print_strategy(&game, "p1", &sigma);
        }
        Method::Vi => {
            let result = value_iteration(&game, tol, VI_MAX_ROUNDS);
            if !result.converged {
                return Err(fail(2, "value iteration did not converge"));
            }
            for s in game.states() {
                println!("~value {} {}", game.name(s), result.values[s.index()]);
            }
        }
    }
    Ok(0)
}

fn print_values(game: &TwoLevelGame, values: &ValueVector) {
    for s in game.states() {
        println!("value {} {}", game.name(s), format_rational(&values[s]));
    }
}

fn print_strategy(game: &TwoLevelGame, player: &str, map: &StrategyMap) {
    for (s, t) in map {
        println!("strategy {player} {} {}", game.name(*s), game.name(*t));
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<TwoLevelGame, Failure> {
    let text = read_file(path)?;
    let game =
        parse_game(&text).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    validate_two_level(&game).map_err(|v| fail(2, format!("{}: {v}", path.display())))?;
    Ok(game)
}

fn load_strategy(
    path: Option<&Path>,
    game: &TwoLevelGame,
    expect: Owner,
) -> Result<StrategyMap, Failure> {
    let Some(path) = path else {
        return Ok(StrategyMap::new());
    };
    let text = read_file(path)?;
    let (player, map) =
        parse_strategy(&text, game).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    if player != expect {
        return Err(fail(
            2,
            format!("{}: expected a {} strategy", path.display(), expect.token()),
        ));
    }
    Ok(map)
}

fn load_profile(
    game: &TwoLevelGame,
    sigma: Option<&Path>,
    pi: Option<&Path>,
) -> Result<PureStrategyProfile, Failure> {
    let sigma = load_strategy(sigma, game, Owner::Player1)?;
    let pi = load_strategy(pi, game, Owner::Player2)?;
    PureStrategyProfile::new(game, sigma, pi).map_err(|e| fail(2, e.to_string()))
}

fn resolve_state(game: &TwoLevelGame, name: &str) -> Result<tldg_core::StateId, Failure> {
    game.state_by_name(name)
        .ok_or_else(|| fail(2, format!("unknown state `{name}`")))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|e| fail(2, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list<T, F>(label: &str, text: &str, parse_one: F) -> Result<Vec<T>, Failure>
where
    F: Fn(&str) -> Result<T, String>,
{
    text.split(',')
        .map(|tok| {
            parse_one(tok.trim()).map_err(|e| fail(3, format!("invalid {label} `{tok}`: {e}")))
        })
        .collect()
}

fn build_config(flags: &ConfigFlags) -> Result<GeneratorConfig, Failure> {
    let owners = parse_list("owner weight", &flags.owner_weights, |t| {
        t.parse::<u32>().map_err(|e| e.to_string())
    })?;
    let levels = parse_list("level weight", &flags.level_weights, |t| {
        t.parse::<u32>().map_err(|e| e.to_string())
    })?;
    let betas = parse_list("discount", &flags.betas, |t| {
        parse_rational(t).map_err(|e| e.to_string())
    })?;
    let &[p1, p2, chance] = owners.as_slice() else {
        return Err(fail(3, "--owner-weights takes three comma-separated weights"));
    };
    let &[upper, lower] = levels.as_slice() else {
        return Err(fail(3, "--level-weights takes two comma-separated weights"));
    };
    Ok(GeneratorConfig {
        min_states: flags.min_states,
        max_states: flags.max_states,
        min_degree: flags.min_degree,
        max_degree: flags.max_degree,
        owner_weights: [p1, p2, chance],
        level_weights: [upper, lower],
        max_reward_numer: flags.max_reward_numer,
        max_reward_denom: flags.max_reward_denom,
        betas,
        seed: flags.seed,
    })
}

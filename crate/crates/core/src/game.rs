//! Domain types for two-level discounted games, structural validation, and
//! the qualitative almost-sure reachability check.
//!
//! States are referenced externally by name and internally by dense index.
//! Validation sorts states lexicographically by name before assigning
//! indices, so iteration order is deterministic everywhere downstream.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// Dense index of a state in a validated game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Controller of the successor choice at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Player1,
    Player2,
    Chance,
}

impl Owner {
    pub fn token(self) -> &'static str {
        match self {
            Owner::Player1 => "p1",
            Owner::Player2 => "p2",
            Owner::Chance => "chance",
        }
    }

    pub fn from_token(s: &str) -> Option<Owner> {
        match s {
            "p1" => Some(Owner::Player1),
            "p2" => Some(Owner::Player2),
            "chance" => Some(Owner::Chance),
            _ => None,
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Level of a state. Upper states carry rewards and advance the discount
/// clock; lower states play an undiscounted reachability game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Upper,
    Lower,
}

impl Level {
    pub fn token(self) -> &'static str {
        match self {
            Level::Upper => "upper",
            Level::Lower => "lower",
        }
    }

    pub fn from_token(s: &str) -> Option<Level> {
        match s {
            "upper" => Some(Level::Upper),
            "lower" => Some(Level::Lower),
            _ => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Exact probability distribution over successor states, support only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    entries: BTreeMap<StateId, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributionError {
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("probability for state {0} is not positive")]
    NonPositive(StateId),
    #[error("probabilities sum to {0}, not 1")]
    SumNotOne(String),
}

impl Distribution {
    /// Entries must be positive and sum to exactly 1.
    pub fn new(entries: BTreeMap<StateId, Rational>) -> Result<Self, DistributionError> {
        if entries.is_empty() {
            return Err(DistributionError::EmptySupport);
        }
        let mut sum = Rational::zero();
        for (s, p) in &entries {
            if *p <= Rational::zero() {
                return Err(DistributionError::NonPositive(*s));
            }
            sum += p;
        }
        if !sum.is_one() {
            return Err(DistributionError::SumNotOne(format_rational(&sum)));
        }
        Ok(Distribution { entries })
    }

    pub fn probability(&self, t: StateId) -> Option<&Rational> {
        self.entries.get(&t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &Rational)> + '_ {
        self.entries.iter().map(|(s, p)| (*s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One state of an unvalidated game description.
#[derive(Debug, Clone)]
pub struct RawState {
    pub name: String,
    pub owner: Owner,
    pub level: Level,
    pub reward: Option<Rational>,
}

/// Unvalidated game description, as assembled by a parser, a generator, or
/// by hand in tests. `edges` lists successors of player states; `probs`
/// lists chance successors, whose edges are implied.
#[derive(Debug, Clone)]
pub struct RawGame {
    pub discount: Rational,
    pub states: Vec<RawState>,
    pub edges: Vec<(String, String)>,
    pub probs: Vec<(String, String, Rational)>,
}

impl RawGame {
    pub fn new(discount: Rational) -> Self {
        RawGame {
            discount,
            states: Vec::new(),
            edges: Vec::new(),
            probs: Vec::new(),
        }
    }

    pub fn state(mut self, name: &str, owner: Owner, level: Level, reward: Option<Rational>) -> Self {
        self.states.push(RawState {
            name: name.to_string(),
            owner,
            level,
            reward,
        });
        self
    }

    pub fn edge(mut self, src: &str, dst: &str) -> Self {
        self.edges.push((src.to_string(), dst.to_string()));
        self
    }

    pub fn prob(mut self, src: &str, dst: &str, p: Rational) -> Self {
        self.probs.push((src.to_string(), dst.to_string(), p));
        self
    }
}

/// A defect found while validating a game description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("game has no states")]
    EmptyGame,
    #[error("invalid state name `{0}`")]
    InvalidName(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("edge {src} -> {dst} references an unknown state")]
    DanglingEdge { src: String, dst: String },
    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: String, dst: String },
    #[error("explicit edge on chance state `{0}`; chance successors are given by prob entries")]
    EdgeOnChance(String),
    #[error("state `{0}` has no successors")]
    EmptySuccessors(String),
    #[error("bad distribution at `{state}`: {reason}")]
    BadDistribution { state: String, reason: String },
    #[error("upper state `{0}` has no reward")]
    MissingReward(String),
    #[error("lower state `{0}` carries a reward")]
    RewardOnLower(String),
    #[error("reward at `{state}` must be positive, got {value}")]
    NonPositiveReward { state: String, value: String },
    #[error("discount must satisfy 0 < discount < 1, got {0}")]
    DiscountOutOfRange(String),
    #[error("lower states cannot force reaching the upper level: {}", .0.join(", "))]
    LowerStateCannotForceUpper(Vec<String>),
}

/// A structurally valid two-level game. Immutable after construction; build
/// one with [`validate_structure`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoLevelGame {
    names: Vec<String>,
    owners: Vec<Owner>,
    levels: Vec<Level>,
    edges: Vec<Vec<StateId>>,
    chance: Vec<Option<Distribution>>,
    rewards: Vec<Option<Rational>>,
    discount: Rational,
}

fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Check every structural invariant and assemble the dense representation.
///
/// States are sorted by name; all violations are collected rather than only
/// the first, except that name-level defects abort early because they poison
/// edge resolution.
pub fn validate_structure(raw: &RawGame) -> Result<TwoLevelGame, Vec<Violation>> {
    let mut violations = Vec::new();

    if raw.states.is_empty() {
        return Err(vec![Violation::EmptyGame]);
    }

    for st in &raw.states {
        if !is_valid_name(&st.name) {
            violations.push(Violation::InvalidName(st.name.clone()));
        }
    }
    let mut sorted: Vec<&RawState> = raw.states.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    for pair in sorted.windows(2) {
        if pair[0].name == pair[1].name {
            violations.push(Violation::DuplicateState(pair[0].name.clone()));
        }
    }
    if !violations.is_empty() {
        return Err(violations);
    }

    let names: Vec<String> = sorted.iter().map(|s| s.name.clone()).collect();
    let owners: Vec<Owner> = sorted.iter().map(|s| s.owner).collect();
    let levels: Vec<Level> = sorted.iter().map(|s| s.level).collect();
    let n = names.len();
    let lookup = |name: &str| {
        names
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
            .map(StateId)
    };

    let beta = raw.discount.clone();
    if beta <= Rational::zero() || beta >= Rational::one() {
        violations.push(Violation::DiscountOutOfRange(format_rational(&beta)));
    }

    let mut rewards: Vec<Option<Rational>> = vec![None; n];
    for id in 0..n {
        match (levels[id], &sorted[id].reward) {
            (Level::Upper, None) => violations.push(Violation::MissingReward(names[id].clone())),
            (Level::Upper, Some(r)) => {
                if *r <= Rational::zero() {
                    violations.push(Violation::NonPositiveReward {
                        state: names[id].clone(),
                        value: format_rational(r),
                    });
                } else {
                    rewards[id] = Some(r.clone());
                }
            }
            (Level::Lower, Some(_)) => violations.push(Violation::RewardOnLower(names[id].clone())),
            (Level::Lower, None) => {}
        }
    }

    let mut adj: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut seen_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (src, dst) in &raw.edges {
        let (Some(s), Some(t)) = (lookup(src), lookup(dst)) else {
            violations.push(Violation::DanglingEdge {
                src: src.clone(),
                dst: dst.clone(),
            });
            continue;
        };
        if owners[s.0] == Owner::Chance {
            violations.push(Violation::EdgeOnChance(src.clone()));
            continue;
        }
        if !seen_edges.insert((s.0, t.0)) {
            violations.push(Violation::DuplicateEdge {
                src: src.clone(),
                dst: dst.clone(),
            });
            continue;
        }
        adj[s.0].push(t);
    }

    let mut rows: Vec<BTreeMap<StateId, Rational>> = vec![BTreeMap::new(); n];
    let mut row_bad: Vec<bool> = vec![false; n];
    for (src, dst, p) in &raw.probs {
        let (Some(s), Some(t)) = (lookup(src), lookup(dst)) else {
            violations.push(Violation::DanglingEdge {
                src: src.clone(),
                dst: dst.clone(),
            });
            continue;
        };
        if owners[s.0] != Owner::Chance {
            violations.push(Violation::BadDistribution {
                state: src.clone(),
                reason: "probability entry on a non-chance state".to_string(),
            });
            continue;
        }
        if *p <= Rational::zero() {
            violations.push(Violation::BadDistribution {
                state: src.clone(),
                reason: format!("probability {} for `{}` is not positive", format_rational(p), dst),
            });
            row_bad[s.0] = true;
            continue;
        }
        if rows[s.0].insert(t, p.clone()).is_some() {
            violations.push(Violation::BadDistribution {
                state: src.clone(),
                reason: format!("duplicate probability entry for `{}`", dst),
            });
            row_bad[s.0] = true;
        }
    }

    let mut chance: Vec<Option<Distribution>> = vec![None; n];
    for id in 0..n {
        if owners[id] != Owner::Chance {
            continue;
        }
        if rows[id].is_empty() {
            if !row_bad[id] {
                violations.push(Violation::EmptySuccessors(names[id].clone()));
            }
            continue;
        }
        if row_bad[id] {
            continue;
        }
        let sum = rows[id]
            .values()
            .fold(Rational::zero(), |acc, p| acc + p);
        if !sum.is_one() {
            violations.push(Violation::BadDistribution {
                state: names[id].clone(),
                reason: format!("probabilities sum to {}", format_rational(&sum)),
            });
            continue;
        }
        adj[id] = rows[id].keys().copied().collect();
        chance[id] = Some(Distribution {
            entries: rows[id].clone(),
        });
    }

    for id in 0..n {
        if owners[id] == Owner::Chance {
            continue;
        }
        adj[id].sort();
        if adj[id].is_empty() {
            violations.push(Violation::EmptySuccessors(names[id].clone()));
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    Ok(TwoLevelGame {
        names,
        owners,
        levels,
        edges: adj,
        chance,
        rewards,
        discount: beta,
    })
}

/// Require that from every lower state, player 1 can force reaching the
/// upper level with probability 1.
pub fn validate_two_level(game: &TwoLevelGame) -> Result<(), Violation> {
    let upper: BTreeSet<StateId> = game.upper_states().collect();
    let reach = almost_sure_reach_set(game, &upper);
    let failing: Vec<String> = game
        .lower_states()
        .filter(|s| !reach.contains(s))
        .map(|s| game.name(s).to_string())
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Violation::LowerStateCannotForceUpper(failing))
    }
}

/// Run both validation stages in one step.
pub fn validate_game(raw: &RawGame) -> Result<TwoLevelGame, Vec<Violation>> {
    let game = validate_structure(raw)?;
    validate_two_level(&game).map_err(|v| vec![v])?;
    Ok(game)
}

impl TwoLevelGame {
    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.names.len()).map(StateId)
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
            .map(StateId)
    }

    pub fn owner(&self, s: StateId) -> Owner {
        self.owners[s.0]
    }

    pub fn level(&self, s: StateId) -> Level {
        self.levels[s.0]
    }

    pub fn is_upper(&self, s: StateId) -> bool {
        self.levels[s.0] == Level::Upper
    }

    pub fn is_lower(&self, s: StateId) -> bool {
        self.levels[s.0] == Level::Lower
    }

    /// Successors in ascending index order. For chance states this is the
    /// distribution support.
    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.edges[s.0]
    }

    pub fn has_edge(&self, s: StateId, t: StateId) -> bool {
        self.edges[s.0].binary_search(&t).is_ok()
    }

    pub fn distribution(&self, s: StateId) -> Option<&Distribution> {
        self.chance[s.0].as_ref()
    }

    pub fn reward(&self, s: StateId) -> Option<&Rational> {
        self.rewards[s.0].as_ref()
    }

    pub fn discount(&self) -> &Rational {
        &self.discount
    }

    pub fn upper_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(|s| self.is_upper(*s))
    }

    pub fn lower_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(|s| self.is_lower(*s))
    }

    pub fn states_owned_by(&self, owner: Owner) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(move |s| self.owner(*s) == owner)
    }

    pub fn is_player1_mdp(&self) -> bool {
        self.owners.iter().all(|o| *o != Owner::Player2)
    }

    pub fn max_reward(&self) -> Option<Rational> {
        self.rewards.iter().flatten().max().cloned()
    }

    pub fn min_reward(&self) -> Option<Rational> {
        self.rewards.iter().flatten().min().cloned()
    }
}

/// States from which player 1 can force reaching `target` with probability 1.
///
/// Target states count as reached the moment the play is there, so they are
/// treated as absorbing regardless of their outgoing edges. The computation
/// alternates two fixpoints on a shrinking live set W: the positive-reach
/// closure of the target inside W (player 1 and chance existential, player 2
/// universal), and the player-2 positive attractor of the complement
/// (player 2 and chance existential, player 1 universal), which is removed
/// from W. When the complement is empty, W is the answer.
pub fn almost_sure_reach_set(game: &TwoLevelGame, target: &BTreeSet<StateId>) -> BTreeSet<StateId> {
    let n = game.state_count();
    let is_target: Vec<bool> = {
        let mut v = vec![false; n];
        for s in target {
            if s.0 < n {
                v[s.0] = true;
            }
        }
        v
    };
    let mut alive = vec![true; n];
    loop {
        let seed: Vec<bool> = (0..n).map(|i| alive[i] && is_target[i]).collect();
        let reach = least_closure(game, &is_target, &alive, &seed, |o| o != Owner::Player2);
        let bad: Vec<bool> = (0..n).map(|i| alive[i] && !reach[i]).collect();
        if bad.iter().all(|b| !*b) {
            return (0..n).filter(|&i| alive[i]).map(StateId).collect();
        }
        let attr = least_closure(game, &is_target, &alive, &bad, |o| o != Owner::Player1);
        for i in 0..n {
            if attr[i] {
                alive[i] = false;
            }
        }
    }
}

/// Least set containing `seed` and closed under one-step membership inside
/// the live set: existential owners join when some live successor is in the
/// set, universal owners when all their live successors are (vacuously never).
/// Target states act as self-loops.
fn least_closure(
    game: &TwoLevelGame,
    is_target: &[bool],
    alive: &[bool],
    seed: &[bool],
    existential: impl Fn(Owner) -> bool,
) -> Vec<bool> {
    let n = game.state_count();
    let succ_list: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            if !alive[s] {
                return Vec::new();
            }
            if is_target[s] {
                return vec![s];
            }
            game.successors(StateId(s))
                .iter()
                .map(|t| t.0)
                .filter(|t| alive[*t])
                .collect()
        })
        .collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, succs) in succ_list.iter().enumerate() {
        for &t in succs {
            preds[t].push(s);
        }
    }
    let mut missing: Vec<usize> = succ_list.iter().map(Vec::len).collect();
    let mut inset = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in 0..n {
        if seed[s] && alive[s] {
            inset[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if inset[s] || !alive[s] {
                continue;
            }
            missing[s] -= 1;
            let joins = existential(game.owner(StateId(s))) || missing[s] == 0;
            if joins {
                inset[s] = true;
                queue.push_back(s);
            }
        }
    }
    inset
}

/// Pure memoryless choices for one player: owned state to chosen successor.
pub type StrategyMap = BTreeMap<StateId, StateId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("state {0} is not owned by the expected player")]
    NotOwned(String),
    #[error("missing choice for state {0}")]
    MissingChoice(String),
    #[error("{1} is not a successor of {0}")]
    IllegalChoice(String, String),
}

pub(crate) fn check_strategy_map(
    game: &TwoLevelGame,
    map: &StrategyMap,
    owner: Owner,
) -> Result<(), ProfileError> {
    let describe = |s: &StateId| {
        if s.0 < game.state_count() {
            game.name(*s).to_string()
        } else {
            format!("#{}", s.0)
        }
    };
    for (s, t) in map {
        if s.0 >= game.state_count() || game.owner(*s) != owner {
            return Err(ProfileError::NotOwned(describe(s)));
        }
        if t.0 >= game.state_count() || !game.has_edge(*s, *t) {
            return Err(ProfileError::IllegalChoice(describe(s), describe(t)));
        }
    }
    for s in game.states_owned_by(owner) {
        if !map.contains_key(&s) {
            return Err(ProfileError::MissingChoice(game.name(s).to_string()));
        }
    }
    Ok(())
}

/// A pure memoryless strategy for each player, total on owned states with
/// edge-respecting choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureStrategyProfile {
    sigma: StrategyMap,
    pi: StrategyMap,
}

impl PureStrategyProfile {
    pub fn new(
        game: &TwoLevelGame,
        sigma: StrategyMap,
        pi: StrategyMap,
    ) -> Result<Self, ProfileError> {
        check_strategy_map(game, &sigma, Owner::Player1)?;
        check_strategy_map(game, &pi, Owner::Player2)?;
        Ok(PureStrategyProfile { sigma, pi })
    }

    /// Assemble a profile from maps already known to be legal, e.g. built by
    /// walking successor lists.
    pub(crate) fn new_unchecked(sigma: StrategyMap, pi: StrategyMap) -> Self {
        PureStrategyProfile { sigma, pi }
    }

    pub fn sigma(&self) -> &StrategyMap {
        &self.sigma
    }

    pub fn pi(&self) -> &StrategyMap {
        &self.pi
    }

    pub fn choice(&self, s: StateId) -> Option<StateId> {
        self.sigma.get(&s).or_else(|| self.pi.get(&s)).copied()
    }
}

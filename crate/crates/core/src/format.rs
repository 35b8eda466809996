//! The `tldg/1` text format for games and the `tldg-strategy/1` format for
//! pure strategies. Serialization is canonical: states sorted by name,
//! rationals reduced, so parse then serialize is byte-stable.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::game::{
    check_strategy_map, validate_structure, Level, Owner, ProfileError, RawGame, StrategyMap,
    TwoLevelGame, Violation,
};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate state `{name}`")]
    DuplicateState { line: usize, name: String },
    #[error("line {line}: unknown state `{name}`")]
    UnknownState { line: usize, name: String },
    #[error("missing `discount` line")]
    MissingDiscount,
    #[error("invalid game: {}", render(.0))]
    Invalid(Vec<Violation>),
    #[error("strategy does not fit the game: {0}")]
    Strategy(#[from] ProfileError),
}

fn render(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Strip a trailing `#` comment and split into whitespace tokens.
fn tokenize(raw_line: &str) -> Vec<&str> {
    let line = match raw_line.find('#') {
        Some(i) => &raw_line[..i],
        None => raw_line,
    };
    line.split_whitespace().collect()
}

fn parse_rat(line: usize, token: &str) -> Result<Rational, ParseError> {
    parse_rational(token).map_err(|e| syntax(line, e.to_string()))
}

/// Parse a `tldg/1` game description. The result is structurally valid;
/// callers wanting the two-level condition run `validate_two_level` on top.
pub fn parse_game(text: &str) -> Result<TwoLevelGame, ParseError> {
    let mut header_seen = false;
    let mut discount: Option<Rational> = None;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut states: Vec<(String, Owner, Level, Option<Rational>)> = Vec::new();
    let mut edges: Vec<(usize, String, String)> = Vec::new();
    let mut probs: Vec<(usize, String, String, Rational)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        if !header_seen {
            if tokens == ["tldg", "1"] {
                header_seen = true;
                continue;
            }
            return Err(syntax(line, "expected header `tldg 1`"));
        }
        match tokens[0] {
            "discount" => {
                if tokens.len() != 2 {
                    return Err(syntax(line, "expected `discount <rational>`"));
                }
                if discount.is_some() {
                    return Err(syntax(line, "duplicate `discount` line"));
                }
                discount = Some(parse_rat(line, tokens[1])?);
            }
            "state" => {
                if tokens.len() < 4 || tokens.len() > 5 {
                    return Err(syntax(
                        line,
                        "expected `state <name> <owner> <level> [reward=<rational>]`",
                    ));
                }
                let name = tokens[1].to_string();
                if !seen.insert(name.clone()) {
                    return Err(ParseError::DuplicateState { line, name });
                }
                let owner = Owner::from_token(tokens[2])
                    .ok_or_else(|| syntax(line, format!("unknown owner `{}`", tokens[2])))?;
                let level = Level::from_token(tokens[3])
                    .ok_or_else(|| syntax(line, format!("unknown level `{}`", tokens[3])))?;
                let reward = match tokens.get(4) {
                    Some(tok) => match tok.strip_prefix("reward=") {
                        Some(rest) => Some(parse_rat(line, rest)?),
                        None => return Err(syntax(line, format!("unexpected token `{tok}`"))),
                    },
                    None => None,
                };
                states.push((name, owner, level, reward));
            }
            "edge" => {
                if tokens.len() != 3 {
                    return Err(syntax(line, "expected `edge <src> <dst>`"));
                }
                edges.push((line, tokens[1].to_string(), tokens[2].to_string()));
            }
            "prob" => {
                if tokens.len() != 4 {
                    return Err(syntax(line, "expected `prob <src> <dst> <rational>`"));
                }
                let p = parse_rat(line, tokens[3])?;
                probs.push((line, tokens[1].to_string(), tokens[2].to_string(), p));
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    if !header_seen {
        return Err(syntax(1, "expected header `tldg 1`"));
    }
    let discount = discount.ok_or(ParseError::MissingDiscount)?;

    let endpoints = edges
        .iter()
        .map(|(line, src, dst)| (*line, src, dst))
        .chain(probs.iter().map(|(line, src, dst, _)| (*line, src, dst)));
    for (line, src, dst) in endpoints {
        for name in [src, dst] {
            if !seen.contains(name) {
                return Err(ParseError::UnknownState {
                    line,
                    name: name.clone(),
                });
            }
        }
    }

    let mut raw = RawGame::new(discount);
    for (name, owner, level, reward) in states {
        raw = raw.state(&name, owner, level, reward);
    }
    for (_, src, dst) in edges {
        raw = raw.edge(&src, &dst);
    }
    for (_, src, dst, p) in probs {
        raw = raw.prob(&src, &dst, p);
    }
    validate_structure(&raw).map_err(ParseError::Invalid)
}

/// Canonical text for a validated game. States come out in name order
/// (their id order), all `edge` lines before all `prob` lines.
pub fn serialize_game(game: &TwoLevelGame) -> String {
    let mut out = String::from("tldg 1\n");
    out.push_str(&format!("discount {}\n", format_rational(game.discount())));
    for s in game.states() {
        let mut line = format!(
            "state {} {} {}",
            game.name(s),
            game.owner(s).token(),
            game.level(s).token()
        );
        if let Some(r) = game.reward(s) {
            line.push_str(&format!(" reward={}", format_rational(r)));
        }
        out.push_str(&line);
        out.push('\n');
    }
    for s in game.states() {
        if game.owner(s) == Owner::Chance {
            continue;
        }
        for t in game.successors(s) {
            out.push_str(&format!("edge {} {}\n", game.name(s), game.name(*t)));
        }
    }
    for s in game.states() {
        if let Some(dist) = game.distribution(s) {
            for (t, p) in dist.iter() {
                out.push_str(&format!(
                    "prob {} {} {}\n",
                    game.name(s),
                    game.name(t),
                    format_rational(p)
                ));
            }
        }
    }
    out
}

/// Parse a `tldg-strategy/1` file against a game. Returns the declared
/// player and a checked strategy map covering exactly that player's states.
pub fn parse_strategy(text: &str, game: &TwoLevelGame) -> Result<(Owner, StrategyMap), ParseError> {
    let mut header_seen = false;
    let mut player: Option<Owner> = None;
    let mut map = StrategyMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        if !header_seen {
            if tokens == ["tldg-strategy", "1"] {
                header_seen = true;
                continue;
            }
            return Err(syntax(line, "expected header `tldg-strategy 1`"));
        }
        match tokens[0] {
            "player" => {
                if tokens.len() != 2 {
                    return Err(syntax(line, "expected `player p1|p2`"));
                }
                if player.is_some() {
                    return Err(syntax(line, "duplicate `player` line"));
                }
                match Owner::from_token(tokens[1]) {
                    Some(o @ (Owner::Player1 | Owner::Player2)) => player = Some(o),
                    _ => return Err(syntax(line, format!("unknown player `{}`", tokens[1]))),
                }
            }
            "choose" => {
                if tokens.len() != 3 {
                    return Err(syntax(line, "expected `choose <state> <successor>`"));
                }
                if player.is_none() {
                    return Err(syntax(line, "`player` must come before `choose`"));
                }
                let resolve = |name: &str| {
                    game.state_by_name(name).ok_or(ParseError::UnknownState {
                        line,
                        name: name.to_string(),
                    })
                };
                let s = resolve(tokens[1])?;
                let t = resolve(tokens[2])?;
                if map.insert(s, t).is_some() {
                    return Err(syntax(
                        line,
                        format!("duplicate choice for state `{}`", tokens[1]),
                    ));
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    if !header_seen {
        return Err(syntax(1, "expected header `tldg-strategy 1`"));
    }
    let player = player.ok_or_else(|| syntax(1, "missing `player p1|p2` line"))?;
    check_strategy_map(game, &map, player)?;
    Ok((player, map))
}

/// Canonical text for a strategy map; `choose` lines in state-id order.
pub fn serialize_strategy(game: &TwoLevelGame, player: Owner, map: &StrategyMap) -> String {
    let mut out = String::from("tldg-strategy 1\n");
    out.push_str(&format!("player {}\n", player.token()));
    for (s, t) in map {
        out.push_str(&format!("choose {} {}\n", game.name(*s), game.name(*t)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate_two_level;
    use crate::rational::rat;
    use crate::testkit::fixtures;

    #[test]
    fn serializes_the_alternating_game_canonically() {
        let text = serialize_game(&fixtures::g_alt());
        assert_eq!(
            text,
            "tldg 1\n\
             discount 1/2\n\
             state u1 p1 upper reward=2\n\
             state u2 p1 upper reward=6\n\
             edge u1 u2\n\
             edge u2 u1\n"
        );
    }

    #[test]
    fn round_trips_all_fixtures() {
        for game in [
            fixtures::g_loop(),
            fixtures::g_alt(),
            fixtures::g_choice(),
            fixtures::g_minmax(),
            fixtures::g_abs(),
            fixtures::g_bad(),
        ] {
            let text = serialize_game(&game);
            let back = parse_game(&text).unwrap();
            assert_eq!(back, game);
            assert_eq!(serialize_game(&back), text);
        }
    }

    #[test]
    fn ignores_comments_blank_lines_and_odd_spacing() {
        let text = "\n# a game\n  tldg 1\n\ndiscount 1/2   # half\nstate  u  p1 upper reward=1\nedge u u # loop\n";
        let game = parse_game(text).unwrap();
        assert_eq!(game, fixtures::g_loop());
    }

    #[test]
    fn rejects_missing_or_wrong_header() {
        assert_eq!(
            parse_game("discount 1/2\n"),
            Err(syntax(1, "expected header `tldg 1`"))
        );
        assert_eq!(
            parse_game("tldg 2\n"),
            Err(syntax(1, "expected header `tldg 1`"))
        );
        assert_eq!(parse_game(""), Err(syntax(1, "expected header `tldg 1`")));
    }

    #[test]
    fn reports_discount_defects() {
        let out = parse_game("tldg 1\nstate u p1 upper reward=1\nedge u u\n");
        assert_eq!(out, Err(ParseError::MissingDiscount));

        let out = parse_game("tldg 1\ndiscount 1/2\ndiscount 1/3\nstate u p1 upper reward=1\nedge u u\n");
        assert!(matches!(out, Err(ParseError::Syntax { line: 3, .. })));

        let out = parse_game("tldg 1\ndiscount 3/2\nstate u p1 upper reward=1\nedge u u\n");
        match out {
            Err(ParseError::Invalid(vs)) => {
                assert!(vs.contains(&Violation::DiscountOutOfRange("3/2".into())))
            }
            other => panic!("expected DiscountOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn short_probability_rows_fail_validation() {
        let text = "tldg 1\ndiscount 1/2\nstate u p1 upper reward=1\nstate l chance lower\nedge u u\nprob l u 1/2\n";
        match parse_game(text) {
            Err(ParseError::Invalid(vs)) => {
                assert!(vs.iter().any(|v| matches!(v, Violation::BadDistribution { .. })))
            }
            other => panic!("expected BadDistribution, got {other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers_for_name_errors() {
        let text = "tldg 1\ndiscount 1/2\nstate u p1 upper reward=1\nedge u v\n";
        assert_eq!(
            parse_game(text),
            Err(ParseError::UnknownState {
                line: 4,
                name: "v".to_string()
            })
        );

        let text = "tldg 1\ndiscount 1/2\nstate u p1 upper reward=1\nstate u p1 upper reward=2\nedge u u\n";
        assert_eq!(
            parse_game(text),
            Err(ParseError::DuplicateState {
                line: 4,
                name: "u".to_string()
            })
        );
    }

    #[test]
    fn rejects_malformed_directives() {
        let cases = [
            "tldg 1\nfoo bar\n",
            "tldg 1\nstate u p3 upper\n",
            "tldg 1\nstate u p1 middle\n",
            "tldg 1\nstate u p1 upper extra\n",
            "tldg 1\nstate u\n",
            "tldg 1\nedge u\n",
            "tldg 1\nprob l u\n",
            "tldg 1\ndiscount 1/0\n",
            "tldg 1\nstate u p1 upper reward=x\n",
        ];
        for text in cases {
            assert!(
                matches!(parse_game(text), Err(ParseError::Syntax { .. })),
                "expected syntax error for {text:?}"
            );
        }
    }

    #[test]
    fn parsed_bad_fixture_fails_only_the_two_level_check() {
        let game = parse_game(&serialize_game(&fixtures::g_bad())).unwrap();
        assert!(validate_two_level(&game).is_err());
    }

    #[test]
    fn strategy_round_trip() {
        let game = fixtures::g_choice();
        let u = game.state_by_name("u").unwrap();
        let a = game.state_by_name("a").unwrap();
        let b = game.state_by_name("b").unwrap();
        let map: StrategyMap = [(u, b), (a, a), (b, b)].into_iter().collect();
        let text = serialize_strategy(&game, Owner::Player1, &map);
        assert_eq!(
            text,
            "tldg-strategy 1\nplayer p1\nchoose a a\nchoose b b\nchoose u b\n"
        );
        let (player, back) = parse_strategy(&text, &game).unwrap();
        assert_eq!(player, Owner::Player1);
        assert_eq!(back, map);
    }

    #[test]
    fn empty_strategies_are_legal_when_the_player_owns_nothing() {
        let game = fixtures::g_abs();
        let (player, map) = parse_strategy("tldg-strategy 1\nplayer p2\n", &game).unwrap();
        assert_eq!(player, Owner::Player2);
        assert!(map.is_empty());
    }

    #[test]
    fn strategy_defects_are_reported() {
        let game = fixtures::g_choice();
        let u = "tldg-strategy 1\nplayer p1\nchoose u a\nchoose a a\nchoose b b\n";
        assert!(parse_strategy(u, &game).is_ok());

        let missing_player = "tldg-strategy 1\nchoose u a\n";
        assert!(matches!(
            parse_strategy(missing_player, &game),
            Err(ParseError::Syntax { line: 2, .. })
        ));

        let chance = "tldg-strategy 1\nplayer chance\n";
        assert!(matches!(
            parse_strategy(chance, &game),
            Err(ParseError::Syntax { line: 2, .. })
        ));

        let unknown = "tldg-strategy 1\nplayer p1\nchoose z a\n";
        assert!(matches!(
            parse_strategy(unknown, &game),
            Err(ParseError::UnknownState { line: 3, .. })
        ));

        let duplicate = "tldg-strategy 1\nplayer p1\nchoose u a\nchoose u b\n";
        assert!(matches!(
            parse_strategy(duplicate, &game),
            Err(ParseError::Syntax { line: 4, .. })
        ));

        let illegal = "tldg-strategy 1\nplayer p1\nchoose u a\nchoose a b\nchoose b b\n";
        assert!(matches!(
            parse_strategy(illegal, &game),
            Err(ParseError::Strategy(ProfileError::IllegalChoice(_, _)))
        ));

        let not_owned = "tldg-strategy 1\nplayer p2\nchoose u a\n";
        assert!(matches!(
            parse_strategy(not_owned, &game),
            Err(ParseError::Strategy(ProfileError::NotOwned(_)))
        ));

        let incomplete = "tldg-strategy 1\nplayer p1\nchoose u a\n";
        assert!(matches!(
            parse_strategy(incomplete, &game),
            Err(ParseError::Strategy(ProfileError::MissingChoice(_)))
        ));
    }

    #[test]
    fn rationals_serialize_reduced() {
        let raw = RawGame::new(rat(2, 4))
            .state("u", Owner::Player1, Level::Upper, Some(rat(6, 4)))
            .edge("u", "u");
        let game = crate::game::validate_game(&raw).unwrap();
        let text = serialize_game(&game);
        assert!(text.contains("discount 1/2"));
        assert!(text.contains("reward=3/2"));
    }
}

//! Line-oriented text format for concurrent systems.
//!
//! ```text
//! [alphabet] a b c d
//! [independence] a d ; b d
//! [states] s0 s1
//! [base] s0
//! [action]
//! s0 a s0
//! s0 c BOT
//! ```
//!
//! `#` starts a comment. Section content may follow the header on the same
//! line or on the lines below it. Missing action entries are ⊥.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::monoid::TraceMonoid;
use crate::system::{ConcurrentSystem, SINK_NAME};

/// One section with its content lines, each tagged by 1-based line number.
#[derive(Debug)]
pub(crate) struct Section<'a> {
    pub name: &'a str,
    pub line: usize,
    pub body: Vec<(usize, &'a str)>,
}

/// Splits text into sections, dropping comments and blank lines.
pub(crate) fn sections<'a>(text: &'a str, known: &[&str]) -> Result<Vec<Section<'a>>> {
    let mut out: Vec<Section<'a>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(end) = rest.find(']') else {
                return Err(syntax(line, "unterminated section header"));
            };
            let name = rest[..end].trim();
            if !known.contains(&name) {
                return Err(syntax(line, format!("unknown section `[{name}]`")));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(syntax(line, format!("section `[{name}]` appears twice")));
            }
            let mut body = Vec::new();
            let tail = rest[end + 1..].trim();
            if !tail.is_empty() {
                body.push((line, tail));
            }
            out.push(Section { name, line, body });
        } else {
            match out.last_mut() {
                Some(s) => s.body.push((line, content)),
                None => return Err(syntax(line, "content before the first section header")),
            }
        }
    }
    Ok(out)
}

pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

pub(crate) fn find<'s, 'a>(secs: &'s [Section<'a>], name: &str) -> Option<&'s Section<'a>> {
    secs.iter().find(|s| s.name == name)
}

/// Whitespace tokens of a section, with their line numbers.
pub(crate) fn tokens<'a>(sec: &Section<'a>) -> Vec<(usize, &'a str)> {
    sec.body
        .iter()
        .flat_map(|&(l, t)| t.split_whitespace().map(move |w| (l, w)))
        .collect()
}

fn required<'s, 'a>(secs: &'s [Section<'a>], name: &str, eof: usize) -> Result<&'s Section<'a>> {
    find(secs, name).ok_or_else(|| syntax(eof, format!("missing required section `[{name}]`")))
}

pub fn parse_spec(text: &str) -> Result<ConcurrentSystem> {
    let secs = sections(text, &["alphabet", "independence", "states", "base", "action"])?;
    let eof = text.lines().count().max(1);

    let alpha_sec = required(&secs, "alphabet", eof)?;
    let alphabet: Vec<&str> = tokens(alpha_sec).into_iter().map(|(_, t)| t).collect();
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    if let Some(sec) = find(&secs, "independence") {
        for &(line, text) in &sec.body {
            for chunk in text.split(';') {
                let words: Vec<&str> = chunk.split_whitespace().collect();
                match words.as_slice() {
                    [] => {}
                    [a, b] => pairs.push((a, b)),
                    _ => {
                        return Err(syntax(
                            line,
                            format!("expected a letter pair, found `{}`", chunk.trim()),
                        ))
                    }
                }
            }
        }
    }
    let monoid = TraceMonoid::new(&alphabet, &pairs).map_err(|e| e.at_line(alpha_sec.line))?;

    let states_sec = required(&secs, "states", eof)?;
    let states: Vec<String> = tokens(states_sec).into_iter().map(|(_, t)| t.to_string()).collect();
    let state_index = |name: &str, line: usize| {
        states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()).at_line(line))
    };
    for s in &states {
        if s == SINK_NAME {
            return Err(Error::ReservedStateName(s.clone()).at_line(states_sec.line));
        }
    }

    let base = match find(&secs, "base") {
        None => 0,
        Some(sec) => match tokens(sec).as_slice() {
            [(line, name)] => state_index(name, *line)?,
            _ => return Err(syntax(sec.line, "`[base]` expects exactly one state")),
        },
    };

    let n = monoid.len();
    let mut action: Vec<Option<usize>> = vec![None; states.len() * n];
    let mut seen = vec![false; states.len() * n];
    if let Some(sec) = find(&secs, "action") {
        for &(line, text) in &sec.body {
            let words: Vec<&str> = text.split_whitespace().collect();
            let [from, letter, to] = words.as_slice() else {
                return Err(syntax(line, "expected `state letter state|BOT`"));
            };
            let from = state_index(from, line)?;
            let a = monoid.letter(letter).map_err(|e| e.at_line(line))?;
            let to = if *to == SINK_NAME {
                None
            } else {
                Some(state_index(to, line)?)
            };
            let slot = from * n + a.0;
            if seen[slot] && action[slot] != to {
                return Err(syntax(
                    line,
                    format!("conflicting action for `{} {letter}`", states[from]),
                ));
            }
            seen[slot] = true;
            action[slot] = to;
        }
    }
    ConcurrentSystem::from_table(monoid, states, action, base).map_err(|e| match e {
        Error::DiamondViolation { .. } => e,
        other => other.at_line(states_sec.line),
    })
}

/// Renders a system in the format read by [`parse_spec`]. Only enabled
/// action entries are written.
pub fn render_spec(sys: &ConcurrentSystem) -> String {
    let m = sys.monoid();
    let mut out = String::new();
    writeln!(out, "[alphabet] {}", m.alphabet().join(" ")).unwrap();
    let pairs: Vec<String> = m
        .independent_pairs()
        .into_iter()
        .map(|(a, b)| format!("{} {}", m.name(a), m.name(b)))
        .collect();
    if !pairs.is_empty() {
        writeln!(out, "[independence] {}", pairs.join(" ; ")).unwrap();
    }
    writeln!(out, "[states] {}", sys.states().join(" ")).unwrap();
    writeln!(out, "[base] {}", sys.state_name(sys.base())).unwrap();
    writeln!(out, "[action]").unwrap();
    for (s, a, t) in sys.state_edges() {
        writeln!(out, "{} {} {}", sys.state_name(s), m.name(a), sys.state_name(t)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: &str = "\
# two-state example
[alphabet] a b c d
[independence] a d ; b d
[states] α0 α1
[action]
α0 a α0
α0 b α1
α0 c BOT   # explicit sink
α0 d α0
α1 c α0
α1 d α1
";

    #[test]
    fn parses_and_round_trips() {
        let sys = parse_spec(E1).unwrap();
        assert_eq!(sys.num_states(), 2);
        assert_eq!(sys.act_named("α0", "bcd").unwrap(), Some(0));
        let again = parse_spec(&render_spec(&sys)).unwrap();
        assert_eq!(again, sys);
    }

    #[test]
    fn content_on_following_lines() {
        let text = "[alphabet]\na b\n[independence]\na b\n[states]\nx\n[action] x a x\nx b x\n";
        let sys = parse_spec(text).unwrap();
        assert!(sys.monoid().are_independent(crate::Letter(0), crate::Letter(1)));
        assert_eq!(sys.state_edges().len(), 2);
    }

    #[test]
    fn missing_states_is_a_syntax_error() {
        let err = parse_spec("[alphabet] a\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = E1.replace("α1 c α0", "α1 c α7");
        assert_eq!(
            parse_spec(&bad).unwrap_err(),
            Error::AtLine {
                line: 10,
                source: Box::new(Error::UnknownState("α7".into()))
            }
        );
        let bad = E1.replace("α1 d α1", "α1 d");
        assert!(matches!(parse_spec(&bad).unwrap_err(), Error::Syntax { line: 11, .. }));
        let bad = E1.replace("[action]", "[actions]");
        assert!(matches!(parse_spec(&bad).unwrap_err(), Error::Syntax { line: 5, .. }));
        assert!(matches!(
            parse_spec("a b\n[alphabet] a").unwrap_err(),
            Error::Syntax { line: 1, .. }
        ));
        let bad = E1.replace("[independence] a d ; b d", "[independence] a d e");
        assert!(matches!(parse_spec(&bad).unwrap_err(), Error::Syntax { line: 3, .. }));
    }

    #[test]
    fn diamond_violation_propagates() {
        let bad = E1.replace("α0 d α0", "α0 d α1");
        assert!(matches!(parse_spec(&bad).unwrap_err(), Error::DiamondViolation { .. }));
    }

    #[test]
    fn conflicting_entries_and_reserved_names() {
        let bad = format!("{E1}α0 a α1\n");
        assert!(matches!(parse_spec(&bad).unwrap_err(), Error::Syntax { line: 12, .. }));
        let dup_same = format!("{E1}α0 a α0\n");
        assert!(parse_spec(&dup_same).is_ok());
        let bad = E1.replace("[states] α0 α1", "[states] α0 α1 BOT");
        assert_eq!(
            parse_spec(&bad).unwrap_err(),
            Error::AtLine {
                line: 4,
                source: Box::new(Error::ReservedStateName("BOT".into()))
            }
        );
    }

    #[test]
    fn base_section() {
        let with_base = E1.replace("[action]", "[base] α1\n[action]");
        assert_eq!(parse_spec(&with_base).unwrap().base(), 1);
        let bad = E1.replace("[action]", "[base] α0 α1\n[action]");
        assert!(matches!(parse_spec(&bad).unwrap_err(), Error::Syntax { line: 5, .. }));
    }
}

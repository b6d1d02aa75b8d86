//! Safe Petri nets and their marking-graph systems.
//!
//! ```text
//! [places] p q r
//! [transitions] t u
//! [flow] p -> t, t -> q
//! q -> u, u -> p
//! [marking] p
//! ```

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::format::{find, sections, syntax, tokens, Section};
use crate::monoid::TraceMonoid;
use crate::system::ConcurrentSystem;

pub const DEFAULT_MARKING_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafePetriNet {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    /// Input places per transition.
    pub pre: Vec<Vec<usize>>,
    /// Output places per transition.
    pub post: Vec<Vec<usize>>,
    pub initial: Vec<bool>,
}

fn names<'a>(sec: Option<&Section<'a>>, what: &str, eof: usize) -> Result<Vec<String>> {
    let sec = sec.ok_or_else(|| syntax(eof, format!("missing required section `[{what}]`")))?;
    let mut out: Vec<String> = Vec::new();
    for (line, t) in tokens(sec) {
        if out.iter().any(|x| x == t) {
            return Err(syntax(line, format!("`{t}` is declared twice")));
        }
        out.push(t.to_string());
    }
    Ok(out)
}

pub fn parse_petri(text: &str) -> Result<SafePetriNet> {
    let secs = sections(text, &["places", "transitions", "flow", "marking"])?;
    let eof = text.lines().count().max(1);
    let places = names(find(&secs, "places"), "places", eof)?;
    let transitions = names(find(&secs, "transitions"), "transitions", eof)?;
    if let Some(p) = places.iter().find(|p| transitions.contains(p)) {
        return Err(syntax(eof, format!("`{p}` names both a place and a transition")));
    }
    let place = |s: &str| places.iter().position(|p| p == s);
    let trans = |s: &str| transitions.iter().position(|t| t == s);

    let mut pre = vec![Vec::new(); transitions.len()];
    let mut post = vec![Vec::new(); transitions.len()];
    if let Some(sec) = find(&secs, "flow") {
        for &(line, body) in &sec.body {
            for arc in body.split(',') {
                let arc = arc.trim();
                if arc.is_empty() {
                    continue;
                }
                let Some((from, to)) = arc.split_once("->") else {
                    return Err(syntax(line, format!("expected `x -> y`, found `{arc}`")));
                };
                let (from, to) = (from.trim(), to.trim());
                match (place(from), trans(to), trans(from), place(to)) {
                    (Some(p), Some(t), _, _) => pre[t].push(p),
                    (_, _, Some(t), Some(p)) => post[t].push(p),
                    _ => return Err(syntax(line, format!("arc `{arc}` must join a place and a transition"))),
                }
            }
        }
    }
    for l in pre.iter_mut().chain(post.iter_mut()) {
        l.sort_unstable();
        l.dedup();
    }

    let mut initial = vec![false; places.len()];
    if let Some(sec) = find(&secs, "marking") {
        for (line, t) in tokens(sec) {
            let p = place(t).ok_or_else(|| syntax(line, format!("unknown place `{t}`")))?;
            initial[p] = true;
        }
    }
    Ok(SafePetriNet {
        places,
        transitions,
        pre,
        post,
        initial,
    })
}

impl SafePetriNet {
    fn neighbourhood(&self, t: usize) -> Vec<bool> {
        let mut n = vec![false; self.places.len()];
        for &p in self.pre[t].iter().chain(&self.post[t]) {
            n[p] = true;
        }
        n
    }

    pub fn marking_name(&self, m: &[bool]) -> String {
        let marked: Vec<&str> = (0..m.len())
            .filter(|&p| m[p])
            .map(|p| self.places[p].as_str())
            .collect();
        format!("{{{}}}", marked.join(","))
    }

    /// Letters are transitions, independent when their neighbourhoods are
    /// disjoint; states are the reachable markings `m0, m1, …` in BFS order.
    /// Returns the system and the marked places of each state.
    pub fn to_system(&self, cap: usize) -> Result<(ConcurrentSystem, Vec<Vec<String>>)> {
        let nt = self.transitions.len();
        let hoods: Vec<Vec<bool>> = (0..nt).map(|t| self.neighbourhood(t)).collect();
        let mut pairs = Vec::new();
        for t in 0..nt {
            for u in t + 1..nt {
                if !(0..self.places.len()).any(|p| hoods[t][p] && hoods[u][p]) {
                    pairs.push((self.transitions[t].clone(), self.transitions[u].clone()));
                }
            }
        }
        let monoid = TraceMonoid::new(&self.transitions, &pairs)?;

        let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut markings: Vec<Vec<bool>> = vec![self.initial.clone()];
        index.insert(self.initial.clone(), 0);
        let mut action: Vec<Option<usize>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let m = markings[i].clone();
            let mut row = vec![None; nt];
            for (t, slot) in row.iter_mut().enumerate() {
                if !self.pre[t].iter().all(|&p| m[p]) {
                    continue;
                }
                let mut next = m.clone();
                for &p in &self.pre[t] {
                    next[p] = false;
                }
                for &p in &self.post[t] {
                    if next[p] {
                        return Err(Error::NotOneBounded {
                            marking: self.marking_name(&m),
                            transition: self.transitions[t].clone(),
                        });
                    }
                    next[p] = true;
                }
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if markings.len() >= cap {
                            return Err(Error::StateExplosion(cap));
                        }
                        let j = markings.len();
                        index.insert(next.clone(), j);
                        markings.push(next);
                        queue.push_back(j);
                        j
                    }
                };
                *slot = Some(j);
            }
            // BFS pops states in index order, so rows are appended in order.
            debug_assert_eq!(action.len(), i * nt);
            action.extend(row);
        }
        let states = (0..markings.len()).map(|i| format!("m{i}")).collect();
        let table = markings
            .iter()
            .map(|m| (0..m.len()).filter(|&p| m[p]).map(|p| self.places[p].clone()).collect())
            .collect();
        let sys = ConcurrentSystem::from_table(monoid, states, action, 0)?;
        Ok((sys, table))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_input_place_makes_transitions_dependent() {
        let net = parse_petri("[places] p q r\n[transitions] t u\n[flow] p -> t, p -> u, t -> q, u -> r\n[marking] p")
            .unwrap();
        let (sys, marks) = net.to_system(DEFAULT_MARKING_CAP).unwrap();
        assert!(sys.monoid().independent_pairs().is_empty());
        assert_eq!(
            marks,
            [vec!["p".to_string()], vec!["q".to_string()], vec!["r".to_string()]]
        );
    }

    #[test]
    fn disjoint_loops_commute() {
        let text = "\
[places] p1 p2 q1 q2
[transitions] t1 t2 u1 u2
[flow] p1 -> t1, t1 -> p2, p2 -> t2, t2 -> p1
q1 -> u1, u1 -> q2, q2 -> u2, u2 -> q1
[marking] p1 q1
";
        let (sys, marks) = parse_petri(text).unwrap().to_system(DEFAULT_MARKING_CAP).unwrap();
        assert_eq!(sys.num_states(), 4);
        assert_eq!(marks.len(), 4);
        let m = sys.monoid();
        assert!(m.are_independent(m.letter("t1").unwrap(), m.letter("u1").unwrap()));
        assert!(!m.are_independent(m.letter("t1").unwrap(), m.letter("t2").unwrap()));
        assert!(sys.is_irreducible() || !m.is_irreducible());
    }

    #[test]
    fn second_token_is_rejected() {
        let net = parse_petri("[places] p q\n[transitions] t\n[flow] p -> t, t -> p, t -> q\n[marking] p q").unwrap();
        assert_eq!(
            net.to_system(DEFAULT_MARKING_CAP).unwrap_err(),
            Error::NotOneBounded {
                marking: "{p,q}".into(),
                transition: "t".into()
            }
        );
    }

    #[test]
    fn marking_cap() {
        let text =
            "[places] a b c\n[transitions] x y z\n[flow] a -> x, x -> a\nb -> y, y -> c, c -> z, z -> b\n[marking] a b";
        let net = parse_petri(text).unwrap();
        assert_eq!(net.to_system(1).unwrap_err(), Error::StateExplosion(1));
        assert_eq!(net.to_system(10).unwrap().0.num_states(), 2);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse_petri("[places] p\n[transitions] t\n[flow] p -> q"),
            Err(Error::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_petri("[places] p\n[transitions] t\n[flow] p t"),
            Err(Error::Syntax { line: 3, .. })
        ));
        assert!(matches!(parse_petri("[transitions] t"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_petri("[places] p\n[transitions] t\n[marking] z"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }
}

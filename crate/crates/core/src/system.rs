//! Concurrent systems: a trace monoid acting on a finite state set with an
//! absorbing sink ⊥.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::monoid::{Clique, Letter, TraceMonoid};

/// Index into [`ConcurrentSystem::states`].
pub type State = usize;

/// Name reserved for the sink in text formats.
pub const SINK_NAME: &str = "BOT";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcurrentSystem {
    monoid: TraceMonoid,
    states: Vec<String>,
    /// Row-major `[state][letter]`; `None` is ⊥.
    action: Vec<Option<State>>,
    base: State,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemClassification {
    pub trivial: bool,
    pub accessible: bool,
    pub alive: bool,
    pub monoid_irreducible: bool,
    pub irreducible: bool,
    /// First `(from, to)` pair with `to` unreachable from `from`.
    pub unreachable: Option<(String, String)>,
    /// `(state, letter)` pairs where the letter can never be fired after
    /// leaving the state.
    pub dead: Vec<(String, String)>,
    /// Connected components of the Coxeter graph, by letter name.
    pub coxeter_components: Vec<Vec<String>>,
}

/// An execution whose letters at `chain` form a dependence-chained
/// sequence covering the alphabet, starting with the requested letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingExecution {
    pub word: Vec<Letter>,
    pub chain: Vec<usize>,
}

impl ConcurrentSystem {
    /// Builds a system from `(state, letter, target)` triples. Missing
    /// entries are ⊥.
    pub fn new<S: AsRef<str>>(monoid: TraceMonoid, states: &[S], transitions: &[(S, S, S)]) -> Result<Self> {
        let names = check_state_names(states)?;
        let n = monoid.len();
        let mut action = vec![None; names.len() * n];
        let state = |s: &str| {
            names
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| Error::UnknownState(s.to_string()))
        };
        for (from, letter, to) in transitions {
            let from = state(from.as_ref())?;
            let a = monoid.letter(letter.as_ref())?;
            action[from * n + a.0] = Some(state(to.as_ref())?);
        }
        Self::from_table(monoid, names, action, 0)
    }

    /// Builds a system from a row-major action table. Validates the
    /// commutation diamonds.
    pub fn from_table(
        monoid: TraceMonoid,
        states: Vec<String>,
        action: Vec<Option<State>>,
        base: State,
    ) -> Result<Self> {
        let states = check_state_names(&states)?;
        assert_eq!(action.len(), states.len() * monoid.len(), "action table shape");
        assert!(base < states.len(), "base state out of range");
        assert!(
            action.iter().flatten().all(|&t| t < states.len()),
            "action target out of range"
        );
        let sys = ConcurrentSystem {
            monoid,
            states,
            action,
            base,
        };
        sys.check_diamonds()?;
        Ok(sys)
    }

    /// The one-state system with total action, whose executions are all
    /// traces of the monoid.
    pub fn canonical(monoid: TraceMonoid) -> Self {
        let action = vec![Some(0); monoid.len()];
        ConcurrentSystem {
            monoid,
            states: vec!["*".to_string()],
            action,
            base: 0,
        }
    }

    fn check_diamonds(&self) -> Result<()> {
        let pairs = self.monoid.independent_pairs();
        for s in 0..self.states.len() {
            for &(a, b) in &pairs {
                if self.act(s, &[a, b]) != self.act(s, &[b, a]) {
                    return Err(Error::DiamondViolation {
                        state: self.states[s].clone(),
                        a: self.monoid.name(a).to_string(),
                        b: self.monoid.name(b).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn with_base(mut self, name: &str) -> Result<Self> {
        self.base = self.state(name)?;
        Ok(self)
    }

    /// A copy with one action entry replaced, revalidated.
    pub fn with_transition(&self, from: &str, letter: &str, to: Option<&str>) -> Result<Self> {
        let from = self.state(from)?;
        let a = self.monoid.letter(letter)?;
        let to = to.map(|t| self.state(t)).transpose()?;
        let mut action = self.action.clone();
        action[from * self.monoid.len() + a.0] = to;
        Self::from_table(self.monoid.clone(), self.states.clone(), action, self.base)
    }

    pub fn monoid(&self) -> &TraceMonoid {
        &self.monoid
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: State) -> &str {
        &self.states[s]
    }

    pub fn state(&self, name: &str) -> Result<State> {
        self.states
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn base(&self) -> State {
        self.base
    }

    pub fn action_table(&self) -> &[Option<State>] {
        &self.action
    }

    pub fn step(&self, s: State, a: Letter) -> Option<State> {
        self.action[s * self.monoid.len() + a.0]
    }

    /// Left-to-right fold of the action; ⊥ is absorbing.
    pub fn act(&self, s: State, word: &[Letter]) -> Option<State> {
        word.iter().try_fold(s, |s, &a| self.step(s, a))
    }

    pub fn act_clique(&self, s: State, c: Clique) -> Option<State> {
        c.letters().try_fold(s, |s, a| self.step(s, a))
    }

    /// Name-based action, for callers holding text.
    pub fn act_named(&self, state: &str, word: &str) -> Result<Option<State>> {
        let s = self.state(state)?;
        Ok(self.act(s, &self.monoid.parse_word(word)?))
    }

    /// Cliques `c` with `s·c ≠ ⊥`, including ε, in canonical order.
    pub fn cliques_from(&self, s: State) -> Vec<Clique> {
        self.monoid
            .cliques()
            .iter()
            .copied()
            .filter(|&c| self.act_clique(s, c).is_some())
            .collect()
    }

    /// Non-empty cliques enabled at `s`, in canonical order.
    pub fn enabled_cliques(&self, s: State) -> Vec<Clique> {
        self.cliques_from(s).into_iter().filter(|c| !c.is_empty()).collect()
    }

    pub fn enabled_letters(&self, s: State) -> Vec<Letter> {
        self.monoid.letters().filter(|&a| self.step(s, a).is_some()).collect()
    }

    /// Arcs `(from, letter, to)` of the labelled multigraph of states.
    pub fn state_edges(&self) -> Vec<(State, Letter, State)> {
        let mut out = Vec::new();
        for s in 0..self.num_states() {
            for a in self.monoid.letters() {
                if let Some(t) = self.step(s, a) {
                    out.push((s, a, t));
                }
            }
        }
        out
    }

    /// Successor states by single letters, deduplicated and sorted.
    pub fn state_successors(&self, s: State) -> Vec<State> {
        let mut v: Vec<State> = self.monoid.letters().filter_map(|a| self.step(s, a)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// States reachable from `s` by some execution, `s` included.
    pub fn reachable_from(&self, s: State) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in self.state_successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn is_accessible(&self) -> bool {
        (0..self.num_states()).all(|s| self.reachable_from(s).iter().all(|&r| r))
    }

    pub fn is_trivial(&self) -> bool {
        self.action.iter().all(|t| t.is_none())
    }

    pub fn classify(&self) -> SystemClassification {
        let trivial = self.is_trivial();
        let mut unreachable = None;
        let mut dead = Vec::new();
        for s in 0..self.num_states() {
            let reach = self.reachable_from(s);
            if unreachable.is_none() {
                if let Some(t) = reach.iter().position(|&r| !r) {
                    unreachable = Some((self.states[s].clone(), self.states[t].clone()));
                }
            }
            for a in self.monoid.letters() {
                let fireable = (0..self.num_states()).any(|t| reach[t] && self.step(t, a).is_some());
                if !fireable {
                    dead.push((self.states[s].clone(), self.monoid.name(a).to_string()));
                }
            }
        }
        let accessible = unreachable.is_none();
        let alive = dead.is_empty();
        let monoid_irreducible = self.monoid.is_irreducible();
        SystemClassification {
            trivial,
            accessible,
            alive,
            monoid_irreducible,
            irreducible: accessible && alive && monoid_irreducible,
            unreachable,
            dead,
            coxeter_components: self
                .monoid
                .coxeter_components()
                .into_iter()
                .map(|c| c.into_iter().map(|a| self.monoid.name(a).to_string()).collect())
                .collect(),
        }
    }

    pub fn is_irreducible(&self) -> bool {
        self.classify().irreducible
    }

    /// The system over `Σ ∖ {a}` with the same states and the induced action.
    pub fn restrict(&self, a: Letter) -> ConcurrentSystem {
        let monoid = self.monoid.without(a);
        let n = self.monoid.len();
        let action = (0..self.num_states())
            .flat_map(|s| (0..n).filter(|&b| b != a.0).map(move |b| (s, b)))
            .map(|(s, b)| self.action[s * n + b])
            .collect();
        ConcurrentSystem {
            monoid,
            states: self.states.clone(),
            action,
            base: self.base,
        }
    }

    /// Shortest word leading from `s` to a state enabling `a`, by BFS over
    /// single letters; ties broken by letter order.
    fn shortest_enabling(&self, s: State, a: Letter) -> Option<Vec<Letter>> {
        let mut parent: Vec<Option<(State, Letter)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if self.step(u, a).is_some() {
                let mut word = Vec::new();
                let mut v = u;
                while let Some((p, b)) = parent[v] {
                    word.push(b);
                    v = p;
                }
                word.reverse();
                return Some(word);
            }
            for b in self.monoid.letters() {
                if let Some(v) = self.step(u, b) {
                    if !seen[v] {
                        seen[v] = true;
                        parent[v] = Some((u, b));
                        queue.push_back(v);
                    }
                }
            }
        }
        None
    }

    /// A walk in the Coxeter graph starting at `a` and visiting every letter
    /// of its component: depth-first, repeating the parent letter when
    /// backtracking so consecutive letters stay dependent.
    fn covering_walk(&self, a: Letter) -> Vec<Letter> {
        let m = &self.monoid;
        let mut seen = vec![false; m.len()];
        let mut walk = vec![a];
        seen[a.0] = true;
        let mut remaining = m.len() - 1;
        let mut stack = vec![a];
        while let Some(&top) = stack.last() {
            if remaining == 0 {
                break;
            }
            let next = m.letters().find(|&b| !seen[b.0] && !m.are_independent(top, b));
            match next {
                Some(b) => {
                    seen[b.0] = true;
                    remaining -= 1;
                    walk.push(b);
                    stack.push(b);
                }
                None => {
                    stack.pop();
                    if let Some(&parent) = stack.last() {
                        walk.push(parent);
                    }
                }
            }
        }
        walk
    }

    /// Searches for an `a`-rooted linking execution from `s`: a Coxeter
    /// walk from `a` covering Σ, with shortest enabling words inserted
    /// before each walk letter.
    pub fn find_linking_execution(&self, s: State, a: Letter) -> Result<Option<LinkingExecution>> {
        if !self.is_accessible() {
            return Err(Error::NotAccessible);
        }
        let walk = self.covering_walk(a);
        let mut covered = 0u32;
        for b in &walk {
            covered |= 1 << b.0;
        }
        if covered.count_ones() as usize != self.monoid.len() {
            return Ok(None);
        }
        let mut word = Vec::new();
        let mut chain = Vec::with_capacity(walk.len());
        let mut cur = s;
        for &b in &walk {
            let Some(prefix) = self.shortest_enabling(cur, b) else {
                return Ok(None);
            };
            cur = self.act(cur, &prefix).expect("enabling path replays");
            word.extend(prefix);
            chain.push(word.len());
            word.push(b);
            cur = self.step(cur, b).expect("letter enabled at path end");
        }
        let witness = LinkingExecution { word, chain };
        assert!(
            self.is_linking_execution(s, a, &witness),
            "constructed linking execution failed verification"
        );
        Ok(Some(witness))
    }

    /// Checks the linking conditions on a witness: the word is an execution
    /// from `s`, the chained letters start with `a`, are consecutively
    /// dependent, and cover Σ.
    pub fn is_linking_execution(&self, s: State, a: Letter, x: &LinkingExecution) -> bool {
        let m = &self.monoid;
        if self.act(s, &x.word).is_none() {
            return false;
        }
        if x.chain.windows(2).any(|w| w[0] >= w[1]) || x.chain.iter().any(|&j| j >= x.word.len()) {
            return false;
        }
        let letters: Vec<Letter> = x.chain.iter().map(|&j| x.word[j]).collect();
        if letters.first() != Some(&a) {
            return false;
        }
        if letters.windows(2).any(|w| m.are_independent(w[0], w[1])) {
            return false;
        }
        let covered = letters.iter().fold(0u32, |acc, b| acc | (1 << b.0));
        covered.count_ones() as usize == m.len()
    }
}

fn check_state_names<S: AsRef<str>>(states: &[S]) -> Result<Vec<String>> {
    if states.is_empty() {
        return Err(Error::NoStates);
    }
    let mut names: Vec<String> = Vec::with_capacity(states.len());
    for s in states {
        let s = s.as_ref();
        if s == SINK_NAME {
            return Err(Error::ReservedStateName(s.to_string()));
        }
        if names.iter().any(|x| x == s) {
            return Err(Error::DuplicateState(s.to_string()));
        }
        names.push(s.to_string());
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> ConcurrentSystem {
        let m = TraceMonoid::new(&["a", "b", "c", "d"], &[("a", "d"), ("b", "d")]).unwrap();
        ConcurrentSystem::new(
            m,
            &["α0", "α1"],
            &[
                ("α0", "a", "α0"),
                ("α0", "b", "α1"),
                ("α0", "d", "α0"),
                ("α1", "c", "α0"),
                ("α1", "d", "α1"),
            ],
        )
        .unwrap()
    }

    fn names(sys: &ConcurrentSystem, cs: &[Clique]) -> Vec<String> {
        cs.iter().map(|&c| sys.monoid().clique_name(c)).collect()
    }

    #[test]
    fn action_folds_left_to_right() {
        let s = e1();
        assert_eq!(s.act_named("α0", "bcd").unwrap(), Some(0));
        assert_eq!(s.act_named("α0", "").unwrap(), Some(0));
        assert_eq!(s.act_named("α0", "c").unwrap(), None);
        assert_eq!(s.act_named("α0", "cab").unwrap(), None);
        assert_eq!(s.act_named("α9", "a"), Err(Error::UnknownState("α9".into())));
    }

    #[test]
    fn diamond_violation_is_reported() {
        let err = e1().with_transition("α0", "d", Some("α1")).unwrap_err();
        assert_eq!(
            err,
            Error::DiamondViolation {
                state: "α0".into(),
                a: "a".into(),
                b: "d".into()
            }
        );
    }

    #[test]
    fn state_name_validation() {
        let m = TraceMonoid::free(&["a"]).unwrap();
        let none: [&str; 0] = [];
        assert_eq!(ConcurrentSystem::new(m.clone(), &none, &[]), Err(Error::NoStates));
        assert_eq!(
            ConcurrentSystem::new(m.clone(), &["s", "s"], &[]),
            Err(Error::DuplicateState("s".into()))
        );
        assert_eq!(
            ConcurrentSystem::new(m, &["BOT"], &[]),
            Err(Error::ReservedStateName("BOT".into()))
        );
    }

    #[test]
    fn enabled_cliques_per_state() {
        let s = e1();
        assert_eq!(names(&s, &s.enabled_cliques(0)), ["a", "b", "d", "ad", "bd"]);
        assert_eq!(names(&s, &s.enabled_cliques(1)), ["c", "d"]);
        assert_eq!(names(&s, &s.cliques_from(1)), ["ε", "c", "d"]);
        let tm1 = ConcurrentSystem::canonical(TraceMonoid::new(&["a", "b", "c"], &[("a", "b")]).unwrap());
        assert_eq!(names(&tm1, &tm1.enabled_cliques(0)), ["a", "b", "c", "ab"]);
    }

    #[test]
    fn classification_of_e1_and_variants() {
        let c = e1().classify();
        assert!(c.accessible && c.alive && c.irreducible && !c.trivial);

        let broken = e1().with_transition("α1", "c", None).unwrap().classify();
        assert!(!broken.accessible);
        assert_eq!(broken.unreachable, Some(("α1".into(), "α0".into())));
        assert!(!broken.irreducible);

        let dead_a = e1().with_transition("α0", "a", None).unwrap().classify();
        assert!(dead_a.accessible && !dead_a.alive);
        assert_eq!(dead_a.dead, [("α0".into(), "a".into()), ("α1".into(), "a".into())]);

        let m = TraceMonoid::free(&["a"]).unwrap();
        let trivial = ConcurrentSystem::new(m, &["s"], &[]).unwrap().classify();
        assert!(trivial.trivial && !trivial.alive);

        let tm2 = ConcurrentSystem::canonical(TraceMonoid::new(&["a", "b"], &[("a", "b")]).unwrap());
        let c = tm2.classify();
        assert!(c.accessible && c.alive && !c.monoid_irreducible && !c.irreducible);
    }

    #[test]
    fn restriction_keeps_states_and_drops_letter() {
        let s = e1();
        let r = s.restrict(s.monoid().letter("c").unwrap());
        assert_eq!(r.monoid().alphabet(), ["a", "b", "d"]);
        assert_eq!(r.enabled_letters(1), [r.monoid().letter("d").unwrap()]);
        assert!(!r.is_accessible());
    }

    #[test]
    fn linking_execution_in_e1() {
        let s = e1();
        let a = s.monoid().letter("a").unwrap();
        let x = s.find_linking_execution(0, a).unwrap().unwrap();
        assert_eq!(s.monoid().format_word(&x.word), "abcd");
        assert_eq!(x.chain, [0, 1, 2, 3]);
        for st in 0..2 {
            for l in s.monoid().letters() {
                let x = s.find_linking_execution(st, l).unwrap().unwrap();
                assert!(s.is_linking_execution(st, l, &x));
            }
        }
    }

    #[test]
    fn linking_execution_absent_or_refused() {
        let s = e1();
        let a = s.monoid().letter("a").unwrap();
        let broken = s.with_transition("α1", "c", None).unwrap();
        assert_eq!(broken.find_linking_execution(0, a), Err(Error::NotAccessible));
        let dead_a = s.with_transition("α0", "a", None).unwrap();
        assert_eq!(dead_a.find_linking_execution(0, a), Ok(None));
        let tm2 = ConcurrentSystem::canonical(TraceMonoid::new(&["a", "b"], &[("a", "b")]).unwrap());
        assert_eq!(tm2.find_linking_execution(0, Letter(0)), Ok(None));
    }

    #[test]
    fn canonical_linking_is_a_plain_walk() {
        let m = TraceMonoid::new(&["a", "b", "c"], &[("a", "b")]).unwrap();
        let s = ConcurrentSystem::canonical(m);
        let x = s.find_linking_execution(0, Letter(0)).unwrap().unwrap();
        assert_eq!(s.monoid().format_word(&x.word), "acb");
        assert_eq!(x.chain.len(), x.word.len());
    }
}

//! Trace monoids: alphabet, independence, cliques and Cartier–Foata normal forms.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Letters are stored as bits of a `u32`; clique enumeration is exponential
/// in the worst case, so larger alphabets are rejected up front.
pub const MAX_LETTERS: usize = 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub usize);

impl Letter {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A set of pairwise independent letters, as a bitset over the declared
/// alphabet order.
///
/// Cliques are ordered by size, then lexicographically by their sorted letter
/// indices. That order fixes every iteration order downstream.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Clique(u32);

impl Clique {
    pub const EMPTY: Clique = Clique(0);

    pub fn from_bits(bits: u32) -> Self {
        Clique(bits)
    }

    pub fn singleton(a: Letter) -> Self {
        Clique(1 << a.0)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, a: Letter) -> bool {
        self.0 & (1 << a.0) != 0
    }

    pub fn is_subset(self, other: Clique) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn with(self, a: Letter) -> Clique {
        Clique(self.0 | (1 << a.0))
    }

    /// Letters in alphabet order.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0).map(Letter)
    }
}

impl Ord for Clique {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters().cmp(other.letters()))
    }
}

impl PartialOrd for Clique {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cartier–Foata normal form: a sequence of non-empty cliques where every
/// letter of a clique depends on some letter of the previous one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NormalForm {
    cliques: Vec<Clique>,
}

impl NormalForm {
    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn height(&self) -> usize {
        self.cliques.len()
    }

    /// Trace length, i.e. the total number of letters.
    pub fn len(&self) -> usize {
        self.cliques.iter().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// The canonical representative word: cliques in order, letters of each
    /// clique in alphabet order.
    pub fn to_word(&self) -> Vec<Letter> {
        self.cliques.iter().flat_map(|c| c.letters()).collect()
    }

    pub fn first(&self) -> Option<Clique> {
        self.cliques.first().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceMonoid {
    alphabet: Vec<String>,
    /// `independent[a]` has bit `b` set iff `(a, b) ∈ I`.
    independent: Vec<u32>,
    /// All cliques including ε, in canonical order.
    cliques: Vec<Clique>,
}

impl TraceMonoid {
    pub fn new<S: AsRef<str>>(alphabet: &[S], pairs: &[(S, S)]) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if alphabet.len() > MAX_LETTERS {
            return Err(Error::AlphabetTooLarge(alphabet.len()));
        }
        let mut names: Vec<String> = Vec::with_capacity(alphabet.len());
        for a in alphabet {
            let a = a.as_ref();
            if names.iter().any(|n| n == a) {
                return Err(Error::DuplicateLetter(a.to_string()));
            }
            names.push(a.to_string());
        }
        let lookup = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::UnknownLetterInPair(s.to_string()))
        };
        let mut independent = vec![0u32; names.len()];
        for (a, b) in pairs {
            let (ia, ib) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if ia == ib {
                return Err(Error::ReflexivePair(a.as_ref().to_string()));
            }
            independent[ia] |= 1 << ib;
            independent[ib] |= 1 << ia;
        }
        Ok(Self::from_masks(names, independent))
    }

    /// The free monoid on the given letters.
    pub fn free<S: AsRef<str>>(alphabet: &[S]) -> Result<Self> {
        Self::new(alphabet, &[])
    }

    fn from_masks(alphabet: Vec<String>, independent: Vec<u32>) -> Self {
        let mut cliques = Vec::new();
        let n = alphabet.len();
        // Grow cliques by adding letters above the current maximum, so each
        // independent subset is produced exactly once.
        fn extend(c: u32, from: usize, n: usize, ind: &[u32], out: &mut Vec<Clique>) {
            out.push(Clique(c));
            for a in from..n {
                if c & !ind[a] == 0 {
                    extend(c | (1 << a), a + 1, n, ind, out);
                }
            }
        }
        extend(0, 0, n, &independent, &mut cliques);
        cliques.sort();
        TraceMonoid {
            alphabet,
            independent,
            cliques,
        }
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.alphabet.len()).map(Letter)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.alphabet[a.0]
    }

    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.alphabet
            .iter()
            .position(|n| n == name)
            .map(Letter)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    /// Parses a word. Whitespace-separated tokens are letter names; a single
    /// token is split into characters when every letter name is one
    /// character long.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let single_char = self.alphabet.iter().all(|n| n.chars().count() == 1);
        if tokens.len() == 1 && single_char {
            return tokens[0]
                .chars()
                .map(|ch| self.letter(ch.encode_utf8(&mut [0; 4])))
                .collect();
        }
        tokens.into_iter().map(|t| self.letter(t)).collect()
    }

    pub fn format_word(&self, word: &[Letter]) -> String {
        if self.alphabet.iter().all(|n| n.chars().count() == 1) {
            word.iter().map(|&a| self.name(a)).collect()
        } else {
            word.iter().map(|&a| self.name(a)).collect::<Vec<_>>().join(" ")
        }
    }

    /// Clique name: its letters in alphabet order, `ε` for the empty clique.
    pub fn clique_name(&self, c: Clique) -> String {
        if c.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.alphabet.iter().all(|n| n.chars().count() == 1) {
            ""
        } else {
            "."
        };
        c.letters().map(|a| self.name(a)).collect::<Vec<_>>().join(sep)
    }

    pub fn are_independent(&self, a: Letter, b: Letter) -> bool {
        self.independent[a.0] & (1 << b.0) != 0
    }

    /// Letters dependent on `a`, including `a` itself.
    pub fn dependence_mask(&self, a: Letter) -> u32 {
        let all = if self.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        };
        all & !self.independent[a.0]
    }

    /// Independent pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn independent_pairs(&self) -> Vec<(Letter, Letter)> {
        let mut out = Vec::new();
        for a in self.letters() {
            for b in self.letters().filter(|b| b.0 > a.0) {
                if self.are_independent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_clique(&self, c: Clique) -> bool {
        c.letters()
            .all(|a| c.bits() & !(self.independent[a.0] | (1 << a.0)) == 0)
    }

    /// All cliques including ε, ordered by size then lexicographically.
    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    /// Position of `c` in [`Self::cliques`].
    pub fn clique_index(&self, c: Clique) -> Option<usize> {
        self.cliques.binary_search(&c).ok()
    }

    /// The normality relation `c → d`: every letter of `d` depends on some
    /// letter of `c`.
    pub fn is_normal_pair(&self, c: Clique, d: Clique) -> bool {
        d.letters().all(|b| self.dependence_mask(b) & c.bits() != 0)
    }

    /// Cartier–Foata normal form by heap insertion: each letter lands one
    /// level above the highest clique holding a letter it depends on.
    pub fn normal_form(&self, word: &[Letter]) -> NormalForm {
        let mut cliques: Vec<Clique> = Vec::new();
        for &a in word {
            let dep = self.dependence_mask(a);
            let level = cliques.iter().rposition(|c| c.bits() & dep != 0).map_or(0, |k| k + 1);
            if level == cliques.len() {
                cliques.push(Clique::singleton(a));
            } else {
                cliques[level] = cliques[level].with(a);
            }
        }
        NormalForm { cliques }
    }

    pub fn normal_form_of(&self, text: &str) -> Result<NormalForm> {
        Ok(self.normal_form(&self.parse_word(text)?))
    }

    pub fn traces_equal(&self, w1: &[Letter], w2: &[Letter]) -> bool {
        self.normal_form(w1) == self.normal_form(w2)
    }

    /// `μ(z) = Σ_{c ∈ 𝒞} (−1)^{|c|} z^{|c|}`.
    pub fn mobius_polynomial(&self) -> Poly {
        let max = self.cliques.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut coeffs = vec![0i64; max + 1];
        for c in &self.cliques {
            coeffs[c.len()] += if c.len() % 2 == 0 { 1 } else { -1 };
        }
        Poly::new(coeffs.into_iter().map(BigInt::from).collect())
    }

    /// Connected components of the Coxeter graph `(Σ, D)`, each as a sorted
    /// letter list, ordered by smallest letter.
    pub fn coxeter_components(&self) -> Vec<Vec<Letter>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in self.letters() {
            if seen[start.0] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            seen[start.0] = true;
            while let Some(a) = stack.pop() {
                comp.insert(a);
                for b in self.letters() {
                    if !seen[b.0] && !self.are_independent(a, b) {
                        seen[b.0] = true;
                        stack.push(b);
                    }
                }
            }
            out.push(comp.into_iter().collect());
        }
        out
    }

    /// Irreducible iff the Coxeter graph `(Σ, D)` is connected.
    pub fn is_irreducible(&self) -> bool {
        self.coxeter_components().len() == 1
    }

    /// The submonoid generated by `Σ ∖ {removed}`, with the induced
    /// independence. Letter indices above `removed` shift down by one.
    pub fn without(&self, removed: Letter) -> TraceMonoid {
        let keep: Vec<Letter> = self.letters().filter(|&a| a != removed).collect();
        self.sub_monoid(&keep)
    }

    /// The submonoid generated by `keep` (given in alphabet order).
    pub fn sub_monoid(&self, keep: &[Letter]) -> TraceMonoid {
        let names = keep.iter().map(|&a| self.name(a).to_string()).collect();
        let independent = keep
            .iter()
            .map(|&a| {
                keep.iter()
                    .enumerate()
                    .filter(|(_, &b)| self.are_independent(a, b))
                    .fold(0u32, |m, (j, _)| m | (1 << j))
            })
            .collect();
        TraceMonoid::from_masks(names, independent)
    }
}

impl fmt::Display for TraceMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}", self.alphabet.join(","))?;
        let rels: Vec<String> = self
            .independent_pairs()
            .into_iter()
            .map(|(a, b)| format!("{0}{1}={1}{0}", self.name(a), self.name(b)))
            .collect();
        if !rels.is_empty() {
            write!(f, " | {}", rels.join(", "))?;
        }
        write!(f, "⟩")
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.0 as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm1() -> TraceMonoid {
        TraceMonoid::new(&["a", "b", "c"], &[("a", "b")]).unwrap()
    }

    fn e1() -> TraceMonoid {
        TraceMonoid::new(&["a", "b", "c", "d"], &[("a", "d"), ("b", "d")]).unwrap()
    }

    fn names(m: &TraceMonoid) -> Vec<String> {
        m.cliques().iter().map(|&c| m.clique_name(c)).collect()
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            TraceMonoid::new(&["a", "b"], &[("a", "a")]),
            Err(Error::ReflexivePair("a".into()))
        );
        assert_eq!(
            TraceMonoid::new(&["a", "a"], &[]),
            Err(Error::DuplicateLetter("a".into()))
        );
        assert_eq!(
            TraceMonoid::new(&["a", "b"], &[("a", "x")]),
            Err(Error::UnknownLetterInPair("x".into()))
        );
        let empty: [&str; 0] = [];
        assert_eq!(TraceMonoid::free(&empty), Err(Error::EmptyAlphabet));
        let big: Vec<String> = (0..21).map(|i| format!("l{i}")).collect();
        assert_eq!(TraceMonoid::free(&big), Err(Error::AlphabetTooLarge(21)));
    }

    #[test]
    fn independence_is_symmetrized_and_deduplicated() {
        let m = TraceMonoid::new(&["a", "b", "c"], &[("a", "b"), ("b", "a"), ("a", "b")]).unwrap();
        assert_eq!(m, tm1());
        assert!(m.are_independent(Letter(1), Letter(0)));
        assert_eq!(m.independent_pairs(), vec![(Letter(0), Letter(1))]);
    }

    #[test]
    fn cliques_of_fixtures() {
        assert_eq!(names(&tm1()), ["ε", "a", "b", "c", "ab"]);
        assert_eq!(names(&e1()), ["ε", "a", "b", "c", "d", "ad", "bd"]);
        assert_eq!(names(&TraceMonoid::free(&["a", "b"]).unwrap()), ["ε", "a", "b"]);
    }

    #[test]
    fn mobius_polynomials() {
        assert_eq!(tm1().mobius_polynomial(), Poly::from_i64s(&[1, -3, 1]));
        assert_eq!(e1().mobius_polynomial(), Poly::from_i64s(&[1, -4, 2]));
        let free4 = TraceMonoid::free(&["a", "b", "c", "d"]).unwrap();
        assert_eq!(free4.mobius_polynomial(), Poly::from_i64s(&[1, -4]));
        let commuting = TraceMonoid::new(&["a", "b"], &[("a", "b")]).unwrap();
        let one_minus_z = Poly::from_i64s(&[1, -1]);
        assert_eq!(commuting.mobius_polynomial(), &one_minus_z * &one_minus_z);
    }

    #[test]
    fn normal_forms() {
        let m = tm1();
        let nf = m.normal_form_of("aab").unwrap();
        assert_eq!(nf.height(), 2);
        assert_eq!(
            nf.cliques().iter().map(|&c| m.clique_name(c)).collect::<Vec<_>>(),
            ["ab", "a"]
        );
        assert!(m.is_normal_pair(nf.cliques()[0], nf.cliques()[1]));
        assert_eq!(nf.len(), 3);
        assert_eq!(m.normal_form(&[]).height(), 0);
        assert_eq!(m.normal_form_of("ba").unwrap(), m.normal_form_of("ab").unwrap());
        assert_eq!(m.normal_form_of("ab").unwrap().height(), 1);
        assert_eq!(m.parse_word("aXb"), Err(Error::UnknownLetter("X".into())));
    }

    #[test]
    fn trace_equality() {
        let m = tm1();
        let w = |s| m.parse_word(s).unwrap();
        assert!(m.traces_equal(&w("ab"), &w("ba")));
        assert!(m.traces_equal(&w("abc"), &w("bac")));
        assert!(!m.traces_equal(&w("ac"), &w("ca")));
        let free = TraceMonoid::free(&["a", "b"]).unwrap();
        let w = |s| free.parse_word(s).unwrap();
        assert!(!free.traces_equal(&w("ab"), &w("ba")));
    }

    #[test]
    fn irreducibility() {
        assert!(tm1().is_irreducible());
        assert!(!TraceMonoid::new(&["a", "b"], &[("a", "b")]).unwrap().is_irreducible());
        let aztec = TraceMonoid::new(&["a", "b", "c", "d", "e"], &[("a", "b"), ("d", "e")]).unwrap();
        assert!(aztec.is_irreducible());
        assert!(TraceMonoid::free(&["a"]).unwrap().is_irreducible());
    }

    #[test]
    fn removing_a_letter_keeps_induced_independence() {
        let m = e1().without(Letter(2));
        assert_eq!(m.alphabet(), ["a", "b", "d"]);
        assert!(m.are_independent(m.letter("a").unwrap(), m.letter("d").unwrap()));
        assert!(!m.are_independent(m.letter("a").unwrap(), m.letter("b").unwrap()));
    }

    #[test]
    fn multi_character_letters() {
        let m = TraceMonoid::new(&["t1", "t2"], &[("t1", "t2")]).unwrap();
        let w = m.parse_word("t2 t1").unwrap();
        assert_eq!(w, vec![Letter(1), Letter(0)]);
        assert_eq!(m.clique_name(m.normal_form(&w).cliques()[0]), "t1.t2");
        assert_eq!(m.format_word(&w), "t2 t1");
    }
}

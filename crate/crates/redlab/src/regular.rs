//! The regular-language engine: NFAs, inclusion with counterexample
//! extraction, bounded enumeration, and finite-substitution images.
//!
//! Inclusion runs an on-the-fly product of the left NFA with the
//! determinized complement of the right one, pruning macro-states that are
//! subsumed by a smaller visited macro-state (the antichain trick). The
//! substitution machinery produces long chain gadgets, so subsumption is
//! what keeps the search at desk scale.

use crate::textfmt::{tokenize, ParseError};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// A nondeterministic finite automaton without epsilon transitions
/// (epsilon moves are eliminated when the builder finishes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa<A> {
    alphabet: BTreeSet<A>,
    transitions: Vec<BTreeMap<A, BTreeSet<usize>>>,
    initials: BTreeSet<usize>,
    finals: BTreeSet<usize>,
}

impl<A: Copy + Ord> Nfa<A> {
    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn alphabet(&self) -> &BTreeSet<A> {
        &self.alphabet
    }

    pub fn initials(&self) -> &BTreeSet<usize> {
        &self.initials
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn targets(&self, state: usize, letter: A) -> Option<&BTreeSet<usize>> {
        self.transitions[state].get(&letter)
    }

    pub fn step(&self, set: &BTreeSet<usize>, letter: A) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &q in set {
            if let Some(ts) = self.transitions[q].get(&letter) {
                out.extend(ts.iter().copied());
            }
        }
        out
    }

    pub fn accepts(&self, word: &[A]) -> bool {
        let mut cur = self.initials.clone();
        for &a in word {
            if cur.is_empty() {
                return false;
            }
            cur = self.step(&cur, a);
        }
        cur.iter().any(|q| self.finals.contains(q))
    }

    /// All accepted words of length at most `max_len`, in shortlex order.
    pub fn enumerate(&self, max_len: usize) -> Vec<Vec<A>> {
        let mut out = Vec::new();
        let mut level: Vec<(Vec<A>, BTreeSet<usize>)> =
            vec![(Vec::new(), self.initials.clone())];
        for len in 0..=max_len {
            for (word, set) in &level {
                if set.iter().any(|q| self.finals.contains(q)) {
                    out.push(word.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (word, set) in &level {
                for &a in &self.alphabet {
                    let stepped = self.step(set, a);
                    if !stepped.is_empty() {
                        let mut w = word.clone();
                        w.push(a);
                        next.push((w, stepped));
                    }
                }
            }
            level = next;
        }
        out
    }
}

/// Builder collecting states and (possibly epsilon) edges; `build`
/// eliminates the epsilon moves.
#[derive(Debug, Clone)]
pub struct NfaBuilder<A> {
    states: usize,
    alphabet: BTreeSet<A>,
    edges: Vec<(usize, A, usize)>,
    eps: Vec<(usize, usize)>,
    initials: BTreeSet<usize>,
    finals: BTreeSet<usize>,
}

impl<A: Copy + Ord> Default for NfaBuilder<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A: Copy + Ord> NfaBuilder<A> {
    pub fn new() -> Self {
        NfaBuilder {
            states: 0,
            alphabet: BTreeSet::new(),
            edges: Vec::new(),
            eps: Vec::new(),
            initials: BTreeSet::new(),
            finals: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    pub fn add_states(&mut self, n: usize) {
        self.states += n;
    }

    /// Declares a letter so it is part of the alphabet even if unused.
    pub fn add_alphabet_letter(&mut self, a: A) {
        self.alphabet.insert(a);
    }

    pub fn add_edge(&mut self, from: usize, letter: A, to: usize) {
        self.alphabet.insert(letter);
        self.edges.push((from, letter, to));
    }

    pub fn add_eps(&mut self, from: usize, to: usize) {
        self.eps.push((from, to));
    }

    pub fn set_initial(&mut self, q: usize) {
        self.initials.insert(q);
    }

    pub fn set_final(&mut self, q: usize) {
        self.finals.insert(q);
    }

    pub fn build(self) -> Nfa<A> {
        // epsilon closures by fixpoint
        let mut closure: Vec<BTreeSet<usize>> =
            (0..self.states).map(|q| BTreeSet::from([q])).collect();
        loop {
            let mut changed = false;
            for &(from, to) in &self.eps {
                let extra: Vec<usize> =
                    closure[to].iter().copied().filter(|x| !closure[from].contains(x)).collect();
                if !extra.is_empty() {
                    closure[from].extend(extra);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut direct: Vec<BTreeMap<A, BTreeSet<usize>>> = vec![BTreeMap::new(); self.states];
        for &(from, a, to) in &self.edges {
            direct[from].entry(a).or_default().insert(to);
        }
        let mut transitions: Vec<BTreeMap<A, BTreeSet<usize>>> = vec![BTreeMap::new(); self.states];
        for q in 0..self.states {
            for &p in &closure[q] {
                for (&a, ts) in &direct[p] {
                    transitions[q].entry(a).or_default().extend(ts.iter().copied());
                }
            }
        }
        let finals: BTreeSet<usize> = (0..self.states)
            .filter(|&q| closure[q].iter().any(|p| self.finals.contains(p)))
            .collect();
        Nfa { alphabet: self.alphabet, transitions, initials: self.initials, finals }
    }
}

/// Decides `L(a) ⊆ L(b)`. Returns `None` when inclusion holds, otherwise
/// the shortlex-minimal word accepted by `a` and rejected by `b`.
///
/// Panics if the two automata declare different alphabets.
pub fn inclusion<A: Copy + Ord>(a: &Nfa<A>, b: &Nfa<A>) -> Option<Vec<A>> {
    assert!(a.alphabet == b.alphabet, "inclusion requires a shared alphabet");
    let rejects = |set: &BTreeSet<usize>| set.iter().all(|q| !b.finals.contains(q));

    // visited: per left state, an antichain of minimal right macro-states
    let mut visited: BTreeMap<usize, Vec<BTreeSet<usize>>> = BTreeMap::new();
    let mut queue: VecDeque<(usize, BTreeSet<usize>, Vec<A>)> = VecDeque::new();

    let start_b = b.initials.clone();
    for &qa in &a.initials {
        if a.finals.contains(&qa) && rejects(&start_b) {
            return Some(Vec::new());
        }
        if insert_minimal(visited.entry(qa).or_default(), &start_b) {
            queue.push_back((qa, start_b.clone(), Vec::new()));
        }
    }

    while let Some((qa, sb, word)) = queue.pop_front() {
        for &x in &a.alphabet {
            let Some(targets) = a.transitions[qa].get(&x) else { continue };
            let sb_next = b.step(&sb, x);
            let mut next_word = word.clone();
            next_word.push(x);
            for &qa_next in targets {
                if a.finals.contains(&qa_next) && rejects(&sb_next) {
                    return Some(next_word);
                }
                if insert_minimal(visited.entry(qa_next).or_default(), &sb_next) {
                    queue.push_back((qa_next, sb_next.clone(), next_word.clone()));
                }
            }
        }
    }
    None
}

/// Inserts `set` into the antichain unless some element is already a subset
/// of it; drops the supersets it subsumes. Returns whether it was inserted.
fn insert_minimal(chain: &mut Vec<BTreeSet<usize>>, set: &BTreeSet<usize>) -> bool {
    if chain.iter().any(|s| s.is_subset(set)) {
        return false;
    }
    chain.retain(|s| !set.is_subset(s));
    chain.push(set.clone());
    true
}

/// A letter-to-finite-word-set map; images are nonempty sets of nonempty
/// words, so the homomorphic extension is epsilon-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubstitution {
    images: BTreeMap<char, BTreeSet<String>>,
    target: BTreeSet<char>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstitutionError {
    #[error("image of {0:?} contains the empty word (substitutions must be epsilon-free)")]
    EmptyImageWord(char),
    #[error("image of {0:?} is empty")]
    EmptyImage(char),
}

impl FiniteSubstitution {
    pub fn new(images: BTreeMap<char, BTreeSet<String>>) -> Result<Self, SubstitutionError> {
        let mut target = BTreeSet::new();
        for (&letter, words) in &images {
            if words.is_empty() {
                return Err(SubstitutionError::EmptyImage(letter));
            }
            for w in words {
                if w.is_empty() {
                    return Err(SubstitutionError::EmptyImageWord(letter));
                }
                target.extend(w.chars());
            }
        }
        Ok(FiniteSubstitution { images, target })
    }

    pub fn image(&self, letter: char) -> Option<&BTreeSet<String>> {
        self.images.get(&letter)
    }

    pub fn domain(&self) -> impl Iterator<Item = char> + '_ {
        self.images.keys().copied()
    }

    pub fn target_alphabet(&self) -> &BTreeSet<char> {
        &self.target
    }

    /// The image of a single word: the set product of the letter images.
    pub fn word_image(&self, word: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::from([String::new()]);
        for c in word.chars() {
            let images = self.images.get(&c).expect("letter outside substitution domain");
            let mut next = BTreeSet::new();
            for prefix in &out {
                for img in images {
                    next.insert(format!("{prefix}{img}"));
                }
            }
            out = next;
        }
        out
    }

    /// True when every image of `self` is contained in the corresponding
    /// image of `other`, letter by letter.
    pub fn letterwise_subset_of(&self, other: &FiniteSubstitution) -> bool {
        self.images.iter().all(|(letter, words)| {
            other.images.get(letter).is_some_and(|bigger| words.is_subset(bigger))
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (letter, words) in &self.images {
            out.push_str(&format!("sub {letter} ="));
            for w in words {
                out.push_str(&format!(" {w}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self, ParseError> {
        let mut images: BTreeMap<char, BTreeSet<String>> = BTreeMap::new();
        for (line, tokens) in tokenize(input) {
            if tokens[0] != "sub" || tokens.len() < 4 || tokens[2] != "=" {
                return Err(ParseError::new(line, "expected `sub <letter> = <word> [<word> ...]`"));
            }
            let mut chars = tokens[1].chars();
            let (Some(letter), None) = (chars.next(), chars.next()) else {
                return Err(ParseError::new(line, "substitution source must be a single letter"));
            };
            let entry = images.entry(letter).or_default();
            for w in &tokens[3..] {
                entry.insert((*w).to_string());
            }
        }
        FiniteSubstitution::new(images).map_err(|e| ParseError::new(0, e.to_string()))
    }
}

/// Replaces every letter transition of `l` by one chain gadget per image
/// word, sharing the transition's endpoints. Accepts exactly the union of
/// `sub(w)` over accepted `w`.
///
/// Panics if `l` uses a letter outside the substitution's domain.
pub fn apply_substitution(sub: &FiniteSubstitution, l: &Nfa<char>) -> Nfa<char> {
    let mut b = NfaBuilder::new();
    b.add_states(l.state_count());
    for &c in sub.target_alphabet() {
        b.add_alphabet_letter(c);
    }
    for q in 0..l.state_count() {
        for (&letter, targets) in &l.transitions[q] {
            let images = sub
                .image(letter)
                .unwrap_or_else(|| panic!("letter {letter:?} outside substitution domain"));
            for &target in targets {
                for word in images {
                    let chars: Vec<char> = word.chars().collect();
                    let mut cur = q;
                    for (i, &c) in chars.iter().enumerate() {
                        let next = if i + 1 == chars.len() { target } else { b.add_state() };
                        b.add_edge(cur, c, next);
                        cur = next;
                    }
                }
            }
        }
    }
    for &q in &l.initials {
        b.set_initial(q);
    }
    for &q in &l.finals {
        b.set_final(q);
    }
    b.build()
}

impl Nfa<char> {
    /// Emits the machine in the text format (transducer format without
    /// outputs).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in 0..self.state_count() {
            out.push_str(&format!("state {s}\n"));
        }
        for q in &self.initials {
            out.push_str(&format!("init {q}\n"));
        }
        for q in &self.finals {
            out.push_str(&format!("final {q}\n"));
        }
        for q in 0..self.state_count() {
            for (&a, targets) in &self.transitions[q] {
                for t in targets {
                    out.push_str(&format!("trans {q} {a} {t}\n"));
                }
            }
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Nfa<char>, ParseError> {
        let mut names: Vec<String> = Vec::new();
        let mut b = NfaBuilder::new();
        let mut pending: Vec<(usize, usize, String, usize)> = Vec::new();
        let lookup = |names: &[String], tok: &str, line: usize| {
            names
                .iter()
                .position(|n| n == tok)
                .ok_or_else(|| ParseError::new(line, format!("unknown state `{tok}`")))
        };
        for (line, tokens) in tokenize(input) {
            match tokens[0] {
                "state" if tokens.len() == 2 => {
                    if names.iter().any(|n| n == tokens[1]) {
                        return Err(ParseError::new(line, format!("duplicate state `{}`", tokens[1])));
                    }
                    names.push(tokens[1].to_string());
                    b.add_state();
                }
                "init" if tokens.len() == 2 => {
                    let q = lookup(&names, tokens[1], line)?;
                    b.set_initial(q);
                }
                "final" if tokens.len() == 2 => {
                    let q = lookup(&names, tokens[1], line)?;
                    b.set_final(q);
                }
                "trans" if tokens.len() == 4 => {
                    let from = lookup(&names, tokens[1], line)?;
                    let to = lookup(&names, tokens[3], line)?;
                    pending.push((line, from, tokens[2].to_string(), to));
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        "expected `state <id>`, `init <id>`, `final <id>` or `trans <from> <word|-> <to>`",
                    ))
                }
            }
        }
        for (_line, from, word, to) in pending {
            if word == "-" {
                b.add_eps(from, to);
            } else {
                let chars: Vec<char> = word.chars().collect();
                let mut cur = from;
                for (i, &c) in chars.iter().enumerate() {
                    let next = if i + 1 == chars.len() { to } else { b.add_state() };
                    b.add_edge(cur, c, next);
                    cur = next;
                }
            }
        }
        Ok(b.build())
    }
}

impl<A: Copy + Ord + fmt::Display> Nfa<A> {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nfa {\n  rankdir=LR;\n  start [shape=point];\n");
        for s in 0..self.state_count() {
            let shape = if self.finals.contains(&s) { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{s} [shape={shape}];\n"));
        }
        for q in &self.initials {
            out.push_str(&format!("  start -> q{q};\n"));
        }
        for q in 0..self.state_count() {
            for (a, targets) in &self.transitions[q] {
                for t in targets {
                    out.push_str(&format!("  q{q} -> q{t} [label=\"{a}\"];\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds an NFA accepting exactly the given finite set of words.
pub fn nfa_of_words<A: Copy + Ord>(alphabet: &[A], words: &[Vec<A>]) -> Nfa<A> {
    let mut b = NfaBuilder::new();
    for &a in alphabet {
        b.add_alphabet_letter(a);
    }
    let root = b.add_state();
    b.set_initial(root);
    for word in words {
        let mut cur = root;
        for (i, &a) in word.iter().enumerate() {
            let next = b.add_state();
            b.add_edge(cur, a, next);
            cur = next;
            if i + 1 == word.len() {
                b.set_final(next);
            }
        }
        if word.is_empty() {
            b.set_final(root);
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn word(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn words_nfa(words: &[&str]) -> Nfa<char> {
        let ws: Vec<Vec<char>> = words.iter().map(|w| word(w)).collect();
        nfa_of_words(&['0', '1'], &ws)
    }

    #[test]
    fn inclusion_on_finite_sets() {
        let a = words_nfa(&["01"]);
        let b = words_nfa(&["0", "01"]);
        assert_eq!(inclusion(&a, &b), None);
        assert_eq!(inclusion(&b, &a), Some(word("0")));
        assert_eq!(inclusion(&a, &a), None);
    }

    #[test]
    fn inclusion_empty_word_counterexample() {
        let a = words_nfa(&["", "0"]);
        let b = words_nfa(&["0"]);
        assert_eq!(inclusion(&a, &b), Some(Vec::new()));
    }

    #[test]
    fn enumerate_is_shortlex() {
        // b{0,1}*c over a 4-letter alphabet
        let mut b = NfaBuilder::new();
        b.add_states(3);
        b.add_edge(0, 'b', 1);
        b.add_edge(1, '0', 1);
        b.add_edge(1, '1', 1);
        b.add_edge(1, 'c', 2);
        b.set_initial(0);
        b.set_final(2);
        let nfa = b.build();
        let words = nfa.enumerate(3);
        assert_eq!(words, vec![word("bc"), word("b0c"), word("b1c")]);
    }

    #[test]
    fn enumerate_degenerate_cases() {
        let empty = words_nfa(&[]);
        assert!(empty.enumerate(4).is_empty());
        let eps = words_nfa(&[""]);
        assert_eq!(eps.enumerate(4), vec![Vec::<char>::new()]);
    }

    #[test]
    fn epsilon_elimination() {
        let mut b = NfaBuilder::new();
        b.add_states(3);
        b.add_eps(0, 1);
        b.add_edge(1, 'x', 2);
        b.add_eps(1, 2);
        b.set_initial(0);
        b.set_final(2);
        let nfa = b.build();
        assert!(nfa.accepts(&word("x")));
        assert!(nfa.accepts(&[]));
        assert!(!nfa.accepts(&word("xx")));
    }

    #[test]
    fn substitution_image_of_finite_language() {
        let sub = FiniteSubstitution::new(BTreeMap::from([
            ('0', BTreeSet::from(["ab".to_string()])),
            ('1', BTreeSet::from(["a".to_string(), "b".to_string()])),
        ]))
        .unwrap();
        let l = words_nfa(&["01"]);
        let image = apply_substitution(&sub, &l);
        let got: BTreeSet<Vec<char>> = image.enumerate(5).into_iter().collect();
        assert_eq!(got, BTreeSet::from([word("aba"), word("abb")]));
        assert_eq!(sub.word_image("01"), BTreeSet::from(["aba".into(), "abb".into()]));
    }

    #[test]
    fn identity_substitution_preserves_language() {
        let sub = FiniteSubstitution::new(BTreeMap::from([
            ('0', BTreeSet::from(["0".to_string()])),
            ('1', BTreeSet::from(["1".to_string()])),
        ]))
        .unwrap();
        let l = words_nfa(&["", "0", "01", "110"]);
        let image = apply_substitution(&sub, &l);
        assert_eq!(image.enumerate(6), l.enumerate(6));
    }

    #[test]
    fn substitution_of_empty_language_is_empty() {
        let sub = FiniteSubstitution::new(BTreeMap::from([
            ('0', BTreeSet::from(["ab".to_string()])),
            ('1', BTreeSet::from(["b".to_string()])),
        ]))
        .unwrap();
        let l = words_nfa(&[]);
        assert!(apply_substitution(&sub, &l).enumerate(6).is_empty());
    }

    #[test]
    fn epsilon_free_enforced() {
        let bad = FiniteSubstitution::new(BTreeMap::from([(
            '0',
            BTreeSet::from(["".to_string()]),
        )]));
        assert_eq!(bad.unwrap_err(), SubstitutionError::EmptyImageWord('0'));
    }

    #[test]
    fn substitution_text_round_trip() {
        let sub = FiniteSubstitution::new(BTreeMap::from([
            ('b', BTreeSet::from(["01".to_string(), "01001001".to_string()])),
            ('c', BTreeSet::from(["01001".to_string()])),
        ]))
        .unwrap();
        let back = FiniteSubstitution::from_text(&sub.to_text()).unwrap();
        assert_eq!(back, sub);
    }

    #[test]
    fn nfa_text_round_trip() {
        let l = words_nfa(&["01", "0", "111"]);
        let back = Nfa::from_text(&l.to_text()).unwrap();
        assert_eq!(back.enumerate(5), l.enumerate(5));
    }

    fn random_nfa(rng: &mut StdRng) -> Nfa<char> {
        let states = rng.gen_range(1..=6);
        let mut b = NfaBuilder::new();
        b.add_states(states);
        b.add_alphabet_letter('0');
        b.add_alphabet_letter('1');
        for q in 0..states {
            for a in ['0', '1'] {
                let fanout = rng.gen_range(0..=2);
                for _ in 0..fanout {
                    b.add_edge(q, a, rng.gen_range(0..states));
                }
            }
        }
        b.set_initial(rng.gen_range(0..states));
        for q in 0..states {
            if rng.gen_bool(0.3) {
                b.set_final(q);
            }
        }
        b.build()
    }

    #[test]
    fn inclusion_agrees_with_enumeration_on_random_pairs() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for _ in 0..60 {
            let a = random_nfa(&mut rng);
            let b = random_nfa(&mut rng);
            let verdict = inclusion(&a, &b);
            let wa: BTreeSet<Vec<char>> = a.enumerate(8).into_iter().collect();
            let wb: BTreeSet<Vec<char>> = b.enumerate(8).into_iter().collect();
            let diff: Vec<&Vec<char>> = wa.difference(&wb).collect();
            match &verdict {
                None => assert!(diff.is_empty(), "inclusion said yes but {diff:?} differ"),
                Some(cex) => {
                    assert!(a.accepts(cex), "counterexample not accepted by a");
                    assert!(!b.accepts(cex), "counterexample accepted by b");
                    if cex.len() <= 8 {
                        // shortlex minimality against the enumeration
                        let mut shortest: Vec<&Vec<char>> = diff.clone();
                        shortest.sort_by_key(|w| (w.len(), (*w).clone()));
                        assert_eq!(Some(cex), shortest.first().copied().cloned().as_ref());
                    }
                }
            }
        }
    }
}

//! Finite transducers with unary output and the rational-relation
//! combinators built on them.
//!
//! A transducer here reads words over `{a, b, i1, ..., in}` and emits `c`'s;
//! since the output alphabet is unary, an output word is just its length, so
//! transitions carry a count and a recognized pair is a [`UnaryPair`]
//! `(input word, count)`. The combinators ([`Relation::union`],
//! [`Relation::concat`], [`Relation::star`], [`Relation::plus`]) glue
//! machines structurally, with no epsilon/zero transitions: the star
//! identity is realized by making the fresh initial state final.
//!
//! Every transition satisfies the progress condition (nonempty input or
//! positive count), which makes membership a finite dynamic program over
//! (input position, accumulated count, state).

use crate::alphabet::{format_word, parse_word, Letter, Word};
use crate::regular::{Nfa, NfaBuilder};
use crate::textfmt::{tokenize, ParseError};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use thiserror::Error;

/// The input alphabet `{a, b, i1, .., in}`, identified by its number of
/// index letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sigma {
    pub index_count: u32,
}

impl Sigma {
    pub fn new(index_count: u32) -> Sigma {
        Sigma { index_count }
    }

    pub fn contains(&self, letter: Letter) -> bool {
        match letter {
            Letter::A | Letter::B => true,
            Letter::Index(i) => i >= 1 && i <= self.index_count,
        }
    }

    pub fn contains_word(&self, word: &[Letter]) -> bool {
        word.iter().all(|&l| self.contains(l))
    }

    /// All letters in canonical order: `a`, `b`, `i1`, ..., `in`.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = vec![Letter::A, Letter::B];
        out.extend((1..=self.index_count).map(Letter::Index));
        out
    }
}

/// A recognized pair `(input word, output count)`, the unary-output stand-in
/// for `(w, c^m)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnaryPair {
    pub input: Word,
    pub count: u64,
}

impl UnaryPair {
    pub fn new(input: Word, count: u64) -> UnaryPair {
        UnaryPair { input, count }
    }
}

impl fmt::Display for UnaryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_word(&self.input), self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub from: usize,
    pub input: Word,
    pub count: u64,
    pub to: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("state {0} out of range (machine has {1} states)")]
    StateOutOfRange(usize, usize),
    #[error("transition from {from} to {to} violates the progress condition (empty input and zero count)")]
    NoProgress { from: usize, to: usize },
    #[error("letter {0} is not in the declared alphabet")]
    LetterOutsideAlphabet(Letter),
    #[error("atom (-, 0) is only available as Relation::identity")]
    EmptyAtom,
    #[error("alphabet mismatch: one side has {0} index letters, the other {1}")]
    AlphabetMismatch(u32, u32),
}

/// A finite transducer with unary output: states `0..states`, one initial
/// state, a set of final states, and transitions labelled by an input word
/// and an output count.
#[derive(Debug, Clone)]
pub struct Transducer {
    sigma: Sigma,
    states: usize,
    transitions: Vec<Transition>,
    initial: usize,
    finals: BTreeSet<usize>,
    outgoing: Vec<Vec<usize>>,
}

impl PartialEq for Transducer {
    fn eq(&self, other: &Self) -> bool {
        self.sigma == other.sigma
            && self.states == other.states
            && self.transitions == other.transitions
            && self.initial == other.initial
            && self.finals == other.finals
    }
}

impl Eq for Transducer {}

impl Transducer {
    pub fn new(
        sigma: Sigma,
        states: usize,
        mut transitions: Vec<Transition>,
        initial: usize,
        finals: BTreeSet<usize>,
    ) -> Result<Transducer, RelationError> {
        if initial >= states {
            return Err(RelationError::StateOutOfRange(initial, states));
        }
        for &f in &finals {
            if f >= states {
                return Err(RelationError::StateOutOfRange(f, states));
            }
        }
        for t in &transitions {
            if t.from >= states {
                return Err(RelationError::StateOutOfRange(t.from, states));
            }
            if t.to >= states {
                return Err(RelationError::StateOutOfRange(t.to, states));
            }
            if t.input.is_empty() && t.count == 0 {
                return Err(RelationError::NoProgress { from: t.from, to: t.to });
            }
            for &l in &t.input {
                if !sigma.contains(l) {
                    return Err(RelationError::LetterOutsideAlphabet(l));
                }
            }
        }
        transitions.sort();
        transitions.dedup();
        let mut outgoing = vec![Vec::new(); states];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.from].push(i);
        }
        Ok(Transducer { sigma, states, transitions, initial, finals, outgoing })
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    /// Decides whether the pair is recognized: some path from the initial
    /// state to a final state spells the input and its counts sum to the
    /// pair's count. The empty path recognizes `(-, 0)` iff the initial
    /// state is final.
    pub fn contains(&self, pair: &UnaryPair) -> bool {
        let w = &pair.input;
        let m = pair.count;
        let n = w.len();
        let mut seen: HashSet<(usize, u64, usize)> = HashSet::new();
        let mut stack = vec![(0usize, 0u64, self.initial)];
        seen.insert((0, 0, self.initial));
        while let Some((pos, acc, state)) = stack.pop() {
            if pos == n && acc == m && self.finals.contains(&state) {
                return true;
            }
            for &ti in &self.outgoing[state] {
                let t = &self.transitions[ti];
                let end = pos + t.input.len();
                if end > n || acc + t.count > m {
                    continue;
                }
                if w[pos..end] != t.input[..] {
                    continue;
                }
                let key = (end, acc + t.count, t.to);
                if seen.insert(key) {
                    stack.push(key);
                }
            }
        }
        false
    }

    /// The projection `L(T)` of the recognized set onto input words.
    pub fn input_language(&self) -> Nfa<Letter> {
        let mut b = NfaBuilder::new();
        b.add_states(self.states);
        for l in self.sigma.letters() {
            b.add_alphabet_letter(l);
        }
        for t in &self.transitions {
            if t.input.is_empty() {
                b.add_eps(t.from, t.to);
            } else {
                let mut cur = t.from;
                for (i, &l) in t.input.iter().enumerate() {
                    let next = if i + 1 == t.input.len() { t.to } else { b.add_state() };
                    b.add_edge(cur, l, next);
                    cur = next;
                }
            }
        }
        b.set_initial(self.initial);
        for &f in &self.finals {
            b.set_final(f);
        }
        b.build()
    }

    /// Emits the machine in the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in 0..self.states {
            out.push_str(&format!("state {s}\n"));
        }
        out.push_str(&format!("init {}\n", self.initial));
        for f in &self.finals {
            out.push_str(&format!("final {f}\n"));
        }
        for t in &self.transitions {
            out.push_str(&format!(
                "trans {} {} {} {}\n",
                t.from,
                format_word(&t.input),
                t.count,
                t.to
            ));
        }
        out
    }

    /// Parses the text format. State ids are arbitrary tokens and are
    /// numbered in declaration order.
    pub fn from_text(input: &str) -> Result<Transducer, ParseError> {
        let mut names: Vec<String> = Vec::new();
        let mut initial: Option<usize> = None;
        let mut finals = BTreeSet::new();
        let mut transitions = Vec::new();
        let mut max_index = 0u32;
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
                }
                "init" if tokens.len() == 2 => {
                    initial = Some(lookup(&names, tokens[1], line)?);
                }
                "final" if tokens.len() == 2 => {
                    finals.insert(lookup(&names, tokens[1], line)?);
                }
                "trans" if tokens.len() == 5 => {
                    let from = lookup(&names, tokens[1], line)?;
                    let input = parse_word(tokens[2])
                        .map_err(|e| ParseError::new(line, e.to_string()))?;
                    let count: u64 = tokens[3]
                        .parse()
                        .map_err(|_| ParseError::new(line, "output count must be a nonnegative integer"))?;
                    let to = lookup(&names, tokens[4], line)?;
                    for l in &input {
                        if let Letter::Index(i) = l {
                            max_index = max_index.max(*i);
                        }
                    }
                    transitions.push(Transition { from, input, count, to });
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        "expected `state <id>`, `init <id>`, `final <id>` or `trans <from> <word|-> <count> <to>`",
                    ))
                }
            }
        }
        let initial = initial.ok_or_else(|| ParseError::new(0, "missing `init` line"))?;
        Transducer::new(Sigma::new(max_index), names.len(), transitions, initial, finals)
            .map_err(|e| ParseError::new(0, e.to_string()))
    }

    /// Renders the transition graph in DOT.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph transducer {\n  rankdir=LR;\n  start [shape=point];\n");
        for s in 0..self.states {
            let shape = if self.finals.contains(&s) { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{s} [shape={shape}];\n"));
        }
        out.push_str(&format!("  start -> q{};\n", self.initial));
        for t in &self.transitions {
            out.push_str(&format!(
                "  q{} -> q{} [label=\"{} / c^{}\"];\n",
                t.from,
                t.to,
                format_word(&t.input),
                t.count
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// A rational relation over `Sigma* x c*`, carried by a finite transducer
/// and closed under the combinators below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    t: Transducer,
}

impl Relation {
    /// The singleton relation `{(input, count)}`. The pair `(-, 0)` is
    /// rejected; use [`Relation::identity`] for it.
    pub fn atom(sigma: Sigma, input: Word, count: u64) -> Result<Relation, RelationError> {
        if input.is_empty() && count == 0 {
            return Err(RelationError::EmptyAtom);
        }
        if !sigma.contains_word(&input) {
            let bad = *input.iter().find(|l| !sigma.contains(**l)).unwrap();
            return Err(RelationError::LetterOutsideAlphabet(bad));
        }
        let t = Transducer::new(
            sigma,
            2,
            vec![Transition { from: 0, input, count, to: 1 }],
            0,
            BTreeSet::from([1]),
        )?;
        Ok(Relation { t })
    }

    /// The identity relation `{(-, 0)}`: a single state, both initial and
    /// final, with no transitions.
    pub fn identity(sigma: Sigma) -> Relation {
        let t = Transducer::new(sigma, 1, Vec::new(), 0, BTreeSet::from([0])).unwrap();
        Relation { t }
    }

    /// Union of several relations over the same alphabet.
    pub fn union_all(args: &[&Relation]) -> Result<Relation, RelationError> {
        match args {
            [] => panic!("union_all needs at least one argument"),
            [only] => Ok((*only).clone()),
            [first, rest @ ..] => {
                let mut acc = (*first).clone();
                for r in rest {
                    acc = acc.union(r)?;
                }
                Ok(acc)
            }
        }
    }

    /// Set union: merges the two machines behind a fresh initial state that
    /// copies both old initial states' out-transitions.
    pub fn union(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_sigma(other)?;
        let a = &self.t;
        let b = &other.t;
        let off_a = 1;
        let off_b = 1 + a.states;
        let states = 1 + a.states + b.states;
        let mut transitions = Vec::new();
        for t in &a.transitions {
            transitions.push(shift(t, off_a));
        }
        for t in &b.transitions {
            transitions.push(shift(t, off_b));
        }
        for &ti in &a.outgoing[a.initial] {
            let t = &a.transitions[ti];
            transitions.push(Transition {
                from: 0,
                input: t.input.clone(),
                count: t.count,
                to: t.to + off_a,
            });
        }
        for &ti in &b.outgoing[b.initial] {
            let t = &b.transitions[ti];
            transitions.push(Transition {
                from: 0,
                input: t.input.clone(),
                count: t.count,
                to: t.to + off_b,
            });
        }
        let mut finals: BTreeSet<usize> = a.finals.iter().map(|f| f + off_a).collect();
        finals.extend(b.finals.iter().map(|f| f + off_b));
        if a.finals.contains(&a.initial) || b.finals.contains(&b.initial) {
            finals.insert(0);
        }
        Ok(Relation { t: Transducer::new(a.sigma, states, transitions, 0, finals).unwrap() })
    }

    /// Pairwise product `{(w1 w2, m1 + m2)}`: every final state of the left
    /// machine inherits the right machine's initial out-transitions.
    pub fn concat(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_sigma(other)?;
        let a = &self.t;
        let b = &other.t;
        let off_b = a.states;
        let states = a.states + b.states;
        let mut transitions: Vec<Transition> = a.transitions.clone();
        for t in &b.transitions {
            transitions.push(shift(t, off_b));
        }
        for &f in &a.finals {
            for &ti in &b.outgoing[b.initial] {
                let t = &b.transitions[ti];
                transitions.push(Transition {
                    from: f,
                    input: t.input.clone(),
                    count: t.count,
                    to: t.to + off_b,
                });
            }
        }
        let mut finals: BTreeSet<usize> = b.finals.iter().map(|f| f + off_b).collect();
        if b.finals.contains(&b.initial) {
            finals.extend(a.finals.iter().copied());
        }
        Ok(Relation { t: Transducer::new(a.sigma, states, transitions, a.initial, finals).unwrap() })
    }

    /// Kleene star, including the 0th power `{(-, 0)}`: a fresh final
    /// initial state feeds the old initial's out-transitions, and every old
    /// final loops back the same way.
    pub fn star(&self) -> Relation {
        let a = &self.t;
        let off = 1;
        let states = 1 + a.states;
        let mut transitions: Vec<Transition> =
            a.transitions.iter().map(|t| shift(t, off)).collect();
        let restart: Vec<Transition> = a.outgoing[a.initial]
            .iter()
            .map(|&ti| {
                let t = &a.transitions[ti];
                Transition { from: 0, input: t.input.clone(), count: t.count, to: t.to + off }
            })
            .collect();
        transitions.extend(restart.clone());
        for &f in &a.finals {
            for t in &restart {
                transitions.push(Transition {
                    from: f + off,
                    input: t.input.clone(),
                    count: t.count,
                    to: t.to,
                });
            }
        }
        let mut finals: BTreeSet<usize> = a.finals.iter().map(|f| f + off).collect();
        finals.insert(0);
        Relation { t: Transducer::new(a.sigma, states, transitions, 0, finals).unwrap() }
    }

    /// One-or-more repetitions: `plus(A) = concat(A, star(A))`.
    pub fn plus(&self) -> Relation {
        self.concat(&self.star()).unwrap()
    }

    pub fn contains(&self, pair: &UnaryPair) -> bool {
        self.t.contains(pair)
    }

    pub fn input_language(&self) -> Nfa<Letter> {
        self.t.input_language()
    }

    pub fn transducer(&self) -> &Transducer {
        &self.t
    }

    pub fn sigma(&self) -> Sigma {
        self.t.sigma
    }

    fn check_sigma(&self, other: &Relation) -> Result<(), RelationError> {
        if self.t.sigma != other.t.sigma {
            return Err(RelationError::AlphabetMismatch(
                self.t.sigma.index_count,
                other.t.sigma.index_count,
            ));
        }
        Ok(())
    }
}

fn shift(t: &Transition, off: usize) -> Transition {
    Transition { from: t.from + off, input: t.input.clone(), count: t.count, to: t.to + off }
}

//! Z-transducers and the binary block coding.
//!
//! A Z-transducer reads one bit at a time, emits one or two `c`'s per bit,
//! and has a single final state with no outgoing transitions. The block
//! coding `delta` maps the transducer alphabet to `{10^i 1 | k <= i <= k+n+1}`
//! with `k = 1 + max word length`, assigned in the fixed order `a`, `b`,
//! `i1`, ..., `in`; the pair coding `chi` appends a trailing `0` marker and
//! inflates the count by the coded length. [`compile_relation`] turns any
//! coded relation into a complete Z-transducer and [`build_chi_l0`] builds
//! the deterministic machine for the coded reference shape.

use crate::alphabet::{format_bits, Bit, Letter};
use crate::pcp::{PcpInstance, Side};
use crate::relation::{Relation, UnaryPair};
use crate::textfmt::{tokenize, ParseError};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// Output of a single Z-transducer step: one or two `c`'s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ZOut {
    One,
    Two,
}

impl ZOut {
    pub fn count(self) -> u64 {
        match self {
            ZOut::One => 1,
            ZOut::Two => 2,
        }
    }

    pub fn from_count(c: u64) -> Option<ZOut> {
        match c {
            1 => Some(ZOut::One),
            2 => Some(ZOut::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZTransition {
    pub from: usize,
    pub bit: Bit,
    pub out: ZOut,
    pub to: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZtError {
    #[error("state {0} out of range (machine has {1} states)")]
    StateOutOfRange(usize, usize),
    #[error("transition leaves the final state {0}")]
    TransitionFromFinal(usize),
    #[error(
        "atom ({input}, {count}) cannot be compiled: count exceeds coded length {coded_len} (coding constant k too small)"
    )]
    CodingTooSmall { input: String, count: u64, coded_len: usize },
}

/// A Z-transducer: binary input, unary output of one or two `c`'s per
/// symbol, one initial and one final state, no transitions from the final
/// state.
#[derive(Debug, Clone)]
pub struct ZTransducer {
    states: usize,
    transitions: Vec<ZTransition>,
    initial: usize,
    final_state: usize,
    outgoing: Vec<[Vec<usize>; 2]>,
}

impl PartialEq for ZTransducer {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.transitions == other.transitions
            && self.initial == other.initial
            && self.final_state == other.final_state
    }
}

impl Eq for ZTransducer {}

/// Determinism/completeness report with the offending (state, bit) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZAnalysis {
    pub deterministic: bool,
    pub complete: bool,
    /// (state, bit) pairs with more than one transition.
    pub ambiguous: Vec<(usize, Bit)>,
    /// (state, bit) pairs with no transition.
    pub missing: Vec<(usize, Bit)>,
}

impl ZTransducer {
    pub fn new(
        states: usize,
        mut transitions: Vec<ZTransition>,
        initial: usize,
        final_state: usize,
    ) -> Result<ZTransducer, ZtError> {
        if initial >= states {
            return Err(ZtError::StateOutOfRange(initial, states));
        }
        if final_state >= states {
            return Err(ZtError::StateOutOfRange(final_state, states));
        }
        for t in &transitions {
            if t.from >= states {
                return Err(ZtError::StateOutOfRange(t.from, states));
            }
            if t.to >= states {
                return Err(ZtError::StateOutOfRange(t.to, states));
            }
            if t.from == final_state {
                return Err(ZtError::TransitionFromFinal(final_state));
            }
        }
        transitions.sort();
        transitions.dedup();
        let mut outgoing: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; states];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.from][t.bit.index()].push(i);
        }
        Ok(ZTransducer { states, transitions, initial, final_state, outgoing })
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn transitions(&self) -> &[ZTransition] {
        &self.transitions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn final_state(&self) -> usize {
        self.final_state
    }

    pub fn transitions_from(&self, state: usize, bit: Bit) -> impl Iterator<Item = &ZTransition> {
        self.outgoing[state][bit.index()].iter().map(|&i| &self.transitions[i])
    }

    /// Checks determinism (exactly one transition per non-final state and
    /// bit) and completeness (at least one).
    pub fn analyze(&self) -> ZAnalysis {
        let mut ambiguous = Vec::new();
        let mut missing = Vec::new();
        for q in 0..self.states {
            if q == self.final_state {
                continue;
            }
            for bit in Bit::BOTH {
                match self.outgoing[q][bit.index()].len() {
                    0 => missing.push((q, bit)),
                    1 => {}
                    _ => ambiguous.push((q, bit)),
                }
            }
        }
        ZAnalysis {
            deterministic: ambiguous.is_empty() && missing.is_empty(),
            complete: missing.is_empty(),
            ambiguous,
            missing,
        }
    }

    /// Completes the machine by adding a garbage state that absorbs every
    /// missing (state, bit) pair. Already-complete machines are returned
    /// unchanged, so the accepted pair set is always preserved.
    pub fn completed(&self) -> ZTransducer {
        let analysis = self.analyze();
        if analysis.complete {
            return self.clone();
        }
        let garbage = self.states;
        let mut transitions = self.transitions.clone();
        for (q, bit) in analysis.missing {
            transitions.push(ZTransition { from: q, bit, out: ZOut::One, to: garbage });
        }
        for bit in Bit::BOTH {
            transitions.push(ZTransition { from: garbage, bit, out: ZOut::One, to: garbage });
        }
        ZTransducer::new(self.states + 1, transitions, self.initial, self.final_state).unwrap()
    }

    /// The set `{m | (word, c^m)}` is recognized: all output counts of
    /// accepting paths spelling the word. Counts never exceed `2 |word|`.
    pub fn outputs(&self, word: &[Bit]) -> BTreeSet<u64> {
        // per-live-state count sets, advanced one symbol at a time
        let mut counts: BTreeMap<usize, BTreeSet<u64>> =
            BTreeMap::from([(self.initial, BTreeSet::from([0]))]);
        for &bit in word {
            let mut next: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
            for (&q, reached) in &counts {
                for &ti in &self.outgoing[q][bit.index()] {
                    let t = &self.transitions[ti];
                    let slot = next.entry(t.to).or_default();
                    slot.extend(reached.iter().map(|c| c + t.out.count()));
                }
            }
            counts = next;
        }
        counts.remove(&self.final_state).unwrap_or_default()
    }

    pub fn accepts(&self, pair: &ZPair) -> bool {
        self.outputs(&pair.input).contains(&pair.count)
    }

    /// True when some output exists for the word, i.e. the word is in the
    /// input language.
    pub fn accepts_input(&self, word: &[Bit]) -> bool {
        !self.outputs(word).is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in 0..self.states {
            out.push_str(&format!("zstate {s}\n"));
        }
        out.push_str(&format!("zinit {}\n", self.initial));
        out.push_str(&format!("zfinal {}\n", self.final_state));
        for t in &self.transitions {
            out.push_str(&format!(
                "ztrans {} {} {} {}\n",
                t.from,
                t.bit,
                t.out.count(),
                t.to
            ));
        }
        out
    }

    pub fn from_text(input: &str) -> Result<ZTransducer, ParseError> {
        let mut names: Vec<String> = Vec::new();
        let mut initial = None;
        let mut final_state = None;
        let mut transitions = Vec::new();
        let lookup = |names: &[String], tok: &str, line: usize| {
            names
                .iter()
                .position(|n| n == tok)
                .ok_or_else(|| ParseError::new(line, format!("unknown state `{tok}`")))
        };
        for (line, tokens) in tokenize(input) {
            match tokens[0] {
                "zstate" if tokens.len() == 2 => {
                    if names.iter().any(|n| n == tokens[1]) {
                        return Err(ParseError::new(line, format!("duplicate state `{}`", tokens[1])));
                    }
                    names.push(tokens[1].to_string());
                }
                "zinit" if tokens.len() == 2 => initial = Some(lookup(&names, tokens[1], line)?),
                "zfinal" if tokens.len() == 2 => {
                    final_state = Some(lookup(&names, tokens[1], line)?)
                }
                "ztrans" if tokens.len() == 5 => {
                    let from = lookup(&names, tokens[1], line)?;
                    let bit = match tokens[2] {
                        "0" => Bit::Zero,
                        "1" => Bit::One,
                        _ => return Err(ParseError::new(line, "input symbol must be 0 or 1")),
                    };
                    let out = tokens[3]
                        .parse()
                        .ok()
                        .and_then(ZOut::from_count)
                        .ok_or_else(|| ParseError::new(line, "output count must be 1 or 2"))?;
                    let to = lookup(&names, tokens[4], line)?;
                    transitions.push(ZTransition { from, bit, out, to });
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        "expected `zstate <id>`, `zinit <id>`, `zfinal <id>` or `ztrans <from> <0|1> <1|2> <to>`",
                    ))
                }
            }
        }
        let initial = initial.ok_or_else(|| ParseError::new(0, "missing `zinit` line"))?;
        let final_state = final_state.ok_or_else(|| ParseError::new(0, "missing `zfinal` line"))?;
        ZTransducer::new(names.len(), transitions, initial, final_state)
            .map_err(|e| ParseError::new(0, e.to_string()))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ztransducer {\n  rankdir=LR;\n  start [shape=point];\n");
        for s in 0..self.states {
            let shape = if s == self.final_state { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{s} [shape={shape}];\n"));
        }
        out.push_str(&format!("  start -> q{};\n", self.initial));
        for t in &self.transitions {
            out.push_str(&format!(
                "  q{} -> q{} [label=\"{} / c^{}\"];\n",
                t.from,
                t.to,
                t.bit,
                t.out.count()
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// A coded pair: binary input word and output count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZPair {
    pub input: Vec<Bit>,
    pub count: u64,
}

impl fmt::Display for ZPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_bits(&self.input), self.count)
    }
}

/// The block coding of `{a, b, i1, ..., in}` into `{10^i 1 | k <= i <= k+n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coding {
    /// `k = 1 + max |u_i|, |v_i|`.
    pub k: usize,
    /// Number of index letters.
    pub index_count: u32,
}

impl Coding {
    pub fn for_instance(inst: &PcpInstance) -> Coding {
        let max_len = (1..=inst.len() as u32)
            .flat_map(|alpha| {
                [inst.width(Side::U, alpha), inst.width(Side::V, alpha)]
            })
            .max()
            .unwrap();
        Coding { k: 1 + max_len, index_count: inst.len() as u32 }
    }

    /// Zeros in the code of a letter: `a -> k`, `b -> k+1`, `i_alpha -> k+1+alpha`.
    pub fn zeros(&self, letter: Letter) -> usize {
        match letter {
            Letter::A => self.k,
            Letter::B => self.k + 1,
            Letter::Index(alpha) => self.k + 1 + alpha as usize,
        }
    }

    pub fn code_len(&self, letter: Letter) -> usize {
        self.zeros(letter) + 2
    }

    /// `delta` of a single letter: `1 0^zeros 1`.
    pub fn code(&self, letter: Letter) -> Vec<Bit> {
        let mut out = vec![Bit::One];
        out.extend(std::iter::repeat_n(Bit::Zero, self.zeros(letter)));
        out.push(Bit::One);
        out
    }

    /// `delta` extended letterwise to a word.
    pub fn encode_word(&self, word: &[Letter]) -> Vec<Bit> {
        word.iter().flat_map(|&l| self.code(l)).collect()
    }

    /// `chi(w, c^m) = (delta(w) 0, c^{m + |delta(w) 0|})`.
    pub fn chi(&self, pair: &UnaryPair) -> ZPair {
        let mut input = self.encode_word(&pair.input);
        input.push(Bit::Zero);
        let count = pair.count + input.len() as u64;
        ZPair { input, count }
    }
}

/// Compiles a coded relation to a complete Z-transducer recognizing
/// exactly the chi image of the relation.
///
/// Each transition `(q, x, m, q')` of the underlying transducer becomes a
/// chain over the bits of `delta(x)` emitting two `c`'s on the first `m`
/// positions and one elsewhere (this needs `m <= |delta(x)|`, which holds
/// for every relation generated from a PCP instance because `k` exceeds
/// every word length); a shared trailing-`0` transition with output one
/// enters the fresh final state from every formerly-final state. The
/// result is garbage-completed.
pub fn compile_relation(coding: &Coding, rel: &Relation) -> Result<ZTransducer, ZtError> {
    let t = rel.transducer();
    let q_f = t.state_count();
    let mut fresh = t.state_count() + 1;
    let mut transitions = Vec::new();
    for tr in t.transitions() {
        let code = coding.encode_word(&tr.input);
        if (tr.count as usize) > code.len() {
            return Err(ZtError::CodingTooSmall {
                input: crate::alphabet::format_word(&tr.input),
                count: tr.count,
                coded_len: code.len(),
            });
        }
        let mut cur = tr.from;
        for (i, &bit) in code.iter().enumerate() {
            let next = if i + 1 == code.len() {
                tr.to
            } else {
                fresh += 1;
                fresh - 1
            };
            let out = if (i as u64) < tr.count { ZOut::Two } else { ZOut::One };
            transitions.push(ZTransition { from: cur, bit, out, to: next });
            cur = next;
        }
    }
    for &f in t.finals() {
        transitions.push(ZTransition { from: f, bit: Bit::Zero, out: ZOut::One, to: q_f });
    }
    let machine = ZTransducer::new(fresh, transitions, t.initial(), q_f)?;
    Ok(machine.completed())
}

/// Builds the deterministic, complete Z-transducer recognizing the coded
/// reference shape: one or more index codes (each worth its length plus
/// one), then one or more `a`/`b` codes (length plus two), then the `0`
/// marker. The surplus `c` sits on each code's leading `1`, and for the
/// letter codes also on the terminating `1` -- the first point where the
/// zero count separates letter codes from index codes. Everything else
/// routes to a garbage sink.
pub fn build_chi_l0(inst: &PcpInstance) -> ZTransducer {
    let coding = Coding::for_instance(inst);
    build_chi_l0_with(&coding)
}

pub fn build_chi_l0_with(coding: &Coding) -> ZTransducer {
    let k = coding.k;
    let max_zeros = k + 1 + coding.index_count as usize;
    // zero counters for the three block contexts
    let span = max_zeros + 1;
    let start = 0;
    let zeros1 = |c: usize| 1 + c; // first block: must be an index code
    let after_index = 1 + span;
    let zeros2 = |c: usize| after_index + 1 + c; // index or first letter code
    let after_letter = after_index + 1 + span;
    let zeros3 = |c: usize| after_letter + 1 + c; // letter codes only
    let garbage = after_letter + 1 + span;
    let fin = garbage + 1;
    let states = fin + 1;

    let is_letter = |c: usize| c == k || c == k + 1;
    let is_index = |c: usize| c >= k + 2 && c <= max_zeros;

    let mut ts = Vec::new();
    let mut add = |from: usize, bit: Bit, out: ZOut, to: usize| {
        ts.push(ZTransition { from, bit, out, to });
    };

    add(start, Bit::One, ZOut::Two, zeros1(0));
    add(start, Bit::Zero, ZOut::One, garbage);
    for c in 0..span {
        // another zero inside the current block
        for (zs, _) in [(zeros1(c), 1), (zeros2(c), 2), (zeros3(c), 3)] {
            if c + 1 < span {
                add(zs, Bit::Zero, ZOut::One, zs + 1);
            } else {
                add(zs, Bit::Zero, ZOut::One, garbage);
            }
        }
        // terminating 1 decides the block by its zero count
        add(
            zeros1(c),
            Bit::One,
            ZOut::One,
            if is_index(c) { after_index } else { garbage },
        );
        let (to2, out2) = if is_index(c) {
            (after_index, ZOut::One)
        } else if is_letter(c) {
            (after_letter, ZOut::Two)
        } else {
            (garbage, ZOut::One)
        };
        add(zeros2(c), Bit::One, out2, to2);
        let (to3, out3) = if is_letter(c) {
            (after_letter, ZOut::Two)
        } else {
            (garbage, ZOut::One)
        };
        add(zeros3(c), Bit::One, out3, to3);
    }
    add(after_index, Bit::One, ZOut::Two, zeros2(0));
    add(after_index, Bit::Zero, ZOut::One, garbage);
    add(after_letter, Bit::One, ZOut::Two, zeros3(0));
    add(after_letter, Bit::Zero, ZOut::One, fin);
    add(garbage, Bit::Zero, ZOut::One, garbage);
    add(garbage, Bit::One, ZOut::One, garbage);

    ZTransducer::new(states, ts, start, fin).unwrap()
}

/// Builds both compiled side machines and the deterministic reference
/// machine for an instance, sharing one coding.
pub struct CodedInstance {
    pub coding: Coding,
    pub chi_l0: ZTransducer,
}

impl CodedInstance {
    pub fn new(inst: &PcpInstance) -> CodedInstance {
        let coding = Coding::for_instance(inst);
        CodedInstance { coding, chi_l0: build_chi_l0_with(&coding) }
    }
}

/// Convenience: all unary pairs over the instance alphabet with input
/// length at most `max_len` and count at most the coded input length plus
/// one (larger counts are recognizable by no compiled machine).
pub fn coded_probe_pairs(inst: &PcpInstance, max_len: usize) -> Vec<UnaryPair> {
    let coding = Coding::for_instance(inst);
    let sigma = inst.sigma();
    let mut words: Vec<Vec<Letter>> = vec![Vec::new()];
    let mut all = Vec::new();
    for _ in 0..=max_len {
        for w in &words {
            let coded_len = coding.encode_word(w).len() as u64 + 1;
            for count in 0..=coded_len {
                all.push(UnaryPair::new(w.clone(), count));
            }
        }
        let mut next = Vec::new();
        for w in &words {
            for l in sigma.letters() {
                let mut w2 = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        words = next;
    }
    all
}

/// Cache of compiled machines for membership cross-checks.
pub struct CompiledSides {
    pub l0: ZTransducer,
    pub lu: ZTransducer,
    pub lv: ZTransducer,
}

pub fn compile_sides(
    inst: &PcpInstance,
    lu: &Relation,
    lv: &Relation,
    l0: &Relation,
) -> Result<CompiledSides, ZtError> {
    let coding = Coding::for_instance(inst);
    Ok(CompiledSides {
        l0: compile_relation(&coding, l0)?,
        lu: compile_relation(&coding, lu)?,
        lv: compile_relation(&coding, lv)?,
    })
}

/// Memoized membership probe used by tests: checks the coding-faithfulness
/// equivalence `contains(L, p) <=> Z accepts chi(p)` for one pair.
pub fn coding_faithful_at(
    coding: &Coding,
    rel: &Relation,
    machine: &ZTransducer,
    pair: &UnaryPair,
    cache: &mut HashMap<Vec<Bit>, BTreeSet<u64>>,
) -> bool {
    let coded = coding.chi(pair);
    let outputs = cache
        .entry(coded.input.clone())
        .or_insert_with(|| machine.outputs(&coded.input));
    rel.contains(pair) == outputs.contains(&coded.count)
}

//! PCP instances and the layered relations whose inclusion encodes
//! solvability.
//!
//! For an instance with pairs `(u_1, v_1), ..., (u_n, v_n)` over `{a, b}`
//! the input alphabet becomes `{a, b, i1, ..., in}` and, with
//! `k_alpha = |u_alpha|`, the u-side layers are
//!
//! ```text
//! L1       = {(i_alpha, c^{k_alpha + 1})}*
//! L_{bj}   = L1 (i_b, c^j) {(i_alpha, c)}*          for 1 <= j <= k_b
//! L2       = union of the L_{bj}
//! L3       = L2 {(a,c),(b,c)}*
//! L4       = L1 {(a,c),(b,c)}* {(a,c^2),(b,c^2)}+
//! M_{b,mu} = L1 (i_b, c) {(i_alpha, c)}* {(a,c),(b,c)}* (mu, c^{2 k_b}) {(a,c^2),(b,c^2)}*
//! L5       = union of the M_{b,mu} over mu of length k_b, mu != u_b
//! Lu       = L3 | L4 | L5
//! ```
//!
//! and `Lv` is the same thing built from the `v` words. `L0` is the
//! reference shape `{(i_alpha, c)}+ {(a,c^2),(b,c^2)}+`. A word
//! `(i_{a1}..i_{as} w1, c^{s+2|w1|})` of `L0` lies in `Lu` exactly when
//! `w1` differs from `u_{a1}..u_{as}`, which is what [`scan_claim`]
//! exercises bound by bound.

use crate::alphabet::Letter;
use crate::relation::{Relation, Sigma, UnaryPair};
use std::fmt;
use thiserror::Error;

use crate::textfmt::{tokenize, ParseError};

/// A letter of the base alphabet `{a, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ab {
    A,
    B,
}

impl Ab {
    pub const BOTH: [Ab; 2] = [Ab::A, Ab::B];

    pub fn to_letter(self) -> Letter {
        match self {
            Ab::A => Letter::A,
            Ab::B => Letter::B,
        }
    }

    pub fn from_char(c: char) -> Option<Ab> {
        match c {
            'a' => Some(Ab::A),
            'b' => Some(Ab::B),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Ab::A => 'a',
            Ab::B => 'b',
        }
    }
}

/// A word over `{a, b}`.
pub type AbWord = Vec<Ab>;

pub fn parse_ab_word(s: &str) -> Option<AbWord> {
    s.chars().map(Ab::from_char).collect()
}

pub fn format_ab_word(w: &[Ab]) -> String {
    w.iter().map(|l| l.as_char()).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcpError {
    #[error("an instance needs at least one pair")]
    EmptyInstance,
    #[error("pair {0} has an empty word (both sides must be nonempty)")]
    EmptyWord(usize),
    #[error("index {0} out of range (instance has {1} pairs)")]
    IndexOutOfRange(u32, usize),
    #[error("index sequence must be nonempty")]
    EmptySequence,
    #[error("mismatch-word enumeration for pair {pair} needs 2^{width} entries, over the cap {cap}")]
    EnumerationTooLarge { pair: usize, width: usize, cap: usize },
    #[error("sequence is not a solution: u side spells {u}, v side spells {v}")]
    NotASolution { u: String, v: String },
}

/// Which component of the word pairs a construction reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    U,
    V,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::U => write!(f, "u"),
            Side::V => write!(f, "v"),
        }
    }
}

/// An instance of the Post Correspondence Problem: pairs of nonempty words
/// over `{a, b}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcpInstance {
    pairs: Vec<(AbWord, AbWord)>,
}

impl PcpInstance {
    pub fn new(pairs: Vec<(AbWord, AbWord)>) -> Result<PcpInstance, PcpError> {
        if pairs.is_empty() {
            return Err(PcpError::EmptyInstance);
        }
        for (i, (u, v)) in pairs.iter().enumerate() {
            if u.is_empty() || v.is_empty() {
                return Err(PcpError::EmptyWord(i + 1));
            }
        }
        Ok(PcpInstance { pairs })
    }

    /// Number of pairs `n` (always positive).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// The word of pair `alpha` (1-based) on the given side.
    pub fn word(&self, side: Side, alpha: u32) -> &AbWord {
        let (u, v) = &self.pairs[(alpha - 1) as usize];
        match side {
            Side::U => u,
            Side::V => v,
        }
    }

    /// `k_alpha`, the length of pair `alpha`'s word on the given side.
    pub fn width(&self, side: Side, alpha: u32) -> usize {
        self.word(side, alpha).len()
    }

    pub fn sigma(&self) -> Sigma {
        Sigma::new(self.pairs.len() as u32)
    }

    /// Concatenation of the side's words along an index sequence.
    pub fn spell(&self, side: Side, seq: &IndexSequence) -> AbWord {
        let mut out = Vec::new();
        for &alpha in seq.indices() {
            out.extend_from_slice(self.word(side, alpha));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (u, v) in &self.pairs {
            out.push_str(&format!("pair {} {}\n", format_ab_word(u), format_ab_word(v)));
        }
        out
    }

    pub fn from_text(input: &str) -> Result<PcpInstance, ParseError> {
        let mut pairs = Vec::new();
        for (line, tokens) in tokenize(input) {
            if tokens[0] != "pair" || tokens.len() != 3 {
                return Err(ParseError::new(line, "expected `pair <u> <v>` with words over {a,b}"));
            }
            let u = parse_ab_word(tokens[1])
                .ok_or_else(|| ParseError::new(line, "u word must be over {a,b}"))?;
            let v = parse_ab_word(tokens[2])
                .ok_or_else(|| ParseError::new(line, "v word must be over {a,b}"))?;
            pairs.push((u, v));
        }
        PcpInstance::new(pairs).map_err(|e| ParseError::new(0, e.to_string()))
    }
}

/// A candidate solution: indices `alpha_1 .. alpha_s`, 1-based, nonempty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexSequence(Vec<u32>);

impl IndexSequence {
    pub fn new(indices: Vec<u32>, instance: &PcpInstance) -> Result<IndexSequence, PcpError> {
        if indices.is_empty() {
            return Err(PcpError::EmptySequence);
        }
        for &i in &indices {
            if i == 0 || i as usize > instance.len() {
                return Err(PcpError::IndexOutOfRange(i, instance.len()));
            }
        }
        Ok(IndexSequence(indices))
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// Sequence length `s` (always positive).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for IndexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The five layer relations of one side together with their union.
#[derive(Debug, Clone)]
pub struct SideRelations {
    pub l1: Relation,
    pub l2: Relation,
    pub l3: Relation,
    pub l4: Relation,
    pub l5: Relation,
    /// `L3 | L4 | L5`, i.e. `Lu` or `Lv` depending on the side.
    pub l_side: Relation,
}

pub const DEFAULT_ENUM_CAP: usize = 1 << 16;

/// Builds `L1..L5` and their union for one side of the instance.
pub fn build_side(inst: &PcpInstance, side: Side) -> Result<SideRelations, PcpError> {
    build_side_with_cap(inst, side, DEFAULT_ENUM_CAP)
}

pub fn build_side_with_cap(
    inst: &PcpInstance,
    side: Side,
    cap: usize,
) -> Result<SideRelations, PcpError> {
    let sigma = inst.sigma();
    let n = inst.len() as u32;

    let atom = |word: Vec<Letter>, count: u64| Relation::atom(sigma, word, count).unwrap();
    let index_atom = |alpha: u32, count: u64| atom(vec![Letter::Index(alpha)], count);

    // {(a,c),(b,c)} and {(a,c^2),(b,c^2)}
    let letters_single = atom(vec![Letter::A], 1).union(&atom(vec![Letter::B], 1)).unwrap();
    let letters_double = atom(vec![Letter::A], 2).union(&atom(vec![Letter::B], 2)).unwrap();
    // {(i_alpha, c)}
    let index_single = Relation::union_all(
        &(1..=n).map(|alpha| index_atom(alpha, 1)).collect::<Vec<_>>().iter().collect::<Vec<_>>(),
    )
    .unwrap();

    // L1 = {(i_alpha, c^{k_alpha+1})}*
    let l1_base = Relation::union_all(
        &(1..=n)
            .map(|alpha| index_atom(alpha, inst.width(side, alpha) as u64 + 1))
            .collect::<Vec<_>>()
            .iter()
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let l1 = l1_base.star();

    // L2 = union over beta, 1 <= j <= k_beta of L1 (i_beta, c^j) {(i_alpha,c)}*
    let index_single_star = index_single.star();
    let mut l2_parts = Vec::new();
    for beta in 1..=n {
        for j in 1..=inst.width(side, beta) as u64 {
            l2_parts.push(
                l1.concat(&index_atom(beta, j)).unwrap().concat(&index_single_star).unwrap(),
            );
        }
    }
    let l2 = Relation::union_all(&l2_parts.iter().collect::<Vec<_>>()).unwrap();

    // L3 = L2 {(a,c),(b,c)}*
    let l3 = l2.concat(&letters_single.star()).unwrap();

    // L4 = L1 {(a,c),(b,c)}* {(a,c^2),(b,c^2)}+
    let l4 = l1
        .concat(&letters_single.star())
        .unwrap()
        .concat(&letters_double.plus())
        .unwrap();

    // L5 = union over beta and mu (same length as the beta word, different
    //      from it) of M_{beta,mu}
    let mut l5_parts = Vec::new();
    for beta in 1..=n {
        let k_beta = inst.width(side, beta);
        if cap >> k_beta == 0 {
            return Err(PcpError::EnumerationTooLarge {
                pair: beta as usize,
                width: k_beta,
                cap,
            });
        }
        for mu in mismatch_words(inst.word(side, beta)) {
            let mu_letters: Vec<Letter> = mu.iter().map(|l| l.to_letter()).collect();
            let m = l1
                .concat(&index_atom(beta, 1))
                .unwrap()
                .concat(&index_single_star)
                .unwrap()
                .concat(&letters_single.star())
                .unwrap()
                .concat(&atom(mu_letters, 2 * k_beta as u64))
                .unwrap()
                .concat(&letters_double.star())
                .unwrap();
            l5_parts.push(m);
        }
    }
    let l5 = Relation::union_all(&l5_parts.iter().collect::<Vec<_>>()).unwrap();

    let l_side = l3.union(&l4).unwrap().union(&l5).unwrap();
    Ok(SideRelations { l1, l2, l3, l4, l5, l_side })
}

/// All words of the same length as `word` over `{a,b}` except `word`
/// itself, in lexicographic order.
fn mismatch_words(word: &AbWord) -> Vec<AbWord> {
    let mut out = Vec::new();
    let mut current = vec![Ab::A; word.len()];
    loop {
        if current != *word {
            out.push(current.clone());
        }
        // increment in base 2 (A = 0, B = 1)
        let mut i = current.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] == Ab::A {
                current[i] = Ab::B;
                for slot in &mut current[i + 1..] {
                    *slot = Ab::A;
                }
                break;
            }
        }
    }
}

/// `L0 = {(i_alpha, c)}+ {(a,c^2),(b,c^2)}+`, the reference shape every
/// candidate word is drawn from.
pub fn build_l0(inst: &PcpInstance) -> Relation {
    let sigma = inst.sigma();
    let atom = |word: Vec<Letter>, count: u64| Relation::atom(sigma, word, count).unwrap();
    let index_single = Relation::union_all(
        &(1..=inst.len() as u32)
            .map(|alpha| atom(vec![Letter::Index(alpha)], 1))
            .collect::<Vec<_>>()
            .iter()
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let letters_double = atom(vec![Letter::A], 2).union(&atom(vec![Letter::B], 2)).unwrap();
    index_single.plus().concat(&letters_double.plus()).unwrap()
}

/// The canonical `L0` element carried by a solution sequence:
/// `(i_{a1}..i_{as} u_{a1}..u_{as}, c^{s + 2(k_{a1}+..+k_{as})})`.
/// Rejects sequences whose two concatenations differ.
pub fn solution_witness(
    inst: &PcpInstance,
    seq: &IndexSequence,
) -> Result<UnaryPair, PcpError> {
    let u = inst.spell(Side::U, seq);
    let v = inst.spell(Side::V, seq);
    if u != v {
        return Err(PcpError::NotASolution { u: format_ab_word(&u), v: format_ab_word(&v) });
    }
    let mut input: Vec<Letter> = seq.indices().iter().map(|&a| Letter::Index(a)).collect();
    let count = seq.len() as u64 + 2 * u.len() as u64;
    input.extend(u.iter().map(|l| l.to_letter()));
    Ok(UnaryPair::new(input, count))
}

/// Exhaustive bounded search for the shortlex-minimal solution sequence.
/// Prunes branches where neither concatenation is a prefix of the other.
pub fn brute_force(inst: &PcpInstance, max_len: usize) -> Option<IndexSequence> {
    fn extend(
        inst: &PcpInstance,
        seq: &mut Vec<u32>,
        u: &mut AbWord,
        v: &mut AbWord,
        remaining: usize,
    ) -> bool {
        let matched = u.len().min(v.len());
        if u[..matched] != v[..matched] {
            return false;
        }
        if !seq.is_empty() && u == v {
            return true;
        }
        if remaining == 0 {
            return false;
        }
        for alpha in 1..=inst.len() as u32 {
            let (du, dv) = (inst.width(Side::U, alpha), inst.width(Side::V, alpha));
            seq.push(alpha);
            u.extend_from_slice(inst.word(Side::U, alpha));
            v.extend_from_slice(inst.word(Side::V, alpha));
            if extend(inst, seq, u, v, remaining - 1) {
                return true;
            }
            seq.pop();
            u.truncate(u.len() - du);
            v.truncate(v.len() - dv);
        }
        false
    }

    // iterative deepening keeps the answer shortlex-minimal
    for depth in 1..=max_len {
        let mut seq = Vec::new();
        let mut u = Vec::new();
        let mut v = Vec::new();
        if extend(inst, &mut seq, &mut u, &mut v, depth) && seq.len() == depth {
            return Some(IndexSequence(seq));
        }
    }
    None
}

/// Which proof case realizes membership of a mismatching `L0` word in the
/// side relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MismatchCase {
    /// `|w1|` exceeds the concatenation length; the factorization lands in `L4`.
    InputLonger,
    /// `|w1|` falls short of the concatenation length; lands in `L3`.
    InputShorter,
    /// Equal lengths with a differing block; lands in `L5`.
    SameLengthMismatch,
}

impl MismatchCase {
    pub fn layer_name(self) -> &'static str {
        match self {
            MismatchCase::InputLonger => "L4",
            MismatchCase::InputShorter => "L3",
            MismatchCase::SameLengthMismatch => "L5",
        }
    }
}

/// Classifies `w1` against the side concatenation along `seq`; `None`
/// means they are equal (the non-membership case).
pub fn classify_mismatch(
    inst: &PcpInstance,
    side: Side,
    seq: &IndexSequence,
    w1: &AbWord,
) -> Option<MismatchCase> {
    let spelled = inst.spell(side, seq);
    if *w1 == spelled {
        None
    } else if w1.len() > spelled.len() {
        Some(MismatchCase::InputLonger)
    } else if w1.len() < spelled.len() {
        Some(MismatchCase::InputShorter)
    } else {
        Some(MismatchCase::SameLengthMismatch)
    }
}

/// One disagreement found by [`scan_claim`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimViolation {
    pub side: Side,
    pub seq: IndexSequence,
    pub w1: AbWord,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Membership in the side relation disagreed with the
    /// concatenation-mismatch predicate.
    MembershipMismatch { expected: bool },
    /// The trichotomy case fired but its layer did not contain the word.
    CaseLayerMissing { case: MismatchCase },
}

impl fmt::Display for ClaimViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = format!(
            "({}{}, {})",
            self.seq.indices().iter().map(|i| format!("i{i}")).collect::<String>(),
            format_ab_word(&self.w1),
            self.seq.len() + 2 * self.w1.len()
        );
        match &self.kind {
            ViolationKind::MembershipMismatch { expected } => write!(
                f,
                "side {}: membership of {} should be {} (mismatch predicate)",
                self.side, word, expected
            ),
            ViolationKind::CaseLayerMissing { case } => write!(
                f,
                "side {}: {} fell in case {:?} but {} does not contain it",
                self.side,
                word,
                case,
                case.layer_name()
            ),
        }
    }
}

/// Enumerates every `L0`-shaped word within the bounds and checks the
/// per-word characterization on both sides: membership in `Lu` iff `w1`
/// differs from the u concatenation, and symmetrically for `Lv`. Also
/// checks that the trichotomy case that fired is realized by its layer.
/// Returns all violations; a correct construction returns none.
pub fn scan_claim(
    inst: &PcpInstance,
    max_seq_len: usize,
    max_word_len: usize,
) -> Result<Vec<ClaimViolation>, PcpError> {
    let sides = [
        (Side::U, build_side(inst, Side::U)?),
        (Side::V, build_side(inst, Side::V)?),
    ];
    let mut violations = Vec::new();

    let mut seqs: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..max_seq_len {
        let mut next = Vec::new();
        for seq in &seqs {
            for alpha in 1..=inst.len() as u32 {
                let mut s = seq.clone();
                s.push(alpha);
                next.push(s);
            }
        }
        for seq in next.iter().cloned() {
            let seq = IndexSequence(seq);
            let mut words: Vec<AbWord> = vec![Vec::new()];
            for _ in 0..max_word_len {
                let mut grown = Vec::new();
                for w in &words {
                    for l in Ab::BOTH {
                        let mut w2 = w.clone();
                        w2.push(l);
                        grown.push(w2);
                    }
                }
                for w1 in &grown {
                    let mut input: Vec<Letter> =
                        seq.indices().iter().map(|&a| Letter::Index(a)).collect();
                    input.extend(w1.iter().map(|l| l.to_letter()));
                    let pair =
                        UnaryPair::new(input, seq.len() as u64 + 2 * w1.len() as u64);
                    for (side, rels) in &sides {
                        let case = classify_mismatch(inst, *side, &seq, w1);
                        let expected = case.is_some();
                        if rels.l_side.contains(&pair) != expected {
                            violations.push(ClaimViolation {
                                side: *side,
                                seq: seq.clone(),
                                w1: w1.clone(),
                                kind: ViolationKind::MembershipMismatch { expected },
                            });
                        }
                        if let Some(case) = case {
                            let layer = match case {
                                MismatchCase::InputLonger => &rels.l4,
                                MismatchCase::InputShorter => &rels.l3,
                                MismatchCase::SameLengthMismatch => &rels.l5,
                            };
                            if !layer.contains(&pair) {
                                violations.push(ClaimViolation {
                                    side: *side,
                                    seq: seq.clone(),
                                    w1: w1.clone(),
                                    kind: ViolationKind::CaseLayerMissing { case },
                                });
                            }
                        }
                    }
                }
                words = grown;
            }
        }
        seqs = next;
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{parse_word, Word};

    fn inst() -> PcpInstance {
        PcpInstance::from_text("pair ab a\npair b bb\n").unwrap()
    }

    fn seq(inst: &PcpInstance, idx: &[u32]) -> IndexSequence {
        IndexSequence::new(idx.to_vec(), inst).unwrap()
    }

    fn pair(word: &str, count: u64) -> UnaryPair {
        UnaryPair::new(parse_word(word).unwrap(), count)
    }

    #[test]
    fn widths_and_alphabet() {
        let i = inst();
        assert_eq!(i.width(Side::U, 1), 2);
        assert_eq!(i.width(Side::U, 2), 1);
        assert_eq!(i.width(Side::V, 1), 1);
        assert_eq!(i.width(Side::V, 2), 2);
        assert_eq!(i.sigma(), Sigma::new(2));
    }

    #[test]
    fn l1_membership() {
        let side = build_side(&inst(), Side::U).unwrap();
        assert!(side.l1.contains(&pair("i1i2", 5)));
        assert!(!side.l1.contains(&pair("i1i2", 4)));
        assert!(side.l1.contains(&pair("-", 0)));
    }

    #[test]
    fn l3_l4_l5_hand_factorizations() {
        let side = build_side(&inst(), Side::U).unwrap();
        // (i1, c^2)(a, c) with beta = 1, j = 2
        assert!(side.l3.contains(&pair("i1a", 3)));
        // (i1, c^3)(ab, c^2)(b, c^2)
        assert!(side.l4.contains(&pair("i1abb", 7)));
        // M_{1,ba}: (i1, c)(ba, c^4)
        assert!(side.l5.contains(&pair("i1ba", 5)));
    }

    #[test]
    fn l0_shape() {
        let l0 = build_l0(&inst());
        assert!(l0.contains(&pair("i1a", 3)));
        assert!(!l0.contains(&pair("i1", 1)));
        assert!(!l0.contains(&pair("a", 2)));
    }

    #[test]
    fn l0_projection_is_the_index_then_letter_shape() {
        let nfa = build_l0(&inst()).input_language();
        assert!(nfa.accepts(&parse_word("i1a").unwrap()));
        assert!(nfa.accepts(&parse_word("i2i1ab").unwrap()));
        assert!(!nfa.accepts(&parse_word("i1").unwrap()));
        assert!(!nfa.accepts(&parse_word("a").unwrap()));
        assert!(!nfa.accepts(&parse_word("i1ai2").unwrap()));
    }

    #[test]
    fn witness_of_a_solution() {
        let i = inst();
        let w = solution_witness(&i, &seq(&i, &[1, 2])).unwrap();
        assert_eq!(w, pair("i1i2abb", 8));

        let single = PcpInstance::from_text("pair a a\n").unwrap();
        let w = solution_witness(&single, &seq(&single, &[1])).unwrap();
        assert_eq!(w, pair("i1a", 3));
    }

    #[test]
    fn witness_rejects_non_solutions() {
        let i = inst();
        assert_eq!(
            solution_witness(&i, &seq(&i, &[1])).unwrap_err(),
            PcpError::NotASolution { u: "ab".into(), v: "a".into() }
        );
    }

    #[test]
    fn brute_force_examples() {
        let i = inst();
        assert_eq!(brute_force(&i, 3), Some(seq(&i, &[1, 2])));

        let growing = PcpInstance::from_text("pair a aa\n").unwrap();
        assert_eq!(brute_force(&growing, 5), None);

        let trivial = PcpInstance::from_text("pair a a\n").unwrap();
        assert_eq!(brute_force(&trivial, 1), Some(seq(&trivial, &[1])));
    }

    #[test]
    fn brute_force_is_shortlex_minimal() {
        // both pairs solve immediately; index 1 must win
        let i = PcpInstance::from_text("pair a a\npair b b\n").unwrap();
        assert_eq!(brute_force(&i, 3), Some(seq(&i, &[1])));
    }

    #[test]
    fn witness_escapes_both_sides() {
        // whatever solution the search finds, its witness lies in L0 and
        // escapes both union layers
        for text in ["pair ab a\npair b bb\n", "pair a a\n", "pair a ab\npair bb b\n"] {
            let i = PcpInstance::from_text(text).unwrap();
            let solution = brute_force(&i, 3).expect("solvable instance");
            let witness = solution_witness(&i, &solution).unwrap();
            let l0 = build_l0(&i);
            let lu = build_side(&i, Side::U).unwrap().l_side;
            let lv = build_side(&i, Side::V).unwrap().l_side;
            assert!(l0.contains(&witness));
            assert!(!lu.contains(&witness), "witness in Lu for {text:?}");
            assert!(!lv.contains(&witness), "witness in Lv for {text:?}");
        }
    }

    #[test]
    fn scan_finds_no_violations_on_desk_instances() {
        let i = inst();
        assert_eq!(scan_claim(&i, 2, 4).unwrap(), Vec::new());
        let trivial = PcpInstance::from_text("pair a a\n").unwrap();
        assert_eq!(scan_claim(&trivial, 2, 3).unwrap(), Vec::new());
    }

    #[test]
    fn mismatch_word_enumeration() {
        let w = parse_ab_word("ab").unwrap();
        let words = mismatch_words(&w);
        assert_eq!(words.len(), 3);
        assert!(!words.contains(&w));
    }

    #[test]
    fn enumeration_cap() {
        let wide = PcpInstance::new(vec![(vec![Ab::A; 20], vec![Ab::B])]).unwrap();
        assert!(matches!(
            build_side_with_cap(&wide, Side::U, 1 << 16),
            Err(PcpError::EnumerationTooLarge { pair: 1, width: 20, .. })
        ));
    }

    #[test]
    fn classify_cases() {
        let i = inst();
        let s = seq(&i, &[1, 2]);
        // u concatenation is "abb"
        assert_eq!(classify_mismatch(&i, Side::U, &s, &parse_ab_word("abb").unwrap()), None);
        assert_eq!(
            classify_mismatch(&i, Side::U, &s, &parse_ab_word("abba").unwrap()),
            Some(MismatchCase::InputLonger)
        );
        assert_eq!(
            classify_mismatch(&i, Side::U, &s, &parse_ab_word("ab").unwrap()),
            Some(MismatchCase::InputShorter)
        );
        assert_eq!(
            classify_mismatch(&i, Side::U, &s, &parse_ab_word("aba").unwrap()),
            Some(MismatchCase::SameLengthMismatch)
        );
    }

    // --- factor-enumeration oracle for the layer definitions ---
    //
    // Each layer set is rebuilt by direct expansion of its definition
    // inside a bounded box and compared with the machine membership.

    const BOX_LEN: usize = 8;
    const BOX_COUNT: u64 = 12;

    type PairSet = std::collections::BTreeSet<UnaryPair>;

    fn boxed(p: UnaryPair) -> Option<UnaryPair> {
        (p.input.len() <= BOX_LEN && p.count <= BOX_COUNT).then_some(p)
    }

    fn set_of(pairs: &[(&str, u64)]) -> PairSet {
        pairs
            .iter()
            .filter_map(|(w, c)| boxed(pair(w, *c)))
            .collect()
    }

    fn cross(a: &PairSet, b: &PairSet) -> PairSet {
        let mut out = PairSet::new();
        for x in a {
            for y in b {
                let mut input = x.input.clone();
                input.extend_from_slice(&y.input);
                if let Some(p) = boxed(UnaryPair::new(input, x.count + y.count)) {
                    out.insert(p);
                }
            }
        }
        out
    }

    fn star_set(base: &PairSet) -> PairSet {
        let mut out = PairSet::from([pair("-", 0)]);
        loop {
            let grown = cross(&out, base);
            let before = out.len();
            out.extend(grown);
            if out.len() == before {
                return out;
            }
        }
    }

    fn plus_set(base: &PairSet) -> PairSet {
        cross(base, &star_set(base))
    }

    fn union(sets: &[PairSet]) -> PairSet {
        sets.iter().flatten().cloned().collect()
    }

    /// The five layers expanded by hand from their definitions.
    fn oracle_layers(inst: &PcpInstance, side: Side) -> [PairSet; 5] {
        let n = inst.len() as u32;
        let index = |alpha: u32| format!("i{alpha}");
        let l1_base: PairSet = (1..=n)
            .filter_map(|alpha| {
                boxed(UnaryPair::new(
                    parse_word(&index(alpha)).unwrap(),
                    inst.width(side, alpha) as u64 + 1,
                ))
            })
            .collect();
        let l1 = star_set(&l1_base);
        let index_single: PairSet =
            (1..=n).filter_map(|alpha| boxed(pair(&index(alpha), 1))).collect();
        let letters_single = set_of(&[("a", 1), ("b", 1)]);
        let letters_double = set_of(&[("a", 2), ("b", 2)]);

        let mut l2_parts = Vec::new();
        for beta in 1..=n {
            for j in 1..=inst.width(side, beta) as u64 {
                let mid: PairSet = boxed(pair(&index(beta), j)).into_iter().collect();
                l2_parts.push(cross(&cross(&l1, &mid), &star_set(&index_single)));
            }
        }
        let l2 = union(&l2_parts);
        let l3 = cross(&l2, &star_set(&letters_single));
        let l4 = cross(&cross(&l1, &star_set(&letters_single)), &plus_set(&letters_double));

        let mut l5_parts = Vec::new();
        for beta in 1..=n {
            let k_beta = inst.width(side, beta) as u64;
            for mu in mismatch_words(inst.word(side, beta)) {
                let mu_pair: PairSet = boxed(UnaryPair::new(
                    mu.iter().map(|l| l.to_letter()).collect(),
                    2 * k_beta,
                ))
                .into_iter()
                .collect();
                let head: PairSet = boxed(pair(&index(beta), 1)).into_iter().collect();
                let m = cross(
                    &cross(
                        &cross(
                            &cross(&cross(&l1, &head), &star_set(&index_single)),
                            &star_set(&letters_single),
                        ),
                        &mu_pair,
                    ),
                    &star_set(&letters_double),
                );
                l5_parts.push(m);
            }
        }
        let l5 = union(&l5_parts);
        [l1, l2, l3, l4, l5]
    }

    #[test]
    fn layers_match_their_factor_enumerations() {
        for (text, side) in [
            ("pair ab a\npair b bb\n", Side::U),
            ("pair a a\n", Side::V),
        ] {
            let inst = PcpInstance::from_text(text).unwrap();
            let rels = build_side(&inst, side).unwrap();
            let layers = oracle_layers(&inst, side);
            let machines =
                [&rels.l1, &rels.l2, &rels.l3, &rels.l4, &rels.l5];

            // probe inputs: everything the oracles mention, plus all short
            // words (negatives with no valid shape at all)
            let mut inputs: std::collections::BTreeSet<Word> =
                layers.iter().flatten().map(|p| p.input.clone()).collect();
            let mut level: Vec<Word> = vec![Vec::new()];
            for _ in 0..3 {
                let mut next = Vec::new();
                for w in &level {
                    for l in inst.sigma().letters() {
                        let mut w2 = w.clone();
                        w2.push(l);
                        next.push(w2);
                    }
                }
                inputs.extend(next.iter().cloned());
                level = next;
            }

            // per input, the counts worth probing: the full range for short
            // inputs, otherwise the counts any oracle achieves plus their
            // one-off neighbours (the sharpest negatives)
            let mut achieved: std::collections::BTreeMap<&Word, std::collections::BTreeSet<u64>> =
                std::collections::BTreeMap::new();
            for p in layers.iter().flatten() {
                achieved.entry(&p.input).or_default().insert(p.count);
            }
            for (name, (oracle, machine)) in
                ["L1", "L2", "L3", "L4", "L5"].iter().zip(layers.iter().zip(machines))
            {
                for input in &inputs {
                    let counts: Vec<u64> = if input.len() <= 5 {
                        (0..=BOX_COUNT).collect()
                    } else {
                        let mut counts = std::collections::BTreeSet::from([0]);
                        for &c in achieved.get(input).into_iter().flatten() {
                            counts.extend([c.saturating_sub(1), c, (c + 1).min(BOX_COUNT)]);
                        }
                        counts.into_iter().collect()
                    };
                    for count in counts {
                        let p = UnaryPair::new(input.clone(), count);
                        assert_eq!(
                            machine.contains(&p),
                            oracle.contains(&p),
                            "{name} ({side}) disagrees with its enumeration at {p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn instance_file_round_trip() {
        let i = inst();
        assert_eq!(PcpInstance::from_text(&i.to_text()).unwrap(), i);
        assert!(PcpInstance::from_text("pair ab\n").is_err());
        assert!(PcpInstance::from_text("pair ax a\n").is_err());
    }
}

//! Nondeterministic defense systems.
//!
//! A system has lines `1..=s` defending integer nodes; a rule
//! `(k, a, j, z, p)` moves the defense of node `i` by line `k` to node
//! `i + z` by line `j` with probability `p` when attack symbol `a` arrives.
//! Probabilities are exact rationals and every (line, symbol) row must sum
//! to one. Only positivity matters for criticality, so the support of the
//! distribution is tracked as a plain set of configurations; support
//! dynamics are deterministic, which lets the critical-word search run as
//! a breadth-first walk over support states.

use crate::alphabet::{format_bits, Bit};
use crate::textfmt::{tokenize, ParseError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Exact rule probability.
pub type Prob = BigRational;

pub fn ratio(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// One instruction `(k, a, j, z, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdsRule {
    /// Source line `k`, 1-based.
    pub line: usize,
    /// Attack symbol.
    pub symbol: Bit,
    /// Target line `j`, 1-based.
    pub target: usize,
    /// Node shift `z` in {-1, 0, 1}.
    pub shift: i8,
    pub prob: Prob,
}

/// A defended (node, line) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub node: i64,
    /// 1-based line.
    pub line: usize,
}

impl Configuration {
    /// Integer encoding `node * s + (line - 1)`.
    pub fn code(&self, lines: usize) -> i64 {
        self.node * lines as i64 + (self.line as i64 - 1)
    }

    pub fn from_code(code: i64, lines: usize) -> Configuration {
        let s = lines as i64;
        Configuration { node: code.div_euclid(s), line: (code.rem_euclid(s) + 1) as usize }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(node {}, line {})", self.node, self.line)
    }
}

/// The set of configurations with positive probability.
pub type Support = BTreeSet<Configuration>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NdsError {
    #[error("a defense system needs at least one line")]
    NoLines,
    #[error("rule references line {0} but the system has {1} lines")]
    LineOutOfRange(usize, usize),
    #[error("rule shift {0} is not -1, 0 or 1")]
    BadShift(i8),
    #[error("rule for line {line} on symbol {symbol} has probability {prob} outside (0, 1]")]
    BadProbability { line: usize, symbol: Bit, prob: String },
    #[error("row (line {line}, symbol {symbol}) sums to {sum}, expected 1")]
    RowSum { line: usize, symbol: Bit, sum: String },
}

/// A validated defense system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nds {
    lines: usize,
    rules: Vec<NdsRule>,
    by_row: Vec<[Vec<usize>; 2]>,
}

impl Nds {
    pub fn new(lines: usize, rules: Vec<NdsRule>) -> Result<Nds, NdsError> {
        if lines == 0 {
            return Err(NdsError::NoLines);
        }
        for r in &rules {
            if r.line == 0 || r.line > lines {
                return Err(NdsError::LineOutOfRange(r.line, lines));
            }
            if r.target == 0 || r.target > lines {
                return Err(NdsError::LineOutOfRange(r.target, lines));
            }
            if !(-1..=1).contains(&r.shift) {
                return Err(NdsError::BadShift(r.shift));
            }
            if !r.prob.is_positive() || r.prob > Prob::one() {
                return Err(NdsError::BadProbability {
                    line: r.line,
                    symbol: r.symbol,
                    prob: r.prob.to_string(),
                });
            }
        }
        let mut by_row: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; lines];
        for (i, r) in rules.iter().enumerate() {
            by_row[r.line - 1][r.symbol.index()].push(i);
        }
        for line in 1..=lines {
            for symbol in Bit::BOTH {
                let sum: Prob = by_row[line - 1][symbol.index()]
                    .iter()
                    .map(|&i| rules[i].prob.clone())
                    .sum();
                if sum != Prob::one() {
                    return Err(NdsError::RowSum { line, symbol, sum: sum.to_string() });
                }
            }
        }
        Ok(Nds { lines, rules, by_row })
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn rules(&self) -> &[NdsRule] {
        &self.rules
    }

    pub fn row(&self, line: usize, symbol: Bit) -> impl Iterator<Item = &NdsRule> {
        self.by_row[line - 1][symbol.index()].iter().map(|&i| &self.rules[i])
    }

    /// Node 0 defended by line 1.
    pub fn initial_support(&self) -> Support {
        BTreeSet::from([Configuration { node: 0, line: 1 }])
    }

    /// Image of a support under one attack symbol.
    pub fn step_support(&self, support: &Support, symbol: Bit) -> Support {
        let mut out = BTreeSet::new();
        for cfg in support {
            for rule in self.row(cfg.line, symbol) {
                out.insert(Configuration {
                    node: cfg.node + rule.shift as i64,
                    line: rule.target,
                });
            }
        }
        out
    }

    pub fn support_after(&self, word: &[Bit]) -> Support {
        let mut support = self.initial_support();
        for &b in word {
            support = self.step_support(&support, b);
        }
        support
    }

    /// Exact configuration distribution after the attack word.
    pub fn attack_probabilities(&self, word: &[Bit]) -> BTreeMap<Configuration, Prob> {
        let mut dist = BTreeMap::from([(Configuration { node: 0, line: 1 }, Prob::one())]);
        for &b in word {
            let mut next: BTreeMap<Configuration, Prob> = BTreeMap::new();
            for (cfg, mass) in &dist {
                for rule in self.row(cfg.line, b) {
                    let target = Configuration {
                        node: cfg.node + rule.shift as i64,
                        line: rule.target,
                    };
                    let slot = next.entry(target).or_insert_with(Prob::zero);
                    *slot += mass * &rule.prob;
                }
            }
            dist = next;
        }
        dist
    }

    /// True when no node-0 configuration survives the attack word.
    pub fn is_critical(&self, word: &[Bit]) -> bool {
        self.support_after(word).iter().all(|c| c.node != 0)
    }

    /// Shortlex-minimal critical word of length at most `max_len`, if any.
    /// Breadth-first over support states; supports evolve deterministically,
    /// so revisited supports are pruned.
    pub fn search_critical(&self, max_len: usize) -> Option<Vec<Bit>> {
        let start = self.initial_support();
        let mut seen: HashSet<Support> = HashSet::from([start.clone()]);
        let mut queue: VecDeque<(Support, Vec<Bit>)> = VecDeque::from([(start, Vec::new())]);
        while let Some((support, word)) = queue.pop_front() {
            if word.len() == max_len {
                continue;
            }
            for symbol in Bit::BOTH {
                let next = self.step_support(&support, symbol);
                let mut next_word = word.clone();
                next_word.push(symbol);
                if next.iter().all(|c| c.node != 0) {
                    return Some(next_word);
                }
                if seen.insert(next.clone()) {
                    queue.push_back((next, next_word));
                }
            }
        }
        None
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("lines {}\n", self.lines);
        for r in &self.rules {
            out.push_str(&format!(
                "rule {} {} {} {} {}/{}\n",
                r.line,
                r.symbol,
                r.target,
                r.shift,
                r.prob.numer(),
                r.prob.denom()
            ));
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Nds, ParseError> {
        let mut lines_decl: Option<usize> = None;
        let mut rules = Vec::new();
        for (line, tokens) in tokenize(input) {
            match tokens[0] {
                "lines" if tokens.len() == 2 => {
                    lines_decl = Some(
                        tokens[1]
                            .parse()
                            .map_err(|_| ParseError::new(line, "line count must be a positive integer"))?,
                    );
                }
                "rule" if tokens.len() == 6 => {
                    let k: usize = tokens[1]
                        .parse()
                        .map_err(|_| ParseError::new(line, "source line must be a positive integer"))?;
                    let symbol = match tokens[2] {
                        "0" => Bit::Zero,
                        "1" => Bit::One,
                        _ => return Err(ParseError::new(line, "attack symbol must be 0 or 1")),
                    };
                    let j: usize = tokens[3]
                        .parse()
                        .map_err(|_| ParseError::new(line, "target line must be a positive integer"))?;
                    let z: i8 = tokens[4]
                        .parse()
                        .map_err(|_| ParseError::new(line, "shift must be -1, 0 or 1"))?;
                    let prob = parse_prob(tokens[5])
                        .ok_or_else(|| ParseError::new(line, "probability must be <num>/<den> or an integer"))?;
                    rules.push(NdsRule { line: k, symbol, target: j, shift: z, prob });
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        "expected `lines <s>` or `rule <k> <0|1> <j> <-1|0|1> <num>/<den>`",
                    ))
                }
            }
        }
        let lines = lines_decl.ok_or_else(|| ParseError::new(0, "missing `lines` declaration"))?;
        Nds::new(lines, rules).map_err(|e| ParseError::new(0, e.to_string()))
    }
}

fn parse_prob(token: &str) -> Option<Prob> {
    let (num, den) = match token.split_once('/') {
        Some((n, d)) => (n.parse::<i64>().ok()?, d.parse::<i64>().ok()?),
        None => (token.parse::<i64>().ok()?, 1),
    };
    if den == 0 {
        return None;
    }
    Some(ratio(num, den))
}

/// Renders the rule graph (lines as nodes, rules as labelled edges).
pub fn nds_to_dot(nds: &Nds) -> String {
    let mut out = String::from("digraph nds {\n  rankdir=LR;\n");
    for line in 1..=nds.lines() {
        out.push_str(&format!("  l{line} [shape=circle,label=\"line {line}\"];\n"));
    }
    for r in nds.rules() {
        out.push_str(&format!(
            "  l{} -> l{} [label=\"{} z{:+} {}/{}\"];\n",
            r.line,
            r.target,
            r.symbol,
            r.shift,
            r.prob.numer(),
            r.prob.denom()
        ));
    }
    out.push_str("}\n");
    out
}

/// Formats a found critical word for reports.
pub fn display_word(word: &[Bit]) -> String {
    format_bits(word)
}

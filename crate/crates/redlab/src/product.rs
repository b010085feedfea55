//! The product defense system simulating two Z-transducers.
//!
//! Given a deterministic machine `C` and a complete machine `D`, the
//! auxiliary machine `D'` is `D` extended with `C`'s transition table and a
//! copy of `C`'s initial fan-out from `D`'s initial state; it recognizes
//! the same pairs as `D` but also carries `C`'s paths. The defense system
//! then runs `C` and `D'` side by side: its lines are the pairs
//! `K1 x (K1 u K2)`, a product rule shifts the defended node by the output
//! length difference of the two simulated steps, the pair of final states
//! holds its node forever, and any pair that has lost one of the two
//! simulations drifts upward one node per symbol. The defended node always
//! equals "output of D' so far minus output of C so far", so a node-0
//! configuration surviving an attack word is exactly a way for `D` to
//! match `C`'s output on it.

use crate::alphabet::{format_bits, Bit};
use crate::nds::{Nds, NdsRule, Prob};
use crate::zt::{ZTransducer, ZtError};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProductError {
    #[error("machine C must be deterministic (offending pairs: {0})")]
    CNotDeterministic(String),
    #[error("machine D must be complete (missing pairs: {0})")]
    DNotComplete(String),
    #[error("machine D is degenerate: its initial state is final")]
    DegenerateD,
    #[error("product row (line {0}, symbol {1}) has no rules")]
    EmptyRow(usize, Bit),
    #[error(transparent)]
    Zt(#[from] ZtError),
}

/// One product line: a state of `C` paired with a state of `D'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductLine {
    pub c_state: usize,
    pub d_state: usize,
}

/// The built product system with its line table and the auxiliary machine.
#[derive(Debug, Clone)]
pub struct ProductReduction {
    pub nds: Nds,
    /// Line `i + 1` is `lines[i]`; line 1 pairs the two initial states.
    pub lines: Vec<ProductLine>,
    pub d_prime: ZTransducer,
    pub c_state_count: usize,
}

impl ProductReduction {
    pub fn line_number(&self, c_state: usize, d_state: usize) -> Option<usize> {
        self.lines
            .iter()
            .position(|l| l.c_state == c_state && l.d_state == d_state)
            .map(|i| i + 1)
    }
}

fn check_inputs(c: &ZTransducer, d: &ZTransducer) -> Result<(), ProductError> {
    let ca = c.analyze();
    if !ca.deterministic {
        let mut offending = ca.ambiguous.clone();
        offending.extend(ca.missing.iter().copied());
        let desc: Vec<String> =
            offending.iter().map(|(q, b)| format!("(q{q}, {b})")).collect();
        return Err(ProductError::CNotDeterministic(desc.join(", ")));
    }
    let da = d.analyze();
    if !da.complete {
        let desc: Vec<String> =
            da.missing.iter().map(|(q, b)| format!("(q{q}, {b})")).collect();
        return Err(ProductError::DNotComplete(desc.join(", ")));
    }
    if d.initial() == d.final_state() {
        return Err(ProductError::DegenerateD);
    }
    Ok(())
}

/// `D' = D` plus `C`'s transitions plus a copy of `C`'s initial fan-out
/// from `D`'s initial state. States `0..|C|` are `C`'s, then `D`'s follow;
/// the recognized set equals `O(D)` because the grafted paths end in `C`'s
/// final state, not `D'`'s.
pub fn build_d_prime(c: &ZTransducer, d: &ZTransducer) -> Result<ZTransducer, ProductError> {
    check_inputs(c, d)?;
    let n1 = c.state_count();
    let mut transitions = c.transitions().to_vec();
    for t in d.transitions() {
        let mut t = *t;
        t.from += n1;
        t.to += n1;
        transitions.push(t);
    }
    for t in c.transitions().iter().filter(|t| t.from == c.initial()) {
        let mut t = *t;
        t.from = n1 + d.initial();
        transitions.push(t);
    }
    Ok(ZTransducer::new(
        n1 + d.state_count(),
        transitions,
        n1 + d.initial(),
        n1 + d.final_state(),
    )?)
}

/// Builds the product defense system over lines `K1 x K3`.
pub fn build_product_nds(c: &ZTransducer, d: &ZTransducer) -> Result<ProductReduction, ProductError> {
    let d_prime = build_d_prime(c, d)?;
    let n1 = c.state_count();
    let n3 = d_prime.state_count();
    let c_final = c.final_state();
    let dp_final = d_prime.final_state();

    // line 1 is the initial pair; the rest follow in lexicographic order
    let first = ProductLine { c_state: c.initial(), d_state: d_prime.initial() };
    let mut lines = vec![first];
    for q in 0..n1 {
        for g in 0..n3 {
            let line = ProductLine { c_state: q, d_state: g };
            if line != first {
                lines.push(line);
            }
        }
    }
    let index: HashMap<(usize, usize), usize> =
        lines.iter().enumerate().map(|(i, l)| ((l.c_state, l.d_state), i + 1)).collect();

    let self_sustaining = index[&(c_final, c_final)];
    let mut rules = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let k = i + 1;
        let is_final_pair = line.c_state == c_final && line.d_state == dp_final;
        // a pair that has finished one simulation (or parked the D' side on
        // a dead copy of C's final state) drifts upward forever
        let simulation_lost = !is_final_pair
            && (line.c_state == c_final
                || line.d_state == dp_final
                || line.d_state == c_final);
        for symbol in Bit::BOTH {
            let mut row: BTreeSet<(i8, usize)> = BTreeSet::new();
            for ct in c.transitions_from(line.c_state, symbol) {
                for dt in d_prime.transitions_from(line.d_state, symbol) {
                    let z = dt.out.count() as i8 - ct.out.count() as i8;
                    row.insert((z, index[&(ct.to, dt.to)]));
                }
            }
            if is_final_pair {
                row.insert((0, k));
            }
            if simulation_lost {
                row.insert((1, self_sustaining));
            }
            if row.is_empty() {
                return Err(ProductError::EmptyRow(k, symbol));
            }
            let m = row.len() as i64;
            let p: Prob = BigRational::new(BigInt::from(1), BigInt::from(m));
            for (shift, target) in row {
                rules.push(NdsRule { line: k, symbol, target, shift, prob: p.clone() });
            }
        }
    }
    let nds = Nds::new(lines.len(), rules).expect("product rows are stochastic by construction");
    Ok(ProductReduction { nds, lines, d_prime, c_state_count: n1 })
}

/// What a bounded bidirectional check concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    /// A counterexample or a critical word was found: `O(C)` is not
    /// contained in `O(D)`.
    InclusionFails,
    /// Neither search succeeded within the bound.
    ConsistentWithinBounds,
}

/// Result of [`check_correspondence`].
#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    pub bound: usize,
    /// Shortlex-minimal `(w, y)` recognized by `C` but not by `D`.
    pub counterexample: Option<(Vec<Bit>, u64)>,
    /// When the forward direction fired: the bound `2l + 2` and the
    /// critical word found within it.
    pub forward_critical: Option<(usize, Option<Vec<Bit>>)>,
    /// Shortlex-minimal critical word of the product system within `bound`.
    pub critical: Option<Vec<Bit>>,
    /// When the backward direction fired: a counterexample no longer than
    /// the critical word.
    pub backward_counterexample: Option<Option<(Vec<Bit>, u64)>>,
    pub conclusion: Conclusion,
}

impl CorrespondenceReport {
    /// True when every assertion attached to a fired direction held.
    pub fn assertions_hold(&self) -> bool {
        let forward = match &self.forward_critical {
            None => true,
            Some((_, found)) => found.is_some(),
        };
        let backward = match &self.backward_counterexample {
            None => true,
            Some(found) => found.is_some(),
        };
        forward && backward
    }
}

impl fmt::Display for CorrespondenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound {}", self.bound)?;
        match &self.counterexample {
            Some((w, y)) => writeln!(f, "forward counterexample {} {}", format_bits(w), y)?,
            None => writeln!(f, "forward counterexample none")?,
        }
        if let Some((limit, found)) = &self.forward_critical {
            match found {
                Some(w) => writeln!(f, "forward critical {} within {}", format_bits(w), limit)?,
                None => writeln!(f, "forward critical MISSING within {limit}")?,
            }
        }
        match &self.critical {
            Some(w) => writeln!(f, "backward critical {}", format_bits(w))?,
            None => writeln!(f, "backward critical none")?,
        }
        if let Some(found) = &self.backward_counterexample {
            match found {
                Some((w, y)) => {
                    writeln!(f, "backward counterexample {} {}", format_bits(w), y)?
                }
                None => writeln!(f, "backward counterexample MISSING")?,
            }
        }
        match self.conclusion {
            Conclusion::InclusionFails => writeln!(f, "conclusion inclusion-fails"),
            Conclusion::ConsistentWithinBounds => writeln!(f, "conclusion inconclusive-consistent"),
        }
    }
}

/// Shortlex-minimal word recognized by `C` (with its unique output) but
/// not by `D`, up to the length bound.
pub fn find_counterexample(
    c: &ZTransducer,
    d: &ZTransducer,
    max_len: usize,
) -> Option<(Vec<Bit>, u64)> {
    let mut level: Vec<Vec<Bit>> = vec![Vec::new()];
    for len in 0..=max_len {
        for w in &level {
            let oc = c.outputs(w);
            if let Some(&y) = oc.iter().next() {
                debug_assert_eq!(oc.len(), 1, "deterministic machines output at most one count");
                if !d.outputs(w).contains(&y) {
                    return Some((w.clone(), y));
                }
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for w in &level {
            for b in Bit::BOTH {
                let mut w2 = w.clone();
                w2.push(b);
                next.push(w2);
            }
        }
        level = next;
    }
    None
}

/// Runs both directions of the claim at the given bound: a forward search
/// for a counterexample (asserting a critical word within `2l + 2` when
/// one is found) and a backward search for a critical word (asserting a
/// counterexample no longer than it).
pub fn check_correspondence(
    c: &ZTransducer,
    d: &ZTransducer,
    bound: usize,
) -> Result<CorrespondenceReport, ProductError> {
    let product = build_product_nds(c, d)?;
    let counterexample = find_counterexample(c, d, bound);
    let forward_critical = counterexample.as_ref().map(|(w, _)| {
        let limit = 2 * w.len() + 2;
        (limit, product.nds.search_critical(limit))
    });
    let critical = product.nds.search_critical(bound);
    let backward_counterexample =
        critical.as_ref().map(|w| find_counterexample(c, d, w.len()));
    let conclusion = if counterexample.is_some() || critical.is_some() {
        Conclusion::InclusionFails
    } else {
        Conclusion::ConsistentWithinBounds
    };
    Ok(CorrespondenceReport {
        bound,
        counterexample,
        forward_critical,
        critical,
        backward_counterexample,
        conclusion,
    })
}

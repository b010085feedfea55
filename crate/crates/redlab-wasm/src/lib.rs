//! Browser bindings for the reduction laboratory.
//!
//! Three string-in / JSON-out entry points back the demo page: a PCP
//! explorer, a defense-system attack console, and the substitution
//! equivalence verdict. Parsing and computation both happen here; the page
//! only renders.

use redlab::alphabet::{format_bits, parse_bits};
use redlab::nds::Nds;
use redlab::pcp::{self, IndexSequence, PcpInstance, Side};
use redlab::subs::{self, Verdict};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct PcpReport {
    pairs: usize,
    solution: Option<String>,
    witness: Option<WitnessReport>,
}

#[derive(Serialize)]
struct WitnessReport {
    input: String,
    count: u64,
    in_l0: bool,
    in_lu: bool,
    in_lv: bool,
}

#[derive(Serialize)]
struct AttackReport {
    lines: usize,
    /// Support after each prefix of the attack word, innermost as
    /// `[node, line]` pairs; index 0 is the initial support.
    supports: Vec<Vec<(i64, usize)>>,
    /// Final distribution as `[node, line, "num/den"]` triples.
    distribution: Vec<(i64, usize, String)>,
    critical: bool,
    /// Shortlex-minimal critical word within the search bound, if any.
    search: Option<String>,
}

#[derive(Serialize)]
struct SubsReport {
    lines: usize,
    phi: Vec<(char, Vec<String>)>,
    xi: Vec<(char, Vec<String>)>,
    verdict: String,
    counterexample: Option<String>,
    probe_critical: Option<String>,
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports serialize")
}

fn fail(message: impl std::fmt::Display) -> String {
    json(&ErrorReport { error: message.to_string() })
}

/// Solves a PCP instance within a bound and, when a solution exists,
/// checks its canonical witness against `L0`, `Lu` and `Lv`.
#[wasm_bindgen]
pub fn pcp_explore(instance: &str, max_len: u32) -> String {
    let inst = match PcpInstance::from_text(instance) {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    let solution = pcp::brute_force(&inst, max_len as usize);
    let witness = solution.as_ref().map(|seq| witness_report(&inst, seq));
    let report = PcpReport {
        pairs: inst.len(),
        solution: solution.map(|s| s.to_string()),
        witness: match witness {
            Some(Ok(w)) => Some(w),
            Some(Err(message)) => return fail(message),
            None => None,
        },
    };
    json(&report)
}

fn witness_report(inst: &PcpInstance, seq: &IndexSequence) -> Result<WitnessReport, String> {
    let witness = pcp::solution_witness(inst, seq).map_err(|e| e.to_string())?;
    let l0 = pcp::build_l0(inst);
    let lu = pcp::build_side(inst, Side::U).map_err(|e| e.to_string())?.l_side;
    let lv = pcp::build_side(inst, Side::V).map_err(|e| e.to_string())?.l_side;
    Ok(WitnessReport {
        input: redlab::alphabet::format_word(&witness.input),
        count: witness.count,
        in_l0: l0.contains(&witness),
        in_lu: lu.contains(&witness),
        in_lv: lv.contains(&witness),
    })
}

/// Steps a defense system through an attack word, reporting the support
/// after every prefix, the exact final distribution, and a bounded
/// critical-word search.
#[wasm_bindgen]
pub fn nds_attack(system: &str, word: &str, search_len: u32) -> String {
    let nds = match Nds::from_text(system) {
        Ok(nds) => nds,
        Err(e) => return fail(e),
    };
    let word = match parse_bits(word.trim()) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let mut supports = Vec::new();
    let mut support = nds.initial_support();
    supports.push(support.iter().map(|c| (c.node, c.line)).collect());
    for &bit in &word {
        support = nds.step_support(&support, bit);
        supports.push(support.iter().map(|c| (c.node, c.line)).collect());
    }
    let distribution = nds
        .attack_probabilities(&word)
        .into_iter()
        .map(|(cfg, mass)| (cfg.node, cfg.line, format!("{}/{}", mass.numer(), mass.denom())))
        .collect();
    let report = AttackReport {
        lines: nds.lines(),
        supports,
        distribution,
        critical: support.iter().all(|c| c.node != 0),
        search: nds.search_critical(search_len as usize).map(|w| format_bits(&w)),
    };
    json(&report)
}

/// Builds the substitution pair of a defense system and decides whether
/// the two images agree on `b{0,1}*c`.
#[wasm_bindgen]
pub fn substitution_verdict(system: &str) -> String {
    let nds = match Nds::from_text(system) {
        Ok(nds) => nds,
        Err(e) => return fail(e),
    };
    let (phi, xi) = match subs::build_substitutions(&nds) {
        Ok(pair) => pair,
        Err(e) => return fail(e),
    };
    let outcome = match subs::decide_equivalence(&nds) {
        Ok(outcome) => outcome,
        Err(e) => return fail(e),
    };
    let images = |sub: &redlab::regular::FiniteSubstitution| {
        sub.domain()
            .map(|letter| {
                let words = sub.image(letter).unwrap().iter().cloned().collect();
                (letter, words)
            })
            .collect()
    };
    let (verdict, counterexample) = match outcome.verdict {
        Verdict::Equal => ("equal".to_string(), None),
        Verdict::NotEqual { counterexample } => ("not-equal".to_string(), Some(counterexample)),
    };
    let report = SubsReport {
        lines: nds.lines(),
        phi: images(&phi),
        xi: images(&xi),
        verdict,
        counterexample,
        probe_critical: nds.search_critical(6).map(|w| format_bits(&w)),
    };
    json(&report)
}

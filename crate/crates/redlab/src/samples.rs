//! Small hand-made instances used by the test suites, the command-line
//! walkthroughs and the browser demo.

use crate::alphabet::Bit;
use crate::nds::Nds;
use crate::pcp::PcpInstance;
use crate::zt::{ZOut, ZTransducer, ZTransition};

/// The running PCP example: pairs (ab, a) and (b, bb); its shortest
/// solution is the sequence 1,2.
pub fn example_instance() -> PcpInstance {
    PcpInstance::from_text("pair ab a\npair b bb\n").unwrap()
}

/// One line, every attack symbol shifts the defense one node up. The word
/// `0` is already critical.
pub fn drift_system() -> Nds {
    Nds::from_text("lines 1\nrule 1 0 1 1 1/1\nrule 1 1 1 1 1/1\n").unwrap()
}

/// One line, the defense never moves; reliable.
pub fn stay_system() -> Nds {
    Nds::from_text("lines 1\nrule 1 0 1 0 1/1\nrule 1 1 1 0 1/1\n").unwrap()
}

/// Two lines; each symbol keeps a branch on node 0 and pushes a second
/// branch upward, so no critical word exists.
pub fn two_branch_system() -> Nds {
    Nds::from_text(
        "lines 2\n\
         rule 1 0 1 0 1/2\nrule 1 0 2 1 1/2\n\
         rule 1 1 1 0 1/2\nrule 1 1 2 1 1/2\n\
         rule 2 0 2 0 1/1\nrule 2 1 2 0 1/1\n",
    )
    .unwrap()
}

/// Deterministic two-state machine: both symbols accepted with one `c`.
pub fn tiny_c() -> ZTransducer {
    ZTransducer::new(
        2,
        vec![
            ZTransition { from: 0, bit: Bit::Zero, out: ZOut::One, to: 1 },
            ZTransition { from: 0, bit: Bit::One, out: ZOut::One, to: 1 },
        ],
        0,
        1,
    )
    .unwrap()
}

/// Complete two-state machine that disagrees with [`tiny_c`] on symbol 0
/// (it outputs two `c`'s there).
pub fn tiny_d() -> ZTransducer {
    ZTransducer::new(
        2,
        vec![
            ZTransition { from: 0, bit: Bit::Zero, out: ZOut::Two, to: 1 },
            ZTransition { from: 0, bit: Bit::One, out: ZOut::One, to: 1 },
        ],
        0,
        1,
    )
    .unwrap()
}

/// Complete machine whose initial state loops forever: it accepts nothing.
pub fn never_accepting_d() -> ZTransducer {
    ZTransducer::new(
        2,
        vec![
            ZTransition { from: 0, bit: Bit::Zero, out: ZOut::One, to: 0 },
            ZTransition { from: 0, bit: Bit::One, out: ZOut::One, to: 0 },
        ],
        0,
        1,
    )
    .unwrap()
}

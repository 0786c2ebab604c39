//! Small example structures used across the test suites and docs. Each
//! returns the structure together with the indices of the states of
//! interest.

use crate::kripke::KripkeStructure;

/// Two chains with identical stuttering behavior that a synchronized until
/// tells apart: the left chain reaches `!p` after exactly three steps on
/// every path, the right side cannot synchronize because its two branches
/// reach `!p` at different depths.
///
/// `t1 -> t2 -> t3 -> t4(loop)`, labels p, p, p, !p;
/// `u1 -> {u2, t2}`, `u2 -> u3(loop)`, labels p, p, !p.
pub fn stutter_pair() -> (KripkeStructure, usize, usize) {
    let k = KripkeStructure::build(
        &[
            ("t1", &["p"]),
            ("t2", &["p"]),
            ("t3", &["p"]),
            ("t4", &[]),
            ("u1", &["p"]),
            ("u2", &["p"]),
            ("u3", &[]),
        ],
        &[
            ("t1", "t2"),
            ("t2", "t3"),
            ("t3", "t4"),
            ("t4", "t4"),
            ("u1", "u2"),
            ("u1", "t2"),
            ("u2", "u3"),
            ("u3", "u3"),
        ],
    )
    .unwrap();
    let t1 = k.state_index("t1").unwrap();
    let u1 = k.state_index("u1").unwrap();
    (k, t1, u1)
}

/// A pair of states that only nested Next can tell apart: `AX AX p` holds
/// at `t1` and fails at `u1`, while no formula without Next separates them.
///
/// `t1 -> t2 -> t3 <-> t4`, labels p, !p, p, !p;
/// `u1 -> {u2, t2}`, `u2 -> u3 <-> u4`, labels p, !p, !p, p.
pub fn next_pair() -> (KripkeStructure, usize, usize) {
    let k = KripkeStructure::build(
        &[
            ("t1", &["p"]),
            ("t2", &[]),
            ("t3", &["p"]),
            ("t4", &[]),
            ("u1", &["p"]),
            ("u2", &[]),
            ("u3", &[]),
            ("u4", &["p"]),
        ],
        &[
            ("t1", "t2"),
            ("t2", "t3"),
            ("t3", "t4"),
            ("t4", "t3"),
            ("u1", "u2"),
            ("u1", "t2"),
            ("u2", "u3"),
            ("u3", "u4"),
            ("u4", "u3"),
        ],
    )
    .unwrap();
    let t1 = k.state_index("t1").unwrap();
    let u1 = k.state_index("u1").unwrap();
    (k, t1, u1)
}

/// Aligned versus misaligned alternation: from `t1` all paths alternate
/// p, !p in lockstep, so the image sequence keeps returning to a pure-p
/// set; from `u1` the two branches alternate out of phase and no common
/// p-position recurs.
pub fn alternation_pair() -> (KripkeStructure, usize, usize) {
    let k = KripkeStructure::build(
        &[
            ("t1", &["p"]),
            ("t2", &[]),
            ("u1", &["p"]),
            ("v1", &[]),
            ("v2", &["p"]),
            ("w1", &[]),
        ],
        &[
            ("t1", "t2"),
            ("t2", "t1"),
            ("u1", "v1"),
            ("u1", "w1"),
            ("v1", "v2"),
            ("v2", "v1"),
            ("w1", "v1"),
        ],
    )
    .unwrap();
    let t1 = k.state_index("t1").unwrap();
    let u1 = k.state_index("u1").unwrap();
    (k, t1, u1)
}

/// An initial state feeding a 2-cycle and a 3-cycle: the image sequence
/// from `uI` has preperiod 1 and period 6 (the lcm of the cycle lengths),
/// and `q` synchronizes at position 2.
///
/// `uI -> u1 <-> u2` and `uI -> v1 -> v2 -> v3 -> v1`,
/// labels: q on u2, v1, v2 only.
pub fn funnel() -> (KripkeStructure, usize) {
    let k = KripkeStructure::build(
        &[
            ("uI", &[]),
            ("u1", &[]),
            ("u2", &["q"]),
            ("v1", &["q"]),
            ("v2", &["q"]),
            ("v3", &[]),
        ],
        &[
            ("uI", "u1"),
            ("uI", "v1"),
            ("u1", "u2"),
            ("u2", "u1"),
            ("v1", "v2"),
            ("v2", "v3"),
            ("v3", "v1"),
        ],
    )
    .unwrap();
    let ui = k.state_index("uI").unwrap();
    (k, ui)
}

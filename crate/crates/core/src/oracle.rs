//! Brute-force reference semantics and the differential fuzzing harness.
//!
//! The oracle shares no graph machinery with the checker: sets are ordered
//! trees instead of bit vectors, images are computed by scanning adjacency
//! lists, cycle detection is a linear scan, and the synchronized
//! existential until is decided by enumerating candidate positions up to
//! 2^|T| instead of searching the covering-successor graph. The two
//! implementations are compared only on the resulting state sets.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::checker::{check, SemMap};
use crate::formula::{collapse_seq, Formula, Quant, TemporalOp};
use crate::kripke::{random_kripke, KripkeStructure, StateSet};

/// Largest structure the oracle accepts; the existential-sync enumeration
/// walks positions up to 2^|T|.
pub const MAX_ORACLE_STATES: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limited to {max} states, got {got}")]
    SizeExceeded { max: usize, got: usize },
}

type Set = BTreeSet<usize>;

/// Evaluates a formula by brute force, returning a semantic map keyed by
/// the formula's own subformulas (no normalization pass).
pub fn oracle_eval(k: &KripkeStructure, phi: &Formula) -> Result<SemMap, OracleError> {
    if k.len() > MAX_ORACLE_STATES {
        return Err(OracleError::SizeExceeded {
            max: MAX_ORACLE_STATES,
            got: k.len(),
        });
    }
    let mut sem = SemMap::new(phi.clone());
    let mut memo: HashMap<Formula, Set> = HashMap::new();
    o_eval(k, phi, &mut memo);
    for (f, set) in &memo {
        sem.insert(
            f.clone(),
            StateSet::from_indices(k.len(), set.iter().copied()),
        );
    }
    Ok(sem)
}

fn o_eval(k: &KripkeStructure, phi: &Formula, memo: &mut HashMap<Formula, Set>) -> Set {
    if let Some(s) = memo.get(phi) {
        return s.clone();
    }
    let all: Set = (0..k.len()).collect();
    let set = match phi {
        Formula::True => all,
        Formula::False => Set::new(),
        Formula::Atom(name) => match k.prop_index(name) {
            Some(p) => (0..k.len()).filter(|&t| k.labels_of(t).contains(&p)).collect(),
            None => Set::new(),
        },
        Formula::Not(a) => {
            let sa = o_eval(k, a, memo);
            all.difference(&sa).copied().collect()
        }
        Formula::Or(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            sa.union(&sb).copied().collect()
        }
        Formula::And(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            sa.intersection(&sb).copied().collect()
        }
        Formula::Implies(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            all.iter()
                .filter(|t| !sa.contains(t) || sb.contains(t))
                .copied()
                .collect()
        }
        Formula::ExistsNext(a) => {
            let sa = o_eval(k, a, memo);
            (0..k.len())
                .filter(|&t| k.successors_of(t).iter().any(|t2| sa.contains(t2)))
                .collect()
        }
        Formula::ForallNext(a) => {
            let sa = o_eval(k, a, memo);
            (0..k.len())
                .filter(|&t| k.successors_of(t).iter().all(|t2| sa.contains(t2)))
                .collect()
        }
        Formula::ExistsUntil(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            o_eu(k, &sa, &sb)
        }
        Formula::ForallUntil(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            o_au(k, &sa, &sb)
        }
        Formula::UntilForall(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            (0..k.len()).filter(|&t| o_ua_from(k, t, &sa, &sb)).collect()
        }
        Formula::UntilExists(a, b) => {
            let sa = o_eval(k, a, memo);
            let sb = o_eval(k, b, memo);
            (0..k.len()).filter(|&t| o_ue_from(k, t, &sa, &sb)).collect()
        }
        Formula::SeqSync(seq, quant, a) => {
            let sa = o_eval(k, a, memo);
            let not_sa: Set = all.difference(&sa).copied().collect();
            use Quant::*;
            use TemporalOp::*;
            match (collapse_seq(seq).as_slice(), quant) {
                ([Eventually], Forall) => {
                    (0..k.len()).filter(|&t| o_ua_from(k, t, &all, &sa)).collect()
                }
                ([Eventually], Exists) => {
                    (0..k.len()).filter(|&t| o_ue_from(k, t, &all, &sa)).collect()
                }
                // G-prefixes are the duals of the F-prefixes on the
                // complemented argument.
                ([Always], Forall) => {
                    let f_exists: Set = (0..k.len())
                        .filter(|&t| o_ue_from(k, t, &all, &not_sa))
                        .collect();
                    all.difference(&f_exists).copied().collect()
                }
                ([Always], Exists) => {
                    let f_forall: Set = (0..k.len())
                        .filter(|&t| o_ua_from(k, t, &all, &not_sa))
                        .collect();
                    all.difference(&f_forall).copied().collect()
                }
                ([Always, Eventually], Forall) => {
                    (0..k.len()).filter(|&t| o_gfa_from(k, t, &sa)).collect()
                }
                ([Always, Eventually], Exists) => {
                    (0..k.len()).filter(|&t| o_gfe_from(k, t, &sa)).collect()
                }
                ([Eventually, Always], Forall) => (0..k.len())
                    .filter(|&t| !o_gfe_from(k, t, &not_sa))
                    .collect(),
                ([Eventually, Always], Exists) => (0..k.len())
                    .filter(|&t| !o_gfa_from(k, t, &not_sa))
                    .collect(),
                _ => unreachable!("collapsed sequences have length one or two"),
            }
        }
    };
    memo.insert(phi.clone(), set.clone());
    set
}

fn o_step(k: &KripkeStructure, s: &Set) -> Set {
    let mut out = Set::new();
    for &t in s {
        for &t2 in k.successors_of(t) {
            out.insert(t2);
        }
    }
    out
}

fn o_pre_exists(k: &KripkeStructure, s: &Set) -> Set {
    (0..k.len())
        .filter(|&t| k.successors_of(t).iter().any(|t2| s.contains(t2)))
        .collect()
}

fn o_pre_forall(k: &KripkeStructure, s: &Set) -> Set {
    (0..k.len())
        .filter(|&t| k.successors_of(t).iter().all(|t2| s.contains(t2)))
        .collect()
}

/// Existential until by |T| rounds of unrolling; the chain of approximants
/// is stable after at most |T| steps.
fn o_eu(k: &KripkeStructure, sa: &Set, sb: &Set) -> Set {
    let mut z = sb.clone();
    for _ in 0..k.len() {
        let pre = o_pre_exists(k, &z);
        let step: Set = sa.intersection(&pre).copied().collect();
        z = z.union(&step).copied().collect();
    }
    z
}

fn o_au(k: &KripkeStructure, sa: &Set, sb: &Set) -> Set {
    let mut z = sb.clone();
    for _ in 0..k.len() {
        let pre = o_pre_forall(k, &z);
        let step: Set = sa.intersection(&pre).copied().collect();
        z = z.union(&step).copied().collect();
    }
    z
}

/// Synchronized universal until from one state: walk the image sequence and
/// decide at the first target hit, escape, or repetition. Repetition is
/// detected by a linear scan over the recorded sets.
fn o_ua_from(k: &KripkeStructure, t: usize, sa: &Set, sb: &Set) -> bool {
    let mut seq: Vec<Set> = vec![Set::from([t])];
    loop {
        let cur = seq.last().unwrap();
        if cur.is_subset(sb) {
            return true;
        }
        if !cur.is_subset(sa) {
            return false;
        }
        let next = o_step(k, cur);
        if seq.contains(&next) {
            return false;
        }
        seq.push(next);
    }
}

/// Image sequence from {t} split into its pre-period and cycle.
fn o_trace(k: &KripkeStructure, t: usize) -> (Vec<Set>, usize) {
    let mut seq: Vec<Set> = vec![Set::from([t])];
    loop {
        let next = o_step(k, seq.last().unwrap());
        if let Some(j) = seq.iter().position(|s| *s == next) {
            return (seq, j);
        }
        seq.push(next);
    }
}

/// Recurrent universal synchronization: some set of the cycle part is
/// contained in the target.
fn o_gfa_from(k: &KripkeStructure, t: usize, sa: &Set) -> bool {
    let (seq, first_repeat) = o_trace(k, t);
    seq[first_repeat..].iter().any(|s| s.is_subset(sa))
}

/// Recurrent existential synchronization: some set of the cycle part
/// intersects the target.
fn o_gfe_from(k: &KripkeStructure, t: usize, sa: &Set) -> bool {
    let (seq, first_repeat) = o_trace(k, t);
    seq[first_repeat..]
        .iter()
        .any(|s| s.iter().any(|x| sa.contains(x)))
}

/// Synchronized existential until from one state, by enumerating candidate
/// positions n up to 2^|T|: position n works when for every j < n some
/// state reached in exactly j steps satisfies the left argument and can in
/// turn reach, in exactly n - j steps, a state satisfying the right one.
/// Exact-step images are computed by repeated single-step application.
fn o_ue_from(k: &KripkeStructure, t: usize, sa: &Set, sb: &Set) -> bool {
    if sb.contains(&t) {
        return true;
    }
    let bound = 1usize << k.len();
    // S_j for j = 0..=bound, folded into pre-period + cycle.
    let (prefix, first_repeat) = o_trace(k, t);
    let lambda = prefix.len() - first_repeat;
    let set_at = |j: usize| -> &Set {
        if j < prefix.len() {
            &prefix[j]
        } else {
            &prefix[first_repeat + (j - first_repeat) % lambda]
        }
    };
    // For each distinct start set S_j intersected with sa, whether its
    // exact-step image after d >= 1 steps meets sb; folded the same way.
    struct Run {
        hits: Vec<bool>,
        first_repeat: usize,
        lambda: usize,
    }
    let mut runs: HashMap<Set, Run> = HashMap::new();
    let mut hit = |start: Set, d: usize| -> bool {
        let run = runs.entry(start.clone()).or_insert_with(|| {
            let mut sets: Vec<Set> = vec![start];
            let mut hits: Vec<bool> = vec![false];
            loop {
                let next = o_step(k, sets.last().unwrap());
                if let Some(j) = sets.iter().position(|s| *s == next) {
                    return Run {
                        hits,
                        first_repeat: j,
                        lambda: sets.len() - j,
                    };
                }
                hits.push(next.iter().any(|x| sb.contains(x)));
                sets.push(next);
            }
        });
        if d < run.hits.len() {
            run.hits[d]
        } else {
            run.hits[run.first_repeat + (d - run.first_repeat) % run.lambda]
        }
    };
    for n in 1..=bound {
        let ok = (0..n).all(|j| {
            let start: Set = set_at(j).iter().filter(|x| sa.contains(x)).copied().collect();
            if start.is_empty() {
                return false;
            }
            hit(start, n - j)
        });
        if ok {
            return true;
        }
    }
    false
}

/// Independently re-checks one candidate position for the synchronized
/// existential until: `n = 0` requires the target at `t` itself, and
/// `n > 0` requires, for every j < n, a left-argument state at exact depth
/// j that reaches a target state in exactly n - j further steps.
pub fn verify_ue_position(
    k: &KripkeStructure,
    t: usize,
    sem1: &StateSet,
    sem2: &StateSet,
    n: usize,
) -> bool {
    let sa: Set = sem1.iter().collect();
    let sb: Set = sem2.iter().collect();
    if n == 0 {
        return sb.contains(&t);
    }
    let mut s_j = Set::from([t]);
    for j in 0..n {
        let start: Set = s_j.iter().filter(|x| sa.contains(x)).copied().collect();
        if start.is_empty() {
            return false;
        }
        let mut cur = start;
        for _ in 0..n - j {
            cur = o_step(k, &cur);
        }
        if !cur.iter().any(|x| sb.contains(x)) {
            return false;
        }
        s_j = o_step(k, &s_j);
    }
    true
}

/// One template mismatch found by differential fuzzing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub trial: usize,
    pub seed: u64,
    pub digest: u64,
    pub formula: String,
    pub state: String,
    pub checker_verdict: bool,
    pub oracle_verdict: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub trials: usize,
    pub mismatches: Vec<Mismatch>,
}

impl FuzzReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// The template formulas exercised by default: both synchronized untils,
/// both plain untils, single and recurrent synchronized prefixes.
pub fn default_templates() -> Vec<Formula> {
    [
        "[p UA q]", "[p UE q]", "A[p U q]", "E[p U q]", "FA p", "GE p", "GFA p", "GFE p",
        "FGA p", "FGE p",
    ]
    .iter()
    .map(|s| crate::formula::parse(s).expect("template parses"))
    .collect()
}

/// The deterministic corpus a fuzz run with the same parameters works
/// through: per trial, the derived seed and the generated structure.
pub fn fuzz_corpus(trials: usize, max_states: usize, seed: u64) -> Vec<(u64, KripkeStructure)> {
    assert!(
        (1..=MAX_ORACLE_STATES).contains(&max_states),
        "max_states must be between 1 and {MAX_ORACLE_STATES}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let trial_seed: u64 = rng.random();
            let n = rng.random_range(1..=max_states);
            let edge_prob = rng.random_range(0.1..0.9);
            let label_prob = rng.random_range(0.2..0.8);
            let k = random_kripke(n, edge_prob, &["p", "q"], label_prob, trial_seed);
            (trial_seed, k)
        })
        .collect()
}

/// Runs `trials` random structures through both the checker and the oracle
/// and records every per-state disagreement. Deterministic for a fixed
/// seed.
pub fn diff_fuzz(
    trials: usize,
    max_states: usize,
    templates: &[Formula],
    seed: u64,
) -> FuzzReport {
    let mut report = FuzzReport {
        trials,
        mismatches: Vec::new(),
    };
    for (trial, (trial_seed, k)) in fuzz_corpus(trials, max_states, seed).into_iter().enumerate() {
        let digest = k.digest();
        for template in templates {
            let outcome = check(&k, template).expect("caps unreachable on oracle-sized inputs");
            let reference = oracle_eval(&k, template).expect("size checked above");
            for t in 0..k.len() {
                let cv = outcome.holds(t);
                let ov = reference.holds(t);
                if cv != ov {
                    report.mismatches.push(Mismatch {
                        trial,
                        seed: trial_seed,
                        digest,
                        formula: template.to_string(),
                        state: k.state_name(t).to_string(),
                        checker_verdict: cv,
                        oracle_verdict: ov,
                    });
                }
            }
        }
    }
    report
}

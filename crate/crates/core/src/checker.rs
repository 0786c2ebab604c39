//! The labelling algorithm: computes the satisfying state set of every
//! subformula bottom-up, with certificates for the synchronization
//! operators.
//!
//! The synchronized until `[p UA q]` is decided per state by following the
//! deterministic sequence of successor images; `[p UE q]` by a breadth-first
//! search of the covering-successor graph over state sets; recurrent
//! synchronization `GFA` by locating a lasso in the image sequence; and
//! `GFE` in polynomial time through the SCC structure.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use thiserror::Error;

use crate::formula::{normalize, Formula, Quant, TemporalOp};
use crate::kripke::{
    covering_successors, exact_step_reach, subset_sequence, successors, KripkeError,
    KripkeStructure, StateSet, DEFAULT_SUBSET_CAP,
};

/// Default bound on the number of distinct set nodes explored per start
/// state when searching the covering-successor graph.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    /// A resource cap was hit. Deliberately distinct from any verdict: an
    /// exhausted budget must never read as "the formula fails".
    #[error("exploration cap exceeded ({what}, limit {limit})")]
    CapExceeded { what: &'static str, limit: usize },
}

impl From<KripkeError> for CheckError {
    fn from(e: KripkeError) -> Self {
        match e {
            KripkeError::CapExceeded { cap } => CheckError::CapExceeded {
                what: "subset sequence",
                limit: cap,
            },
            other => panic!("unexpected structural error during checking: {other}"),
        }
    }
}

/// Certificate for a synchronization verdict at one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub state: usize,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessKind {
    /// The common position k at which the target holds (synchronized
    /// untils and their derived eventualities).
    SyncPoint(BigUint),
    /// A repeating image set: position n with period lambda > 0 such that
    /// the sets reached after n and n + lambda steps coincide and the
    /// position-n set satisfies the target.
    Lasso { position: BigUint, period: BigUint },
}

/// Maps each evaluated subformula (keyed by structure) to its satisfying
/// state set; `root` is the formula the map was built for.
#[derive(Debug, Clone)]
pub struct SemMap {
    root: Formula,
    entries: HashMap<Formula, StateSet>,
}

impl SemMap {
    pub fn new(root: Formula) -> Self {
        SemMap {
            root,
            entries: HashMap::new(),
        }
    }

    pub fn root(&self) -> &Formula {
        &self.root
    }

    pub fn get(&self, f: &Formula) -> Option<&StateSet> {
        self.entries.get(f)
    }

    pub fn insert(&mut self, f: Formula, set: StateSet) {
        self.entries.insert(f, set);
    }

    /// Satisfying set of the root formula.
    pub fn root_set(&self) -> &StateSet {
        self.entries
            .get(&self.root)
            .expect("root formula must be evaluated")
    }

    pub fn holds(&self, state: usize) -> bool {
        self.root_set().contains(state)
    }
}

/// Result of checking one formula: the normalized root, its semantic map,
/// and per-state certificates for every synchronized subformula.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub sem: SemMap,
    pub witnesses: HashMap<Formula, Vec<Option<Witness>>>,
}

impl CheckOutcome {
    pub fn holds(&self, state: usize) -> bool {
        self.sem.holds(state)
    }

    /// Certificate for the root formula at `state`, when the root is a
    /// synchronized operator and the formula holds there.
    pub fn root_witness(&self, state: usize) -> Option<&Witness> {
        self.witnesses
            .get(self.sem.root())?
            .get(state)?
            .as_ref()
    }
}

/// Normalizes the formula and evaluates every subformula bottom-up.
pub fn check(k: &KripkeStructure, phi: &Formula) -> Result<CheckOutcome, CheckError> {
    let root = normalize(phi);
    let mut sem = SemMap::new(root.clone());
    let mut witnesses = HashMap::new();
    eval(k, &root, &mut sem, &mut witnesses)?;
    Ok(CheckOutcome { sem, witnesses })
}

fn eval(
    k: &KripkeStructure,
    phi: &Formula,
    sem: &mut SemMap,
    witnesses: &mut HashMap<Formula, Vec<Option<Witness>>>,
) -> Result<StateSet, CheckError> {
    if let Some(set) = sem.get(phi) {
        return Ok(set.clone());
    }
    let set = match phi {
        Formula::True => StateSet::full(k.len()),
        Formula::Atom(name) => k.atom_set(name),
        Formula::Not(a) => eval(k, a, sem, witnesses)?.complement(),
        Formula::Or(a, b) => {
            let sa = eval(k, a, sem, witnesses)?;
            let sb = eval(k, b, sem, witnesses)?;
            sa.union(&sb)
        }
        Formula::ExistsNext(a) => {
            let sa = eval(k, a, sem, witnesses)?;
            eval_ex(k, &sa)
        }
        Formula::ForallNext(a) => {
            let sa = eval(k, a, sem, witnesses)?;
            eval_ax(k, &sa)
        }
        Formula::ExistsUntil(a, b) => {
            let sa = eval(k, a, sem, witnesses)?;
            let sb = eval(k, b, sem, witnesses)?;
            eval_eu(k, &sa, &sb)
        }
        Formula::ForallUntil(a, b) => {
            let sa = eval(k, a, sem, witnesses)?;
            let sb = eval(k, b, sem, witnesses)?;
            eval_au(k, &sa, &sb)
        }
        Formula::UntilForall(a, b) => {
            let sa = eval(k, a, sem, witnesses)?;
            let sb = eval(k, b, sem, witnesses)?;
            let (set, wit) = eval_ua(k, &sa, &sb)?;
            witnesses.insert(phi.clone(), wit);
            set
        }
        Formula::UntilExists(a, b) => {
            let sa = eval(k, a, sem, witnesses)?;
            let sb = eval(k, b, sem, witnesses)?;
            let (set, wit) = eval_ue(k, &sa, &sb)?;
            witnesses.insert(phi.clone(), wit);
            set
        }
        Formula::SeqSync(seq, quant, a) => {
            debug_assert_eq!(
                seq.as_slice(),
                &[TemporalOp::Always, TemporalOp::Eventually],
                "normalization leaves only the recurrent prefix"
            );
            let sa = eval(k, a, sem, witnesses)?;
            match quant {
                Quant::Forall => {
                    let (set, wit) = eval_gfa(k, &sa)?;
                    witnesses.insert(phi.clone(), wit);
                    set
                }
                Quant::Exists => eval_gfe(k, &sa),
            }
        }
        Formula::False | Formula::And(_, _) | Formula::Implies(_, _) => {
            unreachable!("removed by normalization")
        }
    };
    sem.insert(phi.clone(), set.clone());
    Ok(set)
}

/// States with some successor in `sa`.
pub fn eval_ex(k: &KripkeStructure, sa: &StateSet) -> StateSet {
    StateSet::from_indices(
        k.len(),
        (0..k.len()).filter(|&t| k.successors_of(t).iter().any(|&t2| sa.contains(t2))),
    )
}

/// States with all successors in `sa`.
pub fn eval_ax(k: &KripkeStructure, sa: &StateSet) -> StateSet {
    StateSet::from_indices(
        k.len(),
        (0..k.len()).filter(|&t| k.successors_of(t).iter().all(|&t2| sa.contains(t2))),
    )
}

/// Least fixpoint of Z = sb OR (sa AND pre-exists(Z)).
pub fn eval_eu(k: &KripkeStructure, sa: &StateSet, sb: &StateSet) -> StateSet {
    let mut z = sb.clone();
    loop {
        let grown = z.union(&sa.intersection(&eval_ex(k, &z)));
        if grown == z {
            return z;
        }
        z = grown;
    }
}

/// Least fixpoint of Z = sb OR (sa AND pre-forall(Z)); sound on total
/// structures.
pub fn eval_au(k: &KripkeStructure, sa: &StateSet, sb: &StateSet) -> StateSet {
    let mut z = sb.clone();
    loop {
        let grown = z.union(&sa.intersection(&eval_ax(k, &z)));
        if grown == z {
            return z;
        }
        z = grown;
    }
}

/// Synchronized universal until, per state: follow S_0 = {t},
/// S_{i+1} = R(S_i); report position i as soon as S_i is contained in
/// `sem2`, fail as soon as S_i escapes `sem1`, fail when a set repeats.
///
/// Position 0 counts: the formula holds with k = 0 exactly when t is in
/// `sem2`.
pub fn eval_ua(
    k: &KripkeStructure,
    sem1: &StateSet,
    sem2: &StateSet,
) -> Result<(StateSet, Vec<Option<Witness>>), CheckError> {
    let mut sat = StateSet::empty(k.len());
    let mut wits: Vec<Option<Witness>> = vec![None; k.len()];
    for (t, slot) in wits.iter_mut().enumerate() {
        let mut seen: HashMap<StateSet, usize> = HashMap::new();
        let mut current = StateSet::singleton(k.len(), t);
        let verdict = loop {
            if current.is_subset_of(sem2) {
                break Some(seen.len());
            }
            if !current.is_subset_of(sem1) {
                break None;
            }
            if seen.contains_key(&current) {
                break None;
            }
            if seen.len() >= DEFAULT_SUBSET_CAP {
                return Err(CheckError::CapExceeded {
                    what: "synchronized until",
                    limit: DEFAULT_SUBSET_CAP,
                });
            }
            seen.insert(current.clone(), seen.len());
            current = successors(k, &current);
        };
        if let Some(kpos) = verdict {
            sat.insert(t);
            *slot = Some(Witness {
                state: t,
                kind: WitnessKind::SyncPoint(BigUint::from(kpos)),
            });
        }
    }
    Ok((sat, wits))
}

/// Checks a claimed synchronization position `n` for the universal until:
/// the set reached in exactly `n` steps must satisfy `sem2`, and the prefix
/// condition on `sem1` is checked directly for n at most |T| and through
/// plain reachability beyond that (all reachable states are reached within
/// |T| steps).
pub fn verify_ua_witness(
    k: &KripkeStructure,
    t: usize,
    sem1: &StateSet,
    sem2: &StateSet,
    n: &BigUint,
) -> bool {
    let start = StateSet::singleton(k.len(), t);
    if !exact_step_reach(k, &start, n).is_subset_of(sem2) {
        return false;
    }
    let size = BigUint::from(k.len());
    if *n > size {
        reachable_closure(k, &start).is_subset_of(sem1)
    } else {
        // Union of the sets reached in 0 .. n-1 steps.
        let mut prefix = StateSet::empty(k.len());
        let mut current = start;
        let steps: usize = n.try_into().expect("n <= |T| fits in usize");
        for _ in 0..steps {
            prefix.union_with(&current);
            current = successors(k, &current);
        }
        prefix.is_subset_of(sem1)
    }
}

fn reachable_closure(k: &KripkeStructure, start: &StateSet) -> StateSet {
    let mut reach = start.clone();
    loop {
        let grown = reach.union(&successors(k, &reach));
        if grown == reach {
            return reach;
        }
        reach = grown;
    }
}

/// Synchronized existential until, per state: breadth-first search of the
/// covering-successor graph from {t} for a set contained in `sem2`,
/// passing only through sets that intersect `sem1`. The BFS order makes the
/// reported position minimal.
pub fn eval_ue(
    k: &KripkeStructure,
    sem1: &StateSet,
    sem2: &StateSet,
) -> Result<(StateSet, Vec<Option<Witness>>), CheckError> {
    let mut sat = StateSet::empty(k.len());
    let mut wits: Vec<Option<Witness>> = vec![None; k.len()];
    for (t, slot) in wits.iter_mut().enumerate() {
        if let Some(kpos) = ue_from(k, t, sem1, sem2)? {
            sat.insert(t);
            *slot = Some(Witness {
                state: t,
                kind: WitnessKind::SyncPoint(BigUint::from(kpos)),
            });
        }
    }
    Ok((sat, wits))
}

fn ue_from(
    k: &KripkeStructure,
    t: usize,
    sem1: &StateSet,
    sem2: &StateSet,
) -> Result<Option<usize>, CheckError> {
    let start = StateSet::singleton(k.len(), t);
    let mut visited: HashMap<StateSet, ()> = HashMap::new();
    let mut queue: VecDeque<(StateSet, usize)> = VecDeque::new();
    visited.insert(start.clone(), ());
    queue.push_back((start, 0));
    while let Some((node, depth)) = queue.pop_front() {
        if node.is_subset_of(sem2) {
            return Ok(Some(depth));
        }
        if !node.intersects(sem1) {
            continue;
        }
        for succ in covering_successors(k, &node) {
            if visited.contains_key(&succ) {
                continue;
            }
            if visited.len() >= DEFAULT_NODE_BUDGET {
                return Err(CheckError::CapExceeded {
                    what: "covering-successor search",
                    limit: DEFAULT_NODE_BUDGET,
                });
            }
            visited.insert(succ.clone(), ());
            queue.push_back((succ, depth + 1));
        }
    }
    Ok(None)
}

/// Recurrent universal synchronization: the image sequence from {t} must
/// contain, inside its periodic part, a set contained in `sem1`. The
/// certificate is that position together with the period.
pub fn eval_gfa(
    k: &KripkeStructure,
    sem1: &StateSet,
) -> Result<(StateSet, Vec<Option<Witness>>), CheckError> {
    let mut sat = StateSet::empty(k.len());
    let mut wits: Vec<Option<Witness>> = vec![None; k.len()];
    for (t, slot) in wits.iter_mut().enumerate() {
        let start = StateSet::singleton(k.len(), t);
        let trace = subset_sequence(k, &start, DEFAULT_SUBSET_CAP)?;
        let hit = trace
            .cycle()
            .iter()
            .position(|s| s.is_subset_of(sem1))
            .map(|off| trace.mu + off);
        if let Some(i) = hit {
            sat.insert(t);
            *slot = Some(Witness {
                state: t,
                kind: WitnessKind::Lasso {
                    position: BigUint::from(i),
                    period: BigUint::from(trace.lambda),
                },
            });
        }
    }
    Ok((sat, wits))
}

/// Recurrent existential synchronization, in polynomial time: a state
/// satisfies it iff it can reach a non-trivial SCC from which some `sem1`
/// state is reachable.
pub fn eval_gfe(k: &KripkeStructure, sem1: &StateSet) -> StateSet {
    let scc = crate::kripke::scc_decomposition(k);
    let nontrivial = StateSet::from_indices(
        k.len(),
        (0..k.len()).filter(|&t| !scc.trivial[scc.component_of[t]]),
    );
    // Non-trivial-SCC states that reach sem1 (in any number of steps).
    let can_reach_sem1 = backward_closure(k, sem1);
    let x = nontrivial.intersection(&can_reach_sem1);
    backward_closure(k, &x)
}

/// States that can reach `target` in zero or more steps.
fn backward_closure(k: &KripkeStructure, target: &StateSet) -> StateSet {
    let mut reach = target.clone();
    loop {
        let grown = reach.union(&eval_ex(k, &reach));
        if grown == reach {
            return reach;
        }
        reach = grown;
    }
}

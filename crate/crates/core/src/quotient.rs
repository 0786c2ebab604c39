//! Bisimulation partition refinement, quotient construction, and a
//! depth-bounded formula distinguisher.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::checker::{eval_au, eval_ax, eval_eu, eval_ex, eval_ua, eval_ue, CheckError};
use crate::formula::Formula;
use crate::kripke::{KripkeStructure, StateSet};

/// Number of semantic classes the distinguisher may accumulate.
pub const DISTINGUISH_CLASS_BUDGET: usize = 1 << 14;

/// A partition of the states: block id per state plus the blocks as
/// ordered state lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn from_block_ids(block_of: Vec<usize>, n_blocks: usize) -> Partition {
        let mut blocks = vec![Vec::new(); n_blocks];
        for (state, &b) in block_of.iter().enumerate() {
            blocks[b].push(state);
        }
        Partition { block_of, blocks }
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }
}

/// Coarsest partition in which same-block states carry equal label sets and
/// reach equal sets of successor blocks, computed by signature refinement
/// to a fixpoint. Block ids follow the first state of each block.
pub fn bisim_partition(k: &KripkeStructure) -> Partition {
    // Initial split by label set.
    let mut block_of: Vec<usize> = Vec::with_capacity(k.len());
    let mut first_with: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut n_blocks = 0;
    for t in 0..k.len() {
        let key: Vec<usize> = k.labels_of(t).iter().copied().collect();
        let id = *first_with.entry(key).or_insert_with(|| {
            n_blocks += 1;
            n_blocks - 1
        });
        block_of.push(id);
    }
    loop {
        // Signature: own block plus the set of successor blocks.
        let mut assign: HashMap<(usize, BTreeSet<usize>), usize> = HashMap::new();
        let mut next_block_of = Vec::with_capacity(k.len());
        let mut next_n = 0;
        for t in 0..k.len() {
            let succ_blocks: BTreeSet<usize> =
                k.successors_of(t).iter().map(|&t2| block_of[t2]).collect();
            let id = *assign
                .entry((block_of[t], succ_blocks))
                .or_insert_with(|| {
                    next_n += 1;
                    next_n - 1
                });
            next_block_of.push(id);
        }
        if next_n == n_blocks {
            return Partition::from_block_ids(block_of, n_blocks);
        }
        block_of = next_block_of;
        n_blocks = next_n;
    }
}

/// Collapses each block to one state. Block states take the name of their
/// first member, labels are the common label set, and an edge connects two
/// blocks when any member does. Returns the structure and the state-to-
/// block map.
pub fn quotient_structure(
    k: &KripkeStructure,
    p: &Partition,
) -> (KripkeStructure, Vec<usize>) {
    let names: Vec<String> = p
        .blocks
        .iter()
        .map(|b| k.state_name(b[0]).to_string())
        .collect();
    let labels: Vec<BTreeSet<usize>> = p
        .blocks
        .iter()
        .map(|b| k.labels_of(b[0]).clone())
        .collect();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); p.blocks.len()];
    for (bid, block) in p.blocks.iter().enumerate() {
        for &t in block {
            for &t2 in k.successors_of(t) {
                let b2 = p.block_of[t2];
                if !succs[bid].contains(&b2) {
                    succs[bid].push(b2);
                }
            }
        }
        succs[bid].sort_unstable();
    }
    let q = KripkeStructure::new(names, k.props().to_vec(), labels, succs)
        .expect("quotient of a valid structure is valid");
    (q, p.block_of.clone())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OpKind {
    Not,
    ExistsNext,
    ForallNext,
    Or,
    ExistsUntil,
    ForallUntil,
    UntilExists,
    UntilForall,
}

const UNARY_OPS: [OpKind; 3] = [OpKind::Not, OpKind::ExistsNext, OpKind::ForallNext];

const BINARY_OPS: [OpKind; 5] = [
    OpKind::Or,
    OpKind::ExistsUntil,
    OpKind::ForallUntil,
    OpKind::UntilExists,
    OpKind::UntilForall,
];

/// Searches for a formula of the base logic (no recurrent prefixes)
/// separating `t` from `u`, enumerating candidates by increasing nesting
/// depth over the structure's propositions. Candidates are deduplicated by
/// their satisfaction vector over all states, which is sound because every
/// operator's semantics is a function of its arguments' satisfaction sets.
/// `None` means no separating formula of depth at most `max_depth` exists;
/// nothing is claimed beyond that depth.
pub fn distinguish(
    k: &KripkeStructure,
    t: usize,
    u: usize,
    max_depth: usize,
    allow_next: bool,
) -> Result<Option<Formula>, CheckError> {
    assert_ne!(t, u, "states must differ");
    let mut classes: Vec<(Formula, StateSet)> = Vec::new();
    let mut seen: HashMap<StateSet, ()> = HashMap::new();
    let push = |classes: &mut Vec<(Formula, StateSet)>,
                    seen: &mut HashMap<StateSet, ()>,
                    f: Formula,
                    v: StateSet|
     -> Result<Option<Formula>, CheckError> {
        if seen.contains_key(&v) {
            return Ok(None);
        }
        if classes.len() >= DISTINGUISH_CLASS_BUDGET {
            return Err(CheckError::CapExceeded {
                what: "distinguisher semantic classes",
                limit: DISTINGUISH_CLASS_BUDGET,
            });
        }
        let separates = v.contains(t) != v.contains(u);
        seen.insert(v.clone(), ());
        classes.push((f.clone(), v));
        if separates {
            Ok(Some(f))
        } else {
            Ok(None)
        }
    };

    let mut seeds: Vec<(Formula, StateSet)> =
        vec![(Formula::True, StateSet::full(k.len()))];
    for prop in k.props() {
        seeds.push((Formula::atom(prop), k.atom_set(prop)));
    }
    for (f, v) in seeds {
        if let Some(hit) = push(&mut classes, &mut seen, f, v)? {
            return Ok(Some(hit));
        }
    }

    let mut frontier_start = 0;
    for _depth in 1..=max_depth {
        let known = classes.len();
        let mut fresh: Vec<(Formula, StateSet)> = Vec::new();
        for op in UNARY_OPS {
            if !allow_next && matches!(op, OpKind::ExistsNext | OpKind::ForallNext) {
                continue;
            }
            // Only operands new since the last round can produce new
            // classes for unary operators.
            for (fa, va) in &classes[frontier_start..known] {
                let (f, v) = match op {
                    OpKind::Not => (fa.clone().not(), va.complement()),
                    OpKind::ExistsNext => (
                        Formula::ExistsNext(Box::new(fa.clone())),
                        eval_ex(k, va),
                    ),
                    OpKind::ForallNext => (
                        Formula::ForallNext(Box::new(fa.clone())),
                        eval_ax(k, va),
                    ),
                    _ => unreachable!(),
                };
                fresh.push((f, v));
            }
        }
        for op in BINARY_OPS {
            for i in 0..known {
                for j in 0..known {
                    if i < frontier_start && j < frontier_start {
                        continue; // both operands already tried last round
                    }
                    if op == OpKind::Or && i > j {
                        continue; // symmetric
                    }
                    let (fa, va) = &classes[i];
                    let (fb, vb) = &classes[j];
                    let (f, v) = match op {
                        OpKind::Or => (fa.clone().or(fb.clone()), va.union(vb)),
                        OpKind::ExistsUntil => (
                            Formula::ExistsUntil(Box::new(fa.clone()), Box::new(fb.clone())),
                            eval_eu(k, va, vb),
                        ),
                        OpKind::ForallUntil => (
                            Formula::ForallUntil(Box::new(fa.clone()), Box::new(fb.clone())),
                            eval_au(k, va, vb),
                        ),
                        OpKind::UntilExists => (
                            Formula::UntilExists(Box::new(fa.clone()), Box::new(fb.clone())),
                            eval_ue(k, va, vb)?.0,
                        ),
                        OpKind::UntilForall => (
                            Formula::UntilForall(Box::new(fa.clone()), Box::new(fb.clone())),
                            eval_ua(k, va, vb)?.0,
                        ),
                        _ => unreachable!(),
                    };
                    fresh.push((f, v));
                }
            }
        }
        frontier_start = known;
        for (f, v) in fresh {
            if let Some(hit) = push(&mut classes, &mut seen, f, v)? {
                return Ok(Some(hit));
            }
        }
        if classes.len() == known {
            break; // semantics saturated below the requested depth
        }
    }
    Ok(None)
}

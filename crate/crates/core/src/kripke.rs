//! Kripke structures and the graph/matrix machinery the checker is built on:
//! successor images, exact-step reachability by repeated squaring, subset
//! sequences, covering successor enumeration, SCCs and stuttering.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default bound on the number of distinct sets a subset sequence may produce.
pub const DEFAULT_SUBSET_CAP: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KripkeError {
    #[error("state {state} has no successor (transition relation must be total)")]
    Totality { state: String },
    #[error("state {state} carries label {label} which is not a declared proposition")]
    UnknownLabel { state: String, label: String },
    #[error("state {state} has successor index {index} out of range")]
    BadSuccessor { state: String, index: usize },
    #[error("state {state} lists successor {index} more than once")]
    DuplicateSuccessor { state: String, index: usize },
    #[error("duplicate state name {name}")]
    DuplicateState { name: String },
    #[error("duplicate proposition name {name}")]
    DuplicateProp { name: String },
    #[error("subset sequence exceeded cap of {cap} distinct sets")]
    CapExceeded { cap: usize },
}

/// A set of states of a fixed structure, represented as a bit vector.
///
/// All iteration is in ascending state-index order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    universe: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn empty(universe: usize) -> Self {
        StateSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn singleton(universe: usize, index: usize) -> Self {
        let mut s = Self::empty(universe);
        s.insert(index);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.universe, "state index out of range");
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.words[index / 64] & (1 << (index % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        debug_assert_eq!(self.universe, other.universe);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        StateSet {
            universe: self.universe,
            words,
        }
    }

    pub fn union_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        debug_assert_eq!(self.universe, other.universe);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        StateSet {
            universe: self.universe,
            words,
        }
    }

    pub fn complement(&self) -> StateSet {
        let mut out = Self::full(self.universe);
        for (a, b) in out.words.iter_mut().zip(&self.words) {
            *a &= !b;
        }
        out
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |i| self.contains(*i))
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Square boolean transition matrix; entry (t, t') is true iff t -> t'.
#[derive(Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    dim: usize,
    rows: Vec<StateSet>,
}

impl BoolMatrix {
    pub fn identity(dim: usize) -> Self {
        BoolMatrix {
            dim,
            rows: (0..dim).map(|i| StateSet::singleton(dim, i)).collect(),
        }
    }

    pub fn from_structure(k: &KripkeStructure) -> Self {
        BoolMatrix {
            dim: k.len(),
            rows: (0..k.len())
                .map(|i| StateSet::from_indices(k.len(), k.successors_of(i).iter().copied()))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Boolean matrix product: (a * b)(i, j) = OR_k a(i, k) AND b(k, j).
    pub fn mul(&self, other: &BoolMatrix) -> BoolMatrix {
        debug_assert_eq!(self.dim, other.dim);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = StateSet::empty(self.dim);
                for j in row.iter() {
                    out.union_with(&other.rows[j]);
                }
                out
            })
            .collect();
        BoolMatrix {
            dim: self.dim,
            rows,
        }
    }

    /// Matrix power by successive squaring over the bits of `exp`.
    pub fn pow(&self, exp: &BigUint) -> BoolMatrix {
        let mut result = BoolMatrix::identity(self.dim);
        let bits = exp.bits();
        for i in (0..bits).rev() {
            result = result.mul(&result);
            if exp.bit(i) {
                result = result.mul(self);
            }
        }
        result
    }

    /// Image of a set under the relation: union of the rows selected by `s`.
    pub fn apply(&self, s: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.dim);
        for i in s.iter() {
            out.union_with(&self.rows[i]);
        }
        out
    }
}

/// The eventually periodic sequence S_0, S_1 = R(S_0), ... of successor images.
///
/// `sets` holds the pairwise distinct prefix S_0 .. S_{mu+lambda-1}; applying
/// the successor image to the last listed set yields S_mu again.
#[derive(Debug, Clone)]
pub struct SubsetTrace {
    pub sets: Vec<StateSet>,
    pub mu: usize,
    pub lambda: usize,
}

impl SubsetTrace {
    /// Sets of the periodic part, S_mu .. S_{mu+lambda-1}.
    pub fn cycle(&self) -> &[StateSet] {
        &self.sets[self.mu..]
    }
}

/// SCC partition with the per-component trivial flag (singleton, no self-loop).
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    pub component_of: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    pub trivial: Vec<bool>,
}

/// A finite labeled transition system with a total transition relation.
///
/// States carry dense indices in file order; all operations are pure and the
/// structure is immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeStructure {
    names: Vec<String>,
    props: Vec<String>,
    labels: Vec<BTreeSet<usize>>,
    succs: Vec<Vec<usize>>,
}

impl KripkeStructure {
    /// Validates totality, label membership and successor sanity.
    pub fn new(
        names: Vec<String>,
        props: Vec<String>,
        labels: Vec<BTreeSet<usize>>,
        succs: Vec<Vec<usize>>,
    ) -> Result<Self, KripkeError> {
        assert_eq!(names.len(), labels.len());
        assert_eq!(names.len(), succs.len());
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.clone()) {
                return Err(KripkeError::DuplicateState { name: name.clone() });
            }
        }
        let mut seen = BTreeSet::new();
        for prop in &props {
            if !seen.insert(prop.clone()) {
                return Err(KripkeError::DuplicateProp { name: prop.clone() });
            }
        }
        for (i, labs) in labels.iter().enumerate() {
            for &l in labs {
                if l >= props.len() {
                    return Err(KripkeError::UnknownLabel {
                        state: names[i].clone(),
                        label: format!("<index {l}>"),
                    });
                }
            }
        }
        for (i, ss) in succs.iter().enumerate() {
            if ss.is_empty() {
                return Err(KripkeError::Totality {
                    state: names[i].clone(),
                });
            }
            let mut seen = BTreeSet::new();
            for &t in ss {
                if t >= names.len() {
                    return Err(KripkeError::BadSuccessor {
                        state: names[i].clone(),
                        index: t,
                    });
                }
                if !seen.insert(t) {
                    return Err(KripkeError::DuplicateSuccessor {
                        state: names[i].clone(),
                        index: t,
                    });
                }
            }
        }
        Ok(KripkeStructure {
            names,
            props,
            labels,
            succs,
        })
    }

    /// Convenience constructor from named states and edges. Propositions
    /// are collected in first-appearance order; duplicate edges are
    /// idempotent.
    pub fn build(
        states: &[(&str, &[&str])],
        edges: &[(&str, &str)],
    ) -> Result<Self, KripkeError> {
        let names: Vec<String> = states.iter().map(|(n, _)| n.to_string()).collect();
        let mut props: Vec<String> = Vec::new();
        for (_, labs) in states {
            for l in *labs {
                if !props.iter().any(|p| p == l) {
                    props.push(l.to_string());
                }
            }
        }
        let labels = states
            .iter()
            .map(|(_, labs)| {
                labs.iter()
                    .map(|l| props.iter().position(|p| p == l).unwrap())
                    .collect::<BTreeSet<_>>()
            })
            .collect();
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
        for (from, to) in edges {
            let f = names
                .iter()
                .position(|n| n == from)
                .unwrap_or_else(|| panic!("unknown state name {from}"));
            let t = names
                .iter()
                .position(|n| n == to)
                .unwrap_or_else(|| panic!("unknown state name {to}"));
            if !succs[f].contains(&t) {
                succs[f].push(t);
            }
        }
        Self::new(names, props, labels, succs)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn state_name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|p| p == name)
    }

    pub fn labels_of(&self, state: usize) -> &BTreeSet<usize> {
        &self.labels[state]
    }

    pub fn successors_of(&self, state: usize) -> &[usize] {
        &self.succs[state]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succs[from].contains(&to)
    }

    /// States labeled by the given proposition; unknown names denote the
    /// empty set.
    pub fn atom_set(&self, prop: &str) -> StateSet {
        match self.prop_index(prop) {
            Some(p) => StateSet::from_indices(
                self.len(),
                (0..self.len()).filter(|&s| self.labels[s].contains(&p)),
            ),
            None => StateSet::empty(self.len()),
        }
    }

    /// A stable fingerprint of the structure (FNV-1a over a canonical
    /// encoding), used to identify fuzzing counterexamples.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for name in &self.names {
            eat(name.as_bytes());
            eat(b";");
        }
        for prop in &self.props {
            eat(prop.as_bytes());
            eat(b";");
        }
        for labs in &self.labels {
            for &l in labs {
                eat(&l.to_le_bytes());
            }
            eat(b";");
        }
        for ss in &self.succs {
            for &t in ss {
                eat(&t.to_le_bytes());
            }
            eat(b";");
        }
        h
    }
}

/// One-step successor image R(s) = union of R(t) over t in s.
pub fn successors(k: &KripkeStructure, s: &StateSet) -> StateSet {
    let mut out = StateSet::empty(k.len());
    for t in s.iter() {
        for &t2 in k.successors_of(t) {
            out.insert(t2);
        }
    }
    out
}

/// States reachable from `from` by a path of exactly `n` transitions,
/// computed with O(log n) boolean matrix multiplications.
pub fn exact_step_reach(k: &KripkeStructure, from: &StateSet, n: &BigUint) -> StateSet {
    BoolMatrix::from_structure(k).pow(n).apply(from)
}

/// Iterates S_{i+1} = R(S_i) from `start` until the first repeated set,
/// detecting the repeat with an exact index keyed by set value.
pub fn subset_sequence(
    k: &KripkeStructure,
    start: &StateSet,
    cap: usize,
) -> Result<SubsetTrace, KripkeError> {
    let mut index: HashMap<StateSet, usize> = HashMap::new();
    let mut sets: Vec<StateSet> = Vec::new();
    let mut current = start.clone();
    loop {
        if let Some(&j) = index.get(&current) {
            let lambda = sets.len() - j;
            return Ok(SubsetTrace {
                sets,
                mu: j,
                lambda,
            });
        }
        if sets.len() >= cap {
            return Err(KripkeError::CapExceeded { cap });
        }
        index.insert(current.clone(), sets.len());
        sets.push(current.clone());
        current = successors(k, &current);
    }
}

/// Enumerates the covering successor sets of `s`: every s' with
/// s' a subset of R(s) that contains at least one successor of each t in s.
///
/// Sets are yielded in ascending order of their characteristic vector over
/// the members of R(s) (lowest member = least significant bit); infeasible
/// branches are pruned, so cost is proportional to the number of sets
/// yielded rather than to 2^|R(s)|.
pub fn covering_successors<'a>(k: &'a KripkeStructure, s: &StateSet) -> CoveringSuccessors<'a> {
    let image: Vec<usize> = successors(k, s).iter().collect();
    let pos_of: HashMap<usize, usize> = image.iter().enumerate().map(|(p, &t)| (t, p)).collect();
    // For each member of s, the positions (within the image) of its successors.
    let need: Vec<Vec<usize>> = s
        .iter()
        .map(|t| {
            let mut ps: Vec<usize> = k.successors_of(t).iter().map(|t2| pos_of[t2]).collect();
            ps.sort_unstable();
            ps
        })
        .collect();
    let chosen = vec![false; image.len()];
    CoveringSuccessors {
        k,
        image,
        need,
        stack: vec![Stage::Enter],
        chosen,
    }
}

#[derive(Clone, Copy)]
enum Stage {
    Enter,
    AfterExclude,
    AfterInclude,
}

/// Iterator over covering successor sets; see [`covering_successors`].
pub struct CoveringSuccessors<'a> {
    k: &'a KripkeStructure,
    image: Vec<usize>,
    need: Vec<Vec<usize>>,
    // Frame at depth d decides image position m-1-d; positions are decided
    // from the most significant down so output is numerically ascending.
    stack: Vec<Stage>,
    chosen: Vec<bool>,
}

impl CoveringSuccessors<'_> {
    /// Every requirement can still be met: some needed position is either
    /// already chosen or still undecided (strictly below `pos`).
    fn feasible_below(&self, pos: usize) -> bool {
        self.need
            .iter()
            .all(|ps| ps.iter().any(|&q| q < pos || self.chosen[q]))
    }
}

impl Iterator for CoveringSuccessors<'_> {
    type Item = StateSet;

    fn next(&mut self) -> Option<StateSet> {
        let m = self.image.len();
        while !self.stack.is_empty() {
            let depth = self.stack.len() - 1;
            match self.stack[depth] {
                Stage::Enter => {
                    if depth == m {
                        self.stack.pop();
                        // Exclude-pruning guarantees the leaf covers; skip
                        // only the empty set.
                        if self.chosen.iter().any(|&c| c) {
                            let set = StateSet::from_indices(
                                self.k.len(),
                                self.image
                                    .iter()
                                    .enumerate()
                                    .filter(|(p, _)| self.chosen[*p])
                                    .map(|(_, &t)| t),
                            );
                            return Some(set);
                        }
                        continue;
                    }
                    let pos = m - 1 - depth;
                    self.stack[depth] = Stage::AfterExclude;
                    self.chosen[pos] = false;
                    if self.feasible_below(pos) {
                        self.stack.push(Stage::Enter);
                    }
                }
                Stage::AfterExclude => {
                    let pos = m - 1 - depth;
                    self.stack[depth] = Stage::AfterInclude;
                    self.chosen[pos] = true;
                    self.stack.push(Stage::Enter);
                }
                Stage::AfterInclude => {
                    self.chosen[m - 1 - depth] = false;
                    self.stack.pop();
                }
            }
        }
        None
    }
}

/// Tarjan's algorithm, iterative to keep stack depth independent of |T|.
pub fn scc_decomposition(k: &KripkeStructure) -> SccDecomposition {
    let n = k.len();
    let mut index_of = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut component_of = vec![usize::MAX; n];
    let mut next_index = 0usize;

    // (state, next successor position to explore)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index_of[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index_of[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < k.successors_of(v).len() {
                let w = k.successors_of(v)[*pos];
                *pos += 1;
                if index_of[w] == usize::MAX {
                    index_of[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index_of[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index_of[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    for (cid, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = cid;
        }
    }
    let trivial = components
        .iter()
        .map(|comp| comp.len() == 1 && !k.has_edge(comp[0], comp[0]))
        .collect();
    SccDecomposition {
        component_of,
        components,
        trivial,
    }
}

/// Replaces each state by a chain of `n` copies: (t,i) -> (t,i+1) for i < n
/// and (t,n) -> (t',1) for each edge t -> t'. Labels are copied per state.
pub fn n_stuttering(k: &KripkeStructure, n: usize) -> KripkeStructure {
    assert!(n >= 1, "stuttering factor must be at least 1");
    let mut names = Vec::with_capacity(k.len() * n);
    let mut labels = Vec::with_capacity(k.len() * n);
    let mut succs = Vec::with_capacity(k.len() * n);
    let idx = |t: usize, i: usize| t * n + i;
    for t in 0..k.len() {
        for i in 0..n {
            names.push(format!("{}_{}", k.state_name(t), i + 1));
            labels.push(k.labels_of(t).clone());
            if i + 1 < n {
                succs.push(vec![idx(t, i + 1)]);
            } else {
                succs.push(k.successors_of(t).iter().map(|&t2| idx(t2, 0)).collect());
            }
        }
    }
    KripkeStructure::new(names, k.props().to_vec(), labels, succs)
        .expect("stuttering preserves validity")
}

/// Deterministic random structure for fuzzing: each ordered pair gets an edge
/// with probability `edge_prob`, totality is repaired with one uniformly
/// chosen outgoing edge, and each (state, prop) pair is labeled with
/// probability `label_prob`.
pub fn random_kripke(
    n_states: usize,
    edge_prob: f64,
    props: &[&str],
    label_prob: f64,
    seed: u64,
) -> KripkeStructure {
    assert!(n_states >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();
    let mut succs: Vec<Vec<usize>> = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let mut row = Vec::new();
        for t in 0..n_states {
            if rng.random_bool(edge_prob) {
                row.push(t);
            }
        }
        succs.push(row);
    }
    for row in succs.iter_mut() {
        if row.is_empty() {
            row.push(rng.random_range(0..n_states));
        }
    }
    let mut labels: Vec<BTreeSet<usize>> = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let mut labs = BTreeSet::new();
        for (p, _) in props.iter().enumerate() {
            if rng.random_bool(label_prob) {
                labs.insert(p);
            }
        }
        labels.push(labs);
    }
    KripkeStructure::new(
        names,
        props.iter().map(|p| p.to_string()).collect(),
        labels,
        succs,
    )
    .expect("generated structure is valid by construction")
}

/// Ring of `n` states with the given labeled positions; test helper shape
/// that also backs the docs.
pub fn cycle(n: usize, labeled: &[usize], prop: &str) -> KripkeStructure {
    let names = (0..n).map(|i| format!("c{i}")).collect();
    let labels = (0..n)
        .map(|i| {
            if labeled.contains(&i) {
                BTreeSet::from([0])
            } else {
                BTreeSet::new()
            }
        })
        .collect();
    let succs = (0..n).map(|i| vec![(i + 1) % n]).collect();
    KripkeStructure::new(names, vec![prop.to_string()], labels, succs).expect("cycle is valid")
}

/// Disjoint union of two structures; state names get the given prefixes and
/// the proposition alphabet is merged by name.
pub fn disjoint_union(
    a: &KripkeStructure,
    prefix_a: &str,
    b: &KripkeStructure,
    prefix_b: &str,
) -> KripkeStructure {
    let mut props: Vec<String> = a.props().to_vec();
    for p in b.props() {
        if !props.contains(p) {
            props.push(p.clone());
        }
    }
    let prop_index = |name: &str| props.iter().position(|p| p == name).unwrap();
    let mut names = Vec::new();
    let mut labels = Vec::new();
    let mut succs = Vec::new();
    for t in 0..a.len() {
        names.push(format!("{prefix_a}{}", a.state_name(t)));
        labels.push(
            a.labels_of(t)
                .iter()
                .map(|&l| prop_index(&a.props()[l]))
                .collect(),
        );
        succs.push(a.successors_of(t).to_vec());
    }
    for t in 0..b.len() {
        names.push(format!("{prefix_b}{}", b.state_name(t)));
        labels.push(
            b.labels_of(t)
                .iter()
                .map(|&l| prop_index(&b.props()[l]))
                .collect(),
        );
        succs.push(b.successors_of(t).iter().map(|&t2| t2 + a.len()).collect());
    }
    KripkeStructure::new(names, props, labels, succs).expect("union of valid structures is valid")
}

//! Generators that turn propositional formulas into model-checking
//! instances, used as correctness tests and benchmark inputs.
//!
//! All three gadgets share one idea: a clause over variables u, v, w
//! becomes a directed cycle whose length is the product of the primes
//! assigned to those variables, so that a position z on the cycle encodes
//! the truth assignment (z mod p_u, z mod p_v, z mod p_w) whenever every
//! residue is 0 or 1 (residue 1 reads as true). One integer therefore
//! encodes a consistent assignment across all cycles at once.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::kripke::{KripkeError, KripkeStructure};

/// States a single generated structure may have.
pub const MAX_GADGET_STATES: usize = 1 << 22;

/// Variable count cap for exhaustive satisfiability checks.
pub const MAX_BRUTE_VARS: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("clause {index} is empty")]
    EmptyClause { index: usize },
    #[error("variable index {var} out of range 1..={num_vars}")]
    BadVariable { var: usize, num_vars: usize },
    #[error("clause {index} repeats variable {var}")]
    RepeatedVariable { index: usize, var: usize },
    #[error("generated structure would exceed {max} states")]
    TooLarge { max: usize },
    #[error("exhaustive check limited to {max} variables, got {got}")]
    SizeExceeded { max: usize, got: usize },
    #[error("DIMACS parse error at line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// A literal: 1-based variable index plus polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Literal {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: usize) -> Literal {
        Literal {
            var,
            positive: false,
        }
    }

    fn satisfied_by(&self, value: bool) -> bool {
        value == self.positive
    }
}

/// Conjunction of disjunctive clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

/// Disjunction of conjunctive clauses; same shape, dual reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

fn validate_clauses(num_vars: usize, clauses: &[Vec<Literal>]) -> Result<(), ReductionError> {
    for (index, clause) in clauses.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for lit in clause {
            if lit.var == 0 || lit.var > num_vars {
                return Err(ReductionError::BadVariable {
                    var: lit.var,
                    num_vars,
                });
            }
            if !seen.insert(lit.var) {
                return Err(ReductionError::RepeatedVariable { index, var: lit.var });
            }
        }
    }
    Ok(())
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, ReductionError> {
        validate_clauses(num_vars, &clauses)?;
        Ok(CnfFormula { num_vars, clauses })
    }
}

impl DnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, ReductionError> {
        validate_clauses(num_vars, &clauses)?;
        Ok(DnfFormula { num_vars, clauses })
    }
}

/// The first `n` primes, ascending.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while primes.len() < n {
        if primes.iter().all(|p| !candidate.is_multiple_of(*p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// The truth assignment encoded by `z`: the residue vector modulo the given
/// primes, provided every residue is 0 or 1 (1 reads as true).
pub fn assignment_of(z: u64, primes: &[u64]) -> Option<Vec<bool>> {
    primes
        .iter()
        .map(|p| match z % p {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        })
        .collect()
}

/// Whether cycle position `i` of the cycle for `clause` carries the target
/// label: the position must encode a binary assignment of the clause's own
/// variables that satisfies the clause (disjunctively).
fn clause_position_satisfies(clause: &[Literal], primes: &[u64], i: u64) -> bool {
    let clause_primes: Vec<u64> = clause.iter().map(|lit| primes[lit.var - 1]).collect();
    match assignment_of(i, &clause_primes) {
        Some(values) => clause
            .iter()
            .zip(values)
            .any(|(lit, v)| lit.satisfied_by(v)),
        None => false,
    }
}

/// Position encodes no binary assignment of the clause's variables.
fn clause_position_nonbinary(clause: &[Literal], primes: &[u64], i: u64) -> bool {
    let clause_primes: Vec<u64> = clause.iter().map(|lit| primes[lit.var - 1]).collect();
    assignment_of(i, &clause_primes).is_none()
}

/// Position encodes a binary assignment satisfying the clause conjunctively.
fn clause_position_satisfies_all(clause: &[Literal], primes: &[u64], i: u64) -> bool {
    let clause_primes: Vec<u64> = clause.iter().map(|lit| primes[lit.var - 1]).collect();
    match assignment_of(i, &clause_primes) {
        Some(values) => clause
            .iter()
            .zip(values)
            .all(|(lit, v)| lit.satisfied_by(v)),
        None => false,
    }
}

fn cycle_lengths(
    clauses: &[Vec<Literal>],
    primes: &[u64],
) -> Result<Vec<usize>, ReductionError> {
    let mut lengths = Vec::with_capacity(clauses.len());
    let mut total = 1usize;
    for (index, clause) in clauses.iter().enumerate() {
        if clause.is_empty() {
            return Err(ReductionError::EmptyClause { index });
        }
        let mut r = 1usize;
        for lit in clause {
            r = r
                .checked_mul(primes[lit.var - 1] as usize)
                .filter(|r| *r <= MAX_GADGET_STATES)
                .ok_or(ReductionError::TooLarge {
                    max: MAX_GADGET_STATES,
                })?;
        }
        total = total
            .checked_add(r)
            .filter(|t| *t <= MAX_GADGET_STATES)
            .ok_or(ReductionError::TooLarge {
                max: MAX_GADGET_STATES,
            })?;
        lengths.push(r);
    }
    Ok(lengths)
}

struct GadgetBuilder {
    names: Vec<String>,
    labels: Vec<BTreeSet<usize>>,
    succs: Vec<Vec<usize>>,
}

impl GadgetBuilder {
    fn new() -> Self {
        GadgetBuilder {
            names: Vec::new(),
            labels: Vec::new(),
            succs: Vec::new(),
        }
    }

    fn add(&mut self, name: String, labels: BTreeSet<usize>) -> usize {
        self.names.push(name);
        self.labels.push(labels);
        self.succs.push(Vec::new());
        self.names.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize) {
        if !self.succs[from].contains(&to) {
            self.succs[from].push(to);
        }
    }

    fn finish(self, props: Vec<String>) -> Result<KripkeStructure, ReductionError> {
        Ok(KripkeStructure::new(
            self.names,
            props,
            self.labels,
            self.succs,
        )?)
    }
}

const PROP_Q: usize = 0;
const PROP_P: usize = 1;

/// Satisfiability gadget for the universal eventuality: one cycle per
/// clause with `q` on the positions encoding clause-satisfying
/// assignments, and an initial state fanning out to every cycle origin.
/// The formula `FA q` holds at the initial state iff the input is
/// satisfiable. Clause width is arbitrary; the cycle length is the product
/// of the clause's primes.
pub fn cnf_to_favorall(
    psi: &CnfFormula,
) -> Result<(KripkeStructure, String), ReductionError> {
    let primes = first_primes(psi.num_vars);
    let lengths = cycle_lengths(&psi.clauses, &primes)?;
    let mut b = GadgetBuilder::new();
    let init = b.add("tI".to_string(), BTreeSet::new());
    for (ci, clause) in psi.clauses.iter().enumerate() {
        let r = lengths[ci];
        let first = b.names.len();
        for i in 0..r {
            let mut labs = BTreeSet::new();
            if clause_position_satisfies(clause, &primes, i as u64) {
                labs.insert(PROP_Q);
            }
            b.add(format!("c{ci}_{i}"), labs);
        }
        for i in 0..r {
            b.edge(first + i, first + (i + 1) % r);
        }
        b.edge(init, first);
    }
    let k = b.finish(vec!["q".to_string()])?;
    Ok((k, "tI".to_string()))
}

/// Satisfiability gadget for the synchronized existential until: the
/// cycles of [`cnf_to_favorall`] with `p` everywhere on them, reached
/// through one feeder path per clause. Feeder paths have m+1 states after
/// the initial one; the i-th path carries `p` on its i-th state and every
/// path carries `p` on its last state, so each position before a
/// synchronization point is served by some path. `[p UE q]` holds at the
/// initial state iff the input is satisfiable, with position m+2+z for a
/// satisfying assignment encoded by z.
pub fn cnf_to_ue(psi: &CnfFormula) -> Result<(KripkeStructure, String), ReductionError> {
    let primes = first_primes(psi.num_vars);
    let lengths = cycle_lengths(&psi.clauses, &primes)?;
    let m = psi.clauses.len();
    let feeder_states = m.checked_mul(m + 1).ok_or(ReductionError::TooLarge {
        max: MAX_GADGET_STATES,
    })?;
    if lengths.iter().sum::<usize>() + feeder_states + 1 > MAX_GADGET_STATES {
        return Err(ReductionError::TooLarge {
            max: MAX_GADGET_STATES,
        });
    }
    let mut b = GadgetBuilder::new();
    let init = b.add("tI".to_string(), BTreeSet::from([PROP_P]));
    for (ci, clause) in psi.clauses.iter().enumerate() {
        let r = lengths[ci];
        // Feeder path: states 1..=m+1 after the initial state.
        let mut prev = init;
        for j in 1..=m + 1 {
            let mut labs = BTreeSet::new();
            if j == ci + 1 || j == m + 1 {
                labs.insert(PROP_P);
            }
            let s = b.add(format!("f{ci}_{j}"), labs);
            b.edge(prev, s);
            prev = s;
        }
        let first = b.names.len();
        for i in 0..r {
            let mut labs = BTreeSet::from([PROP_P]);
            if clause_position_satisfies(clause, &primes, i as u64) {
                labs.insert(PROP_Q);
            }
            b.add(format!("c{ci}_{i}"), labs);
        }
        for i in 0..r {
            b.edge(first + i, first + (i + 1) % r);
        }
        b.edge(prev, first);
    }
    let k = b.finish(vec!["q".to_string(), "p".to_string()])?;
    Ok((k, "tI".to_string()))
}

/// Validity gadget for the synchronized existential until, from a DNF
/// input: same cycles, `q` on each cycle's last state, `p` on positions
/// that either satisfy their clause conjunctively or encode no binary
/// assignment. `[p UE q]` holds at the initial state iff the input is
/// valid.
///
/// Variables map to the primes 3, 5, 7, ... here: with 2 in play, a cycle
/// over only that prime has its q-state at a binary falsifying position,
/// which opens a short spurious witness. A least prime of 3 keeps every
/// cycle's last state non-binary (hence p-labeled) regardless of clause
/// width.
pub fn dnf_to_ue(psi: &DnfFormula) -> Result<(KripkeStructure, String), ReductionError> {
    let primes: Vec<u64> = first_primes(psi.num_vars + 1)[1..].to_vec();
    let lengths = cycle_lengths(&psi.clauses, &primes)?;
    let mut b = GadgetBuilder::new();
    let init = b.add("tI".to_string(), BTreeSet::from([PROP_P]));
    for (ci, clause) in psi.clauses.iter().enumerate() {
        let r = lengths[ci];
        let first = b.names.len();
        for i in 0..r {
            let mut labs = BTreeSet::new();
            if clause_position_satisfies_all(clause, &primes, i as u64)
                || clause_position_nonbinary(clause, &primes, i as u64)
            {
                labs.insert(PROP_P);
            }
            if i == r - 1 {
                labs.insert(PROP_Q);
            }
            b.add(format!("c{ci}_{i}"), labs);
        }
        for i in 0..r {
            b.edge(first + i, first + (i + 1) % r);
        }
        b.edge(init, first);
    }
    let k = b.finish(vec!["q".to_string(), "p".to_string()])?;
    Ok((k, "tI".to_string()))
}

/// A fixed structure and an instance-dependent one that are
/// indistinguishable without the Next operator exactly when the input is
/// satisfiable.
#[derive(Debug, Clone)]
pub struct IndistPair {
    /// The fixed side: an initial state feeding a 2-cycle and a 3-cycle.
    pub fixed: KripkeStructure,
    pub fixed_init: String,
    /// The satisfiability gadget for the padded input.
    pub encoded: KripkeStructure,
    pub encoded_init: String,
}

/// Builds the indistinguishability pair. The input is padded with two
/// clauses over two fresh variables: an all-negative clause (whose cycle
/// origin satisfies q, since the all-zero residue vector reads all-false)
/// and an all-positive clause (whose origin does not). The padding keeps
/// satisfiability unchanged and gives the encoded initial state both a
/// q-successor and a !q-successor, matching the fixed side.
pub fn indist_pair(psi: &CnfFormula) -> Result<IndistPair, ReductionError> {
    let (fixed, _) = crate::fixtures::funnel();
    let y1 = psi.num_vars + 1;
    let y2 = psi.num_vars + 2;
    let mut clauses = psi.clauses.clone();
    clauses.push(vec![Literal::neg(y1), Literal::neg(y2)]);
    clauses.push(vec![Literal::pos(y1), Literal::pos(y2)]);
    let padded = CnfFormula::new(psi.num_vars + 2, clauses)?;
    let (encoded, encoded_init) = cnf_to_favorall(&padded)?;
    Ok(IndistPair {
        fixed,
        fixed_init: "uI".to_string(),
        encoded,
        encoded_init,
    })
}

/// Exhaustive satisfiability check.
pub fn brute_sat(psi: &CnfFormula) -> Result<bool, ReductionError> {
    if psi.num_vars > MAX_BRUTE_VARS {
        return Err(ReductionError::SizeExceeded {
            max: MAX_BRUTE_VARS,
            got: psi.num_vars,
        });
    }
    Ok((0u64..1 << psi.num_vars).any(|bits| {
        psi.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| lit.satisfied_by(bits >> (lit.var - 1) & 1 == 1))
        })
    }))
}

/// Exhaustive validity check for a DNF formula.
pub fn brute_valid(psi: &DnfFormula) -> Result<bool, ReductionError> {
    if psi.num_vars > MAX_BRUTE_VARS {
        return Err(ReductionError::SizeExceeded {
            max: MAX_BRUTE_VARS,
            got: psi.num_vars,
        });
    }
    Ok((0u64..1 << psi.num_vars).all(|bits| {
        psi.clauses.iter().any(|clause| {
            clause
                .iter()
                .all(|lit| lit.satisfied_by(bits >> (lit.var - 1) & 1 == 1))
        })
    }))
}

/// Parses standard DIMACS CNF: a `p cnf <vars> <clauses>` header, `c`
/// comment lines, and zero-terminated clauses (possibly spanning lines).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ReductionError> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if num_vars.is_some() {
                return Err(ReductionError::Dimacs {
                    line: lineno,
                    message: "duplicate problem line".to_string(),
                });
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(ReductionError::Dimacs {
                    line: lineno,
                    message: "expected 'p cnf <vars> <clauses>'".to_string(),
                });
            }
            num_vars = Some(fields[2].parse().map_err(|_| ReductionError::Dimacs {
                line: lineno,
                message: format!("bad variable count '{}'", fields[2]),
            })?);
            declared_clauses = fields[3].parse().map_err(|_| ReductionError::Dimacs {
                line: lineno,
                message: format!("bad clause count '{}'", fields[3]),
            })?;
            continue;
        }
        let Some(nv) = num_vars else {
            return Err(ReductionError::Dimacs {
                line: lineno,
                message: "clause before problem line".to_string(),
            });
        };
        for field in line.split_whitespace() {
            let lit: i64 = field.parse().map_err(|_| ReductionError::Dimacs {
                line: lineno,
                message: format!("bad literal '{field}'"),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = lit.unsigned_abs() as usize;
                if var > nv {
                    return Err(ReductionError::Dimacs {
                        line: lineno,
                        message: format!("literal {lit} exceeds declared variable count {nv}"),
                    });
                }
                current.push(Literal {
                    var,
                    positive: lit > 0,
                });
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let Some(nv) = num_vars else {
        return Err(ReductionError::Dimacs {
            line: 0,
            message: "missing problem line".to_string(),
        });
    };
    if declared_clauses != clauses.len() {
        return Err(ReductionError::Dimacs {
            line: 0,
            message: format!(
                "header declares {declared_clauses} clauses, found {}",
                clauses.len()
            ),
        });
    }
    CnfFormula::new(nv, clauses)
}

/// Reads a DIMACS file as a DNF formula (clauses taken conjunctively).
pub fn parse_dimacs_dnf(text: &str) -> Result<DnfFormula, ReductionError> {
    let cnf = parse_dimacs(text)?;
    DnfFormula::new(cnf.num_vars, cnf.clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check, WitnessKind};
    use crate::formula::parse;
    use crate::kripke::{disjoint_union, exact_step_reach, StateSet};
    use crate::oracle::verify_ue_position;
    use crate::quotient::distinguish;
    use num_bigint::BigUint;

    fn cnf(num_vars: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::new(num_vars, lits(clauses)).unwrap()
    }

    fn dnf(num_vars: usize, clauses: &[&[i64]]) -> DnfFormula {
        DnfFormula::new(num_vars, lits(clauses)).unwrap()
    }

    fn lits(clauses: &[&[i64]]) -> Vec<Vec<Literal>> {
        clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&l| Literal {
                        var: l.unsigned_abs() as usize,
                        positive: l > 0,
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn first_primes_examples() {
        assert_eq!(first_primes(0), Vec::<u64>::new());
        assert_eq!(first_primes(3), vec![2, 3, 5]);
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
    }

    #[test]
    fn residue_vectors_decode_assignments() {
        assert_eq!(
            assignment_of(10, &[2, 3, 5]),
            Some(vec![false, true, false])
        );
        assert_eq!(assignment_of(25, &[2, 3, 5]), Some(vec![true, true, false]));
        assert_eq!(assignment_of(2, &[2, 3, 5]), None);
    }

    #[test]
    fn favorall_single_wide_clause_labels_satisfying_positions() {
        let psi = cnf(3, &[&[1, 2, -3]]);
        let (k, init) = cnf_to_favorall(&psi).unwrap();
        assert_eq!(k.len(), 31); // 30-cycle plus the initial state
        assert_eq!(init, "tI");
        let q = k.atom_set("q");
        let labeled: Vec<usize> = (0..30)
            .filter(|i| q.contains(k.state_index(&format!("c0_{i}")).unwrap()))
            .collect();
        assert_eq!(labeled, vec![0, 1, 10, 15, 16, 21, 25]);
    }

    #[test]
    fn favorall_contradiction_fails() {
        let psi = cnf(1, &[&[1], &[-1]]);
        assert!(!brute_sat(&psi).unwrap());
        let (k, init) = cnf_to_favorall(&psi).unwrap();
        let outcome = check(&k, &parse("FA q").unwrap()).unwrap();
        assert!(!outcome.holds(k.state_index(&init).unwrap()));
    }

    #[test]
    fn favorall_unit_clause_synchronizes_at_two() {
        let psi = cnf(1, &[&[1]]);
        let (k, init) = cnf_to_favorall(&psi).unwrap();
        let outcome = check(&k, &parse("FA q").unwrap()).unwrap();
        let t = k.state_index(&init).unwrap();
        assert!(outcome.holds(t));
        assert_eq!(
            outcome.root_witness(t).unwrap().kind,
            WitnessKind::SyncPoint(BigUint::from(2u32))
        );
    }

    #[test]
    fn favorall_size_is_sum_of_prime_products_plus_one() {
        let cases = [
            cnf(3, &[&[1, 2, -3]]),
            cnf(4, &[&[1, -2], &[3, 4], &[-1, -4]]),
            cnf(2, &[&[1], &[2], &[-1, -2]]),
        ];
        for psi in cases {
            let primes = first_primes(psi.num_vars);
            let expected: usize = psi
                .clauses
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|l| primes[l.var - 1] as usize)
                        .product::<usize>()
                })
                .sum::<usize>()
                + 1;
            let (k, _) = cnf_to_favorall(&psi).unwrap();
            assert_eq!(k.len(), expected);
        }
    }

    #[test]
    fn favorall_rejects_empty_clause() {
        let psi = CnfFormula::new(2, vec![vec![], vec![Literal::pos(1)]]).unwrap();
        assert_eq!(
            cnf_to_favorall(&psi).unwrap_err(),
            ReductionError::EmptyClause { index: 0 }
        );
    }

    #[test]
    fn ue_gadget_reproduces_diagonal_labeling() {
        let psi = cnf(3, &[&[1, 2, -3], &[1, -2, 3]]);
        let (k, _) = cnf_to_ue(&psi).unwrap();
        let p = k.atom_set("p");
        let m = 2;
        assert!(p.contains(k.state_index("tI").unwrap()));
        for ci in 0..m {
            for j in 1..=m + 1 {
                let idx = k.state_index(&format!("f{ci}_{j}")).unwrap();
                let expected = j == ci + 1 || j == m + 1;
                assert_eq!(p.contains(idx), expected, "path {ci}, state {j}");
            }
            // All states of every cycle carry p.
            let mut i = 0;
            while let Some(idx) = k.state_index(&format!("c{ci}_{i}")) {
                assert!(p.contains(idx));
                i += 1;
            }
            assert_eq!(i, 30);
        }
    }

    #[test]
    fn ue_gadget_tracks_satisfiability() {
        let sat = cnf(2, &[&[1, 2], &[-1, 2]]);
        let unsat = cnf(1, &[&[1], &[-1]]);
        let phi = parse("[p UE q]").unwrap();
        let (k, init) = cnf_to_ue(&sat).unwrap();
        assert!(check(&k, &phi).unwrap().holds(k.state_index(&init).unwrap()));
        let (k, init) = cnf_to_ue(&unsat).unwrap();
        assert!(!check(&k, &phi).unwrap().holds(k.state_index(&init).unwrap()));
    }

    #[test]
    fn ue_gadget_witness_is_feeder_length_plus_assignment_number() {
        // x2 alone is satisfiable; the assignment (x1=0, x2=1) is encoded by
        // the residue number z with z mod 2 = 0 and z mod 3 = 1, so z = 4.
        let psi = cnf(2, &[&[2]]);
        let (k, init) = cnf_to_ue(&psi).unwrap();
        let t = k.state_index(&init).unwrap();
        let p = k.atom_set("p");
        let q = k.atom_set("q");
        let m = 1;
        let z = 4usize;
        assert!(verify_ue_position(&k, t, &p, &q, m + 2 + z));
        // One step earlier the frontier is not yet synchronized on q.
        assert!(!verify_ue_position(&k, t, &p, &q, m + 2 + z - 1));
    }

    #[test]
    fn dnf_gadget_tracks_validity() {
        let valid = dnf(1, &[&[1], &[-1]]);
        let invalid = dnf(2, &[&[1, 2]]);
        assert!(brute_valid(&valid).unwrap());
        assert!(!brute_valid(&invalid).unwrap());
        let phi = parse("[p UE q]").unwrap();
        let (k, init) = dnf_to_ue(&valid).unwrap();
        assert!(check(&k, &phi).unwrap().holds(k.state_index(&init).unwrap()));
        let (k, init) = dnf_to_ue(&invalid).unwrap();
        assert!(!check(&k, &phi).unwrap().holds(k.state_index(&init).unwrap()));
    }

    #[test]
    fn dnf_gadget_marks_every_cycle_end() {
        let psi = dnf(3, &[&[1, -2], &[2, 3]]);
        let (k, _) = dnf_to_ue(&psi).unwrap();
        let q = k.atom_set("q");
        let primes = &first_primes(4)[1..];
        for (ci, clause) in psi.clauses.iter().enumerate() {
            let r: usize = clause
                .iter()
                .map(|l| primes[l.var - 1] as usize)
                .product();
            let origin = k.state_index(&format!("c{ci}_0")).unwrap();
            let reach = exact_step_reach(
                &k,
                &StateSet::singleton(k.len(), origin),
                &BigUint::from(r - 1),
            );
            assert!(reach.is_subset_of(&q), "cycle {ci}");
        }
    }

    #[test]
    fn indist_fixed_side_satisfies_the_claimed_formulas() {
        let pair = indist_pair(&cnf(1, &[&[1]])).unwrap();
        let ui = pair.fixed.state_index(&pair.fixed_init).unwrap();
        assert!(check(&pair.fixed, &parse("FA q").unwrap())
            .unwrap()
            .holds(ui));
        assert!(!check(&pair.fixed, &parse("[!q UA q]").unwrap())
            .unwrap()
            .holds(ui));
    }

    #[test]
    fn indist_padding_gives_mixed_successors_and_preserves_satisfiability() {
        let pair = indist_pair(&cnf(1, &[&[1]])).unwrap();
        let k = &pair.encoded;
        let t = k.state_index(&pair.encoded_init).unwrap();
        let q = k.atom_set("q");
        let succ_q: Vec<bool> = k.successors_of(t).iter().map(|&s| q.contains(s)).collect();
        assert!(succ_q.iter().any(|&b| b));
        assert!(succ_q.iter().any(|&b| !b));
        // Like the fixed side, the mixed frontier defeats [!q UA q].
        assert!(!check(k, &parse("[!q UA q]").unwrap()).unwrap().holds(t));
        assert!(check(k, &parse("FA q").unwrap()).unwrap().holds(t));
    }

    #[test]
    fn indist_pair_agrees_when_satisfiable_and_splits_otherwise() {
        let phi = parse("FA q").unwrap();

        let sat_pair = indist_pair(&cnf(1, &[&[1]])).unwrap();
        let fixed_init = sat_pair.fixed.state_index(&sat_pair.fixed_init).unwrap();
        let enc_init = sat_pair
            .encoded
            .state_index(&sat_pair.encoded_init)
            .unwrap();
        assert!(check(&sat_pair.fixed, &phi).unwrap().holds(fixed_init));
        assert!(check(&sat_pair.encoded, &phi).unwrap().holds(enc_init));

        let unsat_pair = indist_pair(&cnf(1, &[&[1], &[-1]])).unwrap();
        let union = disjoint_union(&unsat_pair.fixed, "l_", &unsat_pair.encoded, "r_");
        let a = union.state_index("l_uI").unwrap();
        let b = union.state_index("r_tI").unwrap();
        let found = distinguish(&union, a, b, 2, false).unwrap();
        let sep = found.expect("unsatisfiable instance must be distinguishable");
        let outcome = check(&union, &sep).unwrap();
        assert_ne!(outcome.holds(a), outcome.holds(b));
        // The universal eventuality itself separates the pair.
        let direct = check(&union, &phi).unwrap();
        assert!(direct.holds(a) && !direct.holds(b));
    }

    #[test]
    fn indist_pair_satisfiable_instances_resist_bounded_distinguishers() {
        let cases = [
            cnf(1, &[&[1]]),
            cnf(2, &[&[1, 2], &[-1, 2]]),
            cnf(3, &[&[1, 2, -3], &[-1, 3]]),
        ];
        for psi in cases {
            assert!(brute_sat(&psi).unwrap());
            let pair = indist_pair(&psi).unwrap();
            let union = disjoint_union(&pair.fixed, "l_", &pair.encoded, "r_");
            let a = union.state_index("l_uI").unwrap();
            let b = union.state_index("r_tI").unwrap();
            assert_eq!(
                distinguish(&union, a, b, 3, false).unwrap(),
                None,
                "bounded search separated a satisfiable instance: {psi:?}"
            );
        }
    }

    #[test]
    fn brute_sat_examples() {
        assert!(!brute_sat(&cnf(1, &[&[1], &[-1]])).unwrap());
        assert!(brute_sat(&CnfFormula::new(0, vec![]).unwrap()).unwrap());
        assert!(brute_sat(&cnf(3, &[&[1, 2, -3]])).unwrap());
        assert_eq!(
            brute_sat(&CnfFormula::new(25, vec![]).unwrap()).unwrap_err(),
            ReductionError::SizeExceeded { max: 24, got: 25 }
        );
    }

    #[test]
    fn dimacs_round_trip_and_errors() {
        let text = "c sample\np cnf 3 2\n1 2 -3 0\n-1 3 0\n";
        let psi = parse_dimacs(text).unwrap();
        assert_eq!(psi, cnf(3, &[&[1, 2, -3], &[-1, 3]]));
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n2 0\n").unwrap_err(),
            ReductionError::Dimacs { line: 2, .. }
        ));
        assert!(matches!(
            parse_dimacs("1 0\n").unwrap_err(),
            ReductionError::Dimacs { .. }
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 2\n1 0\n").unwrap_err(),
            ReductionError::Dimacs { .. }
        ));
    }

    #[test]
    fn clause_validation_rejects_bad_shapes() {
        assert_eq!(
            CnfFormula::new(1, lits(&[&[2]])).unwrap_err(),
            ReductionError::BadVariable { var: 2, num_vars: 1 }
        );
        assert_eq!(
            CnfFormula::new(2, lits(&[&[1, -1]])).unwrap_err(),
            ReductionError::RepeatedVariable { index: 0, var: 1 }
        );
    }
}

//! Cross-cutting properties: parser round-trips, normalization laws, the
//! semantic identities between operators, witness re-verification, and the
//! exhaustive checker-versus-oracle comparisons.

use num_bigint::BigUint;
use proptest::prelude::*;

use ctlsync::checker::{check, verify_ua_witness, WitnessKind};
use ctlsync::formula::{normalize, parse, Formula, Quant, TemporalOp};
use ctlsync::kripke::{exact_step_reach, random_kripke, KripkeStructure, StateSet};
use ctlsync::oracle::{oracle_eval, verify_ue_position};

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        prop_oneof![Just("p"), Just("q"), Just("r")].prop_map(Formula::atom),
    ]
}

fn seq_sync() -> impl Strategy<Value = (Vec<TemporalOp>, Quant)> {
    (
        prop::collection::vec(
            prop_oneof![Just(TemporalOp::Eventually), Just(TemporalOp::Always)],
            1..=4,
        ),
        prop_oneof![Just(Quant::Exists), Just(Quant::Forall)],
    )
}

fn formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| a.not()),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Formula::ExistsNext(Box::new(a))),
            inner.clone().prop_map(|a| Formula::ForallNext(Box::new(a))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::ExistsUntil(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::ForallUntil(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::UntilExists(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::UntilForall(Box::new(a), Box::new(b))),
            (seq_sync(), inner).prop_map(|((seq, q), a)| Formula::SeqSync(seq, q, Box::new(a))),
        ]
    })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(f in formula()) {
        let printed = f.to_string();
        let reparsed = parse(&printed);
        prop_assert_eq!(reparsed.unwrap(), f, "printed form: {}", printed);
    }

    #[test]
    fn normalize_is_idempotent(f in formula()) {
        let once = normalize(&f);
        prop_assert_eq!(normalize(&once), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn normalize_preserves_semantics(f in formula(), seed in 0u64..1000) {
        // The oracle evaluates the raw formula without a normalization
        // pass; the checker normalizes first.
        let k = random_kripke(4, 0.35, &["p", "q", "r"], 0.5, seed);
        let reference = oracle_eval(&k, &f).unwrap();
        let outcome = check(&k, &f).unwrap();
        for t in 0..k.len() {
            prop_assert_eq!(reference.holds(t), outcome.holds(t), "state {} of seed {}", t, seed);
        }
    }
}

fn corpus(count: usize, max_states: usize, base_seed: u64) -> Vec<KripkeStructure> {
    (0..count)
        .map(|i| {
            let seed = base_seed + i as u64;
            let n = 1 + (seed as usize % max_states);
            random_kripke(n, 0.15 + (seed % 7) as f64 * 0.1, &["p", "q"], 0.5, seed)
        })
        .collect()
}

fn sat_set(k: &KripkeStructure, text: &str) -> StateSet {
    let outcome = check(k, &parse(text).unwrap()).unwrap();
    let mut set = StateSet::empty(k.len());
    for t in 0..k.len() {
        if outcome.holds(t) {
            set.insert(t);
        }
    }
    set
}

#[test]
fn globally_exists_is_dual_to_eventually_forall() {
    for k in corpus(150, 5, 10_000) {
        for (ge, fa) in [("GE p", "FA !p"), ("GE q", "FA !q")] {
            let lhs = sat_set(&k, ge);
            let rhs = sat_set(&k, fa).complement();
            assert_eq!(lhs, rhs, "structure {:x}", k.digest());
        }
    }
}

#[test]
fn single_prefix_collapse_identities_hold_against_oracle() {
    // FE/GA collapse to the plain CTL operators; the oracle evaluates the
    // synchronized form directly, the checker evaluates the CTL form.
    for k in corpus(150, 5, 20_000) {
        for (sync_form, ctl_form) in [("FE p", "EF p"), ("GA p", "AG p")] {
            let reference = oracle_eval(&k, &parse(sync_form).unwrap()).unwrap();
            let outcome = check(&k, &parse(ctl_form).unwrap()).unwrap();
            for t in 0..k.len() {
                assert_eq!(
                    reference.holds(t),
                    outcome.holds(t),
                    "{sync_form} vs {ctl_form} at state {t} of {:x}",
                    k.digest()
                );
            }
        }
    }
}

#[test]
fn until_variants_form_an_implication_chain() {
    for k in corpus(200, 5, 30_000) {
        let ua = sat_set(&k, "[p UA q]");
        let ue = sat_set(&k, "[p UE q]");
        let au = sat_set(&k, "A[p U q]");
        let eu = sat_set(&k, "E[p U q]");
        let gfa = sat_set(&k, "GFA p");
        let gfe = sat_set(&k, "GFE p");
        let digest = k.digest();
        assert!(ua.is_subset_of(&au), "UA below AU on {digest:x}");
        assert!(au.is_subset_of(&eu), "AU below EU on {digest:x}");
        assert!(ua.is_subset_of(&ue), "UA below UE on {digest:x}");
        assert!(gfa.is_subset_of(&gfe), "GFA below GFE on {digest:x}");
    }
}

#[test]
fn deterministic_structures_collapse_all_until_variants() {
    for seed in 0..100u64 {
        // Edge probability zero leaves exactly one (repair) edge per state.
        let k = random_kripke(1 + (seed % 6) as usize, 0.0, &["p", "q"], 0.5, seed);
        let ua = sat_set(&k, "[p UA q]");
        let ue = sat_set(&k, "[p UE q]");
        let au = sat_set(&k, "A[p U q]");
        let eu = sat_set(&k, "E[p U q]");
        assert_eq!(ua, au, "seed {seed}");
        assert_eq!(au, eu, "seed {seed}");
        assert_eq!(ua, ue, "seed {seed}");
    }
}

#[test]
fn eventual_permanence_matches_direct_oracle_evaluation() {
    // The checker reaches FGA/FGE through normalization into negated
    // recurrent prefixes; the oracle evaluates them by their defining
    // duality over its own subset-sequence machinery.
    for k in corpus(150, 5, 40_000) {
        for form in ["FGA p", "FGE p", "FGA q", "FGE q"] {
            let phi = parse(form).unwrap();
            let reference = oracle_eval(&k, &phi).unwrap();
            let outcome = check(&k, &phi).unwrap();
            for t in 0..k.len() {
                assert_eq!(
                    reference.holds(t),
                    outcome.holds(t),
                    "{form} at state {t} of {:x}",
                    k.digest()
                );
            }
        }
    }
}

#[test]
fn emitted_witnesses_all_verify() {
    for k in corpus(200, 5, 50_000) {
        let p = k.atom_set("p");
        let q = k.atom_set("q");

        let outcome = check(&k, &parse("[p UA q]").unwrap()).unwrap();
        let wits = outcome.witnesses.get(outcome.sem.root()).unwrap();
        for (t, wit) in wits.iter().enumerate() {
            match (wit, outcome.holds(t)) {
                (Some(w), true) => {
                    let WitnessKind::SyncPoint(n) = &w.kind else {
                        panic!("universal until must emit positions")
                    };
                    assert!(
                        verify_ua_witness(&k, t, &p, &q, n),
                        "bad UA witness {n} at state {t} of {:x}",
                        k.digest()
                    );
                    // Reported positions are minimal.
                    let n: usize = n.try_into().unwrap();
                    for earlier in 0..n {
                        assert!(
                            !verify_ua_witness(&k, t, &p, &q, &BigUint::from(earlier)),
                            "UA witness {n} not minimal at state {t} of {:x}",
                            k.digest()
                        );
                    }
                }
                (None, false) => {}
                other => panic!("witness presence mismatch: {other:?}"),
            }
        }

        let outcome = check(&k, &parse("[p UE q]").unwrap()).unwrap();
        let wits = outcome.witnesses.get(outcome.sem.root()).unwrap();
        for (t, wit) in wits.iter().enumerate() {
            if let Some(w) = wit {
                let WitnessKind::SyncPoint(n) = &w.kind else {
                    panic!("existential until must emit positions")
                };
                let n: usize = n.try_into().unwrap();
                assert!(
                    verify_ue_position(&k, t, &p, &q, n),
                    "bad UE witness {n} at state {t} of {:x}",
                    k.digest()
                );
                for earlier in 0..n {
                    assert!(
                        !verify_ue_position(&k, t, &p, &q, earlier),
                        "UE witness {n} not minimal at state {t} of {:x}",
                        k.digest()
                    );
                }
            }
        }

        let outcome = check(&k, &parse("GFA p").unwrap()).unwrap();
        let wits = outcome.witnesses.get(outcome.sem.root()).unwrap();
        for (t, wit) in wits.iter().enumerate() {
            if let Some(w) = wit {
                let WitnessKind::Lasso { position, period } = &w.kind else {
                    panic!("recurrent prefix must emit lassos")
                };
                assert!(*period > BigUint::ZERO);
                let start = StateSet::singleton(k.len(), t);
                let at_n = exact_step_reach(&k, &start, position);
                assert!(at_n.is_subset_of(&p));
                assert_eq!(at_n, exact_step_reach(&k, &start, &(position + period)));
            }
        }
    }
}

#[test]
fn sync_exists_agrees_with_oracle_on_small_corpus() {
    // The checker searches the covering-successor graph; the oracle
    // enumerates candidate positions. Both propositions, three-state
    // corpus of over a thousand structures.
    let mut compared = 0usize;
    for seed in 0..1100u64 {
        let n = 1 + (seed % 4) as usize;
        let k = random_kripke(n, 0.2 + (seed % 5) as f64 * 0.15, &["p", "q"], 0.5, seed);
        for form in ["[p UE q]", "[q UE p]"] {
            let phi = parse(form).unwrap();
            let reference = oracle_eval(&k, &phi).unwrap();
            let outcome = check(&k, &phi).unwrap();
            for t in 0..k.len() {
                assert_eq!(
                    reference.holds(t),
                    outcome.holds(t),
                    "{form} at state {t}, seed {seed}"
                );
                compared += 1;
            }
        }
    }
    assert!(compared > 2000);
}

fn is_stable(k: &KripkeStructure, block_of: &[usize]) -> bool {
    use std::collections::BTreeSet;
    for a in 0..k.len() {
        for b in 0..k.len() {
            if block_of[a] != block_of[b] {
                continue;
            }
            if k.labels_of(a) != k.labels_of(b) {
                return false;
            }
            let sa: BTreeSet<usize> = k.successors_of(a).iter().map(|&t| block_of[t]).collect();
            let sb: BTreeSet<usize> = k.successors_of(b).iter().map(|&t| block_of[t]).collect();
            if sa != sb {
                return false;
            }
        }
    }
    true
}

#[test]
fn partition_is_stable_and_every_merge_breaks_stability() {
    use ctlsync::quotient::bisim_partition;
    for seed in 0..40u64 {
        let k = random_kripke(1 + (seed % 6) as usize, 0.3, &["p", "q"], 0.5, seed);
        let p = bisim_partition(&k);
        assert!(is_stable(&k, &p.block_of), "seed {seed}: unstable output");
        let n_blocks = p.blocks.len();
        for a in 0..n_blocks {
            for b in a + 1..n_blocks {
                let merged: Vec<usize> = p
                    .block_of
                    .iter()
                    .map(|&id| if id == b { a } else { id })
                    .collect();
                assert!(
                    !is_stable(&k, &merged),
                    "seed {seed}: merging blocks {a} and {b} stays stable"
                );
            }
        }
    }
}

#[test]
fn recurrent_exists_scc_method_matches_cycle_intersection_oracle() {
    for seed in 0..1100u64 {
        let n = 1 + (seed % 4) as usize;
        let k = random_kripke(n, 0.2 + (seed % 5) as f64 * 0.15, &["p", "q"], 0.5, seed);
        for form in ["GFE p", "GFE q"] {
            let phi = parse(form).unwrap();
            let reference = oracle_eval(&k, &phi).unwrap();
            let outcome = check(&k, &phi).unwrap();
            for t in 0..k.len() {
                assert_eq!(
                    reference.holds(t),
                    outcome.holds(t),
                    "{form} at state {t}, seed {seed}"
                );
            }
        }
    }
}

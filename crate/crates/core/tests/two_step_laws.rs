use std::path::PathBuf;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sprules::domain::{PreferenceDomain, ProductDomain};
use sprules::enumerate::{enumerate_sp_rules, nonconditional_family, subrule_catalog};
use sprules::rules::{find_manipulation, is_strategy_proof, Rule};
use sprules::spdom::parse_domain_file;
use sprules::twostep::{
    assemble, assignment_of, classify_subrule, decompose, first_step_witnesses,
    search_sp_combinations, BlockClass, TwoStep, TwoStepAssignment, DEFAULT_BUDGET,
};

fn random_pair(seed: u64) -> ProductDomain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = PreferenceDomain::universal(3).unwrap();
    let mut pick = || loop {
        let rs: Vec<_> = u.rankings().iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        if !rs.is_empty() {
            return PreferenceDomain::new(3, rs).unwrap();
        }
    };
    ProductDomain::new(vec![pick(), pick()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sp_rules_decompose_cleanly(seed in any::<u64>()) {
        let d = random_pair(seed);
        let s = TwoStep::classified(d.clone()).unwrap();
        for rule in enumerate_sp_rules(&d, None).unwrap() {
            let blocks = decompose(&rule, &s).unwrap();
            prop_assert!(blocks.iter().all(|b| b.class != BlockClass::Violation));
            prop_assert_eq!(assemble(&s, &assignment_of(&blocks)).unwrap(), rule);
        }
    }

    #[test]
    fn search_equals_enumeration(seed in any::<u64>()) {
        let d = random_pair(seed);
        let s = TwoStep::classified(d.clone()).unwrap();
        let out = search_sp_combinations(&s, 100_000).unwrap();
        prop_assume!(out.complete);
        let all: Vec<Rule> = enumerate_sp_rules(&d, None).unwrap().collect();
        let mut found: Vec<&[u8]> = out.rules.iter().map(|r| r.table()).collect();
        found.sort();
        let mut expect: Vec<&[u8]> = all.iter().map(|r| r.table()).collect();
        expect.sort();
        prop_assert_eq!(found, expect);
    }

    /// Blocks filled with SP catalog subrules only leak through answers.
    #[test]
    fn witnesses_change_answers(seed in any::<u64>()) {
        let d = random_pair(seed);
        let s = TwoStep::classified(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let subrules = s
            .response_profiles()
            .into_iter()
            .map(|rp| {
                let cat = subrule_catalog(&s.block_domain(&rp).unwrap()).unwrap();
                (rp, cat.choose(&mut rng).unwrap().clone())
            })
            .collect();
        let rule = assemble(&s, &TwoStepAssignment { subrules }).unwrap();
        prop_assert!(first_step_witnesses(&rule, &s).iter().all(|w| w.answer_changing));
    }
}

#[test]
fn nonconditional_search_is_exhaustive() {
    for d in nonconditional_family(3, 2).unwrap().iter().step_by(23) {
        let s = TwoStep::classified(d.clone()).unwrap();
        assert_eq!(s.response_profiles().len(), 1);
        let out = search_sp_combinations(&s, DEFAULT_BUDGET).unwrap();
        assert!(out.complete);
        assert_eq!(out.rules.len(), enumerate_sp_rules(d, None).unwrap().count());
    }
}

#[test]
fn when_then_fixture() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ex1.spdom");
    let f = parse_domain_file(&std::fs::read_to_string(path).unwrap()).unwrap();
    let s = TwoStep::new(f.product().unwrap(), f.hints().into_iter().map(Option::unwrap).collect()).unwrap();
    let subrules = s
        .response_profiles()
        .into_iter()
        .enumerate()
        .map(|(j, rp)| {
            let cat = subrule_catalog(&s.block_domain(&rp).unwrap()).unwrap();
            let pick = (7 * j + 3) % cat.len();
            (rp, cat[pick].clone())
        })
        .collect();
    let rule = assemble(&s, &TwoStepAssignment { subrules }).unwrap();
    let blocks = decompose(&rule, &s).unwrap();
    assert!(blocks.iter().all(|b| is_strategy_proof(&b.subrule) && classify_subrule(&b.subrule) != BlockClass::Violation));
    assert!(find_manipulation(&rule).is_some());
    let ws = first_step_witnesses(&rule, &s);
    assert!(!ws.is_empty());
    assert!(ws.iter().all(|w| w.answer_changing));
}

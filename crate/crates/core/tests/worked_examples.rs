use std::path::PathBuf;

use sprules::classifier::{
    apply_restriction, classify, rebuild, restrict_by_answers, satisfied_antecedents, AnswerSet,
    Restriction, RestrictionMap,
};
use sprules::domain::{generate_domain, nonconditional_closure, DomainKind, PreferenceDomain};
use sprules::enumerate::{count_dictatorial, count_second_step, count_sp_range2};
use sprules::pairs::{OrderedPair, PairSet};
use sprules::ranking::{Alternatives, Ranking};
use sprules::spdom::{parse_domain_file, DomainFile};
use sprules::twostep::TwoStep;

const V: u8 = 0;
const W: u8 = 1;
const X: u8 = 2;
const Y: u8 = 3;
const Z: u8 = 4;

fn data(name: &str) -> DomainFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    parse_domain_file(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn pairs(ps: &[(u8, u8)]) -> PairSet {
    ps.iter().map(|&(a, b)| OrderedPair::new(a, b)).collect()
}

fn setup(name: &str) -> TwoStep {
    let f = data(name);
    TwoStep::new(f.product().unwrap(), f.hints().into_iter().map(Option::unwrap).collect()).unwrap()
}

fn rk(alts: &Alternatives, s: &str) -> Ranking {
    alts.parse_ranking(s).unwrap()
}

#[test]
fn three_alternative_restrictions() {
    let alts = Alternatives::new(["x", "y", "z"]).unwrap();
    let u = PreferenceDomain::universal(3).unwrap();
    let fix = apply_restriction(&u, Restriction::NonConditional(OrderedPair::new(0, 2))).unwrap();
    let expect = |rs: &[&str]| PreferenceDomain::new(3, rs.iter().map(|s| rk(&alts, s))).unwrap();
    assert_eq!(fix, expect(&["xyz", "xzy", "yxz"]));
    let cond = apply_restriction(
        &u,
        Restriction::Conditional {
            antecedent: pairs(&[(0, 1)]),
            conclusion: OrderedPair::new(1, 2),
        },
    )
    .unwrap();
    assert_eq!(cond, expect(&["xyz", "yxz", "yzx", "zyx"]));
    let map = RestrictionMap::non_conditional(3, pairs(&[(0, 2)])).unwrap();
    assert_eq!(rebuild(&map).unwrap(), fix);
}

#[test]
fn when_then_domain() {
    let f = data("ex1.spdom");
    let d = &f.agents[0].domain;
    assert_eq!(d.len(), 80);
    let map = classify(d).unwrap();
    assert!(map.base().is_empty());
    assert_eq!(map.conditionals().len(), 1);
    assert_eq!(map.conditionals()[0].antecedent, pairs(&[(X, Y)]));
    assert_eq!(map.conditionals()[0].conclusions, pairs(&[(Z, W), (Z, V)]));

    let hint = f.agents[0].hint.as_ref().unwrap();
    let xy = restrict_by_answers(d, hint, AnswerSet(pairs(&[(X, Y)]))).unwrap().unwrap();
    assert_eq!(xy, nonconditional_closure(pairs(&[(X, Y), (Z, W), (Z, V)]), 5).unwrap());
    let none = restrict_by_answers(d, hint, AnswerSet::default()).unwrap().unwrap();
    assert_eq!(none, nonconditional_closure(pairs(&[(Y, X)]), 5).unwrap());
}

#[test]
fn single_peaked_five() {
    let f = data("ex2.spdom");
    let d = &f.agents[0].domain;
    assert_eq!(d.len(), 16);
    assert_eq!(*d, generate_domain(&DomainKind::SinglePeaked(vec![V, W, X, Y, Z]), 5).unwrap());
    let alts = &f.alternatives;
    let c = pairs(&[(V, W), (W, X), (X, Y)]);
    assert_eq!(satisfied_antecedents(&rk(alts, "vwxyz"), c), AnswerSet(c));
    assert_eq!(satisfied_antecedents(&rk(alts, "wxvyz"), c), AnswerSet(pairs(&[(W, X), (X, Y)])));
    assert_eq!(satisfied_antecedents(&rk(alts, "zyxwv"), c), AnswerSet::default());
    let hint = f.agents[0].hint.as_ref().unwrap();
    let b = restrict_by_answers(d, hint, AnswerSet(pairs(&[(W, X), (X, Y)]))).unwrap().unwrap();
    assert_eq!(b, nonconditional_closure(pairs(&[(W, V), (W, X), (X, Y), (Y, Z)]), 5).unwrap());
}

#[test]
fn when_then_counts() {
    let s = setup("ex1.spdom");
    assert_eq!(s.response_profiles().len(), 4);
    let report = count_second_step(&s).unwrap();
    let subtotals: Vec<u128> = report.rows.iter().map(|r| r.count.subtotal).collect();
    assert_eq!(subtotals, vec![59, 46, 46, 37]);
    assert_eq!(report.product, (37u32 * 46 * 46 * 59).into());

    let rps = s.response_profiles();
    let both_yx = s.block_domain(&rps[0]).unwrap();
    let mixed = s.block_domain(&rps[1]).unwrap();
    let both_xy = s.block_domain(&rps[3]).unwrap();
    assert_eq!(count_sp_range2(&both_yx, Z, W).unwrap(), 4);
    assert_eq!(count_sp_range2(&mixed, Z, W).unwrap(), 1);
    assert_eq!(count_sp_range2(&both_xy, Z, V).unwrap(), 0);
    assert_eq!(count_dictatorial(&both_yx, 3).unwrap(), 14);
    assert_eq!(count_dictatorial(&both_yx, 5).unwrap(), 0);
    assert_eq!(count_dictatorial(&both_yx, 1).unwrap(), 5);
}

#[test]
fn single_peaked_counts() {
    let s = setup("ex2.spdom");
    assert_eq!(s.response_profiles().len(), 16);
    for i in 0..2 {
        assert_eq!(s.blocks(i).len(), 4);
    }
    let report = count_second_step(&s).unwrap();
    let mut subtotals: Vec<u128> = report.rows.iter().map(|r| r.count.subtotal).collect();
    let same: Vec<u128> = report
        .rows
        .iter()
        .filter(|r| r.answers[0] == r.answers[1])
        .map(|r| r.count.subtotal)
        .collect();
    let mut same_sorted = same.clone();
    same_sorted.sort();
    assert_eq!(same_sorted, vec![5, 17, 21, 21]);
    subtotals.sort();
    assert_eq!(subtotals, vec![5, 8, 8, 9, 9, 9, 9, 14, 14, 16, 16, 17, 17, 17, 21, 21]);
    let expected: u128 = 21u128.pow(2) * 17u128.pow(3) * 16u128.pow(2) * 14u128.pow(2) * 9u128.pow(4) * 64 * 5;
    assert_eq!(report.product, expected.into());
}

use proptest::prelude::*;
use sprules::classifier::classify;
use sprules::domain::PreferenceDomain;
use sprules::ranking::{all_rankings, Alternatives, Ranking};
use sprules::spdom::{parse_domain_file, serialize_domain, serialize_maps};

fn domain_strategy() -> impl Strategy<Value = PreferenceDomain> {
    (1usize..=5).prop_flat_map(|m| {
        let n = all_rankings(m).unwrap().len();
        proptest::collection::vec(any::<bool>(), n).prop_filter_map("empty", move |keep| {
            let rs: Vec<Ranking> = all_rankings(m)
                .unwrap()
                .into_iter()
                .zip(keep)
                .filter_map(|(r, k)| k.then_some(r))
                .collect();
            (!rs.is_empty()).then(|| PreferenceDomain::new(m, rs).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn serialize_parse_round_trip(d in domain_strategy()) {
        let alts = Alternatives::letters(d.m()).unwrap();
        let text = serialize_domain(&alts, &d);
        let f = parse_domain_file(&text).unwrap();
        prop_assert_eq!(&f.agents[0].domain, &d);
        prop_assert_eq!(serialize_domain(&alts, &f.agents[0].domain), text);
    }

    #[test]
    fn statements_round_trip_and_commute(d in domain_strategy(), rot in 0usize..8) {
        let alts = Alternatives::letters(d.m()).unwrap();
        let map = classify(&d).unwrap();
        let text = serialize_maps(&alts, &[("a", &map)]);
        let f = parse_domain_file(&text).unwrap();
        prop_assert_eq!(&f.agents[0].domain, &d);

        // same statements in another order
        let mut lines: Vec<&str> = text.lines().collect();
        let body: Vec<&str> = lines.drain(2..lines.len() - 1).collect();
        let mut shuffled = body.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        let rebuilt = format!("{}\n{}\n{}\n}}\n", lines[0], lines[1], shuffled.join("\n"));
        let g = parse_domain_file(&rebuilt).unwrap();
        prop_assert_eq!(&g.agents[0].domain, &d);
    }
}

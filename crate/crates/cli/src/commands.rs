use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sprules::classifier::{ClassifyOptions, Criterion, RestrictionMap, ScanPolicy};
use sprules::domain::ProductDomain;
use sprules::enumerate::{
    count_second_step, enumerate_sp_rules, nonconditional_family, oracle_check,
    verify_impossibility, ENUMERATION_GUARD,
};
use sprules::error::Error;
use sprules::pairs::PairSet;
use sprules::ranking::{AltSet, Alternatives};
use sprules::rules::{
    all_manipulations, dictators_of, find_manipulation, range_of, Rule,
};
use sprules::spdom::{serialize_maps, DomainFile};
use sprules::twostep::{
    assignment_of, decompose, first_step_witnesses, format_response_profile,
    search_sp_combinations, serialize_assignment, BlockClass, ResponseProfile,
};

use crate::{input, Command, Failure, Global, Report, Scan};

type Res<T> = Result<T, Failure>;

pub fn run(cmd: &Command, g: &Global) -> Res<Report> {
    match cmd {
        Command::Classify {
            domain,
            scan,
            biconditional,
        } => {
            let opts = ClassifyOptions {
                scan: match scan {
                    Scan::Default => ScanPolicy::Default,
                    Scan::Reversed => ScanPolicy::Reversed,
                },
                criterion: if *biconditional {
                    Criterion::Biconditional
                } else {
                    Criterion::Sound
                },
            };
            classify(&input::domain_file(&domain.domain)?, opts)
        }
        Command::Closure { domain } => closure(&input::domain_file(&domain.domain)?),
        Command::Partition { domain } => partition(&input::domain_file(&domain.domain)?),
        Command::CountSubrules { domain } => count(&input::domain_file(&domain.domain)?, g),
        Command::EnumerateSp {
            domain,
            range,
            tables,
            sample,
            seed,
        } => enumerate(
            &input::domain_file(&domain.domain)?,
            range.as_deref(),
            *tables,
            *sample,
            *seed,
        ),
        Command::CheckRule { domain, rule } => {
            let file = input::domain_file(&domain.domain)?;
            let rule = input::rule(rule, &file, g.max_profiles)?;
            check_rule(&file, &rule, g)
        }
        Command::Decompose {
            domain,
            rule,
            emit_assignment,
        } => {
            let file = input::domain_file(&domain.domain)?;
            let rule = input::rule(rule, &file, g.max_profiles)?;
            decompose_cmd(&file, &rule, emit_assignment.as_deref())
        }
        Command::VerifyTheorem {
            domain,
            alternatives,
            agents,
        } => verify(domain, *alternatives, *agents),
        Command::SearchTwoStep {
            domain,
            budget,
            tables,
        } => search(&input::domain_file(&domain.domain)?, *budget, *tables),
    }
}

fn ok(text: String, json: Value) -> Res<Report> {
    Ok(Report {
        text,
        json,
        failed: None,
    })
}

/// `{x > y, z > w}`
fn fmt_pairs(alts: &Alternatives, s: PairSet) -> String {
    let inner: Vec<String> = s.iter().map(|p| alts.format_pair(p)).collect();
    format!("{{{}}}", inner.join(", "))
}

fn pairs_json(alts: &Alternatives, s: PairSet) -> Value {
    s.iter().map(|p| Value::from(alts.format_pair(p))).collect()
}

fn set_json(alts: &Alternatives, s: AltSet) -> Value {
    s.iter().map(|a| Value::from(alts.label(a))).collect()
}

fn answers_json(alts: &Alternatives, rp: &ResponseProfile) -> Value {
    rp.answers.iter().map(|b| pairs_json(alts, b.pairs())).collect()
}

fn map_json(alts: &Alternatives, map: &RestrictionMap) -> Value {
    json!({
        "base": pairs_json(alts, map.base()),
        "conditionals": map.conditionals().iter().map(|c| json!({
            "antecedent": pairs_json(alts, c.antecedent),
            "conclusions": pairs_json(alts, c.conclusions),
        })).collect::<Vec<_>>(),
    })
}

fn agent_labels(file: &DomainFile, agents: &[usize]) -> String {
    if agents.is_empty() {
        "none".into()
    } else {
        agents
            .iter()
            .map(|&i| file.agents[i].label.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn table_string(alts: &Alternatives, rule: &Rule) -> String {
    let sep = if alts.compact() { "" } else { " " };
    rule.table()
        .iter()
        .map(|&a| alts.label(a))
        .collect::<Vec<_>>()
        .join(sep)
}

fn classify(file: &DomainFile, opts: ClassifyOptions) -> Res<Report> {
    let alts = &file.alternatives;
    let maps = input::maps(file, Some(opts))?;
    let named: Vec<(&str, &RestrictionMap)> = file
        .agents
        .iter()
        .map(|a| a.label.as_str())
        .zip(&maps)
        .collect();
    let agents: Vec<Value> = file
        .agents
        .iter()
        .zip(&maps)
        .map(|(a, m)| {
            let mut v = map_json(alts, m);
            v["agent"] = Value::from(a.label.clone());
            v["rankings"] = Value::from(a.domain.len());
            v
        })
        .collect();
    ok(serialize_maps(alts, &named), json!({ "agents": agents }))
}

fn closure(file: &DomainFile) -> Res<Report> {
    let alts = &file.alternatives;
    let mut text = String::new();
    let mut agents = Vec::new();
    for a in &file.agents {
        let d = &a.domain;
        let closure = sprules::domain::nonconditional_closure(d.fixed_pairs(), d.m())?;
        let nc = closure.len() == d.len();
        writeln!(text, "agent {}: {} rankings", a.label, d.len()).unwrap();
        writeln!(text, "  fixed pairs: {}", fmt_pairs(alts, d.fixed_pairs())).unwrap();
        writeln!(text, "  free pairs: {}", d.free_pairs().len()).unwrap();
        writeln!(text, "  closure: {} rankings", closure.len()).unwrap();
        writeln!(text, "  non-conditional: {}", if nc { "yes" } else { "no" }).unwrap();
        agents.push(json!({
            "agent": a.label,
            "rankings": d.len(),
            "fixed": pairs_json(alts, d.fixed_pairs()),
            "free": d.free_pairs().len(),
            "closure": closure.len(),
            "non_conditional": nc,
        }));
    }
    ok(text, json!({ "agents": agents }))
}

fn partition(file: &DomainFile) -> Res<Report> {
    let alts = &file.alternatives;
    let setup = input::two_step(file)?;
    let mut text = String::new();
    let mut agents = Vec::new();
    for (i, a) in file.agents.iter().enumerate() {
        let blocks = setup.blocks(i);
        let c = setup.maps()[i].antecedent_pairs();
        writeln!(text, "agent {}: {} rankings, questions {}", a.label, a.domain.len(), fmt_pairs(alts, c)).unwrap();
        writeln!(text, "  answer sets: {}", blocks.len()).unwrap();
        let mut rows = Vec::new();
        for (b, block) in blocks {
            let nc = block.is_non_conditional();
            writeln!(
                text,
                "  {}: {} rankings, non-conditional: {}, fixed {}",
                fmt_pairs(alts, b.pairs()),
                block.len(),
                if nc { "yes" } else { "no" },
                fmt_pairs(alts, block.fixed_pairs())
            )
            .unwrap();
            rows.push(json!({
                "answers": pairs_json(alts, b.pairs()),
                "rankings": block.len(),
                "non_conditional": nc,
                "fixed": pairs_json(alts, block.fixed_pairs()),
            }));
        }
        agents.push(json!({
            "agent": a.label,
            "questions": pairs_json(alts, c),
            "blocks": rows,
        }));
    }
    ok(text, json!({ "agents": agents }))
}

/// `59 · 46^2 · 37`, bases descending.
fn factorization(subtotals: &[u128]) -> String {
    let mut counts: BTreeMap<u128, usize> = BTreeMap::new();
    for &s in subtotals {
        *counts.entry(s).or_default() += 1;
    }
    counts
        .iter()
        .rev()
        .map(|(b, e)| if *e == 1 { b.to_string() } else { format!("{b}^{e}") })
        .collect::<Vec<_>>()
        .join(" · ")
}

fn count(file: &DomainFile, g: &Global) -> Res<Report> {
    let alts = &file.alternatives;
    let setup = input::two_step(file)?;
    let report = count_second_step(&setup)?;
    let profiles = setup.response_profiles();
    let labels: Vec<String> = profiles.iter().map(|rp| format_response_profile(alts, rp)).collect();
    let width = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0).max(16);

    let mut text = String::new();
    writeln!(
        text,
        "{:<width$}  {:>9}  {:>7}  {:>10}  {:>8}",
        "response profile", "constants", "range-2", "dict(k>=3)", "subtotal"
    )
    .unwrap();
    let mut rows = Vec::new();
    for (label, (rp, row)) in labels.iter().zip(profiles.iter().zip(&report.rows)) {
        let c = &row.count;
        let r2: u128 = c.range2.iter().map(|x| x.1).sum();
        let dk: u128 = c.dictatorial.iter().map(|x| x.1).sum();
        writeln!(
            text,
            "{:<width$}  {:>9}  {:>7}  {:>10}  {:>8}",
            label, c.constants, r2, dk, c.subtotal
        )
        .unwrap();
        rows.push(json!({
            "answers": answers_json(alts, rp),
            "constants": c.constants.to_string(),
            "range2": c.range2.iter().map(|(p, n)| json!({
                "pair": [alts.label(p.top), alts.label(p.bottom)],
                "count": n.to_string(),
            })).collect::<Vec<_>>(),
            "dictatorial": c.dictatorial.iter().map(|(k, n)| json!({
                "k": k,
                "count": n.to_string(),
            })).collect::<Vec<_>>(),
            "subtotal": c.subtotal.to_string(),
        }));
    }
    let subtotals: Vec<u128> = report.rows.iter().map(|r| r.count.subtotal).collect();
    writeln!(text, "product: {} = {}", report.product, factorization(&subtotals)).unwrap();

    let p = setup.domain().profile_count();
    let m = setup.domain().m();
    let all_digits = BigUint::from(m).pow(p as u32).to_string().len();
    writeln!(text, "all rules: {m}^{p} ({all_digits} digits)").unwrap();

    let mut out = json!({
        "response_profiles": rows,
        "product": report.product.to_string(),
        "factorization": factorization(&subtotals),
        "all_rules": { "base": m, "exponent": p, "digits": all_digits },
    });
    let mut failed = None;
    if g.oracle {
        let checkable = profiles
            .iter()
            .map(|rp| setup.block_domain(rp).map(|d| d.profile_count() <= ENUMERATION_GUARD))
            .collect::<Result<Vec<_>, Error>>()?;
        if checkable.iter().all(|&c| c) {
            let bad = oracle_check(&setup, &report)?;
            writeln!(text, "oracle: {} of {} rows differ", bad.len(), profiles.len()).unwrap();
            out["oracle_mismatches"] = Value::from(bad.clone());
            if !bad.is_empty() {
                failed = Some(format!("oracle disagrees on {} response profiles", bad.len()));
            }
        } else {
            writeln!(text, "oracle: skipped (block exceeds {ENUMERATION_GUARD} profiles)").unwrap();
            out["oracle_mismatches"] = Value::Null;
        }
    }
    Ok(Report {
        text,
        json: out,
        failed,
    })
}

fn parse_set(alts: &Alternatives, s: &str) -> Res<AltSet> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            alts.id(t)
                .ok_or_else(|| Failure::Core(Error::InvalidParams(format!("unknown alternative `{t}`"))))
        })
        .collect()
}

fn enumerate(
    file: &DomainFile,
    range: Option<&str>,
    tables: bool,
    sample: Option<usize>,
    seed: u64,
) -> Res<Report> {
    let alts = &file.alternatives;
    let filter = range.map(|r| parse_set(alts, r)).transpose()?;
    let rules: Vec<Rule> = enumerate_sp_rules(&file.product()?, filter)?.collect();
    let total = rules.len();
    let chosen: Vec<usize> = match sample {
        Some(n) if n < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, total, n).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..total).collect(),
    };
    let mut text = String::new();
    let mut listed = Vec::new();
    for &k in &chosen {
        let r = &rules[k];
        let range = range_of(r);
        let dict = dictators_of(r);
        write!(text, "{k}: range {}; dictators: {}", alts.format_set(range), agent_labels(file, &dict)).unwrap();
        if tables {
            write!(text, "; table {}", table_string(alts, r)).unwrap();
        }
        text.push('\n');
        listed.push(json!({
            "index": k,
            "range": set_json(alts, range),
            "dictators": dict.iter().map(|&i| file.agents[i].label.clone()).collect::<Vec<_>>(),
            "table": table_string(alts, r),
        }));
    }
    writeln!(text, "SP rules: {total}").unwrap();
    ok(text, json!({ "count": total, "rules": listed }))
}

fn check_rule(file: &DomainFile, rule: &Rule, g: &Global) -> Res<Report> {
    let alts = &file.alternatives;
    let witness = find_manipulation(rule);
    let dict = dictators_of(rule);
    let range = range_of(rule);
    let mut text = format!(
        "SP: {}; dictators: {}; range: {}\n",
        if witness.is_none() { "yes" } else { "no" },
        agent_labels(file, &dict),
        range.len()
    );
    let mut out = json!({
        "sp": witness.is_none(),
        "dictators": dict.iter().map(|&i| file.agents[i].label.clone()).collect::<Vec<_>>(),
        "range": set_json(alts, range),
    });
    if let Some(w) = &witness {
        let d = rule.domain();
        let profile: Vec<String> = (0..d.agent_count())
            .map(|i| alts.format_ranking(d.ranking_at(w.profile_index, i)))
            .collect();
        let lie = alts.format_ranking(d.agent(w.agent).ranking(w.deviation));
        writeln!(
            text,
            "witness: agent {} at ({}) reports {} and gets {} instead of {}",
            file.agents[w.agent].label,
            profile.join(","),
            lie,
            alts.label(w.deviating_outcome),
            alts.label(w.sincere_outcome)
        )
        .unwrap();
        out["witness"] = json!({
            "agent": file.agents[w.agent].label,
            "profile": profile,
            "report": lie,
            "sincere_outcome": alts.label(w.sincere_outcome),
            "outcome": alts.label(w.deviating_outcome),
        });
    }
    let mut failed = None;
    if g.oracle {
        let brute_sp = all_manipulations(rule).is_empty();
        if brute_sp != witness.is_none() {
            failed = Some("exhaustive scan disagrees with the manipulation search".into());
        }
        out["oracle_agrees"] = Value::from(failed.is_none());
    }
    Ok(Report {
        text,
        json: out,
        failed,
    })
}

fn class_text(file: &DomainFile, c: &BlockClass) -> String {
    match c {
        BlockClass::Dictatorial(a) => format!("dictatorial ({})", agent_labels(file, a)),
        BlockClass::SpRange2 => "SP, range 2".into(),
        BlockClass::Violation => "VIOLATION".into(),
    }
}

fn decompose_cmd(file: &DomainFile, rule: &Rule, emit: Option<&std::path::Path>) -> Res<Report> {
    let alts = &file.alternatives;
    let setup = input::two_step(file)?;
    let blocks = decompose(rule, &setup)?;
    let witnesses = first_step_witnesses(rule, &setup);
    let changing = witnesses.iter().filter(|w| w.answer_changing).count();
    let violations = blocks.iter().filter(|b| b.class == BlockClass::Violation).count();

    let mut text = String::new();
    let mut rows = Vec::new();
    for b in &blocks {
        let range = range_of(&b.subrule);
        writeln!(
            text,
            "{}: {}; range {}",
            format_response_profile(alts, &b.profile),
            class_text(file, &b.class),
            alts.format_set(range)
        )
        .unwrap();
        let (kind, agents) = match &b.class {
            BlockClass::Dictatorial(a) => ("dictatorial", a.iter().map(|&i| file.agents[i].label.clone()).collect()),
            BlockClass::SpRange2 => ("sp-range-2", Vec::new()),
            BlockClass::Violation => ("violation", Vec::new()),
        };
        rows.push(json!({
            "answers": answers_json(alts, &b.profile),
            "class": kind,
            "dictators": agents,
            "range": set_json(alts, range),
        }));
    }
    writeln!(text, "violations: {violations}").unwrap();
    writeln!(
        text,
        "manipulations: {} ({} change the manipulator's answers)",
        witnesses.len(),
        changing
    )
    .unwrap();
    if let Some(path) = emit {
        let s = serialize_assignment(alts, &setup, &assignment_of(&blocks))?;
        std::fs::write(path, s).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    ok(
        text,
        json!({
            "blocks": rows,
            "violations": violations,
            "manipulations": witnesses.len(),
            "answer_changing": changing,
        }),
    )
}

fn verify(files: &[std::path::PathBuf], m: usize, n: usize) -> Res<Report> {
    let (family, names): (Vec<ProductDomain>, Vec<String>) = if files.is_empty() {
        let fam = nonconditional_family(m, n)?;
        let names = (0..fam.len()).map(|i| format!("#{i}")).collect();
        (fam, names)
    } else {
        let mut fam = Vec::new();
        let mut names = Vec::new();
        for f in files {
            fam.push(input::domain_file(f)?.product()?);
            names.push(f.display().to_string());
        }
        (fam, names)
    };
    let report = verify_impossibility(&family)?;
    let mut text = String::new();
    writeln!(text, "instances: {}", report.instances).unwrap();
    writeln!(text, "SP rules: {}", report.sp_rules).unwrap();
    let mut unexpected = 0;
    let mut seen = Vec::new();
    for c in &report.counterexamples {
        let nc = family[c.instance].is_non_conditional();
        if nc {
            unexpected += 1;
        }
        if seen.last() != Some(&c.instance) {
            seen.push(c.instance);
        }
    }
    let per_instance: Vec<Value> = seen
        .iter()
        .map(|&i| {
            let count = report.counterexamples.iter().filter(|c| c.instance == i).count();
            let nc = family[i].is_non_conditional();
            writeln!(
                text,
                "{}: {count} SP rules with range other than 2 and no dictator{}",
                names[i],
                if nc { "" } else { " (conditional domain)" }
            )
            .unwrap();
            json!({ "instance": names[i], "counterexamples": count, "non_conditional": nc })
        })
        .collect();
    writeln!(
        text,
        "violations on non-conditional domains: {unexpected}"
    )
    .unwrap();
    Ok(Report {
        text,
        json: json!({
            "instances": report.instances,
            "sp_rules": report.sp_rules,
            "counterexamples": per_instance,
            "nonconditional_violations": unexpected,
        }),
        failed: (unexpected > 0)
            .then(|| format!("{unexpected} violating rules on non-conditional domains")),
    })
}

fn search(file: &DomainFile, budget: u64, tables: bool) -> Res<Report> {
    let alts = &file.alternatives;
    let setup = input::two_step(file)?;
    let out = search_sp_combinations(&setup, budget)?;
    let mut text = String::new();
    writeln!(text, "candidates: {}", out.total).unwrap();
    writeln!(text, "explored: {}", out.explored).unwrap();
    writeln!(text, "complete: {}", if out.complete { "yes" } else { "no (budget exhausted)" }).unwrap();
    writeln!(text, "SP rules: {}", out.rules.len()).unwrap();
    if tables {
        for (k, r) in out.rules.iter().enumerate() {
            writeln!(text, "{k}: {}", table_string(alts, r)).unwrap();
        }
    }
    ok(
        text,
        json!({
            "candidates": out.total.to_string(),
            "explored": out.explored,
            "complete": out.complete,
            "sp_rules": out.rules.len(),
            "tables": out.rules.iter().map(|r| table_string(alts, r)).collect::<Vec<_>>(),
        }),
    )
}

//! Loading domain, rule and assignment files.

use std::path::{Path, PathBuf};

use sprules::classifier::{classify, classify_with, ClassifyOptions, RestrictionMap};
use sprules::error::Error;
use sprules::rules::{parse_rule, Rule};
use sprules::spdom::{parse_domain_file, DomainFile};
use sprules::twostep::{assemble, parse_assignment, resolve_assignment, TwoStep};

use crate::{Failure, RuleArgs};

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::Parse { line, col, msg } => {
            Failure::Input(format!("{}:{line}:{col}: {msg}", path.display()))
        }
        other => Failure::Core(other),
    }
}

pub fn domain_file(path: &Path) -> Result<DomainFile, Failure> {
    parse_domain_file(&read(path)?).map_err(|e| located(path, e))
}

/// The file's own restriction statements where given, the classifier's
/// map otherwise.
pub fn maps(file: &DomainFile, opts: Option<ClassifyOptions>) -> Result<Vec<RestrictionMap>, Failure> {
    file.agents
        .iter()
        .map(|a| match (&a.hint, opts) {
            (Some(h), None) => Ok(h.clone()),
            (_, Some(o)) => classify_with(&a.domain, o),
            (None, None) => classify(&a.domain),
        })
        .collect::<Result<_, _>>()
        .map_err(Failure::Core)
}

pub fn two_step(file: &DomainFile) -> Result<TwoStep, Failure> {
    Ok(TwoStep::new(file.product()?, maps(file, None)?)?)
}

fn check_profiles(file: &DomainFile, max_profiles: usize) -> Result<(), Failure> {
    let p = file.product()?.profile_count();
    if p > max_profiles {
        return Err(Failure::Core(Error::SizeLimit {
            what: "profile count",
            actual: p as u128,
            limit: max_profiles as u128,
        }));
    }
    Ok(())
}

fn rule_file(path: &Path, file: &DomainFile) -> Result<Rule, Failure> {
    let (alts, rule) = parse_rule(&read(path)?).map_err(|e| located(path, e))?;
    if alts != file.alternatives {
        return Err(Failure::Core(Error::InvalidParams(format!(
            "{}: alternatives differ from the domain file",
            path.display()
        ))));
    }
    Ok(rule)
}

/// The rule named by `--rule` or assembled from `--assignment`, checked
/// against the domain file.
pub fn rule(args: &RuleArgs, file: &DomainFile, max_profiles: usize) -> Result<Rule, Failure> {
    check_profiles(file, max_profiles)?;
    let product = file.product()?;
    let rule = if let Some(path) = &args.rule {
        rule_file(path, file)?
    } else {
        let path = args.assignment.as_ref().expect("clap requires one");
        let setup = two_step(file)?;
        let lines = parse_assignment(&file.alternatives, &read(path)?).map_err(|e| located(path, e))?;
        let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut failure = None;
        let assignment = resolve_assignment(&setup, lines, |p| {
            let full = base.join(p);
            rule_file(&full, file).map_err(|f| {
                let msg = match &f {
                    Failure::Core(e) => e.to_string(),
                    Failure::Input(m) | Failure::Verification(m) => m.clone(),
                };
                failure = Some(f);
                Error::Assignment(msg)
            })
        });
        let assignment = match (assignment, failure) {
            (Ok(a), _) => a,
            (Err(_), Some(f)) => return Err(f),
            (Err(e), None) => return Err(Failure::Core(e)),
        };
        assemble(&setup, &assignment)?
    };
    if *rule.domain() != product {
        return Err(Failure::Core(Error::InvalidParams(
            "the rule's profiles do not match the domain file".into(),
        )));
    }
    Ok(rule)
}

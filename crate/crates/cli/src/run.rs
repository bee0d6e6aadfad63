use std::io::Write;
use std::path::Path;

use serde::Serialize;
use zbias::conditions::{
    check_collider_association, check_cor1, check_cor2, check_cor3, check_cor4, check_lemma_s5,
    check_lemma_s7, check_thm1, check_thm2, check_thm3, check_thm4, check_thm5_binary, check_thm7,
    check_weaker_condition, zbias_verdict,
};
use zbias::estimators::{covariate_average, dce, estimates, po_estimates, rr};
use zbias::json::round_half_even;
use zbias::montecarlo::{estimate_volume, export_scatter};
use zbias::{
    parse_scenario, BinaryScenario, ConditionBundle, ErrorClass, McConfig,
    PotentialOutcomeScenario, ScatterError, Scenario,
};

use crate::cli::{Command, McArgs, TheoremId};

/// A failure mapped to its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] zbias::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Model(e) => match e.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Degenerate => 3,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_scenario(&text)?)
}

fn wrong_kind(expected: &'static str, s: &Scenario) -> CliError {
    zbias::Error::WrongKind {
        expected,
        found: s.kind(),
    }
    .into()
}

fn binary(s: &Scenario) -> Result<&BinaryScenario> {
    match s {
        Scenario::Binary(b) => Ok(b),
        other => Err(wrong_kind("binary", other)),
    }
}

fn potential(s: &Scenario) -> Result<&PotentialOutcomeScenario> {
    match s {
        Scenario::PotentialOutcomes(p) => Ok(p),
        other => Err(wrong_kind("potential_outcomes", other)),
    }
}

fn emit<W: Write>(out: &mut W, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("ZBIAS_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| (n > 0).then_some(n))
            .map_err(|_| {
                zbias::Error::Invariant {
                    field: "ZBIAS_THREADS".into(),
                    constraint: format!("`{v}` is not a non-negative integer"),
                }
                .into()
            }),
    }
}

fn mc_config(args: &McArgs) -> Result<McConfig> {
    Ok(McConfig::new(args.draws, args.seed)
        .with_filter(args.filter.iter().copied())
        .with_threads(threads()?))
}

fn check(s: &Scenario, id: TheoremId) -> Result<ConditionBundle> {
    let single = |name: &str, r| ConditionBundle::new(name, vec![r]);
    Ok(match id {
        TheoremId::Thm1 => check_thm1(&s.as_discrete()?)?,
        TheoremId::Thm2 => check_thm2(&s.as_discrete()?),
        TheoremId::Thm3 => check_thm3(&s.as_discrete()?)?,
        TheoremId::Thm7 => check_thm7(&s.as_discrete()?)?,
        TheoremId::Collider => {
            let d = s.as_discrete()?;
            let reports = vec![
                check_collider_association(&d, 1)?,
                check_collider_association(&d, 0)?,
            ];
            ConditionBundle::new("collider", reports)
        }
        TheoremId::Cor1 => check_cor1(binary(s)?),
        TheoremId::Cor2 => check_cor2(binary(s)?),
        TheoremId::Weaker => single("weaker", check_weaker_condition(binary(s)?)?),
        TheoremId::LemmaS5 => {
            let [p11, p10, p01, p00] = binary(s)?.p_table();
            single("lemma_s5", check_lemma_s5(p11, p10, p01, p00)?)
        }
        TheoremId::LemmaS7 => {
            let [p11, p10, p01, p00] = binary(s)?.p_table();
            single("lemma_s7", check_lemma_s7(p11, p10, p01, p00)?)
        }
        TheoremId::Thm4 => check_thm4(potential(s)?)?,
        TheoremId::Thm5Binary => check_thm5_binary(potential(s)?)?,
        TheoremId::Cor3 => check_cor3(potential(s)?)?,
        TheoremId::Cor4 => check_cor4(potential(s)?)?,
    })
}

fn table_row(e: &zbias::EstimateSet) -> String {
    let cells = [
        round_half_even(e.true_all, 4),
        round_half_even(e.unadj, 4),
        round_half_even(e.adj_all, 4),
        if zbias_verdict(e).zbias { "YES" } else { "NO" }.to_owned(),
    ];
    let header = ["ACE_true", "ACE_unadj", "ACE_adj", "Z-bias"];
    let width = |k: usize| header[k].len().max(cells[k].len());
    let line = |row: [&str; 4]| {
        (0..4)
            .map(|k| format!("{:>w$}", row[k], w = width(k)))
            .collect::<Vec<_>>()
            .join("  ")
    };
    format!(
        "{}\n{}",
        line(header),
        line(std::array::from_fn(|k| cells[k].as_str()))
    )
}

/// Executes one subcommand, writing its result to `out`.
pub fn run<W: Write>(command: &Command, out: &mut W) -> Result<()> {
    match command {
        Command::Eval {
            scenario,
            conditioning,
            table,
        } => {
            let s = load(scenario)?;
            let e = match &s {
                Scenario::PotentialOutcomes(p) => po_estimates(p)?,
                other => estimates(&other.as_discrete()?, conditioning.conditioning)?,
            };
            if *table {
                writeln!(out, "{}", table_row(&e))
                    .map_err(|e| CliError::Io(format!("cannot write output: {e}")))
            } else {
                emit(out, &e)
            }
        }
        Command::Check { scenario, theorem } => {
            let s = load(scenario)?;
            let bundles = theorem
                .iter()
                .map(|&id| check(&s, id))
                .collect::<Result<Vec<_>>>()?;
            emit(out, &bundles)
        }
        Command::Dce {
            scenario,
            threshold,
            conditioning,
        } => {
            let s = load(scenario)?.as_discrete()?;
            emit(out, &dce(&s, *threshold, conditioning.conditioning)?)
        }
        Command::Rr {
            scenario,
            conditioning,
        } => {
            let s = load(scenario)?.as_discrete()?;
            emit(out, &rr(&s, conditioning.conditioning)?)
        }
        Command::Average {
            scenario,
            conditioning,
        } => match load(scenario)? {
            Scenario::CovariateFamily(fam) => {
                emit(out, &covariate_average(&fam, conditioning.conditioning)?)
            }
            other => Err(wrong_kind("covariate_family", &other)),
        },
        Command::Mc(args) => emit(out, &estimate_volume(&mc_config(args)?)?),
        Command::Scatter { mc, out: path } => {
            export_scatter(&mc_config(mc)?, path).map_err(|e| match e {
                ScatterError::Io(io) => {
                    CliError::Io(format!("cannot write {}: {io}", path.display()))
                }
                ScatterError::Model(m) => m.into(),
            })?;
            Ok(())
        }
    }
}

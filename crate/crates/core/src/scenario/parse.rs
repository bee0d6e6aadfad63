//! The `key = value` scenario file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{
    BinaryScenario, CovariateFamily, DiscreteParts, DiscreteScenario, OutcomeLaw, OutcomePair,
    PotentialOutcomeScenario, Scenario, Stratum,
};
use crate::error::{Error, Result};

/// Parses scenario-file text into a validated scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let lines = logical_lines(text);
    let mut body = Vec::new();
    let mut strata = Vec::new();
    let mut open: Option<(usize, String, f64, Vec<Line>)> = None;

    for line in lines {
        if let Some(rest) = line.text.strip_prefix("begin ") {
            if open.is_some() {
                return Err(syntax(line.no, "nested `begin stratum`"));
            }
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.as_slice() {
                ["stratum", label, weight] => {
                    let weight = number(line.no, weight)?;
                    open = Some((line.no, (*label).to_owned(), weight, Vec::new()));
                }
                _ => return Err(syntax(line.no, "expected `begin stratum <label> <weight>`")),
            }
        } else if line.text == "end stratum" {
            match open.take() {
                Some((no, label, weight, lines)) => strata.push((no, label, weight, lines)),
                None => return Err(syntax(line.no, "`end stratum` without `begin stratum`")),
            }
        } else if let Some((_, _, _, lines)) = open.as_mut() {
            lines.push(line);
        } else {
            body.push(line);
        }
    }
    if let Some((no, ..)) = open {
        return Err(syntax(no, "stratum block is never closed"));
    }

    let mut entries = Entries::new(body)?;
    let kind = entries.take_required("kind")?;
    let scenario = match kind.1.as_str() {
        "binary" => Scenario::Binary(binary(&mut entries)?),
        "discrete" => Scenario::Discrete(discrete(&mut entries)?),
        "potential_outcomes" => Scenario::PotentialOutcomes(potential_outcomes(&mut entries)?),
        "covariate_family" => {
            let mut parsed = Vec::with_capacity(strata.len());
            for (no, label, weight, lines) in strata.drain(..) {
                let mut e = Entries::new(lines)?;
                let scenario = match e.take("kind").map(|(_, k)| k) {
                    None => discrete(&mut e)?,
                    Some(k) if k == "discrete" => discrete(&mut e)?,
                    Some(k) if k == "binary" => binary(&mut e)?.to_discrete(),
                    Some(k) => {
                        return Err(syntax(
                            no,
                            format!("stratum `{label}` has unsupported kind `{k}`"),
                        ))
                    }
                };
                e.finish()?;
                parsed.push(Stratum {
                    label,
                    weight,
                    scenario,
                });
            }
            if parsed.is_empty() {
                return Err(Error::invariant("strata", "covariate family has no strata"));
            }
            Scenario::CovariateFamily(CovariateFamily::new(parsed)?)
        }
        other => return Err(Error::UnknownKind(other.to_owned())),
    };
    if let Some((no, ..)) = strata.first() {
        return Err(syntax(
            *no,
            "stratum blocks are only allowed in covariate_family files",
        ));
    }
    entries.finish()?;
    Ok(scenario)
}

#[derive(Debug, Clone)]
struct Line {
    no: usize,
    text: String,
}

fn logical_lines(text: &str) -> Vec<Line> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("").trim();
            (!content.is_empty()).then(|| Line {
                no: i + 1,
                text: content.to_owned(),
            })
        })
        .collect()
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

/// Decimal literal: optional sign, digits with an optional point, optional exponent.
fn number(line: usize, s: &str) -> Result<f64> {
    let s = s.trim();
    let ok = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        && s.chars().any(|c| c.is_ascii_digit());
    match s.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(syntax(line, format!("`{s}` is not a decimal number"))),
    }
}

fn number_list(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| number(line, x)).collect()
}

fn boolean(line: usize, s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(syntax(line, format!("`{s}` is not true or false"))),
    }
}

/// Key/value pairs of one block, keyed by the raw key text.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn new(lines: Vec<Line>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in lines {
            let (key, value) = line
                .text
                .split_once('=')
                .ok_or_else(|| syntax(line.no, "expected `key = value`"))?;
            let key: String = key.split_whitespace().collect();
            if key.is_empty() {
                return Err(syntax(line.no, "empty key"));
            }
            if let Some((prev, _)) = map.insert(key.clone(), (line.no, value.trim().to_owned())) {
                return Err(syntax(
                    line.no,
                    format!("`{key}` already set on line {prev}"),
                ));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn take_required(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key)
            .ok_or_else(|| Error::invariant(key, "required key is missing"))
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let (no, v) = self.take_required(key)?;
        number(no, &v)
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>> {
        let (no, v) = self.take_required(key)?;
        number_list(no, &v)
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            Some((no, v)) => boolean(no, &v),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            Some((key, (no, _))) => Err(syntax(no, format!("unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

fn binary(e: &mut Entries) -> Result<BinaryScenario> {
    let p_z = e.number("pZ")?;
    let p_u = e.number("pU")?;
    let mut treat = [[0.0; 2]; 2];
    let mut outcome = [[0.0; 2]; 2];
    for x in [1, 0] {
        for u in [1, 0] {
            treat[x][u] = e.number(&format!("p{x}{u}"))?;
            outcome[x][u] = e.number(&format!("r{x}{u}"))?;
        }
    }
    let binary_outcome = e.flag("binary_outcome", true)?;
    BinaryScenario::new(p_z, p_u, treat, outcome, binary_outcome)
}

fn table(e: &mut Entries, prefix: &str, nz: usize, nu: usize) -> Result<Vec<Vec<f64>>> {
    (0..nz)
        .map(|i| {
            (0..nu)
                .map(|j| e.number(&format!("{prefix}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

fn law(line: usize, s: &str) -> Result<OutcomeLaw> {
    s.split(',')
        .map(|item| {
            let (v, p) = item
                .split_once(':')
                .ok_or_else(|| syntax(line, format!("`{}` is not `value:prob`", item.trim())))?;
            Ok((number(line, v)?, number(line, p)?))
        })
        .collect()
}

fn discrete(e: &mut Entries) -> Result<DiscreteScenario> {
    let z_support = e.list("z_support")?;
    let z_pmf = e.list("z_pmf")?;
    let u_support = e.list("u_support")?;
    let u_pmf = e.list("u_pmf")?;
    let (nz, nu) = (z_support.len(), u_support.len());
    let treat = table(e, "treat", nz, nu)?;
    let outcome_mean = [table(e, "mean[0]", nz, nu)?, table(e, "mean[1]", nz, nu)?];
    let has_law = e.map.keys().any(|k| k.starts_with("law["));
    let outcome_law = if has_law {
        let mut laws: [Vec<OutcomeLaw>; 2] = [Vec::new(), Vec::new()];
        for (a, per_u) in laws.iter_mut().enumerate() {
            for j in 0..nu {
                let (no, v) = e.take_required(&format!("law[{a}][{j}]"))?;
                per_u.push(law(no, &v)?);
            }
        }
        Some(laws)
    } else {
        None
    };
    let binary_outcome = e.flag("binary_outcome", false)?;
    let direct_effect = e.flag("direct_effect", false)?;
    DiscreteScenario::new(DiscreteParts {
        z_support,
        z_pmf,
        u_support,
        u_pmf,
        treat,
        outcome_mean,
        outcome_law,
        binary_outcome,
        direct_effect,
    })
}

fn potential_outcomes(e: &mut Entries) -> Result<PotentialOutcomeScenario> {
    let pi_support = e.list("pi_support")?;
    let pi_pmf = e.list("pi_pmf")?;
    let (no, raw) = e.take_required("y_pairs")?;
    let pairs: Vec<OutcomePair> = raw
        .split(';')
        .map(|item| {
            let (ys, prob) = item
                .split_once(':')
                .ok_or_else(|| syntax(no, format!("`{}` is not `y1,y0:prob`", item.trim())))?;
            let ys = number_list(no, ys)?;
            let [y1, y0] = ys[..] else {
                return Err(syntax(
                    no,
                    format!("`{}` needs exactly two outcomes", item.trim()),
                ));
            };
            Ok(OutcomePair {
                y1,
                y0,
                prob: number(no, prob)?,
            })
        })
        .collect::<Result<_>>()?;
    let treat = table(e, "treat", pi_support.len(), pairs.len())?;
    PotentialOutcomeScenario::new(pi_support, pi_pmf, pairs, treat)
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_discrete(out: &mut String, s: &DiscreteScenario) {
    let _ = writeln!(out, "z_support = {}", join(s.z_support()));
    let _ = writeln!(out, "z_pmf = {}", join(s.z_pmf()));
    let _ = writeln!(out, "u_support = {}", join(s.u_support()));
    let _ = writeln!(out, "u_pmf = {}", join(s.u_pmf()));
    for i in 0..s.nz() {
        for j in 0..s.nu() {
            let _ = writeln!(out, "treat[{i}][{j}] = {}", s.treat(i, j));
        }
    }
    for a in 0..2 {
        for i in 0..s.nz() {
            for j in 0..s.nu() {
                let _ = writeln!(out, "mean[{a}][{i}][{j}] = {}", s.mean(a, i, j));
            }
        }
    }
    if let Some(laws) = s.outcome_law() {
        for (a, per_u) in laws.iter().enumerate() {
            for (j, law) in per_u.iter().enumerate() {
                let items: Vec<String> = law.iter().map(|(v, p)| format!("{v}:{p}")).collect();
                let _ = writeln!(out, "law[{a}][{j}] = {}", items.join(", "));
            }
        }
    }
    let _ = writeln!(out, "binary_outcome = {}", s.binary_outcome());
    let _ = writeln!(out, "direct_effect = {}", s.direct_effect());
}

pub(super) fn render(scenario: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind = {}", scenario.kind());
    match scenario {
        Scenario::Binary(b) => {
            let _ = writeln!(out, "pZ = {}", b.p_z());
            let _ = writeln!(out, "pU = {}", b.p_u());
            for (name, v) in ["p11", "p10", "p01", "p00"].iter().zip(b.p_table()) {
                let _ = writeln!(out, "{name} = {v}");
            }
            for (name, v) in ["r11", "r10", "r01", "r00"].iter().zip(b.r_table()) {
                let _ = writeln!(out, "{name} = {v}");
            }
            let _ = writeln!(out, "binary_outcome = {}", b.binary_outcome());
        }
        Scenario::Discrete(d) => render_discrete(&mut out, d),
        Scenario::PotentialOutcomes(p) => {
            let _ = writeln!(out, "pi_support = {}", join(p.pi_support()));
            let _ = writeln!(out, "pi_pmf = {}", join(p.pi_pmf()));
            let pairs: Vec<String> = p
                .pairs()
                .iter()
                .map(|q| format!("{},{}:{}", q.y1, q.y0, q.prob))
                .collect();
            let _ = writeln!(out, "y_pairs = {}", pairs.join("; "));
            for (k, row) in p.treat_table().iter().enumerate() {
                for (j, t) in row.iter().enumerate() {
                    let _ = writeln!(out, "treat[{k}][{j}] = {t}");
                }
            }
        }
        Scenario::CovariateFamily(f) => {
            for s in f.strata() {
                let _ = writeln!(out, "begin stratum {} {}", s.label, s.weight);
                render_discrete(&mut out, &s.scenario);
                let _ = writeln!(out, "end stratum");
            }
        }
    }
    out
}

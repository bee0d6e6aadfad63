//! Data-generating processes: their validation, conversion and the
//! propensity-score collapse of the instrument.

mod parse;

pub use parse::parse_scenario;

use crate::error::{Error, Result};
use crate::numeric;
use crate::{MERGE_TOL, VALIDATION_TOL};

/// Any scenario that a scenario file can describe.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Binary(BinaryScenario),
    Discrete(DiscreteScenario),
    PotentialOutcomes(PotentialOutcomeScenario),
    CovariateFamily(CovariateFamily),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Binary(_) => "binary",
            Scenario::Discrete(_) => "discrete",
            Scenario::PotentialOutcomes(_) => "potential_outcomes",
            Scenario::CovariateFamily(_) => "covariate_family",
        }
    }

    /// Renders the scenario in the scenario-file format accepted by [`parse_scenario`].
    pub fn to_text(&self) -> String {
        parse::render(self)
    }

    /// The scenario as a general finite-support process, when it is one.
    pub fn as_discrete(&self) -> Result<DiscreteScenario> {
        match self {
            Scenario::Binary(b) => Ok(b.to_discrete()),
            Scenario::Discrete(d) => Ok(d.clone()),
            other => Err(Error::WrongKind {
                expected: "binary or discrete",
                found: other.kind(),
            }),
        }
    }
}

fn check_probability(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::invariant(
            field,
            format!("probability {x} outside [0, 1]"),
        ))
    }
}

fn check_finite(field: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invariant(field, format!("value {x} is not finite")))
    }
}

fn check_pmf(field: &str, pmf: &[f64]) -> Result<()> {
    if pmf.is_empty() {
        return Err(Error::invariant(
            field,
            "distribution has no support points",
        ));
    }
    for (i, &p) in pmf.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::invariant(
                format!("{field}[{i}]"),
                format!("probability {p} is negative or not finite"),
            ));
        }
    }
    let total = numeric::sum(pmf.iter().copied());
    if (total - 1.0).abs() > VALIDATION_TOL {
        return Err(Error::invariant(
            field,
            format!("probabilities sum to {total}, not 1"),
        ));
    }
    Ok(())
}

fn check_support(field: &str, support: &[f64]) -> Result<()> {
    for (i, &v) in support.iter().enumerate() {
        check_finite(&format!("{field}[{i}]"), v)?;
    }
    if let Some(w) = support.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::invariant(
            field,
            format!(
                "support must be strictly increasing (positions {} and {})",
                w,
                w + 1
            ),
        ));
    }
    Ok(())
}

/// Rescales a pmf to sum to one. A pmf already within rounding of one is kept
/// as is, so normalizing twice changes nothing.
fn normalized(pmf: Vec<f64>) -> Vec<f64> {
    let total = numeric::sum(pmf.iter().copied());
    if (total - 1.0).abs() <= 8.0 * f64::EPSILON * pmf.len() as f64 {
        pmf
    } else {
        pmf.into_iter().map(|p| p / total).collect()
    }
}

/// The binary (Z, U, A, Y) world: two Bernoulli causes of a binary treatment.
///
/// `treat[z][u] = Pr(A=1 | Z=z, U=u)` and `outcome[a][u] = E(Y | A=a, U=u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryScenario {
    p_z: f64,
    p_u: f64,
    treat: [[f64; 2]; 2],
    outcome: [[f64; 2]; 2],
    binary_outcome: bool,
}

impl BinaryScenario {
    pub fn new(
        p_z: f64,
        p_u: f64,
        treat: [[f64; 2]; 2],
        outcome: [[f64; 2]; 2],
        binary_outcome: bool,
    ) -> Result<Self> {
        check_probability("pZ", p_z)?;
        check_probability("pU", p_u)?;
        for z in [1, 0] {
            for u in [1, 0] {
                check_probability(&format!("p{z}{u}"), treat[z][u])?;
            }
        }
        for a in [1, 0] {
            for u in [1, 0] {
                let name = format!("r{a}{u}");
                if binary_outcome {
                    check_probability(&name, outcome[a][u])?;
                } else {
                    check_finite(&name, outcome[a][u])?;
                }
            }
        }
        Ok(BinaryScenario {
            p_z,
            p_u,
            treat,
            outcome,
            binary_outcome,
        })
    }

    /// Builds a binary-outcome scenario from values in table order
    /// `(p11, p10, p01, p00)` and `(r11, r10, r01, r00)`.
    pub fn from_table(p_z: f64, p_u: f64, p: [f64; 4], r: [f64; 4]) -> Result<Self> {
        Self::new(
            p_z,
            p_u,
            [[p[3], p[2]], [p[1], p[0]]],
            [[r[3], r[2]], [r[1], r[0]]],
            true,
        )
    }

    pub fn p_z(&self) -> f64 {
        self.p_z
    }

    pub fn p_u(&self) -> f64 {
        self.p_u
    }

    /// Pr(A=1 | Z=z, U=u).
    pub fn p(&self, z: usize, u: usize) -> f64 {
        self.treat[z][u]
    }

    /// E(Y | A=a, U=u).
    pub fn r(&self, a: usize, u: usize) -> f64 {
        self.outcome[a][u]
    }

    pub fn treat(&self) -> [[f64; 2]; 2] {
        self.treat
    }

    pub fn outcome(&self) -> [[f64; 2]; 2] {
        self.outcome
    }

    pub fn binary_outcome(&self) -> bool {
        self.binary_outcome
    }

    /// `(p11, p10, p01, p00)`.
    pub fn p_table(&self) -> [f64; 4] {
        [
            self.treat[1][1],
            self.treat[1][0],
            self.treat[0][1],
            self.treat[0][0],
        ]
    }

    /// `(r11, r10, r01, r00)`.
    pub fn r_table(&self) -> [f64; 4] {
        [
            self.outcome[1][1],
            self.outcome[1][0],
            self.outcome[0][1],
            self.outcome[0][0],
        ]
    }

    pub fn to_discrete(&self) -> DiscreteScenario {
        let mean = |a: usize| vec![self.outcome[a].to_vec(), self.outcome[a].to_vec()];
        DiscreteScenario {
            z_support: vec![0.0, 1.0],
            z_pmf: vec![1.0 - self.p_z, self.p_z],
            u_support: vec![0.0, 1.0],
            u_pmf: vec![1.0 - self.p_u, self.p_u],
            treat: vec![self.treat[0].to_vec(), self.treat[1].to_vec()],
            outcome_mean: [mean(0), mean(1)],
            outcome_law: None,
            binary_outcome: self.binary_outcome,
            direct_effect: false,
        }
    }
}

/// A finite conditional outcome distribution as `(value, probability)` pairs.
pub type OutcomeLaw = Vec<(f64, f64)>;

/// Unvalidated components of a [`DiscreteScenario`].
///
/// Table indices are support positions: `treat[i][j]` is Pr(A=1 | Z=z_i, U=u_j),
/// `outcome_mean[a][i][j]` is E(Y | A=a, Z=z_i, U=u_j) and
/// `outcome_law[a][j]` is the law of Y given (A=a, U=u_j).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteParts {
    pub z_support: Vec<f64>,
    pub z_pmf: Vec<f64>,
    pub u_support: Vec<f64>,
    pub u_pmf: Vec<f64>,
    pub treat: Vec<Vec<f64>>,
    pub outcome_mean: [Vec<Vec<f64>>; 2],
    pub outcome_law: Option<[Vec<OutcomeLaw>; 2]>,
    pub binary_outcome: bool,
    /// Allows E(Y | A, Z, U) to vary with Z (an arrow from Z to Y).
    pub direct_effect: bool,
}

/// General finite-support instrument and confounder, independent of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScenario {
    z_support: Vec<f64>,
    z_pmf: Vec<f64>,
    u_support: Vec<f64>,
    u_pmf: Vec<f64>,
    treat: Vec<Vec<f64>>,
    outcome_mean: [Vec<Vec<f64>>; 2],
    outcome_law: Option<[Vec<OutcomeLaw>; 2]>,
    binary_outcome: bool,
    direct_effect: bool,
}

impl DiscreteScenario {
    pub fn new(parts: DiscreteParts) -> Result<Self> {
        let DiscreteParts {
            z_support,
            z_pmf,
            u_support,
            u_pmf,
            treat,
            outcome_mean,
            outcome_law,
            binary_outcome,
            direct_effect,
        } = parts;

        check_support("z_support", &z_support)?;
        check_support("u_support", &u_support)?;
        check_pmf("z_pmf", &z_pmf)?;
        check_pmf("u_pmf", &u_pmf)?;
        let (nz, nu) = (z_support.len(), u_support.len());
        if z_pmf.len() != nz {
            return Err(Error::invariant(
                "z_pmf",
                format!("has {} entries but z_support has {nz}", z_pmf.len()),
            ));
        }
        if u_pmf.len() != nu {
            return Err(Error::invariant(
                "u_pmf",
                format!("has {} entries but u_support has {nu}", u_pmf.len()),
            ));
        }

        if treat.len() != nz || treat.iter().any(|row| row.len() != nu) {
            return Err(Error::invariant(
                "treat",
                format!("table must be {nz}x{nu}"),
            ));
        }
        for (i, row) in treat.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                check_probability(&format!("treat[{i}][{j}]"), t)?;
            }
        }

        for (a, table) in outcome_mean.iter().enumerate() {
            if table.len() != nz || table.iter().any(|row| row.len() != nu) {
                return Err(Error::invariant(
                    format!("mean[{a}]"),
                    format!("table must be {nz}x{nu}"),
                ));
            }
            for (i, row) in table.iter().enumerate() {
                for (j, &m) in row.iter().enumerate() {
                    let field = format!("mean[{a}][{i}][{j}]");
                    if binary_outcome {
                        check_probability(&field, m)?;
                    } else {
                        check_finite(&field, m)?;
                    }
                }
            }
            if !direct_effect {
                for j in 0..nu {
                    let first = table[0][j];
                    if let Some(i) = (1..nz).find(|&i| (table[i][j] - first).abs() > VALIDATION_TOL)
                    {
                        return Err(Error::invariant(
                            format!("mean[{a}][{i}][{j}]"),
                            "outcome mean varies with z; set direct_effect = true to allow an arrow from Z to Y",
                        ));
                    }
                }
            }
        }

        if let Some(laws) = &outcome_law {
            for (a, per_u) in laws.iter().enumerate() {
                if per_u.len() != nu {
                    return Err(Error::invariant(
                        format!("law[{a}]"),
                        format!("needs one law per u level ({nu})"),
                    ));
                }
                for (j, law) in per_u.iter().enumerate() {
                    let field = format!("law[{a}][{j}]");
                    if law.is_empty() {
                        return Err(Error::invariant(field, "law has no support points"));
                    }
                    for &(v, p) in law {
                        check_finite(&field, v)?;
                        if !p.is_finite() || p < 0.0 {
                            return Err(Error::invariant(
                                &field,
                                format!("probability {p} is negative"),
                            ));
                        }
                        if binary_outcome && v != 0.0 && v != 1.0 {
                            return Err(Error::invariant(
                                &field,
                                format!("value {v} is not 0 or 1 for a binary outcome"),
                            ));
                        }
                    }
                    let total = numeric::sum(law.iter().map(|&(_, p)| p));
                    if (total - 1.0).abs() > VALIDATION_TOL {
                        return Err(Error::invariant(
                            field,
                            format!("probabilities sum to {total}, not 1"),
                        ));
                    }
                    let mean = numeric::sum(law.iter().map(|&(v, p)| v * p)) / total;
                    for i in 0..nz {
                        let m = outcome_mean[a][i][j];
                        if (mean - m).abs() > VALIDATION_TOL * m.abs().max(1.0) {
                            return Err(Error::invariant(
                                field,
                                format!("law mean {mean} differs from mean[{a}][{i}][{j}] = {m}"),
                            ));
                        }
                    }
                }
            }
        }

        Ok(DiscreteScenario {
            z_support,
            z_pmf: normalized(z_pmf),
            u_support,
            u_pmf: normalized(u_pmf),
            treat,
            outcome_mean,
            outcome_law,
            binary_outcome,
            direct_effect,
        })
    }

    pub fn into_parts(self) -> DiscreteParts {
        DiscreteParts {
            z_support: self.z_support,
            z_pmf: self.z_pmf,
            u_support: self.u_support,
            u_pmf: self.u_pmf,
            treat: self.treat,
            outcome_mean: self.outcome_mean,
            outcome_law: self.outcome_law,
            binary_outcome: self.binary_outcome,
            direct_effect: self.direct_effect,
        }
    }

    pub fn z_support(&self) -> &[f64] {
        &self.z_support
    }

    pub fn z_pmf(&self) -> &[f64] {
        &self.z_pmf
    }

    pub fn u_support(&self) -> &[f64] {
        &self.u_support
    }

    pub fn u_pmf(&self) -> &[f64] {
        &self.u_pmf
    }

    pub fn nz(&self) -> usize {
        self.z_support.len()
    }

    pub fn nu(&self) -> usize {
        self.u_support.len()
    }

    /// Pr(A=1 | Z=z_i, U=u_j).
    pub fn treat(&self, i: usize, j: usize) -> f64 {
        self.treat[i][j]
    }

    /// Pr(A=a | Z=z_i, U=u_j).
    pub fn treat_arm(&self, a: usize, i: usize, j: usize) -> f64 {
        if a == 1 {
            self.treat[i][j]
        } else {
            1.0 - self.treat[i][j]
        }
    }

    /// E(Y | A=a, Z=z_i, U=u_j).
    pub fn mean(&self, a: usize, i: usize, j: usize) -> f64 {
        self.outcome_mean[a][i][j]
    }

    pub fn outcome_law(&self) -> Option<&[Vec<OutcomeLaw>; 2]> {
        self.outcome_law.as_ref()
    }

    pub fn binary_outcome(&self) -> bool {
        self.binary_outcome
    }

    pub fn direct_effect(&self) -> bool {
        self.direct_effect
    }

    /// Pr(Z=z_i) Pr(U=u_j); the joint law of the independent pair.
    pub fn cell_weight(&self, i: usize, j: usize) -> f64 {
        self.z_pmf[i] * self.u_pmf[j]
    }

    /// Propensity score Π(z_i) = Pr(A=1 | Z=z_i) for every instrument level.
    pub fn propensity(&self) -> Vec<f64> {
        (0..self.nz())
            .map(|i| numeric::sum((0..self.nu()).map(|j| self.treat[i][j] * self.u_pmf[j])))
            .collect()
    }

    /// Pr(A=1 | U=u_j) for every confounder level.
    pub fn treat_given_u(&self) -> Vec<f64> {
        (0..self.nu())
            .map(|j| numeric::sum((0..self.nz()).map(|i| self.treat[i][j] * self.z_pmf[i])))
            .collect()
    }

    /// E(Y | A=a, U=u_j). Without a direct effect this is the outcome table
    /// itself; otherwise it averages over Pr(Z | A=a, U=u_j) and is `None`
    /// where that conditioning event is empty.
    pub fn mean_given_u(&self, a: usize, j: usize) -> Option<f64> {
        if !self.direct_effect {
            return Some(self.outcome_mean[a][0][j]);
        }
        let den = numeric::sum((0..self.nz()).map(|i| self.z_pmf[i] * self.treat_arm(a, i, j)));
        if den <= 0.0 {
            return None;
        }
        let num = numeric::sum(
            (0..self.nz())
                .map(|i| self.z_pmf[i] * self.treat_arm(a, i, j) * self.outcome_mean[a][i][j]),
        );
        Some(num / den)
    }

    /// Replaces the outcome by the indicator I(Y > y). Uses the outcome law,
    /// or the implied Bernoulli law when the outcome is binary.
    pub fn dichotomize(&self, y: f64) -> Result<DiscreteScenario> {
        let nz = self.nz();
        let (outcome_mean, direct_effect) = match &self.outcome_law {
            Some(laws) => {
                let table = |a: usize| {
                    let row: Vec<f64> = laws[a]
                        .iter()
                        .map(|law| {
                            numeric::sum(law.iter().filter(|&&(v, _)| v > y).map(|&(_, p)| p))
                                .clamp(0.0, 1.0)
                        })
                        .collect();
                    vec![row; nz]
                };
                ([table(0), table(1)], false)
            }
            None if self.binary_outcome => {
                let exceed = |m: f64| {
                    if y < 0.0 {
                        1.0
                    } else if y < 1.0 {
                        m
                    } else {
                        0.0
                    }
                };
                let table = |a: usize| -> Vec<Vec<f64>> {
                    self.outcome_mean[a]
                        .iter()
                        .map(|row| row.iter().map(|&m| exceed(m)).collect())
                        .collect()
                };
                ([table(0), table(1)], self.direct_effect)
            }
            None => return Err(Error::MissingOutcomeLaw),
        };
        DiscreteScenario::new(DiscreteParts {
            z_support: self.z_support.clone(),
            z_pmf: self.z_pmf.clone(),
            u_support: self.u_support.clone(),
            u_pmf: self.u_pmf.clone(),
            treat: self.treat.clone(),
            outcome_mean,
            outcome_law: None,
            binary_outcome: true,
            direct_effect,
        })
    }

    /// Merges instrument levels whose propensity scores differ by at most
    /// `tol` (single linkage over the sorted scores). The merged levels are
    /// labelled by their propensity score, so the result has an injective,
    /// increasing propensity.
    pub fn collapse_by_propensity(&self, tol: f64) -> DiscreteScenario {
        let pi = self.propensity();
        let mut order: Vec<usize> = (0..self.nz()).collect();
        order.sort_by(|&a, &b| pi[a].total_cmp(&pi[b]));

        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match groups.last_mut() {
                Some(g) if pi[i] - pi[*g.last().unwrap()] <= tol => g.push(i),
                _ => groups.push(vec![i]),
            }
        }

        let nu = self.nu();
        let mut z_pmf = Vec::with_capacity(groups.len());
        let mut treat = Vec::with_capacity(groups.len());
        let mut outcome_mean: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for g in &groups {
            let mass = numeric::sum(g.iter().map(|&i| self.z_pmf[i]));
            // Levels without mass still need a label; weight them equally.
            let weight = |i: usize| {
                if mass > 0.0 {
                    self.z_pmf[i] / mass
                } else {
                    1.0 / g.len() as f64
                }
            };
            z_pmf.push(mass);
            let row: Vec<f64> = (0..nu)
                .map(|j| {
                    numeric::sum(g.iter().map(|&i| weight(i) * self.treat[i][j])).clamp(0.0, 1.0)
                })
                .collect();
            treat.push(row);
            for (a, table) in outcome_mean.iter_mut().enumerate() {
                let row = (0..nu)
                    .map(|j| {
                        if !self.direct_effect {
                            return self.outcome_mean[a][g[0]][j];
                        }
                        // Weighting by Pr(Z=z, A=a | U=u) keeps E(Y | A, merged level, U) exact.
                        let den =
                            numeric::sum(g.iter().map(|&i| weight(i) * self.treat_arm(a, i, j)));
                        if den > 0.0 {
                            numeric::sum(g.iter().map(|&i| {
                                weight(i) * self.treat_arm(a, i, j) * self.outcome_mean[a][i][j]
                            })) / den
                        } else {
                            numeric::sum(g.iter().map(|&i| weight(i) * self.outcome_mean[a][i][j]))
                        }
                    })
                    .collect();
                table.push(row);
            }
        }
        let z_support: Vec<f64> = treat
            .iter()
            .map(|row: &Vec<f64>| numeric::sum(row.iter().zip(&self.u_pmf).map(|(t, p)| t * p)))
            .collect();

        DiscreteScenario {
            z_support,
            z_pmf,
            u_support: self.u_support.clone(),
            u_pmf: self.u_pmf.clone(),
            treat,
            outcome_mean,
            outcome_law: self.outcome_law.clone(),
            binary_outcome: self.binary_outcome,
            direct_effect: self.direct_effect,
        }
    }
}

/// Propensity score Π(z) = Pr(A=1 | Z=z) for each instrument level.
pub fn propensity(s: &DiscreteScenario) -> Vec<f64> {
    s.propensity()
}

/// See [`DiscreteScenario::collapse_by_propensity`]; `None` uses [`MERGE_TOL`].
pub fn collapse_by_propensity(s: &DiscreteScenario, tol: Option<f64>) -> DiscreteScenario {
    s.collapse_by_propensity(tol.unwrap_or(MERGE_TOL))
}

/// One support point of the joint law of (Y(1), Y(0)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomePair {
    pub y1: f64,
    pub y0: f64,
    pub prob: f64,
}

/// A world described by its propensity score Π and the potential outcomes
/// U = {Y(1), Y(0)}, with Π independent of U.
///
/// `treat[k][j]` is Pr(A=1 | Π=π_k, (Y(1), Y(0)) = pairs[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutcomeScenario {
    pi_support: Vec<f64>,
    pi_pmf: Vec<f64>,
    pairs: Vec<OutcomePair>,
    treat: Vec<Vec<f64>>,
}

impl PotentialOutcomeScenario {
    pub fn new(
        pi_support: Vec<f64>,
        pi_pmf: Vec<f64>,
        pairs: Vec<OutcomePair>,
        treat: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_support("pi_support", &pi_support)?;
        for (k, &pi) in pi_support.iter().enumerate() {
            check_probability(&format!("pi_support[{k}]"), pi)?;
        }
        check_pmf("pi_pmf", &pi_pmf)?;
        if pi_pmf.len() != pi_support.len() {
            return Err(Error::invariant(
                "pi_pmf",
                format!(
                    "has {} entries but pi_support has {}",
                    pi_pmf.len(),
                    pi_support.len()
                ),
            ));
        }
        let probs: Vec<f64> = pairs.iter().map(|p| p.prob).collect();
        check_pmf("y_pairs", &probs)?;
        for (j, p) in pairs.iter().enumerate() {
            check_finite(&format!("y_pairs[{j}]"), p.y1)?;
            check_finite(&format!("y_pairs[{j}]"), p.y0)?;
            if pairs[..j].iter().any(|q| q.y1 == p.y1 && q.y0 == p.y0) {
                return Err(Error::invariant(
                    format!("y_pairs[{j}]"),
                    format!("pair ({}, {}) listed twice", p.y1, p.y0),
                ));
            }
        }
        if treat.len() != pi_support.len() || treat.iter().any(|row| row.len() != pairs.len()) {
            return Err(Error::invariant(
                "treat",
                format!("table must be {}x{}", pi_support.len(), pairs.len()),
            ));
        }
        for (k, row) in treat.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                check_probability(&format!("treat[{k}][{j}]"), t)?;
            }
            let implied = numeric::sum(row.iter().zip(&pairs).map(|(t, p)| t * p.prob));
            if (implied - pi_support[k]).abs() > VALIDATION_TOL {
                return Err(Error::invariant(
                    format!("treat[{k}]"),
                    format!(
                        "Pr(A=1 | Π=π) must equal π: got {implied} at π = {}",
                        pi_support[k]
                    ),
                ));
            }
        }
        let total = numeric::sum(probs.iter().copied());
        let pairs = pairs
            .into_iter()
            .map(|p| OutcomePair {
                prob: p.prob / total,
                ..p
            })
            .collect();
        Ok(PotentialOutcomeScenario {
            pi_support,
            pi_pmf: normalized(pi_pmf),
            pairs,
            treat,
        })
    }

    pub fn pi_support(&self) -> &[f64] {
        &self.pi_support
    }

    pub fn pi_pmf(&self) -> &[f64] {
        &self.pi_pmf
    }

    pub fn pairs(&self) -> &[OutcomePair] {
        &self.pairs
    }

    pub fn treat(&self, k: usize, j: usize) -> f64 {
        self.treat[k][j]
    }

    pub fn treat_table(&self) -> &[Vec<f64>] {
        &self.treat
    }

    /// True when every potential outcome is 0 or 1.
    pub fn binary_outcome(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| (p.y1 == 0.0 || p.y1 == 1.0) && (p.y0 == 0.0 || p.y0 == 1.0))
    }
}

/// One level of an observed covariate X.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub label: String,
    pub weight: f64,
    pub scenario: DiscreteScenario,
}

/// Scenarios conditional on the levels of an observed covariate X, with the law of X.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateFamily {
    strata: Vec<Stratum>,
}

impl CovariateFamily {
    pub fn new(strata: Vec<Stratum>) -> Result<Self> {
        let weights: Vec<f64> = strata.iter().map(|s| s.weight).collect();
        check_pmf("stratum weights", &weights)?;
        for (i, s) in strata.iter().enumerate() {
            if s.label.is_empty() || s.label.chars().any(char::is_whitespace) {
                return Err(Error::invariant(
                    format!("stratum {i}"),
                    "label must be a non-empty word",
                ));
            }
            if strata[..i].iter().any(|t| t.label == s.label) {
                return Err(Error::invariant(
                    format!("stratum {}", s.label),
                    "label used twice",
                ));
            }
        }
        Ok(CovariateFamily { strata })
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }
}

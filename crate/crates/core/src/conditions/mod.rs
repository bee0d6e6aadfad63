//! Checkers for the sufficient conditions of bias amplification.
//!
//! Each check returns a [`ConditionReport`] whose witnesses name the cells
//! that violate the condition. Weak inequalities are tested with slack
//! [`ORDER_TOL`]; fitted treatment models are accepted when their residual
//! is at most [`MODEL_FIT_TOL`].

mod binary;
mod potential;

pub use binary::{check_cor1, check_cor2, check_lemma_s5, check_lemma_s7, check_weaker_condition};
pub use potential::{
    check_cor3, check_cor4, check_thm4, check_thm5_binary, fit_cor3, fit_cor4, Cor3Model, Cor4Model,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{level_means, EstimateSet};
use crate::json::serialize_g17;
use crate::numeric::sum;
use crate::scenario::DiscreteScenario;
use crate::{MODEL_FIT_TOL, ORDER_TOL};

/// A cell where a condition fails: the condition reads `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub cell: String,
    #[serde(serialize_with = "serialize_g17")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub rhs: f64,
}

/// Outcome of one condition. `margin` is the smallest slack `rhs − lhs`
/// over all comparisons (0 when there is nothing to compare), so it is
/// negative exactly when the condition fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition_id: String,
    pub holds: bool,
    #[serde(serialize_with = "serialize_g17")]
    pub margin: f64,
    pub witnesses: Vec<Witness>,
}

/// The reports making up the hypotheses of one theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionBundle {
    pub theorem: String,
    pub holds: bool,
    pub reports: Vec<ConditionReport>,
}

impl ConditionBundle {
    pub fn new(theorem: impl Into<String>, reports: Vec<ConditionReport>) -> Self {
        ConditionBundle {
            theorem: theorem.into(),
            holds: reports.iter().all(|r| r.holds),
            reports,
        }
    }

    pub fn report(&self, id: &str) -> Option<&ConditionReport> {
        self.reports.iter().find(|r| r.condition_id == id)
    }
}

/// Accumulates `lhs ≤ rhs` comparisons into a report.
pub(crate) struct Check {
    id: String,
    margin: Option<f64>,
    witnesses: Vec<Witness>,
}

impl Check {
    pub(crate) fn new(id: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            margin: None,
            witnesses: Vec::new(),
        }
    }

    pub(crate) fn le(&mut self, cell: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        self.margin = Some(self.margin.map_or(slack, |m| m.min(slack)));
        if slack < -ORDER_TOL {
            self.witnesses.push(Witness {
                cell: cell(),
                lhs,
                rhs,
            });
        }
    }

    pub(crate) fn ge(&mut self, cell: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        self.le(cell, rhs, lhs);
    }

    /// `values` must not decrease along the slice.
    pub(crate) fn nondecreasing(&mut self, values: &[(String, f64)]) {
        for w in values.windows(2) {
            self.le(|| format!("{} vs {}", w[0].0, w[1].0), w[0].1, w[1].1);
        }
    }

    pub(crate) fn nonincreasing(&mut self, values: &[(String, f64)]) {
        for w in values.windows(2) {
            self.le(|| format!("{} vs {}", w[1].0, w[0].0), w[1].1, w[0].1);
        }
    }

    pub(crate) fn finish(self) -> ConditionReport {
        ConditionReport {
            condition_id: self.id,
            holds: self.witnesses.is_empty(),
            margin: self.margin.unwrap_or(0.0),
            witnesses: self.witnesses,
        }
    }
}

fn z_label(s: &DiscreteScenario, i: usize) -> String {
    format!("z={}", s.z_support()[i])
}

fn u_label(s: &DiscreteScenario, j: usize) -> String {
    format!("u={}", s.u_support()[j])
}

/// E(Y | A=a, U=u) non-decreasing in u for both arms.
fn outcome_monotone_in_u(check: &mut Check, s: &DiscreteScenario) {
    for a in [0, 1] {
        let values: Vec<(String, f64)> = (0..s.nu())
            .filter_map(|j| {
                s.mean_given_u(a, j)
                    .map(|m| (format!("a={a}, {}", u_label(s, j)), m))
            })
            .collect();
        check.nondecreasing(&values);
    }
}

/// μ_a(z) = E(Y | A=a, Z=z) non-increasing in z for both arms.
fn stratum_means_nonincreasing(id: &str, s: &DiscreteScenario) -> Result<ConditionReport> {
    let levels = level_means(s)?;
    let mut check = Check::new(id);
    for a in [0, 1] {
        let values: Vec<(String, f64)> = levels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                l.map(|l| {
                    (
                        format!("a={a}, {}", z_label(s, i)),
                        if a == 1 { l.mu1 } else { l.mu0 },
                    )
                })
            })
            .collect();
        check.nonincreasing(&values);
    }
    Ok(check.finish())
}

/// Hypotheses of the general scalar theorem: monotone treatment and outcome
/// dependence (a1–a3) and stratum means decreasing in the instrument (b).
pub fn check_thm1(s: &DiscreteScenario) -> Result<ConditionBundle> {
    let pi = s.propensity();
    let mut a1 = Check::new("thm1.a1");
    a1.nondecreasing(
        &pi.iter()
            .enumerate()
            .map(|(i, &p)| (z_label(s, i), p))
            .collect::<Vec<_>>(),
    );

    let mut a2 = Check::new("thm1.a2");
    let by_u = s.treat_given_u();
    a2.nondecreasing(
        &by_u
            .iter()
            .enumerate()
            .map(|(j, &p)| (u_label(s, j), p))
            .collect::<Vec<_>>(),
    );

    let mut a3 = Check::new("thm1.a3");
    outcome_monotone_in_u(&mut a3, s);
    let b = stratum_means_nonincreasing("thm1.b", s)?;
    Ok(ConditionBundle::new(
        "thm1",
        vec![a1.finish(), a2.finish(), a3.finish(), b],
    ))
}

/// Treatment model `Pr(A=1 | z, u) = β(z) + γ(u)` with E[γ(U)] = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditiveDecomposition {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub residual_max: f64,
}

/// Treatment model `Pr(A=1 | z, u) = β(z)·γ(u)` with E[γ(U)] = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicativeDecomposition {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub residual_max: f64,
}

impl AdditiveDecomposition {
    pub fn holds(&self) -> bool {
        self.residual_max <= MODEL_FIT_TOL
    }
}

impl MultiplicativeDecomposition {
    pub fn holds(&self) -> bool {
        self.residual_max <= MODEL_FIT_TOL
    }
}

fn residual(s: &DiscreteScenario, model: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..s.nz() {
        for j in 0..s.nu() {
            worst = worst.max((s.treat(i, j) - model(i, j)).abs());
        }
    }
    worst
}

pub fn fit_additive(s: &DiscreteScenario) -> AdditiveDecomposition {
    let beta = s.propensity();
    let f = sum(beta.iter().zip(s.z_pmf()).map(|(b, p)| b * p));
    let gamma: Vec<f64> = s.treat_given_u().into_iter().map(|p| p - f).collect();
    let residual_max = residual(s, |i, j| beta[i] + gamma[j]);
    AdditiveDecomposition {
        beta,
        gamma,
        residual_max,
    }
}

pub fn fit_multiplicative(s: &DiscreteScenario) -> Result<MultiplicativeDecomposition> {
    for i in 0..s.nz() {
        for j in 0..s.nu() {
            if s.treat(i, j) <= 0.0 {
                return Err(Error::NonPositiveCell(format!("treat[{i}][{j}]")));
            }
        }
    }
    let beta = s.propensity();
    let f = sum(beta.iter().zip(s.z_pmf()).map(|(b, p)| b * p));
    let gamma: Vec<f64> = s.treat_given_u().into_iter().map(|p| p / f).collect();
    let residual_max = residual(s, |i, j| beta[i] * gamma[j]);
    Ok(MultiplicativeDecomposition {
        beta,
        gamma,
        residual_max,
    })
}

/// The largest confounder level with positive mass given (A=a, Z=z) must
/// not depend on z.
fn supremum_depends_only_on_arm(id: &str, s: &DiscreteScenario) -> ConditionReport {
    let mut check = Check::new(id);
    for a in [0, 1] {
        let tops: Vec<(usize, f64)> = (0..s.nz())
            .filter(|&i| s.z_pmf()[i] > 0.0)
            .filter_map(|i| {
                (0..s.nu())
                    .rev()
                    .find(|&j| s.u_pmf()[j] > 0.0 && s.treat_arm(a, i, j) > 0.0)
                    .map(|j| (i, s.u_support()[j]))
            })
            .collect();
        if let Some(&(first, top)) = tops.first() {
            for &(i, other) in &tops[1..] {
                let gap = (other - top).abs();
                check.le(
                    || format!("a={a}, sup U at {} vs {}", z_label(s, i), z_label(s, first)),
                    gap,
                    0.0,
                );
            }
        }
    }
    check.finish()
}

fn fit_report(id: &str, residual_max: f64) -> ConditionReport {
    let mut check = Check::new(id);
    check.le(|| "residual_max".to_owned(), residual_max, MODEL_FIT_TOL);
    check.finish()
}

fn monotone_components(
    id: &str,
    s: &DiscreteScenario,
    beta: &[f64],
    gamma: &[f64],
) -> ConditionReport {
    let mut check = Check::new(id);
    let b: Vec<(String, f64)> = beta
        .iter()
        .enumerate()
        .map(|(i, &v)| (format!("β({})", z_label(s, i)), v))
        .collect();
    let g: Vec<(String, f64)> = gamma
        .iter()
        .enumerate()
        .map(|(j, &v)| (format!("γ({})", u_label(s, j)), v))
        .collect();
    check.nondecreasing(&b);
    check.nondecreasing(&g);
    outcome_monotone_in_u(&mut check, s);
    check.finish()
}

/// Additive treatment model with monotone components and a confounder
/// supremum that depends only on the arm.
pub fn check_thm2(s: &DiscreteScenario) -> ConditionBundle {
    let fit = fit_additive(s);
    ConditionBundle::new(
        "thm2",
        vec![
            fit_report("thm2.a", fit.residual_max),
            monotone_components("thm2.b", s, &fit.beta, &fit.gamma),
            supremum_depends_only_on_arm("thm2.c", s),
        ],
    )
}

/// As [`check_thm2`] with a multiplicative treatment model.
pub fn check_thm3(s: &DiscreteScenario) -> Result<ConditionBundle> {
    let fit = fit_multiplicative(s)?;
    Ok(ConditionBundle::new(
        "thm3",
        vec![
            fit_report("thm3.a'", fit.residual_max),
            monotone_components("thm3.b", s, &fit.beta, &fit.gamma),
            supremum_depends_only_on_arm("thm3.c", s),
        ],
    ))
}

/// A named table indexed by (z level, u level).
type CellFn<'a> = Box<dyn Fn(usize, usize) -> f64 + 'a>;

/// With a direct arrow from Z to Y: treatment and outcome tables monotone
/// in both coordinates (a'), and stratum means decreasing in z (b).
pub fn check_thm7(s: &DiscreteScenario) -> Result<ConditionBundle> {
    let mut a = Check::new("thm7.a'");
    let mut tables: Vec<(String, CellFn<'_>)> =
        vec![("treat".to_owned(), Box::new(|i, j| s.treat(i, j)))];
    for arm in [0, 1] {
        tables.push((
            format!("mean[{arm}]"),
            Box::new(move |i, j| s.mean(arm, i, j)),
        ));
    }
    for (name, value) in &tables {
        for j in 0..s.nu() {
            let col: Vec<(String, f64)> = (0..s.nz())
                .map(|i| {
                    (
                        format!("{name} at {}, {}", z_label(s, i), u_label(s, j)),
                        value(i, j),
                    )
                })
                .collect();
            a.nondecreasing(&col);
        }
        for i in 0..s.nz() {
            let row: Vec<(String, f64)> = (0..s.nu())
                .map(|j| {
                    (
                        format!("{name} at {}, {}", z_label(s, i), u_label(s, j)),
                        value(i, j),
                    )
                })
                .collect();
            a.nondecreasing(&row);
        }
    }
    let b = stratum_means_nonincreasing("thm7.b", s)?;
    Ok(ConditionBundle::new("thm7", vec![a.finish(), b]))
}

/// Conditioning on A=a shifts the law of U downwards as z rises:
/// F(u | A=a, Z=z) is non-decreasing in z for every u. When the treatment
/// model is exactly multiplicative and a = 1, Z and U must moreover be
/// independent given A=1.
pub fn check_collider_association(s: &DiscreteScenario, a: usize) -> Result<ConditionReport> {
    let mut check = Check::new(format!("collider.a{a}"));
    let mut cdfs: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in 0..s.nz() {
        if s.z_pmf()[i] <= 0.0 {
            continue;
        }
        let joint: Vec<f64> = (0..s.nu())
            .map(|j| s.u_pmf()[j] * s.treat_arm(a, i, j))
            .collect();
        let total = sum(joint.iter().copied());
        if total <= 0.0 {
            return Err(Error::UndefinedStratum {
                arm: a as u8,
                level: format!("z = {}", s.z_support()[i]),
            });
        }
        let mut running = 0.0;
        let cdf = joint
            .iter()
            .map(|p| {
                running += p;
                running / total
            })
            .collect();
        cdfs.push((i, cdf));
    }
    // The top level is 1 for every z; compare the others.
    for j in 0..s.nu().saturating_sub(1) {
        let values: Vec<(String, f64)> = cdfs
            .iter()
            .map(|(i, cdf)| {
                (
                    format!("F({} | A={a}, {})", u_label(s, j), z_label(s, *i)),
                    cdf[j],
                )
            })
            .collect();
        check.nondecreasing(&values);
    }
    let multiplicative =
        a == 1 && fit_multiplicative(s).is_ok_and(|fit| fit.residual_max <= ORDER_TOL);
    if multiplicative {
        for j in 0..s.nu().saturating_sub(1) {
            for w in cdfs.windows(2) {
                let gap = (w[1].1[j] - w[0].1[j]).abs();
                check.le(
                    || {
                        format!(
                            "independence at {} between {} and {}",
                            u_label(s, j),
                            z_label(s, w[0].0),
                            z_label(s, w[1].0)
                        )
                    },
                    gap,
                    0.0,
                );
            }
        }
    }
    Ok(check.finish())
}

/// Ordering and amplification on one target population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotVerdict {
    /// adj ≥ unadj ≥ true.
    pub signed_ordering: bool,
    /// |adj − true| ≥ |unadj − true|.
    pub amplification: bool,
}

/// Whether adjustment for the instrument amplified bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZBiasVerdict {
    pub treated: SlotVerdict,
    pub control: SlotVerdict,
    pub all: SlotVerdict,
    /// Strict amplification on the whole population beyond [`ORDER_TOL`].
    pub zbias: bool,
    /// The two absolute biases on the whole population agree within [`ORDER_TOL`].
    pub tie: bool,
}

impl ZBiasVerdict {
    pub fn signed_ordering(&self) -> bool {
        self.treated.signed_ordering && self.control.signed_ordering && self.all.signed_ordering
    }
}

fn slot(adj: f64, unadj: f64, truth: f64) -> SlotVerdict {
    SlotVerdict {
        signed_ordering: adj - unadj >= -ORDER_TOL && unadj - truth >= -ORDER_TOL,
        amplification: (adj - truth).abs() - (unadj - truth).abs() >= -ORDER_TOL,
    }
}

pub fn zbias_verdict(e: &EstimateSet) -> ZBiasVerdict {
    let excess = (e.adj_all - e.true_all).abs() - (e.unadj - e.true_all).abs();
    ZBiasVerdict {
        treated: slot(e.adj_treated, e.unadj, e.true_treated),
        control: slot(e.adj_control, e.unadj, e.true_control),
        all: slot(e.adj_all, e.unadj, e.true_all),
        zbias: excess > ORDER_TOL,
        tie: excess.abs() <= ORDER_TOL,
    }
}

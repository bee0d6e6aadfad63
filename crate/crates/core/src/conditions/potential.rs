//! Conditions for a general instrument summarized by its propensity score,
//! with the potential outcomes as the confounder.

use serde::Serialize;

use super::{Check, ConditionBundle, ConditionReport};
use crate::error::{Error, Result};
use crate::estimators::{arm_means, propensity_covariances};
use crate::numeric::sum;
use crate::scenario::PotentialOutcomeScenario;
use crate::MODEL_FIT_TOL;

/// `Pr(A=1 | Π, U) = α + Π + δ·Y(1) + η·Y(0) + θ·Y(1)Y(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cor3Model {
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub theta: f64,
    pub residual_max: f64,
}

/// `Pr(A=1 | Π, U) = α·Π·δ^Y(1)·η^Y(0)·θ^(Y(1)Y(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cor4Model {
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub theta: f64,
    pub residual_max: f64,
}

/// Positions of the pairs (y1, y0) ∈ {0,1}² as `idx[y1][y0]`.
fn binary_cells(s: &PotentialOutcomeScenario) -> Result<[[usize; 2]; 2]> {
    if !s.binary_outcome() {
        let bad = s
            .pairs()
            .iter()
            .find(|p| ![0.0, 1.0].contains(&p.y1) || ![0.0, 1.0].contains(&p.y0))
            .map(|p| format!("pair ({}, {})", p.y1, p.y0))
            .unwrap_or_default();
        return Err(Error::NonBinaryOutcome(bad));
    }
    let mut idx = [[usize::MAX; 2]; 2];
    for (j, p) in s.pairs().iter().enumerate() {
        idx[p.y1 as usize][p.y0 as usize] = j;
    }
    if idx.iter().flatten().any(|&j| j == usize::MAX) {
        return Err(Error::invariant(
            "y_pairs",
            "all four (y1, y0) combinations must be listed to fit a treatment model",
        ));
    }
    Ok(idx)
}

/// Joint law P[y1][y0] of the binary potential outcomes; absent pairs have mass 0.
fn joint(s: &PotentialOutcomeScenario) -> Result<[[f64; 2]; 2]> {
    if !s.binary_outcome() {
        return binary_cells(s).map(|_| [[0.0; 2]; 2]);
    }
    let mut p = [[0.0; 2]; 2];
    for pair in s.pairs() {
        p[pair.y1 as usize][pair.y0 as usize] += pair.prob;
    }
    Ok(p)
}

fn weighted_mean(s: &PotentialOutcomeScenario, per_level: &[f64]) -> f64 {
    sum(per_level.iter().zip(s.pi_pmf()).map(|(c, w)| c * w))
}

fn residual(
    s: &PotentialOutcomeScenario,
    idx: &[[usize; 2]; 2],
    model: impl Fn(f64, usize, usize) -> f64,
) -> f64 {
    let mut worst = 0.0_f64;
    for (k, &pi) in s.pi_support().iter().enumerate() {
        for y1 in 0..2 {
            for y0 in 0..2 {
                worst = worst.max((s.treat(k, idx[y1][y0]) - model(pi, y1, y0)).abs());
            }
        }
    }
    worst
}

/// Fits the additive model exactly at each propensity level and averages
/// the coefficients over the law of Π; the residual measures how far the
/// coefficients vary with π.
pub fn fit_cor3(s: &PotentialOutcomeScenario) -> Result<Cor3Model> {
    let idx = binary_cells(s)?;
    let mut coef = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (k, &pi) in s.pi_support().iter().enumerate() {
        let t = |y1: usize, y0: usize| s.treat(k, idx[y1][y0]);
        coef[0].push(t(0, 0) - pi);
        coef[1].push(t(1, 0) - t(0, 0));
        coef[2].push(t(0, 1) - t(0, 0));
        coef[3].push(t(1, 1) - t(1, 0) - t(0, 1) + t(0, 0));
    }
    let [alpha, delta, eta, theta] = coef.map(|c| weighted_mean(s, &c));
    let residual_max = residual(s, &idx, |pi, y1, y0| {
        let (y1, y0) = (y1 as f64, y0 as f64);
        alpha + pi + delta * y1 + eta * y0 + theta * y1 * y0
    });
    Ok(Cor3Model {
        alpha,
        delta,
        eta,
        theta,
        residual_max,
    })
}

pub fn fit_cor4(s: &PotentialOutcomeScenario) -> Result<Cor4Model> {
    let idx = binary_cells(s)?;
    let mut coef = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (k, &pi) in s.pi_support().iter().enumerate() {
        let t = |y1: usize, y0: usize| s.treat(k, idx[y1][y0]);
        for (name, v) in [
            ("π", pi),
            ("treat at (0,0)", t(0, 0)),
            ("treat at (1,0)", t(1, 0)),
            ("treat at (0,1)", t(0, 1)),
        ] {
            if v <= 0.0 {
                return Err(Error::NonPositiveCell(format!("{name} for π = {pi}")));
            }
        }
        coef[0].push(t(0, 0) / pi);
        coef[1].push(t(1, 0) / t(0, 0));
        coef[2].push(t(0, 1) / t(0, 0));
        coef[3].push(t(1, 1) * t(0, 0) / (t(1, 0) * t(0, 1)));
    }
    let [alpha, delta, eta, theta] = coef.map(|c| weighted_mean(s, &c));
    let residual_max = residual(s, &idx, |pi, y1, y0| {
        let mut v = alpha * pi;
        if y1 == 1 {
            v *= delta;
        }
        if y0 == 1 {
            v *= eta;
        }
        if y1 == 1 && y0 == 1 {
            v *= theta;
        }
        v
    });
    Ok(Cor4Model {
        alpha,
        delta,
        eta,
        theta,
        residual_max,
    })
}

/// Non-negative association of the potential outcomes: OR_Y ≥ 1, checked as
/// P11·P00 ≥ P10·P01.
fn odds_ratio_report(id: &str, s: &PotentialOutcomeScenario) -> Result<ConditionReport> {
    let p = joint(s)?;
    let mut check = Check::new(id);
    check.ge(
        || "P11·P00 ≥ P10·P01".into(),
        p[1][1] * p[0][0],
        p[1][0] * p[0][1],
    );
    Ok(check.finish())
}

/// Treatment rises with each potential outcome, and the propensity score is
/// negatively correlated with the stratum means ν_a(Π).
pub fn check_thm4(s: &PotentialOutcomeScenario) -> Result<ConditionBundle> {
    arm_means(s)?;
    let mut a = Check::new("thm4.a");
    for arm in [0, 1] {
        let outcome = |j: usize| {
            if arm == 1 {
                s.pairs()[j].y1
            } else {
                s.pairs()[j].y0
            }
        };
        let mut levels: Vec<f64> = (0..s.pairs().len()).map(outcome).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let values: Vec<(String, f64)> = levels
            .iter()
            .filter_map(|&y| {
                let members: Vec<usize> =
                    (0..s.pairs().len()).filter(|&j| outcome(j) == y).collect();
                let mass = sum(members.iter().map(|&j| s.pairs()[j].prob));
                if mass <= 0.0 {
                    return None;
                }
                let treated = sum(members.iter().flat_map(|&j| {
                    s.pi_pmf()
                        .iter()
                        .enumerate()
                        .map(move |(k, w)| w * s.pairs()[j].prob * s.treat(k, j))
                }));
                Some((format!("Pr(A=1 | Y({arm})={y})"), treated / mass))
            })
            .collect();
        a.nondecreasing(&values);
    }
    let cov = propensity_covariances(s)?;
    let mut b = Check::new("thm4.b");
    for arm in [0, 1] {
        b.le(|| format!("cov(Π, ν_{arm}(Π))"), cov[arm], 0.0);
    }
    Ok(ConditionBundle::new("thm4", vec![a.finish(), b.finish()]))
}

/// Binary-outcome form of the additive potential-outcome theorem:
/// `Pr(A=1 | Π, U) = Π + δ{Y(1)} + η{Y(0)}` with non-decreasing δ, η (a),
/// OR_Y ≥ 1 (b), and supports of each potential outcome that do not depend
/// on the other (c).
pub fn check_thm5_binary(s: &PotentialOutcomeScenario) -> Result<ConditionBundle> {
    let fit = fit_cor3(s)?;
    let mut a = Check::new("thm5.a");
    a.le(|| "residual_max".into(), fit.residual_max, MODEL_FIT_TOL);
    a.le(|| "|θ|".into(), fit.theta.abs(), MODEL_FIT_TOL);
    a.ge(|| "δ(1) − δ(0)".into(), fit.delta, 0.0);
    a.ge(|| "η(1) − η(0)".into(), fit.eta, 0.0);
    let b = odds_ratio_report("thm5.b", s)?;

    let p = joint(s)?;
    let mut c = Check::new("thm5.c");
    // sup Y(1) given Y(0)=y0 is 1 iff P[1][y0] > 0, among y0 with mass.
    let sup_y1: Vec<(usize, f64)> = (0..2)
        .filter(|&y0| p[0][y0] + p[1][y0] > 0.0)
        .map(|y0| (y0, if p[1][y0] > 0.0 { 1.0 } else { 0.0 }))
        .collect();
    let sup_y0: Vec<(usize, f64)> = (0..2)
        .filter(|&y1| p[y1][0] + p[y1][1] > 0.0)
        .map(|y1| (y1, if p[y1][1] > 0.0 { 1.0 } else { 0.0 }))
        .collect();
    if let [(_, x), (_, y)] = sup_y1[..] {
        c.le(
            || "sup Y(1) given Y(0)=1 vs Y(0)=0".into(),
            (x - y).abs(),
            0.0,
        );
    }
    if let [(_, x), (_, y)] = sup_y0[..] {
        c.le(
            || "sup Y(0) given Y(1)=1 vs Y(1)=0".into(),
            (x - y).abs(),
            0.0,
        );
    }
    Ok(ConditionBundle::new(
        "thm5-binary",
        vec![a.finish(), b, c.finish()],
    ))
}

pub fn check_cor3(s: &PotentialOutcomeScenario) -> Result<ConditionBundle> {
    let fit = fit_cor3(s)?;
    let mut a = Check::new("cor3.a");
    a.le(|| "residual_max".into(), fit.residual_max, MODEL_FIT_TOL);
    a.ge(|| "δ".into(), fit.delta, 0.0);
    a.ge(|| "η".into(), fit.eta, 0.0);
    a.ge(|| "θ".into(), fit.theta, 0.0);
    Ok(ConditionBundle::new(
        "cor3",
        vec![a.finish(), odds_ratio_report("cor3.b", s)?],
    ))
}

pub fn check_cor4(s: &PotentialOutcomeScenario) -> Result<ConditionBundle> {
    let fit = fit_cor4(s)?;
    let mut a = Check::new("cor4.a'");
    a.le(|| "residual_max".into(), fit.residual_max, MODEL_FIT_TOL);
    a.ge(|| "δ".into(), fit.delta, 1.0);
    a.ge(|| "η".into(), fit.eta, 1.0);
    a.ge(|| "θ".into(), fit.theta, 1.0);
    Ok(ConditionBundle::new(
        "cor4",
        vec![a.finish(), odds_ratio_report("cor4.b", s)?],
    ))
}

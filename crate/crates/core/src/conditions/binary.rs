//! Conditions on the 2×2 treatment table p_zu = Pr(A=1 | Z=z, U=u).

use super::{Check, ConditionBundle, ConditionReport};
use crate::error::{Error, Result};
use crate::scenario::BinaryScenario;
use crate::ORDER_TOL;

fn table(b: &BinaryScenario) -> [f64; 4] {
    b.p_table()
}

/// Non-positive multiplicative interaction of Z and U on both the presence
/// and the absence of treatment:
/// p11·p00 / (p10·p01) ≤ 1 and (1−p11)(1−p00) / ((1−p10)(1−p01)) ≤ 1.
pub fn check_weaker_condition(b: &BinaryScenario) -> Result<ConditionReport> {
    let [p11, p10, p01, p00] = table(b);
    let mut check = Check::new("weaker_condition");
    let ratios = [
        ("A=1", p11 * p00, p10 * p01, "p10·p01"),
        (
            "A=0",
            (1.0 - p11) * (1.0 - p00),
            (1.0 - p10) * (1.0 - p01),
            "(1−p10)(1−p01)",
        ),
    ];
    for (cell, num, den, den_name) in ratios {
        if num == 0.0 {
            continue;
        }
        if den == 0.0 {
            return Err(Error::ZeroDenominator(format!(
                "weaker condition at {cell}: {den_name} = 0"
            )));
        }
        check.le(|| cell.to_owned(), num / den, 1.0);
    }
    Ok(check.finish())
}

fn monotone_effects(id: &str, b: &BinaryScenario) -> ConditionReport {
    let [p11, p10, p01, p00] = table(b);
    let mut check = Check::new(id);
    check.ge(|| "p11 ≥ p10".into(), p11, p10);
    check.ge(|| "p11 ≥ p01".into(), p11, p01);
    check.ge(|| "p10 ≥ p00".into(), p10, p00);
    check.ge(|| "p01 ≥ p00".into(), p01, p00);
    for a in [1, 0] {
        check.ge(|| format!("r{a}1 ≥ r{a}0"), b.r(a, 1), b.r(a, 0));
    }
    check.finish()
}

/// No additive interaction of Z and U on A, plus monotone effects.
pub fn check_cor1(b: &BinaryScenario) -> ConditionBundle {
    let [p11, p10, p01, p00] = table(b);
    let mut a = Check::new("cor1.a");
    a.le(
        || "|p11 − p10 − p01 + p00|".into(),
        (p11 - p10 - p01 + p00).abs(),
        0.0,
    );
    ConditionBundle::new("cor1", vec![a.finish(), monotone_effects("cor1.b", b)])
}

/// No multiplicative interaction of Z and U on A, plus monotone effects.
pub fn check_cor2(b: &BinaryScenario) -> ConditionBundle {
    let [p11, p10, p01, p00] = table(b);
    let mut a = Check::new("cor2.a'");
    a.le(
        || "|p11·p00 − p10·p01|".into(),
        (p11 * p00 - p10 * p01).abs(),
        0.0,
    );
    ConditionBundle::new("cor2", vec![a.finish(), monotone_effects("cor2.b", b)])
}

fn require_monotone(p11: f64, p10: f64, p01: f64, p00: f64) -> Result<()> {
    for (name, v) in [("p11", p11), ("p10", p10), ("p01", p01), ("p00", p00)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Premise(format!("{name} = {v} is not a probability")));
        }
    }
    if p11 < p10.max(p01) - ORDER_TOL || p10.min(p01) < p00 - ORDER_TOL {
        return Err(Error::Premise(
            "effects are not monotone: need p11 ≥ max(p10, p01) and min(p10, p01) ≥ p00".into(),
        ));
    }
    Ok(())
}

/// Monotone effects with no additive interaction and p00 > 0 imply both
/// multiplicative interactions are non-positive. Conclusions are checked as
/// cross-product differences, which need no division.
pub fn check_lemma_s5(p11: f64, p10: f64, p01: f64, p00: f64) -> Result<ConditionReport> {
    require_monotone(p11, p10, p01, p00)?;
    if p00 <= 0.0 {
        return Err(Error::Premise("p00 must be positive".into()));
    }
    let contrast = p11 - p10 - p01 + p00;
    if contrast.abs() > ORDER_TOL {
        return Err(Error::Premise(format!(
            "additive interaction {contrast} is not zero"
        )));
    }
    let mut check = Check::new("lemma_s5");
    check.le(|| "p11·p00 ≤ p10·p01".into(), p11 * p00, p10 * p01);
    check.le(
        || "(1−p11)(1−p00) ≤ (1−p10)(1−p01)".into(),
        (1.0 - p11) * (1.0 - p00),
        (1.0 - p10) * (1.0 - p01),
    );
    Ok(check.finish())
}

/// Monotone effects with no multiplicative interaction imply a non-negative
/// additive interaction and a non-positive multiplicative interaction on
/// the absence of treatment.
pub fn check_lemma_s7(p11: f64, p10: f64, p01: f64, p00: f64) -> Result<ConditionReport> {
    require_monotone(p11, p10, p01, p00)?;
    let gap = p11 * p00 - p10 * p01;
    if gap.abs() > ORDER_TOL {
        return Err(Error::Premise(format!(
            "p11·p00 − p10·p01 = {gap} is not zero"
        )));
    }
    let mut check = Check::new("lemma_s7");
    check.ge(
        || "p11 − p10 − p01 + p00 ≥ 0".into(),
        p11 - p10 - p01 + p00,
        0.0,
    );
    check.le(
        || "(1−p11)(1−p00) ≤ (1−p10)(1−p01)".into(),
        (1.0 - p11) * (1.0 - p00),
        (1.0 - p10) * (1.0 - p01),
    );
    Ok(check.finish())
}

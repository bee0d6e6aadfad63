//! Exact causal estimands and the unadjusted / adjusted estimators.
//!
//! All quantities are population values obtained by enumerating the cells
//! (z, u) of a scenario; there is no sampling here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::serialize_g17;
use crate::numeric::{sum, Accumulator};
use crate::scenario::{
    BinaryScenario, CovariateFamily, DiscreteScenario, PotentialOutcomeScenario,
};
use crate::MERGE_TOL;

/// What the adjusted estimator standardizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// The instrument levels: μ_a(z) = E(Y | A=a, Z=z).
    #[default]
    OnZ,
    /// The propensity score: ν_a(π) = E(Y | A=a, Π=π).
    OnPropensity,
}

impl std::str::FromStr for Conditioning {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "on_z" => Ok(Conditioning::OnZ),
            "on_propensity" => Ok(Conditioning::OnPropensity),
            _ => Err(format!(
                "unknown conditioning `{s}` (expected on_z or on_propensity)"
            )),
        }
    }
}

/// One value per target population: the treated, the controls, everyone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slots {
    pub treated: f64,
    pub control: f64,
    pub all: f64,
}

/// The seven estimands of one scenario plus the treated fraction f = Pr(A=1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateSet {
    #[serde(serialize_with = "serialize_g17")]
    pub true_treated: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub true_control: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub true_all: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub unadj: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub adj_treated: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub adj_control: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub adj_all: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub f: f64,
    pub conditioning: Conditioning,
}

impl EstimateSet {
    pub fn truth(&self) -> Slots {
        Slots {
            treated: self.true_treated,
            control: self.true_control,
            all: self.true_all,
        }
    }

    pub fn adjusted(&self) -> Slots {
        Slots {
            treated: self.adj_treated,
            control: self.adj_control,
            all: self.adj_all,
        }
    }

    /// Largest violation of the convex-combination identities
    /// `true_all = f·true_treated + (1−f)·true_control` and its adjusted twin.
    pub fn identity_residual(&self) -> f64 {
        let f = self.f;
        let t = self.true_all - (f * self.true_treated + (1.0 - f) * self.true_control);
        let a = self.adj_all - (f * self.adj_treated + (1.0 - f) * self.adj_control);
        t.abs().max(a.abs())
    }

    fn assemble(arm: &ArmMeans, adj: &AdjustedMeans, conditioning: Conditioning) -> Self {
        let treated_y1 = arm.treated_y1();
        let control_y0 = arm.control_y0();
        let set = EstimateSet {
            true_treated: treated_y1 - arm.treated_y0(),
            true_control: arm.control_y1() - control_y0,
            true_all: arm.all_y1 - arm.all_y0,
            unadj: treated_y1 - control_y0,
            adj_treated: treated_y1 - adj.treated_y0 / arm.f,
            adj_control: adj.control_y1 / arm.g - control_y0,
            adj_all: adj.all_y1 - adj.all_y0,
            f: arm.f,
            conditioning,
        };
        let scale = [
            set.true_treated,
            set.true_control,
            set.adj_treated,
            set.adj_control,
        ]
        .iter()
        .fold(1.0_f64, |m, x| m.max(x.abs()));
        debug_assert!(
            set.identity_residual() <= 1e-9 * scale,
            "convex-combination identity violated: {set:?}"
        );
        set
    }
}

/// Distributional causal effects at threshold `y`: the seven estimands of I(Y > y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DceSet {
    #[serde(serialize_with = "serialize_g17")]
    pub threshold: f64,
    #[serde(flatten)]
    pub effects: EstimateSet,
}

/// Causal effects and estimators on the ratio scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RrSet {
    #[serde(serialize_with = "serialize_g17")]
    pub true_treated: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub true_control: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub true_all: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub unadj: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub adj_treated: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub adj_control: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub adj_all: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub f: f64,
    pub conditioning: Conditioning,
}

/// A finite table of independent (instrument-like, confounder-like) cells
/// with treatment probabilities and arm-specific outcome means.
pub(crate) trait CellTable {
    fn nz(&self) -> usize;
    fn nu(&self) -> usize;
    fn pz(&self, i: usize) -> f64;
    fn pu(&self, j: usize) -> f64;
    /// Pr(A=1 | cell).
    fn t(&self, i: usize, j: usize) -> f64;
    /// E(Y | A=a, cell).
    fn m(&self, a: usize, i: usize, j: usize) -> f64;
    /// Human-readable name of instrument level `i`, for error messages.
    fn level(&self, i: usize) -> String;
}

impl CellTable for DiscreteScenario {
    fn nz(&self) -> usize {
        DiscreteScenario::nz(self)
    }
    fn nu(&self) -> usize {
        DiscreteScenario::nu(self)
    }
    fn pz(&self, i: usize) -> f64 {
        self.z_pmf()[i]
    }
    fn pu(&self, j: usize) -> f64 {
        self.u_pmf()[j]
    }
    fn t(&self, i: usize, j: usize) -> f64 {
        self.treat(i, j)
    }
    fn m(&self, a: usize, i: usize, j: usize) -> f64 {
        self.mean(a, i, j)
    }
    fn level(&self, i: usize) -> String {
        format!("z = {}", self.z_support()[i])
    }
}

impl CellTable for BinaryScenario {
    fn nz(&self) -> usize {
        2
    }
    fn nu(&self) -> usize {
        2
    }
    fn pz(&self, i: usize) -> f64 {
        if i == 1 {
            self.p_z()
        } else {
            1.0 - self.p_z()
        }
    }
    fn pu(&self, j: usize) -> f64 {
        if j == 1 {
            self.p_u()
        } else {
            1.0 - self.p_u()
        }
    }
    fn t(&self, i: usize, j: usize) -> f64 {
        self.p(i, j)
    }
    fn m(&self, a: usize, _i: usize, j: usize) -> f64 {
        self.r(a, j)
    }
    fn level(&self, i: usize) -> String {
        format!("z = {i}")
    }
}

/// Cells are (π_k, (y1, y0)_j); the outcome given the arm is the potential outcome itself.
impl CellTable for PotentialOutcomeScenario {
    fn nz(&self) -> usize {
        self.pi_support().len()
    }
    fn nu(&self) -> usize {
        self.pairs().len()
    }
    fn pz(&self, i: usize) -> f64 {
        self.pi_pmf()[i]
    }
    fn pu(&self, j: usize) -> f64 {
        self.pairs()[j].prob
    }
    fn t(&self, i: usize, j: usize) -> f64 {
        self.treat(i, j)
    }
    fn m(&self, a: usize, _i: usize, j: usize) -> f64 {
        let p = self.pairs()[j];
        if a == 1 {
            p.y1
        } else {
            p.y0
        }
    }
    fn level(&self, i: usize) -> String {
        format!("π = {}", self.pi_support()[i])
    }
}

/// Sums over the cells of E[Y(a)·1{A=b}] and the arm sizes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArmMeans {
    /// Pr(A=1).
    pub f: f64,
    /// Pr(A=0), summed directly rather than as 1 − f.
    pub g: f64,
    pub y1_a1: f64,
    pub y0_a1: f64,
    pub y1_a0: f64,
    pub y0_a0: f64,
    pub all_y1: f64,
    pub all_y0: f64,
}

impl ArmMeans {
    /// E(Y | A=1) = E{Y(1) | A=1}.
    pub fn treated_y1(&self) -> f64 {
        self.y1_a1 / self.f
    }
    pub fn treated_y0(&self) -> f64 {
        self.y0_a1 / self.f
    }
    pub fn control_y1(&self) -> f64 {
        self.y1_a0 / self.g
    }
    /// E(Y | A=0) = E{Y(0) | A=0}.
    pub fn control_y0(&self) -> f64 {
        self.y0_a0 / self.g
    }
}

/// Uses A ⟂ Y(a) | cell, so E{Y(a) | A=b, cell} = E(Y | A=a, cell).
pub(crate) fn arm_means<C: CellTable + ?Sized>(c: &C) -> Result<ArmMeans> {
    let mut acc = [Accumulator::default(); 8];
    for i in 0..c.nz() {
        let pz = c.pz(i);
        for j in 0..c.nu() {
            let w = pz * c.pu(j);
            let t = c.t(i, j);
            let (m0, m1) = (c.m(0, i, j), c.m(1, i, j));
            let (w1, w0) = (w * t, w * (1.0 - t));
            acc[0].add(w1);
            acc[1].add(w0);
            acc[2].add(w1 * m1);
            acc[3].add(w1 * m0);
            acc[4].add(w0 * m1);
            acc[5].add(w0 * m0);
            acc[6].add(w * m1);
            acc[7].add(w * m0);
        }
    }
    let v = acc.map(|a| a.value());
    let means = ArmMeans {
        f: v[0],
        g: v[1],
        y1_a1: v[2],
        y0_a1: v[3],
        y1_a0: v[4],
        y0_a0: v[5],
        all_y1: v[6],
        all_y0: v[7],
    };
    if means.f <= 0.0 {
        return Err(Error::Degenerate("Pr(A=1) = 0".into()));
    }
    if means.g <= 0.0 {
        return Err(Error::Degenerate("Pr(A=1) = 1".into()));
    }
    Ok(means)
}

/// Per instrument level: Pr(Z=z), Π(z), Pr(A=0 | Z=z), μ_0(z), μ_1(z).
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelMeans {
    pub pz: f64,
    pub pi: f64,
    pub rho: f64,
    pub mu0: f64,
    pub mu1: f64,
}

/// μ_a(z) for every level with positive mass; levels without mass are skipped.
pub(crate) fn level_means<C: CellTable + ?Sized>(c: &C) -> Result<Vec<Option<LevelMeans>>> {
    (0..c.nz())
        .map(|i| {
            let pz = c.pz(i);
            if pz <= 0.0 {
                return Ok(None);
            }
            let mut acc = [Accumulator::default(); 4];
            for j in 0..c.nu() {
                let pu = c.pu(j);
                let t = c.t(i, j);
                acc[0].add(pu * t);
                acc[1].add(pu * (1.0 - t));
                acc[2].add(pu * t * c.m(1, i, j));
                acc[3].add(pu * (1.0 - t) * c.m(0, i, j));
            }
            let [pi, rho, s1, s0] = acc.map(|a| a.value());
            if pi <= 0.0 {
                return Err(Error::UndefinedStratum {
                    arm: 1,
                    level: c.level(i),
                });
            }
            if rho <= 0.0 {
                return Err(Error::UndefinedStratum {
                    arm: 0,
                    level: c.level(i),
                });
            }
            Ok(Some(LevelMeans {
                pz,
                pi,
                rho,
                mu0: s0 / rho,
                mu1: s1 / pi,
            }))
        })
        .collect()
}

/// ∫μ_0 dF(z | A=1)·f, ∫μ_1 dF(z | A=0)·(1−f), ∫μ_1 dF(z), ∫μ_0 dF(z).
#[derive(Debug, Clone, Copy)]
pub(crate) struct AdjustedMeans {
    pub treated_y0: f64,
    pub control_y1: f64,
    pub all_y1: f64,
    pub all_y0: f64,
}

pub(crate) fn adjusted_means<C: CellTable + ?Sized>(c: &C) -> Result<AdjustedMeans> {
    let mut acc = [Accumulator::default(); 4];
    for level in level_means(c)?.into_iter().flatten() {
        acc[0].add(level.pz * level.pi * level.mu0);
        acc[1].add(level.pz * level.rho * level.mu1);
        acc[2].add(level.pz * level.mu1);
        acc[3].add(level.pz * level.mu0);
    }
    let [treated_y0, control_y1, all_y1, all_y0] = acc.map(|a| a.value());
    Ok(AdjustedMeans {
        treated_y0,
        control_y1,
        all_y1,
        all_y0,
    })
}

fn standardized(
    s: &DiscreteScenario,
    conditioning: Conditioning,
) -> std::borrow::Cow<'_, DiscreteScenario> {
    match conditioning {
        Conditioning::OnZ => std::borrow::Cow::Borrowed(s),
        Conditioning::OnPropensity => std::borrow::Cow::Owned(s.collapse_by_propensity(MERGE_TOL)),
    }
}

/// ACE_1^true, ACE_0^true and ACE^true.
pub fn true_ace(s: &DiscreteScenario) -> Result<Slots> {
    let arm = arm_means(s)?;
    Ok(Slots {
        treated: arm.treated_y1() - arm.treated_y0(),
        control: arm.control_y1() - arm.control_y0(),
        all: arm.all_y1 - arm.all_y0,
    })
}

/// E(Y | A=1) − E(Y | A=0).
pub fn unadjusted_ace(s: &DiscreteScenario) -> Result<f64> {
    let arm = arm_means(s)?;
    Ok(arm.treated_y1() - arm.control_y0())
}

/// ACE_1^adj, ACE_0^adj and ACE^adj, standardized over Z or over Π(Z).
pub fn adjusted_ace(s: &DiscreteScenario, conditioning: Conditioning) -> Result<Slots> {
    let e = estimates(s, conditioning)?;
    Ok(e.adjusted())
}

/// All seven estimands of a discrete scenario.
pub fn estimates(s: &DiscreteScenario, conditioning: Conditioning) -> Result<EstimateSet> {
    let arm = arm_means(s)?;
    let adj = adjusted_means(standardized(s, conditioning).as_ref())?;
    Ok(EstimateSet::assemble(&arm, &adj, conditioning))
}

/// All seven estimands of a binary scenario, adjusting on Z, without allocating.
pub fn binary_estimates(b: &BinaryScenario) -> Result<EstimateSet> {
    let arm = arm_means(b)?;
    let mut acc = [Accumulator::default(); 4];
    for z in 0..2 {
        let pz = b.pz(z);
        if pz <= 0.0 {
            continue;
        }
        let (mut pi, mut rho, mut s1, mut s0) = (0.0, 0.0, 0.0, 0.0);
        for u in 0..2 {
            let pu = b.pu(u);
            let t = b.p(z, u);
            pi += pu * t;
            rho += pu * (1.0 - t);
            s1 += pu * t * b.r(1, u);
            s0 += pu * (1.0 - t) * b.r(0, u);
        }
        if pi <= 0.0 {
            return Err(Error::UndefinedStratum {
                arm: 1,
                level: b.level(z),
            });
        }
        if rho <= 0.0 {
            return Err(Error::UndefinedStratum {
                arm: 0,
                level: b.level(z),
            });
        }
        let (mu1, mu0) = (s1 / pi, s0 / rho);
        acc[0].add(pz * pi * mu0);
        acc[1].add(pz * rho * mu1);
        acc[2].add(pz * mu1);
        acc[3].add(pz * mu0);
    }
    let [treated_y0, control_y1, all_y1, all_y0] = acc.map(|a| a.value());
    let adj = AdjustedMeans {
        treated_y0,
        control_y1,
        all_y1,
        all_y0,
    };
    Ok(EstimateSet::assemble(&arm, &adj, Conditioning::OnZ))
}

/// Adjusted minus unadjusted estimators through the covariance of the
/// propensity score with the stratum means under the law of Z.
pub fn adjusted_minus_unadjusted_via_covariance(s: &DiscreteScenario) -> Result<Slots> {
    covariance_route(s)
}

pub(crate) fn covariance_route<C: CellTable + ?Sized>(c: &C) -> Result<Slots> {
    let levels: Vec<LevelMeans> = level_means(c)?.into_iter().flatten().collect();
    let mut acc = [Accumulator::default(); 6];
    for l in &levels {
        acc[0].add(l.pz * l.pi);
        acc[1].add(l.pz * l.rho);
        acc[2].add(l.pz * l.mu0);
        acc[3].add(l.pz * l.mu1);
        acc[4].add(l.pz * l.pi * l.mu0);
        acc[5].add(l.pz * l.pi * l.mu1);
    }
    let [f, g, e_mu0, e_mu1, e_pi_mu0, e_pi_mu1] = acc.map(|a| a.value());
    if f <= 0.0 || g <= 0.0 {
        return Err(Error::Degenerate("Pr(A=1) is 0 or 1".into()));
    }
    let cov0 = e_pi_mu0 - f * e_mu0;
    let cov1 = e_pi_mu1 - f * e_mu1;
    Ok(Slots {
        treated: -cov0 / (f * g),
        control: -cov1 / (f * g),
        all: -cov0 / g - cov1 / f,
    })
}

/// cov{Π, μ_a(Π)} under the law of the instrument levels, for a = 0 and 1.
pub(crate) fn propensity_covariances<C: CellTable + ?Sized>(c: &C) -> Result<[f64; 2]> {
    let levels: Vec<LevelMeans> = level_means(c)?.into_iter().flatten().collect();
    let mut acc = [Accumulator::default(); 5];
    for l in &levels {
        acc[0].add(l.pz * l.pi);
        acc[1].add(l.pz * l.mu0);
        acc[2].add(l.pz * l.mu1);
        acc[3].add(l.pz * l.pi * l.mu0);
        acc[4].add(l.pz * l.pi * l.mu1);
    }
    let [e_pi, e_mu0, e_mu1, e_pi_mu0, e_pi_mu1] = acc.map(|a| a.value());
    Ok([e_pi_mu0 - e_pi * e_mu0, e_pi_mu1 - e_pi * e_mu1])
}

/// Distributional causal effects at threshold `y` (effects on I(Y > y)).
pub fn dce(s: &DiscreteScenario, y: f64, conditioning: Conditioning) -> Result<DceSet> {
    let dichotomized = s.dichotomize(y)?;
    Ok(DceSet {
        threshold: y,
        effects: estimates(&dichotomized, conditioning)?,
    })
}

/// Ratio-scale effects; adjusted ratios divide integrated stratum means.
pub fn rr(s: &DiscreteScenario, conditioning: Conditioning) -> Result<RrSet> {
    for a in 0..2 {
        for i in 0..s.nz() {
            for j in 0..s.nu() {
                if s.mean(a, i, j) < 0.0 {
                    return Err(Error::invariant(
                        format!("mean[{a}][{i}][{j}]"),
                        "ratio measures need a non-negative outcome",
                    ));
                }
            }
        }
    }
    let arm = arm_means(s)?;
    let adj = adjusted_means(standardized(s, conditioning).as_ref())?;
    let ratio = |slot: &str, num: f64, den: f64| {
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(Error::ZeroDenominator(slot.to_owned()))
        }
    };
    Ok(RrSet {
        true_treated: ratio("true_treated", arm.treated_y1(), arm.treated_y0())?,
        true_control: ratio("true_control", arm.control_y1(), arm.control_y0())?,
        true_all: ratio("true_all", arm.all_y1, arm.all_y0)?,
        unadj: ratio("unadj", arm.treated_y1(), arm.control_y0())?,
        adj_treated: ratio("adj_treated", arm.treated_y1(), adj.treated_y0 / arm.f)?,
        adj_control: ratio("adj_control", adj.control_y1 / arm.g, arm.control_y0())?,
        adj_all: ratio("adj_all", adj.all_y1, adj.all_y0)?,
        f: arm.f,
        conditioning,
    })
}

/// Averages stratum-specific estimands over an observed covariate X.
///
/// Treated slots are weighted by F(dx | A=1), control slots by F(dx | A=0),
/// whole-population slots and the unadjusted estimator by F(dx).
pub fn covariate_average(fam: &CovariateFamily, conditioning: Conditioning) -> Result<EstimateSet> {
    let mut parts = Vec::with_capacity(fam.strata().len());
    for stratum in fam.strata().iter().filter(|s| s.weight > 0.0) {
        let e = estimates(&stratum.scenario, conditioning)?;
        parts.push((stratum.weight, e));
    }
    let f = sum(parts.iter().map(|(w, e)| w * e.f));
    let g = sum(parts.iter().map(|(w, e)| w * (1.0 - e.f)));
    if parts.is_empty() || f <= 0.0 || g <= 0.0 {
        return Err(Error::Degenerate("every stratum is degenerate".into()));
    }
    let avg = |value: fn(&EstimateSet) -> f64, weight: &dyn Fn(f64, &EstimateSet) -> f64| {
        sum(parts.iter().map(|(w, e)| weight(*w, e) * value(e)))
    };
    let by_x = |w: f64, _: &EstimateSet| w;
    let by_treated = |w: f64, e: &EstimateSet| w * e.f / f;
    let by_control = |w: f64, e: &EstimateSet| w * (1.0 - e.f) / g;
    Ok(EstimateSet {
        true_treated: avg(|e| e.true_treated, &by_treated),
        true_control: avg(|e| e.true_control, &by_control),
        true_all: avg(|e| e.true_all, &by_x),
        unadj: avg(|e| e.unadj, &by_x),
        adj_treated: avg(|e| e.adj_treated, &by_treated),
        adj_control: avg(|e| e.adj_control, &by_control),
        adj_all: avg(|e| e.adj_all, &by_x),
        f,
        conditioning,
    })
}

/// The unadjusted estimator averaged over F(dx | A=1), F(dx | A=0) and F(dx);
/// the comparators for the treated, control and whole-population slots of
/// [`covariate_average`].
pub fn covariate_average_unadjusted(fam: &CovariateFamily) -> Result<Slots> {
    let mut parts = Vec::with_capacity(fam.strata().len());
    for stratum in fam.strata().iter().filter(|s| s.weight > 0.0) {
        parts.push((
            stratum.weight,
            estimates(&stratum.scenario, Conditioning::OnZ)?,
        ));
    }
    let f = sum(parts.iter().map(|(w, e)| w * e.f));
    let g = sum(parts.iter().map(|(w, e)| w * (1.0 - e.f)));
    if parts.is_empty() || f <= 0.0 || g <= 0.0 {
        return Err(Error::Degenerate("every stratum is degenerate".into()));
    }
    Ok(Slots {
        treated: sum(parts.iter().map(|(w, e)| w * e.f / f * e.unadj)),
        control: sum(parts.iter().map(|(w, e)| w * (1.0 - e.f) / g * e.unadj)),
        all: sum(parts.iter().map(|(w, e)| w * e.unadj)),
    })
}

/// The seven estimands when the confounder is the pair of potential outcomes
/// and the adjustment is on the propensity score.
pub fn po_estimates(s: &PotentialOutcomeScenario) -> Result<EstimateSet> {
    let arm = arm_means(s)?;
    let adj = adjusted_means(s)?;
    Ok(EstimateSet::assemble(
        &arm,
        &adj,
        Conditioning::OnPropensity,
    ))
}

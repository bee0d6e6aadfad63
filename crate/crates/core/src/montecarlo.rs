//! Monte Carlo exploration of the binary parameter space.
//!
//! Draw `i` of a run with seed `s` uses its own ChaCha8 stream: the
//! generator is seeded with `s` and switched to stream `i`. Results are
//! therefore identical whatever the number of threads or the order in which
//! draws are evaluated.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{
    check_cor1, check_cor2, check_thm1, check_weaker_condition, zbias_verdict,
};
use crate::error::{Error, Result};
use crate::estimators::{binary_estimates, EstimateSet};
use crate::json::serialize_g17;
use crate::scenario::BinaryScenario;

/// Attempts allowed per draw when rejection sampling for a filter.
const MAX_ATTEMPTS: usize = 1000;

/// Restricts the sampled scenarios to those satisfying a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum McFilter {
    /// No additive interaction with monotone effects, sampled directly.
    Cor1,
    /// No multiplicative interaction with monotone effects, sampled directly.
    Cor2,
    /// Both multiplicative interactions non-positive (rejection sampling).
    Weaker,
    /// All hypotheses of the general scalar theorem (rejection sampling).
    Thm1,
}

impl std::str::FromStr for McFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cor1" => Ok(McFilter::Cor1),
            "cor2" => Ok(McFilter::Cor2),
            "weaker" => Ok(McFilter::Weaker),
            "thm1" => Ok(McFilter::Thm1),
            _ => Err(format!(
                "unknown filter `{s}` (expected cor1, cor2, weaker or thm1)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McConfig {
    pub draws: u64,
    pub seed: u64,
    pub binary_outcome: bool,
    pub filter: Vec<McFilter>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(draws: u64, seed: u64) -> Self {
        McConfig {
            draws,
            seed,
            binary_outcome: true,
            filter: Vec::new(),
            threads: None,
        }
    }

    pub fn with_filter(mut self, filter: impl IntoIterator<Item = McFilter>) -> Self {
        self.filter = filter.into_iter().collect();
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads.filter(|&n| n > 0);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::invariant("draws", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    /// Fraction of draws whose adjusted estimator is strictly more biased.
    #[serde(serialize_with = "serialize_g17")]
    pub volume: f64,
    /// Binomial standard error sqrt(v(1−v)/n).
    #[serde(serialize_with = "serialize_g17")]
    pub stderr: f64,
    pub draws: u64,
    pub seed: u64,
    /// Draws whose two absolute biases agree within tolerance (counted as no Z-bias).
    pub tie_count: u64,
    /// Candidate scenarios discarded because an estimand was undefined.
    pub redraws: u64,
}

/// One draw: the scenario, its estimands and the number of discarded candidates.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub scenario: BinaryScenario,
    pub estimates: EstimateSet,
    pub redraws: u64,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>()
}

fn sorted_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let (a, b) = (uniform(rng), uniform(rng));
    (a.min(b), a.max(b))
}

/// Outcome means non-decreasing in u within each arm.
fn monotone_outcomes<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let (r10, r11) = sorted_pair(rng);
    let (r00, r01) = sorted_pair(rng);
    [r11, r10, r01, r00]
}

/// Ten independent Uniform(0,1) probabilities in the order
/// pZ, pU, p11, p10, p01, p00, r11, r10, r01, r00.
pub fn draw_scenario<R: Rng + ?Sized>(rng: &mut R) -> BinaryScenario {
    loop {
        let v: [f64; 10] = std::array::from_fn(|_| uniform(rng));
        let p = [v[2], v[3], v[4], v[5]];
        let r = [v[6], v[7], v[8], v[9]];
        // Only an exact zero for pZ or pU is rejected, with probability 2^-52.
        if let Ok(s) = BinaryScenario::from_table(v[0], v[1], p, r) {
            return s;
        }
    }
}

/// Interaction-free monotone treatment table: p00 is the smallest of three
/// uniforms and p11 = p10 + p01 − p00, resampled while it exceeds 1.
fn additive_table<R: Rng + ?Sized>(rng: &mut R) -> Result<[f64; 4]> {
    for _ in 0..MAX_ATTEMPTS {
        let mut x: [f64; 3] = std::array::from_fn(|_| uniform(rng));
        let low = (0..3).min_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap();
        x.swap(0, low);
        let (p00, p10, p01) = (x[0], x[1], x[2]);
        let p11 = p10 + p01 - p00;
        if p11 <= 1.0 {
            return Ok([p11, p10, p01, p00]);
        }
    }
    Err(Error::Sampling(
        "no additive table within 1000 attempts".into(),
    ))
}

/// p_zu = β(z)·γ(u) with β, γ non-decreasing in [0, 1].
fn multiplicative_table<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let (b0, b1) = sorted_pair(rng);
    let (g0, g1) = sorted_pair(rng);
    [b1 * g1, b1 * g0, b0 * g1, b0 * g0]
}

fn passes(filter: &[McFilter], s: &BinaryScenario) -> bool {
    filter.iter().all(|f| match f {
        McFilter::Cor1 => check_cor1(s).holds,
        McFilter::Cor2 => check_cor2(s).holds,
        McFilter::Weaker => check_weaker_condition(s).is_ok_and(|r| r.holds),
        McFilter::Thm1 => check_thm1(&s.to_discrete()).is_ok_and(|b| b.holds),
    })
}

fn candidate<R: Rng + ?Sized>(cfg: &McConfig, rng: &mut R) -> Result<BinaryScenario> {
    let structured = cfg
        .filter
        .iter()
        .find(|f| matches!(f, McFilter::Cor1 | McFilter::Cor2));
    for _ in 0..MAX_ATTEMPTS {
        let s = match structured {
            None => draw_scenario(rng),
            Some(f) => {
                let (pz, pu) = (uniform(rng), uniform(rng));
                let p = if *f == McFilter::Cor1 {
                    additive_table(rng)?
                } else {
                    multiplicative_table(rng)
                };
                let r = monotone_outcomes(rng);
                match BinaryScenario::from_table(pz, pu, p, r) {
                    Ok(s) => s,
                    Err(_) => continue,
                }
            }
        };
        let s = if cfg.binary_outcome {
            s
        } else {
            BinaryScenario::new(s.p_z(), s.p_u(), s.treat(), s.outcome(), false)?
        };
        if passes(&cfg.filter, &s) {
            return Ok(s);
        }
    }
    Err(Error::Sampling(format!(
        "no scenario passed the filter within {MAX_ATTEMPTS} attempts"
    )))
}

/// The generator for draw `index` of a run.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw `index` of the run described by `cfg`; candidates with an undefined
/// estimand are discarded and counted.
pub fn sample(cfg: &McConfig, index: u64) -> Result<Sample> {
    let mut rng = stream(cfg.seed, index);
    let mut redraws = 0;
    loop {
        let scenario = candidate(cfg, &mut rng)?;
        match binary_estimates(&scenario) {
            Ok(estimates) => {
                return Ok(Sample {
                    scenario,
                    estimates,
                    redraws,
                })
            }
            Err(err) => {
                log::warn!("draw {index}: {err}; redrawing");
                redraws += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    zbias: u64,
    ties: u64,
    redraws: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            zbias: self.zbias + o.zbias,
            ties: self.ties + o.ties,
            redraws: self.redraws + o.redraws,
        }
    }
}

fn tally(cfg: &McConfig, index: u64) -> Result<Tally> {
    let s = sample(cfg, index)?;
    let v = zbias_verdict(&s.estimates);
    Ok(Tally {
        zbias: v.zbias as u64,
        ties: v.tie as u64,
        redraws: s.redraws,
    })
}

fn finish(cfg: &McConfig, t: Tally) -> McResult {
    let n = cfg.draws as f64;
    let volume = t.zbias as f64 / n;
    McResult {
        volume,
        stderr: (volume * (1.0 - volume) / n).sqrt(),
        draws: cfg.draws,
        seed: cfg.seed,
        tie_count: t.ties,
        redraws: t.redraws,
    }
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Sampling(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Fraction of draws exhibiting Z-bias on the whole population, in parallel.
pub fn estimate_volume(cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    let total = in_pool(cfg.threads, || {
        (0..cfg.draws)
            .into_par_iter()
            .map(|i| tally(cfg, i))
            .try_reduce(Tally::default, |a, b| Ok(a + b))
    })??;
    Ok(finish(cfg, total))
}

/// Single-threaded [`estimate_volume`]; returns the same result.
pub fn estimate_volume_sequential(cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    let mut total = Tally::default();
    for i in 0..cfg.draws {
        total = total + tally(cfg, i)?;
    }
    Ok(finish(cfg, total))
}

pub const SCATTER_HEADER: &str = "pZ,pU,p11,p10,p01,p00,r11,r10,r01,r00,bias_adj,bias_unadj,zbias";

fn scatter_row(s: &Sample) -> String {
    let b = &s.scenario;
    let e = &s.estimates;
    let mut fields: Vec<String> = [b.p_z(), b.p_u()]
        .into_iter()
        .chain(b.p_table())
        .chain(b.r_table())
        .chain([e.adj_all - e.true_all, e.unadj - e.true_all])
        .map(|x| x.to_string())
        .collect();
    fields.push(zbias_verdict(e).zbias.to_string());
    fields.join(",")
}

/// Writes one CSV row per draw to `out`; returns the number of data rows.
pub fn write_scatter<W: Write>(
    cfg: &McConfig,
    out: &mut W,
) -> std::result::Result<u64, ScatterError> {
    cfg.validate()?;
    writeln!(out, "{SCATTER_HEADER}")?;
    const CHUNK: u64 = 1 << 16;
    let mut start = 0;
    while start < cfg.draws {
        let end = (start + CHUNK).min(cfg.draws);
        let rows = in_pool(cfg.threads, || {
            (start..end)
                .into_par_iter()
                .map(|i| sample(cfg, i).map(|s| scatter_row(&s)))
                .collect::<Result<Vec<String>>>()
        })??;
        for row in rows {
            writeln!(out, "{row}")?;
        }
        start = end;
    }
    out.flush()?;
    Ok(cfg.draws)
}

/// Failure to write the scatter file.
#[derive(Debug, thiserror::Error)]
pub enum ScatterError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] Error),
}

/// [`write_scatter`] into a new file at `path`.
pub fn export_scatter(cfg: &McConfig, path: &Path) -> std::result::Result<u64, ScatterError> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_scatter(cfg, &mut out)
}

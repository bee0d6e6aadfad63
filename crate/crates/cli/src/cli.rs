use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use zbias::{Conditioning, McFilter};

/// Exact Z-bias analysis of discrete data-generating processes.
#[derive(Debug, Parser)]
#[command(name = "zbias", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// True effects, unadjusted and adjusted estimators.
    Eval {
        scenario: PathBuf,
        #[command(flatten)]
        conditioning: ConditioningArg,
        /// Print a rounded text row instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Check theorem hypotheses and lemma conclusions.
    Check {
        scenario: PathBuf,
        /// Comma-separated ids: thm1, thm2, thm3, cor1, cor2, thm4, thm5-binary,
        /// cor3, cor4, thm7, weaker, lemma_s5, lemma_s7, collider.
        #[arg(long, value_delimiter = ',', required = true)]
        theorem: Vec<TheoremId>,
    },
    /// Distributional causal effects at a threshold.
    Dce {
        scenario: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        threshold: f64,
        #[command(flatten)]
        conditioning: ConditioningArg,
    },
    /// Effects and estimators on the ratio scale.
    Rr {
        scenario: PathBuf,
        #[command(flatten)]
        conditioning: ConditioningArg,
    },
    /// Estimands averaged over an observed covariate.
    Average {
        scenario: PathBuf,
        #[command(flatten)]
        conditioning: ConditioningArg,
    },
    /// Monte Carlo estimate of the Z-bias volume of the binary parameter space.
    Mc(McArgs),
    /// Per-draw biases as CSV.
    Scatter {
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ConditioningArg {
    /// Standardize over the instrument (on_z) or its propensity score (on_propensity).
    #[arg(long, default_value = "on_z")]
    pub conditioning: Conditioning,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub draws: u64,
    #[arg(long)]
    pub seed: u64,
    /// Restrict draws to scenarios passing these conditions: cor1, cor2, weaker, thm1.
    #[arg(long, value_delimiter = ',')]
    pub filter: Vec<McFilter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    Thm1,
    Thm2,
    Thm3,
    Cor1,
    Cor2,
    Thm4,
    Thm5Binary,
    Cor3,
    Cor4,
    Thm7,
    Weaker,
    LemmaS5,
    LemmaS7,
    Collider,
}

impl std::str::FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use TheoremId::*;
        Ok(match s {
            "thm1" => Thm1,
            "thm2" => Thm2,
            "thm3" => Thm3,
            "cor1" => Cor1,
            "cor2" => Cor2,
            "thm4" => Thm4,
            "thm5-binary" => Thm5Binary,
            "cor3" => Cor3,
            "cor4" => Cor4,
            "thm7" => Thm7,
            "weaker" => Weaker,
            "lemma_s5" => LemmaS5,
            "lemma_s7" => LemmaS7,
            "collider" => Collider,
            _ => return Err(format!("unknown theorem id `{s}`")),
        })
    }
}

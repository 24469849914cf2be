use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvr_orbits::dvr::RingSpec;
use dvr_orbits::pmodule::Partition;
use dvr_orbits::poset::OrderIdeal;
use serde::Serialize;

pub const DEFAULT_CAP_ELEMENTS: u128 = 1 << 20;
pub const DEFAULT_CAP_PAIRS: u128 = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "dvr-orbits", version, about = "Orbits and orbital algebras of finite modules over truncated DVRs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Orbit/ideal table with canonical forms, checked against generator closure
    Orbits,
    /// Pair-orbit descriptors on O × O, checked against generator closure
    Pairs,
    /// Orbital algebra: rank, structure constants and commutativity
    Hecke,
    /// Counting lemmas: closed forms against exhaustive counts
    Lemmas {
        /// Run the full grid instead of the instances over --ring
        #[arg(long)]
        sweep: bool,
    },
    /// B-set membership, intersection and sum
    Bsets {
        /// Check every pair against enumerated member sets
        #[arg(long)]
        verify: bool,
    },
    /// Every check available for the given ring and partition
    VerifyAll,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// zp:<p> or fqt:<p>^<m>
    #[arg(long, global = true, default_value = "zp:3")]
    pub ring: String,
    /// Parts such as 2^2,1
    #[arg(long, global = true)]
    pub partition: Option<String>,
    /// Restrict to one ideal, e.g. "max={(0,1)}"
    #[arg(long, global = true)]
    pub ideal: Option<String>,
    #[arg(long, global = true, env = "DVR_ORBITS_CAP", value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_elements: Option<u64>,
    #[arg(long, global = true, env = "DVR_ORBITS_CAP", value_parser = clap::value_parser!(u64).range(1..))]
    pub cap_pairs: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    /// Omit the timestamp and timings so output is byte-reproducible
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone)]
pub enum ConfigError {
    Ring(String),
    Partition(String),
    Ideal(String),
    Missing(&'static str),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Ring(e) => write!(f, "bad --ring: {e}"),
            ConfigError::Partition(e) => write!(f, "bad --partition: {e}"),
            ConfigError::Ideal(e) => write!(f, "bad --ideal: {e}"),
            ConfigError::Missing(flag) => write!(f, "missing required flag {flag}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub ring: RingSpec,
    pub partition: Option<Partition>,
    /// `None` sweeps every ideal.
    pub ideal: Option<OrderIdeal>,
    pub cap_elements: u128,
    pub cap_pairs: u128,
    pub seed: u64,
    pub format: Format,
    pub jobs: Option<usize>,
    pub timestamp: bool,
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, ConfigError> {
        let c = &cli.common;
        let ring = RingSpec::from_str(&c.ring).map_err(|e| ConfigError::Ring(e.to_string()))?;
        let partition = c
            .partition
            .as_deref()
            .map(|p| Partition::from_str(p).map_err(|e| ConfigError::Partition(e.to_string())))
            .transpose()?;
        let ideal = match (&c.ideal, &partition) {
            (Some(s), Some(p)) => Some(OrderIdeal::parse(s, p).map_err(|e| ConfigError::Ideal(e.to_string()))?),
            (Some(_), None) => return Err(ConfigError::Missing("--partition")),
            (None, _) => None,
        };
        let needs_partition = !matches!(cli.command, Command::Lemmas { .. });
        if needs_partition && partition.is_none() {
            return Err(ConfigError::Missing("--partition"));
        }
        Ok(ExperimentConfig {
            command: cli.command,
            ring,
            partition,
            ideal,
            cap_elements: c.cap_elements.map_or(DEFAULT_CAP_ELEMENTS, u128::from),
            cap_pairs: c.cap_pairs.map_or(DEFAULT_CAP_PAIRS, u128::from),
            seed: c.seed,
            format: c.format,
            jobs: c.jobs.map(|j| j as usize),
            timestamp: !c.no_timestamp,
        })
    }
}

//! Command-line arguments.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(name = "qet", version, about = "Quantum energy teleportation protocols", args_override_self = true)]
pub struct Cli {
    /// Key-value file supplying defaults for any flag of the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Two-qubit minimal model.
    Minimal(MinimalArgs),
    /// Protocol on a chain read from a model file.
    Chain(ChainArgs),
    /// Critical transverse-field Ising chain (CSV).
    Ising(IsingArgs),
    /// Continuum chiral-field protocol.
    Field(FieldArgs),
    /// Invariant suites; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// One-parameter sweep of another subcommand (CSV).
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// `auto` or a fixed angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaArg {
    Auto,
    Value(f64),
}

impl FromStr for ThetaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        let v: f64 = s.parse().map_err(|_| format!("expected `auto` or a number, got `{s}`"))?;
        if !v.is_finite() {
            return Err(format!("theta must be finite, got `{s}`"));
        }
        Ok(Self::Value(v))
    }
}

impl fmt::Display for ThetaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => write!(f, "auto"),
            Self::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for ThetaArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Value(v) => s.serialize_f64(*v),
        }
    }
}

/// Pauli direction: `x`, `y`, `z`, `xy`, `yz`, `xz` or `a:b:c` (normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub name: String,
    pub vector: [f64; 3],
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = match s {
            "x" => [1.0, 0.0, 0.0],
            "y" => [0.0, 1.0, 0.0],
            "z" => [0.0, 0.0, 1.0],
            "xy" => [h, h, 0.0],
            "yz" => [0.0, h, h],
            "xz" => [h, 0.0, h],
            _ => {
                let parts: Vec<f64> = s
                    .split(':')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| format!("bad direction `{s}`"))?;
                let [a, b, c] = parts[..] else {
                    return Err(format!("direction `{s}` needs three components"));
                };
                let n = (a * a + b * b + c * c).sqrt();
                if !(n.is_finite() && n > 0.0) {
                    return Err(format!("direction `{s}` has zero length"));
                }
                [a / n, b / n, c / n]
            }
        };
        Ok(Self { name: s.to_string(), vector: v })
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MinimalArgs {
    #[arg(long = "h", default_value_t = 1.0, allow_negative_numbers = true)]
    pub h: f64,
    #[arg(long = "k", default_value_t = 1.0, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub theta: ThetaArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kraus {
    Unitary,
    Rank2,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChainArgs {
    /// Chain model file.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long)]
    pub site_a: usize,
    #[arg(long)]
    pub site_b: usize,
    /// Measured Pauli direction at A.
    #[arg(long, default_value = "x", allow_hyphen_values = true)]
    pub measure: Direction,
    /// Pauli generator direction at B.
    #[arg(long, default_value = "y", allow_hyphen_values = true)]
    pub generator: Direction,
    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub theta: ThetaArg,
    /// Also minimize the residual energy at A.
    #[arg(long)]
    pub residual: bool,
    #[arg(long, value_enum, default_value = "unitary")]
    pub kraus: Kraus,
    /// Registers up to this size are diagonalized densely.
    #[arg(long, default_value_t = 8)]
    pub dense_max_sites: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Inclusive integer range `a` or `a:b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub start: u64,
    pub end: u64,
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad integer `{t}` in `{s}`"));
        let (start, end) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start < 1 || end < start {
            return Err(format!("range `{s}` must satisfy 1 <= start <= end"));
        }
        Ok(Self { start, end })
    }
}

impl Serialize for IntRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.start == self.end {
            s.serialize_str(&self.start.to_string())
        } else {
            s.serialize_str(&format!("{}:{}", self.start, self.end))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IsingMode {
    Analytic,
    Numeric,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IsingArgs {
    #[arg(long = "J", default_value_t = 1.0, allow_negative_numbers = true)]
    #[serde(rename = "J")]
    pub j: f64,
    /// Separation `n` or inclusive range `a:b`.
    #[arg(long = "n", default_value = "1")]
    pub n: IntRange,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: IsingMode,
    /// Periodic chain sizes for numeric mode.
    #[arg(long = "N", value_delimiter = ',', default_value = "8,10,12")]
    #[serde(rename = "N")]
    pub sizes: Vec<usize>,
    /// Measurement directions for numeric mode.
    #[arg(long, value_delimiter = ',', default_value = "x,y,z")]
    pub directions: Vec<Direction>,
    /// Report a log-log power-law fit over the range.
    #[arg(long)]
    pub fit: bool,
    /// Constant `c` of the large-separation asymptote.
    #[arg(long, default_value_t = qet_core::ising::C_ASYMPTOTE, allow_negative_numbers = true)]
    pub c: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FieldArgs {
    /// Alice's profile as `x,value` CSV.
    #[arg(long, value_name = "FILE")]
    pub lambda: Option<PathBuf>,
    /// Analytic Alice profile `eps:a:w` for `eps·sin²(π(x−a)/w)`, used without `--lambda`.
    #[arg(long, default_value = "0.1:0:1", allow_hyphen_values = true)]
    pub lambda_sin2: String,
    /// Bob's profile as `x,value` CSV.
    #[arg(long, value_name = "FILE")]
    pub p: Option<PathBuf>,
    /// Analytic Bob profile `eps:a:w`, used without `--p`.
    #[arg(long, default_value = "1:3:1", allow_hyphen_values = true)]
    pub p_sin2: String,
    /// Delay between Alice's measurement and Bob's operation.
    #[arg(long = "T", default_value_t = 3.0, allow_negative_numbers = true)]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub theta: ThetaArg,
    /// Grid intervals for analytic profiles.
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
    /// Modes of the finite-mode overlap oracle.
    #[arg(long, default_value_t = 16384)]
    pub oracle_modes: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Minimal,
    Chain,
    Ising,
    Field,
    All,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("range `{s}` must be start:stop:count"));
        };
        let f = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in `{s}`"));
        let count: usize = n.trim().parse().map_err(|_| format!("bad count `{n}` in `{s}`"))?;
        let (start, stop) = (f(a)?, f(b)?);
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(format!("range `{s}` needs finite ends and a positive count"));
        }
        Ok(Self { start, stop, count })
    }
}

impl Serialize for RangeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}:{}:{}", self.start, self.stop, self.count))
    }
}

impl RangeSpec {
    pub fn points(&self, log: bool) -> Result<Vec<f64>, String> {
        if log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err("a log range needs positive ends".into());
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                if i == 0 {
                    self.start
                } else if i + 1 == self.count {
                    self.stop
                } else if log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect())
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepOpts {
    /// Parameter to vary.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_hyphen_values = true)]
    pub range: RangeSpec,
    /// Logarithmic spacing.
    #[arg(long)]
    pub log: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub target: SweepTarget,
}

#[derive(Subcommand, Debug)]
pub enum SweepTarget {
    /// Sweep `h`, `k` or `theta`.
    Minimal {
        #[command(flatten)]
        sweep: SweepOpts,
        #[command(flatten)]
        args: MinimalArgs,
    },
    /// Sweep `theta`.
    Chain {
        #[command(flatten)]
        sweep: SweepOpts,
        #[command(flatten)]
        args: ChainArgs,
    },
    /// Sweep `J` at a single separation.
    Ising {
        #[command(flatten)]
        sweep: SweepOpts,
        #[command(flatten)]
        args: IsingArgs,
    },
    /// Sweep `T` or `theta`.
    Field {
        #[command(flatten)]
        sweep: SweepOpts,
        #[command(flatten)]
        args: FieldArgs,
    },
}

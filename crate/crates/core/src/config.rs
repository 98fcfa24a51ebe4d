//! Experiment configuration files (TOML).
//!
//! ```toml
//! [source]
//! symbols = ["0", "1"]          # optional
//! pmf = ["1/2", "1/2"]
//!
//! [distortion]
//! kind = "hamming"              # hamming | matrix | peak
//! # matrix = [["0", "1"], ["1", "0"]]
//!
//! [grid]
//! blocklengths = [4, 8]
//! levels = ["1/4", "1/2"]
//! rates = [0.0, 0.25]
//! output_types = "all"          # all | best | [[1, 3], [2, 2]]
//!
//! [channel]
//! kind = "bsc"                  # bsc | dmc | ball | identity
//! crossover = 0.05
//!
//! [run]
//! trials = 10000
//! seed = 7
//! ```
//!
//! Rationals are written as `"num/den"` strings and parsed exactly. Unknown
//! keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

use crate::channel::{BallChannel, ChannelModel, Dmc, Repetition};
use crate::distortion::{DistortionFn, DistortionMatrix, PeakDistortion};
use crate::error::{Error, Result};
use crate::prob::ArithPolicy;
use crate::types::{format_rational, parse_rational, Alphabet, RationalPmf, TypeVector};
use crate::{Limits, Rational};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub source: SourceSection,
    pub distortion: DistortionSection,
    pub grid: GridSection,
    pub channel: Option<ChannelSection>,
    #[serde(default)]
    pub run: RunSection,
    pub separation: Option<SeparationSection>,
    #[serde(default)]
    pub limits: LimitsSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub symbols: Option<Vec<String>>,
    pub pmf: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistortionKind {
    Hamming,
    Matrix,
    Peak,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionSection {
    pub kind: DistortionKind,
    /// Output alphabet size for `hamming` (defaults to the source size).
    pub outputs: Option<usize>,
    pub output_symbols: Option<Vec<String>>,
    pub matrix: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OutputTypesSpec {
    Keyword(String),
    List(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub blocklengths: Vec<usize>,
    pub levels: Vec<String>,
    #[serde(default)]
    pub rates: Vec<f64>,
    pub output_types: Option<OutputTypesSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bsc,
    Dmc,
    Ball,
    Identity,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub kind: ChannelKind,
    pub crossover: Option<f64>,
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Ball radius; defaults to the distortion level of the grid cell.
    pub radius: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Trials for estimating the channel's excess probability; defaults to
    /// `trials`.
    pub omega_trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub arith: ArithPolicy,
    /// Random fixed sequences per side in duality checks.
    #[serde(default = "default_probes")]
    pub probes: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            omega_trials: None,
            seed: 0,
            output_dir: None,
            arith: ArithPolicy::default(),
            probes: default_probes(),
        }
    }
}

fn default_trials() -> u64 {
    1000
}

fn default_probes() -> usize {
    4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WrapperKind {
    Identity,
    Repetition,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSection {
    pub wrapper: WrapperKind,
    #[serde(default = "default_repeat")]
    pub repeat: usize,
    /// The demo aborts unless the wrapped channel's estimated excess
    /// probability is below this.
    pub omega_threshold: f64,
    pub rate: f64,
    /// Second rate tried: the rate exponent plus this many bits.
    #[serde(default = "default_overshoot")]
    pub overshoot: f64,
}

fn default_repeat() -> usize {
    1
}

fn default_overshoot() -> f64 {
    0.3
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    pub enumeration_budget: Option<u64>,
    pub exact_max_blocklength: Option<usize>,
    pub exact_power_limit: Option<u64>,
    pub explicit_codebook_limit: Option<u64>,
}

/// Distortion function resolved from the config.
#[derive(Clone, Debug)]
pub enum Distortion {
    Additive(DistortionMatrix),
    Peak(PeakDistortion),
}

impl Distortion {
    pub fn as_fn(&self) -> &dyn DistortionFn {
        match self {
            Distortion::Additive(m) => m,
            Distortion::Peak(p) => p,
        }
    }

    /// Per-letter matrix underlying either kind.
    pub fn matrix(&self) -> &DistortionMatrix {
        match self {
            Distortion::Additive(m) => m,
            Distortion::Peak(p) => &p.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputTypes {
    All,
    Best,
    List(Vec<TypeVector>),
}

#[derive(Clone, Debug)]
pub enum ChannelSpec {
    Bsc(f64),
    Dmc(Vec<Vec<f64>>),
    Ball(Option<Rational>),
    Identity,
}

/// A validated experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub alphabet: Alphabet,
    pub output_alphabet: Alphabet,
    pub pmf: RationalPmf,
    pub distortion: Distortion,
    pub blocklengths: Vec<usize>,
    pub levels: Vec<Rational>,
    pub rates: Vec<f64>,
    pub output_types: Option<OutputTypes>,
    pub channel: Option<ChannelSpec>,
    pub run: RunSection,
    pub separation: Option<SeparationSection>,
    pub limits: Limits,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let pmf = RationalPmf::parse(&raw.source.pmf)?;
        let alphabet = match raw.source.symbols {
            Some(symbols) => Alphabet::new(symbols)?,
            None => Alphabet::indexed(pmf.len())?,
        };
        if alphabet.size() != pmf.len() {
            return Err(Error::LengthMismatch {
                expected: alphabet.size(),
                found: pmf.len(),
            });
        }

        let section = raw.distortion;
        let matrix = match section.kind {
            DistortionKind::Hamming => {
                if section.matrix.is_some() {
                    return Err(invalid(
                        "distortion.matrix is not used with kind = \"hamming\"",
                    ));
                }
                DistortionMatrix::hamming(
                    alphabet.size(),
                    section.outputs.unwrap_or(alphabet.size()),
                )
            }
            DistortionKind::Matrix | DistortionKind::Peak => {
                let grid = section
                    .matrix
                    .ok_or_else(|| invalid("distortion.matrix is required"))?;
                let m = DistortionMatrix::parse(&grid)?;
                if section.outputs.is_some_and(|k| k != m.cols()) {
                    return Err(invalid("distortion.outputs disagrees with the matrix"));
                }
                m
            }
        };
        if matrix.rows() != alphabet.size() {
            return Err(Error::LengthMismatch {
                expected: alphabet.size(),
                found: matrix.rows(),
            });
        }
        let output_alphabet = match section.output_symbols {
            Some(symbols) => Alphabet::new(symbols)?,
            None => Alphabet::indexed(matrix.cols())?,
        };
        if output_alphabet.size() != matrix.cols() {
            return Err(Error::LengthMismatch {
                expected: matrix.cols(),
                found: output_alphabet.size(),
            });
        }
        let distortion = match section.kind {
            DistortionKind::Peak => Distortion::Peak(PeakDistortion(matrix)),
            _ => Distortion::Additive(matrix),
        };

        let grid = raw.grid;
        if grid.blocklengths.is_empty() || grid.levels.is_empty() {
            return Err(invalid(
                "grid.blocklengths and grid.levels must be nonempty",
            ));
        }
        for &n in &grid.blocklengths {
            // Fails unless n is a positive multiple of the lattice constant.
            pmf.type_at(n)?;
        }
        let levels = grid
            .levels
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(l) = levels.iter().find(|l| **l < Rational::from_integer(0)) {
            return Err(invalid(format!(
                "negative distortion level {}",
                format_rational(l)
            )));
        }
        if let Some(r) = grid.rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(invalid(format!("invalid rate {r}")));
        }
        let output_types = match grid.output_types {
            None => None,
            Some(OutputTypesSpec::Keyword(k)) => Some(match k.as_str() {
                "all" => OutputTypes::All,
                "best" => OutputTypes::Best,
                other => return Err(invalid(format!("unknown output_types {other:?}"))),
            }),
            Some(OutputTypesSpec::List(list)) => {
                let types = list
                    .into_iter()
                    .map(TypeVector::new)
                    .collect::<Result<Vec<_>>>()?;
                if let Some(t) = types
                    .iter()
                    .find(|t| t.alphabet_size() != output_alphabet.size())
                {
                    return Err(invalid(format!(
                        "output type {t} has the wrong alphabet size"
                    )));
                }
                Some(OutputTypes::List(types))
            }
        };

        let channel = raw.channel.map(parse_channel).transpose()?;
        if raw.run.trials == 0 || raw.run.omega_trials == Some(0) {
            return Err(invalid("trial counts must be positive"));
        }
        if let Some(sep) = &raw.separation {
            if sep.repeat == 0 {
                return Err(invalid("separation.repeat must be positive"));
            }
            if !(sep.rate >= 0.0) || !(sep.omega_threshold > 0.0) || !(sep.overshoot >= 0.0) {
                return Err(invalid(
                    "separation rate, omega_threshold and overshoot must be nonnegative",
                ));
            }
            if sep.wrapper == WrapperKind::Identity && sep.repeat != 1 {
                return Err(invalid("separation.repeat needs wrapper = \"repetition\""));
            }
        }

        let defaults = Limits::DEFAULT;
        let l = raw.limits;
        let limits = Limits {
            enumeration_budget: l.enumeration_budget.unwrap_or(defaults.enumeration_budget),
            exact_max_blocklength: l
                .exact_max_blocklength
                .unwrap_or(defaults.exact_max_blocklength),
            exact_power_limit: l
                .exact_power_limit
                .map_or(defaults.exact_power_limit, u128::from),
            explicit_codebook_limit: l
                .explicit_codebook_limit
                .map_or(defaults.explicit_codebook_limit, u128::from),
        };

        Ok(Self {
            alphabet,
            output_alphabet,
            pmf,
            distortion,
            blocklengths: grid.blocklengths,
            levels,
            rates: grid.rates,
            output_types,
            channel,
            run: raw.run,
            separation: raw.separation,
            limits,
        })
    }

    /// Source type `n * pmf`.
    pub fn source_type(&self, n: usize) -> Result<TypeVector> {
        self.pmf.type_at(n)
    }

    pub fn omega_trials(&self) -> u64 {
        self.run.omega_trials.unwrap_or(self.run.trials)
    }

    /// Builds the configured channel for a grid cell at distortion `level`.
    pub fn build_channel(&self, level: Rational) -> Result<Box<dyn ChannelModel>> {
        let spec = self
            .channel
            .as_ref()
            .ok_or_else(|| invalid("a [channel] section is required"))?;
        build_channel(spec, self.distortion.matrix(), level)
    }

    /// The configured channel inside the separation wrapper.
    pub fn build_wrapped_channel(&self, level: Rational) -> Result<Box<dyn ChannelModel>> {
        let sep = self
            .separation
            .as_ref()
            .ok_or_else(|| invalid("a [separation] section is required"))?;
        let inner = self.build_channel(level)?;
        Ok(match sep.wrapper {
            WrapperKind::Identity => inner,
            WrapperKind::Repetition => Box::new(Repetition::new(inner, sep.repeat)?),
        })
    }
}

fn parse_channel(c: ChannelSection) -> Result<ChannelSpec> {
    let unused = |name: &str, present: bool| {
        if present {
            Err(invalid(format!(
                "channel.{name} is not used with this kind"
            )))
        } else {
            Ok(())
        }
    };
    match c.kind {
        ChannelKind::Bsc => {
            unused("matrix", c.matrix.is_some())?;
            unused("radius", c.radius.is_some())?;
            let eps = c
                .crossover
                .ok_or_else(|| invalid("channel.crossover is required"))?;
            Dmc::bsc(eps)?;
            Ok(ChannelSpec::Bsc(eps))
        }
        ChannelKind::Dmc => {
            unused("crossover", c.crossover.is_some())?;
            unused("radius", c.radius.is_some())?;
            let m = c
                .matrix
                .ok_or_else(|| invalid("channel.matrix is required"))?;
            Dmc::new(m.clone())?;
            Ok(ChannelSpec::Dmc(m))
        }
        ChannelKind::Ball => {
            unused("crossover", c.crossover.is_some())?;
            unused("matrix", c.matrix.is_some())?;
            Ok(ChannelSpec::Ball(
                c.radius.as_deref().map(parse_rational).transpose()?,
            ))
        }
        ChannelKind::Identity => {
            unused("crossover", c.crossover.is_some())?;
            unused("matrix", c.matrix.is_some())?;
            unused("radius", c.radius.is_some())?;
            Ok(ChannelSpec::Identity)
        }
    }
}

pub fn build_channel(
    spec: &ChannelSpec,
    d: &DistortionMatrix,
    level: Rational,
) -> Result<Box<dyn ChannelModel>> {
    let ch: Box<dyn ChannelModel> = match spec {
        ChannelSpec::Bsc(eps) => Box::new(Dmc::bsc(*eps)?),
        ChannelSpec::Dmc(m) => Box::new(Dmc::new(m.clone())?),
        ChannelSpec::Ball(radius) => {
            Box::new(BallChannel::new(d.clone(), radius.unwrap_or(level))?)
        }
        ChannelSpec::Identity => Box::new(Dmc::identity(d.rows())?),
    };
    if ch.input_size() != d.rows() || ch.output_size() != d.cols() {
        return Err(invalid(format!(
            "channel {} is {}x{} but the distortion is {}x{}",
            ch.name(),
            ch.input_size(),
            ch.output_size(),
            d.rows(),
            d.cols()
        )));
    }
    Ok(ch)
}

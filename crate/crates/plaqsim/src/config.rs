//! Declarative experiment configuration, read from a versioned TOML file.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::angular::HalfInt;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::mitigation::ExtrapolationMode;
use crate::simulator::{NoiseModel, Readout, SimMethod};

pub const CONFIG_VERSION: u32 = 1;

pub fn serialize_half_int<S: Serializer>(value: &HalfInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

pub fn deserialize_half_int<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<HalfInt, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(f64),
    }
    match Raw::deserialize(d)? {
        Raw::Text(s) => s.parse().map_err(|e| D::Error::custom(format!("{e}"))),
        Raw::Number(v) => HalfInt::try_from_f64(v)
            .ok_or_else(|| D::Error::custom(format!("{v} is not a half-integer"))),
    }
}

/// Noise parameters as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Two-qubit depolarizing probability applied after each CNOT.
    pub cnot_depolarizing: f64,
    /// Uniform per-qubit readout flip probability (both directions).
    #[serde(default)]
    pub readout_flip: f64,
    /// Optional explicit per-qubit `(p01, p10)` pairs; overrides
    /// `readout_flip` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_per_qubit: Option<Vec<(f64, f64)>>,
}

impl NoiseConfig {
    pub fn ideal() -> Self {
        NoiseConfig {
            cnot_depolarizing: 0.0,
            readout_flip: 0.0,
            readout_per_qubit: None,
        }
    }

    pub fn build(&self, width: usize) -> Result<NoiseModel> {
        let readout = match &self.readout_per_qubit {
            Some(pairs) => Readout::PerQubit(pairs.clone()),
            None => Readout::uniform_flip(width, self.readout_flip),
        };
        let model = NoiseModel {
            cnot_depolarizing: self.cnot_depolarizing,
            readout,
        };
        model.validate(width)?;
        Ok(model)
    }
}

/// Output controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// `csv` or `tsv`.
    #[serde(default = "default_format")]
    pub format: String,
    /// Emit a machine-readable run manifest next to the data files.
    #[serde(default = "default_true")]
    pub manifest: bool,
}

fn default_format() -> String {
    "csv".to_string()
}

fn default_true() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: None,
            format: default_format(),
            manifest: true,
        }
    }
}

impl OutputConfig {
    pub fn delimiter(&self) -> Result<char> {
        match self.format.as_str() {
            "csv" => Ok(','),
            "tsv" => Ok('\t'),
            other => Err(Error::Config(format!(
                "output format must be csv or tsv, got {other:?}"
            ))),
        }
    }
}

/// A full experiment: lattice, coupling, grids, noise, sampling, and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub lattice: LatticeSpec,
    pub g_squared: f64,
    /// Optional sweep over couplings for the spectrum study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_squared_sweep: Option<Vec<f64>>,
    pub time_grid: Vec<f64>,
    pub n_trot_values: Vec<usize>,
    pub r_values: Vec<u32>,
    pub noise: NoiseConfig,
    pub shots: u64,
    #[serde(default = "default_calibration_shots")]
    pub calibration_shots: u64,
    /// Master seed; every stochastic stage derives its own stream from it.
    pub seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub extrapolation_mode: ExtrapolationMode,
    #[serde(default = "default_sim_method")]
    pub sim_method: SimMethod,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_calibration_shots() -> u64 {
    8192
}

fn default_bootstrap() -> usize {
    200
}

fn default_sim_method() -> SimMethod {
    SimMethod::DensityMatrix
}

impl ExperimentConfig {
    /// The standard experiment: two plaquettes, `g^2 = 0.2`, the eight-point
    /// time grid from 0.02 to 0.37, one and two Trotter steps, noise scales
    /// 1 and 2.
    pub fn standard() -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            lattice: LatticeSpec::two_plaquette_half(),
            g_squared: 0.2,
            g_squared_sweep: None,
            time_grid: vec![0.02, 0.07, 0.12, 0.17, 0.22, 0.27, 0.32, 0.37],
            n_trot_values: vec![1, 2],
            r_values: vec![1, 2],
            noise: NoiseConfig {
                cnot_depolarizing: 0.02,
                readout_flip: 0.02,
                readout_per_qubit: None,
            },
            shots: 8192,
            calibration_shots: 8192,
            seed: 20190528,
            bootstrap_resamples: 200,
            extrapolation_mode: ExtrapolationMode::Probabilities,
            sim_method: SimMethod::DensityMatrix,
            outputs: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.lattice.validate()?;
        if self.g_squared <= 0.0 {
            return Err(Error::Config("g_squared must be positive".into()));
        }
        if self.time_grid.is_empty() {
            return Err(Error::Config("time_grid must not be empty".into()));
        }
        if self.n_trot_values.iter().any(|&n| n == 0) {
            return Err(Error::Config("n_trot_values must be at least 1".into()));
        }
        if self.r_values.is_empty() || !self.r_values.contains(&1) {
            return Err(Error::Config(
                "r_values must include the unscaled circuit (r = 1)".into(),
            ));
        }
        if self.r_values.iter().any(|&r| r != 1 && r != 2) {
            return Err(Error::Config("r_values may only contain 1 and 2".into()));
        }
        if self.shots == 0 || self.calibration_shots == 0 {
            return Err(Error::Config("shot counts must be at least 1".into()));
        }
        self.noise.build(self.lattice.total_qubits())?;
        self.outputs.delimiter()?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Derive a per-cell seed from the master seed and a role tag. SplitMix64
/// so that neighboring cells decorrelate.
pub fn derive_seed(master: u64, tag: &str, indices: &[u64]) -> u64 {
    let mut state = master;
    let mut mix = |v: u64| {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(v);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        state = z ^ (z >> 31);
    };
    for byte in tag.bytes() {
        mix(u64::from(byte));
    }
    for &i in indices {
        mix(i);
    }
    state
}

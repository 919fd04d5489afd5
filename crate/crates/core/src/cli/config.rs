use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{BoundInputs, Rho};
use crate::error::{Error, Result};
use crate::fractal_dim::FitWindow;
use crate::stable_dist::MultivariateStableSpec;
use crate::tail_index::{Centering, K1Policy};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A complete experiment description, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// Wall-clock budget; the runner stops scheduling tasks once exceeded.
    #[serde(default)]
    pub max_seconds: Option<f64>,
    pub experiment: Experiment,
}

fn one() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Simulate(SimulateConfig),
    Dimension(DimensionConfig),
    Tailindex(TailIndexConfig),
    SynthGap(SynthGapConfig),
    MlpGap(MlpGapConfig),
    Bound(BoundConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate(_) => "simulate",
            Experiment::Dimension(_) => "dimension",
            Experiment::Tailindex(_) => "tailindex",
            Experiment::SynthGap(_) => "synth-gap",
            Experiment::MlpGap(_) => "mlp-gap",
            Experiment::Bound(_) => "bound",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    #[default]
    Levy,
    Sde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub process: ProcessKind,
    pub law: MultivariateStableSpec,
    #[serde(default = "unit")]
    pub horizon: f64,
    pub step: f64,
    /// SDE only: centre of the quadratic drift `½‖w − c‖²`; no drift when absent.
    #[serde(default)]
    pub drift_center: Option<Vec<f64>>,
    #[serde(default)]
    pub gaussian_scale: f64,
    #[serde(default = "unit")]
    pub stable_scale: f64,
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    pub divergence_cap: f64,
    /// Also write each trajectory in the binary columnar form.
    #[serde(default)]
    pub write_trajectories: bool,
}

fn unit() -> f64 {
    1.0
}

fn default_cap() -> f64 {
    crate::process_sim::DEFAULT_DIVERGENCE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionConfig {
    pub alphas: Vec<f64>,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_scales")]
    pub scale_count: usize,
    #[serde(default)]
    pub window: FitWindow,
}

fn two() -> usize {
    2
}

fn default_points() -> usize {
    100_000
}

fn default_scales() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailIndexConfig {
    /// Tail index driving each group.
    pub group_alphas: Vec<f64>,
    #[serde(default = "default_group_size")]
    pub group_size: usize,
    /// Increments per coordinate.
    pub steps: usize,
    #[serde(default)]
    pub k1: K1Policy,
    #[serde(default)]
    pub centering: Centering,
}

fn default_group_size() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthGapConfig {
    #[serde(default = "default_synth_dim")]
    pub dim: usize,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_synth_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_synth_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "unit")]
    pub horizon: f64,
    #[serde(default = "default_synth_step")]
    pub step: f64,
    /// Training sets drawn per trajectory.
    #[serde(default = "default_subsets")]
    pub subsets: usize,
}

fn default_synth_dim() -> usize {
    10
}

fn default_population() -> usize {
    100_000
}

fn default_synth_alphas() -> Vec<f64> {
    vec![1.0, 1.5, 2.0]
}

fn default_synth_ns() -> Vec<usize> {
    vec![100, 1000, 10_000]
}

fn default_synth_step() -> f64 {
    1e-3
}

fn default_subsets() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpGapConfig {
    #[serde(default = "default_synth_dim")]
    pub input_dim: usize,
    pub hidden_width: usize,
    /// Number of hidden layers per cell.
    pub depths: Vec<usize>,
    pub etas: Vec<f64>,
    pub batches: Vec<usize>,
    pub epochs: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Features are multiplied by this before training.
    #[serde(default = "default_feature_scale")]
    pub feature_scale: f64,
    #[serde(default)]
    pub k1: K1Policy,
    #[serde(default)]
    pub centering: Centering,
}

fn default_feature_scale() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    N,
    DH,
    Gamma,
    CouplingM,
    LossBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub inputs: BoundInputs,
    #[serde(default)]
    pub rho: Option<Rho>,
    pub sweep: SweepParameter,
    pub values: Vec<f64>,
}

fn invalid(reason: impl Into<String>) -> Error {
    Error::Config {
        path: None,
        reason: reason.into(),
    }
}

fn check_alphas(name: &str, alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(invalid(format!("`{name}` must not be empty")));
    }
    for &a in alphas {
        if !(a > 0.0 && a <= 2.0) {
            return Err(invalid(format!("`{name}` entry {a} outside (0, 2]")));
        }
    }
    Ok(())
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(invalid(format!("`{name}` must be positive")))
    } else {
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("`{name}` must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config { reason, .. } => Error::Config {
                path: Some(path.to_path_buf()),
                reason,
            },
            other => other,
        })
    }

    /// Checks every parameter before any work starts.
    pub fn validate(&self) -> Result<()> {
        nonzero("repetitions", self.repetitions)?;
        if let Some(s) = self.max_seconds {
            positive("max_seconds", s)?;
        }
        match &self.experiment {
            Experiment::Simulate(c) => {
                positive("horizon", c.horizon)?;
                positive("step", c.step)?;
                if c.step > c.horizon {
                    return Err(invalid("`step` must not exceed `horizon`"));
                }
                let d = c.law.dim();
                for (name, v) in [("drift_center", &c.drift_center), ("initial", &c.initial)] {
                    if let Some(v) = v {
                        if v.len() != d {
                            return Err(invalid(format!(
                                "`{name}` has length {} but the law has dimension {d}",
                                v.len()
                            )));
                        }
                    }
                }
                if c.process == ProcessKind::Levy && (c.drift_center.is_some() || c.gaussian_scale != 0.0) {
                    return Err(invalid("drift and Gaussian terms need `process = \"sde\"`"));
                }
                positive("divergence_cap", c.divergence_cap)?;
                if !(c.gaussian_scale.is_finite() && c.stable_scale.is_finite()) {
                    return Err(invalid("coefficient scales must be finite"));
                }
            }
            Experiment::Dimension(c) => {
                check_alphas("alphas", &c.alphas)?;
                nonzero("dim", c.dim)?;
                if c.points < 2 {
                    return Err(invalid("`points` must be at least 2"));
                }
                if c.scale_count < 2 {
                    return Err(invalid("`scale_count` must be at least 2"));
                }
            }
            Experiment::Tailindex(c) => {
                check_alphas("group_alphas", &c.group_alphas)?;
                nonzero("group_size", c.group_size)?;
                if c.steps < 4 {
                    return Err(invalid("`steps` must be at least 4"));
                }
                if let K1Policy::Fixed(k1) = c.k1 {
                    if k1 < 2 || 2 * k1 > c.steps * c.group_size {
                        return Err(invalid(format!("fixed k1 = {k1} leaves fewer than two blocks")));
                    }
                }
            }
            Experiment::SynthGap(c) => {
                check_alphas("alphas", &c.alphas)?;
                nonzero("dim", c.dim)?;
                nonzero("population", c.population)?;
                nonzero("subsets", c.subsets)?;
                if c.ns.is_empty() || c.ns.iter().any(|&n| n == 0 || n > c.population) {
                    return Err(invalid("every `ns` entry must lie in 1..=population"));
                }
                positive("horizon", c.horizon)?;
                positive("step", c.step)?;
                if c.step > c.horizon {
                    return Err(invalid("`step` must not exceed `horizon`"));
                }
            }
            Experiment::MlpGap(c) => {
                nonzero("input_dim", c.input_dim)?;
                nonzero("hidden_width", c.hidden_width)?;
                nonzero("epochs", c.epochs)?;
                nonzero("train_size", c.train_size)?;
                nonzero("test_size", c.test_size)?;
                positive("feature_scale", c.feature_scale)?;
                if c.depths.is_empty() || c.depths.contains(&0) {
                    return Err(invalid("`depths` must be non-empty and positive"));
                }
                if c.etas.is_empty() {
                    return Err(invalid("`etas` must not be empty"));
                }
                for &e in &c.etas {
                    positive("etas", e)?;
                }
                if c.batches.is_empty() || c.batches.iter().any(|&b| b == 0 || b > c.train_size) {
                    return Err(invalid("every `batches` entry must lie in 1..=train_size"));
                }
            }
            Experiment::Bound(c) => {
                c.inputs.validate()?;
                if c.values.is_empty() {
                    return Err(invalid("`values` must not be empty"));
                }
                if c.rho.is_some() && c.inputs.diameter.is_none() {
                    return Err(invalid("`rho` needs `inputs.diameter`"));
                }
                for &v in &c.values {
                    c.swept(v).validate()?;
                }
            }
        }
        Ok(())
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the config.
    /// The output directory and format do not enter the hash.
    pub fn hash(&self) -> String {
        let canonical = Self {
            out: default_out(),
            format: OutputFormat::default(),
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl BoundConfig {
    /// Inputs with the swept parameter set to `value`.
    pub fn swept(&self, value: f64) -> BoundInputs {
        let mut inputs = self.inputs;
        match self.sweep {
            SweepParameter::N => inputs.n = value as usize,
            SweepParameter::DH => inputs.d_h = value,
            SweepParameter::Gamma => inputs.gamma = value,
            SweepParameter::CouplingM => inputs.coupling_m = Some(value),
            SweepParameter::LossBound => inputs.loss_bound = value,
        }
        if let Some(rho) = self.rho {
            inputs.rho_n = Some(rho.eval(inputs.n));
        }
        inputs
    }
}

/// Example configuration for each experiment kind, as TOML.
pub fn example(kind: &str) -> Option<&'static str> {
    Some(match kind {
        "simulate" => include_str!("../../configs/simulate.toml"),
        "dimension" => include_str!("../../configs/dimension.toml"),
        "tailindex" => include_str!("../../configs/tailindex.toml"),
        "synth-gap" => include_str!("../../configs/synth-gap.toml"),
        "mlp-gap" => include_str!("../../configs/mlp-gap.toml"),
        "bound" => include_str!("../../configs/bound.toml"),
        _ => return None,
    })
}

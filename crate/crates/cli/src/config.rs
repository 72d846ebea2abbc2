//! Experiment configuration. The grammar is documented in `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CmiSweep,
    Expansion,
    Thresholds,
    Recover,
    StabilizerCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CmiSweep => "cmi-sweep",
            ExperimentKind::Expansion => "expansion",
            ExperimentKind::Thresholds => "thresholds",
            ExperimentKind::Recover => "recover",
            ExperimentKind::StabilizerCheck => "stabilizer-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub beta: f64,
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub tripartition: Option<TripartitionSpec>,
    #[serde(default)]
    pub expansion: ExpansionSpec,
    #[serde(default)]
    pub thresholds: ThresholdSpec,
    #[serde(default)]
    pub recovery: RecoverySpec,
    #[serde(default)]
    pub budget: BudgetSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    IsingChain {
        n: usize,
        #[serde(default)]
        periodic: bool,
    },
    IsingGrid {
        rows: usize,
        cols: usize,
        #[serde(default)]
        periodic: bool,
    },
    ToricPatch {
        l: usize,
        #[serde(default = "one")]
        coupling: f64,
    },
    ClusterChain {
        n: usize,
        #[serde(default = "one")]
        coupling: f64,
    },
    Classical(ClassicalSpec),
    Pauli(PauliSpec),
    ClassicalFromFile {
        path: PathBuf,
    },
    PauliFromFile {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

/// Explicit classical model: hyperedges with one energy table each, or one
/// shared `table`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    pub n: usize,
    #[serde(default = "two")]
    pub q: usize,
    pub edges: Vec<Vec<usize>>,
    pub tables: Option<Vec<Vec<f64>>>,
    pub table: Option<Vec<f64>>,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliSpec {
    pub n: usize,
    #[serde(default = "two")]
    pub q: usize,
    pub terms: Vec<TermSpec>,
    pub generators: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: f64,
    pub operator: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    #[default]
    BitFlip,
    Replacement,
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    SingleSite,
    Brickwork,
}

/// A scalar or a list in the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub channel: ChannelKind,
    #[serde(default = "zero_eps")]
    pub epsilon: OneOrMany<f64>,
    #[serde(default = "one_usize")]
    pub depth: usize,
    #[serde(default)]
    pub layout: Layout,
    pub sites: Option<Vec<usize>>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            channel: ChannelKind::default(),
            epsilon: zero_eps(),
            depth: 1,
            layout: Layout::default(),
            sites: None,
        }
    }
}

fn zero_eps() -> OneOrMany<f64> {
    OneOrMany::One(0.0)
}

fn one_usize() -> usize {
    1
}

/// Either an annulus family around `center`, or one explicit `a`/`c` pair
/// with B the remaining sites.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripartitionSpec {
    pub center: Option<Vec<usize>>,
    #[serde(default = "one_usize")]
    pub radius_min: usize,
    pub radius_max: Option<usize>,
    pub a: Option<Vec<usize>>,
    pub c: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSpec {
    pub w_max: Option<usize>,
    pub observation: Option<Vec<usize>>,
    pub x_ac: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    #[serde(default = "default_degrees")]
    pub degree: Vec<usize>,
    #[serde(default = "default_betas")]
    pub beta: Vec<f64>,
    #[serde(default = "default_qs")]
    pub q: Vec<usize>,
    #[serde(default = "default_depths")]
    pub depth: Vec<usize>,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec {
            degree: default_degrees(),
            beta: default_betas(),
            q: default_qs(),
            depth: default_depths(),
        }
    }
}

fn default_degrees() -> Vec<usize> {
    vec![1, 2, 4]
}

fn default_betas() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

fn default_qs() -> Vec<usize> {
    vec![2]
}

fn default_depths() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySpec {
    #[serde(default = "default_radii")]
    pub radii: Vec<usize>,
}

impl Default for RecoverySpec {
    fn default() -> Self {
        RecoverySpec {
            radii: default_radii(),
        }
    }
}

fn default_radii() -> Vec<usize> {
    vec![1, 2, 3]
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub bits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
}

/// A parsed config together with its raw bytes and location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub raw: Vec<u8>,
    pub dir: PathBuf,
}

impl LoadedConfig {
    pub fn parse(text: &str, dir: &Path) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("cannot parse config: {e}")))?;
        Ok(LoadedConfig {
            config,
            raw: text.as_bytes().to_vec(),
            dir: dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &dir)
    }

    /// Resolves a path from the config relative to the config's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }
}

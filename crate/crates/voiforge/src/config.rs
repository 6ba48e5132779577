//! JSON configuration files. Every file carries `schema_version`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use voiforge_core::learn::ModelKind;
use voiforge_core::perturb::{Modification, PerturbConfig};
use voiforge_core::robust::IccModel;
use voiforge_core::select::SelectionConfig;

use crate::error::{Result, VfError};
use crate::phantom::PhantomSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Reads a JSON file, checks and strips `schema_version`, then decodes the rest.
pub fn load_versioned<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| VfError::Config(format!("{}: {e}", path.display())))?;
    from_versioned_str(&text).map_err(|e| match e {
        VfError::Config(m) => VfError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn from_versioned_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| VfError::Config(e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| VfError::Config("top level must be an object".into()))?;
    match obj.remove("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(VfError::Config(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"))),
        None => return Err(VfError::Config("missing schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| VfError::Config(e.to_string()))
}

/// Serialises `value` with `schema_version` first.
pub fn to_versioned_string<T: Serialize>(value: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Versioned<'a, T> {
        schema_version: u32,
        #[serde(flatten)]
        inner: &'a T,
    }
    serde_json::to_string_pretty(&Versioned { schema_version: SCHEMA_VERSION, inner: value })
        .map_err(|e| VfError::Data(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    FixedModel,
    Reselect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset manifest; mutually exclusive with `phantom`.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    /// Generate the cohort in memory instead of reading a manifest.
    #[serde(default)]
    pub phantom: Option<PhantomSpec>,
    /// Keep only subjects of this subtype.
    #[serde(default)]
    pub subtype: Option<String>,
    #[serde(default = "default_modifications")]
    pub modifications: Vec<Modification>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
    pub output_dir: PathBuf,
    #[serde(default = "default_r_c")]
    pub r_c: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_train_ratio")]
    pub train_ratio: f64,
    #[serde(default = "default_bins")]
    pub bin_count: usize,
    #[serde(default = "default_spacing")]
    pub target_spacing_mm: f64,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ModelKind>,
    #[serde(default = "default_budget")]
    pub tuning_budget: usize,
    #[serde(default = "default_icc_threshold")]
    pub icc_threshold: f64,
    #[serde(default)]
    pub icc_model: IccModel,
    /// Stage II hyperparameters; `r_c` and `seed` here are overridden by the
    /// top-level values.
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub perturb: PerturbConfig,
    /// Also emit per-feature ICC and common-feature SVG plots.
    #[serde(default = "default_true")]
    pub plots: bool,
}

fn default_modifications() -> Vec<Modification> {
    Modification::ALL.to_vec()
}
fn default_scenarios() -> Vec<Scenario> {
    vec![Scenario::FixedModel, Scenario::Reselect]
}
fn default_r_c() -> f64 {
    0.9
}
fn default_train_ratio() -> f64 {
    0.8
}
fn default_bins() -> usize {
    100
}
fn default_spacing() -> f64 {
    1.0
}
fn default_classifiers() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}
fn default_budget() -> usize {
    50
}
fn default_icc_threshold() -> f64 {
    0.9
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// Defaults around a phantom cohort.
    pub fn for_phantom(spec: PhantomSpec, output_dir: PathBuf) -> Self {
        ExperimentConfig {
            manifest: None,
            phantom: Some(spec),
            subtype: None,
            modifications: default_modifications(),
            scenarios: default_scenarios(),
            output_dir,
            r_c: default_r_c(),
            seed: 0,
            train_ratio: default_train_ratio(),
            bin_count: default_bins(),
            target_spacing_mm: default_spacing(),
            classifiers: default_classifiers(),
            tuning_budget: default_budget(),
            icc_threshold: default_icc_threshold(),
            icc_model: IccModel::default(),
            selection: SelectionConfig::default(),
            perturb: PerturbConfig::default(),
            plots: true,
        }
    }

    /// Loads a config; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = load_versioned(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(m) = cfg.manifest.as_mut().filter(|m| m.is_relative()) {
            *m = base.join(&*m);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(VfError::Config(m));
        match (&self.manifest, &self.phantom) {
            (Some(_), Some(_)) => return err("give either manifest or phantom, not both".into()),
            (None, None) => return err("one of manifest or phantom is required".into()),
            (_, Some(p)) => p.validate()?,
            _ => {}
        }
        self.validate_settings()
    }

    /// Checks everything except the data source.
    pub fn validate_settings(&self) -> Result<()> {
        let err = |m: String| Err(VfError::Config(m));
        if self.scenarios.is_empty() {
            return err("scenario set is empty".into());
        }
        if self.classifiers.is_empty() {
            return err("no classifiers".into());
        }
        if !(self.r_c > 0.0 && self.r_c <= 1.0) {
            return err(format!("r_c = {} outside (0, 1]", self.r_c));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return err(format!("train_ratio = {}", self.train_ratio));
        }
        if self.bin_count == 0 || self.tuning_budget == 0 {
            return err("bin_count and tuning_budget must be positive".into());
        }
        if !(self.target_spacing_mm > 0.0) {
            return err("target_spacing_mm must be positive".into());
        }
        let mut sel = self.selection.clone();
        sel.r_c = self.r_c;
        sel.validate().map_err(|e| VfError::Config(e.to_string()))
    }

    pub fn selection_config(&self) -> SelectionConfig {
        let mut s = self.selection.clone();
        s.r_c = self.r_c;
        s.seed = voiforge_core::rng::derive_seed(self.seed, 1);
        s
    }
}

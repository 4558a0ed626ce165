//! Sweep configuration: TOML schema, defaults, and validation.
//!
//! Every field has a default except the dataset list, so a minimal config
//! names its data files and nothing else. The defaults are the reference
//! operating point the accuracy experiments are calibrated against; a
//! golden test pins them. Field values are plain data here; conversion to
//! core types happens through the `to_core`/`to_options` methods so the
//! config layer stays serde-only.

use std::path::PathBuf;

use serde::Deserialize;

use airelm_core::cascade::{PgdOptions, PhaseRange};
use airelm_core::elm::TargetEncoding;
use airelm_core::frontend::ActivationMode;
use airelm_core::pipeline::Variant;
use airelm_core::{Error, Result};

/// Which combiner variants to sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantChoice {
    Ideal,
    Ota,
}

impl VariantChoice {
    pub fn to_core(self) -> Variant {
        match self {
            VariantChoice::Ideal => Variant::IdealWeights,
            VariantChoice::Ota => Variant::OtaWeights,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EncodingChoice {
    #[default]
    ZeroOne,
    PlusMinus,
}

impl EncodingChoice {
    pub fn to_core(self) -> TargetEncoding {
        match self {
            EncodingChoice::ZeroOne => TargetEncoding::ZeroOne,
            EncodingChoice::PlusMinus => TargetEncoding::PlusMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActivationChoice {
    #[default]
    Approximate,
    Exact,
}

impl ActivationChoice {
    pub fn to_core(self) -> ActivationMode {
        match self {
            ActivationChoice::Approximate => ActivationMode::Approximate,
            ActivationChoice::Exact => ActivationMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseChoice {
    Half,
    Full,
}

impl PhaseChoice {
    pub fn to_core(self) -> PhaseRange {
        match self {
            PhaseChoice::Half => PhaseRange::HalfCircle,
            PhaseChoice::Full => PhaseRange::FullCircle,
        }
    }
}

/// Cascade fit settings, one-to-one with the core optimizer options.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgdConfig {
    #[serde(default = "d_max_iters")]
    pub max_iters: usize,
    #[serde(default = "d_step_size")]
    pub step_size: f64,
    #[serde(default = "d_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "d_patience")]
    pub patience: usize,
    /// Phase feasible set. The default is the full circle: it lets the fit
    /// absorb a global sign, which the half-circle set cannot express, and
    /// the accuracy experiments depend on that.
    #[serde(default = "d_phase_range")]
    pub phase_range: PhaseChoice,
    #[serde(default = "d_momentum")]
    pub momentum: f64,
}

fn d_max_iters() -> usize {
    1500
}
fn d_step_size() -> f64 {
    0.01
}
fn d_rel_tol() -> f64 {
    1e-6
}
fn d_patience() -> usize {
    100
}
fn d_phase_range() -> PhaseChoice {
    PhaseChoice::Full
}
fn d_momentum() -> f64 {
    0.95
}

impl Default for PgdConfig {
    fn default() -> Self {
        PgdConfig {
            max_iters: d_max_iters(),
            step_size: d_step_size(),
            rel_tol: d_rel_tol(),
            patience: d_patience(),
            phase_range: d_phase_range(),
            momentum: d_momentum(),
        }
    }
}

impl PgdConfig {
    pub fn to_options(&self) -> PgdOptions {
        PgdOptions {
            max_iters: self.max_iters,
            step_size: self.step_size,
            rel_tol: self.rel_tol,
            patience: self.patience,
            phase_range: self.phase_range.to_core(),
            momentum: self.momentum,
        }
    }
}

/// One dataset entry. Tabular sets give `path`; the image set gives the
/// `images`/`labels` IDX pair. Relative paths resolve against the data root.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub images: Option<PathBuf>,
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

/// The full sweep description parsed from a TOML file.
///
/// Records are produced for the cross product
/// datasets × variants × n_r × ricean_k × seeds, in that nesting order.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "d_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "d_n_r")]
    pub n_r: Vec<usize>,
    #[serde(default = "d_variants")]
    pub variants: Vec<VariantChoice>,
    /// Ricean K factors to sweep. Absent means a pure Rayleigh channel;
    /// an explicit 0 also samples Rayleigh but is recorded as K = 0.
    #[serde(default)]
    pub ricean_k: Option<Vec<f64>>,
    /// Departure angle in radians for the line-of-sight component; drawn
    /// per record when absent.
    #[serde(default)]
    pub aod: Option<f64>,
    /// Arrival angle in radians; drawn per record when absent.
    #[serde(default)]
    pub aoa: Option<f64>,
    /// Number of tunable cascade layers.
    #[serde(default = "d_layers")]
    pub layers: usize,
    /// Elements per cascade layer.
    #[serde(default = "d_layer_size")]
    pub layer_size: usize,
    #[serde(default = "d_pathloss_db")]
    pub pathloss_db: f64,
    #[serde(default = "d_intra_pathloss_db")]
    pub intra_pathloss_db: f64,
    #[serde(default = "d_snr_db")]
    pub snr_db: f64,
    #[serde(default = "d_ridge")]
    pub ridge: f64,
    #[serde(default)]
    pub encoding: EncodingChoice,
    #[serde(default)]
    pub activation: ActivationChoice,
    /// Pixel positions kept per image for the image dataset.
    #[serde(default = "d_mnist_pixels")]
    pub mnist_pixels: usize,
    /// Cap on image-sample count; 0 keeps the whole file.
    #[serde(default = "d_mnist_limit")]
    pub mnist_limit: usize,
    #[serde(default = "d_test_fraction")]
    pub test_fraction: f64,
    /// Worker threads for record computation; 1 is sequential, 0 uses all
    /// cores. Output order is the sweep order either way.
    #[serde(default = "d_workers")]
    pub workers: usize,
    /// When false, the wallclock column is written as 0 so reruns are
    /// byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub pgd: PgdConfig,
}

fn d_seeds() -> Vec<u64> {
    vec![0]
}
fn d_n_r() -> Vec<usize> {
    vec![256]
}
fn d_variants() -> Vec<VariantChoice> {
    vec![VariantChoice::Ideal, VariantChoice::Ota]
}
fn d_layers() -> usize {
    5
}
fn d_layer_size() -> usize {
    4096
}
fn d_pathloss_db() -> f64 {
    -50.0
}
fn d_intra_pathloss_db() -> f64 {
    -10.0
}
fn d_snr_db() -> f64 {
    15.0
}
fn d_ridge() -> f64 {
    1e-6
}
fn d_mnist_pixels() -> usize {
    100
}
fn d_mnist_limit() -> usize {
    10_000
}
fn d_test_fraction() -> f64 {
    0.3
}
fn d_workers() -> usize {
    1
}

/// Dataset names the loader registry understands.
pub const KNOWN_DATASETS: [&str; 3] = ["parkinsons", "wbcd", "mnist"];

impl ExperimentConfig {
    /// Parses a TOML document into a config without validating it.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// Checks list shapes, ranges, and dataset entries. Runs before any
    /// file access so a bad config fails fast.
    pub fn validate(&self) -> Result<()> {
        fn non_empty<T>(list: &[T], what: &str) -> Result<()> {
            if list.is_empty() {
                Err(Error::InvalidArgument(format!("{what} list is empty")))
            } else {
                Ok(())
            }
        }
        non_empty(&self.datasets, "datasets")?;
        non_empty(&self.seeds, "seeds")?;
        non_empty(&self.n_r, "n_r")?;
        non_empty(&self.variants, "variants")?;
        if let Some(ks) = &self.ricean_k {
            non_empty(ks, "ricean_k")?;
            for &k in ks {
                if !k.is_finite() || k < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "ricean_k entries must be finite and non-negative, got {k}"
                    )));
                }
            }
        }
        if self.n_r.iter().any(|&r| r == 0) {
            return Err(Error::InvalidArgument("n_r entries must be positive".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must lie strictly between 0 and 1, got {}",
                self.test_fraction
            )));
        }
        if !(self.ridge > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ridge must be positive, got {}",
                self.ridge
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidArgument("snr_db must be finite".into()));
        }
        if self.variants.contains(&VariantChoice::Ota) {
            if self.layers == 0 {
                return Err(Error::InvalidArgument(
                    "the ota variant needs layers >= 1".into(),
                ));
            }
            if self.layer_size == 0 {
                return Err(Error::InvalidArgument(
                    "the ota variant needs layer_size >= 1".into(),
                ));
            }
        }
        self.pgd.to_options().validate()?;
        for ds in &self.datasets {
            if !KNOWN_DATASETS.contains(&ds.name.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown dataset '{}'; known: {}",
                    ds.name,
                    KNOWN_DATASETS.join(", ")
                )));
            }
            if ds.name == "mnist" {
                if ds.images.is_none() || ds.labels.is_none() {
                    return Err(Error::InvalidArgument(
                        "mnist needs both images and labels paths".into(),
                    ));
                }
                if ds.path.is_some() {
                    return Err(Error::InvalidArgument(
                        "mnist takes images/labels, not path".into(),
                    ));
                }
            } else {
                if ds.path.is_none() {
                    return Err(Error::InvalidArgument(format!(
                        "dataset '{}' needs a path",
                        ds.name
                    )));
                }
                if ds.images.is_some() || ds.labels.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "dataset '{}' takes path, not images/labels",
                        ds.name
                    )));
                }
            }
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.datasets.len() {
            return Err(Error::InvalidArgument(
                "dataset names must be unique within one sweep".into(),
            ));
        }
        if self.mnist_pixels == 0 || self.mnist_pixels > 28 * 28 {
            return Err(Error::InvalidArgument(format!(
                "mnist_pixels must lie in [1, 784], got {}",
                self.mnist_pixels
            )));
        }
        for angle in [self.aod, self.aoa].into_iter().flatten() {
            if !(0.0..std::f64::consts::TAU).contains(&angle) {
                return Err(Error::InvalidArgument(format!(
                    "angles must lie in [0, 2*pi), got {angle}"
                )));
            }
        }
        Ok(())
    }

    /// Number of records one run will produce.
    pub fn record_count(&self) -> usize {
        self.datasets.len()
            * self.variants.len()
            * self.n_r.len()
            * self.ricean_k.as_ref().map_or(1, Vec::len)
            * self.seeds.len()
    }
}

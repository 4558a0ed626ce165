//! End-to-end training, inference, and evaluation.
//!
//! Training stacks the frontend outputs of the training split into the
//! activation matrix, solves the ridge problem for the ideal readout, and,
//! for the over-the-air variant, fits the cascade to those weights. Noise
//! is calibrated once per model: the target SNR is taken against the mean
//! power of the variant's own noiseless combined output over the training
//! split. Inference applies the frozen model to one feature vector;
//! evaluation runs inference over both partitions with one fresh noise draw
//! per sample, each from its own counter-derived substream so results do
//! not depend on evaluation order.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cascade::{cascade_transfer_t, pgd_fit, CascadeState, PgdOptions, PgdTrace};
use crate::channel::{noise_variance_from_snr, ChannelRealization};
use crate::data::LabeledDataset;
use crate::elm::{
    accuracy, build_activation_matrix_with_phases, decide, encode_am, forward_to_frontend,
    ridge_solve, IdealWeights, TargetEncoding,
};
use crate::error::{Error, Result};
use crate::frontend::{activate, ActivationMode, BiasVector};
use crate::seed::StreamKey;
use crate::Cx;

/// Which receive combiner a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// The ridge solution applied directly, as if the combiner were free.
    IdealWeights,
    /// The cascade approximation applied over the air.
    OtaWeights,
}

impl Variant {
    /// Stable lowercase token used in configs and CSV output.
    pub fn token(self) -> &'static str {
        match self {
            Variant::IdealWeights => "ideal",
            Variant::OtaWeights => "ota",
        }
    }
}

/// Everything `train` needs beyond the data and the sampled hardware.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub variant: Variant,
    pub ridge: f64,
    pub encoding: TargetEncoding,
    pub activation: ActivationMode,
    /// Receive SNR in dB; `None` disables noise entirely.
    pub snr_db: Option<f64>,
    pub pgd: PgdOptions,
    /// Transmit phases in half-turn units; `None` means all zero.
    pub tx_phases: Option<DVector<f64>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            variant: Variant::IdealWeights,
            ridge: 1e-6,
            encoding: TargetEncoding::default(),
            activation: ActivationMode::default(),
            snr_db: Some(15.0),
            pgd: PgdOptions::default(),
            tx_phases: None,
        }
    }
}

/// A frozen trained system: readout weights, the hardware realization they
/// were trained against, and the calibrated noise level.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub w_star: IdealWeights,
    /// Fitted cascade parameters; present exactly for the OTA variant.
    pub cascade: Option<CascadeState>,
    /// Cached effective OTA combiner `rho * transfer`, so inference does not
    /// re-walk the cascade per sample.
    pub ota_weights: Option<DVector<Cx>>,
    pub bias: BiasVector,
    pub channels: ChannelRealization,
    pub encoding: TargetEncoding,
    pub activation: ActivationMode,
    /// Transmit phases used at training time, reapplied at inference.
    pub tx_phases: DVector<f64>,
    pub noise_sigma2: f64,
    pub train_ls_error: f64,
    pub pgd_trace: Option<PgdTrace>,
}

impl TrainedModel {
    pub fn variant(&self) -> Variant {
        if self.cascade.is_some() {
            Variant::OtaWeights
        } else {
            Variant::IdealWeights
        }
    }
}

/// Accuracy summary of one trained model over both partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub variant: Variant,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Residual norm of the cascade fit at its solution; 0 for the ideal
    /// variant, which applies the ridge weights without approximation.
    pub mean_abs_weight_residual: f64,
    pub samples_evaluated: usize,
}

/// Root-mean-square magnitude of the frontend inputs over a set of feature
/// vectors: `sqrt(mean over samples and elements of |H x|^2)`.
///
/// This is the empirical scale the bias draw should be anchored to; a bias
/// far below it saturates every element, and one far above it silences the
/// array.
pub fn empirical_input_rms(
    inputs: &[DVector<f64>],
    h: &DMatrix<Cx>,
    theta: &DVector<f64>,
) -> Result<f64> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one sample to estimate the input scale".into(),
        ));
    }
    let mut acc = 0.0;
    for x in inputs {
        let y = forward_to_frontend(&encode_am(x, theta)?, h)?;
        acc += y.norm_squared();
    }
    let rms = (acc / (inputs.len() * h.nrows()) as f64).sqrt();
    if !(rms > 0.0) {
        return Err(Error::InvalidArgument(
            "frontend inputs are identically zero; cannot anchor the bias scale".into(),
        ));
    }
    Ok(rms)
}

fn complex_noise(sigma2: f64, rng: &mut impl Rng) -> Cx {
    if sigma2 > 0.0 {
        let std = (sigma2 / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re * std, im * std)
    } else {
        Cx::new(0.0, 0.0)
    }
}

/// Trains a model on the dataset's training split.
///
/// Builds the activation matrix noiselessly, solves the ridge problem, fits
/// the cascade when the OTA variant is requested (the generator drives its
/// phase initialization), and calibrates the noise variance against the
/// noiseless combined output power on the training split.
pub fn train(
    dataset: &LabeledDataset,
    channels: ChannelRealization,
    bias: BiasVector,
    config: &SystemConfig,
    rng: &mut impl Rng,
) -> Result<TrainedModel> {
    if dataset.train_idx.is_empty() {
        return Err(Error::InvalidArgument("training split is empty".into()));
    }
    if dataset.n_features() != channels.n_t() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} features but the channel has {} transmit antennas",
            dataset.n_features(),
            channels.n_t()
        )));
    }
    if config.variant == Variant::OtaWeights && channels.n_layers() == 0 {
        return Err(Error::InvalidArgument(
            "the over-the-air variant needs at least one cascade layer".into(),
        ));
    }
    let theta = match &config.tx_phases {
        Some(t) => {
            if t.len() != channels.n_t() {
                return Err(Error::InvalidArgument(format!(
                    "{} transmit phases for {} antennas",
                    t.len(),
                    channels.n_t()
                )));
            }
            t.clone()
        }
        None => DVector::zeros(channels.n_t()),
    };

    let (train_inputs, train_labels) = dataset.train_subset();
    let g = build_activation_matrix_with_phases(
        &train_inputs,
        &channels.h,
        &bias,
        config.activation,
        &theta,
    )?;
    let z = DVector::from_fn(train_labels.len(), |i, _| {
        config.encoding.target(train_labels[i])
    });
    let w_star = ridge_solve(&g, &z, config.ridge)?;
    let train_ls_error = (&z - &g.g * &w_star.w_star).norm();

    let (cascade, ota_weights, pgd_trace) = match config.variant {
        Variant::IdealWeights => (None, None, None),
        Variant::OtaWeights => {
            let (state, trace) = pgd_fit(&w_star, &channels, &config.pgd, rng)?;
            let transfer = cascade_transfer_t(&state, &channels)?;
            let effective = transfer * Cx::from(state.rho);
            (Some(state), Some(effective), Some(trace))
        }
    };

    let noise_sigma2 = match config.snr_db {
        None => 0.0,
        Some(snr) => {
            let combiner = ota_weights.as_ref().unwrap_or(&w_star.w_star);
            // Noiseless combined outputs of the training split in one
            // product: row i of G dotted (unconjugated) with the combiner.
            let outputs = &g.g * combiner;
            let power = outputs.norm_squared() / outputs.len() as f64;
            noise_variance_from_snr(snr, power)?
        }
    };

    Ok(TrainedModel {
        w_star,
        cascade,
        ota_weights,
        bias,
        channels,
        encoding: config.encoding,
        activation: config.activation,
        tx_phases: theta,
        noise_sigma2,
        train_ls_error,
        pgd_trace,
    })
}

/// Runs one sample through the frozen model: soft output and decided label.
pub fn infer(x: &DVector<f64>, model: &TrainedModel, rng: &mut impl Rng) -> Result<(Cx, u8)> {
    let y = forward_to_frontend(&encode_am(x, &model.tx_phases)?, &model.channels.h)?;
    let g_y = activate(&y, &model.bias, model.activation)?;
    let combiner = model.ota_weights.as_ref().unwrap_or(&model.w_star.w_star);
    let z_hat = combiner.dot(&g_y) + complex_noise(model.noise_sigma2, rng);
    Ok((z_hat, decide(z_hat, model.encoding)))
}

/// Evaluates the model on both partitions of the dataset.
///
/// Sample `i` of each partition draws its noise from the substream
/// `noise_key / partition / i` (`i` being the dataset row index), so the
/// report is independent of evaluation order and reproducible from the key
/// alone.
pub fn evaluate(
    dataset: &LabeledDataset,
    model: &TrainedModel,
    noise_key: StreamKey,
) -> Result<EvalReport> {
    if dataset.train_idx.is_empty() || dataset.test_idx.is_empty() {
        return Err(Error::InvalidArgument(
            "evaluation needs non-empty train and test partitions".into(),
        ));
    }
    let run_part = |indices: &[usize], part: &str| -> Result<f64> {
        let mut predicted = Vec::with_capacity(indices.len());
        let mut truth = Vec::with_capacity(indices.len());
        for &i in indices {
            let mut rng = noise_key.with_str(part).with_u64(i as u64).rng();
            let (_, label) = infer(&dataset.features[i], model, &mut rng)?;
            predicted.push(label);
            truth.push(dataset.labels[i]);
        }
        accuracy(&predicted, &truth)
    };
    let train_accuracy = run_part(&dataset.train_idx, "train")?;
    let test_accuracy = run_part(&dataset.test_idx, "test")?;
    Ok(EvalReport {
        variant: model.variant(),
        train_accuracy,
        test_accuracy,
        mean_abs_weight_residual: model
            .pgd_trace
            .as_ref()
            .map_or(0.0, |t| t.final_objective),
        samples_evaluated: dataset.train_idx.len() + dataset.test_idx.len(),
    })
}

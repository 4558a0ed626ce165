//! Closed-form readout training and prediction.
//!
//! Feature vectors are amplitude-encoded onto the carriers, pushed through
//! the channel and the nonlinear frontend, and stacked into an activation
//! matrix. The readout weights are then the exact minimizer of the ridge
//! regularized least-squares problem, solved in closed form on whichever
//! Gram matrix is smaller. Prediction is the plain (unconjugated) dot
//! product of weights and activations, followed by a threshold decision.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frontend::{activate, ActivationMode, BiasVector};
use crate::Cx;

/// Stacked frontend outputs, one dataset sample per row.
#[derive(Debug, Clone)]
pub struct ActivationMatrix {
    pub g: DMatrix<Cx>,
    pub source_mode: ActivationMode,
}

impl ActivationMatrix {
    pub fn new(g: DMatrix<Cx>, source_mode: ActivationMode) -> Result<Self> {
        if g.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NumericFailure(
                "activation matrix contains non-finite entries".into(),
            ));
        }
        Ok(ActivationMatrix { g, source_mode })
    }

    /// Number of dataset samples (rows).
    pub fn d(&self) -> usize {
        self.g.nrows()
    }

    /// Number of receive elements (columns).
    pub fn n_r(&self) -> usize {
        self.g.ncols()
    }
}

/// Which Gram matrix the ridge solve factorized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    /// Receive-dimension system, used when the sample count is at least the
    /// number of receive elements.
    Primal,
    /// Sample-dimension system, used when receive elements outnumber
    /// samples.
    Dual,
}

/// Trained readout weights together with the regularizer that produced them.
#[derive(Debug, Clone)]
pub struct IdealWeights {
    pub w_star: DVector<Cx>,
    pub ridge: f64,
    pub solver_path: SolverPath,
}

/// How class labels map to regression targets and back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetEncoding {
    /// Targets 0 and 1, decision threshold at real part 0.5.
    #[default]
    ZeroOne,
    /// Targets -1 and +1, decision threshold at real part 0.
    PlusMinus,
}

impl TargetEncoding {
    /// Regression target for a class label.
    pub fn target(self, label: u8) -> Cx {
        match self {
            TargetEncoding::ZeroOne => Cx::new(f64::from(label), 0.0),
            TargetEncoding::PlusMinus => Cx::new(if label == 0 { -1.0 } else { 1.0 }, 0.0),
        }
    }
}

/// Amplitude encoding of a feature vector: carrier `k` gets amplitude `x_k`
/// and phase `pi * theta_k`.
pub fn encode_am(x: &DVector<f64>, theta: &DVector<f64>) -> Result<DVector<Cx>> {
    if x.len() != theta.len() {
        return Err(Error::InvalidArgument(format!(
            "feature length {} does not match phase length {}",
            x.len(),
            theta.len()
        )));
    }
    if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidArgument(
            "features must lie in [0, 1] after scaling".into(),
        ));
    }
    Ok(DVector::from_fn(x.len(), |k, _| {
        Cx::from_polar(x[k], std::f64::consts::PI * theta[k])
    }))
}

/// Propagates the transmitted vector to the frontend inputs.
pub fn forward_to_frontend(x_bar: &DVector<Cx>, h: &DMatrix<Cx>) -> Result<DVector<Cx>> {
    if h.ncols() != x_bar.len() {
        return Err(Error::InvalidArgument(format!(
            "channel has {} columns but the transmit vector has length {}",
            h.ncols(),
            x_bar.len()
        )));
    }
    Ok(h * x_bar)
}

/// Builds the activation matrix for a dataset with explicit transmit phases.
///
/// Row `i` is `activate(H * encode_am(inputs[i], theta), bias, mode)`.
pub fn build_activation_matrix_with_phases(
    inputs: &[DVector<f64>],
    h: &DMatrix<Cx>,
    bias: &BiasVector,
    mode: ActivationMode,
    theta: &DVector<f64>,
) -> Result<ActivationMatrix> {
    let n_t = h.ncols();
    let mut g = DMatrix::zeros(inputs.len(), h.nrows());
    for (i, x) in inputs.iter().enumerate() {
        if x.len() != n_t {
            return Err(Error::InvalidArgument(format!(
                "sample {i} has {} features, channel expects {n_t}",
                x.len()
            )));
        }
        let y = forward_to_frontend(&encode_am(x, theta)?, h)?;
        let row = activate(&y, bias, mode)?;
        g.row_mut(i).tr_copy_from(&row);
    }
    ActivationMatrix::new(g, mode)
}

/// Builds the activation matrix with all transmit phases at zero.
pub fn build_activation_matrix(
    inputs: &[DVector<f64>],
    h: &DMatrix<Cx>,
    bias: &BiasVector,
    mode: ActivationMode,
) -> Result<ActivationMatrix> {
    let theta = DVector::zeros(h.ncols());
    build_activation_matrix_with_phases(inputs, h, bias, mode, &theta)
}

/// Solves the ridge problem `min ||G w - z||^2 + ridge * ||w||^2` exactly.
///
/// The system is assembled on the smaller Gram matrix (receive-dimension
/// when samples dominate, sample-dimension otherwise; both give the same
/// minimizer for any positive ridge) and solved through a Cholesky
/// factorization. The regularizer makes the factorized matrix positive
/// definite, so failure indicates non-finite input.
pub fn ridge_solve(g: &ActivationMatrix, z: &DVector<Cx>, ridge: f64) -> Result<IdealWeights> {
    if !(ridge > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ridge must be positive, got {ridge}"
        )));
    }
    let d = g.d();
    let n_r = g.n_r();
    if z.len() != d {
        return Err(Error::InvalidArgument(format!(
            "target length {} does not match sample count {d}",
            z.len()
        )));
    }
    if d == 0 || n_r == 0 {
        return Err(Error::InvalidArgument(
            "activation matrix must be non-empty".into(),
        ));
    }
    let gm = &g.g;
    let ridge_c = Cx::new(ridge, 0.0);
    let (w_star, solver_path) = if n_r <= d {
        let mut gram = gm.adjoint() * gm;
        for i in 0..n_r {
            gram[(i, i)] += ridge_c;
        }
        let chol = gram.cholesky().ok_or_else(|| {
            Error::NumericFailure("receive-dimension Gram factorization failed".into())
        })?;
        (chol.solve(&(gm.adjoint() * z)), SolverPath::Primal)
    } else {
        let mut gram = gm * gm.adjoint();
        for i in 0..d {
            gram[(i, i)] += ridge_c;
        }
        let chol = gram.cholesky().ok_or_else(|| {
            Error::NumericFailure("sample-dimension Gram factorization failed".into())
        })?;
        (gm.adjoint() * chol.solve(z), SolverPath::Dual)
    };
    if w_star.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NumericFailure(
            "ridge solution contains non-finite entries".into(),
        ));
    }
    Ok(IdealWeights {
        w_star,
        ridge,
        solver_path,
    })
}

/// Ideal-combining prediction: the unconjugated dot product of the weights
/// with the frontend outputs, plus circularly-symmetric receiver noise when
/// `noise_sigma2 > 0`.
pub fn predict_ideal(
    w: &IdealWeights,
    g_y: &DVector<Cx>,
    noise_sigma2: f64,
    rng: &mut impl Rng,
) -> Result<Cx> {
    if w.w_star.len() != g_y.len() {
        return Err(Error::InvalidArgument(format!(
            "weight length {} does not match activation length {}",
            w.w_star.len(),
            g_y.len()
        )));
    }
    if noise_sigma2 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be nonnegative, got {noise_sigma2}"
        )));
    }
    let clean = w.w_star.dot(g_y);
    if noise_sigma2 > 0.0 {
        let std = (noise_sigma2 / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Ok(clean + Cx::new(re * std, im * std))
    } else {
        Ok(clean)
    }
}

/// Thresholds a soft prediction into a class label.
pub fn decide(z_hat: Cx, encoding: TargetEncoding) -> u8 {
    let threshold = match encoding {
        TargetEncoding::ZeroOne => 0.5,
        TargetEncoding::PlusMinus => 0.0,
    };
    u8::from(z_hat.re > threshold)
}

/// Fraction of predictions that match the ground truth.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "accuracy needs equal-length non-empty label lists, got {} and {}",
            predicted.len(),
            truth.len()
        )));
    }
    let hits = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

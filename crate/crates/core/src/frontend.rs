//! Nonlinear receive frontend.
//!
//! Each receive element rectifies its incident signal with a biased diode.
//! The effect on the information-bearing envelope is an amplitude dead zone:
//! inputs below the bias produce nothing, inputs above it produce an output
//! whose phase is preserved and whose magnitude follows an AM/AM curve. Two
//! magnitude models are provided: the exact first-harmonic extraction of the
//! ideal diode, and a cheaper rectified-linear approximation used during
//! training. Both are zero exactly on the dead zone and phase-preserving off
//! it.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Weibull};

use crate::error::{Error, Result};
use crate::Cx;

/// Per-element diode bias levels.
///
/// Entries are strictly positive; `scale` records the Rayleigh scale they
/// were drawn with so a trained model can report it.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasVector {
    pub b: DVector<f64>,
    pub scale: f64,
}

impl BiasVector {
    pub fn new(b: DVector<f64>, scale: f64) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidArgument("bias vector is empty".into()));
        }
        if b.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidArgument(
                "bias entries must be strictly positive".into(),
            ));
        }
        Ok(BiasVector { b, scale })
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// Which AM/AM magnitude curve `activate` applies above the dead zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivationMode {
    /// First-harmonic extraction of the ideal biased diode.
    Exact,
    /// Rectified-linear surrogate `(|y| - b)/2`, the curve the readout is
    /// trained against.
    #[default]
    Approximate,
}

/// Draws per-element biases from a Rayleigh distribution whose scale is
/// `h_frobenius / (2 * n_r * n_t)`.
///
/// A Rayleigh variable with scale `s` is Weibull with shape 2 and scale
/// `s * sqrt(2)`. Exact zero draws (possible at the inverse-CDF boundary)
/// are replaced by the scale value so the positivity invariant holds.
pub fn sample_bias(
    n_r: usize,
    h_frobenius: f64,
    n_t: usize,
    rng: &mut impl Rng,
) -> Result<BiasVector> {
    if n_r == 0 || n_t == 0 {
        return Err(Error::InvalidArgument(
            "bias sampling needs nonzero antenna counts".into(),
        ));
    }
    let scale = h_frobenius / (2.0 * (n_r * n_t) as f64);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bias scale must be positive and finite, got {scale}"
        )));
    }
    let weibull = Weibull::new(scale * std::f64::consts::SQRT_2, 2.0)
        .map_err(|e| Error::InvalidArgument(format!("bias distribution: {e}")))?;
    let b = DVector::from_fn(n_r, |_, _| {
        let draw = weibull.sample(rng);
        if draw > 0.0 {
            draw
        } else {
            scale
        }
    });
    BiasVector::new(b, scale)
}

/// Exact AM/AM curve of the ideal diode with threshold `b`: the amplitude of
/// the first harmonic recovered from the rectified carrier.
///
/// Zero for `v <= b`; above threshold,
/// `(v * acos(b/v) - b * sqrt(1 - (b/v)^2)) / pi`. Continuous at the
/// threshold and non-decreasing in `v`.
pub fn amam_exact(v: f64, b: f64) -> f64 {
    if v <= b {
        return 0.0;
    }
    let r = b / v;
    (v * r.acos() - b * (1.0 - r * r).sqrt()) / std::f64::consts::PI
}

/// First-harmonic amplitude of an arbitrary instantaneous response `f`
/// driven at envelope `v`: `(2/pi) * integral of f(v cos(phi)) cos(phi)`
/// over one half period, by composite Simpson quadrature on `n_points`
/// samples (forced odd).
pub fn amam_quadrature(f: impl Fn(f64) -> f64, v: f64, n_points: usize) -> Result<f64> {
    if n_points < 16 {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least 16 points, got {n_points}"
        )));
    }
    let n = if n_points % 2 == 1 {
        n_points
    } else {
        n_points + 1
    };
    let h = std::f64::consts::PI / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let phi = h * i as f64;
        let value = f(v * phi.cos()) * phi.cos();
        if !value.is_finite() {
            return Err(Error::NumericFailure(format!(
                "integrand not finite at phi = {phi}"
            )));
        }
        let weight = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += weight * value;
    }
    Ok(acc * (h / 3.0) * (2.0 / std::f64::consts::PI))
}

/// Applies the frontend element-wise: zero inside the dead zone, otherwise
/// the mode's AM/AM magnitude at the input phase.
pub fn activate(y: &DVector<Cx>, bias: &BiasVector, mode: ActivationMode) -> Result<DVector<Cx>> {
    if y.len() != bias.len() {
        return Err(Error::InvalidArgument(format!(
            "input length {} does not match bias length {}",
            y.len(),
            bias.len()
        )));
    }
    Ok(DVector::from_fn(y.len(), |k, _| {
        let v = y[k].norm();
        let b = bias.b[k];
        if v <= b {
            return Cx::new(0.0, 0.0);
        }
        let magnitude = match mode {
            ActivationMode::Exact => amam_exact(v, b),
            ActivationMode::Approximate => 0.5 * (v - b),
        };
        // v > b >= 0 here, so dividing by v is safe and preserves the phase.
        y[k] * (magnitude / v)
    }))
}

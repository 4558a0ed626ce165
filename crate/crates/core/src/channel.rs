//! Random propagation quantities.
//!
//! Everything between the transmit antennas and the receive combiner is
//! sampled here: the TX to RX channel (Rayleigh or Ricean), the channels
//! between consecutive tunable surfaces in the receive cascade, the terminal
//! combining vector, and the noise variance implied by a target SNR.
//!
//! All samplers are pure functions of their arguments and the passed
//! generator: the same seed yields bit-identical output. Draw order within
//! each sampler is fixed and documented where a caller could observe it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Cx;

/// Element spacing, in wavelengths, of the uniform linear arrays assumed for
/// the line-of-sight steering geometry.
pub const HALF_WAVELENGTH_SPACING: f64 = 0.5;

/// Converts a dB power figure to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Draws an `n_rows` by `n_cols` matrix with i.i.d. circularly-symmetric
/// complex Gaussian entries of the given per-entry variance.
///
/// Entries are drawn in column-major order, real part before imaginary part.
pub fn sample_cn_matrix(
    n_rows: usize,
    n_cols: usize,
    entry_variance: f64,
    rng: &mut impl Rng,
) -> DMatrix<Cx> {
    let std = (entry_variance / 2.0).sqrt();
    DMatrix::from_fn(n_rows, n_cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re * std, im * std)
    })
}

/// Draws a length-`n` vector with i.i.d. circularly-symmetric complex
/// Gaussian entries of the given per-entry variance.
pub fn sample_cn_vector(n: usize, entry_variance: f64, rng: &mut impl Rng) -> DVector<Cx> {
    let std = (entry_variance / 2.0).sqrt();
    DVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re * std, im * std)
    })
}

/// Line-of-sight parameters for the Ricean channel.
///
/// `k_factor` is linear (not dB); 0 removes the line-of-sight component
/// entirely. Departure and arrival angles are in radians and must lie in
/// [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiceanParams {
    pub k_factor: f64,
    pub aod: f64,
    pub aoa: f64,
}

impl RiceanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_factor >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Ricean K factor must be nonnegative, got {}",
                self.k_factor
            )));
        }
        let full_turn = 2.0 * std::f64::consts::PI;
        for (name, angle) in [("aod", self.aod), ("aoa", self.aoa)] {
            if !(0.0..full_turn).contains(&angle) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 2*pi), got {angle}"
                )));
            }
        }
        Ok(())
    }
}

/// One frozen draw of every channel a system realization needs.
///
/// The cascade dimension chain is enforced at construction: `layer_channels`
/// maps the `n_r` combiner inputs through `L` surfaces, so the first layer
/// channel has `n_r` columns, each later one has as many columns as its
/// predecessor has rows, and `terminal` matches the last layer's output size.
/// A realization with no layers (ideal combining only) carries an empty layer
/// list and an empty terminal vector.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: DMatrix<Cx>,
    pub layer_channels: Vec<DMatrix<Cx>>,
    pub terminal: DVector<Cx>,
    pub pathloss_db: f64,
    pub intra_pathloss_db: f64,
}

impl ChannelRealization {
    pub fn new(
        h: DMatrix<Cx>,
        layer_channels: Vec<DMatrix<Cx>>,
        terminal: DVector<Cx>,
        pathloss_db: f64,
        intra_pathloss_db: f64,
    ) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "channel matrix must have at least one row and one column".into(),
            ));
        }
        if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NumericFailure(
                "channel matrix contains non-finite entries".into(),
            ));
        }
        let mut expected_cols = h.nrows();
        for (l, hl) in layer_channels.iter().enumerate() {
            if hl.ncols() != expected_cols {
                return Err(Error::InvalidArgument(format!(
                    "layer channel {} has {} columns, expected {}",
                    l + 1,
                    hl.ncols(),
                    expected_cols
                )));
            }
            if hl.nrows() == 0 {
                return Err(Error::InvalidArgument(format!(
                    "layer channel {} has zero rows",
                    l + 1
                )));
            }
            expected_cols = hl.nrows();
        }
        let expected_terminal = if layer_channels.is_empty() {
            0
        } else {
            expected_cols
        };
        if terminal.len() != expected_terminal {
            return Err(Error::InvalidArgument(format!(
                "terminal vector has length {}, expected {}",
                terminal.len(),
                expected_terminal
            )));
        }
        Ok(ChannelRealization {
            h,
            layer_channels,
            terminal,
            pathloss_db,
            intra_pathloss_db,
        })
    }

    /// Receive antennas (rows of the TX to RX channel).
    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    /// Transmit antennas (columns of the TX to RX channel).
    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    /// Number of tunable surfaces in the receive cascade.
    pub fn n_layers(&self) -> usize {
        self.layer_channels.len()
    }
}

/// Samples a flat Rayleigh channel: every entry i.i.d. CN(0, P) where
/// P is `pathloss_db` converted to linear scale.
pub fn sample_rayleigh(
    n_r: usize,
    n_t: usize,
    pathloss_db: f64,
    rng: &mut impl Rng,
) -> Result<DMatrix<Cx>> {
    if n_r == 0 || n_t == 0 {
        return Err(Error::InvalidArgument(format!(
            "channel dimensions must be nonzero, got {n_r} x {n_t}"
        )));
    }
    Ok(sample_cn_matrix(n_r, n_t, db_to_linear(pathloss_db), rng))
}

/// Steering vector of an `n`-element uniform linear array.
///
/// Element `m` is `exp(j * 2*pi * spacing_wavelengths * m * sin(angle))`, so
/// every entry has unit modulus.
pub fn steering_vector(n: usize, spacing_wavelengths: f64, angle: f64) -> DVector<Cx> {
    let step = 2.0 * std::f64::consts::PI * spacing_wavelengths * angle.sin();
    DVector::from_fn(n, |m, _| Cx::from_polar(1.0, step * m as f64))
}

/// Samples a Ricean channel.
///
/// The output is `sqrt(P) * (sqrt(K/(1+K)) * H_los + sqrt(1/(1+K)) * H_nlos)`
/// where `H_los` is the rank-1 outer product of the arrival and departure
/// steering vectors (half-wavelength arrays) and `H_nlos` has i.i.d.
/// CN(0, 1/sqrt(n_t*n_r)) entries. The scattered component is the only
/// random draw, taken from `rng` first.
///
/// The two channel modes are deliberately not power-matched: the scattered
/// part here has per-entry variance 1/sqrt(n_t*n_r) inside the K-weighted
/// sum, while [`sample_rayleigh`] puts the full linear pathloss on each
/// entry. At K = 0 this sampler therefore returns a much weaker channel than
/// the Rayleigh sampler; callers that want "K = 0 means Rayleigh" must
/// dispatch to [`sample_rayleigh`] themselves.
pub fn sample_ricean(
    n_r: usize,
    n_t: usize,
    pathloss_db: f64,
    params: RiceanParams,
    rng: &mut impl Rng,
) -> Result<DMatrix<Cx>> {
    if n_r == 0 || n_t == 0 {
        return Err(Error::InvalidArgument(format!(
            "channel dimensions must be nonzero, got {n_r} x {n_t}"
        )));
    }
    params.validate()?;
    let nlos_variance = 1.0 / ((n_t * n_r) as f64).sqrt();
    let h_nlos = sample_cn_matrix(n_r, n_t, nlos_variance, rng);

    let k = params.k_factor;
    let los_gain = (k / (1.0 + k)).sqrt();
    let nlos_gain = (1.0 / (1.0 + k)).sqrt();
    let amplitude = db_to_linear(pathloss_db).sqrt();

    let a_rx = steering_vector(n_r, HALF_WAVELENGTH_SPACING, params.aoa);
    let a_tx = steering_vector(n_t, HALF_WAVELENGTH_SPACING, params.aod);
    let h_los = &a_rx * a_tx.transpose();

    Ok((h_los * Cx::from(los_gain) + h_nlos * Cx::from(nlos_gain)) * Cx::from(amplitude))
}

/// Samples the channels between consecutive cascade surfaces plus the
/// terminal combining vector.
///
/// `layer_sizes[l]` is the element count of surface `l+1`; the first layer
/// channel therefore has `n_r` columns and the chain follows from there.
/// Every entry of every layer channel and of the terminal vector is i.i.d.
/// CN(0, P') with P' = `intra_pathloss_db` in linear scale. Layers are drawn
/// in order, terminal last.
pub fn sample_cascade_channels(
    layer_sizes: &[usize],
    n_r: usize,
    intra_pathloss_db: f64,
    rng: &mut impl Rng,
) -> Result<(Vec<DMatrix<Cx>>, DVector<Cx>)> {
    if layer_sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "cascade needs at least one layer".into(),
        ));
    }
    if n_r == 0 || layer_sizes.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument(
            "layer sizes and n_r must all be nonzero".into(),
        ));
    }
    let variance = db_to_linear(intra_pathloss_db);
    let mut layers = Vec::with_capacity(layer_sizes.len());
    let mut cols = n_r;
    for &rows in layer_sizes {
        layers.push(sample_cn_matrix(rows, cols, variance, rng));
        cols = rows;
    }
    let terminal = sample_cn_vector(cols, variance, rng);
    Ok((layers, terminal))
}

/// Noise variance that realizes a target SNR against a given signal power.
pub fn noise_variance_from_snr(snr_db: f64, signal_power: f64) -> Result<f64> {
    if !(signal_power >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "signal power must be nonnegative, got {signal_power}"
        )));
    }
    Ok(signal_power / db_to_linear(snr_db))
}

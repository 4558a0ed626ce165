//! Tunable receive cascade and its fit to the ideal readout.
//!
//! The receive combiner is realized by a cascade of diffractive surfaces.
//! Surface `l` applies a per-element complex coefficient of magnitude
//! `amps[l][k]` (in [0, 1], passive) and phase `pi * phases[l][k]`; fixed
//! random channels sit between consecutive surfaces, and a fixed terminal
//! vector collects the last surface onto the single receive chain. The
//! composite is a linear functional of the frontend outputs, the cascade
//! transfer vector.
//!
//! Fitting picks surface coefficients and a scalar gain `rho` so that
//! `rho * w_phi` approximates the ideal readout weights, by projected
//! gradient descent with analytic gradients through the cascade chain.

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::elm::IdealWeights;
use crate::error::{Error, Result};
use crate::Cx;

/// Smallest admissible gain; keeps `rho` positive so the gradient flow
/// never parks the OTA output at exactly zero.
pub const RHO_MIN: f64 = 1e-9;

/// Internal gain applied to `step_size` for the amplitude and phase
/// updates. The published step refers to a raw-gradient scale; on the
/// normalized objective used here the raw step is too timid by about this
/// factor, independent of layer width (validated at widths 256 and 4096).
const STEP_GAIN: f64 = 8.0;

/// Interval the phase parameters live in: coefficients are
/// `exp(j * pi * theta)`, so [0, 1] spans a half turn and [0, 2) the full
/// circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseRange {
    /// Phases in [0, 1], enforced by clamping. Cannot represent a global
    /// sign flip, which caps how well the cascade can match an arbitrary
    /// target; kept as the literal published parameterization.
    #[default]
    HalfCircle,
    /// Phases in [0, 2), enforced by wrapping. Full complex coverage.
    FullCircle,
}

impl PhaseRange {
    pub fn width(self) -> f64 {
        match self {
            PhaseRange::HalfCircle => 1.0,
            PhaseRange::FullCircle => 2.0,
        }
    }

    pub fn contains(self, theta: f64) -> bool {
        match self {
            PhaseRange::HalfCircle => (0.0..=1.0).contains(&theta),
            PhaseRange::FullCircle => (0.0..2.0).contains(&theta),
        }
    }

    /// Maps an unconstrained phase back into the range: clamp for the half
    /// circle (an interval), wrap for the full circle (a torus).
    pub fn project(self, theta: f64) -> f64 {
        match self {
            PhaseRange::HalfCircle => theta.clamp(0.0, 1.0),
            PhaseRange::FullCircle => theta.rem_euclid(2.0),
        }
    }
}

/// Tunable parameters of the receive cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeState {
    /// Per-surface element magnitudes, each in [0, 1].
    pub amps: Vec<DVector<f64>>,
    /// Per-surface element phases in half-turn units, each in [0, 2).
    pub phases: Vec<DVector<f64>>,
    /// Scalar receive gain, strictly positive.
    pub rho: f64,
}

impl CascadeState {
    pub fn new(amps: Vec<DVector<f64>>, phases: Vec<DVector<f64>>, rho: f64) -> Result<Self> {
        if amps.is_empty() || amps.len() != phases.len() {
            return Err(Error::InvalidArgument(format!(
                "cascade needs matching non-empty layer lists, got {} amps and {} phases",
                amps.len(),
                phases.len()
            )));
        }
        for (l, (a, p)) in amps.iter().zip(&phases).enumerate() {
            if a.len() != p.len() || a.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "layer {} has {} amps but {} phases",
                    l + 1,
                    a.len(),
                    p.len()
                )));
            }
            if a.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidArgument(format!(
                    "layer {} amplitudes must lie in [0, 1]",
                    l + 1
                )));
            }
            if p.iter().any(|&x| !(0.0..2.0).contains(&x)) {
                return Err(Error::InvalidArgument(format!(
                    "layer {} phases must lie in [0, 2)",
                    l + 1
                )));
            }
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gain must be positive and finite, got {rho}"
            )));
        }
        Ok(CascadeState { amps, phases, rho })
    }

    pub fn n_layers(&self) -> usize {
        self.amps.len()
    }

    /// True when every parameter satisfies the projection constraints for
    /// the given phase range.
    pub fn feasible_in(&self, range: PhaseRange) -> bool {
        self.rho >= RHO_MIN
            && self
                .amps
                .iter()
                .all(|a| a.iter().all(|&x| (0.0..=1.0).contains(&x)))
            && self
                .phases
                .iter()
                .all(|p| p.iter().all(|&x| range.contains(x)))
    }
}

/// Knobs of the projected gradient fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdOptions {
    pub max_iters: usize,
    pub step_size: f64,
    pub rel_tol: f64,
    /// Consecutive low-improvement iterations tolerated before stopping.
    /// Momentum needs tens of iterations to ramp up, and mid-run plateaus
    /// of similar length are routine on wide cascades, so this must stay
    /// comfortably above both.
    pub patience: usize,
    pub phase_range: PhaseRange,
    /// Heavy-ball momentum on the amplitude and phase updates. Zero turns
    /// it off; the default 0.95 is what rescues near-square cascades from
    /// the ill-conditioned plateau they otherwise stall on.
    pub momentum: f64,
}

impl Default for PgdOptions {
    fn default() -> Self {
        PgdOptions {
            max_iters: 1500,
            step_size: 0.01,
            rel_tol: 1e-6,
            patience: 100,
            phase_range: PhaseRange::default(),
            momentum: 0.95,
        }
    }
}

impl PgdOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// What the fit did, iteration by iteration.
///
/// `objective_per_iter[i]` is the best approximation objective (residual
/// norm, as reported by [`approximation_objective`]) seen through iteration
/// `i`; entry 0 is the starting state's objective, so the sequence is
/// non-increasing by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PgdTrace {
    pub objective_per_iter: Vec<f64>,
    pub iters_run: usize,
    pub converged: bool,
    pub final_objective: f64,
}

/// Gradient of [`pgd_objective`] with respect to every tunable parameter.
#[derive(Debug, Clone)]
pub struct CascadeGradient {
    pub amps: Vec<DVector<f64>>,
    pub phases: Vec<DVector<f64>>,
    pub rho: f64,
}

fn check_dims(state: &CascadeState, channels: &ChannelRealization) -> Result<()> {
    if channels.n_layers() == 0 {
        return Err(Error::InvalidArgument(
            "channel realization carries no cascade layers".into(),
        ));
    }
    if state.n_layers() != channels.n_layers() {
        return Err(Error::InvalidArgument(format!(
            "state has {} layers, channels have {}",
            state.n_layers(),
            channels.n_layers()
        )));
    }
    for (l, (a, h)) in state.amps.iter().zip(&channels.layer_channels).enumerate() {
        if a.len() != h.nrows() {
            return Err(Error::InvalidArgument(format!(
                "layer {} has {} elements but its channel has {} rows",
                l + 1,
                a.len(),
                h.nrows()
            )));
        }
    }
    Ok(())
}

/// Per-surface complex coefficients `amps * exp(j * pi * phases)`.
fn phi_vector(amps: &DVector<f64>, phases: &DVector<f64>) -> DVector<Cx> {
    DVector::from_fn(amps.len(), |k, _| {
        Cx::from_polar(amps[k], std::f64::consts::PI * phases[k])
    })
}

/// Walks the cascade from the terminal vector back to the combiner inputs.
///
/// Returns the per-layer vectors `v[l]` (the signal each surface's
/// coefficients multiply, before the coefficients of layer `l` are applied
/// when propagating toward the receiver chain) and the transfer vector
/// `t = w_phi` as a column.
fn backward_chain(
    state: &CascadeState,
    layers_t: &[DMatrix<Cx>],
    terminal: &DVector<Cx>,
) -> (Vec<DVector<Cx>>, DVector<Cx>) {
    let l_count = state.n_layers();
    let mut vs: Vec<DVector<Cx>> = vec![DVector::zeros(0); l_count];
    vs[l_count - 1] = terminal.clone();
    for l in (1..l_count).rev() {
        let scaled = phi_vector(&state.amps[l], &state.phases[l]).component_mul(&vs[l]);
        vs[l - 1] = &layers_t[l] * scaled;
    }
    let first = phi_vector(&state.amps[0], &state.phases[0]).component_mul(&vs[0]);
    let t = &layers_t[0] * first;
    (vs, t)
}

/// Transfer vector of the cascade as a column: the receive chain output is
/// `transfer^T * g(y)` before gain and noise.
pub fn cascade_transfer_t(
    state: &CascadeState,
    channels: &ChannelRealization,
) -> Result<DVector<Cx>> {
    check_dims(state, channels)?;
    let layers_t: Vec<DMatrix<Cx>> = channels
        .layer_channels
        .iter()
        .map(|h| h.transpose())
        .collect();
    Ok(backward_chain(state, &layers_t, &channels.terminal).1)
}

/// Transfer vector in row form, matching its role as a left-multiplier of
/// the frontend outputs.
pub fn cascade_transfer(
    state: &CascadeState,
    channels: &ChannelRealization,
) -> Result<RowDVector<Cx>> {
    Ok(cascade_transfer_t(state, channels)?.transpose())
}

/// Residual norm `||w_star - rho * transfer||` between the ideal readout
/// and what the cascade currently realizes.
pub fn approximation_objective(
    w_star: &IdealWeights,
    state: &CascadeState,
    channels: &ChannelRealization,
) -> Result<f64> {
    let t = cascade_transfer_t(state, channels)?;
    if t.len() != w_star.w_star.len() {
        return Err(Error::InvalidArgument(format!(
            "transfer length {} does not match weight length {}",
            t.len(),
            w_star.w_star.len()
        )));
    }
    Ok((&w_star.w_star - t * Cx::from(state.rho)).norm())
}

/// The loss the gradient fit actually descends: the squared residual norm
/// normalized by `||w_star||^2`. Minimizers coincide with those of
/// [`approximation_objective`]; the normalization makes step sizes
/// transferable across problem scales.
pub fn pgd_objective(
    w_star: &IdealWeights,
    state: &CascadeState,
    channels: &ChannelRealization,
) -> Result<f64> {
    let wn2 = w_star.w_star.norm_squared();
    if wn2 == 0.0 {
        return Err(Error::InvalidArgument(
            "target weight vector is zero".into(),
        ));
    }
    let obj = approximation_objective(w_star, state, channels)?;
    Ok(obj * obj / wn2)
}

struct GradientParts {
    grad: CascadeGradient,
    transfer_t: DVector<Cx>,
}

/// Analytic gradient of the normalized squared residual.
///
/// With `r = w_star - rho * t` and per-layer chain vectors `u` (forward,
/// seeded by `conj(r)`) and `v` (backward, seeded by the terminal vector),
/// the derivative with respect to surface coefficient `phi[l][k]` is
/// `-2 rho * u[l][k] * v[l][k] / ||w_star||^2`, and the amplitude and phase
/// gradients follow through `phi = amp * exp(j * pi * theta)`.
fn gradient_inner(
    w_star: &IdealWeights,
    state: &CascadeState,
    layers: &[DMatrix<Cx>],
    layers_t: &[DMatrix<Cx>],
    terminal: &DVector<Cx>,
) -> Result<GradientParts> {
    let wn2 = w_star.w_star.norm_squared();
    if wn2 == 0.0 {
        return Err(Error::InvalidArgument(
            "target weight vector is zero".into(),
        ));
    }
    let (vs, t) = backward_chain(state, layers_t, terminal);
    if t.len() != w_star.w_star.len() {
        return Err(Error::InvalidArgument(format!(
            "transfer length {} does not match weight length {}",
            t.len(),
            w_star.w_star.len()
        )));
    }
    let rho = state.rho;
    let r = &w_star.w_star - &t * Cx::from(rho);

    let l_count = state.n_layers();
    let mut us: Vec<DVector<Cx>> = Vec::with_capacity(l_count);
    us.push(&layers[0] * r.map(|c| c.conj()));
    for l in 1..l_count {
        let scaled = phi_vector(&state.amps[l - 1], &state.phases[l - 1]).component_mul(&us[l - 1]);
        us.push(&layers[l] * scaled);
    }

    let mut g_amps = Vec::with_capacity(l_count);
    let mut g_phases = Vec::with_capacity(l_count);
    let scale = 2.0 * rho / wn2;
    for l in 0..l_count {
        let c = us[l].component_mul(&vs[l]);
        let n = c.len();
        let mut ga = DVector::zeros(n);
        let mut gp = DVector::zeros(n);
        for k in 0..n {
            let e = Cx::from_polar(1.0, std::f64::consts::PI * state.phases[l][k]);
            let ec = e * c[k];
            ga[k] = -scale * ec.re;
            gp[k] = std::f64::consts::PI * scale * state.amps[l][k] * ec.im;
        }
        if ga.iter().chain(gp.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NumericFailure("non-finite gradient".into()));
        }
        g_amps.push(ga);
        g_phases.push(gp);
    }
    let g_rho = -2.0 * r.dotc(&t).re / wn2;
    if !g_rho.is_finite() {
        return Err(Error::NumericFailure("non-finite gradient".into()));
    }
    Ok(GradientParts {
        grad: CascadeGradient {
            amps: g_amps,
            phases: g_phases,
            rho: g_rho,
        },
        transfer_t: t,
    })
}

/// Gradient of [`pgd_objective`] at `state`, for every amplitude, phase,
/// and the gain.
pub fn objective_gradient(
    w_star: &IdealWeights,
    state: &CascadeState,
    channels: &ChannelRealization,
) -> Result<CascadeGradient> {
    check_dims(state, channels)?;
    let layers_t: Vec<DMatrix<Cx>> = channels
        .layer_channels
        .iter()
        .map(|h| h.transpose())
        .collect();
    Ok(gradient_inner(
        w_star,
        state,
        &channels.layer_channels,
        &layers_t,
        &channels.terminal,
    )?
    .grad)
}

/// All-pass starting point: unit amplitudes, uniformly random phases, and
/// the least-squares optimal positive gain for the resulting transfer.
///
/// When the full phase circle is available and the initial transfer is
/// anti-correlated with the target, the first surface gets a half-turn
/// offset (a distribution-preserving relabeling of the uniform draw) so the
/// starting gain is informative rather than clamped at [`RHO_MIN`]; a gain
/// stuck at the floor scales every gradient down to nothing. The half-circle
/// range cannot express that offset, so there the literal draw stands.
pub fn init_state(
    channels: &ChannelRealization,
    w_star: &IdealWeights,
    rng: &mut impl Rng,
    opts: &PgdOptions,
) -> Result<CascadeState> {
    let sizes: Vec<usize> = channels.layer_channels.iter().map(|h| h.nrows()).collect();
    if sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "channel realization carries no cascade layers".into(),
        ));
    }
    let width = opts.phase_range.width();
    let amps: Vec<DVector<f64>> = sizes.iter().map(|&n| DVector::from_element(n, 1.0)).collect();
    let phases: Vec<DVector<f64>> = sizes
        .iter()
        .map(|&n| DVector::from_fn(n, |_, _| rng.gen::<f64>() * width))
        .collect();
    let mut state = CascadeState::new(amps, phases, 1.0)?;

    let t = cascade_transfer_t(&state, channels)?;
    if t.len() != w_star.w_star.len() {
        return Err(Error::InvalidArgument(format!(
            "transfer length {} does not match weight length {}",
            t.len(),
            w_star.w_star.len()
        )));
    }
    let mut corr = t.dotc(&w_star.w_star).re;
    if corr < 0.0 && opts.phase_range == PhaseRange::FullCircle {
        for p in state.phases[0].iter_mut() {
            *p = (*p + 1.0).rem_euclid(2.0);
        }
        corr = -corr;
    }
    let tn2 = t.norm_squared();
    state.rho = if tn2 > 0.0 {
        (corr / tn2).max(RHO_MIN)
    } else {
        RHO_MIN
    };
    Ok(state)
}

/// Projected gradient fit starting from an explicit state.
///
/// Each iteration takes one heavy-ball gradient step on the amplitudes and
/// phases, an exact 1-D Newton step on the gain, then projects back onto
/// the feasible box. The best state seen is tracked and returned; the fit
/// stops early once the best objective's relative improvement stays below
/// `rel_tol` for `patience` consecutive iterations.
pub fn pgd_fit_from(
    w_star: &IdealWeights,
    channels: &ChannelRealization,
    opts: &PgdOptions,
    start: CascadeState,
) -> Result<(CascadeState, PgdTrace)> {
    opts.validate()?;
    check_dims(&start, channels)?;
    if w_star
        .w_star
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidArgument(
            "target weights contain non-finite entries".into(),
        ));
    }
    let wn2 = w_star.w_star.norm_squared();
    if wn2 == 0.0 {
        return Err(Error::InvalidArgument(
            "target weight vector is zero".into(),
        ));
    }

    let layers = &channels.layer_channels;
    let layers_t: Vec<DMatrix<Cx>> = layers.iter().map(|h| h.transpose()).collect();
    let objective = |s: &CascadeState| -> f64 {
        let (_, t) = backward_chain(s, &layers_t, &channels.terminal);
        (&w_star.w_star - t * Cx::from(s.rho)).norm()
    };

    let mut state = start;
    let mut best_state = state.clone();
    let mut best_obj = objective(&state);
    let mut trace = vec![best_obj];

    let step = opts.step_size * STEP_GAIN;
    let mut m_amps: Vec<DVector<f64>> =
        state.amps.iter().map(|a| DVector::zeros(a.len())).collect();
    let mut m_phases = m_amps.clone();

    let mut stall = 0usize;
    let mut converged = best_obj == 0.0;
    let mut iters_run = 0usize;

    for iter in 0..opts.max_iters {
        if converged {
            break;
        }
        let parts = gradient_inner(w_star, &state, layers, &layers_t, &channels.terminal)
            .map_err(|e| match e {
                Error::NumericFailure(msg) => {
                    Error::NumericFailure(format!("{msg} at iteration {iter}"))
                }
                other => other,
            })?;

        for l in 0..state.n_layers() {
            for k in 0..state.amps[l].len() {
                m_amps[l][k] = opts.momentum * m_amps[l][k] + parts.grad.amps[l][k];
                state.amps[l][k] = (state.amps[l][k] - step * m_amps[l][k]).clamp(0.0, 1.0);
                m_phases[l][k] = opts.momentum * m_phases[l][k] + parts.grad.phases[l][k];
                state.phases[l][k] = opts
                    .phase_range
                    .project(state.phases[l][k] - step * m_phases[l][k]);
            }
        }
        // Exact minimizer over the gain alone: Newton on a 1-D quadratic.
        let tn2 = parts.transfer_t.norm_squared().max(f64::MIN_POSITIVE);
        state.rho = (state.rho - wn2 / (2.0 * tn2) * parts.grad.rho).max(RHO_MIN);
        debug_assert!(state.feasible_in(opts.phase_range));
        iters_run = iter + 1;

        let obj = objective(&state);
        let prev_best = best_obj;
        if obj < best_obj {
            best_obj = obj;
            best_state = state.clone();
        }
        trace.push(best_obj);
        let rel = (prev_best - best_obj) / prev_best.max(f64::MIN_POSITIVE);
        if rel < opts.rel_tol {
            stall += 1;
            if stall >= opts.patience {
                converged = true;
            }
        } else {
            stall = 0;
        }
        if best_obj == 0.0 {
            converged = true;
        }
    }

    let final_objective = *trace.last().expect("trace holds the initial objective");
    Ok((
        best_state,
        PgdTrace {
            objective_per_iter: trace,
            iters_run,
            converged,
            final_objective,
        },
    ))
}

/// Projected gradient fit from the standard random initialization.
pub fn pgd_fit(
    w_star: &IdealWeights,
    channels: &ChannelRealization,
    opts: &PgdOptions,
    rng: &mut impl Rng,
) -> Result<(CascadeState, PgdTrace)> {
    let start = init_state(channels, w_star, rng, opts)?;
    pgd_fit_from(w_star, channels, opts, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_cascade_channels, sample_cn_matrix, sample_cn_vector};
    use crate::elm::SolverPath;
    use crate::seed::StreamKey;
    use proptest::prelude::*;
    use rand::Rng;

    fn rng(tag: u64) -> rand_chacha::ChaCha12Rng {
        StreamKey::new(tag).with_str("cascade-tests").rng()
    }

    fn toy_channels(n_r: usize, sizes: &[usize], tag: u64) -> ChannelRealization {
        let mut r = rng(tag);
        let h = sample_cn_matrix(n_r, 2, 1.0, &mut r);
        let (layers, terminal) = sample_cascade_channels(sizes, n_r, -3.0, &mut r).unwrap();
        ChannelRealization::new(h, layers, terminal, 0.0, -3.0).unwrap()
    }

    fn weights(v: DVector<Cx>) -> IdealWeights {
        IdealWeights {
            w_star: v,
            ridge: 1e-6,
            solver_path: SolverPath::Primal,
        }
    }

    fn random_state(channels: &ChannelRealization, tag: u64) -> CascadeState {
        let mut r = rng(tag);
        let amps = channels
            .layer_channels
            .iter()
            .map(|h| DVector::from_fn(h.nrows(), |_, _| 0.2 + 0.8 * r.gen::<f64>()))
            .collect();
        let phases = channels
            .layer_channels
            .iter()
            .map(|h| DVector::from_fn(h.nrows(), |_, _| r.gen::<f64>()))
            .collect();
        CascadeState::new(amps, phases, 0.5 + r.gen::<f64>()).unwrap()
    }

    /// Full-matrix evaluation of the transfer, the shape the chain never
    /// materializes.
    fn brute_force_transfer(state: &CascadeState, channels: &ChannelRealization) -> RowDVector<Cx> {
        let l = state.n_layers();
        let mut acc: DMatrix<Cx> = channels.layer_channels[0].clone();
        for i in 1..l {
            let phi = DMatrix::from_diagonal(&phi_vector(&state.amps[i - 1], &state.phases[i - 1]));
            acc = &channels.layer_channels[i] * phi * acc;
        }
        let phi_last = DMatrix::from_diagonal(&phi_vector(&state.amps[l - 1], &state.phases[l - 1]));
        (channels.terminal.transpose() * phi_last * acc).row(0).into_owned()
    }

    #[test]
    fn transfer_single_layer_by_hand() {
        let h = DMatrix::from_element(2, 1, Cx::new(1.0, 0.0));
        let h1 = DMatrix::from_row_slice(1, 2, &[Cx::new(1.0, 0.0), Cx::new(1.0, 0.0)]);
        let terminal = DVector::from_element(1, Cx::new(1.0, 0.0));
        let channels = ChannelRealization::new(h, vec![h1], terminal, 0.0, 0.0).unwrap();
        let state = CascadeState::new(
            vec![DVector::from_element(1, 0.5)],
            vec![DVector::from_element(1, 0.5)],
            1.0,
        )
        .unwrap();
        let w = cascade_transfer(&state, &channels).unwrap();
        for k in 0..2 {
            assert!((w[k] - Cx::new(0.0, 0.5)).norm() < 1e-15, "entry {k}: {}", w[k]);
        }
    }

    #[test]
    fn transfer_all_pass_is_plain_product() {
        let channels = toy_channels(3, &[5, 4], 1);
        let amps: Vec<_> = [5, 4].iter().map(|&n| DVector::from_element(n, 1.0)).collect();
        let phases: Vec<_> = [5, 4].iter().map(|&n| DVector::zeros(n)).collect();
        let state = CascadeState::new(amps, phases, 1.0).unwrap();
        let w = cascade_transfer(&state, &channels).unwrap();
        let plain = channels.terminal.transpose()
            * &channels.layer_channels[1]
            * &channels.layer_channels[0];
        for k in 0..3 {
            assert!((w[k] - plain[(0, k)]).norm() < 1e-12);
        }
    }

    #[test]
    fn transfer_matches_brute_force_three_layers() {
        let channels = toy_channels(4, &[6, 5, 7], 2);
        let state = random_state(&channels, 3);
        let chained = cascade_transfer(&state, &channels).unwrap();
        let brute = brute_force_transfer(&state, &channels);
        let rel = (&chained - &brute).norm() / brute.norm();
        assert!(rel < 1e-10, "relative gap {rel}");
    }

    #[test]
    fn transfer_rejects_mismatched_state() {
        let channels = toy_channels(3, &[5, 4], 4);
        let state = CascadeState::new(
            vec![DVector::from_element(5, 1.0)],
            vec![DVector::zeros(5)],
            1.0,
        )
        .unwrap();
        assert!(cascade_transfer(&state, &channels).is_err());
    }

    #[test]
    fn transfer_is_linear_in_each_amplitude() {
        let channels = toy_channels(3, &[4, 4], 5);
        let base = random_state(&channels, 6);
        let eval = |a: f64| {
            let mut s = base.clone();
            s.amps[1][2] = a;
            cascade_transfer_t(&s, &channels).unwrap()
        };
        let at0 = eval(0.0);
        let quarter = eval(0.25) - &at0;
        let half = eval(0.5) - &at0;
        let gap = (&half - &quarter * Cx::from(2.0)).norm();
        assert!(gap < 1e-12 * half.norm().max(1e-300), "gap {gap}");
    }

    #[test]
    fn objective_zero_on_constructed_match() {
        let channels = toy_channels(4, &[6, 5], 7);
        let state = random_state(&channels, 8);
        let t = cascade_transfer_t(&state, &channels).unwrap();
        let w = weights(t * Cx::from(state.rho));
        assert_eq!(approximation_objective(&w, &state, &channels).unwrap(), 0.0);
    }

    #[test]
    fn objective_reduces_to_scaled_transfer_norm_on_zero_target() {
        let channels = toy_channels(4, &[6], 9);
        let state = random_state(&channels, 10);
        let t = cascade_transfer_t(&state, &channels).unwrap();
        let w = weights(DVector::zeros(4));
        let obj = approximation_objective(&w, &state, &channels).unwrap();
        assert!((obj - state.rho * t.norm()).abs() < 1e-12);
    }

    #[test]
    fn objective_equals_elementwise_definition() {
        let channels = toy_channels(5, &[7, 6], 11);
        let state = random_state(&channels, 12);
        let w = weights(sample_cn_vector(5, 1.0, &mut rng(13)));
        let t = cascade_transfer_t(&state, &channels).unwrap();
        let by_hand: f64 = (0..5)
            .map(|k| (w.w_star[k] - Cx::from(state.rho) * t[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let obj = approximation_objective(&w, &state, &channels).unwrap();
        assert!((obj - by_hand).abs() < 1e-12 * by_hand);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let h = 1e-6;
        for instance in 0..10 {
            let channels = toy_channels(8, &[16, 16], 100 + instance);
            let state = random_state(&channels, 200 + instance);
            let w = weights(sample_cn_vector(8, 1.0, &mut rng(300 + instance)));
            let grad = objective_gradient(&w, &state, &channels).unwrap();
            let f = |s: &CascadeState| pgd_objective(&w, s, &channels).unwrap();

            let check = |analytic: f64, plus: f64, minus: f64, what: &str| {
                let fd = (plus - minus) / (2.0 * h);
                let denom = fd.abs().max(analytic.abs()).max(1e-12);
                let rel = (fd - analytic).abs() / denom;
                assert!(rel < 1e-4, "{what}: analytic {analytic}, fd {fd}, rel {rel}");
            };

            for l in 0..2 {
                for k in 0..16 {
                    let mut sp = state.clone();
                    let mut sm = state.clone();
                    sp.amps[l][k] += h;
                    sm.amps[l][k] -= h;
                    check(grad.amps[l][k], f(&sp), f(&sm), "amp");

                    let mut sp = state.clone();
                    let mut sm = state.clone();
                    sp.phases[l][k] += h;
                    sm.phases[l][k] -= h;
                    check(grad.phases[l][k], f(&sp), f(&sm), "phase");
                }
            }
            let mut sp = state.clone();
            let mut sm = state.clone();
            sp.rho += h;
            sm.rho -= h;
            check(grad.rho, f(&sp), f(&sm), "rho");
        }
    }

    #[test]
    fn pgd_fixed_point_converges_instantly() {
        let channels = toy_channels(6, &[8, 8], 14);
        let start = random_state(&channels, 15);
        let t = cascade_transfer_t(&start, &channels).unwrap();
        let w = weights(t * Cx::from(start.rho));
        let (state, trace) =
            pgd_fit_from(&w, &channels, &PgdOptions::default(), start.clone()).unwrap();
        assert_eq!(trace.objective_per_iter[0], 0.0);
        assert_eq!(trace.final_objective, 0.0);
        assert_eq!(trace.iters_run, 0);
        assert!(trace.converged);
        assert_eq!(state, start);
    }

    #[test]
    fn pgd_never_worsens_the_best_objective() {
        let channels = toy_channels(8, &[16, 16], 16);
        let w = weights(sample_cn_vector(8, 1.0, &mut rng(17)));
        let opts = PgdOptions {
            max_iters: 200,
            phase_range: PhaseRange::FullCircle,
            ..PgdOptions::default()
        };
        let (state, trace) = pgd_fit(&w, &channels, &opts, &mut rng(18)).unwrap();
        assert!(trace.final_objective <= trace.objective_per_iter[0]);
        for pair in trace.objective_per_iter.windows(2) {
            assert!(pair[1] <= pair[0], "best objective increased");
        }
        assert_eq!(
            trace.final_objective,
            *trace.objective_per_iter.last().unwrap()
        );
        assert!(state.feasible_in(opts.phase_range));
        let direct = approximation_objective(&w, &state, &channels).unwrap();
        assert!((direct - trace.final_objective).abs() < 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn pgd_is_deterministic() {
        let channels = toy_channels(6, &[12], 19);
        let w = weights(sample_cn_vector(6, 1.0, &mut rng(20)));
        let opts = PgdOptions {
            max_iters: 50,
            ..PgdOptions::default()
        };
        let (sa, ta) = pgd_fit(&w, &channels, &opts, &mut rng(21)).unwrap();
        let (sb, tb) = pgd_fit(&w, &channels, &opts, &mut rng(21)).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(ta, tb);
    }

    #[test]
    fn pgd_rejects_degenerate_targets() {
        let channels = toy_channels(4, &[8], 22);
        let zero = weights(DVector::zeros(4));
        assert!(pgd_fit(&zero, &channels, &PgdOptions::default(), &mut rng(23)).is_err());
        let bad = weights(DVector::from_element(4, Cx::new(f64::NAN, 0.0)));
        let start = random_state(&channels, 24);
        assert!(pgd_fit_from(&bad, &channels, &PgdOptions::default(), start).is_err());
    }

    #[test]
    fn init_state_is_all_pass_with_projected_gain() {
        let channels = toy_channels(5, &[9, 7], 25);
        let w = weights(sample_cn_vector(5, 1.0, &mut rng(26)));
        let opts = PgdOptions::default();
        let state = init_state(&channels, &w, &mut rng(27), &opts).unwrap();
        for a in &state.amps {
            assert!(a.iter().all(|&x| x == 1.0));
        }
        for p in &state.phases {
            assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        assert!(state.rho >= RHO_MIN);
    }

    #[test]
    fn init_state_self_projection_gain_is_one() {
        let channels = toy_channels(5, &[9], 28);
        let probe = init_state(
            &channels,
            &weights(sample_cn_vector(5, 1.0, &mut rng(29))),
            &mut rng(30),
            &PgdOptions::default(),
        )
        .unwrap();
        let t = cascade_transfer_t(&probe, &channels).unwrap();
        // Same generator stream, so the same phases are drawn; the target is
        // now exactly the initial transfer.
        let state = init_state(&channels, &weights(t), &mut rng(30), &PgdOptions::default())
            .unwrap();
        assert!((state.rho - 1.0).abs() < 1e-12, "rho {}", state.rho);
    }

    #[test]
    fn init_state_orthogonal_target_clamps_gain() {
        let channels = toy_channels(5, &[9], 31);
        let probe = init_state(
            &channels,
            &weights(sample_cn_vector(5, 1.0, &mut rng(32))),
            &mut rng(33),
            &PgdOptions::default(),
        )
        .unwrap();
        let t = cascade_transfer_t(&probe, &channels).unwrap();
        // Multiplying by j zeroes the real part of the correlation.
        let state = init_state(
            &channels,
            &weights(t * Cx::new(0.0, 1.0)),
            &mut rng(33),
            &PgdOptions::default(),
        )
        .unwrap();
        assert_eq!(state.rho, RHO_MIN);
    }

    #[test]
    fn init_state_flips_anticorrelated_start_on_full_circle() {
        let channels = toy_channels(5, &[9], 34);
        let opts_full = PgdOptions {
            phase_range: PhaseRange::FullCircle,
            ..PgdOptions::default()
        };
        let probe = init_state(
            &channels,
            &weights(sample_cn_vector(5, 1.0, &mut rng(35))),
            &mut rng(36),
            &opts_full,
        )
        .unwrap();
        let t = cascade_transfer_t(&probe, &channels).unwrap();
        let target = weights(&t * Cx::from(-1.0));

        let full = init_state(&channels, &target, &mut rng(36), &opts_full).unwrap();
        assert!((full.rho - 1.0).abs() < 1e-12, "rho {}", full.rho);
        let flipped_t = cascade_transfer_t(&full, &channels).unwrap();
        assert!((&flipped_t + &t).norm() < 1e-12 * t.norm());

        // The half circle cannot express the flip; the gain clamps instead.
        let opts_half = PgdOptions::default();
        let probe_half = init_state(
            &channels,
            &weights(sample_cn_vector(5, 1.0, &mut rng(37))),
            &mut rng(38),
            &opts_half,
        )
        .unwrap();
        let t_half = cascade_transfer_t(&probe_half, &channels).unwrap();
        let half = init_state(
            &channels,
            &weights(&t_half * Cx::from(-1.0)),
            &mut rng(38),
            &opts_half,
        )
        .unwrap();
        assert_eq!(half.rho, RHO_MIN);
    }

    #[test]
    fn state_validation_rejects_out_of_range() {
        let ok_amp = DVector::from_element(3, 0.5);
        let ok_phase = DVector::from_element(3, 0.5);
        assert!(CascadeState::new(
            vec![DVector::from_element(3, 1.5)],
            vec![ok_phase.clone()],
            1.0
        )
        .is_err());
        assert!(CascadeState::new(
            vec![ok_amp.clone()],
            vec![DVector::from_element(3, 2.5)],
            1.0
        )
        .is_err());
        assert!(CascadeState::new(vec![ok_amp.clone()], vec![ok_phase.clone()], 0.0).is_err());
        assert!(CascadeState::new(vec![ok_amp], vec![DVector::zeros(2)], 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn pgd_outputs_stay_feasible(
            n_r in 2usize..6,
            n_l in 2usize..10,
            layers in 1usize..4,
            full in proptest::bool::ANY,
            tag in 0u64..200,
        ) {
            let sizes = vec![n_l; layers];
            let channels = toy_channels(n_r, &sizes, tag.wrapping_add(1 << 33));
            let w = weights(sample_cn_vector(
                n_r,
                1.0,
                &mut rng(tag.wrapping_add(1 << 34)),
            ));
            let opts = PgdOptions {
                max_iters: 30,
                phase_range: if full { PhaseRange::FullCircle } else { PhaseRange::HalfCircle },
                ..PgdOptions::default()
            };
            let (state, trace) =
                pgd_fit(&w, &channels, &opts, &mut rng(tag.wrapping_add(1 << 35))).unwrap();
            prop_assert!(state.feasible_in(opts.phase_range));
            prop_assert!(trace.final_objective <= trace.objective_per_iter[0]);
            for pair in trace.objective_per_iter.windows(2) {
                prop_assert!(pair[1] <= pair[0]);
            }
        }
    }
}

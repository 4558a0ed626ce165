//! Deterministic fixtures for the performance benches. Every instance is
//! seeded, so timing differences between runs come from the code and the
//! machine, not from the draw.

use airelm_core::cascade::CascadeState;
use airelm_core::channel::{
    sample_cascade_channels, sample_cn_matrix, sample_cn_vector, sample_rayleigh,
    ChannelRealization,
};
use airelm_core::elm::{ActivationMatrix, IdealWeights, SolverPath};
use airelm_core::frontend::{sample_bias, ActivationMode, BiasVector};
use airelm_core::seed::StreamKey;
use airelm_core::Cx;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// A ridge problem of the given shape with unit-variance entries.
pub fn ridge_problem(n_samples: usize, n_weights: usize) -> (ActivationMatrix, DVector<Cx>) {
    let mut rng = StreamKey::new(11).with_str("bench-ridge").rng();
    let g = sample_cn_matrix(n_samples, n_weights, 1.0, &mut rng);
    let z = sample_cn_vector(n_samples, 1.0, &mut rng);
    let matrix = ActivationMatrix::new(g, ActivationMode::Approximate).unwrap();
    (matrix, z)
}

/// A cascade fitting instance: channels, a target weight vector, and a
/// feasible interior state to evaluate at.
pub struct CascadeInstance {
    pub weights: IdealWeights,
    pub channels: ChannelRealization,
    pub state: CascadeState,
}

pub fn cascade_instance(n_r: usize, layer_size: usize, n_layers: usize) -> CascadeInstance {
    let mut rng = StreamKey::new(12).with_str("bench-cascade").rng();
    let sizes = vec![layer_size; n_layers];
    let h = sample_rayleigh(n_r, 8, 0.0, &mut rng).unwrap();
    let (layers, terminal) = sample_cascade_channels(&sizes, n_r, -3.0, &mut rng).unwrap();
    let channels = ChannelRealization::new(h, layers, terminal, 0.0, -3.0).unwrap();
    let weights = IdealWeights {
        w_star: sample_cn_vector(n_r, 1.0, &mut rng),
        ridge: 1e-6,
        solver_path: SolverPath::Primal,
    };
    let amps: Vec<DVector<f64>> = sizes
        .iter()
        .map(|&n| DVector::from_fn(n, |_, _| 0.2 + 0.75 * rng.gen::<f64>()))
        .collect();
    let phases: Vec<DVector<f64>> = sizes
        .iter()
        .map(|&n| DVector::from_fn(n, |_, _| rng.gen::<f64>()))
        .collect();
    let state = CascadeState::new(amps, phases, 0.9).unwrap();
    CascadeInstance {
        weights,
        channels,
        state,
    }
}

/// Inputs, channel, and bias for activation-matrix assembly at the scale of
/// a small tabular dataset.
pub struct FrontendInstance {
    pub inputs: Vec<DVector<f64>>,
    pub h: DMatrix<Cx>,
    pub bias: BiasVector,
}

pub fn frontend_instance(n_samples: usize, n_r: usize, n_t: usize) -> FrontendInstance {
    let mut rng = StreamKey::new(13).with_str("bench-frontend").rng();
    let inputs: Vec<DVector<f64>> = (0..n_samples)
        .map(|_| DVector::from_fn(n_t, |_, _| rng.gen::<f64>()))
        .collect();
    let h = sample_rayleigh(n_r, n_t, 0.0, &mut rng).unwrap();
    let bias = sample_bias(n_r, (2 * n_r * n_t) as f64, n_t, &mut rng).unwrap();
    FrontendInstance { inputs, h, bias }
}

//! Simulation core for an over-the-air extreme learning machine.
//!
//! The crate models a wireless inference link end to end: transmitters encode
//! feature vectors onto carrier amplitudes, a random multipath channel mixes
//! them, an energy-harvesting metasurface applies a nonlinear activation, and
//! a receive combiner implements the trained readout. Training is closed-form
//! complex ridge regression; the readout weights are then approximated over
//! the air by a cascade of tunable phase-shifting surfaces fitted with
//! projected gradient descent.
//!
//! Modules are layered bottom-up:
//!
//! - [`seed`]: deterministic substream derivation so every random quantity is
//!   a pure function of a master seed and a purpose label.
//! - [`channel`]: Rayleigh and Ricean channel sampling, cascade layer
//!   channels, and SNR-to-noise-variance conversion.
//! - [`frontend`]: the metasurface activation (amplitude dead zone with phase
//!   preservation) and bias sampling.
//! - [`elm`]: activation-matrix assembly, closed-form ridge solve, prediction,
//!   and binary decision.
//! - [`cascade`]: the tunable-surface transfer function and the projected
//!   gradient fit of cascade parameters to a target weight vector.
//! - [`pipeline`]: one-call train / infer / evaluate over a labeled dataset.
//! - [`data`]: dataset loading (CSV and IDX), feature scaling, and splits.

pub mod cascade;
pub mod channel;
pub mod data;
pub mod elm;
pub mod error;
pub mod frontend;
pub mod pipeline;
pub mod seed;

pub use cascade::{CascadeState, PgdOptions, PgdTrace, PhaseRange};
pub use channel::{ChannelRealization, RiceanParams};
pub use elm::{IdealWeights, TargetEncoding};
pub use error::{Error, Result};
pub use frontend::{ActivationMode, BiasVector};
pub use pipeline::{EvalReport, SystemConfig, TrainedModel, Variant};

/// Complex scalar used throughout: double-precision rectangular form.
pub type Cx = num_complex::Complex<f64>;

//! Chaotic shape-forming filter (CSF) signals and blind multipath channel
//! identification from the autocorrelation of the received signal.
//!
//! The ACF of a CSF waveform does not depend on the encoded symbols: it is the
//! ACF of the base pulse. Because that ACF is known at the receiver, the
//! received-signal ACF becomes a known quadratic function of the channel taps,
//! and the taps can be recovered without any probe sequence.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases at the crate root fix the scalar to `f64`.

pub mod acf;
pub mod baselines;
pub mod channel;
pub mod csf;
pub mod error;
pub mod estimator;
pub mod linalg;
mod quad;
pub mod scalar;
pub mod waveform;

pub use acf::{
    empirical_acf, empirical_acf_samples, predicted_rx_acf, predicted_rx_acf_at, secondary_peaks,
    AcfEstimate,
};
pub use baselines::{ls_estimate, LsEstimate, ProbeFrame};
pub use channel::{
    add_awgn, apply_multipath, attenuation_from_delay, gaussian_samples, sample_random_channel,
    ChannelModel, NoiseSpec, Path,
};
pub use csf::{
    base_pulse, encode_waveform, integrated_acf, random_symbols, theoretical_acf, CsfParams,
    RxxTable, SymbolStream,
};
pub use error::{Error, Result};
pub use estimator::{
    build_residuals, detect_paths, mse, residual_jacobian, solve_channel, EstimationResult,
    IdentificationProblem, SolverOptions, Termination,
};
pub use scalar::Real;
pub use waveform::Waveform;

pub type CsfParams64 = CsfParams<f64>;
pub type Waveform64 = Waveform<f64>;
pub type ChannelModel64 = ChannelModel<f64>;
pub type AcfEstimate64 = AcfEstimate<f64>;
pub type RxxTable64 = RxxTable<f64>;
pub type IdentificationProblem64 = IdentificationProblem<f64>;
pub type EstimationResult64 = EstimationResult<f64>;
pub type SolverOptions64 = SolverOptions<f64>;
pub type ProbeFrame64 = ProbeFrame<f64>;

pub type CsfParams32 = CsfParams<f32>;
pub type Waveform32 = Waveform<f32>;

//! Simulation and numerics for a leaky integrate-and-fire analog-to-spike
//! encoder with an adaptive refractory period.
//!
//! The pipeline is: analog signal ([`signals`]) → one phase-coded spike per
//! sampling window ([`circuit`], closed forms in [`codec`]) → ideal or linear
//! decoding, with analytic error predictions ([`error_model`]) and decoder
//! fitting ([`tuner`]) → frequency spectrum through a spiking Fourier
//! transform ([`sft`]).

pub mod circuit;
pub mod codec;
mod error;
pub mod error_model;
pub mod io;
pub mod sft;
pub mod signals;
pub mod tuner;

pub use circuit::{
    encode_signal, encode_signal_with, membrane_trace, simulate_window, EncodeOptions, InputCoupling,
    NoiseMode, SpikeTrain, ThermalNoiseModel,
};
pub use codec::{
    decode_ideal, decode_linear, encode_linear, encode_time, timing_summary, EncoderConfig,
    LinearDecoderParams, SpikeTime, TimingSummary,
};
pub use error::{Error, Result};
pub use error_model::{
    empirical_errors, predicted_decoding_error, quantization_shift, thermal_shift, ErrorReport,
};
pub use sft::{dft_weights, sft_frame, sft_stream, spectrum_rmse, SftConfig, Spectrum, SpikingFourier};
pub use signals::{constant, ideal_adc_fft, sine, AnalogSignal, SineSpec, Waveform};
pub use tuner::{fit_linear_decoder, linear_error, loss, TunerConfig, TuningResult};

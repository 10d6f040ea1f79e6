//! Spike-latency sparse coding of images.
//!
//! Pipeline: [`retina`] filters an image with ON/OFF center-surround kernels
//! and turns activity into first-spike latencies; [`network`] integrates those
//! spikes in a layer of non-leaky integrate-and-fire neurons under
//! winner-take-all inhibition and learns with [`stdp`]; [`training`] drives
//! epochs and sweeps; [`readout`] reconstructs stimuli from spike responses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dataio;
pub mod error;
pub mod grid;
pub mod network;
pub mod readout;
pub mod retina;
pub mod stdp;
pub mod training;

pub use error::{Error, Result};
pub use grid::Grid;
pub use network::{
    apply_stdp, init_weights, membrane_trace, present, wta_select, Mode, NetworkConfig,
    PresentationOutcome, SynapseMatrix,
};
pub use readout::{
    estimate_rf, evaluate, reconstruct, reconstruction_error, responses, EvalReport,
};
pub use retina::{
    encode_lgn, latency_encode, make_dog_kernel, DogKernel, EncodedStimulus, LatencyVector, Retina,
};
pub use stdp::{stdp_delta, StdpParams};
pub use training::{sweep, train, train_epoch, SweepAxis, SweepRow, TrainPlan, TrainStats};

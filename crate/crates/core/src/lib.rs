//! Composable restricted Boltzmann machines.
//!
//! Small RBMs (logic gates, adders, multipliers) are built directly from
//! truth tables or trained with contrastive divergence, merged into large
//! models by identifying visible units, and queried by clamped block Gibbs
//! sampling. Small models can be analysed exactly by enumeration.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod error;
pub mod exact;
pub mod merge;
pub mod rbm;
pub mod sampler;
pub mod scalar;
pub mod synthesis;
pub mod tasks;
pub mod training;

pub use error::{Error, Result};
pub use merge::{compose, merge_pair, tie_terminals, MergedModel, Netlist, NetlistDocument};
pub use rbm::{BinaryState, Rbm};
pub use sampler::{ClampMask, Histogram};
pub use scalar::Scalar;
pub use synthesis::{GateKind, TruthTable};
pub use tasks::{Operation, TaskSpec};
pub use training::{TrainConfig, TrainTask};

pub type Rbm64 = Rbm<f64>;
pub type Rbm32 = Rbm<f32>;
pub type MergedModel64 = MergedModel<f64>;
pub type MergedModel32 = MergedModel<f32>;
pub type Netlist64 = Netlist<f64>;

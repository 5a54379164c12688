//! Minimal differentiable kernels for the sleep-control pipeline.
//!
//! Every layer carries a hand-derived backward pass; there is no autodiff
//! graph. Kernels are pure functions of explicit parameter and state values,
//! generic over the scalar type (`f32`/`f64` via [`Scalar`]). The concrete
//! aliases below fix the pipeline-wide width to `f64`.

pub mod activation;
pub mod attention;
pub mod batchnorm;
pub mod checkpoint;
pub mod conv;
pub mod dense;
pub mod error;
pub mod gradcheck;
pub mod lstm;
pub mod optim;
pub mod scalar;
pub mod tensor;

pub use activation::Activation;
pub use error::{NnError, Result};
pub use scalar::Scalar;
pub use tensor::TensorSet;

/// Scalar width used by the whole pipeline.
pub type Real = f64;

pub type Dense = dense::Dense<Real>;
pub type DenseGrads = dense::DenseGrads<Real>;
pub type Conv2d = conv::Conv2d<Real>;
pub type Conv2dGrads = conv::Conv2dGrads<Real>;
pub type Conv1d = conv::Conv1d<Real>;
pub type Conv1dGrads = conv::Conv1dGrads<Real>;
pub type LstmCell = lstm::LstmCell<Real>;
pub type LstmState = lstm::LstmState<Real>;
pub type LstmGrads = lstm::LstmGrads<Real>;
pub type Attention = attention::Attention<Real>;
pub type AttentionGrads = attention::AttentionGrads<Real>;
pub type BatchNorm = batchnorm::BatchNorm<Real>;
pub type BatchNormGrads = batchnorm::BatchNormGrads<Real>;
pub type AdamState = optim::AdamState<Real>;

//! Hand-derived differentiable layers, losses, Adam and finite-difference
//! gradient checking. Everything runs in `f64`.

mod activation;
mod adam;
mod classifier;
mod conv;
mod dense;
mod dropout;
pub mod gradcheck;
mod loss;
mod lstm;
mod model;
mod tensor;

pub use activation::Activation;
pub use adam::{adam_step, AdamConfig, AdamState};
pub use classifier::{ClassifierConfig, ClassifierProbe, FitConfig, FitHistory, SequenceClassifier};
pub use conv::{conv1d, Conv1d};
pub use dense::Dense;
pub use dropout::{dropout, DropoutMask, DropoutMode};
pub use gradcheck::{grad_check, Differentiable, GradCheckReport};
pub use loss::{bce_term, mse, weighted_bce, LossKind, BCE_CLIP};
pub use lstm::{lstm_cell, lstm_sequence, Lstm, LstmCache, LstmLayer};
pub use model::{Gradients, LayerSpec, Model, ParamBlock};
pub use tensor::Tensor;

//! Feed-forward multilayer perceptron with a softmax output, trained by
//! minibatch sgd or adam.

mod network;
mod train;

pub use network::{
    init_weights, max_gradient_error, one_hot, Activation, ForwardCache, Gradients, MlpModel,
};
pub use train::{fit, train, EpochRecord, LearningRateMode, MlpConfig, Optimizer, Solver, TrainHistory};

//! Differentiable layer operations: each op comes as a forward function and
//! an explicit backward that maps the upstream gradient to input/parameter
//! gradients. Everything is a pure function of its arguments; no op keeps
//! hidden state.

mod activation;
mod batchnorm;
mod concat;
mod conv;
mod dense;
mod pool;
mod softmax;

pub use activation::{relu, relu_backward, sigmoid, sigmoid_backward};
pub use batchnorm::{
    batchnorm, batchnorm_backward, batchnorm_train, BnCache, BN_EPSILON, BN_MOMENTUM,
};
pub use concat::{broadcast_mul, broadcast_mul_backward, concat_features, concat_features_backward};
pub use conv::{conv2d, conv2d_backward};
pub use dense::{dense, dense_backward};
pub use pool::{
    channel_max, channel_max_backward, channel_mean, channel_mean_backward, global_pool,
    global_pool_backward, maxpool2d, maxpool2d_backward, PoolKind,
};
pub use softmax::softmax;

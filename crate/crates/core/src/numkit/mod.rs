//! Small dense networks with hand-derived gradients, the Gaussian policy head,
//! and the parameter projection used by the actor update.

mod gaussian;
pub mod gradcheck;
pub mod linalg;
mod mlp;
mod params;

pub use gaussian::{
    gaussian_log_prob, gaussian_sample_logprob, PolicyGrad, PolicyParams, ValueParams,
    LOG_STD_INIT, LOG_STD_MAX, LOG_STD_MIN,
};
pub use mlp::{MlpGrad, MlpParams};
pub use params::{clip_norm, project_in_place, project_params, Parameters};

//! Random-walk Metropolis with parallel tempering.

mod config;
mod engine;
mod prior;
mod samples;

pub use config::SamplerConfig;
pub use engine::{
    acceptance_probability, anneal, mh_step, pt_run, swap_attempt, swap_probability, ChainState, FitResult, RunStats,
    Target,
};
pub use prior::Prior;
pub use samples::{format_float, PosteriorSamples, SampleRow};

//! Runtime laboratory for the self-adjusting (1,λ)-EA with λ resets and
//! its static comma/plus counterparts on OneMax and frozen-noise distorted
//! OneMax.
//!
//! Modules, bottom-up:
//! - [`bitstring`]: packed genotypes, counting, standard bit mutation, seeded streams.
//! - [`landscape`]: OneMax and distorted OneMax with evaluation counting.
//! - [`algorithms`]: the four optimizers and the λ controller.
//! - [`analysis`]: clone, Hamming-3 and gambler's-ruin formulas with their oracles.
//! - [`harness`]: replicated experiments, summaries and the preset sweeps.
//! - [`report`], [`plot`], [`formula`]: CSV I/O, SVG charts, parameter expressions.

pub mod algorithms;
pub mod analysis;
pub mod bitstring;
mod error;
pub mod formula;
pub mod harness;
pub mod landscape;
pub mod plot;
pub mod report;

pub use algorithms::{
    plus_accepts, run_generation, run_to_target, run_to_target_with, select, update_lambda, AlgoState,
    AlgorithmKind, ControllerParams, GenerationOutcome, GenerationRecord, Optimizer, RunOptions, RunResult,
    Selection,
};
pub use bitstring::{
    hamming, nearest_int, onemax, standard_bit_mutation, uniform_random_point, zeromax, BitMutation,
    RandomStream, SearchPoint,
};
pub use error::{Error, Result};
pub use harness::{
    figure1_sweep, figure2_params, figure2_sweep, normalized_runtime, run_experiment, run_experiments,
    summarize, ExperimentConfig, RunRecord, SummaryStats, SweepOptions,
};
pub use landscape::{evaluate_onemax, target_reached, DistortedOneMax, EvalCounter, Fitness, TargetSpec};

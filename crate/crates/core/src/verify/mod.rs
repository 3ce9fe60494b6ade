//! Experiments confronting the estimates with computation.

pub mod boundedness;
pub mod counterexample;
pub mod montecarlo;
pub mod report;
pub mod sweep;

pub use boundedness::{boundedness_experiment, BoundednessConfig};
pub use counterexample::{counterexample_run, CounterexampleConfig};
pub use montecarlo::{montecarlo_check, MonteCarloConfig};
pub use report::{cell_rng, Check, ExperimentReport};
pub use sweep::{estimate_sweep, weighted_sweep, Family, SweepConfig, WeightCase, WeightedSweepConfig};

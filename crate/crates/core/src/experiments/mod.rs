//! The experiment harness: the generative process, convergence sweeps,
//! differentiation checks, exact expected reward and report files.

pub mod config;
pub mod convergence;
pub mod dataset;
pub mod differentiating;
pub mod equivalence;
pub mod input;
pub mod report;
pub mod reward;
pub mod stats;

pub use config::{ExperimentConfig, HiddenSpec, InputDiffConfig, NoiseDiffConfig};
pub use convergence::{estimate_convergence, ConvergenceReport, ConvergenceRow, ProgramCurve, ReportMeta};
pub use dataset::{generate_dataset, generate_with, DataFile, Dataset, Hidden};
pub use differentiating::{check_input_differentiating, check_noise_differentiating};
pub use equivalence::EquivalenceChecker;
pub use input::InputSource;
pub use report::{export_report, read_report};
pub use reward::{expected_reward, expected_rewards};
pub use stats::{wilson, Estimate};

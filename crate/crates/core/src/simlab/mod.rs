//! Monte Carlo laboratory: samplers, ensemble runners and cross-path statistics.

pub mod confseq;
pub mod dist;
pub mod ensemble;
pub mod leverage;
pub mod real;
pub mod seed;
pub mod stats;
pub mod subg;

pub use confseq::{invert_confidence_set, run_confseq, ConfSeqConfig, ConfSeqRow};
pub use dist::{sample_path, DistSpec, Sampler};
pub use ensemble::{
    run_ensemble, run_paths, CheckpointSummary, EnsembleSummary, ExperimentConfig, PathRecord,
    PathSample,
};
pub use leverage::{leverage_trace, run_leverage, LeverageTrace};
pub use seed::hash64;
pub use stats::{chi2_cdf, ks_distance, ville_violation_rate};
pub use subg::{run_subg, SubgConfig, SubgPath, SubgRule};

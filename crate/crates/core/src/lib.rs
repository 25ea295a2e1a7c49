pub mod classifier;
pub mod minimizer;
pub mod number_theory;
pub mod pipeline;
pub mod quantum;
pub mod report;
pub mod sequence;
pub mod witness;

pub use classifier::{RandomnessClass, Regime};
pub use minimizer::{CompressibilityVerdict, CompressionRegime, CoverKind, CoverSolution};
pub use pipeline::{analyze, cross_check, AnalysisOptions, Finding, FindingKind, PipelineError};
pub use report::{RandomnessReport, ReportEnvelope, RunMetadata};
pub use sequence::{Question, Sequence};
pub use witness::WitnessRelation;

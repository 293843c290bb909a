//! Learning minimum-size decision sets from binarized tabular data.
//!
//! The crate turns a dataset into SAT or MaxSAT instances whose models are
//! decision sets measured in literals, solves them with a built-in CDCL
//! solver and evaluates the resulting rules.
//!
//! * [`dataset`]: CSV ingestion, quantization and one-hot encoding,
//!   sanitization, stratified folds.
//! * [`sat`]: solver, cardinality encodings, DIMACS, MaxSAT.
//! * [`encoder`]: the node-sequence encodings (perfect, bounded, sparse).
//! * [`optimizer`]: search loops and a brute-force reference.
//! * [`model`]: decision sets, decoding, verification, evaluation, JSON.

pub mod dataset;
pub mod fixtures;
pub mod encoder;
pub mod model;
pub mod optimizer;
pub mod sat;

pub use dataset::{BinDataset, Binarizer, RawDataset};
pub use encoder::{CnfBundle, EncodeMode, Scope, VarMap};
pub use model::{DecisionSet, EvalReport, Rule};
pub use optimizer::{SearchLimits, SolveOutcome, SolveStatus};

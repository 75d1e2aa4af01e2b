//! Flag-qubit Steane-code memory simulation, lookup-table and neural decoders,
//! and attribution tools for inspecting what the networks learned.

pub mod circuit;
pub mod noise;
pub mod sim;
pub mod steane;
pub mod decoder;
pub mod dep;
pub mod seqlut;
pub mod nn;
pub mod analysis;
pub mod neural;
pub mod dataset;
pub mod eval;
pub mod xai;
pub mod config;
pub mod cli;

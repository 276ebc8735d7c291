//! Companion crate to `vbq-core`: file formats, the experiment harness, the
//! synthetic posterior sources, and the `vbq` command-line tool.

pub mod analysis;
pub mod cli;
pub mod csv;
pub mod rng;
pub mod source;

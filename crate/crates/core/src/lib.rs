//! Style and topic models of online community language.
//!
//! The crate reconstructs forum threads from archive dumps, characterizes
//! each community by hybrid word/POS trigram language models and by
//! LDA-derived topic profiles, classifies thread- and user-level documents
//! by community, and correlates community feedback (post karma, user
//! k-index) with normalized style and topic similarity.
//!
//! Runnable walkthroughs of each capability live in `examples/`; the
//! `commlang` binary drives the whole pipeline from a JSON config.

pub mod classify;
pub mod error;
pub mod feedback;
pub mod ingest;
pub mod pipeline;
pub mod stylelm;
pub mod synth;
pub mod text;
pub mod topiclm;
pub mod vocab;

pub use error::{Error, Result};

//! Blueprint extraction for annotated MiniLean projects.
//!
//! The pipeline parses sources ([`source`]), collects tagged declarations
//! into a [`store::NodeStore`], infers dependencies and formalization status
//! ([`infer`]), and renders LaTeX fragments ([`latex`]), dependency graphs
//! ([`graph`]) and legacy-blueprint conversions ([`legacy`]). [`build`] ties
//! it together with configuration and incremental rebuilds.

pub mod build;
pub mod error;
pub mod graph;
pub mod hash;
pub mod infer;
pub mod latex;
pub mod legacy;
pub mod name;
pub mod source;
pub mod store;

pub use error::{Error, Result};
pub use name::{Name, NameOrLabel, SourceSpan};

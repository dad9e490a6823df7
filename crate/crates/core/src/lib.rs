//! Topological data analysis for point clouds and text corpora.
//!
//! The crate covers the two classic TDA pipelines:
//!
//! * persistent homology: [`complex::build_rips`] builds a Vietoris–Rips
//!   filtration, [`persistence`] reduces its boundary matrix over the
//!   two-element field into a [`persistence::PersistenceDiagram`], and
//!   [`diagramtools`] compares diagrams (bottleneck, Wasserstein) and turns
//!   them into persistence landscapes;
//! * Mapper: a lens from [`embed`] is covered by overlapping bins, each
//!   preimage is clustered with [`clustering`], and [`mapper`] assembles the
//!   nerve graph and scores it against document labels.
//!
//! [`textpipeline`] turns raw corpora into TF-IDF document-term matrices
//! that feed both pipelines.

pub mod clustering;
pub mod complex;
pub mod diagramtools;
pub mod mapper;
pub mod embed;
pub mod metricspace;
pub mod persistence;
pub mod textpipeline;
mod svg;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

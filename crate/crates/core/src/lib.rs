//! Spectral and semidefinite bounds for the max-k-cut problem and the
//! chromatic number.
//!
//! The crate provides graphs and named families ([`graph`], [`catalogue`],
//! [`io`]), dense symmetric eigensolvers and Laplacian idempotents
//! ([`spectra`]), closed-form bounds ([`bounds`]), a first-order SDP solver
//! ([`sdp`]) with the relaxations built on it ([`relax`]), the Hamming scheme
//! ([`hamming`]), exact and heuristic cuts ([`oracle`]) and a reproducible
//! check suite ([`reproduce`]).

pub mod bounds;
pub mod catalogue;
pub mod error;
pub mod graph;
pub mod hamming;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod relax;
pub mod reproduce;
pub mod sdp;
pub mod spectra;

pub use error::{Error, Result};
pub use graph::{cut_weight, Graph, Partition};
pub use linalg::Matrix;

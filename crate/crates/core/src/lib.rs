//! Quaternion two-dimensional color PCA.
//!
//! Color images are encoded as pure quaternion matrices (`R i + G j + B k` per pixel).
//! The crate trains eigenface models with the sample-relaxed variant (SR-2DCPCA),
//! which weights each class by a softmax of its largest within-class variance, and with
//! the unweighted 2DCPCA special case. A grayscale 2DPCA baseline shares the same
//! dataset and report plumbing.

pub mod adjoint;
pub mod archive;
pub mod baseline;
pub mod dataset;
pub mod eig;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod model;
pub mod quaternion;
pub mod recognize;
pub mod reconstruct;
pub mod toy;
#[doc(hidden)]
pub mod testutil;

pub use error::{Error, ErrorClass, Result};
pub use matrix::QMatrix;
pub use quaternion::{qmul, Quaternion};
pub use model::{EigenfaceModel, Mode, RelaxationVector};

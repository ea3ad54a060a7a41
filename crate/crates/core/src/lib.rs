//! Morphological operations for images whose pixels are categorical
//! probability distributions.
//!
//! Multi-class predictions (e.g. softmax outputs of a segmentation network)
//! assign every pixel a probability vector over unordered categories. The
//! usual max/min machinery of grayscale morphology does not apply to such
//! values, so this crate provides operations that act on one category at a
//! time while keeping every pixel on the probability simplex:
//!
//! * [`categorical`] — dilation, erosion, opening and closing of a single
//!   category, the main event;
//! * [`protected`] — the same with a set of frozen categories that also
//!   gates where changes may propagate, backed by geodesic distances;
//! * [`dirichlet`] — per-channel morphology on Dirichlet parameter images;
//! * [`baselines`] — crisp comparisons: set-valued, label and
//!   single-category morphology on hard labels;
//! * [`grayscale`] — the underlying scalar-field operations;
//! * [`geodesic`] — Dijkstra and fast-marching distance fields on masked
//!   grids;
//! * [`io`] — the `.catd` container, PNG bridges and a declarative pipeline
//!   runner (also exposed by the `catmorph` binary).
//!
//! Images are immutable values; operations return new images and are safe to
//! run concurrently.

pub mod baselines;
pub mod categorical;
pub mod dirichlet;
pub mod error;
pub mod geodesic;
pub mod grayscale;
mod grid;
pub mod image;
pub mod io;
pub mod protected;
pub mod se;

pub use error::{Error, Result};
pub use image::{
    linear_index, CategoricalImage, DirichletImage, Label, LabelImage, ScalarImage, SetImage,
    SIMPLEX_TOL,
};
pub use se::{Norm, StructuringElement};

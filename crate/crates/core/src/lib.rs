//! 2.5D finite-difference time-domain acoustics for depth-symmetric tubes.
//!
//! A straight circular tube given by its area function is cut along its
//! mid-sagittal plane. The resulting 2D contour is simulated on a staggered
//! (Yee) grid, and the third dimension enters only through a per-sample
//! depth field that weights the velocity fluxes and the pressure
//! compliance:
//!
//! ```text
//! ∂p/∂t = −(ρc²/D) (∂(D vx)/∂x + ∂(D vy)/∂y)
//! ∂v/∂t = −∇p/ρ
//! ```
//!
//! With a constant depth the scheme is exactly the ordinary 2D FDTD; with a
//! circular depth profile and plane-wave propagation it reduces to the 1D
//! horn equation, which [`oracle`] evaluates independently in the
//! frequency domain.
//!
//! Modules:
//! - [`geometry`]: area functions, contour rasterization, depth maps;
//! - [`solver`]: field state, boundary handling, serial and multithreaded
//!   stepping, excitation pulses;
//! - [`analysis`]: transfer functions and formant picking;
//! - [`oracle`]: lossless chain-matrix reference;
//! - [`harness`]: configuration, pipelines, artifacts and benchmarks.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod solver;

pub use grid::Grid2;

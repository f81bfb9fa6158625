//! Exact Schrödinger propagators on Cartesian products `Z^d □ G_F` of the
//! integer lattice with a finite graph, and numerical checks of their
//! `t^{-d/3}` dispersive decay.
//!
//! The kernel factorises into a lattice part, a product of Bessel functions
//! `i^{nu_j} J_{nu_j}(2t)`, and the propagator of the finite crystal `G_F`
//! (see [`kernel`]). The [`oracle`] module recomputes it without that
//! formula, by direct evolution on a truncated box and by Floquet fiber
//! quadrature.

pub mod analysis;
pub mod bessel;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{build_finite_graph, FiniteGraph, GraphSpec};
pub use kernel::{ProductGraph, ProductPoint};
pub use spectral::Spectrum;

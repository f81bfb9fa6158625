//! Closed-form propagator kernel on `Z^d □ G_F`:
//!
//! ```text
//! e^{itH}(n + v_p, m + v_q) = prod_j i^{nu_j} J_{nu_j}(2t) * e^{itH_{G_F}}(v_p, v_q),   nu = n - m
//! ```
//!
//! The lattice and crystal factors separate, so sup norms and unitarity sums
//! over the infinite lattice reduce to one Bessel row per time.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bessel::{bessel_j, bessel_row, i_pow, BesselRow, LANDAU_CONSTANT};
use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::spectral::{PropagatorMatrix, Spectrum};

/// Orders beyond the ballistic turning point `|nu| ~ 2t` that are still
/// scanned; `J_nu(2t)` is below 1e-15 past `ceil(2t) + 40`.
pub const LIGHTCONE_MARGIN: usize = 40;

/// Offset radius that captures every non-negligible lattice factor at time `t`.
pub fn truncation_radius(t: f64) -> usize {
    (2.0 * t.abs()).ceil() as usize + LIGHTCONE_MARGIN
}

/// `(c 2^{-1/3})^d`, the envelope constant for `sup_norm(t) t^{d/3}`.
pub fn dispersion_envelope_constant(d: usize) -> f64 {
    (LANDAU_CONSTANT * 2f64.powf(-1.0 / 3.0)).powi(d as i32)
}

/// A vertex `n + v_p` of `Z^d □ G_F`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductPoint {
    pub n: Vec<i64>,
    pub p: usize,
}

impl ProductPoint {
    pub fn new(n: Vec<i64>, p: usize) -> Self {
        ProductPoint { n, p }
    }

    pub fn origin(d: usize, p: usize) -> Self {
        ProductPoint { n: vec![0; d], p }
    }
}

/// `i^nu J_nu(2t)`, the free propagator on `Z`.
pub fn lattice_factor_1d(nu: i64, t: f64) -> Complex64 {
    i_pow(nu) * bessel_j(nu, 2.0 * t)
}

/// `prod_j i^{nu_j} J_{nu_j}(2t)`.
pub fn lattice_factor(nu: &[i64], t: f64) -> Complex64 {
    nu.iter().map(|&n| lattice_factor_1d(n, t)).product()
}

/// All propagator amplitudes between two layers at lattice offset `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBlock {
    pub nu: Vec<i64>,
    pub t: f64,
    /// The common scalar `prod_j i^{nu_j} J_{nu_j}(2t)`.
    pub lattice_factor: Complex64,
    pub block: DMatrix<Complex64>,
}

impl KernelBlock {
    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.block[(p, q)]
    }

    pub fn max_abs(&self) -> f64 {
        self.block.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// The periodic graph `Z^d □ G_F` with its crystal already diagonalised.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    graph: FiniteGraph,
    spectrum: Spectrum,
    d: usize,
}

impl ProductGraph {
    pub fn new(graph: FiniteGraph, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("lattice dimension d must be at least 1".into()));
        }
        let spectrum = Spectrum::of_graph(&graph)?;
        Ok(ProductGraph { graph, spectrum, d })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.graph.k()
    }

    fn check_point(&self, x: &ProductPoint) -> Result<()> {
        if x.n.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.n.len(),
            });
        }
        if x.p >= self.k() {
            return Err(Error::VertexOutOfRange {
                index: x.p,
                k: self.k(),
            });
        }
        Ok(())
    }

    fn check_offset(&self, nu: &[i64]) -> Result<()> {
        if nu.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: nu.len(),
            });
        }
        Ok(())
    }

    pub fn finite_propagator(&self, t: f64) -> PropagatorMatrix {
        self.spectrum.finite_propagator(t)
    }

    /// `e^{itH}(x, y)`.
    pub fn kernel(&self, x: &ProductPoint, y: &ProductPoint, t: f64) -> Result<Complex64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let nu: Vec<i64> = x.n.iter().zip(&y.n).map(|(a, b)| a - b).collect();
        Ok(lattice_factor(&nu, t) * self.finite_propagator(t).get(x.p, y.p))
    }

    /// The `k x k` block of `e^{itH}` between layers `n` and `m = n - nu`.
    pub fn kernel_block(&self, nu: &[i64], t: f64) -> Result<KernelBlock> {
        self.check_offset(nu)?;
        let factor = lattice_factor(nu, t);
        let block = self.finite_propagator(t).matrix.map(|z| factor * z);
        Ok(KernelBlock {
            nu: nu.to_vec(),
            t,
            lattice_factor: factor,
            block,
        })
    }

    /// `sum_{||nu||_inf <= nu_max} sum_q |e^{itH}(nu + v_q, v_source)|^2`.
    ///
    /// Unitarity makes this 1 once `nu_max` clears the lightcone.
    pub fn row_mass(&self, source: usize, t: f64, nu_max: usize) -> Result<f64> {
        if source >= self.k() {
            return Err(Error::VertexOutOfRange {
                index: source,
                k: self.k(),
            });
        }
        let need = truncation_radius(t);
        if nu_max < need {
            return Err(Error::InsufficientResolution {
                what: "row_mass truncation radius",
                got: nu_max,
                need,
            });
        }
        let axis_mass = bessel_row(nu_max, 2.0 * t).normalization();
        let m = self.finite_propagator(t);
        let crystal_mass: f64 = (0..self.k()).map(|q| m.get(q, source).norm_sqr()).sum();
        Ok(axis_mass.powi(self.d as i32) * crystal_mass)
    }

    /// `sup_{x,y} |e^{itH}(x, y)|`, the `l^1 -> l^inf` norm of `e^{itH}`.
    ///
    /// Factorises as `(max_nu |J_nu(2t)|)^d * max_{p,q} |e^{itH_{G_F}}(p, q)|`.
    pub fn sup_norm(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("sup_norm needs t > 0, got {t}")));
        }
        Ok(self.lattice_envelope(t) * self.finite_propagator(t).max_abs())
    }

    /// `(max_nu |J_nu(2t)|)^d`, the part of the sup norm that decays.
    pub fn lattice_envelope(&self, t: f64) -> f64 {
        axis_row(t).max_abs().1.powi(self.d as i32)
    }
}

/// `J_nu(2t)` for `0 <= nu <= truncation_radius(t)`.
pub fn axis_row(t: f64) -> BesselRow {
    bessel_row(truncation_radius(t), 2.0 * t)
}

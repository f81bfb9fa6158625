//! Spectral decomposition of `H_{G_F}`, the finite propagator
//! `e^{itH_{G_F}}`, and the Floquet fiber operators `H(theta)`.
//!
//! For `Z^d □ G_F` every fiber is `H_{G_F}` shifted by the scalar
//! `sum_j 2 cos(2 pi theta_j)`, so one eigendecomposition serves all fibers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of `||H||_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    /// Column `s` is the unit eigenvector for `eigenvalues[s]`.
    eigenvectors: DMatrix<f64>,
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self
            .eigenvectors
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        let mut st = serializer.serialize_struct("Spectrum", 2)?;
        st.serialize_field("eigenvalues", &self.eigenvalues)?;
        st.serialize_field("eigenvectors", &rows)?;
        st.end()
    }
}

impl Spectrum {
    pub fn of_graph(g: &FiniteGraph) -> Result<Self> {
        eigendecompose(&g.hamiltonian_matrix())
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `Phi diag(mu) Phi^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.k(), self.k(), |p, s| {
            self.eigenvectors[(p, s)] * self.eigenvalues[s]
        });
        scaled * self.eigenvectors.transpose()
    }

    /// `e^{itH} = sum_s e^{it mu_s} phi_s phi_s^T`.
    pub fn finite_propagator(&self, t: f64) -> PropagatorMatrix {
        let k = self.k();
        if t == 0.0 {
            return PropagatorMatrix {
                time: t,
                matrix: DMatrix::identity(k, k),
            };
        }
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&mu| Complex64::from_polar(1.0, t * mu))
            .collect();
        let mut matrix = DMatrix::zeros(k, k);
        for p in 0..k {
            for q in p..k {
                let v: Complex64 = phases
                    .iter()
                    .enumerate()
                    .map(|(s, &ph)| ph * (self.eigenvectors[(p, s)] * self.eigenvectors[(q, s)]))
                    .sum();
                matrix[(p, q)] = v;
                matrix[(q, p)] = v;
            }
        }
        PropagatorMatrix { time: t, matrix }
    }

    /// `e^{itH(theta)} = e^{it sum_j 2cos(2 pi theta_j)} e^{itH_{G_F}}`.
    pub fn fiber_propagator(&self, theta: &FiberPoint, t: f64) -> PropagatorMatrix {
        let phase = Complex64::from_polar(1.0, t * theta.shift());
        let mut m = self.finite_propagator(t);
        if phase != Complex64::new(1.0, 0.0) {
            m.matrix.iter_mut().for_each(|z| *z *= phase);
        }
        m
    }

    /// Floquet band energies `E_s(theta) = sum_j 2cos(2 pi theta_j) + mu_s`.
    pub fn floquet_eigenvalues(&self, theta: &FiberPoint) -> Vec<f64> {
        let shift = theta.shift();
        self.eigenvalues.iter().map(|mu| shift + mu).collect()
    }
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
pub fn eigendecompose(h: &DMatrix<f64>) -> Result<Spectrum> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.ncols(),
        });
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let scale = h.norm();
    for p in 0..n {
        for q in (p + 1)..n {
            let gap = (h[(p, q)] - h[(q, p)]).abs();
            if gap > 1e-12 * scale.max(1.0) {
                return Err(Error::NotSymmetric { row: p, col: q, gap });
            }
        }
    }

    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = JACOBI_TOLERANCE * scale;
    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {:e})",
            off_diagonal_norm(&a)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, s| v[(r, order[s])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[(p, q)] * a[(p, q)];
            }
        }
    }
    sum.sqrt()
}

/// One plane rotation annihilating `a[(p, q)]`, accumulated into `v`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..a.nrows() {
        if r != p && r != q {
            let (arp, arq) = (a[(r, p)], a[(r, q)]);
            let new_p = c * arp - s * arq;
            let new_q = s * arp + c * arq;
            a[(r, p)] = new_p;
            a[(p, r)] = new_p;
            a[(r, q)] = new_q;
            a[(q, r)] = new_q;
        }
    }
    for r in 0..v.nrows() {
        let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// `e^{itH}` for a finite Hamiltonian, tagged with its time.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorMatrix {
    pub time: f64,
    pub matrix: DMatrix<Complex64>,
}

impl PropagatorMatrix {
    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.matrix[(p, q)]
    }

    /// `||M M^dagger - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let k = self.matrix.nrows();
        (&self.matrix * self.matrix.adjoint() - DMatrix::<Complex64>::identity(k, k)).norm()
    }

    /// `max_{p,q} |M(p, q)|`.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// `cos(2 pi x)`, exact at multiples of a quarter turn.
pub(crate) fn cos_turns(x: f64) -> f64 {
    let quarters = 4.0 * x;
    if quarters.fract() == 0.0 {
        return match (quarters as i64).rem_euclid(4) {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        };
    }
    (std::f64::consts::TAU * x).cos()
}

/// A quasimomentum `theta` in the torus `[0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint {
    theta: Vec<f64>,
}

impl FiberPoint {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidArgument("theta must have at least one component".into()));
        }
        if let Some(bad) = theta.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!("theta component {bad} is outside [0, 1)")));
        }
        Ok(FiberPoint { theta })
    }

    pub fn origin(d: usize) -> Self {
        FiberPoint { theta: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.theta
    }

    /// `sum_j 2 cos(2 pi theta_j)`.
    pub fn shift(&self) -> f64 {
        self.theta.iter().map(|&x| 2.0 * cos_turns(x)).sum()
    }
}

/// `H(theta) = (sum_j 2cos(2 pi theta_j)) Id + H_{G_F}`.
pub fn fiber_operator(g: &FiniteGraph, theta: &FiberPoint, d: usize) -> Result<DMatrix<f64>> {
    if theta.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: theta.dim(),
        });
    }
    let mut h = g.hamiltonian_matrix();
    let shift = theta.shift();
    for p in 0..g.k() {
        h[(p, p)] += shift;
    }
    Ok(h)
}

//! Strategies for `e^{itH} delta_source` on a truncated lattice.

use std::collections::BTreeMap;

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use super::TruncatedHamiltonian;
use crate::bessel::{bessel_row, i_pow};
use crate::error::{Error, Result};

/// Computes one column of the propagator of a truncated Hamiltonian.
pub trait Evolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn evolve(&self, h: &TruncatedHamiltonian, source: usize, t: f64) -> Result<Vec<Complex64>>;
}

fn check_source(h: &TruncatedHamiltonian, source: usize) -> Result<()> {
    if source >= h.size() {
        return Err(Error::VertexOutOfRange {
            index: source,
            k: h.size(),
        });
    }
    Ok(())
}

/// Chebyshev expansion
/// `e^{itH} = sum_m (2 - delta_{m0}) i^m J_m(Rt) T_m(H / R)`,
/// with `R` the Gershgorin bound so that `H / R` has spectrum in `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Chebyshev;

impl Chebyshev {
    /// Expansion degree for argument `z = R|t|`.
    pub fn degree(z: f64) -> usize {
        z.ceil() as usize + 60usize.max((15.0 * z.cbrt()).ceil() as usize + 20)
    }
}

impl Evolver for Chebyshev {
    fn name(&self) -> &'static str {
        "chebyshev"
    }

    fn evolve(&self, h: &TruncatedHamiltonian, source: usize, t: f64) -> Result<Vec<Complex64>> {
        check_source(h, source)?;
        let n = h.size();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        if t == 0.0 {
            out[source] = Complex64::new(1.0, 0.0);
            return Ok(out);
        }
        let r = h.spectral_bound();
        let z = r * t.abs();
        let degree = Self::degree(z);
        let coeffs = bessel_row(degree, z);
        let tail = coeffs.values[degree - 1].abs().max(coeffs.values[degree].abs());
        if tail > 1e-15 {
            return Err(Error::NumericalFailure(format!(
                "Chebyshev series not converged at degree {degree} (tail {tail:e})"
            )));
        }

        // T_0 delta and T_1 delta; the source vector is real, so the
        // recurrence runs in real arithmetic.
        let mut prev = vec![0.0; n];
        prev[source] = 1.0;
        let mut cur = h.matvec(&prev);
        cur.iter_mut().for_each(|v| *v /= r);
        out[source] += coeffs.values[0];
        let c1 = i_pow(1) * (2.0 * coeffs.values[1]);
        for (o, &v) in out.iter_mut().zip(&cur) {
            *o += c1 * v;
        }
        let mut next = vec![0.0; n];
        for m in 2..=degree {
            h.matvec_into(&cur, &mut next);
            for (nx, &pv) in next.iter_mut().zip(&prev) {
                *nx = 2.0 * *nx / r - pv;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            let cm = i_pow(m as i64) * (2.0 * coeffs.values[m]);
            if cm.re == 0.0 {
                for (o, &v) in out.iter_mut().zip(&cur) {
                    o.im += cm.im * v;
                }
            } else {
                for (o, &v) in out.iter_mut().zip(&cur) {
                    o.re += cm.re * v;
                }
            }
        }
        // e^{-i|t|H} delta is the conjugate of e^{i|t|H} delta for real H.
        if t < 0.0 {
            out.iter_mut().for_each(|z| *z = z.conj());
        }
        Ok(out)
    }
}

/// Largest box the dense path accepts.
pub const DENSE_LIMIT: usize = 2000;

/// Full diagonalisation of the truncated Hamiltonian (nalgebra's symmetric
/// QR), independent of both the Chebyshev path and the crate's own Jacobi.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSpectral;

impl Evolver for DenseSpectral {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn evolve(&self, h: &TruncatedHamiltonian, source: usize, t: f64) -> Result<Vec<Complex64>> {
        check_source(h, source)?;
        if h.size() > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense evolution supports at most {DENSE_LIMIT} sites, box has {}",
                h.size()
            )));
        }
        let eig = SymmetricEigen::try_new(h.to_dense(), f64::EPSILON, 0)
            .ok_or_else(|| Error::NumericalFailure("dense eigensolver did not converge".into()))?;
        let n = h.size();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (s, &lambda) in eig.eigenvalues.iter().enumerate() {
            let weight = Complex64::from_polar(eig.eigenvectors[(source, s)], t * lambda);
            for (r, o) in out.iter_mut().enumerate() {
                *o += weight * eig.eigenvectors[(r, s)];
            }
        }
        Ok(out)
    }
}

/// Evolution strategies addressable by name.
pub struct EvolverRegistry {
    evolvers: BTreeMap<&'static str, Box<dyn Evolver>>,
}

impl EvolverRegistry {
    pub fn empty() -> Self {
        EvolverRegistry {
            evolvers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, evolver: Box<dyn Evolver>) {
        self.evolvers.insert(evolver.name(), evolver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Evolver> {
        self.evolvers
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownEvolver(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.evolvers.keys().copied()
    }
}

impl Default for EvolverRegistry {
    fn default() -> Self {
        let mut r = EvolverRegistry::empty();
        r.register(Box::new(Chebyshev));
        r.register(Box::new(DenseSpectral));
        r
    }
}

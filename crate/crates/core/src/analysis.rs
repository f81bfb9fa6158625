//! Dispersion scans, decay-exponent fits, the finite-graph recurrence check
//! and lightcone radii.

use rayon::prelude::*;

use crate::bessel::bessel_row;
use crate::error::{Error, Result};
use crate::kernel::{dispersion_envelope_constant, ProductGraph};
use crate::spectral::Spectrum;

/// Slack on `sup_norm(t) t^{d/3} <= (c 2^{-1/3})^d`.
pub const DISPERSION_SLACK: f64 = 1e-6;

/// Lower end of the asymptotic fitting window.
pub const DEFAULT_FIT_T_MIN: f64 = 10.0;

pub const MIN_FIT_POINTS: usize = 8;

/// `n` points from `a` to `b` inclusive, evenly spaced in `log t`.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Log-spaced grid on `[a, b]` with `per_decade` points per factor of ten.
pub fn log_grid_per_decade(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let decades = (b / a).log10();
    let n = (decades * per_decade as f64).round() as usize + 1;
    log_spaced(a, b, n.max(2))
}

/// A positive series sampled at strictly increasing positive times.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    points: Vec<(f64, f64)>,
}

impl DecaySeries {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidArgument(format!(
                    "times must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(t, v)) = points.iter().find(|&&(t, v)| !(t > 0.0) || !(v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "series entries must be positive, got ({t}, {v})"
            )));
        }
        Ok(DecaySeries { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sup_{s >= t} value(s)`: the smallest non-increasing majorant, which
    /// strips the oscillation of a decaying series.
    pub fn upper_envelope(&self) -> DecaySeries {
        let mut running = 0.0f64;
        let mut pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .rev()
            .map(|&(t, v)| {
                running = running.max(v);
                (t, running)
            })
            .collect();
        pts.reverse();
        DecaySeries { points: pts }
    }
}

/// Least-squares power law `value ~ e^{log_intercept} t^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_intercept: f64,
    /// Largest `|log value - fitted|` over the fitted points.
    pub max_residual: f64,
    pub points: usize,
}

/// Fits `log value = a + b log t` on the points with `t >= t_min`.
pub fn fit_decay_exponent(series: &DecaySeries, t_min: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .points()
        .iter()
        .filter(|(t, _)| *t >= t_min)
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientResolution {
            what: "points with t >= t_min",
            got: pts.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let log_intercept = my - exponent * mx;
    let max_residual = pts
        .iter()
        .map(|&(x, y)| (y - log_intercept - exponent * x).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        exponent,
        log_intercept,
        max_residual,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScanPoint {
    pub t: f64,
    pub sup_norm: f64,
    /// `(max_nu |J_nu(2t)|)^d`.
    pub envelope: f64,
    /// `(c 2^{-1/3})^d t^{-d/3}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionScan {
    pub d: usize,
    pub points: Vec<ScanPoint>,
}

impl DispersionScan {
    pub fn sup_series(&self) -> Result<DecaySeries> {
        DecaySeries::new(self.points.iter().map(|p| (p.t, p.sup_norm)).collect())
    }

    pub fn envelope_series(&self) -> Result<DecaySeries> {
        DecaySeries::new(self.points.iter().map(|p| (p.t, p.envelope)).collect())
    }

    /// `max sup_norm(t) t^{d/3}` over the scan.
    pub fn max_scaled_sup(&self) -> f64 {
        let d = self.d as f64;
        self.points
            .iter()
            .map(|p| p.sup_norm * p.t.powf(d / 3.0))
            .fold(0.0, f64::max)
    }

    /// `max envelope(t) t^{d/3}` over `t >= t_min`; stays bounded away from
    /// zero exactly when `t^{-d/3}` is the true decay rate.
    pub fn limsup_indicator(&self, t_min: f64) -> f64 {
        let d = self.d as f64;
        self.points
            .iter()
            .filter(|p| p.t >= t_min)
            .map(|p| p.envelope * p.t.powf(d / 3.0))
            .fold(0.0, f64::max)
    }
}

/// `sup_norm` along `t_grid`, checking the dispersive bound at every point.
pub fn dispersion_scan(pg: &ProductGraph, t_grid: &[f64]) -> Result<DispersionScan> {
    let d = pg.d();
    let constant = dispersion_envelope_constant(d);
    let points = t_grid
        .par_iter()
        .map(|&t| {
            let sup_norm = pg.sup_norm(t)?;
            let envelope = pg.lattice_envelope(t);
            let decay = t.powf(-(d as f64) / 3.0);
            Ok(ScanPoint {
                t,
                sup_norm,
                envelope,
                bound: constant * decay,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for p in &points {
        let scaled = p.sup_norm * p.t.powf(d as f64 / 3.0);
        if scaled > constant + DISPERSION_SLACK {
            return Err(Error::BoundViolation {
                t: p.t,
                value: scaled,
                bound: constant + DISPERSION_SLACK,
                detail: format!("sup_norm(t) t^({d}/3)"),
            });
        }
    }
    Ok(DispersionScan { d, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoDispersionReport {
    pub source: usize,
    /// `k^{-1/2}`.
    pub lower_bound: f64,
    pub min_sup: f64,
    pub t_at_min_sup: f64,
    /// Largest `|psi_t(source)|` over grid points with `t > 0`.
    pub max_return: f64,
    pub t_at_max_return: f64,
}

/// Checks `||e^{itH_{G_F}} delta_source||_inf >= k^{-1/2}` on `t_grid`: the
/// mass of a unit vector on `k` sites cannot spread thinner than that.
pub fn finite_no_dispersion(spectrum: &Spectrum, source: usize, t_grid: &[f64]) -> Result<NoDispersionReport> {
    let k = spectrum.k();
    if source >= k {
        return Err(Error::VertexOutOfRange { index: source, k });
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let lower_bound = 1.0 / (k as f64).sqrt();
    let mut report = NoDispersionReport {
        source,
        lower_bound,
        min_sup: f64::INFINITY,
        t_at_min_sup: f64::NAN,
        max_return: 0.0,
        t_at_max_return: f64::NAN,
    };
    for &t in t_grid {
        let m = spectrum.finite_propagator(t);
        let sup = (0..k).map(|p| m.get(p, source).norm()).fold(0.0, f64::max);
        if sup < lower_bound {
            return Err(Error::BoundViolation {
                t,
                value: sup,
                bound: lower_bound,
                detail: "||psi_t||_inf fell below k^(-1/2)".into(),
            });
        }
        if sup < report.min_sup {
            report.min_sup = sup;
            report.t_at_min_sup = t;
        }
        let ret = m.get(source, source).norm();
        if t > 0.0 && ret > report.max_return {
            report.max_return = ret;
            report.t_at_max_return = t;
        }
    }
    Ok(report)
}

/// Smallest `R` such that every kernel entry with `||nu||_inf > R` has
/// modulus below `epsilon`.
pub fn lightcone_profile(pg: &ProductGraph, t: f64, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let z = 2.0 * t.abs();
    let nu_max = z.ceil() as usize + (15.0 * z.cbrt()).ceil() as usize + 60;
    let row = bessel_row(nu_max, z);
    let crystal = pg.finite_propagator(t).max_abs();
    let d = pg.d() as i32;
    let mut prefix_max = 0.0f64;
    let mut radius = 0;
    for (r, v) in row.values.iter().enumerate() {
        prefix_max = prefix_max.max(v.abs());
        // Largest entry on the shell ||nu||_inf = r.
        let shell = v.abs() * prefix_max.powi(d - 1) * crystal;
        if r > 0 && shell >= epsilon {
            radius = r;
        }
    }
    Ok(radius)
}

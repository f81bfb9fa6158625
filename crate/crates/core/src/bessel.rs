//! Integer-order Bessel functions of the first kind.
//!
//! Values come from Miller's normalized downward recurrence, which is stable
//! for every order (upward recurrence loses all accuracy once `nu > t`).
//! Small arguments use the power series directly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sharp constant in `|J_nu(t)| <= c t^{-1/3}`, rounded up in the fifth digit.
///
/// The true value is 0.785746870..., attained by `J_0` near `t = 0.78`.
pub const LANDAU_CONSTANT: f64 = 0.78575;

/// Below this argument the power series is used instead of the recurrence.
const SERIES_CUTOFF: f64 = 0.5;

const RESCALE_ABOVE: f64 = 1e250;

/// `i^n`, exactly, from `n mod 4`.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J_nu(t)` for any integer order.
///
/// Negative orders and negative arguments are reduced with
/// `J_{-nu}(t) = (-1)^nu J_nu(t) = J_nu(-t)`.
pub fn bessel_j(nu: i64, t: f64) -> f64 {
    let order = nu.unsigned_abs() as usize;
    let value = bessel_row(order, t).values[order];
    if nu < 0 {
        parity_sign(nu) * value
    } else {
        value
    }
}

/// `J_0(t), ..., J_{nu_max}(t)` evaluated together.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    pub t: f64,
    pub values: Vec<f64>,
}

impl BesselRow {
    pub fn nu_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_nu(t)` for `|nu| <= nu_max`.
    pub fn get(&self, nu: i64) -> f64 {
        let v = self.values[nu.unsigned_abs() as usize];
        if nu < 0 {
            parity_sign(nu) * v
        } else {
            v
        }
    }

    /// `J_0^2 + 2 sum_{nu >= 1} J_nu^2`, which is 1 once the row covers the
    /// turning point `nu ~ t` with some margin.
    pub fn normalization(&self) -> f64 {
        self.values[0].powi(2) + 2.0 * self.values[1..].iter().map(|v| v * v).sum::<f64>()
    }

    /// `max_nu |J_nu(t)|` over the row and the order where it is attained.
    pub fn max_abs(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bn, bv), (n, v)| if v.abs() > bv { (n, v.abs()) } else { (bn, bv) })
    }
}

/// Computes `J_nu(t)` for `nu = 0..=nu_max`.
pub fn bessel_row(nu_max: usize, t: f64) -> BesselRow {
    let mut values = if t == 0.0 {
        let mut v = vec![0.0; nu_max + 1];
        v[0] = 1.0;
        v
    } else if t.abs() < SERIES_CUTOFF {
        (0..=nu_max).map(|n| series(n, t.abs())).collect()
    } else {
        miller(nu_max, t.abs())
    };
    if t < 0.0 {
        for (n, v) in values.iter_mut().enumerate().skip(1).step_by(2) {
            debug_assert!(n % 2 == 1);
            *v = -*v;
        }
    }
    BesselRow { t, values }
}

/// Power series `sum_m (-1)^m (t/2)^{2m+nu} / (m! (m+nu)!)`.
fn series(nu: usize, t: f64) -> f64 {
    let half = 0.5 * t;
    let mut term = 1.0;
    for j in 1..=nu {
        term *= half / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    for m in 1..60 {
        term *= q / (m as f64 * (m + nu) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Start order for the downward recurrence; far enough above both the
/// requested orders and the turning point `nu ~ t`.
///
/// Past the turning point `J_nu` decays on the Airy scale `t^{1/3}`; about
/// ten of those widths are needed before the truncation error drops below
/// 1e-14, so the margin grows like `15 t^{1/3}`.
fn miller_start(nu_max: usize, t: f64) -> usize {
    let airy = (15.0 * t.cbrt()).ceil() as usize + 20;
    let margin = airy.max((1.5 * t.sqrt()).ceil() as usize + 20);
    let start = nu_max.max(t.ceil() as usize) + margin;
    start + start % 2
}

fn miller(nu_max: usize, t: f64) -> Vec<f64> {
    let start = miller_start(nu_max, t);
    let mut values = vec![0.0; nu_max + 1];
    let two_over_t = 2.0 / t;

    // f_{n+1}, f_n
    let mut above = 0.0_f64;
    let mut current = 1e-30_f64;
    let mut even_sum = 0.0_f64;
    for n in (0..=start).rev() {
        if n <= nu_max {
            values[n] = current;
        }
        if n % 2 == 0 {
            even_sum += if n == 0 { current } else { 2.0 * current };
        }
        if n == 0 {
            break;
        }
        let below = n as f64 * two_over_t * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            even_sum *= s;
            for v in values.iter_mut().skip(n.saturating_sub(1)) {
                *v *= s;
            }
        }
    }
    let norm = 1.0 / even_sum;
    values.iter_mut().for_each(|v| *v *= norm);
    values
}

/// `int_0^1 e^{2 pi i nu x} e^{i t cos(2 pi x)} dx` by the uniform trapezoid
/// rule, which for this periodic integrand converges exponentially and
/// should reproduce `i^nu J_nu(t)`.
pub fn bessel_integral_oracle(nu: i64, t: f64, nodes: usize) -> Result<Complex64> {
    let need = 2 * (nu.unsigned_abs() as usize + t.abs().ceil() as usize) + 16;
    if nodes < need {
        return Err(Error::InsufficientResolution {
            what: "quadrature nodes",
            got: nodes,
            need,
        });
    }
    let n = nodes as i64;
    let step = std::f64::consts::TAU / nodes as f64;
    let sum: Complex64 = (0..n)
        .map(|j| {
            let fourier = (nu * j).rem_euclid(n) as f64 * step;
            let x = j as f64 * step;
            Complex64::from_polar(1.0, fourier + t * x.cos())
        })
        .sum();
    Ok(sum / nodes as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauSample {
    pub t: f64,
    /// Order attaining the row maximum.
    pub nu: usize,
    pub max_abs: f64,
    /// `max_abs * t^{1/3}`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauReport {
    pub samples: Vec<LandauSample>,
    /// Number of grid entries with `t <= 0`, which the check does not cover.
    pub skipped: usize,
}

impl LandauReport {
    /// Largest `max_nu |J_nu(t)| t^{1/3}` seen; approaches the Landau constant
    /// from below.
    pub fn max_scaled(&self) -> Option<LandauSample> {
        self.samples
            .iter()
            .copied()
            .max_by(|a, b| a.scaled.total_cmp(&b.scaled))
    }
}

/// Checks `max_{0 <= nu <= ceil(t)+40} |J_nu(t)| t^{1/3} <= LANDAU_CONSTANT`
/// on every positive grid point.
pub fn landau_envelope_check(t_grid: &[f64]) -> Result<LandauReport> {
    let positive: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 0.0).collect();
    let samples: Vec<LandauSample> = positive
        .par_iter()
        .map(|&t| {
            let row = bessel_row(t.ceil() as usize + 40, t);
            let (nu, max_abs) = row.max_abs();
            LandauSample {
                t,
                nu,
                max_abs,
                scaled: max_abs * t.cbrt(),
            }
        })
        .collect();
    if let Some(bad) = samples.iter().find(|s| s.scaled > LANDAU_CONSTANT) {
        return Err(Error::BoundViolation {
            t: bad.t,
            value: bad.scaled,
            bound: LANDAU_CONSTANT,
            detail: format!("|J_{}(t)| t^(1/3)", bad.nu),
        });
    }
    Ok(LandauReport {
        samples,
        skipped: t_grid.len() - positive.len(),
    })
}

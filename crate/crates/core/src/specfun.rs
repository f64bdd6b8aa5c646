//! Bessel functions J0, Y0 and the Hankel function H0 = J0 + jY0 for real
//! positive arguments.
//!
//! Below [`SERIES_LIMIT`] both functions are summed from their ascending
//! series; above it the Hankel asymptotic expansion is truncated at its
//! smallest term. Absolute error is below 1e-10 on the supported range.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4};

use num_complex::Complex64;
use thiserror::Error;

pub type HankelValue = Complex64;

/// Largest accepted argument.
pub const MAX_ARGUMENT: f64 = 5000.0;

/// Switch point between the ascending series and the asymptotic expansion.
/// The series loses ~I0(x)*eps to cancellation (3e-11 at 14); the asymptotic
/// remainder is ~exp(-2x) (7e-13 at 14).
const SERIES_LIMIT: f64 = 14.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {0} outside the domain (must be > 0)")]
    Domain(f64),
    #[error("argument {0} exceeds the supported range (<= {MAX_ARGUMENT})")]
    Range(f64),
}

fn check_range(x: f64) -> Result<(), SpecFunError> {
    if x.is_nan() {
        return Err(SpecFunError::Domain(x));
    }
    if x > MAX_ARGUMENT {
        return Err(SpecFunError::Range(x));
    }
    Ok(())
}

/// Returns (J0(x), sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2).
fn ascending_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        tail -= harmonic * term;
        if term.abs() < 1e-22 && kf > q.sqrt() {
            break;
        }
    }
    (j0, tail)
}

/// Hankel asymptotic factors P0(x), Q0(x).
fn asymptotic_pq(x: f64) -> (f64, f64) {
    // b_k = prod_{j<=k} (2j-1)^2 / (k! 8^k x^k), alternating into P (even k) and Q (odd k).
    let mut p = 1.0;
    let mut q = 0.0;
    let mut b = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200usize {
        let kf = k as f64;
        let next = b * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        if next >= last || next < 1e-17 {
            break;
        }
        last = next;
        b = next;
        // P = sum (-1)^m b_{2m}, Q = -sum (-1)^m b_{2m+1}
        let m = k / 2;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * b;
        } else {
            q -= sign * b;
        }
    }
    (p, q)
}

fn asymptotic(x: f64) -> (f64, f64) {
    let (p, q) = asymptotic_pq(x);
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = (x - FRAC_PI_4).sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// J0(x) for `0 <= x <= MAX_ARGUMENT` (negative input is reflected; J0 is even).
pub fn bessel_j0(x: f64) -> Result<f64, SpecFunError> {
    check_range(x)?;
    let x = x.abs();
    if x < SERIES_LIMIT {
        Ok(ascending_series(x).0)
    } else {
        Ok(asymptotic(x).0)
    }
}

/// Y0(x) for `0 < x <= MAX_ARGUMENT`.
pub fn bessel_y0(x: f64) -> Result<f64, SpecFunError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecFunError::Domain(x));
    }
    check_range(x)?;
    Ok(y0_unchecked(x))
}

fn y0_unchecked(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        let (j0, tail) = ascending_series(x);
        FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 + tail)
    } else {
        asymptotic(x).1
    }
}

/// H0(x) = J0(x) + j Y0(x) for `0 < x <= MAX_ARGUMENT`.
pub fn hankel0(x: f64) -> Result<HankelValue, SpecFunError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecFunError::Domain(x));
    }
    check_range(x)?;
    if x < SERIES_LIMIT {
        let (j0, tail) = ascending_series(x);
        let y0 = FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 + tail);
        Ok(Complex64::new(j0, y0))
    } else {
        let (j0, y0) = asymptotic(x);
        Ok(Complex64::new(j0, y0))
    }
}

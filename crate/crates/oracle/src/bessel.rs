//! Fixture generators for J0 and Y0.
//!
//! Two independent routes:
//! * the ascending power series summed in double-double (accurate to ~1e-12
//!   absolute up to x = 40, where the largest term is ~1e16),
//! * integral representations evaluated by quadrature (valid for all x > 0):
//!   J0(x) = (1/pi) int_0^pi cos(x sin t) dt,
//!   Y0(x) = (1/pi) int_0^pi sin(x sin t) dt - (2/pi) int_0^inf exp(-x sinh t) dt.

use std::f64::consts::PI;

use crate::dd::Dd;

use crate::quad::integrate;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper end of the range where the double-double series is trusted.
pub const SERIES_MAX_X: f64 = 40.0;

fn series_terms(x: f64) -> (Dd, Dd) {
    // term_k = (-1)^k (x^2/4)^k / (k!)^2
    let q = Dd::from(x) * Dd::from(x) / Dd::from(4.0);
    let mut term = Dd::from(1.0);
    let mut j0 = Dd::from(1.0);
    let mut harmonic = Dd::from(0.0);
    let mut y_sum = Dd::from(0.0);
    for k in 1..=200 {
        let kf = Dd::from(k as f64);
        term = -term * q / (kf * kf);
        harmonic = harmonic + Dd::from(1.0) / kf;
        j0 = j0 + term;
        // (-1)^{k+1} H_k (x^2/4)^k/(k!)^2 = -H_k * term_k
        y_sum = y_sum - harmonic * term;
        if term.hi.abs() < 1e-40 && k > 8 {
            break;
        }
    }
    (j0, y_sum)
}

/// J0 from the ascending series in double-double.
pub fn j0_series(x: f64) -> f64 {
    let (j0, _) = series_terms(x);
    j0.to_f64()
}

/// Y0 from the ascending series in double-double; `x > 0`.
pub fn y0_series(x: f64) -> f64 {
    assert!(x > 0.0);
    let (j0, y_sum) = series_terms(x);
    let log_part = Dd::from((x / 2.0).ln() + EULER_GAMMA) * j0;
    let v = (log_part + y_sum) * Dd::from(2.0 / PI);
    v.to_f64()
}

/// J0 by the trapezoid rule on the periodic integrand; exact up to the
/// aliased tail 2 J_{2M}(x), negligible for M > x + 40.
pub fn j0_quadrature(x: f64) -> f64 {
    let m = x.ceil() as usize + 64;
    let mut s = 0.0;
    for k in 0..m {
        let t = PI * k as f64 / m as f64;
        s += (x * t.sin()).cos();
    }
    s / m as f64
}

/// Y0 from its integral representation by composite Gauss-Legendre.
pub fn y0_quadrature(x: f64) -> f64 {
    assert!(x > 0.0);
    let panels = 2 * x.ceil() as usize + 40;
    // integrand symmetric about pi/2
    let oscillatory = 2.0 * integrate(|t| (x * t.sin()).sin(), 0.0, PI / 2.0, panels);
    let upper = (60.0 / x).asinh();
    let decaying = integrate(|t| (-x * t.sinh()).exp(), 0.0, upper, 400);
    oscillatory / PI - 2.0 / PI * decaying
}

/// Best available reference: series below [`SERIES_MAX_X`] / 2, quadrature above.
pub fn j0_reference(x: f64) -> f64 {
    if x <= SERIES_MAX_X / 2.0 {
        j0_series(x)
    } else {
        j0_quadrature(x)
    }
}

pub fn y0_reference(x: f64) -> f64 {
    if x <= SERIES_MAX_X / 2.0 {
        y0_series(x)
    } else {
        y0_quadrature(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        // Abramowitz & Stegun table 9.1
        assert!((j0_series(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((y0_series(1.0) - 0.088_256_964_215_676_96).abs() < 1e-15);
        assert!((j0_series(10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-14);
        assert!((y0_series(10.0) - 0.055_671_167_283_599_39).abs() < 1e-14);
    }

    #[test]
    fn series_and_quadrature_agree_on_overlap() {
        let mut x = 0.05;
        while x <= SERIES_MAX_X {
            assert!((j0_series(x) - j0_quadrature(x)).abs() < 1e-11, "j0 at {x}");
            assert!((y0_series(x) - y0_quadrature(x)).abs() < 1e-11, "y0 at {x}");
            x *= 1.07;
        }
    }
}

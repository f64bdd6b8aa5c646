//! Reference implementations used only to generate and check test fixtures.
//!
//! Nothing here shares code with the `sfdort` library. The Bessel oracles sum
//! the defining power series in double-double arithmetic or evaluate integral
//! representations by quadrature; the singular-value oracle diagonalizes the
//! Gram matrix with a two-sided Jacobi iteration carried out in double-double.

pub mod bessel;
pub mod dd;
pub mod quad;
pub mod svd;

/// Bisection on a continuous function with a sign change on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

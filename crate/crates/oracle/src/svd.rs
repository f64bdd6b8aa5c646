//! Singular values via a two-sided Jacobi eigen-iteration on A^H A in double-double.

use crate::dd::Dd;

#[derive(Clone, Copy, Debug)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn zero() -> Self {
        Cdd { re: Dd::from(0.0), im: Dd::from(0.0) }
    }
    fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }
    fn conj(self) -> Self {
        Cdd { re: self.re, im: -self.im }
    }
    fn add(self, o: Self) -> Self {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }
    fn mul(self, o: Self) -> Self {
        Cdd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn scale(self, s: Dd) -> Self {
        Cdd { re: self.re * s, im: self.im * s }
    }
    fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }
}

/// Singular values (descending) of the `rows x cols` row-major complex matrix.
///
/// Panics if the Jacobi iteration fails to reach double-double tolerance in
/// 100 sweeps, which for the small matrices used in tests does not happen.
pub fn singular_values(rows: usize, cols: usize, data: &[(f64, f64)]) -> Vec<f64> {
    assert_eq!(data.len(), rows * cols);
    let n = cols;
    let at = |i: usize, j: usize| {
        let (re, im) = data[i * cols + j];
        Cdd::new(Dd::from(re), Dd::from(im))
    };
    // Gram matrix H = A^H A
    let mut h = vec![Cdd::zero(); n * n];
    for p in 0..n {
        for q in 0..n {
            let mut s = Cdd::zero();
            for k in 0..rows {
                s = s.add(at(k, p).conj().mul(at(k, q)));
            }
            h[p * n + q] = s;
        }
    }

    let frob: Dd = h.iter().fold(Dd::from(0.0), |acc, z| acc + z.norm_sqr());
    let tol = frob * Dd::from(1e-62);
    let one = Dd::from(1.0);
    let mut converged = false;
    for _sweep in 0..100 {
        let mut off = Dd::from(0.0);
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off = off + h[p * n + q].norm_sqr();
                }
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = h[p * n + q];
                let mag = apq.norm_sqr().sqrt();
                if mag.hi == 0.0 {
                    continue;
                }
                let app = h[p * n + p].re;
                let aqq = h[q * n + q].re;
                let tau = (aqq - app) / (Dd::from(2.0) * mag);
                let t = if tau.hi >= 0.0 {
                    one / (tau + (one + tau * tau).sqrt())
                } else {
                    -one / (-tau + (one + tau * tau).sqrt())
                };
                let c = one / (one + t * t).sqrt();
                let s = c * t;
                // phase e^{-i phi} with apq = |apq| e^{i phi}
                let e = Cdd::new(apq.re / mag, -(apq.im / mag));
                let j11 = Cdd::new(c, Dd::from(0.0));
                let j12 = Cdd::new(s, Dd::from(0.0));
                let j21 = e.scale(-s);
                let j22 = e.scale(c);
                for k in 0..n {
                    let hkp = h[k * n + p];
                    let hkq = h[k * n + q];
                    h[k * n + p] = hkp.mul(j11).add(hkq.mul(j21));
                    h[k * n + q] = hkp.mul(j12).add(hkq.mul(j22));
                }
                for k in 0..n {
                    let hpk = h[p * n + k];
                    let hqk = h[q * n + k];
                    h[p * n + k] = j11.conj().mul(hpk).add(j21.conj().mul(hqk));
                    h[q * n + k] = j12.conj().mul(hpk).add(j22.conj().mul(hqk));
                }
            }
        }
    }
    assert!(converged, "double-double Jacobi did not converge");
    let mut sv: Vec<f64> = (0..n)
        .map(|i| {
            let lam = h[i * n + i].re;
            if lam.hi <= 0.0 {
                0.0
            } else {
                let s = lam.sqrt();
                s.to_f64()
            }
        })
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv.truncate(rows.min(cols));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let d = [(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 4.0)];
        let s = singular_values(2, 2, &d);
        assert!((s[0] - 4.0).abs() < 1e-15 && (s[1] - 3.0).abs() < 1e-15);
        // u v^H with |u| = sqrt(2), |v| = sqrt(5)
        let u = [(1.0, 0.0), (0.0, 1.0)];
        let v = [(1.0, 0.0), (2.0, 0.0)];
        let m: Vec<(f64, f64)> = u
            .iter()
            .flat_map(|a| v.iter().map(move |b| (a.0 * b.0, a.1 * b.0)))
            .collect();
        let s = singular_values(2, 2, &m);
        assert!((s[0] - 10f64.sqrt()).abs() < 1e-15);
        assert!(s[1].abs() < 1e-15);
    }
}

//! One-sided (Hestenes) Jacobi SVD for small dense complex matrices.

use ndarray::{Array2, Axis};
use num_complex::Complex64;

use super::SubspaceError;

const MAX_SWEEPS: usize = 100;

/// Thin SVD A = U diag(sigma) V^H with square unitary U (m x m when m == n).
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// Left singular vectors as columns.
    pub u: Array2<Complex64>,
    /// Right singular vectors as columns.
    pub v: Array2<Complex64>,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
}

impl SvdResult {
    pub fn rank_count(&self) -> usize {
        self.sigma.len()
    }

    /// U diag(sigma) V^H.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let k = self.sigma.len();
        let mut us = self.u.slice(ndarray::s![.., ..k]).to_owned();
        for (mut col, &s) in us.axis_iter_mut(Axis(1)).zip(&self.sigma) {
            col.mapv_inplace(|z| z * s);
        }
        let vh = self.v.slice(ndarray::s![.., ..k]).t().mapv(|z| z.conj());
        us.dot(&vh)
    }

    /// Debug dump: singular values, then each vector pair by component.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,sigma")?;
        for (i, s) in self.sigma.iter().enumerate() {
            writeln!(w, "{},{:e}", i + 1, s)?;
        }
        writeln!(w, "i,k,u_re,u_im,v_re,v_im")?;
        let rows = self.u.nrows().max(self.v.nrows());
        for i in 0..self.sigma.len() {
            for k in 0..rows {
                let u = self.u.get((k, i)).copied();
                let v = self.v.get((k, i)).copied();
                let fmt = |z: Option<Complex64>| match z {
                    Some(z) => format!("{:e},{:e}", z.re, z.im),
                    None => ",".to_string(),
                };
                writeln!(w, "{},{},{},{}", i + 1, k + 1, fmt(u), fmt(v))?;
            }
        }
        Ok(())
    }
}

/// SVD of an arbitrary finite complex matrix.
pub fn svd_matrix(a: &Array2<Complex64>) -> Result<SvdResult, SubspaceError> {
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(SubspaceError::NonFinite);
    }
    if a.nrows() < a.ncols() {
        let ah = a.t().mapv(|z| z.conj());
        let r = jacobi(ah)?;
        return Ok(SvdResult { u: r.v, v: r.u, sigma: r.sigma });
    }
    jacobi(a.clone())
}

/// Requires m >= n.
fn jacobi(mut w: Array2<Complex64>) -> Result<SvdResult, SubspaceError> {
    let (m, n) = w.dim();
    let mut v = Array2::<Complex64>::eye(n);
    let tol = (m as f64).sqrt() * f64::EPSILON;

    let mut converged = n < 2;
    let mut sweeps = 0;
    let mut worst = 0.0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        worst = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = w.column(p);
                    let cq = w.column(q);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for k in 0..m {
                        alpha += cp[k].norm_sqr();
                        beta += cq[k].norm_sqr();
                        gamma += cp[k].conj() * cq[k];
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 {
                    continue;
                }
                let rel = g / (alpha * beta).sqrt();
                worst = worst.max(rel);
                if rel <= tol {
                    continue;
                }
                converged = false;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
    }
    if !converged {
        let norms: Vec<f64> = w.axis_iter(Axis(1)).map(column_norm).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(SubspaceError::NonConvergence {
            sweeps,
            off_diagonal: worst,
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
        });
    }

    let mut sigma: Vec<f64> = w.axis_iter(Axis(1)).map(column_norm).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    sigma = order.iter().map(|&i| sigma[i]).collect();

    let smax = sigma.first().copied().unwrap_or(0.0);
    let mut u = Array2::<Complex64>::zeros((m, m));
    let mut vs = Array2::<Complex64>::zeros((n, n));
    let mut filled = vec![false; m];
    for (dst, &src) in order.iter().enumerate() {
        vs.column_mut(dst).assign(&v.column(src));
        let s = sigma[dst];
        if s > 0.0 && s > smax * 1e-150 {
            let col = w.column(src).mapv(|z| z / s);
            u.column_mut(dst).assign(&col);
            filled[dst] = true;
        }
    }
    complete_basis(&mut u, &mut filled);

    // Largest-magnitude component of each u_i made real-positive.
    for i in 0..n {
        let col = u.column(i);
        let mut best = 0;
        for k in 1..m {
            if col[k].norm() > col[best].norm() {
                best = k;
            }
        }
        let z = col[best];
        if z.norm() > 0.0 {
            let ph = z.conj() / z.norm();
            u.column_mut(i).mapv_inplace(|x| x * ph);
            vs.column_mut(i).mapv_inplace(|x| x * ph);
        }
    }
    Ok(SvdResult { u, v: vs, sigma })
}

fn column_norm(c: ndarray::ArrayView1<Complex64>) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Columns p, q <- (c x_p - s e^{-j phi} x_q, s e^{j phi} x_p + c x_q), with
/// `phase` = e^{j phi}.
fn rotate(a: &mut Array2<Complex64>, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for k in 0..a.nrows() {
        let xp = a[(k, p)];
        let xq = a[(k, q)];
        a[(k, p)] = xp * c - phase.conj() * xq * s;
        a[(k, q)] = phase * xp * s + xq * c;
    }
}

/// Fills unset columns with unit vectors orthogonal to the set ones. Each is
/// the standard basis vector with the largest residual after two passes of
/// Gram-Schmidt against the columns already set.
fn complete_basis(u: &mut Array2<Complex64>, filled: &mut [bool]) {
    let m = u.nrows();
    for col in 0..m {
        if filled[col] {
            continue;
        }
        let mut best: Option<(f64, ndarray::Array1<Complex64>)> = None;
        for candidate in 0..m {
            let mut x = ndarray::Array1::<Complex64>::zeros(m);
            x[candidate] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for j in (0..m).filter(|&j| filled[j]) {
                    let uj = u.column(j);
                    let proj: Complex64 = uj.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
                    x.zip_mut_with(&uj, |xi, &ui| *xi -= proj * ui);
                }
            }
            let norm = column_norm(x.view());
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, x));
            }
        }
        let (norm, x) = best.expect("m >= 1");
        u.column_mut(col).assign(&x.mapv(|z| z / norm));
        filled[col] = true;
    }
}

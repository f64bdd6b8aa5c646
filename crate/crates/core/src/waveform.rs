//! Stepped-frequency sampling grid and the transmitted monocycle spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveformError {
    #[error("N = {n_total} must equal L^2 = {} for L = {l_split}", l_split * l_split)]
    NotSquare { n_total: usize, l_split: usize },
    #[error("L must be at least 2 (got {0})")]
    SplitTooSmall(usize),
    #[error("frequency step must be positive and finite (got {0} rad/s)")]
    InvalidStep(f64),
    #[error("first sample frequency omega0 + delta_omega = {0} rad/s is not positive")]
    NonPositiveFrequency(f64),
    #[error("frequency index {index} outside 1..={n_total}")]
    IndexOutOfRange { index: usize, n_total: usize },
    #[error("pulse center frequency must be positive and finite (got {0} Hz)")]
    InvalidCenterFrequency(f64),
}

/// Sample frequencies omega_n = omega0 + n * delta_omega for n = 1..=N, N = L^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    omega0: f64,
    delta_omega: f64,
    n_total: usize,
    n_coarse_split: usize,
}

impl FrequencyGrid {
    pub fn new(
        omega0: f64,
        delta_omega: f64,
        n_total: usize,
        n_coarse_split: usize,
    ) -> Result<Self, WaveformError> {
        if n_coarse_split < 2 {
            return Err(WaveformError::SplitTooSmall(n_coarse_split));
        }
        if n_coarse_split.checked_mul(n_coarse_split) != Some(n_total) {
            return Err(WaveformError::NotSquare { n_total, l_split: n_coarse_split });
        }
        if !(delta_omega.is_finite() && delta_omega > 0.0) {
            return Err(WaveformError::InvalidStep(delta_omega));
        }
        let first = omega0 + delta_omega;
        if !(first.is_finite() && first > 0.0) {
            return Err(WaveformError::NonPositiveFrequency(first));
        }
        Ok(FrequencyGrid { omega0, delta_omega, n_total, n_coarse_split })
    }

    /// Convenience constructor from frequencies in Hz.
    pub fn from_hz(f0: f64, delta_f: f64, l_split: usize) -> Result<Self, WaveformError> {
        Self::new(2.0 * PI * f0, 2.0 * PI * delta_f, l_split * l_split, l_split)
    }

    /// omega0 = 2pi 1.5 GHz, delta_omega = 2pi 60 MHz, L = 10, N = 100.
    pub fn paper_default() -> Self {
        Self::from_hz(1.5e9, 60e6, 10).expect("valid default grid")
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    /// Number of samples N.
    pub fn len(&self) -> usize {
        self.n_total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Split factor L.
    pub fn split(&self) -> usize {
        self.n_coarse_split
    }

    /// omega_n for 1-based `n`.
    pub fn omega(&self, n: usize) -> Result<f64, WaveformError> {
        if n == 0 || n > self.n_total {
            return Err(WaveformError::IndexOutOfRange { index: n, n_total: self.n_total });
        }
        Ok(self.omega_unchecked(n))
    }

    pub(crate) fn omega_unchecked(&self, n: usize) -> f64 {
        self.omega0 + n as f64 * self.delta_omega
    }

    /// All sample frequencies, omega_1 first.
    pub fn omegas(&self) -> Vec<f64> {
        (1..=self.n_total).map(|n| self.omega_unchecked(n)).collect()
    }

    /// Highest sample frequency omega_N.
    pub fn omega_max(&self) -> f64 {
        self.omega_unchecked(self.n_total)
    }

    /// 1-based indices 1, L+1, 2L+1, ..., N-L+1.
    pub fn coarse_indices(&self) -> Vec<usize> {
        let l = self.n_coarse_split;
        (0..l).map(|i| i * l + 1).collect()
    }

    /// 1-based indices 1, 2, ..., L.
    pub fn fine_indices(&self) -> Vec<usize> {
        (1..=self.n_coarse_split).collect()
    }
}

pub fn coarse_indices(grid: &FrequencyGrid) -> Vec<usize> {
    grid.coarse_indices()
}

pub fn fine_indices(grid: &FrequencyGrid) -> Vec<usize> {
    grid.fine_indices()
}

/// Gaussian monocycle (first derivative of a Gaussian).
///
/// S_T(omega) = j A omega tau^2 exp(-omega^2 tau^2 / 2), whose magnitude peaks
/// at omega = 1/tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub center_freq: f64,
    pub tau: f64,
    pub amplitude: f64,
}

impl Pulse {
    /// Monocycle whose spectral peak is at `center_freq` Hz.
    pub fn monocycle(center_freq: f64, amplitude: f64) -> Result<Self, WaveformError> {
        if !(center_freq.is_finite() && center_freq > 0.0) {
            return Err(WaveformError::InvalidCenterFrequency(center_freq));
        }
        Ok(Pulse { center_freq, tau: 1.0 / (2.0 * PI * center_freq), amplitude })
    }

    /// 4 GHz monocycle with unit amplitude.
    pub fn paper_default() -> Self {
        Self::monocycle(4.0e9, 1.0).expect("valid default pulse")
    }

    pub fn spectrum(&self, omega: f64) -> Complex64 {
        let wt = omega * self.tau;
        Complex64::new(0.0, self.amplitude * omega * self.tau * self.tau * (-0.5 * wt * wt).exp())
    }
}

pub fn spectrum(pulse: &Pulse, omega: f64) -> Complex64 {
    pulse.spectrum(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn default_grid_frequencies() {
        let g = FrequencyGrid::paper_default();
        assert_relative_eq!(g.omega(1).unwrap(), 2.0 * PI * 1.56e9, max_relative = 1e-14);
        assert_relative_eq!(g.omega(100).unwrap(), 2.0 * PI * 7.5e9, max_relative = 1e-14);
        assert!(matches!(g.omega(0), Err(WaveformError::IndexOutOfRange { .. })));
        assert!(g.omega(101).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(
            FrequencyGrid::new(1.0, 1.0, 99, 10),
            Err(WaveformError::NotSquare { .. })
        ));
        assert!(matches!(FrequencyGrid::new(1.0, 1.0, 1, 1), Err(WaveformError::SplitTooSmall(1))));
        assert!(matches!(FrequencyGrid::new(1.0, 0.0, 4, 2), Err(WaveformError::InvalidStep(_))));
        assert!(matches!(
            FrequencyGrid::new(-5.0, 1.0, 4, 2),
            Err(WaveformError::NonPositiveFrequency(_))
        ));
    }

    #[test]
    fn index_lists() {
        let g = FrequencyGrid::paper_default();
        assert_eq!(g.coarse_indices(), vec![1, 11, 21, 31, 41, 51, 61, 71, 81, 91]);
        assert_eq!(g.fine_indices(), (1..=10).collect::<Vec<_>>());
        let small = FrequencyGrid::new(1.0, 1.0, 4, 2).unwrap();
        assert_eq!(small.coarse_indices(), vec![1, 3]);
        assert_eq!(small.fine_indices(), vec![1, 2]);
    }

    #[test]
    fn monocycle_width() {
        let p = Pulse::paper_default();
        assert_relative_eq!(p.tau, 39.789e-12, max_relative = 1e-4);
    }

    #[test]
    fn spectrum_peak_and_ratio() {
        let p = Pulse::paper_default();
        let peak = p.spectrum(1.0 / p.tau).norm();
        for k in 1..400 {
            let w = k as f64 * 0.01 / p.tau;
            assert!(p.spectrum(w).norm() <= peak * (1.0 + 1e-15));
        }
        let ratio = p.spectrum(2.0 * PI * 1.56e9).norm() / p.spectrum(2.0 * PI * 4e9).norm();
        // closed form r exp((1 - r^2)/2) with r = 0.39, about 0.596
        let r: f64 = 1.56 / 4.0;
        assert_relative_eq!(ratio, r * ((1.0 - r * r) / 2.0).exp(), max_relative = 1e-12);
        assert!((ratio - 0.5959).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn index_sets_well_formed(l in 2usize..40) {
            let g = FrequencyGrid::new(1.0, 1.0, l * l, l).unwrap();
            let c = g.coarse_indices();
            let f = g.fine_indices();
            prop_assert_eq!(c.len(), l);
            prop_assert_eq!(f.len(), l);
            prop_assert!(c.iter().chain(&f).all(|&i| (1..=l * l).contains(&i)));
            prop_assert_eq!(*c.first().unwrap(), 1);
            prop_assert_eq!(*c.last().unwrap(), l * l - l + 1);
        }

        #[test]
        fn omega_strictly_increasing(w0 in -1e9f64..1e10, dw in 1e3f64..1e9, l in 2usize..12) {
            prop_assume!(w0 + dw > 0.0);
            let g = FrequencyGrid::new(w0, dw, l * l, l).unwrap();
            let w = g.omegas();
            prop_assert!(w.windows(2).all(|p| p[1] > p[0]));
        }

        #[test]
        fn spectrum_decays_above_peak(a in 1.0f64..5.0, b in 0.0f64..5.0) {
            let p = Pulse::paper_default();
            let w1 = a / p.tau;
            let w2 = w1 + b / p.tau + 1e-3 / p.tau;
            prop_assert!(p.spectrum(w2).norm() < p.spectrum(w1).norm());
        }
    }
}

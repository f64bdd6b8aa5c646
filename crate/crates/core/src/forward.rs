//! Analytic Born-approximation echo synthesizer.
//!
//! The one-way Green function between the antenna and a point x is the sum of
//! the direct term A = G0(r_A, x) and the wall term B = rho * G0(mirror(r_A), x).
//! Its square splits into the three round-trip paths
//!
//! ```text
//! (A + B)^2 = A^2 + 2 AB + B^2
//!              s1     s2    s3
//! ```
//!
//! where the factor 2 on the one-bounce path collects the two traversal orders
//! Tx-P-W-Rx and Tx-W-P-Rx. Higher-order bounces are not modelled.
//!
//! Finite-radius targets are rendered as a ring of point scatterers on the
//! semicircle facing the antenna. This is a geometric surrogate only: it has
//! no creeping waves and no shadowing, and is not a solution of the
//! scattering problem for a conducting cylinder.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{mirror, Point2, Scene, SceneError, Target};
use crate::specfun::{hankel0, SpecFunError};
use crate::waveform::{FrequencyGrid, Pulse};

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error("Green function endpoints coincide at ({}, {})", .0.x, .0.y)]
    CoincidentPoints(Point2),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("spectrum has {got} samples but the grid has {expected}")]
    Length { expected: usize, got: usize },
    #[error("spectrum file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("signal-to-noise ratio must not be NaN or -inf (got {0})")]
    InvalidSnr(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Round-trip propagation paths for a single wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathId {
    /// Tx-P-Rx
    Direct,
    /// Tx-P-W-Rx and Tx-W-P-Rx
    OneBounce,
    /// Tx-W-P-W-Rx
    TwoBounce,
}

impl PathId {
    pub const ALL: [PathId; 3] = [PathId::Direct, PathId::OneBounce, PathId::TwoBounce];
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathId::Direct => "direct",
            PathId::OneBounce => "one_bounce",
            PathId::TwoBounce => "two_bounce",
        })
    }
}

/// Which transmit-spectrum factor multiplies the Green function in synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    /// Matched-filtered echo: omega^2 G^2 |S_T|^2.
    #[default]
    MatchedFilter,
    /// Raw echo: omega^2 G^2 S_T.
    Raw,
}

/// Free-space 2-D Green function (j/4) H0(omega |a - b| / c).
pub fn g0(omega: f64, a: Point2, b: Point2, speed: f64) -> Result<Complex64, ForwardError> {
    let d = a.distance(b);
    if d == 0.0 {
        return Err(ForwardError::CoincidentPoints(a));
    }
    let h = hankel0(omega * d / speed)?;
    Ok(Complex64::new(0.0, 0.25) * h)
}

/// Direct and wall-reflected one-way terms (A, B) between the antenna and `x`.
pub fn one_way_terms(
    omega: f64,
    scene: &Scene,
    x: Point2,
) -> Result<(Complex64, Complex64), ForwardError> {
    let a = g0(omega, scene.antenna, x, scene.speed)?;
    let b = scene.reflection_coeff * g0(omega, mirror(scene.antenna), x, scene.speed)?;
    Ok((a, b))
}

/// Squared two-way factor for one path, built from the one-way terms.
pub fn path_factor(p: PathId, a: Complex64, b: Complex64) -> Complex64 {
    match p {
        PathId::Direct => a * a,
        PathId::OneBounce => a * b,
        PathId::TwoBounce => b * b,
    }
}

pub fn path_green_sq(
    omega: f64,
    scene: &Scene,
    p: PathId,
    x: Point2,
) -> Result<Complex64, ForwardError> {
    let (a, b) = one_way_terms(omega, scene, x)?;
    Ok(path_factor(p, a, b))
}

/// Two-way multipath Green function G^2 = (A + B)^2.
pub fn total_green_sq(omega: f64, scene: &Scene, x: Point2) -> Result<Complex64, ForwardError> {
    let (a, b) = one_way_terms(omega, scene, x)?;
    let g = a + b;
    Ok(g * g)
}

/// Number of ring scatterers used for a cylinder of `radius`:
/// max(8, ceil(2 pi r / (lambda_min / 4))).
pub fn ring_count(radius: f64, grid: &FrequencyGrid, speed: f64) -> usize {
    let lambda_min = 2.0 * PI * speed / grid.omega_max();
    let n = (2.0 * PI * radius / (0.25 * lambda_min)).ceil();
    (n as usize).max(8)
}

/// Point scatterers and weights standing in for `target`.
pub fn scatter_points(
    target: &Target,
    scene: &Scene,
    grid: &FrequencyGrid,
) -> Vec<(Point2, f64)> {
    if target.radius == 0.0 {
        return vec![(target.center, target.contrast)];
    }
    let n = ring_count(target.radius, grid, scene.speed);
    let facing = (scene.antenna.y - target.center.y).atan2(scene.antenna.x - target.center.x);
    let weight = target.contrast / n as f64;
    (0..n)
        .map(|k| {
            let theta = facing - 0.5 * PI + PI * (k as f64 + 0.5) / n as f64;
            let p = Point2::new(
                target.center.x + target.radius * theta.cos(),
                target.center.y + target.radius * theta.sin(),
            );
            (p, weight)
        })
        .collect()
}

/// Received spectrum S_1..S_N on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector {
    pub values: Vec<Complex64>,
    pub grid: FrequencyGrid,
}

impl SpectrumVector {
    pub fn new(values: Vec<Complex64>, grid: FrequencyGrid) -> Result<Self, ForwardError> {
        if values.len() != grid.len() {
            return Err(ForwardError::Length { expected: grid.len(), got: values.len() });
        }
        Ok(SpectrumVector { values, grid })
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        SpectrumVector { values: vec![Complex64::new(0.0, 0.0); grid.len()], grid }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean |S_n|^2.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        SpectrumVector { values: self.values.iter().map(|v| v * k).collect(), grid: self.grid }
    }

    /// CSV with header `n,omega_rad_s,re,im`, one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,omega_rad_s,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            let n = i + 1;
            writeln!(w, "{},{:e},{:e},{:e}", n, self.grid.omega_unchecked(n), v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv), checking each
    /// frequency against `grid` to a relative tolerance of 1e-9.
    pub fn read_csv<R: BufRead>(r: R, grid: FrequencyGrid) -> Result<Self, ForwardError> {
        let mut values = Vec::with_capacity(grid.len());
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || (idx == 0 && trimmed.starts_with('n')) {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let parse_err = |message: String| ForwardError::Parse { line: lineno, message };
            if fields.len() != 4 {
                return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
            }
            let n: usize = fields[0].parse().map_err(|e| parse_err(format!("index: {e}")))?;
            let num = |s: &str, what: &str| -> Result<f64, ForwardError> {
                s.parse::<f64>().map_err(|e| parse_err(format!("{what}: {e}")))
            };
            let omega = num(fields[1], "omega")?;
            let re = num(fields[2], "re")?;
            let im = num(fields[3], "im")?;
            if n != values.len() + 1 {
                return Err(parse_err(format!("expected index {}, found {n}", values.len() + 1)));
            }
            let expected = grid
                .omega(n)
                .map_err(|e| parse_err(e.to_string()))?;
            if (omega - expected).abs() > 1e-9 * expected.abs() {
                return Err(parse_err(format!("omega {omega} does not match grid value {expected}")));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(parse_err("non-finite sample".into()));
            }
            values.push(Complex64::new(re, im));
        }
        SpectrumVector::new(values, grid)
    }
}

/// Synthesizes the matched-filtered received spectrum for every target.
pub fn synthesize(
    scene: &Scene,
    grid: &FrequencyGrid,
    pulse: &Pulse,
) -> Result<SpectrumVector, ForwardError> {
    synthesize_with(scene, grid, pulse, SynthesisMode::MatchedFilter)
}

pub fn synthesize_with(
    scene: &Scene,
    grid: &FrequencyGrid,
    pulse: &Pulse,
    mode: SynthesisMode,
) -> Result<SpectrumVector, ForwardError> {
    scene.validate()?;
    let omegas = grid.omegas();
    let source: Vec<Complex64> = omegas
        .iter()
        .map(|&w| {
            let st = pulse.spectrum(w);
            let factor = match mode {
                SynthesisMode::MatchedFilter => Complex64::new(st.norm_sqr(), 0.0),
                SynthesisMode::Raw => st,
            };
            factor * (w * w)
        })
        .collect();

    let mut total = vec![Complex64::new(0.0, 0.0); grid.len()];
    for target in &scene.targets {
        let points = scatter_points(target, scene, grid);
        let mut contribution = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (point, weight) in &points {
            for (n, &w) in omegas.iter().enumerate() {
                let g2 = total_green_sq(w, scene, *point)?;
                contribution[n] += source[n] * g2 * *weight;
            }
        }
        for (t, c) in total.iter_mut().zip(&contribution) {
            *t += c;
        }
    }
    SpectrumVector::new(total, *grid)
}

/// Adds circular complex Gaussian noise at the requested SNR (dB, relative to
/// the mean sample power). `f64::INFINITY` returns the input unchanged.
pub fn add_noise(
    sv: &SpectrumVector,
    snr_db: f64,
    seed: u64,
) -> Result<SpectrumVector, ForwardError> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(ForwardError::InvalidSnr(snr_db));
    }
    if snr_db == f64::INFINITY {
        return Ok(sv.clone());
    }
    let noise_power = sv.power() / 10f64.powf(snr_db / 10.0);
    let sigma = (0.5 * noise_power).sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let values = sv
        .values
        .iter()
        .map(|v| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            v + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(SpectrumVector { values, grid: sv.grid })
}

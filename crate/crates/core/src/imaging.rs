//! Image formation: time-reversal backprojection, left/right noise-subspace
//! images, and their product.
//!
//! Pixels are addressed row-major with row 0 at the lowest y. A pixel's centre
//! is `origin + (col + 0.5, row + 0.5) * pixel_size`, so `origin` is the outer
//! corner of pixel (0, 0).
//!
//! Some pixels are never evaluated and stay at zero:
//! - pixels on or below the wall, or on the antenna (the Green function is
//!   singular there);
//! - with the guard enabled, pixels in the antenna near field
//!   (omega_1 d_A / c below `near_field_ka`);
//! - with the guard enabled, pixels so close to the wall that the direct and
//!   mirror paths differ by less than one range cell c / (N delta_f).

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{one_way_terms, path_factor, ForwardError, PathId, SpectrumVector};
use crate::scene::{Point2, Scene};
use crate::subspace::NoiseSubspace;
use crate::waveform::{FrequencyGrid, Pulse};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("raster is empty ({width} x {height})")]
    EmptyRaster { width: usize, height: usize },
    #[error("pixel size must be positive and finite (got {0} mm)")]
    InvalidPixelSize(f64),
    #[error("raster origin is not finite")]
    NonFiniteOrigin,
    #[error("every pixel is excluded or degenerate")]
    AllPixelsDegenerate,
    #[error("images are on different rasters")]
    RasterMismatch,
    #[error("spectrum grid does not match the imaging grid")]
    GridMismatch,
    #[error("path list is empty")]
    NoPaths,
    #[error("noise basis has {got} rows but the grid split is L = {expected}")]
    BasisShape { expected: usize, got: usize },
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// Exclusion zones applied on top of the always-excluded singular pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardSpec {
    pub enabled: bool,
    /// Minimum omega_1 d_A / c.
    pub near_field_ka: f64,
    /// Minimum d_M - d_A as a multiple of the range cell c / (N delta_f).
    pub wall_cells: f64,
}

impl Default for GuardSpec {
    fn default() -> Self {
        GuardSpec { enabled: true, near_field_ka: 10.0, wall_cells: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterSpec {
    pub origin: Point2,
    pub pixel_size: f64,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub guard: GuardSpec,
}

impl Default for RasterSpec {
    fn default() -> Self {
        RasterSpec::paper_default()
    }
}

impl RasterSpec {
    /// Pixel centres on x = 0..1200, y = 0..1500 mm at 5 mm (241 x 301).
    pub fn paper_default() -> Self {
        RasterSpec {
            origin: Point2::new(-2.5, -2.5),
            pixel_size: 5.0,
            width: 241,
            height: 301,
            guard: GuardSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        if self.width == 0 || self.height == 0 {
            return Err(ImagingError::EmptyRaster { width: self.width, height: self.height });
        }
        if !(self.pixel_size.is_finite() && self.pixel_size > 0.0) {
            return Err(ImagingError::InvalidPixelSize(self.pixel_size));
        }
        if !self.origin.is_finite() {
            return Err(ImagingError::NonFiniteOrigin);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.pixel_size,
            self.origin.y + (row as f64 + 0.5) * self.pixel_size,
        )
    }

    /// Whether a pixel centred at `x` is evaluated.
    pub fn is_valid(&self, x: Point2, scene: &Scene, grid: &FrequencyGrid) -> bool {
        if x.y <= 0.0 {
            return false;
        }
        let (d_a, d_m) = scene.path_lengths(x);
        if d_a == 0.0 {
            return false;
        }
        if !self.guard.enabled {
            return true;
        }
        let omega1 = grid.omega0() + grid.delta_omega();
        if omega1 * d_a / scene.speed < self.guard.near_field_ka {
            return false;
        }
        let range_cell = 2.0 * PI * scene.speed / (grid.len() as f64 * grid.delta_omega());
        d_m - d_a >= self.guard.wall_cells * range_cell
    }

    fn mask(&self, scene: &Scene, grid: &FrequencyGrid) -> Vec<bool> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .map(|(r, c)| self.is_valid(self.center(r, c), scene, grid))
            .collect()
    }
}

/// Non-negative raster. Excluded pixels hold 0 and are marked in `valid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub origin: Point2,
    pub pixel_size: f64,
    pub width: usize,
    pub height: usize,
    /// Row-major intensities, row 0 at the lowest y.
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// False when the raw image was identically zero and left unscaled.
    pub normalized: bool,
}

impl ImageGrid {
    pub fn new(raster: &RasterSpec, values: Vec<f64>, valid: Vec<bool>) -> Self {
        assert_eq!(values.len(), raster.len());
        assert_eq!(valid.len(), raster.len());
        ImageGrid {
            origin: raster.origin,
            pixel_size: raster.pixel_size,
            width: raster.width,
            height: raster.height,
            values,
            valid,
            normalized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.pixel_size,
            self.origin.y + (row as f64 + 0.5) * self.pixel_size,
        )
    }

    /// (row, col) of the pixel containing `p`, if inside the raster.
    pub fn pixel_of(&self, p: Point2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.pixel_size).floor();
        let r = ((p.y - self.origin.y) / self.pixel_size).floor();
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }

    pub fn same_raster(&self, other: &ImageGrid) -> bool {
        self.origin == other.origin
            && self.pixel_size == other.pixel_size
            && self.width == other.width
            && self.height == other.height
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Scales to max 1; an all-zero image is left as is with `normalized = false`.
    pub fn normalize(&mut self) {
        let m = self.max();
        if m > 0.0 && m.is_finite() {
            for v in &mut self.values {
                *v /= m;
            }
            self.normalized = true;
        } else {
            self.normalized = false;
        }
    }

    /// CSV: a header line, the raster description, then one line per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# origin_x,origin_y,pixel_mm,width,height")?;
        writeln!(
            w,
            "{},{},{},{},{}",
            self.origin.x, self.origin.y, self.pixel_size, self.width, self.height
        )?;
        let mut line = String::new();
        for row in self.values.chunks(self.width) {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Binary 16-bit PGM with the highest-y row first.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n65535\n", self.width, self.height)?;
        let mut buf = Vec::with_capacity(2 * self.len());
        for row in self.values.chunks(self.width).rev() {
            for v in row {
                let level = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
                buf.extend_from_slice(&level.to_be_bytes());
            }
        }
        w.write_all(&buf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringKind {
    /// omega_1, omega_{L+1}, ..., omega_{N-L+1}
    Coarse,
    /// omega_1, ..., omega_L
    Fine,
}

/// Transmit-spectrum factor used in steering vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringSource {
    /// S_T(omega)
    #[default]
    Transmit,
    /// |S_T(omega)|^2, matching the matched-filter synthesis.
    MatchedFilter,
}

/// How right singular vectors are correlated with the fine steering vector.
///
/// K_FF is a sum of outer products a_p b_p^T, so its right singular vectors
/// span conj(b_p) and the projection that vanishes at the target is
/// |v^H conj(h_p)|. `AsWritten` uses |v^H h_p|, which has no null there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RightConvention {
    #[default]
    Conjugate,
    AsWritten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingOptions {
    pub paths: Vec<PathId>,
    #[serde(default)]
    pub steering_source: SteeringSource,
    #[serde(default)]
    pub right_convention: RightConvention,
}

impl Default for ImagingOptions {
    fn default() -> Self {
        ImagingOptions {
            paths: PathId::ALL.to_vec(),
            steering_source: SteeringSource::default(),
            right_convention: RightConvention::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub values: Vec<Complex64>,
    pub path: PathId,
    pub kind: SteeringKind,
}

impl SteeringVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn indices(grid: &FrequencyGrid, kind: SteeringKind) -> Vec<usize> {
    match kind {
        SteeringKind::Coarse => grid.coarse_indices(),
        SteeringKind::Fine => grid.fine_indices(),
    }
}

fn source_factor(pulse: &Pulse, omega: f64, source: SteeringSource) -> Complex64 {
    let st = pulse.spectrum(omega);
    let s = match source {
        SteeringSource::Transmit => st,
        SteeringSource::MatchedFilter => Complex64::new(st.norm_sqr(), 0.0),
    };
    s * (omega * omega)
}

/// Steering vector omega^2 G_p^2(omega, x) S_T(omega) at the coarse or fine
/// frequencies.
pub fn steering(
    scene: &Scene,
    grid: &FrequencyGrid,
    pulse: &Pulse,
    p: PathId,
    x: Point2,
    kind: SteeringKind,
) -> Result<SteeringVector, ForwardError> {
    steering_with(scene, grid, pulse, p, x, kind, SteeringSource::Transmit)
}

pub fn steering_with(
    scene: &Scene,
    grid: &FrequencyGrid,
    pulse: &Pulse,
    p: PathId,
    x: Point2,
    kind: SteeringKind,
    source: SteeringSource,
) -> Result<SteeringVector, ForwardError> {
    let values = indices(grid, kind)
        .into_iter()
        .map(|n| {
            let w = grid.omega(n).expect("index lists are in range");
            let (a, b) = one_way_terms(w, scene, x)?;
            Ok(path_factor(p, a, b) * source_factor(pulse, w, source))
        })
        .collect::<Result<Vec<_>, ForwardError>>()?;
    Ok(SteeringVector { values, path: p, kind })
}

/// Evaluates `f` at every valid pixel in parallel; the first error in
/// row-major order is returned.
fn render<F>(
    raster: &RasterSpec,
    scene: &Scene,
    grid: &FrequencyGrid,
    f: F,
) -> Result<ImageGrid, ImagingError>
where
    F: Fn(Point2) -> Result<Option<f64>, ForwardError> + Sync,
{
    raster.validate()?;
    let mut valid = raster.mask(scene, grid);
    let rows: Vec<Vec<Result<Option<f64>, ForwardError>>> = (0..raster.height)
        .into_par_iter()
        .map(|r| {
            (0..raster.width)
                .map(|c| {
                    if valid[r * raster.width + c] {
                        f(raster.center(r, c))
                    } else {
                        Ok(None)
                    }
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(raster.len());
    for (i, cell) in rows.into_iter().flatten().enumerate() {
        match cell? {
            Some(v) => values.push(v),
            None => {
                valid[i] = false;
                values.push(0.0);
            }
        }
    }
    Ok(ImageGrid::new(raster, values, valid))
}

fn tr_pixel(omegas: &[f64], s: &[Complex64], g2: impl Iterator<Item = Complex64>) -> f64 {
    omegas
        .iter()
        .zip(s)
        .zip(g2)
        .map(|((w, s), g)| s.conj() * g * (w * w))
        .sum::<Complex64>()
        .norm()
}

/// |sum_n omega_n^2 S_n^* G^2(omega_n, x)|, normalized to max 1.
pub fn tr_image(
    sv: &SpectrumVector,
    scene: &Scene,
    grid: &FrequencyGrid,
    raster: &RasterSpec,
) -> Result<ImageGrid, ImagingError> {
    if sv.grid != *grid || sv.values.len() != grid.len() {
        return Err(ImagingError::GridMismatch);
    }
    let omegas = grid.omegas();
    let mut img = render(raster, scene, grid, |x| {
        let g2 = omegas
            .iter()
            .map(|&w| {
                let (a, b) = one_way_terms(w, scene, x)?;
                Ok((a + b) * (a + b))
            })
            .collect::<Result<Vec<_>, ForwardError>>()?;
        Ok(Some(tr_pixel(&omegas, &sv.values, g2.into_iter())))
    })?;
    img.normalize();
    Ok(img)
}

/// 1 / sum_i sum_p |b_i^H s_p|^2 / |s_p|^2 over the noise basis of one side.
#[allow(clippy::too_many_arguments)]
pub fn subspace_image(
    ns: &NoiseSubspace,
    side: Side,
    scene: &Scene,
    grid: &FrequencyGrid,
    pulse: &Pulse,
    raster: &RasterSpec,
    options: &ImagingOptions,
) -> Result<ImageGrid, ImagingError> {
    if options.paths.is_empty() {
        return Err(ImagingError::NoPaths);
    }
    let basis = match side {
        Side::Left => &ns.left,
        Side::Right => &ns.right,
    };
    if basis.nrows() != grid.split() {
        return Err(ImagingError::BasisShape { expected: grid.split(), got: basis.nrows() });
    }
    let kind = match side {
        Side::Left => SteeringKind::Coarse,
        Side::Right => SteeringKind::Fine,
    };
    let conjugate = side == Side::Right && options.right_convention == RightConvention::Conjugate;
    // rows of `bh` are b_i^H
    let bh: Vec<Vec<Complex64>> =
        basis.columns().into_iter().map(|c| c.iter().map(|z| z.conj()).collect()).collect();
    let omegas: Vec<f64> = indices(grid, kind)
        .into_iter()
        .map(|n| grid.omega(n).expect("index lists are in range"))
        .collect();
    let sources: Vec<Complex64> =
        omegas.iter().map(|&w| source_factor(pulse, w, options.steering_source)).collect();

    let mut img = render(raster, scene, grid, |x| {
        let terms = omegas
            .iter()
            .map(|&w| one_way_terms(w, scene, x))
            .collect::<Result<Vec<_>, ForwardError>>()?;
        let vectors: Vec<Vec<Complex64>> = options
            .paths
            .iter()
            .map(|&p| {
                terms
                    .iter()
                    .zip(&sources)
                    .map(|(&(a, b), src)| {
                        let v = path_factor(p, a, b) * src;
                        if conjugate { v.conj() } else { v }
                    })
                    .collect()
            })
            .collect();
        Ok(denominator(&bh, &vectors).map(|d| 1.0 / d.max(f64::MIN_POSITIVE)))
    })?;
    if !img.valid.iter().any(|&v| v) {
        return Err(ImagingError::AllPixelsDegenerate);
    }
    img.normalize();
    Ok(img)
}

/// sum_i sum_p |b_i^H s_p|^2 / |s_p|^2, with `bh` holding the rows b_i^H.
/// `None` when any s_p vanishes.
fn denominator(bh: &[Vec<Complex64>], vectors: &[Vec<Complex64>]) -> Option<f64> {
    let mut total = 0.0;
    for s in vectors {
        let norm2: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return None;
        }
        let proj: f64 = bh
            .iter()
            .map(|row| row.iter().zip(s).map(|(b, v)| b * v).sum::<Complex64>().norm_sqr())
            .sum();
        total += proj / norm2;
    }
    Some(total)
}

/// Noise-subspace denominator for one pixel, given the noise basis of one side
/// (columns) and that pixel's steering vectors. Set `conjugate` for the right
/// side under [`RightConvention::Conjugate`].
pub fn subspace_denominator(
    basis: &ndarray::Array2<Complex64>,
    vectors: &[SteeringVector],
    conjugate: bool,
) -> Option<f64> {
    let bh: Vec<Vec<Complex64>> =
        basis.columns().into_iter().map(|c| c.iter().map(|z| z.conj()).collect()).collect();
    let vs: Vec<Vec<Complex64>> = vectors
        .iter()
        .map(|v| v.values.iter().map(|z| if conjugate { z.conj() } else { *z }).collect())
        .collect();
    denominator(&bh, &vs)
}

/// Pixel-wise product of two images, renormalized to max 1.
pub fn dort_image(left: &ImageGrid, right: &ImageGrid) -> Result<ImageGrid, ImagingError> {
    if !left.same_raster(right) {
        return Err(ImagingError::RasterMismatch);
    }
    let mut out = left.clone();
    for ((o, r), (vo, vr)) in
        out.values.iter_mut().zip(&right.values).zip(out.valid.iter_mut().zip(&right.valid))
    {
        *o *= r;
        *vo = *vo && *vr;
    }
    out.normalize();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{synthesize, total_green_sq};
    use crate::scene::Target;
    use crate::subspace::{build_kff, noise_subspace, svd};

    fn coarse_raster() -> RasterSpec {
        RasterSpec {
            origin: Point2::new(397.5, 547.5),
            pixel_size: 10.0,
            width: 41,
            height: 41,
            guard: GuardSpec::default(),
        }
    }

    fn setup() -> (Scene, FrequencyGrid, Pulse) {
        (Scene::paper_default(), FrequencyGrid::paper_default(), Pulse::paper_default())
    }

    fn cosine(a: &[Complex64], b: &[Complex64]) -> f64 {
        let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        dot.norm() / (na * nb)
    }

    #[test]
    fn default_raster_geometry() {
        let r = RasterSpec::paper_default();
        assert_eq!(r.len(), 241 * 301);
        assert_eq!(r.center(0, 0), Point2::new(0.0, 0.0));
        assert_eq!(r.center(300, 240), Point2::new(1200.0, 1500.0));
        assert_eq!(r.center(150, 120), Point2::new(600.0, 750.0));
    }

    #[test]
    fn guard_zones() {
        let (scene, grid, _) = setup();
        let r = RasterSpec::paper_default();
        assert!(!r.is_valid(Point2::new(600.0, 0.0), &scene, &grid));
        assert!(!r.is_valid(scene.antenna, &scene, &grid));
        assert!(!r.is_valid(Point2::new(200.0, 600.0), &scene, &grid));
        assert!(!r.is_valid(Point2::new(900.0, 20.0), &scene, &grid));
        assert!(r.is_valid(Point2::new(600.0, 750.0), &scene, &grid));
        let mut open = r;
        open.guard.enabled = false;
        assert!(open.is_valid(Point2::new(200.0, 600.0), &scene, &grid));
        assert!(!open.is_valid(scene.antenna, &scene, &grid));
    }

    #[test]
    fn raster_validation() {
        let (scene, grid, _) = setup();
        let sv = synthesize(&scene, &grid, &Pulse::paper_default()).unwrap();
        let mut r = coarse_raster();
        r.width = 0;
        assert!(matches!(tr_image(&sv, &scene, &grid, &r), Err(ImagingError::EmptyRaster { .. })));
        let mut r = coarse_raster();
        r.pixel_size = -1.0;
        assert!(matches!(tr_image(&sv, &scene, &grid, &r), Err(ImagingError::InvalidPixelSize(_))));
    }

    #[test]
    fn steering_examples() {
        let (mut scene, grid, pulse) = setup();
        let x = Point2::new(600.0, 750.0);
        let g = steering(&scene, &grid, &pulse, PathId::Direct, x, SteeringKind::Coarse).unwrap();
        assert_eq!(g.values.len(), 10);
        scene.reflection_coeff = Complex64::new(0.0, 0.0);
        let z = steering(&scene, &grid, &pulse, PathId::TwoBounce, x, SteeringKind::Fine).unwrap();
        assert_eq!(z.norm(), 0.0);
        // against the coarse subsampling of the direct-path echo: the matched
        // source is exactly collinear; S_T alone differs by the |S_T| taper
        let sv = synthesize(&scene, &grid, &pulse).unwrap();
        let sub: Vec<Complex64> = grid.coarse_indices().iter().map(|&n| sv.values[n - 1]).collect();
        let g = steering(&scene, &grid, &pulse, PathId::Direct, x, SteeringKind::Coarse).unwrap();
        let m = steering_with(
            &scene,
            &grid,
            &pulse,
            PathId::Direct,
            x,
            SteeringKind::Coarse,
            SteeringSource::MatchedFilter,
        )
        .unwrap();
        assert!(cosine(&m.values, &sub) > 1.0 - 1e-12);
        let printed = cosine(&g.values, &sub);
        assert!((printed - 0.98948).abs() < 1e-4, "{printed}");
    }

    #[test]
    fn tr_peak_near_target() {
        let (scene, grid, pulse) = setup();
        let sv = synthesize(&scene, &grid, &pulse).unwrap();
        let img = tr_image(&sv, &scene, &grid, &coarse_raster()).unwrap();
        assert!(img.normalized);
        let (i, _) = img
            .values
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        let p = img.center(i / img.width, i % img.width);
        assert!(p.distance(Point2::new(600.0, 750.0)) <= 10.0);
    }

    #[test]
    fn tr_zero_spectrum() {
        let (scene, grid, _) = setup();
        let sv = SpectrumVector::zeros(grid);
        let img = tr_image(&sv, &scene, &grid, &coarse_raster()).unwrap();
        assert!(!img.normalized);
        assert!(img.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tr_pixel_conjugation_symmetry() {
        let omegas = [1.0, 2.0, 3.5];
        let s = [Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5), Complex64::new(-0.7, 0.1)];
        let g = [Complex64::new(1.0, 1.0), Complex64::new(-0.2, 0.9), Complex64::new(0.4, -0.6)];
        let a = tr_pixel(&omegas, &s, g.iter().copied());
        let sc: Vec<_> = s.iter().map(|z| z.conj()).collect();
        let b = tr_pixel(&omegas, &sc, g.iter().map(|z| z.conj()));
        assert!((a - b).abs() <= 1e-15 * a);
    }

    #[test]
    fn tr_matches_direct_formula() {
        let (scene, grid, pulse) = setup();
        let sv = synthesize(&scene, &grid, &pulse).unwrap();
        let raster = coarse_raster();
        let img = tr_image(&sv, &scene, &grid, &raster).unwrap();
        let raw = |x: Point2| {
            grid.omegas()
                .iter()
                .zip(&sv.values)
                .map(|(&w, s)| s.conj() * total_green_sq(w, &scene, x).unwrap() * (w * w))
                .sum::<Complex64>()
                .norm()
        };
        let a = raster.center(3, 7);
        let b = raster.center(30, 12);
        let ratio = img.get(3, 7) / img.get(30, 12);
        assert!((ratio - raw(a) / raw(b)).abs() <= 1e-12 * ratio);
    }

    #[test]
    fn dort_product_contracts() {
        let raster = coarse_raster();
        let n = raster.len();
        let mut a =
            ImageGrid::new(&raster, (0..n).map(|i| (i % 17) as f64 / 16.0).collect(), vec![true; n]);
        a.normalize();
        let sq = dort_image(&a, &a).unwrap();
        for (s, v) in sq.values.iter().zip(&a.values) {
            assert_eq!(*s, v * v);
        }
        let ones = ImageGrid::new(&raster, vec![1.0; n], vec![true; n]);
        assert_eq!(dort_image(&a, &ones).unwrap().values, a.values);
        let mut other = raster;
        other.pixel_size = 11.0;
        let b = ImageGrid::new(&other, vec![1.0; n], vec![true; n]);
        assert!(matches!(dort_image(&a, &b), Err(ImagingError::RasterMismatch)));
    }

    #[test]
    fn music_null_single_path() {
        // one path, no wall: a single antenna only resolves range, so the null is
        // the ring d_A(x) = d_A(x_T); every pixel off that ring by more than two
        // pixels must be dimmer than the target pixel
        let (mut scene, grid, pulse) = setup();
        scene.reflection_coeff = Complex64::new(0.0, 0.0);
        let sv = synthesize(&scene, &grid, &pulse).unwrap();
        let ns = noise_subspace(&svd(&build_kff(&sv).unwrap()).unwrap(), 1, 1).unwrap();
        let opts = ImagingOptions { paths: vec![PathId::Direct], ..Default::default() };
        let raster = RasterSpec {
            origin: Point2::new(495.0, 645.0),
            pixel_size: 10.0,
            width: 21,
            height: 21,
            guard: GuardSpec::default(),
        };
        for side in [Side::Left, Side::Right] {
            let img = subspace_image(&ns, side, &scene, &grid, &pulse, &raster, &opts).unwrap();
            let (tr, tc) = img.pixel_of(Point2::new(600.0, 750.0)).unwrap();
            assert_eq!(img.center(tr, tc), Point2::new(600.0, 750.0));
            let at_target = img.get(tr, tc);
            let d_t = scene.antenna.distance(Point2::new(600.0, 750.0));
            let mut checked = 0;
            for r in 0..raster.height {
                for c in 0..raster.width {
                    let d = scene.antenna.distance(img.center(r, c));
                    if (d - d_t).abs() > 2.0 * raster.pixel_size {
                        assert!(img.get(r, c) < at_target, "{side:?} ({r},{c})");
                        checked += 1;
                    }
                }
            }
            assert!(checked > 300);
        }
    }

    #[test]
    fn per_path_rescaling_invariance() {
        // the |s_p|^2 normalization makes the denominator blind to per-path scale;
        // a scaled wall coefficient rescales path 2 by rho and path 3 by rho^2
        let (scene, grid, pulse) = setup();
        let sv = synthesize(&scene, &grid, &pulse).unwrap();
        let ns = noise_subspace(&svd(&build_kff(&sv).unwrap()).unwrap(), 3, 1).unwrap();
        let opts = ImagingOptions::default();
        let mut scaled = scene.clone();
        scaled.reflection_coeff = Complex64::new(-1.0 / 7.0, 0.0);
        let raster = coarse_raster();
        for side in [Side::Left, Side::Right] {
            let a = subspace_image(&ns, side, &scene, &grid, &pulse, &raster, &opts).unwrap();
            let b = subspace_image(&ns, side, &scaled, &grid, &pulse, &raster, &opts).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= 1e-12 * x.max(1e-300));
            }
        }
    }

    #[test]
    fn all_degenerate_is_error() {
        let (mut scene, grid, pulse) = setup();
        let sv = synthesize(&scene, &grid, &pulse).unwrap();
        let ns = noise_subspace(&svd(&build_kff(&sv).unwrap()).unwrap(), 3, 1).unwrap();
        scene.reflection_coeff = Complex64::new(0.0, 0.0);
        let err = subspace_image(
            &ns,
            Side::Left,
            &scene,
            &grid,
            &pulse,
            &coarse_raster(),
            &ImagingOptions::default(),
        );
        assert!(matches!(err, Err(ImagingError::AllPixelsDegenerate)));
    }

    #[test]
    fn images_are_normalized_and_nonnegative() {
        let (scene, grid, pulse) = setup();
        let sv = synthesize(
            &scene.with_targets(vec![Target::cylinder(Point2::new(600.0, 750.0), 20.0)]),
            &grid,
            &pulse,
        )
        .unwrap();
        let ns = noise_subspace(&svd(&build_kff(&sv).unwrap()).unwrap(), 3, 1).unwrap();
        let raster = coarse_raster();
        let opts = ImagingOptions::default();
        let l = subspace_image(&ns, Side::Left, &scene, &grid, &pulse, &raster, &opts).unwrap();
        let r = subspace_image(&ns, Side::Right, &scene, &grid, &pulse, &raster, &opts).unwrap();
        let t = tr_image(&sv, &scene, &grid, &raster).unwrap();
        let d = dort_image(&l, &r).unwrap();
        for img in [&l, &r, &t, &d] {
            assert_eq!(img.max(), 1.0);
            assert!(img.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn csv_and_pgm_layout() {
        let raster = RasterSpec {
            origin: Point2::new(-2.5, -2.5),
            pixel_size: 5.0,
            width: 3,
            height: 2,
            guard: GuardSpec::default(),
        };
        let img = ImageGrid::new(&raster, vec![0.0, 0.5, 1.0, 0.25, 0.0, 0.0], vec![true; 6]);
        let mut csv = Vec::new();
        img.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# origin_x,origin_y,pixel_mm,width,height");
        assert_eq!(lines[1], "-2.5,-2.5,5,3,2");
        assert_eq!(lines[2], "0e0,5e-1,1e0");
        assert_eq!(lines.len(), 4);
        let mut pgm = Vec::new();
        img.write_pgm(&mut pgm).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&pgm[..header.len()], header);
        let body = &pgm[header.len()..];
        assert_eq!(body.len(), 12);
        // top row is the second raster row
        assert_eq!(u16::from_be_bytes([body[0], body[1]]), 16384);
        assert_eq!(u16::from_be_bytes([body[10], body[11]]), 65535);
    }
}

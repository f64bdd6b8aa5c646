//! Localization error and Muller-Buffington sharpness.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::ImageGrid;
use crate::scene::Point2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("image is uniform; no peak")]
    UniformImage,
    #[error("image maximum is zero")]
    ZeroImage,
    #[error("sharpness order must be >= 1 (got {0})")]
    InvalidOrder(f64),
    #[error("region of interest contains no pixels")]
    EmptyRegion,
    #[error("results table line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Kahan-Babuska-Neumaier sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Row-major index of the largest pixel, lowest index on ties.
pub fn argmax(img: &ImageGrid) -> Result<usize, MetricsError> {
    let mut best = 0;
    let mut lo = f64::INFINITY;
    for (i, &v) in img.values.iter().enumerate() {
        if v > img.values[best] {
            best = i;
        }
        lo = lo.min(v);
    }
    if img.values.is_empty() || img.values[best] == lo {
        return Err(MetricsError::UniformImage);
    }
    Ok(best)
}

/// Centre of the argmax pixel.
pub fn peak_position(img: &ImageGrid) -> Result<Point2, MetricsError> {
    let i = argmax(img)?;
    Ok(img.center(i / img.width, i % img.width))
}

/// Distance from the estimate to the target surface, ||x_E - x_T| - r|.
pub fn position_error(x_e: Point2, x_t: Point2, r: f64) -> f64 {
    (x_e.distance(x_t) - r).abs()
}

/// Axis-aligned region in mm; pixels whose centres fall inside are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Roi {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// h_q = mean of I^q over the raster, with I scaled to max 1.
pub fn mb_sharpness(img: &ImageGrid, q: f64) -> Result<f64, MetricsError> {
    mb_sharpness_in(img, q, None)
}

pub fn mb_sharpness_in(img: &ImageGrid, q: f64, roi: Option<&Roi>) -> Result<f64, MetricsError> {
    if q.is_nan() || q < 1.0 {
        return Err(MetricsError::InvalidOrder(q));
    }
    let max = img.max();
    if max.is_nan() || max <= 0.0 {
        return Err(MetricsError::ZeroImage);
    }
    let selected: Vec<f64> = img
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| roi.is_none_or(|r| r.contains(img.center(i / img.width, i % img.width))))
        .map(|(_, &v)| (v / max).powf(q))
        .collect();
    if selected.is_empty() {
        return Err(MetricsError::EmptyRegion);
    }
    Ok(neumaier_sum(selected.iter().copied()) / selected.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub row: usize,
    pub col: usize,
    pub position: Point2,
    pub value: f64,
}

/// Interior local maxima at or above `min_level`, strongest first.
///
/// A pixel qualifies when it and all eight neighbours are valid and it is not
/// exceeded by any neighbour; on plateaus only the lowest-index pixel counts.
pub fn local_peaks(img: &ImageGrid, min_level: f64) -> Vec<Peak> {
    let (w, h) = (img.width, img.height);
    let mut peaks = Vec::new();
    if w < 3 || h < 3 {
        return peaks;
    }
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let i = r * w + c;
            let v = img.values[i];
            if v < min_level || !img.valid[i] {
                continue;
            }
            let mut is_peak = true;
            'nb: for dr in [-1isize, 0, 1] {
                for dc in [-1isize, 0, 1] {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let j = (r as isize + dr) as usize * w + (c as isize + dc) as usize;
                    let u = img.values[j];
                    if !img.valid[j] || u > v || (u == v && j < i) {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak {
                peaks.push(Peak { row: r, col: c, position: img.center(r, c), value: v });
            }
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then((a.row, a.col).cmp(&(b.row, b.col))));
    peaks
}

/// One method evaluated at one target radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub radius_mm: f64,
    pub estimated: Point2,
    pub error_mm: f64,
    pub sharpness_h4: f64,
    /// Wall-clock time, only recorded when timing is requested.
    pub runtime_s: Option<f64>,
}

pub const RESULTS_HEADER: &str = "method,r_mm,error_mm,h4,runtime_s,x_est_mm,y_est_mm";

pub fn write_results<W: Write>(mut w: W, rows: &[EvalReport]) -> std::io::Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in rows {
        let runtime = r.runtime_s.map(|t| format!("{t}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.method, r.radius_mm, r.error_mm, r.sharpness_h4, runtime, r.estimated.x, r.estimated.y
        )?;
    }
    Ok(())
}

pub fn read_results<R: BufRead>(r: R) -> Result<Vec<EvalReport>, MetricsError> {
    let mut rows = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let err = |message: String| MetricsError::Parse { line: lineno, message };
        let line = line.map_err(|e| err(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("method,") {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str, name: &str| s.parse::<f64>().map_err(|e| err(format!("{name}: {e}")));
        rows.push(EvalReport {
            method: f[0].to_string(),
            radius_mm: num(f[1], "r_mm")?,
            error_mm: num(f[2], "error_mm")?,
            sharpness_h4: num(f[3], "h4")?,
            runtime_s: if f[4].is_empty() { None } else { Some(num(f[4], "runtime_s")?) },
            estimated: Point2::new(num(f[5], "x_est_mm")?, num(f[6], "y_est_mm")?),
        });
    }
    Ok(rows)
}

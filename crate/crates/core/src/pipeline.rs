//! End-to-end runs: synthesis, K_FF decomposition, imaging, evaluation, and
//! artifact output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::forward::{add_noise, synthesize_with, SpectrumVector};
use crate::imaging::{dort_image, subspace_image, tr_image, ImageGrid, Side};
use crate::metrics::{mb_sharpness, peak_position, position_error, write_results, EvalReport};
use crate::scene::Scene;
use crate::subspace::{build_kff, select_noise_subspace, svd, SvdResult};
use crate::Error;

/// Images produced by one run; absent entries were not requested.
#[derive(Debug, Clone, Default)]
pub struct ImageSet {
    pub tr: Option<ImageGrid>,
    pub left: Option<ImageGrid>,
    pub right: Option<ImageGrid>,
    pub dort: Option<ImageGrid>,
}

impl ImageSet {
    fn named(&self) -> Vec<(&'static str, &ImageGrid)> {
        [("tr", &self.tr), ("left", &self.left), ("right", &self.right), ("dort", &self.dort)]
            .into_iter()
            .filter_map(|(n, i)| i.as_ref().map(|i| (n, i)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub spectrum: SpectrumVector,
    pub svd: Option<SvdResult>,
    pub images: ImageSet,
    pub reports: Vec<EvalReport>,
}

/// Received spectrum for the configured scene, noise included if enabled.
pub fn simulate(cfg: &RunConfig) -> Result<SpectrumVector, Error> {
    cfg.validate()?;
    let scene = cfg.scene()?;
    let grid = cfg.grid()?;
    let pulse = cfg.pulse()?;
    let clean = synthesize_with(&scene, &grid, &pulse, cfg.imaging.synthesis)?;
    if cfg.noise.enabled {
        Ok(add_noise(&clean, cfg.noise.snr_db, cfg.noise.seed)?)
    } else {
        Ok(clean)
    }
}

/// Images and reports from a spectrum, without touching the filesystem.
pub fn process(cfg: &RunConfig, spectrum: SpectrumVector) -> Result<RunOutput, Error> {
    cfg.validate()?;
    let scene = cfg.scene()?;
    let grid = cfg.grid()?;
    let pulse = cfg.pulse()?;
    if spectrum.grid != grid {
        return Err(crate::imaging::ImagingError::GridMismatch.into());
    }
    let q = cfg.imaging.sharpness_q;
    let record = cfg.output.record_timing;
    let mut images = ImageSet::default();
    let mut reports = Vec::new();
    let mut decomposition = None;

    if cfg.imaging.methods.tr() {
        let t0 = Instant::now();
        let img = tr_image(&spectrum, &scene, &grid, &cfg.raster)?;
        reports.push(evaluate("tr", &img, &scene, q, record.then(|| t0.elapsed().as_secs_f64()))?);
        images.tr = Some(img);
    }
    if cfg.imaging.methods.dort() {
        let t0 = Instant::now();
        let opts = cfg.imaging_options();
        let r = svd(&build_kff(&spectrum)?)?;
        let ns = select_noise_subspace(&r, cfg.selection())?;
        let left = subspace_image(&ns, Side::Left, &scene, &grid, &pulse, &cfg.raster, &opts)?;
        let right = subspace_image(&ns, Side::Right, &scene, &grid, &pulse, &cfg.raster, &opts)?;
        let dort = dort_image(&left, &right)?;
        let elapsed = record.then(|| t0.elapsed().as_secs_f64());
        reports.push(evaluate("dort", &dort, &scene, q, elapsed)?);
        images.left = Some(left);
        images.right = Some(right);
        images.dort = Some(dort);
        decomposition = Some(r);
    }
    Ok(RunOutput { spectrum, svd: decomposition, images, reports })
}

fn evaluate(
    method: &str,
    img: &ImageGrid,
    scene: &Scene,
    q: f64,
    runtime_s: Option<f64>,
) -> Result<EvalReport, Error> {
    let x_e = peak_position(img)?;
    // distance to the nearest target surface
    let (error_mm, radius_mm) = scene
        .targets
        .iter()
        .map(|t| (position_error(x_e, t.center, t.radius), t.radius))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::NAN, f64::NAN));
    Ok(EvalReport {
        method: method.to_string(),
        radius_mm,
        estimated: x_e,
        error_mm,
        sharpness_h4: mb_sharpness(img, q)?,
        runtime_s,
    })
}

/// Writes `f`'s output to a temporary file in the target directory, then
/// renames it into place.
pub fn write_atomic<F>(path: &Path, f: F) -> Result<(), Error>
where
    F: FnOnce(&mut std::io::BufWriter<&mut tempfile::NamedTempFile>) -> std::io::Result<()>,
{
    let io_err = |source: std::io::Error| Error::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut w = std::io::BufWriter::new(&mut tmp);
        f(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes the spectrum, SVD dump, images and per-run results into `dir`.
pub fn write_run(cfg: &RunConfig, out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut files = Vec::new();
    let mut emit = |name: String,
                    f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>|
     -> Result<(), Error> {
        let path = dir.join(name);
        write_atomic(&path, |w| f(w))?;
        files.push(path);
        Ok(())
    };
    emit("spectrum.csv".into(), &|w| out.spectrum.write_csv(w))?;
    if let Some(r) = &out.svd {
        emit("svd.csv".into(), &|w| r.write_csv(w))?;
    }
    for (name, img) in out.images.named() {
        emit(format!("image_{name}.csv"), &|w| img.write_csv(w))?;
        if cfg.output.write_pgm {
            emit(format!("image_{name}.pgm"), &|w| img.write_pgm(w))?;
        }
    }
    emit("results.csv".into(), &|w| write_results(w, &out.reports))?;
    Ok(files)
}

/// Simulate, process and write one run into `cfg.output.dir`.
pub fn run_single(cfg: &RunConfig) -> Result<(RunOutput, Vec<PathBuf>), Error> {
    let out = process(cfg, simulate(cfg)?)?;
    let files = write_run(cfg, &out, &cfg.output.dir)?;
    Ok((out, files))
}

#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub radius_mm: f64,
    pub module: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    /// All report rows, ordered by radius and then method.
    pub reports: Vec<EvalReport>,
    pub failures: Vec<SweepFailure>,
    pub files: Vec<PathBuf>,
}

/// Directory name for one sweep radius.
pub fn radius_dir(r: f64) -> String {
    format!("r_{r}mm")
}

/// One run per radius (concurrently), each in its own subdirectory, plus the
/// consolidated `sweep_results.csv`. Failing radii are recorded in
/// `sweep_errors.csv` and do not stop the sweep.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput, Error> {
    if cfg.sweep.radii_mm.is_empty() {
        return Err(Error::Usage("sweep needs at least one radius".into()));
    }
    cfg.validate()?;
    let root = cfg.output.dir.clone();
    let runs: Vec<(f64, Result<_, Error>)> = cfg
        .sweep
        .radii_mm
        .par_iter()
        .map(|&r| {
            let mut c = cfg.with_radius(r);
            c.output.dir = root.join(radius_dir(r));
            (r, run_single(&c))
        })
        .collect();

    let mut out = SweepOutput::default();
    let mut ok: Vec<(f64, Vec<EvalReport>)> = Vec::new();
    for (r, res) in runs {
        match res {
            Ok((run, files)) => {
                ok.push((r, run.reports));
                out.files.extend(files);
            }
            Err(e) => out.failures.push(SweepFailure {
                radius_mm: r,
                module: e.module(),
                message: e.to_string(),
            }),
        }
    }
    ok.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.reports = ok.into_iter().flat_map(|(_, r)| r).collect();

    let table = root.join("sweep_results.csv");
    write_atomic(&table, |w| write_results(w, &out.reports))?;
    out.files.push(table);
    let errors = root.join("sweep_errors.csv");
    if out.failures.is_empty() {
        // a stale file from an earlier sweep would be misleading
        let _ = std::fs::remove_file(&errors);
    } else {
        out.failures.sort_by(|a, b| a.radius_mm.total_cmp(&b.radius_mm));
        write_atomic(&errors, |w| {
            writeln!(w, "r_mm,module,message")?;
            for f in &out.failures {
                writeln!(w, "{},{},\"{}\"", f.radius_mm, f.module, f.message.replace('"', "'"))?;
            }
            Ok(())
        })?;
        out.files.push(errors);
    }
    Ok(out)
}

/// Per-figure tables: `error_vs_radius.csv` and `sharpness_vs_radius.csv`,
/// one row per radius (ascending) and one column per method.
pub fn emit_plots(rows: &[EvalReport], dir: &Path) -> Result<Vec<PathBuf>, Error> {
    if rows.is_empty() {
        return Err(Error::Usage("results table is empty".into()));
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut radii: Vec<f64> = rows.iter().map(|r| r.radius_mm).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut cells: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for r in rows {
        let ri = radii.iter().position(|x| *x == r.radius_mm).expect("radius listed");
        let mi = methods.iter().position(|m| *m == r.method).expect("method listed");
        cells.insert((ri, mi), (r.error_mm, r.sharpness_h4));
    }
    let mut files = Vec::new();
    for (name, pick) in [
        ("error_vs_radius.csv", (|c: (f64, f64)| c.0) as fn((f64, f64)) -> f64),
        ("sharpness_vs_radius.csv", |c: (f64, f64)| c.1),
    ] {
        let path = dir.join(name);
        write_atomic(&path, |w| {
            writeln!(w, "r_mm,{}", methods.join(","))?;
            for (ri, r) in radii.iter().enumerate() {
                write!(w, "{r}")?;
                for mi in 0..methods.len() {
                    match cells.get(&(ri, mi)) {
                        Some(&c) => write!(w, ",{}", pick(c))?,
                        None => write!(w, ",")?,
                    }
                }
                writeln!(w)?;
            }
            Ok(())
        })?;
        files.push(path);
    }
    Ok(files)
}

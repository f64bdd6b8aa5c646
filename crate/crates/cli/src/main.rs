//! Command-line front end for the stepped-frequency imaging pipeline.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sfdort::config::{Methods, RunConfig, PAPER_DEFAULTS_TOML};
use sfdort::forward::SpectrumVector;
use sfdort::metrics::{read_results, write_results};
use sfdort::pipeline::{self, write_atomic};
use sfdort::Error;

/// Overrides the configured output directory (a `--out` flag still wins).
const OUTPUT_ENV: &str = "SFDORT_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "sfdort", version, about = "Stepped-frequency time-reversal imaging beside a wall")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the received spectrum and write spectrum.csv.
    Simulate(Common),
    /// Form images from an existing spectrum file.
    Image {
        #[command(flatten)]
        common: Common,
        /// Spectrum CSV (n,omega_rad_s,re,im) on the configured grid.
        #[arg(long)]
        spectrum: PathBuf,
    },
    /// Simulate, image and evaluate one scene.
    Run(Common),
    /// Repeat `run` for each target radius.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated radii in mm; replaces sweep.radii_mm.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Turn a results table into per-figure plot data.
    Plots {
        /// Results CSV written by `run` or `sweep`.
        #[arg(long)]
        results: PathBuf,
        /// Directory for the plot tables (defaults to the results file's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the paper-defaults manifest.
    Defaults,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tr,
    Dort,
    Both,
}

#[derive(Args)]
struct Common {
    /// TOML manifest; the paper defaults are used when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Set every target's radius (mm).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum)]
    methods: Option<MethodArg>,
    /// Enable noise at this SNR (dB).
    #[arg(long)]
    snr_db: Option<f64>,
    /// Noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock runtimes in result tables.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::paper_defaults(),
        };
        if let Ok(dir) = std::env::var(OUTPUT_ENV) {
            if !dir.is_empty() {
                cfg.output.dir = PathBuf::from(dir);
            }
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(r) = self.radius {
            cfg = cfg.with_radius(r);
        }
        if let Some(m) = self.methods {
            cfg.imaging.methods = match m {
                MethodArg::Tr => Methods::Tr,
                MethodArg::Dort => Methods::Dort,
                MethodArg::Both => Methods::Both,
            };
        }
        if let Some(snr) = self.snr_db {
            cfg.noise.enabled = true;
            cfg.noise.snr_db = snr;
        }
        if let Some(seed) = self.seed {
            cfg.noise.seed = seed;
        }
        if self.timing {
            cfg.output.record_timing = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_reports(reports: &[sfdort::metrics::EvalReport]) -> Result<(), Error> {
    let mut buf = Vec::new();
    write_results(&mut buf, reports)
        .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.load()?;
            let sv = pipeline::simulate(&cfg)?;
            let path = cfg.output.dir.join("spectrum.csv");
            write_atomic(&path, |w| sv.write_csv(w))?;
            println!("{}", path.display());
        }
        Command::Image { common, spectrum } => {
            let cfg = common.load()?;
            let sv = SpectrumVector::read_csv(open(&spectrum)?, cfg.grid()?)?;
            let out = pipeline::process(&cfg, sv)?;
            pipeline::write_run(&cfg, &out, &cfg.output.dir)?;
            print_reports(&out.reports)?;
        }
        Command::Run(common) => {
            let cfg = common.load()?;
            let (out, _) = pipeline::run_single(&cfg)?;
            print_reports(&out.reports)?;
        }
        Command::Sweep { common, radii } => {
            let mut cfg = common.load()?;
            if let Some(r) = radii {
                cfg.sweep.radii_mm = r;
                cfg.validate()?;
            }
            let out = pipeline::run_sweep(&cfg)?;
            print_reports(&out.reports)?;
            for f in &out.failures {
                eprintln!("sfdort: radius {} mm failed: {}", f.radius_mm, f.message);
            }
        }
        Command::Plots { results, out } => {
            let rows = read_results(open(&results)?)?;
            let dir = out.unwrap_or_else(|| {
                results.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
            });
            for f in pipeline::emit_plots(&rows, &dir)? {
                println!("{}", f.display());
            }
        }
        Command::Defaults => print!("{PAPER_DEFAULTS_TOML}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sfdort: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

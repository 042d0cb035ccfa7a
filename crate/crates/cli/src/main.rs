//! `phase-refinery` command-line front end.
//!
//! Exit codes: 0 on success, 1 when some data failed to process, 2 on usage
//! errors (bad flags, unreadable or invalid config, invalid dimensions).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use phase_refinery::analysis::{entropy_stability_study, StudyOptions, DEFAULT_BINS};
use phase_refinery::pipeline::domain_shift::{
    generate_domain_shift_dataset, reports_to_csv, run_domain_shift_experiment, AccuracyReport, ClassifierParams,
    DEFAULT_PER_DOMAIN,
};
use phase_refinery::pipeline::{ingest_image, luma, refine_batch};
use phase_refinery::spectral::{build_frequency_grid, build_kernel, build_lowpass, write_flat_f64};
use phase_refinery::{ColorPolicy, Error, ImageField, RefineryConfig};

#[derive(Debug, Parser)]
#[command(name = "phase-refinery", version, about = "Phase Stretch Transform data refinery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refine every image under a directory and write a manifest.
    Refine {
        /// Input directory, searched recursively.
        #[arg(long)]
        input: PathBuf,
        /// Output directory; input-relative paths are mirrored here.
        #[arg(long)]
        output: PathBuf,
        /// Refinery config file.
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: available cores).
        #[arg(long, env = "PHASE_REFINERY_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
        workers: Option<u32>,
    },
    /// Entropy of raw and refined images under six illumination levels.
    AnalyzeIllumination {
        /// Image to degrade (RGB is reduced to luma).
        #[arg(long)]
        image: PathBuf,
        /// Refinery config file.
        #[arg(long)]
        config: PathBuf,
        /// Histogram bins on [0, 1].
        #[arg(long, default_value_t = DEFAULT_BINS, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(2..))]
        bins: usize,
        /// Central fraction of the image analyzed, in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        crop: f64,
        /// CSV report path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the phase kernel or low-pass filter as a flat binary array.
    KernelExport {
        /// Grid height (at least 2).
        #[arg(long)]
        height: usize,
        /// Grid width (at least 2).
        #[arg(long)]
        width: usize,
        /// Refinery config file.
        #[arg(long)]
        config: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Which spectral array to export.
        #[arg(long, value_enum, default_value_t = What::Phase)]
        what: What,
    },
    /// Paired raw/refined runs of the synthetic domain-shift experiment.
    DomainShift {
        /// Number of seeds; seeds 0..N are used.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        /// Refinery config file.
        #[arg(long)]
        config: PathBuf,
        /// CSV report path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Phase,
    Lpf,
}

/// Error paired with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::DimensionTooSmall { .. }
            | Error::EmptyInput(_) => Self::usage(e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }
}

fn load_config(path: &Path) -> Result<RefineryConfig, Failure> {
    RefineryConfig::load(path).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::data(format!("writing {}: {e}", path.display())))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

fn cmd_refine(input: &Path, output: &Path, config: &Path, workers: Option<u32>) -> Result<ExitCode, Failure> {
    let config = load_config(config)?;
    let workers = match workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let manifest = refine_batch(input, output, &config, workers)?;
    let secs = manifest.wall_time.as_secs_f64();
    let throughput = if secs > 0.0 {
        manifest.total() as f64 / secs
    } else {
        0.0
    };
    println!("processed={} failed={}", manifest.processed(), manifest.failures());
    println!("workers={workers} seconds={secs:.6} images_per_sec={throughput:.6}");
    for record in manifest.records.iter().filter(|r| r.is_failure()) {
        eprintln!("failed: {}", record.input.display());
    }
    Ok(if manifest.failures() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_analyze(image: &Path, config: &Path, bins: usize, crop: f64, out: &Path) -> Result<ExitCode, Failure> {
    let config = load_config(config)?;
    if !(crop > 0.0 && crop <= 1.0) {
        return Err(Failure::usage(format!("--crop must be in (0, 1], got {crop}")));
    }
    let channels = ingest_image(image, ColorPolicy::Luma)?;
    let field: ImageField = match channels.fields() {
        [gray] => gray.clone(),
        [r, g, b] => luma(r, g, b),
        _ => unreachable!("ingest yields one or three channels"),
    };
    let options = StudyOptions {
        bins,
        crop,
        ..Default::default()
    };
    let report = entropy_stability_study(&field, &config, options)?;
    write_file(out, report.to_csv().as_bytes())?;
    println!("raw_std={:.6} refined_std={:.6}", report.raw_std, report.refined_std);
    let flagged: Vec<String> = report.flagged_levels().iter().map(u8::to_string).collect();
    println!(
        "flagged_levels={}",
        if flagged.is_empty() {
            "none".to_string()
        } else {
            flagged.join(",")
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_kernel_export(height: usize, width: usize, config: &Path, out: &Path, what: What) -> Result<ExitCode, Failure> {
    let config = load_config(config)?;
    let grid = build_frequency_grid(height, width)?;
    let values = match what {
        What::Phase => build_kernel(&grid, &config.kernel)?.phi().to_vec(),
        What::Lpf => build_lowpass(&grid, config.kernel.sigma_lpf())?.gain().to_vec(),
    };
    let mut bytes = Vec::with_capacity(16 + 8 * values.len());
    write_flat_f64(&mut bytes, height, width, &values).map_err(|e| Failure::data(e.to_string()))?;
    write_file(out, &bytes)?;
    let max = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    println!("height={height} width={width} max={max:.6}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_domain_shift(seeds: u64, config: &Path, out: &Path) -> Result<ExitCode, Failure> {
    let config = load_config(config)?;
    let params = ClassifierParams::default();
    let mut reports: Vec<AccuracyReport> = Vec::with_capacity(2 * seeds as usize);
    for seed in 0..seeds {
        let dataset = generate_domain_shift_dataset(seed, DEFAULT_PER_DOMAIN)?;
        for refined in [false, true] {
            let r = run_domain_shift_experiment(&dataset, refined, &config, &params)?;
            println!(
                "seed={} refined={} train_acc={:.6} id_val_acc={:.6} ood_acc={:.6}",
                r.seed, r.refined, r.train_acc, r.id_val_acc, r.ood_acc
            );
            reports.push(r);
        }
    }
    write_file(out, reports_to_csv(&reports).as_bytes())?;
    for refined in [false, true] {
        let ood: Vec<f64> = reports.iter().filter(|r| r.refined == refined).map(|r| r.ood_acc).collect();
        let (mean, std) = mean_std(&ood);
        let arm = if refined { "refined" } else { "unrefined" };
        println!("{arm} ood_acc mean={mean:.6} std={std:.6}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Refine {
            input,
            output,
            config,
            workers,
        } => cmd_refine(input, output, config, *workers),
        Command::AnalyzeIllumination {
            image,
            config,
            bins,
            crop,
            out,
        } => cmd_analyze(image, config, *bins, *crop, out),
        Command::KernelExport {
            height,
            width,
            config,
            out,
            what,
        } => cmd_kernel_export(*height, *width, config, out, *what),
        Command::DomainShift { seeds, config, out } => cmd_domain_shift(*seeds, config, out),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::analysis::{shannon_entropy_of, DEFAULT_BINS, DEFAULT_DROP_FRACTION};
use crate::config::RefineryConfig;
use crate::error::{Error, Result};
use crate::transform::Refinery;

use super::ingest::{encode_png, ingest_image};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// File extensions picked up from the input tree (case-insensitive).
pub const INPUT_EXTENSIONS: [&str; 9] = ["png", "tif", "tiff", "bmp", "pgm", "ppm", "pnm", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Refined {
        output: PathBuf,
        output_digest: String,
        pre_entropy_bits: f64,
        post_entropy_bits: f64,
        defect: bool,
    },
    Failed {
        reason: String,
    },
}

/// One input image. Paths are relative to the batch input/output roots.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub input: PathBuf,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl ImageRecord {
    pub fn is_failure(&self) -> bool {
        matches!(self.outcome, Outcome::Failed { .. })
    }
}

#[derive(Debug, Clone)]
pub struct BatchManifest {
    pub config: RefineryConfig,
    pub config_digest: String,
    /// Sorted by input path.
    pub records: Vec<ImageRecord>,
    pub wall_time: Duration,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine<'a> {
    kind: &'a str,
    config_digest: &'a str,
    config: &'a str,
    total_images: usize,
    failures: usize,
}

#[derive(Serialize, Deserialize)]
struct RecordLine<'a> {
    kind: &'a str,
    input: String,
    config_digest: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_digest: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pre_entropy_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    post_entropy_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    defect: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

fn slash_path(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

impl BatchManifest {
    pub fn total(&self) -> usize {
        self.records.len()
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.is_failure()).count()
    }

    pub fn processed(&self) -> usize {
        self.total() - self.failures()
    }

    fn lines(&self, with_timing: bool) -> Vec<String> {
        let config_text = self.config.to_config_string();
        let header = HeaderLine {
            kind: "header",
            config_digest: &self.config_digest,
            config: &config_text,
            total_images: self.total(),
            failures: self.failures(),
        };
        let mut lines = vec![serde_json::to_string(&header).expect("header serializes")];
        for rec in &self.records {
            let elapsed_ms = with_timing.then_some(rec.elapsed.as_secs_f64() * 1e3);
            let line = match &rec.outcome {
                Outcome::Refined {
                    output,
                    output_digest,
                    pre_entropy_bits,
                    post_entropy_bits,
                    defect,
                } => RecordLine {
                    kind: "record",
                    input: slash_path(&rec.input),
                    config_digest: &self.config_digest,
                    output: Some(slash_path(output)),
                    output_digest: Some(output_digest),
                    pre_entropy_bits: Some(*pre_entropy_bits),
                    post_entropy_bits: Some(*post_entropy_bits),
                    defect: Some(*defect),
                    error: None,
                    elapsed_ms,
                },
                Outcome::Failed { reason } => RecordLine {
                    kind: "failure",
                    input: slash_path(&rec.input),
                    config_digest: &self.config_digest,
                    output: None,
                    output_digest: None,
                    pre_entropy_bits: None,
                    post_entropy_bits: None,
                    defect: None,
                    error: Some(reason),
                    elapsed_ms,
                },
            };
            lines.push(serde_json::to_string(&line).expect("record serializes"));
        }
        lines
    }

    /// JSON-lines manifest: a header line, then one line per input.
    pub fn to_jsonl(&self) -> String {
        let mut out = self.lines(true).join("\n");
        out.push('\n');
        out
    }

    /// SHA-256 over the manifest with timing fields left out; equal for any
    /// two runs that produced the same outputs under the same config.
    pub fn payload_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for line in self.lines(false) {
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

fn is_candidate(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| INPUT_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
        .unwrap_or(false)
}

/// Candidate inputs under `root`, relative and sorted. `skip` (typically the
/// output directory) is not descended into.
pub fn collect_inputs(root: &Path, skip: Option<&Path>) -> Result<Vec<PathBuf>> {
    let skip = skip.and_then(|p| p.canonicalize().ok());
    let mut found = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| match &skip {
            Some(s) => e.path().canonicalize().map(|p| &p != s).unwrap_or(true),
            None => true,
        });
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
            Error::io(path, e.into())
        })?;
        if entry.file_type().is_file() && is_candidate(entry.path()) {
            let rel = entry.path().strip_prefix(root).expect("walk stays under root").to_path_buf();
            found.push(rel);
        }
    }
    found.sort();
    Ok(found)
}

fn output_name(input: &Path) -> PathBuf {
    input.with_extension("png")
}

struct Job {
    input: PathBuf,
    output: PathBuf,
    collides_with: Option<PathBuf>,
}

fn refine_one(refinery: &mut Refinery, input_root: &Path, output_root: &Path, job: &Job) -> Outcome {
    if let Some(first) = &job.collides_with {
        return Outcome::Failed {
            reason: format!("output path {} already produced by {}", slash_path(&job.output), slash_path(first)),
        };
    }
    let config = *refinery.config();
    let mut run = || -> Result<Outcome> {
        let channels = ingest_image(input_root.join(&job.input), config.color_policy)?;
        let refined = channels
            .fields()
            .iter()
            .map(|f| refinery.refine(f))
            .collect::<Result<Vec<_>>>()?;
        let pre = shannon_entropy_of(channels.samples(), DEFAULT_BINS)?;
        let post = shannon_entropy_of(refined.iter().flat_map(|f| f.values().iter().copied()), DEFAULT_BINS)?;
        let bytes = encode_png(&refined, config.output_bit_depth)?;
        let dest = output_root.join(&job.output);
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&dest, &bytes).map_err(|e| Error::io(&dest, e))?;
        Ok(Outcome::Refined {
            output: job.output.clone(),
            output_digest: hex::encode(Sha256::digest(&bytes)),
            pre_entropy_bits: pre,
            post_entropy_bits: post,
            defect: post < DEFAULT_DROP_FRACTION * pre,
        })
    };
    run().unwrap_or_else(|e| Outcome::Failed { reason: e.to_string() })
}

/// Refines every image under `input_dir` with one shared config and writes
/// the results, mirrored, under `output_dir` together with
/// [`MANIFEST_NAME`].
///
/// Failures are recorded per image and never abort the batch. Output bytes
/// and record order do not depend on `workers`.
pub fn refine_batch(
    input_dir: impl AsRef<Path>,
    output_dir: impl AsRef<Path>,
    config: &RefineryConfig,
    workers: usize,
) -> Result<BatchManifest> {
    let input_dir = input_dir.as_ref();
    let output_dir = output_dir.as_ref();
    let started = Instant::now();

    std::fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let inputs = collect_inputs(input_dir, Some(output_dir))?;
    if inputs.is_empty() {
        return Err(Error::EmptyInput(input_dir.to_path_buf()));
    }

    let mut claimed: HashMap<PathBuf, PathBuf> = HashMap::new();
    let jobs: Vec<Job> = inputs
        .into_iter()
        .map(|input| {
            let output = output_name(&input);
            let collides_with = claimed.get(&output).cloned();
            if collides_with.is_none() {
                claimed.insert(output.clone(), input.clone());
            }
            Job {
                input,
                output,
                collides_with,
            }
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let records: Vec<ImageRecord> = pool.install(|| {
        jobs.par_iter()
            .map_init(
                || Refinery::new(*config),
                |refinery, job| {
                    let t0 = Instant::now();
                    let outcome = refine_one(refinery, input_dir, output_dir, job);
                    ImageRecord {
                        input: job.input.clone(),
                        outcome,
                        elapsed: t0.elapsed(),
                    }
                },
            )
            .collect()
    });

    let manifest = BatchManifest {
        config: *config,
        config_digest: config.digest(),
        records,
        wall_time: started.elapsed(),
    };
    let path = output_dir.join(MANIFEST_NAME);
    std::fs::write(&path, manifest.to_jsonl()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

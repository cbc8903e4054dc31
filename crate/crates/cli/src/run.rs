//! Run directories and metadata.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::{self, Outputs};
use crate::config::parse_config;
use crate::{CliError, Command};

const DEFAULT_OUTPUT_DIR: &str = "runs";

#[derive(Serialize)]
struct Timings {
    compute_seconds: f64,
    total_seconds: f64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    core_version: &'a str,
    config: &'a serde_json::Value,
    config_hash: &'a str,
    threads: usize,
    timestamp: String,
    timings: Timings,
    outputs: Vec<&'a str>,
    summary: &'a serde_json::Value,
}

/// SHA-256 of the config with keys in sorted order, so that formatting and
/// key order in the file do not matter.
pub fn config_hash(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_vec(value).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical))
}

pub fn execute(
    command: Command,
    config_path: &Path,
    out: Option<&Path>,
    threads: Option<usize>,
) -> Result<PathBuf, CliError> {
    let started = Instant::now();
    let text = fs::read_to_string(config_path).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", config_path.display()))
    })?;
    let (config, value) = parse_config(&text)?;

    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let compute_start = Instant::now();
    let Outputs {
        files,
        summary,
        stdout,
    } = commands::run(command, &config)?;
    let compute_seconds = compute_start.elapsed().as_secs_f64();

    let hash = config_hash(&value);
    let parent = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or(DEFAULT_OUTPUT_DIR.into());
    let dir = parent.join(format!("{}-{}", command.name(), &hash[..16]));
    fs::create_dir_all(&dir)?;
    for (name, bytes) in &files {
        fs::write(dir.join(name), bytes)?;
    }
    let metadata = Metadata {
        command: command.name(),
        version: env!("CARGO_PKG_VERSION"),
        core_version: lattice_lab::VERSION,
        config: &value,
        config_hash: &hash,
        threads: rayon::current_num_threads(),
        timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        timings: Timings {
            compute_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        },
        outputs: files.iter().map(|(n, _)| n.as_str()).collect(),
        summary: &summary,
    };
    fs::write(
        dir.join("metadata.json"),
        serde_json::to_vec_pretty(&metadata)?,
    )?;
    if let Some(text) = stdout {
        println!("{text}");
    }
    Ok(dir)
}

use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Sidecar describing how an artifact was produced. Everything outside
/// `run` is reproducible from the argv alone.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: &'static str,
    pub library_version: &'static str,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub run: RunTiming,
}

#[derive(Debug, Serialize)]
pub struct RunTiming {
    pub started_unix_seconds: f64,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(
        subcommand: &'static str,
        seed: Option<u64>,
        parameters: serde_json::Value,
        started: SystemTime,
        elapsed: Duration,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            subcommand,
            library_version: env!("CARGO_PKG_VERSION"),
            seed,
            parameters,
            run: RunTiming {
                started_unix_seconds: started
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs_f64())
                    .unwrap_or(0.0),
                duration_seconds: elapsed.as_secs_f64(),
            },
        }
    }
}

/// `--manifest` if given, else `<out>.manifest.json` next to the artifact.
pub fn manifest_path(out: Option<&Path>, explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    out.map(|o| {
        let mut name = o.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    })
}

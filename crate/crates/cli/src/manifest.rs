use std::fmt::Write as _;
use std::path::Path;

use chrono::{SecondsFormat, Utc};

use crate::error::CliError;

/// What was run, with which inputs, by which build, and when. Written as
/// manifest.txt next to every output set.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: &'static str,
    /// The full argument vector; re-running it with the same build
    /// reproduces the data files.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    /// Effective settings after defaults, as key/value pairs.
    pub config: Vec<(String, String)>,
    pub started: String,
    pub finished: String,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &'static str, argv: &[String]) -> Self {
        Self {
            command,
            argv: argv.to_vec(),
            seed: None,
            config: Vec::new(),
            started: timestamp(),
            finished: String::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        let _ = writeln!(out, "version: {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "argv: {}", self.argv.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        for (k, v) in &self.config {
            let _ = writeln!(out, "config.{k}: {v}");
        }
        let _ = writeln!(out, "started: {}", self.started);
        let _ = writeln!(out, "finished: {}", self.finished);
        out
    }

    /// Stamp the end time and write `dir/manifest.txt`.
    pub fn finish(self, dir: &Path) -> Result<(), CliError> {
        self.finish_to(&dir.join("manifest.txt"))
    }

    pub fn finish_to(mut self, path: &Path) -> Result<(), CliError> {
        self.finished = timestamp();
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}

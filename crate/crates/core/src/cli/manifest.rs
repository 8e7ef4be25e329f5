//! Flat `key=value` record of what a run read and wrote.

use std::fmt::Write as _;
use std::path::Path;
use std::time::SystemTime;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    /// SHA-256 of the configuration file bytes, lowercase hex.
    pub config_sha256: String,
    pub seed: u64,
    pub samples: u64,
    pub threads: usize,
    pub version: String,
    pub started: SystemTime,
    pub finished: SystemTime,
    /// File names relative to the output directory, in write order.
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &str| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("tool", "odtsim");
        kv("version", &self.version);
        kv("command", &self.command);
        kv("config_path", &self.config_path);
        kv("config_sha256", &self.config_sha256);
        kv("seed", &self.seed.to_string());
        kv("samples", &self.samples.to_string());
        kv("threads", &self.threads.to_string());
        kv("started_utc", &humantime::format_rfc3339_millis(self.started).to_string());
        kv("finished_utc", &humantime::format_rfc3339_millis(self.finished).to_string());
        for o in &self.outputs {
            kv("output", o);
        }
        out
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join("manifest.txt"), self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn render_is_flat_key_value() {
        let m = RunManifest {
            command: "vtab".into(),
            config_path: "c.toml".into(),
            config_sha256: sha256_hex(b""),
            seed: 7,
            samples: 100,
            threads: 2,
            version: "0.1.0".into(),
            started: SystemTime::UNIX_EPOCH,
            finished: SystemTime::UNIX_EPOCH,
            outputs: vec!["a.csv".into(), "b.csv".into()],
        };
        let text = m.render();
        assert!(text.lines().all(|l| l.split_once('=').is_some()));
        assert!(text.contains("seed=7\n"));
        assert!(text.contains("started_utc=1970-01-01T00:00:00.000Z\n"));
        assert_eq!(text.matches("output=").count(), 2);
    }
}

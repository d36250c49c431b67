//! Run manifests: every file-producing run records its resolved settings
//! and input digests next to its primary output, as `<output>.manifest`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::Result;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[derive(Debug)]
pub struct Manifest {
    entries: Vec<(String, String)>,
    started: Instant,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Manifest {
        let mut m = Manifest {
            entries: Vec::new(),
            started: Instant::now(),
        };
        m.set("tool_version", env!("CARGO_PKG_VERSION"));
        m.set("subcommand", subcommand);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Records the FNV-1a digest of an input file.
    pub fn input(&mut self, label: &str, path: &Path) -> Result<()> {
        let digest = fnv1a64(&fs::read(path)?);
        self.set(&format!("input.{label}"), path.display());
        self.set(&format!("input.{label}.fnv1a"), format!("{digest:016x}"));
        Ok(())
    }

    /// Writes `<primary>.manifest` with the wall-clock duration appended.
    pub fn write_next_to(mut self, primary: &Path) -> Result<PathBuf> {
        self.set(
            "duration_ms",
            self.started.elapsed().as_millis().to_string(),
        );
        let mut path = primary.as_os_str().to_owned();
        path.push(".manifest");
        let path = PathBuf::from(path);
        let mut out = fs::File::create(&path)?;
        for (k, v) in &self.entries {
            writeln!(out, "{k}\t{v}")?;
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_known_vectors() {
        // reference values for the 64-bit FNV-1a parameters
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn writes_key_value_lines() {
        let dir = tempfile::tempdir().unwrap();
        let primary = dir.path().join("out.tsv");
        fs::write(&primary, "x").unwrap();
        let mut m = Manifest::new("test");
        m.set("namespace", "MFO");
        m.input("data", &primary).unwrap();
        let path = m.write_next_to(&primary).unwrap();
        assert_eq!(path, dir.path().join("out.tsv.manifest"));
        let text = fs::read_to_string(path).unwrap();
        assert!(text.contains("subcommand\ttest"));
        assert!(text.contains("namespace\tMFO"));
        assert!(text.contains("input.data.fnv1a\t"));
        assert!(text.contains("duration_ms\t"));
    }
}

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use herglotz_core::Complex64;
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

/// Bad flags, malformed JSON, unreadable files: exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// A point with one complex coordinate per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<Complex64>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|part| {
                let t: String = part.chars().filter(|c| !c.is_whitespace()).collect();
                Complex64::from_str(&t).map_err(|_| format!("cannot parse {part:?} as a complex number (try 0.3+0.1i)"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Point)
    }
}

/// Flags whose values are output locations; they do not feed the digest.
const OUTPUT_FLAGS: [&str; 3] = ["--out", "--report", "--plot-dir"];

/// Loads inputs and hashes everything a run depends on.
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn new(argv: &[String]) -> Self {
        let mut hasher = Sha256::new();
        let mut skip = false;
        for arg in argv.iter().skip(1) {
            if skip {
                skip = false;
                continue;
            }
            if OUTPUT_FLAGS.contains(&arg.as_str()) {
                skip = true;
                continue;
            }
            if OUTPUT_FLAGS.iter().any(|f| arg.starts_with(&format!("{f}="))) {
                continue;
            }
            hasher.update(arg.as_bytes());
            hasher.update([0u8]);
        }
        Inputs { hasher }
    }

    pub fn digest(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }

    pub fn bytes(&mut self, path: &Path) -> anyhow::Result<Vec<u8>> {
        let data = std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        self.hasher.update(&data);
        Ok(data)
    }

    /// Inline JSON (starting with `{` or `[`) or the contents of a file, with
    /// a label for error messages.
    pub fn text(&mut self, flag: &str, arg: &str) -> anyhow::Result<(String, String)> {
        let trimmed = arg.trim_start();
        if trimmed.starts_with('{') || trimmed.starts_with('[') {
            return Ok((format!("--{flag} (inline)"), arg.to_string()));
        }
        let data = self.bytes(Path::new(arg))?;
        let text = String::from_utf8(data).map_err(|_| usage(format!("{arg}: not UTF-8")))?;
        Ok((arg.to_string(), text))
    }

    pub fn json<T: DeserializeOwned>(&mut self, flag: &str, arg: &str) -> anyhow::Result<T> {
        let (source, text) = self.text(flag, arg)?;
        parse(&source, &text)
    }
}

pub fn parse<T: DeserializeOwned>(source: &str, text: &str) -> anyhow::Result<T> {
    serde_json::from_str(text).map_err(|e| {
        if e.line() == 0 {
            usage(format!("malformed JSON in {source}: {e}"))
        } else {
            usage(format!("malformed JSON in {source} at line {} column {}: {e}", e.line(), e.column()))
        }
    })
}

/// Whether a JSON document is an object with the given key.
pub fn has_key(source: &str, text: &str, key: &str) -> anyhow::Result<bool> {
    let v: serde_json::Value = parse(source, text)?;
    Ok(v.get(key).is_some())
}

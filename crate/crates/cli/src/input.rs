use std::path::Path;

use flagpde::scalar::{parse_rational, Rational};
use serde::de::DeserializeOwned;
use serde_path_to_error::Segment;

use crate::report::{CliResult, Failure, InputDigest};

/// Reads input files and folds their bytes into the run digest.
pub struct Inputs {
    pub digest: InputDigest,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        self.digest.add(text.as_bytes());
        Ok(text)
    }

    /// Parses a JSON file, reporting the JSON pointer of the first mismatch.
    pub fn json<T: DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let text = self.read(path)?;
        parse_json(&text).map_err(|f| match f {
            Failure::Input { message, pointer } => Failure::Input {
                message: format!("{}: {message}", path.display()),
                pointer,
            },
            other => other,
        })
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        Failure::at(e.inner().to_string(), pointer)
    })
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

pub fn list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::input(format!("{what}: cannot parse {s:?}")))
        })
        .collect()
}

pub fn rational(text: &str, what: &str) -> CliResult<Rational> {
    parse_rational(text).map_err(|e| Failure::input(format!("{what}: {e}")))
}

/// `"3x3x3"` to `[3, 3, 3]`.
pub fn grid_counts(text: &str) -> CliResult<Vec<usize>> {
    text.split('x')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| Failure::input(format!("grid: bad count {s:?} in {text:?}")))
        })
        .collect()
}

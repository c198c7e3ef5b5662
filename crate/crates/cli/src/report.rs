use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Exit code for malformed or inconsistent input.
pub const EXIT_INPUT: i32 = 2;
/// Exit code when a computed result fails its own check.
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Input {
        message: String,
        pointer: Option<String>,
    },
    Verification(String),
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure::Input {
            message: message.into(),
            pointer: None,
        }
    }

    pub fn at(message: impl Into<String>, pointer: impl Into<String>) -> Self {
        Failure::Input {
            message: message.into(),
            pointer: Some(pointer.into()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input { .. } => EXIT_INPUT,
            Failure::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input {
                message,
                pointer: Some(p),
            } => write!(f, "invalid input at {p}: {message}"),
            Failure::Input { message, .. } => write!(f, "invalid input: {message}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<flagpde::Error> for Failure {
    fn from(e: flagpde::Error) -> Self {
        use flagpde::Error as E;
        match e {
            E::Verification(_)
            | E::NotSingular { .. }
            | E::SplittingMismatch { .. }
            | E::RightInverse(_)
            | E::SeriesDidNotNilpotate { .. }
            | E::YSeriesNotConverging(_) => Failure::Verification(e.to_string()),
            other => Failure::input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn pass(name: &str, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed: true,
            value: None,
            tolerance: None,
            detail: Some(detail.into()),
        }
    }

    /// `value <= tolerance`.
    pub fn bound(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            passed: value <= tolerance,
            value: Some(value),
            tolerance: Some(tolerance),
            detail: None,
        }
    }

    /// Reported but not enforced.
    pub fn info(name: &str, value: f64, detail: &str) -> Self {
        Check {
            name: name.to_string(),
            passed: true,
            value: Some(value),
            tolerance: None,
            detail: Some(detail.to_string()),
        }
    }
}

/// What a command produced, before it is written out.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    pub checks: Vec<Check>,
    /// Extra keys merged into the verification block.
    pub extra: Map<String, Value>,
}

impl Outcome {
    pub fn new(result: Value, checks: Vec<Check>) -> Self {
        Outcome {
            result,
            csv: None,
            checks,
            extra: Map::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub outputs: Option<String>,
    pub verification: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
}

pub fn verification_block(outcome: &Outcome) -> Value {
    let mut block = Map::new();
    block.insert("passed".into(), Value::Bool(outcome.passed()));
    block.insert(
        "checks".into(),
        serde_json::to_value(&outcome.checks).expect("checks serialize"),
    );
    for (k, v) in &outcome.extra {
        block.insert(k.clone(), v.clone());
    }
    Value::Object(block)
}

/// SHA-256 over the argument list and every input file, in the order read.
#[derive(Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn new(args: &[String]) -> Self {
        let mut d = InputDigest::default();
        for a in args {
            d.hasher.update(a.as_bytes());
            d.hasher.update([0]);
        }
        d
    }

    pub fn add(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

//! Verification reports and their text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::json;
use crate::scenario::{self, CheckName, Scenario};

pub const REPORT_SCHEMA: u32 = 1;
pub const TOOL: &str = "jmarkov";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Exact certificate.
    Pass,
    /// No counterexample among seeded samples.
    PassSampled,
    Fail,
    /// A dependency did not pass; counts as a failure.
    Skipped,
    /// The check could not be evaluated; counts as a failure.
    Error,
}

impl Outcome {
    pub fn passed(self) -> bool {
        matches!(self, Outcome::Pass | Outcome::PassSampled)
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::PassSampled => "PASS~",
            Outcome::Fail => "FAIL",
            Outcome::Skipped => "SKIP",
            Outcome::Error => "ERROR",
        }
    }
}

impl From<jmarkov::Verdict> for Outcome {
    fn from(v: jmarkov::Verdict) -> Self {
        match v {
            jmarkov::Verdict::Holds => Outcome::Pass,
            jmarkov::Verdict::HoldsSampled => Outcome::PassSampled,
            jmarkov::Verdict::Fails => Outcome::Fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: CheckName,
    pub verdict: Outcome,
    pub method: String,
    pub deviations: BTreeMap<String, f64>,
    pub witnesses: Vec<Value>,
    /// Computed objects worth reporting, such as kernel matrices.
    pub data: BTreeMap<String, Value>,
    pub message: Option<String>,
    /// Set whenever the verdict rests on sampling.
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub timing_ms: f64,
}

impl CheckRecord {
    pub fn new(name: CheckName, verdict: Outcome, method: &str) -> Self {
        Self {
            name,
            verdict,
            method: method.to_string(),
            deviations: BTreeMap::new(),
            witnesses: Vec::new(),
            data: BTreeMap::new(),
            message: None,
            seed: None,
            samples: None,
            timing_ms: 0.0,
        }
    }

    pub fn skipped(name: CheckName, reason: impl Into<String>) -> Self {
        let mut r = Self::new(name, Outcome::Skipped, "none");
        r.message = Some(reason.into());
        r
    }

    pub fn error(name: CheckName, err: impl std::fmt::Display) -> Self {
        let mut r = Self::new(name, Outcome::Error, "none");
        r.message = Some(err.to_string());
        r
    }

    pub fn deviation(mut self, key: &str, value: f64) -> Self {
        self.deviations.insert(key.to_string(), value);
        self
    }

    pub fn datum(mut self, key: &str, value: Value) -> Self {
        self.data.insert(key.to_string(), value);
        self
    }

    pub fn sampled(mut self, sampling: jmarkov::Sampling) -> Self {
        self.seed = Some(sampling.seed);
        self.samples = Some(sampling.samples);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    /// sha256 of the canonical scenario text.
    pub input_digest: String,
    pub overall: Overall,
    pub checks: Vec<CheckRecord>,
}

pub fn digest(s: &Scenario) -> String {
    let hash = Sha256::digest(scenario::emit(s).as_bytes());
    format!("sha256:{}", hex::encode(hash))
}

impl Report {
    pub fn new(scenario: &Scenario, checks: Vec<CheckRecord>) -> Self {
        let overall = if checks.iter().all(|c| c.verdict.passed()) {
            Overall::Pass
        } else {
            Overall::Fail
        };
        Self {
            schema: REPORT_SCHEMA,
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            input_digest: digest(scenario),
            overall,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Overall::Pass
    }

    /// Zeroes timings, the only nondeterministic field.
    pub fn without_timings(mut self) -> Self {
        for c in &mut self.checks {
            c.timing_ms = 0.0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        json::canonical(&serde_json::to_value(self).expect("report serializes"))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}  input {}", self.tool, self.version, self.input_digest);
        for c in &self.checks {
            let _ = write!(out, "{:<6} {:<22} method={}", c.verdict.label(), c.name.as_str(), c.method);
            if let (Some(seed), Some(n)) = (c.seed, c.samples) {
                let _ = write!(out, " seed={seed} samples={n}");
            }
            let _ = writeln!(out, " ({:.1} ms)", c.timing_ms);
            if let Some(m) = &c.message {
                let _ = writeln!(out, "       {m}");
            }
            for (k, v) in &c.deviations {
                let _ = writeln!(out, "       {k} = {v:.3e}");
            }
            for (k, v) in &c.data {
                let _ = writeln!(out, "       {k}: {}", serde_json::to_string(v).expect("json"));
            }
            for w in &c.witnesses {
                let _ = writeln!(out, "       witness: {}", serde_json::to_string(w).expect("json"));
            }
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

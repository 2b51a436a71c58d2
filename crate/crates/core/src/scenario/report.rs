use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Pass condition of a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Bound {
    /// `measured <= limit`
    Below { limit: f64 },
    /// `measured >= limit`
    AtLeast { limit: f64 },
    /// `|measured - target| <= tol`
    Within { target: f64, tol: f64 },
}

impl Bound {
    pub fn below(limit: f64) -> Self {
        Bound::Below { limit }
    }

    pub fn at_least(limit: f64) -> Self {
        Bound::AtLeast { limit }
    }

    pub fn within(target: f64, tol: f64) -> Self {
        Bound::Within { target, tol }
    }

    pub fn holds(&self, x: f64) -> bool {
        match *self {
            Bound::Below { limit } => x <= limit,
            Bound::AtLeast { limit } => x >= limit,
            Bound::Within { target, tol } => (x - target).abs() <= tol,
        }
    }

    /// Fraction of the allowance used; at most one when the bound holds.
    pub fn margin(&self, x: f64) -> f64 {
        let m = match *self {
            Bound::Below { limit } => x / limit,
            Bound::AtLeast { limit } => limit / x,
            Bound::Within { target, tol } => (x - target).abs() / tol,
        };
        if m.is_nan() {
            if self.holds(x) {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            m
        }
    }
}

/// One named measurement, or a group of them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// What the check exercises.
    pub topic: String,
    pub measured: f64,
    pub bound: Bound,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Check>,
}

impl Check {
    pub fn new(name: impl Into<String>, topic: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Check {
            name: name.into(),
            topic: topic.into(),
            measured,
            passed: bound.holds(measured),
            bound,
            note: None,
            parts: Vec::new(),
        }
    }

    /// A check that could not be measured.
    pub fn failed(name: impl Into<String>, topic: impl Into<String>, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            topic: topic.into(),
            measured: f64::NAN,
            bound: Bound::below(0.0),
            passed: false,
            note: Some(note.into()),
            parts: Vec::new(),
        }
    }

    /// Group whose measured value is the largest margin among its parts.
    pub fn group(name: impl Into<String>, topic: impl Into<String>, parts: Vec<Check>) -> Self {
        let worst = parts.iter().map(|c| c.bound.margin(c.measured)).fold(0.0, f64::max);
        Check {
            name: name.into(),
            topic: topic.into(),
            measured: worst,
            bound: Bound::below(1.0),
            passed: !parts.is_empty() && parts.iter().all(|c| c.passed),
            note: None,
            parts,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Turns an error from the measurement into a failed check.
    pub fn from_result(name: &str, topic: &str, r: Result<Check>) -> Check {
        r.unwrap_or_else(|e| Check::failed(name, topic, e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Files written next to the report, relative to the output directory.
    pub outputs: Vec<String>,
}

impl VerificationReport {
    pub fn new(scenario: impl Into<String>, seed: u64, checks: Vec<Check>, outputs: Vec<String>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerificationReport { scenario: scenario.into(), seed, passed, checks, outputs }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One line per check, indented by nesting depth.
    pub fn to_text(&self, detailed: bool) -> String {
        fn line(out: &mut String, c: &Check, depth: usize, detailed: bool) {
            let bound = match c.bound {
                Bound::Below { limit } => format!("<= {limit:e}"),
                Bound::AtLeast { limit } => format!(">= {limit:e}"),
                Bound::Within { target, tol } => format!("{target} ± {tol:e}"),
            };
            out.push_str(&format!(
                "{}[{}] {}: {:.6e} ({bound})",
                "  ".repeat(depth),
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.measured
            ));
            if let Some(n) = &c.note {
                out.push_str(&format!(" {n}"));
            }
            out.push('\n');
            if detailed || !c.passed {
                for p in &c.parts {
                    line(out, p, depth + 1, detailed);
                }
            }
        }
        let mut out = format!("scenario {} (seed {})\n", self.scenario, self.seed);
        for c in &self.checks {
            line(&mut out, c, 1, detailed);
        }
        out.push_str(if self.passed { "overall: pass\n" } else { "overall: FAIL\n" });
        out
    }
}

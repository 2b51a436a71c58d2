//! Config-driven scenarios and the verification harness behind the CLI.

mod config;
mod expr;
mod report;
mod run;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{
    BoundaryName, CheckSpec, DispersionSpec, EvolutionSpec, FieldSpec, GridSpec, InitialSpec, IntegratorSpec,
    MethodName, MetricSpec, OutputSpec, ScenarioConfig, SystemSpec, TimeDerivative, WaveSpec, DEFAULT_SEED,
};
pub use expr::{coordinate_names, Expression};
pub use report::{Bound, Check, VerificationReport};
pub use run::{run_scenario, RunOptions, RunOutcome};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    ClassicalFree,
    ClassicalCharged,
    ClassicalCurved,
    ClassicalNonrel,
    KinematicsSuite,
    QuantizeVerify,
    SchrodingerRun,
    KleinGordonRun,
    #[default]
    FullVerify,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::ClassicalFree,
        ScenarioId::ClassicalCharged,
        ScenarioId::ClassicalCurved,
        ScenarioId::ClassicalNonrel,
        ScenarioId::KinematicsSuite,
        ScenarioId::QuantizeVerify,
        ScenarioId::SchrodingerRun,
        ScenarioId::KleinGordonRun,
        ScenarioId::FullVerify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::ClassicalFree => "classical-free",
            ScenarioId::ClassicalCharged => "classical-charged",
            ScenarioId::ClassicalCurved => "classical-curved",
            ScenarioId::ClassicalNonrel => "classical-nonrel",
            ScenarioId::KinematicsSuite => "kinematics-suite",
            ScenarioId::QuantizeVerify => "quantize-verify",
            ScenarioId::SchrodingerRun => "schrodinger-run",
            ScenarioId::KleinGordonRun => "klein-gordon-run",
            ScenarioId::FullVerify => "full-verify",
        }
    }

    /// The parts of the theory a scenario exercises.
    pub fn topics(self) -> &'static [&'static str] {
        match self {
            ScenarioId::ClassicalFree => &["free relativistic mass", "mass-shell constraint", "three-velocity"],
            ScenarioId::ClassicalCharged => &["relativistic charged particle", "gauge coupling", "cyclotron period"],
            ScenarioId::ClassicalCurved => &["geodesic motion", "pseudo-Riemannian metric", "constraint preservation"],
            ScenarioId::ClassicalNonrel => &["non-relativistic constraint p0 + H = 0", "lifted flow on T*Q"],
            ScenarioId::KinematicsSuite => {
                &["jet velocities", "Lorentz boosts", "unit hyperboloid", "free-mass Legendre map"]
            }
            ScenarioId::QuantizeVerify => {
                &["prequantization", "affine quantum algebra", "metaplectic correction", "half-densities"]
            }
            ScenarioId::SchrodingerRun => &["Schrödinger equation as quantum constraint", "unitarity"],
            ScenarioId::KleinGordonRun => &["Klein–Gordon equation as quantum constraint", "dispersion relation"],
            ScenarioId::FullVerify => &["every acceptance criterion"],
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| crate::Error::config("scenario", format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioListing {
    pub id: &'static str,
    pub topics: &'static [&'static str],
}

pub fn list_scenarios() -> Vec<ScenarioListing> {
    ScenarioId::ALL.into_iter().map(|id| ScenarioListing { id: id.name(), topics: id.topics() }).collect()
}

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use poslab_core::{Family, GroupSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(poslab_core::Error),
}

impl From<poslab_core::Error> for HarnessError {
    fn from(e: poslab_core::Error) -> Self {
        match e {
            poslab_core::Error::Capability(m) => HarnessError::Capability(m),
            e => HarnessError::Core(e),
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(std::io::Error::other(e))
    }
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Cocycle,
    Tensor,
    PeriodCharacter,
    TheoremA,
    PhotonPower,
    PhotonFiber,
    Bracket,
    Supmin,
    Collar,
    BaselineHyperbolic,
    CheckerVsSampler,
    ExactParity,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Cocycle,
        Suite::Tensor,
        Suite::PeriodCharacter,
        Suite::TheoremA,
        Suite::PhotonPower,
        Suite::PhotonFiber,
        Suite::Bracket,
        Suite::Supmin,
        Suite::Collar,
        Suite::BaselineHyperbolic,
        Suite::CheckerVsSampler,
        Suite::ExactParity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cocycle => "cocycle",
            Suite::Tensor => "tensor",
            Suite::PeriodCharacter => "period-character",
            Suite::TheoremA => "theoremA",
            Suite::PhotonPower => "photon-power",
            Suite::PhotonFiber => "photon-fiber",
            Suite::Bracket => "bracket",
            Suite::Supmin => "supmin",
            Suite::Collar => "collar",
            Suite::BaselineHyperbolic => "baseline-hyperbolic",
            Suite::CheckerVsSampler => "checker-vs-sampler",
            Suite::ExactParity => "exact-parity",
        }
    }

    pub fn supports_exact(self) -> bool {
        matches!(self, Suite::Cocycle | Suite::TheoremA | Suite::Bracket | Suite::ExactParity)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown suite {s:?}")))
    }
}

impl Serialize for Suite {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Suite {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Float,
    Exact,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Float => "float",
            Backend::Exact => "exact",
        })
    }
}

impl FromStr for Backend {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(Backend::Float),
            "exact" => Ok(Backend::Exact),
            _ => Err(HarnessError::Usage(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub spec: GroupSpec,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub backend: Backend,
    pub out: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite: Suite, spec: GroupSpec, samples: usize, seed: u64) -> Self {
        SuiteConfig { suite, spec, samples, seed, tol: 1e-10, backend: Backend::Float, out: None }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    /// Rejects malformed configurations and suite/group/backend combinations that are not
    /// implemented.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.samples == 0 {
            return Err(HarnessError::Usage("sample count must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(HarnessError::Usage(format!("tolerance {} must be positive", self.tol)));
        }
        if self.backend == Backend::Exact && !self.suite.supports_exact() {
            return Err(HarnessError::Capability(format!("suite {} has no exact backend", self.suite)));
        }
        let so = self.spec.family() == Family::SO;
        if so && matches!(self.suite, Suite::CheckerVsSampler | Suite::ExactParity) {
            return Err(HarnessError::Capability(format!("no tuple positivity checker for {}", self.spec)));
        }
        if so && self.backend == Backend::Exact && self.suite != Suite::Bracket {
            return Err(HarnessError::Capability(format!("no exact sampler for {}", self.spec)));
        }
        Ok(())
    }
}

//! The verification harness: a deterministic corpus of test functions, a
//! catalog of inequality suites mapping each bound to a pass/fail check with
//! measured ratios, the constants table, and report writers.

pub mod constants;
pub mod corpus;
pub mod report;
mod suites;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constants::{constants, ConstantsRow};
pub use corpus::{default_extents, default_weights, generate_corpus, CorpusFamily};
pub use report::{SuiteReport, TrialRecord};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite id `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` does not support dimension {dim}")]
    BadDimension { suite: String, dim: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Identifiers of the verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Klemes1d,
    Korenovskii,
    Bisection,
    Wik,
    Falsecompare,
    Bds,
    Neighbors,
    Partition,
    Concentration,
    CzdValidity,
    HardyLittlewood,
    Equimeasurable,
    RadialIsometry,
    SdrAi,
    SdrBilipschitz,
    SdrCorollary,
    SdrLocal,
    ShapeEquivalence,
}

pub const ALL_SUITES: [SuiteId; 18] = [
    SuiteId::Klemes1d,
    SuiteId::Korenovskii,
    SuiteId::Bisection,
    SuiteId::Wik,
    SuiteId::Falsecompare,
    SuiteId::Bds,
    SuiteId::Neighbors,
    SuiteId::Partition,
    SuiteId::Concentration,
    SuiteId::CzdValidity,
    SuiteId::HardyLittlewood,
    SuiteId::Equimeasurable,
    SuiteId::RadialIsometry,
    SuiteId::SdrAi,
    SuiteId::SdrBilipschitz,
    SuiteId::SdrCorollary,
    SuiteId::SdrLocal,
    SuiteId::ShapeEquivalence,
];

impl SuiteId {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteId::Klemes1d => "klemes1d",
            SuiteId::Korenovskii => "korenovskii",
            SuiteId::Bisection => "bisection",
            SuiteId::Wik => "wik",
            SuiteId::Falsecompare => "falsecompare",
            SuiteId::Bds => "bds",
            SuiteId::Neighbors => "neighbors",
            SuiteId::Partition => "partition",
            SuiteId::Concentration => "concentration",
            SuiteId::CzdValidity => "czd-validity",
            SuiteId::HardyLittlewood => "hardy-littlewood",
            SuiteId::Equimeasurable => "equimeasurable",
            SuiteId::RadialIsometry => "radial-isometry",
            SuiteId::SdrAi => "sdr-ai",
            SuiteId::SdrBilipschitz => "sdr-bilipschitz",
            SuiteId::SdrCorollary => "sdr-corollary",
            SuiteId::SdrLocal => "sdr-local",
            SuiteId::ShapeEquivalence => "shape-equivalence",
        }
    }

    /// Dimensions the suite accepts.
    pub fn allowed_dims(&self) -> &'static [usize] {
        match self {
            SuiteId::Klemes1d => &[1],
            SuiteId::Korenovskii => &[2],
            SuiteId::Bisection => &[1, 2, 3],
            SuiteId::Wik | SuiteId::Falsecompare | SuiteId::Partition => &[2, 3],
            SuiteId::Concentration => &[1, 2, 3],
            SuiteId::SdrBilipschitz | SuiteId::SdrCorollary | SuiteId::SdrLocal => &[1, 2, 3],
            _ => &[1, 2, 3],
        }
    }

    pub fn default_dim(&self) -> usize {
        match self {
            SuiteId::Klemes1d => 1,
            _ => 2,
        }
    }

    /// Relative slack on the majorant side. Suites that are exact on grids
    /// use zero slack plus a 1e-12 floating-point floor.
    pub fn default_slack(&self) -> f64 {
        match self {
            SuiteId::Klemes1d
            | SuiteId::Korenovskii
            | SuiteId::Bisection
            | SuiteId::Wik
            | SuiteId::Bds
            | SuiteId::Neighbors => 1e-3,
            SuiteId::SdrBilipschitz | SuiteId::SdrCorollary | SuiteId::SdrLocal => 5e-2,
            _ => 0.0,
        }
    }
}

impl FromStr for SuiteId {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_SUITES
            .iter()
            .find(|id| id.name() == s)
            .copied()
            .ok_or_else(|| SuiteError::UnknownSuite(s.to_string()))
    }
}

/// Configuration of one suite run; deterministic given `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub dim: usize,
    pub extents: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub weights: Vec<(CorpusFamily, f64)>,
    /// Relative slack; `None` selects the suite default.
    pub slack_rel: Option<f64>,
    pub refine: bool,
    pub supersample: usize,
    /// Where to dump reproducers for violated trials.
    pub reproducer_dir: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite: SuiteId) -> Self {
        Self::with_dim(suite, suite.default_dim())
    }

    pub fn with_dim(suite: SuiteId, dim: usize) -> Self {
        Self {
            suite,
            dim,
            extents: default_extents(dim),
            trials: 100,
            seed: 0x05C1_11A7,
            weights: default_weights(),
            slack_rel: None,
            refine: true,
            supersample: 4,
            reproducer_dir: None,
        }
    }

    pub fn slack(&self) -> f64 {
        self.slack_rel.unwrap_or_else(|| self.suite.default_slack())
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        if !self.suite.allowed_dims().contains(&self.dim) {
            return Err(SuiteError::BadDimension {
                suite: self.suite.name().to_string(),
                dim: self.dim,
            });
        }
        if self.extents.len() != self.dim || self.extents.iter().any(|&d| d < 2) {
            return Err(SuiteError::InvalidConfig(
                "extents must have one entry >= 2 per dimension".into(),
            ));
        }
        if self.trials == 0 {
            return Err(SuiteError::InvalidConfig("trials must be positive".into()));
        }
        if self.supersample == 0 {
            return Err(SuiteError::InvalidConfig(
                "supersample must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Run one suite and collect its report. Trials are independent and run in
/// parallel; records are reduced in trial order, so reports are byte-stable
/// across runs except for the wall time.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    cfg.validate()?;
    suites::run(cfg)
}

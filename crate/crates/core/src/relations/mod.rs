//! Audits of the energy-time uncertainty relations. Each audit evaluates the
//! entropic terms independently, compares their sum with the bound and
//! classifies the outcome.

mod audit;
mod randomness;
mod speed;

use serde::Serialize;

use crate::entropy::RenyiOrder;

pub use audit::{
    audit_asymmetry, audit_continuous, audit_main, audit_nonuniform, audit_pure, audit_split, audit_von_neumann,
};
pub use randomness::{extractable_bits, minmax_certify, parse_bits, toeplitz_extract, Extracted, Measured, MinMaxReport};
pub use speed::{default_horizon, speed_limit_check, SpeedLimitReport, ORTHOGONAL_FIDELITY};

/// Slack below `−SLACK_TOL` is reported.
pub const SLACK_TOL: f64 = 1e-6;

/// Tolerance for exact identities and saturation checks.
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationId {
    /// Pure state without memory.
    Pure,
    /// Main relation with quantum memory.
    Main,
    /// Memory split between the time and energy records.
    Split,
    /// von Neumann special case.
    VonNeumann,
    /// Time uncertainty against Rényi asymmetry.
    Asymmetry,
    /// Non-uniform time weights.
    Nonuniform,
    /// Continuous time window.
    Continuous,
    SpeedLimit,
    MinMax,
}

impl RelationId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pure => "pure",
            Self::Main => "main",
            Self::Split => "split",
            Self::VonNeumann => "von-neumann",
            Self::Asymmetry => "asymmetry",
            Self::Nonuniform => "nonuniform",
            Self::Continuous => "continuous",
            Self::SpeedLimit => "speed-limit",
            Self::MinMax => "minmax",
        }
    }
}

impl std::fmt::Display for RelationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a reported term relates to the exact value when the solver stops early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// Closed form or quadrature; no optimization involved.
    Exact,
    /// Reported value never exceeds the true one (a supremum evaluated at a feasible point).
    Lower,
    /// Reported value never falls below the true one (an infimum evaluated at a feasible point).
    Upper,
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
    pub residual: f64,
    pub converged: bool,
    pub certificate: Certificate,
}

impl Term {
    pub(crate) fn exact(name: &str, value: f64) -> Self {
        Self { name: name.into(), value, residual: 0.0, converged: true, certificate: Certificate::Exact }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// Negative slack with every contributing term certified.
    Violation,
    /// Negative slack that an unconverged lower-certified term could explain.
    SolverShortfall,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub relation: RelationId,
    pub alpha: Option<RenyiOrder>,
    pub beta: Option<RenyiOrder>,
    pub terms: Vec<Term>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    /// Relation-specific diagnostics, in a fixed order.
    pub extras: Vec<(String, f64)>,
}

impl AuditReport {
    pub(crate) fn new(relation: RelationId, alpha: Option<RenyiOrder>, beta: Option<RenyiOrder>, terms: Vec<Term>, rhs: f64) -> Self {
        let lhs: f64 = terms.iter().map(|t| t.value).sum();
        let slack = lhs - rhs;
        let verdict = if slack >= -SLACK_TOL {
            Verdict::Pass
        } else if terms.iter().any(|t| t.certificate == Certificate::Lower && !t.converged) {
            Verdict::SolverShortfall
        } else {
            Verdict::Violation
        };
        Self { relation, alpha, beta, terms, lhs, rhs, slack, verdict, extras: Vec::new() }
    }

    pub(crate) fn with_extra(mut self, name: &str, value: f64) -> Self {
        self.extras.push((name.into(), value));
        self
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

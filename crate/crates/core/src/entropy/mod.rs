//! Entropy functionals in bits: classical Rényi entropies, sandwiched Rényi
//! divergences, optimized conditional entropies and the differential
//! conditional entropy of a continuously evolving clock.

mod cone;
mod quadrature;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMatrix};
use crate::operator::HermitianMatrix;
use crate::state::DensityOperator;

pub use cone::SolverOptions;
pub(crate) use cone::block_cone_infimum;
pub use quadrature::{differential_conditional_entropy, differential_conditional_entropy_with, Quadrature, QuadratureResult};

const LN2: f64 = std::f64::consts::LN_2;

/// Tolerance on the total probability of a distribution.
pub const DISTRIBUTION_TOL: f64 = 1e-10;

/// Rényi order `α ∈ [0, ∞]`. Quantum quantities require `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub const ONE: RenyiOrder = RenyiOrder(1.0);
    pub const HALF: RenyiOrder = RenyiOrder(0.5);
    pub const INFINITY: RenyiOrder = RenyiOrder(f64::INFINITY);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::InvalidOrder(alpha));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `β` with `1/α + 1/β = 2`; defined for `α ≥ 1/2`.
    pub fn conjugate(self) -> Option<Self> {
        let a = self.0;
        if a < 0.5 {
            None
        } else if a == 0.5 {
            Some(Self::INFINITY)
        } else if a.is_infinite() {
            Some(Self::HALF)
        } else {
            Some(Self(a / (2.0 * a - 1.0)))
        }
    }

    pub(crate) fn require_positive(self) -> Result<()> {
        if self.0 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidOrder(self.0))
        }
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for RenyiOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let v = match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            other => other.parse::<f64>().map_err(|_| Error::InvalidOrder(f64::NAN))?,
        };
        Self::new(v)
    }
}

pub fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotADistribution("empty".into()));
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::NotADistribution(format!("entry {x} is not a nonnegative number")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::NotADistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Rényi entropy of a probability vector. `α = 0` counts the support.
pub fn renyi_entropy(p: &[f64], alpha: RenyiOrder) -> Result<f64> {
    check_distribution(p)?;
    Ok(renyi_of_spectrum(p, alpha))
}

pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    renyi_entropy(p, RenyiOrder::ONE)
}

/// Rényi entropy of nonnegative weights that are already known to sum to one.
pub(crate) fn renyi_of_spectrum(p: &[f64], alpha: RenyiOrder) -> f64 {
    let a = alpha.value();
    let pos: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    if pos.is_empty() {
        return 0.0;
    }
    let max = pos.iter().fold(0.0_f64, |m, &x| m.max(x));
    if a == 0.0 {
        (pos.len() as f64).log2()
    } else if a == 1.0 {
        -pos.iter().map(|&x| x * x.log2()).sum::<f64>()
    } else if a.is_infinite() {
        -max.log2()
    } else {
        // log Σ p^α = α log max + log Σ (p/max)^α
        let s: f64 = pos.iter().map(|&x| (x / max).powf(a)).sum();
        (a * max.log2() + s.log2()) / (1.0 - a)
    }
}

/// von Neumann entropy of a PSD matrix (no trace check), `0 log 0 = 0`.
pub fn von_neumann_entropy(m: &CMatrix) -> f64 {
    let eig = eigh(m);
    let cut = eig.support_cutoff();
    -eig.values.iter().filter(|&&v| v > cut).map(|&v| v * v.log2()).sum::<f64>()
}

/// Sandwiched Rényi relative entropy `D_α(ξ‖ζ)`; `+∞` when the support
/// condition fails or the overlap vanishes.
pub fn sandwiched_relative_entropy(xi: &DensityOperator, zeta: &HermitianMatrix, alpha: RenyiOrder) -> Result<f64> {
    alpha.require_positive()?;
    if xi.dim() != zeta.dim() {
        return Err(Error::DimMismatch { expected: xi.dim(), found: zeta.dim() });
    }
    let eig = eigh(zeta.matrix());
    let scale = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if eig.min_value() < -1e-10 * scale.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: eig.min_value() });
    }
    Ok(sandwiched(xi.matrix(), zeta.matrix(), alpha))
}

/// Umegaki relative entropy `D(ξ‖ζ)`.
pub fn relative_entropy(xi: &DensityOperator, zeta: &HermitianMatrix) -> Result<f64> {
    sandwiched_relative_entropy(xi, zeta, RenyiOrder::ONE)
}

/// Unchecked sandwiched divergence on raw matrices. `ξ` must be PSD with unit
/// trace and `ζ` PSD.
pub(crate) fn sandwiched(xi: &CMatrix, zeta: &CMatrix, alpha: RenyiOrder) -> f64 {
    let a = alpha.value();
    let ez = eigh(zeta);
    let cut = ez.support_cutoff();
    let leaks = support_leak(xi, &ez, cut);
    if a == 1.0 {
        if leaks {
            return f64::INFINITY;
        }
        let log_z = ez.map(|v| if v > cut { v.log2() } else { 0.0 });
        -von_neumann_entropy(xi) - linalg::trace_product_re(xi, &log_z)
    } else if a.is_infinite() {
        if leaks {
            return f64::INFINITY;
        }
        let s = ez.support_power(-0.5);
        let top = eigh(&(&s * xi * &s)).max_value();
        if top <= 0.0 {
            f64::INFINITY
        } else {
            top.log2()
        }
    } else {
        if a > 1.0 && leaks {
            return f64::INFINITY;
        }
        let g = (1.0 - a) / (2.0 * a);
        let s = ez.support_power(g);
        match log2_trace_power(&(&s * xi * &s), a) {
            Some(lq) => lq / (a - 1.0),
            None => f64::INFINITY,
        }
    }
}

/// Whether `ξ` has weight outside the support of `ζ` (relative to `Tr ξ`).
fn support_leak(xi: &CMatrix, ez: &linalg::Eigen, cut: f64) -> bool {
    let kernel: Vec<usize> = (0..ez.values.len()).filter(|&j| ez.values[j] <= cut).collect();
    if kernel.is_empty() {
        return false;
    }
    let k = linalg::select_columns(&ez.vectors, &kernel);
    let outside = linalg::trace_re(&(k.adjoint() * xi * &k));
    outside > 1e-10 * linalg::trace_re(xi).max(f64::MIN_POSITIVE)
}

/// `log2 Tr X^α` for PSD `X`, `None` when `X` vanishes.
pub(crate) fn log2_trace_power(x: &CMatrix, a: f64) -> Option<f64> {
    let w = linalg::eigvalsh(x);
    let m = w.iter().fold(0.0_f64, |acc, &v| acc.max(v));
    if m <= 0.0 {
        return None;
    }
    let cut = linalg::SUPPORT_TOL * m;
    let s: f64 = w.iter().filter(|&&v| v > cut).map(|&v| (v / m).powf(a)).sum();
    Some(a * m.log2() + s.log2())
}

/// Outcome of an optimized entropy evaluation.
#[derive(Debug, Clone)]
pub struct EntropyResult {
    /// Entropy in bits.
    pub value: f64,
    /// Optimal conditioning state found, if an optimization took place.
    pub witness: Option<DensityOperator>,
    pub iterations: usize,
    /// Final gradient norm (smooth solver) or duality-gap bound (α = ∞).
    pub residual: f64,
    pub converged: bool,
}

/// `S_α(A|B) = −inf_σ D_α(ρ_AB ‖ I_A ⊗ σ_B)`, where `B` is the set of
/// `conditioning` subsystems and `A` everything else.
pub fn conditional_renyi(
    rho: &DensityOperator,
    conditioning: &[usize],
    alpha: RenyiOrder,
    opts: &SolverOptions,
) -> Result<EntropyResult> {
    alpha.require_positive()?;
    let dims = rho.dims();
    let n = dims.len();
    let mut seen = vec![false; n];
    for &c in conditioning {
        if c >= n || seen[c] {
            return Err(Error::BadSubsystemSpec(format!("conditioning index {c} invalid for {n} subsystems")));
        }
        seen[c] = true;
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
    order.extend_from_slice(conditioning);
    let d_a: usize = (0..n).filter(|&i| !seen[i]).map(|i| dims[i]).product();
    let d_b: usize = conditioning.iter().map(|&i| dims[i]).product();
    let rho_ab = linalg::permute_subsystems(rho.matrix(), dims, &order)?;
    let rho_b = linalg::trace_out_leading(&rho_ab, d_a, d_b);

    if alpha.is_one() {
        let value = von_neumann_entropy(&rho_ab) - von_neumann_entropy(&rho_b);
        return Ok(EntropyResult {
            value,
            witness: Some(DensityOperator::from_parts(rho_b, vec![d_b])),
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }

    let w = eigh(&rho_b).support_basis();
    let iso = linalg::kron(&linalg::identity(d_a), &w);
    let reduced = iso.adjoint() * &rho_ab * &iso;
    let cone = cone::Cone::new(d_a, vec![w.ncols()]);
    let sol = cone::minimize(&reduced, &cone, alpha, opts);
    let sigma = &w * &sol.blocks[0] * w.adjoint();
    Ok(EntropyResult {
        value: -sol.value,
        witness: Some(DensityOperator::normalized(sigma, vec![d_b])),
        iterations: sol.iterations,
        residual: sol.residual,
        converged: sol.converged,
    })
}

/// `S_α(A|B)` of a bipartite state with `B` the last subsystem.
pub fn conditional_renyi_last(rho: &DensityOperator, alpha: RenyiOrder, opts: &SolverOptions) -> Result<EntropyResult> {
    let last = rho.dims().len().checked_sub(1).ok_or_else(|| Error::BadSubsystemSpec("no subsystems".into()))?;
    conditional_renyi(rho, &[last], alpha, opts)
}

/// Value of `−D_α(ρ ‖ I_A ⊗ σ_B)` for an explicit `σ_B`: a lower bound on `S_α(A|B)`
/// for every feasible `σ_B` (the optimum is the supremum of these).
pub fn conditional_certificate(rho: &DensityOperator, sigma_b: &DensityOperator, alpha: RenyiOrder) -> Result<f64> {
    alpha.require_positive()?;
    let d_b = sigma_b.dim();
    if d_b == 0 || !rho.dim().is_multiple_of(d_b) {
        return Err(Error::DimMismatch { expected: rho.dim(), found: d_b });
    }
    let d_a = rho.dim() / d_b;
    let z = linalg::kron(&linalg::identity(d_a), sigma_b.matrix());
    Ok(-sandwiched(rho.matrix(), &z, alpha))
}

//! Differential conditional entropy `s(T|A)` of a clock that runs
//! uniformly over `[0, T_F]`.

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMatrix};
use crate::operator::SpectralHamiltonian;
use crate::state::DensityOperator;

/// Composite trapezoid refinement settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { initial_nodes: 129, max_nodes: 1 << 15, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub nodes: usize,
    /// Difference between the last two extrapolated estimates.
    pub delta: f64,
}

/// `s(T|A) = −∫₀^{T_F} D(ρ(t)/T_F ‖ ρ̄) dt` for `ρ(t) = e^{−iHt} ρ e^{iHt}` and
/// `ρ̄` the time-averaged state.
pub fn differential_conditional_entropy(
    rho: &DensityOperator,
    h: &SpectralHamiltonian,
    t_final: f64,
    quad: &Quadrature,
) -> Result<QuadratureResult> {
    let avg = crate::clock::averaged_state(rho, h, t_final)?;
    let family = |t: f64| {
        let u = h.unitary(t);
        &u * rho.matrix() * u.adjoint()
    };
    differential_conditional_entropy_with(family, avg.matrix(), t_final, quad)
}

/// Same quantity for an arbitrary family `ρ(t)` with a supplied average.
///
/// With the subnormalized identity `D(pρ‖σ) = p D(ρ‖σ) + p log2 p` the
/// integral becomes `log2 T_F − (1/T_F) ∫ D(ρ(t)‖ρ̄) dt`.
pub fn differential_conditional_entropy_with(
    family: impl Fn(f64) -> CMatrix,
    average: &CMatrix,
    t_final: f64,
    quad: &Quadrature,
) -> Result<QuadratureResult> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::BadTimeEnsemble(format!("T_F must be positive, got {t_final}")));
    }
    if quad.initial_nodes < 2 {
        return Err(Error::BadTimeEnsemble("quadrature needs at least two nodes".into()));
    }
    let ea = eigh(average);
    let cut = ea.support_cutoff();
    let log_avg = ea.map(|v| if v > cut { v.log2() } else { 0.0 });
    let integrand = |t: f64| {
        let r = family(t);
        -crate::entropy::von_neumann_entropy(&r) - linalg::trace_product_re(&r, &log_avg)
    };

    let mut intervals = quad.initial_nodes - 1;
    let mut step = t_final / intervals as f64;
    let mut sum: f64 = (1..intervals).map(|k| integrand(k as f64 * step)).sum::<f64>()
        + 0.5 * (integrand(0.0) + integrand(t_final));
    let mut trap = sum * step;
    let mut previous: Option<f64> = None;
    loop {
        let doubled = 2 * intervals;
        let half = step / 2.0;
        let mids: f64 = (0..intervals).map(|k| integrand((2 * k + 1) as f64 * half)).sum();
        sum += mids;
        let finer = sum * half;
        let richardson = (4.0 * finer - trap) / 3.0;
        intervals = doubled;
        step = half;
        trap = finer;
        let nodes = intervals + 1;
        if let Some(p) = previous {
            let delta = (richardson - p).abs();
            if delta < quad.tol {
                let value = t_final.log2() - richardson / t_final;
                return Ok(QuadratureResult { value, nodes, delta });
            }
            if nodes >= quad.max_nodes {
                return Err(Error::QuadratureNotConverged { nodes, delta });
            }
        } else if nodes >= quad.max_nodes {
            return Err(Error::QuadratureNotConverged { nodes, delta: f64::INFINITY });
        }
        previous = Some(richardson);
    }
}

use serde::Serialize;

use crate::clock::build_omega;
use crate::entropy::{conditional_renyi, RenyiOrder, SolverOptions};
use crate::error::{Error, Result};
use crate::operator::{evolve, SpectralHamiltonian};
use crate::state::DensityOperator;

use super::SLACK_TOL;

/// Pairwise fidelity below which evolved states count as orthogonal.
pub const ORTHOGONAL_FIDELITY: f64 = 1e-9;

const DEFAULT_GRID: usize = 4096;
const MAX_HARMONIC: u32 = 64;
const REFINE_CANDIDATES: usize = 32;

#[derive(Debug, Clone, Serialize)]
pub struct SpeedLimitReport {
    pub k: usize,
    /// `(β, S_β(E|R))` for `β ∈ {1/2, 1, ∞}`.
    pub entropies: Vec<(f64, f64)>,
    pub entropies_converged: bool,
    /// Smallest value over the searched times of `max_m F(ρ(0), ρ(mt))`, `m = 1..K−1`.
    pub min_pairwise_fidelity: f64,
    /// Smallest `t` at which `ρ(0), ρ(t), …, ρ((K−1)t)` are mutually orthogonal.
    pub orthogonalizing_t: Option<f64>,
    pub horizon: f64,
    pub energy_spread: f64,
    /// `π / (2ΔE)`; infinite for a stationary state.
    pub mt_bound_tau: f64,
    /// An orthogonal family of size `K` implies `S_β(E|R) ≥ log2 K` for every β.
    pub contrapositive_holds: bool,
}

/// Default search horizon: one period of the evolution when the spectrum is
/// commensurate, otherwise `8 · 2π / (smallest gap)`. `None` for one level.
pub fn default_horizon(h: &SpectralHamiltonian) -> Option<f64> {
    let g = h.min_gap()?;
    let e0 = h.energies()[0];
    for n in 1..=MAX_HARMONIC {
        let omega = g / n as f64;
        let commensurate = h.energies().iter().all(|e| {
            let q = (e - e0) / omega;
            (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
        });
        if commensurate {
            return Some(std::f64::consts::TAU / omega);
        }
    }
    Some(8.0 * std::f64::consts::TAU / g)
}

/// Searches for `K` mutually orthogonal evolved states at equal spacing and
/// checks the energy entropies against `log2 K`. `grid` overrides the default
/// 4096-point grid over [`default_horizon`].
pub fn speed_limit_check(
    rho_ar: &DensityOperator,
    h: &SpectralHamiltonian,
    k: usize,
    grid: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<SpeedLimitReport> {
    if k < 2 {
        return Err(Error::BadTimeEnsemble(format!("need K ≥ 2 evolved states, got {k}")));
    }
    let rho_a = if rho_ar.dims().len() == 1 { rho_ar.clone() } else { rho_ar.partial_trace(&[0])? };
    if rho_a.dim() != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: rho_a.dim() });
    }

    let omega = build_omega(rho_ar, h)?.to_density();
    let mut entropies = Vec::with_capacity(3);
    let mut entropies_converged = true;
    for beta in [RenyiOrder::HALF, RenyiOrder::ONE, RenyiOrder::INFINITY] {
        let r = conditional_renyi(&omega, &[1], beta, opts)?;
        entropies_converged &= r.converged;
        entropies.push((beta.value(), r.value));
    }

    let horizon = default_horizon(h).unwrap_or(std::f64::consts::TAU);
    let default: Vec<f64>;
    let times = match grid {
        Some(g) => {
            if g.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(Error::BadTimeEnsemble("grid times must be positive and finite".into()));
            }
            g
        }
        None => {
            default = (1..=DEFAULT_GRID).map(|i| horizon * i as f64 / DEFAULT_GRID as f64).collect();
            &default
        }
    };

    let objective = |t: f64| -> f64 {
        (1..k)
            .map(|m| evolve(&rho_a, h, m as f64 * t).and_then(|r| rho_a.fidelity(&r)).unwrap_or(1.0))
            .fold(0.0, f64::max)
    };
    let values: Vec<f64> = times.iter().map(|&t| objective(t)).collect();
    let (mut best_t, mut best) = (f64::NAN, f64::INFINITY);
    for (&t, &v) in times.iter().zip(&values) {
        if v < best {
            best = v;
            best_t = t;
        }
    }

    // Local minima of the grid objective, refined by golden section.
    let mut minima: Vec<usize> = (0..times.len())
        .filter(|&i| {
            let left = if i > 0 { values[i - 1] } else { f64::INFINITY };
            let right = values.get(i + 1).copied().unwrap_or(f64::INFINITY);
            values[i] <= left && values[i] <= right
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(REFINE_CANDIDATES);
    let mut found: Option<f64> = None;
    for i in minima {
        let lo = if i > 0 { times[i - 1] } else { times[i] * 0.5 };
        let hi = times.get(i + 1).copied().unwrap_or(times[i] + (times[i] - lo));
        let (t, v) = golden_section(&objective, lo, hi);
        let (t, v) = if v < values[i] { (t, v) } else { (times[i], values[i]) };
        if v < best {
            best = v;
            best_t = t;
        }
        if v < ORTHOGONAL_FIDELITY && found.is_none_or(|f| t < f) {
            found = Some(t);
        }
    }
    if found.is_none() && best < ORTHOGONAL_FIDELITY {
        found = Some(best_t);
    }

    let target = (k as f64).log2();
    let contrapositive_holds = found.is_none() || entropies.iter().all(|&(_, s)| s >= target - SLACK_TOL);
    let spread = h.energy_spread(&rho_a);
    Ok(SpeedLimitReport {
        k,
        entropies,
        entropies_converged,
        min_pairwise_fidelity: best,
        orthogonalizing_t: found,
        horizon,
        energy_spread: spread,
        mt_bound_tau: if spread > 0.0 { std::f64::consts::PI / (2.0 * spread) } else { f64::INFINITY },
        contrapositive_holds,
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd { (c, fc) } else { (d, fd) }
}

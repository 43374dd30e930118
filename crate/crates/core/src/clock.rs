//! Clock and energy records: the energy-measurement state `ω_ER`, the
//! time-decohered clock state `κ_TA`, the time-averaged state and the
//! energy-cutoff truncation used for unbounded spectra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::operator::SpectralHamiltonian;
use crate::state::DensityOperator;

/// Times at which Alice may apply the evolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TimeEnsemble {
    Discrete { times: Vec<f64>, weights: Vec<f64> },
    Continuous { t_final: f64 },
}

impl TimeEnsemble {
    /// Uniform weights over `times`.
    pub fn uniform(times: Vec<f64>) -> Result<Self> {
        let k = times.len();
        Self::discrete(times, vec![1.0 / k.max(1) as f64; k])
    }

    pub fn discrete(times: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::BadTimeEnsemble(format!("need at least two times, got {}", times.len())));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::BadTimeEnsemble("times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::BadTimeEnsemble("times must be in non-decreasing order".into()));
        }
        if times.windows(2).any(|w| w[1] == w[0]) {
            log::warn!("time ensemble contains repeated times");
        }
        if weights.len() != times.len() {
            return Err(Error::BadTimeEnsemble(format!("{} weights for {} times", weights.len(), times.len())));
        }
        crate::entropy::check_distribution(&weights).map_err(|e| Error::BadTimeEnsemble(e.to_string()))?;
        Ok(Self::Discrete { times, weights })
    }

    /// `{0, T/K, …, (K−1)T/K}` with uniform weights.
    pub fn equally_spaced(k: usize, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::BadTimeEnsemble(format!("horizon must be positive, got {horizon}")));
        }
        Self::uniform((0..k).map(|j| j as f64 * horizon / k as f64).collect())
    }

    pub fn continuous(t_final: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::BadTimeEnsemble(format!("T_F must be positive, got {t_final}")));
        }
        Ok(Self::Continuous { t_final })
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::Discrete { .. })
    }

    /// Number of discrete times; zero for a continuous ensemble.
    pub fn len(&self) -> usize {
        match self {
            Self::Discrete { times, .. } => times.len(),
            Self::Continuous { .. } => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> &[f64] {
        match self {
            Self::Discrete { times, .. } => times,
            Self::Continuous { .. } => &[],
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            Self::Discrete { weights, .. } => weights,
            Self::Continuous { .. } => &[],
        }
    }

    pub fn is_uniform(&self) -> bool {
        let w = self.weights();
        w.iter().all(|&x| (x - w[0]).abs() <= 1e-15)
    }

    pub fn t_final(&self) -> Option<f64> {
        match self {
            Self::Continuous { t_final } => Some(*t_final),
            Self::Discrete { .. } => None,
        }
    }

    fn require_discrete(&self) -> Result<()> {
        if self.is_discrete() {
            Ok(())
        } else {
            Err(Error::BadTimeEnsemble("a discrete ensemble is required".into()))
        }
    }
}

/// Labeled ensemble `{w_j, label_j, ρ_j}`, equivalently `Σ_j w_j |j⟩⟨j| ⊗ ρ_j`.
#[derive(Debug, Clone)]
pub struct CqState {
    pub labels: Vec<f64>,
    pub weights: Vec<f64>,
    /// Normalized conditional states. Zero-weight entries hold the maximally mixed state.
    pub conditionals: Vec<DensityOperator>,
}

impl CqState {
    /// Builds from unnormalized blocks; weights are their traces.
    pub fn from_blocks(labels: Vec<f64>, blocks: Vec<CMatrix>, dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let mut weights = Vec::with_capacity(blocks.len());
        let mut conditionals = Vec::with_capacity(blocks.len());
        for b in blocks {
            let w = linalg::trace_re(&b).max(0.0);
            weights.push(w);
            if w > 0.0 {
                conditionals.push(DensityOperator::normalized(b, dims.clone()));
            } else {
                conditionals.push(DensityOperator::from_parts(linalg::identity(d).unscale(d as f64), dims.clone()));
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { labels, weights, conditionals }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Dimension of the quantum part.
    pub fn quantum_dim(&self) -> usize {
        self.conditionals.first().map_or(0, |c| c.dim())
    }

    /// `Σ_j w_j |j⟩⟨j| ⊗ ρ_j`, classical register first.
    pub fn to_density(&self) -> DensityOperator {
        let n = self.len();
        let d = self.quantum_dim();
        let mut m = CMatrix::zeros(n * d, n * d);
        for (j, (w, c)) in self.weights.iter().zip(&self.conditionals).enumerate() {
            m.view_mut((j * d, j * d), (d, d)).copy_from(&c.matrix().scale(*w));
        }
        let mut dims = vec![n];
        dims.extend_from_slice(self.conditionals[0].dims());
        DensityOperator::from_parts(m, dims)
    }

    /// `Σ_j w_j ρ_j`.
    pub fn average(&self) -> DensityOperator {
        let d = self.quantum_dim();
        let m = self
            .weights
            .iter()
            .zip(&self.conditionals)
            .fold(CMatrix::zeros(d, d), |acc, (w, c)| acc + c.matrix().scale(*w));
        DensityOperator::from_parts(m, self.conditionals[0].dims().to_vec())
    }
}

/// `ω_ER = Σ_ε |ε⟩⟨ε| ⊗ Tr_A{Π^ε ρ_AR}`. `A` is the first subsystem of `ρ_AR`
/// and `R` is everything else (a one-dimensional factor when absent).
pub fn build_omega(rho_ar: &DensityOperator, h: &SpectralHamiltonian) -> Result<CqState> {
    let d_a = rho_ar.dims()[0];
    if d_a != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: d_a });
    }
    let d_r = rho_ar.dim() / d_a;
    let r_dims: Vec<usize> = if rho_ar.dims().len() > 1 { rho_ar.dims()[1..].to_vec() } else { vec![1] };
    let id = linalg::identity(d_r);
    let blocks = h
        .projectors()
        .iter()
        .map(|p| linalg::trace_out_leading(&(linalg::kron(p, &id) * rho_ar.matrix()), d_a, d_r))
        .map(|b| linalg::hermitian_part(&b))
        .collect();
    Ok(CqState::from_blocks(h.energies().to_vec(), blocks, r_dims))
}

/// `κ = Σ_k p(k) |t_k⟩⟨t_k| ⊗ e^{−iHt_k} ρ e^{iHt_k}`. When `ρ` has more
/// subsystems than `H` acts on, `H` acts on the first and the identity on the rest.
pub fn build_kappa(rho: &DensityOperator, h: &SpectralHamiltonian, ensemble: &TimeEnsemble) -> Result<CqState> {
    ensemble.require_discrete()?;
    let h = lift(h, rho)?;
    let conditionals = ensemble
        .times()
        .iter()
        .map(|&t| {
            let u = h.unitary(t);
            DensityOperator::from_parts(&u * rho.matrix() * u.adjoint(), rho.dims().to_vec())
        })
        .collect();
    Ok(CqState { labels: ensemble.times().to_vec(), weights: ensemble.weights().to_vec(), conditionals })
}

/// `H` extended by the identity to the full space of `ρ` (first factor).
pub(crate) fn lift(h: &SpectralHamiltonian, rho: &DensityOperator) -> Result<SpectralHamiltonian> {
    if rho.dim() == h.dim() {
        return Ok(h.clone());
    }
    if rho.dims()[0] != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: rho.dims()[0] });
    }
    Ok(h.extend(rho.dim() / h.dim()))
}

/// `ρ̄ = (1/T_F) ∫₀^{T_F} e^{−iHt} ρ e^{iHt} dt` in closed form.
pub fn averaged_state(rho: &DensityOperator, h: &SpectralHamiltonian, t_final: f64) -> Result<DensityOperator> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::BadTimeEnsemble(format!("T_F must be positive, got {t_final}")));
    }
    let h = lift(h, rho)?;
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for (e1, p1) in h.energies().iter().zip(h.projectors()) {
        let left = p1 * rho.matrix();
        for (e2, p2) in h.energies().iter().zip(h.projectors()) {
            out += &left * p2 * phase_average((e1 - e2) * t_final);
        }
    }
    Ok(DensityOperator::from_parts(out, rho.dims().to_vec()))
}

/// `(e^{−ix} − 1)/(−ix)`, the mean of `e^{−iθ}` over `θ ∈ [0, x]`.
fn phase_average(x: f64) -> C64 {
    if x.abs() < 1e-6 {
        C64::new(1.0 - x * x / 6.0, -x / 2.0)
    } else {
        (C64::from_polar(1.0, -x) - 1.0) / C64::new(0.0, -x)
    }
}

/// Outcome of an energy cutoff.
#[derive(Debug, Clone)]
pub struct Truncation {
    /// `H^E` on the kept subspace.
    pub hamiltonian: SpectralHamiltonian,
    /// `ρ^E` expressed on the kept subspace.
    pub state: DensityOperator,
    /// `ρ^E` on the original space.
    pub embedded: DensityOperator,
    /// Columns spanning the kept subspace.
    pub isometry: CMatrix,
    /// `Tr{(I − Π^E) ρ}`.
    pub tail: f64,
}

/// Keeps the levels with `ε ≤ cutoff` and moves the discarded weight into
/// `filler`, which defaults to the normalized lowest-energy projector.
pub fn truncate(
    h: &SpectralHamiltonian,
    rho: &DensityOperator,
    cutoff: f64,
    filler: Option<&DensityOperator>,
) -> Result<Truncation> {
    if rho.dim() != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: rho.dim() });
    }
    let kept: Vec<usize> = (0..h.len()).filter(|&j| h.energies()[j] <= cutoff).collect();
    if kept.is_empty() {
        return Err(Error::EmptyTruncation { cutoff });
    }
    let n = h.dim();
    let pi_e = kept.iter().fold(CMatrix::zeros(n, n), |acc, &j| acc + &h.projectors()[j]);
    let filler = match filler {
        Some(f) => {
            if f.dim() != n {
                return Err(Error::DimMismatch { expected: n, found: f.dim() });
            }
            let leakage = 1.0 - linalg::trace_product_re(&pi_e, f.matrix());
            if leakage > 1e-10 {
                return Err(Error::FillerOutsideSubspace { leakage });
            }
            f.matrix().clone()
        }
        None => {
            let p = &h.projectors()[kept[0]];
            p.unscale(linalg::trace_re(p))
        }
    };
    let projected = &pi_e * rho.matrix() * &pi_e;
    let tail = (1.0 - linalg::trace_re(&projected)).max(0.0);
    let full = projected + filler.scale(tail);
    let iso = gram_schmidt_columns(&pi_e);
    let state = DensityOperator::normalized(iso.adjoint() * &full * &iso, vec![iso.ncols()]);
    let energies = kept.iter().map(|&j| h.energies()[j]).collect();
    let projectors = kept.iter().map(|&j| iso.adjoint() * &h.projectors()[j] * &iso).collect();
    let hamiltonian = SpectralHamiltonian::from_parts(energies, projectors)?;
    Ok(Truncation { hamiltonian, state, embedded: DensityOperator::normalized(full, rho.dims().to_vec()), isometry: iso, tail })
}

/// Orthonormal basis of the range of a projector built from its columns in order.
fn gram_schmidt_columns(p: &CMatrix) -> CMatrix {
    let n = p.nrows();
    let rank = linalg::trace_re(p).round() as usize;
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(rank);
    for j in 0..n {
        if basis.len() == rank {
            break;
        }
        let mut v = p.column(j).into_owned();
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.unscale(norm));
        }
    }
    CMatrix::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::evolve;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn ensemble_validation() {
        assert!(TimeEnsemble::uniform(vec![0.0]).is_err());
        assert!(TimeEnsemble::uniform(vec![1.0, 0.0]).is_err());
        assert!(TimeEnsemble::discrete(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(TimeEnsemble::uniform(vec![0.0, 0.0, 1.0]).is_ok());
        let e = TimeEnsemble::equally_spaced(4, 2.0).unwrap();
        assert_eq!(e.times(), &[0.0, 0.5, 1.0, 1.5]);
        assert!(e.is_uniform());
    }

    #[test]
    fn omega_of_plus_state() {
        let w = build_omega(&DensityOperator::bloch(FRAC_PI_2, 0.0), &SpectralHamiltonian::pauli_z(1.0)).unwrap();
        assert_relative_eq!(w.weights[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(w.weights[1], 0.5, epsilon = 1e-15);
        let e = build_omega(&DensityOperator::basis(2, 1), &SpectralHamiltonian::pauli_z(1.0)).unwrap();
        assert_eq!(e.weights, vec![1.0, 0.0]);
        assert_eq!(e.to_density().dims(), &[2, 1]);
    }

    #[test]
    fn kappa_of_plus_state_is_orthogonal_pair() {
        let plus = DensityOperator::bloch(FRAC_PI_2, 0.0);
        let minus = DensityOperator::bloch(FRAC_PI_2, PI);
        let ens = TimeEnsemble::uniform(vec![0.0, FRAC_PI_2]).unwrap();
        let k = build_kappa(&plus, &SpectralHamiltonian::pauli_z(1.0), &ens).unwrap();
        assert!((k.conditionals[0].matrix() - plus.matrix()).norm() < 1e-14);
        assert!((k.conditionals[1].matrix() - minus.matrix()).norm() < 1e-14);
        assert_relative_eq!(linalg::trace_re(k.to_density().matrix()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn averaged_plus_state_over_half_period() {
        let plus = DensityOperator::bloch(FRAC_PI_2, 0.0);
        let avg = averaged_state(&plus, &SpectralHamiltonian::pauli_z(1.0), PI).unwrap();
        assert!((avg.matrix() - DensityOperator::maximally_mixed(2).matrix()).norm() < 1e-14);
    }

    #[test]
    fn averaged_state_matches_dense_quadrature() {
        let rho = DensityOperator::bloch(0.9, 0.4);
        let h = SpectralHamiltonian::diagonal(&[0.3, -1.1]);
        let tf = 1.7;
        let nodes = 10_000;
        let dt = tf / (nodes - 1) as f64;
        let mut acc = CMatrix::zeros(2, 2);
        for k in 0..nodes {
            let w = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
            acc += evolve(&rho, &h, k as f64 * dt).unwrap().matrix().scale(w * dt / tf);
        }
        assert!((averaged_state(&rho, &h, tf).unwrap().matrix() - acc).norm() < 1e-6);
        assert!(phase_average(1e-9).re > 0.999_999);
    }

    #[test]
    fn qutrit_truncation_by_hand() {
        let h = SpectralHamiltonian::diagonal(&[0.0, 1.0, 2.0]);
        let rho = DensityOperator::maximally_mixed(3);
        let tr = truncate(&h, &rho, 1.0, Some(&DensityOperator::basis(3, 0))).unwrap();
        assert_eq!(tr.state.dim(), 2);
        assert_relative_eq!(tr.state.matrix()[(0, 0)].re, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(tr.state.matrix()[(1, 1)].re, 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(tr.tail, 1.0 / 3.0, epsilon = 1e-14);
        assert!(matches!(truncate(&h, &rho, -1.0, None), Err(Error::EmptyTruncation { .. })));
        assert!(matches!(
            truncate(&h, &rho, 1.0, Some(&DensityOperator::basis(3, 2))),
            Err(Error::FillerOutsideSubspace { .. })
        ));
        let all = truncate(&h, &rho, 5.0, None).unwrap();
        assert!((all.embedded.matrix() - rho.matrix()).norm() < 1e-15);
    }
}

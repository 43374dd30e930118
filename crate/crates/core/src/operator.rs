//! Hamiltonians in spectral form and the maps they generate: unitary time
//! evolution and the pinching (dephasing) channel.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMatrix, C64};
use crate::state::DensityOperator;

/// Tolerance for the completeness and orthogonality of spectral projectors.
pub const PROJECTOR_TOL: f64 = 1e-9;

/// A validated Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Accepts `m` if `|m - m†| ≤ 1e-10 · max|m_ij|`.
    pub fn new(m: CMatrix) -> Result<Self> {
        linalg::ensure_square(&m)?;
        let deviation = linalg::hermiticity_defect(&m);
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(linalg::hermitian_part(&m)))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Self(CMatrix::from_diagonal(&d))
    }

    pub fn pauli_x() -> Self {
        Self(CMatrix::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ONE, linalg::ZERO]))
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        Self(CMatrix::from_row_slice(2, 2, &[linalg::ZERO, -i, i, linalg::ZERO]))
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// `H = Σ_ε ε Π^ε` with distinct ascending energies and orthogonal projectors.
#[derive(Debug, Clone)]
pub struct SpectralHamiltonian {
    dim: usize,
    energies: Vec<f64>,
    projectors: Vec<CMatrix>,
    grouping_tol: f64,
}

/// Default grouping tolerance `1e-9 · max(1, max|ε|)`.
pub fn default_grouping_tol(max_abs_energy: f64) -> f64 {
    1e-9 * max_abs_energy.max(1.0)
}

/// Groups the spectrum of `m` into distinct energies. Eigenvalues within
/// `grouping_tol · max(1, max|ε|)` of their neighbour share one projector and
/// the group energy is their mean.
pub fn spectral_decompose(m: &HermitianMatrix, grouping_tol: f64) -> Result<SpectralHamiltonian> {
    if grouping_tol <= 0.0 || !grouping_tol.is_finite() {
        return Err(Error::BadSubsystemSpec(format!("grouping tolerance must be positive, got {grouping_tol}")));
    }
    let eig = eigh(m.matrix());
    let scale = eig.values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let tol = grouping_tol * scale;
    let n = m.dim();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        match groups.last_mut() {
            Some(g) if (eig.values[j] - eig.values[*g.last().unwrap()]).abs() <= tol => g.push(j),
            _ => groups.push(vec![j]),
        }
    }
    let mut energies = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        energies.push(g.iter().map(|&j| eig.values[j]).sum::<f64>() / g.len() as f64);
        let cols = linalg::select_columns(&eig.vectors, g);
        projectors.push(&cols * cols.adjoint());
    }
    Ok(SpectralHamiltonian { dim: n, energies, projectors, grouping_tol })
}

impl SpectralHamiltonian {
    /// Builds from explicit pairs. Projectors must be orthogonal, idempotent and complete.
    pub fn from_parts(energies: Vec<f64>, projectors: Vec<CMatrix>) -> Result<Self> {
        if energies.is_empty() || energies.len() != projectors.len() {
            return Err(Error::BadSubsystemSpec("energies and projectors must be non-empty and of equal length".into()));
        }
        let dim = projectors[0].nrows();
        let mut pairs: Vec<(f64, CMatrix)> = energies.into_iter().zip(projectors).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (energies, projectors): (Vec<f64>, Vec<CMatrix>) = pairs.into_iter().unzip();
        let h = Self { dim, energies, projectors, grouping_tol: default_grouping_tol(0.0) };
        h.check_projectors()?;
        Ok(h)
    }

    /// Diagonal Hamiltonian in the computational basis; equal entries share a projector.
    pub fn diagonal(energies: &[f64]) -> Self {
        let n = energies.len();
        let mut distinct: Vec<f64> = Vec::new();
        for &e in energies {
            if !distinct.contains(&e) {
                distinct.push(e);
            }
        }
        distinct.sort_by(f64::total_cmp);
        let projectors = distinct
            .iter()
            .map(|&e| {
                let d = DVector::from_iterator(n, energies.iter().map(|&x| if x == e { linalg::ONE } else { linalg::ZERO }));
                CMatrix::from_diagonal(&d)
            })
            .collect();
        let scale = energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        Self { dim: n, energies: distinct, projectors, grouping_tol: default_grouping_tol(scale) }
    }

    /// `κ σ_z` with energies `±κ`.
    pub fn pauli_z(kappa: f64) -> Self {
        Self::diagonal(&[kappa, -kappa])
    }

    fn check_projectors(&self) -> Result<()> {
        check_projective(&self.projectors, self.dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn rank(&self, level: usize) -> usize {
        linalg::trace_re(&self.projectors[level]).round() as usize
    }

    /// `Σ ε Π^ε`.
    pub fn matrix(&self) -> CMatrix {
        self.energies
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, (&e, p)| acc + p.scale(e))
    }

    /// `e^{-iHt}`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        self.energies
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, (&e, p)| acc + p * C64::from_polar(1.0, -e * t))
    }

    /// `H ⊗ I_d`: the same Hamiltonian acting on the first factor of a larger system.
    pub fn extend(&self, d: usize) -> Self {
        let id = linalg::identity(d);
        Self {
            dim: self.dim * d,
            energies: self.energies.clone(),
            projectors: self.projectors.iter().map(|p| linalg::kron(p, &id)).collect(),
            grouping_tol: self.grouping_tol,
        }
    }

    /// Smallest gap between distinct energies, `None` for a single level.
    pub fn min_gap(&self) -> Option<f64> {
        self.energies.windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp)
    }

    /// `⟨ψ|Π^ε|ψ⟩` for every level, with ρ on the Hamiltonian's space.
    pub fn level_populations(&self, rho: &CMatrix) -> Vec<f64> {
        self.projectors.iter().map(|p| linalg::trace_product_re(p, rho).max(0.0)).collect()
    }

    /// Energy standard deviation `√(⟨H²⟩ − ⟨H⟩²)`.
    pub fn energy_spread(&self, rho: &DensityOperator) -> f64 {
        let pops = self.level_populations(rho.matrix());
        let mean: f64 = pops.iter().zip(&self.energies).map(|(p, e)| p * e).sum();
        let second: f64 = pops.iter().zip(&self.energies).map(|(p, e)| p * e * e).sum();
        (second - mean * mean).max(0.0).sqrt()
    }

    /// Whether `[ρ, H] = 0` within `tol` (Frobenius norm of the commutator).
    pub fn commutes_with(&self, rho: &CMatrix, tol: f64) -> bool {
        let h = self.matrix();
        (&h * rho - rho * &h).norm() <= tol
    }

    fn check_dim(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: rho.dim() });
        }
        Ok(())
    }
}

/// Checks that `projectors` are Hermitian, idempotent, mutually orthogonal
/// and sum to the identity on `C^dim`, all within `PROJECTOR_TOL`.
pub fn check_projective(projectors: &[CMatrix], dim: usize) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::NotProjective("empty measurement".into()));
    }
    let tol = PROJECTOR_TOL * dim.max(1) as f64;
    let mut sum = CMatrix::zeros(dim, dim);
    for (i, p) in projectors.iter().enumerate() {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::DimMismatch { expected: dim, found: p.nrows() });
        }
        if (p - p.adjoint()).norm() > tol {
            return Err(Error::NotProjective(format!("element {i} is not Hermitian")));
        }
        for (j, q) in projectors.iter().enumerate().skip(i) {
            let prod = p * q;
            let target = if i == j { p.clone() } else { CMatrix::zeros(dim, dim) };
            if (prod - target).norm() > tol {
                return Err(Error::NotProjective(format!("elements {i} and {j} violate Π_iΠ_j = δ_ij Π_i")));
            }
        }
        sum += p;
    }
    if (sum - linalg::identity(dim)).norm() > tol {
        return Err(Error::NotProjective("elements do not sum to the identity".into()));
    }
    Ok(())
}

/// `e^{-iHt} ρ e^{iHt}`.
pub fn evolve(rho: &DensityOperator, h: &SpectralHamiltonian, t: f64) -> Result<DensityOperator> {
    h.check_dim(rho)?;
    rho.conjugate(&h.unitary(t))
}

/// `Δ(ρ) = Σ_ε Π^ε ρ Π^ε`.
pub fn pinch(rho: &DensityOperator, h: &SpectralHamiltonian) -> Result<DensityOperator> {
    h.check_dim(rho)?;
    Ok(DensityOperator::from_parts(pinch_matrix(rho.matrix(), h.projectors()), rho.dims().to_vec()))
}

pub(crate) fn pinch_matrix(m: &CMatrix, projectors: &[CMatrix]) -> CMatrix {
    let n = m.nrows();
    projectors.iter().fold(CMatrix::zeros(n, n), |acc, p| acc + p * m * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_is_fully_degenerate() {
        let h = spectral_decompose(&HermitianMatrix::from_real_diagonal(&[1.0, 1.0]), 1e-9).unwrap();
        assert_eq!(h.energies(), &[1.0]);
        assert!((h.projectors()[0].clone() - linalg::identity(2)).norm() < 1e-14);
    }

    #[test]
    fn pauli_z_levels() {
        let h = spectral_decompose(&HermitianMatrix::pauli_z(), 1e-9).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h.energies()[0] + 1.0).abs() < 1e-14);
        assert!((h.projectors()[0][(1, 1)].re - 1.0).abs() < 1e-14);
        assert!((h.projectors()[1][(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plus_state_flips_under_quarter_period() {
        let plus = DensityOperator::bloch(PI / 2.0, 0.0);
        let minus = DensityOperator::bloch(PI / 2.0, PI);
        let h = SpectralHamiltonian::pauli_z(1.0);
        let out = evolve(&plus, &h, PI / 2.0).unwrap();
        assert!((out.matrix() - minus.matrix()).norm() < 1e-14);
        assert!((evolve(&plus, &h, 0.0).unwrap().matrix() - plus.matrix()).norm() < 1e-15);
    }

    #[test]
    fn pinch_erases_coherence() {
        let plus = DensityOperator::bloch(PI / 2.0, 0.0);
        let out = pinch(&plus, &SpectralHamiltonian::pauli_z(1.0)).unwrap();
        assert!((out.matrix() - DensityOperator::maximally_mixed(2).matrix()).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = SpectralHamiltonian::diagonal(&[0.0, 1.0, 2.0]);
        let rho = DensityOperator::maximally_mixed(2);
        assert!(matches!(evolve(&rho, &h, 1.0), Err(Error::DimMismatch { .. })));
        assert!(matches!(pinch(&rho, &h), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn rejects_non_hermitian_and_bad_tolerance() {
        let m = CMatrix::from_row_slice(2, 2, &[linalg::ONE, linalg::ONE, linalg::ZERO, linalg::ONE]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
        assert!(spectral_decompose(&HermitianMatrix::pauli_z(), 0.0).is_err());
    }

    #[test]
    fn from_parts_validates_projectors() {
        let p0 = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]).matrix().clone();
        let overlapping = HermitianMatrix::from_real_diagonal(&[1.0, 1.0]).matrix().clone();
        assert!(SpectralHamiltonian::from_parts(vec![0.0, 1.0], vec![p0.clone(), overlapping]).is_err());
        let p1 = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]).matrix().clone();
        let h = SpectralHamiltonian::from_parts(vec![1.0, 0.0], vec![p1, p0]).unwrap();
        assert_eq!(h.energies(), &[0.0, 1.0]);
    }
}

//! Asymmetry with respect to time translations: the relative entropy of
//! asymmetry, its sandwiched Rényi version and the duality that links the
//! pinched-cone infimum to a conditional entropy of the outcome register.

use serde::Serialize;

use crate::entropy::{self, block_cone_infimum, RenyiOrder, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::{self, pinch, SpectralHamiltonian};
use crate::state::DensityOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymmetryMethod {
    ClosedForm,
    BlockOptimized,
    Prop1Dual,
}

#[derive(Debug, Clone)]
pub struct AsymmetryResult {
    pub value: f64,
    /// A state commuting with `H` attaining `value`.
    pub witness: DensityOperator,
    pub method: AsymmetryMethod,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// `Γ_H(ρ) = S(Δ(ρ)) − S(ρ)`, with `Δ(ρ)` as witness.
pub fn relative_entropy_of_asymmetry(rho: &DensityOperator, h: &SpectralHamiltonian) -> Result<AsymmetryResult> {
    let pinched = pinch(rho, h)?;
    let value = (pinched.entropy() - rho.entropy()).max(0.0);
    Ok(AsymmetryResult { value, witness: pinched, method: AsymmetryMethod::ClosedForm, iterations: 0, residual: 0.0, converged: true })
}

/// `inf_{σ : [H,σ] = 0} D_α(ρ‖σ)`, optimized block by block over the energy
/// eigenspaces. `α = 1` uses the closed form.
pub fn renyi_asymmetry(rho: &DensityOperator, h: &SpectralHamiltonian, alpha: RenyiOrder, opts: &SolverOptions) -> Result<AsymmetryResult> {
    alpha.require_positive()?;
    if alpha.is_one() {
        return relative_entropy_of_asymmetry(rho, h);
    }
    if rho.dim() != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: rho.dim() });
    }
    let sol = block_cone_infimum(rho.matrix(), h.projectors(), alpha, opts);
    Ok(AsymmetryResult {
        value: sol.value.max(0.0),
        witness: DensityOperator::normalized(sol.sigma, rho.dims().to_vec()),
        method: AsymmetryMethod::BlockOptimized,
        iterations: sol.iterations,
        residual: sol.residual,
        converged: sol.converged,
    })
}

/// Both sides of the pinched-cone duality for a pure `ψ_ABC`.
#[derive(Debug, Clone)]
pub struct Prop1Sides {
    /// `inf_σ D_α(ψ_AB ‖ Σ_j Π^j σ Π^j)`.
    pub lhs: f64,
    /// `S_β(Z|C)` of `ω_ZC = Σ_j |j⟩⟨j| ⊗ Tr_AB{Π^j ψ}`.
    pub rhs: f64,
    pub lhs_converged: bool,
    pub rhs_converged: bool,
}

/// Evaluates both sides independently. `ψ` must carry dims `[d_A, d_B, d_C]`
/// (any may be 1) and the projectors act on `A`.
pub fn prop1_verify(psi: &DensityOperator, projectors: &[CMatrix], alpha: RenyiOrder, opts: &SolverOptions) -> Result<Prop1Sides> {
    let beta = alpha.conjugate().ok_or(Error::InvalidOrder(alpha.value()))?;
    if psi.dims().len() != 3 {
        return Err(Error::BadSubsystemSpec(format!("expected three subsystems, got {}", psi.dims().len())));
    }
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::NotPure { purity });
    }
    let (d_a, d_b, d_c) = (psi.dims()[0], psi.dims()[1], psi.dims()[2]);
    operator::check_projective(projectors, d_a)?;

    let psi_ab = psi.partial_trace(&[0, 1])?;
    let id_b = linalg::identity(d_b);
    let lifted: Vec<CMatrix> = projectors.iter().map(|p| linalg::kron(p, &id_b)).collect();
    let lhs = block_cone_infimum(psi_ab.matrix(), &lifted, alpha, opts);

    let id_bc = linalg::identity(d_b * d_c);
    let blocks: Vec<CMatrix> = projectors
        .iter()
        .map(|p| {
            let projected = linalg::kron(p, &id_bc) * psi.matrix();
            linalg::hermitian_part(&linalg::trace_out_leading(&projected, d_a * d_b, d_c))
        })
        .collect();
    let labels = (0..projectors.len()).map(|j| j as f64).collect();
    let omega = crate::clock::CqState::from_blocks(labels, blocks, vec![d_c]).to_density();
    let rhs = entropy::conditional_renyi(&omega, &[1], beta, opts)?;
    Ok(Prop1Sides { lhs: lhs.value, rhs: rhs.value, lhs_converged: lhs.converged, rhs_converged: rhs.converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn closed_form_values() {
        let h = SpectralHamiltonian::pauli_z(1.0);
        assert_relative_eq!(relative_entropy_of_asymmetry(&DensityOperator::basis(2, 0), &h).unwrap().value, 0.0);
        assert_relative_eq!(
            relative_entropy_of_asymmetry(&DensityOperator::bloch(FRAC_PI_2, 0.0), &h).unwrap().value,
            1.0,
            epsilon = 1e-12
        );
        let r = relative_entropy_of_asymmetry(&DensityOperator::bloch(FRAC_PI_4, 0.0), &h).unwrap();
        assert_relative_eq!(r.value, h2((PI / 8.0).cos().powi(2)), epsilon = 1e-12);
        assert_relative_eq!(r.value, 0.6009, epsilon = 1e-4);
    }

    #[test]
    fn renyi_asymmetry_of_plus_state_is_one_bit() {
        let h = SpectralHamiltonian::pauli_z(1.0);
        let plus = DensityOperator::bloch(FRAC_PI_2, 0.0);
        let opts = SolverOptions::default();
        for a in [0.5, 0.8, 1.0, 2.0, 5.0, f64::INFINITY] {
            let r = renyi_asymmetry(&plus, &h, RenyiOrder::new(a).unwrap(), &opts).unwrap();
            assert_relative_eq!(r.value, 1.0, epsilon = 1e-7);
            assert!(h.commutes_with(r.witness.matrix(), 1e-9));
        }
    }

    #[test]
    fn prop1_on_product_with_eigenstate() {
        let a = DensityOperator::basis(2, 1);
        let psi = a.tensor(&DensityOperator::bloch(0.7, 0.2)).tensor(&DensityOperator::basis(1, 0));
        let h = SpectralHamiltonian::pauli_z(1.0);
        let sides = prop1_verify(&psi, h.projectors(), RenyiOrder::new(2.0).unwrap(), &SolverOptions::default()).unwrap();
        assert_relative_eq!(sides.lhs, 0.0, epsilon = 1e-8);
        assert_relative_eq!(sides.rhs, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn prop1_rejects_bad_input() {
        let mixed = DensityOperator::maximally_mixed(2).with_dims(vec![2, 1, 1]).unwrap();
        let h = SpectralHamiltonian::pauli_z(1.0);
        let opts = SolverOptions::default();
        assert!(matches!(prop1_verify(&mixed, h.projectors(), RenyiOrder::ONE, &opts), Err(Error::NotPure { .. })));
        let pure = DensityOperator::basis(2, 0).with_dims(vec![2, 1, 1]).unwrap();
        let bad = vec![linalg::identity(2), linalg::identity(2)];
        assert!(matches!(prop1_verify(&pure, &bad, RenyiOrder::ONE, &opts), Err(Error::NotProjective(_))));
    }
}

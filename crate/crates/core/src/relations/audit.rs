use super::{AuditReport, Certificate, RelationId, Term, IDENTITY_TOL};
use crate::asymmetry::{relative_entropy_of_asymmetry, renyi_asymmetry};
use crate::clock::{build_kappa, build_omega, TimeEnsemble};
use crate::entropy::{
    self, conditional_renyi, differential_conditional_entropy, EntropyResult, Quadrature, RenyiOrder, SolverOptions,
};
use crate::error::{Error, Result};
use crate::operator::{pinch, HermitianMatrix, SpectralHamiltonian};
use crate::state::DensityOperator;

fn conditional_term(name: &str, r: &EntropyResult, closed_form: bool) -> Term {
    Term {
        name: name.into(),
        value: r.value,
        residual: r.residual,
        converged: r.converged,
        certificate: if closed_form { Certificate::Exact } else { Certificate::Lower },
    }
}

fn conjugate(alpha: RenyiOrder) -> Result<RenyiOrder> {
    alpha.conjugate().ok_or(Error::InvalidOrder(alpha.value()))
}

fn uniform_rhs(ensemble: &TimeEnsemble) -> Result<f64> {
    if !ensemble.is_discrete() || ensemble.is_empty() {
        return Err(Error::BadTimeEnsemble("a discrete ensemble is required".into()));
    }
    if !ensemble.is_uniform() {
        return Err(Error::BadTimeEnsemble("this relation assumes uniform time weights".into()));
    }
    Ok((ensemble.len() as f64).log2())
}

/// `S_α(T|X)_κ` where `κ` is built on `rho` (all of it is conditioning memory).
fn time_term(rho: &DensityOperator, h: &SpectralHamiltonian, ensemble: &TimeEnsemble, alpha: RenyiOrder, opts: &SolverOptions) -> Result<Term> {
    let kappa = build_kappa(rho, h, ensemble)?.to_density();
    let memory: Vec<usize> = (1..kappa.dims().len()).collect();
    let r = conditional_renyi(&kappa, &memory, alpha, opts)?;
    Ok(conditional_term("time", &r, alpha.is_one()))
}

/// `S_β(E|R)_ω` with `A` the first subsystem of `rho_ar`.
fn energy_term(rho_ar: &DensityOperator, h: &SpectralHamiltonian, beta: RenyiOrder, opts: &SolverOptions) -> Result<Term> {
    let omega = build_omega(rho_ar, h)?.to_density();
    let memory: Vec<usize> = (1..omega.dims().len()).collect();
    let r = conditional_renyi(&omega, &memory, beta, opts)?;
    Ok(conditional_term("energy", &r, beta.is_one()))
}

fn marginal_a(rho_ar: &DensityOperator) -> Result<DensityOperator> {
    if rho_ar.dims().len() == 1 {
        Ok(rho_ar.clone())
    } else {
        rho_ar.partial_trace(&[0])
    }
}

/// `S_α(T|A)_κ + S_β(E|R)_ω ≥ log2 |𝒯|` for `ρ_AR` with `A` the first subsystem.
pub fn audit_main(
    rho_ar: &DensityOperator,
    h: &SpectralHamiltonian,
    ensemble: &TimeEnsemble,
    alpha: RenyiOrder,
    opts: &SolverOptions,
) -> Result<AuditReport> {
    let beta = conjugate(alpha)?;
    let rhs = uniform_rhs(ensemble)?;
    let rho_a = marginal_a(rho_ar)?;
    let terms = vec![time_term(&rho_a, h, ensemble, alpha, opts)?, energy_term(rho_ar, h, beta, opts)?];
    Ok(AuditReport::new(RelationId::Main, Some(alpha), Some(beta), terms, rhs))
}

/// Memory-free form for a pure state: the energy term is the Rényi entropy
/// of the level populations.
pub fn audit_pure(
    psi: &DensityOperator,
    h: &SpectralHamiltonian,
    ensemble: &TimeEnsemble,
    alpha: RenyiOrder,
    opts: &SolverOptions,
) -> Result<AuditReport> {
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::NotPure { purity });
    }
    if psi.dim() != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: psi.dim() });
    }
    let beta = conjugate(alpha)?;
    let rhs = uniform_rhs(ensemble)?;
    let pops = h.level_populations(psi.matrix());
    let total: f64 = pops.iter().sum();
    let pops: Vec<f64> = pops.iter().map(|p| p / total).collect();
    let energy = Term::exact("energy", entropy::renyi_entropy(&pops, beta)?);
    let terms = vec![time_term(psi, h, ensemble, alpha, opts)?, energy];
    Ok(AuditReport::new(RelationId::Pure, Some(alpha), Some(beta), terms, rhs))
}

/// `S_α(T|AR₁)_κ + S_β(E|R₂)_ω ≥ log2 |𝒯|` for a state with dims `[d_A, d_R1, d_R2]`.
pub fn audit_split(
    rho: &DensityOperator,
    h: &SpectralHamiltonian,
    ensemble: &TimeEnsemble,
    alpha: RenyiOrder,
    opts: &SolverOptions,
) -> Result<AuditReport> {
    if rho.dims().len() != 3 {
        return Err(Error::BadSubsystemSpec(format!("expected subsystems A, R1, R2; got {} factors", rho.dims().len())));
    }
    if rho.dims()[0] != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: rho.dims()[0] });
    }
    let beta = conjugate(alpha)?;
    let rhs = uniform_rhs(ensemble)?;
    let rho_ar1 = rho.partial_trace(&[0, 1])?;
    let rho_ar2 = rho.partial_trace(&[0, 2])?;
    let terms = vec![time_term(&rho_ar1, h, ensemble, alpha, opts)?, energy_term(&rho_ar2, h, beta, opts)?];
    Ok(AuditReport::new(RelationId::Split, Some(alpha), Some(beta), terms, rhs))
}

/// `S(T|A)_κ + S(E|R)_ω ≥ log2 |𝒯|`. The extra `equality_gap` is
/// `D(κ_A ‖ Δ(ρ_A))`, which equals the slack whenever `ρ_AR` is pure.
pub fn audit_von_neumann(rho_ar: &DensityOperator, h: &SpectralHamiltonian, ensemble: &TimeEnsemble) -> Result<AuditReport> {
    let opts = SolverOptions::default();
    let rhs = uniform_rhs(ensemble)?;
    let rho_a = marginal_a(rho_ar)?;
    let terms = vec![
        time_term(&rho_a, h, ensemble, RenyiOrder::ONE, &opts)?,
        energy_term(rho_ar, h, RenyiOrder::ONE, &opts)?,
    ];
    let gap = kappa_marginal_gap(&rho_a, h, ensemble)?;
    Ok(AuditReport::new(RelationId::VonNeumann, Some(RenyiOrder::ONE), Some(RenyiOrder::ONE), terms, rhs).with_extra("equality_gap", gap))
}

/// `D(κ_A ‖ Δ(ρ_A))` with `κ_A = Σ_k p(k) e^{−iHt_k} ρ_A e^{iHt_k}`.
fn kappa_marginal_gap(rho_a: &DensityOperator, h: &SpectralHamiltonian, ensemble: &TimeEnsemble) -> Result<f64> {
    let kappa_a = build_kappa(rho_a, h, ensemble)?.average();
    let pinched = pinch(rho_a, h)?;
    entropy::relative_entropy(&kappa_a, &HermitianMatrix::new(pinched.into_matrix())?)
}

/// `S_α(T|A)_κ + inf_{[H,σ]=0} D_α(ρ‖σ) ≥ log2 |𝒯|`, stated for every `α > 0`.
pub fn audit_asymmetry(
    rho: &DensityOperator,
    h: &SpectralHamiltonian,
    ensemble: &TimeEnsemble,
    alpha: RenyiOrder,
    opts: &SolverOptions,
) -> Result<AuditReport> {
    let rhs = uniform_rhs(ensemble)?;
    let asym = renyi_asymmetry(rho, h, alpha, opts)?;
    let asym_term = Term {
        name: "asymmetry".into(),
        value: asym.value,
        residual: asym.residual,
        converged: asym.converged,
        certificate: if alpha.is_one() { Certificate::Exact } else { Certificate::Upper },
    };
    let terms = vec![time_term(rho, h, ensemble, alpha, opts)?, asym_term];
    Ok(AuditReport::new(RelationId::Asymmetry, Some(alpha), None, terms, rhs))
}

/// Weighted times, von Neumann case, pure `ρ_AR`: checks the exact identity
/// `S(E|R) + S(T|A) = S(T) + D(κ_A ‖ Δ(ρ_A))`. The bound is `S(T)`; extras
/// report the divergence (`residual`), the identity gap and whether the
/// equality condition holds.
pub fn audit_nonuniform(rho_ar: &DensityOperator, h: &SpectralHamiltonian, ensemble: &TimeEnsemble) -> Result<AuditReport> {
    let purity = rho_ar.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::NotPure { purity });
    }
    if !ensemble.is_discrete() {
        return Err(Error::BadTimeEnsemble("a discrete ensemble is required".into()));
    }
    let opts = SolverOptions::default();
    let rho_a = marginal_a(rho_ar)?;
    let terms = vec![
        time_term(&rho_a, h, ensemble, RenyiOrder::ONE, &opts)?,
        energy_term(rho_ar, h, RenyiOrder::ONE, &opts)?,
    ];
    let rhs = entropy::shannon_entropy(ensemble.weights())?;
    let residual = kappa_marginal_gap(&rho_a, h, ensemble)?;
    let report = AuditReport::new(RelationId::Nonuniform, Some(RenyiOrder::ONE), Some(RenyiOrder::ONE), terms, rhs);
    let gap = report.slack - residual;
    if gap.abs() > IDENTITY_TOL {
        return Err(Error::IdentityViolation { gap });
    }
    let equality = if residual <= IDENTITY_TOL { 1.0 } else { 0.0 };
    Ok(report.with_extra("residual", residual).with_extra("identity_gap", gap).with_extra("equality", equality))
}

/// `Γ_H(ρ) + s(T|A) ≥ log2 T_F` over the window `[0, T_F]`. The extra
/// `dimensionless` is `log2(T_F / 2^{s(T|A)})`.
pub fn audit_continuous(rho: &DensityOperator, h: &SpectralHamiltonian, t_final: f64, quad: &Quadrature) -> Result<AuditReport> {
    let asym = relative_entropy_of_asymmetry(rho, h)?;
    let s = differential_conditional_entropy(rho, h, t_final, quad)?;
    let time = Term { name: "time".into(), value: s.value, residual: s.delta, converged: true, certificate: Certificate::Exact };
    let terms = vec![time, Term::exact("asymmetry", asym.value)];
    let rhs = t_final.log2();
    Ok(AuditReport::new(RelationId::Continuous, Some(RenyiOrder::ONE), None, terms, rhs)
        .with_extra("dimensionless", rhs - s.value)
        .with_extra("quadrature_nodes", s.nodes as f64))
}

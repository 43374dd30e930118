//! Density operators with an explicit tensor-product layout.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, outer, CMatrix, C64};

/// Hermiticity, positivity and trace tolerance for density operators.
pub const STATE_TOL: f64 = 1e-10;

/// Positive semi-definite, unit-trace operator on `⊗_k C^{dims[k]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity. Eigenvalues in
    /// `[-1e-10, 0)` are clamped to zero and the state renormalized.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let n = linalg::ensure_square(&matrix)?;
        check_dims(&dims, n)?;
        let deviation = linalg::hermiticity_defect(&matrix);
        if deviation > STATE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = linalg::hermitian_part(&matrix);
        let trace = linalg::trace_re(&matrix);
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let eig = eigh(&matrix);
        let min = eig.min_value();
        if min < -STATE_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        if min < 0.0 {
            let clamped = eig.map(|v| v.max(0.0));
            let t = linalg::trace_re(&clamped);
            return Ok(Self { matrix: clamped.unscale(t), dims });
        }
        Ok(Self { matrix, dims })
    }

    /// Single-system state.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, vec![n])
    }

    /// Trusted constructor for operations known to preserve validity.
    pub(crate) fn from_parts(matrix: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self { matrix: linalg::hermitian_part(&matrix), dims }
    }

    /// Normalizes `matrix` by its trace. Used for operators that are PSD by construction.
    pub(crate) fn normalized(matrix: CMatrix, dims: Vec<usize>) -> Self {
        let t = linalg::trace_re(&matrix);
        Self::from_parts(matrix.unscale(t), dims)
    }

    /// `|ψ⟩⟨ψ|` for the normalized amplitude vector.
    pub fn from_pure(amplitudes: &[C64], dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::BadTrace { trace: norm * norm });
        }
        let v: Vec<C64> = amplitudes.iter().map(|a| a / norm).collect();
        Ok(Self::from_parts(outer(&v), dims))
    }

    /// Qubit pure state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let v = [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)];
        Self::from_parts(outer(&v), vec![2])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = linalg::ONE;
        Self::from_parts(m, vec![dim])
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_parts(linalg::identity(dim).unscale(dim as f64), vec![dim])
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        crate::entropy::check_distribution(probabilities)?;
        let n = probabilities.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(probabilities[i], 0.0) } else { linalg::ZERO });
        Ok(Self::from_parts(m, vec![n]))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Same operator with a different factorization of its dimension.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self { matrix: self.matrix.clone(), dims })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        crate::entropy::von_neumann_entropy(&self.matrix)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let dims = self.dims.iter().chain(other.dims.iter()).copied().collect();
        Self::from_parts(linalg::kron(&self.matrix, &other.matrix), dims)
    }

    /// Reduced state on the subsystems listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let m = linalg::partial_trace(&self.matrix, &self.dims, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        let dims = kept.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_parts(m, dims))
    }

    /// Reorders the tensor factors.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let m = linalg::permute_subsystems(&self.matrix, &self.dims, order)?;
        let dims = order.iter().map(|&o| self.dims[o]).collect();
        Ok(Self::from_parts(m, dims))
    }

    /// `U ρ U†` for a unitary `U`.
    pub fn conjugate(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: unitary.nrows() });
        }
        Ok(Self::from_parts(unitary * &self.matrix * unitary.adjoint(), self.dims.clone()))
    }

    /// Pure state on `A ⊗ A'` whose first marginal is `self`. The factor
    /// structure becomes `[dim, dim]`; the largest eigenvalue pairs with `|0⟩`.
    pub fn purify(&self) -> Self {
        let d = self.dim();
        let eig = eigh(&self.matrix);
        let mut psi = vec![linalg::ZERO; d * d];
        for (slot, j) in (0..d).rev().enumerate() {
            let w = eig.values[j].max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                psi[i * d + slot] += eig.vectors[(i, j)] * w;
            }
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = psi.iter().map(|a| a / norm).collect();
        Self::from_parts(outer(&v), vec![d, d])
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// Uhlmann fidelity `(Tr|√ρ√σ|)²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        self.same_dim(other)?;
        let root = eigh(&self.matrix).support_power(0.5);
        let inner = &root * &other.matrix * &root;
        let f: f64 = linalg::eigvalsh(&inner).iter().map(|v| v.max(0.0).sqrt()).sum();
        Ok((f * f).clamp(0.0, 1.0))
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        self.same_dim(other)?;
        Ok((0.5 * linalg::trace_norm(&(&self.matrix - &other.matrix))).clamp(0.0, 1.0))
    }
}

fn check_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != n {
        return Err(Error::BadSubsystemSpec(format!("dims {dims:?} incompatible with dimension {n}")));
    }
    Ok(())
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let rows: Vec<Vec<[f64; 2]>> =
            (0..n).map(|i| (0..n).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect()).collect();
        rows.serialize(serializer)
    }
}

//! Dense complex matrix helpers shared by every layer: Hermitian
//! eigendecomposition, spectral matrix functions, Kronecker products and
//! partial traces over an arbitrary subsystem layout.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative threshold below which an eigenvalue is treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `U f(Λ) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let s = f(v);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Threshold separating support from kernel: `SUPPORT_TOL · max(|λ|)`.
    pub fn support_cutoff(&self) -> f64 {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        SUPPORT_TOL * scale.max(f64::MIN_POSITIVE)
    }

    /// Power restricted to the support; kernel directions stay zero.
    pub fn support_power(&self, p: f64) -> CMatrix {
        let cut = self.support_cutoff();
        self.map(|v| if v > cut { v.powf(p) } else { 0.0 })
    }

    /// Orthonormal basis of the support (eigenvectors above the cutoff) as columns.
    pub fn support_basis(&self) -> CMatrix {
        let cut = self.support_cutoff();
        let cols: Vec<usize> = (0..self.values.len()).filter(|&j| self.values[j] > cut).collect();
        select_columns(&self.vectors, &cols)
    }
}

pub fn select_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn eigh(m: &CMatrix) -> Eigen {
    let n = m.nrows();
    if n == 0 {
        return Eigen { values: vec![], vectors: CMatrix::zeros(0, 0) };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = select_columns(&eig.eigenvectors, &order);
    Eigen { values, vectors }
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).values
}

/// Maximum deviation `|m - m†|` relative to the largest absolute entry.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let scale = m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let dev = (m - m.adjoint()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        0.0
    } else {
        dev / scale
    }
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// `Re Tr(a b)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

pub fn outer(v: &[C64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

fn validate_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::BadSubsystemSpec("zero-dimensional subsystem".into()));
    }
    let prod: usize = dims.iter().product();
    if prod != n {
        return Err(Error::BadSubsystemSpec(format!(
            "subsystem dims {dims:?} multiply to {prod}, matrix has dim {n}"
        )));
    }
    Ok(())
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Reorders tensor factors: factor `i` of the output is factor `order[i]` of the input.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], order: &[usize]) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    validate_dims(dims, n)?;
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() || order.iter().any(|&o| o >= dims.len() || std::mem::replace(&mut seen[o], true)) {
        return Err(Error::BadSubsystemSpec(format!("{order:?} is not a permutation of the subsystems")));
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    // input index -> output index
    let mut map = vec![0usize; n];
    let mut d_in = vec![0usize; dims.len()];
    let mut d_out = vec![0usize; dims.len()];
    for (idx, slot) in map.iter_mut().enumerate() {
        digits(idx, dims, &mut d_in);
        for (i, &o) in order.iter().enumerate() {
            d_out[i] = d_in[o];
        }
        *slot = compose(&d_out, &new_dims);
    }
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Partial trace keeping the subsystems in `keep` (any order; output keeps input order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    validate_dims(dims, n)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::BadSubsystemSpec(format!("keep set {keep:?} invalid for {} subsystems", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let order: Vec<usize> = kept.iter().chain(traced.iter()).copied().collect();
    let permuted = if order.iter().enumerate().all(|(i, &o)| i == o) {
        m.clone()
    } else {
        permute_subsystems(m, dims, &order)?
    };
    let dk: usize = kept.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    Ok(trace_out_trailing(&permuted, dk, dt))
}

/// `Tr_2` of an operator on `C^{d1} ⊗ C^{d2}`.
pub fn trace_out_trailing(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|t| m[(i * d2 + t, j * d2 + t)]).sum())
}

/// `Tr_1` of an operator on `C^{d1} ⊗ C^{d2}`.
pub fn trace_out_leading(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d2, d2, |i, j| (0..d1).map(|t| m[(t * d2 + i, t * d2 + j)]).sum())
}

/// Divided difference of `f` at `(a, b)`, falling back to the derivative when the points coincide.
pub fn divided_difference(a: f64, b: f64, f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= 1e-8 * scale || scale == 0.0 {
        df(0.5 * (a + b))
    } else {
        (f(a) - f(b)) / (a - b)
    }
}

/// Gradient (Riesz representer) of `X ↦ Re Tr[A f(X)]` at Hermitian `X` with eigensystem `eig`.
pub fn frechet_adjoint(eig: &Eigen, a: &CMatrix, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> CMatrix {
    let u = &eig.vectors;
    let mut inner = u.adjoint() * a * u;
    let n = eig.values.len();
    for i in 0..n {
        for j in 0..n {
            inner[(i, j)] *= divided_difference(eig.values[i], eig.values[j], &f, &df);
        }
    }
    u * inner * u.adjoint()
}

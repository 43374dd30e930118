//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond the matrix type.

#![allow(dead_code)]

use clockbound::linalg::{CMatrix, C64};
use nalgebra::SymmetricEigen;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Hermitian function by diagonalization, kernel (below `cut`) mapped to zero.
pub fn mat_fn(m: &CMatrix, f: impl Fn(f64) -> f64, cut: f64) -> CMatrix {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(h);
    let d = eig.eigenvalues.map(|v| if v > cut { c(f(v)) } else { c(0.0) });
    &eig.eigenvectors * CMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

pub fn eigs(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn entropy(m: &CMatrix) -> f64 {
    eigs(m).iter().filter(|&&v| v > 1e-15).map(|v| -v * v.log2()).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `D_α(ρ‖σ)` straight from the sandwiched formula. For `α > 1` a singular
/// `σ` is treated as infinitely far (callers pass full-rank `ρ` marginals).
pub fn sandwiched(rho: &CMatrix, sigma: &CMatrix, alpha: f64) -> f64 {
    if alpha > 1.0 && eigs(sigma)[0] <= 1e-12 {
        return f64::INFINITY;
    }
    if alpha.is_infinite() {
        let s = mat_fn(sigma, |v| v.powf(-0.5), 0.0);
        return eigs(&(&s * rho * &s)).last().unwrap().log2();
    }
    if (alpha - 1.0).abs() < 1e-12 {
        let log_r = mat_fn(rho, f64::log2, 1e-14);
        let log_s = mat_fn(sigma, f64::log2, 0.0);
        return (rho * (log_r - log_s)).trace().re;
    }
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s = mat_fn(sigma, |v| v.powf(g), 0.0);
    let inner = &s * rho * &s;
    let q: f64 = eigs(&inner).iter().filter(|&&v| v > 0.0).map(|v| v.powf(alpha)).sum();
    q.log2() / (alpha - 1.0)
}

/// Qubit state from a point of the Bloch ball.
pub fn bloch_ball(x: f64, y: f64, z: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0 + z) * 0.5, C64::new(x, -y) * 0.5, C64::new(x, y) * 0.5, c(1.0 - z) * 0.5])
}

/// `min_σ D_α(ρ_XB ‖ I_X ⊗ σ_B)` for a qubit `B` (last factor) by a grid over
/// the closed Bloch ball followed by a shrinking pattern search. Coordinates
/// are `(u, θ, φ)` with radius `sin²u`, so pure `σ` are reachable. Returns
/// the smallest divergence found, an upper bound on the true minimum.
pub fn brute_min_divergence_qubit(rho: &CMatrix, d_x: usize, alpha: f64) -> f64 {
    let id = CMatrix::identity(d_x, d_x);
    let f = |p: [f64; 3]| {
        let r = p[0].sin().powi(2);
        let (x, y, z) = (r * p[1].sin() * p[2].cos(), r * p[1].sin() * p[2].sin(), r * p[1].cos());
        let v = sandwiched(rho, &kron(&id, &bloch_ball(x, y, z)), alpha);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let n = 16;
    let mut best = ([0.0; 3], f([0.0; 3]));
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..(2 * n) {
                let p = [
                    std::f64::consts::FRAC_PI_2 * i as f64 / n as f64,
                    std::f64::consts::PI * j as f64 / n as f64,
                    std::f64::consts::PI * k as f64 / n as f64,
                ];
                let v = f(p);
                if v < best.1 {
                    best = (p, v);
                }
            }
        }
    }
    let mut step = 0.2;
    while step > 1e-9 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut p = best.0;
                p[axis] += sign * step;
                let v = f(p);
                if v < best.1 {
                    best = (p, v);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.1
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&q| q > 0.0).map(|q| -q * q.log2()).sum()
}

/// Rényi entropy of a distribution.
pub fn renyi(p: &[f64], alpha: f64) -> f64 {
    let p: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    if alpha.is_infinite() {
        return -p.iter().copied().fold(0.0, f64::max).log2();
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return p.iter().map(|x| -x * x.log2()).sum();
    }
    p.iter().map(|x| x.powf(alpha)).sum::<f64>().log2() / (1.0 - alpha)
}

//! Random states, unitaries and Hamiltonians for campaigns and tests.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{self, CMatrix, C64};
use crate::operator::{default_grouping_tol, spectral_decompose, HermitianMatrix, SpectralHamiltonian};
use crate::state::DensityOperator;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// `d × d` complex Ginibre matrix.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix on `R`).
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { linalg::ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// GUE matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, d, rng);
    HermitianMatrix::new(linalg::hermitian_part(&g)).expect("Hermitian by construction")
}

pub fn hamiltonian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> SpectralHamiltonian {
    let m = hermitian(d, rng);
    spectral_decompose(&m, default_grouping_tol(0.0)).expect("positive tolerance")
}

/// Hamiltonian with the given spectrum in a Haar-random eigenbasis.
pub fn hamiltonian_with_spectrum<R: Rng + ?Sized>(energies: &[f64], rng: &mut R) -> SpectralHamiltonian {
    let u = unitary(energies.len(), rng);
    let d = DVector::from_iterator(energies.len(), energies.iter().map(|&e| C64::new(e, 0.0)));
    let m = &u * CMatrix::from_diagonal(&d) * u.adjoint();
    let scale = energies.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    spectral_decompose(&HermitianMatrix::new(m).expect("Hermitian"), default_grouping_tol(scale)).expect("positive tolerance")
}

/// Uniformly random pure state on `⊗ dims`.
pub fn pure_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityOperator {
    let d: usize = dims.iter().product();
    let amps: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    DensityOperator::from_pure(&amps, dims.to_vec()).expect("nonzero vector")
}

/// Random density operator of the given rank (normalized Wishart).
pub fn density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(d, rank.max(1), rng);
    let w = &g * g.adjoint();
    let t = linalg::trace_re(&w);
    DensityOperator::from_matrix(w.unscale(t)).expect("PSD by construction")
}

/// Flat Dirichlet sample of length `k`.
pub fn weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// State diagonal in the eigenbasis of `h`, with random populations spread
/// over each eigenspace.
pub fn stationary_state<R: Rng + ?Sized>(h: &SpectralHamiltonian, rng: &mut R) -> DensityOperator {
    let n = h.dim();
    let mut m = CMatrix::zeros(n, n);
    for (p, w) in h.projectors().iter().zip(weights(h.len(), rng)) {
        let rank = linalg::trace_re(p).round().max(1.0);
        m += p.scale(w / rank);
    }
    DensityOperator::from_matrix(m).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = unitary(4, &mut rng);
        assert!((u.adjoint() * &u - linalg::identity(4)).norm() < 1e-12);
    }

    #[test]
    fn planted_degeneracy_is_grouped() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = hamiltonian_with_spectrum(&[0.0, 1.0, 2.0, 2.0, 3.0, 4.0], &mut rng);
        assert_eq!(h.len(), 5);
        assert_eq!(h.rank(2), 2);
    }

    #[test]
    fn stationary_states_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = hamiltonian(3, &mut rng);
        let rho = stationary_state(&h, &mut rng);
        assert!(h.commutes_with(rho.matrix(), 1e-10));
        let w = weights(5, &mut rng);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

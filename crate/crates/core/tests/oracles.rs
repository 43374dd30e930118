mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use clockbound::entropy::{conditional_renyi, renyi_entropy, sandwiched_relative_entropy};
use clockbound::linalg::{CMatrix, C64};
use clockbound::relations::{audit_main, audit_pure, audit_split, parse_bits, speed_limit_check, toeplitz_extract};
use clockbound::{
    build_kappa, build_omega, differential_conditional_entropy, helstrom, pretty_good_measurement, random,
    relative_entropy_of_asymmetry, DensityOperator, HermitianMatrix, Quadrature, RenyiOrder, SolverOptions,
    SpectralHamiltonian, TimeEnsemble,
};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn order(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn sandwiched_divergence_matches_direct_formula() {
    let mut r = rng(1);
    for _ in 0..5 {
        let rho = random::density(3, 3, &mut r);
        let sigma = random::density(3, 3, &mut r);
        for a in [0.5, 0.8, 1.0, 1.7, 4.0, f64::INFINITY] {
            let lib = sandwiched_relative_entropy(&rho, &HermitianMatrix::new(sigma.matrix().clone()).unwrap(), order(a)).unwrap();
            let oracle = sandwiched(rho.matrix(), sigma.matrix(), a);
            assert!((lib - oracle).abs() < 1e-9, "alpha {a}: {lib} vs {oracle}");
        }
    }
}

#[test]
fn commuting_divergence_is_classical() {
    let p = [0.5, 0.3, 0.2];
    let q = [0.2, 0.2, 0.6];
    let rho = DensityOperator::diagonal(&p).unwrap();
    let sigma = HermitianMatrix::from_real_diagonal(&q);
    for a in [0.5, 2.0, 3.0] {
        let classical = p.iter().zip(&q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum::<f64>().log2() / (a - 1.0);
        let lib = sandwiched_relative_entropy(&rho, &sigma, order(a)).unwrap();
        assert!((lib - classical).abs() < 1e-12);
    }
}

/// The optimized conditional entropy of a qubit-conditioned state against a
/// brute-force search over the Bloch ball. The solver's value must be attained
/// by its own witness and agree with the search within the solver tolerance.
fn check_against_grid(state: &DensityOperator, d_x: usize, alpha: f64) {
    let lib = conditional_renyi(state, &[1], order(alpha), &SolverOptions::default()).unwrap();
    let witness = lib.witness.as_ref().expect("optimized entropies carry a witness");
    let attained = sandwiched(state.matrix(), &kron(&CMatrix::identity(d_x, d_x), witness.matrix()), alpha);
    let lib_min = -lib.value;
    assert!((attained - lib_min).abs() < 1e-7, "alpha {alpha}: witness gives {attained}, reported {lib_min}");
    let grid = brute_min_divergence_qubit(state.matrix(), d_x, alpha);
    assert!(lib.converged);
    assert!((lib_min - grid).abs() < 1e-6, "alpha {alpha}: solver {lib_min} vs grid {grid}");
}

#[test]
fn time_entropy_matches_bloch_grid() {
    let h = SpectralHamiltonian::pauli_z(1.0);
    let ens = TimeEnsemble::uniform(vec![0.0, 1.0]).unwrap();
    for theta in [FRAC_PI_4, FRAC_PI_2, 2.0] {
        let rho = DensityOperator::bloch(theta, 0.3);
        let kappa = build_kappa(&rho, &h, &ens).unwrap().to_density();
        for a in [0.5, 0.7, 2.0, 5.0] {
            check_against_grid(&kappa, 2, a);
        }
    }
}

#[test]
fn energy_entropy_with_qubit_memory_matches_bloch_grid() {
    let mut r = rng(5);
    let h = random::hamiltonian(2, &mut r);
    for _ in 0..2 {
        let psi = random::pure_state(&[2, 2], &mut r);
        let omega = build_omega(&psi, &h).unwrap().to_density();
        for a in [0.5, 2.0, 3.0] {
            check_against_grid(&omega, 2, a);
        }
    }
}

#[test]
fn classical_register_without_memory() {
    let h = SpectralHamiltonian::diagonal(&[0.0, 1.0, 3.0]);
    let amps = [C64::new(0.8_f64.sqrt(), 0.0), C64::new(0.15_f64.sqrt(), 0.0), C64::new(0.0, 0.05_f64.sqrt())];
    let psi = DensityOperator::from_pure(&amps, vec![3]).unwrap();
    let omega = build_omega(&psi, &h).unwrap().to_density();
    for a in [0.5, 1.0, 2.0, f64::INFINITY] {
        let lib = conditional_renyi(&omega, &[1], order(a), &SolverOptions::default()).unwrap().value;
        let expected = renyi(&[0.8, 0.15, 0.05], a);
        assert!((lib - expected).abs() < 1e-8, "alpha {a}: {lib} vs {expected}");
        assert!((renyi_entropy(&[0.8, 0.15, 0.05], order(a)).unwrap() - expected).abs() < 1e-12);
    }
}

/// `|⟨ψ(0)|ψ(t)⟩|` for a spin at polar angle θ under `κσ_z`.
fn spin_overlap(theta: f64, kappa: f64, t: f64) -> f64 {
    let (c2, s2) = ((theta / 2.0).cos().powi(2), (theta / 2.0).sin().powi(2));
    (C64::from_polar(c2, kappa * t) + C64::from_polar(s2, -kappa * t)).norm()
}

#[test]
fn spin_figure_quantities_in_closed_form() {
    let h = SpectralHamiltonian::pauli_z(1.0);
    let ens = TimeEnsemble::equally_spaced(2, 2.0).unwrap();
    for i in 0..=12 {
        let theta = PI * i as f64 / 12.0;
        let rho = DensityOperator::bloch(theta, 0.0);
        let gamma = relative_entropy_of_asymmetry(&rho, &h).unwrap().value;
        assert!((gamma - h2((theta / 2.0).cos().powi(2))).abs() < 1e-10);
        // Pure conditionals: S(T|A) = 1 − S(average), average eigenvalues (1 ± |overlap|)/2.
        let kappa = build_kappa(&rho, &h, &ens).unwrap().to_density();
        let s = conditional_renyi(&kappa, &[1], RenyiOrder::ONE, &SolverOptions::default()).unwrap().value;
        let expected = 1.0 - h2(0.5 * (1.0 + spin_overlap(theta, 1.0, 1.0)));
        assert!((s - expected).abs() < 1e-10, "theta {theta}: {s} vs {expected}");
    }
}

#[test]
fn continuous_time_entropy_matches_dense_simpson() {
    let h = SpectralHamiltonian::pauli_z(1.0);
    for (theta, t_final) in [(FRAC_PI_4, 2.0), (FRAC_PI_2, 2.0), (1.1, 0.7)] {
        let rho = DensityOperator::bloch(theta, 0.0);
        let lib = differential_conditional_entropy(&rho, &h, t_final, &Quadrature::default()).unwrap();
        // For pure ρ(t): D(ρ(t)‖ρ̄) = −⟨ψ(t)|log2 ρ̄|ψ(t)⟩ with ρ̄ = time average.
        let n = 20_000;
        let family = |t: f64| {
            let a = C64::from_polar((theta / 2.0).cos(), -t);
            let b = C64::from_polar((theta / 2.0).sin(), t);
            CMatrix::from_row_slice(2, 1, &[a, b])
        };
        let mut avg = CMatrix::zeros(2, 2);
        let mut weights = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            weights.push(w);
            let v = family(t_final * k as f64 / n as f64);
            avg += (&v * v.adjoint()) * c(w);
        }
        let norm: f64 = weights.iter().sum();
        avg /= c(norm);
        let log_avg = mat_fn(&avg, f64::log2, 1e-14);
        let mean_d: f64 = (0..=n)
            .map(|k| {
                let v = family(t_final * k as f64 / n as f64);
                -(v.adjoint() * &log_avg * &v)[(0, 0)].re * weights[k]
            })
            .sum::<f64>()
            / norm;
        let oracle = t_final.log2() - mean_d;
        assert!((lib.value - oracle).abs() < 1e-7, "{} vs {oracle}", lib.value);
    }
}

#[test]
fn helstrom_and_pgm_against_pure_state_formulas() {
    let zero = DensityOperator::basis(2, 0);
    let mut r = rng(8);
    for _ in 0..5 {
        let psi = random::pure_state(&[3], &mut r);
        let phi = random::pure_state(&[3], &mut r);
        let overlap = (psi.matrix() * phi.matrix()).trace().re;
        let (p, povm) = helstrom(&psi, &phi, 0.5).unwrap();
        assert!((p - 0.5 * (1.0 + (1.0 - overlap).sqrt())).abs() < 1e-10);
        assert!(((&povm[0] + &povm[1]) - CMatrix::identity(3, 3)).norm() < 1e-10);
    }
    let plus = DensityOperator::bloch(FRAC_PI_2, 0.0);
    assert!((helstrom(&zero, &plus, 0.5).unwrap().0 - 0.5 * (1.0 + 1.0 / SQRT_2)).abs() < 1e-12);

    // Three trine-like states from |+⟩ under σ_z at t = 0, 2π/3, 4π/3 (gap 2).
    let h = SpectralHamiltonian::pauli_z(1.0);
    let gap = 2.0;
    let ens = TimeEnsemble::uniform((0..3).map(|k| 2.0 * PI * k as f64 / 3.0 / gap).collect()).unwrap();
    let kappa = build_kappa(&plus, &h, &ens).unwrap();
    let (p, _) = pretty_good_measurement(&kappa);
    // Symmetric pure-state ensemble: the PGM is optimal with p = (1/K)(Σ_j √λ_j)² over the Gram eigenvalues λ = {3/2, 3/2, 0}.
    let expected = (2.0 * 1.5f64.sqrt()).powi(2) / 9.0;
    assert!((p - expected).abs() < 1e-10, "{p} vs {expected}");
    let s_min = conditional_renyi(&kappa.to_density(), &[1], RenyiOrder::INFINITY, &SolverOptions::default()).unwrap();
    let optimum = (-s_min.value).exp2();
    assert!(p > 1.0 / 3.0 && p <= optimum + 1e-8);
}

/// Toeplitz product against an explicitly assembled GF(2) matrix.
#[test]
fn toeplitz_against_explicit_matrix() {
    let mut state = 0x2545_f491_u64;
    let mut bit = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state & 1 == 1
    };
    for (n, m) in [(4, 2), (9, 5), (16, 16), (31, 7)] {
        let raw: Vec<bool> = (0..n).map(|_| bit()).collect();
        let seed: Vec<bool> = (0..n + m - 1).map(|_| bit()).collect();
        let matrix: Vec<Vec<u8>> = (0..m).map(|i| (0..n).map(|j| u8::from(seed[i + n - 1 - j])).collect()).collect();
        let expected: String = matrix
            .iter()
            .map(|row| {
                let s: u32 = row.iter().zip(&raw).map(|(a, &b)| u32::from(*a) * u32::from(b)).sum();
                if s % 2 == 1 { '1' } else { '0' }
            })
            .collect();
        assert_eq!(toeplitz_extract(&raw, m, &seed).unwrap().to_string(), expected);
    }
    // 1010 with seed 10011: rows (1,0,0,1) and (1,1,0,0) give 1 and 1.
    let out = toeplitz_extract(&parse_bits("1010").unwrap(), 2, &parse_bits("10011").unwrap()).unwrap();
    assert_eq!(out.to_string(), "11");
}

#[test]
fn memory_lowers_the_energy_term() {
    let mut r = rng(21);
    let h = random::hamiltonian(2, &mut r);
    let ens = TimeEnsemble::uniform(vec![0.0, 0.9]).unwrap();
    let opts = SolverOptions::default();
    for _ in 0..3 {
        let rho_a = random::density(2, 2, &mut r);
        let purified = rho_a.purify();
        for a in [0.5, 2.0] {
            let with_memory = audit_main(&purified, &h, &ens, order(a), &opts).unwrap();
            let without = audit_main(&rho_a, &h, &ens, order(a), &opts).unwrap();
            assert!(with_memory.slack <= without.slack + 1e-8);
            assert!(with_memory.slack >= -1e-6);
        }
    }
    // Pure ψ_A: a product memory changes nothing.
    let psi = DensityOperator::bloch(FRAC_PI_4, 0.0);
    let ens = TimeEnsemble::uniform(vec![0.0, 1.0]).unwrap();
    let main = audit_main(&psi.tensor(&DensityOperator::basis(2, 0)), &SpectralHamiltonian::pauli_z(1.0), &ens, order(2.0), &opts).unwrap();
    let pure = audit_pure(&psi, &SpectralHamiltonian::pauli_z(1.0), &ens, order(2.0), &opts).unwrap();
    assert!((main.slack - pure.slack).abs() < 1e-7);
    assert!(pure.slack >= -1e-6);
}

#[test]
fn split_memory_helps_the_time_term() {
    let h = SpectralHamiltonian::pauli_z(1.0);
    let ens = TimeEnsemble::uniform(vec![0.0, 1.0]).unwrap();
    let opts = SolverOptions::default();
    let r = 0.5f64.sqrt();
    // (|00⟩ + |11⟩)/√2 on A R1, trivial R2.
    let bell = DensityOperator::from_pure(&[C64::new(r, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0)], vec![2, 2, 1]).unwrap();
    let split = audit_split(&bell, &h, &ens, order(2.0), &opts).unwrap();
    let alone = audit_main(&bell.partial_trace(&[0]).unwrap(), &h, &ens, order(2.0), &opts).unwrap();
    assert!(split.term("time").unwrap() < alone.term("time").unwrap() - 1e-3);
    assert!(split.slack >= -1e-6);

    // Trivial R1 reproduces the main audit.
    let mut g = rng(3);
    let psi = random::pure_state(&[2, 1, 2], &mut g);
    let s = audit_split(&psi, &h, &ens, order(0.7), &opts).unwrap();
    let m = audit_main(&psi.with_dims(vec![2, 2]).unwrap(), &h, &ens, order(0.7), &opts).unwrap();
    assert!((s.lhs - m.lhs).abs() < 1e-7);

    // GHZ across A, R1, R2.
    let ghz = DensityOperator::from_pure(
        &(0..8).map(|i| if i == 0 || i == 7 { C64::new(r, 0.0) } else { C64::new(0.0, 0.0) }).collect::<Vec<_>>(),
        vec![2, 2, 2],
    )
    .unwrap();
    for a in [0.5, 1.0, 3.0] {
        assert!(audit_split(&ghz, &h, &ens, order(a), &opts).unwrap().slack >= -1e-6);
    }
}

#[test]
fn qutrit_without_orthogonal_triple() {
    // Populations (0.8, 0.15, 0.05): S_{1/2}(E) < log2 3, so no three
    // mutually orthogonal evolved states can exist. Step 1e-3 over one period.
    let h = SpectralHamiltonian::diagonal(&[0.0, 1.0, 2.0]);
    let amps = [C64::new(0.8_f64.sqrt(), 0.0), C64::new(0.15_f64.sqrt(), 0.0), C64::new(0.05_f64.sqrt(), 0.0)];
    let psi = DensityOperator::from_pure(&amps, vec![3]).unwrap();
    assert!(renyi(&[0.8, 0.15, 0.05], 0.5) < 3f64.log2());
    let grid: Vec<f64> = (1..=(2.0 * PI / 1e-3) as usize).map(|i| i as f64 * 1e-3).collect();
    let r = speed_limit_check(&psi, &h, 3, Some(&grid), &SolverOptions::default()).unwrap();
    assert!(r.orthogonalizing_t.is_none());
    assert!(r.min_pairwise_fidelity > 1e-3);
    // The equal superposition does orthogonalize, at t = 2π/3.
    let s = 1.0 / 3f64.sqrt();
    let eq = DensityOperator::from_pure(&[C64::new(s, 0.0); 3], vec![3]).unwrap();
    let r = speed_limit_check(&eq, &h, 3, None, &SolverOptions::default()).unwrap();
    assert!((r.orthogonalizing_t.unwrap() - 2.0 * PI / 3.0).abs() < 1e-6);
    assert!(r.contrapositive_holds);
}


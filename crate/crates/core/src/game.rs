//! Monte Carlo simulation of the clock guessing game.
//!
//! Bob prepares `ρ_AR` and hands `A` to Alice. A fair coin picks the branch:
//! in the time branch Alice evolves `A` for a time `t_k` drawn from the
//! ensemble and returns it, and Bob guesses `k` by measuring `A`; in the
//! energy branch Alice measures the energy of `A` and Bob guesses the level
//! by measuring `R`. Outcomes are drawn with exact Born probabilities.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so
//! results do not depend on scheduling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clock::{build_kappa, build_omega, CqState, TimeEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMatrix};
use crate::operator::SpectralHamiltonian;
use crate::state::DensityOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Coin first, then the time evolution in the time branch.
    Figure1,
    /// Alice evolves the clock before flipping the coin.
    AppendixA,
}

/// Bob's measurement on the returned clock.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Optimal binary discrimination; needs exactly two times.
    Helstrom,
    PrettyGood,
    /// One POVM element per time, in ensemble order.
    Custom(Vec<CMatrix>),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Helstrom => "helstrom",
            Self::PrettyGood => "pgm",
            Self::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GameConfig {
    /// Joint state with `A` first; a single factor means Bob keeps no memory.
    pub state: DensityOperator,
    pub hamiltonian: SpectralHamiltonian,
    pub ensemble: TimeEnsemble,
    pub trials: u64,
    pub seed: u64,
    pub variant: Variant,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameResult {
    pub trials: u64,
    pub time_trials: u64,
    pub energy_trials: u64,
    pub time_branch_wins: u64,
    pub energy_branch_wins: u64,
    pub empirical_p_win: f64,
    pub predicted_p_win: f64,
    /// Binomial standard error of `empirical_p_win`.
    pub std_error: f64,
    pub time_p_win: f64,
    pub time_std_error: f64,
    pub predicted_time_p_win: f64,
    pub predicted_energy_p_win: f64,
}

/// Optimal discrimination of `ρ₀` (prior `prior`) from `ρ₁`. Returns the
/// success probability `½(1 + ‖prior·ρ₀ − (1−prior)·ρ₁‖₁)` and the POVM
/// `{P₊, I − P₊}` with `P₊` the projector onto the positive part.
pub fn helstrom(rho0: &DensityOperator, rho1: &DensityOperator, prior: f64) -> Result<(f64, Vec<CMatrix>)> {
    if !(0.0..=1.0).contains(&prior) {
        return Err(Error::NotADistribution(format!("prior {prior} outside [0, 1]")));
    }
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimMismatch { expected: rho0.dim(), found: rho1.dim() });
    }
    let gamma = rho0.matrix().scale(prior) - rho1.matrix().scale(1.0 - prior);
    let eig = eigh(&gamma);
    let positive = eig.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let rest = linalg::identity(rho0.dim()) - &positive;
    let p = 0.5 * (1.0 + eig.values.iter().map(|v| v.abs()).sum::<f64>());
    Ok((p.clamp(prior.max(1.0 - prior), 1.0), vec![positive, rest]))
}

/// `M_k = ρ̄^{−1/2} w_k ρ_k ρ̄^{−1/2}` on the support of `ρ̄ = Σ_k w_k ρ_k`.
/// The kernel projector is added to the first element so the POVM is
/// complete; it is never triggered by the ensemble itself.
pub fn pretty_good_measurement(ensemble: &CqState) -> (f64, Vec<CMatrix>) {
    let avg = ensemble.average();
    let eig = eigh(avg.matrix());
    let root = eig.support_power(-0.5);
    let cut = eig.support_cutoff();
    let kernel = eig.map(|v| if v > cut { 0.0 } else { 1.0 });
    let mut povm: Vec<CMatrix> = ensemble
        .weights
        .iter()
        .zip(&ensemble.conditionals)
        .map(|(w, c)| linalg::hermitian_part(&(&root * c.matrix().scale(*w) * &root)))
        .collect();
    if let Some(first) = povm.first_mut() {
        *first += kernel;
    }
    let p = success_probability(ensemble, &povm);
    (p, povm)
}

fn success_probability(ensemble: &CqState, povm: &[CMatrix]) -> f64 {
    ensemble
        .weights
        .iter()
        .zip(&ensemble.conditionals)
        .zip(povm)
        .map(|((w, c), m)| w * linalg::trace_product_re(m, c.matrix()))
        .sum()
}

fn validate_povm(povm: &[CMatrix], dim: usize, count: usize) -> Result<()> {
    if povm.len() != count {
        return Err(Error::InvalidStrategy(format!("expected {count} POVM elements, got {}", povm.len())));
    }
    let mut total = CMatrix::zeros(dim, dim);
    for (j, m) in povm.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::InvalidStrategy(format!("POVM element {j} is not {dim}×{dim}")));
        }
        if linalg::hermiticity_defect(m) > 1e-9 {
            return Err(Error::InvalidStrategy(format!("POVM element {j} is not Hermitian")));
        }
        if linalg::eigvalsh(m).first().is_some_and(|&v| v < -1e-9) {
            return Err(Error::InvalidStrategy(format!("POVM element {j} is not positive")));
        }
        total += m;
    }
    if (total - linalg::identity(dim)).norm() > 1e-8 {
        return Err(Error::InvalidStrategy("POVM elements do not sum to the identity".into()));
    }
    Ok(())
}

/// Outcome distribution of `povm` on `rho`.
fn born(povm: &[CMatrix], rho: &CMatrix) -> Vec<f64> {
    povm.iter().map(|m| linalg::trace_product_re(m, rho).max(0.0)).collect()
}

/// How Bob answers in the energy branch, given the level Alice saw.
enum EnergyGuess {
    /// No memory: always the most likely level.
    Fixed(usize),
    /// `outcomes[k][ε]`: Bob's outcome distribution on `R` when the clock was
    /// evolved by `t_k` (one entry when the evolution is irrelevant).
    Measured(Vec<Vec<Option<WeightedIndex<f64>>>>),
}

struct Tables {
    times: WeightedIndex<f64>,
    levels: Vec<Option<WeightedIndex<f64>>>,
    /// `time_outcomes[k]`: Bob's outcome distribution when the clock was evolved by `t_k`.
    time_outcomes: Vec<Option<WeightedIndex<f64>>>,
    energy: EnergyGuess,
}

fn index(p: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(p.iter().map(|v| v.max(0.0))).ok()
}

fn energy_povm(omega: &CqState, strategy: &Strategy) -> Result<Vec<CMatrix>> {
    if matches!(strategy, Strategy::Helstrom) && omega.len() == 2 {
        let (_, povm) = helstrom(&omega.conditionals[0], &omega.conditionals[1], omega.weights[0])?;
        Ok(povm)
    } else {
        Ok(pretty_good_measurement(omega).1)
    }
}

/// Runs the game. Predictions use the same POVMs as the simulated Bob.
pub fn simulate(config: &GameConfig) -> Result<GameResult> {
    if config.trials == 0 {
        return Err(Error::InvalidStrategy("at least one trial is required".into()));
    }
    let h = &config.hamiltonian;
    let rho = &config.state;
    let d_a = rho.dims()[0];
    if d_a != h.dim() {
        return Err(Error::DimMismatch { expected: h.dim(), found: d_a });
    }
    let rho_a = if rho.dims().len() == 1 { rho.clone() } else { rho.partial_trace(&[0])? };
    let kappa = build_kappa(&rho_a, h, &config.ensemble)?;
    let k = kappa.len();
    let time_povm = match &config.strategy {
        Strategy::Helstrom => {
            if k != 2 {
                return Err(Error::InvalidStrategy(format!("helstrom needs exactly two times, got {k}")));
            }
            helstrom(&kappa.conditionals[0], &kappa.conditionals[1], kappa.weights[0])?.1
        }
        Strategy::PrettyGood => pretty_good_measurement(&kappa).1,
        Strategy::Custom(povm) => {
            validate_povm(povm, d_a, k)?;
            povm.clone()
        }
    };
    let predicted_time = success_probability(&kappa, &time_povm);

    let omega = build_omega(rho, h)?;
    let memoryless = omega.quantum_dim() == 1;
    let (energy, predicted_energy) = if memoryless {
        let mut best = 0;
        for (j, w) in omega.weights.iter().enumerate() {
            if *w > omega.weights[best] {
                best = j;
            }
        }
        (EnergyGuess::Fixed(best), omega.weights[best])
    } else {
        let povm = energy_povm(&omega, &config.strategy)?;
        let predicted = success_probability(&omega, &povm);
        let records: Vec<CqState> = match config.variant {
            Variant::Figure1 => vec![omega.clone()],
            Variant::AppendixA => {
                let lifted = crate::clock::lift(h, rho)?;
                config
                    .ensemble
                    .times()
                    .iter()
                    .map(|&t| {
                        let u = lifted.unitary(t);
                        let evolved = DensityOperator::from_parts(&u * rho.matrix() * u.adjoint(), rho.dims().to_vec());
                        build_omega(&evolved, h)
                    })
                    .collect::<Result<_>>()?
            }
        };
        let tables = records.iter().map(|r| r.conditionals.iter().map(|c| index(&born(&povm, c.matrix()))).collect()).collect();
        (EnergyGuess::Measured(tables), predicted)
    };

    let tables = Tables {
        times: index(&kappa.weights).ok_or_else(|| Error::NotADistribution("time weights".into()))?,
        levels: vec![index(&omega.weights)],
        time_outcomes: kappa.conditionals.iter().map(|c| index(&born(&time_povm, c.matrix()))).collect(),
        energy,
    };
    let variant = config.variant;
    let seed = config.seed;

    let (tw, tn, ew, en) = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            play(&tables, variant, &mut rng)
        })
        .fold(
            || (0u64, 0u64, 0u64, 0u64),
            |acc, (time_branch, win)| {
                let w = u64::from(win);
                if time_branch {
                    (acc.0 + w, acc.1 + 1, acc.2, acc.3)
                } else {
                    (acc.0, acc.1, acc.2 + w, acc.3 + 1)
                }
            },
        )
        .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));

    let n = config.trials as f64;
    let p = (tw + ew) as f64 / n;
    let time_p = if tn > 0 { tw as f64 / tn as f64 } else { 0.0 };
    Ok(GameResult {
        trials: config.trials,
        time_trials: tn,
        energy_trials: en,
        time_branch_wins: tw,
        energy_branch_wins: ew,
        empirical_p_win: p,
        predicted_p_win: 0.5 * (predicted_time + predicted_energy),
        std_error: (p * (1.0 - p) / n).sqrt(),
        time_p_win: time_p,
        time_std_error: if tn > 0 { (time_p * (1.0 - time_p) / tn as f64).sqrt() } else { 0.0 },
        predicted_time_p_win: predicted_time,
        predicted_energy_p_win: predicted_energy,
    })
}

fn sample(dist: &Option<WeightedIndex<f64>>, rng: &mut impl Rng) -> Option<usize> {
    dist.as_ref().map(|d| d.sample(rng))
}

/// One round; returns `(time branch?, Bob won?)`.
fn play(tables: &Tables, variant: Variant, rng: &mut ChaCha8Rng) -> (bool, bool) {
    let (time_branch, k) = match variant {
        Variant::Figure1 => {
            let coin = rng.random::<bool>();
            let k = if coin { tables.times.sample(rng) } else { 0 };
            (coin, k)
        }
        Variant::AppendixA => {
            let k = tables.times.sample(rng);
            (rng.random::<bool>(), k)
        }
    };
    if time_branch {
        let guess = sample(&tables.time_outcomes[k], rng);
        return (true, guess == Some(k));
    }
    let Some(level) = sample(&tables.levels[0], rng) else {
        return (false, false);
    };
    let win = match &tables.energy {
        EnergyGuess::Fixed(g) => *g == level,
        EnergyGuess::Measured(records) => {
            let record = if records.len() == 1 { &records[0] } else { &records[k] };
            sample(&record[level], rng) == Some(level)
        }
    };
    (false, win)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn helstrom_closed_forms() {
        let zero = DensityOperator::basis(2, 0);
        let one = DensityOperator::basis(2, 1);
        let plus = DensityOperator::bloch(FRAC_PI_2, 0.0);
        assert_relative_eq!(helstrom(&zero, &one, 0.5).unwrap().0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(helstrom(&zero, &plus, 0.5).unwrap().0, 0.5 * (1.0 + 1.0 / SQRT_2), epsilon = 1e-12);
        assert_relative_eq!(helstrom(&plus, &plus, 0.3).unwrap().0, 0.7, epsilon = 1e-12);
        assert!(helstrom(&zero, &DensityOperator::basis(3, 0), 0.5).is_err());
    }

    #[test]
    fn pgm_on_identical_states_is_a_guess() {
        let c = DensityOperator::bloch(0.4, 0.3);
        let ens = CqState { labels: vec![0.0, 1.0, 2.0], weights: vec![1.0 / 3.0; 3], conditionals: vec![c.clone(), c.clone(), c] };
        let (p, povm) = pretty_good_measurement(&ens);
        assert_relative_eq!(p, 1.0 / 3.0, epsilon = 1e-10);
        let total = povm.iter().fold(CMatrix::zeros(2, 2), |a, m| a + m);
        assert!((total - linalg::identity(2)).norm() < 1e-10);
    }

    #[test]
    fn deterministic_and_orthogonal_clock_always_wins_time() {
        let config = GameConfig {
            state: DensityOperator::bloch(FRAC_PI_2, 0.0),
            hamiltonian: SpectralHamiltonian::pauli_z(1.0),
            ensemble: TimeEnsemble::uniform(vec![0.0, FRAC_PI_2]).unwrap(),
            trials: 2000,
            seed: 9,
            variant: Variant::Figure1,
            strategy: Strategy::Helstrom,
        };
        let a = simulate(&config).unwrap();
        assert_eq!(a, simulate(&config).unwrap());
        assert_eq!(a.time_branch_wins, a.time_trials);
        assert_relative_eq!(a.predicted_time_p_win, 1.0, epsilon = 1e-12);
        assert_relative_eq!(a.predicted_energy_p_win, 0.5, epsilon = 1e-12);
        assert_eq!(a.time_trials + a.energy_trials, a.trials);
    }

    #[test]
    fn helstrom_needs_two_times() {
        let config = GameConfig {
            state: DensityOperator::basis(2, 0),
            hamiltonian: SpectralHamiltonian::pauli_z(1.0),
            ensemble: TimeEnsemble::equally_spaced(3, 3.0).unwrap(),
            trials: 10,
            seed: 1,
            variant: Variant::Figure1,
            strategy: Strategy::Helstrom,
        };
        assert!(matches!(simulate(&config), Err(Error::InvalidStrategy(_))));
    }
}

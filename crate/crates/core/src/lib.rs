//! Numerical toolkit for entropic energy-time uncertainty relations.
//!
//! States and Hamiltonians live in [`state`] and [`operator`]; the entropy
//! functionals, including the optimized conditional Rényi entropies, are in
//! [`entropy`]. [`clock`] builds the energy and time records, [`asymmetry`]
//! the asymmetry measures, [`relations`] audits each uncertainty relation and
//! [`game`] simulates the clock guessing game.

pub mod asymmetry;
pub mod clock;
pub mod entropy;
pub mod error;
pub mod game;
pub mod linalg;
pub mod operator;
pub mod random;
pub mod relations;
pub mod state;

pub use asymmetry::{prop1_verify, relative_entropy_of_asymmetry, renyi_asymmetry, AsymmetryMethod, AsymmetryResult, Prop1Sides};
pub use clock::{averaged_state, build_kappa, build_omega, truncate, CqState, TimeEnsemble, Truncation};
pub use entropy::{
    conditional_renyi, differential_conditional_entropy, renyi_entropy, sandwiched_relative_entropy, EntropyResult,
    Quadrature, RenyiOrder, SolverOptions,
};
pub use error::{Error, Result};
pub use game::{helstrom, pretty_good_measurement, simulate, GameConfig, GameResult, Strategy, Variant};
pub use linalg::{CMatrix, C64};
pub use operator::{evolve, pinch, spectral_decompose, HermitianMatrix, SpectralHamiltonian};
pub use state::DensityOperator;

use serde::Serialize;

use crate::clock::{build_kappa, build_omega, TimeEnsemble};
use crate::entropy::{conditional_renyi, RenyiOrder, SolverOptions};
use crate::error::{Error, Result};
use crate::operator::SpectralHamiltonian;
use crate::state::DensityOperator;

/// Which record is measured (and bounded through its max-entropy). The other
/// one is the source whose min-entropy gets certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measured {
    Energy,
    Time,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinMaxReport {
    pub measured: Measured,
    /// `S_{1/2}` of the measured record given its memory.
    pub s_max_measured: f64,
    pub s_max_converged: bool,
    /// `log2|𝒯| − S_max`, per copy.
    pub s_min_bound: f64,
    pub copies: u64,
    pub eps: f64,
    pub extractable_bits: u64,
}

/// `max(0, ⌊total − 2 log2(1/ε)⌋)`. The floor forgives rounding noise of
/// relative size `1e-9` so that an exact integer bound is not lost to it.
pub fn extractable_bits(total_min_entropy: f64, eps: f64) -> u64 {
    let x = total_min_entropy - 2.0 * (1.0 / eps).log2();
    let n = (x + 1e-9 * x.abs().max(1.0)).floor();
    if n > 0.0 { n as u64 } else { 0 }
}

/// Certifies min-entropy of one record from the max-entropy of the other:
/// `S_∞(E|R) ≥ log2|𝒯| − S_{1/2}(T|A)` and `S_∞(T|A) ≥ log2|𝒯| − S_{1/2}(E|R)`.
/// Independent copies add their bounds.
pub fn minmax_certify(
    rho_ar: &DensityOperator,
    h: &SpectralHamiltonian,
    ensemble: &TimeEnsemble,
    measured: Measured,
    eps: f64,
    copies: u64,
    opts: &SolverOptions,
) -> Result<MinMaxReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadLength(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !ensemble.is_uniform() {
        return Err(Error::BadTimeEnsemble("min/max certification assumes uniform time weights".into()));
    }
    let rhs = (ensemble.len() as f64).log2();
    let record = match measured {
        Measured::Time => {
            let rho_a = if rho_ar.dims().len() == 1 { rho_ar.clone() } else { rho_ar.partial_trace(&[0])? };
            build_kappa(&rho_a, h, ensemble)?.to_density()
        }
        Measured::Energy => build_omega(rho_ar, h)?.to_density(),
    };
    let memory: Vec<usize> = (1..record.dims().len()).collect();
    let s_max = conditional_renyi(&record, &memory, RenyiOrder::HALF, opts)?;
    let s_min_bound = rhs - s_max.value;
    Ok(MinMaxReport {
        measured,
        s_max_measured: s_max.value,
        s_max_converged: s_max.converged,
        s_min_bound,
        copies,
        eps,
        extractable_bits: extractable_bits(copies as f64 * s_min_bound, eps),
    })
}

/// Output bits of a Toeplitz hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted(pub Vec<bool>);

impl std::fmt::Display for Extracted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.iter().try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::BadLength(format!("invalid bit character {other:?}"))),
        })
        .collect()
}

/// `out = T · raw` over GF(2) with `T_{i,j} = seed[i − j + n − 1]`,
/// `n = raw.len()`. The seed must hold `n + out_len − 1` bits.
pub fn toeplitz_extract(raw: &[bool], out_len: usize, seed: &[bool]) -> Result<Extracted> {
    let n = raw.len();
    if out_len > n {
        return Err(Error::BadLength(format!("cannot extract {out_len} bits from {n}")));
    }
    if out_len == 0 {
        return Ok(Extracted(Vec::new()));
    }
    if seed.len() != n + out_len - 1 {
        return Err(Error::BadLength(format!("seed needs {} bits, got {}", n + out_len - 1, seed.len())));
    }
    let bits = (0..out_len)
        .map(|i| (0..n).filter(|&j| raw[j] && seed[i + n - 1 - j]).count() % 2 == 1)
        .collect();
    Ok(Extracted(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn extraction_arithmetic() {
        assert_eq!(extractable_bits(1.0, 2f64.powi(-10)), 0);
        assert_eq!(extractable_bits(64.0, 2f64.powi(-10)), 44);
        assert_eq!(extractable_bits(-3.0, 0.5), 0);
    }

    #[test]
    fn plus_state_certifies_one_bit_of_energy() {
        let h = SpectralHamiltonian::pauli_z(1.0);
        let ens = TimeEnsemble::uniform(vec![0.0, FRAC_PI_2]).unwrap();
        let plus = DensityOperator::bloch(FRAC_PI_2, 0.0);
        let opts = SolverOptions::default();
        let one = minmax_certify(&plus, &h, &ens, Measured::Time, 2f64.powi(-10), 1, &opts).unwrap();
        assert!((one.s_min_bound - 1.0).abs() < 1e-8);
        assert_eq!(one.extractable_bits, 0);
        let many = minmax_certify(&plus, &h, &ens, Measured::Time, 2f64.powi(-10), 64, &opts).unwrap();
        assert_eq!(many.extractable_bits, 44);
    }

    #[test]
    fn eigenstate_certifies_nothing() {
        let h = SpectralHamiltonian::pauli_z(1.0);
        let ens = TimeEnsemble::equally_spaced(4, 4.0).unwrap();
        let r = minmax_certify(&DensityOperator::basis(2, 0), &h, &ens, Measured::Time, 0.01, 1, &SolverOptions::default())
            .unwrap();
        assert!((r.s_max_measured - 2.0).abs() < 1e-8);
        assert!(r.s_min_bound.abs() < 1e-8);
        assert_eq!(r.extractable_bits, 0);
    }

    #[test]
    fn toeplitz_examples() {
        let raw = parse_bits("1010").unwrap();
        let seed = parse_bits("10011").unwrap();
        assert_eq!(toeplitz_extract(&raw, 2, &seed).unwrap().to_string(), "11");
        assert_eq!(toeplitz_extract(&raw, 0, &[]).unwrap().to_string(), "");
        let identity = parse_bits("0001000").unwrap();
        assert_eq!(toeplitz_extract(&raw, 4, &identity).unwrap().to_string(), "1010");
        assert!(toeplitz_extract(&raw, 2, &seed[..4]).is_err());
        assert!(parse_bits("10x").is_err());
    }
}

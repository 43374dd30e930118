//! TOML scenario files. Complex numbers are `[re, im]` pairs; matrices are
//! arrays of rows.
//!
//! ```toml
//! alpha = [0.5, 1, 2, "inf"]
//! memory = "purify"      # optional; or a [memory] table describing the joint state
//!
//! [hamiltonian]
//! preset = "pauli-z"     # or diagonal = [...], or matrix = [[[re, im], ...], ...]
//! scale = 1.0
//!
//! [state]
//! bloch = [1.5707963267948966, 0.0]   # or amplitudes, matrix, random = { seed, rank }
//!
//! [time]
//! grid = [0.0, 1.5707963267948966]   # or count + horizon, or continuous + t_final
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clockbound::linalg::{CMatrix, C64};
use clockbound::operator::{default_grouping_tol, spectral_decompose};
use clockbound::{random, DensityOperator, HermitianMatrix, RenyiOrder, SpectralHamiltonian, TimeEnsemble};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

type Complex = [f64; 2];
type RawMatrix = Vec<Vec<Complex>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    hamiltonian: RawHamiltonian,
    state: Option<RawState>,
    memory: Option<RawMemory>,
    time: RawTime,
    weights: Option<Vec<f64>>,
    alpha: Option<Vec<RawAlpha>>,
    outputs: Option<Outputs>,
    game: Option<RawGame>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    preset: Option<String>,
    scale: Option<f64>,
    diagonal: Option<Vec<f64>>,
    matrix: Option<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    bloch: Option<[f64; 2]>,
    amplitudes: Option<Vec<Complex>>,
    matrix: Option<RawMatrix>,
    random: Option<RawRandom>,
    dims: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandom {
    seed: u64,
    rank: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawMemory {
    Keyword(String),
    Joint(RawState),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    grid: Option<Vec<f64>>,
    count: Option<usize>,
    horizon: Option<f64>,
    spacing: Option<String>,
    continuous: Option<bool>,
    t_final: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAlpha {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    povm: Vec<RawMatrix>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub hamiltonian: SpectralHamiltonian,
    /// `ρ_A` alone, or the joint state with `A` first.
    pub state: DensityOperator,
    pub time: TimeEnsemble,
    pub alphas: Vec<RenyiOrder>,
    pub outputs: Outputs,
    pub povm: Option<Vec<CMatrix>>,
}

pub fn default_alphas() -> Vec<RenyiOrder> {
    [0.5, 0.7, 1.0, 2.0, 10.0, f64::INFINITY].into_iter().map(|a| RenyiOrder::new(a).unwrap()).collect()
}

/// Parses `"0.5,1,inf"`.
pub fn parse_alpha_list(s: &str) -> anyhow::Result<Vec<RenyiOrder>> {
    s.split(',')
        .map(|item| RenyiOrder::from_str(item.trim()).map_err(|e| anyhow!("alpha {item:?}: {e}")))
        .collect()
}

pub fn parse_f64_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',').map(|item| item.trim().parse::<f64>().with_context(|| format!("invalid number {item:?}"))).collect()
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("scenario {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let value: toml::Value = toml::from_str(text).map_err(|e| anyhow!("invalid TOML: {e}"))?;
        let raw: RawScenario = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("key `{path}`: {}", e.into_inner())
        })?;

        let hamiltonian = hamiltonian(&raw.hamiltonian).context("key `hamiltonian`")?;
        let d_a = hamiltonian.dim();
        let state = match (&raw.state, &raw.memory) {
            (Some(s), None) => single_state(s, d_a, "state")?,
            (Some(s), Some(RawMemory::Keyword(k))) => {
                if k != "purify" {
                    bail!("key `memory`: unknown keyword {k:?} (expected \"purify\")");
                }
                single_state(s, d_a, "state")?.purify()
            }
            (None, Some(RawMemory::Joint(j))) => joint_state(j, d_a)?,
            (Some(_), Some(RawMemory::Joint(_))) => bail!("key `state`: give either `state` or a joint `memory` state, not both"),
            (None, _) => bail!("key `state`: missing (or give the joint state under `memory`)"),
        };
        let time = time(&raw.time, raw.weights.as_deref())?;
        let alphas = match &raw.alpha {
            None => default_alphas(),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let r = match a {
                        RawAlpha::Number(x) => RenyiOrder::new(*x).map_err(|e| anyhow!("{e}")),
                        RawAlpha::Text(s) => RenyiOrder::from_str(s).map_err(|e| anyhow!("{e}")),
                    };
                    r.with_context(|| format!("key `alpha[{i}]`"))
                })
                .collect::<anyhow::Result<_>>()?,
        };
        let povm = match &raw.game {
            None => None,
            Some(g) => Some(
                g.povm
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix(m).with_context(|| format!("key `game.povm[{i}]`")))
                    .collect::<anyhow::Result<_>>()?,
            ),
        };
        Ok(Self { hamiltonian, state, time, alphas, outputs: raw.outputs.unwrap_or_default(), povm })
    }

    /// `ρ_A`.
    pub fn marginal(&self) -> DensityOperator {
        if self.state.dims().len() == 1 {
            self.state.clone()
        } else {
            self.state.partial_trace(&[0]).expect("first factor exists")
        }
    }
}

fn exactly_one(path: &str, present: &[(&str, bool)]) -> anyhow::Result<usize> {
    let given: Vec<usize> = present.iter().enumerate().filter(|(_, (_, p))| *p).map(|(i, _)| i).collect();
    let names: Vec<&str> = present.iter().map(|(n, _)| *n).collect();
    match given.as_slice() {
        [one] => Ok(*one),
        [] => bail!("key `{path}`: one of {names:?} is required"),
        _ => bail!("key `{path}`: only one of {names:?} may be given"),
    }
}

fn matrix(rows: &RawMatrix) -> anyhow::Result<CMatrix> {
    let n = rows.len();
    if n == 0 {
        bail!("matrix is empty");
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        bail!("row {i} has {} entries, expected {n}", rows[i].len());
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn hamiltonian(raw: &RawHamiltonian) -> anyhow::Result<SpectralHamiltonian> {
    let which = exactly_one(
        "hamiltonian",
        &[("preset", raw.preset.is_some()), ("diagonal", raw.diagonal.is_some()), ("matrix", raw.matrix.is_some())],
    )?;
    if which != 0 && raw.scale.is_some() {
        bail!("`scale` only applies to presets");
    }
    let h = match which {
        0 => {
            let scale = raw.scale.unwrap_or(1.0);
            let base = match raw.preset.as_deref().unwrap() {
                "pauli-z" => return Ok(SpectralHamiltonian::pauli_z(scale)),
                "pauli-x" => HermitianMatrix::pauli_x(),
                "pauli-y" => HermitianMatrix::pauli_y(),
                other => bail!("unknown preset {other:?} (expected pauli-x, pauli-y or pauli-z)"),
            };
            base.scaled(scale)
        }
        1 => {
            let d = raw.diagonal.as_ref().unwrap();
            if d.is_empty() || d.iter().any(|e| !e.is_finite()) {
                bail!("`diagonal` must be a non-empty list of finite energies");
            }
            return Ok(SpectralHamiltonian::diagonal(d));
        }
        _ => HermitianMatrix::new(matrix(raw.matrix.as_ref().unwrap()).context("key `matrix`")?).context("key `matrix`")?,
    };
    let scale = h.matrix().iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    Ok(spectral_decompose(&h, default_grouping_tol(scale))?)
}

fn single_state(raw: &RawState, d_a: usize, path: &str) -> anyhow::Result<DensityOperator> {
    if raw.dims.is_some() {
        bail!("key `{path}.dims`: only joint states under `memory` carry dims");
    }
    build_state(raw, vec![d_a], path)
}

fn joint_state(raw: &RawState, d_a: usize) -> anyhow::Result<DensityOperator> {
    let dims = raw.dims.clone().ok_or_else(|| anyhow!("key `memory.dims`: required for a joint state"))?;
    if dims.first() != Some(&d_a) {
        bail!("key `memory.dims`: first factor must match the Hamiltonian dimension {d_a}");
    }
    if raw.bloch.is_some() {
        bail!("key `memory.bloch`: a joint state needs amplitudes, matrix or random");
    }
    build_state(raw, dims, "memory")
}

fn build_state(raw: &RawState, dims: Vec<usize>, path: &str) -> anyhow::Result<DensityOperator> {
    let d: usize = dims.iter().product();
    let which = exactly_one(
        path,
        &[
            ("bloch", raw.bloch.is_some()),
            ("amplitudes", raw.amplitudes.is_some()),
            ("matrix", raw.matrix.is_some()),
            ("random", raw.random.is_some()),
        ],
    )?;
    let state = match which {
        0 => {
            if d != 2 {
                bail!("key `{path}.bloch`: Bloch angles need a qubit, the Hamiltonian has dimension {d}");
            }
            let [theta, phi] = raw.bloch.unwrap();
            DensityOperator::bloch(theta, phi)
        }
        1 => {
            let amps: Vec<C64> = raw.amplitudes.as_ref().unwrap().iter().map(|a| C64::new(a[0], a[1])).collect();
            if amps.len() != d {
                bail!("key `{path}.amplitudes`: expected {d} amplitudes, got {}", amps.len());
            }
            DensityOperator::from_pure(&amps, dims).with_context(|| format!("key `{path}.amplitudes`"))?
        }
        2 => {
            let m = matrix(raw.matrix.as_ref().unwrap()).with_context(|| format!("key `{path}.matrix`"))?;
            if m.nrows() != d {
                bail!("key `{path}.matrix`: expected a {d}×{d} matrix, got {}×{}", m.nrows(), m.ncols());
            }
            DensityOperator::new(m, dims).with_context(|| format!("key `{path}.matrix`"))?
        }
        _ => {
            let r = raw.random.as_ref().unwrap();
            let rank = r.rank.unwrap_or(1);
            if rank == 0 || rank > d {
                bail!("key `{path}.random.rank`: must lie in 1..={d}");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            random::density(d, rank, &mut rng).with_dims(dims)?
        }
    };
    Ok(state)
}

fn time(raw: &RawTime, weights: Option<&[f64]>) -> anyhow::Result<TimeEnsemble> {
    let continuous = raw.continuous.unwrap_or(false);
    let which = exactly_one(
        "time",
        &[("grid", raw.grid.is_some()), ("count", raw.count.is_some()), ("continuous", continuous)],
    )?;
    if which != 2 && raw.t_final.is_some() {
        bail!("key `time.t_final`: only used with `continuous = true`");
    }
    if which != 1 && (raw.horizon.is_some() || raw.spacing.is_some()) {
        bail!("key `time`: `horizon` and `spacing` go with `count`");
    }
    if which == 2 && weights.is_some() {
        bail!("key `weights`: a continuous window has no time weights");
    }
    let times = match which {
        0 => raw.grid.clone().unwrap(),
        1 => {
            if let Some(s) = &raw.spacing {
                if s != "equal" {
                    bail!("key `time.spacing`: only \"equal\" is supported");
                }
            }
            let horizon = raw.horizon.ok_or_else(|| anyhow!("key `time.horizon`: required with `count`"))?;
            let k = raw.count.unwrap();
            return with_weights(TimeEnsemble::equally_spaced(k, horizon).context("key `time`")?, weights);
        }
        _ => {
            let t = raw.t_final.ok_or_else(|| anyhow!("key `time.t_final`: required for a continuous window"))?;
            return TimeEnsemble::continuous(t).context("key `time.t_final`");
        }
    };
    match weights {
        None => TimeEnsemble::uniform(times).context("key `time.grid`"),
        Some(w) => TimeEnsemble::discrete(times, w.to_vec()).context("key `weights`"),
    }
}

fn with_weights(ensemble: TimeEnsemble, weights: Option<&[f64]>) -> anyhow::Result<TimeEnsemble> {
    match weights {
        None => Ok(ensemble),
        Some(w) => TimeEnsemble::discrete(ensemble.times().to_vec(), w.to_vec()).context("key `weights`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(
            r#"
            alpha = [0.5, "inf"]
            [hamiltonian]
            preset = "pauli-z"
            [state]
            bloch = [1.5707963267948966, 0.0]
            [time]
            grid = [0.0, 1.5707963267948966]
            "#,
        )
        .unwrap();
        assert_eq!(s.alphas.len(), 2);
        assert!(s.alphas[1].is_infinite());
        assert_eq!(s.time.len(), 2);
        assert_eq!(s.state.dims(), &[2]);
    }

    #[test]
    fn purify_and_joint_states() {
        let s = Scenario::parse(
            r#"
            memory = "purify"
            [hamiltonian]
            diagonal = [0.0, 1.0, 2.0]
            [state]
            random = { seed = 4, rank = 2 }
            [time]
            count = 3
            horizon = 6.283185307179586
            "#,
        )
        .unwrap();
        assert_eq!(s.state.dims(), &[3, 3]);
        let j = Scenario::parse(
            r#"
            [hamiltonian]
            preset = "pauli-z"
            [memory]
            dims = [2, 2]
            amplitudes = [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]
            [time]
            continuous = true
            t_final = 2.0
            "#,
        )
        .unwrap();
        assert_eq!(j.state.dims(), &[2, 2]);
        assert!(!j.time.is_discrete());
    }

    #[test]
    fn errors_name_the_key() {
        let bad_psd = r#"
            [hamiltonian]
            preset = "pauli-z"
            [state]
            matrix = [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]
            [time]
            grid = [0, 1]
        "#;
        let msg = format!("{:#}", Scenario::parse(bad_psd).unwrap_err());
        assert!(msg.contains("state.matrix"), "{msg}");

        let typo = r#"
            [hamiltonian]
            preset = "pauli-z"
            scale = "big"
            [state]
            bloch = [0, 0]
            [time]
            grid = [0, 1]
        "#;
        let msg = format!("{:#}", Scenario::parse(typo).unwrap_err());
        assert!(msg.contains("hamiltonian.scale"), "{msg}");
    }
}

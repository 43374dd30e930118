use std::f64::consts::PI;

use anyhow::{bail, Context};
use clockbound::entropy::conditional_renyi;
use clockbound::game::{simulate, GameConfig, Strategy, Variant};
use clockbound::relations::{self, AuditReport};
use clockbound::{
    asymmetry, build_kappa, random, truncate, DensityOperator, Quadrature, RenyiOrder, SolverOptions, SpectralHamiltonian,
    TimeEnsemble,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{num, Table};
use crate::scenario::Scenario;

pub const AUDIT_HEADER: &[&str] = &[
    "instance", "relation", "alpha", "beta", "term1", "value1", "term2", "value2", "lhs", "rhs", "slack", "verdict",
    "converged", "max_residual",
];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub instance: usize,
    pub report: AuditReport,
}

fn order(a: Option<RenyiOrder>) -> String {
    a.map_or_else(String::new, |a| num(a.value()))
}

pub fn audit_table(rows: &[Row]) -> Table {
    let mut t = Table::new(AUDIT_HEADER);
    for Row { instance, report: r } in rows {
        let name = |i: usize| r.terms.get(i).map_or_else(String::new, |t| t.name.clone());
        let value = |i: usize| r.terms.get(i).map_or_else(String::new, |t| num(t.value));
        let converged = r.terms.iter().all(|t| t.converged);
        let residual = r.terms.iter().map(|t| t.residual).fold(0.0, f64::max);
        t.push(vec![
            instance.to_string(),
            r.relation.to_string(),
            order(r.alpha),
            order(r.beta),
            name(0),
            value(0),
            name(1),
            value(1),
            num(r.lhs),
            num(r.rhs),
            num(r.slack),
            serde_json::to_value(r.verdict).unwrap().as_str().unwrap().to_string(),
            converged.to_string(),
            num(residual),
        ]);
    }
    t
}

/// Every relation that applies to the scenario, in a fixed order.
pub fn audit_scenario(s: &Scenario, opts: &SolverOptions) -> anyhow::Result<Vec<AuditReport>> {
    let h = &s.hamiltonian;
    let rho = &s.state;
    let rho_a = s.marginal();
    let mut out = Vec::new();
    if !s.time.is_discrete() {
        let t_final = s.time.t_final().unwrap();
        out.push(relations::audit_continuous(&rho_a, h, t_final, &Quadrature::default())?);
        return Ok(out);
    }
    if s.time.is_uniform() {
        for &alpha in &s.alphas {
            if alpha.value() < 0.5 {
                log::warn!("skipping the memory relations at alpha = {alpha}: they are stated for alpha >= 1/2");
                continue;
            }
            out.push(relations::audit_main(rho, h, &s.time, alpha, opts)?);
            if rho.dims().len() == 1 && rho.is_pure(1e-9) {
                out.push(relations::audit_pure(rho, h, &s.time, alpha, opts)?);
            }
            if rho.dims().len() == 3 {
                out.push(relations::audit_split(rho, h, &s.time, alpha, opts)?);
            }
        }
        out.push(relations::audit_von_neumann(rho, h, &s.time)?);
        for &alpha in &s.alphas {
            if alpha.value() > 0.0 {
                out.push(relations::audit_asymmetry(&rho_a, h, &s.time, alpha, opts)?);
            }
        }
    }
    let joint = if rho.is_pure(1e-9) { rho.clone() } else { rho_a.purify() };
    out.push(relations::audit_nonuniform(&joint, h, &s.time)?);
    Ok(out)
}

/// One random instance of the main relation campaign: `d_A, d_R ≤ 4`,
/// `|𝒯| ∈ {2, 3, 4}` uniformly weighted times in `[0, 2π)`, a GUE Hamiltonian
/// and a Haar-random pure `ρ_AR`. Instance `i` uses stream `i` of the seed.
pub fn random_instance(seed: u64, index: u64) -> (DensityOperator, SpectralHamiltonian, TimeEnsemble) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let d_a = rng.random_range(2..=4);
    let d_r = rng.random_range(1..=4);
    let k = rng.random_range(2..=4);
    let h = random::hamiltonian(d_a, &mut rng);
    let mut times: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    times.sort_by(f64::total_cmp);
    let rho = random::pure_state(&[d_a, d_r], &mut rng);
    (rho, h, TimeEnsemble::uniform(times).expect("valid random times"))
}

pub fn random_campaign(n: usize, seed: u64, alphas: &[RenyiOrder], opts: &SolverOptions) -> anyhow::Result<Vec<Row>> {
    if let Some(a) = alphas.iter().find(|a| a.value() < 0.5) {
        bail!("flag --alpha: {a} lies outside [1/2, inf] where the main relation is stated");
    }
    let per_instance: Vec<anyhow::Result<Vec<Row>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (rho, h, ens) = random_instance(seed, i as u64);
            alphas
                .iter()
                .map(|&a| {
                    let report = relations::audit_main(&rho, &h, &ens, a, opts).with_context(|| format!("instance {i}"))?;
                    Ok(Row { instance: i, report })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(n * alphas.len());
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(rows)
}

pub const FIGURE2_HEADER: &[&str] = &[
    "theta", "gamma_h", "s_time_discrete", "s_time_continuous", "total_discrete", "total_continuous", "rhs_discrete",
    "rhs_continuous",
];

/// Spin-½ in `H = κσ_z`: energy uncertainty `Γ_H` against the discrete time
/// uncertainty (`K` equally spaced times over `[0, T_F)`) and the continuous one.
pub fn figure2(thetas: usize, kappa: f64, t_final: f64, k: usize) -> anyhow::Result<Table> {
    if thetas < 2 {
        bail!("flag --thetas: need at least two samples");
    }
    let h = SpectralHamiltonian::pauli_z(kappa);
    let ens = TimeEnsemble::equally_spaced(k, t_final).context("flags --times/--t-final")?;
    let quad = Quadrature::default();
    let opts = SolverOptions::default();
    let rows: Vec<anyhow::Result<Vec<String>>> = (0..thetas)
        .into_par_iter()
        .map(|i| {
            let theta = PI * i as f64 / (thetas - 1) as f64;
            let rho = DensityOperator::bloch(theta, 0.0);
            let gamma = asymmetry::relative_entropy_of_asymmetry(&rho, &h)?.value;
            let kappa_state = build_kappa(&rho, &h, &ens)?.to_density();
            let s_disc = conditional_renyi(&kappa_state, &[1], RenyiOrder::ONE, &opts)?.value;
            let s_cont = clockbound::differential_conditional_entropy(&rho, &h, t_final, &quad)?.value;
            Ok(vec![
                num(theta),
                num(gamma),
                num(s_disc),
                num(s_cont),
                num(gamma + s_disc),
                num(gamma + s_cont),
                num((k as f64).log2()),
                num(t_final.log2()),
            ])
        })
        .collect();
    let mut t = Table::new(FIGURE2_HEADER);
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

pub const GAME_HEADER: &[&str] = &[
    "variant", "strategy", "seed", "trials", "time_trials", "energy_trials", "time_wins", "energy_wins", "empirical_p_win",
    "predicted_p_win", "std_error", "time_p_win", "time_std_error", "predicted_time_p_win", "predicted_energy_p_win",
    "optimal_time_p_win",
];

pub fn game(s: &Scenario, trials: u64, seed: u64, variant: Variant, strategy: Option<&str>) -> anyhow::Result<Table> {
    if !s.time.is_discrete() {
        bail!("key `time`: the game needs discrete times");
    }
    let strategy = match strategy {
        None if s.time.len() == 2 => Strategy::Helstrom,
        None | Some("pgm") => Strategy::PrettyGood,
        Some("helstrom") => Strategy::Helstrom,
        Some("custom") => Strategy::Custom(s.povm.clone().context("key `game.povm`: required by --strategy custom")?),
        Some(other) => bail!("flag --strategy: unknown strategy {other:?} (expected helstrom, pgm or custom)"),
    };
    let name = strategy.name();
    let config = GameConfig {
        state: s.state.clone(),
        hamiltonian: s.hamiltonian.clone(),
        ensemble: s.time.clone(),
        trials,
        seed,
        variant,
        strategy,
    };
    let r = simulate(&config)?;
    let kappa = build_kappa(&s.marginal(), &s.hamiltonian, &s.time)?.to_density();
    let s_min = conditional_renyi(&kappa, &[1], RenyiOrder::INFINITY, &SolverOptions::default())?;
    let mut t = Table::new(GAME_HEADER);
    t.push(vec![
        variant_name(variant).into(),
        name.into(),
        seed.to_string(),
        r.trials.to_string(),
        r.time_trials.to_string(),
        r.energy_trials.to_string(),
        r.time_branch_wins.to_string(),
        r.energy_branch_wins.to_string(),
        num(r.empirical_p_win),
        num(r.predicted_p_win),
        num(r.std_error),
        num(r.time_p_win),
        num(r.time_std_error),
        num(r.predicted_time_p_win),
        num(r.predicted_energy_p_win),
        num((-s_min.value).exp2()),
    ]);
    Ok(t)
}

pub fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Figure1 => "figure1",
        Variant::AppendixA => "appendix-a",
    }
}

pub const TRUNCATION_HEADER: &[&str] = &["cutoff", "kept_levels", "tail_weight", "trace_distance", "lhs", "rhs", "slack"];

#[derive(Debug, Clone)]
pub struct TruncationSpec {
    pub levels: usize,
    /// Population ratio between neighbouring levels.
    pub ratio: f64,
    pub cutoffs: Vec<f64>,
    pub times: usize,
    pub horizon: f64,
    /// Diagonal state instead of the coherent superposition.
    pub mixed: bool,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { levels: 10, ratio: 0.5, cutoffs: (0..10).map(f64::from).collect(), times: 2, horizon: 2.0, mixed: false }
    }
}

/// Ladder `H = diag(0, 1, …, n−1)` and a state with populations `∝ ratio^n`.
pub fn ladder_state(levels: usize, ratio: f64, mixed: bool) -> anyhow::Result<(SpectralHamiltonian, DensityOperator)> {
    if levels < 1 || !(ratio > 0.0 && ratio.is_finite()) {
        bail!("flags --levels/--ratio: need at least one level and a positive ratio");
    }
    let energies: Vec<f64> = (0..levels).map(|n| n as f64).collect();
    let h = SpectralHamiltonian::diagonal(&energies);
    let pops: Vec<f64> = (0..levels).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = pops.iter().sum();
    let pops: Vec<f64> = pops.iter().map(|p| p / total).collect();
    let rho = if mixed {
        DensityOperator::diagonal(&pops)?
    } else {
        let amps: Vec<_> = pops.iter().map(|p| clockbound::C64::new(p.sqrt(), 0.0)).collect();
        DensityOperator::from_pure(&amps, vec![levels])?
    };
    Ok((h, rho))
}

/// Slack of the von Neumann relation for the purified truncated state at each cutoff.
pub fn truncation(spec: &TruncationSpec) -> anyhow::Result<Table> {
    let (h, rho) = ladder_state(spec.levels, spec.ratio, spec.mixed)?;
    let ens = TimeEnsemble::equally_spaced(spec.times, spec.horizon).context("flags --times/--horizon")?;
    let mut t = Table::new(TRUNCATION_HEADER);
    for &cutoff in &spec.cutoffs {
        let tr = truncate(&h, &rho, cutoff, None).with_context(|| format!("flag --cutoffs: {cutoff}"))?;
        let distance = clockbound::linalg::trace_norm(&(tr.embedded.matrix() - rho.matrix()));
        let report = relations::audit_von_neumann(&tr.state.purify(), &tr.hamiltonian, &ens)?;
        t.push(vec![
            num(cutoff),
            tr.hamiltonian.len().to_string(),
            num(tr.tail),
            num(distance),
            num(report.lhs),
            num(report.rhs),
            num(report.slack),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParam {
    Alpha,
    Theta,
    TFinal,
}

/// Audits the scenario once per value, overriding α, the Bloch angle θ
/// (φ = 0) or the continuous window.
pub fn scan(s: &Scenario, param: ScanParam, values: &[f64], opts: &SolverOptions) -> anyhow::Result<(Vec<String>, Vec<Row>)> {
    let variants: Vec<Scenario> = values
        .iter()
        .map(|&v| {
            let mut s = s.clone();
            match param {
                ScanParam::Alpha => s.alphas = vec![RenyiOrder::new(v).with_context(|| format!("flag --values: {v}"))?],
                ScanParam::Theta => {
                    if s.hamiltonian.dim() != 2 || s.state.dims().len() != 1 {
                        bail!("flag --param theta: needs a qubit scenario without memory");
                    }
                    s.state = DensityOperator::bloch(v, 0.0);
                }
                ScanParam::TFinal => s.time = TimeEnsemble::continuous(v).with_context(|| format!("flag --values: {v}"))?,
            }
            Ok(s)
        })
        .collect::<anyhow::Result<_>>()?;
    let reports: Vec<anyhow::Result<Vec<AuditReport>>> = variants.par_iter().map(|s| audit_scenario(s, opts)).collect();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (i, r) in reports.into_iter().enumerate() {
        for report in r? {
            labels.push(num(values[i]));
            rows.push(Row { instance: i, report });
        }
    }
    Ok((labels, rows))
}

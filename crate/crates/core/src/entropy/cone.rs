//! Minimization of `σ ↦ D_α(ρ ‖ E(σ))` over density operators `σ` on a cone
//! of the form `E(σ) = I_m ⊗ (σ_1 ⊕ … ⊕ σ_k)`.
//!
//! Both the conditional entropies (`m = d_A`, one block) and the commuting
//! infimum behind the asymmetry measures (`m = 1`, one block per energy
//! level) reduce to this shape once `ρ` is expressed in a basis adapted to
//! the cone and compressed to the support of `E†(ρ)`.
//!
//! For finite `α ≠ 1` the solver runs a line-searched fixed point
//! `σ ← E†[(E(σ)^γ ρ E(σ)^γ)^α] / Tr` and then polishes with Newton steps on
//! the square-root parameterization `σ = M²/Tr M²`, which reaches boundary
//! optima (rank-deficient `σ`) that interior methods stall on. `α = ∞` is a
//! semidefinite program solved with a log-barrier method.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{sandwiched, RenyiOrder, LN2};
use crate::linalg::{self, eigh, CMatrix, Eigen, C64};

/// Knobs for the conditional-entropy and asymmetry optimizers.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_fixed_point: usize,
    /// Trace-norm step size below which the fixed point stops.
    pub fixed_point_tol: f64,
    pub max_newton: usize,
    /// Gradient norm (or relative duality gap at `α = ∞`) required to report convergence.
    pub tol: f64,
    /// Perturbed starts in addition to the maximally mixed one.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_fixed_point: 500, fixed_point_tol: 1e-10, max_newton: 60, tol: 1e-6, restarts: 2, seed: 0x00c1_0c4b }
    }
}

/// Result of a cone minimization, with `σ` mapped back to the full space.
#[derive(Debug, Clone)]
pub(crate) struct ConeSolution {
    /// `min_σ D_α(ρ ‖ E(σ))`.
    pub value: f64,
    pub sigma: CMatrix,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// `I_mult ⊗ blockdiag(σ_b)` with block sizes `blocks`.
#[derive(Debug, Clone)]
pub(crate) struct Cone {
    mult: usize,
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    inner: usize,
}

impl Cone {
    pub fn new(mult: usize, blocks: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for &b in &blocks {
            offsets.push(acc);
            acc += b;
        }
        Self { mult, blocks, offsets, inner: acc }
    }

    fn coords(&self) -> usize {
        self.blocks.iter().map(|b| b * b).sum()
    }

    fn embed(&self, parts: &[CMatrix]) -> CMatrix {
        let mut inner = CMatrix::zeros(self.inner, self.inner);
        for (k, p) in parts.iter().enumerate() {
            inner.view_mut((self.offsets[k], self.offsets[k]), (self.blocks[k], self.blocks[k])).copy_from(p);
        }
        if self.mult == 1 {
            inner
        } else {
            linalg::kron(&linalg::identity(self.mult), &inner)
        }
    }

    fn adjoint(&self, x: &CMatrix) -> Vec<CMatrix> {
        let inner = if self.mult == 1 { x.clone() } else { linalg::trace_out_leading(x, self.mult, self.inner) };
        self.blocks
            .iter()
            .zip(&self.offsets)
            .map(|(&b, &o)| inner.view((o, o), (b, b)).into_owned())
            .collect()
    }

    fn maximally_mixed(&self) -> Vec<CMatrix> {
        let n = self.inner as f64;
        self.blocks.iter().map(|&b| linalg::identity(b).unscale(n)).collect()
    }

    /// Real coordinates in an orthonormal Hermitian basis, block by block:
    /// diagonal entries, then `√2 Re M_ij` and `√2 Im M_ij` for `i < j`.
    fn to_coords(&self, parts: &[CMatrix]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.coords());
        let r2 = std::f64::consts::SQRT_2;
        for (p, &b) in parts.iter().zip(&self.blocks) {
            for i in 0..b {
                x.push(p[(i, i)].re);
            }
            for i in 0..b {
                for j in i + 1..b {
                    x.push(r2 * p[(i, j)].re);
                    x.push(r2 * p[(i, j)].im);
                }
            }
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> Vec<CMatrix> {
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut k = 0;
        let mut parts = Vec::with_capacity(self.blocks.len());
        for &b in &self.blocks {
            let mut m = CMatrix::zeros(b, b);
            for i in 0..b {
                m[(i, i)] = C64::new(x[k], 0.0);
                k += 1;
            }
            for i in 0..b {
                for j in i + 1..b {
                    let z = C64::new(x[k] * r2, x[k + 1] * r2);
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                    k += 2;
                }
            }
            parts.push(m);
        }
        parts
    }

    /// The basis element behind coordinate `k`, embedded by `E`.
    fn embedded_basis(&self) -> Vec<CMatrix> {
        let n = self.coords();
        (0..n)
            .map(|k| {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                self.embed(&self.unpack(&e))
            })
            .collect()
    }

    /// `Tr` of each basis element: one for diagonal coordinates, zero otherwise.
    fn trace_vector(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.coords());
        for &b in &self.blocks {
            c.extend(std::iter::repeat_n(1.0, b));
            c.extend(std::iter::repeat_n(0.0, b * (b - 1)));
        }
        c
    }
}

fn total_trace(parts: &[CMatrix]) -> f64 {
    parts.iter().map(linalg::trace_re).sum()
}

fn scale_parts(parts: &[CMatrix], s: f64) -> Vec<CMatrix> {
    parts.iter().map(|p| p.scale(s)).collect()
}

/// Minimum of `D_α(ρ ‖ Σ_j Π_j σ Π_j)` over density operators `σ`.
pub(crate) fn block_cone_infimum(rho: &CMatrix, projectors: &[CMatrix], alpha: RenyiOrder, opts: &SolverOptions) -> ConeSolution {
    let d = rho.nrows();
    let mut columns: Vec<CMatrix> = Vec::new();
    for p in projectors {
        let range = eigh(p);
        let idx: Vec<usize> = (0..d).filter(|&j| range.values[j] > 0.5).collect();
        let v = linalg::select_columns(&range.vectors, &idx);
        let block = v.adjoint() * rho * &v;
        let w = eigh(&block).support_basis();
        if w.ncols() > 0 {
            columns.push(&v * w);
        }
    }
    let sizes: Vec<usize> = columns.iter().map(|c| c.ncols()).collect();
    let total: usize = sizes.iter().sum();
    let mut iso = CMatrix::zeros(d, total);
    let mut off = 0;
    for c in &columns {
        iso.view_mut((0, off), (d, c.ncols())).copy_from(c);
        off += c.ncols();
    }
    let reduced = iso.adjoint() * rho * &iso;
    let cone = Cone::new(1, sizes);
    let sol = minimize(&reduced, &cone, alpha, opts);
    let sigma = &iso * cone.embed(&sol.blocks) * iso.adjoint();
    ConeSolution { value: sol.value, sigma, iterations: sol.iterations, residual: sol.residual, converged: sol.converged }
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub value: f64,
    pub blocks: Vec<CMatrix>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// `min_σ D_α(ρ ‖ E(σ))` for `ρ` already compressed so that `E†(ρ)` has full rank.
pub(crate) fn minimize(rho: &CMatrix, cone: &Cone, alpha: RenyiOrder, opts: &SolverOptions) -> Solution {
    let objective = |parts: &[CMatrix]| sandwiched(rho, &cone.embed(parts), alpha);
    if cone.inner <= 1 || alpha.is_one() {
        let blocks = if cone.inner <= 1 {
            cone.maximally_mixed()
        } else {
            let b = cone.adjoint(rho);
            let t = total_trace(&b);
            scale_parts(&b, 1.0 / t)
        };
        return Solution { value: objective(&blocks), blocks, iterations: 0, residual: 0.0, converged: true };
    }
    if alpha.is_infinite() {
        return barrier_sdp(rho, cone, opts.tol);
    }
    let run = |start: usize| -> Solution {
        let init = if start == 0 { cone.maximally_mixed() } else { perturbed_start(cone, opts.seed, start as u64) };
        let (fp, fp_iters) = fixed_point(rho, cone, alpha.value(), init, opts);
        let mut sol = sqrt_newton(rho, cone, alpha.value(), &fp, opts);
        sol.iterations += fp_iters;
        let fp_value = objective(&fp);
        if fp_value < sol.value {
            sol.value = fp_value;
            sol.blocks = fp;
        }
        sol
    };
    let runs: Vec<Solution> = (0..=opts.restarts).into_par_iter().map(run).collect();
    runs.into_iter()
        .reduce(|best, s| if s.value < best.value { s } else { best })
        .expect("at least one start")
}

fn perturbed_start(cone: &Cone, seed: u64, stream: u64) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = cone.inner as f64;
    let parts: Vec<CMatrix> = cone
        .blocks
        .iter()
        .map(|&b| {
            let g = CMatrix::from_fn(b, b, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            let w = &g * g.adjoint();
            let t = linalg::trace_re(&w);
            (linalg::identity(b).unscale(n) + w.scale(b as f64 / (n * t))).scale(0.5)
        })
        .collect();
    let t = total_trace(&parts);
    scale_parts(&parts, 1.0 / t)
}

fn fixed_point(rho: &CMatrix, cone: &Cone, a: f64, init: Vec<CMatrix>, opts: &SolverOptions) -> (Vec<CMatrix>, usize) {
    let order = RenyiOrder(a);
    let gamma = (1.0 - a) / (2.0 * a);
    let mut sigma = init;
    let mut current = sandwiched(rho, &cone.embed(&sigma), order);
    let mut damping = 1.0_f64;
    let mut iters = 0;
    while iters < opts.max_fixed_point {
        iters += 1;
        let powered: Vec<CMatrix> = sigma.iter().map(|s| eigh(s).support_power(gamma)).collect();
        let s = cone.embed(&powered);
        let x = &s * rho * &s;
        let ex = eigh(&x);
        let top = ex.max_value();
        if top <= 0.0 {
            break;
        }
        let xa = ex.map(|v| if v > 0.0 { (v / top).powf(a) } else { 0.0 });
        let image = cone.adjoint(&xa);
        let t = total_trace(&image);
        let image = scale_parts(&image, 1.0 / t);
        let step: Vec<CMatrix> = image.iter().zip(&sigma).map(|(f, s)| f - s).collect();
        let size: f64 = step.iter().map(linalg::trace_norm).sum();
        if size < opts.fixed_point_tol {
            break;
        }
        damping = (2.0 * damping).min(1.0);
        let mut accepted = None;
        while damping > 1e-8 {
            let trial: Vec<CMatrix> = sigma.iter().zip(&step).map(|(s, d)| s + d.scale(damping)).collect();
            let value = sandwiched(rho, &cone.embed(&trial), order);
            if value <= current {
                accepted = Some((trial, value));
                break;
            }
            damping *= 0.5;
        }
        match accepted {
            Some((trial, value)) => {
                sigma = trial;
                current = value;
            }
            None => break,
        }
    }
    (sigma, iters)
}

/// `f(M) = D_α(ρ ‖ E(|M|^q)) + log2 Tr M²` with `q = 2(1−α)/α`; equal to
/// `D_α(ρ ‖ E(M²/Tr M²))` and invariant under rescaling `M`.
struct SqrtObjective<'a> {
    rho_half: CMatrix,
    cone: &'a Cone,
    a: f64,
    q: f64,
}

impl SqrtObjective<'_> {
    fn g(&self, v: f64) -> f64 {
        v.abs().powf(self.q)
    }

    fn dg(&self, v: f64) -> f64 {
        if v == 0.0 {
            return if self.q > 1.0 { 0.0 } else { f64::INFINITY };
        }
        self.q * v.signum() * v.abs().powf(self.q - 1.0)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let parts = self.cone.unpack(x);
        let eigs: Vec<Eigen> = parts.iter().map(eigh).collect();
        let powered: Vec<CMatrix> = eigs.iter().map(|e| e.map(|v| self.g(v))).collect();
        if powered.iter().any(|p| p.iter().any(|z| !z.re.is_finite())) {
            return None;
        }
        let z = self.cone.embed(&powered);
        let y = &self.rho_half * z * &self.rho_half;
        let ey = eigh(&y);
        let top = ey.max_value();
        if top <= 0.0 {
            return None;
        }
        let cut = 1e-14 * top;
        let a = self.a;
        let qs: f64 = ey.values.iter().filter(|&&v| v > cut).map(|&v| (v / top).powf(a)).sum();
        let log_q = a * top.ln() + qs.ln();
        let tr: f64 = x.iter().map(|v| v * v).sum();
        let f = log_q / ((a - 1.0) * LN2) + tr.log2();

        let ym = ey.map(|v| if v > cut { (v / top).powf(a - 1.0) } else { 0.0 });
        let mm = &self.rho_half * ym * &self.rho_half;
        let adj = self.cone.adjoint(&mm);
        let scale = a / (qs * top * (a - 1.0) * LN2);
        let grads: Vec<CMatrix> = eigs
            .iter()
            .zip(&adj)
            .zip(&parts)
            .map(|((e, b), m)| {
                linalg::frechet_adjoint(e, b, |v| self.g(v), |v| self.dg(v)).scale(scale) + m.scale(2.0 / (tr * LN2))
            })
            .collect();
        let g = self.cone.to_coords(&grads);
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((f, g))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sqrt_newton(rho: &CMatrix, cone: &Cone, a: f64, start: &[CMatrix], opts: &SolverOptions) -> Solution {
    let obj = SqrtObjective { rho_half: eigh(rho).support_power(0.5), cone, a, q: 2.0 * (1.0 - a) / a };
    let roots: Vec<CMatrix> = start.iter().map(|s| eigh(s).map(|v| v.max(0.0).sqrt())).collect();
    let mut x = cone.to_coords(&roots);
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let n = x.len();
    let finish = |x: &[f64], f: f64, g: &[f64], iters: usize| {
        let parts = cone.unpack(x);
        let sq: Vec<CMatrix> = parts.iter().map(|m| m * m).collect();
        let t = total_trace(&sq);
        let residual = norm(g);
        Solution { value: f, blocks: scale_parts(&sq, 1.0 / t), iterations: iters, residual, converged: residual <= opts.tol }
    };
    let Some((mut f, mut g)) = obj.value_and_gradient(&x) else {
        let t = total_trace(start);
        let value = sandwiched(rho, &cone.embed(start), RenyiOrder(a));
        return Solution { value, blocks: scale_parts(start, 1.0 / t), iterations: 0, residual: f64::INFINITY, converged: false };
    };
    let mut iters = 0;
    while iters < opts.max_newton {
        iters += 1;
        let h = 1e-6 * x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut hess = DMatrix::<f64>::zeros(n, n);
        let mut ok = true;
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            match (obj.value_and_gradient(&xp), obj.value_and_gradient(&xm)) {
                (Some((_, gp)), Some((_, gm))) => {
                    for r in 0..n {
                        hess[(r, i)] = (gp[r] - gm[r]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let eig = hess.symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        let shift = (-lo).max(0.0) + 1e-10 * hi.max(1.0);
        let gv = DVector::from_column_slice(&g);
        let coeffs = eig.eigenvectors.transpose() * &gv;
        let scaled = DVector::from_iterator(n, coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, w)| -c / (w + shift)));
        let dx = &eig.eigenvectors * scaled;
        let slope = dot(&g, dx.as_slice());
        let mut t = 1.0;
        let mut next = None;
        while t > 1e-12 {
            let xt: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + t * d).collect();
            if let Some((ft, _)) = obj.value_and_gradient(&xt) {
                if ft <= f + 1e-4 * t * slope {
                    next = Some((xt, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((mut xn, fn_)) = next else { break };
        let nn = norm(&xn);
        xn.iter_mut().for_each(|v| *v /= nn);
        let Some((fx, gx)) = obj.value_and_gradient(&xn) else { break };
        let decrease = f - fn_;
        x = xn;
        f = fx;
        g = gx;
        if decrease < 1e-15 {
            break;
        }
    }
    finish(&x, f, &g, iters)
}

/// `min Tr S` subject to `E(S) ≥ ρ`, by a log-barrier interior-point method.
/// The optimum `S*` gives `min_σ D_max(ρ‖E(σ)) = log2 Tr S*`.
fn barrier_sdp(rho: &CMatrix, cone: &Cone, tol: f64) -> Solution {
    let n = cone.coords();
    let d = rho.nrows();
    let basis = cone.embedded_basis();
    let c = cone.trace_vector();
    let top = eigh(rho).max_value();
    let mut x = vec![0.0; n];
    for (xi, ci) in x.iter_mut().zip(&c) {
        *xi = (top + 1.0) * ci;
    }
    let slack = |x: &[f64]| -> CMatrix {
        let mut z = -rho.clone();
        for (xi, b) in x.iter().zip(&basis) {
            if *xi != 0.0 {
                z += b.scale(*xi);
            }
        }
        z
    };
    // Complex Cholesky does not reject indefinite input, so feasibility goes through the spectrum.
    let barrier = |x: &[f64], t: f64| -> Option<f64> {
        let w = linalg::eigvalsh(&slack(x));
        if w.first().is_none_or(|&v| v <= 0.0) {
            return None;
        }
        Some(t * dot(&c, x) - w.iter().map(|v| v.ln()).sum::<f64>())
    };
    let m = d as f64;
    let mut t = 1.0;
    let mut iters = 0;
    loop {
        for _ in 0..100 {
            iters += 1;
            let ez = eigh(&slack(&x));
            if ez.min_value() <= 0.0 {
                break;
            }
            let zinv = ez.map(|v| 1.0 / v);
            let prods: Vec<CMatrix> = basis.iter().map(|b| &zinv * b).collect();
            let g = DVector::from_iterator(n, (0..n).map(|i| t * c[i] - linalg::trace_re(&prods[i])));
            let mut hess = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = linalg::trace_product_re(&prods[i], &prods[j]);
                    hess[(i, j)] = v;
                    hess[(j, i)] = v;
                }
            }
            let dx = match hess.clone().cholesky() {
                Some(ch) => -ch.solve(&g),
                None => {
                    let shifted = hess + DMatrix::<f64>::identity(n, n) * 1e-12;
                    match shifted.lu().solve(&g) {
                        Some(s) => -s,
                        None => break,
                    }
                }
            };
            let dec = -g.dot(&dx);
            if dec / 2.0 < 1e-12 {
                break;
            }
            let f0 = barrier(&x, t).unwrap_or(f64::INFINITY);
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-14 {
                let xt: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + s * d).collect();
                if let Some(ft) = barrier(&xt, t) {
                    if ft <= f0 - 0.25 * s * dec {
                        x = xt;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let trace = dot(&c, &x);
        if m / t <= 1e-13 * trace || t > 1e18 {
            break;
        }
        t *= 10.0;
    }
    let trace = dot(&c, &x);
    let parts = cone.unpack(&x);
    let gap = m / t / trace;
    Solution { value: trace.log2(), blocks: scale_parts(&parts, 1.0 / trace), iterations: iters, residual: gap, converged: gap <= tol.max(1e-12) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coordinates_round_trip() {
        let cone = Cone::new(2, vec![2, 3]);
        let x: Vec<f64> = (0..cone.coords()).map(|k| (k as f64).sin()).collect();
        let back = cone.to_coords(&cone.unpack(&x));
        for (a, b) in x.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        assert_eq!(cone.trace_vector().iter().sum::<f64>(), 5.0);
    }

    #[test]
    fn embedding_adjoint_pairing() {
        let cone = Cone::new(2, vec![1, 2]);
        let x: Vec<f64> = (0..cone.coords()).map(|k| 0.3 + k as f64).collect();
        let parts = cone.unpack(&x);
        let y = CMatrix::from_fn(6, 6, |i, j| C64::new((i * 7 + j) as f64, (i as f64) - (j as f64)));
        let y = linalg::hermitian_part(&y);
        let lhs = linalg::trace_product_re(&cone.embed(&parts), &y);
        let rhs: f64 = parts.iter().zip(cone.adjoint(&y)).map(|(p, a)| linalg::trace_product_re(p, &a)).sum();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn sqrt_gradient_matches_finite_differences() {
        let cone = Cone::new(2, vec![2]);
        let v: Vec<C64> = [0.3, -0.2, 0.5, 0.1, 0.4, 0.2, -0.3, 0.6].iter().enumerate().map(|(i, &r)| C64::new(r, 0.1 * i as f64)).collect();
        let w = linalg::outer(&v[..4]) + linalg::outer(&v[4..]);
        let t = linalg::trace_re(&w);
        let rho = w.unscale(t);
        for a in [0.6, 2.0] {
            let obj = SqrtObjective { rho_half: eigh(&rho).support_power(0.5), cone: &cone, a, q: 2.0 * (1.0 - a) / a };
            let x = vec![0.7, 0.4, 0.2, -0.1];
            let (_, g) = obj.value_and_gradient(&x).unwrap();
            for k in 0..x.len() {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (obj.value_and_gradient(&xp).unwrap().0 - obj.value_and_gradient(&xm).unwrap().0) / (2.0 * h);
                assert_relative_eq!(g[k], fd, epsilon = 1e-6);
            }
        }
    }
}

//! Strong separation certificates and exponential decay bounds.
//!
//! An alternative set `A = {f_1, ..., f_K}` is strongly delta-separated from
//! `f_0` when every mixture `q_nu = sum nu_i f_i` keeps affinity below
//! `delta < 1`. The certified constant converts into the per-observation
//! decay rate `beta_0 = -ln delta` via the product bound
//!
//! ```text
//! Aff(f_0^(n), q_nu^(n)) <= delta^n = exp(-n beta_0),
//! ```
//!
//! where `q_nu^(n)` mixes the n-fold product densities. Everything else in
//! this module rides on that bound: the evidence-numerator tail estimates in
//! [`schwartz_decay_bound`] and [`walker_decay_bound`], the empirical
//! uniform-law statistic, the direct numerator bound from the root
//! likelihood ratio mean, and the uniformly consistent test built from the
//! acceptance region of empirical root-ratio means.
//!
//! The mixture maximization is an away-step Frank-Wolfe scheme over the
//! probability simplex. The objective `nu -> Aff(f_0, q_nu)` is concave, so
//! the linearization gap `max_i grad_i - <grad, nu>` upper-bounds the
//! distance to the supremum; certificates add the residual gap to the best
//! value found, erring on the conservative side.

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::densities::{affinity, l1_distance, DensitySpec, EmpiricalSample};
use crate::densities::root_likelihood_ratio_mean;
use crate::error::{Error, Result};
use crate::logsum::log_sum_exp;
use crate::priors::{DiscretizedPrior, SubsetSelector, ThetaPoint};
use crate::quad::SimpsonGrid;
use crate::rng::{self, role};

/// Simplex weights over an explicit component list.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingWeights {
    weights: Vec<f64>,
}

impl MixingWeights {
    /// Weights must be nonnegative and sum to one within 1e-9; they are then
    /// renormalized to an exact unit sum.
    pub fn new(weights: Vec<f64>) -> Result<MixingWeights> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1 within 1e-9"
            )));
        }
        Ok(MixingWeights {
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(k: usize) -> MixingWeights {
        MixingWeights {
            weights: vec![1.0 / k as f64; k.max(1)],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Options for the simplex maximization.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iters: usize,
    pub gap_tol: f64,
    /// Random interior restarts in addition to the uniform start.
    pub restarts: usize,
    pub seed: u64,
    /// Panel budget for the shared quadrature grid.
    pub panels: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iters: 500,
            gap_tol: 1e-6,
            restarts: 5,
            seed: 0x5eed_cafe,
            panels: 4000,
        }
    }
}

/// Result of maximizing `nu -> Aff(f0, q_nu)` over the simplex.
#[derive(Debug, Clone)]
pub struct MixtureAffinityMax {
    /// Best affinity found (a lower bound on the supremum).
    pub delta_hat: f64,
    pub weights: MixingWeights,
    /// Final linearization gap: `sup - delta_hat <= gap`.
    pub gap: f64,
}

/// Shared quadrature data for one maximization problem.
struct MixtureProblem {
    w: Vec<f64>,
    f0: Vec<f64>,
    /// comps[i][k] = f_i at node k.
    comps: Vec<Vec<f64>>,
}

/// Caps `sqrt(f0/q)` so that boundary nodes with vanishing mixtures cannot
/// poison gradients with `inf * 0`.
const RATIO_CAP: f64 = 1e140;

impl MixtureProblem {
    fn new(f0: &DensitySpec, comps: &[DensitySpec], panels: usize) -> Result<MixtureProblem> {
        for c in comps {
            if c.measure() != f0.measure() {
                return Err(Error::MismatchedMeasures);
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut kinks: Vec<f64> = Vec::new();
        for d in std::iter::once(f0).chain(comps.iter()) {
            let (a, b) = d.effective_support();
            lo = lo.min(a);
            hi = hi.max(b);
            kinks.extend(d.kink_points());
            kinks.push(a);
            kinks.push(b);
        }
        kinks.retain(|x| *x > lo && *x < hi);
        kinks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        kinks.dedup();
        let mut edges = vec![lo];
        edges.extend(kinks);
        edges.push(hi);
        let segments: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
        let grid = SimpsonGrid::new(&segments, panels);
        let f0_vals: Vec<f64> = grid.nodes.iter().map(|&x| f0.pdf_unchecked(x)).collect();
        let comp_vals: Vec<Vec<f64>> = comps
            .iter()
            .map(|c| grid.nodes.iter().map(|&x| c.pdf_unchecked(x)).collect())
            .collect();
        Ok(MixtureProblem {
            w: grid.weights,
            f0: f0_vals,
            comps: comp_vals,
        })
    }

    fn k(&self) -> usize {
        self.comps.len()
    }

    fn mixture(&self, nu: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.w.len()];
        for (i, &v) in nu.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (qk, fk) in q.iter_mut().zip(&self.comps[i]) {
                *qk += v * fk;
            }
        }
        q
    }

    fn value_of_mixture(&self, q: &[f64]) -> f64 {
        // Away steps can leave tiny negative entries through cancellation;
        // clamping keeps the square root NaN-free.
        self.w
            .iter()
            .zip(&self.f0)
            .zip(q)
            .map(|((&w, &p0), &qk)| w * (p0 * qk).max(0.0).sqrt())
            .sum()
    }

    /// Gradient of the affinity: `g_i = 1/2 * integral f_i sqrt(f0/q)`.
    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.k()];
        for (k, ((&w, &p0), &qk)) in self.w.iter().zip(&self.f0).zip(q).enumerate() {
            if p0 <= 0.0 {
                continue;
            }
            let c = if qk > 0.0 {
                (p0 / qk).sqrt().min(RATIO_CAP)
            } else {
                RATIO_CAP
            } * w
                * 0.5;
            if c == 0.0 {
                continue;
            }
            for (gi, fi) in g.iter_mut().zip(&self.comps) {
                *gi += c * fi[k];
            }
        }
        g
    }
}

/// Concave maximization along the segment from `q` to `q_end` by ternary
/// search; the endpoint itself competes with the interior optimum so that
/// full steps (vertex jumps and vertex drops) are taken exactly.
fn line_search(problem: &MixtureProblem, q: &[f64], q_end: &[f64], iters: usize) -> f64 {
    let eval = |t: f64| {
        let qg: Vec<f64> = q
            .iter()
            .zip(q_end)
            .map(|(&a, &b)| (1.0 - t) * a + t * b)
            .collect();
        problem.value_of_mixture(&qg)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..iters {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let t = 0.5 * (lo + hi);
    if eval(1.0) >= eval(t) {
        1.0
    } else {
        t
    }
}

fn away_step_frank_wolfe(
    problem: &MixtureProblem,
    start: Vec<f64>,
    max_iters: usize,
    gap_tol: f64,
) -> (Vec<f64>, f64, f64) {
    let mut nu = start;
    let mut q = problem.mixture(&nu);
    let mut gap = f64::INFINITY;
    for iter in 0..max_iters {
        let g = problem.gradient(&q);
        let inner: f64 = g.iter().zip(&nu).map(|(gi, vi)| gi * vi).sum();
        let s = (0..problem.k())
            .max_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap())
            .unwrap();
        gap = g[s] - inner;
        if gap <= gap_tol {
            break;
        }
        // Away vertex: worst active component.
        let a = (0..problem.k())
            .filter(|&i| nu[i] > 0.0)
            .min_by(|&x, &y| g[x].partial_cmp(&g[y]).unwrap())
            .unwrap();
        let away_gain = inner - g[a];
        let mut resync = false;
        if gap >= away_gain || nu[a] >= 1.0 {
            // Forward step toward vertex s: t = 1 lands on e_s exactly.
            let q_end = problem.comps[s].clone();
            let t = line_search(problem, &q, &q_end, 48);
            if t >= 1.0 {
                nu.iter_mut().for_each(|v| *v = 0.0);
                nu[s] = 1.0;
                resync = true;
            } else {
                for (i, v) in nu.iter_mut().enumerate() {
                    *v = (1.0 - t) * *v + if i == s { t } else { 0.0 };
                }
                for (qk, fk) in q.iter_mut().zip(&q_end) {
                    *qk = (1.0 - t) * *qk + t * fk;
                }
            }
        } else {
            // Away step from vertex a: t = 1 drops the vertex exactly.
            let gamma_max = nu[a] / (1.0 - nu[a]);
            let q_end: Vec<f64> = q
                .iter()
                .zip(&problem.comps[a])
                .map(|(&qk, &fk)| ((1.0 + gamma_max) * qk - gamma_max * fk).max(0.0))
                .collect();
            let t = line_search(problem, &q, &q_end, 48);
            let gamma = t * gamma_max;
            for (i, v) in nu.iter_mut().enumerate() {
                let e = if i == a { 1.0 } else { 0.0 };
                *v = (1.0 + gamma) * *v - gamma * e;
            }
            if t >= 1.0 || nu[a] <= 1e-14 {
                nu[a] = 0.0;
                resync = true;
            } else {
                for (qk, fk) in q.iter_mut().zip(&problem.comps[a]) {
                    *qk = ((1.0 + gamma) * *qk - gamma * fk).max(0.0);
                }
            }
        }
        // Re-synchronize q with nu after exact drops and periodically to
        // kill accumulated drift.
        if resync || iter % 64 == 63 {
            let total: f64 = nu.iter().sum();
            for v in nu.iter_mut() {
                *v = (*v / total).max(0.0);
            }
            q = problem.mixture(&nu);
        }
    }
    let value = problem.value_of_mixture(&q);
    (nu, value, gap)
}

/// Maximize `nu -> Aff(f0, q_nu)` over the simplex.
///
/// Returns the best mixture found together with the final duality gap; a
/// gap above tolerance after the iteration cap is an error carrying the
/// best value and the unresolved gap.
pub fn max_mixture_affinity(
    f0: &DensitySpec,
    comps: &[DensitySpec],
    opts: &SimplexOptions,
) -> Result<MixtureAffinityMax> {
    if comps.is_empty() {
        return Err(Error::Precondition(
            "mixture maximization needs at least one component".into(),
        ));
    }
    let problem = MixtureProblem::new(f0, comps, opts.panels)?;
    let k = problem.k();
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / k as f64; k]];
    for t in 0..opts.restarts {
        let mut r = rng::stream(opts.seed, role::OPTIMIZER_START, t as u64);
        // Dirichlet(1) interior start via normalized exponentials.
        let mut v: Vec<f64> = (0..k)
            .map(|_| -(1.0 - r.random::<f64>()).ln())
            .collect();
        let total: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= total;
        }
        starts.push(v);
    }
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    for start in starts {
        let (nu, value, gap) = away_step_frank_wolfe(&problem, start, opts.max_iters, opts.gap_tol);
        let better = match &best {
            None => true,
            Some((_, bv, bg)) => {
                if gap <= opts.gap_tol && *bg > opts.gap_tol {
                    true
                } else if gap > opts.gap_tol && *bg <= opts.gap_tol {
                    false
                } else {
                    value > *bv
                }
            }
        };
        if better {
            best = Some((nu, value, gap));
        }
    }
    let (nu, value, gap) = best.unwrap();
    if gap > opts.gap_tol {
        return Err(Error::SimplexNonConvergence {
            best: value,
            gap,
            tol: opts.gap_tol,
        });
    }
    Ok(MixtureAffinityMax {
        delta_hat: value,
        weights: MixingWeights::new(nu.iter().map(|v| v.max(0.0)).collect::<Vec<_>>())
            .unwrap_or_else(|_| MixingWeights::uniform(k)),
        gap,
    })
}

/// How a certificate was established.
#[derive(Debug, Clone, PartialEq)]
pub enum CertificateMethod {
    /// Direct simplex maximization over the alternative set.
    MixtureMaximization,
    /// L1-ball construction: the set is an L1 ball around a density at L1
    /// distance `separation` from the truth, with ball radius `radius`.
    L1Ball { separation: f64, radius: f64 },
    /// Complement of a weak neighborhood through one bounded functional.
    WeakFunctional { eps: f64 },
    /// Per-index separation in an independent non-identically-distributed
    /// family.
    PerIndex,
}

/// A certified strong-separation statement: every mixture over `components`
/// has affinity to `theta0` at most `delta < 1`, hence the n-fold product
/// affinity is at most `exp(-n beta0 / block_size)`.
#[derive(Debug, Clone)]
pub struct SeparationCertificate {
    pub theta0: DensitySpec,
    pub components: Vec<DensitySpec>,
    pub delta: f64,
    pub beta0: f64,
    pub method: CertificateMethod,
    /// Exchangeable block size for k-fold product alternatives; the decay
    /// rate per observation is `beta0 / block_size`.
    pub block_size: usize,
}

impl SeparationCertificate {
    pub fn new(
        theta0: DensitySpec,
        components: Vec<DensitySpec>,
        delta: f64,
        method: CertificateMethod,
    ) -> Result<SeparationCertificate> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Precondition(format!(
                "certificate needs delta in [0, 1), got {delta}"
            )));
        }
        Ok(SeparationCertificate {
            theta0,
            components,
            delta,
            beta0: -delta.ln(),
            method,
            block_size: 1,
        })
    }

    pub fn with_block_size(mut self, k: usize) -> Result<SeparationCertificate> {
        if k == 0 {
            return Err(Error::Precondition("block size must be positive".into()));
        }
        self.block_size = k;
        Ok(self)
    }

    /// Decay rate per observation after accounting for the block size.
    pub fn effective_rate(&self) -> f64 {
        self.beta0 / self.block_size as f64
    }
}

/// Certify strong separation of an explicit component set by simplex
/// maximization; the certified `delta` adds the residual duality gap to the
/// best mixture affinity found.
pub fn certify_strong_separation(
    f0: &DensitySpec,
    comps: &[DensitySpec],
    opts: &SimplexOptions,
) -> Result<SeparationCertificate> {
    let max = max_mixture_affinity(f0, comps, opts)?;
    let delta = max.delta_hat + max.gap;
    if delta >= 1.0 {
        return Err(Error::Precondition(format!(
            "set is not strongly separated: certified affinity bound {delta} >= 1"
        )));
    }
    SeparationCertificate::new(
        f0.clone(),
        comps.to_vec(),
        delta,
        CertificateMethod::MixtureMaximization,
    )
}

/// Certificate for the L1 ball `{f : |f - f_star|_1 < radius}` with
/// `radius = delta_star / 2`, given `|f_star - f0|_1 > delta_star`.
///
/// Mixtures over the ball stay within the ball (convexity), so every
/// mixture keeps L1 distance at least `delta_star / 2` from `f0`; via
/// `Aff <= 1 - |.|_1^2 / 8` this gives the analytic fallback bound
/// `1 - delta_star^2 / 32`, which the simplex maximization then sharpens.
pub fn l1_ball_certificate(
    f_star: &DensitySpec,
    delta_star: f64,
    f0: &DensitySpec,
    support: &[ThetaPoint],
    opts: &SimplexOptions,
) -> Result<(SeparationCertificate, SubsetSelector)> {
    if !(delta_star > 0.0 && delta_star <= 2.0) {
        return Err(Error::Precondition(format!(
            "delta_star must lie in (0, 2], got {delta_star}"
        )));
    }
    let sep = l1_distance(f_star, f0)?;
    if sep <= delta_star {
        return Err(Error::Precondition(format!(
            "center is not separated: |f_star - f0|_1 = {sep} <= delta_star = {delta_star}"
        )));
    }
    let radius = 0.5 * delta_star;
    let mut ids = Vec::new();
    let mut comps = Vec::new();
    for p in support {
        if l1_distance(&p.density, f_star)? < radius {
            ids.push(p.id);
            comps.push(p.density.clone());
        }
    }
    let method = CertificateMethod::L1Ball { separation: sep, radius };
    if comps.is_empty() {
        let cert = SeparationCertificate::new(f0.clone(), comps, 0.0, method)?;
        return Ok((cert, SubsetSelector::from_ids(ids)));
    }
    let analytic = 1.0 - delta_star * delta_star / 32.0;
    let max = max_mixture_affinity(f0, &comps, opts)?;
    let delta = (max.delta_hat + max.gap).min(analytic);
    let cert = SeparationCertificate::new(f0.clone(), comps, delta, method)?;
    Ok((cert, SubsetSelector::from_ids(ids)))
}

/// Support points outside the weak neighborhood
/// `{f : |integral g f - integral g f0| < eps}` for a bounded functional
/// `|g| <= 1` (checked at quadrature nodes).
pub fn weak_functional_set(
    g: impl Fn(f64) -> f64,
    eps: f64,
    f0: &DensitySpec,
    support: &[ThetaPoint],
) -> Result<SubsetSelector> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!(
            "weak neighborhood radius must be positive, got {eps}"
        )));
    }
    let moment = |f: &DensitySpec| -> Result<f64> {
        let (lo, hi) = f.effective_support();
        let bound_violated = std::cell::Cell::new(false);
        let r = crate::quad::adaptive(
            |x| {
                let gx = g(x);
                if gx.abs() > 1.0 + 1e-12 {
                    bound_violated.set(true);
                }
                gx * f.pdf_unchecked(x)
            },
            lo,
            hi,
            crate::quad::DEFAULT_ABS_TOL,
            &f.kink_points(),
        );
        if bound_violated.get() {
            return Err(Error::Precondition(
                "weak functional must be bounded by 1 in absolute value".into(),
            ));
        }
        if !r.converged {
            return Err(Error::QuadratureNonConvergence {
                achieved: r.abs_error,
                requested: crate::quad::DEFAULT_ABS_TOL,
            });
        }
        Ok(r.value)
    };
    let m0 = moment(f0)?;
    let mut ids = Vec::new();
    for p in support {
        if (moment(&p.density)? - m0).abs() >= eps {
            ids.push(p.id);
        }
    }
    Ok(SubsetSelector::from_ids(ids))
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub draws: u64,
}

const MC_CHUNKS: u64 = 64;

/// Maximum product length for the Monte Carlo product-affinity estimator;
/// beyond this the integrand's variance makes the estimate uninformative.
pub const MAX_PRODUCT_N: usize = 6;

#[derive(Clone, Copy)]
struct Welford {
    sum: f64,
    sumsq: f64,
    count: u64,
}

impl Welford {
    fn new() -> Welford {
        Welford { sum: 0.0, sumsq: 0.0, count: 0 }
    }

    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sumsq += v * v;
        self.count += 1;
    }

    fn merge(mut self, o: Welford) -> Welford {
        self.sum += o.sum;
        self.sumsq += o.sumsq;
        self.count += o.count;
        self
    }

    fn estimate(&self) -> MonteCarloEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        MonteCarloEstimate {
            value: mean,
            std_error: (var / n).sqrt(),
            draws: self.count,
        }
    }
}

/// Per-draw estimator of the n-fold mixture affinity
/// `Aff(f0^(n), q_nu^(n)) = E_{f0^n} sqrt(q_nu^(n)/f0^(n))`, where
/// `q_nu^(n)` is the nu-mixture of n-fold product densities.
///
/// Gaussian families with a shared scale take a sufficient-statistic fast
/// path (the log ratio is linear in the observation sum); the generic path
/// accumulates per-component log ratios observation by observation. Both
/// compute the same integrand.
fn product_affinity_chunk(
    f0: &DensitySpec,
    comps: &[DensitySpec],
    log_nu: &[f64],
    prefix: &mut [Welford],
    draws: u64,
    rng: &mut rand_chacha::ChaCha8Rng,
) {
    let n_max = prefix.len();
    let gaussian_fast: Option<(f64, f64, Vec<(f64, f64)>)> = f0.as_gaussian().and_then(|(m0, s0)| {
        let mut rates = Vec::with_capacity(comps.len());
        for c in comps {
            match c.as_gaussian() {
                Some((mi, si)) if (si - s0).abs() < 1e-12 => {
                    let a = (mi - m0) / (s0 * s0);
                    let b = (mi * mi - m0 * m0) / (2.0 * s0 * s0);
                    rates.push((a, b));
                }
                _ => return None,
            }
        }
        Some((m0, s0, rates))
    });

    let mut log_ratio = vec![0.0_f64; comps.len()];
    let mut terms = vec![0.0_f64; comps.len()];
    for _ in 0..draws {
        log_ratio.iter_mut().for_each(|v| *v = 0.0);
        if let Some((m0, s0, rates)) = &gaussian_fast {
            let mut s = 0.0;
            for (t, acc) in prefix.iter_mut().enumerate() {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                let x = m0 + s0 * z;
                s += x;
                let tn = (t + 1) as f64;
                for ((lr, &(a, b)), term) in
                    log_ratio.iter_mut().zip(rates).zip(terms.iter_mut())
                {
                    *lr = a * s - tn * b;
                    *term = *lr;
                }
                for (term, &lnu) in terms.iter_mut().zip(log_nu) {
                    *term += lnu;
                }
                acc.push((0.5 * log_sum_exp(&terms)).exp());
            }
        } else {
            for acc in prefix.iter_mut().take(n_max) {
                let x = f0.sample(rng);
                let l0 = f0.log_pdf_unchecked(x);
                for (lr, c) in log_ratio.iter_mut().zip(comps) {
                    *lr += c.log_pdf_unchecked(x) - l0;
                }
                for ((term, &lr), &lnu) in
                    terms.iter_mut().zip(log_ratio.iter()).zip(log_nu)
                {
                    *term = lnu + lr;
                }
                acc.push((0.5 * log_sum_exp(&terms)).exp());
            }
        }
    }
}

/// Monte Carlo estimates of `Aff(f0^(n), q_nu^(n))` for every prefix length
/// `n = 1, ..., n_max`, sharing draws across prefixes. Deterministic for a
/// given seed: the budget is split into 64 fixed chunks with derived
/// streams, merged in chunk order regardless of scheduling.
pub fn product_affinity_profile(
    f0: &DensitySpec,
    comps: &[DensitySpec],
    nu: &MixingWeights,
    n_max: usize,
    budget: u64,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate>> {
    if comps.is_empty() || nu.len() != comps.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} components",
            nu.len(),
            comps.len()
        )));
    }
    if n_max == 0 || n_max > MAX_PRODUCT_N {
        return Err(Error::Precondition(format!(
            "product length must lie in 1..={MAX_PRODUCT_N}, got {n_max}"
        )));
    }
    if budget < MC_CHUNKS {
        return Err(Error::Precondition(format!(
            "budget must be at least {MC_CHUNKS} draws"
        )));
    }
    for c in comps {
        if c.measure() != f0.measure() {
            return Err(Error::MismatchedMeasures);
        }
    }
    let log_nu: Vec<f64> = nu
        .as_slice()
        .iter()
        .map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
        .collect();
    let per_chunk = budget / MC_CHUNKS;
    let remainder = budget % MC_CHUNKS;
    let chunks: Vec<Vec<Welford>> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, role::MC_CHUNK, c);
            let mut acc = vec![Welford::new(); n_max];
            let draws = per_chunk + if c < remainder { 1 } else { 0 };
            product_affinity_chunk(f0, comps, &log_nu, &mut acc, draws, &mut r);
            acc
        })
        .collect();
    let mut merged = vec![Welford::new(); n_max];
    for chunk in chunks {
        for (m, c) in merged.iter_mut().zip(chunk) {
            *m = m.merge(c);
        }
    }
    Ok(merged.iter().map(|m| m.estimate()).collect())
}

/// Monte Carlo estimate of the n-fold mixture affinity. An optional target
/// standard error turns an under-resolved estimate into an error.
pub fn product_affinity(
    f0: &DensitySpec,
    comps: &[DensitySpec],
    nu: &MixingWeights,
    n: usize,
    budget: u64,
    seed: u64,
    se_target: Option<f64>,
) -> Result<MonteCarloEstimate> {
    let est = product_affinity_profile(f0, comps, nu, n, budget, seed)?
        .pop()
        .expect("profile returns n estimates");
    if let Some(target) = se_target {
        if est.std_error > target {
            return Err(Error::McBudgetExhausted {
                achieved: est.std_error,
                target,
            });
        }
    }
    Ok(est)
}

/// Monte Carlo estimate of `E_{f0^n} sqrt(J_A)` where
/// `J_A = sum over A of w_theta prod_i f_theta(x_i)/f0(x_i)` keeps the
/// full-prior weights (restricted, not renormalized).
pub fn expected_root_numerator(
    prior: &DiscretizedPrior,
    subset: &SubsetSelector,
    f0: &DensitySpec,
    n: usize,
    budget: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if !prior.is_proper() {
        return Err(Error::ProperPriorRequired);
    }
    if n == 0 || n > MAX_PRODUCT_N {
        return Err(Error::Precondition(format!(
            "product length must lie in 1..={MAX_PRODUCT_N}, got {n}"
        )));
    }
    let pos = prior.positions(subset)?;
    let comps: Vec<DensitySpec> = pos
        .iter()
        .map(|&i| prior.points()[i].density.clone())
        .collect();
    let log_w: Vec<f64> = pos.iter().map(|&i| prior.log_weights()[i]).collect();
    let per_chunk = budget / MC_CHUNKS;
    let remainder = budget % MC_CHUNKS;
    let chunks: Vec<Welford> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, role::MC_CHUNK, c);
            let mut acc = Welford::new();
            let draws = per_chunk + if c < remainder { 1 } else { 0 };
            let mut terms = vec![0.0_f64; comps.len()];
            for _ in 0..draws {
                terms.copy_from_slice(&log_w);
                for _ in 0..n {
                    let x = f0.sample(&mut r);
                    let l0 = f0.log_pdf_unchecked(x);
                    for (term, comp) in terms.iter_mut().zip(&comps) {
                        *term += comp.log_pdf_unchecked(x) - l0;
                    }
                }
                acc.push((0.5 * log_sum_exp(&terms)).exp());
            }
            acc
        })
        .collect();
    let merged = chunks.into_iter().fold(Welford::new(), Welford::merge);
    Ok(merged.estimate())
}

/// Log of the evidence-tail bound `sqrt(Pi(A)) * exp(n (gamma - beta0))`:
/// the probability that `sqrt(J_A)` exceeds `exp(-n gamma)` under the truth
/// is at most this, by Markov plus the certified product affinity bound.
/// `gamma` defaults to `beta0 / 4`.
pub fn schwartz_decay_bound(
    cert: &SeparationCertificate,
    log_prior_mass: f64,
    n: usize,
    gamma: Option<f64>,
) -> Result<DecayBound> {
    let beta0 = cert.effective_rate();
    let gamma = gamma.unwrap_or(beta0 / 4.0);
    if !(gamma > 0.0 && gamma < beta0) {
        return Err(Error::Precondition(format!(
            "gamma must lie in (0, beta0 = {beta0}), got {gamma}"
        )));
    }
    Ok(DecayBound {
        log_bound: 0.5 * log_prior_mass + n as f64 * (gamma - beta0),
        gamma,
        beta0,
    })
}

/// Log of the covered-tail bound `sum_i sqrt(Pi(A_i)) * exp(n (gamma - beta0))`
/// over a countable cover with per-block certificates of common rate
/// `beta0`. The square-root mass sum must pass a divergence heuristic:
/// for long mass lists the second half of the partial sums may contribute
/// at most 1% of the total.
pub fn walker_decay_bound(
    block_log_masses: &[f64],
    beta0: f64,
    n: usize,
    gamma: Option<f64>,
) -> Result<DecayBound> {
    if block_log_masses.is_empty() {
        return Err(Error::Precondition("need at least one block".into()));
    }
    if !(beta0 > 0.0) {
        return Err(Error::Precondition(format!(
            "beta0 must be positive, got {beta0}"
        )));
    }
    let gamma = gamma.unwrap_or(beta0 / 4.0);
    if !(gamma > 0.0 && gamma < beta0) {
        return Err(Error::Precondition(format!(
            "gamma must lie in (0, beta0 = {beta0}), got {gamma}"
        )));
    }
    let half_logs: Vec<f64> = block_log_masses.iter().map(|&lw| 0.5 * lw).collect();
    if half_logs.len() >= 64 {
        let mid = half_logs.len() / 2;
        let full = log_sum_exp(&half_logs);
        let head = log_sum_exp(&half_logs[..mid]);
        let increment = (full.exp() - head.exp()).max(0.0);
        if increment > 0.01 * full.exp() {
            return Err(Error::DivergentSqrtMassSum { increment });
        }
    }
    Ok(DecayBound {
        log_bound: log_sum_exp(&half_logs) + n as f64 * (gamma - beta0),
        gamma,
        beta0,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DecayBound {
    pub log_bound: f64,
    pub gamma: f64,
    pub beta0: f64,
}

impl DecayBound {
    pub fn bound(&self) -> f64 {
        self.log_bound.exp()
    }
}

/// Empirical uniform-law statistic
/// `sup over A of | mean_i sqrt(f/f0)(x_i) - Aff(f, f0) |`; its decay to
/// zero across growing samples is the operative hypothesis replacing
/// entropy or test conditions in the direct numerator bound.
pub fn uniform_slln_statistic(
    comps: &[DensitySpec],
    f0: &DensitySpec,
    sample: &EmpiricalSample,
) -> Result<f64> {
    if comps.is_empty() {
        return Err(Error::Precondition("need at least one alternative".into()));
    }
    let mut sup = 0.0_f64;
    for c in comps {
        let aff = affinity(c, f0)?;
        let emp = root_likelihood_ratio_mean(c, f0, sample)?;
        sup = sup.max((emp - aff).abs());
    }
    Ok(sup)
}

/// Direct numerator bound from the empirical root-ratio means:
/// `J_A <= Pi(A) * exp(2 n (s_bar - 1))` with
/// `s_bar = sup over A of mean_i sqrt(f/f0)(x_i)`,
/// a pathwise consequence of `log u <= u - 1`.
#[derive(Debug, Clone, Copy)]
pub struct NumeratorBound {
    pub log_numerator: f64,
    pub log_bound: f64,
    pub s_bar: f64,
}

impl NumeratorBound {
    pub fn holds(&self) -> bool {
        self.log_numerator <= self.log_bound + 1e-9
    }
}

pub fn slln_numerator_bound(
    prior: &DiscretizedPrior,
    subset: &SubsetSelector,
    f0: &DensitySpec,
    sample: &EmpiricalSample,
) -> Result<NumeratorBound> {
    if !prior.is_proper() {
        return Err(Error::ProperPriorRequired);
    }
    let n = sample.n();
    if n == 0 {
        return Err(Error::InsufficientData("need at least one observation".into()));
    }
    let pos = prior.positions(subset)?;
    if pos.is_empty() {
        return Err(Error::Precondition("subset is empty".into()));
    }
    let mut s_bar = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(pos.len());
    for &i in &pos {
        let p = &prior.points()[i];
        s_bar = s_bar.max(root_likelihood_ratio_mean(&p.density, f0, sample)?);
        let mut lr = 0.0;
        for &x in &sample.observations {
            let l0 = f0.log_pdf(x)?;
            lr += p.density.log_pdf_unchecked(x) - l0;
        }
        terms.push(prior.log_weights()[i] + lr);
    }
    let log_numerator = log_sum_exp(&terms);
    let log_mass = log_sum_exp(&pos.iter().map(|&i| prior.log_weights()[i]).collect::<Vec<_>>());
    let bound = NumeratorBound {
        log_numerator,
        log_bound: log_mass + 2.0 * n as f64 * (s_bar - 1.0),
        s_bar,
    };
    debug_assert!(bound.holds(), "pathwise numerator bound violated");
    Ok(bound)
}

/// Acceptance region of the uniformly consistent test: the data are
/// accepted as truth-like when every alternative's empirical root-ratio
/// mean sits within `delta0` of its affinity.
#[derive(Debug, Clone)]
pub struct AcceptanceRegion {
    pub f0: DensitySpec,
    pub comps: Vec<DensitySpec>,
    pub affinities: Vec<f64>,
    pub delta0: f64,
}

impl AcceptanceRegion {
    pub fn new(f0: DensitySpec, comps: Vec<DensitySpec>, delta0: f64) -> Result<AcceptanceRegion> {
        if !(delta0 > 0.0) {
            return Err(Error::Precondition(format!(
                "delta0 must be positive, got {delta0}"
            )));
        }
        let affinities = comps
            .iter()
            .map(|c| affinity(c, &f0))
            .collect::<Result<Vec<f64>>>()?;
        Ok(AcceptanceRegion { f0, comps, affinities, delta0 })
    }

    pub fn accepts(&self, sample: &EmpiricalSample) -> Result<bool> {
        for (c, &aff) in self.comps.iter().zip(&self.affinities) {
            let emp = root_likelihood_ratio_mean(c, &self.f0, sample)?;
            if (emp - aff).abs() >= self.delta0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Monte Carlo acceptance report of the uniformly consistent test at sample
/// size `n`: acceptance frequency under the truth and under each
/// alternative, with the combined rate `beta0 = delta + delta0` from the
/// certified separation constant.
#[derive(Debug, Clone)]
pub struct UniformTestReport {
    pub n: usize,
    pub delta: f64,
    pub delta0: f64,
    /// `delta + delta0`, the exponent in the type-II bound `exp(-2 n beta0)`.
    pub beta0: f64,
    pub accept_null: MonteCarloEstimate,
    pub accept_alt: Vec<MonteCarloEstimate>,
}

impl UniformTestReport {
    /// Per-alternative check of
    /// `P_theta(accept) <= P_theta0(accept) * exp(-2 n beta0) + 3 SE`.
    pub fn exponential_bound_checks(&self) -> Vec<(f64, f64, bool)> {
        self.accept_alt
            .iter()
            .map(|alt| {
                let bound = self.accept_null.value
                    * (-2.0 * self.n as f64 * self.beta0).exp()
                    + 3.0 * alt.std_error;
                (alt.value, bound, alt.value <= bound)
            })
            .collect()
    }
}

/// Run the uniformly consistent test experiment. Requires
/// `delta + delta0 < 1` where `delta` is the certified strong-separation
/// constant of the alternative set.
pub fn uniformly_consistent_test(
    f0: &DensitySpec,
    comps: &[DensitySpec],
    n: usize,
    delta0: f64,
    budget: u64,
    seed: u64,
    opts: &SimplexOptions,
) -> Result<UniformTestReport> {
    let cert = certify_strong_separation(f0, comps, opts)?;
    let delta = cert.delta;
    if delta + delta0 >= 1.0 {
        return Err(Error::Precondition(format!(
            "delta + delta0 = {} must be below 1",
            delta + delta0
        )));
    }
    let region = AcceptanceRegion::new(f0.clone(), comps.to_vec(), delta0)?;
    let frequency = |law: &DensitySpec, law_idx: u64| -> Result<MonteCarloEstimate> {
        let mut acc = Welford::new();
        let mut r = rng::stream(seed, role::DATASET, law_idx);
        for _ in 0..budget {
            let xs = EmpiricalSample::new(law.sample_many(n, &mut r));
            acc.push(if region.accepts(&xs)? { 1.0 } else { 0.0 });
        }
        Ok(acc.estimate())
    };
    let accept_null = frequency(f0, 0)?;
    let mut accept_alt = Vec::with_capacity(comps.len());
    for (i, c) in comps.iter().enumerate() {
        accept_alt.push(frequency(c, (i + 1) as u64)?);
    }
    Ok(UniformTestReport {
        n,
        delta,
        delta0,
        beta0: delta + delta0,
        accept_null,
        accept_alt,
    })
}

//! Non-i.i.d. regression diagnostics: fixed-design sequences, series and
//! linear-semiparametric regression models, per-index affinities, product
//! (Kakutani-style) equivalence/orthogonality classification, coefficient
//! covers, posterior-numerator traces, and residual-tail identification
//! statistics with certified separation witnesses.
//!
//! Independent non-identical observations factor the likelihood per index,
//! so every i.i.d. quantity has a per-index analogue here: affinities
//! multiply across indices, exponential numerator bounds need the
//! separation to hold at (enough) individual design points, and candidate
//! identification works through residual tail fractions along design
//! subsequences where the covariates stay bounded away from zero.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::densities::{DensitySpec, NoiseKind};
use crate::error::{Error, Result};
use crate::logsum::log_sum_exp;
use crate::quad;

/// A deterministic covariate sequence `x_1, x_2, ...` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DesignPoints {
    /// Finite explicit list; indices beyond its length are an error.
    Explicit(Vec<f64>),
    /// `x_i = i^{-p}` with `p > 0`.
    PowerDecay { p: f64 },
    /// `x_i = a * (-1)^(i+1)`: `+a, -a, +a, ...`.
    Alternating { a: f64 },
    /// Cycles through the given values.
    Periodic(Vec<f64>),
}

impl DesignPoints {
    /// The covariate at 1-based index `i`.
    pub fn point(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Err(Error::Precondition("design indices are 1-based".into()));
        }
        match self {
            DesignPoints::Explicit(xs) => xs.get(i - 1).copied().ok_or_else(|| {
                Error::Precondition(format!(
                    "design index {i} beyond explicit horizon {}",
                    xs.len()
                ))
            }),
            DesignPoints::PowerDecay { p } => Ok((i as f64).powf(-p)),
            DesignPoints::Alternating { a } => {
                Ok(if i % 2 == 1 { *a } else { -*a })
            }
            DesignPoints::Periodic(vals) => {
                if vals.is_empty() {
                    return Err(Error::Precondition("empty periodic design".into()));
                }
                Ok(vals[(i - 1) % vals.len()])
            }
        }
    }

    /// The first `n` covariates.
    pub fn points(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n).map(|i| self.point(i)).collect()
    }
}

/// Series regression mean: `eta(x) = sum_j c_j * sqrt(2) cos(j pi x)`
/// (j starting at 1) on `[0, 1]`. Each basis function is bounded by
/// `sqrt(2)`, so `sup |eta| <= sqrt(2) * sum |c_j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRegressionModel {
    pub coeffs: Vec<f64>,
}

impl SeriesRegressionModel {
    pub fn new(coeffs: Vec<f64>) -> SeriesRegressionModel {
        SeriesRegressionModel { coeffs }
    }

    pub fn mean(&self, x: f64) -> f64 {
        let s2 = std::f64::consts::SQRT_2;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * s2 * ((j + 1) as f64 * std::f64::consts::PI * x).cos())
            .sum()
    }

    pub fn sup_bound(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.coeffs.iter().map(|c| c.abs()).sum::<f64>()
    }
}

/// Linear mean with symmetric noise: `Y_i = alpha + beta x_i + e_i`, where
/// the noise law is symmetric about zero, continuous and positive at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSemiparametricModel {
    pub alpha: f64,
    pub beta: f64,
    pub noise: NoiseKind,
}

impl LinearSemiparametricModel {
    pub fn new(alpha: f64, beta: f64, noise: NoiseKind) -> LinearSemiparametricModel {
        LinearSemiparametricModel { alpha, beta, noise }
    }

    pub fn mean(&self, x: f64) -> f64 {
        self.alpha + self.beta * x
    }

    pub fn residual(&self, x: f64, y: f64) -> f64 {
        y - self.mean(x)
    }
}

/// A mean function for the unified model grid used by numerator traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeanFunction {
    Linear { alpha: f64, beta: f64 },
    Series(SeriesRegressionModel),
}

impl MeanFunction {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            MeanFunction::Linear { alpha, beta } => alpha + beta * x,
            MeanFunction::Series(m) => m.mean(x),
        }
    }
}

/// One candidate model on the grid: a mean function plus a noise law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModelPoint {
    pub id: usize,
    pub mean: MeanFunction,
    pub noise: NoiseKind,
}

impl RegressionModelPoint {
    /// Log density of observation `y` at covariate `x` under this model.
    pub fn log_pdf(&self, x: f64, y: f64) -> Result<f64> {
        let resid = y - self.mean.value(x);
        DensitySpec::SymmetricNoise(self.noise).log_pdf(resid)
    }
}

/// Paired covariates and responses, index-aligned.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegressionData {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl RegressionData {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<RegressionData> {
        if xs.len() != ys.len() {
            return Err(Error::Precondition(format!(
                "{} covariates but {} responses",
                xs.len(),
                ys.len()
            )));
        }
        Ok(RegressionData { xs, ys })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }
}

/// Draw `n` series-regression observations: `X ~ Uniform[0, 1]` i.i.d. and
/// `Y = eta(X) + e` with standard normal errors.
pub fn series_regression_data(
    model: &SeriesRegressionModel,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> RegressionData {
    let noise = DensitySpec::SymmetricNoise(NoiseKind::StdNormal);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random();
        let e = noise.sample(rng);
        xs.push(x);
        ys.push(model.mean(x) + e);
    }
    RegressionData { xs, ys }
}

/// Draw `n` fixed-design observations `Y_i = alpha + beta x_i + e_i`.
pub fn linear_regression_data(
    model: &LinearSemiparametricModel,
    design: &DesignPoints,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RegressionData> {
    let noise = DensitySpec::SymmetricNoise(model.noise);
    let xs = design.points(n)?;
    let ys = xs
        .iter()
        .map(|&x| model.mean(x) + noise.sample(rng))
        .collect();
    Ok(RegressionData { xs, ys })
}

/// Affinity between the index-`i` observation laws of two models sharing a
/// noise law but differing in mean by `delta_mean`. Standard normal noise
/// has the closed form `exp(-delta^2 / 8)`; other noise laws go through
/// quadrature of `sqrt(f(u) f(u - delta))`.
pub fn per_index_affinity(delta_mean: f64, noise: NoiseKind) -> Result<f64> {
    let d = delta_mean.abs();
    if d == 0.0 {
        return Ok(1.0);
    }
    match noise {
        NoiseKind::StdNormal => Ok((-d * d / 8.0).exp()),
        NoiseKind::Laplace { scale } => {
            let f = DensitySpec::SymmetricNoise(noise);
            let lo = -60.0 * scale;
            let hi = 60.0 * scale + d;
            let res = quad::adaptive(
                |u| {
                    let a = f.pdf(u).unwrap_or(0.0);
                    let b = f.pdf(u - d).unwrap_or(0.0);
                    (a * b).max(0.0).sqrt()
                },
                lo,
                hi,
                1e-12,
                &[0.0, d],
            );
            if !res.converged {
                return Err(Error::QuadratureNonConvergence {
                    achieved: res.abs_error,
                    requested: 1e-12,
                });
            }
            Ok(res.value.min(1.0))
        }
    }
}

/// Product affinity across indices for Gaussian noise: per-index exponents
/// `delta_i^2 / 8` add, so the product is `exp(-sum delta_i^2 / 8)`.
pub fn gaussian_product_affinity(delta_means: &[f64]) -> f64 {
    (-delta_means.iter().map(|d| d * d).sum::<f64>() / 8.0).exp()
}

/// Affinity between the joint `(X, Y)` laws of two regression models under
/// `X ~ Uniform[0, 1]` with standard normal errors: the covariate density
/// is shared, so the joint affinity is the X-average of the per-covariate
/// Gaussian affinity, `int_0^1 exp(-(m1(x) - m2(x))^2 / 8) dx`. Strictly
/// below 1 whenever the mean functions differ on a set of positive length.
pub fn uniform_design_affinity(m1: &MeanFunction, m2: &MeanFunction) -> Result<f64> {
    let res = quad::adaptive(
        |x| {
            let d = m1.value(x) - m2.value(x);
            (-d * d / 8.0).exp()
        },
        0.0,
        1.0,
        1e-10,
        &[],
    );
    if !res.converged {
        return Err(Error::QuadratureNonConvergence {
            achieved: res.abs_error,
            requested: 1e-10,
        });
    }
    Ok(res.value.min(1.0))
}

/// A finite prior over regression models (proper, weights normalized).
#[derive(Debug, Clone)]
pub struct RegressionPrior {
    models: Vec<RegressionModelPoint>,
    log_weights: Vec<f64>,
}

impl RegressionPrior {
    pub fn new(models: Vec<RegressionModelPoint>, weights: Vec<f64>) -> Result<RegressionPrior> {
        if models.is_empty() || models.len() != weights.len() {
            return Err(Error::InvalidPrior(format!(
                "{} models with {} weights",
                models.len(),
                weights.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in &models {
            if !seen.insert(m.id) {
                return Err(Error::InvalidPrior(format!("duplicate model id {}", m.id)));
            }
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights(
                "weights must be positive and finite".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        let log_weights = weights.iter().map(|w| (w / total).ln()).collect();
        Ok(RegressionPrior { models, log_weights })
    }

    pub fn models(&self) -> &[RegressionModelPoint] {
        &self.models
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_mass_of(&self, ids: &[usize]) -> f64 {
        let terms: Vec<f64> = self
            .models
            .iter()
            .zip(&self.log_weights)
            .filter(|(m, _)| ids.contains(&m.id))
            .map(|(_, lw)| *lw)
            .collect();
        log_sum_exp(&terms)
    }
}

/// Log of the restricted posterior numerator at sample size `n`:
/// `log sum_{theta in A} w_theta prod_{i<=n} f_theta,i(y_i) / f_0,i(y_i)`.
#[derive(Debug, Clone)]
pub struct NumeratorTrace {
    /// `(n, log numerator)` at each requested checkpoint.
    pub rows: Vec<(usize, f64)>,
}

/// Trace the restricted numerator along checkpoints. `truth` supplies the
/// denominator law; `subset_ids` picks the models in the numerator sum.
/// All log-ratios accumulate in log space; a zero model density at an
/// observation yields an error rather than a silent `-inf`.
pub fn noniid_numerator_trace(
    prior: &RegressionPrior,
    subset_ids: &[usize],
    truth: &RegressionModelPoint,
    data: &RegressionData,
    checkpoints: &[usize],
) -> Result<NumeratorTrace> {
    if checkpoints.iter().any(|&n| n > data.n()) {
        return Err(Error::Precondition(format!(
            "checkpoint beyond data horizon {}",
            data.n()
        )));
    }
    let selected: Vec<(usize, f64)> = prior
        .models
        .iter()
        .enumerate()
        .filter(|(_, m)| subset_ids.contains(&m.id))
        .map(|(pos, _)| (pos, prior.log_weights[pos]))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidSubset(
            "no prior model matches the requested subset ids".into(),
        ));
    }
    let mut running: Vec<f64> = selected.iter().map(|&(_, lw)| lw).collect();
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut sorted_cps: Vec<usize> = checkpoints.to_vec();
    sorted_cps.sort_unstable();
    let mut cp_iter = sorted_cps.iter().peekable();
    while cp_iter.peek() == Some(&&0) {
        rows.push((0, log_sum_exp(&running)));
        cp_iter.next();
    }
    for i in 0..data.n() {
        let (x, y) = (data.xs[i], data.ys[i]);
        let log_f0 = truth.log_pdf(x, y)?;
        if log_f0 == f64::NEG_INFINITY {
            return Err(Error::ZeroDensityAtObservation { x: y });
        }
        for (slot, &(pos, _)) in selected.iter().enumerate() {
            let log_f = prior.models[pos].log_pdf(x, y)?;
            running[slot] += log_f - log_f0;
        }
        while cp_iter.peek() == Some(&&(i + 1)) {
            rows.push((i + 1, log_sum_exp(&running)));
            cp_iter.next();
        }
    }
    Ok(NumeratorTrace { rows })
}

/// An open coordinate box `prod_j (n_j d_j, (n_j + 1) d_j)` in coefficient
/// space, with the per-index L1 diameter bound it certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBox {
    /// Lower-corner lattice indices `n_j`.
    pub indices: Vec<i64>,
    /// Side widths `d_j`.
    pub widths: Vec<f64>,
    /// Upper bound on the per-index L1 distance between any two models
    /// whose coefficients lie in this box (standard normal noise).
    pub l1_diameter_bound: f64,
}

impl CoefficientBox {
    pub fn center(&self) -> Vec<f64> {
        self.indices
            .iter()
            .zip(&self.widths)
            .map(|(&n, &d)| (n as f64 + 0.5) * d)
            .collect()
    }

    pub fn contains(&self, coeffs: &[f64]) -> bool {
        coeffs.len() == self.indices.len()
            && coeffs
                .iter()
                .zip(self.indices.iter().zip(&self.widths))
                .all(|(&c, (&n, &d))| n as f64 * d < c && c < (n as f64 + 1.0) * d)
    }
}

/// Dyadic default widths `d_j = delta * 2^{-j}`, `j = 1..=dims`.
pub fn dyadic_widths(dims: usize, delta: f64) -> Vec<f64> {
    (1..=dims).map(|j| delta * 0.5_f64.powi(j as i32)).collect()
}

/// All lattice boxes intersecting the cube `[-bound, bound]^J`. A box
/// `(n d, (n+1) d)` per coordinate intersects `[-B, B]` exactly when
/// `n d < B` and `(n + 1) d > -B` (open intervals: boxes touching the cube
/// only at a face are excluded).
///
/// Two models with coefficients in the same box have mean functions
/// within `sqrt(2) * sum_j d_j` everywhere, hence per-index L1 distance at
/// most `sqrt(2 / pi) * sqrt(2) * sum_j d_j = (2 / sqrt(pi)) sum_j d_j`
/// under standard normal noise (the mean-shift L1 is `2(2 Phi(s/2) - 1)
/// <= sqrt(2/pi) s`).
pub fn coefficient_box_cover(widths: &[f64], bound: f64) -> Result<Vec<CoefficientBox>> {
    if widths.is_empty() || widths.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Precondition(
            "box widths must be positive and nonempty".into(),
        ));
    }
    if !(bound > 0.0) {
        return Err(Error::Precondition(format!(
            "cube bound must be positive, got {bound}"
        )));
    }
    const TOL: f64 = 1e-9;
    let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(widths.len());
    let mut total: f64 = 1.0;
    for &d in widths {
        let lo = -bound / d - 1.0;
        let hi = bound / d;
        let n_min = (lo + TOL).floor() as i64 + 1;
        let n_max = (hi - TOL).ceil() as i64 - 1;
        ranges.push((n_min, n_max));
        total *= (n_max - n_min + 1) as f64;
    }
    if total > 1e6 {
        return Err(Error::Precondition(format!(
            "box cover would contain {total} boxes; refuse above 1e6"
        )));
    }
    let diam_bound = 2.0 / std::f64::consts::PI.sqrt() * widths.iter().sum::<f64>();
    let mut boxes = Vec::with_capacity(total as usize);
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        boxes.push(CoefficientBox {
            indices: idx.clone(),
            widths: widths.to_vec(),
            l1_diameter_bound: diam_bound,
        });
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(boxes);
            }
            idx[k] += 1;
            if idx[k] <= ranges[k].1 {
                break;
            }
            idx[k] = ranges[k].0;
            k += 1;
        }
    }
}

/// Verdict on whether a design keeps landing on both sides of
/// `[-eps0, eps0]` with linear frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignVerdict {
    /// Provable from the design's closed form.
    CertifiedTrue,
    /// Provably fails (one side is visited finitely often).
    CertifiedFalse,
    /// Explicit finite designs only admit an empirical check at the given
    /// horizon.
    Empirical { consistent: bool },
}

#[derive(Debug, Clone, Copy)]
pub struct DesignBalanceReport {
    pub count_above: usize,
    pub count_below: usize,
    pub horizon: usize,
    pub verdict: DesignVerdict,
}

/// Count design points above `eps0` and below `-eps0` up to `horizon`, and
/// certify (where the design's closed form allows) whether both counts
/// grow linearly. `rho` is the linear-fraction threshold for the empirical
/// verdict on explicit designs.
pub fn assumption_a_check(
    design: &DesignPoints,
    eps0: f64,
    rho: f64,
    horizon: usize,
) -> Result<DesignBalanceReport> {
    if !(eps0 > 0.0) {
        return Err(Error::Precondition(format!(
            "eps0 must be positive, got {eps0}"
        )));
    }
    let xs = design.points(horizon)?;
    let count_above = xs.iter().filter(|&&x| x > eps0).count();
    let count_below = xs.iter().filter(|&&x| x < -eps0).count();
    let verdict = match design {
        DesignPoints::Alternating { a } => {
            if a.abs() > eps0 {
                DesignVerdict::CertifiedTrue
            } else {
                DesignVerdict::CertifiedFalse
            }
        }
        DesignPoints::PowerDecay { .. } => {
            // All points positive and decreasing to zero: the negative side
            // is never visited.
            DesignVerdict::CertifiedFalse
        }
        DesignPoints::Periodic(vals) => {
            if vals.iter().any(|&v| v > eps0) && vals.iter().any(|&v| v < -eps0) {
                DesignVerdict::CertifiedTrue
            } else {
                DesignVerdict::CertifiedFalse
            }
        }
        DesignPoints::Explicit(_) => {
            let floor = (rho * horizon as f64).ceil() as usize;
            DesignVerdict::Empirical {
                consistent: count_above >= floor && count_below >= floor,
            }
        }
    };
    Ok(DesignBalanceReport {
        count_above,
        count_below,
        horizon,
        verdict,
    })
}

/// Limit classification of the product affinity between the joint laws of
/// `Y_i = beta1 x_i + e_i` and `Y_i = beta2 x_i + e_i` (standard normal
/// errors): the product over indices of `exp(-(dbeta x_i)^2 / 8)`.
#[derive(Debug, Clone, PartialEq)]
pub enum KakutaniVerdict {
    /// `sum x_i^2` converges: the joint laws are equivalent and the
    /// product affinity has a strictly positive limit inside the interval.
    Equivalent { limit_lo: f64, limit_hi: f64 },
    /// `sum x_i^2` diverges: the joint laws are mutually singular and the
    /// product affinity tends to zero.
    Orthogonal,
    /// Finite explicit designs carry no asymptotics.
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct KakutaniReport {
    /// `(n, partial product affinity)` at each checkpoint, nonincreasing.
    pub partials: Vec<(usize, f64)>,
    /// `sum_{i<=horizon} x_i^2`.
    pub sum_sq: f64,
    pub verdict: KakutaniVerdict,
}

/// Partial product affinities at `checkpoints` plus the analytic verdict.
/// Power-decay designs use the integral tail bound
/// `sum_{i>N} i^{-2p} < N^{1-2p} / (2p - 1)` to bracket the limit.
pub fn kakutani_product_affinity(
    design: &DesignPoints,
    beta1: f64,
    beta2: f64,
    checkpoints: &[usize],
) -> Result<KakutaniReport> {
    let horizon = checkpoints.iter().copied().max().unwrap_or(0);
    if horizon == 0 {
        return Err(Error::Precondition("no checkpoints".into()));
    }
    let db = beta1 - beta2;
    let xs = design.points(horizon)?;
    // Backward prefix sums at checkpoint boundaries avoid accumulating
    // rounding from adding tiny late terms to a large running sum.
    let mut sorted_cps: Vec<usize> = checkpoints.to_vec();
    sorted_cps.sort_unstable();
    sorted_cps.dedup();
    let mut partials = Vec::with_capacity(sorted_cps.len());
    let mut acc = 0.0_f64;
    let mut prev = 0usize;
    let mut sums = Vec::with_capacity(sorted_cps.len());
    for &cp in &sorted_cps {
        let mut seg = 0.0_f64;
        for i in (prev..cp).rev() {
            seg += xs[i] * xs[i];
        }
        acc += seg;
        sums.push(acc);
        prev = cp;
    }
    for (&cp, &s) in sorted_cps.iter().zip(&sums) {
        partials.push((cp, (-db * db * s / 8.0).exp()));
    }
    let sum_sq = *sums.last().unwrap();
    let verdict = if db == 0.0 {
        KakutaniVerdict::Equivalent {
            limit_lo: 1.0,
            limit_hi: 1.0,
        }
    } else {
        match design {
            DesignPoints::PowerDecay { p } => {
                if 2.0 * p > 1.0 {
                    let tail = (horizon as f64).powf(1.0 - 2.0 * p) / (2.0 * p - 1.0);
                    KakutaniVerdict::Equivalent {
                        limit_lo: (-db * db * (sum_sq + tail) / 8.0).exp(),
                        limit_hi: (-db * db * sum_sq / 8.0).exp(),
                    }
                } else {
                    KakutaniVerdict::Orthogonal
                }
            }
            DesignPoints::Alternating { a } => {
                if *a == 0.0 {
                    KakutaniVerdict::Equivalent {
                        limit_lo: 1.0,
                        limit_hi: 1.0,
                    }
                } else {
                    KakutaniVerdict::Orthogonal
                }
            }
            DesignPoints::Periodic(vals) => {
                if vals.iter().all(|&v| v == 0.0) {
                    KakutaniVerdict::Equivalent {
                        limit_lo: 1.0,
                        limit_hi: 1.0,
                    }
                } else {
                    KakutaniVerdict::Orthogonal
                }
            }
            DesignPoints::Explicit(_) => KakutaniVerdict::Undetermined,
        }
    };
    Ok(KakutaniReport {
        partials,
        sum_sq,
        verdict,
    })
}

/// Which design indices feed a residual-tail statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsequence {
    All,
    /// Indices with `x_i > eps0`.
    PositiveDesign,
    /// Indices with `x_i < -eps0`.
    NegativeDesign,
}

impl std::fmt::Display for Subsequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subsequence::All => write!(f, "all"),
            Subsequence::PositiveDesign => write!(f, "pos"),
            Subsequence::NegativeDesign => write!(f, "neg"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualTailStatistic {
    pub value: f64,
    pub count: usize,
}

/// Fraction of candidate residuals `y_i - (alpha + beta x_i)` exceeding
/// `t` along the chosen design subsequence. Under the true candidate this
/// estimates the noise tail `P(e > t)`; under a mean-shifted candidate the
/// shift moves the fraction away from that tail, which is what identifies
/// the truth.
pub fn doob_identification_statistic(
    data: &RegressionData,
    candidate: &LinearSemiparametricModel,
    t: f64,
    subsequence: Subsequence,
    eps0: f64,
) -> Result<ResidualTailStatistic> {
    let keep = |x: f64| match subsequence {
        Subsequence::All => true,
        Subsequence::PositiveDesign => x > eps0,
        Subsequence::NegativeDesign => x < -eps0,
    };
    let mut count = 0usize;
    let mut hits = 0usize;
    for i in 0..data.n() {
        if keep(data.xs[i]) {
            count += 1;
            if candidate.residual(data.xs[i], data.ys[i]) > t {
                hits += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptySubsequence);
    }
    Ok(ResidualTailStatistic {
        value: hits as f64 / count as f64,
        count,
    })
}

/// Closed-form upper-tail probability `P(e > t)` of a symmetric noise law.
pub fn noise_tail_probability(noise: NoiseKind, t: f64) -> f64 {
    match noise {
        NoiseKind::StdNormal => 0.5 * erfc(t / std::f64::consts::SQRT_2),
        NoiseKind::Laplace { scale } => {
            if t >= 0.0 {
                0.5 * (-t / scale).exp()
            } else {
                1.0 - 0.5 * (t / scale).exp()
            }
        }
    }
}

/// A recipe distinguishing two candidate models through residual tails.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparationWitness {
    /// Same mean line, different noise laws: at threshold `t` the two tail
    /// probabilities differ, so the tail fraction identifies the noise.
    NoiseTail { t: f64, p1: f64, p2: f64 },
    /// Different mean lines: along `subsequence` the mean gap stays at
    /// least `certified_shift > 2 * eta`, so the first candidate's residual
    /// fraction above `eta` converges to `null_tail < 1/2` under its own
    /// law while the second candidate's fraction stays at least `1/2`.
    /// `swapped` means the candidates exchange those roles.
    MeanGap {
        eta: f64,
        subsequence: Subsequence,
        swapped: bool,
        certified_shift: f64,
        null_tail: f64,
    },
}

/// Threshold grid `-5.00, -4.99, ..., 5.00` scanned by the noise-tail
/// witness.
pub fn witness_threshold_grid() -> Vec<f64> {
    (-500..=500).map(|k| k as f64 / 100.0).collect()
}

/// Construct a residual-tail witness separating two candidates, or report
/// them indistinguishable. For equal mean lines the witness is a threshold
/// where the noise tails differ; for differing mean lines it is a
/// threshold `eta = min(gap) * eps0 / 2` (capped at half the certified
/// shift) along a design subsequence where the mean gap is sign-definite.
pub fn separation_witness(
    cand1: &LinearSemiparametricModel,
    cand2: &LinearSemiparametricModel,
    eps0: f64,
) -> Result<SeparationWitness> {
    if !(eps0 > 0.0) {
        return Err(Error::Precondition(format!(
            "eps0 must be positive, got {eps0}"
        )));
    }
    let da = cand1.alpha - cand2.alpha;
    let db = cand1.beta - cand2.beta;
    if da == 0.0 && db == 0.0 {
        if cand1.noise == cand2.noise {
            return Err(Error::IndistinguishableCandidates(
                "identical mean lines and identical noise laws".into(),
            ));
        }
        let mut best = (f64::NAN, 0.0, 0.0, -1.0);
        for t in witness_threshold_grid() {
            let p1 = noise_tail_probability(cand1.noise, t);
            let p2 = noise_tail_probability(cand2.noise, t);
            let gap = (p1 - p2).abs();
            if gap > best.3 + 1e-15 {
                best = (t, p1, p2, gap);
            }
        }
        if best.3 < 1e-9 {
            return Err(Error::IndistinguishableCandidates(
                "noise tails agree on the whole threshold grid".into(),
            ));
        }
        return Ok(SeparationWitness::NoiseTail {
            t: best.0,
            p1: best.1,
            p2: best.2,
        });
    }
    // Mean lines differ: find a subsequence where the shift
    // s(x) = da + db * x is sign-definite, with a certified margin.
    let candidates = [
        (Subsequence::PositiveDesign, false, da + db * eps0, db >= 0.0),
        (Subsequence::NegativeDesign, false, da - db * eps0, db <= 0.0),
        (Subsequence::PositiveDesign, true, -(da + db * eps0), db <= 0.0),
        (Subsequence::NegativeDesign, true, -(da - db * eps0), db >= 0.0),
    ];
    let mut best: Option<(Subsequence, bool, f64)> = None;
    for (sub, swapped, margin, valid) in candidates {
        if valid && margin > 0.0 && best.map_or(true, |b| margin > b.2) {
            best = Some((sub, swapped, margin));
        }
    }
    let (subsequence, swapped, certified_shift) = best.ok_or_else(|| {
        Error::Precondition(
            "mean gap changes sign on both design subsequences; no certified witness".into(),
        )
    })?;
    let gap = match (da == 0.0, db == 0.0) {
        (false, false) => da.abs().min(db.abs()),
        (false, true) => da.abs(),
        (true, false) => db.abs(),
        (true, true) => unreachable!("handled above"),
    };
    let eta = (gap * eps0 / 2.0).min(certified_shift / 2.0);
    let null_noise = if swapped { cand2.noise } else { cand1.noise };
    Ok(SeparationWitness::MeanGap {
        eta,
        subsequence,
        swapped,
        certified_shift,
        null_tail: noise_tail_probability(null_noise, eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{role, stream};

    #[test]
    fn design_sequences() {
        let alt = DesignPoints::Alternating { a: 1.5 };
        assert_eq!(alt.points(4).unwrap(), vec![1.5, -1.5, 1.5, -1.5]);
        let pow = DesignPoints::PowerDecay { p: 1.0 };
        assert_eq!(pow.point(4).unwrap(), 0.25);
        let per = DesignPoints::Periodic(vec![1.0, 0.0, -1.0]);
        assert_eq!(per.points(5).unwrap(), vec![1.0, 0.0, -1.0, 1.0, 0.0]);
        let exp = DesignPoints::Explicit(vec![0.5]);
        assert!(exp.point(2).is_err());
        assert!(alt.point(0).is_err());
    }

    #[test]
    fn series_basis_is_bounded_and_orthonormal() {
        let m = SeriesRegressionModel::new(vec![1.0, -0.5]);
        assert!((m.mean(0.0) - std::f64::consts::SQRT_2 * 0.5).abs() < 1e-12);
        // Basis sup bound.
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!(m.mean(x).abs() <= m.sup_bound() + 1e-12);
        }
        // L2 orthonormality of sqrt(2) cos(j pi x) on [0, 1]: quadrature
        // of phi_1^2, phi_2^2 and the cross term.
        let s2 = std::f64::consts::SQRT_2;
        let phi = |j: f64, x: f64| s2 * (j * std::f64::consts::PI * x).cos();
        let sq1 = quad::adaptive(|x| phi(1.0, x) * phi(1.0, x), 0.0, 1.0, 1e-10, &[]);
        let cross = quad::adaptive(|x| phi(1.0, x) * phi(2.0, x), 0.0, 1.0, 1e-10, &[]);
        assert!((sq1.value - 1.0).abs() < 1e-9);
        assert!(cross.value.abs() < 1e-9);
    }

    #[test]
    fn regression_data_residual_variance_near_one() {
        let model = SeriesRegressionModel::new(vec![0.8, -0.3]);
        let mut rng = stream(77, role::DATASET, 0);
        let data = series_regression_data(&model, 10_000, &mut rng);
        let resid: Vec<f64> = data
            .xs
            .iter()
            .zip(&data.ys)
            .map(|(&x, &y)| y - model.mean(x))
            .collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (resid.len() - 1) as f64;
        assert!(mean.abs() < 0.04, "residual mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "residual variance {var}");
    }

    #[test]
    fn per_index_affinity_gaussian_closed_form() {
        // Mean gap 2 gives exp(-4/8) = exp(-1/2).
        let a = per_index_affinity(2.0, NoiseKind::StdNormal).unwrap();
        assert!((a - (-0.5_f64).exp()).abs() < 1e-14);
        assert_eq!(per_index_affinity(0.0, NoiseKind::StdNormal).unwrap(), 1.0);
    }

    #[test]
    fn per_index_affinity_laplace_quadrature_matches_closed_form() {
        // Laplace(scale s) mean shift d has affinity
        // exp(-d/(2s)) (1 + d/(2s)).
        for (d, s) in [(0.5, 1.0), (2.0, 1.0), (1.0, 0.7)] {
            let a = per_index_affinity(d, NoiseKind::Laplace { scale: s }).unwrap();
            let z: f64 = d / (2.0 * s);
            let oracle = (-z).exp() * (1.0 + z);
            assert!(
                (a - oracle).abs() < 1e-9,
                "d={d} s={s}: {a} vs {oracle}"
            );
        }
    }

    #[test]
    fn uniform_design_affinity_matches_bessel_oracle() {
        // Mean gap sqrt(2) c cos(pi x): the X-average of
        // exp(-2 c^2 cos^2(pi x) / 8) equals
        // exp(-c^2/8) I0(c^2/8), with I0 the modified Bessel function
        // (series sum_k (z/2)^(2k) / (k!)^2).
        let bessel_i0 = |z: f64| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..40 {
                term *= (z / 2.0) * (z / 2.0) / ((k * k) as f64);
                sum += term;
            }
            sum
        };
        for c in [0.5_f64, 1.0, 2.0] {
            let m1 = MeanFunction::Series(SeriesRegressionModel::new(vec![c]));
            let m2 = MeanFunction::Series(SeriesRegressionModel::new(vec![0.0]));
            let a = uniform_design_affinity(&m1, &m2).unwrap();
            let z = c * c / 8.0;
            let oracle = (-z).exp() * bessel_i0(z);
            assert!((a - oracle).abs() < 1e-9, "c={c}: {a} vs {oracle}");
        }
        let same = MeanFunction::Linear { alpha: 1.0, beta: 2.0 };
        assert_eq!(uniform_design_affinity(&same, &same).unwrap(), 1.0);
    }

    #[test]
    fn product_affinity_exponents_add() {
        let deltas = [0.3, -1.2, 0.0, 2.0, 0.7];
        let product: f64 = deltas
            .iter()
            .map(|&d| per_index_affinity(d, NoiseKind::StdNormal).unwrap())
            .product();
        let joint = gaussian_product_affinity(&deltas);
        assert!((product - joint).abs() < 1e-12);
    }

    fn two_model_prior() -> (RegressionPrior, RegressionModelPoint) {
        let truth = RegressionModelPoint {
            id: 0,
            mean: MeanFunction::Linear { alpha: 0.0, beta: 1.0 },
            noise: NoiseKind::StdNormal,
        };
        let other = RegressionModelPoint {
            id: 1,
            mean: MeanFunction::Linear { alpha: 0.5, beta: 0.5 },
            noise: NoiseKind::StdNormal,
        };
        let prior =
            RegressionPrior::new(vec![truth.clone(), other], vec![0.25, 0.75]).unwrap();
        (prior, truth)
    }

    #[test]
    fn numerator_trace_truth_atom_is_constant() {
        let (prior, truth) = two_model_prior();
        let design = DesignPoints::Alternating { a: 1.0 };
        let model = LinearSemiparametricModel::new(0.0, 1.0, NoiseKind::StdNormal);
        let mut rng = stream(5, role::DATASET, 0);
        let data = linear_regression_data(&model, &design, 50, &mut rng).unwrap();
        let trace =
            noniid_numerator_trace(&prior, &[0], &truth, &data, &[0, 10, 25, 50]).unwrap();
        for &(_, log_v) in &trace.rows {
            assert!(
                (log_v - 0.25_f64.ln()).abs() < 1e-12,
                "atom at truth must keep its prior mass exactly"
            );
        }
    }

    #[test]
    fn numerator_trace_matches_brute_force_product() {
        let (prior, truth) = two_model_prior();
        let xs = vec![1.0, -1.0, 0.5];
        let ys = vec![1.3, -0.2, 0.9];
        let data = RegressionData::new(xs.clone(), ys.clone()).unwrap();
        let trace = noniid_numerator_trace(&prior, &[0, 1], &truth, &data, &[3]).unwrap();
        // Hand-rolled: sum over both models of weight * product of ratios.
        let normal_pdf = |r: f64| (-0.5 * r * r).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut total = 0.0;
        for (w, (a, b)) in [(0.25, (0.0, 1.0)), (0.75, (0.5, 0.5))] {
            let mut prod = w;
            for i in 0..3 {
                let num = normal_pdf(ys[i] - (a + b * xs[i]));
                let den = normal_pdf(ys[i] - xs[i]);
                prod *= num / den;
            }
            total += prod;
        }
        assert!((trace.rows[0].1 - total.ln()).abs() < 1e-10);
    }

    #[test]
    fn coefficient_box_counts_match_lattice_arithmetic() {
        // One dimension, width = bound: lattice indices {-1, 0}.
        let boxes = coefficient_box_cover(&[1.0], 1.0).unwrap();
        assert_eq!(boxes.len(), 2);
        let mut idx: Vec<i64> = boxes.iter().map(|b| b.indices[0]).collect();
        idx.sort_unstable();
        assert_eq!(idx, vec![-1, 0]);
        // Two dimensions, widths = bound / 2: 4 x 4 = 16 boxes.
        let boxes2 = coefficient_box_cover(&[0.5, 0.5], 1.0).unwrap();
        assert_eq!(boxes2.len(), 16);
        for b in &boxes2 {
            assert!(b.indices.iter().all(|&n| (-2..=1).contains(&n)));
        }
    }

    #[test]
    fn box_diameter_bound_dominates_sampled_pairs() {
        let widths = dyadic_widths(2, 1.0);
        let boxes = coefficient_box_cover(&widths, 1.0).unwrap();
        let b = &boxes[0];
        let mut rng = stream(9, role::DATASET, 1);
        let lo: Vec<f64> = b
            .indices
            .iter()
            .zip(&b.widths)
            .map(|(&n, &d)| n as f64 * d)
            .collect();
        for _ in 0..20 {
            let c1: Vec<f64> = lo
                .iter()
                .zip(&b.widths)
                .map(|(&l, &d)| l + rng.random::<f64>() * d)
                .collect();
            let c2: Vec<f64> = lo
                .iter()
                .zip(&b.widths)
                .map(|(&l, &d)| l + rng.random::<f64>() * d)
                .collect();
            assert!(b.contains(&c1) && b.contains(&c2));
            let m1 = SeriesRegressionModel::new(c1);
            let m2 = SeriesRegressionModel::new(c2);
            // Direct per-index L1 at a covariate grid: the Gaussian
            // mean-shift L1 is 2(2 Phi(s/2) - 1) with s the mean gap.
            for x in [0.0, 0.21, 0.5, 0.83, 1.0] {
                let s = (m1.mean(x) - m2.mean(x)).abs();
                let l1 = 2.0 * (2.0 * normal_cdf(s / 2.0) - 1.0);
                assert!(
                    l1 <= b.l1_diameter_bound + 1e-12,
                    "direct L1 {l1} above bound {}",
                    b.l1_diameter_bound
                );
            }
        }
    }

    fn normal_cdf(z: f64) -> f64 {
        0.5 * erfc(-z / std::f64::consts::SQRT_2)
    }

    #[test]
    fn design_balance_verdicts() {
        let alt = DesignPoints::Alternating { a: 1.0 };
        let rep = assumption_a_check(&alt, 0.5, 0.1, 100).unwrap();
        assert_eq!(rep.count_above, 50);
        assert_eq!(rep.count_below, 50);
        assert_eq!(rep.verdict, DesignVerdict::CertifiedTrue);

        let pow = DesignPoints::PowerDecay { p: 1.0 };
        let rep = assumption_a_check(&pow, 0.5, 0.1, 100).unwrap();
        assert_eq!(rep.count_below, 0);
        assert_eq!(rep.verdict, DesignVerdict::CertifiedFalse);

        let exp = DesignPoints::Explicit(vec![1.0, -1.0, 1.0, -1.0, 0.1, 0.2]);
        let rep = assumption_a_check(&exp, 0.5, 0.25, 6).unwrap();
        assert_eq!(rep.verdict, DesignVerdict::Empirical { consistent: true });
        let rep = assumption_a_check(&exp, 0.5, 0.4, 6).unwrap();
        assert_eq!(rep.verdict, DesignVerdict::Empirical { consistent: false });
    }

    #[test]
    fn kakutani_power_decay_equivalent() {
        // x_i = 1/i, mean gap 1: sum x_i^2 -> pi^2/6, so the product
        // affinity tends to exp(-pi^2/48).
        let design = DesignPoints::PowerDecay { p: 1.0 };
        let report =
            kakutani_product_affinity(&design, 1.0, 0.0, &[10, 1000, 1_000_000]).unwrap();
        let limit = (-std::f64::consts::PI.powi(2) / 48.0).exp();
        let last = report.partials.last().unwrap().1;
        assert!((last - limit).abs() < 1e-6, "partial {last} vs limit {limit}");
        match report.verdict {
            KakutaniVerdict::Equivalent { limit_lo, limit_hi } => {
                assert!(limit_lo <= limit && limit <= limit_hi);
                assert!(limit_hi - limit_lo < 1e-6);
            }
            ref v => panic!("expected equivalence, got {v:?}"),
        }
        // Partials are nonincreasing.
        for w in report.partials.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-15);
        }
    }

    #[test]
    fn kakutani_constant_design_orthogonal() {
        let design = DesignPoints::Periodic(vec![1.0]);
        let report = kakutani_product_affinity(&design, 1.0, 0.0, &[100]).unwrap();
        assert_eq!(report.verdict, KakutaniVerdict::Orthogonal);
        let expected = (-12.5_f64).exp();
        assert!((report.partials[0].1 - expected).abs() < 1e-12);
    }

    #[test]
    fn kakutani_same_parameter_is_trivially_equivalent() {
        let design = DesignPoints::Alternating { a: 1.0 };
        let report = kakutani_product_affinity(&design, 2.0, 2.0, &[50]).unwrap();
        assert_eq!(report.partials[0].1, 1.0);
        assert!(matches!(report.verdict, KakutaniVerdict::Equivalent { .. }));
    }

    #[test]
    fn residual_shift_identity() {
        // y - m2(x) = (y - m1(x)) + (m1(x) - m2(x)) exactly.
        let m1 = LinearSemiparametricModel::new(1.0, 2.0, NoiseKind::StdNormal);
        let m2 = LinearSemiparametricModel::new(0.5, 1.5, NoiseKind::StdNormal);
        for (x, y) in [(1.0, 3.3), (-1.0, -0.7), (0.25, 1.1)] {
            let direct = m2.residual(x, y);
            let shifted = m1.residual(x, y) + (m1.mean(x) - m2.mean(x));
            assert!((direct - shifted).abs() < 1e-12);
        }
    }

    #[test]
    fn identification_statistic_under_truth_and_mismatch() {
        let truth = LinearSemiparametricModel::new(1.0, 2.0, NoiseKind::StdNormal);
        let design = DesignPoints::Alternating { a: 1.0 };
        let mut rng = stream(41, role::DATASET, 7);
        let n = 4000;
        let data = linear_regression_data(&truth, &design, n, &mut rng).unwrap();

        // True candidate at t = 0: close to 1/2.
        let stat = doob_identification_statistic(&data, &truth, 0.0, Subsequence::All, 0.5)
            .unwrap();
        let se = (0.25 / n as f64).sqrt();
        assert!((stat.value - 0.5).abs() < 3.0 * se, "stat {}", stat.value);

        // Extreme threshold: fraction 0.
        let far = doob_identification_statistic(&data, &truth, 100.0, Subsequence::All, 0.5)
            .unwrap();
        assert_eq!(far.value, 0.0);

        // Mismatched candidate shifted down by delta=0.5 in both
        // coordinates: on the positive subsequence the residuals gain
        // 0.5 * (1 + x) = 1, so the fraction above eta = 0.25 sits near
        // P(e > -0.75), comfortably above 1/2.
        let wrong = LinearSemiparametricModel::new(0.5, 1.5, NoiseKind::StdNormal);
        let stat = doob_identification_statistic(
            &data,
            &wrong,
            0.25,
            Subsequence::PositiveDesign,
            0.5,
        )
        .unwrap();
        let se_sub = (0.25 / stat.count as f64).sqrt();
        assert!(
            stat.value >= 0.5 - 3.0 * se_sub,
            "mismatch fraction {} below 1/2",
            stat.value
        );

        // Empty subsequence errors.
        let pow_data = RegressionData::new(vec![0.1, 0.2], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            doob_identification_statistic(
                &pow_data,
                &truth,
                0.0,
                Subsequence::NegativeDesign,
                0.5
            ),
            Err(Error::EmptySubsequence)
        ));
    }

    #[test]
    fn witness_mean_gap_matches_pinned_recipe() {
        // Gaps (0.5, 0.5) at eps0 = 1: eta = 0.25 on the positive
        // subsequence.
        let c1 = LinearSemiparametricModel::new(1.0, 2.0, NoiseKind::StdNormal);
        let c2 = LinearSemiparametricModel::new(0.5, 1.5, NoiseKind::StdNormal);
        match separation_witness(&c1, &c2, 1.0).unwrap() {
            SeparationWitness::MeanGap {
                eta,
                subsequence,
                swapped,
                certified_shift,
                null_tail,
            } => {
                assert!((eta - 0.25).abs() < 1e-12);
                assert_eq!(subsequence, Subsequence::PositiveDesign);
                assert!(!swapped);
                assert!((certified_shift - 1.0).abs() < 1e-12);
                assert!(null_tail < 0.5);
            }
            w => panic!("expected mean-gap witness, got {w:?}"),
        }
    }

    #[test]
    fn witness_beta_gap_alone_uses_same_recipe() {
        let c1 = LinearSemiparametricModel::new(1.0, 2.0, NoiseKind::StdNormal);
        let c2 = LinearSemiparametricModel::new(1.0, 1.5, NoiseKind::StdNormal);
        match separation_witness(&c1, &c2, 1.0).unwrap() {
            SeparationWitness::MeanGap { eta, subsequence, .. } => {
                assert!((eta - 0.25).abs() < 1e-12);
                assert_eq!(subsequence, Subsequence::PositiveDesign);
            }
            w => panic!("expected mean-gap witness, got {w:?}"),
        }
    }

    #[test]
    fn witness_noise_tail_normal_vs_laplace() {
        let c1 = LinearSemiparametricModel::new(0.0, 1.0, NoiseKind::StdNormal);
        let c2 =
            LinearSemiparametricModel::new(0.0, 1.0, NoiseKind::Laplace { scale: 1.0 });
        match separation_witness(&c1, &c2, 0.5).unwrap() {
            SeparationWitness::NoiseTail { t, p1, p2 } => {
                assert!((p1 - p2).abs() > 1e-3);
                assert!(t.abs() <= 5.0);
                // The grid includes t = 1, where the laws already differ:
                // P(N > 1) ~ 0.1587, P(Lap > 1) ~ 0.1839.
                let n1 = noise_tail_probability(NoiseKind::StdNormal, 1.0);
                let l1 = noise_tail_probability(NoiseKind::Laplace { scale: 1.0 }, 1.0);
                assert!((n1 - 0.158655).abs() < 1e-5);
                assert!((l1 - 0.5 * (-1.0_f64).exp()).abs() < 1e-12);
                assert!((p1 - p2).abs() >= (n1 - l1).abs() - 1e-12);
            }
            w => panic!("expected noise-tail witness, got {w:?}"),
        }
    }

    #[test]
    fn witness_rejects_identical_candidates() {
        let c = LinearSemiparametricModel::new(1.0, 2.0, NoiseKind::StdNormal);
        assert!(matches!(
            separation_witness(&c, &c, 1.0),
            Err(Error::IndistinguishableCandidates(_))
        ));
    }

    #[test]
    fn witness_handles_opposite_orientation() {
        // cand1 BELOW cand2: the roles swap and the negative-design
        // subsequence is never needed since the gap is sign-definite on
        // the positive side.
        let c1 = LinearSemiparametricModel::new(0.5, 1.5, NoiseKind::StdNormal);
        let c2 = LinearSemiparametricModel::new(1.0, 2.0, NoiseKind::StdNormal);
        match separation_witness(&c1, &c2, 1.0).unwrap() {
            SeparationWitness::MeanGap { swapped, subsequence, eta, .. } => {
                assert!(swapped);
                assert_eq!(subsequence, Subsequence::PositiveDesign);
                assert!((eta - 0.25).abs() < 1e-12);
            }
            w => panic!("expected mean-gap witness, got {w:?}"),
        }
    }
}

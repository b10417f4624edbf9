//! Model densities and the divergence toolkit.
//!
//! Every density is absolutely continuous with respect to a dominating
//! measure recorded in its [`MeasureDescriptor`]: Lebesgue on the real line
//! or on a fixed interval. Pairwise functionals (affinity, Hellinger,
//! Kullback-Leibler, L1) insist on a shared dominating measure and are
//! computed by closed form where one exists, by exact piecewise sums for
//! piecewise-constant pairs, and by adaptive quadrature otherwise.
//!
//! Conventions, fixed once here and relied on crate-wide:
//!
//! * affinity `Aff(f, g) = integral of sqrt(f g)`, in `[0, 1]`, equal to 1
//!   iff `f = g` a.e.;
//! * squared Hellinger `H^2(f, g) = 2 (1 - Aff(f, g))`, so `H^2` ranges over
//!   `[0, 2]`;
//! * `kl_divergence(f0, f)` is the mean under `f0` of `log(f0/f)`, i.e. it
//!   is nonnegative and vanishes iff the arguments agree a.e.; it returns
//!   `+inf` when the support of `f0` is not contained in the support of `f`
//!   (within quadrature resolution);
//! * real-line integrals are truncated where the integrand's densities fall
//!   below 1e-16 of their peak, far below the 1e-10 quadrature tolerance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};
use crate::quad;

/// Gaussian effective support half-width in standard deviations:
/// `exp(-x^2/2) < 1e-16` beyond `sqrt(32 ln 10) ~ 8.584`.
fn gauss_halfwidth() -> f64 {
    (2.0 * 16.0 * std::f64::consts::LN_10).sqrt()
}

/// Laplace effective support half-width in scale units: `16 ln 10 ~ 36.84`.
fn laplace_halfwidth() -> f64 {
    16.0 * std::f64::consts::LN_10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeasureDescriptor {
    RealLine,
    Interval { lo: f64, hi: f64 },
}

impl MeasureDescriptor {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            MeasureDescriptor::RealLine => x.is_finite(),
            MeasureDescriptor::Interval { lo, hi } => x >= lo && x <= hi,
        }
    }
}

/// Symmetric noise laws for regression errors: symmetric about zero,
/// continuous and strictly positive at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseKind {
    StdNormal,
    Laplace { scale: f64 },
}

/// A concrete model density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensitySpec {
    /// `N(mu, sigma^2)` on the real line.
    NormalLocation { mu: f64, sigma: f64 },
    /// Piecewise-constant density on `[0, 1]`: `heights[i]` on
    /// `[breaks[i], breaks[i+1])`. Zero outside `[breaks[0], breaks[last]]`.
    Histogram { breaks: Vec<f64>, heights: Vec<f64> },
    /// Uniform on `[0, 1]` distorted by a spike: `1 - eps + eps * m` on
    /// `[0, 1/m]` and `1 - eps` on `(1/m, 1]`.
    SpikedUniform { eps: f64, m: f64 },
    /// Centered symmetric noise on the real line.
    SymmetricNoise(NoiseKind),
}

impl DensitySpec {
    pub fn normal(mu: f64, sigma: f64) -> Result<DensitySpec> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidDensity(format!(
                "normal location requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        Ok(DensitySpec::NormalLocation { mu, sigma })
    }

    /// Histogram heights are validated to integrate to one within 1e-9 and
    /// then rescaled to exact unit mass.
    pub fn histogram(breaks: Vec<f64>, heights: Vec<f64>) -> Result<DensitySpec> {
        if breaks.len() < 2 || heights.len() + 1 != breaks.len() {
            return Err(Error::InvalidDensity(format!(
                "histogram needs k+1 breaks for k heights, got {} breaks, {} heights",
                breaks.len(),
                heights.len()
            )));
        }
        for w in breaks.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidDensity(format!(
                    "histogram breaks must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if breaks[0] < 0.0 || *breaks.last().unwrap() > 1.0 {
            return Err(Error::InvalidDensity(
                "histogram breaks must lie within [0, 1]".into(),
            ));
        }
        if heights.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::InvalidDensity(
                "histogram heights must be finite and nonnegative".into(),
            ));
        }
        let mass: f64 = heights
            .iter()
            .zip(breaks.windows(2))
            .map(|(h, w)| h * (w[1] - w[0]))
            .sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDensity(format!(
                "histogram mass is {mass}, expected 1 within 1e-9"
            )));
        }
        let heights = heights.iter().map(|h| h / mass).collect();
        Ok(DensitySpec::Histogram { breaks, heights })
    }

    pub fn spiked_uniform(eps: f64, m: f64) -> Result<DensitySpec> {
        if !(eps > 0.0 && eps < 1.0) || !(m > 1.0) || !m.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "spiked uniform requires eps in (0,1) and m > 1, got eps={eps}, m={m}"
            )));
        }
        Ok(DensitySpec::SpikedUniform { eps, m })
    }

    pub fn std_normal() -> DensitySpec {
        DensitySpec::SymmetricNoise(NoiseKind::StdNormal)
    }

    pub fn laplace(scale: f64) -> Result<DensitySpec> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "laplace requires scale > 0, got {scale}"
            )));
        }
        Ok(DensitySpec::SymmetricNoise(NoiseKind::Laplace { scale }))
    }

    pub fn measure(&self) -> MeasureDescriptor {
        match self {
            DensitySpec::NormalLocation { .. } | DensitySpec::SymmetricNoise(_) => {
                MeasureDescriptor::RealLine
            }
            DensitySpec::Histogram { .. } | DensitySpec::SpikedUniform { .. } => {
                MeasureDescriptor::Interval { lo: 0.0, hi: 1.0 }
            }
        }
    }

    /// `(mu, sigma)` when the density is Gaussian, regardless of which
    /// variant encodes it.
    pub fn as_gaussian(&self) -> Option<(f64, f64)> {
        match self {
            DensitySpec::NormalLocation { mu, sigma } => Some((*mu, *sigma)),
            DensitySpec::SymmetricNoise(NoiseKind::StdNormal) => Some((0.0, 1.0)),
            _ => None,
        }
    }

    /// Piecewise-constant representation over `[0, 1]` when one exists:
    /// `(edges, values)` with `edges[0] = 0`, `edges[last] = 1`.
    pub fn as_piecewise(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            DensitySpec::Histogram { breaks, heights } => {
                let mut edges = Vec::with_capacity(breaks.len() + 2);
                let mut vals = Vec::with_capacity(heights.len() + 2);
                if breaks[0] > 0.0 {
                    edges.push(0.0);
                    vals.push(0.0);
                }
                edges.extend_from_slice(breaks);
                vals.extend_from_slice(heights);
                if *breaks.last().unwrap() < 1.0 {
                    vals.push(0.0);
                    edges.push(1.0);
                }
                Some((edges, vals))
            }
            DensitySpec::SpikedUniform { eps, m } => Some((
                vec![0.0, 1.0 / m, 1.0],
                vec![1.0 - eps + eps * m, 1.0 - eps],
            )),
            _ => None,
        }
    }

    /// Range outside which the density is below 1e-16 of its peak (exact
    /// support for interval measures).
    pub fn effective_support(&self) -> (f64, f64) {
        match self {
            DensitySpec::NormalLocation { mu, sigma } => {
                let w = gauss_halfwidth() * sigma;
                (mu - w, mu + w)
            }
            DensitySpec::SymmetricNoise(NoiseKind::StdNormal) => {
                let w = gauss_halfwidth();
                (-w, w)
            }
            DensitySpec::SymmetricNoise(NoiseKind::Laplace { scale }) => {
                let w = laplace_halfwidth() * scale;
                (-w, w)
            }
            DensitySpec::Histogram { breaks, .. } => (breaks[0], *breaks.last().unwrap()),
            DensitySpec::SpikedUniform { .. } => (0.0, 1.0),
        }
    }

    /// Interior points where the density is not smooth; quadrature forces
    /// subdivision here.
    pub fn kink_points(&self) -> Vec<f64> {
        match self {
            DensitySpec::Histogram { breaks, .. } => breaks.clone(),
            DensitySpec::SpikedUniform { m, .. } => vec![1.0 / m],
            DensitySpec::SymmetricNoise(NoiseKind::Laplace { .. }) => vec![0.0],
            _ => Vec::new(),
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.pdf_unchecked(x))
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.log_pdf_unchecked(x))
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        match self.measure() {
            MeasureDescriptor::RealLine => {
                if x.is_finite() {
                    Ok(())
                } else {
                    Err(Error::DomainViolation {
                        x,
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    })
                }
            }
            MeasureDescriptor::Interval { lo, hi } => {
                if x >= lo && x <= hi {
                    Ok(())
                } else {
                    Err(Error::DomainViolation { x, lo, hi })
                }
            }
        }
    }

    pub(crate) fn pdf_unchecked(&self, x: f64) -> f64 {
        match self {
            DensitySpec::NormalLocation { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            DensitySpec::Histogram { breaks, heights } => {
                let last = *breaks.last().unwrap();
                if x < breaks[0] || x > last {
                    return 0.0;
                }
                if x == last {
                    return *heights.last().unwrap();
                }
                // partition_point returns the count of breaks <= x, so the
                // containing bin is that count minus one.
                let idx = breaks.partition_point(|b| *b <= x) - 1;
                heights[idx]
            }
            DensitySpec::SpikedUniform { eps, m } => {
                if x <= 1.0 / m {
                    1.0 - eps + eps * m
                } else {
                    1.0 - eps
                }
            }
            DensitySpec::SymmetricNoise(NoiseKind::StdNormal) => {
                (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }
            DensitySpec::SymmetricNoise(NoiseKind::Laplace { scale }) => {
                (-x.abs() / scale).exp() / (2.0 * scale)
            }
        }
    }

    pub(crate) fn log_pdf_unchecked(&self, x: f64) -> f64 {
        match self {
            DensitySpec::NormalLocation { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            DensitySpec::SymmetricNoise(NoiseKind::StdNormal) => {
                -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            DensitySpec::SymmetricNoise(NoiseKind::Laplace { scale }) => {
                -x.abs() / scale - (2.0 * scale).ln()
            }
            other => {
                let p = other.pdf_unchecked(x);
                if p > 0.0 {
                    p.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            DensitySpec::NormalLocation { mu, sigma } => {
                Normal::new(*mu, *sigma).unwrap().sample(rng)
            }
            DensitySpec::SymmetricNoise(NoiseKind::StdNormal) => {
                Normal::new(0.0, 1.0).unwrap().sample(rng)
            }
            DensitySpec::SymmetricNoise(NoiseKind::Laplace { scale }) => {
                // Inverse CDF: sign(u - 1/2) comes for free from the fold.
                let u: f64 = rng.random::<f64>() - 0.5;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            DensitySpec::Histogram { breaks, heights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, w) in breaks.windows(2).enumerate() {
                    let mass = heights[i] * (w[1] - w[0]);
                    if u <= acc + mass || i + 1 == heights.len() {
                        let frac = if mass > 0.0 { (u - acc) / mass } else { 0.0 };
                        return w[0] + frac.clamp(0.0, 1.0) * (w[1] - w[0]);
                    }
                    acc += mass;
                }
                unreachable!("histogram bins exhaust unit mass");
            }
            DensitySpec::SpikedUniform { eps, m } => {
                let spike_mass = (1.0 - eps + eps * m) / m;
                let u: f64 = rng.random();
                if u < spike_mass {
                    (u / spike_mass) / m
                } else {
                    let v = (u - spike_mass) / (1.0 - spike_mass);
                    1.0 / m + v * (1.0 - 1.0 / m)
                }
            }
        }
    }

    pub fn sample_many(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::NormalLocation { mu, sigma } => {
                write!(f, "normal(mu={mu},sigma={sigma})")
            }
            DensitySpec::SpikedUniform { eps, m } => write!(f, "spiked(eps={eps},m={m})"),
            DensitySpec::Histogram { breaks, heights } => {
                let b: Vec<String> = breaks.iter().map(|x| x.to_string()).collect();
                let h: Vec<String> = heights.iter().map(|x| x.to_string()).collect();
                write!(f, "hist(breaks=[{}],heights=[{}])", b.join(","), h.join(","))
            }
            DensitySpec::SymmetricNoise(NoiseKind::StdNormal) => write!(f, "stdnormal"),
            DensitySpec::SymmetricNoise(NoiseKind::Laplace { scale }) => {
                write!(f, "laplace(scale={scale})")
            }
        }
    }
}

/// Observed data; the carrier for every empirical functional.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalSample {
    pub observations: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(observations: Vec<f64>) -> EmpiricalSample {
        EmpiricalSample { observations }
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }
}

fn require_same_measure(f: &DensitySpec, g: &DensitySpec) -> Result<()> {
    if f.measure() == g.measure() {
        Ok(())
    } else {
        Err(Error::MismatchedMeasures)
    }
}

/// Quadrature plan for a pairwise functional: union of effective supports,
/// kinks of both densities forced as breakpoints.
fn pair_plan(f: &DensitySpec, g: &DensitySpec) -> (f64, f64, Vec<f64>) {
    let (fl, fh) = f.effective_support();
    let (gl, gh) = g.effective_support();
    let lo = fl.min(gl);
    let hi = fh.max(gh);
    let mut kinks = f.kink_points();
    kinks.extend(g.kink_points());
    // The supports' own edges are kinks of the joint integrand.
    kinks.extend_from_slice(&[fl, fh, gl, gh]);
    (lo, hi, kinks)
}

fn converged_or_err(r: quad::QuadResult, requested: f64) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::QuadratureNonConvergence {
            achieved: r.abs_error,
            requested,
        })
    }
}

/// `integral of sqrt(f g)` over the shared dominating measure.
///
/// Gaussian pairs use the closed form
/// `sqrt(2 s1 s2 / (s1^2 + s2^2)) * exp(-(m1-m2)^2 / (4 (s1^2 + s2^2)))`;
/// all other pairs go through adaptive quadrature with forced breakpoints.
pub fn affinity(f: &DensitySpec, g: &DensitySpec) -> Result<f64> {
    require_same_measure(f, g)?;
    if let (Some((m1, s1)), Some((m2, s2))) = (f.as_gaussian(), g.as_gaussian()) {
        let v = s1 * s1 + s2 * s2;
        let d = m1 - m2;
        return Ok(((2.0 * s1 * s2 / v).sqrt() * (-d * d / (4.0 * v)).exp()).min(1.0));
    }
    let (lo, hi, kinks) = pair_plan(f, g);
    let r = quad::adaptive(
        |x| (f.pdf_unchecked(x) * g.pdf_unchecked(x)).sqrt(),
        lo,
        hi,
        quad::DEFAULT_ABS_TOL,
        &kinks,
    );
    converged_or_err(r, quad::DEFAULT_ABS_TOL).map(|v| v.clamp(0.0, 1.0))
}

/// Squared Hellinger distance under the convention `H^2 = 2 (1 - Aff)`.
pub fn hellinger_sq(f: &DensitySpec, g: &DensitySpec) -> Result<f64> {
    Ok(2.0 * (1.0 - affinity(f, g)?))
}

/// Mean of `log(f0/f)` under `f0`; `+inf` when `f0`'s support leaks outside
/// `f`'s support (detected at quadrature nodes).
pub fn kl_divergence(f0: &DensitySpec, f: &DensitySpec) -> Result<f64> {
    require_same_measure(f0, f)?;
    let (lo, hi) = f0.effective_support();
    let mut kinks = f0.kink_points();
    kinks.extend(f.kink_points());
    let leak = Cell::new(false);
    let r = quad::adaptive(
        |x| {
            let p0 = f0.pdf_unchecked(x);
            if p0 <= 0.0 {
                return 0.0;
            }
            let p = f.pdf_unchecked(x);
            if p <= 0.0 {
                leak.set(true);
                return 0.0;
            }
            p0 * (p0.ln() - p.ln())
        },
        lo,
        hi,
        quad::DEFAULT_ABS_TOL,
        &kinks,
    );
    if leak.get() {
        return Ok(f64::INFINITY);
    }
    converged_or_err(r, quad::DEFAULT_ABS_TOL).map(|v| v.max(0.0))
}

/// `integral of |f - g|`: exact merged-cell sum for piecewise-constant
/// pairs, adaptive quadrature otherwise.
pub fn l1_distance(f: &DensitySpec, g: &DensitySpec) -> Result<f64> {
    require_same_measure(f, g)?;
    if let (Some((be, bv)), Some((ce, cv))) = (f.as_piecewise(), g.as_piecewise()) {
        let mut edges: Vec<f64> = be.iter().chain(ce.iter()).cloned().collect();
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let value_at = |edges: &[f64], vals: &[f64], x: f64| -> f64 {
            // x is strictly inside [0,1]; pick the cell containing it.
            let idx = edges.partition_point(|e| *e <= x).saturating_sub(1);
            vals[idx.min(vals.len() - 1)]
        };
        let mut total = 0.0;
        for w in edges.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let fv = value_at(&be, &bv, mid);
            let gv = value_at(&ce, &cv, mid);
            total += (fv - gv).abs() * (w[1] - w[0]);
        }
        return Ok(total);
    }
    let (lo, hi, kinks) = pair_plan(f, g);
    let r = quad::adaptive(
        |x| (f.pdf_unchecked(x) - g.pdf_unchecked(x)).abs(),
        lo,
        hi,
        quad::DEFAULT_ABS_TOL,
        &kinks,
    );
    converged_or_err(r, quad::DEFAULT_ABS_TOL).map(|v| v.clamp(0.0, 2.0))
}

/// Empirical mean of `sqrt(f/f0)` over the sample: the plug-in estimate of
/// the affinity-like functional driving the uniform law-of-large-numbers
/// consistency check.
pub fn root_likelihood_ratio_mean(
    f: &DensitySpec,
    f0: &DensitySpec,
    sample: &EmpiricalSample,
) -> Result<f64> {
    require_same_measure(f, f0)?;
    if sample.n() == 0 {
        return Err(Error::InsufficientData(
            "root likelihood ratio mean needs at least one observation".into(),
        ));
    }
    let mut acc = 0.0;
    for &x in &sample.observations {
        let p0 = f0.pdf(x)?;
        if p0 <= 0.0 {
            return Err(Error::ZeroDensityAtObservation { x });
        }
        acc += (f.pdf_unchecked(x) / p0).sqrt();
    }
    Ok(acc / sample.n() as f64)
}

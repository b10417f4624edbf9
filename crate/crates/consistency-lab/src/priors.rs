//! Discretized priors over indexed model families.
//!
//! A prior here is a weighted finite support of [`ThetaPoint`]s. Proper
//! priors keep normalized log weights; improper priors keep raw intensities
//! (for location grids the natural intensity is the grid step, a Riemann
//! proxy for Lebesgue measure). Subsets of the support are addressed by id
//! through [`SubsetSelector`] so that restriction, neighborhood masses and
//! posterior masses all speak the same language.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};

use crate::densities::{kl_divergence, DensitySpec};
use crate::error::{Error, Result};
use crate::logsum::log_sum_exp;

/// An indexed support point: a model density plus an optional scalar
/// coordinate (the location parameter for grids) used by predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    pub id: usize,
    pub density: DensitySpec,
    pub coord: Option<f64>,
}

impl ThetaPoint {
    pub fn new(id: usize, density: DensitySpec) -> ThetaPoint {
        ThetaPoint { id, density, coord: None }
    }

    pub fn with_coord(id: usize, density: DensitySpec, coord: f64) -> ThetaPoint {
        ThetaPoint { id, density, coord: Some(coord) }
    }
}

/// Finite-support prior. Invariants enforced at construction: nonempty
/// support, unique ids, pairwise-distinct densities (the id-to-model map is
/// one-to-one), finite log weights; proper priors are stored normalized.
#[derive(Debug, Clone)]
pub struct DiscretizedPrior {
    points: Vec<ThetaPoint>,
    log_weights: Vec<f64>,
    proper: bool,
}

fn validate_support(points: &[ThetaPoint], log_weights: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidPrior("empty support".into()));
    }
    if points.len() != log_weights.len() {
        return Err(Error::InvalidPrior(format!(
            "{} support points but {} weights",
            points.len(),
            log_weights.len()
        )));
    }
    if log_weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidPrior(
            "log weights must be finite (strictly positive weights)".into(),
        ));
    }
    let mut ids = HashSet::with_capacity(points.len());
    let mut keys = HashSet::with_capacity(points.len());
    for p in points {
        if !ids.insert(p.id) {
            return Err(Error::InvalidPrior(format!("duplicate id {}", p.id)));
        }
        // Canonical serialization keys make the distinctness check O(n).
        let key = serde_json::to_string(&p.density).expect("density serializes");
        if !keys.insert(key) {
            return Err(Error::InvalidPrior(format!(
                "support densities must be pairwise distinct (id {} repeats one)",
                p.id
            )));
        }
    }
    Ok(())
}

impl DiscretizedPrior {
    /// Proper prior; weights are normalized to unit total mass.
    pub fn proper(points: Vec<ThetaPoint>, weights: Vec<f64>) -> Result<DiscretizedPrior> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidPrior(
                "proper prior weights must be finite and strictly positive".into(),
            ));
        }
        let log_weights: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        validate_support(&points, &log_weights)?;
        let total = log_sum_exp(&log_weights);
        let log_weights = log_weights.iter().map(|w| w - total).collect();
        Ok(DiscretizedPrior { points, log_weights, proper: true })
    }

    /// Improper prior; log weights are kept as given (relative intensities).
    pub fn improper(points: Vec<ThetaPoint>, log_weights: Vec<f64>) -> Result<DiscretizedPrior> {
        validate_support(&points, &log_weights)?;
        Ok(DiscretizedPrior { points, log_weights, proper: false })
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ThetaPoint] {
        &self.points
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn position_of_id(&self, id: usize) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    /// Positions (indices into `points`) of a selector, in id order.
    pub fn positions(&self, subset: &SubsetSelector) -> Result<Vec<usize>> {
        let by_id: HashMap<usize, usize> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id, i))
            .collect();
        subset
            .ids
            .iter()
            .map(|id| {
                by_id.get(id).copied().ok_or_else(|| {
                    Error::InvalidSubset(format!("id {id} is not in the prior support"))
                })
            })
            .collect()
    }

    /// Log prior mass of a subset (log of the unnormalized intensity for
    /// improper priors).
    pub fn subset_log_mass(&self, subset: &SubsetSelector) -> Result<f64> {
        let pos = self.positions(subset)?;
        Ok(log_sum_exp(
            &pos.iter().map(|&i| self.log_weights[i]).collect::<Vec<_>>(),
        ))
    }
}

/// Id-addressed subset of a prior support.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubsetSelector {
    ids: BTreeSet<usize>,
}

impl SubsetSelector {
    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> SubsetSelector {
        SubsetSelector { ids: ids.into_iter().collect() }
    }

    pub fn from_predicate(
        prior: &DiscretizedPrior,
        mut pred: impl FnMut(&ThetaPoint) -> bool,
    ) -> SubsetSelector {
        SubsetSelector {
            ids: prior
                .points()
                .iter()
                .filter(|p| pred(p))
                .map(|p| p.id)
                .collect(),
        }
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn complement(&self, prior: &DiscretizedPrior) -> SubsetSelector {
        SubsetSelector {
            ids: prior
                .points()
                .iter()
                .map(|p| p.id)
                .filter(|id| !self.ids.contains(id))
                .collect(),
        }
    }
}

/// Evenly spaced Gaussian location grid, the workhorse support. Ids run from
/// zero in coordinate order; each point carries its location as `coord`.
pub fn gaussian_location_grid(lo: f64, hi: f64, step: f64, sigma: f64) -> Result<Vec<ThetaPoint>> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::InvalidPrior(format!(
            "grid requires hi > lo and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let count = ((hi - lo) / step).round() as usize + 1;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let theta = lo + step * i as f64;
        points.push(ThetaPoint::with_coord(
            i,
            DensitySpec::normal(theta, sigma)?,
            theta,
        ));
    }
    Ok(points)
}

/// Recipe for an improper (or proper) location-grid prior that knows how to
/// extend its own range; the formal-posterior stability probe re-materializes
/// the grid at twice the span and compares normalizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationGridPrior {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub sigma: f64,
}

impl LocationGridPrior {
    pub fn new(lo: f64, hi: f64, step: f64, sigma: f64) -> Result<LocationGridPrior> {
        if !(step > 0.0 && hi > lo && sigma > 0.0) {
            return Err(Error::InvalidPrior(format!(
                "location grid requires hi > lo, step > 0, sigma > 0 (got [{lo},{hi}], {step}, {sigma})"
            )));
        }
        Ok(LocationGridPrior { lo, hi, step, sigma })
    }

    /// Improper materialization: every point carries intensity `step`, the
    /// Riemann weight of flat Lebesgue intensity on the grid.
    pub fn materialize(&self) -> Result<DiscretizedPrior> {
        let points = gaussian_location_grid(self.lo, self.hi, self.step, self.sigma)?;
        let lw = vec![self.step.ln(); points.len()];
        DiscretizedPrior::improper(points, lw)
    }

    /// Same recipe with the range scaled about its center.
    pub fn extended(&self, factor: f64) -> LocationGridPrior {
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo) * factor;
        LocationGridPrior { lo: mid - half, hi: mid + half, step: self.step, sigma: self.sigma }
    }
}

/// Prior mass of the Kullback-Leibler neighborhood
/// `{theta : KL(f0, f_theta) < eps}`. Proper priors only; the mass of an
/// improper prior has no scale.
pub fn kl_neighborhood_mass(
    prior: &DiscretizedPrior,
    f0: &DensitySpec,
    eps: f64,
) -> Result<f64> {
    if !prior.is_proper() {
        return Err(Error::ProperPriorRequired);
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!(
            "KL neighborhood radius must be positive, got {eps}"
        )));
    }
    let mut terms = Vec::new();
    for (p, &lw) in prior.points().iter().zip(prior.log_weights()) {
        if kl_divergence(f0, &p.density)? < eps {
            terms.push(lw);
        }
    }
    Ok(log_sum_exp(&terms).exp())
}

#[derive(Debug, Clone)]
pub struct KlSupportReport {
    /// `(eps, ids in the neighborhood, positive mass?)` per requested radius.
    pub neighborhoods: Vec<(f64, SubsetSelector, bool)>,
    /// True when every requested neighborhood carries positive weight.
    pub satisfied: bool,
}

/// Check that every KL neighborhood of `f0` in the radius list contains at
/// least one support point. Works for proper and improper priors alike:
/// positivity of the (possibly unnormalized) weight is what matters.
pub fn check_kl_support(
    prior: &DiscretizedPrior,
    f0: &DensitySpec,
    eps_list: &[f64],
) -> Result<KlSupportReport> {
    if eps_list.is_empty() {
        return Err(Error::Precondition("need at least one KL radius".into()));
    }
    // One KL pass; each radius then filters the cached divergences.
    let mut kls = Vec::with_capacity(prior.len());
    for p in prior.points() {
        kls.push(kl_divergence(f0, &p.density)?);
    }
    let mut neighborhoods = Vec::with_capacity(eps_list.len());
    let mut satisfied = true;
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!(
                "KL neighborhood radius must be positive, got {eps}"
            )));
        }
        let ids: Vec<usize> = prior
            .points()
            .iter()
            .zip(&kls)
            .filter(|(_, &kl)| kl < eps)
            .map(|(p, _)| p.id)
            .collect();
        let nonempty = !ids.is_empty();
        satisfied &= nonempty;
        neighborhoods.push((eps, SubsetSelector::from_ids(ids), nonempty));
    }
    Ok(KlSupportReport { neighborhoods, satisfied })
}

/// Restrict a prior to a subset and renormalize.
///
/// For improper priors the restriction must be a strict subset of the
/// support: a strict sub-grid stands for a bounded parameter region and is
/// normalizable, while "all of an improper prior" keeps infinite mass.
pub fn restrict_and_normalize(
    prior: &DiscretizedPrior,
    subset: &SubsetSelector,
) -> Result<DiscretizedPrior> {
    if subset.is_empty() {
        return Err(Error::ZeroMassRestriction);
    }
    let pos = prior.positions(subset)?;
    if !prior.is_proper() && pos.len() == prior.len() {
        return Err(Error::InfiniteMassRestriction);
    }
    let points: Vec<ThetaPoint> = pos.iter().map(|&i| prior.points()[i].clone()).collect();
    let weights: Vec<f64> = {
        let lws: Vec<f64> = pos.iter().map(|&i| prior.log_weights()[i]).collect();
        let total = log_sum_exp(&lws);
        lws.iter().map(|w| (w - total).exp()).collect()
    };
    DiscretizedPrior::proper(points, weights)
}

/// `w * delta_{f0} + (1 - w) * prior`. If `f0` already sits in the support
/// its weight absorbs the atom; otherwise `f0` joins with a fresh id.
pub fn mixture_with_atom(
    prior: &DiscretizedPrior,
    f0: &DensitySpec,
    w: f64,
) -> Result<DiscretizedPrior> {
    if !prior.is_proper() {
        return Err(Error::ProperPriorRequired);
    }
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Precondition(format!(
            "atom weight must lie strictly in (0, 1), got {w}"
        )));
    }
    let mut points = prior.points().to_vec();
    let mut weights: Vec<f64> = prior
        .log_weights()
        .iter()
        .map(|lw| (1.0 - w) * lw.exp())
        .collect();
    if let Some(i) = points.iter().position(|p| p.density == *f0) {
        weights[i] += w;
    } else {
        let id = points.iter().map(|p| p.id).max().unwrap() + 1;
        points.push(ThetaPoint::new(id, f0.clone()));
        weights.push(w);
    }
    DiscretizedPrior::proper(points, weights)
}

/// Log marginal density of i.i.d. observations:
/// `log sum_theta w_theta prod_i f_theta(x_i)`.
pub fn marginal_log_density(prior: &DiscretizedPrior, xs: &[f64]) -> Result<f64> {
    if !prior.is_proper() {
        return Err(Error::ProperPriorRequired);
    }
    let mut terms = Vec::with_capacity(prior.len());
    for (p, &lw) in prior.points().iter().zip(prior.log_weights()) {
        let mut ll = lw;
        for &x in xs {
            ll += p.density.log_pdf(x)?;
        }
        terms.push(ll);
    }
    let m = log_sum_exp(&terms);
    if m == f64::NEG_INFINITY {
        return Err(Error::AllZeroLikelihood);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_prior() -> DiscretizedPrior {
        // 21 locations -1.0, -0.9, ..., 1.0 with equal weights.
        let pts = gaussian_location_grid(-1.0, 1.0, 0.1, 1.0).unwrap();
        let n = pts.len();
        DiscretizedPrior::proper(pts, vec![1.0; n]).unwrap()
    }

    #[test]
    fn kl_neighborhood_mass_on_uniform_grid() {
        let prior = grid_prior();
        assert_eq!(prior.len(), 21);
        let f0 = DensitySpec::normal(0.0, 1.0).unwrap();
        // KL(f0, N(theta,1)) = theta^2/2; radius 0.001 captures only theta=0.
        let mass = kl_neighborhood_mass(&prior, &f0, 0.001).unwrap();
        assert!((mass - 1.0 / 21.0).abs() < 1e-12);
        // A huge radius captures everything.
        let all = kl_neighborhood_mass(&prior, &f0, 10.0).unwrap();
        assert!((all - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kl_support_check_reports_per_radius() {
        let prior = grid_prior();
        let f0 = DensitySpec::normal(0.0, 1.0).unwrap();
        let report = check_kl_support(&prior, &f0, &[0.001, 0.02]).unwrap();
        assert!(report.satisfied);
        assert_eq!(report.neighborhoods[0].1.len(), 1);
        // radius 0.02: theta^2/2 < 0.02 means |theta| < 0.2, i.e. 3 points.
        assert_eq!(report.neighborhoods[1].1.len(), 3);

        // A far-away truth has empty small neighborhoods.
        let far = DensitySpec::normal(50.0, 1.0).unwrap();
        let report = check_kl_support(&prior, &far, &[0.5]).unwrap();
        assert!(!report.satisfied);
    }

    #[test]
    fn restriction_renormalizes_power_law_tail() {
        let pts = gaussian_location_grid(0.0, 0.9, 0.1, 1.0).unwrap();
        let weights: Vec<f64> = (1..=10).map(|i| (i as f64).powi(-4)).collect();
        let prior = DiscretizedPrior::proper(pts, weights.clone()).unwrap();
        let tail = SubsetSelector::from_ids(5..10);
        let restricted = restrict_and_normalize(&prior, &tail).unwrap();
        assert_eq!(restricted.len(), 5);
        let tail_total: f64 = (6..=10).map(|i| (i as f64).powi(-4)).sum();
        let expect_first = (6.0_f64).powi(-4) / tail_total;
        let got_first = restricted.log_weights()[0].exp();
        assert!((got_first - expect_first).abs() < 1e-12);
    }

    #[test]
    fn restriction_error_paths() {
        let prior = grid_prior();
        assert!(matches!(
            restrict_and_normalize(&prior, &SubsetSelector::default()),
            Err(Error::ZeroMassRestriction)
        ));
        assert!(matches!(
            restrict_and_normalize(&prior, &SubsetSelector::from_ids([999])),
            Err(Error::InvalidSubset(_))
        ));

        let improper = LocationGridPrior::new(-1.0, 1.0, 0.5, 1.0)
            .unwrap()
            .materialize()
            .unwrap();
        let all = SubsetSelector::from_ids(improper.points().iter().map(|p| p.id));
        assert!(matches!(
            restrict_and_normalize(&improper, &all),
            Err(Error::InfiniteMassRestriction)
        ));
        // A strict sub-grid is a bounded region: restriction is proper.
        let half = SubsetSelector::from_ids([0, 1]);
        let r = restrict_and_normalize(&improper, &half).unwrap();
        assert!(r.is_proper());
        assert!((r.log_weights()[0].exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn atom_mixture_with_fresh_and_existing_atoms() {
        let prior = grid_prior();
        let outside = DensitySpec::normal(5.0, 1.0).unwrap();
        let mixed = mixture_with_atom(&prior, &outside, 0.5).unwrap();
        assert_eq!(mixed.len(), 22);
        let atom_pos = mixed.position_of_id(21).unwrap();
        assert!((mixed.log_weights()[atom_pos].exp() - 0.5).abs() < 1e-12);

        let existing = DensitySpec::normal(0.0, 1.0).unwrap();
        let merged = mixture_with_atom(&prior, &existing, 0.5).unwrap();
        assert_eq!(merged.len(), 21);
        let pos = merged
            .points()
            .iter()
            .position(|p| p.density == existing)
            .unwrap();
        let expect = 0.5 + 0.5 / 21.0;
        assert!((merged.log_weights()[pos].exp() - expect).abs() < 1e-12);
    }

    #[test]
    fn atom_weight_bounds_are_strict() {
        let prior = grid_prior();
        let f0 = DensitySpec::normal(0.0, 1.0).unwrap();
        assert!(mixture_with_atom(&prior, &f0, 0.0).is_err());
        assert!(mixture_with_atom(&prior, &f0, 1.0).is_err());
    }

    #[test]
    fn marginal_matches_direct_space_computation() {
        let f0 = DensitySpec::normal(0.0, 1.0).unwrap();
        let f1 = DensitySpec::normal(1.0, 1.0).unwrap();
        let prior = DiscretizedPrior::proper(
            vec![ThetaPoint::new(0, f0.clone()), ThetaPoint::new(1, f1.clone())],
            vec![0.3, 0.7],
        )
        .unwrap();
        let xs = [0.2, -0.4, 1.1];
        let direct = 0.3
            * xs.iter()
                .map(|&x| f0.pdf(x).unwrap())
                .product::<f64>()
            + 0.7
                * xs.iter()
                    .map(|&x| f1.pdf(x).unwrap())
                    .product::<f64>();
        let got = marginal_log_density(&prior, &xs).unwrap();
        assert!((got - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn marginal_detects_all_zero_likelihood() {
        let g = DensitySpec::histogram(vec![0.0, 0.5], vec![2.0]).unwrap();
        let h = DensitySpec::histogram(vec![0.0, 0.25], vec![4.0]).unwrap();
        let prior = DiscretizedPrior::proper(
            vec![ThetaPoint::new(0, g), ThetaPoint::new(1, h)],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(
            marginal_log_density(&prior, &[0.9]),
            Err(Error::AllZeroLikelihood)
        ));
    }

    #[test]
    fn construction_rejects_duplicates() {
        let f0 = DensitySpec::normal(0.0, 1.0).unwrap();
        let f1 = DensitySpec::normal(1.0, 1.0).unwrap();
        let dup_id = DiscretizedPrior::proper(
            vec![ThetaPoint::new(0, f0.clone()), ThetaPoint::new(0, f1.clone())],
            vec![0.5, 0.5],
        );
        assert!(matches!(dup_id, Err(Error::InvalidPrior(_))));
        let dup_density = DiscretizedPrior::proper(
            vec![ThetaPoint::new(0, f0.clone()), ThetaPoint::new(1, f0.clone())],
            vec![0.5, 0.5],
        );
        assert!(matches!(dup_density, Err(Error::InvalidPrior(_))));
    }

    #[test]
    fn location_grid_recipe_extends_about_center() {
        let g = LocationGridPrior::new(-20.0, 20.0, 0.02, 1.0).unwrap();
        let wide = g.extended(2.0);
        assert_eq!(wide.lo, -40.0);
        assert_eq!(wide.hi, 40.0);
        assert_eq!(wide.step, 0.02);
        let prior = g.materialize().unwrap();
        assert_eq!(prior.len(), 2001);
        assert!(!prior.is_proper());
        // theta0 = 0 sits exactly on the grid.
        assert!(prior
            .points()
            .iter()
            .any(|p| p.coord == Some(0.0)));
    }

    #[test]
    fn subset_selector_round_trips() {
        let prior = grid_prior();
        let ids = SubsetSelector::from_predicate(&prior, |p| {
            p.coord.map(|t| t.abs() >= 0.95).unwrap_or(false)
        });
        assert_eq!(ids.len(), 2);
        let comp = ids.complement(&prior);
        assert_eq!(comp.len(), 19);
        let mass = prior.subset_log_mass(&ids).unwrap().exp();
        assert!((mass - 2.0 / 21.0).abs() < 1e-12);
    }
}

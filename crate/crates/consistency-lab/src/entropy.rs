//! L1 covers, sieves, and entropy numbers for finite density families.
//!
//! Three covering notions drive the posterior-decay machinery:
//!
//! * **Covers** ([`CoverSieve`], [`build_cover`]): partitions of the support
//!   into blocks of L1 diameter below `delta`, feeding the square-root
//!   prior-mass summability condition ([`walker_condition_check`]).
//! * **Sieves** ([`w_to_ggr_sieve`]): from a cover with masses sorted
//!   descending, keep the first `k_n = ceil(exp(n beta))` blocks; the
//!   complement mass obeys the analytic bound `2 c^2 / k_n` with
//!   `c = sum_i sqrt(mass_i)`, and the kept union has metric entropy at
//!   most `log k_n`.
//! * **Entropy numbers** ([`metric_entropy`], [`bracketing_entropy`]):
//!   minimal L1 net sizes and minimal counts of integrable upper envelopes
//!   with mass below `1 + delta`. Normalizing an envelope system yields a
//!   `2 delta` net ([`bsw_to_ggr_net`]), so the metric entropy at `2 delta`
//!   never exceeds the bracketing entropy at `delta`.
//!
//! Greedy algorithms provide upper bounds in general; families of at most
//! twenty points are solved exactly by memoized set-cover search, which the
//! tests use as the oracle for the greedy routines.

use std::collections::HashMap;

use crate::densities::{l1_distance, DensitySpec};
use crate::error::{Error, Result};
use crate::priors::{DiscretizedPrior, SubsetSelector, ThetaPoint};

/// Exact search threshold: set-cover minimization is exponential, so exact
/// minima are only computed for families of at most this many points.
pub const EXACT_LIMIT: usize = 20;

/// Max pairwise L1 distance over the selected points (0 for empty or
/// singleton selections).
pub fn l1_diameter(points: &[ThetaPoint], subset: &SubsetSelector) -> Result<f64> {
    let sel: Vec<&ThetaPoint> = points.iter().filter(|p| subset.contains(p.id)).collect();
    if sel.len() != subset.len() {
        return Err(Error::InvalidSubset(
            "subset references ids missing from the support".into(),
        ));
    }
    let mut diam = 0.0_f64;
    for (i, a) in sel.iter().enumerate() {
        for b in &sel[i + 1..] {
            diam = diam.max(l1_distance(&a.density, &b.density)?);
        }
    }
    Ok(diam)
}

/// A partition of the support into blocks of L1 diameter below `delta`,
/// with the prior mass of each block.
#[derive(Debug, Clone)]
pub struct CoverSieve {
    pub blocks: Vec<SubsetSelector>,
    pub diameters: Vec<f64>,
    pub masses: Vec<f64>,
    pub delta: f64,
}

impl CoverSieve {
    /// Validates the partition property and the diameter bound, and records
    /// block masses from the prior.
    pub fn new(
        prior: &DiscretizedPrior,
        blocks: Vec<SubsetSelector>,
        delta: f64,
    ) -> Result<CoverSieve> {
        if !(delta > 0.0) {
            return Err(Error::InvalidCover(format!(
                "delta must be positive, got {delta}"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidCover("empty block".into()));
            }
            for id in b.ids() {
                if !seen.insert(id) {
                    return Err(Error::InvalidCover(format!(
                        "blocks overlap at support id {id}"
                    )));
                }
            }
        }
        if seen.len() != prior.points().len() {
            return Err(Error::InvalidCover(format!(
                "blocks cover {} of {} support points",
                seen.len(),
                prior.points().len()
            )));
        }
        let mut diameters = Vec::with_capacity(blocks.len());
        let mut masses = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let d = l1_diameter(prior.points(), b)?;
            if d >= delta {
                return Err(Error::InvalidCover(format!(
                    "block diameter {d} is not below delta = {delta}"
                )));
            }
            diameters.push(d);
            masses.push(prior.subset_log_mass(b)?.exp());
        }
        Ok(CoverSieve { blocks, diameters, masses, delta })
    }

    /// Reorders blocks by nonincreasing mass (stable, so ties keep the
    /// construction order), as the sieve selection requires.
    pub fn sorted_by_mass(mut self) -> CoverSieve {
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by(|&a, &b| {
            self.masses[b]
                .partial_cmp(&self.masses[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        self.blocks = order.iter().map(|&i| self.blocks[i].clone()).collect();
        self.diameters = order.iter().map(|&i| self.diameters[i]).collect();
        self.masses = order.iter().map(|&i| self.masses[i]).collect();
        self
    }
}

/// Greedy farthest-point partition of the whole support into blocks of L1
/// diameter strictly below `delta`.
///
/// Centers start at the lowest id and repeatedly add the point farthest
/// from the current centers (ties broken by lowest id) until every point is
/// within `delta / 2` of a center; points are then assigned to their
/// nearest center (ties to the earliest center). Deterministic given the
/// support order. A support whose global diameter is already below `delta`
/// yields a single block.
pub fn build_cover(prior: &DiscretizedPrior, delta: f64) -> Result<CoverSieve> {
    if !(delta > 0.0) {
        return Err(Error::InvalidCover(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let points = prior.points();
    let k = points.len();
    let mut dist = vec![vec![0.0_f64; k]; k];
    let mut global = 0.0_f64;
    for i in 0..k {
        for j in (i + 1)..k {
            let d = l1_distance(&points[i].density, &points[j].density)?;
            dist[i][j] = d;
            dist[j][i] = d;
            global = global.max(d);
        }
    }
    if global < delta {
        let all = SubsetSelector::from_ids(points.iter().map(|p| p.id));
        return CoverSieve::new(prior, vec![all], delta);
    }
    // Farthest-point traversal over point indices.
    let mut centers = vec![0_usize];
    let mut nearest: Vec<f64> = dist[0].clone();
    nearest[0] = 0.0;
    loop {
        let (far, r) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bd), (i, &d)| {
                if d > bd {
                    (i, d)
                } else {
                    (bi, bd)
                }
            });
        if r < delta / 2.0 {
            break;
        }
        centers.push(far);
        for i in 0..k {
            nearest[i] = nearest[i].min(dist[far][i]);
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for i in 0..k {
        let mut best = 0;
        for (c, &ci) in centers.iter().enumerate() {
            if dist[ci][i] < dist[centers[best]][i] {
                best = c;
            }
        }
        members[best].push(i);
    }
    let blocks: Vec<SubsetSelector> = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| SubsetSelector::from_ids(m.into_iter().map(|i| points[i].id)))
        .collect();
    CoverSieve::new(prior, blocks, delta)
}

/// Square-root mass summability over the cover's blocks. Finite covers
/// always produce a finite sum; the analytic check for parameterized
/// infinite families lives in [`power_law_walker_condition`].
#[derive(Debug, Clone, Copy)]
pub struct WalkerConditionReport {
    pub sqrt_mass_sum: f64,
    pub satisfied: bool,
}

pub fn walker_condition_check(cover: &CoverSieve) -> WalkerConditionReport {
    let sum: f64 = cover.masses.iter().map(|m| m.sqrt()).sum();
    WalkerConditionReport {
        sqrt_mass_sum: sum,
        satisfied: sum.is_finite(),
    }
}

/// Analytic square-root summability for the infinite family of block masses
/// proportional to `i^{-p}`: `sum_i i^{-p/2}` converges iff `p > 2`. The
/// report carries the truncated partial sum and, when convergent, the
/// integral tail bound `truncation^{1 - p/2} / (p/2 - 1)`.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawWalkerReport {
    pub exponent: f64,
    pub partial_sum: f64,
    pub tail_bound: Option<f64>,
    pub satisfied: bool,
}

pub fn power_law_walker_condition(p: f64, truncation: usize) -> PowerLawWalkerReport {
    let partial: f64 = (1..=truncation).map(|i| (i as f64).powf(-p / 2.0)).sum();
    let satisfied = p > 2.0;
    let tail_bound = if satisfied {
        Some((truncation as f64).powf(1.0 - p / 2.0) / (p / 2.0 - 1.0))
    } else {
        None
    };
    PowerLawWalkerReport {
        exponent: p,
        partial_sum: partial,
        tail_bound,
        satisfied,
    }
}

/// One stage of the sieve built from a mass-sorted cover: the union of the
/// first `k_n = ceil(exp(n beta))` blocks.
#[derive(Debug, Clone)]
pub struct SieveStage {
    pub n: usize,
    /// The formula value `ceil(exp(n beta))` as a real (it can exceed any
    /// integer range for large `n beta`).
    pub k_n: f64,
    /// Number of blocks actually kept: `min(k_n, block count)`.
    pub blocks_kept: usize,
    pub theta_n: SubsetSelector,
    /// Analytic bound `2 c^2 / k_n` on the complement mass.
    pub mass_bound: f64,
    /// `log(blocks kept)`: one net center per block covers the union at the
    /// cover's diameter level.
    pub entropy_bound: f64,
    pub complement_mass: f64,
}

/// Select the sieve stage at sample size `n` and rate `beta` from a cover
/// whose masses are sorted nonincreasing; the complement mass is checked
/// against the analytic bound `2 c^2 / k_n`.
pub fn w_to_ggr_sieve(cover: &CoverSieve, beta: f64, n: usize) -> Result<SieveStage> {
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!(
            "beta must be positive, got {beta}"
        )));
    }
    for (i, w) in cover.masses.windows(2).enumerate() {
        if w[1] > w[0] {
            return Err(Error::UnsortedMasses { index: i + 1 });
        }
    }
    let c: f64 = cover.masses.iter().map(|m| m.sqrt()).sum();
    let k_n = (n as f64 * beta).exp().ceil();
    let kept = (k_n as usize).min(cover.blocks.len()).max(1);
    let kept = if k_n >= cover.blocks.len() as f64 {
        cover.blocks.len()
    } else {
        kept
    };
    let mut ids = Vec::new();
    for b in &cover.blocks[..kept] {
        ids.extend(b.ids());
    }
    let complement_mass: f64 = cover.masses[kept..].iter().sum::<f64>().max(0.0);
    let mass_bound = 2.0 * c * c / k_n;
    assert!(
        complement_mass <= mass_bound + 1e-12,
        "complement mass {complement_mass} exceeds analytic bound {mass_bound}"
    );
    Ok(SieveStage {
        n,
        k_n,
        blocks_kept: kept,
        theta_n: SubsetSelector::from_ids(ids),
        mass_bound,
        entropy_bound: (kept as f64).ln(),
        complement_mass,
    })
}

/// A piecewise-constant upper envelope on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub breaks: Vec<f64>,
    pub heights: Vec<f64>,
}

impl Envelope {
    pub fn integral(&self) -> f64 {
        self.breaks
            .windows(2)
            .zip(&self.heights)
            .map(|(w, h)| (w[1] - w[0]) * h)
            .sum()
    }
}

/// A bracketing system at level `delta`: integrable upper envelopes with
/// mass strictly below `1 + delta`, and an assignment of every family
/// member to an envelope that dominates it pointwise.
#[derive(Debug, Clone)]
pub struct BracketSet {
    pub envelopes: Vec<Envelope>,
    /// `assignment[i]` is the envelope index for `family[i]`.
    pub assignment: Vec<usize>,
    pub delta: f64,
}

/// Common refinement grid for a piecewise family: merged breakpoints and
/// per-density heights on each cell.
struct PiecewiseFamily {
    breaks: Vec<f64>,
    widths: Vec<f64>,
    /// heights[i][cell]
    heights: Vec<Vec<f64>>,
}

impl PiecewiseFamily {
    fn new(family: &[DensitySpec]) -> Result<PiecewiseFamily> {
        let mut breaks: Vec<f64> = vec![0.0, 1.0];
        let mut pieces = Vec::with_capacity(family.len());
        for f in family {
            let pw = f.as_piecewise().ok_or_else(|| {
                Error::InvalidBracket(
                    "bracketing requires piecewise-constant families on [0, 1]".into(),
                )
            })?;
            breaks.extend_from_slice(&pw.0);
            pieces.push(pw);
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let widths: Vec<f64> = breaks.windows(2).map(|w| w[1] - w[0]).collect();
        let mut heights = Vec::with_capacity(pieces.len());
        for (pb, ph) in &pieces {
            let mut row = Vec::with_capacity(widths.len());
            for w in breaks.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let mut h = 0.0;
                for (cell, hh) in pb.windows(2).zip(ph) {
                    if cell[0] <= mid && mid < cell[1] {
                        h = *hh;
                        break;
                    }
                }
                row.push(h);
            }
            heights.push(row);
        }
        Ok(PiecewiseFamily { breaks, widths, heights })
    }

    fn envelope_integral(&self, group: &[usize]) -> f64 {
        self.widths
            .iter()
            .enumerate()
            .map(|(c, w)| {
                w * group
                    .iter()
                    .map(|&i| self.heights[i][c])
                    .fold(0.0_f64, f64::max)
            })
            .sum()
    }

    fn envelope(&self, group: &[usize]) -> Envelope {
        let heights: Vec<f64> = (0..self.widths.len())
            .map(|c| {
                group
                    .iter()
                    .map(|&i| self.heights[i][c])
                    .fold(0.0_f64, f64::max)
            })
            .collect();
        Envelope {
            breaks: self.breaks.clone(),
            heights,
        }
    }
}

impl BracketSet {
    /// Validates envelope masses (strictly below `1 + delta`) and pointwise
    /// domination of every assigned member on the breakpoint-refined grid.
    pub fn new(
        envelopes: Vec<Envelope>,
        assignment: Vec<usize>,
        family: &[DensitySpec],
        delta: f64,
    ) -> Result<BracketSet> {
        if !(delta > 0.0) {
            return Err(Error::InvalidBracket(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if assignment.len() != family.len() {
            return Err(Error::InvalidBracket(format!(
                "{} assignments for {} family members",
                assignment.len(),
                family.len()
            )));
        }
        for (i, e) in envelopes.iter().enumerate() {
            if e.heights.iter().any(|h| *h < 0.0) {
                return Err(Error::InvalidBracket(format!(
                    "envelope {i} has a negative height"
                )));
            }
            let mass = e.integral();
            if !(mass < 1.0 + delta) {
                return Err(Error::InvalidBracket(format!(
                    "envelope {i} has mass {mass}, not below 1 + delta = {}",
                    1.0 + delta
                )));
            }
        }
        let fam = PiecewiseFamily::new(family)?;
        for (i, &e_idx) in assignment.iter().enumerate() {
            let e = envelopes.get(e_idx).ok_or_else(|| {
                Error::InvalidBracket(format!("assignment {i} references envelope {e_idx}"))
            })?;
            // Compare on the refinement of the member's grid and the
            // envelope's grid.
            for (c, w) in fam.breaks.windows(2).enumerate() {
                let mid = 0.5 * (w[0] + w[1]);
                let fh = fam.heights[i][c];
                let mut eh = 0.0;
                for (cell, hh) in e.breaks.windows(2).zip(&e.heights) {
                    if cell[0] <= mid && mid < cell[1] {
                        eh = *hh;
                        break;
                    }
                }
                if fh > eh + 1e-9 {
                    return Err(Error::InvalidBracket(format!(
                        "family member {i} exceeds envelope {e_idx} near x = {mid}"
                    )));
                }
            }
        }
        Ok(BracketSet { envelopes, assignment, delta })
    }
}

/// Enumerate feasible groups containing `anchor` within `allowed`, calling
/// `visit` for each; feasibility (envelope mass below the limit) is
/// monotone, so extension stops as soon as a group becomes infeasible.
fn enumerate_feasible_groups(
    fam: &PiecewiseFamily,
    anchor: usize,
    allowed: u32,
    limit: f64,
    visit: &mut impl FnMut(u32),
) {
    fn extend(
        fam: &PiecewiseFamily,
        group: &mut Vec<usize>,
        mask: u32,
        from: usize,
        allowed: u32,
        limit: f64,
        visit: &mut impl FnMut(u32),
    ) {
        visit(mask);
        let k = fam.heights.len();
        for next in from..k {
            if allowed & (1 << next) == 0 {
                continue;
            }
            group.push(next);
            if fam.envelope_integral(group) < limit {
                extend(fam, group, mask | (1 << next), next + 1, allowed, limit, visit);
            }
            group.pop();
        }
    }
    let mut group = vec![anchor];
    if fam.envelope_integral(&group) < limit {
        extend(fam, &mut group, 1 << anchor, 0, allowed & !(1 << anchor), limit, visit);
    }
}

/// Exact minimal feasible-group cover by memoized search over uncovered
/// bitmasks. Caller guarantees at most [`EXACT_LIMIT`] points.
fn exact_bracket_cover(fam: &PiecewiseFamily, limit: f64) -> Option<Vec<Vec<usize>>> {
    let k = fam.heights.len();
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    // Singletons must be feasible or no cover exists.
    for i in 0..k {
        if fam.envelope_integral(&[i]) >= limit {
            return None;
        }
    }
    fn solve(
        fam: &PiecewiseFamily,
        mask: u32,
        limit: f64,
        memo: &mut HashMap<u32, Option<(u32, usize)>>,
    ) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(Some((_, best))) = memo.get(&mask) {
            return *best;
        }
        let anchor = mask.trailing_zeros() as usize;
        let mut best = usize::MAX;
        let mut best_group = 0_u32;
        let mut groups: Vec<u32> = Vec::new();
        enumerate_feasible_groups(fam, anchor, mask, limit, &mut |g| groups.push(g));
        // Try larger groups first: they reach the optimum sooner.
        groups.sort_by_key(|g| std::cmp::Reverse(g.count_ones()));
        for g in groups {
            let sub = solve(fam, mask & !g, limit, memo);
            if sub + 1 < best {
                best = sub + 1;
                best_group = g;
            }
        }
        memo.insert(mask, Some((best_group, best)));
        best
    }
    let mut memo: HashMap<u32, Option<(u32, usize)>> = HashMap::new();
    let best = solve(fam, full, limit, &mut memo);
    if best == usize::MAX {
        return None;
    }
    // Reconstruct groups from the memo chain.
    let mut groups = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let (g, _) = memo[&mask].unwrap();
        groups.push((0..k).filter(|i| g & (1 << i) != 0).collect::<Vec<_>>());
        mask &= !g;
    }
    Some(groups)
}

/// First-fit greedy feasible-group cover in support order.
fn greedy_bracket_cover(fam: &PiecewiseFamily, limit: f64) -> Option<Vec<Vec<usize>>> {
    let k = fam.heights.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        if fam.envelope_integral(&[i]) >= limit {
            return None;
        }
        let mut placed = false;
        for g in groups.iter_mut() {
            g.push(i);
            if fam.envelope_integral(g) < limit {
                placed = true;
                break;
            }
            g.pop();
        }
        if !placed {
            groups.push(vec![i]);
        }
    }
    Some(groups)
}

/// Bracketing entropy of a piecewise family at level `delta`: the log of
/// the minimal number of upper envelopes of mass strictly below `1 + delta`
/// covering the family. Exact (memoized set-cover) up to [`EXACT_LIMIT`]
/// points, greedy first-fit beyond; either way the returned [`BracketSet`]
/// certifies the count as an upper bound on the minimum.
pub fn bracketing_entropy(family: &[DensitySpec], delta: f64) -> Result<(f64, BracketSet)> {
    if family.is_empty() {
        return Err(Error::Precondition("empty family".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let fam = PiecewiseFamily::new(family)?;
    let limit = 1.0 + delta;
    let groups = if family.len() <= EXACT_LIMIT {
        exact_bracket_cover(&fam, limit)
    } else {
        greedy_bracket_cover(&fam, limit)
    }
    .ok_or_else(|| {
        Error::InvalidBracket(
            "a family member's own mass already reaches 1 + delta".into(),
        )
    })?;
    let mut assignment = vec![usize::MAX; family.len()];
    let envelopes: Vec<Envelope> = groups
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            for &i in g {
                assignment[i] = gi;
            }
            fam.envelope(g)
        })
        .collect();
    let count = envelopes.len();
    let brackets = BracketSet::new(envelopes, assignment, family, delta)?;
    Ok(((count as f64).ln(), brackets))
}

/// Exact minimal set cover over explicit candidate coverage sets (memoized
/// over uncovered bitmasks); returns indices of chosen candidates.
fn exact_set_cover(universe: usize, candidates: &[u32]) -> Option<Vec<usize>> {
    let full: u32 = if universe == 32 {
        u32::MAX
    } else {
        (1 << universe) - 1
    };
    let covered = candidates.iter().fold(0_u32, |acc, c| acc | c);
    if covered & full != full {
        return None;
    }
    fn solve(
        mask: u32,
        candidates: &[u32],
        memo: &mut HashMap<u32, (usize, usize)>,
    ) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(&(_, best)) = memo.get(&mask) {
            return best;
        }
        let anchor = mask.trailing_zeros();
        let mut best = usize::MAX - 1;
        let mut best_c = usize::MAX;
        for (ci, &c) in candidates.iter().enumerate() {
            if c & (1 << anchor) == 0 {
                continue;
            }
            let sub = solve(mask & !c, candidates, memo);
            if sub + 1 < best {
                best = sub + 1;
                best_c = ci;
            }
        }
        memo.insert(mask, (best_c, best));
        best
    }
    let mut memo = HashMap::new();
    solve(full, candidates, &mut memo);
    let mut chosen = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let (ci, _) = memo[&mask];
        chosen.push(ci);
        mask &= !candidates[ci];
    }
    Some(chosen)
}

/// Metric entropy of the family at level `delta`: log of the minimal
/// number of centers such that every member is within L1 distance strictly
/// below `delta` of some center. Centers are drawn from the family itself
/// plus any `extra_candidates`. Exact set cover up to [`EXACT_LIMIT`]
/// points, deterministic greedy beyond.
pub fn metric_entropy_with_candidates(
    family: &[DensitySpec],
    delta: f64,
    extra_candidates: &[DensitySpec],
) -> Result<(f64, Vec<DensitySpec>)> {
    if family.is_empty() {
        return Err(Error::Precondition("empty family".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let candidates: Vec<&DensitySpec> = family.iter().chain(extra_candidates).collect();
    let net: Vec<DensitySpec> = if family.len() <= EXACT_LIMIT {
        let mut coverage = Vec::with_capacity(candidates.len());
        for c in &candidates {
            let mut mask = 0_u32;
            for (j, f) in family.iter().enumerate() {
                if l1_distance(c, f)? < delta {
                    mask |= 1 << j;
                }
            }
            coverage.push(mask);
        }
        let chosen = exact_set_cover(family.len(), &coverage).ok_or_else(|| {
            Error::Precondition(
                "no candidate center covers some family member at this delta".into(),
            )
        })?;
        chosen.iter().map(|&c| candidates[c].clone()).collect()
    } else {
        // Greedy: walk members in order; any member not yet covered becomes
        // a center.
        let mut centers: Vec<DensitySpec> = Vec::new();
        'member: for f in family {
            for c in &centers {
                if l1_distance(c, f)? < delta {
                    continue 'member;
                }
            }
            centers.push(f.clone());
        }
        centers
    };
    // Net soundness: every member within delta of some center.
    for f in family {
        let mut ok = false;
        for c in &net {
            if l1_distance(c, f)? < delta {
                ok = true;
                break;
            }
        }
        assert!(ok, "net misses a family member at delta = {delta}");
    }
    Ok(((net.len() as f64).ln(), net))
}

/// Metric entropy with centers drawn from the family itself.
pub fn metric_entropy(family: &[DensitySpec], delta: f64) -> Result<(f64, Vec<DensitySpec>)> {
    metric_entropy_with_candidates(family, delta, &[])
}

/// Normalize a bracketing system's envelopes into densities; each assigned
/// member is then within `2 delta` of its normalized envelope, so the
/// returned net certifies `metric entropy at 2 delta <= bracketing entropy
/// at delta`.
pub fn bsw_to_ggr_net(brackets: &BracketSet, family: &[DensitySpec]) -> Result<Vec<DensitySpec>> {
    let mut net = Vec::with_capacity(brackets.envelopes.len());
    for e in &brackets.envelopes {
        let mass = e.integral();
        if !(mass > 0.0) {
            return Err(Error::InvalidBracket("envelope has zero mass".into()));
        }
        // Drop zero-height leading/trailing cells: histogram densities need
        // strictly positive total mass but tolerate interior zeros.
        let heights: Vec<f64> = e.heights.iter().map(|h| h / mass).collect();
        net.push(DensitySpec::histogram(e.breaks.clone(), heights)?);
    }
    for (i, f) in family.iter().enumerate() {
        let center = &net[brackets.assignment[i]];
        let d = l1_distance(f, center)?;
        if d > 2.0 * brackets.delta + 1e-9 {
            return Err(Error::InvalidBracket(format!(
                "member {i} sits at L1 distance {d} from its normalized envelope, above 2 delta = {}",
                2.0 * brackets.delta
            )));
        }
    }
    Ok(net)
}

/// Per-stage outcome of the combined mass/entropy condition.
#[derive(Debug, Clone)]
pub struct GgrCheckRow {
    pub n: usize,
    pub complement_mass: f64,
    pub mass_ok: bool,
    pub entropy: f64,
    pub entropy_ok: bool,
}

/// Evaluate, for each sieve stage, the complement-mass condition
/// `Pi(Theta_n^c) < c1 exp(-n beta)` and the entropy condition
/// `J(Theta_n, delta) <= n beta`. Requires `beta < eps^2 / 2`, the rate
/// regime in which these two conditions yield exponential decay for
/// `eps`-separated alternatives.
pub fn ggr_condition_check(
    prior: &DiscretizedPrior,
    stages: &[SieveStage],
    delta: f64,
    beta: f64,
    eps: f64,
    c1: f64,
) -> Result<Vec<GgrCheckRow>> {
    if !(beta < eps * eps / 2.0) {
        return Err(Error::Precondition(format!(
            "beta = {beta} must be below eps^2/2 = {}",
            eps * eps / 2.0
        )));
    }
    let mut rows = Vec::with_capacity(stages.len());
    for stage in stages {
        let members: Vec<DensitySpec> = prior
            .points()
            .iter()
            .filter(|p| stage.theta_n.contains(p.id))
            .map(|p| p.density.clone())
            .collect();
        let (entropy, _) = metric_entropy(&members, delta)?;
        rows.push(GgrCheckRow {
            n: stage.n,
            complement_mass: stage.complement_mass,
            mass_ok: stage.complement_mass < c1 * (-(stage.n as f64) * beta).exp(),
            entropy,
            entropy_ok: entropy <= stage.n as f64 * beta + 1e-12,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::gaussian_location_grid;
    use rand::Rng;

    fn grid_prior(lo: f64, hi: f64, step: f64) -> DiscretizedPrior {
        let pts = gaussian_location_grid(lo, hi, step, 1.0).unwrap();
        let n = pts.len();
        DiscretizedPrior::proper(pts, vec![1.0; n]).unwrap()
    }

    #[test]
    fn diameter_singleton_and_pair() {
        let prior = grid_prior(0.0, 0.1, 0.1);
        let single = SubsetSelector::from_ids([0]);
        assert_eq!(l1_diameter(prior.points(), &single).unwrap(), 0.0);
        let pair = SubsetSelector::from_ids([0, 1]);
        let d = l1_diameter(prior.points(), &pair).unwrap();
        let oracle = l1_distance(
            &prior.points()[0].density,
            &prior.points()[1].density,
        )
        .unwrap();
        assert!((d - oracle).abs() < 1e-12);
        assert!(d > 0.0);
    }

    #[test]
    fn diameter_monotone_under_inclusion() {
        let prior = grid_prior(-1.0, 1.0, 0.25);
        let small = SubsetSelector::from_ids([0, 3, 5]);
        let big = SubsetSelector::from_ids([0, 3, 5, 8]);
        assert!(
            l1_diameter(prior.points(), &small).unwrap()
                <= l1_diameter(prior.points(), &big).unwrap()
        );
    }

    #[test]
    fn cover_single_block_when_delta_exceeds_diameter() {
        let prior = grid_prior(-0.2, 0.2, 0.1);
        let global = l1_diameter(
            prior.points(),
            &SubsetSelector::from_ids(prior.points().iter().map(|p| p.id)),
        )
        .unwrap();
        let cover = build_cover(&prior, global + 0.1).unwrap();
        assert_eq!(cover.blocks.len(), 1);
        assert_eq!(cover.blocks[0].len(), prior.points().len());
    }

    #[test]
    fn cover_singletons_at_tiny_delta() {
        let prior = grid_prior(-0.5, 0.5, 0.25);
        let cover = build_cover(&prior, 1e-6).unwrap();
        assert_eq!(cover.blocks.len(), prior.points().len());
        assert!(cover.blocks.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn cover_blocks_are_contiguous_on_a_location_grid() {
        // Step 0.1 with delta = 1.5 x (unit-step L1): blocks can hold at
        // most adjacent grid points, and assignments follow the line.
        let prior = grid_prior(-1.0, 1.0, 0.1);
        let unit = l1_distance(
            &prior.points()[0].density,
            &prior.points()[1].density,
        )
        .unwrap();
        let cover = build_cover(&prior, 1.5 * unit).unwrap();
        assert!(cover.blocks.len() > 1);
        for b in &cover.blocks {
            let mut ids: Vec<usize> = b.ids().collect();
            ids.sort_unstable();
            for w in ids.windows(2) {
                assert_eq!(w[1], w[0] + 1, "block skips a grid point: {ids:?}");
            }
        }
        // Brute-force diameter verification.
        for (b, &d) in cover.blocks.iter().zip(&cover.diameters) {
            let brute = l1_diameter(prior.points(), b).unwrap();
            assert!((brute - d).abs() < 1e-12);
            assert!(brute < 1.5 * unit);
        }
    }

    #[test]
    fn cover_rejects_overlap_and_gaps() {
        let prior = grid_prior(0.0, 0.2, 0.1);
        let overlap = vec![
            SubsetSelector::from_ids([0, 1]),
            SubsetSelector::from_ids([1, 2]),
        ];
        assert!(matches!(
            CoverSieve::new(&prior, overlap, 10.0),
            Err(Error::InvalidCover(_))
        ));
        let gap = vec![SubsetSelector::from_ids([0, 1])];
        assert!(matches!(
            CoverSieve::new(&prior, gap, 10.0),
            Err(Error::InvalidCover(_))
        ));
    }

    #[test]
    fn walker_sum_uniform_and_power_law() {
        let prior = grid_prior(-0.75, 0.75, 0.1);
        let cover = build_cover(&prior, 1e-6).unwrap(); // 16 singleton blocks
        assert_eq!(cover.blocks.len(), 16);
        let report = walker_condition_check(&cover);
        assert!((report.sqrt_mass_sum - 4.0).abs() < 1e-12);
        assert!(report.satisfied);

        // Masses proportional to i^{-4}: direct-summation oracle.
        let z: f64 = (1..=16).map(|i| (i as f64).powi(-4)).sum();
        let oracle: f64 = (1..=16).map(|i| ((i as f64).powi(-4) / z).sqrt()).sum();
        let pts = prior.points().to_vec();
        let weights: Vec<f64> = (1..=16).map(|i| (i as f64).powi(-4)).collect();
        let prior4 = DiscretizedPrior::proper(pts, weights).unwrap();
        let cover4 = build_cover(&prior4, 1e-6).unwrap();
        let report4 = walker_condition_check(&cover4);
        assert!((report4.sqrt_mass_sum - oracle).abs() < 1e-12);
    }

    #[test]
    fn power_law_analytic_classification() {
        assert!(power_law_walker_condition(4.0, 1000).satisfied);
        let divergent = power_law_walker_condition(2.0, 1000);
        assert!(!divergent.satisfied);
        assert!(divergent.tail_bound.is_none());
        // p = 4 partial sum approaches pi^2/6 within the tail bound.
        let conv = power_law_walker_condition(4.0, 10_000);
        let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!(conv.partial_sum < zeta2);
        assert!(conv.partial_sum + conv.tail_bound.unwrap() >= zeta2);
    }

    /// Cover with masses proportional to i^{-4} over `k` singleton blocks,
    /// already sorted descending.
    fn power_law_cover(k: usize) -> CoverSieve {
        let pts = gaussian_location_grid(0.0, (k - 1) as f64 * 0.1, 0.1, 1.0).unwrap();
        let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powi(-4)).collect();
        let prior = DiscretizedPrior::proper(pts, weights).unwrap();
        build_cover(&prior, 1e-9).unwrap().sorted_by_mass()
    }

    #[test]
    fn sieve_tail_bound_direct_summation() {
        let cover = power_law_cover(400);
        let c: f64 = cover.masses.iter().map(|m| m.sqrt()).sum();
        // k = 100 at (beta, n) with exp(n beta) = 99.5, so ceil gives 100
        // without sitting on an integer boundary.
        let beta = (99.5_f64).ln() / 10.0;
        let stage = w_to_ggr_sieve(&cover, beta, 10).unwrap();
        assert_eq!(stage.blocks_kept, 100);
        let direct: f64 = cover.masses[100..].iter().sum();
        assert!((stage.complement_mass - direct).abs() < 1e-15);
        assert!(direct <= 2.0 * c * c / 100.0);
        assert!((stage.mass_bound - 2.0 * c * c / stage.k_n).abs() < 1e-12);
    }

    #[test]
    fn sieve_edge_cases() {
        let cover = power_law_cover(8);
        // k_n beyond the block count: empty complement.
        let all = w_to_ggr_sieve(&cover, 2.0, 5).unwrap();
        assert_eq!(all.blocks_kept, 8);
        assert_eq!(all.complement_mass, 0.0);
        // n = 0 keeps exactly the largest block.
        let first = w_to_ggr_sieve(&cover, 0.7, 0).unwrap();
        assert_eq!(first.blocks_kept, 1);
        assert!((first.entropy_bound - 0.0).abs() < 1e-15);
        let ids: Vec<usize> = first.theta_n.ids().collect();
        let largest: Vec<usize> = cover.blocks[0].ids().collect();
        assert_eq!(ids, largest);
    }

    #[test]
    fn sieve_rejects_unsorted_masses() {
        let cover = power_law_cover(8);
        let mut reversed = cover.clone();
        reversed.blocks.reverse();
        reversed.diameters.reverse();
        reversed.masses.reverse();
        assert!(matches!(
            w_to_ggr_sieve(&reversed, 0.5, 3),
            Err(Error::UnsortedMasses { index: 1 })
        ));
    }

    fn random_histograms(
        count: usize,
        cells: usize,
        r: &mut rand_chacha::ChaCha8Rng,
    ) -> Vec<DensitySpec> {
        let breaks: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        (0..count)
            .map(|_| {
                let raw: Vec<f64> = (0..cells).map(|_| r.random::<f64>() + 0.05).collect();
                let total: f64 = raw.iter().sum::<f64>() / cells as f64;
                let heights: Vec<f64> = raw.iter().map(|h| h / total).collect();
                DensitySpec::histogram(breaks.clone(), heights).unwrap()
            })
            .collect()
    }

    #[test]
    fn bracketing_singleton_and_huge_delta() {
        let f = DensitySpec::histogram(vec![0.0, 0.5, 1.0], vec![1.5, 0.5]).unwrap();
        let (h, brackets) = bracketing_entropy(std::slice::from_ref(&f), 0.1).unwrap();
        assert_eq!(h, 0.0);
        assert_eq!(brackets.envelopes.len(), 1);

        let mut r = crate::rng::stream(11, crate::rng::role::DATASET, 0);
        let fam = random_histograms(6, 4, &mut r);
        // Huge delta: the global pointwise max has mass below 1 + delta.
        let (h_big, b_big) = bracketing_entropy(&fam, 50.0).unwrap();
        assert_eq!(h_big, 0.0);
        assert_eq!(b_big.envelopes.len(), 1);
    }

    #[test]
    fn bracketing_far_family_needs_one_envelope_each() {
        // Mutually far spiked histograms: any pair's pointwise max has mass
        // well above 1 + delta, so the exact minimum is one envelope per
        // member.
        let fam: Vec<DensitySpec> = (0..5)
            .map(|i| {
                let mut heights = vec![0.0; 5];
                heights[i] = 5.0;
                DensitySpec::histogram(
                    (0..=5).map(|j| j as f64 / 5.0).collect(),
                    heights,
                )
                .unwrap()
            })
            .collect();
        let (h, brackets) = bracketing_entropy(&fam, 0.05).unwrap();
        assert!((h - (5.0_f64).ln()).abs() < 1e-12);
        assert_eq!(brackets.envelopes.len(), 5);
    }

    #[test]
    fn bracketing_exact_matches_greedy_upper_bound() {
        let mut r = crate::rng::stream(12, crate::rng::role::DATASET, 1);
        for _ in 0..10 {
            let fam = random_histograms(12, 5, &mut r);
            let fam_grid = PiecewiseFamily::new(&fam).unwrap();
            let delta = 0.35;
            let exact = exact_bracket_cover(&fam_grid, 1.0 + delta).unwrap();
            let greedy = greedy_bracket_cover(&fam_grid, 1.0 + delta).unwrap();
            assert!(exact.len() <= greedy.len());
            let (h, _) = bracketing_entropy(&fam, delta).unwrap();
            assert!((h - (exact.len() as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_set_rejects_inflated_envelope() {
        let f = DensitySpec::histogram(vec![0.0, 1.0], vec![1.0]).unwrap();
        let delta = 0.2;
        let inflated = Envelope {
            breaks: vec![0.0, 1.0],
            heights: vec![1.0 + 2.0 * delta],
        };
        assert!(matches!(
            BracketSet::new(vec![inflated], vec![0], std::slice::from_ref(&f), delta),
            Err(Error::InvalidBracket(_))
        ));
        // And domination failures are caught.
        let low = Envelope {
            breaks: vec![0.0, 1.0],
            heights: vec![0.9],
        };
        assert!(matches!(
            BracketSet::new(vec![low], vec![0], std::slice::from_ref(&f), delta),
            Err(Error::InvalidBracket(_))
        ));
    }

    #[test]
    fn normalized_envelopes_form_a_two_delta_net() {
        let mut r = crate::rng::stream(13, crate::rng::role::DATASET, 2);
        for _ in 0..10 {
            let fam = random_histograms(10, 4, &mut r);
            let delta = 0.3;
            let (h, brackets) = bracketing_entropy(&fam, delta).unwrap();
            let net = bsw_to_ggr_net(&brackets, &fam).unwrap();
            assert_eq!(net.len(), brackets.envelopes.len());
            // Independently minimized metric entropy at 2 delta, allowing
            // the normalized envelopes as centers, stays below the
            // bracketing entropy at delta.
            let (j, _) = metric_entropy_with_candidates(&fam, 2.0 * delta, &net).unwrap();
            assert!(
                j <= h + 1e-12,
                "metric entropy {j} above bracketing entropy {h}"
            );
        }
    }

    #[test]
    fn envelope_already_density_stays_fixed() {
        let f = DensitySpec::histogram(vec![0.0, 0.5, 1.0], vec![1.2, 0.8]).unwrap();
        let envelope = Envelope {
            breaks: vec![0.0, 0.5, 1.0],
            heights: vec![1.2, 0.8],
        };
        let brackets =
            BracketSet::new(vec![envelope], vec![0], std::slice::from_ref(&f), 0.1).unwrap();
        let net = bsw_to_ggr_net(&brackets, std::slice::from_ref(&f)).unwrap();
        assert!(l1_distance(&net[0], &f).unwrap() < 1e-12);
    }

    #[test]
    fn metric_entropy_trivial_and_exact() {
        let prior = grid_prior(-0.2, 0.2, 0.1);
        let fam: Vec<DensitySpec> =
            prior.points().iter().map(|p| p.density.clone()).collect();
        let global = l1_diameter(
            prior.points(),
            &SubsetSelector::from_ids(prior.points().iter().map(|p| p.id)),
        )
        .unwrap();
        let (j, net) = metric_entropy(&fam, global + 0.1).unwrap();
        assert_eq!(j, 0.0);
        assert_eq!(net.len(), 1);

        // Monotone nonincreasing in delta.
        let (j1, _) = metric_entropy(&fam, 0.05).unwrap();
        let (j2, _) = metric_entropy(&fam, 0.1).unwrap();
        assert!(j2 <= j1);
    }

    #[test]
    fn metric_entropy_greedy_never_beats_exact() {
        let mut r = crate::rng::stream(14, crate::rng::role::DATASET, 3);
        for _ in 0..5 {
            let fam = random_histograms(12, 5, &mut r);
            let delta = 0.4;
            let (j_exact, _) = metric_entropy(&fam, delta).unwrap();
            // Force the greedy branch by lying about the candidate source:
            // run the greedy code path via a >EXACT_LIMIT-sized clone list.
            let mut big = fam.clone();
            while big.len() <= EXACT_LIMIT {
                big.extend_from_slice(&fam);
            }
            let (j_greedy, _) = metric_entropy(&big, delta).unwrap();
            // Duplicates never need extra centers, so the greedy count on
            // the inflated family still upper-bounds the exact minimum.
            assert!(j_greedy + 1e-12 >= j_exact);
        }
    }

    #[test]
    fn ggr_check_on_power_law_sieves() {
        let cover = power_law_cover(60);
        let eps = 1.2;
        let beta = 0.35; // < eps^2/2 = 0.72
        let prior = {
            let pts = gaussian_location_grid(0.0, 59.0 * 0.1, 0.1, 1.0).unwrap();
            let weights: Vec<f64> = (1..=60).map(|i| (i as f64).powi(-4)).collect();
            DiscretizedPrior::proper(pts, weights).unwrap()
        };
        let stages: Vec<SieveStage> = [6, 9, 12]
            .iter()
            .map(|&n| w_to_ggr_sieve(&cover, beta, n).unwrap())
            .collect();
        let rows = ggr_condition_check(&prior, &stages, 0.2, beta, eps, 4.0).unwrap();
        for row in &rows {
            assert!(row.mass_ok, "mass condition failed at n = {}", row.n);
            assert!(row.entropy_ok, "entropy condition failed at n = {}", row.n);
        }
        // beta >= eps^2/2 is rejected.
        assert!(matches!(
            ggr_condition_check(&prior, &stages, 0.2, 0.72, 1.2, 4.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ggr_check_fails_for_fixed_sieve_with_constant_complement() {
        let cover = power_law_cover(30);
        let beta = 0.3;
        // Freeze the stage at n = 2 but relabel it with growing n: the
        // complement mass stops shrinking and must eventually violate the
        // exponential envelope.
        let frozen = w_to_ggr_sieve(&cover, beta, 2).unwrap();
        let prior = {
            let pts = gaussian_location_grid(0.0, 29.0 * 0.1, 0.1, 1.0).unwrap();
            let weights: Vec<f64> = (1..=30).map(|i| (i as f64).powi(-4)).collect();
            DiscretizedPrior::proper(pts, weights).unwrap()
        };
        let mut late = frozen.clone();
        late.n = 40;
        let rows = ggr_condition_check(&prior, &[late], 0.2, beta, 1.0, 1.0).unwrap();
        assert!(!rows[0].mass_ok);
    }
}

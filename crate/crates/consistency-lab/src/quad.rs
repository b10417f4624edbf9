//! One-dimensional quadrature.
//!
//! Two integrators live here:
//!
//! * [`adaptive`] — recursive adaptive Simpson with Richardson correction.
//!   Subdivision stops when the local error estimate `|S2 - S1|/15` fits the
//!   tolerance share of the interval, or at a depth cap (60 levels, i.e.
//!   interval widths shrink by 2^60 before we give up). Forced breakpoints
//!   let callers pre-split at known kinks (histogram bin edges, spike
//!   boundaries) so the error estimate never straddles a discontinuity.
//!
//! * [`SimpsonGrid`] — a fixed composite Simpson rule shared across many
//!   integrands with identical support. The simplex optimizer evaluates
//!   thousands of mixture affinities on the same node set; precomputing the
//!   grid once makes those evaluations cheap dot products.
//!
//! Improper tails are handled upstream: density code truncates the real line
//! where a density falls below 1e-16 of its peak, which perturbs unit-mass
//! integrals by far less than the 1e-10 tolerance used throughout.

/// Default absolute tolerance for density functionals.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

/// Maximum recursion depth for adaptive Simpson.
pub const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated local error estimates; trustworthy only when `converged`.
    pub abs_error: f64,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult { value: 0.0, abs_error: 0.0, converged: true }
    }

    fn merge(self, other: QuadResult) -> Self {
        QuadResult {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            converged: self.converged && other.converged,
        }
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> QuadResult {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < f64::EPSILON * (a.abs() + b.abs() + 1.0) {
        return QuadResult {
            value: left + right + delta / 15.0,
            abs_error: delta.abs() / 15.0,
            converged: true,
        };
    }
    if depth == 0 {
        return QuadResult {
            value: left + right + delta / 15.0,
            abs_error: delta.abs() / 15.0,
            converged: false,
        };
    }
    let l = adaptive_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let r = adaptive_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    l.merge(r)
}

fn adaptive_segment(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> QuadResult {
    if !(b > a) {
        return QuadResult::zero();
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`, forcing
/// subdivision at every interior point of `breakpoints`.
///
/// The tolerance is apportioned to segments by length; degenerate and
/// out-of-range breakpoints are ignored.
pub fn adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    breakpoints: &[f64],
) -> QuadResult {
    if !(b > a) {
        return QuadResult::zero();
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .cloned()
        .filter(|x| *x > a && *x < b)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let total = b - a;
    let mut acc = QuadResult::zero();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let tol = abs_tol * ((hi - lo) / total).max(f64::MIN_POSITIVE);
        acc = acc.merge(adaptive_segment(&mut f, lo, hi, tol));
    }
    acc
}

/// Fixed composite Simpson rule over a union of segments.
///
/// Each segment receives panels in proportion to its length (at least four),
/// so the total panel budget is approximate. Nodes and weights satisfy
/// `integral ~ sum(weights[i] * f(nodes[i]))`.
///
/// Endpoint nodes are inset by a sliver of the panel width: callers split
/// segments at the kinks of piecewise integrands, and the inset makes the
/// rule see the one-sided limit on each side instead of whatever value the
/// integrand assigns to the breakpoint itself. For smooth integrands the
/// positional error is far below the rule's own truncation error.
#[derive(Debug, Clone)]
pub struct SimpsonGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SimpsonGrid {
    pub fn new(segments: &[(f64, f64)], total_panels: usize) -> SimpsonGrid {
        let total_len: f64 = segments.iter().map(|(a, b)| (b - a).max(0.0)).sum();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for &(a, b) in segments {
            if !(b > a) {
                continue;
            }
            let share = ((b - a) / total_len * total_panels as f64).ceil() as usize;
            let panels = share.max(4);
            let h = (b - a) / (2 * panels) as f64;
            let inset = h * 1e-7;
            // 2*panels + 1 nodes with composite weights h/3 * [1,4,2,...,2,4,1].
            for k in 0..=(2 * panels) {
                let x = if k == 0 {
                    a + inset
                } else if k == 2 * panels {
                    b - inset
                } else {
                    a + h * k as f64
                };
                let w = if k == 0 || k == 2 * panels {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                nodes.push(x);
                weights.push(w * h / 3.0);
            }
        }
        SimpsonGrid { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // Simpson with Richardson correction is exact for quintics on
        // symmetric panels; check a cubic and a quintic.
        let r = adaptive(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, &[]);
        // antiderivative x^4/4 - x^2 + x evaluated at 3 and -1.
        let expect = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((r.value - expect).abs() < 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn gaussian_mass_to_tolerance() {
        let inv = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let r = adaptive(|x| inv * (-0.5 * x * x).exp(), -9.0, 9.0, 1e-12, &[]);
        assert!((r.value - 1.0).abs() < 1e-11);
        assert!(r.converged);
    }

    #[test]
    fn forced_breakpoints_capture_steps() {
        // Step function: 2 on [0, 0.3), 0.5 on [0.3, 1]. Without the forced
        // cut the first Simpson panel straddles the jump; with it the rule is
        // exact on each side.
        let f = |x: f64| if x < 0.3 { 2.0 } else { 0.5 };
        let r = adaptive(f, 0.0, 1.0, 1e-12, &[0.3]);
        assert!((r.value - (2.0 * 0.3 + 0.5 * 0.7)).abs() < 1e-13);
    }

    #[test]
    fn depth_cap_reports_nonconvergence() {
        // Integrable singularity x^(-1/2) at 0 with a tolerance far below
        // what 12 levels can deliver.
        let mut f = |x: f64| if x <= 0.0 { 0.0 } else { x.powf(-0.5) };
        let m = 0.5;
        let fa = f(0.0);
        let fm = f(m);
        let fb = f(1.0);
        let whole = simpson(fa, fm, fb, 1.0);
        let r = adaptive_rec(&mut f, 0.0, 1.0, fa, fm, fb, whole, 1e-14, 12);
        assert!(!r.converged);
        // The estimate should still be in the neighborhood of the true 2.0.
        assert!((r.value - 2.0).abs() < 0.1);
    }

    #[test]
    fn grid_matches_adaptive_on_smooth_integrand() {
        let grid = SimpsonGrid::new(&[(-8.0, 8.0)], 4000);
        let inv = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let g = grid.integrate(|x| inv * (-0.5 * x * x).exp());
        assert!((g - 1.0).abs() < 1e-10);
    }

    #[test]
    fn empty_and_reversed_ranges_integrate_to_zero() {
        let r = adaptive(|x| x, 1.0, 1.0, 1e-10, &[]);
        assert_eq!(r.value, 0.0);
        let r = adaptive(|x| x, 2.0, 1.0, 1e-10, &[]);
        assert_eq!(r.value, 0.0);
    }
}

//! Log-domain accumulation helpers.
//!
//! All posterior bookkeeping in this crate stays in log space until the last
//! moment; at sample sizes in the thousands the raw integrands underflow f64
//! by hundreds of orders of magnitude.

/// log(sum(exp(x_i))) with the usual max shift. Empty input and all-(-inf)
/// input both return -inf (the sum of no mass is zero mass).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        // Either empty, all -inf (legitimate zero mass), or a +inf/NaN upstream.
        return m.max(f64::NEG_INFINITY);
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// log(exp(a) + exp(b)) without materializing either exponential.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Weighted version: log(sum(exp(log_w_i + x_i))).
pub fn log_dot_exp(log_w: &[f64], xs: &[f64]) -> f64 {
    debug_assert_eq!(log_w.len(), xs.len());
    let m = log_w
        .iter()
        .zip(xs)
        .map(|(&w, &x)| w + x)
        .fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m.max(f64::NEG_INFINITY);
    }
    let s: f64 = log_w
        .iter()
        .zip(xs)
        .map(|(&w, &x)| (w + x - m).exp())
        .sum();
    m + s.ln()
}

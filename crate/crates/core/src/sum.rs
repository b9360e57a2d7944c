//! Deterministic summation helpers shared by the quadrature routines.

/// Pairwise (cascade) summation in slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean computed as `x[0] + mean(x - x[0])`.
///
/// Constant inputs return their value bit-for-bit, which keeps repeated
/// averaging idempotent.
pub fn shifted_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let x0 = xs[0];
    let shifted: Vec<f64> = xs.iter().map(|&x| x - x0).collect();
    x0 + pairwise_sum(&shifted) / xs.len() as f64
}

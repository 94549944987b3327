//! Independent one-dimensional Gauss rule from the three-term recurrence.
//!
//! Nodes are found by Sturm-sequence bisection on the Jacobi matrix and
//! weights by the Christoffel function, so no linear algebra is shared with
//! the library.

#![allow(dead_code)]

use gauss_cubature::WeightTag;

/// Squared off-diagonal `b_k` of the Jacobi matrix, `k >= 1`.
pub fn recurrence_b(tag: WeightTag, k: usize) -> f64 {
    let kf = k as f64;
    match tag {
        WeightTag::Lebesgue => kf * kf / (4.0 * kf * kf - 1.0),
        WeightTag::Chebyshev1 => {
            if k == 1 {
                0.5
            } else {
                0.25
            }
        }
        WeightTag::Chebyshev2 => 0.25,
        WeightTag::Hermite => kf / 2.0,
    }
}

/// Number of eigenvalues of the `m x m` zero-diagonal Jacobi matrix below `x`.
fn sturm_count(b: &[f64], m: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for bk in &b[1..m] {
        let denom = if q == 0.0 { 1e-300 } else { q };
        q = -x - bk / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Probability-normalized Gauss rule with `m` nodes, nodes ascending.
pub fn gauss_rule(tag: WeightTag, m: usize) -> (Vec<f64>, Vec<f64>) {
    // b[k] couples rows k-1 and k.
    let b: Vec<f64> = (0..m)
        .map(|k| if k == 0 { 0.0 } else { recurrence_b(tag, k) })
        .collect();
    let radius = 2.0 * b.iter().map(|v| v.sqrt()).fold(0.0, f64::max) + 1.0;
    let nodes: Vec<f64> = (0..m)
        .map(|j| {
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(&b, m, mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let weights = nodes
        .iter()
        .map(|&x| {
            let mut prev = 0.0;
            let mut cur = 1.0;
            let mut sum = 1.0;
            for k in 1..m {
                let next =
                    (x * cur - if k > 1 { b[k - 1].sqrt() * prev } else { 0.0 }) / b[k].sqrt();
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            1.0 / sum
        })
        .collect();
    (nodes, weights)
}

use std::f64::consts::PI;

use super::{
    load_moments, normalize_probability, MeasureSpec, MomentSequence, Provenance, WeightTag,
};
use crate::error::{Error, Result};
use crate::indexing::glex_enumerate;

/// Largest moment degree the symmetrized entry will tabulate.
pub const SYMMETRIZED_MAX_DEGREE: usize = 256;

/// Probability moments `m_0..=m_d` of a one-dimensional catalog weight.
///
/// All catalog weights are even, so odd moments vanish and even ones follow
/// `m_{k+2} = m_k * ratio(k)`.
pub fn one_dim_moments(tag: WeightTag, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d + 1];
    out[0] = 1.0;
    let mut k = 0;
    while k + 2 <= d {
        let kf = k as f64;
        let ratio = match tag {
            WeightTag::Lebesgue => (kf + 1.0) / (kf + 3.0),
            WeightTag::Chebyshev1 => (kf + 1.0) / (kf + 2.0),
            WeightTag::Chebyshev2 => (kf + 1.0) / (kf + 4.0),
            WeightTag::Hermite => (kf + 1.0) / 2.0,
        };
        out[k + 2] = out[k] * ratio;
        k += 2;
    }
    out
}

/// Closed-form moments of a catalog measure, normalized to a probability
/// (the original mass is kept as `scale`).
pub fn catalog_moments(spec: &MeasureSpec, n: usize, d_max: usize) -> Result<MomentSequence> {
    if let Some(dim) = spec.dim() {
        if dim != n {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: n,
            });
        }
    }
    match spec {
        MeasureSpec::Product(tags) => product_moments(spec, tags, d_max),
        MeasureSpec::Symmetrized { .. } => symmetrized_moments(spec, d_max),
        MeasureSpec::File(path) => {
            let seq = load_moments(path)?;
            if seq.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: seq.dim(),
                });
            }
            normalize_probability(&seq.truncated(d_max)?)
        }
    }
}

fn product_moments(spec: &MeasureSpec, tags: &[WeightTag], d_max: usize) -> Result<MomentSequence> {
    let n = tags.len();
    let factors: Vec<Vec<f64>> = tags.iter().map(|&t| one_dim_moments(t, d_max)).collect();
    let table = glex_enumerate(n, d_max)?;
    let values = table
        .iter()
        .map(|alpha| {
            alpha
                .exponents()
                .iter()
                .zip(&factors)
                .map(|(&e, f)| f[e as usize])
                .product()
        })
        .collect();
    let scale = tags.iter().map(|t| t.mass()).product();
    MomentSequence::new(
        n,
        d_max,
        values,
        true,
        scale,
        Provenance::Catalog(spec.clone()),
    )
}

fn symmetrized_moments(spec: &MeasureSpec, d_max: usize) -> Result<MomentSequence> {
    if d_max > SYMMETRIZED_MAX_DEGREE {
        return Err(Error::QuadratureTableExceeded {
            requested: d_max,
            max: SYMMETRIZED_MAX_DEGREE,
        });
    }
    // Integrand degree per variable is at most d_max + 2; the Gauss-Chebyshev
    // rule with `points` nodes is exact through 2*points - 1 >= d_max + 4.
    let points = (d_max + 5).div_ceil(2);
    let nodes: Vec<f64> = (1..=points)
        .map(|k| ((2 * k - 1) as f64 * PI / (2 * points) as f64).cos())
        .collect();
    let w = PI / points as f64;

    let table = glex_enumerate(2, d_max)?;
    let mut raw = vec![0.0; table.len()];
    for &t1 in &nodes {
        for &t2 in &nodes {
            let u = t1 + t2;
            let v = t1 * t2;
            let base = w * w * (t1 - t2) * (t1 - t2);
            for (slot, alpha) in raw.iter_mut().zip(table.iter()) {
                let e = alpha.exponents();
                *slot += base * u.powi(e[0] as i32) * v.powi(e[1] as i32);
            }
        }
    }
    // Odd powers of u vanish by the symmetry (t1, t2) -> (-t1, -t2).
    for (slot, alpha) in raw.iter_mut().zip(table.iter()) {
        if alpha.exponents()[0] % 2 == 1 {
            *slot = 0.0;
        }
    }
    let unnormalized =
        MomentSequence::new(2, d_max, raw, false, 1.0, Provenance::Catalog(spec.clone()))?;
    normalize_probability(&unnormalized)
}

//! Moment sequences, the built-in measure catalog, and raw moment matrices.

mod catalog;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::indexing::{dim_total, glex_enumerate, MultiIndex};
use crate::poly::Polynomial;

pub use catalog::{catalog_moments, one_dim_moments, SYMMETRIZED_MAX_DEGREE};
pub use io::{load_moments, parse_moments, store_moments, write_moments};

/// Default relative pivot threshold for [`psd_cholesky`].
pub const DEFAULT_PD_TOL: f64 = 1e-10;

/// One-dimensional weight functions available as product factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightTag {
    /// `dx` on `[-1, 1]`.
    Lebesgue,
    /// `(1 - x^2)^(-1/2) dx` on `[-1, 1]`.
    Chebyshev1,
    /// `(1 - x^2)^(1/2) dx` on `[-1, 1]`.
    Chebyshev2,
    /// `exp(-x^2) dx` on the real line.
    Hermite,
}

impl WeightTag {
    pub const ALL: [WeightTag; 4] = [
        WeightTag::Lebesgue,
        WeightTag::Chebyshev1,
        WeightTag::Chebyshev2,
        WeightTag::Hermite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightTag::Lebesgue => "lebesgue",
            WeightTag::Chebyshev1 => "chebyshev1",
            WeightTag::Chebyshev2 => "chebyshev2",
            WeightTag::Hermite => "hermite",
        }
    }

    /// Total mass of the weight.
    pub fn mass(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            WeightTag::Lebesgue => 2.0,
            WeightTag::Chebyshev1 => PI,
            WeightTag::Chebyshev2 => PI / 2.0,
            WeightTag::Hermite => PI.sqrt(),
        }
    }

    pub fn support(self) -> Option<(f64, f64)> {
        match self {
            WeightTag::Hermite => None,
            _ => Some((-1.0, 1.0)),
        }
    }
}

impl FromStr for WeightTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownMeasure(s.to_string()))
    }
}

/// Where moments come from.
///
/// Catalog grammar: `NAME^n` for an `n`-fold product of one weight
/// (`chebyshev1^2`), `NAME*NAME*..` for mixed products, and `symmetrized:0.5`
/// for the two-dimensional symmetrized Chebyshev family.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSpec {
    Product(Vec<WeightTag>),
    /// Image of `(t1 - t2)^2 w(t1) w(t2)` under `(t1, t2) -> (t1 + t2, t1 t2)`
    /// with `w` the Chebyshev weight. Only `alpha = 1/2` is supported.
    Symmetrized {
        alpha: f64,
    },
    File(PathBuf),
}

impl MeasureSpec {
    pub fn dim(&self) -> Option<usize> {
        match self {
            MeasureSpec::Product(tags) => Some(tags.len()),
            MeasureSpec::Symmetrized { .. } => Some(2),
            MeasureSpec::File(_) => None,
        }
    }

    /// Axis-aligned box containing the support, when one is known.
    pub fn support_box(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            MeasureSpec::Product(tags) => tags.iter().map(|t| t.support()).collect(),
            MeasureSpec::Symmetrized { .. } => Some(vec![(-2.0, 2.0), (-1.0, 1.0)]),
            MeasureSpec::File(_) => None,
        }
    }
}

impl FromStr for MeasureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("symmetrized") {
            let alpha = match rest.strip_prefix(':') {
                Some(a) => a
                    .parse::<f64>()
                    .map_err(|_| Error::UnknownMeasure(s.to_string()))?,
                None if rest.is_empty() => 0.5,
                None => return Err(Error::UnknownMeasure(s.to_string())),
            };
            if alpha != 0.5 {
                return Err(Error::UnknownMeasure(format!(
                    "{s} (only symmetrized:0.5 is available)"
                )));
            }
            return Ok(MeasureSpec::Symmetrized { alpha });
        }
        if let Some((name, count)) = s.split_once('^') {
            let tag: WeightTag = name.parse()?;
            let n: usize = count
                .parse()
                .map_err(|_| Error::UnknownMeasure(s.to_string()))?;
            if n == 0 {
                return Err(Error::ZeroDimension);
            }
            return Ok(MeasureSpec::Product(vec![tag; n]));
        }
        let tags = s
            .split('*')
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<WeightTag>>>()?;
        Ok(MeasureSpec::Product(tags))
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::Product(tags) => {
                if tags.iter().all(|t| *t == tags[0]) {
                    write!(f, "{}^{}", tags[0].name(), tags.len())
                } else {
                    let names: Vec<_> = tags.iter().map(|t| t.name()).collect();
                    f.write_str(&names.join("*"))
                }
            }
            MeasureSpec::Symmetrized { alpha } => write!(f, "symmetrized:{alpha}"),
            MeasureSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Catalog(MeasureSpec),
    File(PathBuf),
    Derived(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Catalog(spec) => write!(f, "catalog {spec}"),
            Provenance::File(p) => write!(f, "file {}", p.display()),
            Provenance::Derived(what) => f.write_str(what),
        }
    }
}

/// Moments `y_alpha` for every `|alpha| <= d_max`, stored in Glex order.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    n: usize,
    d_max: usize,
    values: Vec<f64>,
    normalized: bool,
    scale: f64,
    provenance: Provenance,
}

impl MomentSequence {
    /// Builds a sequence from Glex-ordered values.
    ///
    /// `normalized` may only be set when `values[0] == 1`.
    pub fn new(
        n: usize,
        d_max: usize,
        values: Vec<f64>,
        normalized: bool,
        scale: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        let len = dim_total(n, d_max)? as usize;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let table = glex_enumerate(n, d_max)?;
            return Err(Error::NonFinite(table.get(i).to_string()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale {scale} must be positive"
            )));
        }
        if normalized && values[0] != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "sequence flagged normalized but y0 = {}",
                values[0]
            )));
        }
        Ok(MomentSequence {
            n,
            d_max,
            values,
            normalized,
            scale,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.d_max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Mass of the measure before probability normalization.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    /// `y_alpha`, or `None` beyond the stored degree.
    pub fn get(&self, alpha: &MultiIndex) -> Option<f64> {
        if alpha.dim() != self.n || alpha.degree() > self.d_max {
            return None;
        }
        Some(self.values[alpha.glex_rank()])
    }

    pub fn by_rank(&self, rank: usize) -> f64 {
        self.values[rank]
    }

    /// Box containing the support, when the source declares one.
    pub fn support_box(&self) -> Option<Vec<(f64, f64)>> {
        match &self.provenance {
            Provenance::Catalog(spec) => spec.support_box(),
            _ => None,
        }
    }

    pub fn require_degree(&self, needed: usize, what: &'static str) -> Result<()> {
        if self.d_max < needed {
            return Err(Error::InsufficientDegree {
                what,
                needed,
                available: self.d_max,
            });
        }
        Ok(())
    }

    /// The Riesz functional `L_y(f) = sum_alpha f_alpha y_alpha`.
    pub fn integrate(&self, f: &Polynomial) -> Result<f64> {
        if f.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: f.dim(),
            });
        }
        self.require_degree(f.degree(), "integration")?;
        Ok(f.coeffs()
            .iter()
            .zip(&self.values)
            .map(|(c, y)| c * y)
            .sum())
    }

    /// Keeps only the moments of degree `<= d`.
    pub fn truncated(&self, d: usize) -> Result<MomentSequence> {
        self.require_degree(d, "truncation")?;
        let len = dim_total(self.n, d)? as usize;
        Ok(MomentSequence {
            values: self.values[..len].to_vec(),
            d_max: d,
            ..self.clone()
        })
    }

    /// Multiplies every moment by `factor` (clears the normalized flag).
    pub fn rescaled(&self, factor: f64) -> Result<MomentSequence> {
        let values = self.values.iter().map(|v| v * factor).collect();
        MomentSequence::new(
            self.n,
            self.d_max,
            values,
            false,
            self.scale,
            self.provenance.clone(),
        )
    }
}

/// Divides all moments by `y0` so the measure becomes a probability.
pub fn normalize_probability(seq: &MomentSequence) -> Result<MomentSequence> {
    let y0 = seq.values[0];
    if !(y0 > 0.0) {
        return Err(Error::NonPositiveMass(y0));
    }
    if seq.normalized || y0 == 1.0 {
        return Ok(MomentSequence {
            normalized: true,
            ..seq.clone()
        });
    }
    let mut values: Vec<f64> = seq.values.iter().map(|v| v / y0).collect();
    values[0] = 1.0;
    Ok(MomentSequence {
        values,
        normalized: true,
        scale: seq.scale * y0,
        ..seq.clone()
    })
}

/// `M_d(y)`: rows and columns indexed by `|alpha| <= d`, entry `y_{alpha+beta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    pub d: usize,
    pub matrix: DMatrix<f64>,
}

pub fn moment_matrix(seq: &MomentSequence, d: usize) -> Result<MomentMatrix> {
    let matrix = localizing_matrix(seq, d, &MultiIndex::zero(seq.n))?;
    Ok(MomentMatrix { d, matrix })
}

/// Entry `(alpha, beta)` is `y_{alpha+beta+shift}` over `|alpha|, |beta| <= d`.
pub fn localizing_matrix(
    seq: &MomentSequence,
    d: usize,
    shift: &MultiIndex,
) -> Result<DMatrix<f64>> {
    if shift.dim() != seq.n {
        return Err(Error::DimensionMismatch {
            expected: seq.n,
            found: shift.dim(),
        });
    }
    seq.require_degree(2 * d + shift.degree(), "moment matrix")?;
    let table = glex_enumerate(seq.n, d)?;
    let s = table.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        let a = table.get(i) + shift;
        for j in i..s {
            let v = seq.values[(&a + table.get(j)).glex_rank()];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Outcome of a pivot-checked Cholesky factorization.
#[derive(Clone, Debug)]
pub enum CholeskyOutcome {
    /// Lower-triangular `L` with `M = L L^T`.
    PositiveDefinite(DMatrix<f64>),
    NotPositiveDefinite {
        pivot: usize,
        value: f64,
    },
}

impl CholeskyOutcome {
    pub fn into_result(self) -> Result<DMatrix<f64>> {
        match self {
            CholeskyOutcome::PositiveDefinite(l) => Ok(l),
            CholeskyOutcome::NotPositiveDefinite { pivot, value } => {
                Err(Error::NotPositiveDefinite { pivot, value })
            }
        }
    }
}

/// Cholesky factorization that rejects pivots below `eps_pd * max(1, ||M||_inf)`.
pub fn psd_cholesky(m: &DMatrix<f64>, eps_pd: f64) -> Result<CholeskyOutcome> {
    let s = m.nrows();
    if m.ncols() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: m.ncols(),
        });
    }
    let max_abs = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut asym = 0.0f64;
    for i in 0..s {
        for j in 0..i {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    let asym = asym / max_abs.max(1.0);
    if asym > 1e-12 {
        return Err(Error::Asymmetric(asym));
    }
    let norm_inf = (0..s)
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let threshold = eps_pd * norm_inf.max(1.0);

    let mut l = DMatrix::<f64>::zeros(s, s);
    for j in 0..s {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > threshold) {
            return Ok(CholeskyOutcome::NotPositiveDefinite {
                pivot: j,
                value: pivot,
            });
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..s {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / diag;
        }
    }
    Ok(CholeskyOutcome::PositiveDefinite(l))
}

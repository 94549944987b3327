//! Multi-indices and the graded lexicographic (Glex) order.
//!
//! Every vector and matrix in this crate is laid out in Glex order: monomials
//! are sorted by total degree first, and ties are broken lexicographically
//! with the exponent of `x1` heaviest. For two variables this reads
//! `1, x1, x2, x1^2, x1 x2, x2^2, x1^3, ...`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Range};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponent vector of a monomial `x^alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: usize,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let degree = exponents.iter().map(|&e| e as usize).sum();
        Ok(MultiIndex { exponents, degree })
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        MultiIndex {
            exponents: vec![0; n],
            degree: 0,
        }
    }

    /// The unit index `e_i` (the monomial `x_i`).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut exponents = vec![0; n];
        exponents[i] = 1;
        MultiIndex {
            exponents,
            degree: 1,
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Evaluates `x^alpha`.
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.dim());
        self.exponents
            .iter()
            .zip(point)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }

    /// Position of this index in the full Glex enumeration of its dimension.
    pub fn glex_rank(&self) -> usize {
        let n = self.dim();
        let d = self.degree;
        let mut rank = if d == 0 {
            0
        } else {
            dim_total(n, d - 1).expect("rank overflow") as usize
        };
        // Count same-degree indices that are lexicographically larger.
        let mut rem = d;
        for (i, &a) in self.exponents.iter().enumerate() {
            let a = a as usize;
            let tail = n - i - 1;
            if tail >= 1 && rem > a {
                rank += binomial((rem - a - 1 + tail) as u64, tail as u64).expect("rank overflow")
                    as usize;
            }
            rem -= a;
        }
        rank
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim(), "multi-index dimension mismatch");
        MultiIndex {
            exponents: self
                .exponents
                .iter()
                .zip(&rhs.exponents)
                .map(|(a, b)| a + b)
                .collect(),
            degree: self.degree + rhs.degree,
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exponents = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidArgument(format!("bad multi-index \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(exponents)
    }
}

/// Total order used for every layout: degree first, then `x1` heaviest.
pub fn glex_compare(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    assert_eq!(a.dim(), b.dim(), "multi-index dimension mismatch");
    a.degree
        .cmp(&b.degree)
        .then_with(|| b.exponents.cmp(&a.exponents))
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        glex_compare(self, other)
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u64 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `s_d = C(n+d, d)`, the number of monomials of degree at most `d`.
pub fn dim_total(n: usize, d: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    binomial((n + d) as u64, d as u64).ok_or(Error::CountOverflow { n, d })
}

/// `r_d = C(n+d-1, d)`, the number of monomials of degree exactly `d`.
pub fn dim_homog(n: usize, d: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    binomial((n + d - 1) as u64, d as u64).ok_or(Error::CountOverflow { n, d })
}

/// `t_m = r_m (r_m + 1) / 2`, the number of unordered pairs of degree-`m` indices.
pub fn pair_count(n: usize, m: usize) -> Result<u64> {
    let r = dim_homog(n, m)?;
    r.checked_mul(r + 1)
        .map(|v| v / 2)
        .ok_or(Error::CountOverflow { n, d: m })
}

/// Row of the unordered pair `{gamma, beta}` (both of degree `m`).
///
/// Layout is upper-triangle, Glex-major: with `i <= j` the within-degree
/// positions, pairs are numbered `(0,0), (0,1), .., (0,r-1), (1,1), ..`.
pub fn pair_rank(gamma: &MultiIndex, beta: &MultiIndex, m: usize) -> Result<usize> {
    if gamma.degree() != m || beta.degree() != m {
        return Err(Error::InvalidArgument(format!(
            "pair_rank needs two indices of degree {m}, got ({gamma}) and ({beta})"
        )));
    }
    if gamma.dim() != beta.dim() {
        return Err(Error::DimensionMismatch {
            expected: gamma.dim(),
            found: beta.dim(),
        });
    }
    let n = gamma.dim();
    let offset = if m == 0 {
        0
    } else {
        dim_total(n, m - 1)? as usize
    };
    let r = dim_homog(n, m)? as usize;
    let (mut i, mut j) = (gamma.glex_rank() - offset, beta.glex_rank() - offset);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    Ok(pair_rank_local(i, j, r))
}

pub(crate) fn pair_rank_local(i: usize, j: usize, r: usize) -> usize {
    debug_assert!(i <= j && j < r);
    // Rows 0..i of the upper triangle hold r, r-1, .., r-i+1 entries.
    i * r - i * i.saturating_sub(1) / 2 + (j - i)
}

/// All multi-indices of dimension `n` and degree at most `d_max`, in Glex order,
/// together with the inverse map.
#[derive(Clone, Debug)]
pub struct GlexTable {
    n: usize,
    d_max: usize,
    entries: Vec<MultiIndex>,
    ranks: HashMap<MultiIndex, usize>,
}

impl GlexTable {
    pub fn new(n: usize, d_max: usize) -> Result<Self> {
        glex_enumerate(n, d_max)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.d_max
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, rank: usize) -> &MultiIndex {
        &self.entries[rank]
    }

    pub fn rank(&self, alpha: &MultiIndex) -> Option<usize> {
        self.ranks.get(alpha).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    /// Rank range of the indices of degree exactly `k`.
    pub fn degree_block(&self, k: usize) -> Range<usize> {
        assert!(
            k <= self.d_max,
            "degree {k} beyond table degree {}",
            self.d_max
        );
        let lo = if k == 0 {
            0
        } else {
            dim_total(self.n, k - 1).unwrap() as usize
        };
        let hi = dim_total(self.n, k).unwrap() as usize;
        lo..hi
    }

    /// Number of indices of degree at most `k`.
    pub fn prefix_len(&self, k: usize) -> usize {
        self.degree_block(k).end
    }
}

/// Enumerates all indices of degree `<= d_max` in Glex order.
pub fn glex_enumerate(n: usize, d_max: usize) -> Result<GlexTable> {
    let total = dim_total(n, d_max)? as usize;
    let mut entries = Vec::with_capacity(total);
    let mut current = vec![0u32; n];
    for d in 0..=d_max {
        push_degree(&mut entries, &mut current, 0, d);
    }
    debug_assert_eq!(entries.len(), total);
    let ranks = entries
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    Ok(GlexTable {
        n,
        d_max,
        entries,
        ranks,
    })
}

fn push_degree(out: &mut Vec<MultiIndex>, current: &mut [u32], pos: usize, rem: usize) {
    let n = current.len();
    if pos == n - 1 {
        current[pos] = rem as u32;
        let degree = current.iter().map(|&e| e as usize).sum();
        out.push(MultiIndex {
            exponents: current.to_vec(),
            degree,
        });
        return;
    }
    for a in (0..=rem).rev() {
        current[pos] = a as u32;
        push_degree(out, current, pos + 1, rem - a);
    }
    current[pos] = 0;
}

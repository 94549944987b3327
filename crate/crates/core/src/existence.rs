//! The existence test.
//!
//! For `|gamma| = |beta| = m`, expand `P_gamma P_beta` in the orthonormal
//! basis of degree `<= 2m`. Only two slices of that expansion matter: the
//! constant coefficient, which is `delta_{gamma = beta}`, and the degree-`2m`
//! coefficients `L_y(P_gamma P_beta P_kappa)`. Stacking them over the `t_m`
//! unordered pairs gives a vector `a0` and a `t_m x r_{2m}` matrix `A`; a
//! Gaussian cubature of degree `2m - 1` exists iff `a0 + A u = 0` is solvable.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::indexing::{dim_homog, pair_count, pair_rank_local};
use crate::linalg;
use crate::measures::{moment_matrix, MomentSequence};
use crate::ortho::OrthoBasis;
use crate::poly::Polynomial;

/// Singular values below `RANK_RTOL * sigma_max` count as zero.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ExpansionSystem {
    pub n: usize,
    pub m: usize,
    /// Constant coefficients, one per unordered pair (pair-rank layout).
    pub a0: DVector<f64>,
    /// Degree-`2m` coefficients: row per pair, column per `|kappa| = 2m`.
    pub a2m: DMatrix<f64>,
    /// Singular values of `a2m`, descending.
    pub singular_values: Vec<f64>,
}

impl ExpansionSystem {
    /// `t_m`, the number of equations.
    pub fn rows(&self) -> usize {
        self.a2m.nrows()
    }

    /// `r_{2m}`, the number of unknowns.
    pub fn cols(&self) -> usize {
        self.a2m.ncols()
    }

    /// More equations than unknowns. False only for `m = 1` (square) and `n = 1`.
    pub fn is_overdetermined(&self) -> bool {
        self.rows() > self.cols()
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub exists: bool,
    /// Minimum-norm least-squares solution of `A u = -a0`.
    pub u: Vec<f64>,
    pub residual: f64,
    pub relative_residual: f64,
    pub rank: usize,
    pub tol: f64,
}

/// Coefficients of `P_gamma P_beta` (degree `2m`) for all unordered pairs.
fn pair_products(basis: &OrthoBasis, m: usize) -> Vec<(usize, usize, Polynomial)> {
    let block = basis.block(m);
    let mut out = Vec::new();
    for (i, gi) in block.clone().enumerate() {
        let pg = basis.poly(gi);
        for (j, bj) in block.clone().enumerate().skip(i) {
            out.push((i, j, pg.mul(&basis.poly(bj))));
        }
    }
    out
}

pub fn assemble_system(
    y: &MomentSequence,
    basis: &OrthoBasis,
    m: usize,
) -> Result<ExpansionSystem> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if !y.is_normalized() {
        return Err(Error::InvalidArgument(
            "existence system needs probability-normalized moments".into(),
        ));
    }
    if basis.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            found: basis.dim(),
        });
    }
    y.require_degree(4 * m, "existence system")?;
    basis.require_degree(2 * m, "existence system")?;
    let n = y.dim();
    let r = dim_homog(n, m)? as usize;
    let rows = pair_count(n, m)? as usize;
    let top = basis.block(2 * m);

    // Column kappa of `weights` is M_{2m}(y) P_kappa^T, so a product polynomial
    // p of degree 2m gives L_y(p P_kappa) = p . weights[:, kappa].
    let h = moment_matrix(y, 2 * m)?.matrix;
    let s_top = basis
        .matrix()
        .view((top.start, 0), (top.len(), top.end))
        .into_owned();
    let weights = h * s_top.transpose();

    let mut a0 = DVector::zeros(rows);
    let mut a2m = DMatrix::zeros(rows, top.len());
    for (i, j, p) in pair_products(basis, m) {
        let row = pair_rank_local(i, j, r);
        a0[row] = if i == j { 1.0 } else { 0.0 };
        let coeffs = DVector::from_column_slice(p.coeffs());
        let vals = weights.tr_mul(&coeffs);
        a2m.row_mut(row).copy_from(&vals.transpose());
    }
    let singular_values = linalg::svd(&a2m)?.singular_values;
    Ok(ExpansionSystem {
        n,
        m,
        a0,
        a2m,
        singular_values,
    })
}

/// Least-squares solve of `a0 + A u = 0` with an SVD-based pseudo-inverse.
pub fn solve_existence(sys: &ExpansionSystem, tol: f64) -> Result<Verdict> {
    if sys.a0.iter().chain(sys.a2m.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "existence system contains non-finite entries".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let svd = linalg::svd(&sys.a2m)?;
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = RANK_RTOL * sigma_max;

    let rhs = -&sys.a0;
    let mut u = DVector::zeros(sys.cols());
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            let coef = svd.u.column(k).dot(&rhs) / s;
            u += svd.v.column(k) * coef;
        }
    }
    let residual = (&sys.a0 + &sys.a2m * &u).norm();
    let relative_residual = residual / sys.a0.norm();
    Ok(Verdict {
        exists: relative_residual <= tol,
        u: u.iter().copied().collect(),
        residual,
        relative_residual,
        rank,
        tol,
    })
}

/// Coefficients of `P_gamma P_beta` against every `P_theta`, `|theta| <= 2m`,
/// grouped by degree `j = 0..=2m`.
pub fn full_expansion(
    basis: &OrthoBasis,
    y: &MomentSequence,
    gamma: &crate::MultiIndex,
    beta: &crate::MultiIndex,
) -> Result<Vec<Vec<f64>>> {
    if gamma.degree() != beta.degree() {
        return Err(Error::InvalidArgument(
            "full_expansion needs two indices of equal degree".into(),
        ));
    }
    let m = gamma.degree();
    basis.require_degree(2 * m, "full expansion")?;
    y.require_degree(4 * m, "full expansion")?;
    let p = basis.poly_of(gamma)?.mul(&basis.poly_of(beta)?);
    (0..=2 * m)
        .map(|j| {
            basis
                .block(j)
                .map(|t| y.integrate(&p.mul(&basis.poly(t))))
                .collect()
        })
        .collect()
}

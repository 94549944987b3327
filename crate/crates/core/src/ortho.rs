//! Orthonormal polynomials with respect to a moment functional.
//!
//! The family `(P_alpha)` is the unique one that is triangular in the Glex
//! monomial basis, orthonormal under `<f, g> = L_y(f g)`, and has a positive
//! leading coefficient. It is stored as the change-of-basis matrix `S` whose
//! row `alpha` holds the monomial coefficients of `P_alpha`; with the
//! Cholesky factorization `M_d(y) = L L^T`, `S = L^{-1}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::indexing::{dim_total, glex_enumerate, MultiIndex};
use crate::measures::{moment_matrix, psd_cholesky, MomentSequence, DEFAULT_PD_TOL};
use crate::poly::{monomial_values, Polynomial};

#[derive(Clone, Debug)]
pub struct OrthoBasis {
    n: usize,
    d: usize,
    s: DMatrix<f64>,
}

impl OrthoBasis {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// The full `s_d x s_d` coefficient matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// Top-left block covering the polynomials of degree `<= d`.
    ///
    /// The construction is nested, so this is exactly the basis one would get
    /// by building to degree `d` directly.
    pub fn leading(&self, d: usize) -> DMatrix<f64> {
        assert!(d <= self.d, "degree {d} beyond basis degree {}", self.d);
        let s = dim_total(self.n, d).unwrap() as usize;
        self.s.view((0, 0), (s, s)).into_owned()
    }

    pub fn require_degree(&self, needed: usize, what: &'static str) -> Result<()> {
        if self.d < needed {
            return Err(Error::InsufficientDegree {
                what,
                needed,
                available: self.d,
            });
        }
        Ok(())
    }

    /// Rank range of the degree-`k` block.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        let lo = if k == 0 {
            0
        } else {
            dim_total(self.n, k - 1).unwrap() as usize
        };
        lo..dim_total(self.n, k).unwrap() as usize
    }

    /// `P_alpha` for the index of Glex rank `rank`.
    pub fn poly(&self, rank: usize) -> Polynomial {
        let table = glex_enumerate(self.n, self.d).expect("enumeration");
        let deg = table.get(rank).degree();
        let len = dim_total(self.n, deg).unwrap() as usize;
        let coeffs = self.s.row(rank).iter().take(len).copied().collect();
        Polynomial::from_coeffs(self.n, deg, coeffs).unwrap()
    }

    pub fn poly_of(&self, alpha: &MultiIndex) -> Result<Polynomial> {
        if alpha.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: alpha.dim(),
            });
        }
        self.require_degree(alpha.degree(), "orthonormal polynomial")?;
        Ok(self.poly(alpha.glex_rank()))
    }

    /// Values of every `P_alpha` with `|alpha| <= d` at `point`.
    pub fn eval_upto(&self, d: usize, point: &[f64]) -> Vec<f64> {
        assert!(d <= self.d);
        let mono = monomial_values(point, d);
        let s = mono.len();
        (0..s)
            .map(|i| (0..=i).map(|j| self.s[(i, j)] * mono[j]).sum())
            .collect()
    }

    /// Every diagonal entry (leading coefficient) is strictly positive.
    pub fn diag_positive(&self) -> bool {
        self.s.diagonal().iter().all(|&v| v > 0.0)
    }
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub(crate) fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let s = l.nrows();
    let mut inv = DMatrix::zeros(s, s);
    for j in 0..s {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in j + 1..s {
            let mut acc = 0.0;
            for k in j..i {
                acc += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -acc / l[(i, i)];
        }
    }
    inv
}

pub fn build_orthobasis(y: &MomentSequence, d: usize) -> Result<OrthoBasis> {
    y.require_degree(2 * d, "orthonormal basis")?;
    let m = moment_matrix(y, d)?;
    let l = psd_cholesky(&m.matrix, DEFAULT_PD_TOL)?.into_result()?;
    let mut s = lower_inverse(&l);
    for i in 0..s.nrows() {
        if s[(i, i)] < 0.0 {
            s.row_mut(i).neg_mut();
        }
    }
    Ok(OrthoBasis { n: y.dim(), d, s })
}

/// `P_sigma` from the bordered determinant: rows `alpha <gl sigma` of the
/// moment matrix restricted to columns `beta <=gl sigma`, with the monomials
/// `x^beta` as last row, then normalized to unit norm and positive leading
/// coefficient. Independent of the Cholesky route; used as a cross-check.
pub fn ortho_det_oracle(y: &MomentSequence, sigma: &MultiIndex) -> Result<Polynomial> {
    let n = y.dim();
    if sigma.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sigma.dim(),
        });
    }
    let deg = sigma.degree();
    y.require_degree(2 * deg, "determinant oracle")?;
    let k = sigma.glex_rank();
    let table = glex_enumerate(n, deg)?;
    let entry = |i: usize, j: usize| y.by_rank((table.get(i) + table.get(j)).glex_rank());

    // Laplace expansion along the monomial row.
    let mut coeffs = vec![0.0; table.len()];
    for (j, c) in coeffs.iter_mut().enumerate().take(k + 1) {
        let minor = DMatrix::from_fn(k, k, |r, col| {
            let col = if col < j { col } else { col + 1 };
            entry(r, col)
        });
        let det = if k == 0 { 1.0 } else { minor.determinant() };
        let sign = if (k + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        *c = sign * det;
    }
    if coeffs[k] == 0.0 {
        return Err(Error::ZeroDeterminant(sigma.to_string()));
    }
    let mut norm2 = 0.0;
    for i in 0..=k {
        for j in 0..=k {
            norm2 += coeffs[i] * coeffs[j] * entry(i, j);
        }
    }
    if !(norm2 > 0.0) {
        return Err(Error::ZeroDeterminant(sigma.to_string()));
    }
    let factor = coeffs[k].signum() / norm2.sqrt();
    let coeffs = coeffs.into_iter().map(|c| c * factor).collect();
    Polynomial::from_coeffs(n, deg, coeffs)
}

/// Values of the degree-`m` block `(P_alpha)_{|alpha| = m}` at `point`.
pub fn eval_block(basis: &OrthoBasis, m: usize, point: &[f64]) -> Vec<f64> {
    assert!(m <= basis.d, "degree {m} beyond basis degree {}", basis.d);
    let all = basis.eval_upto(m, point);
    all[basis.block(m)].to_vec()
}

/// `L_y(P_gamma P_beta P_kappa)`, by expanding the product in monomials.
pub fn triple_product(
    y: &MomentSequence,
    basis: &OrthoBasis,
    gamma: &MultiIndex,
    beta: &MultiIndex,
    kappa: &MultiIndex,
) -> Result<f64> {
    let total = gamma.degree() + beta.degree() + kappa.degree();
    y.require_degree(total, "triple product")?;
    let p = basis
        .poly_of(gamma)?
        .mul(&basis.poly_of(beta)?)
        .mul(&basis.poly_of(kappa)?);
    y.integrate(&p)
}

/// `Mbar_d(z)`: the moment matrix of `z` in the orthonormal basis of `y`.
#[derive(Clone, Debug)]
pub struct OrthoMomentMatrix {
    pub d: usize,
    pub matrix: DMatrix<f64>,
}

pub fn gram_in_ortho_basis(
    z: &MomentSequence,
    basis: &OrthoBasis,
    d: usize,
) -> Result<OrthoMomentMatrix> {
    basis.require_degree(d, "orthonormal-basis moment matrix")?;
    z.require_degree(2 * d, "orthonormal-basis moment matrix")?;
    let s = basis.leading(d);
    let m = moment_matrix(z, d)?.matrix;
    let mut g = &s * m * s.transpose();
    g = (&g + g.transpose()) * 0.5;
    Ok(OrthoMomentMatrix { d, matrix: g })
}

//! The certificate polynomial `Q = sign * u^T P_{2m}` and its identities.
//!
//! With `u` solving `a0 + A u = 0`, `L_y(P_gamma P_beta u^T P_{2m}) = (A u) = -delta`,
//! so the identity `L_y(P_gamma P_beta Q) = delta_{gamma = beta}` holds for
//! `Q = -u^T P_{2m}`. That is the default; [`QSign::Literal`] keeps `+u`.

use nalgebra::DMatrix;

use crate::cubature::CubatureRule;
use crate::error::{Error, Result};
use crate::indexing::{dim_homog, dim_total, glex_enumerate, MultiIndex};
use crate::measures::MomentSequence;
use crate::ortho::{eval_block, OrthoBasis};
use crate::poly::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QSign {
    /// `Q = -u^T P_{2m}`, for which the matrix identity yields `I`.
    #[default]
    Negated,
    /// `Q = u^T P_{2m}`, for which the matrix identity yields `-I`.
    Literal,
}

impl QSign {
    pub fn factor(self) -> f64 {
        match self {
            QSign::Negated => -1.0,
            QSign::Literal => 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificatePolynomial {
    pub m: usize,
    pub u: Vec<f64>,
    pub sign: QSign,
    /// Monomial coefficients, stored to degree `2m`.
    pub poly: Polynomial,
}

pub fn build_q(
    basis: &OrthoBasis,
    u: &[f64],
    m: usize,
    sign: QSign,
) -> Result<CertificatePolynomial> {
    basis.require_degree(2 * m, "certificate polynomial")?;
    let n = basis.dim();
    let r2m = dim_homog(n, 2 * m)? as usize;
    if u.len() != r2m {
        return Err(Error::LengthMismatch {
            expected: r2m,
            found: u.len(),
        });
    }
    let len = dim_total(n, 2 * m)? as usize;
    let s = basis.matrix();
    let f = sign.factor();
    let coeffs = (0..len)
        .map(|c| {
            basis
                .block(2 * m)
                .zip(u)
                .map(|(row, &uk)| f * uk * s[(row, c)])
                .sum::<f64>()
        })
        .collect();
    Ok(CertificatePolynomial {
        m,
        u: u.to_vec(),
        sign,
        poly: Polynomial::from_coeffs(n, 2 * m, coeffs)?,
    })
}

#[derive(Clone, Debug)]
pub struct GramIdentityReport {
    /// `G[gamma, beta] = L_y(P_gamma P_beta Q)` over `|gamma| = |beta| = m`.
    pub g: DMatrix<f64>,
    /// `||G - I||_max`.
    pub deviation: f64,
}

pub fn verify_gram_identity(
    y: &MomentSequence,
    basis: &OrthoBasis,
    q: &CertificatePolynomial,
    m: usize,
) -> Result<GramIdentityReport> {
    y.require_degree(4 * m, "certificate identity")?;
    basis.require_degree(m, "certificate identity")?;
    let blk = basis.block(m);
    let r = blk.len();
    // G = S_m H S_m^T with H[a, b] = L_y(x^{a+b} Q), restricted to the degree-m rows.
    let table = glex_enumerate(basis.dim(), 4 * m)?;
    let low = glex_enumerate(basis.dim(), m)?;
    let qterms: Vec<(&MultiIndex, f64)> = table
        .iter()
        .zip(q.poly.coeffs())
        .filter(|(_, &c)| c != 0.0)
        .map(|(k, &c)| (k, c))
        .collect();
    let size = low.len();
    let mut h = DMatrix::zeros(size, size);
    for i in 0..size {
        for j in i..size {
            let ab = low.get(i) + low.get(j);
            let v: f64 = qterms
                .iter()
                .map(|(k, c)| c * y.by_rank((&ab + *k).glex_rank()))
                .sum();
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let s = basis.leading(m).rows(blk.start, r).into_owned();
    let g = &s * h * s.transpose();
    let g = (&g + g.transpose()) * 0.5;
    let deviation = (&g - DMatrix::<f64>::identity(r, r)).amax();
    Ok(GramIdentityReport { g, deviation })
}

#[derive(Clone, Debug)]
pub struct RuleIdentityReport {
    /// `max |u - sum_k w_k P_{2m}(x_k)|` with probability weights.
    pub u_from_rule: f64,
    /// `max_{|alpha| < 2m} |L_y(P_alpha Q)|`.
    pub lower_orthogonality: f64,
    /// `max_{|alpha| = 2m} |L_y(P_alpha Q) - sign * u_alpha|`.
    pub top_coefficients: f64,
    /// `|L_y(Q)|`.
    pub integral: f64,
}

impl RuleIdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.u_from_rule <= tol
            && self.lower_orthogonality <= tol
            && self.top_coefficients <= tol
            && self.integral <= tol
    }
}

pub fn verify_rule_identities(
    y: &MomentSequence,
    basis: &OrthoBasis,
    q: &CertificatePolynomial,
    m: usize,
    rule: &CubatureRule,
) -> Result<RuleIdentityReport> {
    y.require_degree(4 * m, "certificate rule identities")?;
    basis.require_degree(2 * m, "certificate rule identities")?;
    let top = basis.block(2 * m);

    let mut from_rule = vec![0.0; top.len()];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        for (acc, p) in from_rule.iter_mut().zip(eval_block(basis, 2 * m, x)) {
            *acc += w / rule.scale * p;
        }
    }
    let u_from_rule = from_rule
        .iter()
        .zip(&q.u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut lower_orthogonality = 0.0f64;
    let mut top_coefficients = 0.0f64;
    for k in 0..top.end {
        let v = y.integrate(&basis.poly(k).mul(&q.poly))?;
        if k < top.start {
            lower_orthogonality = lower_orthogonality.max(v.abs());
        } else {
            let want = q.sign.factor() * q.u[k - top.start];
            top_coefficients = top_coefficients.max((v - want).abs());
        }
    }
    let integral = y.integrate(&q.poly)?.abs();
    Ok(RuleIdentityReport {
        u_from_rule,
        lower_orthogonality,
        top_coefficients,
        integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{catalog_moments, MeasureSpec};
    use crate::ortho::build_orthobasis;

    fn lebesgue1() -> (MomentSequence, OrthoBasis) {
        let y = catalog_moments(&"lebesgue^1".parse::<MeasureSpec>().unwrap(), 1, 4).unwrap();
        let b = build_orthobasis(&y, 2).unwrap();
        (y, b)
    }

    #[test]
    fn q_for_one_point_rule() {
        let (y, b) = lebesgue1();
        let u = [-5f64.sqrt() / 2.0];
        let q = build_q(&b, &u, 1, QSign::Negated).unwrap();
        // (5/4)(3x^2 - 1)
        let c = q.poly.coeffs();
        assert!((c[0] + 1.25).abs() < 1e-13);
        assert!(c[1].abs() < 1e-14);
        assert!((c[2] - 3.75).abs() < 1e-13);

        let rep = verify_gram_identity(&y, &b, &q, 1).unwrap();
        assert!((rep.g[(0, 0)] - 1.0).abs() < 1e-13);
        assert!(rep.deviation < 1e-13);

        let lit = build_q(&b, &u, 1, QSign::Literal).unwrap();
        let rep = verify_gram_identity(&y, &b, &lit, 1).unwrap();
        assert!((rep.g[(0, 0)] + 1.0).abs() < 1e-13);

        let rule = CubatureRule {
            n: 1,
            m: 1,
            nodes: vec![vec![0.0]],
            weights: vec![2.0],
            scale: 2.0,
        };
        let r = verify_rule_identities(&y, &b, &q, 1, &rule).unwrap();
        assert!(r.passes(1e-12), "{r:?}");
    }

    #[test]
    fn zero_u_gives_zero_q() {
        let (y, b) = lebesgue1();
        let q = build_q(&b, &[0.0], 1, QSign::Negated).unwrap();
        assert!(q.poly.coeffs().iter().all(|&c| c == 0.0));
        let rep = verify_gram_identity(&y, &b, &q, 1).unwrap();
        assert_eq!(rep.deviation, 1.0);
        assert!(matches!(
            build_q(&b, &[0.0, 1.0], 1, QSign::Negated),
            Err(Error::LengthMismatch { .. })
        ));
    }
}

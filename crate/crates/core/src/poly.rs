//! Dense polynomials over the Glex monomial basis.

use std::fmt;

use crate::error::{Error, Result};
use crate::indexing::{dim_total, glex_enumerate, MultiIndex};

/// A polynomial `sum_alpha c_alpha x^alpha` with coefficients stored for every
/// monomial of degree `<= degree`, in Glex order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero(n: usize, degree: usize) -> Result<Self> {
        let len = dim_total(n, degree)? as usize;
        Ok(Polynomial {
            n,
            degree,
            coeffs: vec![0.0; len],
        })
    }

    pub fn from_coeffs(n: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let len = dim_total(n, degree)? as usize;
        if coeffs.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: coeffs.len(),
            });
        }
        Ok(Polynomial { n, degree, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Storage degree (an upper bound on the true degree).
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.coeffs.get(alpha.glex_rank()).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.n, "point dimension mismatch");
        monomial_values(point, self.degree)
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| m * c)
            .sum()
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n, "polynomial dimension mismatch");
        let degree = self.degree + other.degree;
        let mut out = Polynomial::zero(self.n, degree).expect("product degree overflow");
        let left = glex_enumerate(self.n, self.degree).expect("enumeration");
        let right = glex_enumerate(self.n, other.degree).expect("enumeration");
        for (a, &ca) in left.iter().zip(&self.coeffs) {
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in right.iter().zip(&other.coeffs) {
                if cb == 0.0 {
                    continue;
                }
                out.coeffs[(a + b).glex_rank()] += ca * cb;
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Polynomial {
        Polynomial {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Re-stores the polynomial with a larger storage degree.
    pub fn padded(&self, degree: usize) -> Polynomial {
        assert!(degree >= self.degree);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim_total(self.n, degree).expect("overflow") as usize, 0.0);
        Polynomial {
            n: self.n,
            degree,
            coeffs,
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }
}

/// Values of every monomial of degree `<= degree` at `point`, in Glex order.
pub fn monomial_values(point: &[f64], degree: usize) -> Vec<f64> {
    let n = point.len();
    let table = glex_enumerate(n, degree).expect("enumeration");
    let mut values = Vec::with_capacity(table.len());
    for alpha in table.iter() {
        if alpha.degree() == 0 {
            values.push(1.0);
            continue;
        }
        // x^alpha = x_i * x^(alpha - e_i) for the first nonzero exponent i.
        let i = alpha.exponents().iter().position(|&e| e > 0).unwrap();
        let mut prev = alpha.exponents().to_vec();
        prev[i] -= 1;
        let prev = MultiIndex::new(prev).unwrap();
        values.push(values[prev.glex_rank()] * point[i]);
    }
    values
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let table = glex_enumerate(self.n, self.degree).map_err(|_| fmt::Error)?;
        let mut first = true;
        for (alpha, &c) in table.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            write!(f, "{:.12}", c.abs())?;
            for (i, &e) in alpha.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{e}", i + 1)?,
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

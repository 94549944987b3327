//! Dense decompositions backed by faer.
//!
//! nalgebra's SVD can report success on matrices with repeated singular
//! values while returning factors that do not reproduce the input (errors
//! around 1e-2 on some existence systems), so the spectral work goes through
//! faer and the result is checked before use.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Factors must reproduce the input to this multiple of `eps * ||A||`.
const RECONSTRUCTION_SLACK: f64 = 1e3;

/// Thin SVD `A = U diag(s) V^T`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// `A = Q diag(l) Q^T`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn to_nalgebra(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn check(a: &DMatrix<f64>, rebuilt: &DMatrix<f64>, what: &'static str) -> Result<()> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let bound = RECONSTRUCTION_SLACK * f64::EPSILON * scale * (a.nrows().max(a.ncols()) as f64);
    let err = (a - rebuilt).amax();
    if err <= bound {
        Ok(())
    } else {
        Err(Error::NoConvergence(what))
    }
}

pub fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    if a.is_empty() {
        return Ok(Svd {
            u: DMatrix::zeros(a.nrows(), 0),
            singular_values: Vec::new(),
            v: DMatrix::zeros(a.ncols(), 0),
        });
    }
    let f = to_faer(a)
        .thin_svd()
        .map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    let out = Svd {
        u: to_nalgebra(f.U()),
        singular_values: f.S().column_vector().iter().copied().collect(),
        v: to_nalgebra(f.V()),
    };
    let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&out.singular_values));
    check(
        a,
        &(&out.u * sigma * out.v.transpose()),
        "singular value decomposition",
    )?;
    Ok(out)
}

/// Eigendecomposition of the symmetric part of `a`.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let sym = (a + a.transpose()) * 0.5;
    if sym.is_empty() {
        return Ok(SymmetricEigen {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let f = to_faer(&sym)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence("symmetric eigendecomposition"))?;
    let out = SymmetricEigen {
        eigenvalues: f.S().column_vector().iter().copied().collect(),
        eigenvectors: to_nalgebra(f.U()),
    };
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&out.eigenvalues));
    check(
        &sym,
        &(&out.eigenvectors * lam * out.eigenvectors.transpose()),
        "symmetric eigendecomposition",
    )?;
    Ok(out)
}

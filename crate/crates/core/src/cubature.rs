//! Construction and verification of Gaussian cubature rules.
//!
//! Two routes are kept side by side:
//!
//! * Moment completion: replace the degree-`2m` moments by the ones implied
//!   by a solution `u` of the existence system and check that the resulting
//!   moment matrix, written in the orthonormal basis, is flat.
//! * Multiplication operators: compress `f -> x_i f` onto the polynomials of
//!   degree `<= m - 1`. The `n` compressed operators commute exactly when a
//!   Gaussian rule exists; their joint eigenvalues are then its nodes.
//!
//! Nodes are extracted from the operators (which only need moments up to
//! degree `2m - 1`), and weights from the interpolation conditions on the
//! orthonormal polynomials of degree `<= m - 1`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::indexing::{dim_homog, dim_total, glex_enumerate, MultiIndex};
use crate::linalg;
use crate::measures::{localizing_matrix, MomentSequence, Provenance};
use crate::ortho::{eval_block, gram_in_ortho_basis, OrthoBasis};

/// Attempts at drawing a random combination with a simple spectrum.
pub const MAX_SPECTRUM_DRAWS: usize = 5;

/// Relative eigenvalue gap below which the spectrum counts as degenerate.
const MIN_GAP: f64 = 1e-7;
/// A draw with at least this relative gap is taken without trying more.
/// Eigenvector errors scale like `eps / gap`, so small gaps cost accuracy.
const GOOD_GAP: f64 = 1e-2;
/// Relative resolution of the node ordering.
const SORT_GRID: f64 = 1e-8;

/// Moments that agree with `y` below degree `2m` and carry the degree-`2m`
/// block implied by `u`.
#[derive(Clone, Debug)]
pub struct ExtendedMoments {
    pub z: MomentSequence,
    pub m: usize,
    /// `max |L_z(P_kappa) - u_kappa|` over `|kappa| = 2m`.
    pub consistency_error: f64,
}

pub fn complete_moments(
    y: &MomentSequence,
    basis: &OrthoBasis,
    u: &[f64],
    m: usize,
) -> Result<ExtendedMoments> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let n = y.dim();
    basis.require_degree(2 * m, "moment completion")?;
    y.require_degree(2 * m - 1, "moment completion")?;
    let r2m = dim_homog(n, 2 * m)? as usize;
    if u.len() != r2m {
        return Err(Error::LengthMismatch {
            expected: r2m,
            found: u.len(),
        });
    }
    let low = dim_total(n, 2 * m - 1)? as usize;
    let top = basis.block(2 * m);
    let s = basis.matrix();

    // u = S_{2m} L_z(x^{2m}) + Theta y_{<2m}, solved by forward substitution.
    let mut rhs: Vec<f64> = top
        .clone()
        .zip(u)
        .map(|(row, &uk)| uk - (0..low).map(|c| s[(row, c)] * y.by_rank(c)).sum::<f64>())
        .collect();
    let diag_max = top.clone().map(|r| s[(r, r)].abs()).fold(0.0, f64::max);
    for (i, row) in top.clone().enumerate() {
        let d = s[(row, row)];
        if !(d.abs() > 1e-14 * diag_max) {
            return Err(Error::SingularBasis(2 * m));
        }
        let mut acc = rhs[i];
        for (k, col) in top.clone().enumerate().take(i) {
            acc -= s[(row, col)] * rhs[k];
        }
        rhs[i] = acc / d;
    }

    let mut values = y.values()[..low].to_vec();
    values.extend_from_slice(&rhs);
    let z = MomentSequence::new(
        n,
        2 * m,
        values,
        y.is_normalized(),
        y.scale(),
        Provenance::Derived(format!("degree-{} completion of {}", 2 * m, y.provenance())),
    )?;

    let consistency_error = top
        .clone()
        .zip(u)
        .map(|(row, &uk)| {
            let lz: f64 = (0..top.end).map(|c| s[(row, c)] * z.by_rank(c)).sum();
            (lz - uk).abs()
        })
        .fold(0.0, f64::max);
    let u_scale = u.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if consistency_error > 1e-9 * u_scale {
        return Err(Error::SingularBasis(2 * m));
    }
    Ok(ExtendedMoments {
        z,
        m,
        consistency_error,
    })
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub flat: bool,
    pub min_eigenvalue: f64,
    /// `max |L_z(P_gamma P_beta)|` over `|gamma| = |beta| = m`.
    pub block_norm: f64,
    /// Numerical rank of `Mbar_m(z)`.
    pub rank: usize,
    /// `s_{m-1}`, the rank a flat extension must have.
    pub expected_rank: usize,
}

/// Checks that `Mbar_m(z)` is PSD with a vanishing degree-`m` diagonal block,
/// which makes its rank equal to that of `Mbar_{m-1}(z)`.
pub fn flatness_check(
    z: &MomentSequence,
    basis: &OrthoBasis,
    m: usize,
    tol: f64,
) -> Result<FlatnessReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let g = gram_in_ortho_basis(z, basis, m)?.matrix;
    let blk = basis.block(m);
    let mut block_norm = 0.0f64;
    for i in blk.clone() {
        for j in blk.clone() {
            block_norm = block_norm.max(g[(i, j)].abs());
        }
    }
    let eig = linalg::symmetric_eigen(&g)?.eigenvalues;
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
    let lam_max = eig.last().copied().unwrap_or(0.0).max(1.0);
    let rank = eig.iter().filter(|&&l| l > tol * lam_max).count();
    let expected_rank = dim_total(z.dim(), m - 1)? as usize;
    let flat = min_eigenvalue >= -tol * lam_max && block_norm <= tol && rank == expected_rank;
    Ok(FlatnessReport {
        flat,
        min_eigenvalue,
        block_norm,
        rank,
        expected_rank,
    })
}

/// The compressed coordinate multiplications `N_i[beta, alpha] = L_y(x_i P_alpha P_beta)`,
/// `|alpha|, |beta| <= m - 1`.
#[derive(Clone, Debug)]
pub struct MultiplicationOperators {
    pub m: usize,
    pub ops: Vec<DMatrix<f64>>,
}

impl MultiplicationOperators {
    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    pub fn size(&self) -> usize {
        self.ops.first().map_or(0, |o| o.nrows())
    }

    /// Commutation defect divided by `max(1, max_i ||N_i||_max)^2`.
    pub fn relative_commutation_defect(&self) -> f64 {
        let norm = self.ops.iter().map(|o| o.amax()).fold(1.0, f64::max);
        commutation_defect(self) / (norm * norm)
    }
}

pub fn multiplication_operators(
    y: &MomentSequence,
    basis: &OrthoBasis,
    m: usize,
) -> Result<MultiplicationOperators> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    basis.require_degree(m - 1, "multiplication operators")?;
    y.require_degree(2 * m - 1, "multiplication operators")?;
    let s = basis.leading(m - 1);
    let n = y.dim();
    let ops = (0..n)
        .map(|i| {
            let h = localizing_matrix(y, m - 1, &MultiIndex::unit(n, i))?;
            let op = &s * h * s.transpose();
            Ok((&op + op.transpose()) * 0.5)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiplicationOperators { m, ops })
}

/// `max_{i<j} ||N_i N_j - N_j N_i||_max`.
pub fn commutation_defect(ops: &MultiplicationOperators) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..ops.ops.len() {
        for j in i + 1..ops.ops.len() {
            let c = &ops.ops[i] * &ops.ops[j] - &ops.ops[j] * &ops.ops[i];
            defect = defect.max(c.amax());
        }
    }
    defect
}

/// Joint eigenvalues of commuting operators, sorted lexicographically.
///
/// A seeded random convex combination of the operators is diagonalized; its
/// eigenvectors diagonalize every operator when they commute and the spectrum
/// is simple, and node coordinates are the Rayleigh quotients.
pub fn extract_nodes(ops: &MultiplicationOperators, tol: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let defect = ops.relative_commutation_defect();
    if defect > tol {
        return Err(Error::NonCommuting { defect, tol });
    }
    let n = ops.dim();
    let size = ops.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for _ in 0..MAX_SPECTRUM_DRAWS {
        let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = c.iter().sum();
        c.iter_mut().for_each(|v| *v /= total);
        let mut comb = DMatrix::zeros(size, size);
        for (ci, op) in c.iter().zip(&ops.ops) {
            comb += op * *ci;
        }
        let eig = linalg::symmetric_eigen(&comb)?;
        let lams = &eig.eigenvalues;
        let spread = lams.iter().fold(1.0f64, |a, l| a.max(l.abs()));
        let gap = lams
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            / spread;
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, eig.eigenvectors));
        }
        if gap >= GOOD_GAP {
            break;
        }
    }
    let vectors = match best {
        Some((gap, v)) if gap > MIN_GAP => v,
        _ => return Err(Error::DegenerateSpectrum(MAX_SPECTRUM_DRAWS)),
    };
    let mut nodes: Vec<Vec<f64>> = (0..size)
        .map(|k| {
            let v = vectors.column(k);
            ops.ops.iter().map(|op| v.dot(&(op * v))).collect()
        })
        .collect();
    // Sort on a coarse grid so round-off (e.g. +-1e-30 for a zero coordinate)
    // cannot change the order between runs.
    let scale = nodes.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    let grid = SORT_GRID * scale;
    nodes.sort_by_cached_key(|x| {
        x.iter()
            .map(|v| (v / grid).round() as i64)
            .collect::<Vec<_>>()
    });
    Ok(nodes)
}

/// Weights from `sum_k w_k P_alpha(x_k) = L_y(P_alpha)` for `|alpha| <= m - 1`,
/// rescaled by the measure mass. Every weight must exceed `weight_tol * mass`.
pub fn compute_weights(
    y: &MomentSequence,
    basis: &OrthoBasis,
    nodes: &[Vec<f64>],
    m: usize,
    weight_tol: f64,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    basis.require_degree(m - 1, "weights")?;
    let size = dim_total(y.dim(), m - 1)? as usize;
    if nodes.len() != size {
        return Err(Error::LengthMismatch {
            expected: size,
            found: nodes.len(),
        });
    }
    let mut v = DMatrix::zeros(size, size);
    for (k, x) in nodes.iter().enumerate() {
        if x.len() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: y.dim(),
                found: x.len(),
            });
        }
        let vals = basis.eval_upto(m - 1, x);
        v.set_column(k, &DVector::from_vec(vals));
    }
    // L_y(P_alpha) = delta_{alpha = 0} for a probability functional.
    let mut rhs = DVector::zeros(size);
    rhs[0] = y.mass();
    let w = v.lu().solve(&rhs).ok_or(Error::SingularInterpolation)?;
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularInterpolation);
    }
    let mass = y.scale() * y.mass();
    let weights: Vec<f64> = w.iter().map(|x| x * y.scale()).collect();
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, &x)| !(x > weight_tol * mass))
    {
        return Err(Error::NonPositiveWeight { index, value });
    }
    Ok(weights)
}

/// A cubature rule `sum_k w_k f(x_k)` of degree `2m - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubatureRule {
    pub n: usize,
    pub m: usize,
    pub nodes: Vec<Vec<f64>>,
    /// Weights for the original (un-normalized) measure.
    pub weights: Vec<f64>,
    /// Mass of the measure; `weights / scale` is the probability rule.
    pub scale: f64,
}

impl CubatureRule {
    pub fn precision(&self) -> usize {
        2 * self.m - 1
    }

    pub fn apply(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }

    /// Moments of the atomic measure `sum_k (w_k / scale) delta_{x_k}` up to degree `d`.
    pub fn probability_moments(&self, d: usize) -> Result<MomentSequence> {
        let table = glex_enumerate(self.n, d)?;
        let values = table
            .iter()
            .map(|a| self.apply(|x| a.eval(x)) / self.scale)
            .collect();
        MomentSequence::new(
            self.n,
            d,
            values,
            false,
            self.scale,
            Provenance::Derived("atomic measure of a cubature rule".into()),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactnessReport {
    pub degree: usize,
    /// `max_alpha |sum_k w_k x_k^alpha - y_alpha * scale|`.
    pub max_abs_error: f64,
    /// Same, divided by `max(1, |y_alpha| * scale)`.
    pub max_rel_error: f64,
    pub worst_index: String,
    pub min_weight: f64,
    pub weight_sum: f64,
    /// `max_k ||P_m(x_k)||_inf`, when the basis reaches degree `m`.
    pub node_residual: Option<f64>,
    /// Nodes strictly inside the declared support box, when one is declared.
    pub interior: Option<bool>,
}

pub fn verify_exactness(
    rule: &CubatureRule,
    y: &MomentSequence,
    basis: Option<&OrthoBasis>,
    degree: usize,
) -> Result<ExactnessReport> {
    if rule.n != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            found: rule.n,
        });
    }
    y.require_degree(degree, "exactness check")?;
    let table = glex_enumerate(y.dim(), degree)?;
    let mut max_abs_error = 0.0f64;
    let mut max_rel_error = 0.0f64;
    let mut worst = MultiIndex::zero(y.dim());
    for alpha in table.iter() {
        let exact = y.get(alpha).unwrap() * y.scale();
        let approx = rule.apply(|x| alpha.eval(x));
        let err = (approx - exact).abs();
        if err > max_abs_error {
            max_abs_error = err;
            worst = alpha.clone();
        }
        max_rel_error = max_rel_error.max(err / exact.abs().max(1.0));
    }
    let node_residual = basis.filter(|b| b.degree() >= rule.m).map(|b| {
        rule.nodes
            .iter()
            .map(|x| {
                eval_block(b, rule.m, x)
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()))
            })
            .fold(0.0, f64::max)
    });
    let interior = y.support_box().map(|bx| {
        rule.nodes
            .iter()
            .all(|x| x.iter().zip(&bx).all(|(&c, &(lo, hi))| lo < c && c < hi))
    });
    Ok(ExactnessReport {
        degree,
        max_abs_error,
        max_rel_error,
        worst_index: worst.to_string(),
        min_weight: rule.weights.iter().copied().fold(f64::INFINITY, f64::min),
        weight_sum: rule.weights.iter().sum(),
        node_residual,
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::existence::{assemble_system, solve_existence};
    use crate::measures::{catalog_moments, MeasureSpec};
    use crate::ortho::build_orthobasis;

    fn catalog(s: &str, d: usize) -> MomentSequence {
        let spec: MeasureSpec = s.parse().unwrap();
        catalog_moments(&spec, spec.dim().unwrap(), d).unwrap()
    }

    #[test]
    fn completion_gives_one_point_rule_moments() {
        let y = catalog("lebesgue^1", 4);
        let b = build_orthobasis(&y, 2).unwrap();
        let ext = complete_moments(&y, &b, &[-5f64.sqrt() / 2.0], 1).unwrap();
        assert_eq!(ext.z.values()[..2], y.values()[..2]);
        assert!(ext.z.values()[2].abs() < 1e-15);
        assert!(ext.consistency_error < 1e-14);

        let flat = flatness_check(&ext.z, &b, 1, 1e-8).unwrap();
        assert!(flat.flat);
        assert_eq!(flat.rank, 1);

        let bumped = complete_moments(&y, &b, &[-5f64.sqrt() / 2.0 + 0.1], 1).unwrap();
        let f = flatness_check(&bumped.z, &b, 1, 1e-8).unwrap();
        assert!(!f.flat);
        assert!(f.block_norm > 1e-3);

        assert!(matches!(
            complete_moments(&y, &b, &[0.0, 1.0], 1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn unmodified_moments_are_not_flat() {
        let y = catalog("lebesgue^2", 4);
        let b = build_orthobasis(&y, 2).unwrap();
        let f = flatness_check(&y, &b, 2, 1e-8).unwrap();
        assert!(!f.flat);
        assert!((f.block_norm - 1.0).abs() < 1e-10);
        assert_eq!(f.rank, 6);
    }

    #[test]
    fn completion_matches_block_structure() {
        let y = catalog("symmetrized:0.5", 8);
        let b = build_orthobasis(&y, 4).unwrap();
        let sys = assemble_system(&y, &b, 2).unwrap();
        let v = solve_existence(&sys, 1e-8).unwrap();
        assert!(v.exists, "{}", v.relative_residual);
        let ext = complete_moments(&y, &b, &v.u, 2).unwrap();
        let g = gram_in_ortho_basis(&ext.z, &b, 2).unwrap().matrix;
        let low = b.block(1).end;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i < low && i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-8, "({i},{j}) = {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn jacobi_matrix_in_one_dimension() {
        let y = catalog("lebesgue^1", 3);
        let b = build_orthobasis(&y, 1).unwrap();
        let ops = multiplication_operators(&y, &b, 2).unwrap();
        let r3 = 1.0 / 3f64.sqrt();
        let want = DMatrix::from_row_slice(2, 2, &[0.0, r3, r3, 0.0]);
        assert!((&ops.ops[0] - want).amax() < 1e-15);
        assert_eq!(commutation_defect(&ops), 0.0);
    }

    #[test]
    fn gauss_legendre_three_points() {
        let y = catalog("lebesgue^1", 6);
        let b = build_orthobasis(&y, 3).unwrap();
        let ops = multiplication_operators(&y, &b, 3).unwrap();
        let nodes = extract_nodes(&ops, 1e-8, 7).unwrap();
        let r = (0.6f64).sqrt();
        let want = [-r, 0.0, r];
        for (x, w) in nodes.iter().zip(want) {
            assert!((x[0] - w).abs() < 1e-12);
        }
        let weights = compute_weights(&y, &b, &nodes, 3, 1e-10).unwrap();
        let want = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        for (a, w) in weights.iter().zip(want) {
            assert!((a - w).abs() < 1e-12, "{a} vs {w}");
        }
        let rule = CubatureRule {
            n: 1,
            m: 3,
            nodes,
            weights,
            scale: y.scale(),
        };
        let rep = verify_exactness(&rule, &y, Some(&b), 5).unwrap();
        assert!(rep.max_abs_error < 1e-12);
        assert!((rep.weight_sum - 2.0).abs() < 1e-14);
        assert!(rep.node_residual.unwrap() < 1e-8);
        assert_eq!(rep.interior, Some(true));
    }

    #[test]
    fn single_node_rule() {
        let y = catalog("lebesgue^1", 2);
        let b = build_orthobasis(&y, 0).unwrap();
        let ops = multiplication_operators(&y, &b, 1).unwrap();
        let nodes = extract_nodes(&ops, 1e-8, 0).unwrap();
        assert_eq!(nodes, vec![vec![0.0]]);
        let w = compute_weights(&y, &b, &nodes, 1, 1e-10).unwrap();
        assert_eq!(w, vec![2.0]);
    }

    #[test]
    fn product_lebesgue_does_not_commute() {
        let y = catalog("lebesgue^2", 3);
        let b = build_orthobasis(&y, 1).unwrap();
        let ops = multiplication_operators(&y, &b, 2).unwrap();
        for op in &ops.ops {
            assert!((op - op.transpose()).amax() == 0.0);
        }
        assert!(ops.relative_commutation_defect() > 1e-6);
        assert!(matches!(
            extract_nodes(&ops, 1e-8, 1),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn symmetrized_two_d_rule() {
        let y = catalog("symmetrized:0.5", 4);
        let b = build_orthobasis(&y, 2).unwrap();
        let ops = multiplication_operators(&y, &b, 2).unwrap();
        assert!(ops.relative_commutation_defect() <= 1e-8);
        let nodes = extract_nodes(&ops, 1e-8, 42).unwrap();
        assert_eq!(nodes.len(), 3);
        let w = compute_weights(&y, &b, &nodes, 2, 1e-10).unwrap();
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn weights_need_distinct_nodes() {
        let y = catalog("lebesgue^1", 6);
        let b = build_orthobasis(&y, 3).unwrap();
        let nodes = vec![vec![0.1], vec![0.1], vec![0.5]];
        assert!(matches!(
            compute_weights(&y, &b, &nodes, 3, 1e-10),
            Err(Error::SingularInterpolation)
        ));
        // Interpolatory but not Gaussian: one weight comes out negative.
        let nodes = vec![vec![-0.9], vec![0.8], vec![0.9]];
        assert!(matches!(
            compute_weights(&y, &b, &nodes, 3, 1e-10),
            Err(Error::NonPositiveWeight { .. })
        ));
    }
}

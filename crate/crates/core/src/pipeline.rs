//! End-to-end helpers shared by the CLI, the FFI layer and the tests.

use crate::cubature::{
    compute_weights, extract_nodes, multiplication_operators, verify_exactness, CubatureRule,
    ExactnessReport,
};
use crate::error::{Error, Result};
use crate::existence::{assemble_system, solve_existence, ExpansionSystem, Verdict};
use crate::measures::{normalize_probability, MomentSequence};
use crate::ortho::{build_orthobasis, OrthoBasis};

pub const DEFAULT_EXISTENCE_TOL: f64 = 1e-8;
pub const DEFAULT_COMMUTATION_TOL: f64 = 1e-8;
pub const DEFAULT_FLATNESS_TOL: f64 = 1e-8;
pub const DEFAULT_WEIGHT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubatureOptions {
    pub existence_tol: f64,
    pub commutation_tol: f64,
    pub flatness_tol: f64,
    /// Weights must exceed `weight_tol * mass`.
    pub weight_tol: f64,
    pub seed: u64,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        CubatureOptions {
            existence_tol: DEFAULT_EXISTENCE_TOL,
            commutation_tol: DEFAULT_COMMUTATION_TOL,
            flatness_tol: DEFAULT_FLATNESS_TOL,
            weight_tol: DEFAULT_WEIGHT_TOL,
            seed: DEFAULT_SEED,
        }
    }
}

impl CubatureOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("existence tolerance", self.existence_tol),
            ("commutation tolerance", self.commutation_tol),
            ("flatness tolerance", self.flatness_tol),
            ("weight tolerance", self.weight_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything the existence test produces for one `(y, m)`.
#[derive(Clone, Debug)]
pub struct ExistenceRun {
    /// Probability-normalized moments.
    pub y: MomentSequence,
    /// Orthonormal basis to degree `2m`.
    pub basis: OrthoBasis,
    pub system: ExpansionSystem,
    pub verdict: Verdict,
}

pub fn run_existence(y: &MomentSequence, m: usize, tol: f64) -> Result<ExistenceRun> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    y.require_degree(4 * m, "existence test")?;
    let y = normalize_probability(y)?;
    let basis = build_orthobasis(&y, 2 * m)?;
    let system = assemble_system(&y, &basis, m)?;
    let verdict = solve_existence(&system, tol)?;
    Ok(ExistenceRun {
        y,
        basis,
        system,
        verdict,
    })
}

/// Builds the rule from the multiplication operators. Needs moments to
/// degree `2m - 1` and a basis to degree `m - 1`; the degree-`m` basis is
/// used for the node residual when available.
pub fn build_rule(
    y: &MomentSequence,
    basis: &OrthoBasis,
    m: usize,
    opts: &CubatureOptions,
) -> Result<(CubatureRule, ExactnessReport)> {
    let ops = multiplication_operators(y, basis, m)?;
    let nodes = extract_nodes(&ops, opts.commutation_tol, opts.seed)?;
    let weights = compute_weights(y, basis, &nodes, m, opts.weight_tol)?;
    let rule = CubatureRule {
        n: y.dim(),
        m,
        nodes,
        weights,
        scale: y.scale(),
    };
    let report = verify_exactness(&rule, y, Some(basis), 2 * m - 1)?;
    Ok((rule, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{catalog_moments, MeasureSpec};

    #[test]
    fn lebesgue_three_point_rule_end_to_end() {
        let spec: MeasureSpec = "lebesgue^1".parse().unwrap();
        let y = catalog_moments(&spec, 1, 12).unwrap();
        let run = run_existence(&y, 3, DEFAULT_EXISTENCE_TOL).unwrap();
        assert!(run.verdict.exists);
        let (rule, rep) = build_rule(&run.y, &run.basis, 3, &CubatureOptions::default()).unwrap();
        assert_eq!(rule.nodes.len(), 3);
        assert!(rep.max_abs_error < 1e-12);
        assert!((rep.weight_sum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn options_are_validated() {
        let mut o = CubatureOptions::default();
        assert!(o.validate().is_ok());
        o.flatness_tol = 0.0;
        assert!(o.validate().is_err());
        o.flatness_tol = f64::NAN;
        assert!(o.validate().is_err());
    }

    #[test]
    fn zero_m_is_rejected() {
        let spec: MeasureSpec = "lebesgue^1".parse().unwrap();
        let y = catalog_moments(&spec, 1, 4).unwrap();
        assert!(matches!(
            run_existence(&y, 0, 1e-8),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            run_existence(&y, 2, 1e-8),
            Err(Error::InsufficientDegree { .. })
        ));
    }
}

//! Acceptance suite. Runs without the libtest harness so each criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

mod common;

use gauss_cubature::cli::{main_with_args, EXIT_NO_CUBATURE, EXIT_OK};
use gauss_cubature::cubature::{complete_moments, flatness_check, multiplication_operators};
use gauss_cubature::indexing::{dim_homog, dim_total, glex_enumerate, pair_count, pair_rank};
use gauss_cubature::measures::{
    catalog_moments, moment_matrix, normalize_probability, parse_moments, write_moments,
};
use gauss_cubature::ortho::{build_orthobasis, eval_block, ortho_det_oracle};
use gauss_cubature::pipeline::{build_rule, run_existence, ExistenceRun};
use gauss_cubature::qcheck::{build_q, verify_gram_identity, verify_rule_identities, QSign};
use gauss_cubature::{CubatureOptions, CubatureRule, MeasureSpec, MomentSequence, WeightTag};
use nalgebra::DMatrix;
use std::path::Path;
use std::time::Instant;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn catalog(spec: &str, d: usize) -> MomentSequence {
    let spec: MeasureSpec = spec.parse().expect("catalog spec");
    catalog_moments(&spec, spec.dim().unwrap(), d).expect("catalog moments")
}

fn existence(spec: &str, m: usize) -> ExistenceRun {
    run_existence(&catalog(spec, 4 * m), m, 1e-8).expect("existence run")
}

fn rule_for(run: &ExistenceRun, m: usize) -> std::result::Result<CubatureRule, String> {
    build_rule(&run.y, &run.basis, m, &CubatureOptions::default())
        .map(|(r, _)| r)
        .map_err(|e| e.to_string())
}

/// Every instance on which a Gaussian rule is expected.
fn yes_instances() -> Vec<(String, usize)> {
    let mut v = Vec::new();
    for tag in WeightTag::ALL {
        for m in 1..=6 {
            v.push((format!("{}^1", tag.name()), m));
        }
    }
    v.push(("symmetrized:0.5".into(), 2));
    v.push(("symmetrized:0.5".into(), 3));
    v
}

fn one_dim_equivalence() -> Check {
    let mut worst = 0.0f64;
    let mut worst_res = 0.0f64;
    for tag in WeightTag::ALL {
        for m in 1..=6 {
            let spec = format!("{}^1", tag.name());
            let run = existence(&spec, m);
            ensure(
                run.verdict.exists && run.verdict.relative_residual <= 1e-10,
                || format!("{spec} m={m}: residual {:e}", run.verdict.relative_residual),
            )?;
            worst_res = worst_res.max(run.verdict.relative_residual);
            let rule = rule_for(&run, m)?;
            let (x, w) = common::gauss_rule(tag, m);
            ensure(rule.nodes.len() == m, || {
                format!("{spec} m={m}: node count")
            })?;
            for k in 0..m {
                let dx = (rule.nodes[k][0] - x[k]).abs();
                let dw = (rule.weights[k] / rule.scale - w[k]).abs();
                worst = worst.max(dx).max(dw);
                ensure(dx <= 1e-8 && dw <= 1e-8, || {
                    format!("{spec} m={m} node {k}: dx={dx:e} dw={dw:e}")
                })?;
            }
        }
    }
    let run = existence("lebesgue^1", 3);
    let rule = rule_for(&run, 3)?;
    let r = 0.6f64.sqrt();
    let want = [(-r, 5.0 / 18.0), (0.0, 4.0 / 9.0), (r, 5.0 / 18.0)];
    for (k, (x, w)) in want.iter().enumerate() {
        ensure(
            (rule.nodes[k][0] - x).abs() <= 1e-8
                && (rule.weights[k] / rule.scale - w).abs() <= 1e-8,
            || format!("explicit three-point rule, node {k}"),
        )?;
    }
    Ok(format!(
        "24 cases, max residual {worst_res:.1e}, max node/weight gap {worst:.1e}"
    ))
}

fn one_point_system() -> Check {
    let run = existence("lebesgue^1", 1);
    let sys = &run.system;
    ensure(sys.rows() == 1 && sys.cols() == 1, || {
        "system is not 1x1".into()
    })?;
    let coef = sys.a2m[(0, 0)];
    let want = 2.0 * 5f64.sqrt() / 5.0;
    ensure((coef - want).abs() <= 1e-12, || {
        format!("coefficient {coef}")
    })?;
    let u = run.verdict.u[0];
    ensure((u + 5f64.sqrt() / 2.0).abs() <= 1e-12, || {
        format!("u = {u}")
    })?;
    // u = sum_k w_k P_2(x_k) from the one-point Gauss rule (node 0, weight 1).
    let rule = rule_for(&run, 1)?;
    let from_rule: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w / rule.scale * eval_block(&run.basis, 2, x)[0])
        .sum();
    ensure((from_rule - u).abs() <= 1e-12, || {
        format!("rule gives {from_rule}, u = {u}")
    })?;
    Ok(format!("A = [{coef:.15}], u = {u:.15}"))
}

fn negative_case() -> Check {
    let tol = 1e-8;
    let mut notes = Vec::new();
    for spec in ["lebesgue^2", "chebyshev1^2"] {
        let run = existence(spec, 2);
        let ops = multiplication_operators(&run.y, &run.basis, 2).map_err(|e| e.to_string())?;
        let defect = ops.relative_commutation_defect();
        ensure(!run.verdict.exists, || format!("{spec}: verdict YES"))?;
        ensure(defect > 100.0 * tol, || {
            format!("{spec}: defect {defect:e}")
        })?;
        ensure(run.system.rows() == 6 && run.system.cols() == 5, || {
            "shape".into()
        })?;
        let code = main_with_args(["gc", "exists", "--catalog", spec, "--m", "2"]).code;
        ensure(code == EXIT_NO_CUBATURE, || format!("{spec}: exit {code}"))?;
        notes.push(format!(
            "{spec} residual {:.3} defect {defect:.3}",
            run.verdict.relative_residual
        ));
    }
    Ok(notes.join("; "))
}

fn symmetrized_case() -> Check {
    let mut notes = Vec::new();
    for m in [2, 3] {
        let run = existence("symmetrized:0.5", m);
        ensure(run.verdict.exists, || {
            format!("m={m}: residual {:e}", run.verdict.relative_residual)
        })?;
        let ops = multiplication_operators(&run.y, &run.basis, m).map_err(|e| e.to_string())?;
        let defect = ops.relative_commutation_defect();
        ensure(defect <= 1e-8, || format!("m={m}: defect {defect:e}"))?;
        let rule = rule_for(&run, m)?;
        let s = dim_total(2, m - 1).unwrap() as usize;
        ensure(rule.nodes.len() == s, || {
            format!("m={m}: {} nodes", rule.nodes.len())
        })?;
        ensure(rule.weights.iter().all(|&w| w > 0.0), || {
            format!("m={m}: weight sign")
        })?;
        let mut err = 0.0f64;
        for a in glex_enumerate(2, 2 * m - 1).unwrap().iter() {
            let approx = rule.apply(|x| a.eval(x)) / rule.scale;
            err = err.max((approx - run.y.get(a).unwrap()).abs());
        }
        ensure(err <= 1e-8, || format!("m={m}: exactness {err:e}"))?;
        notes.push(format!(
            "m={m}: {s} nodes, defect {defect:.1e}, exactness {err:.1e}"
        ));
    }
    Ok(notes.join("; "))
}

fn certificate_identity() -> Check {
    let mut worst = 0.0f64;
    for (spec, m) in yes_instances() {
        let run = existence(&spec, m);
        let q =
            build_q(&run.basis, &run.verdict.u, m, QSign::Negated).map_err(|e| e.to_string())?;
        let cor = verify_gram_identity(&run.y, &run.basis, &q, m).map_err(|e| e.to_string())?;
        let rule = rule_for(&run, m)?;
        let rem =
            verify_rule_identities(&run.y, &run.basis, &q, m, &rule).map_err(|e| e.to_string())?;
        let d = cor.deviation.max(rem.lower_orthogonality).max(rem.integral);
        ensure(d <= 1e-8, || {
            format!(
                "{spec} m={m}: gram {:e}, lower {:e}, integral {:e}",
                cor.deviation, rem.lower_orthogonality, rem.integral
            )
        })?;
        worst = worst.max(d);
    }
    Ok(format!(
        "{} instances, worst deviation {worst:.1e}",
        yes_instances().len()
    ))
}

fn structural_invariants() -> Check {
    // Orthonormality and the determinant oracle.
    let mut ortho_err = 0.0f64;
    let mut det_err = 0.0f64;
    for (spec, d) in [
        ("lebesgue^1", 8),
        ("hermite^1", 8),
        ("chebyshev1^2", 4),
        ("lebesgue^3", 3),
        ("symmetrized:0.5", 4),
    ] {
        let y = normalize_probability(&catalog(spec, 2 * d)).unwrap();
        let b = build_orthobasis(&y, d).map_err(|e| e.to_string())?;
        let m = moment_matrix(&y, d).unwrap().matrix;
        let g = b.matrix() * m * b.matrix().transpose();
        let e = (g - DMatrix::<f64>::identity(b.matrix().nrows(), b.matrix().nrows())).amax();
        ensure(e <= 1e-10, || format!("{spec}: orthonormality {e:e}"))?;
        ortho_err = ortho_err.max(e);
        let table = glex_enumerate(y.dim(), d.min(3)).unwrap();
        for sigma in table.iter() {
            let p = b.poly_of(sigma).unwrap();
            let o = ortho_det_oracle(&y, sigma).map_err(|e| e.to_string())?;
            let gap = p
                .coeffs()
                .iter()
                .zip(o.coeffs())
                .map(|(a, c)| (a - c).abs())
                .fold(0.0, f64::max);
            ensure(gap <= 1e-9, || format!("{spec} sigma {sigma}: {gap:e}"))?;
            det_err = det_err.max(gap);
        }
    }

    // Glex ranks and pair ranks are bijections.
    for n in 1..=4 {
        let table = glex_enumerate(n, 6).unwrap();
        for (i, a) in table.iter().enumerate() {
            ensure(a.glex_rank() == i && table.rank(a) == Some(i), || {
                format!("glex rank {a}")
            })?;
        }
        for m in 1..=4 {
            let blk = table.degree_block(m);
            let t = pair_count(n, m).unwrap() as usize;
            let mut seen = vec![false; t];
            for i in blk.clone() {
                for j in blk.clone().filter(|&j| j >= i) {
                    let r = pair_rank(table.get(i), table.get(j), m).unwrap();
                    ensure(r < t && !seen[r], || format!("pair rank n={n} m={m}"))?;
                    seen[r] = true;
                }
            }
            ensure(seen.iter().all(|&s| s), || {
                format!("pair rank not onto n={n} m={m}")
            })?;
        }
    }

    // a0 is the vectorized Kronecker delta.
    for (spec, m) in [("lebesgue^2", 2), ("symmetrized:0.5", 3), ("hermite^1", 3)] {
        let run = existence(spec, m);
        let n = run.y.dim();
        let table = glex_enumerate(n, m).unwrap();
        let blk = table.degree_block(m);
        for i in blk.clone() {
            for j in blk.clone().filter(|&j| j >= i) {
                let r = pair_rank(table.get(i), table.get(j), m).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                ensure(run.system.a0[r] == want, || format!("{spec}: a0[{r}]"))?;
            }
        }
    }

    // More equations than unknowns for n >= 2, m >= 2.
    for n in 2..=4 {
        for m in 2..=4 {
            let (t, r) = (pair_count(n, m).unwrap(), dim_homog(n, 2 * m).unwrap());
            ensure(t > r, || format!("n={n} m={m}: t={t} r={r}"))?;
        }
    }

    // Moment files round-trip bit-exactly.
    for spec in [
        "hermite^2",
        "symmetrized:0.5",
        "lebesgue*chebyshev2*chebyshev1",
    ] {
        let y = catalog(spec, 6);
        let mut buf = Vec::new();
        write_moments(&y, &mut buf).unwrap();
        let back = parse_moments(std::str::from_utf8(&buf).unwrap(), Path::new("mem"))
            .map_err(|e| e.to_string())?;
        let same = back.values().len() == y.values().len()
            && back
                .values()
                .iter()
                .zip(y.values())
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && back.scale().to_bits() == y.scale().to_bits();
        ensure(same, || format!("{spec}: round trip differs"))?;
    }
    Ok(format!(
        "orthonormality {ortho_err:.1e}, determinant oracle {det_err:.1e}"
    ))
}

fn flatness_path() -> Check {
    let mut worst_block = 0.0f64;
    let mut worst_gap = 0.0f64;
    for (spec, m) in yes_instances() {
        let run = existence(&spec, m);
        let ext =
            complete_moments(&run.y, &run.basis, &run.verdict.u, m).map_err(|e| e.to_string())?;
        let flat = flatness_check(&ext.z, &run.basis, m, 1e-8).map_err(|e| e.to_string())?;
        let s = dim_total(run.y.dim(), m - 1).unwrap() as usize;
        ensure(flat.rank == s && flat.block_norm <= 1e-8, || {
            format!(
                "{spec} m={m}: rank {} block {:e}",
                flat.rank, flat.block_norm
            )
        })?;
        let rule = rule_for(&run, m)?;
        let atomic = rule.probability_moments(2 * m).map_err(|e| e.to_string())?;
        let gap = atomic
            .values()
            .iter()
            .zip(ext.z.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(gap <= 1e-8, || format!("{spec} m={m}: atomic gap {gap:e}"))?;
        worst_block = worst_block.max(flat.block_norm);
        worst_gap = worst_gap.max(gap);
    }
    Ok(format!(
        "block norm {worst_block:.1e}, atomic gap {worst_gap:.1e}"
    ))
}

fn cli_round_trip() -> std::result::Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("rule.txt");
    let p = path.to_str().unwrap();
    let a = main_with_args([
        "gc",
        "cubature",
        "--catalog",
        "lebesgue^1",
        "--m",
        "3",
        "--out",
        p,
    ]);
    ensure(a.code == EXIT_OK, || a.report.clone())?;
    let b = main_with_args([
        "gc",
        "verify",
        "--rule",
        p,
        "--catalog",
        "lebesgue^1",
        "--tol",
        "1e-10",
    ]);
    ensure(b.code == EXIT_OK, || b.report.clone())
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 7] = [
        ("one-dimensional equivalence", one_dim_equivalence),
        ("one-point system and u", one_point_system),
        ("negative product cases", negative_case),
        ("positive symmetrized case", symmetrized_case),
        ("certificate polynomial identities", certificate_identity),
        ("structural invariants", structural_invariants),
        ("flatness path", flatness_path),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    match cli_round_trip() {
        Ok(()) => println!("cli round trip: PASS"),
        Err(why) => {
            failed += 1;
            println!("cli round trip: FAIL  {why}");
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}

//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! The standard benchmark runs take several minutes on one core; everything
//! else finishes in seconds. Times for criteria 1, 2, 3, 7 and 9 exclude the
//! shared standard runs, which are reported on stderr.

mod common;

use std::time::Instant;

use common::*;
use reservoir_inversion::inverse::{
    build_aggregation, check_gradient, invert_normal, invert_variational, random_wall_vector, Inversion,
    InversionConfig, Method,
};
use reservoir_inversion::scalar::{vecops, Scalar};
use reservoir_inversion::synthetic::{Benchmark, BenchmarkSpec};
use reservoir_inversion::{DoubleDouble, ScalarKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct StandardRuns {
    ext_var: Inversion,
    dbl_var: Inversion,
    dbl_normal: Inversion,
    gradient_errors: Vec<f64>,
}

fn standard_runs() -> StandardRuns {
    let bench = Benchmark::build(&BenchmarkSpec::standard()).expect("standard benchmark builds");
    let p = &bench.partition;
    eprintln!("standard benchmark: n1 {} n2 {} n3 {} ({} DOFs)", p.n1(), p.n2(), p.n3(), p.total());
    let ext = bench.operators::<DoubleDouble>().unwrap();
    let dbl = bench.operators::<f64>().unwrap();
    let u_star = bench.observation(&ext).unwrap();
    let truth = Some(bench.g_star.as_slice());

    let ext_var =
        invert_variational(&ext, &u_star, &InversionConfig::new(Method::Variational, ScalarKind::Extended, 400), None, truth)
            .unwrap();
    let dbl_var =
        invert_variational(&dbl, &u_star, &InversionConfig::new(Method::Variational, ScalarKind::Double, 400), None, truth)
            .unwrap();
    let dbl_normal =
        invert_normal(&dbl, &u_star, &InversionConfig::new(Method::NormalEquation, ScalarKind::Double, 400), None, truth)
            .unwrap();
    let g = random_wall_vector(p.n1(), 1);
    let gradient_errors = check_gradient(&ext, &g, &u_star, 10, 1e-6, 1).unwrap().errors;
    StandardRuns { ext_var, dbl_var, dbl_normal, gradient_errors }
}

fn criterion_1(runs: &StandardRuns) -> Outcome {
    let last = runs.ext_var.record.last().unwrap();
    let err = last.traction_err.unwrap();
    outcome(err <= 0.05, format!("traction error {err:.3e} after {} iterations, {}", last.iter, runs.ext_var.report.termination))
}

fn criterion_2(runs: &StandardRuns) -> Outcome {
    let ext_final = runs.ext_var.record.last().unwrap().residual;
    let dbl = runs.dbl_var.record.residuals();
    let best = dbl.iter().copied().fold(f64::INFINITY, f64::min);
    let at150 = dbl[150.min(dbl.len() - 1)];
    let best_after = dbl[150.min(dbl.len() - 1)..].iter().copied().fold(f64::INFINITY, f64::min);
    let separation = best / ext_final;
    let improvement = at150 / best_after;
    outcome(
        separation >= 1e3 && improvement < 10.0,
        format!(
            "double best {best:.2e} vs extended final {ext_final:.2e} (ratio {separation:.1e}); double gains {improvement:.2}x over 150..={}",
            dbl.len() - 1
        ),
    )
}

fn criterion_3(runs: &StandardRuns) -> Outcome {
    let max = runs.gradient_errors.iter().copied().fold(0.0, f64::max);
    outcome(max <= 1e-6, format!("max relative error {max:.2e} over {} directions", runs.gradient_errors.len()))
}

fn criterion_4() -> Outcome {
    let bench = tiny();
    let p = &bench.partition;
    let ops = bench.operators::<f64>().unwrap();
    let d = DenseBlocks::new(&bench);
    let (n1, n3) = (p.n1(), p.n3());
    let m = matrix_of(n1, n1, |g| ops.apply_variational_operator(g));
    let errs = [
        rel_col_err(&matrix_of(n3, n1, |g| ops.apply_forward(g)), &d.a),
        rel_col_err(&matrix_of(n1, n3, |w| ops.apply_forward_transpose(w)), &d.a.transpose()),
        rel_col_err(&matrix_of(n1, n3, |w| ops.apply_extension_trace(w)), &d.b13),
        rel_col_err(&m, &d.m),
    ];
    let sym = rel_col_err(&m, &m.transpose());
    let worst = errs.iter().copied().fold(0.0, f64::max);
    outcome(
        p.total() <= 300 && worst <= 1e-12 && sym <= 1e-12,
        format!("{} DOFs; worst operator error {worst:.1e}, asymmetry {sym:.1e}", p.total()),
    )
}

fn criterion_5() -> Outcome {
    let bench = tiny();
    let ops = bench.operators::<DoubleDouble>().unwrap();
    let a = columns_of(bench.partition.n1(), |g| ops.apply_forward(g));
    let s = jacobi_singular_values(a.clone());
    let t = jacobi_singular_values(gram(&a));
    let cond_a = s[0] / s[s.len() - 1];
    let cond_ata = t[0] / t[t.len() - 1];
    let rel = ((cond_ata - cond_a * cond_a) / (cond_a * cond_a)).abs().to_f64();
    outcome(rel <= 1e-8, format!("cond(A) {:.4e}, cond(AtA) {:.4e}, relative gap {rel:.1e}", cond_a.to_f64(), cond_ata.to_f64()))
}

fn criterion_6() -> Outcome {
    let bench = underdetermined();
    let p = &bench.partition;
    let ops = bench.operators::<f64>().unwrap();
    let ratio = |m: &nalgebra::DMatrix<f64>| {
        let s = singular_values(&(m.transpose() * m));
        s[s.len() - 1] / s[0]
    };
    let plain = ratio(&matrix_of(p.n3(), p.n1(), |g| ops.apply_forward(g)));
    let agg = build_aggregation(&bench.mesh, p, p.n3() / 3).unwrap();
    let aggregated = ratio(&matrix_of(p.n3(), agg.dim(), |c| ops.apply_forward(&agg.prolong(c))));
    outcome(
        p.n1() > p.n3() && plain < 1e-12 && aggregated > 1e-8,
        format!(
            "n1 {} > n3 {}; ratio {plain:.1e} unaggregated, {aggregated:.1e} with {} clusters",
            p.n1(),
            p.n3(),
            agg.num_clusters()
        ),
    )
}

fn criterion_7(runs: &StandardRuns) -> Outcome {
    let bench = tiny();
    let ext = bench.operators::<DoubleDouble>().unwrap();
    let u_star = bench.observation(&ext).unwrap();
    let var = invert_variational(&ext, &u_star, &InversionConfig::new(Method::Variational, ScalarKind::Extended, 200), None, None)
        .unwrap();
    let nrm = invert_normal(&ext, &u_star, &InversionConfig::new(Method::NormalEquation, ScalarKind::Extended, 400), None, None)
        .unwrap();
    let agree = vecops::rel_diff(&var.estimate, &nrm.estimate);

    // every decade the normal path reaches, the variational path reaches no later
    let mut behind = Vec::new();
    let mut levels = 0;
    for k in 1..=16 {
        let level = 10f64.powi(-k);
        let Some(n) = runs.dbl_normal.record.iterations_to(level) else { break };
        levels += 1;
        match runs.dbl_var.record.iterations_to(level) {
            Some(v) if v <= n => {}
            other => behind.push(format!("1e-{k}: variational {other:?} vs normal {n}")),
        }
    }
    outcome(
        agree <= 1e-5 && behind.is_empty() && levels > 0,
        format!("tiny estimates differ by {agree:.1e}; standard: {levels} residual decades compared, {behind:?} behind"),
    )
}

fn criterion_8() -> Outcome {
    let patch = fem::patch_test_error();
    let kernel = fem::element_kernel_check();
    let suite = rational::oracle_suite(1000, 8);
    let pass = patch <= 1e-10
        && kernel.rigid_residual < 1e-12
        && kernel.kernel_dims.iter().all(|&d| d == 6)
        && suite.error_free
        && suite.normalized
        && suite.arith_eps <= 4.0
        && suite.sqrt_eps <= 8.0;
    outcome(
        pass,
        format!(
            "patch error {patch:.1e}; rigid residual {:.1e}, kernel dims {:?}; rational suite {:.2} eps arithmetic, {:.2} eps sqrt",
            kernel.rigid_residual, kernel.kernel_dims, suite.arith_eps, suite.sqrt_eps
        ),
    )
}

fn criterion_9(runs: &StandardRuns) -> Outcome {
    let j = runs.ext_var.record.costs();
    let worst = j.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    outcome(worst <= 1e-10, format!("{} values, largest increase {worst:.1e}", j.len()))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut timed = |n, title, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        results.push((n, title, o, t.elapsed().as_secs_f64()));
    };
    timed(4, "dense-oracle equivalence on the tiny mesh", &criterion_4);
    timed(5, "cond(AtA) = cond(A)^2 on the tiny mesh", &criterion_5);
    timed(6, "aggregation fixes the under-determined instance", &criterion_6);
    timed(8, "FEM and extended-precision correctness", &criterion_8);

    let t = Instant::now();
    let runs = standard_runs();
    eprintln!("standard benchmark runs finished in {:.1?}", t.elapsed());
    timed(1, "traction recovery, extended variational", &|| criterion_1(&runs));
    timed(2, "precision separation", &|| criterion_2(&runs));
    timed(3, "adjoint gradient vs finite differences", &|| criterion_3(&runs));
    timed(7, "cross-method agreement", &|| criterion_7(&runs));
    timed(9, "cost monotonicity", &|| criterion_9(&runs));

    results.sort_by_key(|r| r.0);
    for (n, title, o, secs) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n}: {title} ({}; {secs:.1}s)", o.detail);
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

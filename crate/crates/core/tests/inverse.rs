mod common;

use common::*;
use nalgebra::DMatrix;
use reservoir_inversion::inverse::{
    adjoint_trace, build_aggregation, check_gradient, evaluate_cost, gradient, invert_normal, invert_variational,
    random_wall_vector, AggregationMap, InverseError, InversionConfig, Method,
};
use reservoir_inversion::scalar::{vecops, Scalar, ScalarKind};
use reservoir_inversion::{DoubleDouble, ScalarKind as Kind};

fn rel(a: &[f64], b: &[f64]) -> f64 {
    vecops::rel_diff(a, b)
}

#[test]
fn zero_data_gives_zero_traction_at_iteration_zero() {
    let bench = tiny();
    let ops = bench.operators::<f64>().unwrap();
    let zero = vec![0.0; bench.partition.n3()];
    for method in [Method::Variational, Method::NormalEquation] {
        let cfg = InversionConfig::new(method, ScalarKind::Double, 10);
        let inv = match method {
            Method::Variational => invert_variational(&ops, &zero, &cfg, None, None),
            Method::NormalEquation => invert_normal(&ops, &zero, &cfg, None, None),
        }
        .unwrap();
        assert_eq!(inv.record.len(), 1);
        assert_eq!(inv.report.iterations, 0);
        assert!(inv.estimate.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn extended_variational_recovers_consistent_truth() {
    let bench = tiny();
    let ext = bench.operators::<DoubleDouble>().unwrap();
    let u_star = bench.observation(&ext).unwrap();
    let cfg = InversionConfig::new(Method::Variational, ScalarKind::Extended, 200);
    let inv = invert_variational(&ext, &u_star, &cfg, None, Some(&bench.g_star)).unwrap();
    assert!(rel(&inv.estimate, &bench.g_star) < 1e-6);

    let rows = &inv.record.rows;
    assert!(rows.iter().all(|r| r.cost.is_some() && r.traction_err.is_some() && r.disp_err.is_some()));
    let costs = inv.record.costs();
    assert!(costs.iter().all(|&j| j >= 0.0));
    assert!(costs[costs.len() - 1] <= 1e-12 * costs[0]);

    // stationarity: the residual of the variational equation is -∇J, so the
    // solver's own residual is the relative gradient in extended precision
    assert!(inv.report.final_residual() <= 1e-20);
    // rounding the estimate to double leaves a gradient at double roundoff
    let g: Vec<DoubleDouble> = vecops::promote(&inv.estimate);
    let u: Vec<DoubleDouble> = vecops::promote(&u_star);
    let grad = vecops::norm(&gradient(&ext, &g, &u)).to_f64();
    let data = vecops::norm(&adjoint_trace(&ext, &u)).to_f64();
    assert!(grad <= 1e-12 * data, "{grad:e} vs {data:e}");
}

#[test]
fn variational_and_normal_estimates_agree() {
    let bench = tiny();
    let ext = bench.operators::<DoubleDouble>().unwrap();
    let u_star = bench.observation(&ext).unwrap();
    let var = invert_variational(
        &ext,
        &u_star,
        &InversionConfig::new(Method::Variational, Kind::Extended, 200),
        None,
        None,
    )
    .unwrap();
    let nrm =
        invert_normal(&ext, &u_star, &InversionConfig::new(Method::NormalEquation, Kind::Extended, 400), None, None)
            .unwrap();
    assert!(rel(&var.estimate, &nrm.estimate) < 1e-5);

    // at a common iteration the normal path is never ahead
    let k = 80.min(var.record.len() - 1).min(nrm.record.len() - 1);
    assert!(nrm.record.rows[k].residual >= var.record.rows[k].residual);
}

#[test]
fn record_holds_one_row_per_iterate() {
    let bench = tiny();
    let ops = bench.operators::<f64>().unwrap();
    let u_star = ops.apply_forward(&bench.g_star);
    for method in [Method::Variational, Method::NormalEquation] {
        let cfg = InversionConfig::new(method, Kind::Double, 1);
        let inv = match method {
            Method::Variational => invert_variational(&ops, &u_star, &cfg, None, Some(&bench.g_star)),
            Method::NormalEquation => invert_normal(&ops, &u_star, &cfg, None, Some(&bench.g_star)),
        }
        .unwrap();
        assert_eq!(inv.record.len(), 2);
        assert_eq!(inv.record.residuals().len(), inv.record.costs().len());
        assert_eq!(inv.record.costs().len(), inv.record.traction_errors().len());
        assert_eq!(inv.record.rows[0].traction_err, Some(1.0));
    }
}

#[test]
fn config_and_shape_errors() {
    let bench = tiny();
    let ops = bench.operators::<f64>().unwrap();
    let u = vec![0.0; bench.partition.n3()];
    let bad_iter = InversionConfig::new(Method::Variational, Kind::Double, 0);
    assert!(matches!(invert_variational(&ops, &u, &bad_iter, None, None), Err(InverseError::Config(_))));
    let cfg = InversionConfig::new(Method::Variational, Kind::Double, 5);
    assert!(matches!(invert_variational(&ops, &u[1..], &cfg, None, None), Err(InverseError::Shape { .. })));
    let wrong_kind = InversionConfig::new(Method::Variational, Kind::Extended, 5);
    assert!(matches!(invert_variational(&ops, &u, &wrong_kind, None, None), Err(InverseError::ScalarMismatch { .. })));
    assert!(matches!(invert_normal(&ops, &u, &cfg, None, None), Err(InverseError::Config(_))));
}

#[test]
fn adjoint_gradient_agrees_with_finite_differences() {
    let bench = tiny();
    let ext = bench.operators::<DoubleDouble>().unwrap();
    let u_star = bench.observation(&ext).unwrap();
    let g = random_wall_vector(bench.partition.n1(), 3);
    let check = check_gradient(&ext, &g, &u_star, 10, 1e-6, 7).unwrap();
    assert_eq!(check.errors.len(), 10);
    assert!(check.max_error() <= 1e-6, "{:?}", check.errors);

    // the same seed reproduces the same numbers
    let again = check_gradient(&ext, &g, &u_star, 10, 1e-6, 7).unwrap();
    assert_eq!(check, again);
}

#[test]
fn cost_vanishes_only_at_matching_response() {
    let bench = tiny();
    let ops = bench.operators::<f64>().unwrap();
    let u = ops.apply_forward(&bench.g_star);
    assert!(evaluate_cost(&ops, &bench.g_star, &u).abs() < 1e-28);
    let zero = vec![0.0; bench.partition.n1()];
    assert!(evaluate_cost(&ops, &zero, &u) > 0.0);
}

#[test]
fn aggregation_structure() {
    let bench = tiny();
    let nodes = bench.partition.wall_nodes.len();
    let id = build_aggregation(&bench.mesh, &bench.partition, nodes).unwrap();
    assert_eq!(id, AggregationMap::identity(nodes));

    let agg = build_aggregation(&bench.mesh, &bench.partition, 5).unwrap();
    assert!(agg.num_clusters() <= 5);
    assert_eq!(agg.sizes.iter().sum::<usize>(), nodes);
    let ones = vec![1.0; agg.dim()];
    let back = agg.restrict(&agg.prolong(&ones));
    for (k, &s) in agg.sizes.iter().enumerate() {
        assert_eq!(&back[3 * k..3 * k + 3], &[s as f64; 3]);
    }
    // restriction is the transpose of prolongation
    let c = random_wall_vector(agg.dim(), 1);
    let g = random_wall_vector(3 * nodes, 2);
    let lhs: f64 = agg.prolong(&c).iter().zip(&g).map(|(a, b)| a * b).sum();
    let rhs: f64 = c.iter().zip(agg.restrict(&g)).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));

    assert!(build_aggregation(&bench.mesh, &bench.partition, 0).is_err());
    assert!(build_aggregation(&bench.mesh, &bench.partition, nodes + 1).is_err());
}

fn min_max_ratio(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    s[s.len() - 1] / s[0]
}

#[test]
fn aggregation_removes_underdetermination() {
    let bench = underdetermined();
    let p = &bench.partition;
    assert!(p.n1() > p.n3());
    let ops = bench.operators::<f64>().unwrap();
    let a = matrix_of(p.n3(), p.n1(), |g| ops.apply_forward(g));
    assert!(min_max_ratio(&(a.transpose() * &a)) < 1e-12);

    let agg = build_aggregation(&bench.mesh, p, p.n3() / 3).unwrap();
    let ap = matrix_of(p.n3(), agg.dim(), |c| ops.apply_forward(&agg.prolong(c)));
    let ratio = min_max_ratio(&(ap.transpose() * &ap));
    assert!(ratio > 1e-8, "aggregated ratio {ratio:e}");
}

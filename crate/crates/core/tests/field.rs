use kropina_core::builtins::{example1, example3, minkowski_pr, s3xr};
use kropina_core::classify::{einstein_fit, Backend};
use kropina_core::curvature::{trace_identities, Tower, FULL_FIBER_ORDER};
use kropina_core::sampling::{sample_fibers, sample_points};
use kropina_core::scalar::Scalar;
use kropina_core::spec::EvalPoint;
use kropina_core::CoreError;
use kropina_ratfun::Rational;

mod common;
use common::{conformal_ricci, s3xr_tensor_oracle};

#[test]
fn conformal_oracle_reproduces_the_round_sphere() {
    // sanity of the oracle itself: Ric = 2g on the unit sphere
    let x = [0.3, -0.2, 0.5];
    let r = conformal_ricci(&x);
    let conf = 4.0 / (1.0 + 0.38f64).powi(2);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 2.0 * conf } else { 0.0 };
            assert!((r[i][j] - want).abs() < 1e-14);
        }
    }
}

#[test]
fn s3xr_residual_matches_tensor_oracle() {
    let spec = s3xr().unwrap();
    let pts = sample_points(&spec, &[(-0.8, 0.8), (-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0)], 20, 3).unwrap();
    for at in &pts {
        let tw = Tower::numeric(&spec, at, FULL_FIBER_ORDER).unwrap();
        let fr = tw.field_residuals(0.0).unwrap();
        let want = s3xr_tensor_oracle(at);
        assert!((fr.pw.value() - want).abs() <= 1e-8 * want.abs().max(1.0), "{} vs {want}", fr.pw.value());
        assert!(fr.brace.value().abs() < 1e-12);
    }
    // exact backend at a rational point
    let at = EvalPoint::parse("x=1/2,0,-1/4,3;y=1,2,1/2,1").unwrap();
    let tw = Tower::exact(&spec, &at).unwrap();
    let fr = tw.field_residuals(0.0).unwrap();
    let want = s3xr_tensor_oracle(&at);
    assert!((fr.pw.value() - want).abs() <= 1e-12 * want.abs());
}

#[test]
fn minkowski_pr_residuals_vanish() {
    let spec = minkowski_pr().unwrap();
    let pts = sample_points(&spec, &[(-1.0, 1.0); 4], 20, 8).unwrap();
    for at in &pts {
        let tw = Tower::numeric(&spec, at, FULL_FIBER_ORDER).unwrap();
        let fr = tw.field_residuals(0.0).unwrap();
        assert_eq!(fr.pw.value(), 0.0);
        assert_eq!(fr.cs, 0.0);
    }
    let at = EvalPoint::parse("x=0,1,2,3;y=2,1,0,1/2").unwrap();
    let fr = Tower::exact(&spec, &at).unwrap().field_residuals(0.0).unwrap();
    assert!(fr.pw.vanishes_at_point());
}

#[test]
fn example1_vacuum_residual_is_exactly_zero() {
    for m in [2, 3] {
        let spec = example1(m).unwrap();
        for s in ["x=0,0,0,0;y=1,1,1,0", "x=1,-2,1/3,5;y=3,1,1/2,2"] {
            let at = EvalPoint::parse(s).unwrap();
            let tw = Tower::exact(&spec, &at).unwrap();
            let fr = tw.field_residuals(0.0).unwrap();
            assert!(fr.ric.vanishes_at_point(), "m = {m}");
            assert!(fr.pw.vanishes_at_point(), "m = {m}");
        }
    }
}

#[test]
fn residuals_need_dimension_four() {
    let spec = kropina_core::builtins::round_sphere().unwrap();
    let at = EvalPoint::parse("x=0,0,0;y=1,0,0").unwrap();
    let tw = Tower::numeric(&spec, &at, FULL_FIBER_ORDER).unwrap();
    assert!(matches!(tw.field_residuals(0.0), Err(CoreError::DimensionMismatch { expected: 4, got: 3 })));
}

#[test]
fn reduced_weak_einstein_form_agrees_on_example3() {
    let spec = example3("x1", 2, "1").unwrap();
    let x = [1.5, 0.25, -0.5, 0.125];
    let fibers = sample_fibers(&spec, &x, 8, 4).unwrap();
    let ys: Vec<Vec<Rational>> = fibers.iter().map(|p| p.y.clone()).collect();
    let fit = einstein_fit(&spec, &fibers[0].x, &ys, Backend::Numeric).unwrap();
    for at in &fibers {
        let tw = Tower::numeric(&spec, at, FULL_FIBER_ORDER).unwrap();
        let full = tw.field_residuals(0.7).unwrap();
        let (pw, cs) = tw.reduced_weak_einstein(fit.k, &fit.theta, 0.7).unwrap();
        let scale = full.pw.value().abs().max(tw.f2().unwrap().value().abs());
        assert!((pw - full.pw.value()).abs() <= 1e-8 * scale);
        assert!((cs - full.cs).abs() <= 1e-8 * scale);
    }
}

#[test]
fn trace_identities_in_dimension_four() {
    let specs = [example1(2).unwrap(), example3("x1", 3, "1").unwrap(), s3xr().unwrap()];
    let pts = [
        "x=0,0,0,0;y=1,1,1,0",
        "x=2,0,1,0;y=3,1/2,-1/4,1/8",
        "x=1/3,1/5,-1/2,1;y=1,-1,2,1/2",
    ];
    for (spec, p) in specs.iter().zip(pts) {
        let (th, tg) = trace_identities(spec, &EvalPoint::parse(p).unwrap()).unwrap();
        assert!((th - 3.0).abs() < 1e-12, "{th}");
        assert!((tg - 4.0).abs() < 1e-12, "{tg}");
    }
}

use kropina_core::builtins::{euclidean_fixture, example1, example3, minkowski_fixture};
use kropina_core::classify::{
    defect, einstein_fit, einstein_fit_values, lstsq, rationality_table, Backend, DefectOptions, EinsteinClass, Property,
    Rationality, Verdict,
};
use kropina_core::sampling::{sample_fibers, sample_points};
use kropina_core::spec::{EvalPoint, Family, MetricSpec};
use kropina_core::CoreError;
use kropina_ratfun::Rational;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Flat space with a parallel 1-form: Berwald, Ricci-flat, every class holds.
fn parallel(m: i64) -> MetricSpec {
    MetricSpec::parse(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]], &["1", "0", "0"], Family::generalized(m, 1, 0)).unwrap()
}

fn grouped(spec: &MetricSpec, bases: usize, per: usize, seed: u64) -> Vec<EvalPoint> {
    let bx = vec![(-0.5, 0.5); spec.dimension];
    let xs = sample_points(spec, &bx, bases, seed).unwrap();
    xs.iter()
        .enumerate()
        .flat_map(|(k, p)| sample_fibers(spec, &p.xf, per, seed + 1 + k as u64).unwrap())
        .collect()
}

#[test]
fn einstein_fit_recovers_a_planted_constant() {
    // Ric = (n−1)K F² with n = 4, K = 5, F = |y|
    let ys = [[1.0, 0.5, -0.25, 2.0], [0.3, -1.0, 0.7, 0.1], [2.0, 2.0, 1.0, -1.0], [-0.6, 0.2, 0.9, 0.4], [1.5, -0.5, 0.0, 0.25], [0.1, 0.1, -2.0, 0.3]];
    let data: Vec<(f64, f64, Vec<f64>)> = ys
        .iter()
        .map(|y| {
            let f = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            (3.0 * 5.0 * f * f, f, y.to_vec())
        })
        .collect();
    let fit = einstein_fit_values(4, &data, 1e-8).unwrap();
    assert!((fit.k - 5.0).abs() < 1e-12);
    assert!(fit.theta.iter().all(|t| t.abs() < 1e-12));
    assert_eq!(fit.class, EinsteinClass::Einstein);
}

#[test]
fn einstein_fit_sees_a_planted_theta() {
    // Ric = 3(K F² + 3θ_i yⁱ F) in n = 4
    let theta = [0.5, 0.0, -0.25, 1.0];
    let ys = [[1.0, 0.5, -0.25, 2.0], [0.3, -1.0, 0.7, 0.1], [2.0, 2.0, 1.0, -1.0], [-0.6, 0.2, 0.9, 0.4], [1.5, -0.5, 0.0, 0.25], [0.1, 0.1, -2.0, 0.3]];
    let data: Vec<(f64, f64, Vec<f64>)> = ys
        .iter()
        .map(|y| {
            let f = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ty: f64 = theta.iter().zip(y).map(|(a, b)| a * b).sum();
            (3.0 * (2.0 * f * f + 3.0 * ty * f), f, y.to_vec())
        })
        .collect();
    let fit = einstein_fit_values(4, &data, 1e-8).unwrap();
    assert!((fit.k - 2.0).abs() < 1e-10);
    for (a, b) in fit.theta.iter().zip(theta) {
        assert!((a - b).abs() < 1e-10);
    }
    assert_eq!(fit.class, EinsteinClass::WeakEinstein);
}

#[test]
fn einstein_fit_needs_n_plus_two_samples() {
    let data = vec![(1.0, 1.0, vec![1.0, 0.0, 0.0, 0.0]); 5];
    assert!(matches!(einstein_fit_values(4, &data, 1e-8), Err(CoreError::InsufficientSamples { needed: 6, got: 5 })));
}

#[test]
fn lstsq_rejects_rank_deficiency() {
    let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
    assert!(lstsq(&rows, &[1.0, 2.0, 3.0], 2).is_none());
    let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    let p = lstsq(&rows, &[1.0, 2.0, 3.0], 2).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] - 2.0).abs() < 1e-14);
}

#[test]
fn rationality_table_for_m_one_to_four() {
    let x = [q("1/2"), q("1/3"), q("0")];
    // the Lorentzian fixture is slow exactly, so it covers one m per parity
    let specs = (1..=4)
        .map(|m| (m, euclidean_fixture(m, 1, 1).unwrap()))
        .chain((1..=2).map(|m| (m, minkowski_fixture(m, 1, 1).unwrap())));
    for (m, spec) in specs {
        let rows = rationality_table(&spec, &x).unwrap();
        assert_eq!(rows.len(), 13);
        for r in &rows {
            assert!(r.matches, "m = {m}, {}: {:?} vs {:?}", r.object, r.certificate, r.expected);
        }
        let f = rows.iter().find(|r| r.object == "F").unwrap();
        assert_eq!(f.certificate == Rationality::Rational, m % 2 == 1);
        let i = rows.iter().find(|r| r.object == "I_i").unwrap();
        assert_eq!(i.certificate, Rationality::Rational);
    }
}

#[test]
fn rationality_table_refuses_fractional_m() {
    let spec = euclidean_fixture(2, 1, 1)
        .unwrap()
        .with_family(Family::GeneralizedMKropina {
            m: kropina_core::spec::Param(q("1/2")),
            c: 1.into(),
            r: 1.into(),
            sign: kropina_core::spec::Sign::Plus,
        })
        .unwrap();
    assert!(rationality_table(&spec, &[q("0"), q("0"), q("0")]).is_err());
}

#[test]
fn parallel_fixture_satisfies_every_class() {
    for m in [1, 2, 4] {
        let spec = parallel(m);
        let opts = DefectOptions::default();
        for prop in Property::ALL {
            let per = prop.min_samples(3) + 2;
            let pts = grouped(&spec, 2, per, 5);
            let rep = defect(prop, &spec, &pts, Backend::Numeric, &opts).unwrap();
            assert_eq!(rep.verdict, Verdict::Holds, "{prop} at m = {m}: {} > {}", rep.residual, rep.tol);
        }
    }
}

#[test]
fn implication_ladder_on_even_m() {
    // the hypothesis-holds cases must carry a passing conclusion check
    let props = [Property::IsotropicMeanBerwald, Property::WeakEinstein, Property::IsotropicMeanLandsberg, Property::AlmostVanishingH];
    for m in [2, 4] {
        let specs = [parallel(m), euclidean_fixture(m, 1, 1).unwrap(), minkowski_fixture(m, 1, 1).unwrap()];
        for spec in &specs {
            for prop in props {
                let pts = grouped(spec, 2, prop.min_samples(3) + 2, 9);
                let rep = defect(prop, spec, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
                if rep.verdict.holds() {
                    let c = rep.conclusion.expect("even m conclusion");
                    assert!(c.holds, "{prop}: {} = {}", c.statement, c.value);
                    assert!(c.value <= 1e-9);
                } else {
                    assert!(rep.conclusion.is_none());
                }
            }
        }
    }
}

#[test]
fn curved_fixture_is_not_berwald() {
    let spec = euclidean_fixture(2, 1, 1).unwrap();
    let pts = grouped(&spec, 2, Property::Berwald.min_samples(3) + 3, 3);
    let rep = defect(Property::Berwald, &spec, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Fails);
    let rep = defect(Property::RicciFlat, &spec, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Fails);
}

#[test]
fn landsberg_metrics_pass_the_landsberg_type_fits() {
    // Berwald with g ~ β^{-2m} near the β = 0 boundary: L vanishes only up to
    // round-off there, which must not read as a nonzero isotropy factor
    let spec = example3("x1", 2, "1").unwrap();
    let bx = [(0.5, 3.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)];
    let xs = sample_points(&spec, &bx, 4, 1).unwrap();
    let pts: Vec<EvalPoint> = xs.iter().enumerate().flat_map(|(k, p)| sample_fibers(&spec, &p.xf, 6, 2 + k as u64).unwrap()).collect();
    for prop in [Property::Landsberg, Property::RelativelyIsotropicLandsberg, Property::IsotropicMeanLandsberg] {
        let rep = defect(prop, &spec, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{prop}: {}", rep.residual);
    }
    let curved = minkowski_fixture(2, 1, 1).unwrap();
    let pts = grouped(&curved, 2, 6, 4);
    let rep = defect(Property::RelativelyIsotropicLandsberg, &curved, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Fails);
}

#[test]
fn residual_is_invariant_under_fiber_rescaling() {
    let spec = euclidean_fixture(3, 1, 1).unwrap();
    let two = q("2");
    for prop in [Property::Einstein, Property::IsotropicMeanBerwald, Property::Berwald, Property::IsotropicSCurvature] {
        let pts = grouped(&spec, 2, prop.min_samples(3) + 2, 21);
        let scaled: Vec<EvalPoint> = pts.iter().map(|p| p.scaled(&two)).collect();
        let a = defect(prop, &spec, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
        let b = defect(prop, &spec, &scaled, Backend::Numeric, &DefectOptions::default()).unwrap();
        assert!((a.residual - b.residual).abs() <= 1e-9 * a.residual.max(1.0), "{prop}: {} vs {}", a.residual, b.residual);
    }
}

#[test]
fn example1_is_ricci_flat_on_both_backends() {
    let spec = example1(2).unwrap();
    let pts = grouped(&spec, 2, 2, 17);
    let num = defect(Property::RicciFlat, &spec, &pts, Backend::Numeric, &DefectOptions::default()).unwrap();
    assert_eq!(num.verdict, Verdict::Holds);
    let ex = defect(Property::RicciFlat, &spec, &pts[..2], Backend::Exact, &DefectOptions::default()).unwrap();
    assert_eq!(ex.verdict, Verdict::Holds);
    assert_eq!(ex.residual, 0.0);
}

#[test]
fn exact_backend_refuses_fitted_properties() {
    let spec = euclidean_fixture(2, 1, 1).unwrap();
    let pts = vec![EvalPoint::parse("x=0,0,0;y=1,1,1").unwrap()];
    let e = defect(Property::Einstein, &spec, &pts, Backend::Exact, &DefectOptions::default()).unwrap_err();
    assert!(matches!(e, CoreError::ExactBackendUnavailable(_)));
}

#[test]
fn einstein_fit_on_a_flat_metric() {
    let spec = example1(3).unwrap();
    let x = vec![q("0"); 4];
    let ys: Vec<Vec<Rational>> = ["1,1,1,0", "3,1,-1,2", "2,1/2,0,1", "5,1,2,-1", "1,2,1,1", "4,-1,1,1/2", "7,2,3,1"]
        .iter()
        .map(|s| s.split(',').map(q).collect())
        .collect();
    let fit = einstein_fit(&spec, &x, &ys, Backend::Numeric).unwrap();
    assert_eq!(fit.class, EinsteinClass::RicciFlat);
}

#[test]
fn property_names_round_trip() {
    for p in Property::ALL {
        assert_eq!(p.name().parse::<Property>().unwrap(), p);
    }
    assert!("nonsense".parse::<Property>().is_err());
}

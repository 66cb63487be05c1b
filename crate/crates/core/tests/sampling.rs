use kropina_core::builtins::{example1, minkowski_pr};
use kropina_core::montecarlo::{indicatrix_average, indicatrix_average_with};
use kropina_core::sampling::{sample_fibers, sample_points, well_conditioned};
use kropina_core::spec::{Family, MetricSpec};
use kropina_core::CoreError;

#[test]
fn sampling_is_deterministic_per_seed() {
    let spec = example1(2).unwrap();
    let bx = vec![(-1.0, 1.0); 4];
    let a = sample_points(&spec, &bx, 30, 7).unwrap();
    let b = sample_points(&spec, &bx, 30, 7).unwrap();
    let c = sample_points(&spec, &bx, 30, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.iter().all(|p| well_conditioned(&spec, p)));
    let f = sample_fibers(&spec, &[0.5, 0.0, 0.0, -0.5], 10, 1).unwrap();
    assert_eq!(f, sample_fibers(&spec, &[0.5, 0.0, 0.0, -0.5], 10, 1).unwrap());
    assert!(f.iter().all(|p| p.xf == vec![0.5, 0.0, 0.0, -0.5]));
}

#[test]
fn empty_cone_is_reported() {
    // α vanishes identically on the box, so no draw is admissible
    let spec = MetricSpec::parse(&[&["x1", "0"], &["0", "x1"]], &["1", "0"], Family::generalized(2, 1, 1)).unwrap();
    let e = sample_points(&spec, &[(0.0, 0.0), (-1.0, 1.0)], 1, 0).unwrap_err();
    assert!(matches!(e, CoreError::EmptyCone(_)), "{e:?}");
}

#[test]
fn monte_carlo_of_a_constant_is_exact() {
    let spec = example1(2).unwrap();
    let est = indicatrix_average_with(&spec, &[0.0; 4], 3, 200, |_| Ok(5.0)).unwrap();
    assert_eq!(est.mean, 5.0);
    assert_eq!(est.std_err, 0.0);
    assert_eq!(est.n_samples, 200);
    assert!(est.draws >= 200);
}

#[test]
fn monte_carlo_is_deterministic_and_vanishes_on_flat_metrics() {
    let spec = example1(2).unwrap();
    let a = indicatrix_average(&spec, &[0.0, 0.5, 0.0, 0.0], 11, 150).unwrap();
    let b = indicatrix_average(&spec, &[0.0, 0.5, 0.0, 0.0], 11, 150).unwrap();
    assert_eq!(a, b);
    assert!(a.mean.abs() < 1e-10, "{}", a.mean);
    let pr = indicatrix_average(&minkowski_pr().unwrap(), &[0.0; 4], 2, 64).unwrap();
    assert_eq!(pr.mean, 0.0);
}

#[test]
fn monte_carlo_rejects_zero_samples() {
    let spec = example1(2).unwrap();
    assert!(matches!(indicatrix_average(&spec, &[0.0; 4], 0, 0), Err(CoreError::InsufficientSamples { .. })));
}

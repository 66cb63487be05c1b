//! Seeded rejection sampling of well-conditioned points in the conic domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::geometry::Frame;
use crate::scalar::Scalar;
use crate::spec::{EvalPoint, MetricSpec};

/// Draw budget before giving up with [`CoreError::EmptyCone`].
pub const MAX_DRAWS: u64 = 1_000_000;

/// Denominator for the dyadic grid the samples live on, so that both
/// backends see the same rational point.
const GRID: f64 = 1024.0;

fn dyadic(v: f64) -> f64 {
    (v * GRID).round() / GRID
}

/// Whether every closed-form denominator is comfortably away from zero.
pub fn well_conditioned(spec: &MetricSpec, at: &EvalPoint) -> bool {
    let Ok(pd) = spec.point_data(at) else { return false };
    let Ok(fr) = Frame::numeric(spec, at, 0, 0) else { return false };
    let p = &fr.p;
    let ynorm2: f64 = at.yf.iter().map(|v| v * v).sum();
    let anorm = pd.alpha.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let bnorm2: f64 = pd.b.iter().map(|v| v * v).sum();
    let a2 = fr.a2.value();
    let b2 = fr.beta.value().powi(2);
    let (m, c, r) = (p.mf().abs(), p.cf().abs(), p.rf().abs());
    let tol = 1e-3;
    if a2 < tol * anorm * ynorm2 || b2 < tol * tol * bnorm2 * ynorm2 {
        return false;
    }
    if fr.r.value() < tol * (c * a2 + r * b2) {
        return false;
    }
    if !p.pseudo_riemannian && fr.phi_prime_factor().value().abs() < tol * (r * b2 + c * m * a2) {
        return false;
    }
    let bb = fr.bb2.value();
    let dscale = c * (p.mf() - 1.0).abs() * b2 + bb.abs() * (c * m * a2 + r * b2);
    fr.d_theta().value().abs() > tol * dscale
}

/// `count` samples with `x` uniform in `x_box` and `y` uniform in `[-1,1]ⁿ`.
pub fn sample_points(spec: &MetricSpec, x_box: &[(f64, f64)], count: usize, seed: u64) -> Result<Vec<EvalPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.dimension;
    if x_box.len() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: x_box.len(),
        });
    }
    if let Some((lo, hi)) = x_box.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(CoreError::Config(format!("bad sampling interval [{lo}, {hi}]")));
    }
    let mut out = Vec::with_capacity(count);
    let mut draws = 0u64;
    while out.len() < count {
        if draws >= MAX_DRAWS {
            return Err(CoreError::EmptyCone(draws));
        }
        draws += 1;
        let x: Vec<f64> = x_box.iter().map(|(lo, hi)| dyadic(rng.random_range(*lo..=*hi))).collect();
        let y: Vec<f64> = (0..n).map(|_| dyadic(rng.random_range(-1.0..1.0))).collect();
        let at = EvalPoint::from_f64(&x, &y)?;
        if well_conditioned(spec, &at) {
            out.push(at);
        }
    }
    Ok(out)
}

/// `count` admissible fiber directions at a fixed base point.
pub fn sample_fibers(spec: &MetricSpec, x: &[f64], count: usize, seed: u64) -> Result<Vec<EvalPoint>> {
    let bx: Vec<(f64, f64)> = x.iter().map(|v| (*v, *v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.dimension;
    if bx.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: bx.len() });
    }
    let mut out = Vec::with_capacity(count);
    let mut draws = 0u64;
    while out.len() < count {
        if draws >= MAX_DRAWS {
            return Err(CoreError::EmptyCone(draws));
        }
        draws += 1;
        let y: Vec<f64> = (0..n).map(|_| dyadic(rng.random_range(-1.0..1.0))).collect();
        let at = EvalPoint::from_f64(x, &y)?;
        if well_conditioned(spec, &at) {
            out.push(at);
        }
    }
    Ok(out)
}

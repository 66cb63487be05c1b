//! Monte Carlo average of `Ric` over the indicatrix `F = 1`.
//!
//! Directions are drawn uniformly from `[-1,1]ⁿ`, rejected outside the
//! conic domain and rescaled to `F = 1`; by 2-homogeneity the integrand is
//! `Ric(y)/F(y)²`. The measure is the pushforward of the uniform cube
//! measure, not the induced Riemannian one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::Tower;
use crate::error::{CoreError, Result};
use crate::sampling::{well_conditioned, MAX_DRAWS};
use crate::scalar::Scalar;
use crate::spec::{EvalPoint, MetricSpec};

/// Samples per independent stream.
const CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
    pub draws: u64,
    pub seed: u64,
}

/// `Ric/F²` at a point, the default integrand.
pub fn ric_over_f2(spec: &MetricSpec, at: &EvalPoint) -> Result<f64> {
    let tw = Tower::numeric(spec, at, 2)?;
    Ok(tw.ric()?.value() / tw.f2()?.value())
}

pub fn indicatrix_average(spec: &MetricSpec, x: &[f64], seed: u64, n_samples: usize) -> Result<Estimate> {
    indicatrix_average_with(spec, x, seed, n_samples, |at| ric_over_f2(spec, at))
}

/// Same estimator with an arbitrary integrand evaluated at accepted points.
pub fn indicatrix_average_with<F>(spec: &MetricSpec, x: &[f64], seed: u64, n_samples: usize, integrand: F) -> Result<Estimate>
where
    F: Fn(&EvalPoint) -> Result<f64> + Sync,
{
    let n = spec.dimension;
    if x.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: x.len() });
    }
    if n_samples == 0 {
        return Err(CoreError::InsufficientSamples { needed: 1, got: 0 });
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<(Vec<f64>, u64)> {
            let quota = CHUNK.min(n_samples - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut vals = Vec::with_capacity(quota);
            let mut draws = 0u64;
            while vals.len() < quota {
                if draws >= MAX_DRAWS {
                    return Err(CoreError::EmptyCone(draws));
                }
                draws += 1;
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let at = EvalPoint::from_f64(x, &y)?;
                if well_conditioned(spec, &at) {
                    vals.push(integrand(&at)?);
                }
            }
            Ok((vals, draws))
        })
        .collect::<Result<Vec<_>>>()?;
    let draws = parts.iter().map(|(_, d)| d).sum();
    let vals: Vec<f64> = parts.into_iter().flat_map(|(v, _)| v).collect();
    let nf = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / nf;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_err: (var / nf).sqrt(),
        n_samples: vals.len(),
        draws,
        seed,
    })
}

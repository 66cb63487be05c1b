//! Claim checks for the builtin metrics, shared by the CLI and the tests.
//!
//! Each check reports the observed number next to its tolerance, so a
//! failing claim says by how much it fails.

use kropina_ratfun::Rational;
use rayon::prelude::*;
use serde::Serialize;

use crate::builtins::{builtin, example3, Builtin};
use crate::classify::{defect, einstein_fit, rationality_table, Backend, DefectOptions, Property};
use crate::curvature::{Tower, FULL_FIBER_ORDER};
use crate::error::Result;
use crate::geometry::Frame;
use crate::sampling::{sample_fibers, sample_points};
use crate::scalar::Scalar;
use crate::spec::{EvalPoint, MetricSpec};

/// Numeric tolerance for "vanishes" claims, relative to `F²`.
pub const ZERO_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub backend: Backend,
    /// Largest observed deviation from the claimed value.
    pub value: f64,
    pub tol: f64,
    pub holds: bool,
    pub points: usize,
    pub detail: String,
}

impl ClaimCheck {
    fn numeric(claim: &str, value: f64, tol: f64, points: usize, detail: String) -> ClaimCheck {
        ClaimCheck {
            claim: claim.into(),
            backend: Backend::Numeric,
            value,
            tol,
            holds: value <= tol,
            points,
            detail,
        }
    }

    fn exact(claim: &str, value: f64, holds: bool, points: usize, detail: String) -> ClaimCheck {
        ClaimCheck {
            claim: claim.into(),
            backend: Backend::Exact,
            value,
            tol: 0.0,
            holds,
            points,
            detail,
        }
    }
}

/// Runs every claim of the builtin `id` on the requested backends.
pub fn verify_builtin(id: &str, m: Option<i64>, backends: &[Backend], seed: u64) -> Result<Vec<ClaimCheck>> {
    let b = builtin(id, m)?;
    let want = |k: Backend| backends.contains(&k);
    let mut out = Vec::new();
    match b.id {
        "euclidean-fixture" => {
            if want(Backend::Exact) {
                let x: Vec<Rational> = b.default_point.x.clone();
                let rows = rationality_table(&b.spec, &x)?;
                let bad: Vec<_> = rows.iter().filter(|r| !r.matches).map(|r| r.object.clone()).collect();
                out.push(ClaimCheck::exact(
                    "rationality table matches the odd/even split",
                    bad.len() as f64,
                    bad.is_empty(),
                    1,
                    format!("{} rows, mismatched: [{}]", rows.len(), bad.join(", ")),
                ));
            }
            if want(Backend::Numeric) {
                out.push(metric_routes(&b, seed)?);
            }
        }
        "minkowski-fixture" => {
            if want(Backend::Numeric) {
                out.push(metric_routes(&b, seed)?);
            }
            if want(Backend::Exact) {
                let pts = sample_points(&b.spec, &b.x_box, 8, seed)?;
                let mut ok = true;
                for at in &pts {
                    let fr = Frame::exact(&b.spec, at, 0)?;
                    let (gc, gd) = (fr.g_closed()?, fr.g_direct()?);
                    ok &= gc.iter().flatten().zip(gd.iter().flatten()).all(|(a, d)| (a.clone() - d).vanishes_at_point());
                }
                out.push(ClaimCheck::exact("metric routes agree", 0.0, ok, pts.len(), String::new()));
            }
        }
        "example1-flat-anisotropic" => {
            let pts = with_default(&b, 4, seed)?;
            if want(Backend::Exact) {
                out.push(exact_ric_zero("Ric = 0", &b.spec, &pts)?);
                out.push(exact_pw_zero(&b.spec, &pts[..2])?);
            }
            if want(Backend::Numeric) {
                out.push(numeric_ric_zero("Ric = 0", &b.spec, &pts)?);
                out.push(numeric_pw_zero(&b.spec, &pts)?);
                out.push(defect_holds(Property::RicciFlat, &b, seed)?);
            }
        }
        "example2-vsi" => {
            let pts = with_default(&b, 4, seed)?;
            if want(Backend::Numeric) {
                out.push(defect_holds(Property::Berwald, &b, seed)?);
                out.push(numeric_ric_zero("Ric = 0", &b.spec, &pts)?);
                out.push(numeric_pw_zero(&b.spec, &pts)?);
            }
            if want(Backend::Exact) {
                out.push(exact_ric_zero("Ric = 0", &b.spec, &pts)?);
            }
        }
        "example3-cosmological" => {
            let m = m.unwrap_or(2);
            if want(Backend::Numeric) {
                out.push(example3_fit(m, seed)?);
            }
            if want(Backend::Exact) {
                let mut pts = Vec::new();
                for t in ["1", "9/4", "4"] {
                    let spec = example3("x1", m, "1")?;
                    let x = format!("x={t},1/3,-1/2,1/5");
                    for y in ["3,1/5,0,0", "7,1,-1,1/2"] {
                        pts.push((spec.clone(), EvalPoint::parse(&format!("{x};y={y}"))?));
                    }
                }
                let mut ok = true;
                let mut worst: f64 = 0.0;
                for (spec, at) in &pts {
                    let tw = Tower::exact(spec, at)?;
                    let r = tw.ric()?;
                    ok &= r.vanishes_at_point();
                    worst = worst.max(r.value().abs());
                }
                out.push(ClaimCheck::exact(
                    "Ric = 0 (A(t) = t at t = 1, 9/4, 4)",
                    worst,
                    ok,
                    pts.len(),
                    String::new(),
                ));
            }
        }
        "round-sphere" => {
            let pts = with_default(&b, 4, seed)?;
            let u: Vec<Rational> = [1, -2, 3].iter().map(|&v| Rational::from_integer(v.into())).collect();
            if want(Backend::Numeric) {
                let worst = pts
                    .iter()
                    .map(|at| -> Result<f64> { Ok((Tower::numeric(&b.spec, at, 2)?.flag_curvature(&u)?.value() - 1.0).abs()) })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                out.push(ClaimCheck::numeric("flag curvature K = 1", worst, ZERO_TOL, pts.len(), String::new()));
            }
            if want(Backend::Exact) {
                let mut ok = true;
                for at in &pts {
                    let k = Tower::exact(&b.spec, at)?.flag_curvature(&u)?;
                    ok &= (k.clone() - &k.one_like()).vanishes_at_point();
                }
                out.push(ClaimCheck::exact("flag curvature K = 1", 0.0, ok, pts.len(), String::new()));
            }
        }
        "s3xr" => {
            let pts = with_default(&b, 4, seed)?;
            if want(Backend::Numeric) {
                let mut worst: f64 = 0.0;
                for at in &pts {
                    let tw = Tower::numeric(&b.spec, at, FULL_FIBER_ORDER)?;
                    let pw = tw.field_residuals(0.0)?.pw.value();
                    let oracle = s3xr_oracle(at);
                    worst = worst.max((pw - oracle).abs() / tw.f2()?.value());
                }
                out.push(ClaimCheck::numeric(
                    "vacuum residual = 4 (y⁴)² (classical Ricci oracle)",
                    worst,
                    ZERO_TOL,
                    pts.len(),
                    String::new(),
                ));
            }
        }
        "minkowski-pr" => {
            let pts = with_default(&b, 4, seed)?;
            if want(Backend::Numeric) {
                let mut worst: f64 = 0.0;
                for at in &pts {
                    let tw = Tower::numeric(&b.spec, at, FULL_FIBER_ORDER)?;
                    let fr = tw.field_residuals(0.0)?;
                    let f2 = tw.f2()?.value().abs();
                    worst = worst.max(fr.pw.value().abs() / f2).max(fr.cs.abs() / f2);
                }
                out.push(ClaimCheck::numeric(
                    "vacuum and Chen–Shen residuals = 0",
                    worst,
                    ZERO_TOL,
                    pts.len(),
                    String::new(),
                ));
            }
            if want(Backend::Exact) {
                out.push(exact_pw_zero(&b.spec, &pts[..2])?);
            }
        }
        _ => unreachable!("builtin() rejects unknown ids"),
    }
    Ok(out)
}

/// The default point followed by `extra` seeded samples.
fn with_default(b: &Builtin, extra: usize, seed: u64) -> Result<Vec<EvalPoint>> {
    let mut pts = vec![b.default_point.clone()];
    pts.extend(sample_points(&b.spec, &b.x_box, extra, seed)?);
    Ok(pts)
}

fn metric_routes(b: &Builtin, seed: u64) -> Result<ClaimCheck> {
    let pts = sample_points(&b.spec, &b.x_box, 50, seed)?;
    let mut worst: f64 = 0.0;
    for at in &pts {
        let fr = Frame::numeric(&b.spec, at, 0, 2)?;
        let (gc, gd) = (fr.g_closed()?, fr.g_direct()?);
        for (a, d) in gc.iter().flatten().zip(gd.iter().flatten()) {
            let (a, d) = (a.value(), d.value());
            worst = worst.max((a - d).abs() / a.abs().max(d.abs()).max(1e-300));
        }
    }
    Ok(ClaimCheck::numeric("metric routes agree", worst, 1e-9, pts.len(), String::new()))
}

fn numeric_ric_zero(claim: &str, spec: &MetricSpec, pts: &[EvalPoint]) -> Result<ClaimCheck> {
    let vals = pts
        .par_iter()
        .map(|at| -> Result<f64> {
            let tw = Tower::numeric(spec, at, 2)?;
            Ok(tw.ric()?.value() / tw.f2()?.value())
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(ClaimCheck::numeric(claim, worst, ZERO_TOL, pts.len(), format!("Ric/F² = {vals:?}")))
}

fn exact_ric_zero(claim: &str, spec: &MetricSpec, pts: &[EvalPoint]) -> Result<ClaimCheck> {
    let res = pts
        .par_iter()
        .map(|at| -> Result<(bool, f64)> {
            let tw = Tower::exact(spec, at)?;
            let r = tw.ric()?;
            Ok((r.vanishes_at_point(), r.value()))
        })
        .collect::<Result<Vec<_>>>()?;
    let nonzero: Vec<String> = res
        .iter()
        .zip(pts)
        .filter(|((z, _), _)| !z)
        .map(|((_, v), at)| format!("Ric({at}) = {v:.6e}"))
        .collect();
    let worst = res.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    Ok(ClaimCheck::exact(claim, worst, nonzero.is_empty(), pts.len(), nonzero.join("; ")))
}

fn numeric_pw_zero(spec: &MetricSpec, pts: &[EvalPoint]) -> Result<ClaimCheck> {
    let vals = pts
        .par_iter()
        .map(|at| -> Result<f64> {
            let tw = Tower::numeric(spec, at, FULL_FIBER_ORDER)?;
            Ok(tw.field_residuals(0.0)?.pw.value() / tw.f2()?.value())
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(ClaimCheck::numeric("vacuum residual = 0", worst, ZERO_TOL, pts.len(), format!("pw/F² = {vals:?}")))
}

fn exact_pw_zero(spec: &MetricSpec, pts: &[EvalPoint]) -> Result<ClaimCheck> {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for at in pts {
        let tw = Tower::exact(spec, at)?;
        let pw = tw.field_residuals(0.0)?.pw;
        ok &= pw.vanishes_at_point();
        worst = worst.max(pw.value().abs());
    }
    Ok(ClaimCheck::exact("vacuum residual = 0", worst, ok, pts.len(), String::new()))
}

fn defect_holds(prop: Property, b: &Builtin, seed: u64) -> Result<ClaimCheck> {
    let bases = sample_points(&b.spec, &b.x_box, 20, seed)?;
    let per = prop.min_samples(b.spec.dimension) + 2;
    let mut samples = Vec::new();
    for (k, base) in bases.iter().enumerate() {
        samples.extend(sample_fibers(&b.spec, &base.xf, per, seed.wrapping_add(k as u64 + 1))?);
    }
    let rep = defect(prop, &b.spec, &samples, Backend::Numeric, &DefectOptions { seed: Some(seed), ..Default::default() })?;
    Ok(ClaimCheck::numeric(
        &format!("{} holds", prop.name()),
        rep.residual,
        rep.tol,
        samples.len(),
        format!("{} base points", bases.len()),
    ))
}

/// Einstein fit for `A(t) = t` at five times with fifty fibers each.
pub fn example3_fit(m: i64, seed: u64) -> Result<ClaimCheck> {
    let spec = example3("x1", m, "1")?;
    let mut worst: f64 = 0.0;
    let mut tol: f64 = 0.0;
    let mut detail = Vec::new();
    for (k, t) in [0.5, 1.0, 1.5, 2.0, 2.5].into_iter().enumerate() {
        let x = [t, 0.25, -0.5, 0.125];
        let fibers = sample_fibers(&spec, &x, 50, seed.wrapping_add(k as u64))?;
        let xr = fibers[0].x.clone();
        let ys: Vec<Vec<Rational>> = fibers.into_iter().map(|p| p.y).collect();
        let fit = einstein_fit(&spec, &xr, &ys, Backend::Numeric)?;
        let th = fit.theta.iter().map(|v| v.abs()).fold(0.0, f64::max);
        worst = worst.max(fit.k.abs()).max(th).max(fit.residual);
        tol = tol.max(fit.tol);
        detail.push(format!("t={t}: K={:.3e} |θ|={th:.3e} res={:.3e}", fit.k, fit.residual));
    }
    Ok(ClaimCheck::numeric("Einstein fit: K = 0, θ = 0 (A(t) = t)", worst, tol, 250, detail.join("; ")))
}

/// Classical value of the vacuum residual on the unit `S³ × R`:
/// `Ric = 2 g_S(y,y)`, scalar curvature 6, no Landsberg term.
pub fn s3xr_oracle(at: &EvalPoint) -> f64 {
    let s: f64 = at.xf[..3].iter().map(|v| v * v).sum();
    let conf = 4.0 / (1.0 + s).powi(2);
    let ys: f64 = at.yf[..3].iter().map(|v| v * v).sum::<f64>() * conf;
    let yt = at.yf[3];
    let f2 = ys + yt * yt;
    -2.0 * (2.0 * ys) + 2.0 * f2 / 3.0 * 6.0
}

//! Rationality table, defect functionals for the special metric classes and
//! the Einstein fit.
//!
//! Every defect is written as an equation homogeneous of degree 0 in `y`,
//! so residuals do not depend on how the fiber samples are scaled. Free
//! functions of `x` are fitted by linear least squares over the samples
//! sharing a base point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use kropina_ratfun::{Certificate, Rational};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::Jet;
use crate::curvature::Tower;
use crate::error::{CoreError, Result};
use crate::exact::ExactJet;
use crate::geometry::{auto_fiber, integer_m, FundamentalTensors};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::spec::{EvalPoint, MetricSpec};

/// Numeric relative tolerance for defect verdicts.
pub const DEFAULT_RTOL: f64 = 1e-8;
/// Tolerance for the conclusion side of the rigidity checks.
pub const CONCLUSION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    Numeric,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Numeric => "numeric",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    IsotropicMeanBerwald,
    IsotropicMeanLandsberg,
    RelativelyIsotropicLandsberg,
    IsotropicSCurvature,
    WeakEinstein,
    Einstein,
    RicciFlat,
    AlmostVanishingH,
    AlmostIsotropicFlag,
    Berwald,
    Landsberg,
    WeaklyLandsberg,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::IsotropicMeanBerwald,
        Property::IsotropicMeanLandsberg,
        Property::RelativelyIsotropicLandsberg,
        Property::IsotropicSCurvature,
        Property::WeakEinstein,
        Property::Einstein,
        Property::RicciFlat,
        Property::AlmostVanishingH,
        Property::AlmostIsotropicFlag,
        Property::Berwald,
        Property::Landsberg,
        Property::WeaklyLandsberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::IsotropicMeanBerwald => "isotropic-mean-berwald",
            Property::IsotropicMeanLandsberg => "isotropic-mean-landsberg",
            Property::RelativelyIsotropicLandsberg => "relatively-isotropic-landsberg",
            Property::IsotropicSCurvature => "isotropic-s-curvature",
            Property::WeakEinstein => "weak-einstein",
            Property::Einstein => "einstein",
            Property::RicciFlat => "ricci-flat",
            Property::AlmostVanishingH => "almost-vanishing-h",
            Property::AlmostIsotropicFlag => "almost-isotropic-flag",
            Property::Berwald => "berwald",
            Property::Landsberg => "landsberg",
            Property::WeaklyLandsberg => "weakly-landsberg",
        }
    }

    /// Fiber jet order the numeric tower needs for this property.
    fn fiber_order(self) -> usize {
        match self {
            Property::RicciFlat
            | Property::Einstein
            | Property::WeakEinstein
            | Property::IsotropicSCurvature
            | Property::AlmostIsotropicFlag
            | Property::Berwald => 2,
            Property::IsotropicMeanBerwald
            | Property::IsotropicMeanLandsberg
            | Property::RelativelyIsotropicLandsberg
            | Property::Landsberg
            | Property::WeaklyLandsberg => 3,
            Property::AlmostVanishingH => 4,
        }
    }

    /// Names of the fitted free functions at one base point.
    fn unknowns(self, n: usize) -> Vec<String> {
        let idx = |p: &str| (1..=n).map(|i| format!("{p}_{i}")).collect::<Vec<_>>();
        match self {
            Property::IsotropicMeanBerwald
            | Property::IsotropicMeanLandsberg
            | Property::RelativelyIsotropicLandsberg
            | Property::IsotropicSCurvature => vec!["A".into()],
            Property::Einstein => vec!["K".into()],
            Property::WeakEinstein => {
                let mut v = vec!["K".to_string()];
                v.extend(idx("theta"));
                v
            }
            Property::AlmostVanishingH => idx("a"),
            Property::AlmostIsotropicFlag => {
                let mut v = idx("dA");
                v.push("sigma".into());
                v
            }
            Property::Berwald => {
                let mut v = Vec::new();
                for i in 1..=n {
                    for j in 1..=n {
                        for k in j..=n {
                            v.push(format!("G{i}_{j}{k}"));
                        }
                    }
                }
                v
            }
            Property::RicciFlat | Property::Landsberg | Property::WeaklyLandsberg => vec![],
        }
    }

    /// Minimum number of fiber samples per base point.
    pub fn min_samples(self, n: usize) -> usize {
        match self {
            Property::WeakEinstein | Property::AlmostIsotropicFlag => n + 2,
            Property::AlmostVanishingH => n + 1,
            Property::Berwald => n * (n + 1) / 2 + 1,
            Property::RicciFlat | Property::Landsberg | Property::WeaklyLandsberg => 1,
            _ => 2,
        }
    }

    pub fn exact_capable(self) -> bool {
        matches!(
            self,
            Property::RicciFlat | Property::Berwald | Property::Landsberg | Property::WeaklyLandsberg
        )
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Property> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Property::ALL
            .into_iter()
            .find(|p| p.name() == key || format!("{p:?}").to_ascii_lowercase() == key.replace('-', ""))
            .ok_or_else(|| {
                let names: Vec<&str> = Property::ALL.iter().map(|p| p.name()).collect();
                CoreError::Config(format!("unknown property '{s}' (known: {})", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// Fitted free functions at one base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub x: String,
    pub values: BTreeMap<String, f64>,
}

/// Observable consequence of a rigidity theorem, checked when the
/// hypothesis holds and `m` is a nonzero even integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConclusionCheck {
    pub statement: String,
    pub value: f64,
    pub tol: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub property: Property,
    pub backend: Backend,
    pub params: Vec<FitParams>,
    pub residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub n_samples: usize,
    pub seed: Option<u64>,
    pub samples: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conclusion: Option<ConclusionCheck>,
}

#[derive(Clone, Debug)]
pub struct DefectOptions {
    pub rtol: f64,
    pub seed: Option<u64>,
}

impl Default for DefectOptions {
    fn default() -> Self {
        DefectOptions {
            rtol: DEFAULT_RTOL,
            seed: None,
        }
    }
}

/// Linear equations contributed by one sample: `rows · p ≈ rhs`.
#[derive(Clone, Debug, Default)]
struct SampleEqs {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a Jet>) -> f64 {
    it.into_iter().map(|v| v.value().abs()).fold(0.0, f64::max)
}

/// `|g·y|·max|Gⁱ_jk|/|y|`: the size of `y_m Gᵐ_ijk`-type terms, degree 0.
fn landsberg_scale(tw: &Tower<Jet>, y: &[f64]) -> Result<f64> {
    let g = tw.g()?;
    let yl: f64 = g.iter().map(|row| row.iter().zip(y).map(|(a, b)| a.value() * b).sum::<f64>().powi(2)).sum::<f64>().sqrt();
    let ynorm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(yl * max_abs(tw.berwald_gamma()?.iter().flatten().flatten()) / ynorm)
}

fn sample_eqs(prop: Property, spec: &MetricSpec, at: &EvalPoint) -> Result<SampleEqs> {
    let tw = Tower::numeric(spec, at, prop.fiber_order())?;
    let n = tw.dim();
    let nf = n as f64;
    let f = tw.frame.f()?.value();
    let f2 = tw.f2()?.value();
    let y: Vec<f64> = at.yf.clone();
    let mut e = SampleEqs::default();
    let mut push = |row: Vec<f64>, rhs: f64| {
        e.rows.push(row);
        e.rhs.push(rhs);
    };
    match prop {
        Property::RicciFlat => push(vec![], tw.ric()?.value() / f2),
        Property::Einstein => push(vec![nf - 1.0], tw.ric()?.value() / f2),
        Property::WeakEinstein => {
            let mut row = vec![nf - 1.0];
            row.extend(y.iter().map(|v| 3.0 * (nf - 1.0) * v / f));
            push(row, tw.ric()?.value() / f2);
        }
        Property::IsotropicMeanBerwald => {
            let ft = FundamentalTensors::compute(&tw.frame)?;
            let em = tw.mean_berwald()?;
            for i in 0..n {
                for j in i..n {
                    push(vec![(nf + 1.0) / 2.0 * ft.h[i][j].value()], f * em[i][j].value());
                }
            }
        }
        Property::IsotropicMeanLandsberg => {
            let ft = FundamentalTensors::compute(&tw.frame)?;
            let s = landsberg_scale(&tw, &y)?.max(1.0);
            let j = tw.mean_landsberg()?;
            for k in 0..n {
                push(vec![f * ft.mean_cartan[k].value() / s], j[k].value() / s);
            }
        }
        Property::RelativelyIsotropicLandsberg => {
            // same per-sample scale as the Landsberg zero check
            let ft = FundamentalTensors::compute(&tw.frame)?;
            let s = landsberg_scale(&tw, &y)?.max(1.0);
            let l = tw.landsberg()?;
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        push(vec![f * ft.cartan[i][j][k].value() / s], l[i][j][k].value() / s);
                    }
                }
            }
        }
        Property::IsotropicSCurvature => {
            let s = tw.s_curvature_alpha()?.value() / f;
            push(vec![nf + 1.0], s);
        }
        Property::AlmostVanishingH => {
            let ft = FundamentalTensors::compute(&tw.frame)?;
            let h = tw.h_curvature()?;
            for i in 0..n {
                for j in i..n {
                    let c = (nf + 1.0) / 2.0 * ft.h[i][j].value();
                    push(y.iter().map(|v| c * v / f).collect(), h[i][j].value());
                }
            }
        }
        Property::AlmostIsotropicFlag => {
            for k in 0..n {
                let mut u = vec![Rational::from_integer(0.into()); n];
                u[k] = Rational::from_integer(1.into());
                match tw.flag_curvature(&u) {
                    Ok(kv) => {
                        let mut row: Vec<f64> = y.iter().map(|v| v / f).collect();
                        row.push(1.0);
                        push(row, kv.value());
                    }
                    Err(CoreError::DegenerateFlag) => continue,
                    Err(err) => return Err(err),
                }
            }
        }
        Property::Berwald => {
            // Gⁱ/|y|² against yʲyᵏ/|y|², one block per i. The Euclidean
            // norm keeps rows bounded where F² is small.
            let q = n * (n + 1) / 2;
            let y2: f64 = y.iter().map(|v| v * v).sum();
            let mono: Vec<f64> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).map(|(j, k)| y[j] * y[k] / y2).collect();
            for i in 0..n {
                let mut row = vec![0.0; n * q];
                row[i * q..(i + 1) * q].copy_from_slice(&mono);
                push(row, tw.spray.g[i].value() / y2);
            }
        }
        Property::Landsberg => {
            // no fitted side sets a scale, so each sample is measured
            // against the size of its own terms
            let s = landsberg_scale(&tw, &y)?.max(1.0);
            let l = tw.landsberg()?;
            for v in l.iter().flatten().flatten() {
                push(vec![], v.value() / s);
            }
        }
        Property::WeaklyLandsberg => {
            let s = landsberg_scale(&tw, &y)?.max(1.0);
            for v in tw.mean_landsberg()? {
                push(vec![], v.value() / s);
            }
        }
    }
    Ok(e)
}

/// Least-squares solution; `None` when the design matrix is rank deficient.
pub fn lstsq(rows: &[Vec<f64>], rhs: &[f64], unknowns: usize) -> Option<Vec<f64>> {
    if unknowns == 0 {
        return Some(vec![]);
    }
    let a = DMatrix::from_fn(rows.len(), unknowns, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-12 * smax.max(f64::MIN_POSITIVE);
    if rows.len() < unknowns || svd.singular_values.iter().filter(|s| **s > eps).count() < unknowns {
        return None;
    }
    svd.solve(&b, eps).ok().map(|x| x.iter().copied().collect())
}

fn x_key(p: &EvalPoint) -> String {
    p.x.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

/// Groups sample indices by base point, in first-appearance order.
fn group_by_x(samples: &[EvalPoint]) -> Vec<(String, Vec<usize>)> {
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let k = x_key(s);
        match out.iter_mut().find(|(key, _)| *key == k) {
            Some((_, v)) => v.push(i),
            None => out.push((k, vec![i])),
        }
    }
    out
}

/// Nonzero even integer `m` outside the pseudo-Riemannian family.
fn even_m(spec: &MetricSpec) -> bool {
    let p = spec.params();
    !p.pseudo_riemannian && integer_m(&p).is_some_and(|m| m != 0 && m % 2 == 0)
}

/// Evaluates the defect of `prop` over `samples`.
pub fn defect(prop: Property, spec: &MetricSpec, samples: &[EvalPoint], backend: Backend, opts: &DefectOptions) -> Result<DefectReport> {
    if samples.is_empty() {
        return Err(CoreError::InsufficientSamples { needed: 1, got: 0 });
    }
    match backend {
        Backend::Exact => defect_exact(prop, spec, samples, opts),
        Backend::Numeric => defect_numeric(prop, spec, samples, opts),
    }
}

fn defect_numeric(prop: Property, spec: &MetricSpec, samples: &[EvalPoint], opts: &DefectOptions) -> Result<DefectReport> {
    let n = spec.dimension;
    let names = prop.unknowns(n);
    let groups = group_by_x(samples);
    let need = prop.min_samples(n);
    for (_, idx) in &groups {
        if idx.len() < need {
            return Err(CoreError::InsufficientSamples { needed: need, got: idx.len() });
        }
    }
    let eqs: Vec<SampleEqs> = samples.par_iter().map(|s| sample_eqs(prop, spec, s)).collect::<Result<Vec<_>>>()?;
    let mut residual: f64 = 0.0;
    let mut dominant: f64 = 0.0;
    let mut params = Vec::new();
    for (key, idx) in &groups {
        let rows: Vec<Vec<f64>> = idx.iter().flat_map(|i| eqs[*i].rows.iter().cloned()).collect();
        let rhs: Vec<f64> = idx.iter().flat_map(|i| eqs[*i].rhs.iter().copied()).collect();
        let p = lstsq(&rows, &rhs, names.len()).ok_or(CoreError::InsufficientSamples {
            needed: names.len(),
            got: idx.len(),
        })?;
        for (row, b) in rows.iter().zip(&rhs) {
            let fit: f64 = row.iter().zip(&p).map(|(a, c)| a * c).sum();
            residual = residual.max((b - fit).abs());
            dominant = dominant.max(b.abs()).max(fit.abs());
        }
        if !names.is_empty() && prop != Property::Berwald {
            params.push(FitParams {
                x: key.clone(),
                values: names.iter().cloned().zip(p.iter().copied()).collect(),
            });
        }
    }
    let tol = opts.rtol * dominant.max(1.0);
    let verdict = if residual <= tol { Verdict::Holds } else { Verdict::Fails };
    let conclusion = if verdict.holds() && even_m(spec) {
        conclusion_check(prop, &eqs, &params)
    } else {
        None
    };
    Ok(DefectReport {
        property: prop,
        backend: Backend::Numeric,
        params,
        residual,
        tol,
        verdict,
        n_samples: samples.len(),
        seed: opts.seed,
        samples: samples.iter().map(|s| s.to_string()).collect(),
        conclusion,
    })
}

fn conclusion_check(prop: Property, eqs: &[SampleEqs], params: &[FitParams]) -> Option<ConclusionCheck> {
    // each equation reads `lhs = A·row`; the conclusion `A = 0` forces the
    // left side to vanish, measured against the size of its own row
    let sample_max = || {
        eqs.iter()
            .flat_map(|e| e.rows.iter().zip(&e.rhs))
            .map(|(row, b)| b.abs() / row.iter().fold(1.0_f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    };
    let param_max = |prefix: &str| {
        params
            .iter()
            .flat_map(|p| p.values.iter())
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    };
    let (statement, value) = match prop {
        Property::IsotropicMeanBerwald => ("weakly Berwald: max|E_ij| = 0", sample_max()),
        Property::IsotropicMeanLandsberg => ("weakly Landsberg: max|J_k| = 0", sample_max()),
        Property::RelativelyIsotropicLandsberg => ("Landsberg: max|L_ijk| = 0", sample_max()),
        Property::IsotropicSCurvature => ("S vanishes: max|S|/F = 0", sample_max()),
        Property::AlmostVanishingH => ("H = 0: max|H_ij| = 0", sample_max()),
        Property::WeakEinstein => ("Einstein: max|θ_i| = 0", param_max("theta")),
        Property::AlmostIsotropicFlag => ("constant flag curvature: max|∂A| = 0", param_max("dA")),
        _ => return None,
    };
    Some(ConclusionCheck {
        statement: statement.into(),
        value,
        tol: CONCLUSION_TOL,
        holds: value <= CONCLUSION_TOL,
    })
}

/// Exact defects exist only for properties that assert a literal zero.
fn defect_exact(prop: Property, spec: &MetricSpec, samples: &[EvalPoint], opts: &DefectOptions) -> Result<DefectReport> {
    if !prop.exact_capable() {
        return Err(CoreError::ExactBackendUnavailable(format!(
            "{prop} needs a least-squares fit; use the numeric backend"
        )));
    }
    spec.exact_admissible()?;
    let per: Vec<(bool, f64)> = samples
        .par_iter()
        .map(|at| -> Result<(bool, f64)> {
            let tw = Tower::exact(spec, at)?;
            let f2 = tw.f2()?.value();
            let vals: Vec<ExactJet> = match prop {
                Property::RicciFlat => vec![tw.ric()?.clone()],
                Property::Berwald => tw.berwald_curvature()?.iter().flatten().flatten().flatten().cloned().collect(),
                Property::Landsberg => tw.landsberg()?.iter().flatten().flatten().cloned().collect(),
                Property::WeaklyLandsberg => tw.mean_landsberg()?.clone(),
                _ => unreachable!("checked by exact_capable"),
            };
            let zero = vals.iter().all(|v| v.vanishes_at_point());
            let size = vals.iter().map(|v| v.value().abs()).fold(0.0, f64::max);
            let size = if prop == Property::RicciFlat { size / f2.abs() } else { size };
            Ok((zero, size))
        })
        .collect::<Result<Vec<_>>>()?;
    let all_zero = per.iter().all(|(z, _)| *z);
    let residual = per.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    Ok(DefectReport {
        property: prop,
        backend: Backend::Exact,
        params: vec![],
        residual: if all_zero { 0.0 } else { residual.max(f64::MIN_POSITIVE) },
        tol: 0.0,
        verdict: if all_zero { Verdict::Holds } else { Verdict::Fails },
        n_samples: samples.len(),
        seed: opts.seed,
        samples: samples.iter().map(|s| s.to_string()).collect(),
        conclusion: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EinsteinClass {
    RicciFlat,
    Einstein,
    WeakEinstein,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinFit {
    pub k: f64,
    pub theta: Vec<f64>,
    pub residual: f64,
    pub tol: f64,
    pub class: EinsteinClass,
}

/// Weak-Einstein fit from raw values `(Ric, F, y)` at a fixed base point.
pub fn einstein_fit_values(n: usize, data: &[(f64, f64, Vec<f64>)], rtol: f64) -> Result<EinsteinFit> {
    if data.len() < n + 2 {
        return Err(CoreError::InsufficientSamples {
            needed: n + 2,
            got: data.len(),
        });
    }
    let nf = n as f64;
    let mut rows = Vec::with_capacity(data.len());
    let mut rhs = Vec::with_capacity(data.len());
    for (ric, f, y) in data {
        let mut row = vec![nf - 1.0];
        row.extend(y.iter().map(|v| 3.0 * (nf - 1.0) * v / f));
        rows.push(row);
        rhs.push(ric / (f * f));
    }
    let p = lstsq(&rows, &rhs, n + 1).ok_or(CoreError::InsufficientSamples {
        needed: n + 1,
        got: data.len(),
    })?;
    let mut residual: f64 = 0.0;
    let mut dominant: f64 = 0.0;
    for (row, b) in rows.iter().zip(&rhs) {
        let fit: f64 = row.iter().zip(&p).map(|(a, c)| a * c).sum();
        residual = residual.max((b - fit).abs());
        dominant = dominant.max(b.abs());
    }
    let tol = rtol * dominant.max(1.0);
    let k = p[0];
    let theta = p[1..].to_vec();
    let th_max = theta.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let class = if residual > tol {
        EinsteinClass::None
    } else if th_max > tol {
        EinsteinClass::WeakEinstein
    } else if k.abs() > tol {
        EinsteinClass::Einstein
    } else {
        EinsteinClass::RicciFlat
    };
    Ok(EinsteinFit {
        k,
        theta,
        residual,
        tol,
        class,
    })
}

/// Weak-Einstein fit of `Ric` over fiber samples at one base point.
pub fn einstein_fit(spec: &MetricSpec, x: &[Rational], y_samples: &[Vec<Rational>], backend: Backend) -> Result<EinsteinFit> {
    let n = spec.dimension;
    if x.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: x.len() });
    }
    if backend == Backend::Exact {
        spec.exact_admissible()?;
    }
    let data = y_samples
        .par_iter()
        .map(|y| -> Result<(f64, f64, Vec<f64>)> {
            let at = EvalPoint::new(x.to_vec(), y.clone())?;
            let (ric, f) = match backend {
                Backend::Numeric => {
                    let tw = Tower::numeric(spec, &at, 2)?;
                    (tw.ric()?.value(), tw.frame.f()?.value())
                }
                Backend::Exact => {
                    let tw = Tower::exact(spec, &at)?;
                    (tw.ric()?.value(), tw.frame.f()?.value())
                }
            };
            Ok((ric, f, at.yf.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    einstein_fit_values(n, &data, DEFAULT_RTOL)
}

/// Fiber-rationality verdict of a table row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rationality {
    Rational,
    Irrational,
}

impl From<Certificate> for Rationality {
    fn from(c: Certificate) -> Self {
        match c {
            Certificate::Rational => Rationality::Rational,
            Certificate::Irrational => Rationality::Irrational,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalityRow {
    pub object: String,
    pub m_tested: i64,
    pub certificate: Rationality,
    /// Condition on `m` under which the object is rational.
    pub condition: String,
    pub expected: Rationality,
    pub matches: bool,
}

fn combined<'a>(items: impl IntoIterator<Item = &'a ExactJet>) -> Rationality {
    if items.into_iter().all(|v| v.rationality() == Certificate::Rational) {
        Rationality::Rational
    } else {
        Rationality::Irrational
    }
}

/// One row per object of the table, each certified from the canonical form
/// of its exact value at `(at_x, y)` with `y` chosen automatically.
pub fn rationality_table(spec: &MetricSpec, at_x: &[Rational]) -> Result<Vec<RationalityRow>> {
    spec.exact_admissible()?;
    let p = spec.params();
    let m = integer_m(&p).ok_or_else(|| CoreError::ExactBackendUnavailable("m must be an integer".into()))?;
    let at = auto_fiber(spec, at_x)?;
    rationality_table_at(spec, &at, m)
}

fn rationality_table_at(spec: &MetricSpec, at: &EvalPoint, m: i64) -> Result<Vec<RationalityRow>> {
    let n = spec.dimension;
    let tw = Tower::exact(spec, at)?;
    let ft = FundamentalTensors::compute(&tw.frame)?;
    let odd = m.rem_euclid(2) == 1;
    let flat = |mx: &Matrix<ExactJet>| mx.iter().flatten().cloned().collect::<Vec<_>>();
    let mut rows = Vec::new();
    let mut row = |object: &str, items: Vec<ExactJet>, odd_only: bool| {
        let expected = if !odd_only || odd { Rationality::Rational } else { Rationality::Irrational };
        let certificate = combined(&items);
        rows.push(RationalityRow {
            object: object.into(),
            m_tested: m,
            certificate,
            condition: if odd_only { "m odd integer".into() } else { "m ∈ Z".into() },
            expected,
            matches: certificate == expected,
        });
    };
    row("F", vec![ft.f.clone()], true);
    row("g_ij", flat(&ft.g), false);
    row("η", vec![ft.eta.clone()], false);
    row("C_ijk", ft.cartan.iter().flat_map(flat).collect(), false);
    row("I_i", ft.mean_cartan.clone(), false);
    let inv_eta = ft.eta.try_recip()?;
    let mut dl = Vec::new();
    for i in 0..n {
        dl.push(ft.eta.dx(i)? * &inv_eta);
        dl.push(ft.eta.dy(i)? * &inv_eta);
    }
    row("∂_i log η, ∂̇_i log η", dl, false);
    row("h_ij", flat(&ft.h), false);
    row("ℓ_i", ft.ell.clone(), true);
    let mut spray: Vec<ExactJet> = tw.spray.g.clone();
    spray.extend(flat(&tw.n));
    spray.extend(tw.berwald_gamma()?.iter().flat_map(flat));
    spray.extend(tw.berwald_curvature()?.iter().flatten().flat_map(flat));
    row("Gⁱ, Nⁱ_j, Gⁱ_jk, Gⁱ_jkl", spray, false);
    let mut ehj = flat(tw.mean_berwald()?);
    ehj.extend(flat(&tw.h_curvature()?));
    ehj.extend(tw.mean_landsberg()?.iter().cloned());
    row("E_ij, H_ij, J_i", ehj, false);
    let mut curv = flat(tw.riemann()?);
    curv.push(tw.ric()?.clone());
    curv.extend(flat(tw.ricci_tensor()?));
    curv.push(tw.n_trace());
    row("Rⁱ_j, Ric, R_ij, S", curv, false);
    row("K", vec![tw.flag_curvature(&flag_direction(at))?], false);
    row("L_ijk", tw.landsberg()?.iter().flat_map(flat).collect(), false);
    Ok(rows)
}

/// A fixed integer direction that is never parallel to `y`.
fn flag_direction(at: &EvalPoint) -> Vec<Rational> {
    let n = at.dim();
    let mut u: Vec<Rational> = (0..n).map(|i| Rational::from_integer(((i % 3) as i64 + 1).into())).collect();
    // u and y parallel iff all 2×2 minors vanish
    let parallel = (0..n).all(|i| (0..n).all(|j| &u[i] * &at.y[j] == &u[j] * &at.y[i]));
    if parallel {
        u[0] = &u[0] + Rational::from_integer(1.into());
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_line() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let rhs: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let p = lstsq(&rows, &rhs, 2).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-12 && (p[1] - 3.0).abs() < 1e-12);
        assert!(lstsq(&rows[..1], &rhs[..1], 2).is_none());
    }

    #[test]
    fn property_names_parse() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
        assert_eq!("RicciFlat".parse::<Property>().unwrap(), Property::RicciFlat);
        assert!("ricci".parse::<Property>().is_err());
    }
}

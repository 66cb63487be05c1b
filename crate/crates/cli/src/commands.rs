use std::fs;

use kropina_core::builtins::{builtin, with_m, Builtin};
use kropina_core::classify::{defect, rationality_table, Backend, DefectOptions, Property, DEFAULT_RTOL};
use kropina_core::curvature::{Tower, FULL_FIBER_ORDER};
use kropina_core::exact::ExactJet;
use kropina_core::expr::Expr;
use kropina_core::geometry::FundamentalTensors;
use kropina_core::montecarlo::indicatrix_average;
use kropina_core::sampling::{sample_fibers, sample_points};
use kropina_core::scalar::Scalar;
use kropina_core::spec::{EvalPoint, MetricSpec};
use kropina_core::verify::verify_builtin;
use kropina_core::CoreError;
use kropina_ratfun::{Certificate, Rational};
use serde_json::json;

use crate::args::{BackendArg, Cli, Command, Common};
use crate::json::float;
use crate::{CliError, Item};

type CliResult<T> = std::result::Result<T, CliError>;

const DEFAULT_ATOL: f64 = 1e-12;
const DEFAULT_RTOL_CMP: f64 = 1e-9;
/// Seed used by `verify-example` when none is given; part of the claim setup.
const VERIFY_SEED: u64 = 0;

/// Objects `compute` knows, with the numeric fiber order each needs.
pub const OBJECTS: &[(&str, usize)] = &[
    ("f", 3),
    ("f2", 3),
    ("g", 3),
    ("g-inv", 3),
    ("det-g", 3),
    ("eta", 3),
    ("h", 3),
    ("ell", 3),
    ("cartan", 3),
    ("mean-cartan", 3),
    ("spray", 3),
    ("barthel", 3),
    ("berwald-connection", 3),
    ("berwald-curvature", 3),
    ("mean-berwald", 3),
    ("landsberg", 3),
    ("mean-landsberg", 3),
    ("riemann", 3),
    ("ric", 3),
    ("ricci-tensor", 4),
    ("h-curvature", 4),
    ("s-curvature", 3),
    ("flag", 3),
];

pub(crate) fn dispatch(cli: &Cli) -> CliResult<Vec<Item>> {
    let c = &cli.common;
    match &cli.command {
        Command::Compute { object, at, u, density } => compute(c, object, at, u.as_deref(), density.as_deref()),
        Command::RationalityTable { at_x } => rationality(c, at_x.as_deref()),
        Command::Classify { property, bases } => classify(c, property, *bases),
        Command::FieldResidual { at, r_avg, r_avg_samples } => field_residual(c, at, *r_avg, *r_avg_samples),
        Command::VerifyExample { id } => verify(c, id),
    }
}

struct Loaded {
    spec: MetricSpec,
    builtin: Option<Builtin>,
}

impl Loaded {
    fn x_box(&self) -> Vec<(f64, f64)> {
        match &self.builtin {
            Some(b) => b.x_box.clone(),
            None => vec![(-1.0, 1.0); self.spec.dimension],
        }
    }
}

fn load(c: &Common) -> CliResult<Loaded> {
    match (&c.config, &c.builtin) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let mut spec = MetricSpec::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if let Some(m) = c.m {
                spec = with_m(&spec, m).map_err(|e| CliError::Config(e.to_string()))?;
            }
            Ok(Loaded { spec, builtin: None })
        }
        (None, Some(id)) => {
            let b = builtin(id, c.m).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Loaded {
                spec: b.spec.clone(),
                builtin: Some(b),
            })
        }
        (None, None) => Err(CliError::Config("one of --config or --builtin is required".into())),
        (Some(_), Some(_)) => Err(CliError::Config("--config and --builtin are mutually exclusive".into())),
    }
}

fn backends(c: &Common, default: BackendArg, spec: &MetricSpec) -> CliResult<Vec<Backend>> {
    let list = match c.backend.unwrap_or(default) {
        BackendArg::Exact => vec![Backend::Exact],
        BackendArg::Numeric => vec![Backend::Numeric],
        BackendArg::Both => vec![Backend::Numeric, Backend::Exact],
    };
    if list.contains(&Backend::Exact) {
        spec.exact_admissible()
            .map_err(|e| CliError::Config(format!("--backend exact: {e}")))?;
    }
    Ok(list)
}

fn require_seed(c: &Common, what: &str) -> CliResult<u64> {
    c.seed.ok_or_else(|| CliError::Config(format!("--seed is required when {what}")))
}

/// Explicit `--at` points, else seeded samples, else the builtin's point.
fn points(c: &Common, l: &Loaded, at: &[String]) -> CliResult<Vec<EvalPoint>> {
    if !at.is_empty() {
        if c.samples.is_some() {
            return Err(CliError::Config("--at and --samples are mutually exclusive".into()));
        }
        let pts = at
            .iter()
            .map(|s| EvalPoint::parse(s).map_err(|e| CliError::Config(e.to_string())))
            .collect::<CliResult<Vec<_>>>()?;
        if let Some(p) = pts.iter().find(|p| p.dim() != l.spec.dimension) {
            return Err(CliError::Config(format!("point {p} has dimension {}, metric has {}", p.dim(), l.spec.dimension)));
        }
        return Ok(pts);
    }
    if let Some(n) = c.samples {
        let seed = require_seed(c, "sampling points")?;
        return sample_points(&l.spec, &l.x_box(), n, seed).map_err(CliError::compute("sampling points"));
    }
    match &l.builtin {
        Some(b) => Ok(vec![b.default_point.clone()]),
        None => Err(CliError::Config("give --at or --samples".into())),
    }
}

fn close(a: f64, b: f64, atol: f64, rtol: f64) -> bool {
    (a - b).abs() <= atol + rtol * a.abs().max(b.abs())
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| float(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn exact_string(v: &ExactJet) -> Result<String, CoreError> {
    let (a, b, r) = v.exact_value()?;
    Ok(if num_traits::Zero::is_zero(&b) {
        a.to_string()
    } else {
        format!("{a} + ({b})*sqrt({r})")
    })
}

fn flat_mat<S: Clone>(m: &[Vec<S>]) -> Vec<S> {
    m.iter().flatten().cloned().collect()
}

fn flat3<S: Clone>(t: &[Vec<Vec<S>>]) -> Vec<S> {
    t.iter().flatten().flatten().cloned().collect()
}

/// Evaluates an object to `(shape, row-major values)`.
fn eval_object<S: Scalar>(tw: &Tower<S>, obj: &str, u: Option<&[Rational]>, density: Option<&Expr>) -> Result<(Vec<usize>, Vec<S>), CoreError> {
    let n = tw.dim();
    let ft = || FundamentalTensors::compute(&tw.frame);
    Ok(match obj {
        "f" => (vec![], vec![tw.frame.f()?]),
        "f2" => (vec![], vec![tw.f2()?.clone()]),
        "g" => (vec![n, n], flat_mat(tw.g()?)),
        "g-inv" => (vec![n, n], flat_mat(tw.g_inv()?)),
        "det-g" => (vec![], vec![tw.frame.det_g()?]),
        "eta" => (vec![], vec![tw.frame.eta()?]),
        "h" => (vec![n, n], flat_mat(&ft()?.h)),
        "ell" => (vec![n], ft()?.ell),
        "cartan" => (vec![n, n, n], flat3(&ft()?.cartan)),
        "mean-cartan" => (vec![n], ft()?.mean_cartan),
        "spray" => (vec![n], tw.spray.g.clone()),
        "barthel" => (vec![n, n], flat_mat(&tw.n)),
        "berwald-connection" => (vec![n, n, n], flat3(tw.berwald_gamma()?)),
        "berwald-curvature" => (vec![n, n, n, n], tw.berwald_curvature()?.iter().flatten().flatten().flatten().cloned().collect()),
        "mean-berwald" => (vec![n, n], flat_mat(tw.mean_berwald()?)),
        "landsberg" => (vec![n, n, n], flat3(tw.landsberg()?)),
        "mean-landsberg" => (vec![n], tw.mean_landsberg()?.clone()),
        "riemann" => (vec![n, n], flat_mat(tw.riemann()?)),
        "ric" => (vec![], vec![tw.ric()?.clone()]),
        "ricci-tensor" => (vec![n, n], flat_mat(tw.ricci_tensor()?)),
        "h-curvature" => (vec![n, n], flat_mat(&tw.h_curvature()?)),
        "s-curvature" => (
            vec![],
            vec![match density {
                Some(d) => tw.s_curvature(d)?,
                None => tw.s_curvature_alpha()?,
            }],
        ),
        "flag" => {
            let u = u.ok_or_else(|| CoreError::Config("--object flag needs --u".into()))?;
            (vec![], vec![tw.flag_curvature(u)?])
        }
        other => return Err(CoreError::Config(format!("unknown object '{other}'"))),
    })
}

fn parse_rationals(s: &str, what: &str) -> CliResult<Vec<Rational>> {
    s.split(',')
        .map(|v| match Expr::parse(v.trim(), 0) {
            Ok(Expr::Num(q)) => Ok(q),
            _ => Err(CliError::Config(format!("{what}: '{v}' is not a rational number"))),
        })
        .collect()
}

fn compute(c: &Common, object: &str, at: &[String], u: Option<&str>, density: Option<&str>) -> CliResult<Vec<Item>> {
    let Some(&(_, oy)) = OBJECTS.iter().find(|(name, _)| *name == object) else {
        let names: Vec<&str> = OBJECTS.iter().map(|(n, _)| *n).collect();
        return Err(CliError::Config(format!("unknown object '{object}' (known: {})", names.join(", "))));
    };
    let l = load(c)?;
    let n = l.spec.dimension;
    let u = u.map(|s| parse_rationals(s, "--u")).transpose()?;
    if u.as_ref().is_some_and(|v| v.len() != n) {
        return Err(CliError::Config(format!("--u must have {n} entries")));
    }
    let density = density
        .map(|d| Expr::parse(d, n).map_err(|e| CliError::Config(format!("--density: {e}"))))
        .transpose()?;
    let bk = backends(c, BackendArg::Numeric, &l.spec)?;
    let pts = points(c, &l, at)?;
    let (atol, rtol) = (c.atol.unwrap_or(DEFAULT_ATOL), c.rtol.unwrap_or(DEFAULT_RTOL_CMP));
    let mut items = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let ctx = format!("compute {object} at point {k} ({p})");
        let mut numeric: Option<Vec<f64>> = None;
        let mut exact: Option<Vec<f64>> = None;
        for b in &bk {
            let mut entry = json!({"point": k, "at": p.to_string(), "backend": b.to_string(), "object": object});
            let (shape, vals) = match b {
                Backend::Numeric => {
                    let tw = Tower::numeric(&l.spec, p, oy).map_err(CliError::compute(&ctx))?;
                    let (shape, v) = eval_object(&tw, object, u.as_deref(), density.as_ref()).map_err(CliError::compute(&ctx))?;
                    let vals: Vec<f64> = v.iter().map(Scalar::value).collect();
                    numeric = Some(vals.clone());
                    (shape, vals)
                }
                Backend::Exact => {
                    let tw = Tower::exact(&l.spec, p).map_err(CliError::compute(&ctx))?;
                    let (shape, v) = eval_object(&tw, object, u.as_deref(), density.as_ref()).map_err(CliError::compute(&ctx))?;
                    let strs = v.iter().map(exact_string).collect::<Result<Vec<_>, _>>().map_err(CliError::compute(&ctx))?;
                    let rational = v.iter().all(|s| s.rationality() == Certificate::Rational);
                    entry["exact"] = json!(strs);
                    entry["certificate"] = json!(if rational { "rational" } else { "irrational" });
                    let vals: Vec<f64> = v.iter().map(Scalar::value).collect();
                    exact = Some(vals.clone());
                    (shape, vals)
                }
            };
            entry["shape"] = json!(shape);
            entry["values"] = json!(vals);
            let line = format!("point {k} [{b}] {object} {shape:?} = {}", fmt_list(&vals));
            items.push(Item { value: entry, holds: true, line });
        }
        if let (Some(a), Some(e)) = (numeric, exact) {
            let worst = a.iter().zip(&e).map(|(x, y)| (x - y).abs() / (atol + rtol * x.abs().max(y.abs()))).fold(0.0, f64::max);
            let holds = a.iter().zip(&e).all(|(x, y)| close(*x, *y, atol, rtol));
            items.push(Item {
                value: json!({"point": k, "object": object, "agreement": holds, "worst-ratio": worst, "atol": atol, "rtol": rtol}),
                holds,
                line: format!("point {k} numeric vs exact: {} (worst |Δ|/tol = {})", if holds { "agree" } else { "DISAGREE" }, float(worst)),
            });
        }
    }
    Ok(items)
}

fn rationality(c: &Common, at_x: Option<&str>) -> CliResult<Vec<Item>> {
    let l = load(c)?;
    if c.backend.is_some_and(|b| b == BackendArg::Numeric) {
        return Err(CliError::Config("rationality-table runs on the exact backend only".into()));
    }
    l.spec.exact_admissible().map_err(|e| CliError::Config(e.to_string()))?;
    let x = match (at_x, &l.builtin) {
        (Some(s), _) => parse_rationals(s, "--at-x")?,
        (None, Some(b)) => b.default_point.x.clone(),
        (None, None) => return Err(CliError::Config("--at-x is required with --config".into())),
    };
    if x.len() != l.spec.dimension {
        return Err(CliError::Config(format!("--at-x must have {} entries", l.spec.dimension)));
    }
    let rows = rationality_table(&l.spec, &x).map_err(CliError::compute("rationality-table"))?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let line = format!(
                "{}: {:?} (expected {:?}; rational when {}; m = {}) {}",
                r.object,
                r.certificate,
                r.expected,
                r.condition,
                r.m_tested,
                if r.matches { "ok" } else { "MISMATCH" }
            );
            Item {
                holds: r.matches,
                value: serde_json::to_value(&r).expect("row serializes"),
                line,
            }
        })
        .collect())
}

fn classify(c: &Common, props: &[String], bases: usize) -> CliResult<Vec<Item>> {
    let l = load(c)?;
    let n = l.spec.dimension;
    let seed = require_seed(c, "classifying (samples are drawn)")?;
    let mut list = Vec::new();
    for p in props {
        if p == "all" {
            list.extend(Property::ALL);
        } else {
            list.push(p.parse::<Property>().map_err(|e| CliError::Config(e.to_string()))?);
        }
    }
    list.dedup();
    let bk = backends(c, BackendArg::Numeric, &l.spec)?;
    let base_pts = sample_points(&l.spec, &l.x_box(), bases, seed).map_err(CliError::compute("sampling base points"))?;
    let opts = DefectOptions {
        rtol: c.rtol.unwrap_or(DEFAULT_RTOL),
        seed: Some(seed),
    };
    let mut items = Vec::new();
    for prop in list {
        let per = c.samples.unwrap_or(prop.min_samples(n) + 4);
        let mut samples = Vec::new();
        for (k, b) in base_pts.iter().enumerate() {
            let f = sample_fibers(&l.spec, &b.xf, per, seed.wrapping_add(k as u64 + 1)).map_err(CliError::compute("sampling fibers"))?;
            samples.extend(f);
        }
        for b in &bk {
            let ctx = format!("classify {} [{b}]", prop.name());
            let rep = defect(prop, &l.spec, &samples, *b, &opts).map_err(CliError::compute(ctx))?;
            let line = format!(
                "{} [{b}]: {:?} (residual {}, tol {}, {} samples)",
                prop.name(),
                rep.verdict,
                float(rep.residual),
                float(rep.tol),
                rep.n_samples
            );
            items.push(Item {
                holds: rep.verdict.holds(),
                value: serde_json::to_value(&rep).expect("report serializes"),
                line,
            });
        }
    }
    Ok(items)
}

fn field_residual(c: &Common, at: &[String], r_avg: Option<f64>, r_avg_samples: Option<usize>) -> CliResult<Vec<Item>> {
    let l = load(c)?;
    if l.spec.dimension != 4 {
        return Err(CliError::Config(format!("field residuals need dimension 4, metric has {}", l.spec.dimension)));
    }
    if r_avg.is_some() && r_avg_samples.is_some() {
        return Err(CliError::Config("--r-avg and --r-avg-samples are mutually exclusive".into()));
    }
    let bk = backends(c, BackendArg::Numeric, &l.spec)?;
    let pts = points(c, &l, at)?;
    let (atol, rtol) = (c.atol.unwrap_or(DEFAULT_ATOL), c.rtol.unwrap_or(DEFAULT_RTOL_CMP));
    let mut items = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let ctx = format!("field-residual at point {k} ({p})");
        let (ravg, est) = match (r_avg, r_avg_samples) {
            (Some(v), _) => (v, None),
            (None, Some(ns)) => {
                let seed = require_seed(c, "estimating the Ric average")?;
                let e = indicatrix_average(&l.spec, &p.xf, seed, ns).map_err(CliError::compute(&ctx))?;
                (e.mean, Some(e))
            }
            (None, None) => (0.0, None),
        };
        for b in &bk {
            let (pw, exact_zero, ric, trace, brace, f, f2) = match b {
                Backend::Numeric => {
                    let tw = Tower::numeric(&l.spec, p, FULL_FIBER_ORDER).map_err(CliError::compute(&ctx))?;
                    let r = tw.field_residuals(ravg).map_err(CliError::compute(&ctx))?;
                    let f = tw.frame.f().map_err(CliError::compute(&ctx))?.value();
                    (r.pw.value(), None, r.ric.value(), r.ricci_trace.value(), r.brace.value(), f, tw.f2().map_err(CliError::compute(&ctx))?.value())
                }
                Backend::Exact => {
                    let tw = Tower::exact(&l.spec, p).map_err(CliError::compute(&ctx))?;
                    let r = tw.field_residuals(ravg).map_err(CliError::compute(&ctx))?;
                    let f = tw.frame.f().map_err(CliError::compute(&ctx))?.value();
                    let z = r.pw.vanishes_at_point();
                    (r.pw.value(), Some(z), r.ric.value(), r.ricci_trace.value(), r.brace.value(), f, tw.f2().map_err(CliError::compute(&ctx))?.value())
                }
            };
            let cs = pw - 2.0 * f / 3.0 * ravg;
            let scale = (2.0 * ric).abs().max((2.0 * f2 / 3.0 * trace).abs()).max((2.0 * f2 / 3.0 * brace).abs());
            let pw_holds = exact_zero.unwrap_or(pw.abs() <= atol + rtol * scale);
            let cs_scale = scale.max((2.0 * f / 3.0 * ravg).abs());
            let cs_holds = if ravg == 0.0 { pw_holds } else { cs.abs() <= atol + rtol * cs_scale };
            let mut entry = json!({
                "point": k, "at": p.to_string(), "backend": b.to_string(),
                "pw": pw, "cs": cs, "ric": ric, "ricci-trace": trace, "brace": brace, "f2": f2,
                "r-avg": ravg, "pw-holds": pw_holds, "cs-holds": cs_holds,
            });
            if let Some(e) = &est {
                entry["r-avg-estimate"] = serde_json::to_value(e).expect("estimate serializes");
            }
            let line = format!(
                "point {k} [{b}] pw = {}, cs = {} (R = {}): {}",
                float(pw),
                float(cs),
                float(ravg),
                if pw_holds && cs_holds { "vanishes" } else { "nonzero" }
            );
            items.push(Item {
                value: entry,
                holds: pw_holds && cs_holds,
                line,
            });
        }
    }
    Ok(items)
}

fn verify(c: &Common, id: &str) -> CliResult<Vec<Item>> {
    if c.builtin.as_deref().is_some_and(|b| b != id) || c.config.is_some() {
        return Err(CliError::Config("verify-example takes the builtin id as its argument only".into()));
    }
    let b = builtin(id, c.m).map_err(|e| CliError::Config(e.to_string()))?;
    let bk = backends(c, BackendArg::Both, &b.spec)?;
    let seed = c.seed.unwrap_or(VERIFY_SEED);
    let checks = verify_builtin(id, c.m, &bk, seed).map_err(CliError::compute(format!("verify-example {id}")))?;
    Ok(checks
        .into_iter()
        .map(|ch| {
            let line = format!(
                "{} ({}): {} (deviation {}, tol {}, {} points)",
                ch.claim,
                ch.backend,
                if ch.holds { "holds" } else { "FAILS" },
                float(ch.value),
                float(ch.tol),
                ch.points
            );
            Item {
                holds: ch.holds,
                value: serde_json::to_value(&ch).expect("check serializes"),
                line,
            }
        })
        .collect())
}

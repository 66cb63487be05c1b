//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! observed value, the pinned tolerance and the runtime. Exits nonzero on
//! any failure that is not a recorded deviation.

use std::process::ExitCode;
use std::time::Instant;

use kropina_core::builtins::{euclidean_fixture, example1, example1_with, example2, example3, minkowski_fixture, minkowski_pr, s3xr};
use kropina_core::classify::{defect, einstein_fit, rationality_table, Backend, DefectOptions, Property};
use kropina_core::curvature::{spray_direct, spray_split, Tower, FULL_FIBER_ORDER};
use kropina_core::geometry::{det_printed, Frame};
use kropina_core::sampling::{sample_fibers, sample_points};
use kropina_core::scalar::Scalar;
use kropina_core::spec::{EvalPoint, Family, MetricSpec};
use kropina_ratfun::Rational;

mod common;
use common::s3xr_tensor_oracle;

type Outcome = Result<String, String>;

const SEED: u64 = 20;

struct Line {
    name: &'static str,
    ok: bool,
    /// Recorded deviation: printed as FAIL but does not fail the run.
    deviation: bool,
    detail: String,
    secs: f64,
}

fn run(name: &'static str, limit: Option<f64>, f: impl FnOnce() -> Outcome) -> Line {
    let t = Instant::now();
    let r = f();
    let secs = t.elapsed().as_secs_f64();
    let (mut ok, mut detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(l) = limit {
        if secs >= l {
            ok = false;
            detail.push_str(&format!("; runtime {secs:.1} s over the {l} s limit"));
        }
    }
    Line { name, ok, deviation: false, detail, secs }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Euclidean and Minkowski fixtures, m ∈ {1,2,3,4}, (c,r) ∈ {(1,0),(1,1),(2,−1)}.
fn fixtures() -> Vec<(String, MetricSpec)> {
    let mut out = Vec::new();
    for m in 1..=4 {
        for (c, r) in [(1, 0), (1, 1), (2, -1)] {
            out.push((format!("euclidean m={m} c={c} r={r}"), euclidean_fixture(m, c, r).unwrap()));
            out.push((format!("minkowski m={m} c={c} r={r}"), minkowski_fixture(m, c, r).unwrap()));
        }
    }
    out
}

/// At least `total` admissible points spread over the fixtures.
fn sweep(total: usize, seed: u64) -> Vec<(MetricSpec, EvalPoint)> {
    let fx = fixtures();
    let per = total.div_ceil(fx.len());
    fx.into_iter()
        .enumerate()
        .flat_map(|(k, (_, spec))| {
            let pts = sample_points(&spec, &[(-1.0, 1.0); 3], per, seed + k as u64).unwrap();
            pts.into_iter().map(move |p| (spec.clone(), p))
        })
        .collect()
}

fn max_rel_matrix<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> f64 {
    let scale = a.iter().chain(b).flatten().map(|v| v.value().abs()).fold(0.0, f64::max);
    let diff = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x.value() - y.value()).abs()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}

fn metric_tensor() -> Outcome {
    let pts = sweep(200, SEED);
    let mut worst: f64 = 0.0;
    let mut exact_ok = 0;
    for (spec, at) in &pts {
        let fr = Frame::numeric(spec, at, 0, 2).map_err(|e| e.to_string())?;
        worst = worst.max(max_rel_matrix(&fr.g_closed().unwrap(), &fr.g_direct().unwrap()));
        let fe = Frame::exact(spec, at, 0).map_err(|e| e.to_string())?;
        let (gc, gd) = (fe.g_closed().unwrap(), fe.g_direct().unwrap());
        if gc.iter().flatten().zip(gd.iter().flatten()).all(|(a, b)| (a.clone() - b).vanishes_at_point()) {
            exact_ok += 1;
        }
    }
    check(
        worst <= 1e-9 && exact_ok == pts.len(),
        format!("{} points, numeric max rel {worst:.2e} (tol 1e-9), exact equal at {exact_ok}/{}", pts.len(), pts.len()),
    )
}

fn det3<S: Scalar>(g: &[Vec<S>]) -> S {
    let m = |i: usize, j: usize, k: usize, l: usize| g[i][k].clone() * &g[j][l] - &(g[i][l].clone() * &g[j][k]);
    g[0][0].clone() * &m(1, 2, 1, 2) - &(g[0][1].clone() * &m(1, 2, 0, 2)) + &(g[0][2].clone() * &m(1, 2, 0, 1))
}

fn determinant() -> Outcome {
    let pts = sweep(200, SEED + 100);
    let mut worst: f64 = 0.0;
    let mut exact_ok = 0;
    for (spec, at) in &pts {
        let fr = Frame::numeric(spec, at, 0, 2).map_err(|e| e.to_string())?;
        let gd = fr.g_direct().unwrap();
        let direct = det3(&gd).value();
        // floating determinants are accurate to eps·∏‖row‖, not to eps·|det|
        let hadamard: f64 = gd.iter().map(|r| r.iter().map(|v| v.value().powi(2)).sum::<f64>().sqrt()).product();
        for v in [det_printed(spec, at).unwrap(), fr.det_g().unwrap().value()] {
            worst = worst.max((v - direct).abs() / hadamard);
        }
        let fe = Frame::exact(spec, at, 0).map_err(|e| e.to_string())?;
        if (fe.det_g().unwrap() - &det3(&fe.g_closed().unwrap())).vanishes_at_point() {
            exact_ok += 1;
        }
    }
    check(
        worst <= 1e-9 && exact_ok == pts.len(),
        format!(
            "{} points, numeric max |Δdet|/∏‖g_i‖ {worst:.2e} (tol 1e-9), exact equal at {exact_ok}/{}",
            pts.len(),
            pts.len()
        ),
    )
}

fn spray_routes() -> Outcome {
    let pts = sweep(200, SEED + 200);
    let mut worst: f64 = 0.0;
    let (mut exact_ok, mut exact_n) = (0, 0);
    for (k, (spec, at)) in pts.iter().enumerate() {
        if k % 4 == 0 {
            let fe = Frame::exact(spec, at, 1).map_err(|e| e.to_string())?;
            let (a, b) = (spray_split(&fe).unwrap().g, spray_direct(&fe).unwrap());
            exact_n += 1;
            if a.iter().zip(&b).all(|(u, v)| (u.clone() - v).vanishes_at_point()) {
                exact_ok += 1;
            }
        }
        let fr = Frame::numeric(spec, at, 1, 2).map_err(|e| e.to_string())?;
        let split = spray_split(&fr).unwrap().g;
        let direct = spray_direct(&fr).unwrap();
        // the direct route cancels large terms where β/α is small, so each
        // component is measured against ¼Σ_r |g^{ir}|·Σ|terms of w_r|
        let n = spec.dimension;
        let f2 = fr.f2().unwrap();
        let gi = fr.g_inverse().unwrap();
        let w: Vec<f64> = (0..n)
            .map(|r| {
                let dr = f2.dy(r).unwrap();
                f2.dx(r).unwrap().value().abs() + (0..n).map(|k| (dr.dx(k).unwrap().value() * at.yf[k]).abs()).sum::<f64>()
            })
            .collect();
        for i in 0..n {
            let scale: f64 = 0.25 * (0..n).map(|r| gi[i][r].value().abs() * w[r]).sum::<f64>();
            worst = worst.max((split[i].value() - direct[i].value()).abs() / scale.max(f64::MIN_POSITIVE));
        }
    }
    // parallel 1-form on a curved product: b_{i;j} = 0, so G = G_α identically
    let mut parallel_ok = 0;
    let mut parallel_pts = 0;
    for m in 1..=4 {
        let spec = MetricSpec::parse(
            &[&["1", "0", "0"], &["0", "1 + x2^2", "x3/2"], &["0", "x3/2", "2 + x3"]],
            &["1", "0", "0"],
            Family::generalized(m, 1, 1),
        )
        .unwrap();
        for p in ["x=1,1/2,1/3;y=1,2,-1", "x=0,-1,1/4;y=3,1,1/2"] {
            let at = EvalPoint::parse(p).unwrap();
            let sp = spray_split(&Frame::exact(&spec, &at, 1).unwrap()).unwrap();
            parallel_pts += 1;
            if sp.g.iter().zip(&sp.g_alpha).all(|(a, b)| (a.clone() - b).vanishes_at_point()) {
                parallel_ok += 1;
            }
        }
    }
    check(
        worst <= 1e-9 && exact_ok == exact_n && parallel_ok == parallel_pts,
        format!(
            "{} points, split vs direct max error over the term scale {worst:.2e} (tol 1e-9), exact equal at {exact_ok}/{exact_n}; \
             parallel 1-form G = G_α exactly at {parallel_ok}/{parallel_pts}",
            pts.len()
        ),
    )
}

fn rationality() -> Outcome {
    let x = [Rational::new(1.into(), 2.into()), Rational::new(1.into(), 3.into()), Rational::from_integer(0.into())];
    let mut bad = Vec::new();
    let mut rows = 0;
    for m in 1..=4 {
        let table = rationality_table(&euclidean_fixture(m, 1, 1).unwrap(), &x).map_err(|e| e.to_string())?;
        if table.len() != 13 {
            bad.push(format!("m={m}: {} rows", table.len()));
        }
        rows += table.len();
        bad.extend(table.iter().filter(|r| !r.matches).map(|r| format!("m={m} {}", r.object)));
    }
    check(bad.is_empty(), format!("{rows} rows over m = 1..4, mismatches [{}]", bad.join(", ")))
}

fn example1_claims() -> Outcome {
    let null_rejected = example1_with(2, [1, 1, 0, 0]).is_err();
    let pts = ["x=0,0,0,0;y=1,1,1,0", "x=1,-2,1/3,5;y=3,1,1/2,2", "x=-1/2,1,0,2;y=2,1/3,1,-1"];
    let mut exact_zero = 0;
    let mut total = 0;
    let mut verdicts = Vec::new();
    for m in [2, 3] {
        let spec = example1(m).unwrap();
        for p in pts {
            let tw = Tower::exact(&spec, &EvalPoint::parse(p).unwrap()).map_err(|e| e.to_string())?;
            let fr = tw.field_residuals(0.0).map_err(|e| e.to_string())?;
            total += 1;
            if fr.ric.vanishes_at_point() && fr.pw.vanishes_at_point() {
                exact_zero += 1;
            }
        }
        let bases = sample_points(&spec, &[(-1.0, 1.0); 4], 4, SEED).unwrap();
        let samples: Vec<EvalPoint> = bases
            .iter()
            .enumerate()
            .flat_map(|(k, b)| sample_fibers(&spec, &b.xf, 3, SEED + k as u64).unwrap())
            .collect();
        let rep = defect(Property::RicciFlat, &spec, &samples, Backend::Numeric, &DefectOptions::default()).map_err(|e| e.to_string())?;
        verdicts.push(rep.verdict.holds());
    }
    check(
        null_rejected && exact_zero == total && verdicts.iter().all(|v| *v),
        format!(
            "null 1-form rejected: {null_rejected}; Ric = 0 and vacuum residual = 0 exactly at {exact_zero}/{total}; Ricci-flat verdicts {verdicts:?}"
        ),
    )
}

/// The VSI metric does not meet its stated curvature claims; the line is
/// a FAIL by design and the observed values are asserted instead.
fn example2_claims() -> Line {
    let t = Instant::now();
    let spec = example2(2).unwrap();
    let bases = sample_points(&spec, &[(-1.0, 1.0); 4], 20, SEED).unwrap();
    let per = Property::Berwald.min_samples(4) + 2;
    let samples: Vec<EvalPoint> = bases
        .iter()
        .enumerate()
        .flat_map(|(k, b)| sample_fibers(&spec, &b.xf, per, SEED + 1 + k as u64).unwrap())
        .collect();
    let opts = DefectOptions { rtol: 1e-9, seed: Some(SEED) };
    let berwald = defect(Property::Berwald, &spec, &samples, Backend::Numeric, &opts).unwrap();
    let at = EvalPoint::parse("x=1/3,1/5,-2/7,3/11;y=1,1/2,1/3,-1/4").unwrap();
    let exact = |m: i64| {
        let fr = Tower::exact(&example2(m).unwrap(), &at).unwrap().field_residuals(0.0).unwrap();
        (fr.ric.exact_value().unwrap(), fr.pw.exact_value().unwrap(), fr.pw.vanishes_at_point())
    };
    let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
    let (ric2, pw2, _) = exact(2);
    let (ric3, _, pw3_zero) = exact(3);
    let observed_as_recorded = berwald.verdict.holds()
        && ric2.0 == q(2, 3)
        && ric2.1 == q(0, 1)
        && pw2.0 == q(4, 9)
        && pw2.1 == q(0, 1)
        && ric3.0 == q(1, 2)
        && pw3_zero;
    let secs = t.elapsed().as_secs_f64();
    let detail = format!(
        "Berwald residual {:.2e} (tol {:.2e}, {} base points): holds; Ric = {} ≠ 0 and vacuum residual = {} ≠ 0 at m = 2 (exact); \
         m = 3: residual 0, Ric = {}; recorded deviation, observed values {}",
        berwald.residual,
        berwald.tol,
        bases.len(),
        ric2.0,
        pw2.0,
        ric3.0,
        if observed_as_recorded { "confirmed" } else { "NOT as recorded" }
    );
    let mut ok = observed_as_recorded;
    let mut detail = detail;
    if secs >= 120.0 {
        ok = false;
        detail.push_str(&format!("; runtime {secs:.1} s over the 120 s limit"));
    }
    // the criterion itself fails; the line only errors the run if the
    // observed values drift from the recorded ones
    Line { name: "vsi-example", ok, deviation: true, detail, secs }
}

fn example3_claims() -> Outcome {
    let spec = example3("x1", 2, "1").unwrap();
    let mut worst_k: f64 = 0.0;
    let mut worst_th: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for (k, t) in [0.5, 1.0, 1.5, 2.0, 2.5].into_iter().enumerate() {
        let fibers = sample_fibers(&spec, &[t, 0.25, -0.5, 0.125], 50, SEED + k as u64).unwrap();
        let ys: Vec<Vec<Rational>> = fibers.iter().map(|p| p.y.clone()).collect();
        let fit = einstein_fit(&spec, &fibers[0].x, &ys, Backend::Numeric).map_err(|e| e.to_string())?;
        worst_k = worst_k.max(fit.k.abs());
        worst_th = worst_th.max(fit.theta.iter().map(|v| v.abs()).fold(0.0, f64::max));
        worst_res = worst_res.max(fit.residual);
    }
    check(
        worst_k <= 1e-8 && worst_th <= 1e-8 && worst_res <= 1e-8,
        format!("5 times × 50 fibers: max|K| {worst_k:.2e}, max|θ| {worst_th:.2e}, residual {worst_res:.2e} (tol 1e-8)"),
    )
}

fn rigidity() -> Outcome {
    let mut holds = 0;
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    for m in [2, 4] {
        let parallel =
            MetricSpec::parse(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]], &["1", "0", "0"], Family::generalized(m, 1, 0)).unwrap();
        for spec in [parallel, euclidean_fixture(m, 1, 1).unwrap(), minkowski_fixture(m, 1, 1).unwrap()] {
            for prop in [Property::IsotropicMeanBerwald, Property::WeakEinstein] {
                let bases = sample_points(&spec, &[(-0.5, 0.5); 3], 3, SEED).unwrap();
                let samples: Vec<EvalPoint> = bases
                    .iter()
                    .enumerate()
                    .flat_map(|(k, b)| sample_fibers(&spec, &b.xf, prop.min_samples(3) + 2, SEED + 1 + k as u64).unwrap())
                    .collect();
                let rep = defect(prop, &spec, &samples, Backend::Numeric, &DefectOptions::default()).map_err(|e| e.to_string())?;
                if rep.verdict.holds() {
                    holds += 1;
                    match rep.conclusion {
                        Some(c) => {
                            worst = worst.max(c.value);
                            if c.value > 1e-9 {
                                violations.push(format!("{prop} m={m}: {} = {:.2e}", c.statement, c.value));
                            }
                        }
                        None => violations.push(format!("{prop} m={m}: no conclusion check")),
                    }
                }
            }
        }
    }
    check(
        holds > 0 && violations.is_empty(),
        format!("{holds} hypotheses held, max conclusion value {worst:.2e} (tol 1e-9), violations [{}]", violations.join("; ")),
    )
}

fn reduction() -> Outcome {
    let pr = minkowski_pr().unwrap();
    let pts = sample_points(&pr, &[(-1.0, 1.0); 4], 30, SEED).unwrap();
    let mut pr_max: f64 = 0.0;
    for at in &pts {
        let fr = Tower::numeric(&pr, at, FULL_FIBER_ORDER).unwrap().field_residuals(0.0).map_err(|e| e.to_string())?;
        pr_max = pr_max.max(fr.pw.value().abs()).max(fr.cs.abs());
    }
    let sp = s3xr().unwrap();
    let pts = sample_points(&sp, &[(-0.8, 0.8), (-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0)], 30, SEED).unwrap();
    let mut s_max: f64 = 0.0;
    for at in &pts {
        let fr = Tower::numeric(&sp, at, FULL_FIBER_ORDER).unwrap().field_residuals(0.0).map_err(|e| e.to_string())?;
        let want = s3xr_tensor_oracle(at);
        s_max = s_max.max((fr.pw.value() - want).abs() / want.abs().max(1.0));
    }
    check(
        pr_max == 0.0 && s_max <= 1e-8,
        format!("Minkowski: max |pw|, |cs| = {pr_max:.2e} over 30 points; S³×R vs tensor oracle max rel {s_max:.2e} (tol 1e-8)"),
    )
}

fn agreement() -> Outcome {
    let pts = sweep(100, SEED + 300);
    let mut worst: f64 = 0.0;
    let mut worst_what = String::new();
    let mut compared = 0usize;
    let mut note = |what: &str, a: f64, b: f64| {
        compared += 1;
        let r = rel(a, b);
        if r > worst {
            worst = r;
            worst_what = what.to_string();
        }
    };
    for (k, (spec, at)) in pts.iter().enumerate() {
        let fn_ = Frame::numeric(spec, at, 1, 1).map_err(|e| e.to_string())?;
        let fe = Frame::exact(spec, at, 1).map_err(|e| e.to_string())?;
        note("F", fn_.f().unwrap().value(), fe.f().unwrap().value());
        note("F²", fn_.f2().unwrap().value(), fe.f2().unwrap().value());
        note("η", fn_.eta().unwrap().value(), fe.eta().unwrap().value());
        note("det g", fn_.det_g().unwrap().value(), fe.det_g().unwrap().value());
        for (a, b) in fn_.g_closed().unwrap().iter().flatten().zip(fe.g_closed().unwrap().iter().flatten()) {
            note("g_ij", a.value(), b.value());
        }
        let (sn, se) = (spray_split(&fn_).unwrap().g, spray_split(&fe).unwrap().g);
        for i in 0..spec.dimension {
            note("Gⁱ", sn[i].value(), se[i].value());
            for j in 0..spec.dimension {
                note("Nⁱ_j", sn[i].dy(j).unwrap().value(), se[i].dy(j).unwrap().value());
            }
        }
        // the exact curvature tower is the slow part: Ric on every fifth point
        if k % 5 == 0 {
            let tn = Tower::numeric(spec, at, 2).map_err(|e| e.to_string())?;
            let te = Tower::exact(spec, at).map_err(|e| e.to_string())?;
            note("Ric", tn.ric().unwrap().value(), te.ric().unwrap().value());
        }
    }
    check(
        worst <= 1e-9,
        format!("{} points, {compared} scalars, max rel {worst:.2e} ({worst_what}) (tol 1e-9)", pts.len()),
    )
}

fn homogeneity() -> Outcome {
    let pts = sweep(500, SEED + 400);
    let two = Rational::from_integer(2.into());
    let mut worst: [f64; 6] = [0.0; 6];
    for (spec, at) in &pts {
        let a = Tower::numeric(spec, at, 2).map_err(|e| e.to_string())?;
        let b = Tower::numeric(spec, &at.scaled(&two), 2).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max(rel(b.frame.f().unwrap().value(), 2.0 * a.frame.f().unwrap().value()));
        for (u, v) in a.spray.g.iter().zip(&b.spray.g) {
            worst[1] = worst[1].max(rel(v.value(), 4.0 * u.value()));
        }
        for (u, v) in a.n.iter().flatten().zip(b.n.iter().flatten()) {
            worst[2] = worst[2].max(rel(v.value(), 2.0 * u.value()));
        }
        worst[3] = worst[3].max(rel(b.ric().unwrap().value(), 4.0 * a.ric().unwrap().value()));
        let t = kropina_core::geometry::FundamentalTensors::compute(&a.frame).map_err(|e| e.to_string())?;
        let n = spec.dimension;
        // contractions relative to the tensor's max-norm times |y|₁
        let y1: f64 = at.yf.iter().map(|v| v.abs()).sum();
        let hmax = t.h.iter().flatten().map(|v| v.value().abs()).fold(0.0, f64::max);
        let cmax = t.cartan.iter().flatten().flatten().map(|v| v.value().abs()).fold(0.0, f64::max);
        for i in 0..n {
            let hy: f64 = (0..n).map(|j| t.h[i][j].value() * at.yf[j]).sum();
            worst[5] = worst[5].max(hy.abs() / (hmax * y1));
            for j in 0..n {
                let cy: f64 = (0..n).map(|k| t.cartan[i][j][k].value() * at.yf[k]).sum();
                worst[4] = worst[4].max(cy.abs() / (cmax * y1));
            }
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    check(
        max <= 1e-12,
        format!(
            "{} points: F {:.1e}, G {:.1e}, N {:.1e}, Ric {:.1e}, C·y {:.1e}, h·y {:.1e} (tol 1e-12)",
            pts.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            worst[5]
        ),
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let lines = vec![
        run("metric-tensor", Some(10.0), metric_tensor),
        run("determinant", None, determinant),
        run("spray-routes", None, spray_routes),
        run("rationality-table", Some(60.0), rationality),
        run("flat-anisotropic-example", None, example1_claims),
        example2_claims(),
        run("cosmological-example", None, example3_claims),
        run("rigidity-ladders", None, rigidity),
        run("riemannian-reduction", None, reduction),
        run("backend-agreement", None, agreement),
        run("homogeneity-euler", None, homogeneity),
    ];
    let mut bad = 0;
    for (k, l) in lines.iter().enumerate() {
        let tag = if l.deviation || !l.ok { "FAIL" } else { "PASS" };
        let note = if l.deviation { " (recorded deviation)" } else { "" };
        println!("{tag} {:>2} {}{note}: {} [{:.2} s]", k + 1, l.name, l.detail, l.secs);
        if !l.ok {
            bad += 1;
        }
    }
    println!("acceptance: {} criteria, {bad} unexpected failures, {:.1} s", lines.len(), t.elapsed().as_secs_f64());
    if bad == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Built-in metrics: the three worked spacetimes plus test fixtures.

use crate::error::{CoreError, Result};
use crate::spec::{EvalPoint, Family, MetricSpec, Param, Sign};

#[derive(Clone, Debug)]
pub struct Builtin {
    pub id: &'static str,
    pub spec: MetricSpec,
    /// Box for base-point sampling.
    pub x_box: Vec<(f64, f64)>,
    pub default_point: EvalPoint,
    /// Expected verdicts, in words.
    pub claims: Vec<String>,
}

pub const BUILTIN_IDS: &[&str] = &[
    "euclidean-fixture",
    "minkowski-fixture",
    "example1-flat-anisotropic",
    "example2-vsi",
    "example3-cosmological",
    "round-sphere",
    "s3xr",
    "minkowski-pr",
];

fn diag(entries: &[&str]) -> Vec<Vec<String>> {
    let n = entries.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { entries[i].to_string() } else { "0".to_string() }).collect())
        .collect()
}

fn build(alpha: Vec<Vec<String>>, beta: &[String], family: Family) -> Result<MetricSpec> {
    let rows: Vec<Vec<&str>> = alpha.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
    let rs: Vec<&[&str]> = rows.iter().map(|r| r.as_slice()).collect();
    let b: Vec<&str> = beta.iter().map(|s| s.as_str()).collect();
    MetricSpec::parse(&rs, &b, family)
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn m_kropina(m: i64) -> Family {
    Family::MKropina {
        m: m.into(),
        sign: Sign::Plus,
    }
}

/// Polynomial fixture on R³ with a non-closed 1-form.
pub fn euclidean_fixture(m: i64, c: i64, r: i64) -> Result<MetricSpec> {
    build(diag(&["1", "1", "1"]), &strs(&["1", "x1", "0"]), Family::generalized(m, c, r))
}

/// Lorentzian counterpart of [`euclidean_fixture`].
pub fn minkowski_fixture(m: i64, c: i64, r: i64) -> Result<MetricSpec> {
    build(diag(&["-1", "1", "1"]), &strs(&["2", "x1", "1"]), Family::generalized(m, c, r))
}

/// `|η_ij dxⁱdxʲ|^{(1+m)/2}(c_i dxⁱ)^{−m}` with `c = (1, 2, 0, 0)`.
pub fn example1(m: i64) -> Result<MetricSpec> {
    example1_with(m, [1, 2, 0, 0])
}

pub fn example1_with(m: i64, c: [i64; 4]) -> Result<MetricSpec> {
    // ‖β‖²_α = −c1² + c2² + c3² + c4²
    let norm = -c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3];
    if norm == 0 {
        return Err(CoreError::Config(format!("‖β‖²_α = 0 for c = {c:?}; the example needs a non-null 1-form")));
    }
    let b: Vec<String> = c.iter().map(|v| v.to_string()).collect();
    build(diag(&["-1", "1", "1", "1"]), &b, m_kropina(m))
}

/// VSI metric in coordinates `(u, v, x, y) = (x1, x2, x3, x4)`.
pub fn example2(m: i64) -> Result<MetricSpec> {
    if m == 1 {
        return Err(CoreError::Config("the VSI example needs m ≠ 1".into()));
    }
    let h = format!(
        "({})/({}) * x3^4 + 1/12 * x4^4 + x3*x2",
        3 * m - 1 - m * m,
        12 * (m - 1) * (m - 1)
    );
    let mut a = diag(&[h.as_str(), "0", "1", "1"]);
    a[0][1] = "-1".into();
    a[1][0] = "-1".into();
    a[0][3] = "x3*x4".into();
    a[3][0] = "x3*x4".into();
    build(a, &strs(&["1", "0", "0", "0"]), m_kropina(m))
}

/// Cosmological metric `|dt² − A²(t)|dx|²|^{(m+1)/2}(c A^{1/m} dt)^{−m}`
/// with `A` an expression in `x1 = t`.
pub fn example3(a_of_t: &str, m: i64, c: &str) -> Result<MetricSpec> {
    let a2 = format!("-({a_of_t})^2");
    let b = if m == 1 { format!("({c})*({a_of_t})") } else { format!("({c})*({a_of_t})^(1/{m})") };
    build(diag(&["1", &a2, &a2, &a2]), &[b, "0".into(), "0".into(), "0".into()], m_kropina(m))
}

fn sphere_factor(k: usize) -> String {
    let s: Vec<String> = (1..=k).map(|i| format!("x{i}^2")).collect();
    format!("4/(1 + {})^2", s.join(" + "))
}

/// Unit round `S³` in stereographic coordinates, pseudo-Riemannian family.
pub fn round_sphere() -> Result<MetricSpec> {
    let f = sphere_factor(3);
    build(
        diag(&[&f, &f, &f]),
        &strs(&["1", "0", "0"]),
        Family::PseudoRiemannian {
            c: 1.into(),
            r: 0.into(),
        },
    )
}

/// `S³ × R` with the product metric (Riemannian, `n = 4`).
pub fn s3xr() -> Result<MetricSpec> {
    let f = sphere_factor(3);
    build(
        diag(&[&f, &f, &f, "1"]),
        &strs(&["0", "0", "0", "1"]),
        Family::PseudoRiemannian {
            c: 1.into(),
            r: 0.into(),
        },
    )
}

/// Minkowski space, pseudo-Riemannian family.
pub fn minkowski_pr() -> Result<MetricSpec> {
    build(
        diag(&["-1", "1", "1", "1"]),
        &strs(&["1", "0", "0", "0"]),
        Family::PseudoRiemannian {
            c: 1.into(),
            r: 0.into(),
        },
    )
}

fn pt(s: &str) -> EvalPoint {
    EvalPoint::parse(s).expect("builtin point")
}

/// Looks up a builtin; `m` overrides the family exponent where it applies.
pub fn builtin(id: &str, m: Option<i64>) -> Result<Builtin> {
    let unit = |n: usize| vec![(-1.0, 1.0); n];
    let b = match id {
        "euclidean-fixture" => Builtin {
            id: "euclidean-fixture",
            spec: euclidean_fixture(m.unwrap_or(2), 1, 1)?,
            x_box: unit(3),
            default_point: pt("x=1/2,1/3,0;y=1,2,-1"),
            claims: vec!["rationality table matches the odd/even split".into()],
        },
        "minkowski-fixture" => Builtin {
            id: "minkowski-fixture",
            spec: minkowski_fixture(m.unwrap_or(2), 1, 1)?,
            x_box: unit(3),
            default_point: pt("x=1/2,1/3,0;y=1,2,-1"),
            claims: vec!["metric routes agree".into()],
        },
        "example1-flat-anisotropic" => Builtin {
            id: "example1-flat-anisotropic",
            spec: example1(m.unwrap_or(2))?,
            x_box: unit(4),
            default_point: pt("x=0,0,0,0;y=1,1,1,0"),
            claims: vec![
                "Ric = 0 (exact)".into(),
                "vacuum residual = 0 (exact)".into(),
                "Ricci-flat holds".into(),
            ],
        },
        "example2-vsi" => Builtin {
            id: "example2-vsi",
            spec: example2(m.unwrap_or(2))?,
            x_box: unit(4),
            default_point: pt("x=0,0,1,1;y=1,0,0,0"),
            claims: vec![
                "Berwald: spray quadratic in y (holds for every m)".into(),
                "Ric = 0 as stated; observed Ric = m/(3(m-1))·Φ(x,y), zero only on a hypersurface".into(),
                "vacuum residual = 0 as stated; observed 2(3-m)/(3(m-1))·Ric, zero only for m = 3".into(),
            ],
        },
        "example3-cosmological" => Builtin {
            id: "example3-cosmological",
            spec: example3("x1", m.unwrap_or(2), "1")?,
            x_box: vec![(0.5, 3.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            default_point: pt("x=1,0,0,0;y=2,1/2,0,0"),
            claims: vec![
                "Einstein fit: K = 0, θ = 0 (numeric, A(t) = t)".into(),
                "Ric = 0 (exact, A(t) = t at t = 1, 9/4, 4 where t^(1/m) is rational)".into(),
            ],
        },
        "round-sphere" => Builtin {
            id: "round-sphere",
            spec: round_sphere()?,
            x_box: vec![(-0.8, 0.8); 3],
            default_point: pt("x=3/10,-1/5,1/2;y=1,2/5,-7/10"),
            claims: vec!["flag curvature K = 1".into()],
        },
        "s3xr" => Builtin {
            id: "s3xr",
            spec: s3xr()?,
            x_box: vec![(-0.8, 0.8), (-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0)],
            default_point: pt("x=3/10,-1/5,1/2,0;y=1,2/5,-7/10,1"),
            claims: vec!["vacuum residual = 4 (y⁴)² (classical Ricci oracle)".into()],
        },
        "minkowski-pr" => Builtin {
            id: "minkowski-pr",
            spec: minkowski_pr()?,
            x_box: unit(4),
            default_point: pt("x=0,0,0,0;y=2,1,0,0"),
            claims: vec!["vacuum and Chen–Shen residuals = 0".into()],
        },
        other => {
            return Err(CoreError::Config(format!(
                "unknown builtin '{other}' (known: {})",
                BUILTIN_IDS.join(", ")
            )))
        }
    };
    Ok(b)
}

/// Replaces the exponent of an m-family spec.
pub fn with_m(spec: &MetricSpec, m: i64) -> Result<MetricSpec> {
    let fam = match &spec.family {
        Family::GeneralizedMKropina { c, r, sign, .. } => Family::GeneralizedMKropina {
            m: Param::int(m),
            c: c.clone(),
            r: r.clone(),
            sign: *sign,
        },
        Family::MKropina { sign, .. } | Family::Kropina { sign } => Family::MKropina {
            m: Param::int(m),
            sign: *sign,
        },
        Family::PseudoRiemannian { .. } => {
            return Err(CoreError::Config("the pseudo-Riemannian family has no exponent to override".into()))
        }
    };
    spec.with_family(fam)
}

//! Metric specifications, family parameters and evaluation points.

use std::fmt;

use kropina_ratfun::Rational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};
use crate::expr::Expr;

/// An exact real parameter. Integers serialize as JSON integers, everything
/// else as a `"p/q"` string, so rational values survive a round trip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param(pub Rational);

impl Param {
    pub fn int(v: i64) -> Param {
        Param(Rational::from_integer(v.into()))
    }

    pub fn f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<i64> for Param {
    fn from(v: i64) -> Param {
        Param::int(v)
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(v) = self.0.to_integer().to_i64() {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a number, got {other}"))),
        };
        match Expr::parse(&text, 0) {
            Ok(Expr::Num(q)) => Ok(Param(q)),
            _ => Err(serde::de::Error::custom(format!("'{text}' is not a rational constant"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(if *self == Sign::Plus { "+" } else { "-" })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!("sign must be '+' or '-', got '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum Family {
    GeneralizedMKropina {
        m: Param,
        c: Param,
        r: Param,
        #[serde(default)]
        sign: Sign,
    },
    MKropina {
        m: Param,
        #[serde(default)]
        sign: Sign,
    },
    Kropina {
        #[serde(default)]
        sign: Sign,
    },
    PseudoRiemannian {
        c: Param,
        r: Param,
    },
}

/// `φ(s) = ±s^{−m}(c + r s²)^{(1+m)/2}` resolved to numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyParams {
    pub m: Rational,
    pub c: Rational,
    pub r: Rational,
    pub sign: i64,
    pub pseudo_riemannian: bool,
}

impl FamilyParams {
    pub fn mf(&self) -> f64 {
        self.m.to_f64().unwrap_or(f64::NAN)
    }

    pub fn cf(&self) -> f64 {
        self.c.to_f64().unwrap_or(f64::NAN)
    }

    pub fn rf(&self) -> f64 {
        self.r.to_f64().unwrap_or(f64::NAN)
    }

    pub fn m_is_integer(&self) -> bool {
        self.m.is_integer()
    }

    /// Integer `m` with `(1+m)/2` a half-integer, i.e. `F` carries `w`.
    pub fn needs_radicand(&self) -> bool {
        self.m.is_integer() && (self.m.to_integer() % 2u8).is_zero()
    }
}

impl Family {
    pub fn params(&self) -> FamilyParams {
        let one = Rational::one();
        let zero = Rational::zero();
        match self {
            Family::GeneralizedMKropina { m, c, r, sign } => FamilyParams {
                m: m.0.clone(),
                c: c.0.clone(),
                r: r.0.clone(),
                sign: sign.value(),
                pseudo_riemannian: false,
            },
            Family::MKropina { m, sign } => FamilyParams {
                m: m.0.clone(),
                c: one,
                r: zero,
                sign: sign.value(),
                pseudo_riemannian: false,
            },
            Family::Kropina { sign } => FamilyParams {
                m: one.clone(),
                c: one,
                r: zero,
                sign: sign.value(),
                pseudo_riemannian: false,
            },
            Family::PseudoRiemannian { c, r } => FamilyParams {
                m: zero,
                c: c.0.clone(),
                r: r.0.clone(),
                sign: 1,
                pseudo_riemannian: true,
            },
        }
    }

    pub fn generalized(m: i64, c: i64, r: i64) -> Family {
        Family::GeneralizedMKropina {
            m: m.into(),
            c: c.into(),
            r: r.into(),
            sign: Sign::Plus,
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.params();
        if p.c.is_zero() {
            return Err(CoreError::Config("c = 0 has to be excluded (F degenerates to ±rβ)".into()));
        }
        if p.m == -Rational::one() {
            return Err(CoreError::Config("m = -1 has to be excluded (F degenerates to ±β)".into()));
        }
        if p.m.is_zero() && !p.pseudo_riemannian {
            return Err(CoreError::Config(
                "m = 0 is pseudo-Riemannian; use the pseudo-riemannian family".into(),
            ));
        }
        Ok(())
    }
}

/// An (α,β)-metric on a chart with coordinates `x1..xn`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub dimension: usize,
    pub alpha: Vec<Vec<Expr>>,
    pub beta: Vec<Expr>,
    pub family: Family,
    /// Restrict to the half-cone `β > 0`.
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub positive_beta: bool,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl MetricSpec {
    pub fn new(alpha: Vec<Vec<Expr>>, beta: Vec<Expr>, family: Family) -> Result<MetricSpec> {
        let spec = MetricSpec {
            dimension: beta.len(),
            alpha,
            beta,
            family,
            positive_beta: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds from expression strings.
    pub fn parse(alpha: &[&[&str]], beta: &[&str], family: Family) -> Result<MetricSpec> {
        let n = beta.len();
        let a = alpha
            .iter()
            .map(|row| row.iter().map(|s| Expr::parse(s, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let b = beta.iter().map(|s| Expr::parse(s, n)).collect::<Result<Vec<_>>>()?;
        MetricSpec::new(a, b, family)
    }

    pub fn from_json(text: &str) -> Result<MetricSpec> {
        let spec: MetricSpec =
            serde_json::from_str(text).map_err(|e| CoreError::Config(format!("metric config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metric spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n < 2 {
            return Err(CoreError::Config(format!("dimension must be at least 2, got {n}")));
        }
        if self.beta.len() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: self.beta.len(),
            });
        }
        if self.alpha.len() != n || self.alpha.iter().any(|r| r.len() != n) {
            return Err(CoreError::Config(format!("alpha must be a {n}×{n} array")));
        }
        for i in 0..n {
            for j in 0..i {
                if self.alpha[i][j] != self.alpha[j][i] {
                    return Err(CoreError::Config(format!(
                        "alpha is not symmetric: entry ({}, {}) differs from ({}, {})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let too_wide = self.alpha.iter().flatten().chain(&self.beta).map(Expr::arity).max().unwrap_or(0);
        if too_wide > n {
            return Err(CoreError::Config(format!("coefficient uses x{too_wide} in dimension {n}")));
        }
        if self.beta.iter().all(|e| matches!(e.as_number(), Some(q) if q.is_zero())) {
            return Err(CoreError::Config("the 1-form b is identically zero".into()));
        }
        self.family.validate()
    }

    pub fn params(&self) -> FamilyParams {
        self.family.params()
    }

    /// Whether the exact backend can evaluate this metric.
    pub fn exact_admissible(&self) -> Result<()> {
        if !self.params().m_is_integer() {
            return Err(CoreError::ExactBackendUnavailable(format!(
                "m = {} is not an integer",
                self.params().m
            )));
        }
        if let Some(e) = self.alpha.iter().flatten().chain(&self.beta).find(|e| !e.is_algebraic()) {
            return Err(CoreError::ExactBackendUnavailable(format!(
                "coefficient {e} uses an elementary function"
            )));
        }
        Ok(())
    }

    pub fn with_family(&self, family: Family) -> Result<MetricSpec> {
        let mut s = self.clone();
        s.family = family;
        s.validate()?;
        Ok(s)
    }

    /// Scalar data at a point, computed exactly when the coefficients allow.
    pub fn point_data(&self, at: &EvalPoint) -> Result<PointData> {
        let n = self.dimension;
        if at.dim() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: at.dim(),
            });
        }
        let exact = self
            .alpha
            .iter()
            .map(|r| r.iter().map(|e| e.eval_rational(&at.x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .and_then(|a| Ok((a, self.beta.iter().map(|e| e.eval_rational(&at.x)).collect::<Result<Vec<_>>>()?)));
        let (alpha, b): (Vec<Vec<f64>>, Vec<f64>) = match &exact {
            Ok((a, b)) => (
                a.iter().map(|r| r.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()).collect(),
                b.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect(),
            ),
            Err(_) => (
                self.alpha.iter().map(|r| r.iter().map(|e| e.eval_f64(&at.xf)).collect()).collect(),
                self.beta.iter().map(|e| e.eval_f64(&at.xf)).collect(),
            ),
        };
        let p = self.params();
        // exact signs when possible
        let (a_sign, beta_sign, deg_zero, r_sign) = match &exact {
            Ok((a, b)) => {
                let aa: Rational = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| &a[i][j] * &at.y[i] * &at.y[j])
                    .sum();
                let bb: Rational = (0..n).map(|i| &b[i] * &at.y[i]).sum();
                let sig = if aa.is_negative() { -Rational::one() } else { Rational::one() };
                let rr = &p.c * &sig * &aa + &p.r * &bb * &bb;
                let deg = &p.r * &bb * &bb - &p.c * &p.m * &sig * &aa;
                (sgn_q(&aa), sgn_q(&bb), deg.is_zero(), sgn_q(&rr))
            }
            Err(_) => {
                let aa: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| alpha[i][j] * at.yf[i] * at.yf[j]).sum();
                let bb: f64 = (0..n).map(|i| b[i] * at.yf[i]).sum();
                let sig = if aa < 0.0 { -1.0 } else { 1.0 };
                let rr = p.cf() * sig * aa + p.rf() * bb * bb;
                let deg = p.rf() * bb * bb - p.cf() * p.mf() * sig * aa;
                let scale = (p.rf() * bb * bb).abs() + (p.cf() * p.mf() * aa).abs();
                (sgn_f(aa), sgn_f(bb), deg.abs() <= 1e-14 * scale, sgn_f(rr))
            }
        };
        if at.yf.iter().all(|v| *v == 0.0) && at.y.iter().all(|v| v.is_zero()) {
            return Err(CoreError::DomainViolation("y = 0".into()));
        }
        if a_sign == 0 {
            return Err(CoreError::DomainViolation("α²(x,y) = 0 (y is α-null)".into()));
        }
        if beta_sign == 0 {
            return Err(CoreError::DomainViolation("β(x,y) = 0".into()));
        }
        if self.positive_beta && beta_sign < 0 {
            return Err(CoreError::DomainViolation("β(x,y) < 0 outside the β > 0 half-cone".into()));
        }
        if r_sign <= 0 {
            return Err(CoreError::DomainViolation("cα² + rβ² ≤ 0".into()));
        }
        if !p.pseudo_riemannian && deg_zero {
            return Err(CoreError::DegenerateMetric("r s² = c m at this point".into()));
        }
        let sigma = a_sign as i64;
        let aa: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| alpha[i][j] * at.yf[i] * at.yf[j]).sum();
        let bb: f64 = (0..n).map(|i| b[i] * at.yf[i]).sum();
        Ok(PointData {
            sigma,
            alpha,
            b,
            a: aa,
            beta: bb,
            alpha_norm: (sigma as f64 * aa).sqrt(),
            s: bb / (sigma as f64 * aa).sqrt(),
        })
    }
}

fn sgn_q(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

fn sgn_f(v: f64) -> i32 {
    if v == 0.0 || !v.is_finite() {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Float data at an admissible point.
#[derive(Clone, Debug)]
pub struct PointData {
    /// `sgn(α²)`.
    pub sigma: i64,
    pub alpha: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// `α_ij yⁱ yʲ` (without the sign).
    pub a: f64,
    pub beta: f64,
    /// `α = √(sgn·A)`.
    pub alpha_norm: f64,
    pub s: f64,
}

/// A point `(x, y)` of the tangent bundle, held exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalPoint {
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
    pub xf: Vec<f64>,
    pub yf: Vec<f64>,
}

fn to_rational(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| CoreError::DomainViolation(format!("coordinate {v} is not finite")))
}

impl EvalPoint {
    pub fn new(x: Vec<Rational>, y: Vec<Rational>) -> Result<EvalPoint> {
        if x.len() != y.len() {
            return Err(CoreError::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let f = |v: &Vec<Rational>| v.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(EvalPoint {
            xf: f(&x),
            yf: f(&y),
            x,
            y,
        })
    }

    /// Exact binary expansion of the floats.
    pub fn from_f64(x: &[f64], y: &[f64]) -> Result<EvalPoint> {
        let xs = x.iter().map(|v| to_rational(*v)).collect::<Result<Vec<_>>>()?;
        let ys = y.iter().map(|v| to_rational(*v)).collect::<Result<Vec<_>>>()?;
        EvalPoint::new(xs, ys)
    }

    pub fn from_ints(x: &[i64], y: &[i64]) -> EvalPoint {
        let q = |v: &[i64]| v.iter().map(|k| Rational::from_integer((*k).into())).collect();
        EvalPoint::new(q(x), q(y)).expect("equal lengths")
    }

    /// `"x=0,0;y=1,1"`; entries may be integers, decimals or `p/q`.
    pub fn parse(text: &str) -> Result<EvalPoint> {
        let mut x = None;
        let mut y = None;
        for part in text.split(';') {
            let (key, vals) = part
                .split_once('=')
                .ok_or_else(|| CoreError::Config(format!("point part '{part}' lacks '='")))?;
            let list = vals
                .split(',')
                .map(|v| match Expr::parse(v.trim(), 0) {
                    Ok(Expr::Num(q)) => Ok(q),
                    _ => Err(CoreError::Config(format!("'{v}' is not a rational number"))),
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "x" => x = Some(list),
                "y" => y = Some(list),
                k => return Err(CoreError::Config(format!("unknown point key '{k}'"))),
            }
        }
        match (x, y) {
            (Some(x), Some(y)) => EvalPoint::new(x, y),
            _ => Err(CoreError::Config(format!("point '{text}' needs both x= and y="))),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Same base point, fiber scaled by `λ`.
    pub fn scaled(&self, lambda: &Rational) -> EvalPoint {
        EvalPoint::new(self.x.clone(), self.y.iter().map(|v| v * lambda).collect()).expect("same dimension")
    }

    pub fn with_y(&self, y: Vec<Rational>) -> Result<EvalPoint> {
        EvalPoint::new(self.x.clone(), y)
    }
}

impl fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = |v: &[Rational]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "x={};y={}", j(&self.x), j(&self.y))
    }
}

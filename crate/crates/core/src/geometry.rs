//! Fundamental tensors of a generalized m-Kropina metric over either backend.
//!
//! Notation: `ã = sgn(α²)·α`, `α² = ã(y,y) > 0`, `Ỹ_i = ã_ij yʲ`,
//! `b♯ = ã⁻¹b`, `b̃² = b·b♯`, `R = cα² + rβ²`. Raising on the (α,β) side
//! always uses `ã` (the `at_inv` helpers); Finslerian raising uses `g`.

use kropina_ratfun::{ExtContext, MultiPoly, RatFun, Rational, Var};
use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::autodiff::{Jet, Seed};
use crate::error::{CoreError, Result};
use crate::exact::{ExactEnv, ExactJet};
use crate::linalg::{self, Matrix};
use crate::scalar::{sum, Scalar};
use crate::spec::{EvalPoint, FamilyParams, MetricSpec};

/// Relative tolerance used by the numeric self-checks.
pub const NUMERIC_RTOL: f64 = 1e-9;

pub(crate) fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// `1/x`, or a named [`CoreError::SingularDenominator`] when `x` vanishes.
pub(crate) fn recip_named<S: Scalar>(x: &S, what: &str) -> Result<S> {
    if x.vanishes_at_point() {
        return Err(CoreError::SingularDenominator(what.to_string()));
    }
    x.try_recip()
}

/// Equality for self-checks: exact backends compare identically, numeric
/// ones to `NUMERIC_RTOL` relative to `scale`.
pub(crate) fn agree<S: Scalar>(a: &S, b: &S, scale: f64) -> bool {
    if a.certificate().is_some() {
        (a.clone() - b).is_identically_zero()
    } else {
        (a.value() - b.value()).abs() <= 1e-12 + NUMERIC_RTOL * scale
    }
}

pub(crate) fn max_abs<S: Scalar>(m: &Matrix<S>) -> f64 {
    m.iter().flatten().map(|v| v.value().abs()).fold(0.0, f64::max)
}

pub(crate) fn check_matrices<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, what: &str) -> Result<()> {
    let scale = max_abs(a).max(max_abs(b));
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            if !agree(x, y, scale) {
                return Err(CoreError::Inconsistent(format!(
                    "{what}: {} vs {}",
                    x.value(),
                    y.value()
                )));
            }
        }
    }
    Ok(())
}

/// `(φ, φ′, φ″)` at `s` from the closed forms, with `φ′` cross-checked
/// against jet differentiation of `φ`.
pub fn phi_family(s: f64, p: &FamilyParams) -> Result<(f64, f64, f64)> {
    if s == 0.0 || !s.is_finite() {
        return Err(CoreError::DomainViolation(format!("s = {s}")));
    }
    let (m, c, r, sg) = (p.mf(), p.cf(), p.rf(), p.sign as f64);
    let u = c + r * s * s;
    if u <= 0.0 {
        return Err(CoreError::DomainViolation(format!("c + r s² = {u} ≤ 0")));
    }
    if !p.pseudo_riemannian && (r * s * s - c * m).abs() <= 1e-14 * (r * s * s).abs().max((c * m).abs()) {
        return Err(CoreError::DegenerateMetric(format!("r s² = c m at s = {s}")));
    }
    let spow = |e: f64| -> Result<f64> {
        if p.m_is_integer() {
            Ok(s.powi(e as i32))
        } else if s > 0.0 {
            Ok(s.powf(e))
        } else {
            Err(CoreError::DomainViolation(format!("s^{e} with s = {s} < 0 and non-integer m")))
        }
    };
    let phi = sg * spow(-m)? * u.powf((1.0 + m) / 2.0);
    let d1 = sg * spow(-m - 1.0)? * u.powf((m - 1.0) / 2.0) * (r * s * s - c * m);
    let d2 = sg * c * (m + 1.0) * spow(-m - 2.0)? * u.powf((m - 3.0) / 2.0) * (c * m + r * s * s);

    // the same φ through the jet backend
    let sj = Jet::variable(1, 0, 1, Seed::Y(0), s);
    let uj = sj.clone() * &sj * &Jet::constant(1, 0, 1, r) + &Jet::constant(1, 0, 1, c);
    let pj = sj.try_powf(&-p.m.clone())? * &uj.try_powf(&((Rational::one() + &p.m) / q(2)))?;
    let jd1 = sg * pj.derivative(&[0], &[1]);
    if (jd1 - d1).abs() > 1e-12 + 1e-9 * d1.abs() {
        return Err(CoreError::Inconsistent(format!("φ′ closed form {d1} vs jet {jd1}")));
    }
    Ok((phi, d1, d2))
}

/// Scalar building blocks of the metric at one point over one backend.
#[derive(Clone, Debug)]
pub struct Frame<S> {
    pub spec: MetricSpec,
    pub p: FamilyParams,
    pub n: usize,
    /// `sgn(α²)` at the point; fixed for the whole computation.
    pub sigma: i64,
    pub x: Vec<S>,
    pub y: Vec<S>,
    pub alpha: Matrix<S>,
    /// `ã = sgn(α²)·α`.
    pub at: Matrix<S>,
    pub at_inv: Matrix<S>,
    pub b: Vec<S>,
    pub b_sharp: Vec<S>,
    /// `b̃² = ã^{ij} b_i b_j`.
    pub bb2: S,
    pub yt: Vec<S>,
    /// `α² = ã_ij yⁱ yʲ`.
    pub a2: S,
    pub beta: S,
    /// `cα² + rβ²`.
    pub r: S,
}

impl Frame<Jet> {
    /// Numeric frame with jets truncated at base order `ox`, fiber order `oy`.
    pub fn numeric(spec: &MetricSpec, at: &EvalPoint, ox: usize, oy: usize) -> Result<Self> {
        let pd = spec.point_data(at)?;
        let n = spec.dimension;
        let xs: Vec<Jet> = (0..n).map(|i| Jet::variable(n, ox, oy, Seed::X(i), at.xf[i])).collect();
        let ys: Vec<Jet> = (0..n).map(|i| Jet::variable(n, ox, oy, Seed::Y(i), at.yf[i])).collect();
        Frame::assemble(spec, pd.sigma, xs, ys)
    }
}

fn rational_solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(r, v)| {
        let mut row = r.clone();
        row.push(v.clone());
        row
    }).collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(p, k);
        let piv = m[k][k].clone();
        for j in k..=n {
            m[k][j] = &m[k][j] / &piv;
        }
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let f = m[i][k].clone();
                for j in k..=n {
                    let t = &f * &m[k][j];
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

impl Frame<ExactJet> {
    /// Exact frame: `x`-Taylor series of base order `ox` around `at.x` with
    /// symbolic `y`. `at.y` only fixes `sgn(α²)` and the value point.
    pub fn exact(spec: &MetricSpec, at: &EvalPoint, ox: usize) -> Result<Self> {
        spec.exact_admissible()?;
        let pd = spec.point_data(at)?;
        let n = spec.dimension;
        let p = spec.params();
        let unavailable = |e: CoreError| CoreError::ExactBackendUnavailable(format!("coefficients at {}: {e}", at));
        let a0 = spec
            .alpha
            .iter()
            .map(|r| r.iter().map(|e| e.eval_rational(&at.x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(unavailable)?;
        let b0 = spec
            .beta
            .iter()
            .map(|e| e.eval_rational(&at.x))
            .collect::<Result<Vec<_>>>()
            .map_err(unavailable)?;
        let sig = q(pd.sigma);
        let yv: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(0, n, Var::Fiber(i))).collect();
        let mut a_poly = MultiPoly::zero(0, n);
        for i in 0..n {
            for j in 0..n {
                if !a0[i][j].is_zero() {
                    a_poly = &a_poly + &(&yv[i] * &yv[j]).scale(&a0[i][j]);
                }
            }
        }
        let mut beta0 = MultiPoly::zero(0, n);
        for i in 0..n {
            beta0 = &beta0 + &yv[i].scale(&b0[i]);
        }
        let al2 = a_poly.scale(&sig);
        let beta_sq = &beta0 * &beta0;
        let r0 = &al2.scale(&p.c) + &beta_sq.scale(&p.r);
        let bs = rational_solve(&a0, &b0)
            .ok_or_else(|| CoreError::DegenerateMetric("α is singular at the base point".into()))?;
        let bb2: Rational = b0.iter().zip(&bs).map(|(u, v)| u * v).sum::<Rational>() * &sig;
        let cm = &p.c * &p.m;
        let d_theta = &beta_sq.scale(&(&p.c * (&p.m - q(1)))) - &(&al2.scale(&cm) + &beta_sq.scale(&p.r)).scale(&bb2);

        let mut hints = Vec::new();
        for d in [&beta0, &al2, &r0, &d_theta] {
            if d.is_zero() || d.is_constant() {
                continue;
            }
            let f = RatFun::new_with_hints(MultiPoly::one(0, n), d.clone(), &hints)?;
            for (atom, _) in f.denom_factors() {
                if !hints.iter().any(|h| h == atom) {
                    hints.push(atom.clone());
                }
            }
        }
        let ctx = if p.needs_radicand() {
            ExtContext::new(r0, hints)?
        } else {
            ExtContext::rational_only(hints)
        };
        let env = ExactEnv::new(at.x.clone(), at.y.clone(), ctx);
        let xs: Vec<ExactJet> = (0..n).map(|i| ExactJet::x_coordinate(&env, ox, i)).collect();
        let ys: Vec<ExactJet> = (0..n).map(|i| ExactJet::y_coordinate(&env, ox, i)).collect();
        Frame::assemble(spec, pd.sigma, xs, ys)
    }
}

impl<S: Scalar> Frame<S> {
    fn assemble(spec: &MetricSpec, sigma: i64, x: Vec<S>, y: Vec<S>) -> Result<Self> {
        let n = spec.dimension;
        let p = spec.params();
        let mut alpha: Matrix<S> = vec![vec![x[0].zero_like(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = spec.alpha[i][j].eval(&x)?;
                alpha[j][i] = v.clone();
                alpha[i][j] = v;
            }
        }
        let b = spec.beta.iter().map(|e| e.eval(&x)).collect::<Result<Vec<_>>>()?;
        let at: Matrix<S> = alpha.iter().map(|r| r.iter().map(|v| v.scale_int(sigma)).collect()).collect();
        let at_inv = linalg::inverse(&at)?;
        let yt = linalg::mat_vec(&at, &y);
        let a2 = linalg::dot(&yt, &y);
        let beta = linalg::dot(&b, &y);
        let b_sharp = linalg::mat_vec(&at_inv, &b);
        let bb2 = linalg::dot(&b, &b_sharp);
        let r = a2.scale(&p.c) + &beta.square().scale(&p.r);
        Ok(Frame {
            spec: spec.clone(),
            p,
            n,
            sigma,
            x,
            y,
            alpha,
            at,
            at_inv,
            b,
            b_sharp,
            bb2,
            yt,
            a2,
            beta,
            r,
        })
    }

    fn konst(&self, v: &Rational) -> S {
        self.beta.constant_like(v)
    }

    /// `k = c(m+1)`.
    pub fn k(&self) -> Rational {
        &self.p.c * (&self.p.m + q(1))
    }

    fn inv_beta(&self) -> Result<S> {
        recip_named(&self.beta, "β")
    }

    fn inv_r(&self) -> Result<S> {
        recip_named(&self.r, "cα² + rβ²")
    }

    fn inv_a2(&self) -> Result<S> {
        recip_named(&self.a2, "α²")
    }

    /// `η = R^m β^{−2m}`.
    pub fn eta(&self) -> Result<S> {
        let m = &self.p.m;
        Ok(self.r.try_powf(m)? * &self.beta.try_powf(&(m * q(-2)))?)
    }

    /// `F² = R^{1+m} β^{−2m}`.
    pub fn f2(&self) -> Result<S> {
        Ok(self.eta()? * &self.r)
    }

    /// `F = ±β^{−m} R^{(1+m)/2}`.
    pub fn f(&self) -> Result<S> {
        let m = &self.p.m;
        let v = self.beta.try_powf(&-m.clone())? * &self.r.try_powf(&((q(1) + m) / q(2)))?;
        Ok(v.scale_int(self.p.sign))
    }

    /// `D_Θ = c(m−1)β² − b̃²(cmα² + rβ²)`, the common denominator of Θ, Ψ
    /// and the determinant bracket.
    pub fn d_theta(&self) -> S {
        let p = &self.p;
        let b2 = self.beta.square();
        b2.scale(&(&p.c * (&p.m - q(1)))) - &(self.bb2.clone() * &(self.a2.scale(&(&p.c * &p.m)) + &b2.scale(&p.r)))
    }

    /// `rβ² − cmα²`; vanishes on the `φ′ = 0` locus.
    pub fn phi_prime_factor(&self) -> S {
        self.beta.square().scale(&self.p.r) - &self.a2.scale(&(&self.p.c * &self.p.m))
    }

    /// `(c1, c2, c3)` of `a = kã + c1·bb + c2(bỸ+Ỹb) + c3·ỸỸ`.
    pub fn a_coefficients(&self) -> Result<(S, S, S)> {
        let p = &self.p;
        let ib = self.inv_beta()?;
        let ir = self.inv_r()?;
        let a4 = self.a2.square();
        let b2 = self.beta.square();
        let kk = a4.scale(&(&p.c * &p.c * &p.m * (&p.m * q(2) + q(1))))
            - &(b2.clone() * &self.a2).scale(&(&p.c * &p.r * (&p.m - q(1))))
            + &b2.square().scale(&(&p.r * &p.r));
        let c1 = kk * &ib.square() * &ir;
        let two_c2m = &p.c * &p.c * &p.m * (&p.m + q(1)) * q(2);
        let c2 = (self.a2.clone() * &ib * &ir).scale(&-two_c2m.clone());
        let c3 = ir.scale(&two_c2m);
        Ok((c1, c2, c3))
    }

    fn combine(&self, p0: &S, p1: &S, p2: &S, p3: &S) -> Matrix<S> {
        let n = self.n;
        let mut g = vec![vec![p0.zero_like(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.at[i][j].clone() * p0
                    + &(self.b[i].clone() * &self.b[j] * p1)
                    + &((self.b[i].clone() * &self.yt[j] + &(self.yt[i].clone() * &self.b[j])) * p2)
                    + &(self.yt[i].clone() * &self.yt[j] * p3);
                g[j][i] = v.clone();
                g[i][j] = v;
            }
        }
        g
    }

    /// The AR factor `a_ij`, rational in `y` for every admitted `m`.
    pub fn a_tensor(&self) -> Result<Matrix<S>> {
        let (c1, c2, c3) = self.a_coefficients()?;
        Ok(self.combine(&self.konst(&self.k()), &c1, &c2, &c3))
    }

    /// `g = η·a`.
    pub fn g_eta_a(&self) -> Result<Matrix<S>> {
        let eta = self.eta()?;
        Ok(self.a_tensor()?.into_iter().map(|r| r.into_iter().map(|v| v * &eta).collect()).collect())
    }

    /// `g = (φ² − sφφ′)ã + (φφ″+φ′²)bb + …` with the φ-products written
    /// through `η`, `α²`, `β`.
    pub fn g_closed(&self) -> Result<Matrix<S>> {
        let p = &self.p;
        let eta = self.eta()?;
        let ia2 = self.inv_a2()?;
        let ib = self.inv_beta()?;
        let ir = self.inv_r()?;
        let b2 = self.beta.square();
        let phi2 = self.f2()? * &ia2;
        let sff = eta.clone() * &self.phi_prime_factor() * &ia2;
        let p0 = phi2 - &sff;
        let kk = self.a2.square().scale(&(&p.c * &p.c * &p.m * (&p.m * q(2) + q(1))))
            - &(b2.clone() * &self.a2).scale(&(&p.c * &p.r * (&p.m - q(1))))
            + &b2.square().scale(&(&p.r * &p.r));
        let p1 = eta * &kk * &ib.square() * &ir;
        let p2 = sff * &ib - &(p1.clone() * &self.beta * &ia2);
        let p3 = -(p2.clone() * &self.beta * &ia2);
        Ok(self.combine(&p0, &p1, &p2, &p3))
    }

    /// `g_ij = ½ ∂̇_i ∂̇_j F²`.
    pub fn g_direct(&self) -> Result<Matrix<S>> {
        let f2 = self.f2()?;
        let n = self.n;
        let half = Rational::new(1.into(), 2.into());
        let d1 = (0..n).map(|i| f2.dy(i)).collect::<Result<Vec<_>>>()?;
        let mut g = vec![vec![f2.zero_like(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = d1[i].dy(j)?.scale(&half);
                g[j][i] = v.clone();
                g[i][j] = v;
            }
        }
        Ok(g)
    }

    /// `g⁻¹` from the rank-two update structure of `a`:
    /// `a⁻¹ = (1/k)[ã⁻¹ − V N⁻¹ C′ Vᵀ]`, `V = [b♯, y]`, `N = kI + C′M`.
    pub fn g_inverse(&self) -> Result<Matrix<S>> {
        let (c1, c2, c3) = self.a_coefficients()?;
        let k = self.k();
        let kk = self.konst(&k);
        let m11 = self.bb2.clone();
        let m12 = self.beta.clone();
        let m22 = self.a2.clone();
        let n11 = kk.clone() + &(c1.clone() * &m11) + &(c2.clone() * &m12);
        let n12 = c1.clone() * &m12 + &(c2.clone() * &m22);
        let n21 = c2.clone() * &m11 + &(c3.clone() * &m12);
        let n22 = kk.clone() + &(c2.clone() * &m12) + &(c3.clone() * &m22);
        // det N = −k·D_Θ/β²
        let dt = self.d_theta();
        let idt = recip_named(&dt, "c(m−1)β² − b̃²(cmα² + rβ²)")?;
        let inv_det = (self.beta.square() * &idt).scale(&(-q(1) / &k));
        // N⁻¹C′, entries t_ab
        let (i11, i12, i21, i22) = (
            n22.clone() * &inv_det,
            -(n12.clone() * &inv_det),
            -(n21.clone() * &inv_det),
            n11.clone() * &inv_det,
        );
        let t11 = i11.clone() * &c1 + &(i12.clone() * &c2);
        let t12 = i11 * &c2 + &(i12 * &c3);
        let t21 = i21.clone() * &c1 + &(i22.clone() * &c2);
        let t22 = i21 * &c2 + &(i22 * &c3);
        let eta = self.eta()?;
        let scale = recip_named(&(eta * &kk), "η·c(m+1)")?;
        let n = self.n;
        let v1 = &self.b_sharp;
        let v2 = &self.y;
        let mut out = vec![vec![kk.zero_like(); n]; n];
        for i in 0..n {
            for j in i..n {
                let corr = v1[i].clone() * &(t11.clone() * &v1[j] + &(t12.clone() * &v2[j]))
                    + &(v2[i].clone() * &(t21.clone() * &v1[j] + &(t22.clone() * &v2[j])));
                let v = (self.at_inv[i][j].clone() - &corr) * &scale;
                out[j][i] = v.clone();
                out[i][j] = v;
            }
        }
        Ok(out)
    }

    /// `det g / det ã = (c(m+1))^{n−1} η^n (−D_Θ/β²)`.
    pub fn det_ratio(&self) -> Result<S> {
        let k = self.k();
        let kn = num_traits::pow::Pow::pow(&k, (self.n - 1) as u32);
        let bracket = -(self.d_theta() * &self.inv_beta()?.square());
        Ok(self.eta()?.powi(self.n as i32)? * &bracket.scale(&kn))
    }

    /// Closed-form `det g`.
    pub fn det_g(&self) -> Result<S> {
        Ok(self.det_ratio()? * &linalg::det(&self.at)?)
    }

    /// `∂̇_i log η = −2mc(α² b_i − β Ỹ_i)/(Rβ)`.
    pub fn dlog_eta(&self) -> Result<Vec<S>> {
        let f = (self.inv_r()? * &self.inv_beta()?).scale(&(&self.p.m * &self.p.c * q(-2)));
        Ok((0..self.n)
            .map(|i| (self.a2.clone() * &self.b[i] - &(self.beta.clone() * &self.yt[i])) * &f)
            .collect())
    }

    /// Levi-Civita symbols `Γⁱ_jk` of α, `[i][j][k]`.
    pub fn alpha_christoffel(&self) -> Result<Vec<Matrix<S>>> {
        let n = self.n;
        let mut d = Vec::with_capacity(n);
        for l in 0..n {
            let mut dl = vec![vec![self.beta.zero_like(); n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = self.alpha[i][j].dx(l)?;
                    dl[j][i] = v.clone();
                    dl[i][j] = v;
                }
            }
            d.push(dl);
        }
        // α⁻¹ = σ ã⁻¹
        let half = Rational::new(self.sigma.into(), 2.into());
        let zero = d[0][0][0].zero_like();
        let mut gam = vec![vec![vec![zero.clone(); n]; n]; n];
        for j in 0..n {
            for k in j..n {
                let low: Vec<S> = (0..n)
                    .map(|l| d[j][l][k].clone() + &d[k][j][l] - &d[l][j][k])
                    .collect();
                for i in 0..n {
                    let ai: Vec<S> = (0..n).map(|l| self.at_inv[i][l].clone()).collect();
                    let v = linalg::dot(&ai, &low).scale(&half);
                    gam[i][k][j] = v.clone();
                    gam[i][j][k] = v;
                }
            }
        }
        Ok(gam)
    }
}

/// `F`, `g` and their companions at one point.
#[derive(Clone, Debug)]
pub struct FundamentalTensors<S> {
    pub f: S,
    pub f2: S,
    pub g: Matrix<S>,
    pub g_inv: Matrix<S>,
    pub det_g: S,
    pub h: Matrix<S>,
    pub ell: Vec<S>,
    /// `C_ijk`, indexed `[i][j][k]`.
    pub cartan: Vec<Matrix<S>>,
    pub mean_cartan: Vec<S>,
    pub eta: S,
    pub a: Matrix<S>,
}

impl<S: Scalar> FundamentalTensors<S> {
    /// Builds everything from a frame and runs the internal cross-checks:
    /// direct vs closed `g`, `η·a = g`, `g·g⁻¹ = I`, closed vs direct
    /// determinant. The frame needs fiber order at least 3 on the numeric
    /// backend.
    pub fn compute(frame: &Frame<S>) -> Result<Self> {
        let n = frame.n;
        let f = frame.f()?;
        let f2 = frame.f2()?;
        // η·a is the primary route: a is rational in y and avoids the
        // φ² − sφφ′ cancellation of the closed form at large |s|
        let a = frame.a_tensor()?;
        let eta = frame.eta()?;
        let g: Matrix<S> = a.iter().map(|r| r.iter().map(|v| v.clone() * &eta).collect()).collect();
        check_matrices(&frame.g_direct()?, &g, "½∂̇∂̇F² vs η·a")?;
        check_matrices(&frame.g_closed()?, &g, "closed-form g vs η·a")?;
        let det_direct = linalg::det(&g)?;
        if det_direct.vanishes_at_point() {
            return Err(CoreError::DegenerateMetric("det g = 0".into()));
        }
        let det_g = frame.det_g()?;
        if !agree(&det_g, &det_direct, det_direct.value().abs()) {
            return Err(CoreError::Inconsistent(format!(
                "det g closed form {} vs direct {}",
                det_g.value(),
                det_direct.value()
            )));
        }
        let g_inv = frame.g_inverse()?;
        let id = linalg::mat_mul(&g, &g_inv);
        let eye: Matrix<S> = (0..n).map(|i| (0..n).map(|j| f.int_like((i == j) as i64)).collect()).collect();
        // rounding in g·g⁻¹ grows with the condition number
        let cond = n as f64 * max_abs(&g) * max_abs(&g_inv);
        for (ra, rb) in id.iter().zip(&eye) {
            for (x, y) in ra.iter().zip(rb) {
                if !agree(x, y, cond) {
                    return Err(CoreError::Inconsistent(format!("g·g⁻¹: {} vs {}", x.value(), y.value())));
                }
            }
        }
        let ell = (0..n).map(|i| f.dy(i)).collect::<Result<Vec<_>>>()?;
        let h: Matrix<S> = (0..n)
            .map(|i| (0..n).map(|j| g[i][j].clone() - &(ell[i].clone() * &ell[j])).collect())
            .collect();
        let half = Rational::new(1.into(), 2.into());
        let mut cartan = vec![vec![vec![f.zero_like(); n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = g[i][j].dy(k)?.scale(&half);
                    cartan[i][j][k] = v.clone();
                    cartan[j][i][k] = v;
                }
            }
        }
        let mean_cartan = (0..n)
            .map(|l| {
                sum(
                    &f,
                    (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| g_inv[j][k].clone() * &cartan[l][j][k]),
                )
            })
            .collect();
        Ok(FundamentalTensors {
            f,
            f2,
            g,
            g_inv,
            det_g,
            h,
            ell,
            cartan,
            mean_cartan,
            eta,
            a,
        })
    }
}

/// `fundamental_tensors` on the numeric backend.
pub fn fundamental_tensors_numeric(spec: &MetricSpec, at: &EvalPoint) -> Result<FundamentalTensors<Jet>> {
    FundamentalTensors::compute(&Frame::numeric(spec, at, 0, 3)?)
}

/// `fundamental_tensors` on the exact backend.
pub fn fundamental_tensors_exact(spec: &MetricSpec, at: &EvalPoint) -> Result<FundamentalTensors<ExactJet>> {
    FundamentalTensors::compute(&Frame::exact(spec, at, 0)?)
}

/// The metric tensor from the printed φ-formula in plain floats.
pub fn g_printed(spec: &MetricSpec, at: &EvalPoint) -> Result<Vec<Vec<f64>>> {
    let pd = spec.point_data(at)?;
    let (phi, d1, d2) = phi_family(pd.s, &spec.params())?;
    let n = spec.dimension;
    let sg = pd.sigma as f64;
    let al = pd.alpha_norm;
    let s = pd.s;
    let yl: Vec<f64> = (0..n).map(|i| (0..n).map(|j| pd.alpha[i][j] * at.yf[j]).sum()).collect();
    let p1 = phi * d2 + d1 * d1;
    let p2 = (phi * d1 - s * p1) / al;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (phi * phi - s * phi * d1) * sg * pd.alpha[i][j]
                        + p1 * pd.b[i] * pd.b[j]
                        + p2 * (sg * (pd.b[i] * yl[j] + pd.b[j] * yl[i]) - s / al * yl[i] * yl[j])
                })
                .collect()
        })
        .collect())
}

/// `φ^{n+1}(φ−sφ′)^{n−2}(φ−sφ′+(σb²−s²)φ″)·σⁿ·det α` in plain floats.
pub fn det_printed(spec: &MetricSpec, at: &EvalPoint) -> Result<f64> {
    let pd = spec.point_data(at)?;
    let (phi, d1, d2) = phi_family(pd.s, &spec.params())?;
    let n = spec.dimension;
    let am = DMatrix::from_fn(n, n, |i, j| pd.alpha[i][j]);
    let inv = am
        .clone()
        .try_inverse()
        .ok_or_else(|| CoreError::DegenerateMetric("α is singular".into()))?;
    let b = nalgebra::DVector::from_vec(pd.b.clone());
    let b2 = (b.transpose() * &inv * &b)[(0, 0)];
    let sg = pd.sigma as f64;
    let s = pd.s;
    let u = phi - s * d1;
    Ok(phi.powi(n as i32 + 1) * u.powi(n as i32 - 2) * (u + (sg * b2 - s * s) * d2) * sg.powi(n as i32) * am.determinant())
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSample {
    pub point: String,
    pub eigenvalues: Vec<f64>,
    pub positive_definite: bool,
    /// `φ − φφ′ + (b² − s²)φ″`, as printed.
    pub printed_condition: f64,
    /// `φ − sφ′ + (b² − s²)φ″`.
    pub standard_condition: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub samples: Vec<ProbeSample>,
    pub all_positive_definite: bool,
    pub signature_consistent: bool,
}

/// Eigenvalue signature of `g` at each sample, plus both forms of the
/// positivity condition. Never fails; bad points are reported in place.
pub fn positive_definiteness_probe(spec: &MetricSpec, samples: &[EvalPoint]) -> ProbeReport {
    let n = spec.dimension;
    let mut out = Vec::with_capacity(samples.len());
    for at in samples {
        let res = (|| -> Result<ProbeSample> {
            let frame = Frame::numeric(spec, at, 0, 0)?;
            let g = linalg::values(&frame.g_eta_a()?);
            let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| g[i][j]));
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            let pd = spec.point_data(at)?;
            let (phi, d1, d2) = phi_family(pd.s, &spec.params())?;
            let am = DMatrix::from_fn(n, n, |i, j| pd.alpha[i][j]);
            let inv = am.try_inverse().ok_or_else(|| CoreError::DegenerateMetric("α is singular".into()))?;
            let b = nalgebra::DVector::from_vec(pd.b.clone());
            let b2 = (b.transpose() * &inv * &b)[(0, 0)];
            let s = pd.s;
            Ok(ProbeSample {
                point: at.to_string(),
                positive_definite: ev.iter().all(|v| *v > 0.0),
                eigenvalues: ev,
                printed_condition: phi - phi * d1 + (b2 - s * s) * d2,
                standard_condition: phi - s * d1 + (b2 - s * s) * d2,
                error: None,
            })
        })();
        out.push(res.unwrap_or_else(|e| ProbeSample {
            point: at.to_string(),
            eigenvalues: Vec::new(),
            positive_definite: false,
            printed_condition: f64::NAN,
            standard_condition: f64::NAN,
            error: Some(e.to_string()),
        }));
    }
    let ok: Vec<&ProbeSample> = out.iter().filter(|s| s.error.is_none()).collect();
    let signature = |s: &ProbeSample| s.eigenvalues.iter().filter(|v| **v > 0.0).count();
    let signature_consistent = ok.windows(2).all(|w| signature(w[0]) == signature(w[1]));
    ProbeReport {
        all_positive_definite: !ok.is_empty() && ok.iter().all(|s| s.positive_definite),
        signature_consistent,
        samples: out,
    }
}

/// Smallest integer fiber vector with entries in `[-3, 3]` at which the
/// metric is admissible and `D_Θ ≠ 0`; used when only a base point is given.
pub fn auto_fiber(spec: &MetricSpec, x: &[Rational]) -> Result<EvalPoint> {
    let n = spec.dimension;
    let mut cands: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        cands = cands
            .into_iter()
            .flat_map(|v| {
                (-3..=3).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    cands.sort_by_key(|v| (v.iter().map(|k| k * k).sum::<i64>(), v.iter().map(|k| -k).collect::<Vec<_>>()));
    for c in cands {
        if c.iter().all(|k| *k == 0) {
            continue;
        }
        let at = EvalPoint::new(x.to_vec(), c.iter().map(|k| q(*k)).collect())?;
        if spec.point_data(&at).is_err() {
            continue;
        }
        // avoid the Θ/Ψ singular locus with a float check
        if let Ok(fr) = Frame::numeric(spec, &at, 0, 0) {
            let d = fr.d_theta().value();
            if d.abs() > 1e-12 * fr.a2.value().abs().max(1.0).powi(2) {
                return Ok(at);
            }
        }
    }
    Err(CoreError::DomainViolation("no admissible small integer direction at this base point".into()))
}

/// Integer part of an exact `m`, if any.
pub fn integer_m(p: &FamilyParams) -> Option<i64> {
    if p.m.is_integer() {
        p.m.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
pub(crate) fn f64_of(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[allow(dead_code)]
pub(crate) fn is_negative(q: &Rational) -> bool {
    q.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{Family, Sign};

    fn euclid(n: usize, b: &[&str], family: Family) -> MetricSpec {
        let rows: Vec<Vec<String>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { "1".into() } else { "0".into() }).collect()).collect();
        let rr: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
        let rs: Vec<&[&str]> = rr.iter().map(|r| r.as_slice()).collect();
        MetricSpec::parse(&rs, b, family).unwrap()
    }

    #[test]
    fn phi_values() {
        let k = Family::Kropina { sign: Sign::Plus }.params();
        let (a, b, c) = phi_family(2.0, &k).unwrap();
        assert!((a - 0.5).abs() < 1e-15 && (b + 0.25).abs() < 1e-15 && (c - 0.25).abs() < 1e-15);
        let g = Family::generalized(2, 1, 1).params();
        let (a, b, _) = phi_family(1.0, &g).unwrap();
        assert!((a - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((b + 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(phi_family(0.0, &k), Err(CoreError::DomainViolation(_))));
        let h = Family::generalized(1, 1, 2).params();
        assert!(matches!(phi_family(0.5f64.sqrt(), &h), Err(CoreError::DegenerateMetric(_))));
    }

    #[test]
    fn kropina_plane_value() {
        let spec = euclid(2, &["1", "0"], Family::Kropina { sign: Sign::Plus });
        let at = EvalPoint::from_ints(&[5, -3], &[1, 1]);
        let fr = Frame::numeric(&spec, &at, 0, 0).unwrap();
        assert!((fr.f().unwrap().value() - 2.0).abs() < 1e-14);
        let ex = Frame::exact(&spec, &at, 0).unwrap();
        assert_eq!(ex.f().unwrap().exact_value().unwrap().0, q(2));
    }

    fn sweep_specs() -> Vec<MetricSpec> {
        let mut v = Vec::new();
        for m in 1..=4 {
            for (c, r) in [(1, 0), (1, 1), (2, -1)] {
                v.push(euclid(3, &["1", "x1", "1/2"], Family::generalized(m, c, r)));
            }
        }
        v
    }

    #[test]
    fn metric_routes_agree_numeric() {
        let at = EvalPoint::parse("x=1/3,1,0;y=1,2,-1/2").unwrap();
        for spec in sweep_specs() {
            let Ok(fr) = Frame::numeric(&spec, &at, 0, 3) else { continue };
            let t = FundamentalTensors::compute(&fr).unwrap();
            let printed = g_printed(&spec, &at).unwrap();
            let g = linalg::values(&t.g);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((printed[i][j] - g[i][j]).abs() < 1e-10 * g[i][j].abs().max(1.0));
                }
            }
            let d = det_printed(&spec, &at).unwrap();
            assert!((d - t.det_g.value()).abs() < 1e-9 * d.abs());
            // C·y = 0, h·y = 0
            for i in 0..3 {
                let hy: f64 = (0..3).map(|j| t.h[i][j].value() * at.yf[j]).sum();
                assert!(hy.abs() < 1e-10 * t.f2.value());
                for j in 0..3 {
                    let cy: f64 = (0..3).map(|k| t.cartan[i][j][k].value() * at.yf[k]).sum();
                    assert!(cy.abs() < 1e-10 * t.f2.value() / t.f.value().abs());
                }
            }
            // mean Cartan = ½∂̇ log det g
            let half_n = f64_of(&q(3)) / 2.0;
            let dl = fr.dlog_eta().unwrap();
            let dt = fr.d_theta();
            for l in 0..3 {
                let closed = half_n * dl[l].value()
                    + 0.5 * (dt.dy(l).unwrap().value() / dt.value() - 2.0 * fr.b[l].value() / fr.beta.value());
                assert!((closed - t.mean_cartan[l].value()).abs() < 1e-9 * closed.abs().max(1.0));
            }
        }
    }

    #[test]
    fn metric_routes_agree_exact() {
        let at = EvalPoint::parse("x=1/3,1,0;y=1,2,-1/2").unwrap();
        for spec in sweep_specs() {
            if spec.point_data(&at).is_err() {
                continue;
            }
            let t = fundamental_tensors_exact(&spec, &at).unwrap();
            let m = integer_m(&spec.params()).unwrap();
            let want = if m % 2 == 1 { kropina_ratfun::Certificate::Rational } else { kropina_ratfun::Certificate::Irrational };
            assert_eq!(t.f.rationality(), want);
            assert_eq!(t.f2.rationality(), kropina_ratfun::Certificate::Rational);
            for l in 0..3 {
                assert_eq!(t.mean_cartan[l].rationality(), kropina_ratfun::Certificate::Rational);
            }
            let num = fundamental_tensors_numeric(&spec, &at).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let (a, b) = (t.g[i][j].value(), num.g[i][j].value());
                    assert!((a - b).abs() <= 1e-12 + 1e-9 * a.abs());
                }
            }
        }
    }

    #[test]
    fn pseudo_riemannian_limit() {
        let spec = MetricSpec::parse(
            &[&["-1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]],
            &["1", "2", "0"],
            Family::PseudoRiemannian { c: 1.into(), r: 0.into() },
        )
        .unwrap();
        let at = EvalPoint::from_ints(&[0, 0, 0], &[1, 2, 3]);
        let t = fundamental_tensors_exact(&spec, &at).unwrap();
        assert_eq!(t.eta.exact_value().unwrap().0, q(1));
        for l in 0..3 {
            assert!(t.mean_cartan[l].is_identically_zero());
            for i in 0..3 {
                for j in 0..3 {
                    assert!(t.cartan[i][j][l].is_identically_zero());
                }
            }
        }
        assert_eq!(t.g[0][0].exact_value().unwrap().0, q(-1));
    }

    #[test]
    fn probe_verdicts() {
        let spec = euclid(2, &["0", "0"].map(|_| "1"), Family::PseudoRiemannian { c: 1.into(), r: 0.into() });
        let pts: Vec<EvalPoint> = (1..5).map(|k| EvalPoint::from_ints(&[0, 0], &[k, 1])).collect();
        let rep = positive_definiteness_probe(&spec, &pts);
        assert!(rep.all_positive_definite);
        // Example 1's Minkowski α; time-like directions have a negative
        // direction in the ã-complement of span{b♯, y}
        let mink = MetricSpec::parse(
            &[&["-1", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["0", "0", "0", "1"]],
            &["1", "2", "0", "0"],
            Family::MKropina { m: 2.into(), sign: Sign::Plus },
        )
        .unwrap();
        let pts: Vec<EvalPoint> = [[3, 1, 0, 0], [1, 3, 1, 0], [2, 5, 0, 1], [4, 1, 1, 1]]
            .iter()
            .map(|y| EvalPoint::from_ints(&[0, 0, 0, 0], y))
            .collect();
        let rep = positive_definiteness_probe(&mink, &pts);
        assert!(rep.samples.iter().all(|s| s.error.is_none()));
        assert!(!rep.all_positive_definite);
    }
}

//! Spray, connections and curvatures over either backend.
//!
//! Index layout: `n[i][j] = Nⁱ_j`, `gamma[i][j][k] = Gⁱ_jk`,
//! `b[i][j][k][l] = Gⁱ_jkl`, `r[i][j][k] = Rⁱ_jk`, `riem[i][k] = Rⁱ_k`.

use std::sync::OnceLock;

use kropina_ratfun::Rational;
use serde::Serialize;

use crate::autodiff::Jet;
use crate::error::{CoreError, Result};
use crate::exact::ExactJet;
use crate::expr::Expr;
use crate::geometry::{agree, recip_named, Frame};
use crate::linalg::{self, Matrix};
use crate::scalar::{sum, Scalar};
use crate::spec::{EvalPoint, MetricSpec};

type T3<S> = Vec<Matrix<S>>;
type T4<S> = Vec<Vec<Matrix<S>>>;

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Spray coefficients together with the pieces of the (α,β) split.
///
/// `alpha_q = αQ`, `theta_over_alpha = Θ/α` and `psi = Ψ` are stored in
/// these combinations because they are rational in `α²`, `β`.
#[derive(Clone, Debug)]
pub struct SprayData<S> {
    pub g: Vec<S>,
    pub g_alpha: Vec<S>,
    pub r00: S,
    pub s_i0: Vec<S>,
    pub s0: S,
    pub alpha_q: S,
    pub theta_over_alpha: S,
    pub psi: S,
}

/// `Gⁱ = Gⁱ_α + αQ sⁱ₀ + (r₀₀ − 2αQ s₀)(Ψ bⁱ + (Θ/α) yⁱ)`.
/// Needs base order at least 1 in the frame.
pub fn spray_split<S: Scalar>(fr: &Frame<S>) -> Result<SprayData<S>> {
    let n = fr.n;
    let p = &fr.p;
    let gam = fr.alpha_christoffel()?;
    let y = &fr.y;
    // b_{i;j} = ∂_j b_i − Γᵏ_ij b_k
    let mut cov = vec![vec![gam[0][0][0].zero_like(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = fr.b[i].dx(j)?;
            for k in 0..n {
                v = v - &(gam[k][i][j].clone() * &fr.b[k]);
            }
            cov[i][j] = v;
        }
    }
    let zero = cov[0][0].zero_like();
    let mut r00 = zero.clone();
    let mut s_low = vec![zero.clone(); n];
    for i in 0..n {
        for j in 0..n {
            let yy = y[i].clone() * &y[j];
            r00 = r00 + &(cov[i][j].clone() * &yy);
            // s_ij = ½(b_i;j − b_j;i), s_i0 = s_ij yʲ
            s_low[i] = s_low[i].clone() + &((cov[i][j].clone() - &cov[j][i]).scale(&half()) * &y[j]);
        }
    }
    let s_up = linalg::mat_vec(&fr.at_inv, &s_low);
    let s0 = linalg::dot(&fr.b_sharp, &s_low);
    let mut g_alpha = vec![zero.clone(); n];
    for (i, ga) in g_alpha.iter_mut().enumerate() {
        let mut v = zero.clone();
        for j in 0..n {
            for k in 0..n {
                v = v + &(gam[i][j][k].clone() * &y[j] * &y[k]);
            }
        }
        *ga = v.scale(&half());
    }
    let b2 = fr.beta.square();
    let cm = &p.c * &p.m;
    let num_q = b2.scale(&p.r) + &fr.a2.scale(&cm);
    // αQ = α φ′/(φ − sφ′) = (rβ² − cmα²)/(c(m+1)β)
    let alpha_q = fr.phi_prime_factor() * &recip_named(&fr.beta.scale(&fr.k()), "Q: c(m+1)s")?;
    let dt = fr.d_theta();
    let idt = recip_named(&dt, "Θ and Ψ: c(m−1)s² − b²(cm + rs²)")?;
    let theta_over_alpha = fr.beta.scale(&cm) * &idt;
    let psi = (num_q * &idt).scale(&-half());
    let lead = r00.clone() - &(alpha_q.clone() * &s0).scale_int(2);
    let g = (0..n)
        .map(|i| {
            g_alpha[i].clone()
                + &(alpha_q.clone() * &s_up[i])
                + &(lead.clone() * &(psi.clone() * &fr.b_sharp[i] + &(theta_over_alpha.clone() * &y[i])))
        })
        .collect();
    Ok(SprayData {
        g,
        g_alpha,
        r00,
        s_i0: s_up,
        s0,
        alpha_q,
        theta_over_alpha,
        psi,
    })
}

/// `Gⁱ = ¼ g^{ir}(yᵏ ∂̇_r ∂_k F² − ∂_r F²)`. Needs base order 1 and fiber
/// order 1 in the frame.
pub fn spray_direct<S: Scalar>(fr: &Frame<S>) -> Result<Vec<S>> {
    let n = fr.n;
    let f2 = fr.f2()?;
    let g_inv = fr.g_inverse()?;
    let mut w = Vec::with_capacity(n);
    for r in 0..n {
        let dr = f2.dy(r)?;
        let mut v = -f2.dx(r)?;
        for k in 0..n {
            v = v + &(dr.dx(k)? * &fr.y[k]);
        }
        w.push(v);
    }
    let quarter = Rational::new(1.into(), 4.into());
    Ok((0..n)
        .map(|i| sum(&w[0], (0..n).map(|r| g_inv[i][r].clone() * &w[r])).scale(&quarter))
        .collect())
}

/// Both spray routes, asserted equal.
pub fn spray<S: Scalar>(fr: &Frame<S>) -> Result<SprayData<S>> {
    let split = spray_split(fr)?;
    let direct = spray_direct(fr)?;
    let scale = split.g.iter().chain(&direct).map(|v| v.value().abs()).fold(0.0, f64::max);
    for i in 0..fr.n {
        if !agree(&split.g[i], &direct[i], scale) {
            return Err(CoreError::Inconsistent(format!(
                "spray G^{}: split {} vs direct {}",
                i + 1,
                split.g[i].value(),
                direct[i].value()
            )));
        }
    }
    Ok(split)
}

fn cached<'a, T>(cell: &'a OnceLock<T>, f: impl FnOnce() -> Result<T>) -> Result<&'a T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    let _ = cell.set(v);
    Ok(cell.get().expect("just set"))
}

/// The connection and curvature tower at one point, computed on demand.
pub struct Tower<S> {
    pub frame: Frame<S>,
    pub spray: SprayData<S>,
    /// Barthel connection `Nⁱ_j = ∂̇_j Gⁱ`.
    pub n: Matrix<S>,
    g: OnceLock<Matrix<S>>,
    g_inv: OnceLock<Matrix<S>>,
    f2: OnceLock<S>,
    gamma: OnceLock<T3<S>>,
    berwald: OnceLock<T4<S>>,
    mean_berwald: OnceLock<Matrix<S>>,
    landsberg: OnceLock<T3<S>>,
    mean_landsberg: OnceLock<Vec<S>>,
    riemann: OnceLock<Matrix<S>>,
    ric: OnceLock<S>,
    ricci_tensor: OnceLock<Matrix<S>>,
    chern: OnceLock<T3<S>>,
}

/// Fiber order for the full tower including the field equation.
pub const FULL_FIBER_ORDER: usize = 5;

impl Tower<Jet> {
    /// Numeric tower; `oy` bounds which objects are available (2 for `Ric`,
    /// 4 for `R_ij`, `H`, 5 for the field residuals).
    pub fn numeric(spec: &MetricSpec, at: &EvalPoint, oy: usize) -> Result<Self> {
        Tower::new(Frame::numeric(spec, at, 2, oy)?, false)
    }
}

impl Tower<ExactJet> {
    pub fn exact(spec: &MetricSpec, at: &EvalPoint) -> Result<Self> {
        Tower::new(Frame::exact(spec, at, 2)?, false)
    }
}

impl<S: Scalar> Tower<S> {
    /// Builds from a frame with base order 2. With `check_spray` the direct
    /// spray route is also evaluated and compared.
    pub fn new(frame: Frame<S>, check_spray: bool) -> Result<Self> {
        let spray = if check_spray { spray(&frame)? } else { spray_split(&frame)? };
        let n = (0..frame.n)
            .map(|i| (0..frame.n).map(|j| spray.g[i].dy(j)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Tower {
            frame,
            spray,
            n,
            g: OnceLock::new(),
            g_inv: OnceLock::new(),
            f2: OnceLock::new(),
            gamma: OnceLock::new(),
            berwald: OnceLock::new(),
            mean_berwald: OnceLock::new(),
            landsberg: OnceLock::new(),
            mean_landsberg: OnceLock::new(),
            riemann: OnceLock::new(),
            ric: OnceLock::new(),
            ricci_tensor: OnceLock::new(),
            chern: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.n
    }

    fn zero(&self) -> S {
        self.spray.g[0].zero_like()
    }

    pub fn g(&self) -> Result<&Matrix<S>> {
        cached(&self.g, || self.frame.g_eta_a())
    }

    pub fn g_inv(&self) -> Result<&Matrix<S>> {
        cached(&self.g_inv, || self.frame.g_inverse())
    }

    pub fn f2(&self) -> Result<&S> {
        cached(&self.f2, || self.frame.f2())
    }

    /// `δ_l f = ∂_l f − Nᵏ_l ∂̇_k f`.
    pub fn delta(&self, f: &S, l: usize) -> Result<S> {
        let mut v = f.dx(l)?;
        for k in 0..self.dim() {
            v = v - &(self.n[k][l].clone() * &f.dy(k)?);
        }
        Ok(v)
    }

    /// Berwald connection `Gⁱ_jk = ∂̇_k Nⁱ_j`.
    pub fn berwald_gamma(&self) -> Result<&T3<S>> {
        cached(&self.gamma, || {
            let n = self.dim();
            let mut out = vec![vec![vec![self.zero(); n]; n]; n];
            for i in 0..n {
                for j in 0..n {
                    for k in j..n {
                        let v = self.n[i][j].dy(k)?;
                        out[i][k][j] = v.clone();
                        out[i][j][k] = v;
                    }
                }
            }
            Ok(out)
        })
    }

    /// Berwald curvature `Gⁱ_jkl = ∂̇_l Gⁱ_jk`.
    pub fn berwald_curvature(&self) -> Result<&T4<S>> {
        cached(&self.berwald, || {
            let n = self.dim();
            let gam = self.berwald_gamma()?;
            let z = self.zero();
            let mut out = vec![vec![vec![vec![z; n]; n]; n]; n];
            for i in 0..n {
                for j in 0..n {
                    for k in j..n {
                        for l in k..n {
                            let v = gam[i][j][k].dy(l)?;
                            for (a, b, c) in [(j, k, l), (j, l, k), (k, j, l), (k, l, j), (l, j, k), (l, k, j)] {
                                out[i][a][b][c] = v.clone();
                            }
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// `E_ij = ½ Gᵏ_kij`.
    pub fn mean_berwald(&self) -> Result<&Matrix<S>> {
        cached(&self.mean_berwald, || {
            let n = self.dim();
            let b = self.berwald_curvature()?;
            let z = self.zero();
            Ok((0..n)
                .map(|i| (0..n).map(|j| sum(&z, (0..n).map(|k| b[k][k][i][j].clone())).scale(&half())).collect())
                .collect())
        })
    }

    /// `L_ijk = −¼ yʳ g_rl Gˡ_ijk`.
    pub fn landsberg(&self) -> Result<&T3<S>> {
        cached(&self.landsberg, || {
            let n = self.dim();
            let b = self.berwald_curvature()?;
            let g = self.g()?;
            let yl = linalg::mat_vec(g, &self.frame.y);
            let quarter = Rational::new((-1).into(), 4.into());
            let z = self.zero();
            let mut out = vec![vec![vec![z.clone(); n]; n]; n];
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = sum(&z, (0..n).map(|l| yl[l].clone() * &b[l][i][j][k])).scale(&quarter);
                        for (a, bb, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                            out[a][bb][c] = v.clone();
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// `J_k = g^{ij} L_ijk`.
    pub fn mean_landsberg(&self) -> Result<&Vec<S>> {
        cached(&self.mean_landsberg, || {
            let n = self.dim();
            let l = self.landsberg()?;
            let gi = self.g_inv()?;
            let z = self.zero();
            Ok((0..n)
                .map(|k| sum(&z, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| gi[i][j].clone() * &l[i][j][k])))
                .collect())
        })
    }

    /// `Rⁱ_jk = δ_k Nⁱ_j − δ_j Nⁱ_k`.
    pub fn barthel_curvature(&self) -> Result<T3<S>> {
        let n = self.dim();
        let mut out = vec![vec![vec![self.zero(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    let v = self.delta(&self.n[i][j], k)? - &self.delta(&self.n[i][k], j)?;
                    out[i][k][j] = -v.clone();
                    out[i][j][k] = v;
                }
            }
        }
        Ok(out)
    }

    /// `Rⁱ_k = 2∂_k Gⁱ − yʲ∂_j∂̇_k Gⁱ + 2Gʲ∂̇_k∂̇_j Gⁱ − ∂̇_j Gⁱ ∂̇_k Gʲ`.
    pub fn riemann(&self) -> Result<&Matrix<S>> {
        cached(&self.riemann, || {
            let n = self.dim();
            let g = &self.spray.g;
            let gam = self.berwald_gamma()?;
            let y = &self.frame.y;
            let mut out = vec![vec![self.zero(); n]; n];
            for i in 0..n {
                for k in 0..n {
                    let mut v = g[i].dx(k)?.scale_int(2);
                    for j in 0..n {
                        v = v - &(self.n[i][k].dx(j)? * &y[j]);
                        v = v + &(g[j].clone() * &gam[i][k][j]).scale_int(2);
                        v = v - &(self.n[i][j].clone() * &self.n[j][k]);
                    }
                    out[i][k] = v;
                }
            }
            Ok(out)
        })
    }

    /// `Ric = Rⁱ_i`.
    pub fn ric(&self) -> Result<&S> {
        cached(&self.ric, || {
            let r = self.riemann()?;
            Ok(sum(&self.zero(), (0..self.dim()).map(|i| r[i][i].clone())))
        })
    }

    /// `R_ij = ½ ∂̇_i ∂̇_j Ric`.
    pub fn ricci_tensor(&self) -> Result<&Matrix<S>> {
        cached(&self.ricci_tensor, || {
            let n = self.dim();
            let ric = self.ric()?;
            let d = (0..n).map(|i| ric.dy(i)).collect::<Result<Vec<_>>>()?;
            let mut out = vec![vec![self.zero(); n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = d[i].dy(j)?.scale(&half());
                    out[j][i] = v.clone();
                    out[i][j] = v;
                }
            }
            Ok(out)
        })
    }

    /// `H_ij = yˡ(δ_l E_ij − Gᵏ_il E_kj − Gᵏ_jl E_ki)`.
    pub fn h_curvature(&self) -> Result<Matrix<S>> {
        let n = self.dim();
        let e = self.mean_berwald()?;
        let gam = self.berwald_gamma()?;
        let y = &self.frame.y;
        let mut out = vec![vec![self.zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut v = self.zero();
                for l in 0..n {
                    let mut t = self.delta(&e[i][j], l)?;
                    for k in 0..n {
                        t = t - &(gam[k][i][l].clone() * &e[k][j]) - &(gam[k][j][l].clone() * &e[k][i]);
                    }
                    v = v + &(t * &y[l]);
                }
                out[j][i] = v.clone();
                out[i][j] = v;
            }
        }
        Ok(out)
    }

    /// Chern connection `Γⁱ_jk = ½ gⁱˡ(δ_j g_lk + δ_k g_jl − δ_l g_jk)`.
    pub fn chern(&self) -> Result<&T3<S>> {
        cached(&self.chern, || {
            let n = self.dim();
            let g = self.g()?;
            let gi = self.g_inv()?;
            // dg[l][j][k] = δ_l g_jk
            let mut dg = vec![vec![vec![self.zero(); n]; n]; n];
            for l in 0..n {
                for j in 0..n {
                    for k in j..n {
                        let v = self.delta(&g[j][k], l)?;
                        dg[l][k][j] = v.clone();
                        dg[l][j][k] = v;
                    }
                }
            }
            let mut out = vec![vec![vec![self.zero(); n]; n]; n];
            for j in 0..n {
                for k in j..n {
                    let low: Vec<S> =
                        (0..n).map(|l| dg[j][l][k].clone() + &dg[k][j][l] - &dg[l][j][k]).collect();
                    for i in 0..n {
                        let v = sum(&self.zero(), (0..n).map(|l| gi[i][l].clone() * &low[l])).scale(&half());
                        out[i][k][j] = v.clone();
                        out[i][j][k] = v;
                    }
                }
            }
            Ok(out)
        })
    }

    /// `S = Nⁱ_i − yⁱ ∂_i log σ` for a volume density `σ(x) > 0`.
    pub fn s_curvature(&self, density: &Expr) -> Result<S> {
        let sig = density.eval(&self.frame.x)?;
        if sig.value() <= 0.0 || sig.vanishes_at_point() {
            return Err(CoreError::DomainViolation(format!("volume density σ = {} ≤ 0", sig.value())));
        }
        let isig = sig.try_recip()?;
        let mut v = sum(&self.zero(), (0..self.dim()).map(|i| self.n[i][i].clone()));
        for i in 0..self.dim() {
            v = v - &(sig.dx(i)? * &isig * &self.frame.y[i]);
        }
        Ok(v)
    }

    /// S-curvature for the density `√|det α|`, with
    /// `∂_i log √|det α| = ½ tr(ã⁻¹ ∂_i ã)`.
    pub fn s_curvature_alpha(&self) -> Result<S> {
        let n = self.dim();
        let fr = &self.frame;
        let mut v = self.n_trace();
        for i in 0..n {
            let mut tr = self.zero();
            for a in 0..n {
                for b in 0..n {
                    tr = tr + &(fr.at_inv[a][b].clone() * &fr.at[b][a].dx(i)?);
                }
            }
            v = v - &(tr * &fr.y[i]).scale(&half());
        }
        Ok(v)
    }

    /// Trace of the Barthel connection, the `y`-part of the S-curvature.
    pub fn n_trace(&self) -> S {
        sum(&self.zero(), (0..self.dim()).map(|i| self.n[i][i].clone()))
    }

    /// `K = g_ij Rⁱ_k uʲ uᵏ / (F² g_ij uⁱuʲ − (g_ij yⁱuʲ)²)`.
    pub fn flag_curvature(&self, u: &[Rational]) -> Result<S> {
        let n = self.dim();
        if u.len() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: u.len() });
        }
        let z = self.zero();
        let uu: Vec<S> = u.iter().map(|v| z.constant_like(v)).collect();
        let g = self.g()?;
        let r = self.riemann()?;
        let gu = linalg::mat_vec(g, &uu);
        let ru = linalg::mat_vec(r, &uu);
        let num = linalg::dot(&gu, &ru);
        let guu = linalg::dot(&gu, &uu);
        let gyu = linalg::dot(&gu, &self.frame.y);
        let den = self.f2()?.clone() * &guu - &gyu.square();
        let scale = (self.f2()?.value() * guu.value()).abs();
        if den.vanishes_at_point() || den.value().abs() <= 1e-13 * scale {
            return Err(CoreError::DegenerateFlag);
        }
        Ok(num * &den.try_recip()?)
    }

    /// `g^{ij}{∂̇_i(yˡ δ_l J_j − Nˡ_j J_l) + J_{j|i}}` with
    /// `J_{j|i} = δ_i J_j − Γˡ_ji J_l` (Chern).
    pub fn field_brace(&self) -> Result<S> {
        let n = self.dim();
        let j = self.mean_landsberg()?;
        let gi = self.g_inv()?;
        let ch = self.chern()?;
        let y = &self.frame.y;
        let mut total = self.zero();
        for jj in 0..n {
            let mut inner = self.zero();
            for l in 0..n {
                inner = inner + &(self.delta(&j[jj], l)? * &y[l]) - &(self.n[l][jj].clone() * &j[l]);
            }
            for i in 0..n {
                let mut t = inner.dy(i)? + &self.delta(&j[jj], i)?;
                for l in 0..n {
                    t = t - &(ch[l][jj][i].clone() * &j[l]);
                }
                total = total + &(gi[i][jj].clone() * &t);
            }
        }
        Ok(total)
    }

    /// `g^{ij} R_ij`.
    pub fn ricci_trace(&self) -> Result<S> {
        let gi = self.g_inv()?;
        let rt = self.ricci_tensor()?;
        let n = self.dim();
        Ok(sum(&self.zero(), (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| gi[i][j].clone() * &rt[i][j])))
    }

    /// Vacuum and Chen–Shen residuals (n = 4 only).
    pub fn field_residuals(&self, r_avg: f64) -> Result<FieldResiduals<S>> {
        if self.dim() != 4 {
            return Err(CoreError::DimensionMismatch { expected: 4, got: self.dim() });
        }
        let ric = self.ric()?.clone();
        let trace = self.ricci_trace()?;
        let brace = self.field_brace()?;
        let f2 = self.f2()?.clone();
        let pw = pw_from_parts(&ric, &trace, &brace, &f2);
        let f = self.frame.f()?.value();
        Ok(FieldResiduals {
            cs: pw.value() - 2.0 * f / 3.0 * r_avg,
            pw,
            ric,
            ricci_trace: trace,
            brace,
        })
    }

    /// Reduced weak-Einstein forms `2KF² − 3θF + (2F²/3)g^{ij}{…}` and the
    /// same minus `(2F/3)𝓡`, with `θ = θ_i yⁱ`.
    pub fn reduced_weak_einstein(&self, k: f64, theta: &[f64], r_avg: f64) -> Result<(f64, f64)> {
        if self.dim() != 4 {
            return Err(CoreError::DimensionMismatch { expected: 4, got: self.dim() });
        }
        let brace = self.field_brace()?.value();
        let f2 = self.f2()?.value();
        let f = self.frame.f()?.value();
        let th: f64 = theta.iter().zip(&self.frame.y).map(|(t, y)| t * y.value()).sum();
        let pw = 2.0 * k * f2 - 3.0 * th * f + 2.0 * f2 / 3.0 * brace;
        Ok((pw, pw - 2.0 * f / 3.0 * r_avg))
    }
}

/// `−2Ric + (2F²/3)(g^{ij}R_ij + brace)`.
pub fn pw_from_parts<S: Scalar>(ric: &S, trace: &S, brace: &S, f2: &S) -> S {
    let two_thirds = Rational::new(2.into(), 3.into());
    ric.scale_int(-2) + &((trace.clone() + brace) * f2).scale(&two_thirds)
}

#[derive(Clone, Debug)]
pub struct FieldResiduals<S> {
    pub pw: S,
    pub cs: f64,
    pub ric: S,
    pub ricci_trace: S,
    pub brace: S,
}

/// Plain-number summary of a numeric tower evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct RicSummary {
    pub ric: f64,
    pub f2: f64,
}

/// `g^{ij} h_ij` and `g^{ij} g_ij` at a point (3 and 4 in dimension 4).
pub fn trace_identities(spec: &MetricSpec, at: &EvalPoint) -> Result<(f64, f64)> {
    let t = crate::geometry::fundamental_tensors_numeric(spec, at)?;
    let n = spec.dimension;
    let mut th = 0.0;
    let mut tg = 0.0;
    for i in 0..n {
        for j in 0..n {
            th += t.g_inv[i][j].value() * t.h[i][j].value();
            tg += t.g_inv[i][j].value() * t.g[i][j].value();
        }
    }
    Ok((th, tg))
}

/// `Ric` on the numeric backend with the smallest sufficient jet orders.
pub fn ric_numeric(spec: &MetricSpec, at: &EvalPoint) -> Result<RicSummary> {
    let t = Tower::numeric(spec, at, 2)?;
    Ok(RicSummary {
        ric: t.ric()?.value(),
        f2: t.f2()?.value(),
    })
}

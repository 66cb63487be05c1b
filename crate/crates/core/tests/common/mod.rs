//! Oracles shared by the integration tests.
#![allow(dead_code)]

use kropina_core::spec::EvalPoint;

/// Ricci tensor of `e^{2φ}δ` on R³ with `φ = ln 2 − ln(1+|x|²)`, from the
/// conformal change formula `R_ij = −(∂_i∂_jφ − ∂_iφ∂_jφ) − (Δφ + |∇φ|²)δ_ij`.
pub fn conformal_ricci(x: &[f64]) -> [[f64; 3]; 3] {
    let s: f64 = x.iter().map(|v| v * v).sum();
    let d: Vec<f64> = x.iter().map(|v| -2.0 * v / (1.0 + s)).collect();
    let dd = |i: usize, j: usize| -2.0 * ((i == j) as u8 as f64) / (1.0 + s) + 4.0 * x[i] * x[j] / (1.0 + s).powi(2);
    let lap: f64 = (0..3).map(|i| dd(i, i)).sum();
    let grad2: f64 = d.iter().map(|v| v * v).sum();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = -(dd(i, j) - d[i] * d[j]) - if i == j { lap + grad2 } else { 0.0 };
        }
    }
    r
}

/// `−2Ric + (2F²/3)·scal` for the product with a line; no Landsberg term.
pub fn s3xr_tensor_oracle(at: &EvalPoint) -> f64 {
    let x = &at.xf[..3];
    let y = &at.yf;
    let s: f64 = x.iter().map(|v| v * v).sum();
    let conf = 4.0 / (1.0 + s).powi(2);
    let r = conformal_ricci(x);
    let ric: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| r[i][j] * y[i] * y[j]).sum();
    let scal: f64 = (0..3).map(|i| r[i][i] / conf).sum();
    let f2 = conf * y[..3].iter().map(|v| v * v).sum::<f64>() + y[3] * y[3];
    -2.0 * ric + 2.0 * f2 / 3.0 * scal
}

//! Equation residual and the ground eigenvalue of `−Δ + U_ψ`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::radial::{potential_u, RadialProfile};

use super::{tridiag, GroundState};

const EIGEN_TOL: f64 = 1e-8;
const EIGEN_MAX_ITER: usize = 10_000;

/// Residual of `−Δφ + U_φ φ = λφ` for a solved state.
pub fn residual_l2(state: &GroundState) -> f64 {
    profile_residual_l2(&state.profile, state.lambda)
}

/// `(2π∫ r·res² dr)^{1/2}` for `res = −(φ'' + φ'/r) + U_φ φ − λφ`, with
/// centered stencils at the nodes `2..=n−2`.
pub fn profile_residual_l2(phi: &RadialProfile, lambda: f64) -> f64 {
    let h = phi.h();
    let v = phi.values();
    let u = potential_u(phi);
    let n = phi.n();
    let sum: f64 = (2..=n - 2)
        .map(|i| {
            let r = phi.r(i);
            let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) + (v[i + 1] - v[i - 1]) / (2.0 * h * r);
            let res = -lap + (u.values()[i] - lambda) * v[i];
            r * res * res
        })
        .sum();
    (TAU * h * sum).sqrt()
}

/// Smallest eigenvalue of `−Δ + U_ψ` on `D_{R*}` with Dirichlet data.
pub fn ground_eigenvalue(psi: &RadialProfile) -> Result<f64> {
    let u = potential_u(psi);
    dirichlet_ground_eigenvalue(psi.radius(), u.values())
}

/// Smallest eigenvalue of `−(d²/dr² + (1/r)d/dr) + V` on `[0, radius)` with
/// `u(radius) = 0`, for `V` given at the `n + 1` uniform nodes. At the origin
/// the Laplacian is `2u''(0)`. Inverse iteration in the inner product
/// weighted by `(h/8, r_1, r_2, …)`, which makes the matrix symmetric.
pub fn dirichlet_ground_eigenvalue(radius: f64, potential: &[f64]) -> Result<f64> {
    let n = potential.len().saturating_sub(1);
    if n < crate::radial::MIN_INTERVALS || !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("need at least {} intervals", crate::radial::MIN_INTERVALS)));
    }
    let h = radius / n as f64;
    let h2 = h * h;
    let mut lower = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1];
    diag[0] = 4.0 / h2 + potential[0];
    upper[0] = -4.0 / h2;
    for i in 1..n {
        let r = i as f64 * h;
        diag[i] = 2.0 / h2 + potential[i];
        lower[i - 1] = -(r - 0.5 * h) / (h2 * r);
        if i + 1 < n {
            upper[i] = -(r + 0.5 * h) / (h2 * r);
        }
    }
    let weight: Vec<f64> = (0..n).map(|i| if i == 0 { h / 8.0 } else { i as f64 * h }).collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut y = diag[i] * x[i];
                if i > 0 {
                    y += lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&weight).map(|((x, y), w)| x * y * w).sum::<f64>();

    let mut x = vec![1.0; n];
    let mut mu = f64::NAN;
    for _ in 0..EIGEN_MAX_ITER {
        let mut y = tridiag::solve(&lower, &diag, &upper, &x);
        let norm = dot(&y, &y).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Eigen("inverse iteration produced a degenerate vector".into()));
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let next = dot(&y, &apply(&y));
        x = y;
        if (next - mu).abs() <= EIGEN_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        mu = next;
    }
    Err(Error::Eigen(format!("no convergence in {EIGEN_MAX_ITER} iterations")))
}

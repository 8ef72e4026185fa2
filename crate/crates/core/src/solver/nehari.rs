//! Minimization of `J(u) = A(u)²/Q(u)` over nonnegative radial grid
//! functions with `u(R) = 0`.
//!
//! `A` is discretized with face differences `Σ k_i (u_{i+1} − u_i)²` plus the
//! trapezoid mass, so its matrix `L` is tridiagonal and has no grid-scale
//! null mode. Stationarity of `J` at `A = 1` reads `L u = c u P / Q` with
//! `P = M − U_u`, and each step solves that with the right side frozen.

use std::f64::consts::TAU;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::radial::{lambda_of, log_moment, potential_u, RadialProfile};
use crate::variational::nehari_scale;

use super::{tridiag, GroundState, Method, SolverConfig};

const STALL_WINDOW: usize = 50;
const MIN_TAU: f64 = 1e-6;

struct Operator {
    /// Node weights `2πh ω_i r_i`.
    c: Vec<f64>,
    /// Face weights `2π r_{i+½}/h`.
    k: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Operator {
    fn new(radius: f64, n: usize) -> Self {
        let h = radius / n as f64;
        let c: Vec<f64> = (0..n).map(|i| TAU * h * i as f64 * h).collect();
        let k: Vec<f64> = (0..n).map(|i| TAU * (i as f64 + 0.5)).collect();
        let diag = (0..n).map(|i| c[i] + k[i] + if i > 0 { k[i - 1] } else { 0.0 }).collect();
        let off: Vec<f64> = k[..n - 1].iter().map(|v| -v).collect();
        Operator { c, k, lower: off.clone(), diag, upper: off }
    }

    /// `A(u)` over the free nodes `0..n`; the boundary node is 0.
    fn quadratic(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let mut s = 0.0;
        for i in 0..n {
            let next = if i + 1 < n { u[i + 1] } else { 0.0 };
            s += self.k[i] * (next - u[i]).powi(2) + self.c[i] * u[i] * u[i];
        }
        s
    }
}

fn to_profile(radius: f64, u: &[f64]) -> Result<RadialProfile> {
    let mut v = u.to_vec();
    v.push(0.0);
    RadialProfile::new(radius, v)
}

/// `Q(u)` and `c_i u_i P_i` for the free nodes.
fn coupling(op: &Operator, radius: f64, u: &[f64]) -> Result<(f64, Vec<f64>)> {
    let prof = to_profile(radius, u)?;
    let m = log_moment(&prof);
    let pot = potential_u(&prof);
    let force: Vec<f64> = (0..u.len()).map(|i| op.c[i] * u[i] * (m - pot.values()[i])).collect();
    let q = force.iter().zip(u).map(|(f, v)| f * v).sum();
    Ok((q, force))
}

fn normalize(op: &Operator, u: &mut [f64]) -> Result<()> {
    let a = op.quadratic(u);
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput("initial profile vanishes on the grid".into()));
    }
    let s = a.sqrt().recip();
    u.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

fn initial(radius: f64, init: Option<&RadialProfile>, n: usize) -> Result<Vec<f64>> {
    let h = radius / n as f64;
    let mut u: Vec<f64> = match init {
        Some(p) if p.n() == n && (p.radius() - radius).abs() <= 1e-12 * radius => p.values()[..n].to_vec(),
        Some(p) => {
            let scale = p.radius() / radius;
            (0..n).map(|i| p.at(i as f64 * h * scale)).collect::<Result<_>>()?
        }
        None => (0..n).map(|i| 1.0 - (i as f64 * h / radius).powi(2)).collect(),
    };
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial profile is not finite".into()));
    }
    u.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(u)
}

/// Ground state on `D_R` by descent on the Nehari quotient, projected onto
/// the Nehari manifold at the end. Without `init` the start is `1 − r²/R²`.
pub fn minimize_nehari(radius: f64, init: Option<&RadialProfile>, cfg: &SolverConfig) -> Result<GroundState> {
    cfg.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let n = cfg.n;
    let op = Operator::new(radius, n);
    let mut u = initial(radius, init, n)?;
    normalize(&op, &mut u)?;
    let (mut q, mut force) = coupling(&op, radius, &u)?;
    if !(q > 0.0) {
        return Err(Error::NoProjection(q));
    }
    let mut history = vec![1.0 / q];
    let mut tau = cfg.tau;

    for k in 1..=cfg.max_iter {
        let rhs: Vec<f64> = force.iter().map(|f| f / q).collect();
        let target = tridiag::solve(&op.lower, &op.diag, &op.upper, &rhs);
        let j_old = *history.last().unwrap();
        loop {
            let mut next: Vec<f64> = u.iter().zip(&target).map(|(a, b)| ((1.0 - tau) * a + tau * b).max(0.0)).collect();
            normalize(&op, &mut next)?;
            let (q_next, f_next) = coupling(&op, radius, &next)?;
            let j_next = 1.0 / q_next;
            if q_next > 0.0 && j_next <= j_old * (1.0 + 4.0 * f64::EPSILON) {
                u = next;
                q = q_next;
                force = f_next;
                history.push(j_next);
                break;
            }
            tau *= 0.5;
            if tau < MIN_TAU {
                // no descent left at any step size
                history.push(j_old);
                break;
            }
        }
        let window = k.min(STALL_WINDOW);
        let j = history[k];
        if history[k - window] - j <= cfg.root_tol * j {
            debug!("quotient descent on R = {radius}: stalled after {k} steps, J = {j}");
            return project(radius, &u, k);
        }
    }
    let best = project(radius, &u, cfg.max_iter)?;
    Err(Error::IterationLimit { iterations: cfg.max_iter, best: Box::new(best.profile) })
}

fn project(radius: f64, u: &[f64], iterations: usize) -> Result<GroundState> {
    let prof = to_profile(radius, u)?;
    let t = nehari_scale(&prof)?;
    let phi = prof.scaled(t);
    let lambda = lambda_of(&phi);
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("minimizer has λ = {lambda}")));
    }
    GroundState::assemble(phi, lambda.sqrt() * radius, lambda, Method::Nehari, iterations)
}

/// Seeded positive start: a few Gaussian bumps centred in the inner half,
/// with mild multiplicative noise, times `1 − r²/R²`.
pub fn random_init(radius: f64, n: usize, seed: u64) -> Result<RadialProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| (rng.gen_range(0.0..0.5) * radius, rng.gen_range(0.1..0.5) * radius, rng.gen_range(0.5..1.5)))
        .collect();
    let h = radius / n as f64;
    let values = (0..=n)
        .map(|i| {
            let r = i as f64 * h;
            let g: f64 = bumps.iter().map(|(c, s, w)| w * (-((r - c) / s).powi(2)).exp()).sum();
            let noise = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
            g * noise * (1.0 - (r / radius).powi(2))
        })
        .collect();
    RadialProfile::new(radius, values)
}

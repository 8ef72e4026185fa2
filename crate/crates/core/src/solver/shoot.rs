//! Outward integration of the normalized radial equation
//! `ψ'' + ψ'/r = (U − 1)ψ, ψ(0) = a, ψ'(0) = 0`.
//!
//! The state is `(ψ, p = ψ', V, W)` with `V' = 2πrψ²`, `W' = 2πr ln(r) ψ²`
//! and `U = ln(r)V − W`, so the nonlocal term needs no look-back.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::radial::RadialProfile;

use super::SolverConfig;

/// `|ψ|` beyond this multiple of `max(a, 1)` counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// The full equation with `U_ψ`.
    Nonlocal,
    /// `U ≡ 0`, leaving Bessel's equation of order zero.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub amplitude: f64,
    pub first_zero: Option<f64>,
    /// The trajectory on `[0, first_zero]`, resampled to `cfg.n` intervals.
    pub trajectory: Option<RadialProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sample {
    pub r: f64,
    pub phi: f64,
    pub p: f64,
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PathEnd {
    Zero,
    /// `ψ > 0`, `ψ' > 0` and `U > 1`: `(rψ')' = r(U − 1)ψ > 0` from here on
    /// and `U` never decreases, so no zero can follow.
    TurnedUp,
    RangeEnd,
}

#[derive(Debug, Clone)]
pub(crate) struct Path {
    pub amplitude: f64,
    pub samples: Vec<Sample>,
    pub first_zero: Option<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub end: PathEnd,
}

#[inline]
fn potential(r: f64, v: f64, w: f64, coupling: Coupling) -> f64 {
    match coupling {
        Coupling::Nonlocal => r.ln() * v - w,
        Coupling::Linear => 0.0,
    }
}

#[inline]
fn rhs(r: f64, ln_r: f64, y: [f64; 4], coupling: Coupling) -> [f64; 4] {
    let [phi, p, v, w] = y;
    let u = match coupling {
        Coupling::Nonlocal => ln_r * v - w,
        Coupling::Linear => 0.0,
    };
    let f = TAU * r * phi * phi;
    [p, -p / r + (u - 1.0) * phi, f, f * ln_r]
}

#[inline]
fn rk4_step(r: f64, y: [f64; 4], h: f64, coupling: Coupling) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
    let (rm, re) = (r + 0.5 * h, r + h);
    let (lm, le) = (rm.ln(), re.ln());
    let k1 = rhs(r, r.ln(), y, coupling);
    let k2 = rhs(rm, lm, add(y, k1, 0.5 * h), coupling);
    let k3 = rhs(rm, lm, add(y, k2, 0.5 * h), coupling);
    let k4 = rhs(re, le, add(y, k3, h), coupling);
    let mut out = y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Series data at `r0` from the regular expansion `ψ = a(1 − r²/4) + O(r⁴)`.
fn series_start(a: f64, r0: f64) -> Sample {
    let r2 = r0 * r0;
    Sample {
        r: r0,
        phi: a * (1.0 - r2 / 4.0),
        p: -a * r0 / 2.0,
        v: PI * a * a * r2,
        w: TAU * a * a * (0.5 * r2 * r0.ln() - 0.25 * r2),
    }
}

/// Cubic Hermite interpolation of `(ψ, ψ')` between two samples.
pub(crate) fn hermite(r0: f64, f0: f64, d0: f64, r1: f64, f1: f64, d1: f64, r: f64) -> (f64, f64) {
    let dr = r1 - r0;
    let t = (r - r0) / dr;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * f0 + h10 * dr * d0 + h01 * f1 + h11 * dr * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let slope = (dh00 * f0 + dh01 * f1) / dr + dh10 * d0 + dh11 * d1;
    (value, slope)
}

/// Zero of `ψ` between two samples with `s0.phi > 0 ≥ s1.phi`: linear
/// estimate, polished by Newton on the Hermite cubic.
fn locate_zero(s0: &Sample, s1: &Sample) -> f64 {
    let linear = s0.r + s0.phi * (s1.r - s0.r) / (s0.phi - s1.phi);
    let mut z = linear;
    for _ in 0..6 {
        let (f, df) = hermite(s0.r, s0.phi, s0.p, s1.r, s1.phi, s1.p, z);
        if df == 0.0 {
            break;
        }
        let next = z - f / df;
        if !(next >= s0.r && next <= s1.r) {
            return linear;
        }
        let done = (next - z).abs() <= 1e-15 * z;
        z = next;
        if done {
            break;
        }
    }
    z
}

pub(crate) fn integrate(a: f64, r_max: f64, cfg: &SolverConfig, coupling: Coupling) -> Result<Path> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!("amplitude must be positive, got {a}")));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
    }
    let r0 = cfg.eps * r_max;
    let limit = DIVERGENCE_FACTOR * a.max(1.0);
    let mut samples = Vec::with_capacity(((r_max - r0) / cfg.h0) as usize + 2);
    let mut cur = series_start(a, r0);
    samples.push(cur);
    loop {
        if cur.r >= r_max {
            return Ok(Path { amplitude: a, samples, first_zero: None, end: PathEnd::RangeEnd });
        }
        let h = cfg.h0.min(r_max - cur.r);
        let y = rk4_step(cur.r, [cur.phi, cur.p, cur.v, cur.w], h, coupling);
        let r = if r_max - cur.r <= cfg.h0 { r_max } else { cur.r + h };
        let next = Sample { r, phi: y[0], p: y[1], v: y[2], w: y[3] };
        if !y.iter().all(|v| v.is_finite()) || next.phi.abs() > limit {
            return Err(Error::Divergence { amplitude: a, radius: next.r });
        }
        samples.push(next);
        if next.phi <= 0.0 {
            let z = locate_zero(&cur, &next);
            return Ok(Path { amplitude: a, samples, first_zero: Some(z), end: PathEnd::Zero });
        }
        if coupling == Coupling::Nonlocal && next.p > 0.0 && potential(next.r, next.v, next.w, coupling) > 1.0 {
            return Ok(Path { amplitude: a, samples, first_zero: None, end: PathEnd::TurnedUp });
        }
        cur = next;
    }
}

/// A trajectory point `(r, ψ, ψ', ψ'')`.
pub(crate) type Knot = (f64, f64, f64, f64);

/// Quintic Hermite interpolation of value, slope and curvature.
pub(crate) fn quintic(k0: Knot, k1: Knot, r: f64) -> f64 {
    let dr = k1.0 - k0.0;
    let t = (r - k0.0) / dr;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    h0 * k0.1 + h1 * dr * k0.2 + h2 * dr * dr * k0.3 + h3 * k1.1 + h4 * dr * k1.2 + h5 * dr * dr * k1.3
}

/// `ψ''` from the equation itself.
pub(crate) fn curvature(r: f64, phi: f64, p: f64, u: f64) -> f64 {
    -p / r + (u - 1.0) * phi
}

/// Knots resampled at `r_i = i·r_end/n`. Nodes inside the series start use
/// the expansion. The last node is set to exactly 0.
pub(crate) fn resample(amplitude: f64, knots: &[Knot], r_end: f64, n: usize) -> Vec<f64> {
    let h = r_end / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut k = 0;
    for i in 0..=n {
        let r = i as f64 * h;
        if r <= knots[0].0 {
            out.push(amplitude * (1.0 - r * r / 4.0));
            continue;
        }
        while k + 2 < knots.len() && knots[k + 1].0 < r {
            k += 1;
        }
        out.push(quintic(knots[k], knots[k + 1], r));
    }
    out[n] = 0.0;
    out
}

impl Path {
    pub(crate) fn knots(&self, coupling: Coupling) -> Vec<Knot> {
        self.samples
            .iter()
            .map(|s| (s.r, s.phi, s.p, curvature(s.r, s.phi, s.p, potential(s.r, s.v, s.w, coupling))))
            .collect()
    }
}

/// Integrates the normalized equation outward from `ψ(0) = a`, stopping at
/// the first sign change of `ψ` or at `r_max`.
pub fn shoot(a: f64, r_max: f64, cfg: &SolverConfig) -> Result<ShootResult> {
    shoot_with(a, r_max, cfg, Coupling::Nonlocal)
}

pub fn shoot_with(a: f64, r_max: f64, cfg: &SolverConfig, coupling: Coupling) -> Result<ShootResult> {
    let path = integrate(a, r_max, cfg, coupling)?;
    let trajectory = match path.first_zero {
        Some(z) => Some(RadialProfile::new(z, resample(a, &path.knots(coupling), z, cfg.n))?),
        None => None,
    };
    Ok(ShootResult { amplitude: a, first_zero: path.first_zero, trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::BESSEL_J0_FIRST_ZERO;

    fn cfg(h0: f64) -> SolverConfig {
        SolverConfig { h0, ..SolverConfig::default() }
    }

    #[test]
    fn linear_mode_hits_bessel_zero() {
        let c = cfg(1e-4);
        let zeros: Vec<f64> = [1e-3, 1.0, 1e3]
            .iter()
            .map(|&a| shoot_with(a, 5.0, &c, Coupling::Linear).unwrap().first_zero.unwrap())
            .collect();
        let spread = zeros.iter().fold(0.0f64, |m, z| m.max((z - zeros[0]).abs()));
        assert!(spread <= 1e-6, "{zeros:?}");
        assert!((zeros[0] - BESSEL_J0_FIRST_ZERO).abs() <= 1e-5, "{zeros:?}");
    }

    #[test]
    fn tiny_amplitude_approaches_bessel_zero() {
        let z = shoot(1e-6, 5.0, &cfg(1e-4)).unwrap().first_zero.unwrap();
        assert!((z - BESSEL_J0_FIRST_ZERO).abs() < 1e-3);
    }

    #[test]
    fn trajectory_positive_before_zero() {
        let res = shoot(0.4, 20.0, &SolverConfig::default()).unwrap();
        let z = res.first_zero.unwrap();
        let traj = res.trajectory.unwrap();
        assert_eq!(traj.radius(), z);
        assert!((traj.amplitude() - 0.4).abs() < 1e-12);
        let n = traj.n();
        assert!(traj.values()[..n].iter().all(|&v| v > 0.0));
        assert_eq!(traj.values()[n], 0.0);
        // linear interpolation of the last two nodes vanishes within a cell
        assert!(traj.values()[n - 1] < traj.values()[n - 2]);
    }

    #[test]
    fn large_amplitude_never_crosses() {
        // beyond the critical amplitude the trajectory turns upward
        let res = shoot(0.5, 50.0, &SolverConfig::default()).unwrap();
        assert!(res.first_zero.is_none() && res.trajectory.is_none());
        let path = integrate(0.5, 50.0, &SolverConfig::default(), Coupling::Nonlocal).unwrap();
        assert_eq!(path.end, PathEnd::TurnedUp);
    }

    #[test]
    fn rejects_bad_amplitude() {
        let c = SolverConfig::default();
        assert!(matches!(shoot(0.0, 5.0, &c), Err(Error::InvalidInput(_))));
        assert!(matches!(shoot(-1.0, 5.0, &c), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn quintic_reproduces_quintics() {
        let f = |r: f64| 1.0 + r - 2.0 * r.powi(2) + 0.3 * r.powi(3) - r.powi(4) + 0.7 * r.powi(5);
        let df = |r: f64| 1.0 - 4.0 * r + 0.9 * r.powi(2) - 4.0 * r.powi(3) + 3.5 * r.powi(4);
        let d2f = |r: f64| -4.0 + 1.8 * r - 12.0 * r.powi(2) + 14.0 * r.powi(3);
        let knot = |r: f64| (r, f(r), df(r), d2f(r));
        for r in [0.21, 0.4, 0.77] {
            assert!((quintic(knot(0.2), knot(0.8), r) - f(r)).abs() < 1e-13);
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |r: f64| 2.0 - r + 0.5 * r * r - 0.25 * r * r * r;
        let df = |r: f64| -1.0 + r - 0.75 * r * r;
        let (v, d) = hermite(0.3, f(0.3), df(0.3), 0.9, f(0.9), df(0.9), 0.55);
        assert!((v - f(0.55)).abs() < 1e-14);
        assert!((d - df(0.55)).abs() < 1e-13);
    }
}

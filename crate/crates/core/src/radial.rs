//! Radial profiles and the one-dimensional form of the nonlocal term.
//!
//! For a radial `φ` on `D_R` the circle average of `ln 1/|x − y|` collapses
//! to `min{ln 1/|x|, ln 1/|y|}`, so the kernel convolution splits into a
//! Volterra piece and a constant:
//!
//! ```text
//! ∫ G(x, y) φ(y)² dy = −U_φ(|x|) + M(φ)
//! U_φ(r) = 2π ∫_0^r s ln(r/s) φ(s)² ds
//! M(φ)   = 2π ∫_0^R s ln(R/s) φ(s)² ds
//! ```
//!
//! All integrals use the trapezoid rule on the profile's uniform grid.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of grid intervals.
pub const MIN_INTERVALS: usize = 16;

/// Radial function sampled at `r_i = i·R/n`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    radius: f64,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radius: f64, values: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        if values.len() < MIN_INTERVALS + 1 {
            return Err(Error::InvalidInput(format!(
                "need at least {} grid intervals, got {}",
                MIN_INTERVALS,
                values.len().saturating_sub(1)
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at node {i}")));
        }
        Ok(RadialProfile { radius, values })
    }

    pub fn from_fn(radius: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = radius / n as f64;
        Self::new(radius, (0..=n).map(|i| f(i as f64 * h)).collect())
    }

    pub fn zeros(radius: f64, n: usize) -> Result<Self> {
        Self::new(radius, vec![0.0; n + 1])
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of grid intervals.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.radius / self.n() as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.h();
        (0..=self.n()).map(move |i| i as f64 * h)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn amplitude(&self) -> f64 {
        self.values[0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialProfile { radius: self.radius, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Linear interpolation; `r` must lie in `[0, R]`.
    pub fn at(&self, r: f64) -> Result<f64> {
        interpolate(&self.values, self.radius, r)
    }

    /// `max_i |φ_i − ψ_i|` for profiles on the same grid. Radii may differ by
    /// a relative `1e-6`, in which case nodes are matched by index.
    pub fn uniform_distance(&self, other: &RadialProfile) -> Result<f64> {
        if self.n() != other.n() || (self.radius - other.radius).abs() > 1e-6 * self.radius {
            return Err(Error::InvalidInput("profiles live on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Whether `φ_{i+1} ≤ φ_i + slack` along the grid.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Inner potential `U_φ` on the grid of its profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    radius: f64,
    values: Vec<f64>,
}

impl PotentialProfile {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, r: f64) -> Result<f64> {
        interpolate(&self.values, self.radius, r)
    }
}

fn interpolate(values: &[f64], radius: f64, r: f64) -> Result<f64> {
    if !(0.0..=radius).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, {radius}]")));
    }
    let n = values.len() - 1;
    let t = r / radius * n as f64;
    let i = (t.floor() as usize).min(n - 1);
    let w = t - i as f64;
    Ok(values[i] * (1.0 - w) + values[i + 1] * w)
}

/// Trapezoid rule on a uniform grid with spacing `h`.
pub fn trapezoid(h: f64, f: &[f64]) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        len => h * (0.5 * (f[0] + f[len - 1]) + f[1..len - 1].iter().sum::<f64>()),
    }
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(h: f64, f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Circle average `(1/2π)∫_{S¹} ln 1/|rz − x|` for `|x| = rho`, in closed
/// form `min{ln 1/r, ln 1/ρ}`.
pub fn circle_average_log(r: f64, rho: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("circle radius must be positive, got {r}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("|x| must be nonnegative, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(-r.ln());
    }
    Ok((-r.ln()).min(-rho.ln()))
}

/// Periodic trapezoid rule for the same circle average with `m` equally
/// spaced angles, offset by half a step so that `r = ρ` never samples the
/// singular point.
pub fn circle_average_log_quad(r: f64, rho: f64, m: usize) -> Result<f64> {
    if m < 16 {
        return Err(Error::InvalidInput(format!("need at least 16 samples, got {m}")));
    }
    if !(r > 0.0) || !(rho >= 0.0) {
        return Err(Error::Domain(format!("bad circle data r = {r}, rho = {rho}")));
    }
    let dr = r - rho;
    let four_r_rho = 4.0 * r * rho;
    let step = TAU / m as f64;
    let sum: f64 = (0..m)
        .map(|k| {
            let half = 0.5 * (k as f64 + 0.5) * step;
            let s = half.sin();
            // |rz − x|² = (r − ρ)² + 4rρ sin²(θ/2)
            -0.5 * (dr * dr + four_r_rho * s * s).ln()
        })
        .sum();
    Ok(sum / m as f64)
}

/// `V(r) = 2π∫_0^r s φ² ds` at every node.
pub fn cumulative_mass(phi: &RadialProfile) -> Vec<f64> {
    let f: Vec<f64> = phi.nodes().zip(phi.values()).map(|(s, v)| TAU * s * v * v).collect();
    cumulative_trapezoid(phi.h(), &f)
}

/// `∫_{D_R} φ² dx`.
pub fn mass(phi: &RadialProfile) -> f64 {
    *cumulative_mass(phi).last().unwrap()
}

/// `U_φ(r_i) = ln(r_i) V(r_i) − W(r_i)` with
/// `V = 2π∫_0^r s φ²`, `W = 2π∫_0^r s ln(s) φ²`, both by cumulative
/// trapezoid.
///
/// Under the trapezoid rule the two pieces combine into the increment
/// `U_{i+1} − U_i = ln(r_{i+1}/r_i)·(V_i + ½h·2π r_i φ_i²) ≥ 0`, which is
/// what gets summed; this avoids the cancellation in `ln(r)V − W`.
pub fn potential_u(phi: &RadialProfile) -> PotentialProfile {
    let h = phi.h();
    let v = cumulative_mass(phi);
    let n = phi.n();
    let mut values = vec![0.0; n + 1];
    // U_1 = ln(h)·½h f_1 − ½h f_1 ln(h) = 0
    for i in 1..n {
        let ri = phi.r(i);
        let fi = TAU * ri * phi.values()[i].powi(2);
        values[i + 1] = values[i] + ((i + 1) as f64 / i as f64).ln() * (v[i] + 0.5 * h * fi);
    }
    PotentialProfile { radius: phi.radius(), values }
}

/// `M(φ) = 2π∫_0^R s ln(R/s) φ² ds`.
pub fn log_moment(phi: &RadialProfile) -> f64 {
    let radius = phi.radius();
    let f: Vec<f64> = phi
        .nodes()
        .zip(phi.values())
        .map(|(s, p)| if s > 0.0 { TAU * s * (radius / s).ln() * p * p } else { 0.0 })
        .collect();
    trapezoid(phi.h(), &f)
}

/// `λ(φ) = M(φ) − 1`.
pub fn lambda_of(phi: &RadialProfile) -> f64 {
    log_moment(phi) - 1.0
}

/// `∫_{D_R} G(x, y) φ(y)² dy` at `|x| = r`.
pub fn convolved_potential(phi: &RadialProfile, r: f64) -> Result<f64> {
    let u = potential_u(phi);
    Ok(log_moment(phi) - u.at(r)?)
}

/// `Q(φ) = ∬ G(x, y) φ(x)² φ(y)² dx dy` through the radial reduction.
pub fn radial_double_energy(phi: &RadialProfile) -> f64 {
    let u = potential_u(phi);
    let m = log_moment(phi);
    let f: Vec<f64> =
        phi.nodes().zip(phi.values().iter().zip(u.values())).map(|(s, (p, ui))| TAU * s * p * p * (m - ui)).collect();
    trapezoid(phi.h(), &f)
}

/// `∬ ln(1/|x − y|) φ(x)² φ(y)² dx dy` for radial `φ` supported in `D_R`.
///
/// The image part of `G` integrates to `ln(1/R)` against any radial density,
/// so this is `Q(φ) − ln(R)·(∫φ²)²`.
pub fn log_double_energy(phi: &RadialProfile) -> f64 {
    let m = mass(phi);
    radial_double_energy(phi) - phi.radius().ln() * m * m
}

//! Amplitude search for the normalized problem on `D_{R*}`.

use std::f64::consts::TAU;

use log::{debug, info};

use crate::error::{Error, Result};
use crate::radial::RadialProfile;

use super::shoot::{curvature, hermite, integrate, resample, Coupling, Knot, Path};
use super::SolverConfig;

const SCAN_MIN: f64 = 1e-4;
const SCAN_MAX: f64 = 1e2;
const SCAN_PER_DECADE: usize = 10;
const MAX_BISECTIONS: usize = 200;

/// Inner shooting data is trusted while `ψ` stays above this fraction of `a`.
const TAIL_FLOOR: f64 = 1e-3;
/// ...and while the two bracketing paths agree to this fraction of `a`.
const TAIL_SPLIT: f64 = 1e-9;
const TAIL_PASSES: usize = 6;

#[derive(Debug, Clone)]
pub(crate) struct Normalized {
    pub profile: RadialProfile,
    pub amplitude: f64,
    /// Shooting evaluations spent on scan and bisection.
    pub shots: usize,
    /// The tail was rebuilt by inward integration.
    pub patched: bool,
}

/// Signed miss `first_zero − R*`; no zero counts as overshooting.
fn miss(path: &Path, r_star: f64) -> f64 {
    match path.first_zero {
        Some(z) => z - r_star,
        None => f64::INFINITY,
    }
}

fn shot(a: f64, r_max: f64, cfg: &SolverConfig) -> Result<Option<Path>> {
    match integrate(a, r_max, cfg, Coupling::Nonlocal) {
        Ok(p) => Ok(Some(p)),
        Err(Error::Divergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn signed(path: &Option<Path>, r_star: f64) -> f64 {
    path.as_ref().map_or(f64::INFINITY, |p| miss(p, r_star))
}

/// Solves `−Δψ + U_ψ ψ = ψ` on `D_{R*}` with `ψ = 0` on the boundary.
pub fn solve_normalized(r_star: f64, cfg: &SolverConfig) -> Result<RadialProfile> {
    Ok(solve_normalized_full(r_star, cfg)?.profile)
}

pub(crate) fn solve_normalized_full(r_star: f64, cfg: &SolverConfig) -> Result<Normalized> {
    cfg.validate()?;
    if !(r_star > 0.0 && r_star.is_finite()) {
        return Err(Error::InvalidInput(format!("R* must be positive, got {r_star}")));
    }
    let r_max = r_star + 2.0 * cfg.h0;
    let decades = (SCAN_MAX / SCAN_MIN).log10();
    let count = (decades * SCAN_PER_DECADE as f64).round() as usize;
    let grid: Vec<f64> = (0..=count).map(|k| SCAN_MIN * 10f64.powf(k as f64 / SCAN_PER_DECADE as f64)).collect();

    let mut shots = 0;
    let mut signs = Vec::with_capacity(grid.len());
    for &a in &grid {
        let p = shot(a, r_max, cfg)?;
        shots += 1;
        signs.push(signed(&p, r_star));
    }
    let changes: Vec<usize> = (0..grid.len() - 1).filter(|&k| (signs[k] < 0.0) != (signs[k + 1] < 0.0)).collect();
    let Some(&k0) = changes.first() else {
        return Err(Error::NoSolutionInRange { target: r_star, a_min: SCAN_MIN, a_max: SCAN_MAX });
    };
    if changes.len() > 1 {
        info!(
            "R* = {r_star}: {} amplitude brackets found, using the smallest ({}..{})",
            changes.len(),
            grid[k0],
            grid[k0 + 1]
        );
    }

    // keep `under` on the side that crosses before R*
    let (mut under, mut over) = if signs[k0] < 0.0 { (grid[k0], grid[k0 + 1]) } else { (grid[k0 + 1], grid[k0]) };
    let mut under_path = shot(under, r_max, cfg)?;
    let mut over_path = shot(over, r_max, cfg)?;
    shots += 2;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (under + over);
        if mid == under || mid == over {
            break;
        }
        let path = shot(mid, r_max, cfg)?;
        shots += 1;
        let m = signed(&path, r_star);
        if m.abs() <= cfg.root_tol * r_star {
            let path = path.expect("finite miss implies a path");
            let values = resample(mid, &path.knots(Coupling::Nonlocal), r_star, cfg.n);
            return Ok(Normalized {
                profile: RadialProfile::new(r_star, values)?,
                amplitude: mid,
                shots,
                patched: false,
            });
        }
        if m < 0.0 {
            under = mid;
            under_path = path;
        } else {
            over = mid;
            over_path = path;
        }
    }

    // The amplitude bracket has collapsed to adjacent floats before the
    // zero reached R*: the tail is too sensitive for forward shooting.
    let under_path = under_path.expect("undershooting path has a zero");
    let points = tail_patch(&under_path, over_path.as_ref(), r_star, cfg)?;
    let values = resample(under, &points, r_star, cfg.n);
    Ok(Normalized { profile: RadialProfile::new(r_star, values)?, amplitude: under, shots, patched: true })
}

/// Joins the trusted inner part of `inner` to an inward integration from
/// `(ψ, ψ') = (0, −1)` at `R*`, scaled to match values at the junction.
/// The tail's own contribution to `U` is iterated to self-consistency.
fn tail_patch(inner: &Path, other: Option<&Path>, r_star: f64, cfg: &SolverConfig) -> Result<Vec<Knot>> {
    let a = inner.amplitude;
    let s = &inner.samples;
    let mut km = 0;
    while km + 1 < s.len() {
        let next = &s[km + 1];
        if next.phi <= TAIL_FLOOR * a || next.r >= r_star - 4.0 * cfg.h0 {
            break;
        }
        if let Some(o) = other {
            match o.samples.get(km + 1) {
                Some(q) if (q.phi - next.phi).abs() <= TAIL_SPLIT * a => {}
                _ => break,
            }
        }
        km += 1;
    }
    if km == 0 {
        return Err(Error::NoSolutionInRange { target: r_star, a_min: a, a_max: a });
    }
    let m = s[km];
    let steps = ((r_star - m.r) / cfg.h0).ceil().max(4.0) as usize;
    let ht = (r_star - m.r) / steps as f64;
    let half: Vec<f64> = (0..=2 * steps).map(|j| m.r + 0.5 * j as f64 * ht).collect();
    let ln_half: Vec<f64> = half.iter().map(|r| r.ln()).collect();
    let mut u: Vec<f64> = ln_half.iter().map(|l| l * m.v - m.w).collect();

    let mut phi = vec![0.0; steps + 1];
    let mut dphi = vec![0.0; steps + 1];
    let mut last_scale = f64::NAN;
    for pass in 0..TAIL_PASSES {
        inward(&half, &u, ht, &mut phi, &mut dphi);
        let scale = m.phi / phi[0];
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::NoSolutionInRange { target: r_star, a_min: a, a_max: a });
        }
        for (f, d) in phi.iter_mut().zip(dphi.iter_mut()) {
            *f *= scale;
            *d *= scale;
        }
        // densities on the half grid, midpoints from the Hermite cubic
        let dens: Vec<f64> = (0..=2 * steps)
            .map(|j| {
                let v = if j % 2 == 0 {
                    phi[j / 2]
                } else {
                    let k = j / 2;
                    hermite(half[2 * k], phi[k], dphi[k], half[2 * k + 2], phi[k + 1], dphi[k + 1], half[j]).0
                };
                TAU * half[j] * v * v
            })
            .collect();
        let (mut v, mut w) = (m.v, m.w);
        u[0] = ln_half[0] * v - w;
        let dh = 0.5 * ht;
        for j in 1..=2 * steps {
            v += 0.5 * dh * (dens[j - 1] + dens[j]);
            w += 0.5 * dh * (dens[j - 1] * ln_half[j - 1] + dens[j] * ln_half[j]);
            u[j] = ln_half[j] * v - w;
        }
        let settled = pass > 0 && (scale / last_scale - 1.0).abs() <= 1e-13;
        last_scale = scale;
        if settled {
            break;
        }
    }
    debug!(
        "R* = {r_star}: tail rebuilt from r = {:.4}, slope mismatch {:.3e}",
        m.r,
        (dphi[0] - m.p) / m.p.abs().max(f64::MIN_POSITIVE)
    );

    let mut points = inner.knots(Coupling::Nonlocal);
    points.truncate(km + 1);
    for k in 1..=steps {
        let r = half[2 * k];
        points.push((r, phi[k], dphi[k], curvature(r, phi[k], dphi[k], u[2 * k])));
    }
    Ok(points)
}

/// RK4 for `ψ'' = −ψ'/r + (U − 1)ψ` from the outer end inward.
/// `u` lives on the half-step grid `half`.
fn inward(half: &[f64], u: &[f64], ht: f64, phi: &mut [f64], dphi: &mut [f64]) {
    let steps = phi.len() - 1;
    let f = |j: usize, y: [f64; 2]| [y[1], -y[1] / half[j] + (u[j] - 1.0) * y[0]];
    let mut y = [0.0, -1.0];
    phi[steps] = y[0];
    dphi[steps] = y[1];
    let h = -ht;
    for k in (1..=steps).rev() {
        let (j0, jm, j1) = (2 * k, 2 * k - 1, 2 * k - 2);
        let k1 = f(j0, y);
        let k2 = f(jm, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f(jm, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f(j1, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        if y[0].abs() > 1e150 {
            let s = 1.0 / y[0].abs();
            y = [y[0] * s, y[1] * s];
            for i in k..=steps {
                phi[i] *= s;
                dphi[i] *= s;
            }
        }
        phi[k - 1] = y[0];
        dphi[k - 1] = y[1];
    }
}

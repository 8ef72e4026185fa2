//! Energy functional, Nehari projection, and symmetric decreasing
//! rearrangement on 2D grids.
//!
//! For `u ≠ 0` the ray `t ↦ I_R(tu)` with
//! `I_R(u) = ½‖u‖² − ¼Q(u)` peaks at `t_u = (‖u‖²/Q(u))^{1/2}`, where
//! `I_R(t_u u) = ‖u‖⁴ / (4Q(u))`. The infimum of that quotient is the
//! ground-state level `c_R`.

use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{double_energy_2d, DiscGrid2D};
use crate::radial::{radial_double_energy, trapezoid, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub h1_sq: f64,
    pub quadratic_q: f64,
    pub energy: f64,
    pub nehari_t: Option<f64>,
    pub nehari_energy: Option<f64>,
}

impl EnergyReport {
    fn from_parts(h1_sq: f64, quadratic_q: f64) -> Self {
        let projectable = quadratic_q > 0.0;
        EnergyReport {
            h1_sq,
            quadratic_q,
            energy: 0.5 * h1_sq - 0.25 * quadratic_q,
            nehari_t: projectable.then(|| (h1_sq / quadratic_q).sqrt()),
            nehari_energy: projectable.then(|| h1_sq * h1_sq / (4.0 * quadratic_q)),
        }
    }

    /// `I_R(tφ) = ½t²‖φ‖² − ¼t⁴Q(φ)`.
    pub fn energy_along_ray(&self, t: f64) -> f64 {
        0.5 * t * t * self.h1_sq - 0.25 * t.powi(4) * self.quadratic_q
    }
}

/// Nodal derivative: centered in the interior, second-order one-sided at
/// both ends.
pub fn nodal_derivative(phi: &RadialProfile) -> Vec<f64> {
    let v = phi.values();
    let n = phi.n();
    let inv = 1.0 / (2.0 * phi.h());
    let mut d = Vec::with_capacity(n + 1);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv);
    d.extend((1..n).map(|i| (v[i + 1] - v[i - 1]) * inv));
    d.push((3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) * inv);
    d
}

/// `‖φ‖² = 2π∫_0^R s(φ'² + φ²) ds`.
pub fn h1_norm_sq(phi: &RadialProfile) -> f64 {
    let d = nodal_derivative(phi);
    let f: Vec<f64> =
        phi.nodes().zip(d.iter().zip(phi.values())).map(|(s, (dp, p))| TAU * s * (dp * dp + p * p)).collect();
    trapezoid(phi.h(), &f)
}

pub fn energy(phi: &RadialProfile) -> EnergyReport {
    EnergyReport::from_parts(h1_norm_sq(phi), radial_double_energy(phi))
}

/// `‖φ‖⁴ / (4Q(φ))`, absent when `Q ≤ 0`.
pub fn nehari_energy(phi: &RadialProfile) -> Option<f64> {
    energy(phi).nehari_energy
}

/// Scale `t` with `tφ` on the Nehari manifold.
pub fn nehari_scale(phi: &RadialProfile) -> Result<f64> {
    let report = energy(phi);
    report.nehari_t.ok_or(Error::NoProjection(report.quadratic_q))
}

/// Symmetric decreasing rearrangement on the cell grid: the cell values,
/// sorted in decreasing order, are laid out on the cells sorted by distance
/// from the origin (ties by `(i, j)`).
pub fn rearrange_2d(u: &DiscGrid2D) -> Result<DiscGrid2D> {
    if let Some(c) = u.cells().iter().find(|c| c.value < 0.0) {
        return Err(Error::Domain(format!(
            "rearrangement needs nonnegative values, cell ({}, {}) has {}",
            c.i, c.j, c.value
        )));
    }
    let mut by_distance: Vec<usize> = (0..u.len()).collect();
    by_distance.sort_by(|&a, &b| {
        let (ca, cb) = (&u.cells()[a], &u.cells()[b]);
        u.center(ca).norm_sq().total_cmp(&u.center(cb).norm_sq()).then((ca.i, ca.j).cmp(&(cb.i, cb.j)))
    });
    let mut sorted: Vec<f64> = u.values().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; u.len()];
    for (&slot, value) in by_distance.iter().zip(sorted) {
        values[slot] = value;
    }
    u.with_values(values)
}

/// Discrete `∫|∇u|² + u²` on the cell grid. Differences are taken across
/// cell faces, with zero outside the stored cells.
pub fn grid_h1_norm_sq(u: &DiscGrid2D) -> f64 {
    let lookup: HashMap<(i32, i32), f64> = u.cells().iter().map(|c| ((c.i, c.j), c.value)).collect();
    let mut grad = 0.0;
    for c in u.cells() {
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            match lookup.get(&(c.i + di, c.j + dj)) {
                // interior faces are visited from both sides
                Some(&v) => grad += 0.5 * (c.value - v).powi(2),
                None => grad += c.value * c.value,
            }
        }
    }
    grad + u.power_sum(2)
}

/// Nehari quotient `‖u‖⁴ / (4Q(u))` on a 2D grid.
pub fn grid_nehari_energy(u: &DiscGrid2D) -> Result<f64> {
    let q = double_energy_2d(u)?;
    if !(q > 0.0) {
        return Err(Error::NoProjection(q));
    }
    let a = grid_h1_norm_sq(u);
    Ok(a * a / (4.0 * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::radial::{log_double_energy, mass};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn bump(radius: f64, n: usize) -> RadialProfile {
        RadialProfile::from_fn(radius, n, |s| 1.0 - s * s / (radius * radius)).unwrap()
    }

    #[test]
    fn h1_of_bump() {
        let v = h1_norm_sq(&bump(1.0, 2048));
        assert!((v - 7.0 * PI / 3.0).abs() < 1e-5, "{v}");
        assert_eq!(h1_norm_sq(&RadialProfile::zeros(1.0, 32).unwrap()), 0.0);
    }

    #[test]
    fn h1_is_quadratic() {
        let phi = bump(2.0, 256);
        assert_relative_eq!(h1_norm_sq(&phi.scaled(3.0)), 9.0 * h1_norm_sq(&phi), max_relative = 1e-13);
    }

    #[test]
    fn origin_stencil_vanishes_for_even_profiles() {
        for &n in &[64usize, 256, 1024] {
            let phi = RadialProfile::from_fn(1.0, n, |s| (s * s).cos() * (-(s * s)).exp()).unwrap();
            let h = phi.h();
            let d0 = nodal_derivative(&phi)[0];
            assert!(d0.abs() <= 2.0 * h * h, "n={n}: {d0}");
        }
    }

    #[test]
    fn zero_profile_report() {
        let r = energy(&RadialProfile::zeros(1.0, 32).unwrap());
        assert_eq!(r.h1_sq, 0.0);
        assert_eq!(r.quadratic_q, 0.0);
        assert_eq!(r.energy, 0.0);
        assert!(r.nehari_t.is_none() && r.nehari_energy.is_none());
        assert!(matches!(nehari_scale(&RadialProfile::zeros(1.0, 32).unwrap()), Err(Error::NoProjection(_))));
    }

    #[test]
    fn nehari_energy_is_sup_along_ray() {
        let phi = RadialProfile::from_fn(2.0, 512, |s| (-s * s).exp() * (1.0 - s / 2.0)).unwrap();
        let rep = energy(&phi);
        let best = (0..=200_000)
            .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 200_000.0))
            .map(|t| rep.energy_along_ray(t))
            .fold(f64::NEG_INFINITY, f64::max);
        let e = rep.nehari_energy.unwrap();
        assert!((best - e).abs() <= 1e-6 * e, "{best} vs {e}");
        assert_relative_eq!(rep.energy, rep.h1_sq / 2.0 - rep.quadratic_q / 4.0);
    }

    #[test]
    fn nehari_quotient_is_scale_invariant() {
        let phi = bump(1.5, 400);
        let e = nehari_energy(&phi).unwrap();
        for c in [0.1, 1.0, 10.0] {
            assert_relative_eq!(nehari_energy(&phi.scaled(c)).unwrap(), e, max_relative = 1e-12);
        }
    }

    #[test]
    fn projection_lands_on_manifold() {
        let phi = bump(1.0, 1024);
        let t = nehari_scale(&phi).unwrap();
        let v = phi.scaled(t);
        let rep = energy(&v);
        assert_relative_eq!(rep.h1_sq, rep.quadratic_q, max_relative = 1e-10);
        assert_relative_eq!(nehari_scale(&v).unwrap(), 1.0, max_relative = 1e-10);
        for s in [0.5, 4.0] {
            assert_relative_eq!(nehari_scale(&phi.scaled(s)).unwrap(), t / s, max_relative = 1e-12);
        }
    }

    #[test]
    fn dilation_identity_for_log_energy() {
        // ũ(x) = λu(√λx) on D_{R/√λ}:
        // ∬ln(1/|x−y|)ũ²ũ² = λ²[∬ln(1/|x−y|)u²u² + ln√λ (∫u²)²]
        let radius = 2.0;
        let tests: [fn(f64) -> f64; 3] =
            [|s| (-s * s).exp() * (1.0 - s * s / 4.0), |s| (1.0 - s * s / 4.0).powi(2), |s| (PI * s / 4.0).cos()];
        for f in tests {
            let u = RadialProfile::from_fn(radius, 3000, f).unwrap();
            let m = mass(&u);
            for lambda in [0.3, 2.5] {
                let sq = f64::sqrt(lambda);
                let ut = RadialProfile::from_fn(radius / sq, 2048, |s| lambda * f(sq * s)).unwrap();
                let lhs = log_double_energy(&ut);
                let rhs = lambda * lambda * (log_double_energy(&u) + sq.ln() * m * m);
                assert!((lhs - rhs).abs() <= 1e-4 * rhs.abs(), "λ={lambda}: {lhs} vs {rhs}");
            }
        }
    }

    fn grid_values_sorted(u: &DiscGrid2D) -> Vec<f64> {
        let mut v: Vec<f64> = u.values().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    #[test]
    fn rearrangement_fixes_radial_decreasing() {
        let u = DiscGrid2D::with_cells_per_radius(1.0, 16, |p| (-3.0 * p.norm_sq()).exp()).unwrap();
        let star = rearrange_2d(&u).unwrap();
        assert_eq!(star, u);
    }

    #[test]
    fn rearrangement_is_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = DiscGrid2D::with_cells_per_radius(1.0, 12, |_| 0.0).unwrap();
        let vals: Vec<f64> = (0..u.len()).map(|_| rng.gen::<f64>()).collect();
        let u = u.with_values(vals).unwrap();
        let star = rearrange_2d(&u).unwrap();
        assert_eq!(grid_values_sorted(&u), grid_values_sorted(&star));
        for p in [1, 2, 4] {
            assert_eq!(
                grid_values_sorted(&u).iter().map(|v| v.powi(p)).sum::<f64>(),
                grid_values_sorted(&star).iter().map(|v| v.powi(p)).sum::<f64>()
            );
        }
    }

    #[test]
    fn rearrangement_rejects_negative() {
        let u = DiscGrid2D::with_cells_per_radius(1.0, 8, |p| p.x).unwrap();
        assert!(matches!(rearrange_2d(&u), Err(Error::Domain(_))));
    }

    #[test]
    fn off_center_bump_gains_energy() {
        let c = Point2::new(0.4, -0.2);
        let u = DiscGrid2D::with_cells_per_radius(1.0, 20, |p| (-10.0 * p.dist_sq(c)).exp()).unwrap();
        let star = rearrange_2d(&u).unwrap();
        let before = double_energy_2d(&u).unwrap();
        let after = double_energy_2d(&star).unwrap();
        assert!(after >= before * 0.99, "{after} < {before}");
        assert!(grid_nehari_energy(&star).unwrap() <= grid_nehari_energy(&u).unwrap() * 1.01);
    }
}

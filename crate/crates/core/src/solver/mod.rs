//! Two independent routes to the ground state.
//!
//! * Shooting: the normalized equation `−Δψ + U_ψ ψ = ψ` on `D_{R*}` is an
//!   initial value problem in `r` once `U_ψ` is carried along as part of the
//!   state (it only depends on `ψ` on `[0, r]`). A root-find on `R*` then
//!   undoes the scaling `R* = √λ R`.
//! * Quotient minimization: descent on `‖u‖⁴/Q(u)` over nonnegative radial
//!   grid functions on `D_R`, projected onto the Nehari manifold at the end.

mod disc;
mod nehari;
mod normalized;
mod scaling;
mod shoot;
mod spectral;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use crate::variational::nehari_energy;

pub use disc::solve_on_disc;
pub use nehari::{minimize_nehari, random_init};
pub use normalized::solve_normalized;
pub use scaling::{normalize_from_disc, rescale_to_disc};
pub use shoot::{shoot, shoot_with, Coupling, ShootResult};
pub use spectral::{dirichlet_ground_eigenvalue, ground_eigenvalue, profile_residual_l2, residual_l2};

/// First positive zero of `J₀`.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shooting,
    Nehari,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Shooting => "shooting",
            Method::Nehari => "nehari",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Grid intervals of returned profiles.
    pub n: usize,
    /// Fixed RK4 step of the shooting integrator.
    pub h0: f64,
    /// Series start, as a fraction of the integration range.
    pub eps: f64,
    /// Relative tolerance of every root-find and of the minimizer's stall test.
    pub root_tol: f64,
    pub max_iter: usize,
    /// Step of the preconditioned quotient descent, in `(0, 1]`.
    pub tau: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { n: 4096, h0: 1e-3, eps: 1e-6, root_tol: 1e-10, max_iter: 20_000, tau: 1.0, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("solver config: {what}")));
        if self.n < crate::radial::MIN_INTERVALS {
            return bad("grid too coarse");
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return bad("ode step must be positive");
        }
        // r0 = eps·r_max must sit inside the first cell r_max/n
        if !(self.eps > 0.0 && self.eps * (self.n as f64) < 1.0) {
            return bad("series start must lie inside the first grid cell");
        }
        if !(self.root_tol > 0.0 && self.root_tol < 1.0) {
            return bad("root tolerance must be in (0, 1)");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("flow step must be in (0, 1]");
        }
        Ok(())
    }
}

/// A converged ground state on `D_R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub profile: RadialProfile,
    pub radius: f64,
    pub r_star: f64,
    pub lambda: f64,
    pub c_r: f64,
    pub residual_l2: f64,
    pub method: Method,
    /// Outer root-find evaluations (shooting) or descent steps (nehari).
    pub iterations: usize,
}

impl GroundState {
    pub(crate) fn assemble(
        profile: RadialProfile,
        r_star: f64,
        lambda: f64,
        method: Method,
        iterations: usize,
    ) -> Result<Self> {
        let c_r = nehari_energy(&profile)
            .ok_or_else(|| Error::NoProjection(crate::radial::radial_double_energy(&profile)))?;
        let radius = profile.radius();
        let residual_l2 = profile_residual_l2(&profile, lambda);
        Ok(GroundState { profile, radius, r_star, lambda, c_r, residual_l2, method, iterations })
    }

    pub fn amplitude(&self) -> f64 {
        self.profile.amplitude()
    }

    /// `‖φ_R‖²`, which equals `4c_R` on the Nehari manifold.
    pub fn norm_sq(&self) -> f64 {
        crate::variational::h1_norm_sq(&self.profile)
    }
}

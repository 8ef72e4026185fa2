//! The dilation between `D_R` and the normalized disc `D_{R*}`.
//!
//! With `φ_R(y) = λψ(√λ y)` the node `i·R/n` maps onto the node `i·R*/n`,
//! so both directions are exact on the grid values.

use crate::error::{Error, Result};
use crate::radial::{lambda_of, log_moment, RadialProfile};

use super::{GroundState, Method};

/// Maps a normalized solution on `D_{R*}` to the ground state it represents
/// on `D_R`, where `λ = 1/(M − 1)` and `R = R*·√(M − 1)`.
pub fn rescale_to_disc(psi: &RadialProfile) -> Result<GroundState> {
    let (profile, lambda) = dilate_to_disc(psi)?;
    GroundState::assemble(profile, psi.radius(), lambda, Method::Shooting, 0)
}

/// Profile and `λ` only, without the derived diagnostics.
pub(crate) fn dilate_to_disc(psi: &RadialProfile) -> Result<(RadialProfile, f64)> {
    let m = log_moment(psi);
    if !(m > 1.0) {
        return Err(Error::Unscalable(m));
    }
    let lambda = 1.0 / (m - 1.0);
    let radius = psi.radius() * (m - 1.0).sqrt();
    let values = psi.values().iter().map(|v| lambda * v).collect();
    Ok((RadialProfile::new(radius, values)?, lambda))
}

/// Forward map: `ψ(x) = φ_R(x/√λ)/λ` on `D_{√λ R}` with `λ = λ(φ_R)`.
pub fn normalize_from_disc(phi: &RadialProfile) -> Result<(RadialProfile, f64)> {
    let lambda = lambda_of(phi);
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ(φ) = {lambda} is not positive")));
    }
    let r_star = lambda.sqrt() * phi.radius();
    let values = phi.values().iter().map(|v| v / lambda).collect();
    Ok((RadialProfile::new(r_star, values)?, lambda))
}

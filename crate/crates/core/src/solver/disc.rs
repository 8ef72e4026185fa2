use log::debug;

use crate::error::{Error, Result};

use super::normalized::{solve_normalized_full, Normalized};
use super::scaling::dilate_to_disc;
use super::{GroundState, Method, SolverConfig, BESSEL_J0_FIRST_ZERO};

const R_STAR_CEILING: f64 = 1e4;
const MAX_OUTER: usize = 200;

#[derive(Clone)]
struct Probe {
    r_star: f64,
    miss: f64,
    hit: Option<Normalized>,
}

/// `R(R*) − R`. Normalized radii too small to be realized count as `R(R*) = 0`,
/// which is also the limit of `R(R*)` at the lower end of the realizable range.
fn probe(r_star: f64, radius: f64, cfg: &SolverConfig) -> Result<Probe> {
    match solve_normalized_full(r_star, cfg) {
        Ok(sol) => match dilate_to_disc(&sol.profile) {
            Ok((phi, _)) => Ok(Probe { r_star, miss: phi.radius() - radius, hit: Some(sol) }),
            Err(Error::Unscalable(_)) => Ok(Probe { r_star, miss: -radius, hit: None }),
            Err(e) => Err(e),
        },
        Err(Error::NoSolutionInRange { .. }) => Ok(Probe { r_star, miss: -radius, hit: None }),
        Err(e) => Err(e),
    }
}

/// Ground state on `D_R` by shooting, with an outer Brent iteration on `R*`.
pub fn solve_on_disc(radius: f64, cfg: &SolverConfig) -> Result<GroundState> {
    cfg.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let mut evals = 0;
    let mut eval = |r_star: f64| {
        evals += 1;
        probe(r_star, radius, cfg)
    };

    let mut a = eval(1.05 * BESSEL_J0_FIRST_ZERO)?;
    if a.miss >= 0.0 {
        return Err(Error::NoBracket { radius });
    }
    let mut b = eval(2.0 * a.r_star)?;
    while b.miss < 0.0 {
        if b.r_star >= R_STAR_CEILING {
            return Err(Error::NoBracket { radius });
        }
        let next = eval(2.0 * b.r_star)?;
        a = std::mem::replace(&mut b, next);
    }
    debug!("R = {radius}: R* bracketed in [{}, {}]", a.r_star, b.r_star);

    let tol_miss = cfg.root_tol * radius;
    let best = brent(&mut eval, a, b, cfg.root_tol, tol_miss)?.ok_or(Error::NoBracket { radius })?;
    finish(best, radius, evals)
}

/// Brent's method on a bracket with `a.miss < 0 < b.miss`. Returns `None`
/// if the iteration cap is hit.
fn brent(
    eval: &mut impl FnMut(f64) -> Result<Probe>,
    a: Probe,
    b: Probe,
    x_rel_tol: f64,
    f_tol: f64,
) -> Result<Option<Probe>> {
    // `b` is the best estimate, `a` the previous one, `c` has sign opposite to `b`
    let (mut a, mut b) = (a, b);
    let mut c = a.clone();
    let mut d = b.r_star - a.r_star;
    let mut e = d;
    for _ in 0..MAX_OUTER {
        if (b.miss > 0.0) == (c.miss > 0.0) {
            c = a.clone();
            d = b.r_star - a.r_star;
            e = d;
        }
        if c.miss.abs() < b.miss.abs() {
            a = b;
            b = c;
            c = a.clone();
        }
        let tol = 2.0 * f64::EPSILON * b.r_star.abs() + 0.5 * x_rel_tol * b.r_star;
        let m = 0.5 * (c.r_star - b.r_star);
        if b.miss.abs() <= f_tol || m.abs() <= tol {
            return Ok(Some(b));
        }
        if e.abs() >= tol && a.miss.abs() > b.miss.abs() {
            let s = b.miss / a.miss;
            let (mut p, mut q);
            if a.r_star == c.r_star {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = a.miss / c.miss;
                let r = b.miss / c.miss;
                p = s * (2.0 * m * qa * (qa - r) - (b.r_star - a.r_star) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        let step = if d.abs() > tol { d } else { tol.copysign(m) };
        let next = eval(b.r_star + step)?;
        a = std::mem::replace(&mut b, next);
    }
    Ok(None)
}

fn finish(best: Probe, radius: f64, evals: usize) -> Result<GroundState> {
    let sol = best.hit.ok_or(Error::NoBracket { radius })?;
    let (phi, lambda) = dilate_to_disc(&sol.profile)?;
    debug!(
        "R = {radius}: R* = {}, a = {}, {} outer evaluations, {} shots in the last{}",
        best.r_star,
        sol.amplitude,
        evals,
        sol.shots,
        if sol.patched { ", tail patched" } else { "" }
    );
    GroundState::assemble(phi, best.r_star, lambda, Method::Shooting, evals)
}

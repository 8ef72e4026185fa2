//! Radius sweeps, the cutoff-function upper bound on `c_R`, and multi-start
//! uniqueness probes.

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{log_double_energy, mass, RadialProfile};
use crate::solver::{minimize_nehari, random_init, solve_on_disc, GroundState, Method, SolverConfig};
use crate::variational::h1_norm_sq;

/// One row of a radius sweep. Numeric fields are absent when the solve failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "c_R")]
    pub c_r: Option<f64>,
    pub norm_sq: Option<f64>,
    pub lambda: Option<f64>,
    pub amp0: Option<f64>,
    pub residual: Option<f64>,
    pub method: Method,
    pub status: String,
}

impl SweepRecord {
    pub fn from_state(state: &GroundState) -> Self {
        SweepRecord {
            radius: state.radius,
            c_r: Some(state.c_r),
            norm_sq: Some(state.norm_sq()),
            lambda: Some(state.lambda),
            amp0: Some(state.amplitude()),
            residual: Some(state.residual_l2),
            method: state.method,
            status: "ok".into(),
        }
    }

    fn failed(radius: f64, method: Method, err: &Error) -> Self {
        SweepRecord {
            radius,
            c_r: None,
            norm_sq: None,
            lambda: None,
            amp0: None,
            residual: None,
            method,
            status: format!("error: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Solves one radius with the chosen method.
pub fn solve_with(radius: f64, method: Method, cfg: &SolverConfig) -> Result<GroundState> {
    match method {
        Method::Shooting => solve_on_disc(radius, cfg),
        Method::Nehari => minimize_nehari(radius, None, cfg),
    }
}

/// Shooting sweep over increasing radii on the global thread pool.
pub fn sweep_radius(radii: &[f64], cfg: &SolverConfig) -> Result<Vec<SweepRecord>> {
    sweep_radius_with(radii, Method::Shooting, cfg, None)
}

/// Sweep with at most `threads` concurrent solves. Rows follow the input order.
pub fn sweep_radius_with(
    radii: &[f64],
    method: Method,
    cfg: &SolverConfig,
    threads: Option<usize>,
) -> Result<Vec<SweepRecord>> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("empty radius list".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("radii must be strictly increasing".into()));
    }
    cfg.validate()?;
    let run = || -> Vec<SweepRecord> {
        radii
            .par_iter()
            .map(|&r| match solve_with(r, method, cfg) {
                Ok(s) => SweepRecord::from_state(&s),
                Err(e) => {
                    warn!("R = {r}: {e}");
                    SweepRecord::failed(r, method, &e)
                }
            })
            .collect()
    };
    let rows = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    for w in rows.windows(2) {
        if let (Some(a), Some(b)) = (w[0].c_r, w[1].c_r) {
            if b >= a {
                info!("c_R does not decrease from R = {} to R = {}", w[0].radius, w[1].radius);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffBound {
    pub t_r: f64,
    /// `I_R(t_R Ψ) = t_R²‖Ψ‖²/4 ≥ c_R`.
    pub bound: f64,
}

/// Upper bound on `c_R` from a fixed cutoff `Ψ` on the unit disc, placed
/// inside `D_R` for `R > 1`.
///
/// Against radial densities the image part of the Green's function of `D_R`
/// averages to `ln R`, so `Q_R(Ψ) = ∬ ln(R/|x − y|) Ψ²Ψ²` is the exact
/// quadratic term of the zero extension, evaluated on `D_1`.
pub fn cutoff_upper_bound(radius: f64, psi: &RadialProfile) -> Result<CutoffBound> {
    if !(radius > 1.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("cutoff bound needs R > 1, got {radius}")));
    }
    if (psi.radius() - 1.0).abs() > 1e-12 || psi.values()[psi.n()] != 0.0 {
        return Err(Error::InvalidInput("cutoff must live on the unit disc and vanish at r = 1".into()));
    }
    let m = mass(psi);
    let q = log_double_energy(psi) + radius.ln() * m * m;
    if !(q > 0.0) {
        return Err(Error::NoProjection(q));
    }
    let h1 = h1_norm_sq(psi);
    let t_r = (h1 / q).sqrt();
    Ok(CutoffBound { t_r, bound: t_r * t_r * h1 / 4.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// Largest uniform distance among all converged profiles over the
    /// amplitude at the origin.
    pub max_pairwise_distance: f64,
    /// The same, restricted to the quotient-descent runs.
    pub flow_spread: f64,
    pub successes: usize,
    pub failures: usize,
    /// Some solve failed; the distances cover the successes only.
    pub warning: bool,
}

/// Multi-start probe with seeds `cfg.seed, cfg.seed + 1, …`.
pub fn uniqueness_probe(radius: f64, n_inits: usize, cfg: &SolverConfig) -> Result<UniquenessReport> {
    if n_inits < 2 {
        return Err(Error::InvalidInput(format!("need at least two starts, got {n_inits}")));
    }
    let seeds: Vec<u64> = (0..n_inits as u64).map(|k| cfg.seed.wrapping_add(k)).collect();
    uniqueness_probe_seeds(radius, &seeds, cfg)
}

/// Quotient descent from `random_init(seed)` for each seed, plus one shooting
/// solve.
pub fn uniqueness_probe_seeds(radius: f64, seeds: &[u64], cfg: &SolverConfig) -> Result<UniquenessReport> {
    let flows: Vec<Result<GroundState>> = seeds
        .par_iter()
        .map(|&seed| {
            let init = random_init(radius, cfg.n, seed)?;
            minimize_nehari(radius, Some(&init), cfg)
        })
        .collect();
    let shooting = solve_on_disc(radius, cfg);

    let mut failures = 0;
    let mut flow_profiles = Vec::new();
    for f in flows {
        match f {
            Ok(s) => flow_profiles.push(s.profile),
            Err(e) => {
                warn!("uniqueness probe at R = {radius}: {e}");
                failures += 1;
            }
        }
    }
    let shoot_profile = match shooting {
        Ok(s) => Some(s.profile),
        Err(e) => {
            warn!("uniqueness probe at R = {radius}: shooting failed: {e}");
            failures += 1;
            None
        }
    };
    let scale = shoot_profile
        .as_ref()
        .or(flow_profiles.first())
        .map(|p| p.amplitude())
        .ok_or_else(|| Error::Domain("no start converged".into()))?;
    let spread = |profiles: &[&RadialProfile]| -> Result<f64> {
        let mut d = 0.0f64;
        for (i, a) in profiles.iter().enumerate() {
            for b in &profiles[i + 1..] {
                d = d.max(a.uniform_distance(b)?);
            }
        }
        Ok(d / scale)
    };
    let flows_only: Vec<&RadialProfile> = flow_profiles.iter().collect();
    let mut all = flows_only.clone();
    all.extend(shoot_profile.as_ref());
    if all.len() < 2 {
        return Err(Error::Domain("fewer than two starts converged".into()));
    }
    Ok(UniquenessReport {
        max_pairwise_distance: spread(&all)?,
        flow_spread: spread(&flows_only)?,
        successes: all.len(),
        failures,
        warning: failures > 0,
    })
}

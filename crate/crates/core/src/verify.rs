//! Built-in invariant suite and the radial-vs-2D energy oracle.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{double_energy_2d, green_bound_holds, green_disc, DiscGrid2D, Point2};
use crate::radial::{circle_average_log, circle_average_log_quad, lambda_of, radial_double_energy, RadialProfile};
use crate::solver::{
    dirichlet_ground_eigenvalue, ground_eigenvalue, minimize_nehari, normalize_from_disc, shoot_with, solve_on_disc,
    Coupling, GroundState, SolverConfig, BESSEL_J0_FIRST_ZERO,
};
use crate::study::{cutoff_upper_bound, sweep_radius, uniqueness_probe};
use crate::variational::{grid_nehari_energy, h1_norm_sq, rearrange_2d};

/// Fine 1D grid used as the reference side of the oracle.
const ORACLE_RADIAL_N: usize = 8192;
const IDENTITY_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Gaussian,
    Parabola,
    CosineBump,
    /// Indicator of `D_{R/2}`, with a closed-form energy.
    HalfDisc,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] =
        [TestFunction::Gaussian, TestFunction::Parabola, TestFunction::CosineBump, TestFunction::HalfDisc];
    pub const SMOOTH: [TestFunction; 3] = [TestFunction::Gaussian, TestFunction::Parabola, TestFunction::CosineBump];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Gaussian => "gaussian",
            TestFunction::Parabola => "parabola",
            TestFunction::CosineBump => "cosine_bump",
            TestFunction::HalfDisc => "half_disc",
        }
    }

    pub fn eval(self, r: f64, radius: f64) -> f64 {
        let s = r / radius;
        match self {
            TestFunction::Gaussian => (-4.0 * s * s).exp(),
            TestFunction::Parabola => (1.0 - s * s).max(0.0),
            TestFunction::CosineBump => (0.5 * PI * s.min(1.0)).cos().powi(2),
            TestFunction::HalfDisc => {
                if s < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∬ G φ²φ²`: closed form where available, fine radial quadrature otherwise.
    pub fn reference_energy(self, radius: f64) -> Result<f64> {
        match self {
            TestFunction::HalfDisc => {
                let a = 0.5 * radius;
                Ok(TAU * TAU * (a.powi(4) / 4.0 * (radius / a).ln() + a.powi(4) / 16.0))
            }
            _ => Ok(radial_double_energy(&RadialProfile::from_fn(radius, ORACLE_RADIAL_N, |r| self.eval(r, radius))?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub function: String,
    #[serde(rename = "R")]
    pub radius: f64,
    pub cells_per_radius: usize,
    pub h: f64,
    pub radial: f64,
    pub grid: f64,
    pub rel_error: f64,
}

pub fn oracle_row(f: TestFunction, radius: f64, cells_per_radius: usize) -> Result<OracleRow> {
    let radial = f.reference_energy(radius)?;
    let grid_fn = DiscGrid2D::with_cells_per_radius(radius, cells_per_radius, |p| f.eval(p.norm(), radius))?;
    let grid = double_energy_2d(&grid_fn)?;
    Ok(OracleRow {
        function: f.name().into(),
        radius,
        cells_per_radius,
        h: grid_fn.h(),
        radial,
        grid,
        rel_error: (grid - radial).abs() / radial.abs(),
    })
}

pub fn oracle_table(radius: f64, functions: &[TestFunction], resolutions: &[usize]) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    for &f in functions {
        for &k in resolutions {
            rows.push(oracle_row(f, radius, k)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Skips the finest oracle grid and the large singular quadrature.
    pub quick: bool,
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quick: false, tolerance_scale: 1.0 }
    }
}

struct Suite {
    checks: Vec<Check>,
    scale: f64,
}

impl Suite {
    /// Records `measured ≤ tolerance` (tolerance scaled).
    fn at_most(&mut self, name: &str, measured: f64, tolerance: f64, start: Instant) {
        let tolerance = tolerance * self.scale;
        self.checks.push(Check {
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    /// Boolean property; `measured` is the number of violations.
    fn holds(&mut self, name: &str, violations: usize, start: Instant) {
        self.checks.push(Check {
            name: name.into(),
            measured: violations as f64,
            tolerance: 0.0,
            pass: violations == 0,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    fn failed(&mut self, name: &str, start: Instant) {
        self.checks.push(Check {
            name: name.into(),
            measured: f64::NAN,
            tolerance: 0.0,
            pass: false,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn random_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Point2 {
    let rho = radius * rng.gen::<f64>().sqrt();
    Point2::polar(rho, rng.gen::<f64>() * TAU)
}

/// Runs every check. Individual solver failures show up as failed checks.
pub fn run_suite(cfg: &SolverConfig, opts: VerifyOptions) -> Vec<Check> {
    let mut s = Suite { checks: Vec::new(), scale: opts.tolerance_scale };

    // circle averages against the min formula
    let t = Instant::now();
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 10.0).collect();
    let mut off = 0.0f64;
    let mut diag = 0.0f64;
    for &r in &grid {
        for &rho in &grid {
            let exact = circle_average_log(r, rho).unwrap_or(f64::NAN);
            if (r - rho).abs() >= 0.1 - 1e-12 {
                off = off.max((circle_average_log_quad(r, rho, 4096).unwrap_or(f64::NAN) - exact).abs());
            } else if !opts.quick {
                diag = diag.max((circle_average_log_quad(r, rho, 1_000_000).unwrap_or(f64::NAN) - exact).abs());
            }
        }
    }
    s.at_most("newton_off_diagonal", off, 1e-7, t);
    if !opts.quick {
        s.at_most("newton_diagonal", diag, 1e-3, t);
    }

    // kernel identities
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sym = 0.0f64;
    let mut boundary = 0.0f64;
    let mut bound_violations = 0;
    for radius in [1.0, 5.0] {
        for _ in 0..5000 {
            let x = random_in_disc(&mut rng, radius);
            let y = random_in_disc(&mut rng, radius);
            if let (Ok(a), Ok(b)) = (green_disc(x, y, radius), green_disc(y, x, radius)) {
                sym = sym.max((a - b).abs() / a.abs().max(1.0));
            }
            if !matches!(green_bound_holds(x, y, radius), Ok(true)) {
                bound_violations += 1;
            }
            let edge = Point2::polar(radius, rng.gen::<f64>() * TAU);
            if let Ok(g) = green_disc(x, edge, radius) {
                boundary = boundary.max(g.abs());
            }
        }
    }
    s.at_most("kernel_symmetry", sym, 1e-12, t);
    s.at_most("kernel_boundary", boundary, 1e-12, t);
    s.holds("kernel_bound", bound_violations, t);

    // radial reduction against the 2D grid
    let t = Instant::now();
    let coarse: Vec<Result<OracleRow>> = TestFunction::SMOOTH.par_iter().map(|&f| oracle_row(f, 1.0, 32)).collect();
    match coarse.into_iter().collect::<Result<Vec<_>>>() {
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
            s.at_most("oracle_h_R_over_32", worst, 0.02, t);
            if !opts.quick {
                let t = Instant::now();
                let fine: Result<Vec<OracleRow>> =
                    TestFunction::SMOOTH.par_iter().map(|&f| oracle_row(f, 1.0, 64)).collect();
                match fine {
                    Ok(fine) => {
                        // error ratio fine/coarse, must be at most ½
                        let worst = rows.iter().zip(&fine).map(|(c, f)| f.rel_error / c.rel_error).fold(0.0, f64::max);
                        s.at_most("oracle_halving_h_R_over_64", worst, 0.5, t);
                    }
                    Err(_) => s.failed("oracle_halving_h_R_over_64", t),
                }
            }
        }
        Err(_) => s.failed("oracle_h_R_over_32", t),
    }

    // Bessel limit
    let t = Instant::now();
    let bessel_cfg = SolverConfig { h0: 1e-4, ..*cfg };
    let zeros: Vec<f64> = [1e-3, 1.0, 1e3]
        .iter()
        .map(|&a| shoot_with(a, 5.0, &bessel_cfg, Coupling::Linear).ok().and_then(|r| r.first_zero).unwrap_or(f64::NAN))
        .collect();
    let spread = zeros.iter().map(|z| (z - zeros[0]).abs()).fold(0.0, f64::max);
    s.at_most("bessel_zero", (zeros[0] - BESSEL_J0_FIRST_ZERO).abs(), 1e-5, t);
    s.at_most("bessel_spread", spread, 1e-6, t);

    // solved states
    let t = Instant::now();
    // shooting states carry the O(h²) quadrature error into the Nehari
    // identity, so that one is measured on a finer grid
    let fine = SolverConfig { n: cfg.n * IDENTITY_REFINEMENT, ..*cfg };
    let states: Vec<(f64, Result<GroundState>, Result<GroundState>)> =
        [1.0, 2.0, 4.0, 8.0].par_iter().map(|&r| (r, solve_on_disc(r, cfg), minimize_nehari(r, None, cfg))).collect();
    let fine_states: Vec<Result<GroundState>> =
        [1.0, 2.0, 4.0, 8.0].par_iter().map(|&r| solve_on_disc(r, &fine)).collect();
    let mut scaling = 0.0f64;
    let mut moment = 0.0f64;
    let mut nehari = 0.0f64;
    let mut agreement = 0.0f64;
    let mut gamma = 0.0f64;
    let mut negative_lambda = 0;
    let mut failures = 0;
    for (r, shoot, flow) in &states {
        let (Ok(a), Ok(b)) = (shoot, flow) else {
            failures += 1;
            continue;
        };
        for st in [a, b] {
            scaling = scaling.max(rel(st.r_star * st.r_star, st.lambda * st.radius * st.radius));
            moment = moment.max(rel(lambda_of(&st.profile), st.lambda));
            if !(st.lambda > 0.0) {
                negative_lambda += 1;
            }
        }
        if *r <= 4.0 {
            let d = a.profile.uniform_distance(&b.profile).map_or(f64::NAN, |d| d / a.amplitude());
            agreement = agreement.max(d);
        }
        let g = normalize_from_disc(&a.profile).and_then(|(psi, _)| ground_eigenvalue(&psi)).unwrap_or(f64::NAN);
        gamma = gamma.max((g - 1.0).abs());
    }
    for st in states.iter().filter_map(|(_, _, b)| b.as_ref().ok()) {
        nehari = nehari.max(rel(h1_norm_sq(&st.profile), 4.0 * st.c_r));
    }
    for st in &fine_states {
        match st {
            Ok(st) => nehari = nehari.max(rel(h1_norm_sq(&st.profile), 4.0 * st.c_r)),
            Err(_) => failures += 1,
        }
    }
    s.holds("solves_converged", failures, t);
    s.at_most("scaling_closure", scaling, 1e-8, t);
    s.at_most("lambda_consistency", moment, 1e-6, t);
    s.holds("lambda_positive", negative_lambda, t);
    s.at_most("nehari_identity", nehari, 1e-6, t);
    s.at_most("method_agreement", agreement, 1e-3, t);
    s.at_most("ground_eigenvalue", gamma, 5e-3, t);

    let t = Instant::now();
    let r_star = 3.5;
    let laplace = dirichlet_ground_eigenvalue(r_star, &vec![0.0; cfg.n + 1]).unwrap_or(f64::NAN);
    s.at_most("dirichlet_eigenvalue", rel(laplace, (BESSEL_J0_FIRST_ZERO / r_star).powi(2)), 1e-4, t);

    let t = Instant::now();
    match uniqueness_probe(2.0, 5, cfg) {
        Ok(rep) => {
            s.at_most("uniqueness_probe", rep.max_pairwise_distance, 1e-3, t);
        }
        Err(_) => s.failed("uniqueness_probe", t),
    }

    // sweep and cutoff bound
    let t = Instant::now();
    let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
    match sweep_radius(&radii, &fine) {
        Ok(rows) if rows.iter().all(|r| r.is_ok()) => {
            let c: Vec<f64> = rows.iter().filter_map(|r| r.c_r).collect();
            let identity = rows
                .iter()
                .map(|r| rel(r.norm_sq.unwrap_or(f64::NAN), 4.0 * r.c_r.unwrap_or(f64::NAN)))
                .fold(0.0, f64::max);
            s.at_most("sweep_nehari_identity", identity, 1e-6, t);
            s.holds("sweep_lambda_positive", rows.iter().filter(|r| !(r.lambda > Some(0.0))).count(), t);
            let amp: Vec<f64> = rows.iter().filter_map(|r| r.amp0).collect();
            s.holds("sweep_c_decreasing", c.windows(2).filter(|w| w[1] >= w[0]).count(), t);
            s.at_most("sweep_c64_over_c4", c[4] / c[0], 0.25, t);
            s.holds("sweep_amp_decreasing", amp.windows(2).filter(|w| w[1] >= w[0]).count(), t);
            let psi = RadialProfile::from_fn(1.0, cfg.n, |r| 1.0 - r * r);
            match psi.and_then(|p| radii.iter().map(|&r| cutoff_upper_bound(r, &p)).collect::<Result<Vec<_>>>()) {
                Ok(bounds) => {
                    let above = c.iter().zip(&bounds).filter(|(c, b)| **c > b.bound).count();
                    s.holds("cutoff_dominates", above, t);
                    s.holds("cutoff_t_decreasing", bounds.windows(2).filter(|w| w[1].t_r >= w[0].t_r).count(), t);
                }
                Err(_) => s.failed("cutoff_dominates", t),
            }
        }
        _ => s.failed("sweep", t),
    }

    // rearrangement
    let t = Instant::now();
    let mut multiset = 0;
    let mut quotient = 0.0f64;
    for k in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(100 + k));
        let u = DiscGrid2D::with_cells_per_radius(1.0, 12, |_| 0.0)
            .and_then(|g| g.with_values((0..g.len()).map(|_| rng.gen::<f64>()).collect()));
        let Ok(u) = u else {
            multiset += 1;
            continue;
        };
        let Ok(v) = rearrange_2d(&u) else {
            multiset += 1;
            continue;
        };
        let mut a: Vec<f64> = u.values().collect();
        let mut b: Vec<f64> = v.values().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        if a != b {
            multiset += 1;
        }
        match (grid_nehari_energy(&u), grid_nehari_energy(&v)) {
            (Ok(eu), Ok(ev)) => quotient = quotient.max(ev / eu - 1.0),
            _ => quotient = f64::NAN,
        }
    }
    s.holds("rearrangement_multiset", multiset, t);
    s.at_most("rearrangement_quotient_increase", quotient.max(0.0), 0.01, t);

    s.checks
}

use std::f64::consts::TAU;

use proptest::prelude::*;

use sn_disc::geometry::{green_bound_holds, green_disc, DiscGrid2D, Point2};
use sn_disc::io::{parse_document, parse_radii, to_json_bytes, Document, SolutionDoc};
use sn_disc::radial::{
    circle_average_log, circle_average_log_quad, lambda_of, log_moment, mass, potential_u, radial_double_energy,
    RadialProfile,
};
use sn_disc::solver::{GroundState, Method, SolverConfig};
use sn_disc::variational::{energy, h1_norm_sq, nehari_energy, nehari_scale, rearrange_2d};

fn point_in(radius: f64) -> impl Strategy<Value = Point2> {
    (0.0..0.999f64, 0.0..TAU).prop_map(move |(s, th)| Point2::polar(radius * s.sqrt(), th))
}

/// `a(1 − (s/R)²) + b·sin(πs/R)·(1 − s/R)`, zero at the rim and positive for
/// `a, b ≥ 0`.
fn profile(radius: f64, n: usize, a: f64, b: f64) -> RadialProfile {
    RadialProfile::from_fn(radius, n, |s| {
        let t = s / radius;
        a * (1.0 - t * t) + b * (std::f64::consts::PI * t).sin() * (1.0 - t)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_is_symmetric_positive_and_bounded(
        radius in 0.2..20.0f64,
        x in (0.0..0.999f64, 0.0..TAU),
        y in (0.0..0.999f64, 0.0..TAU),
    ) {
        let x = Point2::polar(radius * x.0.sqrt(), x.1);
        let y = Point2::polar(radius * y.0.sqrt(), y.1);
        prop_assume!(x.dist_sq(y) > 1e-12 * radius * radius);
        let a = green_disc(x, y, radius).unwrap();
        let b = green_disc(y, x, radius).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a > 0.0);
        // the log bound needs 2|x − y| + R² ≥ 1
        if radius >= 1.0 {
            prop_assert!(green_bound_holds(x, y, radius).unwrap());
        }
    }

    #[test]
    fn kernel_vanishes_on_the_rim(radius in 0.2..20.0f64, theta in 0.0..TAU, x in point_in(1.0)) {
        let x = Point2::new(x.x * radius, x.y * radius);
        let g = green_disc(x, Point2::polar(radius, theta), radius).unwrap();
        prop_assert!(g.abs() <= 1e-12);
    }

    #[test]
    fn circle_average_matches_min_formula(r in 0.05..4.0f64, rho in 0.0..4.0f64) {
        prop_assume!((r - rho).abs() > 0.05);
        let exact = circle_average_log(r, rho).unwrap();
        let formula = (1.0 / r).ln().min(if rho > 0.0 { (1.0 / rho).ln() } else { f64::INFINITY });
        prop_assert!((exact - formula).abs() <= 1e-15 * formula.abs().max(1.0));
        let quad = circle_average_log_quad(r, rho, 4096).unwrap();
        prop_assert!((quad - exact).abs() <= 1e-7, "{} vs {}", quad, exact);
    }

    #[test]
    fn radial_quantities_scale_quadratically(a in 0.1..3.0f64, b in 0.0..2.0f64, radius in 0.5..10.0f64, c in 0.1..5.0f64) {
        let phi = profile(radius, 128, a, b);
        let scaled = phi.scaled(c);
        let c2 = c * c;
        prop_assert!((mass(&scaled) / mass(&phi) - c2).abs() <= 1e-12 * c2);
        prop_assert!((log_moment(&scaled) / log_moment(&phi) - c2).abs() <= 1e-12 * c2);
        prop_assert!((h1_norm_sq(&scaled) / h1_norm_sq(&phi) - c2).abs() <= 1e-12 * c2);
        let q = radial_double_energy(&scaled) / radial_double_energy(&phi);
        prop_assert!((q - c2 * c2).abs() <= 1e-10 * c2 * c2);
        prop_assert_eq!(log_moment(&phi) - lambda_of(&phi), 1.0);
    }

    #[test]
    fn potential_starts_at_zero_and_rises(a in 0.0..3.0f64, b in 0.0..2.0f64, radius in 0.5..10.0f64) {
        let u = potential_u(&profile(radius, 256, a, b));
        prop_assert_eq!(u.values()[0], 0.0);
        prop_assert!(u.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn nehari_projection_balances_the_ray(a in 0.1..3.0f64, b in 0.0..2.0f64, radius in 0.5..10.0f64) {
        let phi = profile(radius, 128, a, b);
        let t = nehari_scale(&phi).unwrap();
        let on = energy(&phi.scaled(t));
        prop_assert!((on.h1_sq / on.quadratic_q - 1.0).abs() <= 1e-10);
        // the quotient is scale invariant and equals the peak of the ray
        let e = nehari_energy(&phi).unwrap();
        prop_assert!((nehari_energy(&phi.scaled(3.7)).unwrap() / e - 1.0).abs() <= 1e-10);
        let report = energy(&phi);
        prop_assert!((report.energy_along_ray(t) / e - 1.0).abs() <= 1e-10);
        prop_assert!(report.energy_along_ray(1.1 * t) < e && report.energy_along_ray(0.9 * t) < e);
    }

    #[test]
    fn rearrangement_permutes_and_is_idempotent(seed in any::<u64>(), k in 4usize..10) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = DiscGrid2D::with_cells_per_radius(1.0, k, |_| 0.0).unwrap();
        let u = grid.with_values((0..grid.len()).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let v = rearrange_2d(&u).unwrap();
        let mut a: Vec<f64> = u.values().collect();
        let mut b: Vec<f64> = v.values().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        prop_assert_eq!(rearrange_2d(&v).unwrap(), v.clone());
        // decreasing in the distance of the cell center from the origin
        let mut cells: Vec<(f64, f64)> = v.cells().iter().map(|c| (v.center(c).norm_sq(), c.value)).collect();
        cells.sort_by(|p, q| p.0.total_cmp(&q.0));
        prop_assert!(cells.windows(2).all(|w| w[1].1 <= w[0].1 || w[1].0 == w[0].0));
    }

    #[test]
    fn geometric_ladder_has_constant_ratio(a in 0.5..10.0f64, factor in 1.01..50.0f64, k in 2usize..12) {
        let b = a * factor;
        let radii = parse_radii(&format!("{a}:{b}:geometric:{k}")).unwrap();
        prop_assert_eq!(radii.len(), k);
        prop_assert_eq!(radii[0], a);
        prop_assert_eq!(radii[k - 1], b);
        let ratio = factor.powf(1.0 / (k - 1) as f64);
        for w in radii.windows(2) {
            prop_assert!((w[1] / w[0] / ratio - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn solution_documents_read_back_bit_exactly(
        values in proptest::collection::vec(-1e3..1e3f64, 17..64),
        radius in 1e-3..1e3f64,
        lambda in 1e-9..1e9f64,
        tiny in -1e-300..1e-300f64,
    ) {
        let mut values = values;
        values[0] = tiny;
        let state = GroundState {
            profile: RadialProfile::new(radius, values).unwrap(),
            radius,
            r_star: lambda.sqrt() * radius,
            lambda,
            c_r: 1.0 / 3.0,
            residual_l2: tiny.abs(),
            method: Method::Nehari,
            iterations: 0,
        };
        let cfg = SolverConfig { n: state.profile.n(), ..SolverConfig::default() };
        let doc = SolutionDoc::new(&state, &cfg);
        let bytes = to_json_bytes(&doc).unwrap();
        let back = match parse_document(&bytes).unwrap() {
            Document::Single(d) => d,
            Document::Bundle(_) => unreachable!(),
        };
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(to_json_bytes(&back).unwrap(), bytes);
    }
}

//! Dirichlet Green's function of the disc and a brute-force 2D quadrature of
//! the kernel double integral.
//!
//! The 2D path exists to check the radial reduction. It is O(N²) in the
//! number of cells and meant for grids of at most a few times 10⁴ cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance below which two points are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn polar(rho: f64, theta: f64) -> Self {
        Point2::new(rho * theta.cos(), rho * theta.sin())
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// `G` from squared norms and squared distance:
/// `½ ln(1 + (R² − |x|²)(R² − |y|²) / (R²|x − y|²))`.
///
/// This is `ln(√(R⁴ + |x|²|y|² − 2R²x·y) / (R|x − y|))` with the argument of
/// the logarithm expanded; the `ln_1p` form keeps full relative accuracy as
/// `y` approaches the boundary.
#[inline]
fn green_from_parts(x_sq: f64, y_sq: f64, d_sq: f64, r_sq: f64) -> f64 {
    0.5 * ((r_sq - x_sq) * (r_sq - y_sq) / (r_sq * d_sq)).ln_1p()
}

fn validate_pair(x: Point2, y: Point2, radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("disc radius must be positive, got {radius}")));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain("non-finite point".into()));
    }
    let xn = x.norm();
    if xn >= radius {
        return Err(Error::OutsideDisc { norm: xn, radius });
    }
    let yn = y.norm();
    if yn > radius * (1.0 + 1e-12) {
        return Err(Error::OutsideDisc { norm: yn, radius });
    }
    if x.dist_sq(y).sqrt() < COINCIDENCE_TOL * radius {
        return Err(Error::CoincidentPoints);
    }
    Ok(())
}

/// Green's function of `−Δ` on the disc `D_R` with Dirichlet data.
///
/// Requires `|x| < R`, `|y| ≤ R` and `x ≠ y`. Symmetric, positive for
/// interior `y`, zero on the boundary, and finite at `x = 0` where it equals
/// `ln(R/|y|)`.
pub fn green_disc(x: Point2, y: Point2, radius: f64) -> Result<f64> {
    validate_pair(x, y, radius)?;
    let r_sq = radius * radius;
    // clamp tiny overshoot of |y| past R to the boundary value
    let y_sq = y.norm_sq().min(r_sq);
    Ok(green_from_parts(x.norm_sq(), y_sq, x.dist_sq(y), r_sq))
}

/// Checks `0 < G(x, y) ≤ ln(1 + R²/|x − y|)`; on the boundary `|y| = R` the
/// lower bound relaxes to `G = 0`.
pub fn green_bound_holds(x: Point2, y: Point2, radius: f64) -> Result<bool> {
    let g = green_disc(x, y, radius)?;
    let d = x.dist_sq(y).sqrt();
    let upper = (radius * radius / d).ln_1p();
    let on_boundary = (y.norm() - radius).abs() <= 1e-12 * radius;
    let lower_ok = if on_boundary { g.abs() <= 1e-12 } else { g > 0.0 };
    Ok(lower_ok && g <= upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub i: i32,
    pub j: i32,
    pub value: f64,
}

/// Function sampled at the centers `((i + ½)h, (j + ½)h)` of the square cells
/// whose centers lie strictly inside `D_R`. Outside those cells the function
/// is taken to be zero.
///
/// Cells are stored in lexicographic `(i, j)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscGrid2D {
    radius: f64,
    h: f64,
    cells: Vec<Cell>,
}

impl DiscGrid2D {
    pub fn from_fn(radius: f64, h: f64, f: impl Fn(Point2) -> f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("cell size must be positive, got {h}")));
        }
        let k = (radius / h).ceil() as i32 + 1;
        let mut cells = Vec::new();
        for i in -k..k {
            for j in -k..k {
                let c = Self::center_of(h, i, j);
                if c.norm() < radius {
                    let value = f(c);
                    if !value.is_finite() {
                        return Err(Error::InvalidInput(format!("non-finite sample at ({}, {})", c.x, c.y)));
                    }
                    cells.push(Cell { i, j, value });
                }
            }
        }
        Ok(DiscGrid2D { radius, h, cells })
    }

    /// Grid with `k` cells per radius, i.e. `h = R/k`.
    pub fn with_cells_per_radius(radius: f64, k: usize, f: impl Fn(Point2) -> f64) -> Result<Self> {
        Self::from_fn(radius, radius / k as f64, f)
    }

    fn center_of(h: f64, i: i32, j: i32) -> Point2 {
        Point2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn center(&self, cell: &Cell) -> Point2 {
        Self::center_of(self.h, cell.i, cell.j)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.value)
    }

    /// Same cell layout with new values, given in storage order.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.cells.len() {
            return Err(Error::InvalidInput(format!("expected {} values, got {}", self.cells.len(), values.len())));
        }
        let cells = self.cells.iter().zip(values).map(|(c, value)| Cell { value, ..*c }).collect();
        Ok(DiscGrid2D { cells, ..*self })
    }

    /// Same values with the cells enumerated in a different order. Only the
    /// sums are order-independent, so this is used for symmetry checks.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let cells = order.iter().map(|&k| self.cells[k]).collect();
        DiscGrid2D { cells, ..*self }
    }

    /// `∫ u^p dx` by the midpoint rule.
    pub fn power_sum(&self, p: i32) -> f64 {
        let area = self.h * self.h;
        self.values().map(|v| v.abs().powi(p)).sum::<f64>() * area
    }
}

struct PairData {
    centers: Vec<Point2>,
    norms_sq: Vec<f64>,
    weights: Vec<f64>,
}

fn pair_data(u: &DiscGrid2D) -> PairData {
    let centers: Vec<Point2> = u.cells.iter().map(|c| u.center(c)).collect();
    let norms_sq = centers.iter().map(|c| c.norm_sq()).collect();
    let weights = u.cells.iter().map(|c| c.value * c.value).collect();
    PairData { centers, norms_sq, weights }
}

fn row_sum(data: &PairData, i: usize, r_sq: f64) -> f64 {
    let wi = data.weights[i];
    if wi == 0.0 {
        return 0.0;
    }
    let ci = data.centers[i];
    let xi = data.norms_sq[i];
    let mut acc = 0.0;
    for j in (i + 1)..data.centers.len() {
        let wj = data.weights[j];
        if wj == 0.0 {
            continue;
        }
        acc += green_from_parts(xi, data.norms_sq[j], ci.dist_sq(data.centers[j]), r_sq) * wj;
    }
    acc * wi
}

/// Midpoint rule for `∬ G(x, y) u(x)² u(y)² dx dy` over all ordered pairs of
/// distinct cells. The omitted self-pairs bias the sum low by
/// `O(h² ln(1/h))` relative.
pub fn double_energy_2d(u: &DiscGrid2D) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let data = pair_data(u);
    let r_sq = u.radius * u.radius;
    let half: f64 = (0..data.centers.len()).into_par_iter().map(|i| row_sum(&data, i, r_sq)).sum();
    Ok(2.0 * half * u.h.powi(4))
}

/// Single-threaded twin of [`double_energy_2d`], used to check that the
/// parallel partition does not change the result.
pub fn double_energy_2d_serial(u: &DiscGrid2D) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let data = pair_data(u);
    let r_sq = u.radius * u.radius;
    let half: f64 = (0..data.centers.len()).map(|i| row_sum(&data, i, r_sq)).sum();
    Ok(2.0 * half * u.h.powi(4))
}

/// `∫ G(x, y) u(y)² dy` at a fixed `x` by the midpoint rule, skipping a cell
/// whose center coincides with `x`.
pub fn potential_2d(u: &DiscGrid2D, x: Point2) -> Result<f64> {
    if x.norm() >= u.radius {
        return Err(Error::OutsideDisc { norm: x.norm(), radius: u.radius });
    }
    let r_sq = u.radius * u.radius;
    let x_sq = x.norm_sq();
    let sum: f64 = u
        .cells
        .iter()
        .filter_map(|c| {
            let y = u.center(c);
            let d_sq = x.dist_sq(y);
            (d_sq.sqrt() >= COINCIDENCE_TOL * u.radius)
                .then(|| green_from_parts(x_sq, y.norm_sq(), d_sq, r_sq) * c.value * c.value)
        })
        .sum();
    Ok(sum * u.h * u.h)
}

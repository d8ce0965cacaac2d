//! Densities tabulated on a grid, normalized by the trapezoid rule.

use crate::{Error, Result};

/// Evenly spaced grid of `len` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (len - 1) as f64;
            (0..len).map(|i| if i + 1 == len { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

/// Trapezoid integral of `values` over `grid`.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
        .sum()
}

/// A normalized density on a strictly increasing grid. Between grid points the
/// density is linear; outside the grid it is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridDensity {
    /// Normalizes nonnegative `values` on `grid`.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Grid(format!(
                "need at least two grid points and matching values, got {} and {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::Grid("grid must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Grid("density values must be finite and nonnegative".into()));
        }
        let mass = trapezoid(&grid, &values);
        if !(mass > 0.0) {
            return Err(Error::Grid("density has zero mass on the grid".into()));
        }
        let density: Vec<f64> = values.iter().map(|v| v / mass).collect();
        let mut cumulative = Vec::with_capacity(grid.len());
        cumulative.push(0.0);
        for i in 1..grid.len() {
            let cell = 0.5 * (grid[i] - grid[i - 1]) * (density[i] + density[i - 1]);
            cumulative.push(cumulative[i - 1] + cell);
        }
        Ok(Self { grid, density, cumulative })
    }

    /// Normalizes `exp(log_values)`, shifting by the maximum first so large
    /// log values do not overflow. `-inf` entries are zero density.
    pub fn from_log(grid: Vec<f64>, log_values: &[f64]) -> Result<Self> {
        let top = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Grid("log density is not finite anywhere on the grid".into()));
        }
        let values = log_values.iter().map(|v| (v - top).exp()).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Trapezoid mass; equals 1 up to roundoff.
    pub fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Density at `x` by linear interpolation; zero off the grid.
    pub fn pdf(&self, x: f64) -> f64 {
        match self.cell(x) {
            None => 0.0,
            Some(i) => {
                let (x0, x1) = (self.grid[i], self.grid[i + 1]);
                let w = (x - x0) / (x1 - x0);
                self.density[i] * (1.0 - w) + self.density[i + 1] * w
            }
        }
    }

    /// Exact CDF of the piecewise-linear density.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= *self.grid.last().unwrap() {
            return 1.0;
        }
        let i = self.cell(x).unwrap();
        let dx = x - self.grid[i];
        let partial = dx * (self.density[i] + self.pdf(x)) * 0.5;
        ((self.cumulative[i] + partial) / self.mass()).min(1.0)
    }

    /// Inverse CDF by solving the quadratic within the containing cell.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.mass();
        let i = match self.cumulative.partition_point(|c| *c < target) {
            0 => return self.grid[0],
            i if i >= self.grid.len() => return *self.grid.last().unwrap(),
            i => i - 1,
        };
        let need = target - self.cumulative[i];
        let h = self.grid[i + 1] - self.grid[i];
        let f0 = self.density[i];
        let slope = (self.density[i + 1] - f0) / h;
        // Solve f0 t + slope t^2 / 2 = need for t in [0, h].
        let t = if slope.abs() * h < 1e-12 * f0.max(1e-300) {
            if f0 > 0.0 { need / f0 } else { 0.0 }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * need).max(0.0);
            2.0 * need / (f0 + disc.sqrt())
        };
        self.grid[i] + t.clamp(0.0, h)
    }

    /// Mean under the piecewise-linear density.
    pub fn mean(&self) -> f64 {
        self.moment(|x| x)
    }

    /// Standard deviation under the piecewise-linear density.
    pub fn sd(&self) -> f64 {
        let m = self.mean();
        self.moment(|x| (x - m) * (x - m)).sqrt()
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.grid.iter().zip(&self.density).map(|(x, d)| f(*x) * d).collect();
        trapezoid(&self.grid, &vals) / self.mass()
    }

    /// Grid point with the largest density.
    pub fn mode(&self) -> f64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, d)| if *d > best.1 { (i, *d) } else { best });
        self.grid[i]
    }

    /// Total-variation distance ½∫|f − g| against another density evaluated on
    /// this grid.
    pub fn total_variation(&self, other: impl Fn(f64) -> f64) -> f64 {
        let diff: Vec<f64> = self.grid.iter().zip(&self.density).map(|(x, d)| (d - other(*x)).abs()).collect();
        0.5 * trapezoid(&self.grid, &diff)
    }

    fn cell(&self, x: f64) -> Option<usize> {
        let last = self.grid.len() - 1;
        if !(x >= self.grid[0] && x <= self.grid[last]) {
            return None;
        }
        let i = self.grid.partition_point(|g| *g <= x);
        Some(i.saturating_sub(1).min(last - 1))
    }
}

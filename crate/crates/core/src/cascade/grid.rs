use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid on `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(241, 6.0)
    }
}

impl GridSpec {
    /// `n × n` nodes on `[-half_width, half_width]²`.
    pub fn square(n: usize, half_width: f64) -> Self {
        Self {
            nx: n,
            ny: n,
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 || self.ny < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 4 nodes per axis, got {}×{}",
                self.nx, self.ny
            )));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::InvalidParameter(
                "grid bounds must be increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.hy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }
}

/// Values of a function on a [`GridSpec`] at one time; `values[i * ny + j]`
/// holds the value at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            let x = grid.x(i);
            for j in 0..grid.ny {
                values.push(f(x, grid.y(j)));
            }
        }
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.values.len() != other.values.len() {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Sup-norm over the nodes with `|x|, |y| ≤ half_width`.
    pub fn sup_on_probe(&self, half_width: f64) -> f64 {
        let g = &self.grid;
        let mut m = 0.0f64;
        for i in 0..g.nx {
            if g.x(i).abs() > half_width + 1e-12 {
                continue;
            }
            for j in 0..g.ny {
                if g.y(j).abs() <= half_width + 1e-12 {
                    m = m.max(self.at(i, j).abs());
                }
            }
        }
        m
    }

    /// `(∂_x, ∂_y)`: central differences inside, second-order one-sided at edges.
    pub fn gradient(&self) -> (GridFunction, GridFunction) {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let v = &self.values;
        let mut dx = vec![0.0; g.len()];
        let mut dy = vec![0.0; g.len()];

        let ix = 0.5 / g.hx();
        for j in 0..ny {
            dx[j] = (-3.0 * v[j] + 4.0 * v[ny + j] - v[2 * ny + j]) * ix;
        }
        for i in 1..nx - 1 {
            let (lo, mid, hi) = ((i - 1) * ny, i * ny, (i + 1) * ny);
            for j in 0..ny {
                dx[mid + j] = (v[hi + j] - v[lo + j]) * ix;
            }
        }
        let (a, b, c) = ((nx - 1) * ny, (nx - 2) * ny, (nx - 3) * ny);
        for j in 0..ny {
            dx[a + j] = (3.0 * v[a + j] - 4.0 * v[b + j] + v[c + j]) * ix;
        }

        let iy = 0.5 / g.hy();
        for i in 0..nx {
            let row = &v[i * ny..(i + 1) * ny];
            let out = &mut dy[i * ny..(i + 1) * ny];
            out[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) * iy;
            for j in 1..ny - 1 {
                out[j] = (row[j + 1] - row[j - 1]) * iy;
            }
            out[ny - 1] = (3.0 * row[ny - 1] - 4.0 * row[ny - 2] + row[ny - 3]) * iy;
        }
        (
            GridFunction {
                grid: g,
                values: dx,
            },
            GridFunction {
                grid: g,
                values: dy,
            },
        )
    }

    /// Bilinear interpolation; points outside the grid are clamped to it.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let fx = ((x - g.x_min) / g.hx()).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((y - g.y_min) / g.hy()).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - tx) * ((1.0 - ty) * v00 + ty * v01) + tx * ((1.0 - ty) * v10 + ty * v11)
    }

    /// `max |v(x, y) - v(y, x)|`; requires a square, symmetric grid.
    pub fn swap_asymmetry(&self) -> Result<f64> {
        let g = &self.grid;
        if g.nx != g.ny || g.x_min != g.y_min || g.x_max != g.y_max {
            return Err(Error::GridMismatch(
                "swap symmetry needs a square grid".into(),
            ));
        }
        let mut m = 0.0f64;
        for i in 0..g.nx {
            for j in 0..i {
                m = m.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        Ok(m)
    }

    pub fn add_assign(&mut self, other: &GridFunction) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_exact_on_quadratics() {
        let g = GridSpec::square(21, 2.0);
        let f = GridFunction::from_fn(g, |x, y| 3.0 * x * x - x * y + 0.5 * y * y + 2.0);
        let (dx, dy) = f.gradient();
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, y) = (g.x(i), g.y(j));
                assert!((dx.at(i, j) - (6.0 * x - y)).abs() < 1e-12);
                assert!((dy.at(i, j) - (-x + y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sample_reproduces_bilinear() {
        let g = GridSpec::square(11, 1.0);
        let f = GridFunction::from_fn(g, |x, y| 1.0 + 2.0 * x - y + x * y);
        let v = f.sample(0.13, -0.41);
        assert!((v - (1.0 + 0.26 + 0.41 - 0.13 * 0.41)).abs() < 1e-12);
    }

    #[test]
    fn probe_norm_ignores_far_nodes() {
        let g = GridSpec::square(13, 6.0);
        let f = GridFunction::from_fn(g, |x, y| x * x + y * y);
        assert_eq!(f.sup_on_probe(1.0), 2.0);
        assert_eq!(f.max_abs(), 72.0);
    }

    #[test]
    fn mismatched_grids_detected() {
        let a = GridFunction::zeros(GridSpec::square(5, 1.0));
        let b = GridFunction::zeros(GridSpec::square(6, 1.0));
        assert!(a.ensure_same_grid(&b).is_err());
    }
}

//! One backward time step of `∂_t v + ½Δv + S = 0`.
//!
//! The implicit step is backward Euler with the operator split into its two
//! axis factors, `(I - r_x δ_xx)(I - r_y δ_yy) v_new = v_old + dt S` with
//! `r = dt / (2h²)`: unconditionally stable and two tridiagonal sweeps per
//! step. The extra `r_x r_y δ_xx δ_yy` term vanishes on functions that are
//! quadratic in `(x, y)`, which covers every level of both examples.

use rayon::prelude::*;

use super::grid::{GridFunction, GridSpec};

/// Boundary row of a 1-D system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EdgeRow {
    /// Mirror ghost node: `∂v/∂n = 0`.
    Neumann,
    /// Identity row; the right-hand side carries the value.
    Dirichlet,
}

/// Thomas-algorithm factorisation of `I - r δ_xx` on `n` nodes.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    lower: Vec<f64>,
    c_prime: Vec<f64>,
    inv_den: Vec<f64>,
}

impl Tridiagonal {
    pub(crate) fn new(n: usize, r: f64, edge: EdgeRow) -> Self {
        let mut lower = vec![-r; n];
        let mut diag = vec![1.0 + 2.0 * r; n];
        let mut upper = vec![-r; n];
        match edge {
            EdgeRow::Neumann => {
                upper[0] = -2.0 * r;
                lower[n - 1] = -2.0 * r;
            }
            EdgeRow::Dirichlet => {
                diag[0] = 1.0;
                upper[0] = 0.0;
                diag[n - 1] = 1.0;
                lower[n - 1] = 0.0;
            }
        }
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        let mut c_prime = vec![0.0; n];
        let mut inv_den = vec![0.0; n];
        inv_den[0] = 1.0 / diag[0];
        c_prime[0] = upper[0] * inv_den[0];
        for i in 1..n {
            let den = diag[i] - lower[i] * c_prime[i - 1];
            inv_den[i] = 1.0 / den;
            c_prime[i] = upper[i] * inv_den[i];
        }
        Self {
            lower,
            c_prime,
            inv_den,
        }
    }

    /// Solves in place along a contiguous line.
    pub(crate) fn solve_line(&self, d: &mut [f64]) {
        let n = d.len();
        d[0] *= self.inv_den[0];
        for i in 1..n {
            d[i] = (d[i] - self.lower[i] * d[i - 1]) * self.inv_den[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.c_prime[i] * d[i + 1];
        }
    }

    /// Solves every line along the slow (row) index of a row-major block of
    /// `width` columns at once.
    pub(crate) fn solve_rows(&self, d: &mut [f64], width: usize) {
        let n = d.len() / width;
        for v in &mut d[..width] {
            *v *= self.inv_den[0];
        }
        for i in 1..n {
            let (head, tail) = d.split_at_mut(i * width);
            let prev = &head[(i - 1) * width..];
            let cur = &mut tail[..width];
            let (l, inv) = (self.lower[i], self.inv_den[i]);
            for (c, p) in cur.iter_mut().zip(prev) {
                *c = (*c - l * p) * inv;
            }
        }
        for i in (0..n - 1).rev() {
            let (head, tail) = d.split_at_mut((i + 1) * width);
            let cur = &mut head[i * width..];
            let next = &tail[..width];
            let cp = self.c_prime[i];
            for (c, nx) in cur.iter_mut().zip(next) {
                *c -= cp * nx;
            }
        }
    }
}

/// Split backward-Euler solver for a fixed grid, step and boundary type.
#[derive(Debug, Clone)]
pub(crate) struct ImplicitStepper {
    grid: GridSpec,
    ry: f64,
    x_sys: Tridiagonal,
    y_sys: Tridiagonal,
    edge: EdgeRow,
}

impl ImplicitStepper {
    pub(crate) fn new(grid: GridSpec, dt: f64, edge: EdgeRow) -> Self {
        let rx = dt / (2.0 * grid.hx() * grid.hx());
        let ry = dt / (2.0 * grid.hy() * grid.hy());
        Self {
            grid,
            ry,
            x_sys: Tridiagonal::new(grid.nx, rx, edge),
            y_sys: Tridiagonal::new(grid.ny, ry, edge),
            edge,
        }
    }

    /// Overwrites `rhs` with the new time slice. `boundary` supplies Dirichlet
    /// values at the new time and is only read for Dirichlet steppers.
    pub(crate) fn solve(
        &self,
        rhs: &mut GridFunction,
        boundary: Option<&(dyn Fn(f64, f64) -> f64 + Sync)>,
    ) {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let bc = match (self.edge, boundary) {
            (EdgeRow::Dirichlet, Some(b)) => Some(b),
            (EdgeRow::Dirichlet, None) => panic!("Dirichlet stepper needs boundary values"),
            _ => None,
        };
        let v = &mut rhs.values;

        if let Some(b) = bc {
            // Intermediate boundary data: (I - r_y δ_yy) g on the two x-edges.
            for &i in &[0, nx - 1] {
                let x = g.x(i);
                let gv: Vec<f64> = (0..ny).map(|j| b(x, g.y(j))).collect();
                let row = &mut v[i * ny..(i + 1) * ny];
                row[0] = gv[0];
                row[ny - 1] = gv[ny - 1];
                for j in 1..ny - 1 {
                    row[j] = gv[j] - self.ry * (gv[j - 1] - 2.0 * gv[j] + gv[j + 1]);
                }
            }
        }
        self.x_sys.solve_rows(v, ny);

        v.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
            if let Some(b) = bc {
                let x = g.x(i);
                if i == 0 || i == nx - 1 {
                    for (j, r) in row.iter_mut().enumerate() {
                        *r = b(x, g.y(j));
                    }
                    return;
                }
                row[0] = b(x, g.y(0));
                row[ny - 1] = b(x, g.y(ny - 1));
            }
            self.y_sys.solve_line(row);
        });
    }
}

/// `½Δ_h v` with mirror ghosts at every edge.
pub(crate) fn half_laplacian_neumann(v: &GridFunction, out: &mut [f64]) {
    let g = v.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (cx, cy) = (0.5 / (g.hx() * g.hx()), 0.5 / (g.hy() * g.hy()));
    let vals = &v.values;
    out.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
        let im = if i == 0 { 1 } else { i - 1 };
        let ip = if i == nx - 1 { nx - 2 } else { i + 1 };
        for (j, o) in row.iter_mut().enumerate() {
            let jm = if j == 0 { 1 } else { j - 1 };
            let jp = if j == ny - 1 { ny - 2 } else { j + 1 };
            let c = vals[i * ny + j];
            *o = cx * (vals[im * ny + j] - 2.0 * c + vals[ip * ny + j])
                + cy * (vals[i * ny + jm] - 2.0 * c + vals[i * ny + jp]);
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::needless_range_loop)]
    fn dense_solve(n: usize, r: f64, edge: EdgeRow, d: &[f64]) -> Vec<f64> {
        // Gaussian elimination on the explicit matrix.
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 1.0 + 2.0 * r;
            if i > 0 {
                a[i][i - 1] = -r;
            }
            if i + 1 < n {
                a[i][i + 1] = -r;
            }
        }
        match edge {
            EdgeRow::Neumann => {
                a[0][1] = -2.0 * r;
                a[n - 1][n - 2] = -2.0 * r;
            }
            EdgeRow::Dirichlet => {
                a[0] = vec![0.0; n];
                a[0][0] = 1.0;
                a[n - 1] = vec![0.0; n];
                a[n - 1][n - 1] = 1.0;
            }
        }
        let mut b = d.to_vec();
        for k in 0..n {
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn thomas_matches_dense_elimination() {
        let d: Vec<f64> = (0..9)
            .map(|i| (i as f64 * 0.7).sin() + 0.1 * i as f64)
            .collect();
        for edge in [EdgeRow::Neumann, EdgeRow::Dirichlet] {
            let t = Tridiagonal::new(9, 0.8, edge);
            let mut x = d.clone();
            t.solve_line(&mut x);
            let y = dense_solve(9, 0.8, edge, &d);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn row_solve_matches_line_solve() {
        let t = Tridiagonal::new(7, 1.3, EdgeRow::Neumann);
        let width = 3;
        let d: Vec<f64> = (0..21).map(|k| (k as f64).cos()).collect();
        let mut block = d.clone();
        t.solve_rows(&mut block, width);
        for col in 0..width {
            let mut line: Vec<f64> = (0..7).map(|i| d[i * width + col]).collect();
            t.solve_line(&mut line);
            for i in 0..7 {
                assert!((line[i] - block[i * width + col]).abs() < 1e-14);
            }
        }
    }
}

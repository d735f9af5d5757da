//! Forced two-dimensional heat equation on the unit square with zero
//! Dirichlet boundaries and a known solution.
//!
//! `u_t = kx u_xx + ky u_yy + b(t, x, y)` with
//! `u(t, x, y) = sin^2(pi x) sin^2(pi y) cos^2(pi t)`, discretized with
//! second-order centered differences on the `nx x ny` interior points of a
//! uniform grid. Unknown `(i, j)` is stored at index `i + nx j`.

use std::f64::consts::PI;

use crate::error::CallbackError;
use crate::integrator::{IntegratorPreconditioner, JacFn, JvFn, RhsFn};
use crate::linsol::PrecSide;
use crate::matrix::DenseMatrix;
use crate::vector::SerialVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heat2D {
    pub nx: usize,
    pub ny: usize,
    pub kx: f64,
    pub ky: f64,
}

impl Heat2D {
    pub fn new(nx: usize, ny: usize) -> Self {
        Heat2D {
            nx,
            ny,
            kx: 1.0,
            ky: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.nx + 1) as f64
    }

    pub fn dy(&self) -> f64 {
        1.0 / (self.ny + 1) as f64
    }

    fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        ((i + 1) as f64 * self.dx(), (j + 1) as f64 * self.dy())
    }

    pub fn exact_at(t: f64, x: f64, y: f64) -> f64 {
        let (sx, sy, ct) = ((PI * x).sin(), (PI * y).sin(), (PI * t).cos());
        sx * sx * sy * sy * ct * ct
    }

    /// `du/dt` of the exact solution.
    pub fn exact_rate_at(t: f64, x: f64, y: f64) -> f64 {
        let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
        -2.0 * PI * sx * sx * sy * sy * (PI * t).sin() * (PI * t).cos()
    }

    pub fn forcing(&self, t: f64, x: f64, y: f64) -> f64 {
        let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
        let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
        let (st, ct) = ((PI * t).sin(), (PI * t).cos());
        -2.0 * PI * sx * sx * sy * sy * st * ct
            - self.kx * 2.0 * PI * PI * (cx * cx - sx * sx) * sy * sy * ct * ct
            - self.ky * 2.0 * PI * PI * (cy * cy - sy * sy) * sx * sx * ct * ct
    }

    pub fn exact(&self, t: f64) -> SerialVector {
        let mut u = vec![0.0; self.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.coords(i, j);
                u[i + self.nx * j] = Self::exact_at(t, x, y);
            }
        }
        SerialVector::new(u).expect("nonempty grid")
    }

    /// `out = L v` for the discrete diffusion operator `L`.
    pub fn apply_laplacian(&self, v: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let cx = self.kx / (self.dx() * self.dx());
        let cy = self.ky / (self.dy() * self.dy());
        for j in 0..ny {
            for i in 0..nx {
                let k = i + nx * j;
                let c = v[k];
                let w = if i > 0 { v[k - 1] } else { 0.0 };
                let e = if i + 1 < nx { v[k + 1] } else { 0.0 };
                let s = if j > 0 { v[k - nx] } else { 0.0 };
                let n = if j + 1 < ny { v[k + nx] } else { 0.0 };
                out[k] = cx * (w - 2.0 * c + e) + cy * (s - 2.0 * c + n);
            }
        }
    }

    pub fn eval_rhs(&self, t: f64, u: &[f64], f: &mut [f64]) {
        self.apply_laplacian(u, f);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.coords(i, j);
                f[i + self.nx * j] += self.forcing(t, x, y);
            }
        }
    }

    pub fn rhs(&self) -> RhsFn<SerialVector> {
        let p = *self;
        Box::new(move |t, u: &SerialVector, f: &mut SerialVector| {
            p.eval_rhs(t, u.as_slice(), f.as_mut_slice());
            Ok(())
        })
    }

    /// Diffusion part only.
    pub fn diffusion_rhs(&self) -> RhsFn<SerialVector> {
        let p = *self;
        Box::new(move |_, u: &SerialVector, f: &mut SerialVector| {
            p.apply_laplacian(u.as_slice(), f.as_mut_slice());
            Ok(())
        })
    }

    /// Forcing part only.
    pub fn forcing_rhs(&self) -> RhsFn<SerialVector> {
        let p = *self;
        Box::new(move |t, _: &SerialVector, f: &mut SerialVector| {
            let f = f.as_mut_slice();
            for j in 0..p.ny {
                for i in 0..p.nx {
                    let (x, y) = p.coords(i, j);
                    f[i + p.nx * j] = p.forcing(t, x, y);
                }
            }
            Ok(())
        })
    }

    /// Exact Jacobian-vector product; the operator is linear.
    pub fn jac_times(&self) -> JvFn<SerialVector> {
        let p = *self;
        Box::new(move |v: &SerialVector, jv: &mut SerialVector, _, _, _| {
            p.apply_laplacian(v.as_slice(), jv.as_mut_slice());
            Ok(())
        })
    }

    /// Dense Jacobian, for small grids only.
    pub fn jacobian(&self) -> JacFn<SerialVector> {
        let p = *self;
        Box::new(move |_, _, _, j: &mut DenseMatrix| {
            let n = p.len();
            let mut e = vec![0.0; n];
            let mut col = vec![0.0; n];
            for k in 0..n {
                e[k] = 1.0;
                p.apply_laplacian(&e, &mut col);
                e[k] = 0.0;
                for (i, &c) in col.iter().enumerate() {
                    j.set(i, k, c);
                }
            }
            Ok(())
        })
    }

    /// Largest absolute deviation from the exact solution at time `t`.
    pub fn max_error(&self, t: f64, u: &[f64]) -> f64 {
        let exact = self.exact(t);
        u.iter()
            .zip(exact.as_slice())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Orthonormal sine transform of size `n`, symmetric and its own inverse.
fn sine_matrix(n: usize) -> Vec<f64> {
    let scale = (2.0 / (n + 1) as f64).sqrt();
    let mut s = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            s[j * n + k] = scale * (PI * ((j + 1) * (k + 1)) as f64 / (n + 1) as f64).sin();
        }
    }
    s
}

/// Eigenvalues of the 1-D second difference `k/h^2 (1, -2, 1)` with zero
/// boundaries.
fn second_difference_eigenvalues(n: usize, k: f64, h: f64) -> Vec<f64> {
    (1..=n)
        .map(|m| {
            let s = (PI * m as f64 / (2 * (n + 1)) as f64).sin();
            -4.0 * k / (h * h) * s * s
        })
        .collect()
}

/// Solves `(I - gamma L) z = r` exactly by separable sine transforms.
///
/// `L` has constant coefficients and zero Dirichlet boundaries, so it is
/// diagonalized by the product sine basis. Each application costs four dense
/// transforms of the grid.
pub struct SineTransformPreconditioner {
    nx: usize,
    ny: usize,
    sx: Vec<f64>,
    sy: Vec<f64>,
    lx: Vec<f64>,
    ly: Vec<f64>,
    gamma: f64,
    work: Vec<f64>,
    hat: Vec<f64>,
}

impl SineTransformPreconditioner {
    pub fn new(p: &Heat2D) -> Self {
        SineTransformPreconditioner {
            nx: p.nx,
            ny: p.ny,
            sx: sine_matrix(p.nx),
            sy: sine_matrix(p.ny),
            lx: second_difference_eigenvalues(p.nx, p.kx, p.dx()),
            ly: second_difference_eigenvalues(p.ny, p.ky, p.dy()),
            gamma: 0.0,
            work: vec![0.0; p.len()],
            hat: vec![0.0; p.len()],
        }
    }

    /// `out = (Sy x Sx) v`, with `v` indexed `i + nx j`.
    fn transform(&mut self, v: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        // along x: work[k + nx j] = sum_i sx[k, i] v[i + nx j]
        for j in 0..ny {
            let row = &v[nx * j..nx * (j + 1)];
            for k in 0..nx {
                let s = &self.sx[k * nx..(k + 1) * nx];
                self.work[k + nx * j] = s.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        // along y: out[k + nx l] = sum_j sy[l, j] work[k + nx j]
        out.iter_mut().for_each(|o| *o = 0.0);
        for l in 0..ny {
            for j in 0..ny {
                let c = self.sy[l * ny + j];
                let src = &self.work[nx * j..nx * (j + 1)];
                let dst = &mut out[nx * l..nx * (l + 1)];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
    }

    /// Applies `(I - gamma L)^{-1}` to `r`.
    pub fn apply(&mut self, gamma: f64, r: &[f64], z: &mut [f64]) {
        let mut hat = std::mem::take(&mut self.hat);
        self.transform(r, &mut hat);
        for j in 0..self.ny {
            for i in 0..self.nx {
                hat[i + self.nx * j] /= 1.0 - gamma * (self.lx[i] + self.ly[j]);
            }
        }
        self.transform(&hat, z);
        self.hat = hat;
    }
}

impl IntegratorPreconditioner<SerialVector> for SineTransformPreconditioner {
    fn setup(
        &mut self,
        _t: f64,
        _y: &SerialVector,
        _fy: &SerialVector,
        _jok: bool,
        gamma: f64,
    ) -> Result<bool, CallbackError> {
        self.gamma = gamma;
        Ok(true)
    }

    fn solve(
        &mut self,
        _t: f64,
        _y: &SerialVector,
        _fy: &SerialVector,
        r: &SerialVector,
        z: &mut SerialVector,
        gamma: f64,
        _delta: f64,
        _side: PrecSide,
    ) -> Result<(), CallbackError> {
        self.apply(gamma, r.as_slice(), z.as_mut_slice());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_makes_the_exact_solution_satisfy_the_pde() {
        // u_t - (u_xx + u_yy) = b, with derivatives from central differences
        let p = Heat2D::new(4, 4);
        let (t, x, y, h) = (0.3, 0.37, 0.61, 1e-4);
        let u = |t: f64, x: f64, y: f64| Heat2D::exact_at(t, x, y);
        let ut = (u(t + h, x, y) - u(t - h, x, y)) / (2.0 * h);
        let uxx = (u(t, x + h, y) - 2.0 * u(t, x, y) + u(t, x - h, y)) / (h * h);
        let uyy = (u(t, x, y + h) - 2.0 * u(t, x, y) + u(t, x, y - h)) / (h * h);
        assert!((ut - uxx - uyy - p.forcing(t, x, y)).abs() < 1e-5);
        assert!((Heat2D::exact_rate_at(t, x, y) - ut).abs() < 1e-6);
    }

    #[test]
    fn laplacian_matches_dense_stencil() {
        let p = Heat2D::new(3, 2);
        let v: Vec<f64> = (0..6).map(|k| (k as f64 * 0.7).sin()).collect();
        let mut out = vec![0.0; 6];
        p.apply_laplacian(&v, &mut out);
        let (cx, cy) = (1.0 / p.dx().powi(2), 1.0 / p.dy().powi(2));
        // interior-corner point (1, 0): west, east and north neighbours
        let expect = cx * (v[0] - 2.0 * v[1] + v[2]) + cy * (-2.0 * v[1] + v[4]);
        assert!((out[1] - expect).abs() < 1e-9 * expect.abs().max(1.0));
    }

    #[test]
    fn sine_preconditioner_inverts_the_newton_matrix() {
        let p = Heat2D::new(5, 4);
        let mut prec = SineTransformPreconditioner::new(&p);
        let gamma = 0.013;
        let z0: Vec<f64> = (0..p.len())
            .map(|k| ((k * k) as f64 * 0.31).cos())
            .collect();
        let mut lz = vec![0.0; p.len()];
        p.apply_laplacian(&z0, &mut lz);
        let r: Vec<f64> = z0.iter().zip(&lz).map(|(z, l)| z - gamma * l).collect();
        let mut z = vec![0.0; p.len()];
        prec.apply(gamma, &r, &mut z);
        for (a, b) in z.iter().zip(&z0) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

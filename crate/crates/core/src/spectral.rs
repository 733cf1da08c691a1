//! Collocation discretization of the transfer operator
//!
//! ```text
//! H_{t,v}[f](x) = (1 + x)^{-2t} sum_{a >= 0} 2^{a(v - t)} f(2^-a / (1 + x))
//! ```
//!
//! on Chebyshev-Lobatto nodes of `[0, 1]`, its dominant eigenpair by power
//! iteration, and finite-difference estimates of `-dλ/dt` and `dλ/dv` at `(1, 0)`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default truncation tolerance for the branch sum.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;
/// Successive eigenvalue estimates closer than this stop the power iteration.
pub const EIGEN_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 10_000;

/// Chebyshev-Lobatto nodes mapped to `[0, 1]`, with barycentric
/// interpolation weights and Clenshaw-Curtis quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    quad: Vec<f64>,
}

impl CollocationGrid {
    pub fn chebyshev_lobatto(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("collocation grid needs at least 2 nodes"));
        }
        let m = n - 1;
        let theta = |j: usize| std::f64::consts::PI * j as f64 / m as f64;
        let nodes = (0..n).map(|j| 0.5 * (1.0 - theta(j).cos())).collect();
        let bary = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Ok(CollocationGrid { nodes, bary, quad: clenshaw_curtis(m) })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values at `x` of all Lagrange cardinal functions of the grid.
    pub fn cardinal(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            out[j] = 1.0;
            return out;
        }
        let mut denom = 0.0;
        for (o, (&xj, &wj)) in out.iter_mut().zip(self.nodes.iter().zip(&self.bary)) {
            *o = wj / (x - xj);
            denom += *o;
        }
        out.iter_mut().for_each(|o| *o /= denom);
        out
    }

    /// Barycentric interpolation of node samples at `x`.
    pub fn interpolate(&self, samples: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.bary).zip(samples) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            num += wj * fj / d;
            den += wj / d;
        }
        num / den
    }

    /// Clenshaw-Curtis quadrature of node samples over `[0, 1]`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        self.quad.iter().zip(samples).map(|(w, f)| w * f).sum()
    }
}

/// Clenshaw-Curtis weights on `m + 1` nodes, scaled to the unit interval.
fn clenshaw_curtis(m: usize) -> Vec<f64> {
    let mf = m as f64;
    let mut w = vec![0.0; m + 1];
    if m == 1 {
        return vec![0.5, 0.5];
    }
    let end = if m.is_multiple_of(2) { 1.0 / (mf * mf - 1.0) } else { 1.0 / (mf * mf) };
    w[0] = end;
    w[m] = end;
    for (j, wj) in w.iter_mut().enumerate().take(m).skip(1) {
        let theta = std::f64::consts::PI * j as f64 / mf;
        let mut v = 1.0;
        if m.is_multiple_of(2) {
            for k in 1..m / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (mf * theta).cos() / (mf * mf - 1.0);
        } else {
            for k in 1..=(m - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wj = 2.0 * v / mf;
    }
    // weights above integrate over [-1, 1]
    w.iter().map(|x| 0.5 * x).collect()
}

/// Smallest depth `A` such that the neglected branches `a > A` contribute
/// less than `tail_tol` for a function bounded by `sup_f`.
pub fn tail_depth(t: f64, v: f64, sup_f: f64, tail_tol: f64) -> Result<usize> {
    if !(t - v > 0.0) {
        return Err(Error::Divergent(t - v));
    }
    if !(tail_tol > 0.0) {
        return Err(invalid("tail tolerance must be positive"));
    }
    let ratio = 2f64.powf(v - t);
    let prefactor = if t >= 0.0 { 1.0 } else { 4f64.powf(-t) };
    let scale = sup_f.max(f64::MIN_POSITIVE) * prefactor / (1.0 - ratio);
    let mut depth = 0usize;
    let mut tail = scale * ratio;
    while tail >= tail_tol {
        depth += 1;
        tail *= ratio;
        if depth > 100_000 {
            return Err(invalid("tail depth exceeds 100000 branches"));
        }
    }
    Ok(depth)
}

/// Dense row-major matrix of the discretized operator together with its grid.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub t: f64,
    pub v: f64,
    pub a_max: usize,
    pub grid: CollocationGrid,
    data: Vec<f64>,
}

impl TransferMatrix {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n() + col]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.n()).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Entry `(j, l)` is `(1 + x_j)^{-2t} sum_{a <= a_max} 2^{a(v - t)} L_l(2^-a / (1 + x_j))`.
pub fn build_matrix(t: f64, v: f64, grid: &CollocationGrid, tail_tol: f64) -> Result<TransferMatrix> {
    use rayon::prelude::*;

    let a_max = tail_depth(t, v, 1.0, tail_tol)?;
    let n = grid.len();
    let rows: Vec<Vec<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&x| {
            let pref = (1.0 + x).powf(-2.0 * t);
            let mut row = vec![0.0; n];
            for a in 0..=a_max {
                let weight = pref * 2f64.powf(a as f64 * (v - t));
                let y = 2f64.powi(-(a as i32)) / (1.0 + x);
                for (r, l) in row.iter_mut().zip(grid.cardinal(y)) {
                    *r += weight * l;
                }
            }
            row
        })
        .collect();
    Ok(TransferMatrix { t, v, a_max, grid: grid.clone(), data: rows.concat() })
}

/// Dominant eigenpair of a discretized operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub t: f64,
    pub v: f64,
    pub n: usize,
    pub a_max: usize,
    pub lambda: f64,
    pub nodes: Vec<f64>,
    /// Eigenfunction samples at the nodes, normalized to unit integral.
    pub eigenfunction: Vec<f64>,
    /// `max_j |(H phi)(x_j) - lambda phi(x_j)|`.
    pub residual: f64,
    pub iterations: usize,
}

impl SpectralResult {
    /// Largest absolute deviation of the eigenfunction from `f` at the nodes.
    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.eigenfunction).map(|(&x, &y)| (y - f(x)).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,value\n");
        for (x, y) in self.nodes.iter().zip(&self.eigenfunction) {
            s.push_str(&format!("{x:.17e},{y:.17e}\n"));
        }
        s
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Power iteration with Rayleigh-quotient eigenvalue estimates.
pub fn dominant_eigen(matrix: &TransferMatrix) -> Result<SpectralResult> {
    let n = matrix.n();
    let mut x = vec![1.0; n];
    let mut lambda = f64::NAN;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let y = matrix.apply(&x);
        let num: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        let next = num / den;
        let scale = sup_norm(&y);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::NonConvergence { iterations, lambda: next });
        }
        x = y.into_iter().map(|v| v / scale).collect();
        if (next - lambda).abs() < EIGEN_TOL {
            lambda = next;
            converged = true;
            break;
        }
        lambda = next;
    }
    if !converged {
        return Err(Error::NonConvergence { iterations, lambda });
    }
    let mass = matrix.grid.integrate(&x);
    let phi: Vec<f64> = x.iter().map(|v| v / mass).collect();
    let image = matrix.apply(&phi);
    let residual = image.iter().zip(&phi).map(|(h, p)| (h - lambda * p).abs()).fold(0.0, f64::max);
    Ok(SpectralResult {
        t: matrix.t,
        v: matrix.v,
        n,
        a_max: matrix.a_max,
        lambda,
        nodes: matrix.grid.nodes().to_vec(),
        eigenfunction: phi,
        residual,
        iterations,
    })
}

/// Builds the operator on an `n`-node grid and returns its dominant eigenpair.
pub fn eigen(t: f64, v: f64, n: usize, tail_tol: f64) -> Result<SpectralResult> {
    let grid = CollocationGrid::chebyshev_lobatto(n)?;
    dominant_eigen(&build_matrix(t, v, &grid, tail_tol)?)
}

/// Finite-difference estimates of `A = -dλ/dt` and `D = dλ/dv` at `(1, 0)`.
#[derive(Debug, Clone, Serialize)]
pub struct TaylorEstimates {
    #[serde(rename = "A_est")]
    pub a_est: f64,
    #[serde(rename = "D_est")]
    pub d_est: f64,
    pub fd_step: f64,
    pub richardson_order: u32,
    pub n: usize,
}

/// Central differences at steps `h` and `h/2` combined by one Richardson
/// extrapolation step, which cancels the `h^2` error term.
pub fn taylor_estimates(n: usize, fd_step: f64) -> Result<TaylorEstimates> {
    if !(1e-4..=1e-2).contains(&fd_step) {
        return Err(invalid(format!("fd_step {fd_step} outside [1e-4, 1e-2]")));
    }
    let grid = CollocationGrid::chebyshev_lobatto(n)?;
    let lambda = |t: f64, v: f64| -> Result<f64> {
        Ok(dominant_eigen(&build_matrix(t, v, &grid, DEFAULT_TAIL_TOL)?)?.lambda)
    };
    let central_t = |h: f64| -> Result<f64> { Ok((lambda(1.0 + h, 0.0)? - lambda(1.0 - h, 0.0)?) / (2.0 * h)) };
    let central_v = |h: f64| -> Result<f64> { Ok((lambda(1.0, h)? - lambda(1.0, -h)?) / (2.0 * h)) };
    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let dt = richardson(central_t(fd_step)?, central_t(fd_step / 2.0)?);
    let dv = richardson(central_v(fd_step)?, central_v(fd_step / 2.0)?);
    Ok(TaylorEstimates { a_est: -dt, d_est: dv, fd_step, richardson_order: 4, n })
}

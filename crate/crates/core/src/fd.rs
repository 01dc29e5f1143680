//! Finite-difference Sturm-Liouville solvers for the radial disk problem and
//! the half-line De Gennes oscillator.
//!
//! Both problems are discretized in weak (energy) form on a uniform vertex
//! grid: `Σ w_e (f_{i+1} - f_i)² + Σ c_i f_i² = μ Σ m_i f_i²` with lumped
//! masses `m_i`, which yields a symmetric tridiagonal pencil `A v = μ M v`.

use crate::error::{Error, Result};

const INVERSE_ITER_MAX: usize = 50;
const BISECTION_MAX: usize = 300;
/// Nodal amplitude next to the truncation point above which the half-line
/// domain is considered too short.
pub const TRUNCATION_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    pub spacing: f64,
}

impl Grid1D {
    pub fn new(left: f64, right: f64, count: usize) -> Result<Self> {
        if count < 16 {
            return Err(Error::InvalidParams(format!("grid needs at least 16 nodes, got {count}")));
        }
        if !(right > left) {
            return Err(Error::InvalidParams(format!("empty grid interval [{left}, {right}]")));
        }
        Ok(Grid1D {
            left,
            right,
            count,
            spacing: (right - left) / (count - 1) as f64,
        })
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.right
        } else {
            self.left + i as f64 * self.spacing
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    /// The grid with every cell halved (`2 count - 1` nodes).
    pub fn refined(&self) -> Self {
        Grid1D::new(self.left, self.right, 2 * self.count - 1).expect("refining a valid grid")
    }
}

/// Symmetric tridiagonal pencil over the free (non-Dirichlet) nodes.
#[derive(Clone, Debug)]
pub struct TridiagSystem {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub mass: Vec<f64>,
    /// On-site part of `diag` (potential plus Dirichlet anchors), kept apart
    /// so the energy form can be evaluated without cancellation.
    onsite: Vec<f64>,
    /// Grid index of the first free node.
    offset: usize,
    grid: Grid1D,
}

/// Lowest eigenpair of a single discretization.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Eigenvector on every grid node (zeros at Dirichlet nodes), positive,
    /// normalized to `Σ m_i v_i² = 1`.
    pub vector: Vec<f64>,
}

/// Richardson-combined result from the grids `count` and `2 count - 1`.
#[derive(Clone, Debug)]
pub struct FdSolution {
    pub lambda: f64,
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    /// Eigenvector on the coarse grid.
    pub eigvec: Vec<f64>,
    pub grid: Grid1D,
    /// Set when the eigenvector has not decayed near a truncation boundary.
    pub truncation_warning: bool,
}

impl TridiagSystem {
    /// `-(1/r)(r f')' + (n/r - βr/2)² f` on `[0, 1]`; Dirichlet at `r = 0` for
    /// `n > 0`, Neumann otherwise; Neumann at `r = 1`.
    pub fn disk(n: u32, beta: f64, grid: Grid1D) -> Result<Self> {
        if grid.left != 0.0 || grid.right != 1.0 {
            return Err(Error::InvalidParams("disk grid must span [0, 1]".into()));
        }
        let h = grid.spacing;
        let nf = f64::from(n);
        let count = grid.count;
        let offset = usize::from(n > 0);
        let q = |r: f64| {
            let v = nf / r - 0.5 * beta * r;
            v * v
        };
        let edge = |i: usize| (grid.node(i) + 0.5 * h) / h;
        let mut diag = Vec::with_capacity(count);
        let mut onsite = Vec::with_capacity(count);
        let mut mass = Vec::with_capacity(count);
        for i in offset..count {
            let r = grid.node(i);
            let (m, c) = if i == 0 {
                // n = 0: half cell [0, h/2], q(0) = 0.
                (h * h / 8.0, 0.0)
            } else if i + 1 == count {
                let m = 0.5 * h * (1.0 - 0.25 * h);
                (m, q(r) * m)
            } else {
                (r * h, q(r) * r * h)
            };
            // The edge to a removed Dirichlet node acts as an on-site anchor.
            let anchor = if i == 1 && offset == 1 { edge(0) } else { 0.0 };
            let left = if i > 0 { edge(i - 1) } else { 0.0 };
            let right = if i + 1 < count { edge(i) } else { 0.0 };
            diag.push(left + right + c);
            onsite.push(c + anchor);
            mass.push(m);
        }
        let offdiag = (offset..count - 1).map(|i| -edge(i)).collect();
        Ok(TridiagSystem {
            diag,
            offdiag,
            mass,
            onsite,
            offset,
            grid,
        })
    }

    /// `-u'' + (t + ξ)² u` on `[0, L]`; Neumann at 0, Dirichlet at `L`.
    pub fn degennes(xi: f64, grid: Grid1D) -> Result<Self> {
        if grid.left != 0.0 {
            return Err(Error::InvalidParams("half-line grid must start at 0".into()));
        }
        let h = grid.spacing;
        let free = grid.count - 1;
        let w = 1.0 / h;
        let mut diag = Vec::with_capacity(free);
        let mut onsite = Vec::with_capacity(free);
        let mut mass = Vec::with_capacity(free);
        for i in 0..free {
            let t = grid.node(i);
            let m = if i == 0 { 0.5 * h } else { h };
            let c = (t + xi).powi(2) * m;
            let anchor = if i + 1 == free { w } else { 0.0 };
            let edges = if i == 0 { w } else { 2.0 * w };
            diag.push(edges + c);
            onsite.push(c + anchor);
            mass.push(m);
        }
        Ok(TridiagSystem {
            diag,
            offdiag: vec![-w; free - 1],
            mass,
            onsite,
            offset: 0,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// Grid index of free unknown 0.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Number of eigenvalues of the pencil strictly below `sigma`, from the
    /// pivots of the symmetrized `LDLᵀ` factorization of `M^{-½} A M^{-½} - σ`.
    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        match self.count_below_raw(sigma) {
            Some(c) => Ok(c),
            None => {
                let nudged = sigma - 1e-14 * sigma.abs().max(1.0);
                self.count_below_raw(nudged)
                    .ok_or(Error::SingularPivot { shift: sigma })
            }
        }
    }

    fn count_below_raw(&self, sigma: f64) -> Option<usize> {
        let mut count = 0;
        let mut d_prev = 1.0;
        for j in 0..self.len() {
            let b = self.diag[j] / self.mass[j] - sigma;
            let d = if j == 0 {
                b
            } else {
                let e = self.offdiag[j - 1] / (self.mass[j - 1] * self.mass[j]).sqrt();
                b - e * e / d_prev
            };
            if d == 0.0 {
                return None;
            }
            if d < 0.0 {
                count += 1;
            }
            d_prev = d;
        }
        Some(count)
    }

    /// Gershgorin interval of the symmetrized matrix.
    fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let mut radius = 0.0;
            if j > 0 {
                radius += self.offdiag[j - 1].abs() / (self.mass[j - 1] * self.mass[j]).sqrt();
            }
            if j + 1 < self.len() {
                radius += self.offdiag[j].abs() / (self.mass[j] * self.mass[j + 1]).sqrt();
            }
            let c = self.diag[j] / self.mass[j];
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo, hi)
    }

    /// `A f` for `f` on the free unknowns.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut v = self.diag[j] * f[j];
                if j > 0 {
                    v += self.offdiag[j - 1] * f[j - 1];
                }
                if j + 1 < n {
                    v += self.offdiag[j] * f[j + 1];
                }
                v
            })
            .collect()
    }

    /// `fᵀ A f` in the cancellation-free edge form.
    pub fn energy(&self, f: &[f64]) -> f64 {
        let on: f64 = f.iter().zip(&self.onsite).map(|(v, c)| c * v * v).sum();
        let edges: f64 = self
            .offdiag
            .iter()
            .enumerate()
            .map(|(j, o)| -o * (f[j + 1] - f[j]).powi(2))
            .sum();
        on + edges
    }

    pub fn mass_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// Solves `(A - σ M) x = rhs` by the Thomas algorithm.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for j in 0..n {
            let b = self.diag[j] - sigma * self.mass[j];
            let (denom, rhs_j) = if j == 0 {
                (b, rhs[0])
            } else {
                let a = self.offdiag[j - 1];
                (b - a * c_prime[j - 1], rhs[j] - a * d_prime[j - 1])
            };
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::SingularPivot { shift: sigma });
            }
            c_prime[j] = if j + 1 < n { self.offdiag[j] / denom } else { 0.0 };
            d_prime[j] = rhs_j / denom;
        }
        let mut x = vec![0.0; n];
        for j in (0..n).rev() {
            x[j] = d_prime[j] - if j + 1 < n { c_prime[j] * x[j + 1] } else { 0.0 };
        }
        Ok(x)
    }

    /// Lowest eigenpair: Sturm bisection, inverse iteration, then the energy
    /// Rayleigh quotient of the converged vector.
    pub fn lowest(&self) -> Result<Eigenpair> {
        let (mut lo, mut hi) = self.gershgorin();
        let mut iterations = 0;
        while hi - lo > 1e-13 * lo.abs().max(hi.abs()).max(1.0) {
            if iterations >= BISECTION_MAX {
                return Err(Error::NoConvergence("Sturm bisection".into()));
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid)? >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
        }
        let sigma = lo - 1e-6 * lo.abs().max(1.0);
        let mut v: Vec<f64> = self.mass.clone();
        let mut rq_prev = f64::INFINITY;
        for _ in 0..INVERSE_ITER_MAX {
            let rhs: Vec<f64> = v.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
            let mut w = self.solve_shifted(sigma, &rhs)?;
            let norm = self.mass_inner(&w, &w).sqrt();
            w.iter_mut().for_each(|x| *x /= norm);
            let rq = self.energy(&w);
            v = w;
            if (rq - rq_prev).abs() <= 1e-14 * rq.abs().max(1e-12) || rq > rq_prev {
                let total: f64 = v.iter().sum();
                if total < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                return Ok(Eigenpair {
                    lambda: rq,
                    vector: self.expand(&v),
                });
            }
            rq_prev = rq;
        }
        Err(Error::NoConvergence("inverse iteration".into()))
    }

    /// Embeds a vector on the free unknowns into the full grid.
    pub fn expand(&self, v: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.grid.count];
        full[self.offset..self.offset + v.len()].copy_from_slice(v);
        full
    }

    /// Restricts a full-grid vector to the free unknowns.
    pub fn restrict<'a>(&self, full: &'a [f64]) -> &'a [f64] {
        &full[self.offset..self.offset + self.len()]
    }
}

/// Richardson combination for a second-order scheme on grids `h` and `h/2`.
pub fn richardson_h2(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

pub fn fd_disk_eigen(n: u32, beta: f64, grid: Grid1D) -> Result<FdSolution> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be non-negative")));
    }
    let coarse = TridiagSystem::disk(n, beta, grid)?.lowest()?;
    let fine = TridiagSystem::disk(n, beta, grid.refined())?.lowest()?;
    Ok(FdSolution {
        lambda: richardson_h2(coarse.lambda, fine.lambda),
        lambda_coarse: coarse.lambda,
        lambda_fine: fine.lambda,
        eigvec: coarse.vector,
        grid,
        truncation_warning: false,
    })
}

pub fn fd_degennes_eigen(xi: f64, l: f64, grid: Grid1D) -> Result<FdSolution> {
    if grid.left != 0.0 || grid.right != l {
        return Err(Error::InvalidParams(format!("grid must span [0, {l}]")));
    }
    let coarse = TridiagSystem::degennes(xi, grid)?.lowest()?;
    let fine = TridiagSystem::degennes(xi, grid.refined())?.lowest()?;
    let truncation_warning = coarse.vector[grid.count - 2] > TRUNCATION_THRESHOLD;
    Ok(FdSolution {
        lambda: richardson_h2(coarse.lambda, fine.lambda),
        lambda_coarse: coarse.lambda,
        lambda_fine: fine.lambda,
        eigvec: coarse.vector,
        grid,
        truncation_warning,
    })
}

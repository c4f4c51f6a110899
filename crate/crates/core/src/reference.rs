//! Crank–Nicolson finite differences for the same boundary value problem, for cross-validation.
//!
//! Nodes x_j = j·h on [0, xmax]. The row at x = 0 carries u = f, a ghost node u_{−1} = u_1 − 2h·g
//! carries u_x = g, and the far end is clamped (u = u_x = 0).

use crate::error::{Error, Result};
use crate::fractional::TimeSignal;
use crate::ibvp::{BoundaryData, MassBalance};
use crate::propagator::{Field, GridSpec};
use crate::special::C64;
use crate::stencil::fd_weights;
use serde::Serialize;

/// Uniform grid on [0, xmax] × [0, T] with `nx` spatial intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdGrid {
    pub xmax: f64,
    pub nx: usize,
    pub horizon: f64,
    pub nt: usize,
}

impl FdGrid {
    pub fn new(xmax: f64, nx: usize, horizon: f64, nt: usize) -> Result<Self> {
        if !(xmax > 0.0 && xmax.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("need xmax > 0 and T > 0, got {xmax}, {horizon}")));
        }
        if nx < 6 {
            return Err(Error::InvalidInput(format!("need at least 5 interior points, got nx = {nx}")));
        }
        if nt < 2 {
            return Err(Error::InvalidInput(format!("need nt ≥ 2, got {nt}")));
        }
        let g = Self { xmax, nx, horizon, nt };
        log::debug!("finite-difference grid: dt/dx⁴ = {:.3e}", g.dt() / g.dx().powi(4));
        Ok(g)
    }

    pub fn dx(&self) -> f64 {
        self.xmax / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / (self.nt - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Both spacings halved.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx, nt: 2 * self.nt - 1, ..*self }
    }
}

/// Solution samples, `nt` rows of `nx + 1` nodes.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub grid: FdGrid,
    pub samples: Vec<C64>,
    /// max |u| over the last tenth of the domain, relative to max |u| overall
    pub edge_level: f64,
}

impl FdSolution {
    pub fn row(&self, n: usize) -> &[C64] {
        let w = self.grid.nx + 1;
        &self.samples[n * w..(n + 1) * w]
    }

    pub fn get(&self, n: usize, j: usize) -> C64 {
        self.samples[n * (self.grid.nx + 1) + j]
    }

    /// Value at an arbitrary x ∈ [0, xmax] at time step n, by four-point interpolation.
    pub fn value_at(&self, n: usize, x: f64) -> C64 {
        let h = self.grid.dx();
        let s = x / h;
        let k = s.round();
        if (s - k).abs() < 1e-9 {
            return self.get(n, k as usize);
        }
        let first = (s.floor() as isize - 1).clamp(0, self.grid.nx as isize - 3) as usize;
        let nodes: Vec<f64> = (0..4).map(|q| (first + q) as f64 * h).collect();
        let w = fd_weights(x, &nodes, 0);
        (0..4).map(|q| self.get(n, first + q) * w[q]).sum()
    }

    /// The solution on a spectral grid with the same times; zero for x < 0 and beyond xmax.
    pub fn sample_onto(&self, grid: GridSpec) -> Result<Field> {
        if grid.nt != self.grid.nt || (grid.dt() - self.grid.dt()).abs() > 1e-12 * grid.dt() || grid.t0 != 0.0 {
            return Err(Error::InvalidInput("time grids of the two solutions differ".into()));
        }
        let rows = (0..grid.nt)
            .map(|n| {
                (0..grid.nx)
                    .map(|j| {
                        let x = grid.x(j);
                        if x < 0.0 || x > self.grid.xmax {
                            C64::new(0.0, 0.0)
                        } else {
                            self.value_at(n, x)
                        }
                    })
                    .collect()
            })
            .collect();
        Field::from_rows(rows, grid)
    }

    /// L² balance on [0, X] with X ≈ 3·xmax/4, from one-sided stencils at 0 and centred ones at X.
    pub fn mass_balance(&self, t_end: f64) -> MassBalance {
        let g = self.grid;
        let h = g.dx();
        let n_end = ((t_end / g.dt()).round().max(0.0) as usize).min(g.nt - 1);
        let edge = (3 * g.nx / 4).min(g.nx - 3);
        let one_sided: Vec<Vec<f64>> = {
            let nodes: Vec<f64> = (0..7).map(|k| k as f64 * h).collect();
            (0..4).map(|j| fd_weights(0.0, &nodes, j)).collect()
        };
        let centred: Vec<Vec<f64>> = {
            let nodes: Vec<f64> = (-2..=2).map(|k| k as f64 * h).collect();
            (0..4).map(|j| fd_weights(0.0, &nodes, j)).collect()
        };
        let traces = |n: usize, w: &[Vec<f64>], first: usize| -> [C64; 4] {
            let mut d = [C64::new(0.0, 0.0); 4];
            for (j, dj) in d.iter_mut().enumerate() {
                *dj = w[j].iter().enumerate().map(|(k, wk)| self.get(n, first + k) * *wk).sum();
            }
            d
        };
        let flux = |d: &[C64; 4]| ((d[3] * d[0].conj()).im, (d[2] * d[1].conj()).im);
        let mut sums = [0.0; 3];
        for n in 0..=n_end {
            if n_end == 0 {
                break;
            }
            let wt = if n == 0 || n == n_end { 0.5 } else { 1.0 } * g.dt();
            let (f3, f2) = flux(&traces(n, &one_sided, 0));
            let (e3, e2) = flux(&traces(n, &centred, edge - 2));
            sums[0] += wt * f3;
            sums[1] += wt * f2;
            sums[2] += wt * (2.0 * e3 - 2.0 * e2);
        }
        let mass = |n: usize| {
            let row = self.row(n);
            let s: f64 = row[..=edge].iter().map(|v| v.norm_sqr()).sum();
            (s - 0.5 * (row[0].norm_sqr() + row[edge].norm_sqr())) * h
        };
        MassBalance {
            mass_end: mass(n_end),
            mass_start: mass(0),
            flux3: sums[0],
            flux2: sums[1],
            window_edge: g.x(edge),
            outflow: sums[2],
        }
    }
}

/// LU factors of a complex pentadiagonal matrix, without pivoting.
#[derive(Debug, Clone)]
struct Banded5 {
    n: usize,
    /// rows of the band (offsets −2..=2); after factoring, L below and U on/above the diagonal
    band: Vec<[C64; 5]>,
}

impl Banded5 {
    fn factor(mut band: Vec<[C64; 5]>) -> Result<Self> {
        // band[i][c] holds A[i][i + c − 2]
        let n = band.len();
        for k in 0..n {
            let pivot = band[k][2];
            if !(pivot.norm() > 1e-300) {
                return Err(Error::NonConvergence("zero pivot in banded factorization".into()));
            }
            for i in k + 1..(k + 3).min(n) {
                let off = i - k;
                let l = band[i][2 - off] / pivot;
                band[i][2 - off] = l;
                for c in 1..=2 {
                    let u = band[k][2 + c];
                    band[i][2 + c - off] -= l * u;
                }
            }
        }
        Ok(Self { n, band })
    }

    fn solve(&self, rhs: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            for off in 1..=2 {
                if i >= off {
                    let l = self.band[i][2 - off];
                    rhs[i] = rhs[i] - l * rhs[i - off];
                }
            }
        }
        for i in (0..n).rev() {
            let mut v = rhs[i];
            for c in 1..=2 {
                if i + c < n {
                    v -= self.band[i][2 + c] * rhs[i + c];
                }
            }
            rhs[i] = v / self.band[i][2];
        }
    }
}

/// Inner fixed-point sweeps for the cubic term at each step.
const INNER_ITERS: usize = 2;

/// Crank–Nicolson solve of i u_t − u_xxxx + λ_nl|u|²u = 0 on [0, xmax] with u(·,0) = f, u_x(·,0) = g.
///
/// `u0` holds the initial values at the nodes x_j, j = 0..=nx.
pub fn cn_solve_nodes(f: &TimeSignal, g: &TimeSignal, u0: &[C64], lambda_nl: f64, grid: FdGrid) -> Result<FdSolution> {
    for (name, s) in [("f", f), ("g", g)] {
        if s.len() != grid.nt || (s.dt - grid.dt()).abs() > 1e-12 * grid.dt() {
            return Err(Error::InvalidInput(format!(
                "boundary signal {name} is not sampled on the solver's time grid"
            )));
        }
    }
    if u0.len() != grid.nx + 1 {
        return Err(Error::InvalidInput(format!("initial datum needs {} nodes, got {}", grid.nx + 1, u0.len())));
    }
    if !lambda_nl.is_finite() {
        return Err(Error::Domain("nonlinearity coefficient must be finite".into()));
    }
    let (h, dt) = (grid.dx(), grid.dt());
    let m = grid.nx - 1; // unknowns u_1..u_{nx−1}
    let h4 = h.powi(4);
    let theta = C64::new(0.0, 0.5 * dt / h4);
    // interior rows of ∂⁴ with the ghost and clamped closures folded in
    let stencil_row = |i: usize| -> [f64; 5] {
        let mut r = [1.0, -4.0, 6.0, -4.0, 1.0];
        if i == 0 {
            r[2] += 1.0; // u_{−1} = u_1 − 2h g
            r[0] = 0.0;
            r[1] = 0.0;
        } else if i == 1 {
            r[0] = 0.0;
        }
        if i == m - 1 {
            r[2] += 1.0; // u_{nx+1} = u_{nx−1}
            r[3] = 0.0;
            r[4] = 0.0;
        } else if i == m - 2 {
            r[4] = 0.0;
        }
        r
    };
    let rows: Vec<[f64; 5]> = (0..m).map(stencil_row).collect();
    let lhs: Vec<[C64; 5]> = rows
        .iter()
        .map(|r| {
            let mut b = [C64::new(0.0, 0.0); 5];
            for c in 0..5 {
                b[c] = theta * r[c] + if c == 2 { 1.0 } else { 0.0 };
            }
            b
        })
        .collect();
    let lu = Banded5::factor(lhs)?;
    let apply = |v: &[C64], out: &mut [C64]| {
        for i in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..5 {
                let j = i as isize + c as isize - 2;
                if rows[i][c] != 0.0 && j >= 0 && (j as usize) < m {
                    acc += v[j as usize] * rows[i][c];
                }
            }
            out[i] = acc;
        }
    };
    // boundary contributions to the first two rows of h⁴∂⁴
    let boundary = |n: usize| -> (C64, C64) {
        let (fv, gv) = (f.samples[n], g.samples[n]);
        (-4.0 * fv - 2.0 * h * gv, fv)
    };
    let width = grid.nx + 1;
    let mut samples = vec![C64::new(0.0, 0.0); grid.nt * width];
    samples[..width].copy_from_slice(u0);
    samples[0] = f.samples[0];
    samples[grid.nx] = C64::new(0.0, 0.0);
    let mut cur: Vec<C64> = u0[1..grid.nx].to_vec();
    let mut au = vec![C64::new(0.0, 0.0); m];
    let mut rhs = vec![C64::new(0.0, 0.0); m];
    let i = C64::i();
    for n in 0..grid.nt - 1 {
        apply(&cur, &mut au);
        let (b0, b1) = boundary(n);
        let (c0, c1) = boundary(n + 1);
        let mut base: Vec<C64> = (0..m).map(|k| cur[k] - theta * au[k]).collect();
        base[0] -= theta * (b0 + c0);
        base[1] -= theta * (b1 + c1);
        let mut next = cur.clone();
        let iters = if lambda_nl == 0.0 { 1 } else { INNER_ITERS };
        let mut last_change = f64::INFINITY;
        for it in 0..iters {
            for k in 0..m {
                let w = 0.5 * (cur[k] + next[k]);
                rhs[k] = base[k] + i * dt * lambda_nl * w * w.norm_sqr();
            }
            lu.solve(&mut rhs);
            let change = rhs.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if it > 0 && !(change <= last_change.max(1e-14)) {
                return Err(Error::Divergence(format!("inner iteration diverged at step {n}")));
            }
            last_change = change;
            next.copy_from_slice(&rhs);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!("non-finite values at step {n}")));
        }
        cur = next;
        let row = &mut samples[(n + 1) * width..(n + 2) * width];
        row[0] = f.samples[n + 1];
        row[1..grid.nx].copy_from_slice(&cur);
    }
    let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = grid.nx - grid.nx / 10;
    let edge = (0..grid.nt)
        .flat_map(|n| (tail..=grid.nx).map(move |j| n * width + j))
        .map(|k| samples[k].norm())
        .fold(0.0, f64::max);
    let edge_level = if peak > 0.0 { edge / peak } else { 0.0 };
    if edge_level > 1e-8 {
        log::warn!("solution reaches the clamped end (relative level {edge_level:.2e}); enlarge xmax");
    }
    Ok(FdSolution { grid, samples, edge_level })
}

/// Crank–Nicolson solve for boundary data on a spectral grid whose spacing matches `grid`.
///
/// The initial datum is read at the shared nodes and taken as zero beyond the data's box.
pub fn cn_solve(data: &BoundaryData, lambda_nl: f64, grid: FdGrid) -> Result<FdSolution> {
    let sg = data.grid();
    if (sg.dx() - grid.dx()).abs() > 1e-12 * grid.dx() {
        return Err(Error::InvalidInput(format!(
            "initial datum spacing {} differs from the solver spacing {}",
            sg.dx(),
            grid.dx()
        )));
    }
    let o = sg.origin();
    let u0: Vec<C64> =
        (0..=grid.nx).map(|j| if o + j < sg.nx { data.u0.samples[o + j] } else { C64::new(0.0, 0.0) }).collect();
    cn_solve_nodes(&data.f, &data.g, &u0, lambda_nl, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verification::cn_manufactured;

    #[test]
    fn grid_validation() {
        assert!(FdGrid::new(10.0, 5, 1.0, 10).is_err());
        assert!(FdGrid::new(0.0, 64, 1.0, 10).is_err());
        let g = FdGrid::new(10.0, 64, 1.0, 11).unwrap();
        assert_eq!((g.dx(), g.dt()), (10.0 / 64.0, 0.1));
        assert_eq!(g.refined().nt, 21);
    }

    #[test]
    fn banded_solver_matches_dense() {
        let n = 9;
        let band: Vec<[C64; 5]> = (0..n)
            .map(|i| {
                let mut r = [C64::new(0.0, 0.0); 5];
                for c in 0..5 {
                    let j = i as isize + c as isize - 2;
                    if j >= 0 && j < n as isize {
                        r[c] = C64::new(1.0 / (1.0 + (c as f64 - 2.0).abs()), 0.3 * (i + c) as f64 / n as f64);
                    }
                }
                r[2] += 4.0;
                r
            })
            .collect();
        let x: Vec<C64> = (0..n).map(|k| C64::new(k as f64, 1.0 - k as f64 * 0.5)).collect();
        let mut b = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for c in 0..5 {
                let j = i as isize + c as isize - 2;
                if j >= 0 && j < n as isize {
                    b[i] += band[i][c] * x[j as usize];
                }
            }
        }
        let lu = Banded5::factor(band).unwrap();
        lu.solve(&mut b);
        let err = b.iter().zip(&x).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn zero_data_zero_solution() {
        let g = FdGrid::new(10.0, 64, 0.5, 17).unwrap();
        let z = TimeSignal::zeros(g.nt, g.dt());
        let sol = cn_solve_nodes(&z, &z, &vec![C64::new(0.0, 0.0); 65], 1.0, g).unwrap();
        assert!(sol.samples.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn second_order_on_manufactured_solution() {
        let (e1, m1) = cn_manufactured(1024, 257).unwrap();
        let (e2, m2) = cn_manufactured(2048, 513).unwrap();
        let order = (e1 / e2).log2();
        let mass_order = (m1 / m2).log2();
        eprintln!("cn errors {e1:.3e} -> {e2:.3e} (order {order:.2}); mass {m1:.3e} -> {m2:.3e}");
        assert!(order >= 1.8, "observed order {order}");
        assert!(mass_order >= 1.8, "mass residual order {mass_order}");
    }
}

//! Periodic spectral grid, the free group e^{it∂⁴}, the Duhamel operator and traces.

use crate::error::{Error, Result};
use crate::fractional::TimeSignal;
use crate::special::C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Space-time lattice: x_j = −L + j·dx on [−L, L), t_n = t0 + n·dt on [t0, t0 + T].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub nx: usize,
    pub t0: f64,
    pub horizon: f64,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, nx: usize, horizon: f64, nt: usize) -> Result<Self> {
        Self::with_start(half_width, nx, 0.0, horizon, nt)
    }

    pub fn with_start(half_width: f64, nx: usize, t0: f64, horizon: f64, nt: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(format!("half-width L must be positive, got {half_width}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidInput(format!("time horizon T must be positive, got {horizon}")));
        }
        if nx < 16 || !nx.is_power_of_two() {
            return Err(Error::InvalidInput(format!("nx must be a power of two ≥ 16, got {nx}")));
        }
        if nt < 2 {
            return Err(Error::InvalidInput(format!("nt must be at least 2, got {nt}")));
        }
        Ok(Self { half_width, nx, t0, horizon, nt })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / (self.nt - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt()
    }

    /// Index of the node x = 0.
    pub fn origin(&self) -> usize {
        self.nx / 2
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = PI / self.half_width;
        (0..self.nx).map(|k| if k < self.nx / 2 { k as f64 * dk } else { (k as f64 - self.nx as f64) * dk }).collect()
    }

    /// The grid with dx and dt both halved over the same domain.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx, nt: 2 * self.nt - 1, ..*self }
    }
}

/// Sign convention `i u_t + γ u_xxxx = 0`; the biharmonic case studied here is γ = −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispersion {
    #[default]
    Negative,
    Positive,
}

impl Dispersion {
    pub fn gamma(self) -> f64 {
        match self {
            Dispersion::Negative => -1.0,
            Dispersion::Positive => 1.0,
        }
    }
}

/// Complex samples over the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSignal {
    pub samples: Vec<C64>,
    pub grid: GridSpec,
}

impl SpaceSignal {
    pub fn new(samples: Vec<C64>, grid: GridSpec) -> Result<Self> {
        if samples.len() != grid.nx {
            return Err(Error::InvalidInput(format!(
                "space signal has {} samples for nx = {}",
                samples.len(),
                grid.nx
            )));
        }
        Ok(Self { samples, grid })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        Self { samples: (0..grid.nx).map(|j| f(grid.x(j))).collect(), grid }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_fn(grid, |_| C64::new(0.0, 0.0))
    }

    /// Discrete L² norm (∫|φ|² dx)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    /// Unnormalised DFT.
    pub fn spectrum(&self) -> Vec<C64> {
        let mut buf = self.samples.clone();
        fft_forward(self.grid.nx).process(&mut buf);
        buf
    }

    pub fn from_spectrum(spec: Vec<C64>, grid: GridSpec) -> Self {
        let mut buf = spec;
        fft_inverse(grid.nx).process(&mut buf);
        let s = 1.0 / grid.nx as f64;
        buf.iter_mut().for_each(|v| *v *= s);
        Self { samples: buf, grid }
    }

    /// Fraction of the L² mass outside [−L/2, L/2].
    pub fn edge_fraction(&self) -> f64 {
        let total: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let l = self.grid.half_width / 2.0;
        let outer: f64 =
            (0..self.grid.nx).filter(|&j| self.grid.x(j).abs() > l).map(|j| self.samples[j].norm_sqr()).sum();
        outer / total
    }

    /// Relative size of the top third of the discrete spectrum.
    pub fn alias_fraction(&self) -> f64 {
        high_third_fraction(&self.spectrum(), &self.grid.wavenumbers())
    }
}

fn high_third_fraction(spec: &[C64], xi: &[f64]) -> f64 {
    let kmax = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let high: f64 = spec.iter().zip(xi).filter(|(_, k)| k.abs() > 2.0 * kmax / 3.0).map(|(v, _)| v.norm_sqr()).sum();
    (high / total).sqrt()
}

/// Row-major nt × nx space-time samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub samples: Vec<C64>,
    pub grid: GridSpec,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { samples: vec![C64::new(0.0, 0.0); grid.nt * grid.nx], grid }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        let mut out = Self::zeros(grid);
        out.samples.par_chunks_mut(grid.nx).enumerate().for_each(|(n, row)| {
            let t = grid.t(n);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(t, grid.x(j));
            }
        });
        out
    }

    pub fn from_rows(rows: Vec<Vec<C64>>, grid: GridSpec) -> Result<Self> {
        if rows.len() != grid.nt || rows.iter().any(|r| r.len() != grid.nx) {
            return Err(Error::InvalidInput("field rows do not match the grid".into()));
        }
        Ok(Self { samples: rows.concat(), grid })
    }

    pub fn row(&self, n: usize) -> &[C64] {
        &self.samples[n * self.grid.nx..(n + 1) * self.grid.nx]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [C64] {
        let nx = self.grid.nx;
        &mut self.samples[n * nx..(n + 1) * nx]
    }

    pub fn get(&self, n: usize, j: usize) -> C64 {
        self.samples[n * self.grid.nx + j]
    }

    pub fn snapshot(&self, n: usize) -> SpaceSignal {
        SpaceSignal { samples: self.row(n).to_vec(), grid: self.grid }
    }

    /// Time series at spatial node j.
    pub fn column(&self, j: usize) -> TimeSignal {
        TimeSignal {
            samples: (0..self.grid.nt).map(|n| self.get(n, j)).collect(),
            t0: self.grid.t0,
            dt: self.grid.dt(),
            causal: false,
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64 + Sync) -> Self {
        Self { samples: self.samples.par_iter().map(|&v| f(v)).collect(), grid: self.grid }
    }

    pub fn zip_with(&self, o: &Self, f: impl Fn(C64, C64) -> C64 + Sync) -> Result<Self> {
        if self.grid != o.grid {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
        Ok(Self { samples: self.samples.par_iter().zip(&o.samples).map(|(&a, &b)| f(a, b)).collect(), grid: self.grid })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a - b)
    }

    /// Multiply row n by w(t_n).
    pub fn time_weighted(&self, w: impl Fn(f64) -> f64 + Sync) -> Self {
        let mut out = self.clone();
        let grid = self.grid;
        out.samples.par_chunks_mut(grid.nx).enumerate().for_each(|(n, row)| {
            let c = w(grid.t(n));
            row.iter_mut().for_each(|v| *v *= c);
        });
        out
    }

    /// Space-time L² norm (∫∫|u|² dx dt)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx() * self.grid.dt()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ∂x^j of every row by spectral differentiation.
    pub fn x_derivative(&self, j: u32) -> Self {
        let grid = self.grid;
        let xi = grid.wavenumbers();
        let mult: Vec<C64> = xi
            .iter()
            .enumerate()
            .map(|(k, &x)| if k == grid.nx / 2 && j % 2 == 1 { C64::new(0.0, 0.0) } else { (C64::i() * x).powu(j) })
            .collect();
        let mut out = self.clone();
        let (fwd, inv) = (fft_forward(grid.nx), fft_inverse(grid.nx));
        let s = 1.0 / grid.nx as f64;
        out.samples.par_chunks_mut(grid.nx).for_each(|row| {
            fwd.process(row);
            row.iter_mut().zip(&mult).for_each(|(v, m)| *v *= m * s);
            inv.process(row);
        });
        out
    }
}

type FftCache = Mutex<(FftPlanner<f64>, Vec<(usize, bool, Arc<dyn Fft<f64>>)>)>;

fn planner() -> &'static FftCache {
    static P: OnceLock<FftCache> = OnceLock::new();
    P.get_or_init(|| Mutex::new((FftPlanner::new(), Vec::new())))
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = planner().lock().expect("FFT planner lock poisoned");
    if let Some((_, _, p)) = guard.1.iter().find(|(m, f, _)| *m == n && *f == forward) {
        return p.clone();
    }
    let p = if forward { guard.0.plan_fft_forward(n) } else { guard.0.plan_fft_inverse(n) };
    guard.1.push((n, forward, p.clone()));
    p
}

pub(crate) fn fft_forward(n: usize) -> Arc<dyn Fft<f64>> {
    plan(n, true)
}

pub(crate) fn fft_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    plan(n, false)
}

fn check_resolution(phi: &SpaceSignal) {
    let edge = phi.edge_fraction();
    if edge > 1e-8 {
        log::warn!("{:.2e} of the mass lies in the outer half of the periodic box", edge);
    }
    let alias = phi.alias_fraction();
    if alias > 1e-6 {
        log::warn!("top third of the spectrum carries {:.2e} of the norm (aliasing risk)", alias);
    }
}

/// e^{it∂⁴}φ: the multiplier e^{iγtξ⁴} on the discrete lattice.
pub fn group_evolve(phi: &SpaceSignal, t: f64, disp: Dispersion) -> SpaceSignal {
    check_resolution(phi);
    let g = disp.gamma();
    let mut spec = phi.spectrum();
    for (v, k) in spec.iter_mut().zip(phi.grid.wavenumbers()) {
        *v *= C64::from_polar(1.0, g * t * k.powi(4));
    }
    SpaceSignal::from_spectrum(spec, phi.grid)
}

/// The free evolution sampled at every time of the grid.
pub fn group_field(phi: &SpaceSignal, disp: Dispersion) -> Field {
    check_resolution(phi);
    let grid = phi.grid;
    let spec = phi.spectrum();
    let xi = grid.wavenumbers();
    let g = disp.gamma();
    let inv = fft_inverse(grid.nx);
    let s = 1.0 / grid.nx as f64;
    let mut out = Field::zeros(grid);
    out.samples.par_chunks_mut(grid.nx).enumerate().for_each(|(n, row)| {
        let t = grid.t(n);
        for ((r, v), k) in row.iter_mut().zip(&spec).zip(&xi) {
            *r = v * C64::from_polar(s, g * t * k.powi(4));
        }
        inv.process(row);
    });
    out
}

// ∫₀¹ v e^{zv} dv and ∫₀¹ (1 − v) e^{zv} dv
fn phi_pair(z: C64) -> (C64, C64) {
    if z.norm() < 0.1 {
        let mut a = C64::new(0.0, 0.0);
        let mut b = C64::new(0.0, 0.0);
        let mut zk = C64::new(1.0, 0.0);
        let mut kfact = 1.0;
        for k in 0..14 {
            let kf = k as f64;
            if k > 0 {
                zk *= z;
                kfact *= kf;
            }
            a += zk / (kfact * (kf + 2.0));
            b += zk / (kfact * (kf + 1.0) * (kf + 2.0));
        }
        (a, b)
    } else {
        let e = z.exp();
        let z2 = z * z;
        ((e * (z - 1.0) + 1.0) / z2, (e - 1.0 - z) / z2)
    }
}

/// D w = −i∫₀ᵗ e^{i(t−t′)∂⁴} w(t′) dt′, exact for source data linear in time on each step.
///
/// The grid must start at t = 0.
pub fn duhamel_d(w: &Field, disp: Dispersion) -> Result<Field> {
    let grid = w.grid;
    if grid.t0 != 0.0 {
        return Err(Error::InvalidInput("Duhamel integral is anchored at t = 0; grid must start there".into()));
    }
    let nx = grid.nx;
    let dt = grid.dt();
    let xi = grid.wavenumbers();
    let g = disp.gamma();
    let fwd = fft_forward(nx);
    let mut spec = w.clone();
    spec.samples.par_chunks_mut(nx).for_each(|row| fwd.process(row));
    // propagate each mode independently
    let coeffs: Vec<(C64, C64, C64)> = xi
        .iter()
        .map(|k| {
            let z = C64::new(0.0, g * k.powi(4) * dt);
            let (a, b) = phi_pair(z);
            (z.exp(), a * (-C64::i() * dt), b * (-C64::i() * dt))
        })
        .collect();
    let mut out = Field::zeros(grid);
    let mut acc = vec![C64::new(0.0, 0.0); nx];
    for n in 0..grid.nt - 1 {
        let (cur, next) = (spec.row(n), spec.row(n + 1));
        for k in 0..nx {
            let (e, a, b) = coeffs[k];
            acc[k] = e * acc[k] + a * cur[k] + b * next[k];
        }
        out.row_mut(n + 1).copy_from_slice(&acc);
    }
    let inv = fft_inverse(nx);
    let s = 1.0 / nx as f64;
    out.samples.par_chunks_mut(nx).for_each(|row| {
        inv.process(row);
        row.iter_mut().for_each(|v| *v *= s);
    });
    Ok(out)
}

/// ∂x^j u(·, x0) by spectral differentiation and exact trigonometric interpolation in x.
pub fn trace_time(u: &Field, x0: f64, j: u32) -> Result<TimeSignal> {
    let grid = u.grid;
    if j > 3 {
        return Err(Error::InvalidInput(format!("trace derivative order must be ≤ 3, got {j}")));
    }
    if x0 < -grid.half_width || x0 > grid.half_width {
        return Err(Error::InvalidInput(format!("trace point {x0} outside the grid")));
    }
    let xi = grid.wavenumbers();
    let s = 1.0 / grid.nx as f64;
    let weights: Vec<C64> = xi
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let d = if k == grid.nx / 2 && j % 2 == 1 { C64::new(0.0, 0.0) } else { (C64::i() * x).powu(j) };
            // the Nyquist mode is read as a cosine so interpolation stays real-symmetric
            let e = if k == grid.nx / 2 {
                C64::new((x * (x0 - grid.x(0))).cos(), 0.0)
            } else {
                C64::from_polar(1.0, x * (x0 - grid.x(0)))
            };
            d * e * s
        })
        .collect();
    let fwd = fft_forward(grid.nx);
    let samples: Vec<C64> = (0..grid.nt)
        .into_par_iter()
        .map(|n| {
            let mut row = u.row(n).to_vec();
            fwd.process(&mut row);
            row.iter().zip(&weights).map(|(a, b)| a * b).sum()
        })
        .collect();
    Ok(TimeSignal { samples, t0: grid.t0, dt: grid.dt(), causal: false })
}

//! Riemann–Liouville fractional integrals of causal time signals and the cutoff ψ.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::special::{gamma_real, C64};
use crate::stencil::{fd_weights, lagrange_weights};
use rayon::prelude::*;

/// Uniformly sampled complex signal `samples[n] ≈ f(t0 + n dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<C64>,
    pub t0: f64,
    pub dt: f64,
    /// Marks a signal that vanishes identically for t < 0.
    pub causal: bool,
}

impl TimeSignal {
    pub fn new(samples: Vec<C64>, t0: f64, dt: f64, causal: bool) -> Result<Self> {
        if samples.is_empty() || !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "time signal needs samples and dt > 0 (got {} samples, dt = {dt})",
                samples.len()
            )));
        }
        if causal && t0 < 0.0 {
            let bad =
                samples.iter().enumerate().any(|(n, v)| t0 + n as f64 * dt < -1e-12 * dt && *v != C64::new(0.0, 0.0));
            if bad {
                return Err(Error::InvalidInput("causal signal has nonzero samples at t < 0".into()));
            }
        }
        Ok(Self { samples, t0, dt, causal })
    }

    /// Causal signal on t_n = n·dt, n = 0..n_samples, sampled from `f`.
    pub fn from_fn(n_samples: usize, dt: f64, f: impl Fn(f64) -> C64) -> Self {
        let samples = (0..n_samples).map(|n| f(n as f64 * dt)).collect();
        Self { samples, t0: 0.0, dt, causal: true }
    }

    pub fn zeros(n_samples: usize, dt: f64) -> Self {
        Self::from_fn(n_samples, dt, |_| C64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { samples: self.samples.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise combination of two signals on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::InvalidInput("time signals live on different grids".into()));
        }
        Ok(Self {
            samples: self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
            causal: self.causal && other.causal,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Local cubic interpolation at time `t`; zero before t0 for causal signals.
    pub fn sample(&self, t: f64) -> C64 {
        let n = self.len();
        let s = (t - self.t0) / self.dt;
        if s < 0.0 {
            return if self.causal || n == 1 { C64::new(0.0, 0.0) } else { self.samples[0] };
        }
        if n < 4 {
            let i = (s.round() as usize).min(n - 1);
            return self.samples[i];
        }
        let i = (s.floor() as usize).min(n - 2);
        let lo = i.saturating_sub(1).min(n - 4);
        let nodes: Vec<f64> = (lo..lo + 4).map(|k| k as f64).collect();
        let w = lagrange_weights(s.min((n - 1) as f64), &nodes);
        (lo..lo + 4).zip(&w).map(|(k, w)| self.samples[k] * *w).sum()
    }

    /// Resample onto a new causal grid by local cubic interpolation.
    pub fn resample(&self, n_samples: usize, dt: f64) -> Self {
        Self::from_fn(n_samples, dt, |t| self.sample(t))
    }

    pub fn check_causal(&self) -> Result<()> {
        if !self.causal || self.t0 != 0.0 {
            return Err(Error::InvalidInput("fractional operators act on causal signals starting at t = 0".into()));
        }
        Ok(())
    }
}

/// Monomial coefficients of the Lagrange basis on `nodes`: `ℓ_i(v) = Σ_m c[i][m] v^m`.
pub(crate) fn lagrange_monomials(nodes: &[f64]) -> Vec<Vec<f64>> {
    let p = nodes.len();
    (0..p)
        .map(|i| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k == i {
                    continue;
                }
                denom *= nodes[i] - xk;
                let mut next = vec![0.0; poly.len() + 1];
                for (m, c) in poly.iter().enumerate() {
                    next[m + 1] += c;
                    next[m] -= c * xk;
                }
                poly = next;
            }
            poly.iter().map(|c| c / denom).collect()
        })
        .collect()
}

/// Interpolation stencil of interval [t_j, t_{j+1}] at step n: first node and degree.
///
/// Cubic through the nearest four nodes, shifted inward at both ends; lower degree while n < 3.
pub(crate) fn stencil(j: usize, n: usize) -> (usize, usize) {
    if n <= 3 {
        (0, n)
    } else {
        (j.saturating_sub(1).min(n - 3), 3)
    }
}

/// Per-interval basis integrals for I_α with piecewise-cubic interpolation.
struct CubicProductWeights {
    /// μ[d][m] = ∫₀¹ (d + 1 − v)^{α−1} v^m dv
    moments: Vec<[f64; 4]>,
    /// basis coefficients for (degree, j − first node)
    basis: Vec<Vec<Vec<f64>>>,
    scale: f64,
}

impl CubicProductWeights {
    fn new(alpha: f64, n: usize, dt: f64) -> Result<Self> {
        let (gx, gw) = gauss_legendre(16);
        let mut moments = Vec::with_capacity(n);
        for d in 0..n {
            let mut mu = [0.0; 4];
            if d == 0 {
                // Beta integrals B(α, m + 1)
                let mut b = 1.0 / alpha;
                for (m, v) in mu.iter_mut().enumerate() {
                    *v = b;
                    b *= (m + 1) as f64 / (alpha + m as f64 + 1.0);
                }
            } else {
                for (x, w) in gx.iter().zip(&gw) {
                    let v = 0.5 * (x + 1.0);
                    let k = 0.5 * w * (d as f64 + 1.0 - v).powf(alpha - 1.0);
                    let mut vm = 1.0;
                    for m in mu.iter_mut() {
                        *m += k * vm;
                        vm *= v;
                    }
                }
            }
            moments.push(mu);
        }
        let mut basis = Vec::new();
        for p in 0..=3usize {
            let per_offset = (0..=2usize)
                .map(|off| {
                    if p == 0 || off >= p {
                        return Vec::new();
                    }
                    let nodes: Vec<f64> = (0..=p).map(|k| k as f64 - off as f64).collect();
                    let c = lagrange_monomials(&nodes);
                    c.into_iter().flatten().collect()
                })
                .collect();
            basis.push(per_offset);
        }
        Ok(Self { moments, basis, scale: dt.powf(alpha) / gamma_real(alpha)? })
    }

    fn apply(&self, x: &[C64], n: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let (lo, p) = stencil(j, n);
            let mu = &self.moments[n - 1 - j];
            let coeffs = &self.basis[p][j - lo];
            for i in 0..=p {
                let c = &coeffs[i * (p + 1)..(i + 1) * (p + 1)];
                let w: f64 = c.iter().zip(mu.iter()).map(|(a, b)| a * b).sum();
                acc += x[lo + i] * w;
            }
        }
        acc * self.scale
    }
}

/// I_α f = (1/Γ(α)) ∫₀ᵗ (t−s)^{α−1} f(s) ds for α > 0, by product integration of the
/// piecewise-cubic interpolant (fourth order for smooth f).
pub fn frac_integral(f: &TimeSignal, alpha: f64) -> Result<TimeSignal> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("frac_integral needs α > 0, got {alpha}; use frac_derivative")));
    }
    f.check_causal()?;
    let n = f.len();
    let w = CubicProductWeights::new(alpha, n, f.dt)?;
    let mut out = vec![C64::new(0.0, 0.0); n];
    out.par_iter_mut().enumerate().skip(1).for_each(|(m, o)| *o = w.apply(&f.samples, m));
    Ok(TimeSignal { samples: out, t0: 0.0, dt: f.dt, causal: true })
}

/// d^k/dt^k of I_{α+k} f, for α ≤ 0 and α + k > 0.
pub fn frac_derivative(f: &TimeSignal, alpha: f64, k: usize) -> Result<TimeSignal> {
    f.check_causal()?;
    if alpha > 0.0 {
        return Err(Error::InvalidInput(format!("frac_derivative needs α ≤ 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    if alpha + k as f64 <= 0.0 {
        return Err(Error::InvalidInput(format!("α + k must be positive (α = {alpha}, k = {k})")));
    }
    let j = frac_integral(f, alpha + k as f64)?;
    let out = differentiate(&j.samples, f.dt, k);
    let amp = f64::EPSILON * j.sup_norm() / f.dt.powi(k as i32);
    let peak = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak > 0.0 && amp > 1e-6 * peak {
        log::warn!("order-{k} differencing amplifies round-off to {amp:.2e} (signal peak {peak:.2e})");
    }
    Ok(TimeSignal { samples: out, t0: 0.0, dt: f.dt, causal: true })
}

/// I_α for any real order: integrate for α > 0, integrate-then-differentiate otherwise.
pub fn frac_order(f: &TimeSignal, alpha: f64) -> Result<TimeSignal> {
    if alpha > 0.0 {
        frac_integral(f, alpha)
    } else if alpha == 0.0 {
        Ok(f.clone())
    } else {
        let mut k = 1;
        while alpha + (k as f64) <= 0.5 {
            k += 1;
        }
        frac_derivative(f, alpha, k)
    }
}

/// k-th derivative by fourth-order differences; zero extension for t < 0, one-sided at the end.
fn differentiate(x: &[C64], dt: f64, k: usize) -> Vec<C64> {
    let n = x.len() as isize;
    let r = k.div_ceil(2) as isize + 1;
    let central: Vec<f64> = {
        let nodes: Vec<f64> = (-r..=r).map(|i| i as f64).collect();
        fd_weights(0.0, &nodes, k)
    };
    let scale = dt.powi(-(k as i32));
    let at = |i: isize| if i < 0 { C64::new(0.0, 0.0) } else { x[i as usize] };
    (0..n)
        .map(|m| {
            if m + r < n {
                (-r..=r).zip(&central).map(|(o, w)| at(m + o) * *w).sum::<C64>() * scale
            } else {
                let width = (k + 4) as isize;
                let lo = (n - width).max(0);
                let nodes: Vec<f64> = (lo..n).map(|i| (i - m) as f64).collect();
                let w = fd_weights(0.0, &nodes, k);
                (lo..n).zip(&w).map(|(i, w)| at(i) * *w).sum::<C64>() * scale
            }
        })
        .collect()
}

pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / y).exp();
        let b = (-1.0 / (1.0 - y)).exp();
        a / (a + b)
    }
}

/// Smooth time cutoff: 1 on [0, 1], 0 for |t| ≥ 2, monotone in between.
pub fn cutoff_psi(t: f64) -> f64 {
    if t < 0.0 {
        smooth_step((t + 2.0) / 2.0)
    } else {
        smooth_step(2.0 - t)
    }
}

/// Smooth causal turn-on: 0 for t ≤ 0, 1 for t ≥ width.
pub fn smooth_onset(t: f64, width: f64) -> f64 {
    smooth_step(t / width)
}

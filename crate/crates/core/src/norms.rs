//! Discrete Sobolev, Bourgain X^{s,b} and Z^{s,b} norms, and randomized estimate-ratio suites.
//!
//! Space-time norms use the interaction representation v̂(t, ξ) = e^{itξ⁴}û(t, ξ), so the weight
//! ⟨τ + ξ⁴⟩ becomes ⟨τ⟩ and near-free fields need no temporal resolution of ξ⁴.
//! Outside its sampled time window a field is taken to be zero.

use crate::error::{Error, Result};
use crate::forcing::{ForcingOperator, ForcingOrder};
use crate::fractional::{cutoff_psi, smooth_step, TimeSignal};
use crate::propagator::{duhamel_d, fft_forward, group_field, Dispersion, Field, GridSpec, SpaceSignal};
use crate::special::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Regularity indices (s, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub b: f64,
}

impl SobolevIndex {
    pub fn new(s: f64, b: f64) -> Self {
        Self { s, b }
    }
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// (Σ⟨ξ⟩^{2s}|φ̂(ξ)|² dξ / 2π)^{1/2} on the lattice; equals the L² norm at s = 0.
pub fn hs_norm(phi: &SpaceSignal, s: f64) -> f64 {
    let spec = phi.spectrum();
    let xi = phi.grid.wavenumbers();
    let sum: f64 = spec.iter().zip(&xi).map(|(v, k)| bracket(*k).powf(2.0 * s) * v.norm_sqr()).sum();
    (sum * phi.grid.dx() / phi.grid.nx as f64).sqrt()
}

/// H^s norm of the zero extension of φ restricted to x ≥ 0.
///
/// An upper bound for the restricted norm (an infimum over extensions); only valid for 0 ≤ s < 1/2.
pub fn hs_halfline_norm(phi: &SpaceSignal, s: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&s) {
        return Err(crate::Error::Domain(format!("half-line norm needs 0 ≤ s < 1/2, got {s}")));
    }
    Ok(hs_norm(&zero_extension(phi), s))
}

/// φ with every sample at x < 0 set to zero.
pub fn zero_extension(phi: &SpaceSignal) -> SpaceSignal {
    let mut out = phi.clone();
    for (j, v) in out.samples.iter_mut().enumerate() {
        if phi.grid.x(j) < 0.0 {
            *v = C64::new(0.0, 0.0);
        }
    }
    out
}

fn padded_len(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

fn frequencies(n: usize, dt: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            2.0 * PI * k / (n as f64 * dt)
        })
        .collect()
}

/// H^s norm in time of a signal, zero outside its window.
pub fn time_hs_norm(sig: &TimeSignal, s: f64) -> f64 {
    let n = padded_len(sig.len());
    let mut buf = sig.samples.clone();
    buf.resize(n, C64::new(0.0, 0.0));
    fft_forward(n).process(&mut buf);
    let tau = frequencies(n, sig.dt);
    let sum: f64 = buf.iter().zip(&tau).map(|(v, t)| bracket(*t).powf(2.0 * s) * v.norm_sqr()).sum();
    (sum * sig.dt / n as f64).sqrt()
}

/// Spatial spectra of every time row, with the free phase e^{itξ⁴} removed; stored column-major
/// (one padded time series per wavenumber).
fn interaction_columns(u: &Field) -> (Vec<Vec<C64>>, usize) {
    let g = u.grid;
    let xi = g.wavenumbers();
    let fwd = fft_forward(g.nx);
    let rows: Vec<Vec<C64>> = (0..g.nt)
        .into_par_iter()
        .map(|n| {
            let mut r = u.row(n).to_vec();
            fwd.process(&mut r);
            let t = g.t(n);
            r.iter_mut().zip(&xi).for_each(|(v, k)| *v *= C64::from_polar(1.0, t * k.powi(4)));
            r
        })
        .collect();
    let nt_pad = padded_len(g.nt);
    let cols = (0..g.nx)
        .into_par_iter()
        .map(|k| {
            let mut c: Vec<C64> = rows.iter().map(|r| r[k]).collect();
            c.resize(nt_pad, C64::new(0.0, 0.0));
            fft_forward(nt_pad).process(&mut c);
            c
        })
        .collect();
    (cols, nt_pad)
}

/// (ΣΣ⟨ξ⟩^{2s}⟨τ + ξ⁴⟩^{2b}|ũ|² dτ dξ / 4π²)^{1/2}.
pub fn xsb_norm(u: &Field, idx: SobolevIndex) -> f64 {
    let g = u.grid;
    let (cols, nt_pad) = interaction_columns(u);
    let xi = g.wavenumbers();
    let tau = frequencies(nt_pad, g.dt());
    let tau_max = tau.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (mut total, mut high, mut sum) = (0.0, 0.0, 0.0);
    for (c, k) in cols.iter().zip(&xi) {
        let wx = bracket(*k).powf(2.0 * idx.s);
        for (v, t) in c.iter().zip(&tau) {
            let e = v.norm_sqr();
            total += e;
            if t.abs() > 2.0 * tau_max / 3.0 {
                high += e;
            }
            sum += wx * bracket(*t).powf(2.0 * idx.b) * e;
        }
    }
    if total > 0.0 && high / total > 1e-4 {
        log::warn!("temporal spectrum not resolved: top third carries {:.2e} of the energy", high / total);
    }
    (sum * g.dx() * g.dt() / (g.nx * nt_pad) as f64).sqrt()
}

/// The summands of the Z^{s,b} norm of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZNorm {
    /// sup over t of the H^s norm
    pub space: f64,
    /// sup over x of the H^{(2s+3)/8} norm of the ψ-localized trace
    pub trace0: f64,
    /// sup over x of the H^{(2s+1)/8} norm of the ψ-localized ∂x trace
    pub trace1: f64,
    pub xsb: f64,
}

impl ZNorm {
    pub fn total(&self) -> f64 {
        self.space + self.trace0 + self.trace1 + self.xsb
    }
}

fn sup_space_norm(u: &Field, s: f64) -> f64 {
    (0..u.grid.nt).into_par_iter().map(|n| hs_norm(&u.snapshot(n), s)).reduce(|| 0.0, f64::max)
}

fn sup_trace_norm(u: &Field, j: u32, order: f64) -> f64 {
    let d = if j == 0 { u.clone() } else { u.x_derivative(j) };
    (0..u.grid.nx).into_par_iter().map(|k| time_hs_norm(&d.column(k), order)).reduce(|| 0.0, f64::max)
}

/// Z^{s,b} norm of the solver's own extension (an upper bound for the restricted norm).
pub fn zsb_norm(u: &Field, idx: SobolevIndex) -> ZNorm {
    let local = u.time_weighted(cutoff_psi);
    ZNorm {
        space: sup_space_norm(u, idx.s),
        trace0: sup_trace_norm(&local, 0, (2.0 * idx.s + 3.0) / 8.0),
        trace1: sup_trace_norm(&local, 1, (2.0 * idx.s + 1.0) / 8.0),
        xsb: xsb_norm(&local, idx),
    }
}

/// Cheaper proxy used as the Picard stopping metric: sup-in-time H^s plus X^{s,b} of ψu.
pub fn z_proxy(u: &Field, idx: SobolevIndex) -> f64 {
    sup_space_norm(u, idx.s) + xsb_norm(&u.time_weighted(cutoff_psi), idx)
}

/// The inequalities whose constants the ratio suites probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    GroupSpace,
    GroupTraceJ0,
    GroupTraceJ1,
    GroupXsb,
    DuhamelSpace,
    DuhamelTrace,
    DuhamelXsb,
    ForcingSpace,
    ForcingTrace,
    ForcingXsb,
    Trilinear,
}

impl EstimateKind {
    pub const ALL: [EstimateKind; 11] = [
        EstimateKind::GroupSpace,
        EstimateKind::GroupTraceJ0,
        EstimateKind::GroupTraceJ1,
        EstimateKind::GroupXsb,
        EstimateKind::DuhamelSpace,
        EstimateKind::DuhamelTrace,
        EstimateKind::DuhamelXsb,
        EstimateKind::ForcingSpace,
        EstimateKind::ForcingTrace,
        EstimateKind::ForcingXsb,
        EstimateKind::Trilinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::GroupSpace => "group_space",
            EstimateKind::GroupTraceJ0 => "group_trace_j0",
            EstimateKind::GroupTraceJ1 => "group_trace_j1",
            EstimateKind::GroupXsb => "group_xsb",
            EstimateKind::DuhamelSpace => "duhamel_space",
            EstimateKind::DuhamelTrace => "duhamel_trace",
            EstimateKind::DuhamelXsb => "duhamel_xsb",
            EstimateKind::ForcingSpace => "forcing_space",
            EstimateKind::ForcingTrace => "forcing_trace",
            EstimateKind::ForcingXsb => "forcing_xsb",
            EstimateKind::Trilinear => "trilinear",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Lattice and sampling parameters for the ratio suites.
///
/// Random spatial data use lattice modes with |ξ| ≤ `band`; the band is fixed across refinements so
/// that the same functions are measured on both grids, and small enough that ξ⁴ is resolved in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub half_width: f64,
    pub nx: usize,
    pub nt: usize,
    pub band: f64,
    pub forcing_order: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { half_width: 16.0, nx: 128, nt: 513, band: 3.0, forcing_order: 0.0, seed: 7 }
    }
}

/// Ensemble statistics of one estimate ratio on a base grid and its dyadic refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub kind: EstimateKind,
    pub ensemble_size: usize,
    pub index: SobolevIndex,
    pub max_base: f64,
    pub median_base: f64,
    pub max_refined: f64,
    pub median_refined: f64,
    /// max_refined / max_base
    pub growth: f64,
}

/// Random Fourier data of one ensemble member, evaluated on any grid.
struct Sample {
    // (wavenumber, temporal frequency, amplitude)
    modes: Vec<(f64, f64, C64)>,
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) / 2f64.sqrt()
}

impl Sample {
    fn spatial(rng: &mut ChaCha8Rng, half_width: f64, band: f64) -> Self {
        let dk = PI / half_width;
        let kmax = (band / dk).floor() as i64;
        let modes = (-kmax..=kmax).map(|m| (m as f64 * dk, 0.0, complex_normal(rng))).collect();
        Self { modes }
    }

    fn space_time(rng: &mut ChaCha8Rng, half_width: f64, band: f64) -> Self {
        let dk = PI / half_width;
        let kmax = (band / dk).floor() as i64;
        let mut modes = Vec::new();
        for m in -kmax..=kmax {
            let k = m as f64 * dk;
            for _ in 0..3 {
                let w = -rng.random_range(0.0..(1.2 * k.powi(4) + 4.0));
                modes.push((k, w, complex_normal(rng)));
            }
        }
        Self { modes }
    }

    fn temporal(rng: &mut ChaCha8Rng, max_freq: f64) -> Self {
        let modes = (0..8).map(|_| (0.0, rng.random_range(-max_freq..max_freq), complex_normal(rng))).collect();
        Self { modes }
    }

    fn eval(&self, t: f64, x: f64) -> C64 {
        self.modes.iter().map(|(k, w, a)| a * C64::from_polar(1.0, k * x + w * t)).sum()
    }
}

const FORCING_HORIZON: f64 = 2.0;

// smooth bump supported in [0.1, 1.9]
fn source_bump(t: f64) -> f64 {
    smooth_step((t - 0.1) / 0.4) * smooth_step((1.9 - t) / 0.4)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sample_ratio(
    kind: EstimateKind,
    sample: &[Sample],
    cfg: &SuiteConfig,
    (nx, nt): (usize, usize),
    op: Option<&ForcingOperator>,
    idx: SobolevIndex,
) -> Result<f64> {
    let sigma = idx.s;
    let trace_order = |j: f64| (2.0 * sigma + 3.0 - 2.0 * j) / 8.0;
    let disp = Dispersion::Negative;
    match kind {
        EstimateKind::GroupSpace | EstimateKind::GroupTraceJ0 | EstimateKind::GroupTraceJ1 | EstimateKind::GroupXsb => {
            let grid = GridSpec::with_start(cfg.half_width, nx, -2.0, 4.0, nt)?;
            let phi = SpaceSignal::from_fn(grid, |x| sample[0].eval(0.0, x));
            let den = hs_norm(&phi, sigma);
            let u = group_field(&phi, disp).time_weighted(cutoff_psi);
            let num = match kind {
                EstimateKind::GroupSpace => sup_space_norm(&u, sigma),
                EstimateKind::GroupTraceJ0 => sup_trace_norm(&u, 0, trace_order(0.0)),
                EstimateKind::GroupTraceJ1 => sup_trace_norm(&u, 1, trace_order(1.0)),
                _ => xsb_norm(&u, idx),
            };
            Ok(ratio(num, den))
        }
        EstimateKind::DuhamelSpace | EstimateKind::DuhamelTrace | EstimateKind::DuhamelXsb => {
            let grid = GridSpec::new(cfg.half_width, nx, 2.5, nt)?;
            let w = Field::from_fn(grid, |t, x| sample[0].eval(t, x) * source_bump(t));
            let den = xsb_norm(&w, SobolevIndex::new(sigma, -idx.b));
            let u = duhamel_d(&w, disp)?.time_weighted(cutoff_psi);
            let num = match kind {
                EstimateKind::DuhamelSpace => sup_space_norm(&u, sigma),
                EstimateKind::DuhamelTrace => sup_trace_norm(&u, 0, trace_order(0.0)),
                _ => xsb_norm(&u, idx),
            };
            Ok(ratio(num, den))
        }
        EstimateKind::ForcingSpace | EstimateKind::ForcingTrace | EstimateKind::ForcingXsb => {
            let op = op.ok_or_else(|| Error::InvalidInput("forcing ratios need an operator".into()))?;
            let grid = op.grid();
            let g = TimeSignal::from_fn(nt, grid.dt(), |t| sample[0].eval(t, 0.0) * source_bump(t));
            let den = time_hs_norm(&g, trace_order(0.0));
            let u = op.apply(&g)?.time_weighted(cutoff_psi);
            let num = match kind {
                EstimateKind::ForcingSpace => sup_space_norm(&u, sigma),
                EstimateKind::ForcingTrace => sup_trace_norm(&u, 0, trace_order(0.0)),
                _ => xsb_norm(&u, idx),
            };
            Ok(ratio(num, den))
        }
        EstimateKind::Trilinear => {
            let grid = GridSpec::with_start(cfg.half_width, nx, -2.0, 4.0, nt)?;
            let fields: Vec<Field> = sample
                .iter()
                .map(|smp| {
                    let phi = SpaceSignal::from_fn(grid, |x| smp.eval(0.0, x));
                    group_field(&phi, disp).time_weighted(cutoff_psi)
                })
                .collect();
            let den: f64 = fields.iter().map(|u| xsb_norm(u, idx)).product();
            let prod = fields[0].zip_with(&fields[1], |a, b| a * b)?.zip_with(&fields[2], |ab, c| ab * c.conj())?;
            Ok(ratio(xsb_norm(&prod, SobolevIndex::new(sigma, -idx.b)), den))
        }
    }
}

fn draw(kind: EstimateKind, cfg: &SuiteConfig, member: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(member as u64));
    match kind {
        EstimateKind::DuhamelSpace | EstimateKind::DuhamelTrace | EstimateKind::DuhamelXsb => {
            vec![Sample::space_time(&mut rng, cfg.half_width, cfg.band)]
        }
        EstimateKind::ForcingSpace | EstimateKind::ForcingTrace | EstimateKind::ForcingXsb => {
            vec![Sample::temporal(&mut rng, cfg.band.powi(4) / 4.0)]
        }
        // cubic products triple the band; halving it keeps the product resolved
        EstimateKind::Trilinear => (0..3).map(|_| Sample::spatial(&mut rng, cfg.half_width, cfg.band / 2.0)).collect(),
        _ => vec![Sample::spatial(&mut rng, cfg.half_width, cfg.band)],
    }
}

fn max_and_median(v: &mut [f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    let median = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
    (v[m - 1], median)
}

/// Ensemble of estimate ratios on the configured grid and on its dyadic refinement.
pub fn estimate_ratio_suite(
    kind: EstimateKind,
    ensemble_size: usize,
    idx: SobolevIndex,
    cfg: &SuiteConfig,
) -> Result<RatioReport> {
    let samples: Vec<Vec<Sample>> = (0..ensemble_size).map(|m| draw(kind, cfg, m)).collect();
    let run = |nx: usize, nt: usize| -> Result<Vec<f64>> {
        let op = match kind {
            EstimateKind::ForcingSpace | EstimateKind::ForcingTrace | EstimateKind::ForcingXsb => {
                let grid = GridSpec::new(cfg.half_width, nx, FORCING_HORIZON, nt)?;
                Some(ForcingOperator::new(ForcingOrder::new(cfg.forcing_order)?, grid)?)
            }
            _ => None,
        };
        samples.par_iter().map(|s| sample_ratio(kind, s, cfg, (nx, nt), op.as_ref(), idx)).collect()
    };
    let mut base = run(cfg.nx, cfg.nt)?;
    let mut refined = run(2 * cfg.nx, 2 * cfg.nt - 1)?;
    let (max_base, median_base) = max_and_median(&mut base);
    let (max_refined, median_refined) = max_and_median(&mut refined);
    Ok(RatioReport {
        kind,
        ensemble_size,
        index: idx,
        max_base,
        median_base,
        max_refined,
        median_refined,
        growth: ratio(max_refined, max_base),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(16.0, 256, 1.0, 65).unwrap()
    }

    fn gaussian(grid: GridSpec, x0: f64) -> SpaceSignal {
        SpaceSignal::from_fn(grid, move |x| C64::new((-(x - x0) * (x - x0)).exp(), 0.0))
    }

    #[test]
    fn zero_inputs_give_zero() {
        let g = grid();
        assert_eq!(hs_norm(&SpaceSignal::zeros(g), 0.3), 0.0);
        assert_eq!(hs_halfline_norm(&SpaceSignal::zeros(g), 0.3).unwrap(), 0.0);
        assert_eq!(xsb_norm(&Field::zeros(g), SobolevIndex::new(0.2, 0.45)), 0.0);
        assert_eq!(zsb_norm(&Field::zeros(g), SobolevIndex::new(0.2, 0.45)).total(), 0.0);
    }

    #[test]
    fn plancherel_and_gaussian_h1() {
        let g = grid();
        let phi = gaussian(g, 0.5);
        assert!((hs_norm(&phi, 0.0) - phi.l2_norm()).abs() < 1e-12 * phi.l2_norm());
        // φ = e^{−x²}: both ∫|φ̂|² and ∫ξ²|φ̂|² over 2π equal √(π/2)
        let l2sq = (PI / 2.0).sqrt();
        let exact = (l2sq + l2sq).sqrt();
        assert!((hs_norm(&phi, 1.0) - exact).abs() < 1e-10, "{}", hs_norm(&phi, 1.0));
    }

    #[test]
    fn halfline_rejects_large_s_and_matches_interior_support() {
        let g = grid();
        assert!(hs_halfline_norm(&gaussian(g, 4.0), 0.5).is_err());
        let phi = SpaceSignal::from_fn(g, |x| C64::new((-(x - 6.0) * (x - 6.0) * 2.0).exp(), 0.0));
        assert!((hs_halfline_norm(&phi, 0.3).unwrap() - hs_norm(&phi, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn step_norm_is_refinement_stable() {
        let coarse = GridSpec::new(16.0, 512, 1.0, 9).unwrap();
        let fine = GridSpec::new(16.0, 1024, 1.0, 9).unwrap();
        let f = |x: f64| C64::new((-(x * x) / 8.0).exp(), 0.0);
        let a = hs_halfline_norm(&SpaceSignal::from_fn(coarse, f), 0.3).unwrap();
        let b = hs_halfline_norm(&SpaceSignal::from_fn(fine, f), 0.3).unwrap();
        assert!((a - b).abs() < 0.02 * a, "{a} {b}");
    }

    #[test]
    fn xsb_at_zero_weights_is_space_time_l2() {
        let g = grid();
        let u = Field::from_fn(g, |t, x| C64::new((-(x * x)).exp() * (1.0 + t), t * x.sin()));
        let l2 = (u.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx() * g.dt()).sqrt();
        assert!((xsb_norm(&u, SobolevIndex::new(0.0, 0.0)) - l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn modulated_mode_factorizes() {
        let g = GridSpec::with_start(16.0, 128, -2.0, 4.0, 257).unwrap();
        let k = 2.0 * PI / 32.0 * 5.0;
        let idx = SobolevIndex::new(0.3, 0.45);
        let u = Field::from_fn(g, |t, x| cutoff_psi(t) * C64::from_polar(1.0, k * x - t * k.powi(4)));
        let psi = TimeSignal::new((0..g.nt).map(|n| C64::new(cutoff_psi(g.t(n)), 0.0)).collect(), -2.0, g.dt(), false)
            .unwrap();
        let oracle = bracket(k).powf(idx.s) * time_hs_norm(&psi, idx.b) * (2.0 * g.half_width).sqrt();
        let v = xsb_norm(&u, idx);
        assert!((v - oracle).abs() < 1e-8 * oracle, "{v} {oracle}");
    }

    #[test]
    fn zsb_dominates_summands() {
        let g = grid();
        let u = group_field(&gaussian(g, 0.0), Dispersion::Negative);
        let z = zsb_norm(&u, SobolevIndex::new(0.2, 0.45));
        for part in [z.space, z.trace0, z.trace1, z.xsb] {
            assert!(part > 0.0 && z.total() >= part);
        }
    }

    #[test]
    fn ratio_suite_zero_convention_and_kinds() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        for k in EstimateKind::ALL {
            assert_eq!(EstimateKind::parse(k.name()), Some(k));
        }
    }

    #[test]
    fn group_space_ratio_is_unitary() {
        let cfg = SuiteConfig { nx: 64, nt: 129, ..SuiteConfig::default() };
        let r = estimate_ratio_suite(EstimateKind::GroupSpace, 3, SobolevIndex::new(0.2, 0.45), &cfg).unwrap();
        assert!((r.max_base - 1.0).abs() < 1e-10 && (r.growth - 1.0).abs() < 1e-10, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hs_monotone_in_s(s1 in 0.0f64..2.0, ds in 0.0f64..1.0, x0 in -3.0f64..3.0) {
            let phi = gaussian(grid(), x0);
            prop_assert!(hs_norm(&phi, s1) <= hs_norm(&phi, s1 + ds) * (1.0 + 1e-14));
        }

        #[test]
        fn xsb_translation_invariant(shift in 0usize..256, s in 0.0f64..1.0, b in -0.5f64..0.5) {
            let g = grid();
            let u = Field::from_fn(g, |t, x| C64::new((-(x * x)).exp(), t) * (-(x - 1.0).powi(2)).exp());
            let mut v = u.clone();
            for n in 0..g.nt {
                for j in 0..g.nx {
                    v.samples[n * g.nx + (j + shift) % g.nx] = u.get(n, j);
                }
            }
            let idx = SobolevIndex::new(s, b);
            let (a, c) = (xsb_norm(&u, idx), xsb_norm(&v, idx));
            prop_assert!((a - c).abs() < 1e-10 * a);
        }
    }
}

//! Named analytic data sets for the solver.

use crate::error::{Error, Result};
use crate::fractional::{smooth_onset, TimeSignal};
use crate::ibvp::BoundaryData;
use crate::propagator::{fft_forward, fft_inverse, Dispersion, Field, GridSpec, SpaceSignal};
use crate::special::C64;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// interior Gaussian bump with a Gaussian burst of Dirichlet and Neumann data
    GaussianPulse,
    /// zero initial datum and a slowly switched-on oscillating boundary signal
    ModulatedRamp,
    Zero,
    /// traces and initial datum of an exact whole-line free solution
    ManufacturedLinear,
}

impl Profile {
    pub const ALL: [Profile; 4] =
        [Profile::GaussianPulse, Profile::ModulatedRamp, Profile::Zero, Profile::ManufacturedLinear];

    pub fn name(self) -> &'static str {
        match self {
            Profile::GaussianPulse => "gaussian-pulse",
            Profile::ModulatedRamp => "modulated-ramp",
            Profile::Zero => "zero",
            Profile::ManufacturedLinear => "manufactured-linear",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown profile '{name}'")))
    }
}

/// Boundary data, plus the exact whole-line solution when one is known.
#[derive(Debug, Clone)]
pub struct ProfileData {
    pub data: BoundaryData,
    pub oracle: Option<Field>,
}

/// Profile data on `grid`, multiplied by `amplitude`.
pub fn build_profile(profile: Profile, grid: GridSpec, amplitude: f64) -> Result<ProfileData> {
    let (nt, dt) = (grid.nt, grid.dt());
    let a = C64::new(amplitude, 0.0);
    let out = match profile {
        Profile::Zero => ProfileData { data: BoundaryData::zeros(grid), oracle: None },
        Profile::GaussianPulse => {
            let burst = |t: f64| smooth_onset(t, 0.2) * (-((t - 0.5) / 0.15).powi(2)).exp();
            let f = TimeSignal::from_fn(nt, dt, |t| a * burst(t));
            let g = TimeSignal::from_fn(nt, dt, |t| a * C64::new(0.0, -0.5) * burst(t));
            let u0 = SpaceSignal::from_fn(grid, |x| a * (-(x - 6.0) * (x - 6.0)).exp());
            ProfileData { data: BoundaryData::new(f, g, u0)?, oracle: None }
        }
        Profile::ModulatedRamp => {
            let ramp = |t: f64| smooth_onset(t, 0.5) * C64::from_polar(1.0, 6.0 * t);
            let f = TimeSignal::from_fn(nt, dt, |t| a * ramp(t));
            let g = TimeSignal::from_fn(nt, dt, |t| a * C64::new(0.3, 0.2) * ramp(t));
            ProfileData { data: BoundaryData::new(f, g, SpaceSignal::zeros(grid))?, oracle: None }
        }
        Profile::ManufacturedLinear => {
            let m = ManufacturedLinear { amplitude, ..ManufacturedLinear::default() };
            let (data, oracle) = m.build(grid)?;
            ProfileData { data, oracle: Some(oracle) }
        }
    };
    Ok(out)
}

/// e^{−it∂⁴} applied to a modulated Gaussian that starts left of the boundary and moves into x > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedLinear {
    pub center: f64,
    pub width: f64,
    pub wavenumber: f64,
    pub amplitude: f64,
}

impl Default for ManufacturedLinear {
    fn default() -> Self {
        Self { center: -9.5, width: 1.5, wavenumber: 1.4, amplitude: 1.0 }
    }
}

const BOX_FACTOR: usize = 64;

impl ManufacturedLinear {
    pub fn initial(&self, x: f64) -> C64 {
        let y = (x - self.center) / self.width;
        C64::from_polar(self.amplitude * (-0.5 * y * y).exp(), self.wavenumber * x)
    }

    /// Boundary data and the exact solution sampled on `grid`.
    ///
    /// The solution comes from a periodic box `BOX_FACTOR` times wider with the same spacing, so that
    /// nothing wraps around during the run and the solver's nodes are lattice nodes.
    pub fn build(&self, grid: GridSpec) -> Result<(BoundaryData, Field)> {
        if grid.t0 != 0.0 {
            return Err(Error::InvalidInput("manufactured data start at t = 0".into()));
        }
        let big = GridSpec::new(grid.half_width * BOX_FACTOR as f64, grid.nx * BOX_FACTOR, grid.horizon, grid.nt)?;
        let offset = big.origin() - grid.origin();
        let mut spec: Vec<C64> = (0..big.nx).map(|j| self.initial(big.x(j))).collect();
        fft_forward(big.nx).process(&mut spec);
        let xi = big.wavenumbers();
        let gamma = Dispersion::Negative.gamma();
        let inv = fft_inverse(big.nx);
        let scale = 1.0 / big.nx as f64;
        let rows: Vec<(Vec<C64>, C64)> = (0..grid.nt)
            .into_par_iter()
            .map(|n| {
                let t = big.t(n);
                let mut row: Vec<C64> =
                    spec.iter().zip(&xi).map(|(v, k)| v * C64::from_polar(scale, gamma * t * k.powi(4))).collect();
                // ∂x at x = 0 straight from the spectrum
                let origin_phase = -big.x(0);
                let dudx: C64 = row
                    .iter()
                    .zip(&xi)
                    .enumerate()
                    .filter(|(k, _)| *k != big.nx / 2)
                    .map(|(_, (v, k))| v * C64::new(0.0, *k) * C64::from_polar(1.0, k * origin_phase))
                    .sum();
                inv.process(&mut row);
                (row[offset..offset + grid.nx].to_vec(), dudx)
            })
            .collect();
        let o = grid.origin();
        let f = TimeSignal::new(rows.iter().map(|(r, _)| r[o]).collect(), 0.0, grid.dt(), true)?;
        let g = TimeSignal::new(rows.iter().map(|(_, d)| *d).collect(), 0.0, grid.dt(), true)?;
        let oracle = Field::from_rows(rows.into_iter().map(|(r, _)| r).collect(), grid)?;
        let u0 = oracle.snapshot(0);
        Ok((BoundaryData::new(f, g, u0)?, oracle))
    }
}

/// Relative L² distance between two fields over x ∈ [x_lo, x_hi] and all times.
pub fn interior_relative_error(u: &Field, reference: &Field, x_lo: f64, x_hi: f64) -> Result<f64> {
    if u.grid != reference.grid {
        return Err(Error::InvalidInput("fields live on different grids".into()));
    }
    let g = u.grid;
    let (mut num, mut den) = (0.0, 0.0);
    for n in 0..g.nt {
        for j in 0..g.nx {
            let x = g.x(j);
            if x >= x_lo && x <= x_hi {
                num += (u.get(n, j) - reference.get(n, j)).norm_sqr();
                den += reference.get(n, j).norm_sqr();
            }
        }
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{group_field, trace_time};

    #[test]
    fn names_round_trip() {
        for p in Profile::ALL {
            assert_eq!(Profile::parse(p.name()).unwrap(), p);
        }
        assert!(Profile::parse("square-wave").is_err());
    }

    #[test]
    fn zero_profile_is_zero() {
        let g = GridSpec::new(20.0, 128, 1.0, 33).unwrap();
        let p = build_profile(Profile::Zero, g, 1.0).unwrap();
        assert_eq!(p.data.f.sup_norm() + p.data.g.sup_norm() + p.data.u0.l2_norm(), 0.0);
    }

    #[test]
    fn manufactured_oracle_matches_direct_evolution() {
        // on a box wide enough for the run both computations agree to round-off
        let g = GridSpec::new(160.0, 4096, 0.2, 33).unwrap();
        let m = ManufacturedLinear::default();
        let (data, oracle) = m.build(g).unwrap();
        let direct = group_field(&SpaceSignal::from_fn(g, |x| m.initial(x)), Dispersion::Negative);
        assert!(oracle.sub(&direct).unwrap().max_abs() < 1e-10);
        let g_direct = trace_time(&direct, 0.0, 1).unwrap();
        let err = (0..g.nt).map(|n| (g_direct.samples[n] - data.g.samples[n]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(data.u0.samples[g.origin()].norm() < 1e-8);
    }
}

//! Measurements behind the identity checks: each routine returns an error figure and leaves the
//! pass threshold to the caller.

use crate::error::Result;
use crate::forcing::{trace_value, ForcingOperator, ForcingOrder};
use crate::fractional::{frac_integral, frac_order, smooth_onset, TimeSignal};
use crate::ibvp::neumann_entry;
use crate::kernel::kernel_b;
use crate::profiles::{interior_relative_error, ManufacturedLinear};
use crate::propagator::{Field, GridSpec};
use crate::reference::{cn_solve, FdGrid};
use crate::special::{constant_m, gamma_real, C64};
use crate::stencil::fd_weights;
use serde::Serialize;
use std::f64::consts::PI;

/// Grid on which the forcing-operator identities are measured before refinement.
pub fn check_grid() -> Result<GridSpec> {
    GridSpec::new(20.0, 512, 1.0, 257)
}

/// Smooth causal test signal with an oscillating, decaying profile.
pub fn test_signal(t: f64) -> C64 {
    smooth_onset(t, 0.3) * C64::new((2.0 * t).cos(), (3.0 * t).sin()) * (-(t - 0.6) * (t - 0.6) * 2.0).exp()
}

fn signal(grid: GridSpec) -> TimeSignal {
    TimeSignal::from_fn(grid.nt, grid.dt(), test_signal)
}

/// A computed complex value next to its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub computed_re: f64,
    pub computed_im: f64,
    pub expected_re: f64,
    pub expected_im: f64,
    pub abs_error: f64,
}

impl Comparison {
    pub fn new(computed: C64, expected: C64) -> Self {
        Self {
            computed_re: computed.re,
            computed_im: computed.im,
            expected_re: expected.re,
            expected_im: expected.im,
            abs_error: (computed - expected).norm(),
        }
    }
}

/// Contour quadrature of B(0) against −(i^{7/4}/π)Γ(5/4).
pub fn b0_identity(tol: f64) -> Result<Comparison> {
    let expected = -C64::from_polar(1.0, 7.0 * PI / 8.0) * gamma_real(1.25)? / PI;
    Ok(Comparison::new(kernel_b(0.0, tol)?, expected))
}

/// sup_t |L^λ g(t, 0) − a(λ) g(t)| / sup_t |g|.
pub fn trace_value_error(lambda: f64, grid: GridSpec) -> Result<f64> {
    let order = ForcingOrder::new(lambda)?;
    let a = trace_value(order)?;
    let op = ForcingOperator::new(order, grid)?;
    let g = signal(grid);
    let col = op.column_density(&op.density(&g)?, 0.0)?;
    let err = col.samples.iter().zip(&g.samples).map(|(u, v)| (u - a * v).norm()).fold(0.0, f64::max);
    Ok(err / g.sup_norm())
}

/// Relative sup errors of the left and right limits of ∂x³L⁰f against ±(iM/2)I_{−3/4}f.
pub fn jump_errors(grid: GridSpec) -> Result<(f64, f64)> {
    let op = ForcingOperator::new(ForcingOrder::new(0.0)?, grid)?;
    let f = signal(grid);
    let h = op.density(&f)?;
    let half = frac_order(&f, -0.75)?.scale(C64::i() * constant_m() / 2.0);
    let scale = half.sup_norm();
    let err = |side: f64, sign: f64| -> Result<f64> {
        let d = op.one_sided_derivative(&h, 3, side)?;
        let e = d.samples.iter().zip(&half.samples).map(|(u, v)| (u - sign * v).norm()).fold(0.0, f64::max);
        Ok(e / scale)
    };
    Ok((err(-1.0, 1.0)?, err(1.0, -1.0)?))
}

/// sup_t |I_{1/4}∂x L^λ g(t, 0⁺) + b(λ) g(t)| / sup_t |g|.
pub fn neumann_trace_error(lambda: f64, grid: GridSpec) -> Result<f64> {
    let order = ForcingOrder::new(lambda)?;
    let b = neumann_entry(order)?;
    let op = ForcingOperator::new(order, grid)?;
    let g = signal(grid);
    let d = frac_integral(&op.one_sided_derivative(&op.density(&g)?, 1, 1.0)?, 0.25)?;
    let err = d.samples.iter().zip(&g.samples).map(|(u, v)| (u + b * v).norm()).fold(0.0, f64::max);
    Ok(err / g.sup_norm())
}

// centred nine-point finite difference, valid away from the kink at the origin
fn centred_derivative(u: &Field, n: usize, j: usize, order: usize) -> C64 {
    let dx = u.grid.dx();
    let nodes: Vec<f64> = (-4..=4).map(|k| k as f64 * dx).collect();
    let w = fd_weights(0.0, &nodes, order);
    (0..9).map(|k| u.get(n, j + k - 4) * w[k]).sum()
}

/// Relative sup distance between L^{−k}g and (−1)^k ∂x^k L⁰I_{k/4}g on 1/2 < |x| < 6.
pub fn derivative_relation_error(k: usize, grid: GridSpec) -> Result<f64> {
    let g = signal(grid);
    let smooth = ForcingOperator::new(ForcingOrder::new(0.0)?, grid)?.apply(&frac_integral(&g, k as f64 / 4.0)?)?;
    let lower = ForcingOperator::new(ForcingOrder::new(-(k as f64))?, grid)?.apply(&g)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for n in 0..grid.nt {
        for j in 4..grid.nx - 4 {
            let x = grid.x(j).abs();
            if x > 0.5 && x < 6.0 {
                let v = lower.get(n, j);
                scale = scale.max(v.norm());
                worst = worst.max((sign * centred_derivative(&smooth, n, j, k) - v).norm());
            }
        }
    }
    Ok(worst / scale)
}

/// sup_t |I_{1/2}I_{1/2}f − I₁f| for `n` samples on [0, 1], with f vanishing at t = 0 like
/// compatible boundary data.
pub fn semigroup_error(n: usize) -> Result<f64> {
    let dt = 1.0 / (n - 1) as f64;
    let f = TimeSignal::from_fn(n, dt, |t| C64::new(t * (3.0 * t).cos(), t * t - (2.0 * t).sin()));
    let twice = frac_integral(&frac_integral(&f, 0.5)?, 0.5)?;
    Ok(twice.sub(&frac_integral(&f, 1.0)?)?.sup_norm())
}

/// Crank–Nicolson run on manufactured linear data over [0, 64] × [0, 1/2]: the interior relative
/// L² error on [0, 12] and the mass-balance residual.
pub fn cn_manufactured(nx: usize, nt: usize) -> Result<(f64, f64)> {
    let spec = GridSpec::new(64.0, 2 * nx, 0.5, nt)?;
    let (data, oracle) = ManufacturedLinear::default().build(spec)?;
    let sol = cn_solve(&data, 0.0, FdGrid::new(64.0, nx, 0.5, nt)?)?;
    let err = interior_relative_error(&sol.sample_onto(spec)?, &oracle, 0.0, 12.0)?;
    Ok((err, sol.mass_balance(0.5).residual()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b0_matches_frozen_constant() {
        let c = b0_identity(1e-12).unwrap();
        assert!((c.expected_re - 0.266_554_830_338_112_03).abs() < 1e-15);
        assert!((c.expected_im + 0.110_410_625_842_105_33).abs() < 1e-15);
        assert!(c.abs_error < 1e-10);
    }

    #[test]
    fn semigroup_second_order() {
        let (e1, e2) = (semigroup_error(65).unwrap(), semigroup_error(129).unwrap());
        assert!((e1 / e2).log2() > 1.8, "{e1:.3e} -> {e2:.3e}");
    }
}

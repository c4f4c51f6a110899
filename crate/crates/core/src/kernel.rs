//! The oscillatory kernel B(x) = (1/2π)∫ e^{ixξ} e^{−iξ⁴} dξ, its fractional
//! relatives, tabulation, and the Mellin transform check.
//!
//! Every kernel here is a Fourier integral `(1/2π)∫ e^{izξ} m_λ(ξ) (iξ)^j W(ξ) dξ` with
//! `m_λ(ξ) = e^{iπλ/2}ξ^{−λ}` for ξ > 0 and `e^{−iπλ/2}|ξ|^{−λ}` for ξ < 0. The two
//! half-lines are evaluated separately along deformed contours: a straight ray at
//! angle −π/8 when the linear phase does not grow there, and otherwise a path through
//! the saddle point of `ζξ − ξ⁴`, with the algebraic part of `W` sent up the
//! imaginary axis.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi_unit, gauss_legendre, integrate};
use crate::special::{gamma, C64};
use crate::stencil::lagrange_weights;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

/// Multiplier `W` paired with the e^{−iξ⁴} dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralWeight {
    /// W(ξ) = e^{−iξ⁴}
    Propagator,
    /// W(ξ) = ∫₀¹ e^{−isξ⁴} ds = (1 − e^{−iξ⁴})/(iξ⁴)
    Moment0,
    /// W(ξ) = ∫₀¹ s e^{−isξ⁴} ds
    Moment1,
    /// W(ξ) = ∫₀¹ s² e^{−isξ⁴} ds
    Moment2,
    /// W(ξ) = ∫₀¹ s³ e^{−isξ⁴} ds
    Moment3,
}

impl SpectralWeight {
    /// Split W(ξ) = p(ξ) + q(ξ) e^{−iξ⁴}; valid away from ξ = 0.
    fn split(self, xi: C64) -> (C64, C64) {
        let w = xi.powi(4);
        let i = C64::i();
        match self {
            SpectralWeight::Propagator => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            SpectralWeight::Moment0 => (-i / w, i / w),
            SpectralWeight::Moment1 => {
                let w2 = w * w;
                (-1.0 / w2, i / w + 1.0 / w2)
            }
            SpectralWeight::Moment2 => {
                let (w2, w3) = (w * w, w * w * w);
                (2.0 * i / w3, i / w + 2.0 / w2 - 2.0 * i / w3)
            }
            SpectralWeight::Moment3 => {
                let (w2, w3, w4) = (w * w, w * w * w, w * w * w * w);
                (6.0 / w4, i / w + 3.0 / w2 - 6.0 * i / w3 - 6.0 / w4)
            }
        }
    }

    /// Power of s in the moment weights.
    pub fn moment_power(self) -> Option<usize> {
        match self {
            SpectralWeight::Propagator => None,
            SpectralWeight::Moment0 => Some(0),
            SpectralWeight::Moment1 => Some(1),
            SpectralWeight::Moment2 => Some(2),
            SpectralWeight::Moment3 => Some(3),
        }
    }

    /// The weight ∫₀¹ s^m e^{−isξ⁴} ds.
    pub fn moment(m: usize) -> Option<Self> {
        [SpectralWeight::Moment0, SpectralWeight::Moment1, SpectralWeight::Moment2, SpectralWeight::Moment3]
            .get(m)
            .copied()
    }

    fn has_algebraic_part(self) -> bool {
        !matches!(self, SpectralWeight::Propagator)
    }

    /// W(ξ) evaluated without splitting (entire in ξ).
    fn full(self, xi: C64) -> C64 {
        let w = xi.powi(4);
        let i = C64::i();
        if self == SpectralWeight::Propagator {
            return (-i * w).exp();
        }
        let j = self.moment_power().expect("moment weight") as f64;
        // the split loses digits to cancellation for small |ξ⁴|, more so for higher moments
        let series_radius = if j < 2.0 { 0.5 } else { 2.0 };
        if w.norm() < series_radius {
            // Σ (−iw)^n / (n! (n + j + 1))
            let x = -i * w;
            let mut term = C64::new(1.0, 0.0);
            let mut sum = C64::new(0.0, 0.0);
            for n in 0..60 {
                let nf = n as f64;
                if n > 0 {
                    term *= x / nf;
                }
                let c = 1.0 / (nf + j + 1.0);
                sum += term * c;
                if term.norm() * c < 1e-18 {
                    break;
                }
            }
            return sum;
        }
        let (p, q) = self.split(xi);
        p + q * (-i * w).exp()
    }
}

#[derive(Clone, Copy)]
enum Part {
    Full,
    Algebraic,
    Oscillatory,
}

struct HalfLine {
    zeta: f64,
    nu: f64,
    weight: SpectralWeight,
}

const RAY_DIR: f64 = -PI / 8.0;
const RAY_END: f64 = 3.3;
/// Below this saddle radius the oscillatory part follows an arc rather than a chord.
const ARC_LIMIT: f64 = 1.5;

impl HalfLine {
    /// e^{iζξ} ξ^ν × (selected part of W) at a point off the origin.
    fn integrand(&self, xi: C64, part: Part) -> C64 {
        let i = C64::i();
        let base = i * self.zeta * xi + self.nu * xi.ln();
        match part {
            Part::Full => base.exp() * self.weight.full(xi),
            Part::Algebraic => base.exp() * self.weight.split(xi).0,
            Part::Oscillatory => (base - i * xi.powi(4)).exp() * self.weight.split(xi).1,
        }
    }

    /// Exponential decay rate of e^{iζξ} along direction `dir`.
    fn decay_rate(&self, dir: C64) -> f64 {
        (self.zeta * dir.im).max(0.0)
    }

    /// Oscillation/decay length scale of e^{iζξ}.
    fn scale(&self) -> f64 {
        1.0 / self.zeta.abs().max(1.0)
    }

    /// ∫ along ξ = dir·s, s ∈ [0, s1], with the s^ν endpoint behaviour removed by v = s^{ν+1}
    /// on the first panel and geometric panels beyond.
    fn from_origin(&self, dir: C64, s1: f64, tol: f64) -> Result<C64> {
        let p = self.nu + 1.0;
        let dir_nu = (self.nu * dir.ln()).exp();
        let i = C64::i();
        let first = self.scale().min(s1);
        let g = |v: f64| {
            if v <= 0.0 {
                return self.weight.full(C64::new(0.0, 0.0)) * dir_nu * dir;
            }
            let s = v.powf(1.0 / p);
            let xi = dir * s;
            (i * self.zeta * xi).exp() * self.weight.full(xi) * dir_nu * dir
        };
        let mut total = integrate(g, 0.0, first.powf(p), tol, tol)?.value / p;
        let mut a = first;
        while a < s1 {
            let b = (2.0 * a).min(s1);
            total += self.segment(dir * a, dir * b, Part::Full, tol)?;
            a = b;
        }
        Ok(total)
    }

    /// ∫ along the straight segment from `a` to `b`.
    fn segment(&self, a: C64, b: C64, part: Part, tol: f64) -> Result<C64> {
        let d = b - a;
        Ok(integrate(|u| self.integrand(a + d * u, part) * d, 0.0, 1.0, tol, tol)?.value)
    }

    /// ∫ along ξ = r e^{iθ} for θ from `from` to `to`.
    fn arc(&self, r: f64, from: f64, to: f64, part: Part, tol: f64) -> Result<C64> {
        let i = C64::i();
        let f = |u: f64| {
            let th = from + (to - from) * u;
            let xi = C64::from_polar(r, th);
            self.integrand(xi, part) * i * xi * (to - from)
        };
        Ok(integrate(f, 0.0, 1.0, tol, tol)?.value)
    }

    /// ∫ along ξ = start + dir·r for r ∈ [0, ∞): geometric panels while e^{iζξ} decays,
    /// then r = R(1 − u)/u for the algebraic tail.
    fn to_infinity(&self, start: C64, dir: C64, part: Part, tol: f64) -> Result<C64> {
        let kappa = self.decay_rate(dir);
        let h = if kappa > 0.0 { (1.0 / kappa).min(1.0) } else { 1.0 };
        let stop = if kappa > 0.0 { (60.0 / kappa).min(64.0) } else { 4.0 };
        let mut total = C64::new(0.0, 0.0);
        let (mut a, mut b) = (0.0, h);
        while a < stop {
            total += self.segment(start + dir * a, start + dir * b, part, tol)?;
            a = b;
            b = (2.0 * b).max(a + h);
        }
        if kappa * a >= 60.0 {
            return Ok(total);
        }
        let r0 = a;
        let f = |u: f64| {
            if u <= 0.0 {
                return C64::new(0.0, 0.0);
            }
            let r = r0 / u;
            self.integrand(start + dir * r, part) * dir * (r0 / (u * u))
        };
        total += integrate(f, 0.0, 1.0, tol, tol)?.value;
        Ok(total)
    }

    fn evaluate(&self, tol: f64) -> Result<C64> {
        if !(self.nu > -1.0) {
            return Err(Error::Domain(format!("half-line integral diverges at the origin (ν = {})", self.nu)));
        }
        let ray = C64::from_polar(1.0, RAY_DIR);
        let i = C64::i();
        if self.zeta <= 0.0 {
            let mut total = self.from_origin(ray, 1.0, tol)?;
            total += self.segment(ray, ray * RAY_END, Part::Full, tol)?;
            if self.weight.has_algebraic_part() {
                total += self.to_infinity(ray * RAY_END, ray, Part::Algebraic, tol)?;
            }
            return Ok(total);
        }
        let a = (self.zeta / 4.0).cbrt();
        let rho = a.max(1.0);
        let top = i * rho;
        let mut total = self.from_origin(i, rho, tol)?;
        if a >= ARC_LIMIT {
            total += self.segment(top, C64::new(a, 0.0), Part::Oscillatory, tol)?;
            total += self.segment(C64::new(a, 0.0), a + ray * RAY_END, Part::Oscillatory, tol)?;
        } else if a >= 1.0 {
            // an arc keeps the split weight away from its pole at the origin
            total += self.arc(rho, PI / 2.0, 0.0, Part::Oscillatory, tol)?;
            total += self.segment(C64::new(a, 0.0), a + ray * RAY_END, Part::Oscillatory, tol)?;
        } else {
            total += self.arc(1.0, PI / 2.0, RAY_DIR, Part::Oscillatory, tol)?;
            total += self.segment(ray, ray * (RAY_END + 0.4), Part::Oscillatory, tol)?;
        }
        if self.weight.has_algebraic_part() {
            total += self.to_infinity(top, i, Part::Algebraic, tol)?;
        }
        Ok(total)
    }
}

/// `(1/2π)∫ e^{izξ} m_λ(ξ) (iξ)^j W(ξ) dξ`: the j-th derivative of the order-λ kernel with multiplier `W`.
pub fn fourier_profile(z: f64, order: f64, deriv: u32, weight: SpectralWeight, tol: f64) -> Result<C64> {
    if !(tol > 0.0) || !z.is_finite() {
        return Err(Error::InvalidInput(format!("profile needs finite z and tol > 0 (z = {z}, tol = {tol})")));
    }
    let nu = deriv as f64 - order;
    let htol = tol * PI; // each half contributes at most tol/2 after the 1/2π factor
    let plus = HalfLine { zeta: z, nu, weight }.evaluate(htol)?;
    let minus = HalfLine { zeta: -z, nu, weight }.evaluate(htol)?;
    let phase = C64::from_polar(1.0, PI * order / 2.0);
    let ij = C64::i().powu(deriv);
    Ok((phase * ij * plus + phase.conj() * ij.conj() * minus) / (2.0 * PI))
}

/// B(x), evaluated on deformed contours to absolute accuracy `tol`.
pub fn kernel_b(x: f64, tol: f64) -> Result<C64> {
    fourier_profile(x, 0.0, 0, SpectralWeight::Propagator, tol)
}

/// The j-th derivative B^{(j)}(x).
pub fn kernel_b_derivative(x: f64, j: u32, tol: f64) -> Result<C64> {
    fourier_profile(x, 0.0, j, SpectralWeight::Propagator, tol)
}

/// B_λ(x) = (1/2π)∫ e^{ixξ} m_λ(ξ) e^{−iξ⁴} dξ, the kernel of the order-λ forcing operator.
pub fn kernel_b_lambda(x: f64, order: f64, tol: f64) -> Result<C64> {
    fourier_profile(x, order, 0, SpectralWeight::Propagator, tol)
}

/// Closed form B_λ(0) = Γ((1−λ)/4) cos(πλ/2) e^{−iπ(1−λ)/8} / (4π).
pub fn kernel_b_lambda_at_zero(order: f64) -> Result<C64> {
    let g = gamma(C64::new((1.0 - order) / 4.0, 0.0))?;
    Ok(g * (PI * order / 2.0).cos() * C64::from_polar(1.0, -PI * (1.0 - order) / 8.0) / (4.0 * PI))
}

/// Tabulated complex function with local six-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub xs: Vec<f64>,
    pub values: Vec<C64>,
    pub quad_tol: f64,
    /// Interpolation stencils never straddle this node (a point of reduced smoothness).
    pub break_index: Option<usize>,
}

impl KernelTable {
    pub fn new(xs: Vec<f64>, values: Vec<C64>, quad_tol: f64, break_index: Option<usize>) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 6 {
            return Err(Error::InvalidInput("kernel table needs ≥ 6 matching abscissae and values".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("kernel table abscissae must increase strictly".into()));
        }
        Ok(Self { xs, values, quad_tol, break_index })
    }

    /// Evaluate `f` at every abscissa in parallel.
    pub fn tabulate(
        xs: Vec<f64>,
        quad_tol: f64,
        break_index: Option<usize>,
        f: impl Fn(f64) -> Result<C64> + Sync,
    ) -> Result<Self> {
        let values = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new(xs, values, quad_tol, break_index)
    }

    /// B on a uniform grid over [−x_max, x_max].
    pub fn kernel_b(x_max: f64, spacing: f64, quad_tol: f64) -> Result<Self> {
        let n = (x_max / spacing).ceil() as usize;
        let xs: Vec<f64> = (0..=2 * n).map(|k| (k as f64 - n as f64) * spacing).collect();
        Self::tabulate(xs, quad_tol, None, |x| kernel_b(x, quad_tol))
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().expect("table is nonempty")
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min() && x <= self.x_max()
    }

    /// Interpolated value; `None` outside the tabulated range.
    pub fn eval(&self, x: f64) -> Option<C64> {
        if !self.contains(x) {
            return None;
        }
        let n = self.xs.len();
        let i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(k) => return Some(self.values[k]),
            Err(k) => k - 1,
        };
        let (lo_bound, hi_bound) = match self.break_index {
            Some(b) if i < b => (0, b),
            Some(b) => (b, n - 1),
            None => (0, n - 1),
        };
        let width = 6.min(hi_bound - lo_bound + 1);
        let lo = i.saturating_sub(2).max(lo_bound).min(hi_bound + 1 - width);
        let nodes = &self.xs[lo..lo + width];
        let w = lagrange_weights(x, nodes);
        Some(w.iter().zip(&self.values[lo..lo + width]).map(|(w, v)| v * *w).sum())
    }

    /// CSV dump with columns x, re, im.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re,im")?;
        for (x, v) in self.xs.iter().zip(&self.values) {
            writeln!(out, "{x:.17e},{:.17e},{:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Outcome of the Mellin transform check.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MellinCheck {
    pub lambda: f64,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    /// Radius beyond which the integral is evaluated analytically.
    pub radius: f64,
    /// Magnitude of the analytically evaluated tail.
    pub tail: f64,
    /// Size of the last neglected term in the tail recursion.
    pub tail_remainder: f64,
}

impl MellinCheck {
    pub fn lhs(&self) -> C64 {
        C64::new(self.lhs_re, self.lhs_im)
    }
    pub fn rhs(&self) -> C64 {
        C64::new(self.rhs_re, self.rhs_im)
    }
    pub fn relative_error(&self) -> f64 {
        (self.lhs() - self.rhs()).norm() / self.rhs().norm()
    }
}

/// Closed form of ∫₀^∞ x^{λ−1} B(x) dx.
pub fn mellin_closed_form(lambda: f64) -> Result<C64> {
    let g = gamma(C64::new(lambda, 0.0))? * gamma(C64::new(0.25 - lambda / 4.0, 0.0))?;
    let phases =
        C64::from_polar(1.0, -PI * (1.0 + 3.0 * lambda) / 8.0) + C64::from_polar(1.0, -PI * (1.0 - 5.0 * lambda) / 8.0);
    Ok(g * phases / (8.0 * PI))
}

/// Compare the numerical Mellin transform of B with its closed form, for 0 < λ < 3/8.
///
/// [0, 1] uses a Gauss–Jacobi rule for the x^{λ−1} weight, [1, X] composite Gauss–Legendre,
/// and [X, ∞) is reduced to boundary values of B, B′, B″ at X by repeated integration by
/// parts with the kernel equation x·B = 4i·B‴, because B itself decays only like x^{−1/3}.
pub fn mellin_check(lambda: f64, tol: f64) -> Result<MellinCheck> {
    if !(lambda > 0.0 && lambda < 0.375) {
        return Err(Error::Domain(format!("Mellin check is posed for 0 < λ < 3/8, got {lambda}")));
    }
    let qtol = (tol * 1e-3).max(1e-15);
    let (xj, wj) = gauss_jacobi_unit(40, lambda - 1.0)?;
    let mut lhs = C64::new(0.0, 0.0);
    for (x, w) in xj.iter().zip(&wj) {
        lhs += kernel_b(*x, qtol)? * *w;
    }
    let radius = 24.0;
    let (gx, gw) = gauss_legendre(24);
    let panels = (radius - 1.0) as usize * 2;
    let h = (radius - 1.0) / panels as f64;
    let pts: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let a = 1.0 + p as f64 * h;
            gx.iter().zip(&gw).map(move |(x, w)| (a + 0.5 * h * (x + 1.0), 0.5 * h * w)).collect::<Vec<_>>()
        })
        .collect();
    let body: Vec<C64> = pts
        .par_iter()
        .map(|&(x, w)| kernel_b(x, qtol).map(|b| b * x.powf(lambda - 1.0) * w))
        .collect::<Result<Vec<_>>>()?;
    lhs += body.iter().sum::<C64>();

    let b0 = kernel_b(radius, qtol)?;
    let b1 = kernel_b_derivative(radius, 1, qtol)?;
    let b2 = kernel_b_derivative(radius, 2, qtol)?;
    // T(μ) = −4i[X^{μ−1}B″ − (μ−1)X^{μ−2}B′ + (μ−1)(μ−2)X^{μ−3}B] − 4i(μ−1)(μ−2)(μ−3)T(μ−4)
    let i4 = 4.0 * C64::i();
    let mut tail = C64::new(0.0, 0.0);
    let mut factor = C64::new(1.0, 0.0);
    let mut mu = lambda - 1.0;
    let mut remainder = f64::INFINITY;
    for _ in 0..40 {
        let x = radius;
        let boundary = -i4
            * (b2 * x.powf(mu - 1.0) - b1 * (mu - 1.0) * x.powf(mu - 2.0)
                + b0 * (mu - 1.0) * (mu - 2.0) * x.powf(mu - 3.0));
        let term = factor * boundary;
        // the recursion is asymptotic: stop at the smallest term
        if term.norm() > remainder {
            break;
        }
        tail += term;
        remainder = term.norm();
        factor *= -i4 * (mu - 1.0) * (mu - 2.0) * (mu - 3.0);
        mu -= 4.0;
        if remainder < 1e-17 {
            break;
        }
    }
    lhs += tail;
    if remainder > tol {
        return Err(Error::NonConvergence(format!(
            "Mellin tail recursion left a remainder {remainder:.2e} above tol {tol:.1e}"
        )));
    }
    let rhs = mellin_closed_form(lambda)?;
    Ok(MellinCheck {
        lambda,
        lhs_re: lhs.re,
        lhs_im: lhs.im,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        radius,
        tail: tail.norm(),
        tail_remainder: remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{constant_b0, gamma_real};

    /// Entire Taylor series of B; cancellation keeps it usable for |x| ≲ 10.
    fn taylor_b(x: f64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        let mut pow = 1.0; // x^{2m}/(2m)!
        for m in 0..200 {
            let mf = m as f64;
            if m > 0 {
                pow *= -x * x / ((2.0 * mf - 1.0) * (2.0 * mf));
            }
            let g = gamma_real((2.0 * mf + 1.0) / 4.0).unwrap();
            let term = pow * g / 4.0 * C64::from_polar(1.0, -PI * (2.0 * mf + 1.0) / 8.0);
            sum += term;
            if m > 20 && term.norm() < 1e-30 {
                break;
            }
        }
        sum / PI
    }

    /// Real-axis quadrature of the damped integral with e^{−εξ⁴}, Richardson-extrapolated to ε → 0.
    fn regularized_b(x: f64) -> C64 {
        let damped = |eps: f64| {
            let cut = (45.0 / eps).powf(0.25);
            let f = |xi: f64| {
                let w = xi.powi(4);
                C64::new(-eps * w, x * xi - w).exp() + C64::new(-eps * w, -x * xi - w).exp()
            };
            let panels = 400;
            let h = cut / panels as f64;
            let mut s = C64::new(0.0, 0.0);
            for p in 0..panels {
                s += integrate(f, p as f64 * h, (p + 1) as f64 * h, 1e-15, 1e-14).unwrap().value;
            }
            s / (2.0 * PI)
        };
        let e = [0.02, 0.01, 0.005, 0.0025];
        let mut t: Vec<C64> = e.iter().map(|&v| damped(v)).collect();
        for level in 1..t.len() {
            let f = 2f64.powi(level as i32);
            for k in (level..t.len()).rev() {
                t[k] = (t[k] * f - t[k - 1]) / (f - 1.0);
            }
        }
        t[e.len() - 1]
    }

    #[test]
    fn origin_value() {
        let b = kernel_b(0.0, 1e-12).unwrap();
        assert!((b - constant_b0()).norm() < 1e-10);
        assert!((b - C64::new(0.266_554_830_338_112_03, -0.110_410_625_842_105_33)).norm() < 1e-12);
    }

    #[test]
    fn frozen_values() {
        // 60-digit references from the Taylor series
        let refs = [
            (1.0, C64::new(0.246_837_718_732_732_4, -0.068_101_226_353_666_32)),
            (5.0, C64::new(-0.106_664_870_802_141_65, -0.011_312_823_416_405_267)),
            (10.0, C64::new(-0.084_705_746_941_720_88, 0.003_859_786_690_770_248)),
            (-3.0, C64::new(0.061_192_740_075_287_98, 0.102_329_073_308_335_82)),
        ];
        for (x, v) in refs {
            let b = kernel_b(x, 1e-13).unwrap();
            assert!((b - v).norm() < 1e-11, "x = {x}: {b} vs {v}");
        }
        // far out, where the saddle sits well away from the origin
        let b = kernel_b(80.0, 1e-13).unwrap();
        assert!((b - C64::new(0.011_999_545_317_253_211, -0.040_694_656_950_322_97)).norm() < 1e-12);
        let b3 = kernel_b_derivative(80.0, 3, 1e-13).unwrap();
        assert!((b3 - C64::new(-0.813_893_139_006_459_4, -0.239_990_906_345_064_22)).norm() < 1e-11);
    }

    #[test]
    fn contour_matches_taylor_series() {
        for k in 0..=40 {
            let x = -10.0 + 0.5 * k as f64;
            let b = kernel_b(x, 1e-13).unwrap();
            let t = taylor_b(x);
            assert!((b - t).norm() < 1e-9, "x = {x}: {b} vs {t}");
        }
    }

    #[test]
    fn contour_matches_regularized_real_axis() {
        for &x in &[0.0, 1.0, 2.5, 5.0] {
            let b = kernel_b(x, 1e-13).unwrap();
            let r = regularized_b(x);
            assert!((b - r).norm() < 1e-7, "x = {x}: {b} vs {r}");
        }
    }

    #[test]
    fn even_symmetry_and_kernel_equation() {
        for &x in &[0.3, 2.0, 7.5, 30.0, 80.0] {
            let p = kernel_b(x, 1e-13).unwrap();
            let m = kernel_b(-x, 1e-13).unwrap();
            assert!((p - m).norm() < 1e-12);
            let b3 = kernel_b_derivative(x, 3, 1e-13).unwrap();
            let r = (p * x - C64::i() * 4.0 * b3).norm();
            assert!(r < 1e-10 * (1.0 + x), "x = {x}: residual {r}");
        }
    }

    #[test]
    fn lambda_kernel_origin_closed_form() {
        for &l in &[-2.0, -1.5, -1.0, -0.5, 0.0, 0.25, 1.0 / 3.0, 0.45] {
            let num = kernel_b_lambda(0.0, l, 1e-13).unwrap();
            let exact = kernel_b_lambda_at_zero(l).unwrap();
            assert!((num - exact).norm() < 1e-11, "λ = {l}: {num} vs {exact}");
        }
    }

    #[test]
    fn lambda_kernel_derivative_lowers_order() {
        // d/dx B_λ = −B_{λ−1}
        for &l in &[0.0, 0.25, -0.5] {
            for &x in &[-2.0, 0.0, 1.5, 6.0] {
                let d = fourier_profile(x, l, 1, SpectralWeight::Propagator, 1e-13).unwrap();
                let lower = kernel_b_lambda(x, l - 1.0, 1e-13).unwrap();
                assert!((d + lower).norm() < 1e-10, "λ = {l}, x = {x}");
            }
        }
    }

    #[test]
    fn moment_weights_integrate_kernel() {
        // P0(z) = ∫₀¹ s^{(λ−1)/4}... checked through the defining time integral at fixed x:
        // ∫₀^τ σ^{(λ−1)/4} B_λ(xσ^{−1/4}) dσ = τ^{(λ+3)/4} P0(xτ^{−1/4})
        let (l, x, tau) = (1.0 / 3.0, 0.7, 0.8);
        let f = |sig: f64| {
            if sig <= 0.0 {
                return C64::new(0.0, 0.0);
            }
            kernel_b_lambda(x * sig.powf(-0.25), l, 1e-13).unwrap() * sig.powf((l - 1.0) / 4.0)
        };
        let direct = integrate(f, 0.0, tau, 1e-12, 1e-12).unwrap().value;
        let z = x * tau.powf(-0.25);
        let p0 = fourier_profile(z, l, 0, SpectralWeight::Moment0, 1e-13).unwrap();
        assert!((direct - p0 * tau.powf((l + 3.0) / 4.0)).norm() < 1e-9);
        let g = |sig: f64| f(sig) * sig;
        let direct1 = integrate(g, 0.0, tau, 1e-12, 1e-12).unwrap().value;
        let p1 = fourier_profile(z, l, 0, SpectralWeight::Moment1, 1e-13).unwrap();
        assert!((direct1 - p1 * tau.powf((l + 7.0) / 4.0)).norm() < 1e-9);
    }

    #[test]
    fn table_interpolation_error() {
        let t = KernelTable::kernel_b(20.0, 0.05, 1e-13).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..157 {
            let x = -19.9 + 0.2537 * k as f64;
            let e = (t.eval(x).unwrap() - kernel_b(x, 1e-13).unwrap()).norm();
            worst = worst.max(e);
        }
        assert!(worst < 1e-8, "{worst}");
        assert!(t.eval(25.0).is_none());
    }

    #[test]
    fn second_differences_converge() {
        let d2 = |h: f64| {
            let b = |x: f64| kernel_b(x, 1e-14).unwrap();
            (b(2.0 + h) - b(2.0) * 2.0 + b(2.0 - h)) / (h * h)
        };
        let exact = kernel_b_derivative(2.0, 2, 1e-14).unwrap();
        let (e1, e2) = ((d2(0.1) - exact).norm(), (d2(0.05) - exact).norm());
        assert!(e2 < e1 / 3.5 && e1 < 1e-2);
    }

    #[test]
    fn mellin_identity_mid_range() {
        let r = mellin_check(0.25, 1e-8).unwrap();
        assert!((r.lhs() - r.rhs()).norm() < 1e-6, "{r:?}");
        let r = mellin_check(0.1, 1e-8).unwrap();
        assert!((r.lhs() - r.rhs()).norm() < 1e-6, "{r:?}");
        let r = mellin_check(0.35, 1e-8).unwrap();
        assert!((r.lhs() - r.rhs()).norm() < 1e-5, "{r:?}");
        assert!(mellin_check(0.4, 1e-8).is_err());
    }

    #[test]
    fn mellin_identity_full_grid() {
        for &l in &[0.05, 0.1, 0.2, 0.25, 0.3, 0.35] {
            let r = mellin_check(l, 1e-8).unwrap();
            assert!(r.relative_error() < 1e-5, "λ = {l}: {r:?}");
        }
    }

    #[test]
    fn mellin_frozen_rhs() {
        let r = mellin_closed_form(0.25).unwrap();
        assert!((r - C64::new(1.253_732_737_890_940_1, -0.380_315_668_169_170_13)).norm() < 1e-13);
        let _ = gamma_real(0.5).unwrap();
    }
}

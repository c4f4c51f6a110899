//! Adaptive Gauss–Kronrod, Gauss–Legendre and Gauss–Jacobi rules.

use crate::error::{Error, Result};
use crate::special::{gamma_real, C64};
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
    pub panels: usize,
}

/// Globally adaptive 15-point Gauss–Kronrod integration of a complex integrand over [a, b].
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    const MAX_PANELS: usize = 4000;
    if a == b {
        return Ok(Integral { value: C64::new(0.0, 0.0), error: 0.0, panels: 0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.norm()) {
        if heap.len() >= MAX_PANELS {
            return Err(Error::NonConvergence(format!(
                "adaptive Gauss-Kronrod on [{a}, {b}] stalled at error {err:.3e}"
            )));
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, val: v2, err: e2 });
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::NonConvergence("integrand produced non-finite values".into()));
        }
    }
    // Re-sum to shed accumulated cancellation in the running total.
    let value = heap.iter().fold(C64::new(0.0, 0.0), |s, p| s + p.val);
    let error = heap.iter().map(|p| p.err).sum();
    Ok(Integral { value, error, panels: heap.len() })
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.
/// Returns eigenvalues and the first component of each normalised eigenvector.
fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    // first row of the eigenvector matrix, tracked through the rotations
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence("tridiagonal QL iteration".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Gauss–Jacobi rule for ∫₀¹ x^{β} g(x) dx with β > −1 (Golub–Welsch).
pub fn gauss_jacobi_unit(n: usize, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if beta <= -1.0 || n == 0 {
        return Err(Error::InvalidInput(format!("Gauss-Jacobi needs β > −1 and n ≥ 1, got β = {beta}")));
    }
    // weight (1 + y)^β on [−1, 1] with α = 0
    let alpha = 0.0;
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = if k == 0 { (beta - alpha) / (ab + 2.0) } else { (beta * beta - alpha * alpha) / (s * (s + 2.0)) };
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            off[k] = (4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma_real(alpha + 1.0)? * gamma_real(beta + 1.0)? / gamma_real(ab + 2.0)?;
    let (nodes, first) = tridiagonal_eigen(&diag, &off)?;
    let mut pairs: Vec<(f64, f64)> = nodes.iter().zip(&first).map(|(&y, &v)| (y, mu0 * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // map y ∈ [−1, 1] to x = (1 + y)/2: (1 + y)^β dy = 2^{β+1} x^β dx
    let scale = 2f64.powf(-(beta + 1.0));
    Ok((pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect(), pairs.iter().map(|p| p.1 * scale).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_exact() {
        let r = integrate(|x| C64::new(x.powi(6), x), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((r.value - C64::new(128.0 / 7.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x| C64::new(x.powf(-0.5), 0.0), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_moments() {
        for &beta in &[-0.9, -0.5, 0.0, 0.7] {
            let (x, w) = gauss_jacobi_unit(12, beta).unwrap();
            for k in 0..20 {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
                let exact = 1.0 / (k as f64 + beta + 1.0);
                assert!((s - exact).abs() < 1e-13 * exact.max(1.0), "β={beta} k={k}: {s} vs {exact}");
            }
        }
    }
}

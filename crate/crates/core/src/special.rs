//! Complex Gamma function, the (τ − i0) power and the kernel constants.

use crate::error::{ensure_finite, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type C64 = Complex64;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * x
}

/// Γ(z) for complex `z`, with reflection for Re z < 1/2.
pub fn gamma(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole { what: "gamma", at: z.re });
    }
    let v = if z.re < 0.5 { PI / ((PI * z).sin() * gamma_right(1.0 - z)) } else { gamma_right(z) };
    ensure_finite(v, "gamma")
}

/// Γ(x) for real `x`.
pub fn gamma_real(x: f64) -> Result<f64> {
    Ok(gamma(C64::new(x, 0.0))?.re)
}

/// 1/Γ(x) for real `x`; zero at the poles.
pub fn rgamma_real(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        gamma(C64::new(x, 0.0)).map_or(0.0, |v| 1.0 / v.re)
    }
}

/// The boundary value (τ − i0)^{−α}: |τ|^{−α} for τ > 0 and e^{iπα}|τ|^{−α} for τ < 0.
pub fn power_tau_minus_i0(tau: f64, alpha: C64) -> Result<C64> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!("(τ − i0)^(−α) needs finite τ ≠ 0, got {tau}")));
    }
    let mag = (-alpha * tau.abs().ln()).exp();
    let v = if tau > 0.0 { mag } else { (C64::i() * PI * alpha).exp() * mag };
    ensure_finite(v, "power_tau_minus_i0")
}

/// B(0) = Γ(5/4) e^{−iπ/8} / π, the kernel value at the origin.
pub fn constant_b0() -> C64 {
    let g = gamma_real(1.25).expect("Γ(5/4) is finite");
    -C64::from_polar(1.0, 7.0 * PI / 8.0) * g / PI
}

/// M = 1 / (B(0) Γ(3/4)), the normalisation making the Dirichlet trace of L⁰f equal f.
pub fn constant_m() -> C64 {
    let g = gamma_real(0.75).expect("Γ(3/4) is finite");
    1.0 / (constant_b0() * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Stirling series after shifting the argument past 30; independent of the Lanczos fit.
    fn stirling_gamma(z: C64) -> C64 {
        let mut shift = C64::new(1.0, 0.0);
        let mut w = z;
        while w.norm() < 30.0 || w.re < 30.0 {
            shift *= w;
            w += 1.0;
        }
        let inv = 1.0 / w;
        let inv2 = inv * inv;
        let series =
            inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
        let lng = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
        lng.exp() / shift
    }

    #[test]
    fn gamma_small_integers() {
        assert!((gamma(C64::new(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((gamma(C64::new(5.0, 0.0)).unwrap() - 24.0).norm() < 1e-12);
        assert!((gamma(C64::new(0.5, 0.0)).unwrap() - PI.sqrt()).norm() < 1e-14);
    }

    #[test]
    fn gamma_five_quarters_frozen() {
        // 60-digit reference: 0.906402477055477077982671288966918...
        let g = gamma(C64::new(1.25, 0.0)).unwrap();
        assert!((g.re - 0.906_402_477_055_477_1).abs() < 1e-14);
        assert!(g.im.abs() < 1e-15);
        let s = stirling_gamma(C64::new(1.25, 0.0));
        assert!((g - s).norm() / s.norm() < 1e-13);
    }

    #[test]
    fn gamma_matches_stirling_on_disk() {
        for &(re, im) in &[(0.3, 0.0), (2.5, 3.0), (-3.7, 1.2), (10.0, -7.0), (0.1, 19.0), (-12.5, 0.3)] {
            let z = C64::new(re, im);
            let a = gamma(z).unwrap();
            let b = stirling_gamma(z);
            assert!((a - b).norm() / b.norm() < 1e-12, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn gamma_poles() {
        for k in 0..5 {
            assert!(matches!(gamma(C64::new(-(k as f64), 0.0)), Err(Error::Pole { .. })));
        }
    }

    #[test]
    fn reflection_at_point_three() {
        let z = C64::new(0.3, 0.0);
        let v = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin() / PI;
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn tau_power_branches() {
        assert!((power_tau_minus_i0(2.0, C64::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((power_tau_minus_i0(1.0, C64::new(0.5, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((power_tau_minus_i0(-1.0, C64::new(0.5, 0.0)).unwrap() - C64::i()).norm() < 1e-15);
        assert!(power_tau_minus_i0(0.0, C64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn kernel_constants() {
        let b0 = constant_b0();
        // 60-digit reference values.
        assert!((b0 - C64::new(0.266_554_830_338_112_03, -0.110_410_625_842_105_33)).norm() < 1e-14);
        assert!((b0.norm() - 0.288_516_869_308_234_84).abs() < 1e-14);
        let m = constant_m();
        let closed = 2.0 * 2f64.sqrt() * C64::from_polar(1.0, PI / 8.0);
        assert!((m - closed).norm() < 1e-13);
        assert!((m.norm() - 2.828_427_124_746_19).abs() < 1e-13);
        let g34 = gamma_real(0.75).unwrap();
        assert!((m * b0 * g34 - 1.0).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn reflection_identity(re in 0.01f64..0.99, im in -3.0f64..3.0) {
            let z = C64::new(re, im);
            let v = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin() / PI;
            prop_assert!((v - 1.0).norm() < 1e-10);
        }

        #[test]
        fn recurrence(re in -8.0f64..15.0, im in 0.05f64..4.0) {
            let z = C64::new(re, im);
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            prop_assert!((lhs - rhs).norm() / rhs.norm() < 1e-11);
        }

        #[test]
        fn tau_power_alpha_derivative(tau in prop_oneof![0.1f64..5.0, -5.0f64..-0.1], a in -1.0f64..1.0) {
            let h = 1e-6;
            let alpha = C64::new(a, 0.0);
            let fd = (power_tau_minus_i0(tau, alpha + h).unwrap()
                - power_tau_minus_i0(tau, alpha - h).unwrap()) / (2.0 * h);
            let phase = if tau < 0.0 { C64::i() * PI } else { C64::new(0.0, 0.0) };
            let exact = power_tau_minus_i0(tau, alpha).unwrap() * (phase - tau.abs().ln());
            prop_assert!((fd - exact).norm() < 1e-6 * (1.0 + exact.norm()));
        }
    }
}

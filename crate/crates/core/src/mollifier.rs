//! The compactly supported bump kernel and its scalings.
//!
//! The unscaled bump is `C * exp(1 / (x^2 - 1))` on `|x| < 1` and zero
//! elsewhere, with `C = 1 / 0.443994`. The scaled kernel is
//! `phi_eps(x) = phi(x / eps) / eps`, supported on `[-eps, eps]`.

use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;

/// Printed value of the integral of `exp(1 / (x^2 - 1))` over `[-1, 1]`.
pub const BUMP_INTEGRAL: f64 = 0.443994;

/// Exponents below this are treated as exact zeros.
const EXPONENT_CUTOFF: f64 = -700.0;

/// Node count of the composite Gauss-Legendre rule used for kernel masses.
const MASS_NODES: usize = 2000;

/// The bump kernel: normalization constant and support radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub normalization: f64,
    pub support_radius: f64,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self {
            normalization: 1.0 / BUMP_INTEGRAL,
            support_radius: 1.0,
        }
    }
}

impl MollifierSpec {
    /// Recomputes the unnormalized bump integral and checks it against the
    /// printed constant to its printed precision (1e-4). Returns the integral.
    pub fn self_check(&self) -> Result<f64> {
        let integral = composite_gauss_legendre(-1.0, 1.0, MASS_NODES, unnormalized_bump);
        if (integral - BUMP_INTEGRAL).abs() > 1e-4 {
            return Err(Error::Precondition(format!(
                "bump integral {integral} disagrees with normalization constant {BUMP_INTEGRAL}"
            )));
        }
        Ok(integral)
    }
}

fn unnormalized_bump(x: f64) -> f64 {
    let d = x * x - 1.0;
    if d >= 0.0 {
        return 0.0;
    }
    let e = 1.0 / d;
    if e < EXPONENT_CUTOFF {
        0.0
    } else {
        e.exp()
    }
}

/// The unscaled bump `phi(x)`.
pub fn bump_value(x: f64) -> f64 {
    unnormalized_bump(x) / BUMP_INTEGRAL
}

/// Derivative of the unscaled bump of the given order (0, 1 or 2).
pub(crate) fn bump_derivative(z: f64, order: u32) -> f64 {
    let d = z * z - 1.0;
    if d >= 0.0 {
        return 0.0;
    }
    let e = 1.0 / d;
    if e < EXPONENT_CUTOFF {
        return 0.0;
    }
    let psi = e.exp() / BUMP_INTEGRAL;
    match order {
        0 => psi,
        1 => psi * (-2.0 * z * e * e),
        2 => {
            let g1 = -2.0 * z * e * e;
            let g2 = (6.0 * z * z + 2.0) * e * e * e;
            psi * (g1 * g1 + g2)
        }
        _ => unreachable!("bump derivative order {order}"),
    }
}

/// `[phi_eps, phi_eps', phi_eps'']` at `x`, sharing one exponential.
#[inline]
pub(crate) fn scaled_with_derivatives(eps: f64, x: f64) -> [f64; 3] {
    let z = x / eps;
    let d = z * z - 1.0;
    if d >= 0.0 {
        return [0.0; 3];
    }
    let e = 1.0 / d;
    if e < EXPONENT_CUTOFF {
        return [0.0; 3];
    }
    let psi = e.exp() / BUMP_INTEGRAL / eps;
    let g1 = -2.0 * z * e * e;
    let g2 = (6.0 * z * z + 2.0) * e * e * e;
    [psi, psi * g1 / eps, psi * (g1 * g1 + g2) / (eps * eps)]
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("mollifier scale must be positive, got {eps}")))
    }
}

/// `phi_eps(x) = phi(x / eps) / eps`.
pub fn mollifier_value(eps: f64, x: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(scaled(eps, x))
}

#[inline]
pub(crate) fn scaled(eps: f64, x: f64) -> f64 {
    bump_value(x / eps) / eps
}

/// `d^order/dx^order phi_eps(x)` for order 1 or 2.
pub fn mollifier_derivative(eps: f64, x: f64, order: u32) -> Result<f64> {
    check_eps(eps)?;
    if !(1..=2).contains(&order) {
        return Err(Error::invalid(format!(
            "mollifier derivative order must be 1 or 2, got {order}"
        )));
    }
    Ok(scaled_derivative(eps, x, order))
}

#[inline]
pub(crate) fn scaled_derivative(eps: f64, x: f64, order: u32) -> f64 {
    bump_derivative(x / eps, order) / eps.powi(1 + order as i32)
}

/// Quadrature of `phi_eps` over its support.
pub fn mollifier_mass(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(composite_gauss_legendre(-eps, eps, MASS_NODES, |x| {
        scaled(eps, x)
    }))
}

/// `||phi^(order)||_{L^1}` of the unscaled bump.
pub fn bump_derivative_l1(order: u32) -> f64 {
    composite_gauss_legendre(-1.0, 1.0, MASS_NODES, |z| bump_derivative(z, order).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bump_spot_values() {
        assert_eq!(bump_value(1.0), 0.0);
        assert_eq!(bump_value(-2.0), 0.0);
        let centre = (-1f64).exp() / 0.443994;
        assert!((bump_value(0.0) - centre).abs() < 1e-15);
        assert!((bump_value(0.0) - 0.82857).abs() < 1e-5);
    }

    #[test]
    fn bump_is_zero_near_boundary_without_noise() {
        // 1/(x^2-1) < -700 well before |x| reaches 1
        assert_eq!(bump_value(0.9993), 0.0);
        assert!(bump_value(0.99) > 0.0);
    }

    #[test]
    fn scaled_kernel_values() {
        assert_eq!(mollifier_value(0.5, 0.5).unwrap(), 0.0);
        let v = mollifier_value(0.1, 0.0).unwrap();
        assert!((v - bump_value(0.0) / 0.1).abs() < 1e-12);
        assert!((v - 8.2857).abs() < 1e-4);
        assert_eq!(mollifier_value(1.0, 0.0).unwrap(), bump_value(0.0));
        assert!(mollifier_value(0.0, 0.0).is_err());
        assert!(mollifier_value(-1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_spot_values() {
        assert_eq!(mollifier_derivative(0.1, 0.0, 1).unwrap(), 0.0);
        assert_eq!(mollifier_derivative(0.1, 0.15, 2).unwrap(), 0.0);
        assert!(mollifier_derivative(0.1, 0.0, 3).is_err());
        assert!(mollifier_derivative(0.1, 0.0, 0).is_err());

        let eps = 0.1;
        let x = 0.05;
        let h = 1e-6 * eps;
        let fd = (scaled(eps, x + h) - scaled(eps, x - h)) / (2.0 * h);
        let exact = mollifier_derivative(eps, x, 1).unwrap();
        assert!(((exact - fd) / exact).abs() < 1e-6);
    }

    #[test]
    fn mass_is_one() {
        for eps in [1.0, 0.1, 0.01, 0.001] {
            let m = mollifier_mass(eps).unwrap();
            assert!((m - 1.0).abs() <= 1e-6, "eps={eps}: mass {m}");
        }
    }

    #[test]
    fn self_check_recovers_printed_constant() {
        let integral = MollifierSpec::default().self_check().unwrap();
        assert!((integral - BUMP_INTEGRAL).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn kernel_is_nonnegative_even_and_supported(
            eps in 1e-4f64..2.0,
            t in -3.0f64..3.0,
        ) {
            let x = t * eps;
            let v = mollifier_value(eps, x).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v, mollifier_value(eps, -x).unwrap());
            if x.abs() >= eps {
                prop_assert_eq!(v, 0.0);
            }
        }

        #[test]
        fn analytic_derivatives_match_finite_differences(
            eps in 1e-3f64..1.0,
            t in -0.9f64..0.9,
        ) {
            let x = t * eps;
            let h = 1e-6 * eps;
            let d1 = mollifier_derivative(eps, x, 1).unwrap();
            let d2 = mollifier_derivative(eps, x, 2).unwrap();
            let fd1 = (scaled(eps, x + h) - scaled(eps, x - h)) / (2.0 * h);
            let fd2 = (scaled_derivative(eps, x + h, 1) - scaled_derivative(eps, x - h, 1)) / (2.0 * h);
            let scale1 = d1.abs().max(1e-3 / (eps * eps));
            let scale2 = d2.abs().max(1e-3 / (eps * eps * eps));
            prop_assert!((d1 - fd1).abs() <= 1e-5 * scale1, "d1 {} fd {}", d1, fd1);
            prop_assert!((d2 - fd2).abs() <= 1e-5 * scale2, "d2 {} fd {}", d2, fd2);
        }
    }
}

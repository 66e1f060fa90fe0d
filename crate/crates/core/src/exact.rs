//! Initial data and the piecewise distributional solution of the Heaviside
//! model `u_tt = (H u_x)_x`.
//!
//! Left of the jump the coefficient vanishes and `u` evolves as `g0 + t g1`;
//! right of it the d'Alembert solution is glued along `x = 0` using the
//! compatibility condition `g1(t) + g0'(t) - g1(0) = 0`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::coefficients::RealFn;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Residual above which data is treated as incompatible.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-8;

/// Time step defining the sampling density of [`check_compatibility`].
const COMPATIBILITY_DT: f64 = 0.002;

/// Spacing of the memoized antiderivative anchors.
const ANCHOR_SPACING: f64 = 0.01;
const SIMPSON_TOL: f64 = 1e-10;

/// `-x^4 (x-1)^4 (x+1)^4` on `|x| < 1`.
pub fn default_g0(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    -(x.powi(4) * (x - 1.0).powi(4) * (x + 1.0).powi(4))
}

/// Derivative of [`default_g0`]: `-4 x^3 (x^2-1)^3 (3x^2-1)`.
pub fn default_g0_prime(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let q = x * x - 1.0;
    -4.0 * x.powi(3) * q.powi(3) * (3.0 * x * x - 1.0)
}

/// The initial velocity as printed, term by term; equals `-g0'`.
pub fn default_g1(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let (m, p) = (x - 1.0, x + 1.0);
    4.0 * x.powi(3) * m.powi(4) * p.powi(4)
        + 4.0 * x.powi(4) * m.powi(3) * p.powi(4)
        + 4.0 * x.powi(4) * m.powi(4) * p.powi(3)
}

/// Cauchy data `u(0) = g0`, `u_t(0) = g1`, supported in `[-R, R]`.
#[derive(Clone)]
pub struct InitialData {
    g0: RealFn,
    g0_prime: RealFn,
    g1: RealFn,
    g1_antiderivative: Option<RealFn>,
    support_radius: f64,
    memo: Arc<OnceLock<AnchorTable>>,
}

/// `G1` at evenly spaced anchors across the support.
struct AnchorTable {
    start: f64,
    values: Vec<f64>,
}

impl InitialData {
    pub fn new(
        g0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g0_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_radius: f64,
    ) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::invalid(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        Ok(Self {
            g0: Arc::new(g0),
            g0_prime: Arc::new(g0_prime),
            g1: Arc::new(g1),
            g1_antiderivative: None,
            support_radius,
            memo: Arc::new(OnceLock::new()),
        })
    }

    /// Supplies `G1` in closed form; it must satisfy `G1(0) = 0`.
    pub fn with_antiderivative(mut self, g1_int: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g1_antiderivative = Some(Arc::new(g1_int));
        self
    }

    /// The default data of the experiments, with `G1 = -g0`.
    pub fn paper_default() -> Self {
        Self::new(default_g0, default_g0_prime, default_g1, 1.0)
            .expect("valid radius")
            .with_antiderivative(|x| -default_g0(x))
    }

    pub fn g0(&self, x: f64) -> f64 {
        (self.g0)(x)
    }

    pub fn g0_prime(&self, x: f64) -> f64 {
        (self.g0_prime)(x)
    }

    pub fn g1(&self, x: f64) -> f64 {
        (self.g1)(x)
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `G1(x) = int_0^x g1`.
    pub fn g1_antiderivative(&self, x: f64) -> f64 {
        if let Some(g) = &self.g1_antiderivative {
            return g(x);
        }
        let table = self.memo.get_or_init(|| self.build_anchor_table());
        let r = self.support_radius;
        let x = x.clamp(-r, r);
        let k = (((x - table.start) / ANCHOR_SPACING).floor() as usize).min(table.values.len() - 1);
        let anchor = table.start + k as f64 * ANCHOR_SPACING;
        let g1 = &self.g1;
        table.values[k] + adaptive_simpson(&|s| g1(s), anchor, x, SIMPSON_TOL)
    }

    fn build_anchor_table(&self) -> AnchorTable {
        let r = self.support_radius;
        let n = (2.0 * r / ANCHOR_SPACING).ceil() as usize;
        let start = -(n as f64) * ANCHOR_SPACING / 2.0;
        let g1 = &self.g1;
        // accumulate outwards from the anchor nearest to 0 so that G1(0) = 0
        let mid = n / 2;
        let mut values = vec![0.0; n + 1];
        for k in mid + 1..=n {
            let a = start + (k - 1) as f64 * ANCHOR_SPACING;
            values[k] = values[k - 1] + adaptive_simpson(&|s| g1(s), a, a + ANCHOR_SPACING, SIMPSON_TOL);
        }
        for k in (0..mid).rev() {
            let b = start + (k + 1) as f64 * ANCHOR_SPACING;
            values[k] = values[k + 1] - adaptive_simpson(&|s| g1(s), b - ANCHOR_SPACING, b, SIMPSON_TOL);
        }
        let origin = start + mid as f64 * ANCHOR_SPACING;
        let offset = adaptive_simpson(&|s| g1(s), 0.0, origin, SIMPSON_TOL);
        for v in &mut values {
            *v += offset;
        }
        AnchorTable { start, values }
    }
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("support_radius", &self.support_radius)
            .field("closed_form_antiderivative", &self.g1_antiderivative.is_some())
            .finish()
    }
}

/// `sup |g1(t) + g0'(t) - g1(0)|` over `ceil(10 T / 0.002)` evenly spaced
/// times in `[0, T]`.
pub fn check_compatibility(data: &InitialData, t_final: f64) -> Result<f64> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::invalid(format!("T must be positive, got {t_final}")));
    }
    let n = ((10.0 * t_final / COMPATIBILITY_DT).ceil() as usize).max(2);
    let g1_0 = data.g1(0.0);
    let residual = (0..n)
        .map(|i| {
            let t = t_final * i as f64 / (n - 1) as f64;
            (data.g1(t) + data.g0_prime(t) - g1_0).abs()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

/// d'Alembert solution of `u_tt = u_xx` with the given data.
pub fn dalembert(data: &InitialData, t: f64, x: f64) -> f64 {
    0.5 * (data.g0(x + t) + data.g0(x - t))
        + 0.5 * (data.g1_antiderivative(x + t) - data.g1_antiderivative(x - t))
}

/// The piecewise solution `u(t, x)` and `u_t(t, x)` for compatible data.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    data: InitialData,
    t_max: f64,
}

impl ExactSolution {
    /// Checks compatibility on `[0, t_max]` and refuses incompatible data.
    pub fn new(data: InitialData, t_max: f64) -> Result<Self> {
        let residual = check_compatibility(&data, t_max)?;
        if residual > COMPATIBILITY_TOLERANCE {
            return Err(Error::Precondition(format!(
                "initial data violates the compatibility condition (residual {residual:e})"
            )));
        }
        Ok(Self { data, t_max })
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("time must be non-negative, got {t}")));
        }
        if t > self.t_max {
            return Err(Error::Precondition(format!(
                "compatibility was checked up to t = {}, asked for t = {t}",
                self.t_max
            )));
        }
        Ok(())
    }

    pub fn u(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t)?;
        let d = &self.data;
        let big_g = |s| d.g1_antiderivative(s);
        Ok(if x < 0.0 {
            d.g0(x) + t * d.g1(x)
        } else if x < t {
            0.5 * (d.g0(x + t) - d.g0(t - x))
                + 0.5 * (big_g(x + t) - big_g(t - x))
                + d.g0(0.0)
                + (t - x) * d.g1(0.0)
        } else {
            0.5 * (d.g0(x + t) + d.g0(x - t)) + 0.5 * (big_g(x + t) - big_g(x - t))
        })
    }

    pub fn ut(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t)?;
        let d = &self.data;
        Ok(if x < 0.0 {
            d.g1(x)
        } else if x < t {
            0.5 * (d.g0_prime(x + t) - d.g0_prime(t - x))
                + 0.5 * (d.g1(x + t) - d.g1(t - x))
                + d.g1(0.0)
        } else {
            0.5 * (d.g0_prime(x + t) - d.g0_prime(x - t)) + 0.5 * (d.g1(x + t) + d.g1(x - t))
        })
    }
}

//! Singular coefficients and their mollifier regularizations.
//!
//! A coefficient is one of the three singular families (Heaviside, Dirac
//! delta, the homogeneous distribution `chi^alpha_+ = x_+^alpha / Gamma(alpha+1)`)
//! or a smooth function. [`regularize`] samples `a * phi_omega` and its first
//! two derivatives on a grid, always putting the derivatives on the kernel.
//!
//! Convolutions of functions (Heaviside, `chi^alpha_+`, smooth) use the
//! kernel rescaled to unit discrete mass, so constants are reproduced exactly
//! and `H_eps` is exactly `0`, `1/2` and `1` left of, at, and right of the
//! support. The delta regularization is the kernel itself.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::mollifier::{bump_value, scaled_with_derivatives};
use crate::quadrature::{gauss_legendre_200, gauss_legendre_200_vec3};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Forcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `Gamma(z)` on `(0, 2]`.
pub fn gamma_function(z: f64) -> Result<f64> {
    if !(z > 0.0 && z <= 2.0) {
        return Err(Error::invalid(format!("gamma_function needs z in (0, 2], got {z}")));
    }
    Ok(statrs::function::gamma::gamma(z))
}

/// `chi^alpha_+(x) = x_+^alpha / Gamma(alpha + 1)` for `alpha` in `(-1, 0]`.
pub fn chi_alpha_value(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > -1.0 && alpha <= 0.0) {
        return Err(Error::invalid(format!("chi_alpha needs alpha in (-1, 0], got {alpha}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(x.powf(alpha) / gamma_function(alpha + 1.0)?)
}

/// A smooth coefficient with optional closed-form derivatives.
#[derive(Clone)]
pub struct SmoothFn {
    value: RealFn,
    d1: Option<RealFn>,
    d2: Option<RealFn>,
    label: String,
}

impl SmoothFn {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            d1: None,
            d2: None,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant({c})"), move |_| c)
            .with_derivatives(|_| 0.0, |_| 0.0)
    }

    pub fn with_derivatives(
        mut self,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.d1 = Some(Arc::new(d1));
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn")
            .field("label", &self.label)
            .field("has_derivatives", &self.d1.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum CoefficientKind {
    Heaviside,
    Delta,
    /// `chi^alpha_+` with `alpha` in `[-1, 0]`.
    ChiAlpha(f64),
    Smooth(SmoothFn),
}

#[derive(Debug, Clone)]
pub struct CoefficientSpec {
    pub kind: CoefficientKind,
    pub jump_location: f64,
}

impl CoefficientSpec {
    pub fn heaviside() -> Self {
        Self {
            kind: CoefficientKind::Heaviside,
            jump_location: 0.0,
        }
    }

    pub fn delta() -> Self {
        Self {
            kind: CoefficientKind::Delta,
            jump_location: 0.0,
        }
    }

    pub fn chi_alpha(alpha: f64) -> Result<Self> {
        if !(-1.0..=0.0).contains(&alpha) {
            return Err(Error::invalid(format!("chi_alpha needs alpha in [-1, 0], got {alpha}")));
        }
        Ok(Self {
            kind: CoefficientKind::ChiAlpha(alpha),
            jump_location: 0.0,
        })
    }

    pub fn smooth(f: SmoothFn) -> Self {
        Self {
            kind: CoefficientKind::Smooth(f),
            jump_location: 0.0,
        }
    }

    pub fn at(mut self, jump_location: f64) -> Self {
        self.jump_location = jump_location;
        self
    }

    /// The kind actually regularized: `chi^0_+` is the Heaviside function and
    /// `chi^{-1}_+` is the delta.
    pub fn dispatched(&self) -> CoefficientKind {
        match self.kind {
            CoefficientKind::ChiAlpha(a) if a == 0.0 => CoefficientKind::Heaviside,
            CoefficientKind::ChiAlpha(a) if a == -1.0 => CoefficientKind::Delta,
            ref k => k.clone(),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            CoefficientKind::Heaviside => "heaviside".into(),
            CoefficientKind::Delta => "delta".into(),
            CoefficientKind::ChiAlpha(a) => format!("chi_alpha({a})"),
            CoefficientKind::Smooth(f) => format!("smooth:{}", f.label),
        }
    }
}

/// The regularization scale `omega(eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Identity,
    /// `omega(eps) = 1 / ln(1/eps + e)`.
    Logarithmic,
}

impl Scale {
    pub fn omega(self, eps: f64) -> f64 {
        match self {
            Scale::Identity => eps,
            Scale::Logarithmic => 1.0 / (1.0 / eps + std::f64::consts::E).ln(),
        }
    }
}

/// Samples of a regularized coefficient and its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedCoefficient {
    grid: Grid1D,
    samples: Vec<f64>,
    d1_samples: Option<Vec<f64>>,
    d2_samples: Option<Vec<f64>>,
    eps: f64,
    omega_eps: f64,
    label: String,
}

impl RegularizedCoefficient {
    /// Samples a smooth function directly, without mollification. `eps` and
    /// `omega_eps` are recorded as zero.
    pub fn unmollified(f: &SmoothFn, grid: &Grid1D) -> Self {
        Self {
            grid: *grid,
            samples: grid.sample(|x| f.eval(x)),
            d1_samples: f.d1.as_ref().map(|d| grid.sample(|x| d(x))),
            d2_samples: f.d2.as_ref().map(|d| grid.sample(|x| d(x))),
            eps: 0.0,
            omega_eps: 0.0,
            label: f.label.clone(),
        }
    }

    pub fn from_samples(grid: &Grid1D, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.nx() {
            return Err(Error::invalid(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.nx()
            )));
        }
        Ok(Self {
            grid: *grid,
            samples,
            d1_samples: None,
            d2_samples: None,
            eps: 0.0,
            omega_eps: 0.0,
            label: "samples".into(),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn d1_samples(&self) -> Option<&[f64]> {
        self.d1_samples.as_deref()
    }

    pub fn d2_samples(&self) -> Option<&[f64]> {
        self.d2_samples.as_deref()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn omega_eps(&self) -> f64 {
        self.omega_eps
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `-a'` as a coefficient on the same grid: the first-order term produced
    /// when `(a u_x)_x` is expanded to `a u_xx + a' u_x`.
    pub fn negated_derivative(&self) -> Result<Self> {
        let d1 = self
            .d1_samples
            .as_ref()
            .ok_or_else(|| Error::invalid("coefficient has no derivative samples"))?;
        Ok(Self {
            grid: self.grid,
            samples: d1.iter().map(|v| -v).collect(),
            d1_samples: self.d2_samples.as_ref().map(|d| d.iter().map(|v| -v).collect()),
            d2_samples: None,
            eps: self.eps,
            omega_eps: self.omega_eps,
            label: format!("-d/dx {}", self.label),
        })
    }
}

/// Optional lower-order coefficients `b1 u_x + b2 u_t + b3 u` and forcing `f(t, x)`.
#[derive(Clone, Default)]
pub struct LowerOrderTerms {
    pub b1: Option<RegularizedCoefficient>,
    pub b2: Option<RegularizedCoefficient>,
    pub b3: Option<RegularizedCoefficient>,
    pub forcing: Option<Forcing>,
}

impl LowerOrderTerms {
    pub fn is_empty(&self) -> bool {
        self.b1.is_none() && self.b2.is_none() && self.b3.is_none() && self.forcing.is_none()
    }
}

impl fmt::Debug for LowerOrderTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LowerOrderTerms")
            .field("b1", &self.b1.as_ref().map(|b| b.label()))
            .field("b2", &self.b2.as_ref().map(|b| b.label()))
            .field("b3", &self.b3.as_ref().map(|b| b.label()))
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Heaviside: tabulated cumulative integral of the kernel.

const TABLE_NODES: usize = 4001;

struct CdfTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// Discrete mass of the unscaled kernel; convolutions divide by it.
    mass: f64,
}

fn cdf_table() -> &'static CdfTable {
    static TABLE: OnceLock<CdfTable> = OnceLock::new();
    TABLE.get_or_init(build_cdf_table)
}

fn build_cdf_table() -> CdfTable {
    let half = TABLE_NODES / 2;
    let step = 2.0 / (TABLE_NODES - 1) as f64;
    let z = |i: usize| -1.0 + i as f64 * step;

    // cumulative integral from the centre outwards, then mirrored
    let mut partial = vec![0.0; half + 1];
    for k in 0..half {
        let (lo, hi) = (z(half + k), z(half + k + 1));
        partial[k + 1] = partial[k] + composite_panel(lo, hi);
    }
    let half_mass = partial[half];
    let mut values = vec![0.0; TABLE_NODES];
    for k in 0..=half {
        let right = 0.5 + 0.5 * partial[k] / half_mass;
        values[half + k] = right;
        values[half - k] = 1.0 - right;
    }
    values[TABLE_NODES - 1] = 1.0;
    values[0] = 0.0;

    let mass = 2.0 * half_mass;
    let mut slopes: Vec<f64> = (0..TABLE_NODES).map(|i| bump_value(z(i)) / mass).collect();

    // Fritsch-Carlson limiter keeps the Hermite interpolant monotone.
    for i in 0..TABLE_NODES - 1 {
        let secant = (values[i + 1] - values[i]) / step;
        if secant == 0.0 {
            slopes[i] = 0.0;
            slopes[i + 1] = 0.0;
            continue;
        }
        let a = slopes[i] / secant;
        let b = slopes[i + 1] / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            slopes[i] = tau * a * secant;
            slopes[i + 1] = tau * b * secant;
        }
    }

    CdfTable {
        step,
        values,
        slopes,
        mass,
    }
}

fn composite_panel(lo: f64, hi: f64) -> f64 {
    crate::quadrature::composite_gauss_legendre(lo, hi, 20, bump_value)
}

impl CdfTable {
    fn eval(&self, z: f64) -> f64 {
        if z <= -1.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return 1.0;
        }
        let s = (z + 1.0) / self.step;
        let i = (s.floor() as usize).min(TABLE_NODES - 2);
        let t = s - i as f64;
        let h = self.step;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1
    }
}

/// Discrete mass of the unscaled kernel used to normalize convolutions.
pub fn kernel_mass() -> f64 {
    cdf_table().mass
}

/// `(H * phi_omega)(x)` for a jump at the origin.
pub fn heaviside_regularized(omega: f64, x: f64) -> f64 {
    cdf_table().eval(x / omega)
}

// ---------------------------------------------------------------------------
// chi^alpha_+ convolution.

/// `[(chi^alpha_+ * phi_omega)^(k)(x)]` for k = 0, 1, 2, with `alpha` in
/// `(-1, 0]`, jump at the origin.
///
/// With `s = x - y` the integrand is `s^alpha phi_omega^(k)(x - s)` on
/// `s in [max(x - omega, 0), x + omega]`. Near `s = 0` the substitution
/// `u = s^(1 + alpha)` absorbs the algebraic singularity.
pub fn chi_alpha_regularized(alpha: f64, omega: f64, x: f64) -> [f64; 3] {
    if x <= -omega {
        return [0.0; 3];
    }
    let s_lo = (x - omega).max(0.0);
    let s_hi = x + omega;
    let p = 1.0 + alpha;

    let mut acc = [0.0; 3];
    let mut add = |s_a: f64, s_b: f64, substituted: bool| {
        let part = if substituted {
            let inv = 1.0 / p;
            gauss_legendre_200_vec3(s_a.powf(p), s_b.powf(p), |u| {
                let s = u.powf(inv);
                scaled_with_derivatives(omega, x - s)
            })
            .map(|v| v / p)
        } else {
            gauss_legendre_200_vec3(s_a, s_b, |s| {
                let k = scaled_with_derivatives(omega, x - s);
                let w = s.powf(alpha);
                [w * k[0], w * k[1], w * k[2]]
            })
        };
        for (a, v) in acc.iter_mut().zip(part) {
            *a += v;
        }
    };

    let width = s_hi - s_lo;
    if alpha == 0.0 {
        add(s_lo, s_hi, false);
    } else if s_lo < width {
        // near-singular: substituted piece up to a split point, plain beyond
        let split = s_lo + 0.25 * width;
        add(s_lo, split, true);
        add(split, s_hi, false);
    } else {
        add(s_lo, s_hi, false);
    }

    let norm = 1.0 / (statrs::function::gamma::gamma(p) * kernel_mass());
    acc.map(|v| v * norm)
}

// ---------------------------------------------------------------------------

fn smooth_regularized(f: &SmoothFn, omega: f64, x: f64) -> [f64; 3] {
    let norm = 1.0 / kernel_mass();
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = norm
            * gauss_legendre_200(-omega, omega, |y| {
                f.eval(x - y) * scaled_with_derivatives(omega, y)[k]
            });
    }
    out
}

/// Samples `a * phi_omega` (and two derivatives) on `grid`.
pub fn regularize(
    spec: &CoefficientSpec,
    eps: f64,
    omega_eps: f64,
    grid: &Grid1D,
) -> Result<RegularizedCoefficient> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if !(omega_eps > 0.0 && omega_eps.is_finite()) {
        return Err(Error::invalid(format!("omega(eps) must be positive, got {omega_eps}")));
    }
    let c = spec.jump_location;
    let kind = spec.dispatched();
    if !matches!(kind, CoefficientKind::Smooth(_))
        && !(grid.x_min() < c - omega_eps && grid.x_max() > c + omega_eps)
    {
        return Err(Error::DomainCoverage {
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            needed_min: c - omega_eps,
            needed_max: c + omega_eps,
        });
    }

    let n = grid.nx();
    let mut samples = Vec::with_capacity(n);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut push = |v: [f64; 3]| {
        samples.push(v[0]);
        d1.push(v[1]);
        d2.push(v[2]);
    };

    match &kind {
        CoefficientKind::Heaviside => {
            let mass = kernel_mass();
            for x in grid.nodes() {
                let k = scaled_with_derivatives(omega_eps, x - c);
                push([
                    heaviside_regularized(omega_eps, x - c),
                    k[0] / mass,
                    k[1] / mass,
                ]);
            }
        }
        CoefficientKind::Delta => {
            for x in grid.nodes() {
                push(scaled_with_derivatives(omega_eps, x - c));
            }
        }
        CoefficientKind::ChiAlpha(alpha) => {
            for x in grid.nodes() {
                push(chi_alpha_regularized(*alpha, omega_eps, x - c));
            }
        }
        CoefficientKind::Smooth(f) => {
            for x in grid.nodes() {
                push(smooth_regularized(f, omega_eps, x));
            }
        }
    }

    Ok(RegularizedCoefficient {
        grid: *grid,
        samples,
        d1_samples: Some(d1),
        d2_samples: Some(d2),
        eps,
        omega_eps,
        label: spec.label(),
    })
}

fn check_same_grid(a: &RegularizedCoefficient, b: &RegularizedCoefficient) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::invalid("coefficients are sampled on different grids"));
    }
    Ok(())
}

/// Default floor below which `a_eps` is treated as zero in [`levi_constant`].
pub fn default_levi_floor(a: &RegularizedCoefficient) -> f64 {
    let m = a.max_value();
    if m > 0.0 {
        1e-12 * m
    } else {
        f64::MIN_POSITIVE
    }
}

/// Smallest `M2` with `b1^2 <= M2 a` on nodes where `a > floor`.
pub fn levi_constant(
    b1: &RegularizedCoefficient,
    a: &RegularizedCoefficient,
    floor: f64,
) -> Result<f64> {
    check_same_grid(b1, a)?;
    if !(floor > 0.0) {
        return Err(Error::invalid(format!("Levi floor must be positive, got {floor}")));
    }
    Ok(b1
        .samples
        .iter()
        .zip(&a.samples)
        .filter(|(_, &av)| av > floor)
        .map(|(&b, &av)| b * b / av)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlaeserReport {
    /// `max |a''|` over the grid.
    pub m1_eps: f64,
    /// `max (a')^2 / (2 M1 a)` over nodes with `a > 1e-12`; zero when `M1 = 0`.
    pub worst_ratio: f64,
}

pub fn glaeser_report(a: &RegularizedCoefficient) -> Result<GlaeserReport> {
    let (d1, d2) = match (&a.d1_samples, &a.d2_samples) {
        (Some(d1), Some(d2)) => (d1, d2),
        _ => return Err(Error::invalid("Glaeser report needs derivative samples")),
    };
    let m1_eps = d2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m1_eps == 0.0 {
        return Ok(GlaeserReport {
            m1_eps,
            worst_ratio: 0.0,
        });
    }
    let worst_ratio = a
        .samples
        .iter()
        .zip(d1)
        .filter(|(&av, _)| av > 1e-12)
        .map(|(&av, &g)| g * g / (2.0 * m1_eps * av))
        .fold(0.0, f64::max);
    Ok(GlaeserReport { m1_eps, worst_ratio })
}

//! Fixed-node Gauss-Legendre rules and an adaptive Simpson integrator.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

/// Nodes per panel of the composite rule.
const PANEL_ORDER: usize = 20;

/// Gauss-Legendre rule with `n` nodes on [-1, 1], as (node, weight) pairs.
fn rule(n: usize) -> &'static [(f64, f64)] {
    static R20: OnceLock<GaussLegendre> = OnceLock::new();
    static R200: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = match n {
        20 => &R20,
        200 => &R200,
        _ => panic!("no cached Gauss-Legendre rule of order {n}"),
    };
    cell.get_or_init(|| GaussLegendre::new(n).expect("order >= 2"))
        .as_node_weight_pairs()
}

/// 200-node Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre_200<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut sum = 0.0;
    for &(x, w) in rule(200) {
        sum += w * f(mid + half * x);
    }
    half * sum
}

/// 200-node Gauss-Legendre quadrature of a three-component integrand.
pub fn gauss_legendre_200_vec3<F: FnMut(f64) -> [f64; 3]>(a: f64, b: f64, mut f: F) -> [f64; 3] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut sum = [0.0; 3];
    for &(x, w) in rule(200) {
        let v = f(mid + half * x);
        for k in 0..3 {
            sum[k] += w * v[k];
        }
    }
    sum.map(|s| half * s)
}

/// Composite Gauss-Legendre quadrature with `total_nodes` nodes split into
/// equal panels of 20 nodes each.
pub fn composite_gauss_legendre<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    total_nodes: usize,
    mut f: F,
) -> f64 {
    let panels = (total_nodes / PANEL_ORDER).max(1);
    let width = (b - a) / panels as f64;
    let nodes = rule(PANEL_ORDER);
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let mut sum = 0.0;
        for &(x, w) in nodes {
            sum += w * f(mid + 0.5 * width * x);
        }
        total += 0.5 * width * sum;
    }
    total
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let v = gauss_legendre_200(-1.0, 2.0, |x| x.powi(7) - 3.0 * x * x);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn composite_rule_integrates_smooth_functions() {
        let v = composite_gauss_legendre(0.0, std::f64::consts::PI, 2000, f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_reaches_tolerance() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), 0.0, 3.0, 1e-12);
        // erf(3) * sqrt(pi) / 2
        let exact = 0.886_207_348_259_521_4;
        assert!((v - exact).abs() < 1e-10, "{v}");
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-10), 0.0);
    }
}

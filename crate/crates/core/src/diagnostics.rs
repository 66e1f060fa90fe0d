//! Norms, energies and sweep summaries.
//!
//! Norms are reported unsquared; energies are sums of squared norms. All
//! integrals use trapezoid weights (endpoints weighted 1/2).

use std::fmt;

use crate::coefficients::RegularizedCoefficient;
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::grid::Grid1D;
use crate::solver::WaveState;

fn weighted_sum(grid: &Grid1D, f: impl Fn(usize) -> f64) -> f64 {
    let n = grid.nx();
    let mut sum = 0.0;
    for i in 0..n {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        sum += w * f(i);
    }
    grid.dx() * sum
}

fn check_len(len: usize, grid: &Grid1D, what: &str) -> Result<()> {
    if len != grid.nx() {
        return Err(Error::invalid(format!(
            "{what} has {len} samples but the grid has {} nodes",
            grid.nx()
        )));
    }
    Ok(())
}

/// Discrete `L^2` norm.
pub fn l2_norm(field: &[f64], grid: &Grid1D) -> Result<f64> {
    check_len(field.len(), grid, "field")?;
    Ok(weighted_sum(grid, |i| field[i] * field[i]).sqrt())
}

/// `||u - u_exact(t)||_{L^2}` at the state's time.
pub fn l2_error_vs_exact(state: &WaveState, exact: &ExactSolution, grid: &Grid1D) -> Result<f64> {
    check_len(state.u.len(), grid, "state")?;
    let mut diff = Vec::with_capacity(grid.nx());
    for (x, u) in grid.nodes().zip(&state.u) {
        diff.push(u - exact.u(state.t, x)?);
    }
    l2_norm(&diff, grid)
}

fn check_state(state: &WaveState, a: &RegularizedCoefficient, grid: &Grid1D) -> Result<()> {
    check_len(state.u.len(), grid, "u")?;
    check_len(state.w.len(), grid, "w")?;
    check_len(state.v.len(), grid, "v")?;
    check_len(a.samples().len(), grid, "coefficient")
}

/// `E = ||u||^2 + (a w, w) + ||v||^2`.
pub fn symmetriser_energy(state: &WaveState, a: &RegularizedCoefficient, grid: &Grid1D) -> Result<f64> {
    check_state(state, a, grid)?;
    let s = a.samples();
    Ok(weighted_sum(grid, |i| {
        state.u[i] * state.u[i] + s[i] * state.w[i] * state.w[i] + state.v[i] * state.v[i]
    }))
}

/// `1/2 int (v^2 + a w^2)`.
pub fn physical_energy(state: &WaveState, a: &RegularizedCoefficient, grid: &Grid1D) -> Result<f64> {
    check_state(state, a, grid)?;
    let s = a.samples();
    Ok(0.5 * weighted_sum(grid, |i| state.v[i] * state.v[i] + s[i] * state.w[i] * state.w[i]))
}

/// Least-squares slope `N` of `ln(value)` against `ln(1/eps)`.
pub fn moderateness_exponent(rows: &[(f64, f64)]) -> Result<f64> {
    if rows.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 rows to fit an exponent, got {}",
            rows.len()
        )));
    }
    for w in rows.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::invalid("eps must be strictly decreasing"));
        }
    }
    if let Some(&(eps, v)) = rows.iter().find(|(e, v)| !(*v > 0.0) || !(*e > 0.0)) {
        return Err(Error::invalid(format!(
            "exponent fit needs positive eps and values, got ({eps}, {v})"
        )));
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Error,
    Norm,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Error => "error",
            ValueKind::Norm => "norm",
        })
    }
}

/// One sweep row. `value` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub alpha: Option<f64>,
    pub kind: ValueKind,
    pub value: Option<f64>,
    pub dt: f64,
    /// Largest per-step energy gain relative to `E(0)`, when tracked.
    pub energy_gain: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetadata {
    pub t_final: f64,
    pub dx: f64,
    pub cfl: f64,
    pub coefficient: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    rows: Vec<SweepRow>,
    fitted_exponent: Option<f64>,
    pub metadata: SweepMetadata,
}

impl SweepReport {
    /// Sorts rows by descending `eps` and fits the exponent when at least
    /// three rows succeeded with positive values.
    pub fn new(mut rows: Vec<SweepRow>, metadata: SweepMetadata) -> Self {
        rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        let ok: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.value.map(|v| (r.eps, v)))
            .collect();
        let fitted_exponent = if ok.len() >= 3 {
            moderateness_exponent(&ok).ok()
        } else {
            None
        };
        Self {
            rows,
            fitted_exponent,
            metadata,
        }
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn fitted_exponent(&self) -> Option<f64> {
        self.fitted_exponent
    }

    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(|r| r.failure.is_none())
    }

    /// Successful `(eps, value)` pairs in row order.
    pub fn values(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.value.map(|v| (r.eps, v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::SmoothFn;
    use crate::exact::InitialData;
    use proptest::prelude::*;

    fn grid() -> Grid1D {
        Grid1D::with_spacing(-4.0, 4.0, 0.002).unwrap()
    }

    fn row(eps: f64, value: Option<f64>) -> SweepRow {
        SweepRow {
            eps,
            alpha: None,
            kind: ValueKind::Norm,
            value,
            dt: 0.001,
            energy_gain: None,
            failure: value.is_none().then(|| "diverged".to_string()),
        }
    }

    fn meta() -> SweepMetadata {
        SweepMetadata {
            t_final: 1.0,
            dx: 0.002,
            cfl: 1.0,
            coefficient: "delta".into(),
            notes: vec![],
        }
    }

    #[test]
    fn l2_norm_examples() {
        let g = grid();
        assert_eq!(l2_norm(&vec![0.0; g.nx()], &g).unwrap(), 0.0);
        assert!((l2_norm(&vec![1.0; g.nx()], &g).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        let hat = g.sample(|x| (1.0 - x.abs()).max(0.0));
        assert!((l2_norm(&hat, &g).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-3);
        assert!(l2_norm(&[1.0, 2.0], &g).is_err());
    }

    #[test]
    fn error_vs_exact_of_the_exact_solution() {
        let g = grid();
        let data = InitialData::paper_default();
        let exact = ExactSolution::new(data.clone(), 2.0).unwrap();
        let mut s = WaveState::initial(&data, &g);
        assert!(l2_error_vs_exact(&s, &exact, &g).unwrap() <= 1e-12);
        s.t = 1.5;
        s.u = g.nodes().map(|x| exact.u(1.5, x).unwrap()).collect();
        assert!(l2_error_vs_exact(&s, &exact, &g).unwrap() <= 1e-12);
    }

    #[test]
    fn energy_examples() {
        let g = grid();
        let one = RegularizedCoefficient::unmollified(&SmoothFn::constant(1.0), &g);
        let zero = WaveState::zeros(g.nx());
        assert_eq!(symmetriser_energy(&zero, &one, &g).unwrap(), 0.0);
        assert_eq!(physical_energy(&zero, &one, &g).unwrap(), 0.0);
        let mut s = WaveState::zeros(g.nx());
        s.u = vec![1.0; g.nx()];
        assert!((symmetriser_energy(&s, &one, &g).unwrap() - 8.0).abs() < 1e-12);
        let mut s = WaveState::zeros(g.nx());
        s.v = vec![1.0; g.nx()];
        assert!((physical_energy(&s, &one, &g).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_examples() {
        let rows: Vec<(f64, f64)> = [0.1, 0.01, 0.001].iter().map(|&e: &f64| (e, e.powi(-2))).collect();
        assert!((moderateness_exponent(&rows).unwrap() - 2.0).abs() < 1e-10);
        let flat = [(0.1, 7.0), (0.05, 7.0), (0.01, 7.0)];
        assert!(moderateness_exponent(&flat).unwrap().abs() < 1e-12);
        assert!(moderateness_exponent(&flat[..2]).is_err());
        assert!(moderateness_exponent(&[(0.1, 1.0), (0.05, 0.0), (0.01, 1.0)]).is_err());
        assert!(moderateness_exponent(&[(0.1, 1.0), (0.2, 1.0), (0.01, 1.0)]).is_err());
    }

    #[test]
    fn reports_sort_and_fit() {
        let r = SweepReport::new(
            vec![row(0.01, Some(100.0)), row(0.1, Some(10.0)), row(0.001, Some(1000.0))],
            meta(),
        );
        let eps: Vec<f64> = r.rows().iter().map(|r| r.eps).collect();
        assert_eq!(eps, vec![0.1, 0.01, 0.001]);
        assert!((r.fitted_exponent().unwrap() - 1.0).abs() < 1e-12);
        assert!(r.all_succeeded());

        let single = SweepReport::new(vec![row(0.1, Some(1.0))], meta());
        assert_eq!(single.fitted_exponent(), None);

        let failed = SweepReport::new(
            vec![row(0.1, Some(1.0)), row(0.05, None), row(0.01, Some(2.0))],
            meta(),
        );
        assert!(!failed.all_succeeded());
        assert_eq!(failed.fitted_exponent(), None);
        assert_eq!(failed.values().len(), 2);
    }

    proptest! {
        #[test]
        fn l2_norm_is_homogeneous(
            field in proptest::collection::vec(-10.0f64..10.0, 11),
            c in -100.0f64..100.0,
        ) {
            let g = Grid1D::new(0.0, 1.0, 11).unwrap();
            let scaled: Vec<f64> = field.iter().map(|v| c * v).collect();
            let a = l2_norm(&scaled, &g).unwrap();
            let b = c.abs() * l2_norm(&field, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn exponent_ignores_constant_factors(
            values in proptest::collection::vec(1e-3f64..1e3, 4),
            c in 1e-3f64..1e3,
        ) {
            let eps = [0.1, 0.05, 0.01, 0.005];
            let rows: Vec<(f64, f64)> = eps.iter().copied().zip(values.iter().copied()).collect();
            let scaled: Vec<(f64, f64)> = rows.iter().map(|&(e, v)| (e, c * v)).collect();
            let a = moderateness_exponent(&rows).unwrap();
            let b = moderateness_exponent(&scaled).unwrap();
            prop_assert!((a - b).abs() <= 1e-10);
        }

        #[test]
        fn energies_are_nonnegative(
            u in proptest::collection::vec(-5.0f64..5.0, 11),
            w in proptest::collection::vec(-5.0f64..5.0, 11),
            v in proptest::collection::vec(-5.0f64..5.0, 11),
            a in proptest::collection::vec(0.0f64..5.0, 11),
        ) {
            let g = Grid1D::new(0.0, 1.0, 11).unwrap();
            let coef = RegularizedCoefficient::from_samples(&g, a).unwrap();
            let s = WaveState { t: 0.0, u, w, v };
            let e = symmetriser_energy(&s, &coef, &g).unwrap();
            prop_assert!(physical_energy(&s, &coef, &g).unwrap() >= 0.0);
            prop_assert!(e >= 0.0);
            // the symmetriser energy bounds ||u||^2 + ||v||^2 from above
            let lower = l2_norm(&s.u, &g).unwrap().powi(2) + l2_norm(&s.v, &g).unwrap().powi(2);
            prop_assert!(lower <= e * (1.0 + 1e-12) + 1e-300);
        }
    }
}

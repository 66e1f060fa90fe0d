use crate::error::{Error, Result};

/// Uniform spatial grid with `nx` nodes from `x_min` to `x_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    nx: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if nx < 3 {
            return Err(Error::invalid(format!("grid needs at least 3 nodes, got {nx}")));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            dx: (x_max - x_min) / (nx - 1) as f64,
        })
    }

    /// Grid with spacing `dx`; the interval length must be an integral
    /// multiple of `dx`.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {dx}")));
        }
        let cells = (x_max - x_min) / dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-6 * rounded.max(1.0) {
            return Err(Error::invalid(format!(
                "interval [{x_min}, {x_max}] is not a multiple of dx = {dx}"
            )));
        }
        Self::new(x_min, x_max, rounded as usize + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nx).map(move |i| self.node(i))
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx;
        let r = s.round();
        if r < 0.0 || r >= self.nx as f64 || (s - r).abs() > 1e-9 {
            return None;
        }
        Some(r as usize)
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

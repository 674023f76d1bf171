use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary realization of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Dirichlet,
    /// Periodic in x (a circle of length `period`), Dirichlet in y.
    PeriodicXDirichletY,
}

/// Uniformly spaced unknown nodes `start + i·spacing`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub spacing: f64,
    pub count: usize,
}

impl Axis {
    /// Interior nodes of `[a, b]` split into `intervals` equal pieces.
    pub fn dirichlet(a: f64, b: f64, intervals: usize) -> Self {
        let spacing = (b - a) / intervals as f64;
        Self { start: a + spacing, spacing, count: intervals.saturating_sub(1) }
    }

    /// `count` nodes on a circle of length `period`, first node at `start`.
    pub fn periodic(start: f64, period: f64, count: usize) -> Self {
        Self { start, spacing: period / count as f64, count }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing
    }

    /// Dirichlet end points bracketing the nodes.
    pub fn bounds(&self) -> (f64, f64) {
        (self.start - self.spacing, self.start + self.count as f64 * self.spacing)
    }

    /// Same extent with the spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let (a, b) = self.bounds();
        Axis::dirichlet(a, b, (self.count + 1) * factor)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { start: self.start * alpha, spacing: self.spacing * alpha, count: self.count }
    }

    /// Index of the node closest to `x`, if `x` lies on a node to within `tol` spacings.
    pub fn node_index(&self, x: f64, tol: f64) -> Option<usize> {
        let t = (x - self.start) / self.spacing;
        let i = t.round();
        if i < 0.0 || i >= self.count as f64 || (t - i).abs() > tol {
            None
        } else {
            Some(i as usize)
        }
    }
}

/// A 1D or 2D grid of unknowns; 2D nodes are ordered `iy * nx + ix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Axis,
    pub y: Option<Axis>,
    pub boundary: Boundary,
    pub period: Option<f64>,
}

impl Grid {
    pub fn line(axis: Axis) -> Self {
        Self { x: axis, y: None, boundary: Boundary::Dirichlet, period: None }
    }

    pub fn dirichlet_1d(a: f64, b: f64, intervals: usize) -> Self {
        Self::line(Axis::dirichlet(a, b, intervals))
    }

    pub fn rectangle(x: Axis, y: Axis) -> Self {
        Self { x, y: Some(y), boundary: Boundary::Dirichlet, period: None }
    }

    pub fn dirichlet_2d(xa: f64, xb: f64, nx_intervals: usize, ya: f64, yb: f64, ny_intervals: usize) -> Self {
        Self::rectangle(Axis::dirichlet(xa, xb, nx_intervals), Axis::dirichlet(ya, yb, ny_intervals))
    }

    /// Cylinder `S¹_L × (ya, yb)` with `nx` nodes around the circle.
    pub fn cylinder(period: f64, nx: usize, ya: f64, yb: f64, ny_intervals: usize) -> Self {
        Self {
            x: Axis::periodic(0.0, period, nx),
            y: Some(Axis::dirichlet(ya, yb, ny_intervals)),
            boundary: Boundary::PeriodicXDirichletY,
            period: Some(period),
        }
    }

    pub fn dim(&self) -> usize {
        if self.y.is_some() {
            2
        } else {
            1
        }
    }

    pub fn nx(&self) -> usize {
        self.x.count
    }

    pub fn ny(&self) -> usize {
        self.y.map_or(1, |a| a.count)
    }

    pub fn n_total(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn node(&self, idx: usize) -> [f64; 2] {
        let nx = self.nx();
        let (ix, iy) = (idx % nx, idx / nx);
        [self.x.coord(ix), self.y.map_or(0.0, |a| a.coord(iy))]
    }

    pub fn nodes(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.n_total()).map(|i| self.node(i))
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.y.map_or(self.x.spacing, |a| a.spacing.max(self.x.spacing))
    }

    /// Both axes refined by `factor` (periodic axes keep their period).
    pub fn refined(&self, factor: usize) -> Self {
        let x = match self.boundary {
            Boundary::PeriodicXDirichletY => {
                Axis::periodic(self.x.start, self.period.unwrap_or(0.0), self.x.count * factor)
            }
            Boundary::Dirichlet => self.x.refined(factor),
        };
        Self { x, y: self.y.map(|a| a.refined(factor)), boundary: self.boundary, period: self.period }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = std::iter::once(self.x).chain(self.y);
        for a in axes {
            if !(a.spacing > 0.0) || a.count == 0 {
                return Err(Error::InvalidArgument(format!("degenerate axis {a:?}")));
            }
        }
        if self.boundary == Boundary::PeriodicXDirichletY {
            let period = self.period.ok_or_else(|| Error::InvalidArgument("periodic grid without period".into()))?;
            if self.y.is_none() {
                return Err(Error::InvalidArgument("periodic-x grid needs a y axis".into()));
            }
            if ((self.x.count as f64) * self.x.spacing - period).abs() > 1e-12 * period {
                return Err(Error::InvalidArgument("x extent differs from the declared period".into()));
            }
        }
        Ok(())
    }
}

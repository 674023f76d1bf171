//! Peierls assembly of discrete magnetic Hamiltonians.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::gauge::GaugeField;
use crate::grid::{Boundary, Grid};
use crate::sparse::{HermitianBuilder, HermitianMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    FullH,
    DirichletWell,
    Cylinder,
    ModelK,
    Montgomery1D,
}

/// A discretized magnetic Hamiltonian with its provenance.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: HermitianMatrix,
    pub h: f64,
    pub grid: Grid,
    pub gauge: Option<GaugeField>,
    pub tag: OperatorTag,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn with_tag(mut self, tag: OperatorTag) -> Self {
        self.tag = tag;
        self
    }

    /// Writes one `row col re im` line per stored entry.
    pub fn write_triplets(&self, mut out: impl Write) -> Result<()> {
        for (i, j, v) in self.matrix.triplets() {
            writeln!(out, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Magnetic length `h^{1/(k+2)}` that the grid must resolve.
pub fn magnetic_length(h: f64, k: u32) -> f64 {
    h.powf(1.0 / (k as f64 + 2.0))
}

/// Rejects grids coarser than the magnetic length; warns above one eighth of it.
pub fn check_resolution(grid: &Grid, h: f64, k: u32) -> Result<()> {
    let spacing = grid.max_spacing();
    let length = magnetic_length(h, k);
    if spacing > length {
        return Err(Error::GridTooCoarse { spacing, length, h, k });
    }
    if spacing > length / 8.0 {
        log::warn!("grid spacing {spacing} is coarser than h^(1/(k+2))/8 = {} (h = {h}, k = {k})", length / 8.0);
    }
    Ok(())
}

/// Assembles `(ih d + A)*(ih d + A)` with Peierls phases
/// `exp(−(i/h)∫_p^q A·dl)` on every grid link.
pub fn assemble(field: &FieldSpec, gauge: &GaugeField, grid: &Grid, h: f64) -> Result<DiscreteOperator> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h = {h} must be positive")));
    }
    grid.validate()?;
    check_resolution(grid, h, field.k)?;
    let matrix = peierls_matrix(grid, h, |p, q| gauge.link(p, q), |_| 0.0);
    let defect = matrix.hermiticity_defect();
    if defect != 0.0 {
        return Err(Error::NonHermitianAssembly { defect });
    }
    Ok(DiscreteOperator { matrix, h, grid: grid.clone(), gauge: Some(gauge.clone()), tag: OperatorTag::FullH })
}

/// Kinetic Peierls stencil plus a diagonal potential `V(node)`.
pub(crate) fn peierls_matrix(
    grid: &Grid,
    h: f64,
    link: impl Fn([f64; 2], [f64; 2]) -> f64,
    potential: impl Fn([f64; 2]) -> f64,
) -> HermitianMatrix {
    let n = grid.n_total();
    let (nx, ny) = (grid.nx(), grid.ny());
    let dx = grid.x.spacing;
    let cx = h * h / (dx * dx);
    let cy = grid.y.map_or(0.0, |a| h * h / (a.spacing * a.spacing));
    let periodic = grid.boundary == Boundary::PeriodicXDirichletY;
    let mut b = HermitianBuilder::new(n);
    let hop = |c: f64, theta: f64| C64::from_polar(-c, -theta / h);

    for idx in 0..n {
        let p = grid.node(idx);
        b.add_diagonal(idx, 2.0 * (cx + cy) + potential(p));
    }
    for iy in 0..ny {
        for ix in 0..nx {
            let pi = grid.index(ix, iy);
            let p = grid.node(pi);
            let q = [p[0] + dx, p[1]];
            if ix + 1 < nx {
                b.add_pair(pi, grid.index(ix + 1, iy), hop(cx, link(p, q)));
            } else if periodic && nx > 1 {
                b.add_pair(pi, grid.index(0, iy), hop(cx, link(p, q)));
            }
            if let Some(ay) = grid.y {
                if iy + 1 < ny {
                    let q = [p[0], p[1] + ay.spacing];
                    b.add_pair(pi, grid.index(ix, iy + 1), hop(cy, link(p, q)));
                }
            }
        }
    }
    b.build()
}

/// `−h² d²/dy² + V(y)` on a 1D Dirichlet grid.
pub fn assemble_potential_1d(
    grid: &Grid,
    h: f64,
    potential: impl Fn(f64) -> f64,
    tag: OperatorTag,
) -> Result<DiscreteOperator> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("expected a 1D grid".into()));
    }
    grid.validate()?;
    let matrix = peierls_matrix(grid, h, |_, _| 0.0, |p| potential(p[0]));
    Ok(DiscreteOperator { matrix, h, grid: grid.clone(), gauge: None, tag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::gauge::{landau_gauge, Poly2};
    use crate::grid::Axis;

    #[test]
    fn free_laplacian_stencil() {
        let grid = Grid::dirichlet_1d(0.0, 1.0, 8);
        let op = assemble_potential_1d(&grid, 1.0, |_| 0.0, OperatorTag::FullH).unwrap();
        assert_eq!(op.matrix.get(0, 0), C64::new(128.0, 0.0));
        assert_eq!(op.matrix.get(0, 1), C64::new(-64.0, 0.0));
        assert_eq!(op.dim(), 7);
    }

    #[test]
    fn hermitian_and_banded() {
        let f = FieldSpec::sin_squared(1.0);
        let g = landau_gauge(&f).unwrap();
        let grid = Grid::dirichlet_2d(-0.5, 0.5, 20, -0.5, 0.5, 20);
        let op = assemble(&f, &g, &grid, 0.05).unwrap();
        assert_eq!(op.matrix.hermiticity_defect(), 0.0);
        assert_eq!(op.matrix.bandwidth(), 19);
    }

    #[test]
    fn cylinder_seam_is_linked() {
        let f = FieldSpec::power(1.0, 1, 1.0);
        let g = landau_gauge(&f).unwrap();
        let grid = Grid::cylinder(1.0, 8, -2.0, 2.0, 16);
        let op = assemble(&f, &g, &grid, 0.3).unwrap();
        assert!(op.matrix.get(7, 0).norm() > 0.0);
        assert_eq!(op.matrix.get(7, 0), op.matrix.get(0, 7).conj());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let f = FieldSpec::constant(1.0);
        let g = landau_gauge(&f).unwrap();
        let grid = Grid::dirichlet_2d(-1.0, 1.0, 4, -1.0, 1.0, 4);
        assert!(matches!(assemble(&f, &g, &grid, 0.01), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn gauge_shift_is_diagonal_conjugation() {
        let f = FieldSpec::cos_product(1.0);
        let g = landau_gauge(&f).unwrap();
        let phi = Poly2::new(vec![(2, 1, 1.0)]);
        let grid = Grid::rectangle(Axis::dirichlet(-0.5, 0.5, 24), Axis::dirichlet(-0.4, 0.6, 24));
        let h = 0.05;
        let a = assemble(&f, &g, &grid, h).unwrap();
        let b = assemble(&f, &g.shifted(phi.clone()), &grid, h).unwrap();
        let u: Vec<C64> = grid.nodes().map(|p| C64::from_polar(1.0, phi.eval(p) / h)).collect();
        let mut worst: f64 = 0.0;
        for (i, j, v) in a.matrix.triplets() {
            worst = worst.max((u[i] * v * u[j].conj() - b.matrix.get(i, j)).norm());
        }
        assert!(worst < 1e-12 * a.matrix.norm_bound(), "{worst}");
    }

    #[test]
    fn triplet_export() {
        let grid = Grid::dirichlet_1d(0.0, 1.0, 4);
        let op = assemble_potential_1d(&grid, 1.0, |_| 0.0, OperatorTag::FullH).unwrap();
        let mut buf = Vec::new();
        op.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("0 0 3.2"));
    }
}

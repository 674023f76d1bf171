//! Explicit quasimodes: point Gaussians at a level point of the field,
//! dilated model eigenfunctions at a point zero, and separated cylinder modes
//! at a zero line. Residuals are measured on the discrete operator.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpairs, SolverOptions};
use crate::error::{Error, Result};
use crate::field::{trplus, FieldSpec, Rect};
use crate::gauge::{model_gauge, GaugeField};
use crate::grid::{Axis, Boundary, Grid};
use crate::model::{
    centred_box, cylinder_fiber, cylinder_operator, model_operator_2d, select_p, FiberKind, MontgomeryParams,
};
use crate::operator::{assemble, magnetic_length, DiscreteOperator};
use crate::sparse::{dot, norm, C64};
use crate::stats::linear_fit;

/// Largest mass fraction the untruncated profile may keep outside the plateau.
pub const CLIPPED_MASS_LIMIT: f64 = 1e-8;
/// Minimum number of grid cells between the cutoff support and a Dirichlet edge.
pub const SUPPORT_MARGIN_CELLS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    PointGaussian,
    ModelRescaled,
    CylinderSeparated,
}

/// Smooth radial cutoff: 1 on `r ≤ r1`, 0 on `r ≥ r2`, C∞ in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub r1: f64,
    pub r2: f64,
}

impl Cutoff {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(0.0 < r1 && r1 < r2) {
            return Err(Error::InvalidArgument(format!("cutoff radii need 0 < r1 < r2 (got {r1}, {r2})")));
        }
        Ok(Self { r1, r2 })
    }

    pub fn value(&self, r: f64) -> f64 {
        let t = ((r - self.r1) / (self.r2 - self.r1)).clamp(0.0, 1.0);
        let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
        let (a, b) = (f(1.0 - t), f(t));
        a / (a + b)
    }
}

/// Construction data kept with a quasimode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeParams {
    pub center: [f64; 2],
    pub cutoff: Cutoff,
    /// Level `μ_j` of `Tr⁺` for point Gaussians.
    pub level: Option<f64>,
    pub j: Option<usize>,
    pub p: Option<i64>,
    /// Achieved `b(p)` for cylinder modes.
    pub b: Option<f64>,
}

/// A normalized trial vector with its target value and residual `‖(H − μ)v‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quasimode {
    #[serde(skip)]
    pub vector: Vec<C64>,
    pub mu: f64,
    pub residual: f64,
    pub recipe: Recipe,
    pub h: f64,
    pub params: QuasimodeParams,
}

impl Quasimode {
    pub fn certified_interval(&self) -> (f64, f64) {
        (self.mu - self.residual, self.mu + self.residual)
    }

    /// One `index,x,y,re,im` row per node.
    pub fn write_csv(&self, grid: &Grid, mut out: impl Write) -> Result<()> {
        if grid.n_total() != self.vector.len() {
            return Err(Error::GridMismatch { vector: self.vector.len(), nodes: grid.n_total() });
        }
        writeln!(out, "index,x,y,re,im")?;
        for (i, (p, v)) in grid.nodes().zip(&self.vector).enumerate() {
            writeln!(out, "{i},{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], v.re, v.im)?;
        }
        Ok(())
    }
}

/// `‖(H − μ)v‖/‖v‖`.
pub fn residual(op: &DiscreteOperator, v: &[C64], mu: f64) -> Result<f64> {
    if op.dim() != v.len() {
        return Err(Error::GridMismatch { vector: v.len(), nodes: op.dim() });
    }
    let hv = op.matrix.apply(v);
    let r: f64 = hv.iter().zip(v).map(|(a, b)| (a - b * mu).norm_sqr()).sum::<f64>().sqrt();
    Ok(r / norm(v))
}

fn normalize(v: &mut [C64]) {
    let n = norm(v);
    v.iter_mut().for_each(|x| *x /= n);
}

/// Square Dirichlet box of half-width at least `half_width` around `center`,
/// with `center` on a node.
pub fn node_aligned_box(center: [f64; 2], half_width: f64, spacing: f64) -> Grid {
    let n = (half_width / spacing).ceil() as usize;
    let axis = |c: f64| Axis { start: c - n as f64 * spacing, spacing, count: 2 * n + 1 };
    Grid::rectangle(axis(center[0]), axis(center[1]))
}

/// Dirichlet edges that a disk of radius `r` around `center` must keep clear of.
fn check_support(grid: &Grid, center: [f64; 2], r: f64) -> Result<()> {
    let y = grid.y.ok_or_else(|| Error::InvalidArgument("quasimodes live on 2D grids".into()))?;
    let mut axes = vec![(y, center[1])];
    if grid.boundary == Boundary::Dirichlet {
        axes.push((grid.x, center[0]));
    }
    for (axis, c) in axes {
        let (a, b) = axis.bounds();
        let margin = SUPPORT_MARGIN_CELLS * axis.spacing;
        if c - r < a + margin || c + r > b - margin {
            return Err(Error::SupportNotInterior {
                reason: format!(
                    "support [{}, {}] is closer than {SUPPORT_MARGIN_CELLS} cells to the edge of [{a}, {b}]",
                    c - r,
                    c + r
                ),
            });
        }
    }
    Ok(())
}

fn check_clipped(profile: &[f64], radii: &[f64], r1: f64) -> Result<()> {
    let total: f64 = profile.iter().sum();
    let outside: f64 = profile.iter().zip(radii).filter(|(_, r)| **r > r1).map(|(m, _)| m).sum();
    let mass = outside / total;
    if mass > CLIPPED_MASS_LIMIT {
        return Err(Error::CutoffClipped { mass, limit: CLIPPED_MASS_LIMIT });
    }
    Ok(())
}

/// Point where `Tr⁺ = target` on the first ray from `center` (scanning
/// counter-clockwise from the `+x` axis in whole degrees) that crosses the level
/// before leaving `domain`.
pub fn level_set_point(field: &FieldSpec, center: [f64; 2], domain: Rect, target: f64) -> Result<[f64; 2]> {
    let f = |p: [f64; 2]| trplus(field, p) - target;
    if f(center) >= 0.0 {
        return Err(Error::NoLevelSet { target });
    }
    for deg in 0..360 {
        let th = (deg as f64).to_radians();
        let dir = [th.cos(), th.sin()];
        let exit = exit_distance(center, dir, &domain);
        let at = |t: f64| [center[0] + t * dir[0], center[1] + t * dir[1]];
        let steps = 400;
        let mut lo = 0.0;
        for i in 1..=steps {
            let t = exit * i as f64 / steps as f64 * (1.0 - 1e-12);
            if f(at(t)) >= 0.0 {
                let mut hi = t;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(at(mid)) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                return Ok(at(0.5 * (lo + hi)));
            }
            lo = t;
        }
    }
    Err(Error::NoLevelSet { target })
}

fn exit_distance(c: [f64; 2], d: [f64; 2], r: &Rect) -> f64 {
    let mut t = f64::INFINITY;
    for (ci, di, lo, hi) in [(c[0], d[0], r.x0, r.x1), (c[1], d[1], r.y0, r.y1)] {
        if di > 1e-15 {
            t = t.min((hi - ci) / di);
        } else if di < -1e-15 {
            t = t.min((lo - ci) / di);
        }
    }
    t
}

/// Plateau and support radii of the default point-Gaussian cutoff, in units of
/// the Gaussian width `√(h/μ)`: the clipped tail is then about `e^{−21}`.
pub const GAUSSIAN_CUTOFF_WIDTHS: (f64, f64) = (6.5, 10.4);

/// Default cutoff for a point Gaussian at level `level`.
pub fn gaussian_cutoff(h: f64, level: f64) -> Cutoff {
    let sigma = (h / level).sqrt();
    Cutoff { r1: GAUSSIAN_CUTOFF_WIDTHS.0 * sigma, r2: GAUSSIAN_CUTOFF_WIDTHS.1 * sigma }
}

/// `v = χ(X)·e^{iφ(X)/h}·e^{−μ|X|²/(4h)}` centred at `x_j` where `Tr⁺(x_j) = μ`,
/// with `φ = A(x_j)·X + ½XᵀSX`, `S` the symmetric part of `∂A(x_j)`, so that
/// `A − dφ` agrees with the symmetric gauge `½b(x_j)(−X₂, X₁)` to second order.
/// Target eigenvalue `hμ`.
pub fn point_gaussian_quasimode(
    field: &FieldSpec,
    gauge: &GaugeField,
    grid: &Grid,
    h: f64,
    target_mu: f64,
    x_j: [f64; 2],
    cutoff: Option<Cutoff>,
) -> Result<Quasimode> {
    let level = trplus(field, x_j);
    if !(target_mu > 0.0) || (level - target_mu).abs() > 1e-9 * target_mu {
        return Err(Error::NoLevelSet { target: target_mu });
    }
    let cutoff = cutoff.unwrap_or_else(|| gaussian_cutoff(h, target_mu));
    check_support(grid, x_j, cutoff.r2)?;
    // sqrt of the Gaussian profile's mass outside r1, in closed form
    let clipped = (-target_mu * cutoff.r1 * cutoff.r1 / (2.0 * h)).exp();
    if clipped > CLIPPED_MASS_LIMIT {
        return Err(Error::CutoffClipped { mass: clipped, limit: CLIPPED_MASS_LIMIT });
    }

    // Taylor data of the unshifted potential; a gradient shift enters through its exact phase
    let base = GaugeField { shift: None, ..gauge.clone() };
    let a0 = base.potential(x_j);
    let jac = base.jacobian(x_j);
    let s01 = 0.5 * (jac[0][1] + jac[1][0]);
    let phase0 = gauge.shift_value(x_j);
    let mut v: Vec<C64> = grid
        .nodes()
        .map(|p| {
            let (x, y) = (p[0] - x_j[0], p[1] - x_j[1]);
            let r = x.hypot(y);
            let chi = cutoff.value(r);
            if chi == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let phi = a0[0] * x
                + a0[1] * y
                + 0.5 * (jac[0][0] * x * x + 2.0 * s01 * x * y + jac[1][1] * y * y)
                + gauge.shift_value(p)
                - phase0;
            C64::from_polar(chi * (-target_mu * r * r / (4.0 * h)).exp(), phi / h)
        })
        .collect();
    normalize(&mut v);
    let op = assemble(field, gauge, grid, h)?;
    let mu = h * target_mu;
    let residual = residual(&op, &v, mu)?;
    Ok(Quasimode {
        vector: v,
        mu,
        residual,
        recipe: Recipe::PointGaussian,
        h,
        params: QuasimodeParams { center: x_j, cutoff, level: Some(target_mu), j: None, p: None, b: None },
    })
}

/// Radii of the model-quasimode cutoff and of the model box, in units of `h^{1/(k+2)}`.
pub const MODEL_CUTOFF_LENGTHS: (f64, f64) = (2.5, 3.5);
pub const MODEL_BOX_HALF_WIDTH: f64 = 5.0;

/// The `j`-th eigenfunction of the discrete model `K^h` at the point zero
/// `center`, transplanted node by node onto `grid` (same spacing, `center` a
/// node), cut off, and gauge-corrected by `e^{iψ/h}` where `ψ` sums the link
/// differences between `gauge` and the model gauge along the column through
/// `center` and then along rows. The target is the discrete `λ_j(K^h)`, which is
/// `h^{(2k+2)/(k+2)}λ_j(K¹)` up to discretization error.
pub fn model_rescaled_quasimode(
    field: &FieldSpec,
    gauge: &GaugeField,
    grid: &Grid,
    h: f64,
    j: usize,
    center: [f64; 2],
    solver: &SolverOptions,
) -> Result<Quasimode> {
    if j == 0 {
        return Err(Error::InvalidArgument("quasimode index j starts at 1".into()));
    }
    let model = field.taylor_model(center)?;
    let y = grid.y.ok_or_else(|| Error::InvalidArgument("quasimodes live on 2D grids".into()))?;
    let spacing = grid.x.spacing;
    if grid.boundary != Boundary::Dirichlet || (y.spacing - spacing).abs() > 1e-12 * spacing {
        return Err(Error::InvalidArgument("model quasimodes need a Dirichlet grid with equal spacings".into()));
    }
    let (Some(ix0), Some(iy0)) = (grid.x.node_index(center[0], 1e-9), y.node_index(center[1], 1e-9)) else {
        return Err(Error::InvalidArgument(format!("well centre {center:?} is not a grid node")));
    };

    let ell = magnetic_length(h, model.k);
    let cutoff = Cutoff::new(MODEL_CUTOFF_LENGTHS.0 * ell, MODEL_CUTOFF_LENGTHS.1 * ell)?;
    check_support(grid, center, cutoff.r2)?;

    let mbox = centred_box(MODEL_BOX_HALF_WIDTH * ell, spacing);
    let kop = model_operator_2d(&model, h, &mbox)?;
    let spec = lowest_eigenpairs(&kop, j, &SolverOptions { keep_vectors: true, ..*solver })?;
    let w = &spec.eigenvectors.as_ref().expect("kept vectors")[j - 1];
    let mu = spec.eigenvalues[j - 1];
    let (mnx, mny) = (mbox.nx() as i64, mbox.ny() as i64);
    let (mi0, mj0) = (mnx / 2, mny / 2);

    // node-by-node transplant and the cutoff-clipping test on the model box
    let mut profile = Vec::with_capacity(w.len());
    let mut radii = Vec::with_capacity(w.len());
    for (idx, z) in w.iter().enumerate() {
        let p = mbox.node(idx);
        profile.push(z.norm_sqr());
        radii.push(p[0].hypot(p[1]));
    }
    check_clipped(&profile, &radii, cutoff.r1)?;

    let mg = model_gauge(&model, center);
    let (nx, ny) = (grid.nx(), grid.ny());
    let mismatch = |p: [f64; 2], q: [f64; 2]| gauge.link(p, q) - mg.link(p, q);
    let mut column = vec![0.0; ny];
    for iy in (iy0 + 1)..ny {
        let (p, q) = (grid.node(grid.index(ix0, iy - 1)), grid.node(grid.index(ix0, iy)));
        column[iy] = column[iy - 1] + mismatch(p, q);
    }
    for iy in (0..iy0).rev() {
        let (p, q) = (grid.node(grid.index(ix0, iy + 1)), grid.node(grid.index(ix0, iy)));
        column[iy] = column[iy + 1] + mismatch(p, q);
    }
    let mut psi = vec![0.0; grid.n_total()];
    for iy in 0..ny {
        psi[grid.index(ix0, iy)] = column[iy];
        for ix in (ix0 + 1)..nx {
            let (a, b) = (grid.index(ix - 1, iy), grid.index(ix, iy));
            psi[b] = psi[a] + mismatch(grid.node(a), grid.node(b));
        }
        for ix in (0..ix0).rev() {
            let (a, b) = (grid.index(ix + 1, iy), grid.index(ix, iy));
            psi[b] = psi[a] + mismatch(grid.node(a), grid.node(b));
        }
    }

    let mut v = vec![C64::new(0.0, 0.0); grid.n_total()];
    for iy in 0..ny {
        for ix in 0..nx {
            let di = ix as i64 - ix0 as i64 + mi0;
            let dj = iy as i64 - iy0 as i64 + mj0;
            if di < 0 || dj < 0 || di >= mnx || dj >= mny {
                continue;
            }
            let idx = grid.index(ix, iy);
            let p = grid.node(idx);
            let chi = cutoff.value((p[0] - center[0]).hypot(p[1] - center[1]));
            if chi > 0.0 {
                let wz = w[mbox.index(di as usize, dj as usize)];
                v[idx] = wz * C64::from_polar(chi, psi[idx] / h);
            }
        }
    }
    normalize(&mut v);
    let op = assemble(field, gauge, grid, h)?;
    let residual = residual(&op, &v, mu)?;
    Ok(Quasimode {
        vector: v,
        mu,
        residual,
        recipe: Recipe::ModelRescaled,
        h,
        params: QuasimodeParams { center, cutoff, level: None, j: Some(j), p: None, b: None },
    })
}

/// Cutoff radii in `y` for cylinder modes, in units of the fiber length `(h/β₁)^{1/(k+2)}`.
pub const CYLINDER_CUTOFF_LENGTHS: (f64, f64) = (4.6, 6.1);

/// `u = e^{−2πipx/L} v_j(y)` with `v_j` the `j`-th eigenvector of the momentum-`p`
/// fiber of the model field `β₁y^k/k!` on the y-grid (lattice-exact in `x`),
/// cut off in `y`, and `p` the integer whose `b(p)` is nearest `params.beta`.
/// The residual is taken on the cylinder operator of `fullfield`.
pub fn cylinder_separated_quasimode(
    params: &MontgomeryParams,
    fullfield: &FieldSpec,
    grid: &Grid,
    h: f64,
    j: usize,
    solver: &SolverOptions,
) -> Result<Quasimode> {
    params.validate()?;
    if j == 0 {
        return Err(Error::InvalidArgument("quasimode index j starts at 1".into()));
    }
    if (params.h - h).abs() > 1e-14 * h {
        return Err(Error::InvalidArgument(format!("params carry h = {} but h = {h} was requested", params.h)));
    }
    let y_axis = match (grid.boundary, grid.y) {
        (Boundary::PeriodicXDirichletY, Some(y)) => y,
        _ => return Err(Error::InvalidArgument("cylinder modes need a periodic-x grid".into())),
    };
    let k = params.k;
    let kf = k as f64;
    let spacing_b = 2.0 * PI * h.powf(1.0 / (kf + 2.0)) / params.period;
    let (p, b) = select_p(params, params.beta - 0.5 * spacing_b, params.beta + 0.5 * spacing_b + 1e-12)?;

    let ell = (h / params.beta1.abs()).powf(1.0 / (kf + 2.0));
    let cutoff = Cutoff::new(CYLINDER_CUTOFF_LENGTHS.0 * ell, CYLINDER_CUTOFF_LENGTHS.1 * ell)?;
    check_support(grid, [0.0, 0.0], cutoff.r2)?;

    let model = FieldSpec::power(params.beta1, k, params.period);
    let y_grid = Grid::line(y_axis);
    let fiber = cylinder_fiber(&model, params.alpha1, h, p, &y_grid, FiberKind::Lattice { dx: grid.x.spacing })?;
    let spec = lowest_eigenpairs(&fiber, j, &SolverOptions { keep_vectors: true, ..*solver })?;
    let vj = &spec.eigenvectors.as_ref().expect("kept vectors")[j - 1];
    let mu = spec.eigenvalues[j - 1];
    let ys: Vec<f64> = (0..y_axis.count).map(|i| y_axis.coord(i).abs()).collect();
    let profile: Vec<f64> = vj.iter().map(|z| z.norm_sqr()).collect();
    check_clipped(&profile, &ys, cutoff.r1)?;

    let mut v = vec![C64::new(0.0, 0.0); grid.n_total()];
    for iy in 0..grid.ny() {
        let chi = cutoff.value(ys[iy]);
        if chi == 0.0 {
            continue;
        }
        for ix in 0..grid.nx() {
            let idx = grid.index(ix, iy);
            let x = grid.node(idx)[0];
            v[idx] = vj[iy] * C64::from_polar(chi, -2.0 * PI * p as f64 * x / params.period);
        }
    }
    normalize(&mut v);
    let op = cylinder_operator(fullfield, params.alpha1, h, grid)?;
    let residual = residual(&op, &v, mu)?;
    Ok(Quasimode {
        vector: v,
        mu,
        residual,
        recipe: Recipe::CylinderSeparated,
        h,
        params: QuasimodeParams { center: [0.0, 0.0], cutoff, level: None, j: Some(j), p: Some(p), b: Some(b) },
    })
}

/// `|⟨u, v⟩|` for unit vectors.
pub fn overlap(u: &Quasimode, v: &Quasimode) -> Result<f64> {
    if u.vector.len() != v.vector.len() {
        return Err(Error::GridMismatch { vector: v.vector.len(), nodes: u.vector.len() });
    }
    Ok(dot(&u.vector, &v.vector).norm())
}

/// Least-squares slope of `log r` against `log h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Jackknife standard error of the slope.
    pub jackknife: f64,
    pub octaves: f64,
}

pub fn fit_residual_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 4 {
        return Err(Error::InsufficientSamples { reason: format!("{} samples, need at least 4", pairs.len()) });
    }
    if pairs.iter().any(|(h, r)| !(*h > 0.0 && *r > 0.0)) {
        return Err(Error::InvalidArgument("slope fits need positive h and residuals".into()));
    }
    let (hmin, hmax) = pairs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), (h, _)| (a.min(*h), b.max(*h)));
    let octaves = (hmax / hmin).log2();
    if octaves < 3.0 - 1e-9 {
        return Err(Error::InsufficientSamples { reason: format!("h spans {octaves:.2} octaves, need 3") });
    }
    let xs: Vec<f64> = pairs.iter().map(|(h, _)| h.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, r)| r.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    let n = xs.len();
    let leave_one_out: Vec<f64> = (0..n)
        .map(|i| {
            let (x, y): (Vec<f64>, Vec<f64>) = (0..n).filter(|&k| k != i).map(|k| (xs[k], ys[k])).unzip();
            linear_fit(&x, &y).0
        })
        .collect();
    let mean = leave_one_out.iter().sum::<f64>() / n as f64;
    let var = leave_one_out.iter().map(|s| (s - mean).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Ok(SlopeFit { slope, intercept, r2, jackknife: var.sqrt(), octaves })
}

//! Explicit operator families: the Montgomery family `H(h, β)`, its band
//! functions, the cylinder operator `H^{h,0}` with its momentum fibers, and
//! the homogeneous polynomial model `K^h` at a point zero.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpairs, richardson_refine, track_bands, BandFunctionTable, SolverOptions, Spectrum};
use crate::error::{Error, Result};
use crate::field::{FieldKind, FieldSpec, Lattice};
use crate::gauge::{cylinder_gauge, model_gauge};
use crate::grid::{Axis, Boundary, Grid};
use crate::operator::{
    assemble, assemble_potential_1d, magnetic_length, peierls_matrix, DiscreteOperator, OperatorTag,
};
use crate::sparse::HermitianMatrix;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Parameters of the Montgomery family and of the cylinder it lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MontgomeryParams {
    pub k: u32,
    pub h: f64,
    pub beta: f64,
    /// Constant part of the cylinder potential.
    pub alpha1: f64,
    /// Circumference `L` of the cylinder.
    pub period: f64,
    /// Leading coefficient of the field at the zero line.
    pub beta1: f64,
}

impl MontgomeryParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || !(self.h > 0.0) || !(self.period > 0.0) {
            return Err(Error::InvalidArgument(format!("need k ≥ 1, h > 0, L > 0 (got {self:?})")));
        }
        Ok(())
    }
}

/// `(β − y^{k+1}/(k+1)!)²`
pub fn montgomery_potential(k: u32, beta: f64, y: f64) -> f64 {
    let s = beta - y.powi(k as i32 + 1) / factorial(k + 1);
    s * s
}

/// Half-width `Y` of the truncated line for `H(h, β)`: the boundary
/// potential then exceeds the low eigenvalues by two orders of magnitude.
/// Written in covariant form so that dilated problems get dilated boxes; at
/// `h = 1` it reads `2((k+1)!(|β| + 10))^{1/(k+1)}`.
pub fn truncation_half_width(k: u32, h: f64, beta: f64) -> f64 {
    let kf = k as f64;
    let scaled_beta = beta * h.powf(-(kf + 1.0) / (kf + 2.0));
    h.powf(1.0 / (kf + 2.0)) * 2.0 * (factorial(k + 1) * (scaled_beta.abs() + 10.0)).powf(1.0 / (kf + 1.0))
}

/// Symmetric Dirichlet line `[−Y, Y]` of the given spacing with `Y` at least `half_width`.
pub fn line_grid(half_width: f64, spacing: f64) -> Grid {
    let intervals = (2.0 * half_width / spacing).ceil() as usize;
    let intervals = intervals + intervals % 2;
    let y = intervals as f64 * spacing / 2.0;
    Grid::line(Axis { start: -y + spacing, spacing, count: intervals - 1 })
}

/// Raw matrix of `H(h, β)` on `grid`, without truncation checks.
pub fn montgomery_matrix(h: f64, beta: f64, k: u32, grid: &Grid) -> HermitianMatrix {
    peierls_matrix(grid, h, |_, _| 0.0, |p| montgomery_potential(k, beta, p[0]))
}

/// Largest fraction of the lowest eigenfunction's mass allowed on the outermost nodes.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-8;

/// `H(h, β) = −h²∂² + (β − y^{k+1}/(k+1)!)²` on a truncated Dirichlet line.
pub fn assemble_montgomery_1d(h: f64, beta: f64, k: u32, grid: &Grid) -> Result<DiscreteOperator> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("Montgomery operator needs a 1D grid".into()));
    }
    let (a, b) = grid.x.bounds();
    let needed = truncation_half_width(k, h, beta);
    if -a < needed * (1.0 - 1e-12) || b < needed * (1.0 - 1e-12) {
        return Err(Error::TruncationTooSmall {
            reason: format!("line [{a}, {b}] is shorter than the truncation rule ±{needed}"),
        });
    }
    let op = assemble_potential_1d(grid, h, |y| montgomery_potential(k, beta, y), OperatorTag::Montgomery1D)?;
    check_boundary_mass(&op)?;
    Ok(op)
}

fn check_boundary_mass(op: &DiscreteOperator) -> Result<()> {
    let opts = SolverOptions { keep_vectors: true, ..Default::default() };
    let ground = lowest_eigenpairs(op, 1, &opts)?;
    let v = &ground.eigenvectors.as_ref().expect("kept vectors")[0];
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let edge = (v[0].norm_sqr() + v[v.len() - 1].norm_sqr()) / total;
    if edge > BOUNDARY_MASS_LIMIT {
        return Err(Error::TruncationTooSmall {
            reason: format!("ground state keeps {edge:e} of its mass on the boundary nodes"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    /// `max |M(h,β;G) − α^{−(2k+2)} M(α^{k+2}h, α^{k+1}β; αG)|`
    pub deviation: f64,
    /// Row-sum norm bound of `M(h,β;G)`.
    pub scale: f64,
}

/// Compares `H(h, β)` on `grid` with the dilated family member on the dilated grid.
pub fn dilation_check(k: u32, h: f64, beta: f64, alpha: f64, grid: &Grid) -> Result<DilationReport> {
    if !(alpha > 0.0) || grid.dim() != 1 {
        return Err(Error::InvalidArgument("dilation needs α > 0 and a 1D grid".into()));
    }
    let kf = k as i32;
    let scaled_grid = Grid::line(grid.x.scaled(alpha));
    let lhs = montgomery_matrix(h, beta, k, grid);
    let rhs = montgomery_matrix(alpha.powi(kf + 2) * h, alpha.powi(kf + 1) * beta, k, &scaled_grid);
    let deviation = lhs.max_deviation(&rhs, alpha.powi(-(2 * kf + 2)));
    Ok(DilationReport { deviation, scale: lhs.norm_bound() })
}

/// Resolution settings for band tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    /// Coarse spacing; Richardson uses this and its half.
    pub spacing: f64,
    pub solver: SolverOptions,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self { spacing: 1.0 / 64.0, solver: SolverOptions::default() }
    }
}

/// Band functions `μ_j(b)`, the `J` lowest eigenvalues of `H(1, b)`, Richardson
/// refined and branch-tracked over `b_grid`.
pub fn montgomery_bands(k: u32, b_grid: &[f64], j_max: usize, opts: &BandOptions) -> Result<BandFunctionTable> {
    if j_max == 0 || j_max > 12 {
        return Err(Error::InvalidArgument(format!("J = {j_max} outside 1..=12")));
    }
    if b_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("b grid must be strictly increasing".into()));
    }
    // one common line keeps eigenvectors comparable across samples
    let half = b_grid.iter().map(|b| truncation_half_width(k, 1.0, *b)).fold(0.0, f64::max);
    let grid = line_grid(half, opts.spacing);
    let samples: Vec<Result<(f64, Spectrum)>> = b_grid
        .par_iter()
        .map(|&b| {
            let spec = richardson_refine(|g| assemble_montgomery_1d(1.0, b, k, g), &grid, j_max, &opts.solver)?;
            Ok((b, spec))
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = track_bands(&samples);
    table.k = k;
    Ok(table)
}

/// Index and value of the minimum of the first band.
pub fn band_minimum(table: &BandFunctionTable) -> (usize, f64) {
    table.mu[0].iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty band table")
}

/// Band table on `[lo, hi]` with step `step`, widened by one unit on whichever
/// side holds the minimum of `μ₁` until that minimum is interior.
pub fn bands_with_interior_minimum(
    k: u32,
    mut lo: f64,
    mut hi: f64,
    step: f64,
    j_max: usize,
    opts: &BandOptions,
) -> Result<BandFunctionTable> {
    for _ in 0..16 {
        let n = ((hi - lo) / step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();
        let table = montgomery_bands(k, &grid, j_max, opts)?;
        let (i, _) = band_minimum(&table);
        if i == 0 {
            lo -= 1.0;
        } else if i == n {
            hi += 1.0;
        } else {
            return Ok(table);
        }
    }
    Err(Error::InvalidArgument("band minimum did not become interior".into()))
}

/// The momentum-like parameter `b(p) = h^{−(k+1)/(k+2)}(2πhp/L − α₁)`.
pub fn momentum_b(params: &MontgomeryParams, p: i64) -> f64 {
    let kf = params.k as f64;
    params.h.powf(-(kf + 1.0) / (kf + 2.0)) * (2.0 * PI * params.h * p as f64 / params.period - params.alpha1)
}

/// Smallest integer `p` with `b₁ < b(p) < b₂`, and the achieved `b(p)`.
pub fn select_p(params: &MontgomeryParams, b1: f64, b2: f64) -> Result<(i64, f64)> {
    params.validate()?;
    if !(b1 < b2) {
        return Err(Error::InvalidArgument(format!("empty interval ({b1}, {b2})")));
    }
    let kf = params.k as f64;
    let h = params.h;
    let threshold = (b1 * h.powf((kf + 1.0) / (kf + 2.0)) + params.alpha1) * params.period / (2.0 * PI * h);
    let mut p = threshold.floor() as i64;
    while momentum_b(params, p) <= b1 {
        p += 1;
    }
    let b = momentum_b(params, p);
    if b < b2 {
        Ok((p, b))
    } else {
        let max_h = (params.period * (b2 - b1) / (2.0 * PI)).powf(kf + 2.0);
        Err(Error::NoAdmissibleInteger { h, max_h })
    }
}

fn cylinder_period(field: &FieldSpec) -> Result<f64> {
    match (&field.kind, &field.lattice) {
        (FieldKind::LineWellCylinder, Lattice::Cylinder { period, .. }) if field.family.is_y_only() => Ok(*period),
        _ => Err(Error::InvalidArgument("cylinder operator needs a y-only field on a cylinder".into())),
    }
}

/// `H^{h,0}` on `S¹_L × (−Y, Y)` with `A = (−α₁ − ∫₀^y b, 0)`.
pub fn cylinder_operator(field: &FieldSpec, alpha1: f64, h: f64, grid: &Grid) -> Result<DiscreteOperator> {
    let period = cylinder_period(field)?;
    if grid.boundary != Boundary::PeriodicXDirichletY || grid.period.is_none_or(|l| (l - period).abs() > 1e-12 * period)
    {
        return Err(Error::InvalidArgument(format!("grid must be periodic in x with period {period}")));
    }
    let gauge = cylinder_gauge(field, alpha1)?;
    Ok(assemble(field, &gauge, grid, h)?.with_tag(OperatorTag::Cylinder))
}

/// How the x-derivative of a momentum sector is represented on a fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fiber", rename_all = "snake_case")]
pub enum FiberKind {
    /// `(β − G(y))²`, the continuum symbol.
    Continuum,
    /// `(2h²/Δx²)(1 − cos(Δx(β − G(y))/h))`, the exact restriction of the
    /// periodic Peierls stencil with spacing `Δx` to the sector.
    Lattice { dx: f64 },
}

/// The 1D operator acting on `v` in `u = e^{−2πipx/L} v(y)`:
/// `−h²∂²_y + (β − G(y))²` with `β = 2πhp/L − α₁` and `G = ∫₀^y b`.
pub fn cylinder_fiber(
    field: &FieldSpec,
    alpha1: f64,
    h: f64,
    p: i64,
    y_grid: &Grid,
    kind: FiberKind,
) -> Result<DiscreteOperator> {
    let period = cylinder_period(field)?;
    let beta = 2.0 * PI * h * p as f64 / period - alpha1;
    let g = |y: f64| field.family.y_antiderivative(y).expect("y-only family");
    let potential = move |y: f64| match kind {
        FiberKind::Continuum => (beta - g(y)).powi(2),
        FiberKind::Lattice { dx } => 2.0 * h * h / (dx * dx) * (1.0 - (dx * (beta - g(y)) / h).cos()),
    };
    assemble_potential_1d(y_grid, h, potential, OperatorTag::Montgomery1D)
}

/// `K^h` for the homogeneous model `b⁰` centred at the origin.
pub fn model_operator_2d(model: &FieldSpec, h: f64, grid: &Grid) -> Result<DiscreteOperator> {
    if model.kind != FieldKind::PolynomialModel {
        return Err(Error::InvalidArgument("model operator needs a homogeneous polynomial field".into()));
    }
    let y = grid.y.ok_or_else(|| Error::InvalidArgument("model operator needs a 2D grid".into()))?;
    let (x0, x1) = grid.x.bounds();
    let (y0, y1) = y.bounds();
    let extent = (x1 - x0).min(y1 - y0);
    let needed = 10.0 * magnetic_length(h, model.k);
    if extent < needed * (1.0 - 1e-12) {
        return Err(Error::TruncationTooSmall {
            reason: format!("box extent {extent} below 10·h^(1/(k+2)) = {needed}"),
        });
    }
    let gauge = model_gauge(model, [0.0, 0.0]);
    Ok(assemble(model, &gauge, grid, h)?.with_tag(OperatorTag::ModelK))
}

/// Square Dirichlet box `[−R, R]²` with `R ≥ half_width` on nodes of spacing `spacing`
/// (the origin is a node).
pub fn centred_box(half_width: f64, spacing: f64) -> Grid {
    let line = line_grid(half_width, spacing);
    Grid::rectangle(line.x, line.x)
}

/// Reference spectrum of `K¹`, computed once and cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReference {
    pub version: u32,
    pub coeffs: Vec<f64>,
    pub half_width: f64,
    pub spacing: f64,
    pub eigenvalues: Vec<f64>,
    pub errors: Vec<f64>,
}

pub const REFERENCE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub half_width: f64,
    /// Coarse spacing of the Richardson pair.
    pub spacing: f64,
    pub count: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { half_width: 5.0, spacing: 1.0 / 12.0, count: 10 }
    }
}

/// Richardson-refined `λ_j(K¹)` for `model`, read from `cache` when a matching
/// entry exists there and written back otherwise.
pub fn model_reference(
    model: &FieldSpec,
    ropts: &ReferenceOptions,
    cache: Option<&Path>,
    solver: &SolverOptions,
) -> Result<ModelReference> {
    let coeffs = match &model.family {
        crate::field::Family::Polynomial { coeffs } => coeffs.clone(),
        _ => return Err(Error::InvalidArgument("reference spectra exist for polynomial models only".into())),
    };
    if let Some(path) = cache {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(entries) = serde_json::from_str::<Vec<ModelReference>>(&text) {
                let hit = entries.into_iter().find(|e| {
                    e.version == REFERENCE_VERSION
                        && e.coeffs == coeffs
                        && e.half_width == ropts.half_width
                        && e.spacing == ropts.spacing
                        && e.eigenvalues.len() >= ropts.count
                });
                if let Some(mut e) = hit {
                    e.eigenvalues.truncate(ropts.count);
                    e.errors.truncate(ropts.count);
                    return Ok(e);
                }
            }
        }
    }
    let grid = centred_box(ropts.half_width, ropts.spacing);
    let solver = SolverOptions { keep_vectors: false, ..*solver };
    let spec = richardson_refine(|g| model_operator_2d(model, 1.0, g), &grid, ropts.count, &solver)?;
    let reference = ModelReference {
        version: REFERENCE_VERSION,
        coeffs,
        half_width: ropts.half_width,
        spacing: ropts.spacing,
        eigenvalues: spec.eigenvalues,
        errors: spec.discretization_error,
    };
    if let Some(path) = cache {
        let mut entries: Vec<ModelReference> =
            std::fs::read_to_string(path).ok().and_then(|t| serde_json::from_str(&t).ok()).unwrap_or_default();
        entries.retain(|e| {
            !(e.coeffs == reference.coeffs && e.half_width == reference.half_width && e.spacing == reference.spacing)
        });
        entries.push(reference.clone());
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(&entries)?)?;
    }
    Ok(reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rule_at_unit_h() {
        let y = truncation_half_width(1, 1.0, 0.0);
        assert!((y - 2.0 * 20f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dilation_is_exact() {
        let grid = line_grid(truncation_half_width(1, 0.1, 0.3), 1.0 / 64.0);
        let r = dilation_check(1, 0.1, 0.3, 2.0, &grid).unwrap();
        assert!(r.deviation <= 1e-12 * r.scale, "{r:?}");
        assert_eq!(dilation_check(1, 0.1, 0.3, 1.0, &grid).unwrap().deviation, 0.0);
    }

    #[test]
    fn select_p_examples() {
        let params = MontgomeryParams { k: 1, h: 0.01, beta: 0.0, alpha1: 0.0, period: 2.0 * PI, beta1: 1.0 };
        let (p, b) = select_p(&params, 0.0, 1.0).unwrap();
        assert_eq!(p, 1);
        assert!((b - 0.01f64.cbrt()).abs() < 1e-12);
        let coarse = MontgomeryParams { h: 0.3, ..params };
        assert!(matches!(select_p(&coarse, 0.4, 0.41), Err(Error::NoAdmissibleInteger { .. })));
        let shifted = MontgomeryParams { alpha1: 1.0, ..params };
        let (_, b) = select_p(&shifted, 0.0, 1.0).unwrap();
        assert!(b > 0.0 && b < 1.0);
    }

    #[test]
    fn short_line_is_rejected() {
        let grid = Grid::dirichlet_1d(-2.0, 2.0, 256);
        assert!(matches!(assemble_montgomery_1d(1.0, 0.0, 1, &grid), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn quartic_ground_state() {
        let grid = line_grid(truncation_half_width(1, 1.0, 0.0), 1.0 / 128.0);
        let s =
            richardson_refine(|g| assemble_montgomery_1d(1.0, 0.0, 1, g), &grid, 1, &SolverOptions::default()).unwrap();
        assert!((s.eigenvalues[0] - 0.66799).abs() < 1e-4, "{}", s.eigenvalues[0]);
    }
}

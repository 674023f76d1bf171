//! Periodic scalar magnetic fields on flat 2D domains and their wells.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    X,
    Y,
}

/// Built-in parametric field families. `b` is the density of `B = b dx∧dy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Constant {
        value: f64,
    },
    /// `a (sin²πx + sin²πy)`: point zeros of order 2 on ℤ².
    SinSquared {
        amplitude: f64,
    },
    /// `a (1 − cos 2πx · cos 2πy)`: point zeros of order 2 on ℤ² ∪ (ℤ² + (½,½)).
    CosProduct {
        amplitude: f64,
    },
    /// `a sin(2πt)` with `t` the coordinate along `axis`; simple zero lines.
    Stripe {
        amplitude: f64,
        axis: Direction,
    },
    /// `β₁ y^k / k!`, the flat leading term at a line zero.
    Power {
        beta1: f64,
        k: u32,
    },
    /// Homogeneous polynomial `Σ_i c_i x^{k-i} y^i` of degree `k = coeffs.len() - 1`.
    Polynomial {
        coeffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    PointWells2D,
    LineWellCylinder,
    Constant2D,
    PolynomialModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lattice", rename_all = "snake_case")]
pub enum Lattice {
    /// Translation lattice generated by the two period vectors.
    Plane { periods: [[f64; 2]; 2] },
    /// A circle of length `period` along `circle`; the field is constant along it.
    Cylinder { period: f64, circle: Direction },
    /// No periodicity (model polynomials).
    Free,
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn square(center: [f64; 2], half: f64) -> Self {
        Self::new(center[0] - half, center[0] + half, center[1] - half, center[1] + half)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains_strictly(&self, p: [f64; 2]) -> bool {
        p[0] > self.x0 && p[0] < self.x1 && p[1] > self.y0 && p[1] < self.y1
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl Family {
    pub fn b(&self, x: f64, y: f64) -> f64 {
        match self {
            Family::Constant { value } => *value,
            Family::SinSquared { amplitude } => {
                let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
                amplitude * (sx * sx + sy * sy)
            }
            Family::CosProduct { amplitude } => amplitude * (1.0 - (2.0 * PI * x).cos() * (2.0 * PI * y).cos()),
            Family::Stripe { amplitude, axis } => {
                let t = if *axis == Direction::X { x } else { y };
                amplitude * (2.0 * PI * t).sin()
            }
            Family::Power { beta1, k } => beta1 * y.powi(*k as i32) / factorial(*k),
            Family::Polynomial { coeffs } => {
                let k = coeffs.len() - 1;
                coeffs.iter().enumerate().map(|(i, c)| c * x.powi((k - i) as i32) * y.powi(i as i32)).sum()
            }
        }
    }

    /// `F(x, y)` with `∂F/∂x = b`, used by the Landau gauge.
    pub fn x_antiderivative(&self, x: f64, y: f64) -> f64 {
        match self {
            Family::Constant { value } => value * x,
            Family::SinSquared { amplitude } => {
                let sy = (PI * y).sin();
                amplitude * (x * sy * sy + 0.5 * x - (2.0 * PI * x).sin() / (4.0 * PI))
            }
            Family::CosProduct { amplitude } => {
                amplitude * (x - (2.0 * PI * y).cos() * (2.0 * PI * x).sin() / (2.0 * PI))
            }
            Family::Stripe { amplitude, axis: Direction::X } => amplitude * (1.0 - (2.0 * PI * x).cos()) / (2.0 * PI),
            Family::Stripe { amplitude, axis: Direction::Y } => amplitude * x * (2.0 * PI * y).sin(),
            Family::Power { .. } => x * self.b(x, y),
            Family::Polynomial { coeffs } => {
                let k = coeffs.len() - 1;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let e = (k - i + 1) as i32;
                        c * x.powi(e) * y.powi(i as i32) / e as f64
                    })
                    .sum()
            }
        }
    }

    /// `∂F/∂y` for the x-antiderivative above.
    pub fn x_antiderivative_dy(&self, x: f64, y: f64) -> f64 {
        match self {
            Family::Constant { .. } | Family::Stripe { axis: Direction::X, .. } => 0.0,
            Family::SinSquared { amplitude } => amplitude * x * PI * (2.0 * PI * y).sin(),
            Family::CosProduct { amplitude } => amplitude * (2.0 * PI * y).sin() * (2.0 * PI * x).sin(),
            Family::Stripe { amplitude, axis: Direction::Y } => amplitude * x * 2.0 * PI * (2.0 * PI * y).cos(),
            Family::Power { beta1, k } => {
                if *k == 0 {
                    0.0
                } else {
                    x * beta1 * y.powi(*k as i32 - 1) / factorial(k - 1)
                }
            }
            Family::Polynomial { coeffs } => {
                let k = coeffs.len() - 1;
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| {
                        let e = (k - i + 1) as i32;
                        c * i as f64 * x.powi(e) * y.powi(i as i32 - 1) / e as f64
                    })
                    .sum()
            }
        }
    }

    /// Whether `b` depends on `y` only.
    pub fn is_y_only(&self) -> bool {
        matches!(self, Family::Constant { .. } | Family::Power { .. } | Family::Stripe { axis: Direction::Y, .. })
            || matches!(self, Family::Polynomial { coeffs } if coeffs[..coeffs.len() - 1].iter().all(|c| *c == 0.0))
    }

    /// `G(y) = ∫₀^y b` for fields depending on `y` only.
    pub fn y_antiderivative(&self, y: f64) -> Option<f64> {
        match self {
            Family::Constant { value } => Some(value * y),
            Family::Power { beta1, k } => Some(beta1 * y.powi(*k as i32 + 1) / factorial(k + 1)),
            Family::Stripe { amplitude, axis: Direction::Y } => {
                Some(amplitude * (1.0 - (2.0 * PI * y).cos()) / (2.0 * PI))
            }
            Family::Polynomial { coeffs } if self.is_y_only() => {
                let k = coeffs.len() - 1;
                Some(coeffs[k] * y.powi(k as i32 + 1) / (k + 1) as f64)
            }
            _ => None,
        }
    }

    /// Exact homogeneous Taylor coefficients at a zero where they are known in
    /// closed form (`Σ c_i X^{k-i} Y^i`, `X = x − x₀`).
    fn closed_form_model(&self, center: [f64; 2]) -> Option<Vec<f64>> {
        let on_integer = |t: f64| (t - t.round()).abs() < 1e-12;
        let on_half = |t: f64| (t - 0.5 - (t - 0.5).round()).abs() < 1e-12;
        match self {
            Family::SinSquared { amplitude } if on_integer(center[0]) && on_integer(center[1]) => {
                let c = amplitude * PI * PI;
                Some(vec![c, 0.0, c])
            }
            Family::CosProduct { amplitude }
                if (on_integer(center[0]) && on_integer(center[1])) || (on_half(center[0]) && on_half(center[1])) =>
            {
                let c = 2.0 * amplitude * PI * PI;
                Some(vec![c, 0.0, c])
            }
            Family::Stripe { amplitude, axis } => {
                let t = if *axis == Direction::X { center[0] } else { center[1] };
                let slope = if on_integer(t) {
                    2.0 * PI * amplitude
                } else if on_half(t) {
                    -2.0 * PI * amplitude
                } else {
                    return None;
                };
                Some(if *axis == Direction::X { vec![slope, 0.0] } else { vec![0.0, slope] })
            }
            Family::Polynomial { coeffs } if center == [0.0, 0.0] => Some(coeffs.clone()),
            Family::Power { beta1, k } if center[1] == 0.0 => {
                let mut c = vec![0.0; *k as usize + 1];
                c[*k as usize] = beta1 / factorial(*k);
                Some(c)
            }
            _ => None,
        }
    }
}

/// A magnetic field with its lattice and well metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub family: Family,
    pub lattice: Lattice,
    /// Vanishing order at the wells.
    pub k: u32,
    /// Leading coefficient at the well.
    pub beta1: f64,
}

const UNIT_SQUARE: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

impl FieldSpec {
    pub fn constant(value: f64) -> Self {
        Self {
            kind: FieldKind::Constant2D,
            family: Family::Constant { value },
            lattice: Lattice::Plane { periods: UNIT_SQUARE },
            k: 0,
            beta1: value,
        }
    }

    /// `a (sin²πx + sin²πy)`, wells at ℤ².
    pub fn sin_squared(amplitude: f64) -> Self {
        Self {
            kind: FieldKind::PointWells2D,
            family: Family::SinSquared { amplitude },
            lattice: Lattice::Plane { periods: UNIT_SQUARE },
            k: 2,
            beta1: 2.0 * PI * PI * amplitude,
        }
    }

    /// `a (1 − cos 2πx cos 2πy)`, wells at ℤ² and ℤ² + (½, ½).
    pub fn cos_product(amplitude: f64) -> Self {
        Self {
            kind: FieldKind::PointWells2D,
            family: Family::CosProduct { amplitude },
            lattice: Lattice::Plane { periods: [[1.0, 0.0], [0.0, 1.0]] },
            k: 2,
            beta1: 4.0 * PI * PI * amplitude,
        }
    }

    /// `a sin(2πt)` along `axis`, on a cylinder whose circle (length `period`)
    /// runs along the other axis.
    pub fn stripe(amplitude: f64, axis: Direction, period: f64) -> Self {
        let circle = if axis == Direction::X { Direction::Y } else { Direction::X };
        Self {
            kind: FieldKind::LineWellCylinder,
            family: Family::Stripe { amplitude, axis },
            lattice: Lattice::Cylinder { period, circle },
            k: 1,
            beta1: 2.0 * PI * amplitude,
        }
    }

    /// `β₁ y^k / k!` on a cylinder of circumference `period` along x.
    pub fn power(beta1: f64, k: u32, period: f64) -> Self {
        Self {
            kind: FieldKind::LineWellCylinder,
            family: Family::Power { beta1, k },
            lattice: Lattice::Cylinder { period, circle: Direction::X },
            k,
            beta1,
        }
    }

    /// Homogeneous polynomial model `Σ c_i x^{k-i} y^i`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::InvalidArgument("polynomial model needs a nonzero coefficient".into()));
        }
        let k = (coeffs.len() - 1) as u32;
        let beta1 = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Ok(Self {
            kind: FieldKind::PolynomialModel,
            family: Family::Polynomial { coeffs },
            lattice: Lattice::Free,
            k,
            beta1,
        })
    }

    pub fn b(&self, p: [f64; 2]) -> f64 {
        self.family.b(p[0], p[1])
    }

    /// Checks the declared periodicity and sign conditions on a sample grid.
    pub fn validate(&self) -> Result<()> {
        let samples: Vec<[f64; 2]> =
            (0..17).flat_map(|i| (0..17).map(move |j| [-0.9 + 0.1125 * i as f64, -0.85 + 0.11 * j as f64])).collect();
        let generators: Vec<[f64; 2]> = match &self.lattice {
            Lattice::Plane { periods } => periods.to_vec(),
            Lattice::Cylinder { period, circle: Direction::X } => vec![[*period, 0.0]],
            Lattice::Cylinder { period, circle: Direction::Y } => vec![[0.0, *period]],
            Lattice::Free => Vec::new(),
        };
        for g in &generators {
            for p in &samples {
                let d = (self.b([p[0] + g[0], p[1] + g[1]]) - self.b(*p)).abs();
                if d >= 1e-12 * self.b(*p).abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!("field is not periodic under {g:?} (defect {d:e})")));
                }
            }
        }
        if self.kind == FieldKind::PointWells2D && samples.iter().any(|p| self.b(*p) < -1e-14) {
            return Err(Error::InvalidArgument("point-well field takes negative values".into()));
        }
        Ok(())
    }

    /// Homogeneous degree-`k` Taylor polynomial of `b` at `center`, in the
    /// shifted coordinates `X = x − center`.
    pub fn taylor_model(&self, center: [f64; 2]) -> Result<FieldSpec> {
        let coeffs = match self.family.closed_form_model(center) {
            Some(c) => c,
            None => self.numeric_model(center)?,
        };
        FieldSpec::polynomial(coeffs)
    }

    fn numeric_model(&self, center: [f64; 2]) -> Result<Vec<f64>> {
        // k-th order mixed differences; the step balances truncation against rounding
        let k = self.k as usize;
        let step = 1e-16f64.powf(1.0 / (k as f64 + 2.0));
        let mut coeffs = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let (nx, ny) = (k - i, i);
            let mut acc = 0.0;
            for a in 0..=nx {
                for c in 0..=ny {
                    let w = binom(nx, a) * binom(ny, c) * if (a + c) % 2 == 0 { 1.0 } else { -1.0 };
                    let px = center[0] + (nx as f64 / 2.0 - a as f64) * step;
                    let py = center[1] + (ny as f64 / 2.0 - c as f64) * step;
                    acc += w * self.b([px, py]);
                }
            }
            let deriv = acc / step.powi(k as i32);
            coeffs.push(deriv * binom(k, i) / factorial(k as u32));
        }
        if coeffs.iter().all(|c| !c.is_finite() || *c == 0.0) {
            return Err(Error::InvalidArgument("vanishing Taylor model".into()));
        }
        Ok(coeffs)
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Tr⁺(B(p))`; with the flat metric this is `|b(p)|`.
pub fn trplus(field: &FieldSpec, p: [f64; 2]) -> f64 {
    field.b(p).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub passed: bool,
    pub boundary_min: f64,
    pub b0: f64,
    pub eps0: f64,
    /// Attained margin `boundary_min − b0`.
    pub margin: f64,
}

/// Checks `Tr⁺B ≥ b₀ + ε₀` on the sampled boundary of one fundamental cell.
pub fn check_barrier(field: &FieldSpec, domain: Rect, eps0: f64, samples: usize) -> Result<BarrierReport> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("{samples} boundary samples per edge, need at least 100")));
    }
    // edges that are glued by the cylinder identification are not boundary
    let (check_x_edges, check_y_edges) = match &field.lattice {
        Lattice::Plane { periods } => {
            let covolume = (periods[0][0] * periods[1][1] - periods[0][1] * periods[1][0]).abs();
            if (domain.area() - covolume).abs() > 1e-9 {
                return Err(Error::DomainNotFundamental { area: domain.area(), covolume });
            }
            (true, true)
        }
        Lattice::Cylinder { period, circle } => {
            let extent = if *circle == Direction::X { domain.width() } else { domain.height() };
            if (extent - period).abs() > 1e-9 {
                return Err(Error::DomainNotFundamental {
                    area: domain.area(),
                    covolume: period * domain.area() / extent,
                });
            }
            (*circle == Direction::Y, *circle == Direction::X)
        }
        Lattice::Free => (true, true),
    };

    let mut boundary_min = f64::INFINITY;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let x = domain.x0 + t * domain.width();
        let y = domain.y0 + t * domain.height();
        if check_y_edges {
            boundary_min = boundary_min.min(trplus(field, [x, domain.y0])).min(trplus(field, [x, domain.y1]));
        }
        if check_x_edges {
            boundary_min = boundary_min.min(trplus(field, [domain.x0, y])).min(trplus(field, [domain.x1, y]));
        }
    }
    let b0 = sampled_minimum(field, domain, samples.max(512)).0;
    Ok(BarrierReport { passed: boundary_min >= b0 + eps0, boundary_min, b0, eps0, margin: boundary_min - b0 })
}

/// Minimum of `Tr⁺B` over a `res × res` node grid covering `domain`, and its location.
fn sampled_minimum(field: &FieldSpec, domain: Rect, res: usize) -> (f64, [f64; 2]) {
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for j in 0..=res {
        for i in 0..=res {
            let p = [
                domain.x0 + domain.width() * i as f64 / res as f64,
                domain.y0 + domain.height() * j as f64 / res as f64,
            ];
            let v = trplus(field, p);
            if v < best.0 {
                best = (v, p);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum WellCenter {
    Point {
        at: [f64; 2],
    },
    /// The zero curve `{axis coordinate = value}` of a cylinder field.
    Line {
        axis: Direction,
        value: f64,
    },
}

impl WellCenter {
    /// A representative point of the well.
    pub fn point(&self, domain: &Rect) -> [f64; 2] {
        match self {
            WellCenter::Point { at } => *at,
            WellCenter::Line { axis: Direction::X, value } => [*value, 0.5 * (domain.y0 + domain.y1)],
            WellCenter::Line { axis: Direction::Y, value } => [0.5 * (domain.x0 + domain.x1), *value],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub center: WellCenter,
    /// Least-squares log-log slope of the well profile.
    pub k_fit: f64,
    pub k: u32,
    /// Leading coefficient estimate `C·k!` from the fit `Tr⁺B − b₀ ≈ C r^k`.
    pub beta1: f64,
    /// Number of flood-fill samples in the component.
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellCatalog {
    pub wells: Vec<Well>,
    pub b0: f64,
    pub eps0: f64,
    pub fundamental_domain: Rect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellSearch {
    pub eps1: f64,
    /// Flood-fill samples per cell side.
    pub resolution: usize,
    /// Barrier margin recorded in the catalog.
    pub eps0: f64,
}

impl WellSearch {
    pub fn new(eps1: f64) -> Self {
        Self { eps1, resolution: 512, eps0: f64::NAN }
    }
}

/// Connected components of `{Tr⁺B < b₀ + ε₁}` interior to `domain`.
pub fn locate_wells(field: &FieldSpec, domain: Rect, search: WellSearch) -> Result<WellCatalog> {
    let res = search.resolution.max(8);
    let (b0, _) = sampled_minimum(field, domain, res);
    let level = b0 + search.eps1;
    // sample at cell centres so the domain boundary is never sampled twice
    let at = |i: usize, j: usize| {
        [
            domain.x0 + domain.width() * (i as f64 + 0.5) / res as f64,
            domain.y0 + domain.height() * (j as f64 + 0.5) / res as f64,
        ]
    };
    let inside: Vec<bool> = (0..res * res).map(|idx| trplus(field, at(idx % res, idx / res)) < level).collect();
    let glued = match &field.lattice {
        Lattice::Cylinder { circle, .. } => Some(*circle),
        _ => None,
    };

    let mut label = vec![usize::MAX; res * res];
    let mut wells = Vec::new();
    for seed in 0..res * res {
        if !inside[seed] || label[seed] != usize::MAX {
            continue;
        }
        let id = seed;
        let mut queue = VecDeque::from([seed]);
        label[seed] = id;
        let mut members = Vec::new();
        let mut touches = false;
        while let Some(idx) = queue.pop_front() {
            members.push(idx);
            let (i, j) = (idx % res, idx / res);
            let x_edge = i == 0 || i == res - 1;
            let y_edge = j == 0 || j == res - 1;
            touches |= (x_edge && glued != Some(Direction::X)) || (y_edge && glued != Some(Direction::Y));
            let mut push = |ni: usize, nj: usize| {
                let n = nj * res + ni;
                if inside[n] && label[n] == usize::MAX {
                    label[n] = id;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < res {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < res {
                push(i, j + 1);
            }
        }
        if touches {
            continue;
        }
        let argmin = members
            .iter()
            .copied()
            .min_by(|a, b| trplus(field, at(a % res, a / res)).total_cmp(&trplus(field, at(b % res, b / res))))
            .expect("nonempty component");
        let cell = [domain.width() / res as f64, domain.height() / res as f64];
        let center = refine_minimum(field, at(argmin % res, argmin / res), cell);
        let well_center = match glued {
            Some(Direction::X) => WellCenter::Line { axis: Direction::Y, value: center[1] },
            Some(Direction::Y) => WellCenter::Line { axis: Direction::X, value: center[0] },
            None => WellCenter::Point { at: center },
        };
        let (k_fit, beta1) = fit_order(field, &well_center, center, b0, domain.diameter());
        wells.push(Well { center: well_center, k_fit, k: k_fit.round().max(0.0) as u32, beta1, cells: members.len() });
    }
    if wells.is_empty() {
        return Err(Error::NoWells);
    }
    Ok(WellCatalog { wells, b0, eps0: search.eps0, fundamental_domain: domain })
}

/// Zooming grid search for the minimum of `Tr⁺B` near `start`.
fn refine_minimum(field: &FieldSpec, start: [f64; 2], cell: [f64; 2]) -> [f64; 2] {
    let mut best = start;
    let mut span = [cell[0] * 2.0, cell[1] * 2.0];
    for _ in 0..40 {
        let mut cand = (trplus(field, best), best);
        for dj in -4i32..=4 {
            for di in -4i32..=4 {
                let p = [best[0] + span[0] * di as f64 / 4.0, best[1] + span[1] * dj as f64 / 4.0];
                let v = trplus(field, p);
                if v < cand.0 {
                    cand = (v, p);
                }
            }
        }
        best = cand.1;
        span = [span[0] / 2.0, span[1] / 2.0];
    }
    best
}

/// Log-log slope of `Tr⁺B − b₀` against distance over `r ∈ [10⁻³, 10⁻¹]·diameter`.
fn fit_order(field: &FieldSpec, well: &WellCenter, center: [f64; 2], b0: f64, diameter: f64) -> (f64, f64) {
    let directions: Vec<[f64; 2]> = match well {
        WellCenter::Point { .. } => (0..8)
            .map(|a| {
                let t = a as f64 * PI / 4.0 + 0.1;
                [t.cos(), t.sin()]
            })
            .collect(),
        WellCenter::Line { axis: Direction::X, .. } => vec![[1.0, 0.0], [-1.0, 0.0]],
        WellCenter::Line { axis: Direction::Y, .. } => vec![[0.0, 1.0], [0.0, -1.0]],
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let radii = 17;
    for d in &directions {
        for s in 0..radii {
            let r = diameter * 1e-3 * 100f64.powf(s as f64 / (radii - 1) as f64);
            let v = trplus(field, [center[0] + r * d[0], center[1] + r * d[1]]) - b0;
            if v > 0.0 {
                xs.push(r.ln());
                ys.push(v.ln());
            }
        }
    }
    let (slope, intercept, _) = crate::stats::linear_fit(&xs, &ys);
    let k = slope.round().max(0.0) as u32;
    (slope, intercept.exp() * factorial(k))
}

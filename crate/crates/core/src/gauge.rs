//! Vector potentials `A` with `dA = B` and their Peierls link integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Direction, Family, FieldKind, FieldSpec, Lattice};

/// Polynomial `Σ c x^i y^j`, used as a gauge function.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly2 {
    pub terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * p[0].powi(i as i32) * p[1].powi(j as i32)).sum()
    }

    pub fn grad(&self, p: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0, 0.0];
        for &(i, j, c) in &self.terms {
            if i > 0 {
                g[0] += c * i as f64 * p[0].powi(i as i32 - 1) * p[1].powi(j as i32);
            }
            if j > 0 {
                g[1] += c * j as f64 * p[0].powi(i as i32) * p[1].powi(j as i32 - 1);
            }
        }
        g
    }

    /// `[[∂xx, ∂xy], [∂yx, ∂yy]]`
    pub fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let mut hs = [[0.0; 2]; 2];
        let pw = |t: f64, e: i64| if e < 0 { 0.0 } else { t.powi(e as i32) };
        for &(i, j, c) in &self.terms {
            let (i, j) = (i as i64, j as i64);
            hs[0][0] += c * (i * (i - 1)) as f64 * pw(p[0], i - 2) * pw(p[1], j);
            hs[1][1] += c * (j * (j - 1)) as f64 * pw(p[0], i) * pw(p[1], j - 2);
            let m = c * (i * j) as f64 * pw(p[0], i - 1) * pw(p[1], j - 1);
            hs[0][1] += m;
            hs[1][0] += m;
        }
        hs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeTag {
    Landau,
    ModelPolynomial,
    ShiftedByGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "potential", rename_all = "snake_case")]
pub enum Potential {
    /// `A = (0, F(X, Y) − F(0, Y))` with `∂F/∂X = b` and `(X, Y) = x − origin`.
    Landau { family: Family, origin: [f64; 2] },
    /// `A = (−α₁ − ∫₀^y b, 0)` for fields depending on `y` only.
    CylinderY { family: Family, alpha1: f64 },
}

/// A vector potential, optionally shifted by the gradient of a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeField {
    pub potential: Potential,
    pub tag: GaugeTag,
    pub shift: Option<Poly2>,
}

/// Landau gauge of `field`; cylinder fields get the y-only potential with `α₁ = 0`.
pub fn landau_gauge(field: &FieldSpec) -> Result<GaugeField> {
    let cylinder_x = matches!(field.lattice, Lattice::Cylinder { circle: Direction::X, .. });
    let gauge = if field.kind == FieldKind::LineWellCylinder && cylinder_x {
        cylinder_gauge(field, 0.0)?
    } else {
        let tag = if field.kind == FieldKind::PolynomialModel { GaugeTag::ModelPolynomial } else { GaugeTag::Landau };
        GaugeField {
            potential: Potential::Landau { family: field.family.clone(), origin: [0.0, 0.0] },
            tag,
            shift: None,
        }
    };
    let defect = gauge.curl_defect(|p| field.b(p), &curl_samples());
    if defect > 1e-8 {
        return Err(Error::InvalidArgument(format!("gauge curl differs from the field (relative defect {defect:e})")));
    }
    Ok(gauge)
}

/// `A1(y) = −α₁ − ∫₀^y b`, `A2 = 0`.
pub fn cylinder_gauge(field: &FieldSpec, alpha1: f64) -> Result<GaugeField> {
    if !field.family.is_y_only() {
        return Err(Error::InvalidArgument("cylinder gauge needs a field depending on y only".into()));
    }
    Ok(GaugeField {
        potential: Potential::CylinderY { family: field.family.clone(), alpha1 },
        tag: GaugeTag::Landau,
        shift: None,
    })
}

/// Landau gauge of the homogeneous model `b⁰(x − center)`.
pub fn model_gauge(model: &FieldSpec, center: [f64; 2]) -> GaugeField {
    GaugeField {
        potential: Potential::Landau { family: model.family.clone(), origin: center },
        tag: GaugeTag::ModelPolynomial,
        shift: None,
    }
}

fn curl_samples() -> Vec<[f64; 2]> {
    (0..9).flat_map(|i| (0..9).map(move |j| [-0.83 + 0.21 * i as f64, -0.79 + 0.2 * j as f64])).collect()
}

impl GaugeField {
    /// `A + dφ`.
    pub fn shifted(&self, phi: Poly2) -> GaugeField {
        let mut terms = self.shift.clone().unwrap_or_default().terms;
        terms.extend(phi.terms);
        GaugeField {
            potential: self.potential.clone(),
            tag: GaugeTag::ShiftedByGradient,
            shift: Some(Poly2::new(terms)),
        }
    }

    fn base(&self, p: [f64; 2]) -> [f64; 2] {
        match &self.potential {
            Potential::Landau { family, origin } => {
                let (x, y) = (p[0] - origin[0], p[1] - origin[1]);
                [0.0, family.x_antiderivative(x, y) - family.x_antiderivative(0.0, y)]
            }
            Potential::CylinderY { family, alpha1 } => {
                [-alpha1 - family.y_antiderivative(p[1]).expect("y-only family"), 0.0]
            }
        }
    }

    pub fn potential(&self, p: [f64; 2]) -> [f64; 2] {
        let mut a = self.base(p);
        if let Some(phi) = &self.shift {
            let g = phi.grad(p);
            a[0] += g[0];
            a[1] += g[1];
        }
        a
    }

    /// `J[i][j] = ∂A_i/∂x_j`, in closed form.
    pub fn jacobian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let mut jac = match &self.potential {
            Potential::Landau { family, origin } => {
                let (x, y) = (p[0] - origin[0], p[1] - origin[1]);
                [[0.0, 0.0], [family.b(x, y), family.x_antiderivative_dy(x, y) - family.x_antiderivative_dy(0.0, y)]]
            }
            Potential::CylinderY { family, .. } => [[0.0, -family.b(p[0], p[1])], [0.0, 0.0]],
        };
        if let Some(phi) = &self.shift {
            let hs = phi.hessian(p);
            for i in 0..2 {
                for j in 0..2 {
                    jac[i][j] += hs[i][j];
                }
            }
        }
        jac
    }

    /// `∫_p^q A·dl` along the segment: midpoint rule for the base potential,
    /// exact difference `φ(q) − φ(p)` for the gradient shift.
    pub fn link(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let a = self.base(mid);
        let mut s = a[0] * (q[0] - p[0]) + a[1] * (q[1] - p[1]);
        if let Some(phi) = &self.shift {
            s += phi.eval(q) - phi.eval(p);
        }
        s
    }

    /// Gauge function value `φ(p)` of the shift (zero when unshifted).
    pub fn shift_value(&self, p: [f64; 2]) -> f64 {
        self.shift.as_ref().map_or(0.0, |phi| phi.eval(p))
    }

    /// Largest relative deviation of `∂A2/∂x − ∂A1/∂y` from `b` over `samples`,
    /// by fourth-order central differences.
    pub fn curl_defect(&self, b: impl Fn([f64; 2]) -> f64, samples: &[[f64; 2]]) -> f64 {
        let d = 1e-3;
        let diff = |f: &dyn Fn(f64) -> f64| (8.0 * (f(d) - f(-d)) - (f(2.0 * d) - f(-2.0 * d))) / (12.0 * d);
        samples
            .iter()
            .map(|p| {
                let da2 = diff(&|t| self.potential([p[0] + t, p[1]])[1]);
                let da1 = diff(&|t| self.potential([p[0], p[1] + t])[0]);
                let target = b(*p);
                (da2 - da1 - target).abs() / target.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let s = f(c - r * GK_NODES[i]) + f(c + r * GK_NODES[i]);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * r, ((kronrod - gauss) * r).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut pending = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut error = 0.0;
    while let Some((lo, hi, depth)) = pending.pop() {
        let (v, e) = gauss_kronrod(f, lo, hi);
        let share = tol * (hi - lo).abs() / (b - a).abs().max(f64::MIN_POSITIVE);
        let converged = e <= share.max(f64::EPSILON * v.abs());
        if converged || depth >= 40 {
            if !converged {
                error += e;
            }
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            pending.push((lo, mid, depth + 1));
            pending.push((mid, hi, depth + 1));
        }
    }
    if !(error <= tol) {
        return Err(Error::QuadratureFailure { tolerance: tol, estimate: error });
    }
    Ok(total)
}

/// `A2(x, y) = ∫₀^x b(s, y) ds` by adaptive quadrature to `10⁻¹⁰`, for cross-checks
/// of the closed-form Landau potentials.
pub fn landau_a2_quadrature(field: &FieldSpec, p: [f64; 2]) -> Result<f64> {
    integrate(&|s| field.b([s, p[1]]), 0.0, p[0], 1e-10)
}

//! Spectral gaps: certification of eigenvalues near quasimodes, eigenvalue
//! counts below thresholds, gap scanning, gap-window prediction from the model
//! spectrum, and the supercell-versus-well localization distance.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::{eigenpairs_near, lowest_eigenpairs, SolverOptions, Spectrum};
use crate::error::{Error, Result};
use crate::operator::DiscreteOperator;
use crate::quasimode::{residual, Quasimode};
use crate::sparse::count_below;
use crate::stats::linear_fit;

/// `[mu − r, mu + r]` with `r` the residual on the operator it was checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedInterval {
    pub mu: f64,
    pub residual: f64,
    pub lo: f64,
    pub hi: f64,
    /// Eigenvalues in `[lo, hi)` by inertia, when both ends factor.
    pub inertia_count: Option<usize>,
    /// Nearest computed eigenvalue, when a solve was feasible.
    pub witness: Option<f64>,
}

impl CertifiedInterval {
    /// The bound is sharp for exact eigenvectors, whose eigenvalue then sits on
    /// an end point; the witness is compared with a rounding slack.
    pub fn verified(&self) -> bool {
        let slack = 1e-10 * self.mu.abs().max(self.residual);
        self.inertia_count.is_some_and(|c| c > 0)
            || self.witness.is_some_and(|w| w >= self.lo - slack && w <= self.hi + slack)
    }
}

/// Certifies an eigenvalue of `op` within the residual of `q`, and checks the
/// claim by a Sylvester count over the interval and a nearest-eigenvalue solve.
pub fn certify_eigenvalue(op: &DiscreteOperator, q: &Quasimode, opts: &SolverOptions) -> Result<CertifiedInterval> {
    if q.vector.len() != op.dim() {
        return Err(Error::GridMismatch { vector: q.vector.len(), nodes: op.dim() });
    }
    let r = residual(op, &q.vector, q.mu)?;
    let (lo, hi) = (q.mu - r, q.mu + r);
    let inertia_count = match (count_below(&op.matrix, lo), count_below(&op.matrix, hi)) {
        (Ok(a), Ok(b)) => Some(b.saturating_sub(a)),
        _ => None,
    };
    let witness = eigenpairs_near(op, q.mu, 1, &SolverOptions { keep_vectors: false, ..*opts })
        .ok()
        .and_then(|s| s.eigenvalues.first().copied());
    Ok(CertifiedInterval { mu: q.mu, residual: r, lo, hi, inertia_count, witness })
}

/// Number of eigenvalues of `op` below `threshold`, by inertia.
pub fn count_below_threshold(op: &DiscreteOperator, threshold: f64) -> Result<usize> {
    count_below(&op.matrix, threshold)
}

/// All eigenpairs below `upper` plus the first one above it, so that the
/// spectrum provably exhausts `[0, upper]`.
pub fn spectrum_covering(op: &DiscreteOperator, upper: f64, opts: &SolverOptions) -> Result<Spectrum> {
    let below = count_below(&op.matrix, upper)?;
    lowest_eigenpairs(op, below + 1, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub h: f64,
    pub threshold: f64,
    pub count: usize,
    /// `N_h·h²`
    pub normalized: f64,
}

/// Per-`h` count of eigenvalues in `[0, threshold(h)]`. Each spectrum must
/// contain an eigenvalue above its threshold, which proves the count complete.
pub fn weyl_count(spectra: &[Spectrum], threshold: impl Fn(f64) -> f64) -> Result<Vec<WeylRow>> {
    spectra
        .iter()
        .map(|s| {
            let t = threshold(s.h);
            let largest = s.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(largest > t) {
                return Err(Error::WindowNotExhausted { threshold: t, largest });
            }
            let count = s.eigenvalues.iter().filter(|&&e| e <= t).count();
            Ok(WeylRow { h: s.h, threshold: t, count, normalized: count as f64 * s.h * s.h })
        })
        .collect()
}

/// Counts by inertia, cross-checked against the spectrum when one is given.
pub fn weyl_count_by_inertia(op: &DiscreteOperator, threshold: f64, spectrum: Option<&Spectrum>) -> Result<WeylRow> {
    let count = count_below(&op.matrix, threshold)?;
    if let Some(s) = spectrum {
        let row = weyl_count(std::slice::from_ref(s), |_| threshold)?;
        if row[0].count != count {
            return Err(Error::WindowNotExhausted {
                threshold,
                largest: s.eigenvalues.last().copied().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(WeylRow { h: op.h, threshold, count, normalized: count as f64 * op.h * op.h })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    Scan,
    Quasimodes,
    Predicted,
}

/// An eigenvalue-free interval with its middle third.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    pub length: f64,
    pub core: (f64, f64),
    /// Touches the window edge rather than lying between two eigenvalues.
    pub edge: bool,
}

impl Gap {
    fn new(lo: f64, hi: f64, edge: bool) -> Self {
        let third = (hi - lo) / 3.0;
        Self { lo, hi, length: hi - lo, core: (lo + third, hi - third), edge }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub window: (f64, f64),
    pub gaps: Vec<Gap>,
    /// Interior gaps only.
    pub count: usize,
    pub h: f64,
    pub delta: f64,
    pub method: GapMethod,
    pub scaling_fit: Option<f64>,
}

impl GapReport {
    pub fn interior(&self) -> impl Iterator<Item = &Gap> {
        self.gaps.iter().filter(|g| !g.edge)
    }

    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// One gap per row.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "lo,hi,length,core_lo,core_hi,edge")?;
        for g in &self.gaps {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                g.lo, g.hi, g.length, g.core.0, g.core.1, g.edge
            )?;
        }
        Ok(())
    }
}

/// Three times the largest discretization error in the window, and at least
/// two and a half times the largest solver residual there.
pub fn default_delta(spectrum: &Spectrum, window: (f64, f64)) -> f64 {
    let mut err: f64 = 0.0;
    let mut res: f64 = 0.0;
    for (i, e) in spectrum.eigenvalues.iter().enumerate() {
        if *e >= window.0 && *e <= window.1 {
            err = err.max(spectrum.discretization_error.get(i).copied().unwrap_or(0.0));
            res = res.max(spectrum.solver_residuals.get(i).copied().unwrap_or(0.0));
        }
    }
    (3.0 * err).max(2.5 * res).max(f64::MIN_POSITIVE)
}

/// Maximal eigenvalue-free sub-intervals of `window` longer than `delta`.
/// The spectrum is taken as complete inside the window.
pub fn locate_gaps(spectrum: &Spectrum, window: (f64, f64), delta: f64) -> Result<GapReport> {
    let (w0, w1) = window;
    if !(w0 < w1) || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "window ({w0}, {w1}) and delta {delta} must be ordered and positive"
        )));
    }
    let mut inside: Vec<(f64, f64, f64)> = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, e)| **e >= w0 && **e <= w1)
        .map(|(i, e)| {
            let err = spectrum.discretization_error.get(i).copied().unwrap_or(0.0);
            let res = spectrum.solver_residuals.get(i).copied().unwrap_or(0.0);
            (*e, err, res)
        })
        .collect();
    inside.sort_by(|a, b| a.0.total_cmp(&b.0));
    let worst_err = inside.iter().map(|t| t.1).fold(0.0, f64::max);
    let worst_res = inside.iter().map(|t| t.2).fold(0.0, f64::max);
    if delta < worst_err || delta <= 2.0 * worst_res {
        return Err(Error::ResolutionTooFine { delta, error: worst_err.max(2.0 * worst_res) });
    }

    let mut gaps = Vec::new();
    match (inside.first(), inside.last()) {
        (None, _) | (_, None) => gaps.push(Gap::new(w0, w1, true)),
        (Some(first), Some(last)) => {
            if first.0 - w0 > delta {
                gaps.push(Gap::new(w0, first.0, true));
            }
            for pair in inside.windows(2) {
                if pair[1].0 - pair[0].0 > delta {
                    gaps.push(Gap::new(pair[0].0, pair[1].0, false));
                }
            }
            if w1 - last.0 > delta {
                gaps.push(Gap::new(last.0, w1, true));
            }
        }
    }
    let count = gaps.iter().filter(|g| !g.edge).count();
    Ok(GapReport { window, gaps, count, h: spectrum.h, delta, method: GapMethod::Scan, scaling_fit: None })
}

/// Windows `[(λ_m + s·g)h^e, (λ_{m+1} − s·g)h^e]` with `g = λ_{m+1} − λ_m` and
/// `e = (2k+2)/(k+2)`, one per consecutive pair; `s` is clamped to `[0, ½]`.
pub fn predict_gap_windows(lambdas: &[f64], k: u32, h: f64, safety: f64) -> Vec<(f64, f64)> {
    let s = safety.clamp(0.0, 0.5);
    let kf = k as f64;
    let scale = h.powf((2.0 * kf + 2.0) / (kf + 2.0));
    lambdas
        .windows(2)
        .map(|w| {
            let g = w[1] - w[0];
            ((w[0] + s * g) * scale, (w[1] - s * g) * scale)
        })
        .collect()
}

/// Largest `N` such that `N + 1` of the certified intervals are pairwise
/// separated by more than the sum of their residuals and sit inside `window`
/// by more than their own residual.
pub fn count_gaps_from_quasimodes(quasimodes: &[Quasimode], window: (f64, f64)) -> usize {
    // the conditions say the widened intervals [μ − 2r, μ + 2r] are disjoint and
    // inside the window, so earliest-right-end-first picks a largest family
    let mut spans: Vec<(f64, f64)> = quasimodes
        .iter()
        .filter(|q| q.residual.is_finite())
        .map(|q| (q.mu - 2.0 * q.residual, q.mu + 2.0 * q.residual))
        .filter(|(lo, hi)| *lo > window.0 && *hi < window.1)
        .collect();
    spans.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut chosen = 0usize;
    let mut end = f64::NEG_INFINITY;
    for (lo, hi) in spans {
        if lo > end {
            chosen += 1;
            end = hi;
        }
    }
    chosen.saturating_sub(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub h: f64,
    pub distance: f64,
    pub floor: f64,
    pub floor_limited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    /// `c` in `d ~ e^{−c/√h}`, or `p` in `d ~ h^p`.
    pub rate: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub rows: Vec<LocalizationRow>,
    pub exponential: Option<ModelFit>,
    pub power: Option<ModelFit>,
    pub superpolynomial_preferred: bool,
    /// Distance strictly decreasing as `h` decreases.
    pub monotone: bool,
    pub floor_limited: bool,
}

/// Two-sided Hausdorff distance between the parts of two spectra inside `window`.
pub fn hausdorff_in_window(a: &[f64], b: &[f64], window: (f64, f64)) -> f64 {
    let inw = |v: &[f64]| v.iter().copied().filter(|e| *e >= window.0 && *e <= window.1).collect::<Vec<_>>();
    let (a, b) = (inw(a), inw(b));
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |x: &[f64], y: &[f64]| {
        x.iter().map(|e| y.iter().map(|f| (e - f).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one_sided(&a, &b).max(one_sided(&b, &a))
}

/// Distance between supercell and single-well spectra per `h`, and the
/// comparison of `e^{−c/√h}` against `h^p` on the log scale. `floor(h)` is the
/// discretization resolution below which distances are not meaningful.
pub fn localization_check(
    full: &[Spectrum],
    well: &[Spectrum],
    window: impl Fn(f64) -> (f64, f64),
    floor: impl Fn(f64) -> f64,
) -> Result<LocalizationReport> {
    if full.len() != well.len() {
        return Err(Error::InvalidArgument("need one well spectrum per supercell spectrum".into()));
    }
    let mut rows = Vec::with_capacity(full.len());
    for (f, w) in full.iter().zip(well) {
        if (f.h - w.h).abs() > 1e-14 * f.h {
            return Err(Error::InvalidArgument(format!("spectra at different h ({} and {})", f.h, w.h)));
        }
        let distance = hausdorff_in_window(&f.eigenvalues, &w.eigenvalues, window(f.h));
        let fl = floor(f.h);
        rows.push(LocalizationRow { h: f.h, distance, floor: fl, floor_limited: distance <= fl });
    }
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    let monotone = rows.windows(2).all(|r| r[1].distance < r[0].distance);
    let usable: Vec<&LocalizationRow> = rows.iter().filter(|r| r.distance.is_finite() && r.distance > 0.0).collect();
    let (exponential, power) = if usable.len() >= 3 {
        let ys: Vec<f64> = usable.iter().map(|r| r.distance.ln()).collect();
        let inv: Vec<f64> = usable.iter().map(|r| r.h.sqrt().recip()).collect();
        let lh: Vec<f64> = usable.iter().map(|r| r.h.ln()).collect();
        let (se, _, re) = linear_fit(&inv, &ys);
        let (sp, _, rp) = linear_fit(&lh, &ys);
        (Some(ModelFit { rate: -se, r2: re }), Some(ModelFit { rate: sp, r2: rp }))
    } else {
        (None, None)
    };
    let superpolynomial_preferred = matches!((exponential, power), (Some(e), Some(p)) if e.r2 >= p.r2);
    let floor_limited = rows.last().is_some_and(|r| r.floor_limited);
    Ok(LocalizationReport { rows, exponential, power, superpolynomial_preferred, monotone, floor_limited })
}

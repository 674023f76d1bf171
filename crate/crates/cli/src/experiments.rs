//! One function per experiment: build the job list, run it on the pool and
//! turn the results into in-memory artifacts.

use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use serde_json::{json, Value};
use specgap_core::eigen::{lowest_eigenpairs, richardson_refine, BandFunctionTable, SolverOptions, Spectrum};
use specgap_core::field::{FieldSpec, Lattice, Rect};
use specgap_core::gaps::{
    certify_eigenvalue, count_below_threshold, default_delta, localization_check, locate_gaps, predict_gap_windows,
    spectrum_covering, CertifiedInterval, Gap, GapMethod, GapReport,
};
use specgap_core::gauge::landau_gauge;
use specgap_core::grid::Grid;
use specgap_core::model::{
    band_minimum, bands_with_interior_minimum, centred_box, cylinder_operator, dilation_check, line_grid,
    model_operator_2d, model_reference, montgomery_bands, truncation_half_width, BandOptions, DilationReport,
    MontgomeryParams, ReferenceOptions,
};
use specgap_core::operator::{assemble, magnetic_length, DiscreteOperator};
use specgap_core::quasimode::{
    cylinder_separated_quasimode, fit_residual_slope, gaussian_cutoff, level_set_point, model_rescaled_quasimode,
    node_aligned_box, point_gaussian_quasimode, Quasimode, Recipe,
};
use specgap_core::stats::linear_fit;
use specgap_core::{Error, Result};

use crate::config::{Experiment, ExperimentConfig, GridPolicy};
use crate::plot::{emit_plot_data, PlotReport};

/// Relative tolerance for the exact dilation identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobRecord {
    pub label: String,
    pub params: Value,
    pub status: JobStatus,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

/// Job records and `(file name, bytes)` artifacts of one experiment.
#[derive(Debug, Default)]
pub struct Outcome {
    pub jobs: Vec<JobRecord>,
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn failed(&self) -> bool {
        self.jobs.iter().any(|j| j.status == JobStatus::Failed)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("results serialize to JSON");
        bytes.push(b'\n');
        self.artifacts.push((name.to_string(), bytes));
    }

    fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header).expect("in-memory CSV");
        for r in rows {
            w.serialize(r).expect("in-memory CSV");
        }
        self.artifacts.push((name.to_string(), w.into_inner().expect("in-memory CSV")));
    }

    fn plot(&mut self, report: &PlotReport) {
        self.artifacts.push(emit_plot_data(report));
    }

    /// Runs `inputs` on the pool in order; failures become records, not aborts.
    fn run<I: Sync, O: Send>(
        &mut self,
        pool: &ThreadPool,
        label: &str,
        inputs: &[I],
        params: impl Fn(&I) -> Value,
        job: impl Fn(&I) -> Result<O> + Sync,
    ) -> Vec<Option<O>> {
        let results: Vec<(Result<O>, f64)> = pool.install(|| {
            inputs
                .par_iter()
                .map(|i| {
                    let t = Instant::now();
                    let r = job(i);
                    (r, t.elapsed().as_secs_f64())
                })
                .collect()
        });
        results
            .into_iter()
            .zip(inputs)
            .map(|((r, secs), input)| {
                let (status, error, value) = match r {
                    Ok(v) => (JobStatus::Ok, None, Some(v)),
                    Err(e) => (JobStatus::Failed, Some(e.to_string()), None),
                };
                self.jobs.push(JobRecord {
                    label: label.to_string(),
                    params: params(input),
                    status,
                    error,
                    wall_time_s: secs,
                });
                value
            })
            .collect()
    }
}

pub fn execute(cfg: &ExperimentConfig, pool: &ThreadPool) -> Outcome {
    let mut out = Outcome::default();
    let field = cfg.field.build().expect("validated field");
    match cfg.experiment.expect("normalized config") {
        Experiment::Bands => bands(cfg, pool, &mut out),
        Experiment::Model2d => model2d(cfg, &field, pool, &mut out),
        Experiment::Supercell => supercell(cfg, &field, pool, &mut out),
        Experiment::Quasimode => quasimode(cfg, &field, pool, &mut out),
        Experiment::Gaps => gaps(cfg, &field, pool, &mut out),
        Experiment::Localization => localization(cfg, &field, pool, &mut out),
        Experiment::VerifyIdentities => identities(cfg, pool, &mut out),
    }
    out
}

fn reduced_exponent(k: u32) -> f64 {
    let k = k as f64;
    (2.0 * k + 2.0) / (k + 2.0)
}

fn solve(
    cfg: &ExperimentConfig,
    assemble_on: impl Fn(&Grid) -> Result<DiscreteOperator>,
    grid: &Grid,
    m: usize,
) -> Result<Spectrum> {
    let opts = cfg.solver.options();
    if cfg.solver.richardson {
        richardson_refine(assemble_on, grid, m, &opts)
    } else {
        lowest_eigenpairs(&assemble_on(grid)?, m, &opts)
    }
}

/// The Dirichlet supercell at `h` under the configured grid policy.
pub fn supercell_grid(cfg: &ExperimentConfig, h: f64, k: u32) -> Grid {
    let [x0, x1, y0, y1] = cfg.grid.domain;
    let (nx, ny) = match cfg.grid.policy {
        GridPolicy::Fixed => (cfg.grid.intervals, cfg.grid.intervals),
        GridPolicy::MagneticLength => {
            let spacing = magnetic_length(h, k) / cfg.grid.cells_per_length;
            (((x1 - x0) / spacing).ceil() as usize, ((y1 - y0) / spacing).ceil() as usize)
        }
    };
    Grid::dirichlet_2d(x0, x1, nx.max(2), y0, y1, ny.max(2))
}

#[derive(Serialize)]
struct SpectrumRow {
    h: f64,
    j: usize,
    lambda: f64,
    reduced: f64,
    error: f64,
    residual: f64,
}

fn spectrum_rows(spectra: &[Spectrum], k: u32) -> Vec<SpectrumRow> {
    let e = reduced_exponent(k);
    spectra
        .iter()
        .flat_map(|s| {
            (0..s.len()).map(move |i| SpectrumRow {
                h: s.h,
                j: i + 1,
                lambda: s.eigenvalues[i],
                reduced: s.eigenvalues[i] / s.h.powf(e),
                error: s.discretization_error[i],
                residual: s.solver_residuals[i],
            })
        })
        .collect()
}

fn write_spectra(out: &mut Outcome, spectra: &[Spectrum], k: u32) {
    let rows = spectrum_rows(spectra, k);
    out.csv("spectrum.csv", &["h", "j", "lambda", "reduced", "error", "residual"], &rows);
}

fn bands(cfg: &ExperimentConfig, pool: &ThreadPool, out: &mut Outcome) {
    let b = &cfg.bands;
    let opts = BandOptions { spacing: b.spacing, solver: SolverOptions { keep_vectors: true, ..cfg.solver.options() } };
    let tables = out.run(
        pool,
        "band table",
        &[()],
        |_| json!({ "k": b.k, "b_min": b.b_min, "b_max": b.b_max, "b_step": b.b_step, "j_max": b.j_max }),
        |_| {
            if b.widen {
                bands_with_interior_minimum(b.k, b.b_min, b.b_max, b.b_step, b.j_max, &opts)
            } else {
                let n = ((b.b_max - b.b_min) / b.b_step).round() as usize;
                let grid: Vec<f64> = (0..=n).map(|i| b.b_min + b.b_step * i as f64).collect();
                montgomery_bands(b.k, &grid, b.j_max, &opts)
            }
        },
    );
    let Some(table): Option<BandFunctionTable> = tables.into_iter().next().flatten() else { return };
    let (i, mu) = band_minimum(&table);
    out.plot(&PlotReport::Bands(&table));
    out.json(
        "results.json",
        &json!({
            "k": table.k,
            "samples": table.b_samples.len(),
            "bands": table.mu.len(),
            "minimum": { "b": table.b_samples[i], "mu": mu, "interior": i > 0 && i + 1 < table.b_samples.len() },
            "crossings_flagged": table.crossings_flagged,
        }),
    );
}

fn model2d(cfg: &ExperimentConfig, field: &FieldSpec, pool: &ThreadPool, out: &mut Outcome) {
    let k = field.k;
    let spectra = out.run(
        pool,
        "model spectrum",
        &cfg.sweep.h,
        |h| json!({ "h": h }),
        |&h| {
            let ell = magnetic_length(h, k);
            let grid = centred_box(cfg.model2d.half_width * ell, ell / cfg.grid.cells_per_length);
            solve(cfg, |g| model_operator_2d(field, h, g), &grid, cfg.solver.m)
        },
    );
    let spectra: Vec<Spectrum> = spectra.into_iter().flatten().collect();
    write_spectra(out, &spectra, k);
    // λ_j(h) = h^{(2k+2)/(k+2)} λ_j(K¹): per-level log-log slopes
    let fits: Vec<Value> = if spectra.len() >= 2 {
        let m = spectra.iter().map(Spectrum::len).min().unwrap_or(0);
        (0..m)
            .map(|j| {
                let xs: Vec<f64> = spectra.iter().map(|s| s.h.ln()).collect();
                let ys: Vec<f64> = spectra.iter().map(|s| s.eigenvalues[j].ln()).collect();
                let (slope, intercept, r2) = linear_fit(&xs, &ys);
                json!({ "j": j + 1, "slope": slope, "prefactor": intercept.exp(), "r2": r2 })
            })
            .collect()
    } else {
        Vec::new()
    };
    out.json(
        "results.json",
        &json!({ "k": k, "expected_exponent": reduced_exponent(k), "fits": fits, "spectra": spectra }),
    );
}

fn supercell(cfg: &ExperimentConfig, field: &FieldSpec, pool: &ThreadPool, out: &mut Outcome) {
    let gauge = match landau_gauge(field) {
        Ok(g) => g,
        Err(e) => return fail(out, "gauge", e),
    };
    let k = field.k;
    let spectra = out.run(
        pool,
        "supercell spectrum",
        &cfg.sweep.h,
        |&h| {
            let g = supercell_grid(cfg, h, k);
            json!({ "h": h, "nx": g.nx(), "ny": g.ny() })
        },
        |&h| solve(cfg, |g| assemble(field, &gauge, g, h), &supercell_grid(cfg, h, k), cfg.solver.m),
    );
    let spectra: Vec<Spectrum> = spectra.into_iter().flatten().collect();
    write_spectra(out, &spectra, k);
    out.json("results.json", &json!({ "k": k, "reduced_exponent": reduced_exponent(k), "spectra": spectra }));
}

fn fail(out: &mut Outcome, label: &str, e: Error) {
    out.jobs.push(JobRecord {
        label: label.to_string(),
        params: Value::Null,
        status: JobStatus::Failed,
        error: Some(e.to_string()),
        wall_time_s: 0.0,
    });
}

#[derive(Serialize)]
struct QuasimodeRow {
    quasimode: Quasimode,
    relative_residual: f64,
    certified: Option<CertifiedInterval>,
    verified: Option<bool>,
}

fn quasimode(cfg: &ExperimentConfig, field: &FieldSpec, pool: &ThreadPool, out: &mut Outcome) {
    let q = &cfg.quasimode;
    let opts = cfg.solver.options();
    let build = |h: f64| -> Result<(Quasimode, DiscreteOperator)> {
        match q.recipe {
            Recipe::PointGaussian => {
                let gauge = landau_gauge(field)?;
                let xj = level_set_point(field, q.center, Rect::square(q.center, q.search_half_width), q.level)?;
                let spacing = h.sqrt() / q.points_per_width;
                let grid = node_aligned_box(xj, gaussian_cutoff(h, q.level).r2 + 6.0 * spacing, spacing);
                let qm = point_gaussian_quasimode(field, &gauge, &grid, h, q.level, xj, None)?;
                Ok((qm, assemble(field, &gauge, &grid, h)?))
            }
            Recipe::ModelRescaled => {
                let gauge = landau_gauge(field)?;
                let ell = magnetic_length(h, field.k);
                let grid = node_aligned_box(q.center, q.box_half_width * ell, ell / cfg.grid.cells_per_length);
                let qm = model_rescaled_quasimode(field, &gauge, &grid, h, q.j, q.center, &opts)?;
                Ok((qm, assemble(field, &gauge, &grid, h)?))
            }
            Recipe::CylinderSeparated => {
                let Lattice::Cylinder { period, .. } = field.lattice else {
                    return Err(Error::InvalidArgument("cylinder modes need a cylinder field".into()));
                };
                let ell = magnetic_length(h, field.k);
                let c = cfg.grid.cells_per_length;
                let [y0, y1] = q.y_range;
                let grid = Grid::cylinder(
                    period,
                    (period * c / ell).ceil() as usize,
                    y0,
                    y1,
                    ((y1 - y0) * c / ell).ceil() as usize,
                );
                let params =
                    MontgomeryParams { k: field.k, h, beta: q.beta, alpha1: q.alpha1, period, beta1: field.beta1 };
                let qm = cylinder_separated_quasimode(&params, field, &grid, h, q.j, &opts)?;
                Ok((qm, cylinder_operator(field, q.alpha1, h, &grid)?))
            }
        }
    };
    let rows = out.run(
        pool,
        "quasimode",
        &cfg.sweep.h,
        |h| json!({ "h": h, "recipe": q.recipe, "j": q.j }),
        |&h| {
            let (qm, op) = build(h)?;
            let certified = if q.certify { Some(certify_eigenvalue(&op, &qm, &opts)?) } else { None };
            Ok(QuasimodeRow {
                relative_residual: qm.residual / qm.mu,
                verified: certified.map(|c| c.verified()),
                certified,
                quasimode: qm,
            })
        },
    );
    let rows: Vec<QuasimodeRow> = rows.into_iter().flatten().collect();
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.quasimode.h, r.quasimode.residual)).collect();
    out.plot(&PlotReport::Residuals(&pairs));
    out.csv(
        "quasimodes.csv",
        &["h", "mu", "residual", "lo", "hi", "inertia_count", "witness", "verified"],
        rows.iter().map(|r| {
            let (lo, hi) = r.quasimode.certified_interval();
            (
                r.quasimode.h,
                r.quasimode.mu,
                r.quasimode.residual,
                lo,
                hi,
                r.certified.and_then(|c| c.inertia_count),
                r.certified.and_then(|c| c.witness),
                r.verified,
            )
        }),
    );
    let (fit, fit_error) = match fit_residual_slope(&pairs) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    out.json(
        "results.json",
        &json!({ "recipe": q.recipe, "slope_fit": fit, "slope_fit_error": fit_error, "quasimodes": rows }),
    );
}

#[derive(Serialize)]
struct Prediction {
    h: f64,
    windows: Vec<(f64, f64)>,
    eigenvalues_inside: Vec<usize>,
}

fn gaps(cfg: &ExperimentConfig, field: &FieldSpec, pool: &ThreadPool, out: &mut Outcome) {
    let gp = &cfg.gaps;
    let opts = cfg.solver.options();
    let k = field.k;
    let ropts =
        ReferenceOptions { half_width: gp.reference_half_width, spacing: gp.reference_spacing, count: gp.levels + 1 };
    let reference = out.run(
        pool,
        "model reference",
        &[gp.well],
        |w| json!({ "well": w, "half_width": ropts.half_width, "spacing": ropts.spacing, "count": ropts.count }),
        |&w| model_reference(&field.taylor_model(w)?, &ropts, None, &opts),
    );
    let Some(reference) = reference.into_iter().next().flatten() else { return };
    let lambdas = reference.eigenvalues[..=gp.levels].to_vec();
    let gauge = match landau_gauge(field) {
        Ok(g) => g,
        Err(e) => return fail(out, "gauge", e),
    };
    let e = reduced_exponent(k);
    let l = gp.levels;
    let results = out.run(
        pool,
        "gap scan",
        &cfg.sweep.h,
        |&h| {
            let g = supercell_grid(cfg, h, k);
            json!({ "h": h, "nx": g.nx(), "ny": g.ny() })
        },
        |&h| {
            let scale = h.powf(e);
            let window = (0.0, 0.5 * (lambdas[l - 1] + lambdas[l]) * scale);
            let predicted = predict_gap_windows(&lambdas, k, h, gp.safety);
            let upper = predicted.iter().map(|w| w.1).fold(window.1, f64::max);
            let grid = supercell_grid(cfg, h, k);
            let op = assemble(field, &gauge, &grid, h)?;
            let m = count_below_threshold(&op, upper)? + 1;
            let spec = solve(cfg, |g| assemble(field, &gauge, g, h), &grid, m)?;
            let scan = locate_gaps(&spec, window, default_delta(&spec, window))?;
            let inside = predicted
                .iter()
                .map(|(a, b)| spec.eigenvalues.iter().filter(|v| **v >= *a && **v <= *b).count())
                .collect();
            Ok((scan, Prediction { h, windows: predicted, eigenvalues_inside: inside }))
        },
    );
    let (scans, predictions): (Vec<GapReport>, Vec<Prediction>) = results.into_iter().flatten().unzip();
    let mut diagram = scans.clone();
    diagram.extend(predictions.iter().map(|p| {
        GapReport {
            window: (p.windows.first().map_or(0.0, |w| w.0), p.windows.last().map_or(0.0, |w| w.1)),
            gaps: p
                .windows
                .iter()
                .map(|&(lo, hi)| {
                    let third = (hi - lo) / 3.0;
                    Gap { lo, hi, length: hi - lo, core: (lo + third, hi - third), edge: false }
                })
                .collect(),
            count: p.windows.len(),
            h: p.h,
            delta: 0.0,
            method: GapMethod::Predicted,
            scaling_fit: None,
        }
    }));
    out.plot(&PlotReport::Gaps(&diagram));
    out.json(
        "results.json",
        &json!({ "reference": reference, "levels": l, "scans": scans, "predictions": predictions }),
    );
}

fn localization(cfg: &ExperimentConfig, field: &FieldSpec, pool: &ThreadPool, out: &mut Outcome) {
    let lc = &cfg.localization;
    let opts = cfg.solver.options();
    let gauge = match landau_gauge(field) {
        Ok(g) => g,
        Err(e) => return fail(out, "gauge", e),
    };
    let [x0, x1, y0, y1] = lc.cell;
    let cell = Grid::dirichlet_2d(x0, x1, lc.cell_intervals, y0, y1, lc.cell_intervals);
    let k = field.k;
    let results = out.run(
        pool,
        "localization",
        &cfg.sweep.h,
        |&h| json!({ "h": h }),
        |&h| {
            let well = lowest_eigenpairs(&assemble(field, &gauge, &cell, h)?, 3, &opts)?;
            // window edge halfway between the first two well levels
            let cut = 0.5 * (well.eigenvalues[0] + well.eigenvalues[1]);
            let op = assemble(field, &gauge, &supercell_grid(cfg, h, k), h)?;
            let full = spectrum_covering(&op, cut, &opts)?;
            Ok((full, well, cut, op.matrix.norm_bound()))
        },
    );
    let results: Vec<_> = results.into_iter().flatten().collect();
    if results.is_empty() {
        return;
    }
    let lookup = |h: f64| results.iter().find(|r| r.0.h == h).expect("one result per h");
    let full: Vec<Spectrum> = results.iter().map(|r| r.0.clone()).collect();
    let well: Vec<Spectrum> = results.iter().map(|r| r.1.clone()).collect();
    match localization_check(&full, &well, |h| (0.0, lookup(h).2), |h| lc.floor_factor * opts.tol * lookup(h).3) {
        Ok(report) => {
            out.plot(&PlotReport::Localization(&report));
            out.json("results.json", &report);
        }
        Err(e) => fail(out, "localization check", e),
    }
}

#[derive(Serialize)]
struct IdentityRow {
    k: u32,
    h: f64,
    beta: f64,
    alpha: f64,
    deviation: f64,
    scale: f64,
    relative: f64,
    within_tolerance: bool,
}

fn identities(cfg: &ExperimentConfig, pool: &ThreadPool, out: &mut Outcome) {
    let rows = out.run(
        pool,
        "dilation identity",
        &cfg.identities.case,
        |c| json!({ "k": c.k, "h": c.h, "beta": c.beta, "alpha": c.alpha }),
        |c| {
            let spacing = magnetic_length(c.h, c.k) / cfg.grid.cells_per_length;
            let grid = line_grid(truncation_half_width(c.k, c.h, c.beta), spacing);
            let DilationReport { deviation, scale } = dilation_check(c.k, c.h, c.beta, c.alpha, &grid)?;
            Ok(IdentityRow {
                k: c.k,
                h: c.h,
                beta: c.beta,
                alpha: c.alpha,
                deviation,
                scale,
                relative: deviation / scale,
                within_tolerance: deviation <= IDENTITY_TOLERANCE * scale,
            })
        },
    );
    let rows: Vec<IdentityRow> = rows.into_iter().flatten().collect();
    let all = rows.iter().all(|r| r.within_tolerance);
    if !all {
        out.warnings.push(format!("dilation identity exceeds {IDENTITY_TOLERANCE:e}·scale in some cases"));
    }
    out.csv(
        "identities.csv",
        &["k", "h", "beta", "alpha", "deviation", "scale", "relative", "within_tolerance"],
        &rows,
    );
    out.json("results.json", &json!({ "tolerance": IDENTITY_TOLERANCE, "all_within_tolerance": all, "cases": rows }));
}

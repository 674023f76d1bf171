use specgap_core::eigen::{lowest_eigenpairs, richardson_refine, SolverOptions};
use specgap_core::field::FieldSpec;
use specgap_core::gauge::landau_gauge;
use specgap_core::grid::{Axis, Grid};
use specgap_core::model::{assemble_montgomery_1d, line_grid, truncation_half_width};
use specgap_core::operator::assemble;

fn opts() -> SolverOptions {
    SolverOptions { keep_vectors: false, ..SolverOptions::default() }
}

#[test]
fn lowest_landau_level() {
    let f = FieldSpec::constant(1.0);
    let g = landau_gauge(&f).unwrap();
    let h = 0.05;
    let lowest = |half: f64| {
        let n = (2.0 * half * 64.0).round() as usize;
        let op = assemble(&f, &g, &Grid::dirichlet_2d(-half, half, n, -half, half, n), h).unwrap();
        lowest_eigenpairs(&op, 1, &opts()).unwrap().eigenvalues[0]
    };
    let small = lowest(1.0);
    let large = lowest(1.5);
    assert!((large - 0.05).abs() < 1e-4, "{large}");
    // Dirichlet eigenvalues fall as the box grows, here by less than the tolerance
    assert!(small >= large && small - large < 1e-4, "{small} vs {large}");
}

#[test]
fn montgomery_spectrum_is_reflection_symmetric() {
    // an off-centre line and its mirror image
    let spacing = 1.0 / 64.0;
    let line = Axis { start: -9.6, spacing, count: 1281 };
    let mirror = Axis { start: -(line.start + (line.count - 1) as f64 * spacing), ..line };
    let spectrum = |axis: Axis| {
        lowest_eigenpairs(&assemble_montgomery_1d(1.0, 0.7, 1, &Grid::line(axis)).unwrap(), 4, &opts())
            .unwrap()
            .eigenvalues
    };
    for (x, y) in spectrum(line).iter().zip(&spectrum(mirror)) {
        assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
    }
}

#[test]
fn richardson_is_self_consistent() {
    // k = 1, β = 0: the quartic oscillator −d² + y⁴/4
    let half = truncation_half_width(1, 1.0, 0.0);
    let assemble_on = |g: &Grid| assemble_montgomery_1d(1.0, 0.0, 1, g);
    let coarse = richardson_refine(assemble_on, &line_grid(half, 2f64.powi(-8)), 1, &opts()).unwrap();
    let fine = richardson_refine(assemble_on, &line_grid(half, 2f64.powi(-9)), 1, &opts()).unwrap();
    assert!((coarse.eigenvalues[0] - fine.eigenvalues[0]).abs() < 1e-5);
    assert!((fine.eigenvalues[0] - 0.66799).abs() < 1e-5, "{}", fine.eigenvalues[0]);
    let (e0, e1) = (coarse.discretization_error[0], fine.discretization_error[0]);
    assert!(e0 >= 0.0 && e1 >= 0.0 && e1 < e0, "{e0} {e1}");
}

#[test]
fn residual_certificates_meet_tolerance() {
    let f = FieldSpec::sin_squared(1.0);
    let g = landau_gauge(&f).unwrap();
    let op = assemble(&f, &g, &Grid::dirichlet_2d(-0.5, 0.5, 40, -0.5, 0.5, 40), 0.02).unwrap();
    let s = lowest_eigenpairs(&op, 6, &opts()).unwrap();
    let norm = op.matrix.norm_bound();
    assert!(s.solver_residuals.iter().all(|r| *r <= 1e-9 * norm), "{:?}", s.solver_residuals);
}

use specgap::plot::{emit_plot_data, PlotReport};
use specgap_core::eigen::BandFunctionTable;
use specgap_core::gaps::{GapMethod, GapReport};

fn rows(bytes: &[u8]) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes)
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn residual_sweep_has_log_columns() {
    let pairs: Vec<(f64, f64)> = (0..7).map(|i| (0.04 * 0.5f64.powi(i), 1e-3 * 0.3f64.powi(i))).collect();
    let (name, bytes) = emit_plot_data(&PlotReport::Residuals(&pairs));
    assert_eq!(name, "residuals.csv");
    let t = rows(&bytes);
    assert_eq!(t[0], ["h", "residual", "log_h", "log_residual"]);
    assert_eq!(t.len(), 8);
    for (row, (h, r)) in t[1..].iter().zip(&pairs) {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!((v[0], v[1]), (*h, *r));
        assert!((v[2] - h.ln()).abs() < 1e-15 && (v[3] - r.ln()).abs() < 1e-15);
    }
}

#[test]
fn empty_gap_report_is_header_only() {
    let report = GapReport {
        window: (0.0, 1.0),
        gaps: vec![],
        count: 0,
        h: 0.01,
        delta: 1e-3,
        method: GapMethod::Scan,
        scaling_fit: None,
    };
    let (_, bytes) = emit_plot_data(&PlotReport::Gaps(&[report]));
    let t = rows(&bytes);
    assert_eq!(t.len(), 1);
    assert_eq!(t[0][0], "h");
    let (_, bytes) = emit_plot_data(&PlotReport::Gaps(&[]));
    assert_eq!(rows(&bytes).len(), 1);
}

#[test]
fn band_table_shape() {
    let b_samples: Vec<f64> = (0..101).map(|i| -1.0 + 0.05 * i as f64).collect();
    let mu = (1..=5).map(|j| b_samples.iter().map(|b| j as f64 + b * b).collect()).collect();
    let table = BandFunctionTable { b_samples, mu, k: 1, crossings_flagged: vec![] };
    let (name, bytes) = emit_plot_data(&PlotReport::Bands(&table));
    assert_eq!(name, "bands.csv");
    let t = rows(&bytes);
    assert_eq!(t.len(), 102);
    assert_eq!(t[0], ["b", "mu1", "mu2", "mu3", "mu4", "mu5"]);
    assert!(t.iter().all(|r| r.len() == 6));
}

//! Tidy CSV tables, one per figure kind.

use serde::Serialize;
use specgap_core::eigen::BandFunctionTable;
use specgap_core::gaps::{GapReport, LocalizationReport};

/// A completed report that has a figure.
pub enum PlotReport<'a> {
    /// `(h, residual)` pairs of a quasimode sweep.
    Residuals(&'a [(f64, f64)]),
    Bands(&'a BandFunctionTable),
    Gaps(&'a [GapReport]),
    Localization(&'a LocalizationReport),
}

fn table<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for r in rows {
        w.serialize(r).expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

/// `(file name, CSV bytes)` for the figure of `report`.
pub fn emit_plot_data(report: &PlotReport) -> (String, Vec<u8>) {
    match report {
        PlotReport::Residuals(pairs) => {
            let rows = pairs.iter().map(|&(h, r)| (h, r, h.ln(), r.ln()));
            ("residuals.csv".into(), table(&["h", "residual", "log_h", "log_residual"], rows))
        }
        PlotReport::Bands(t) => {
            let mut header = vec!["b".to_string()];
            header.extend((1..=t.mu.len()).map(|j| format!("mu{j}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = t.b_samples.iter().enumerate().map(|(i, b)| {
                let mut row = vec![*b];
                row.extend(t.mu.iter().map(|branch| branch[i]));
                row
            });
            ("bands.csv".into(), table(&header, rows))
        }
        PlotReport::Gaps(reports) => {
            let rows = reports.iter().flat_map(|r| {
                r.gaps.iter().map(move |g| (r.h, g.lo, g.hi, g.length, g.core.0, g.core.1, g.edge, r.method))
            });
            ("gaps.csv".into(), table(&["h", "lo", "hi", "length", "core_lo", "core_hi", "edge", "method"], rows))
        }
        PlotReport::Localization(rep) => {
            let rows = rep.rows.iter().map(|r| (r.h, r.distance, r.floor, r.h.ln(), r.distance.ln(), r.floor_limited));
            (
                "localization.csv".into(),
                table(&["h", "distance", "floor", "log_h", "log_distance", "floor_limited"], rows),
            )
        }
    }
}

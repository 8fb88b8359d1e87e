//! Tearing-force summary table.

use serde::{Deserialize, Serialize};

use fbgforce::analysis::{SessionReport, StationarityReport, StationarityVerdict};

pub const HEADER: [&str; 7] = [
    "Force",
    "Mean ± SD (mN)",
    "CoV",
    "Angle (°)",
    "L-B p",
    "KPSS p",
    "ADF",
];

/// One rendered row. Cells are kept as text so typed-in tables render
/// exactly as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub force: String,
    pub mean_sd_mn: String,
    pub cov: String,
    pub angle_deg: String,
    pub lb_p: String,
    pub kpss_p: String,
    pub adf: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub rows: Vec<TableRow>,
}

const MISSING: &str = "-";

fn adf_cell(r: &StationarityReport) -> String {
    let Some(adf) = &r.adf else {
        return MISSING.to_string();
    };
    match (adf.verdict, adf.p1()) {
        (StationarityVerdict::Stationary, _) | (_, None) => format!("P_0={:.3}", adf.p0()),
        (_, Some(p1)) => format!("P_1={p1:.3}"),
    }
}

fn kpss_cell(r: &StationarityReport) -> String {
    match &r.kpss {
        None => MISSING.to_string(),
        // the tabulated p-values only bracket the statistic
        Some(k) if k.out_of_table && k.p_value >= 0.1 => format!(">{:.3}", k.p_value),
        Some(k) if k.out_of_table => format!("<{:.3}", k.p_value),
        Some(k) => format!("{:.3}", k.p_value),
    }
}

pub fn row_from_report(r: &StationarityReport) -> TableRow {
    TableRow {
        force: r.column.label().to_string(),
        mean_sd_mn: format!("{:.2} ± {:.2}", r.mean_mn, r.sd_mn),
        cov: r.cov.map_or_else(|| MISSING.to_string(), |c| format!("{c:.3}")),
        angle_deg: r
            .angle
            .as_ref()
            .map_or_else(|| MISSING.to_string(), |a| format!("{:.2} ± {:.2}", a.mean_deg, a.sd_deg)),
        lb_p: r.lb_pvalue().map_or_else(|| MISSING.to_string(), |p| format!("{p:.4}")),
        kpss_p: kpss_cell(r),
        adf: adf_cell(r),
    }
}

pub fn rows_from_session(s: &SessionReport) -> Vec<TableRow> {
    s.columns.iter().map(row_from_report).collect()
}

fn cells(r: &TableRow) -> [&str; 7] {
    [
        &r.force,
        &r.mean_sd_mn,
        &r.cov,
        &r.angle_deg,
        &r.lb_p,
        &r.kpss_p,
        &r.adf,
    ]
}

/// Plain-text table with left-aligned, space-padded columns.
pub fn render(rows: &[TableRow]) -> String {
    let mut widths = HEADER.map(|h| h.chars().count());
    for r in rows {
        for (w, c) in widths.iter_mut().zip(cells(r)) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cols: [&str; 7]| {
        let mut s = String::new();
        for (k, (c, w)) in cols.iter().zip(widths).enumerate() {
            s.push_str(c);
            if k + 1 < cols.len() {
                s.extend(std::iter::repeat_n(' ', w - c.chars().count() + 2));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(HEADER);
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.extend(std::iter::repeat_n('-', rule));
    out.push('\n');
    for r in rows {
        out.push_str(&line(cells(r)));
    }
    out
}

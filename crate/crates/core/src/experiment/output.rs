//! CSV tables and simple SVG line charts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::RunError;

/// An integer index column (normally `k`) followed by float columns.
/// `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub index: String,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<Option<f64>>)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self::with_index("k", columns)
    }

    pub fn with_index(index: &str, columns: &[&str]) -> Self {
        Self { index: index.to_string(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, k: usize, values: Vec<Option<f64>>) {
        assert_eq!(values.len(), self.columns.len(), "row width");
        self.rows.push((k, values));
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|(_, r)| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.index.clone();
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (k, row) in &self.rows {
            write!(out, "{k}").unwrap();
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&format_float(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), RunError> {
        fs::write(path, self.to_csv()).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    }

    /// Line chart of every column against `k`; log-scaled when all values are positive.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const PAD: f64 = 50.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

        let vals: Vec<f64> = self.rows.iter().flat_map(|(_, r)| r.iter().flatten().copied()).filter(|v| v.is_finite()).collect();
        let log = !vals.is_empty() && vals.iter().all(|&v| v > 0.0);
        let tr = |v: f64| if log { v.log10() } else { v };
        let (mut lo, mut hi) = vals.iter().map(|&v| tr(v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        let kmin = self.rows.first().map_or(0, |r| r.0) as f64;
        let kmax = (self.rows.last().map_or(1, |r| r.0) as f64).max(kmin + 1.0);
        let sx = |k: f64| PAD + (k - kmin) / (kmax - kmin) * (W - 2.0 * PAD);
        let sy = |v: f64| H - PAD - (tr(v) - lo) / (hi - lo) * (H - 2.0 * PAD);

        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
        writeln!(
            s,
            r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
            H - PAD,
            W - PAD
        )
        .unwrap();
        let fmt_axis = |v: f64| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, H - PAD, fmt_axis(lo)).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, PAD + 4.0, fmt_axis(hi)).unwrap();
        writeln!(s, r#"<text x="{PAD}" y="{}">{kmin}</text>"#, H - PAD + 16.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">k = {kmax}</text>"#, W - PAD, H - PAD + 16.0).unwrap();
        for (j, name) in self.columns.iter().enumerate() {
            let color = COLORS[j % COLORS.len()];
            let mut d = String::new();
            let mut pen_up = true;
            for (k, row) in &self.rows {
                match row[j] {
                    Some(v) if v.is_finite() && (!log || v > 0.0) => {
                        write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, sx(*k as f64), sy(v)).unwrap();
                        pen_up = false;
                    }
                    _ => pen_up = true,
                }
            }
            writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end()).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - PAD - 140.0, PAD + 14.0 * (j as f64 + 1.0), escape(name)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write_svg(&self, path: &Path, title: &str) -> Result<(), RunError> {
        fs::write(path, self.to_svg(title)).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads back a CSV written by [`Table::to_csv`].
pub fn parse_csv(text: &str) -> Result<Table, RunError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| RunError::Io("empty CSV".into()))?;
    let mut cols = header.split(',');
    let index = cols.next().unwrap_or_default().to_string();
    let mut table = Table { index, columns: cols.map(str::to_string).collect(), rows: Vec::new() };
    for line in lines {
        let mut cells = line.split(',');
        let k = cells
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| RunError::Io(format!("bad row `{line}`")))?;
        let row = cells
            .map(|c| if c.is_empty() { Ok(None) } else { c.parse().map(Some) })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| RunError::Io(format!("bad row `{line}`")))?;
        if row.len() != table.columns.len() {
            return Err(RunError::Io(format!("row `{line}` has the wrong width")));
        }
        table.rows.push((k, row));
    }
    Ok(table)
}

// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! File artifacts: records and summary CSVs, SVG charts and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::WorldConfig;
use crate::experiment::{Metric, MetricsRecord, Mode, SummaryRow};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("records CSV: {0}")]
    Malformed(String),
}

/// Header of the records CSV.
pub const RECORDS_HEADER: &str =
    "n,gradient,seed,mode,apl,cc,components,frac_peripheral,frac_centroid,unidirectional_links";

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    n: usize,
    gradient: u32,
    seed: u64,
    mode: String,
    apl: f64,
    cc: f64,
    components: usize,
    frac_peripheral: f64,
    frac_centroid: f64,
    unidirectional_links: usize,
}

impl RecordRow {
    fn new(r: &MetricsRecord, mode: Mode) -> Self {
        let dir = mode == Mode::Directional;
        RecordRow {
            n: r.n,
            gradient: r.gradient,
            seed: r.seed,
            mode: mode.to_string(),
            apl: r.value(Metric::Apl, mode),
            cc: r.value(Metric::Cc, mode),
            components: if dir { r.components_dir } else { r.components_omni },
            frac_peripheral: r.frac_peripheral,
            frac_centroid: r.frac_centroid,
            unidirectional_links: if dir { r.unidirectional_links } else { 0 },
        }
    }
}

/// Two rows per trial, `omni` then `dir`.
pub fn write_records_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RECORDS_HEADER.split(','))?;
    for r in records {
        for mode in Mode::ALL {
            w.serialize(RecordRow::new(r, mode))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<MetricsRecord>, ReportError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RECORDS_HEADER {
        return Err(ReportError::Malformed(format!("unexpected header `{}`", header.join(","))));
    }
    let rows: Vec<RecordRow> = rdr.deserialize().collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    let mut pending: Option<RecordRow> = None;
    for row in rows {
        let mode: Mode = row.mode.parse().map_err(ReportError::Malformed)?;
        match (mode, pending.take()) {
            (Mode::Omni, None) => pending = Some(row),
            (Mode::Directional, Some(o)) if (o.n, o.gradient, o.seed) == (row.n, row.gradient, row.seed) => {
                records.push(MetricsRecord {
                    n: row.n,
                    gradient: row.gradient,
                    seed: row.seed,
                    apl_omni: o.apl,
                    apl_dir: row.apl,
                    cc_omni: o.cc,
                    cc_dir: row.cc,
                    components_omni: o.components,
                    components_dir: row.components,
                    frac_peripheral: row.frac_peripheral,
                    frac_centroid: row.frac_centroid,
                    unidirectional_links: row.unidirectional_links,
                })
            }
            _ => {
                return Err(ReportError::Malformed(format!(
                    "expected omni/dir row pair near n={} gradient={} seed={}",
                    row.n, row.gradient, row.seed
                )))
            }
        }
    }
    if let Some(o) = pending {
        return Err(ReportError::Malformed(format!("unpaired omni row for seed {}", o.seed)));
    }
    Ok(records)
}

pub const SUMMARY_HEADER: &str = "metric,n,density,gradient,mode,mean,ci95_halfwidth,sample_count";

/// Summary rows; an undefined half-width is left empty.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], field_size: f64, out: W) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SUMMARY_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.metric.to_string(),
            r.n.to_string(),
            r.density(field_size).to_string(),
            r.gradient.to_string(),
            r.mode.to_string(),
            r.mean.to_string(),
            r.ci95_halfwidth.map(|h| h.to_string()).unwrap_or_default(),
            r.sample_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn axis_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    (0..)
        .map(|i| first + i as f64 * step)
        .take_while(|t| *t <= hi + step * 1e-9)
        .collect()
}

/// Standalone SVG line chart of mean ± 95% CI against density, one series
/// per `(gradient, mode)`. Omnidirectional series are dashed.
pub fn render_svg(rows: &[SummaryRow], metric: Metric, field_size: f64) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 150.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let rows: Vec<&SummaryRow> = rows.iter().filter(|r| r.metric == metric).collect();
    let mut series: BTreeMap<(u32, Mode), Vec<&SummaryRow>> = BTreeMap::new();
    for r in &rows {
        series.entry((r.gradient, r.mode)).or_default().push(r);
    }
    let xs = rows.iter().map(|r| r.density(field_size));
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let ys = rows.iter().flat_map(|r| {
        let h = r.ci95_halfwidth.unwrap_or(0.0);
        [r.mean - h, r.mean + h]
    });
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (x_lo, x_hi) = if rows.is_empty() { (0.0, 1.0) } else { (0.0f64.min(x_lo), x_hi.max(x_lo + 1e-9)) };
    let (y_lo, y_hi) = if rows.is_empty() { (0.0, 1.0) } else { (0.0f64.min(y_lo), y_hi.max(y_lo + 1e-9)) };
    let px = |x: f64| L + (x - x_lo) / (x_hi - x_lo) * (W - L - R);
    let py = |y: f64| H - B - (y - y_lo) / (y_hi - y_lo) * (H - T - B);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{metric} vs node density</text>"#, (W - R + L) / 2.0).unwrap();
    writeln!(
        s,
        r#"<g stroke="black"><line x1="{L}" y1="{}" x2="{}" y2="{}"/><line x1="{L}" y1="{T}" x2="{L}" y2="{}"/></g>"#,
        H - B,
        W - R,
        H - B,
        H - B
    )
    .unwrap();
    for t in axis_ticks(x_lo, x_hi) {
        let x = px(t);
        writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, H - B, H - B + 5.0, H - B + 18.0, fmt_tick(t)).unwrap();
    }
    for t in axis_ticks(y_lo, y_hi) {
        let y = py(t);
        writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{L}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, L - 5.0, L - 8.0, y + 4.0, fmt_tick(t)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">density (nodes per unit area)</text>"#, (W - R + L) / 2.0, H - 12.0).unwrap();
    writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{metric}</text>"#, (H - B + T) / 2.0, (H - B + T) / 2.0).unwrap();

    let gradients: Vec<u32> = {
        let mut g: Vec<u32> = series.keys().map(|k| k.0).collect();
        g.dedup();
        g
    };
    for (i, ((gradient, mode), pts)) in series.iter().enumerate() {
        let color = PALETTE[gradients.iter().position(|g| g == gradient).unwrap() % PALETTE.len()];
        let dash = if *mode == Mode::Omni { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(s, r#"<g class="series" data-gradient="{gradient}" data-mode="{mode}" stroke="{color}" fill="{color}">"#).unwrap();
        let poly: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.density(field_size)), py(r.mean)))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke-width="1.5"{dash} points="{}"/>"#, poly.join(" ")).unwrap();
        for r in pts {
            let (x, y) = (px(r.density(field_size)), py(r.mean));
            if let Some(h) = r.ci95_halfwidth {
                writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, py(r.mean - h), py(r.mean + h)).unwrap();
            }
            writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5"/>"#).unwrap();
        }
        let ly = T + 10.0 + i as f64 * 18.0;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke-width="2"{dash}/><text x="{}" y="{}" stroke="none" fill="black">g={gradient} {mode}</text>"#,
            W - R + 10.0,
            W - R + 35.0,
            W - R + 40.0,
            ly + 4.0
        )
        .unwrap();
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(t: f64) -> String {
    let r = (t * 1e6).round() / 1e6;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// Records which configuration and command produced an output directory.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: WorldConfig,
    pub subcommand: String,
    pub output_dir: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// Extra `key = value` lines, e.g. sweep grid.
    pub extra: Vec<(String, String)>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "subcommand = {}", self.subcommand).unwrap();
        writeln!(s, "output_dir = {}", self.output_dir).unwrap();
        writeln!(s, "tool_version = {}", self.tool_version).unwrap();
        writeln!(s, "timestamp = {}", self.timestamp).unwrap();
        for (k, v) in &self.extra {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s.push_str("\n[config]\n");
        s.push_str(&self.config.to_text());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::summarize;

    fn record(seed: u64, gradient: u32) -> MetricsRecord {
        MetricsRecord {
            n: 20,
            gradient,
            seed,
            apl_omni: 1.25,
            apl_dir: 3.0 + seed as f64 / 7.0,
            cc_omni: 0.1,
            cc_dir: 1.0 / 3.0,
            components_omni: 12,
            components_dir: 3,
            frac_peripheral: 0.95,
            frac_centroid: 0.9,
            unidirectional_links: 4,
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        let mut buf = Vec::new();
        write_records_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{RECORDS_HEADER}\n"));
        assert!(read_records_csv(format!("{RECORDS_HEADER}\n").as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn records_csv_layout() {
        let mut buf = Vec::new();
        write_records_csv(&[record(1, 3)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "20,3,1,omni,1.25,0.1,12,0.95,0.9,0");
        assert!(lines[2].starts_with("20,3,1,dir,"));
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(read_records_csv("a,b\n1,2\n".as_bytes()).is_err());
        let dir_first = format!("{RECORDS_HEADER}\n20,3,1,dir,1,0,1,1,1,0\n");
        assert!(read_records_csv(dir_first.as_bytes()).is_err());
    }

    #[test]
    fn summary_csv_blank_halfwidth() {
        let rows = summarize(&[record(1, 3)], Metric::Apl);
        let mut buf = Vec::new();
        write_summary_csv(&rows, 10.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "apl,20,0.2,3,omni,1.25,,1");
    }

    #[test]
    fn svg_has_one_series_per_gradient_and_mode() {
        let recs: Vec<MetricsRecord> = (0..3).flat_map(|s| [record(s, 3), record(s, 6)]).collect();
        let rows = summarize(&recs, Metric::Apl);
        let svg = render_svg(&rows, Metric::Apl, 10.0);
        assert_eq!(svg.matches(r#"class="series""#).count(), 4);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
        let empty = render_svg(&[], Metric::Cc, 10.0);
        assert_eq!(empty.matches(r#"class="series""#).count(), 0);
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(axis_ticks(0.0, 4.0), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(fmt_tick(0.30000000000000004), "0.3");
    }

    #[test]
    fn manifest_lists_config() {
        let m = RunManifest {
            config: WorldConfig::default(),
            subcommand: "trial".into(),
            output_dir: "out".into(),
            tool_version: "0.1.0".into(),
            timestamp: 0,
            extra: vec![],
        };
        let text = m.to_text();
        assert!(text.contains("subcommand = trial"));
        assert!(text.contains("gradient = 3"));
    }
}

//! Trace export: long-format CSV, a companion metrics CSV, and SVG charts.
//!
//! Floats are written with 17 significant digits so files round-trip
//! losslessly. Agent and `k_index` columns are 1-based; `k_index`,
//! `eps_star_roots` and `W1` are left empty when the graph has no root.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::simulator::Trace;

pub const TRACE_HEADER: [&str; 9] = ["t", "agent", "eps", "q1", "q2", "q3", "w1", "w2", "w3"];
pub const METRICS_HEADER: [&str; 9] = [
    "t",
    "eps_star_roots",
    "eps_star_all",
    "k_index",
    "W1",
    "W2",
    "V",
    "disagreement",
    "max_omega",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("trace has no samples")]
    EmptyTrace,
}

#[derive(Debug, Error)]
pub enum CsvParseError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Header {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("row {row}, column '{column}': {msg}")]
    Field {
        row: usize,
        column: &'static str,
        msg: String,
    },
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_trace_csv(trace: &Trace, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{}", TRACE_HEADER.join(","))?;
    for s in &trace.samples {
        let t = fmt_f64(s.state.t);
        for (i, (q, om)) in s.state.attitudes.iter().zip(&s.state.omegas).enumerate() {
            let a = q.to_array();
            writeln!(
                w,
                "{t},{},{},{},{},{},{},{},{}",
                i + 1,
                fmt_f64(a[0]),
                fmt_f64(a[1]),
                fmt_f64(a[2]),
                fmt_f64(a[3]),
                fmt_f64(om.x),
                fmt_f64(om.y),
                fmt_f64(om.z)
            )?;
        }
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_metrics_csv(trace: &Trace, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{}", METRICS_HEADER.join(","))?;
    for s in &trace.samples {
        let m = &s.metrics;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(s.state.t),
            opt(m.eps_star_roots),
            fmt_f64(m.eps_star_all),
            m.k_index.map(|k| (k + 1).to_string()).unwrap_or_default(),
            opt(m.w1),
            fmt_f64(m.w2),
            fmt_f64(m.v_energy),
            fmt_f64(m.disagreement),
            fmt_f64(m.max_omega_norm)
        )?;
    }
    Ok(())
}

/// Writes `<name>.trace.csv` and `<name>.metrics.csv` into `dir`.
pub fn export_csv(trace: &Trace, dir: &Path, name: &str) -> Result<Vec<PathBuf>, ExportError> {
    if trace.samples.is_empty() {
        return Err(ExportError::EmptyTrace);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let trace_path = dir.join(format!("{name}.trace.csv"));
    let metrics_path = dir.join(format!("{name}.metrics.csv"));
    {
        let f = File::create(&trace_path).map_err(io_err(&trace_path))?;
        let mut w = BufWriter::new(f);
        write_trace_csv(trace, &mut w).map_err(io_err(&trace_path))?;
        w.flush().map_err(io_err(&trace_path))?;
    }
    {
        let f = File::create(&metrics_path).map_err(io_err(&metrics_path))?;
        let mut w = BufWriter::new(f);
        write_metrics_csv(trace, &mut w).map_err(io_err(&metrics_path))?;
        w.flush().map_err(io_err(&metrics_path))?;
    }
    Ok(vec![trace_path, metrics_path])
}

/// One per-agent row of a trace CSV. `agent` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub agent: usize,
    pub quat: [f64; 4],
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub t: f64,
    pub eps_star_roots: Option<f64>,
    pub eps_star_all: f64,
    pub k_index: Option<usize>,
    pub w1: Option<f64>,
    pub w2: f64,
    pub v_energy: f64,
    pub disagreement: f64,
    pub max_omega_norm: f64,
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), CsvParseError> {
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(CsvParseError::Header {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(())
}

fn field_f64(rec: &csv::StringRecord, idx: usize, row: usize, column: &'static str) -> Result<f64, CsvParseError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse::<f64>().map_err(|_| CsvParseError::Field {
        row,
        column,
        msg: format!("invalid number '{raw}'"),
    })
}

fn field_opt_f64(rec: &csv::StringRecord, idx: usize, row: usize, column: &'static str) -> Result<Option<f64>, CsvParseError> {
    if rec.get(idx).unwrap_or("").is_empty() {
        Ok(None)
    } else {
        field_f64(rec, idx, row, column).map(Some)
    }
}

fn field_index(rec: &csv::StringRecord, idx: usize, row: usize, column: &'static str) -> Result<usize, CsvParseError> {
    let raw = rec.get(idx).unwrap_or("");
    match raw.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(CsvParseError::Field {
            row,
            column,
            msg: format!("invalid 1-based index '{raw}'"),
        }),
    }
}

fn reader(r: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(r)
}

/// Parses a trace CSV written by [`write_trace_csv`].
pub fn read_trace_csv(r: impl Read) -> Result<Vec<TraceRow>, CsvParseError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &TRACE_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let f = |idx: usize| field_f64(&rec, idx, row, TRACE_HEADER[idx]);
        rows.push(TraceRow {
            t: f(0)?,
            agent: field_index(&rec, 1, row, "agent")?,
            quat: [f(2)?, f(3)?, f(4)?, f(5)?],
            omega: [f(6)?, f(7)?, f(8)?],
        });
    }
    Ok(rows)
}

/// Parses a metrics CSV written by [`write_metrics_csv`].
pub fn read_metrics_csv(r: impl Read) -> Result<Vec<MetricsRow>, CsvParseError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &METRICS_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let f = |idx: usize| field_f64(&rec, idx, row, METRICS_HEADER[idx]);
        let k_index = if rec.get(3).unwrap_or("").is_empty() {
            None
        } else {
            Some(field_index(&rec, 3, row, "k_index")? - 1)
        };
        rows.push(MetricsRow {
            t: f(0)?,
            eps_star_roots: field_opt_f64(&rec, 1, row, "eps_star_roots")?,
            eps_star_all: f(2)?,
            k_index,
            w1: field_opt_f64(&rec, 4, row, "W1")?,
            w2: f(5)?,
            v_energy: f(6)?,
            disagreement: f(7)?,
            max_omega_norm: f(8)?,
        });
    }
    Ok(rows)
}

/// Groups consecutive trace rows sharing a timestamp, ordered by agent.
pub fn group_by_time(rows: &[TraceRow]) -> Vec<(f64, Vec<[f64; 4]>)> {
    let mut out: Vec<(f64, Vec<TraceRow>)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((t, group)) if t.to_bits() == r.t.to_bits() => group.push(*r),
            _ => out.push((r.t, vec![*r])),
        }
    }
    out.into_iter()
        .map(|(t, mut g)| {
            g.sort_by_key(|r| r.agent);
            (t, g.into_iter().map(|r| r.quat).collect())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// SVG

const W: f64 = 720.0;
const H: f64 = 360.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 120.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a standalone SVG line chart.
pub fn line_chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 1e-12 {
        // flat data: pad so the line sits mid-plot
        let pad = y0.abs().max(1.0) * 0.1;
        y0 -= pad;
        y1 += pad;
    }
    let pw = W - MARGIN_L - MARGIN_R;
    let ph = H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(fx),
            H - MARGIN_B + 16.0,
            format_tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            sy(fy) + 4.0,
            format_tick(fy)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            MARGIN_L + pw,
            sy(fy),
            sy(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t [s]</text>"#,
        MARGIN_L + pw / 2.0,
        H - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN_T + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" x2="{:.2}" y1="{ly:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            W - MARGIN_R + 10.0,
            W - MARGIN_R + 30.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            W - MARGIN_R + 36.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// Chart sets rendered for a trace: scalar parts, each vector component,
/// the minimum scalar part, and the disagreement.
pub fn trace_charts(trace: &Trace) -> Vec<(&'static str, String)> {
    let n = trace.samples.first().map_or(0, |s| s.state.len());
    let per_agent = |f: &dyn Fn(&[f64; 4]) -> f64| -> Vec<Series> {
        (0..n)
            .map(|i| Series {
                label: format!("agent {}", i + 1),
                points: trace
                    .samples
                    .iter()
                    .map(|s| (s.state.t, f(&s.state.attitudes[i].to_array())))
                    .collect(),
            })
            .collect()
    };
    let metric = |label: &str, f: &dyn Fn(&crate::analysis::Metrics) -> f64| {
        vec![Series {
            label: label.to_string(),
            points: trace.samples.iter().map(|s| (s.state.t, f(&s.metrics))).collect(),
        }]
    };
    vec![
        ("eps", line_chart("Scalar parts", "eps_i", &per_agent(&|a| a[0]))),
        ("q1", line_chart("Vector part, component 1", "q_i1", &per_agent(&|a| a[1]))),
        ("q2", line_chart("Vector part, component 2", "q_i2", &per_agent(&|a| a[2]))),
        ("q3", line_chart("Vector part, component 3", "q_i3", &per_agent(&|a| a[3]))),
        (
            "eps_star",
            line_chart(
                "Minimum scalar part (analysis frame)",
                "eps*",
                &metric("eps* (all)", &|m| m.eps_star_all),
            ),
        ),
        (
            "disagreement",
            line_chart("Disagreement", "max pair gap", &metric("disagreement", &|m| m.disagreement)),
        ),
    ]
}

/// Writes `<name>.<chart>.svg` files into `dir`.
pub fn export_svg(trace: &Trace, dir: &Path, name: &str) -> Result<Vec<PathBuf>, ExportError> {
    if trace.samples.is_empty() {
        return Err(ExportError::EmptyTrace);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = Vec::new();
    for (chart, svg) in trace_charts(trace) {
        let p = dir.join(format!("{name}.{chart}.svg"));
        fs::write(&p, svg).map_err(io_err(&p))?;
        paths.push(p);
    }
    Ok(paths)
}

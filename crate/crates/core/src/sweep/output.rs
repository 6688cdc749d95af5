use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::algebra::Bargmann;
use crate::error::{Error, Result};

use super::{Mode, SweepRow};

pub const COLUMNS: [&str; 13] = [
    "delta_omega_hz",
    "n_bar",
    "j",
    "eta",
    "n_mean",
    "n_sat",
    "g2",
    "g4",
    "sz0",
    "good_cavity",
    "below_saturation",
    "cooling_regime",
    "mode",
];

/// Columns that can be plotted against the detuning.
pub const PLOT_COLUMNS: [&str; 6] = ["n_mean", "g2", "g4", "eta", "n_sat", "sz0"];

/// Shortest text that parses back to the same value, switching to
/// exponent notation for very small or large magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            format_float(r.delta_omega_hz),
            format_float(r.n_bar),
            r.j.to_string(),
            fmt_opt(r.eta),
            fmt_opt(r.n_mean),
            fmt_opt(r.n_sat),
            fmt_opt(r.g2),
            fmt_opt(r.g4),
            fmt_opt(r.sz0),
            r.good_cavity.to_string(),
            r.below_saturation.to_string(),
            r.cooling_regime.to_string(),
            r.mode.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(rows, std::io::BufWriter::new(file))
}

/// Parse a file written by [`emit_csv`]. The `error` field is not stored
/// and comes back as `None`.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = |col: &str, v: &str| {
            Error::InvalidArgument(format!("row {}: bad {col} value {v:?}", line + 1))
        };
        let num = |k: usize| -> Result<f64> { rec[k].parse().map_err(|_| bad(COLUMNS[k], &rec[k])) };
        let opt = |k: usize| -> Result<Option<f64>> {
            if rec[k].is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        let flag = |k: usize| -> Result<bool> { rec[k].parse().map_err(|_| bad(COLUMNS[k], &rec[k])) };
        rows.push(SweepRow {
            delta_omega_hz: num(0)?,
            n_bar: num(1)?,
            j: Bargmann::from_value(num(2)?).map_err(|_| bad("j", &rec[2]))?,
            eta: opt(3)?,
            n_mean: opt(4)?,
            n_sat: opt(5)?,
            g2: opt(6)?,
            g4: opt(7)?,
            sz0: opt(8)?,
            good_cavity: flag(9)?,
            below_saturation: flag(10)?,
            cooling_regime: flag(11)?,
            mode: rec[12].parse::<Mode>().map_err(|_| bad("mode", &rec[12]))?,
            error: None,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub y_column: String,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec { y_column: "n_mean".into(), width: 800.0, height: 500.0 }
    }
}

fn column_value(r: &SweepRow, col: &str) -> Option<f64> {
    match col {
        "n_mean" => r.n_mean,
        "g2" => r.g2,
        "g4" => r.g4,
        "eta" => r.eta,
        "n_sat" => r.n_sat,
        "sz0" => r.sz0,
        _ => None,
    }
}

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Round numbers spanning `[lo, hi]`, about `n` of them.
fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let raw = (hi - lo) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Line plot of `plot.y_column` against the detuning in MHz, one polyline
/// per `(n̄, j)` series. Undefined values are left out of their series.
pub fn render_svg(rows: &[SweepRow], plot: &PlotSpec) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to plot".into()));
    }
    if !super::PLOT_COLUMNS.contains(&plot.y_column.as_str()) {
        return Err(Error::InvalidArgument(format!("cannot plot column {:?}", plot.y_column)));
    }
    let mut series: Vec<((f64, Bargmann), Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let key = (r.n_bar, r.j);
        let idx = match series.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                series.push((key, Vec::new()));
                series.len() - 1
            }
        };
        if let Some(y) = column_value(r, &plot.y_column) {
            series[idx].1.push((r.delta_omega_hz / 1e6, y));
        }
    }
    let xs = rows.iter().map(|r| r.delta_omega_hz / 1e6);
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let ys = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1));
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    if y1 - y0 <= f64::EPSILON * y1.abs().max(1.0) {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    if x1 <= x0 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }

    let (w, h) = (plot.width, plot.height);
    let (left, right, top, bottom) = (70.0, 160.0, 20.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">detuning δω/2π (MHz)</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        plot.y_column
    );
    for (k, ((n_bar, j), pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = top + 15.0 + 18.0 * k as f64;
        let lx = left + pw + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">n̄={n_bar}, j={j}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(rows: &[SweepRow], plot: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg(rows, plot)?;
    std::fs::write(path, svg).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(d: f64, j: Bargmann, g2: Option<f64>) -> SweepRow {
        SweepRow {
            delta_omega_hz: d,
            n_bar: 2.0,
            j,
            eta: Some(8.785809248621421),
            n_mean: Some(0.1 + d * 1e-9),
            n_sat: Some(1.957),
            g2,
            g4: None,
            sz0: Some(-0.995475113122172),
            good_cavity: true,
            below_saturation: true,
            cooling_regime: true,
            mode: Mode::Analytic,
            error: None,
        }
    }

    #[test]
    fn two_rows_three_lines() {
        let rows = [row(1e6, Bargmann::Quarter, Some(1.5)), row(2e6, Bargmann::Quarter, None)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], COLUMNS.join(","));
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields[6], "");
        assert!(!text.contains("NaN"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let tiny = SweepRow { n_mean: Some(3.3e-17), g2: Some(1.0 / 3.0), ..row(-7.5e7, Bargmann::ThreeQuarters, None) };
        let rows = vec![tiny, row(0.0, Bargmann::Quarter, Some(2.0f64.sqrt()))];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn svg_has_series_and_axes() {
        let mut rows = Vec::new();
        for j in Bargmann::BOTH {
            for k in 0..5 {
                rows.push(row(k as f64 * 1e6, j, Some(1.2)));
            }
        }
        let svg = render_svg(&rows, &PlotSpec { y_column: "g2".into(), ..PlotSpec::default() }).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("detuning δω/2π (MHz)"));
        assert!(svg.contains(">g2</text>"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn svg_needs_rows() {
        assert!(render_svg(&[], &PlotSpec::default()).is_err());
    }

    #[test]
    fn unwritable_path() {
        let rows = [row(0.0, Bargmann::Quarter, None)];
        let err = emit_csv(&rows, Path::new("/nonexistent-dir/out.csv")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn tick_values() {
        assert_eq!(ticks(0.0, 10.0, 5), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(tick_label(-0.0), "0");
        assert_eq!(tick_label(2.5), "2.5");
    }
}

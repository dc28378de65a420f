//! CSV tables with a `#` manifest header, and static SVG figures.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::AutonomyReport;
use crate::equivalent::{ComparisonReport, SweepResult};
use crate::error::{Error, Result};
use crate::gain::OracleComparison;
use crate::modes::ModeFamily;
use crate::scalar::Scalar;
use crate::simulate::PowerTrace;

/// Provenance of an output file. Wall time lives only in the JSON sidecar
/// so CSV output stays byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub solver: String,
    pub steps: Vec<usize>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: &str, solver: &str) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            solver: solver.to_string(),
            steps: Vec::new(),
            outputs: Vec::new(),
            wall_seconds: None,
        }
    }

    pub fn header_lines(&self) -> Vec<(String, String)> {
        let steps = self.steps.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        vec![
            ("tool".into(), format!("{} {}", self.tool, self.version)),
            ("command".into(), self.command.clone()),
            ("config_sha256".into(), self.config_hash.clone()),
            ("solver".into(), self.solver.clone()),
            ("steps".into(), steps),
        ]
    }

    /// Writes `<path>.manifest.json`.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let mut p = path.as_os_str().to_owned();
        p.push(".manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Csv(e.to_string()))?;
        std::fs::write(&p, text + "\n")?;
        Ok(())
    }
}

/// Numeric table. `meta` entries become `# key: value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { meta: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    pub fn write_to(&self, out: &mut impl Write) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format_number(*x))).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Table> {
        let mut meta = Vec::new();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else { break };
            if let Some((k, v)) = rest.trim().split_once(':') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns: Vec<String> =
            rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.iter().map(str::to_string).collect();
        if columns.is_empty() || columns.iter().all(|c| c.is_empty()) {
            return Err(Error::Csv("missing header row".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Csv(format!("row {}: not a number: {f:?}", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { meta, columns, rows })
    }

    pub fn read_file(path: &Path) -> Result<Table> {
        Table::parse(&std::fs::read_to_string(path)?)
    }
}

/// `z_m, P_pump_W, P_<mode>_W..., P_signal_W`.
pub fn trace_table<T: Scalar>(trace: &PowerTrace<T>) -> Table {
    let mut cols = vec!["z_m".to_string(), "P_pump_W".to_string()];
    cols.extend(trace.mode_names.iter().map(|n| format!("P_{n}_W")));
    cols.push("P_signal_W".into());
    let mut t = Table::new(cols);
    for k in 0..trace.len() {
        let mut row = vec![trace.z[k].as_f64(), trace.pump[k].as_f64()];
        row.extend(trace.modes.iter().map(|m| m[k].as_f64()));
        row.push(trace.signal[k].as_f64());
        t.push_row(row);
    }
    t
}

/// One row per mode in cutoff order.
pub fn modes_table<T: Scalar>(family: &ModeFamily<T>) -> Table {
    let beat = family.beat_length().map(|b| b.as_f64()).unwrap_or(f64::NAN);
    let mut t = Table::new(
        ["order", "i", "j", "u", "w", "beta_per_m", "beat_length_m"].iter().map(|s| s.to_string()).collect(),
    );
    t.push_meta("V", family.v.as_f64());
    t.push_meta("modes", family.names().join(" "));
    for (k, m) in family.modes.iter().enumerate() {
        t.push_row(vec![k as f64, m.i as f64, m.j as f64, m.u.as_f64(), m.w.as_f64(), m.beta.as_f64(), beat]);
    }
    t
}

/// Deviation series on the short grid, summary in the header.
pub fn comparison_table<T: Scalar>(report: &ComparisonReport<T>) -> Table {
    let mut cols = vec!["z_short_m".to_string()];
    cols.extend(report.channels.iter().map(|c| format!("dP_{c}_W")));
    let mut t = Table::new(cols);
    t.push_meta("scale", report.scale.as_f64());
    for (c, m) in report.channels.iter().zip(&report.max_abs) {
        t.push_meta(format!("max_abs_{c}_W"), format_number(m.as_f64()));
    }
    t.push_meta("numerator_W", format_number(report.numerator.as_f64()));
    t.push_meta("denominator_W", format_number(report.denominator.as_f64()));
    t.push_meta("epsilon", format_number(report.epsilon.as_f64()));
    for k in 0..report.z_short.len() {
        let mut row = vec![report.z_short[k].as_f64()];
        row.extend(report.differences.iter().map(|d| d[k].as_f64()));
        t.push_row(row);
    }
    t
}

/// Long format: one row per `(P_p0, L~)` cell; failed cells hold NaN.
pub fn sweep_table<T: Scalar>(sweep: &SweepResult<T>, mode_names: &[String]) -> Table {
    let mut cols = vec!["pump_power_W".to_string(), "l_tilde_m".to_string(), "epsilon".to_string()];
    cols.extend(mode_names.iter().map(|n| format!("worst_{n}")));
    let mut t = Table::new(cols);
    t.push_meta("launches", sweep.launches);
    for cell in &sweep.cells {
        let mut row = vec![cell.pump_power.as_f64(), cell.l_tilde.as_f64(), cell.epsilon.map_or(f64::NAN, |e| e.as_f64())];
        match &cell.worst_launch {
            Some(f) => row.extend(f.iter().map(|v| v.as_f64())),
            None => row.extend(std::iter::repeat_n(f64::NAN, mode_names.len())),
        }
        if let Some(e) = &cell.error {
            t.push_meta(format!("failed {} W {} m", cell.pump_power, cell.l_tilde), e);
        }
        t.push_row(row);
    }
    t
}

/// Rebuilds the `epsilon[pump][l_tilde]` grid from a [`sweep_table`].
pub fn sweep_grid(table: &Table) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let need = |n: &str| table.column_index(n).ok_or_else(|| Error::Csv(format!("missing column {n}")));
    let (pc, lc, ec) = (need("pump_power_W")?, need("l_tilde_m")?, need("epsilon")?);
    let mut pumps: Vec<f64> = Vec::new();
    let mut lts: Vec<f64> = Vec::new();
    for r in &table.rows {
        if !pumps.contains(&r[pc]) {
            pumps.push(r[pc]);
        }
        if !lts.contains(&r[lc]) {
            lts.push(r[lc]);
        }
    }
    pumps.sort_by(f64::total_cmp);
    lts.sort_by(f64::total_cmp);
    let mut grid = vec![vec![f64::NAN; lts.len()]; pumps.len()];
    for r in &table.rows {
        let i = pumps.iter().position(|p| *p == r[pc]).unwrap();
        let j = lts.iter().position(|l| *l == r[lc]).unwrap();
        grid[i][j] = r[ec];
    }
    Ok((pumps, lts, grid))
}

pub fn diagnostics_table<T: Scalar>(report: &AutonomyReport<T>) -> Table {
    let mut cols = vec!["z_m".to_string(), "irradiance_gap".to_string()];
    for n in &report.mode_names {
        cols.push(format!("autonomous_{n}_W_per_m"));
        cols.push(format!("rho_{n}_W_per_m"));
        cols.push(format!("eta_{n}_W_per_m"));
    }
    cols.push("autonomous_pump_W_per_m".into());
    cols.push("eta_pump_W_per_m".into());
    let mut t = Table::new(cols);
    t.push_meta("max_irradiance_gap", format_number(report.max_irradiance_gap.as_f64()));
    t.push_meta("rho_relative", format_number(report.rho_relative.as_f64()));
    t.push_meta("eta_relative", format_number(report.eta_relative.as_f64()));
    t.push_meta("eta_pump_relative", format_number(report.eta_pump_relative.as_f64()));
    for s in &report.samples {
        let mut row = vec![s.z.as_f64(), s.irradiance_gap.as_f64()];
        for l in 0..s.rho.len() {
            row.extend([s.autonomous[l].as_f64(), s.rho[l].as_f64(), s.eta[l].as_f64()]);
        }
        row.extend([s.pump_autonomous.as_f64(), s.eta_pump.as_f64()]);
        t.push_row(row);
    }
    t
}

/// Closed form against oracle, one row per irradiance pair.
pub fn gain_check_table(rows: &[OracleComparison]) -> Table {
    let levels = rows.first().map_or(0, |r| r.closed_form.len());
    let mut cols = vec!["I_s_W_per_m2".to_string(), "I_p_W_per_m2".to_string()];
    cols.extend((0..levels).map(|k| format!("N{k}_closed")));
    cols.extend((0..levels).map(|k| format!("N{k}_oracle")));
    cols.push("residual".into());
    let mut t = Table::new(cols);
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    t.push_meta("max_residual", format_number(worst));
    for r in rows {
        let mut row = vec![r.signal_irradiance, r.pump_irradiance];
        row.extend(&r.closed_form);
        row.extend(&r.oracle);
        row.push(r.residual);
        t.push_row(row);
    }
    t
}

/// Shortest representation that parses back to the same value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x:e}")
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.0 {
        2.0
    } else if f < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let step = nice_step(hi - lo, 5);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_L - MARGIN_R)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn open_svg(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn axes(s: &mut String, f: &Frame, xticks: &[(f64, String)], yticks: &[(f64, String)], xlabel: &str, ylabel: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for (v, label) in xticks {
        let x = f.px(*v);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, y0 + 20.0);
    }
    for (v, label) in yticks {
        let y = f.py(*v);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

/// Line plot of columns `ys` against column `x`.
pub fn line_plot_svg(table: &Table, x: usize, ys: &[usize], title: &str, ylabel: &str) -> String {
    let xs = table.column(x);
    let f = Frame {
        x: range(xs.iter().copied()),
        y: range(ys.iter().flat_map(|&c| table.column(c))),
    };
    let mut s = String::new();
    open_svg(&mut s, title);
    let xt: Vec<_> = ticks(f.x.0, f.x.1).into_iter().map(|t| (t, tick_label(t))).collect();
    let yt: Vec<_> = ticks(f.y.0, f.y.1).into_iter().map(|t| (t, tick_label(t))).collect();
    axes(&mut s, &f, &xt, &yt, &table.columns[x], ylabel);
    for (i, &c) in ys.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for (xv, yv) in xs.iter().zip(table.column(c)) {
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", f.px(*xv), f.py(yv));
            }
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
        let ly = MARGIN_T + 15.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&table.columns[c]));
    }
    s.push_str("</svg>\n");
    s
}

/// Filled contour of `log10 values[i][j]` over `x[j]` (log axis) and `y[i]`.
/// Non-finite or nonpositive cells are left blank.
pub fn contour_svg(x: &[f64], y: &[f64], values: &[Vec<f64>], levels: usize, title: &str, xlabel: &str, ylabel: &str) -> String {
    let logs: Vec<Vec<f64>> =
        values.iter().map(|r| r.iter().map(|v| if *v > 0.0 { v.log10() } else { f64::NAN }).collect()).collect();
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let f = Frame { x: range(lx.iter().copied()), y: range(y.iter().copied()) };
    let (vlo, vhi) = range(logs.iter().flatten().copied());
    let levels = levels.max(2);
    let band = |v: f64| (((v - vlo) / (vhi - vlo) * levels as f64).floor() as usize).min(levels - 1);
    let color = |b: usize| {
        // Dark blue to yellow.
        let t = b as f64 / (levels - 1) as f64;
        let r = (68.0 + t * (253.0 - 68.0)).round() as u8;
        let g = (1.0 + t * (231.0 - 1.0)).round() as u8;
        let bl = (84.0 + t * (37.0 - 84.0)).round() as u8;
        format!("#{r:02x}{g:02x}{bl:02x}")
    };
    let mut s = String::new();
    open_svg(&mut s, title);
    const SUB: usize = 24;
    for i in 0..y.len().saturating_sub(1) {
        for j in 0..x.len().saturating_sub(1) {
            let c = [logs[i][j], logs[i][j + 1], logs[i + 1][j], logs[i + 1][j + 1]];
            if c.iter().any(|v| !v.is_finite()) {
                continue;
            }
            for a in 0..SUB {
                let v0 = (a as f64 + 0.5) / SUB as f64;
                let (ya, yb) = (y[i] + (y[i + 1] - y[i]) * a as f64 / SUB as f64, y[i] + (y[i + 1] - y[i]) * (a + 1) as f64 / SUB as f64);
                let mut b = 0;
                while b < SUB {
                    let at = |bb: usize| {
                        let u = (bb as f64 + 0.5) / SUB as f64;
                        band(c[0] * (1.0 - u) * (1.0 - v0) + c[1] * u * (1.0 - v0) + c[2] * (1.0 - u) * v0 + c[3] * u * v0)
                    };
                    let k = at(b);
                    let mut e = b + 1;
                    while e < SUB && at(e) == k {
                        e += 1;
                    }
                    let xa = lx[j] + (lx[j + 1] - lx[j]) * b as f64 / SUB as f64;
                    let xb = lx[j] + (lx[j + 1] - lx[j]) * e as f64 / SUB as f64;
                    let (px0, px1) = (f.px(xa), f.px(xb));
                    let (py0, py1) = (f.py(yb), f.py(ya));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                        px1 - px0 + 0.3,
                        py1 - py0 + 0.3,
                        color(k)
                    );
                    b = e;
                }
            }
        }
    }
    let xt: Vec<_> = x.iter().map(|v| (v.log10(), tick_label(*v))).collect();
    let yt: Vec<_> = ticks(f.y.0, f.y.1).into_iter().map(|t| (t, tick_label(t))).collect();
    axes(&mut s, &f, &xt, &yt, xlabel, ylabel);
    for b in 0..levels {
        let ly = MARGIN_T + 10.0 + 18.0 * (levels - 1 - b) as f64;
        let lx0 = WIDTH - MARGIN_R + 12.0;
        let lo = vlo + (vhi - vlo) * b as f64 / levels as f64;
        let _ = writeln!(s, r#"<rect x="{lx0}" y="{ly}" width="16" height="16" fill="{}"/>"#, color(b));
        let _ = writeln!(s, r#"<text x="{}" y="{}">1e{lo:.2}</text>"#, lx0 + 22.0, ly + 12.0);
    }
    s.push_str("</svg>\n");
    s
}

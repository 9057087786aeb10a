use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::diagnostics::runge_lenz;
use crate::error::{Error, Result};
use crate::hamiltonians::HamiltonianSpec;
use crate::integrator::Trajectory;
use crate::theory;

pub const SWEEP_COLUMNS: [&str; 13] = [
    "theta",
    "cos_theta",
    "omega0",
    "tau",
    "cos_phi_3d",
    "cos_phi_projected",
    "cos_phi_pred",
    "abs_err_3d",
    "z_residual",
    "energy_initial",
    "energy_final",
    "steps",
    "error_code",
];

pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t", "x", "y", "z", "px", "py", "pz", "energy", "ax", "ay", "az", "lz",
];

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub cos_theta: f64,
    pub omega0: f64,
    pub tau: f64,
    pub cos_phi_3d: f64,
    pub cos_phi_projected: f64,
    pub cos_phi_pred: f64,
    pub abs_err_3d: f64,
    pub z_residual: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub steps: u64,
    /// Empty on success.
    pub error_code: String,
}

impl SweepRow {
    pub fn from_record(r: &RunRecord) -> Self {
        Self {
            theta: r.theta,
            cos_theta: r.theta.cos(),
            omega0: r.omega0,
            tau: r.tau,
            cos_phi_3d: r.cos_phi_3d,
            cos_phi_projected: r.cos_phi_projected,
            cos_phi_pred: r.cos_phi_pred,
            abs_err_3d: r.abs_err_3d(),
            z_residual: r.z_residual,
            energy_initial: r.energy_initial,
            energy_final: r.energy_final,
            steps: r.steps,
            error_code: String::new(),
        }
    }

    pub fn failed(theta: f64, omega0: f64, tau: f64, err: &Error) -> Self {
        Self {
            theta,
            cos_theta: theta.cos(),
            omega0,
            tau,
            cos_phi_3d: f64::NAN,
            cos_phi_projected: f64::NAN,
            cos_phi_pred: theory::predicted_cos_phi(theta).unwrap_or(f64::NAN),
            abs_err_3d: f64::NAN,
            z_residual: f64::NAN,
            energy_initial: f64::NAN,
            energy_final: f64::NAN,
            steps: 0,
            error_code: err.code().to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error_code.is_empty()
    }

    fn fields(&self) -> [String; 13] {
        let f = |v: f64| format!("{v:?}");
        [
            f(self.theta),
            f(self.cos_theta),
            f(self.omega0),
            f(self.tau),
            f(self.cos_phi_3d),
            f(self.cos_phi_projected),
            f(self.cos_phi_pred),
            f(self.abs_err_3d),
            f(self.z_residual),
            f(self.energy_initial),
            f(self.energy_final),
            self.steps.to_string(),
            self.error_code.clone(),
        ]
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Sweep CSV as a string: header plus one line per row, `\n` terminated.
/// Floats use Rust's shortest round-trip formatting, independent of locale.
pub fn sweep_csv_string(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.fields().join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let text = sweep_csv_string(rows)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(SWEEP_COLUMNS.iter().copied()) {
        return Err(Error::InvalidConfig(format!(
            "{}: unexpected sweep header {:?}",
            path.display(),
            headers
        )));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(csv_err(path)))
        .collect()
}

/// Trajectory CSV: one line per sampled state with the energy, the
/// Runge-Lenz vector and `L_z`, all in the nucleus frame.
pub fn write_trajectory_csv(spec: &HamiltonianSpec, traj: &Trajectory, path: &Path) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for (t, s) in traj.iter() {
        let rel = spec.relative_state(s, t);
        let energy = spec.comoving_energy(s, t)?;
        let a = runge_lenz(&rel, spec.kepler)?;
        let lz = rel.angular_momentum().z;
        let vals = [
            t, s.r.x, s.r.y, s.r.z, s.p.x, s.p.y, s.p.z, energy, a.x, a.y, a.z, lz,
        ];
        let line: Vec<String> = vals.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// A named set of points for [`render_series_svg`].
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    /// Draw a polyline instead of markers.
    pub line: bool,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Static SVG plot of one or more series with labelled axes and a legend.
pub fn render_series_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame {
        x: padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    for i in 0..=4 {
        let fx = frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / 4.0;
        let fy = frame.y.0 + (frame.y.1 - frame.y.0) * i as f64 / 4.0;
        let (px, py) = (frame.px(fx), frame.py(fy));
        let _ = writeln!(
            svg,
            r#"<text x="{px:.1}" y="{:.1}" font-size="11" text-anchor="middle">{fx:.3}</text>"#,
            y0 + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{py:.1}" font-size="11" text-anchor="end">{fy:.3}</text>"#,
            x0 - 6.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="30" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| (frame.px(x), frame.py(y)))
            .collect();
        if s.line {
            let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" stroke="{}" fill="none"/>"#,
                d.join(" "),
                s.color
            );
        } else {
            for (x, y) in &pts {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#,
                    s.color
                );
            }
        }
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            ly,
            s.color,
            WIDTH - MARGIN - 135.0,
            ly + 9.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Simulated and predicted `cos phi` against `cos theta`.
pub fn render_sweep_svg(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    let sim = rows.iter().map(|r| (r.cos_theta, r.cos_phi_3d)).collect();
    // Smooth theory curve over the sampled cos(theta) range.
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.theta), hi.max(r.theta))
    });
    let curve = (0..=200)
        .filter_map(|i| {
            let th = lo + (hi - lo) * i as f64 / 200.0;
            theory::predicted_cos_phi(th).ok().map(|c| (th.cos(), c))
        })
        .collect();
    let pred = rows.iter().map(|r| (r.cos_theta, r.cos_phi_pred)).collect();
    Ok(render_series_svg(
        "dipole rotation after one cone loop",
        "cos theta",
        "cos phi",
        &[
            Series {
                label: "simulated".into(),
                points: sim,
                color: "#1f77b4",
                line: false,
            },
            Series {
                label: "predicted".into(),
                points: pred,
                color: "#d62728",
                line: false,
            },
            Series {
                label: "cos(2 pi (1 - cos theta))".into(),
                points: curve,
                color: "#999999",
                line: true,
            },
        ],
    ))
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_svg(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_text(path, render_sweep_svg(rows)?)
}

pub fn emit_series_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    path: &Path,
) -> Result<()> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::EmptyResult);
    }
    write_text(path, render_series_svg(title, x_label, y_label, series))
}

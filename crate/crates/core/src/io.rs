//! File formats: system specifications in JSON, CSV tables and SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::standard::{build_standard, StandardFormParams};
use crate::system::{CubicSystem, Mat3, MatrixVectorRep, Vec3};

/// A system given by its coefficients, its matrix-vector pair, a standard
/// form, or a preset name (`"model"`, `"zero"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Lambda(LambdaSpec),
    MatrixVector(MatrixVectorSpec),
    Standard(StandardSpec),
    Preset(PresetSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    pub lambda: [f64; 12],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixVectorSpec {
    #[serde(rename = "A")]
    pub a: [[f64; 3]; 3],
    #[serde(rename = "V")]
    pub v: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandardSpec {
    pub standard: StandardFormParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub preset: String,
}

impl SystemSpec {
    pub fn to_system(&self) -> Result<CubicSystem> {
        match self {
            SystemSpec::Lambda(s) => CubicSystem::new(s.lambda),
            SystemSpec::MatrixVector(s) => {
                let a = Mat3::from_fn(|i, j| s.a[i][j]);
                Ok(MatrixVectorRep::new(a, Vec3::from(s.v))?.to_system())
            }
            SystemSpec::Standard(s) => {
                s.standard.validate()?;
                Ok(build_standard(&s.standard).0)
            }
            SystemSpec::Preset(p) => match p.preset.as_str() {
                "model" => Ok(CubicSystem::model()),
                "zero" => Ok(CubicSystem::zero()),
                other => Err(Error::InvalidInput(format!("unknown preset {other:?}"))),
            },
        }
    }
}

impl From<&CubicSystem> for SystemSpec {
    fn from(s: &CubicSystem) -> Self {
        SystemSpec::Lambda(LambdaSpec { lambda: s.lambda })
    }
}

/// Parses a [`SystemSpec`] and builds the system.
pub fn parse_system(json: &str) -> Result<CubicSystem> {
    let spec: SystemSpec = serde_json::from_str(json).map_err(|e| Error::InvalidInput(format!("system spec: {e}")))?;
    spec.to_system()
}

/// Formats a double with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a header row.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    std::fs::write(path, csv_string(header, rows)).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PlotSpec {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub logx: bool,
    pub logy: bool,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static SVG line chart. Non-positive values are dropped on log axes.
pub fn line_plot_svg(spec: &PlotSpec, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 20.0, 40.0, 50.0);
    let tx = |v: f64| if spec.logx { v.log10() } else { v };
    let ty = |v: f64| if spec.logy { v.log10() } else { v };
    let keep = |&(x, y): &(f64, f64)| {
        x.is_finite() && y.is_finite() && (!spec.logx || x > 0.0) && (!spec.logy || y > 0.0)
    };
    let pts: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().filter(|p| keep(p)).map(|&(x, y)| (tx(x), ty(y))).collect()).collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-300 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-300 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(&spec.title));
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let lx = if spec.logx { format!("1e{xv:.1}") } else { format!("{xv:.3}") };
        let ly = if spec.logy { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{lx}</text>"#, px(xv), h - mb + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{ly}</text>"#, ml - 4.0, py(yv) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 10.0, escape(&spec.xlabel));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&spec.ylabel)
    );
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let c = COLORS[i % COLORS.len()];
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
            ml + 8.0,
            mt + 16.0 + 14.0 * i as f64,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_specs() {
        let m = parse_system(r#"{"preset":"model"}"#).unwrap();
        assert_eq!(m, CubicSystem::model());
        let l = parse_system(&format!(r#"{{"lambda":{:?}}}"#, m.lambda)).unwrap();
        assert_eq!(l, m);
        let rep = m.to_matrix_vector();
        let a: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| rep.a[(i, j)]).collect()).collect();
        let json = format!(r#"{{"A":{:?},"V":{:?}}}"#, a, [rep.v[0], rep.v[1], rep.v[2]]);
        assert_eq!(parse_system(&json).unwrap(), m);
        assert!(parse_system(r#"{"lambda":[1,2,3]}"#).is_err());
        assert!(parse_system(r#"{"preset":"model","extra":1}"#).is_err());
        assert!(parse_system(r#"{"preset":"other"}"#).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let x = 0.1 + 0.2;
        let s = csv_string(&["a", "b"], &[vec![x, -1e-300]]);
        let line = s.lines().nth(1).unwrap();
        let back: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(back, vec![x, -1e-300]);
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = line_plot_svg(
            &PlotSpec { title: "a<b".into(), logy: true, ..Default::default() },
            &[Series::new("s", vec![(1.0, 1.0), (2.0, 0.0), (3.0, 1e-3)])],
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a&lt;b"));
    }
}

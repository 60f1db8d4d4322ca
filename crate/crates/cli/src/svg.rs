//! Deterministic SVG drawings of lamination documents.
//!
//! Coordinates are converted to floating point only here, at render time.

use std::f64::consts::TAU;
use std::fmt::Write;

use lamlab::circle::{fixed_points, render_dnary, CirclePoint, Degree};
use lamlab::leaves::Leaf;

use crate::document::LaminationDocument;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ChordStyle {
    /// Straight chords, as in most lamination pictures.
    Straight,
    /// Circular arcs orthogonal to the unit circle.
    Geodesic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LabelStyle {
    Rational,
    Dnary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    pub size: u32,
    pub style: ChordStyle,
    pub labels: Option<LabelStyle>,
    pub fixed_point_color: String,
    pub critical_color: String,
    /// Leaf colors by first-appearance depth; the last one repeats.
    pub depth_colors: Vec<String>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            size: 600,
            style: ChordStyle::Straight,
            labels: None,
            fixed_point_color: "#000000".into(),
            critical_color: "#888888".into(),
            depth_colors: ["#c00000", "#1f4e9c", "#2e8b57", "#d2691e", "#7b3fa0", "#999999"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

struct Canvas {
    c: f64,
    r: f64,
}

impl Canvas {
    fn xy(&self, t: &CirclePoint) -> (f64, f64) {
        let a = TAU * t.to_f64();
        (self.c + self.r * a.cos(), self.c - self.r * a.sin())
    }

    fn path(&self, l: &Leaf, style: ChordStyle) -> String {
        // orient so the counterclockwise arc from a to b is the short one
        let (a, b) = if l.lo().ccw_distance_to(l.hi()) <= l.length() { (l.lo(), l.hi()) } else { (l.hi(), l.lo()) };
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let theta = TAU * (b.to_f64() - a.to_f64()).rem_euclid(1.0);
        match style {
            ChordStyle::Geodesic if theta < TAU / 2.0 - 1e-9 => {
                let rho = self.r * (theta / 2.0).tan();
                format!("M {x1:.3} {y1:.3} A {rho:.3} {rho:.3} 0 0 0 {x2:.3} {y2:.3}")
            }
            _ => format!("M {x1:.3} {y1:.3} L {x2:.3} {y2:.3}"),
        }
    }
}

fn label(t: &CirclePoint, d: Degree, style: LabelStyle) -> String {
    match style {
        LabelStyle::Dnary => render_dnary(t, d).map(|s| s.to_string()).unwrap_or_else(|_| t.to_string()),
        LabelStyle::Rational => t.to_string(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Circle, one `leaf` path per document leaf, the critical chords dashed,
/// and a dot at every fixed point of `σ_d`.
pub fn write_svg(doc: &LaminationDocument, spec: &RenderSpec) -> String {
    let size = spec.size.max(1) as f64;
    let cv = Canvas { c: size / 2.0, r: size * 0.45 };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        spec.size.max(1)
    );
    let _ = writeln!(
        out,
        r##"<circle class="boundary" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        cv.c, cv.c, cv.r
    );
    let palette = &spec.depth_colors;
    for (i, l) in doc.leaves.iter().enumerate() {
        let depth = doc.first_depth.as_ref().map_or(0, |v| v[i]);
        let color = palette.get(depth).or(palette.last()).map_or("#000000", String::as_str);
        let _ = writeln!(
            out,
            r#"<path class="leaf depth-{depth}" d="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            cv.path(l, spec.style)
        );
    }
    if let Some(c) = &doc.critical_portrait {
        for ch in c.chords() {
            let _ = writeln!(
                out,
                r#"<path class="critical" d="{}" fill="none" stroke="{}" stroke-width="1" stroke-dasharray="4 3"/>"#,
                cv.path(ch, spec.style),
                spec.critical_color
            );
        }
    }
    let fps = fixed_points(doc.degree);
    for f in &fps {
        let (x, y) = cv.xy(f);
        let _ = writeln!(
            out,
            r#"<circle class="fixed-point" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{}"/>"#,
            size / 150.0,
            spec.fixed_point_color
        );
    }
    if let Some(style) = spec.labels {
        let mut points: Vec<&CirclePoint> = fps.iter().collect();
        let initial: Vec<&Leaf> = match &doc.first_depth {
            Some(ds) => doc.leaves.iter().zip(ds).filter(|(_, &d)| d == 0).map(|(l, _)| l).collect(),
            None => doc.leaves.iter().collect(),
        };
        points.extend(initial.iter().flat_map(|l| l.endpoints()));
        points.sort();
        points.dedup();
        let lr = Canvas { c: cv.c, r: cv.r + size * 0.03 };
        for t in points {
            let (x, y) = lr.xy(t);
            let _ = writeln!(
                out,
                r#"<text class="label" x="{x:.3}" y="{y:.3}" font-size="{:.1}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
                size / 50.0,
                escape(&label(t, doc.degree, style))
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

//! Deterministic SVG drawings of tables, orbits and unfoldings.

use std::fmt::Write;

use billiards::geom::Segment;
use billiards::unfold::Corridor;
use billiards::{Point2, Polygon};

const MARGIN: f64 = 0.08;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Accumulates shapes in model coordinates and writes them with the y axis
/// pointing up.
struct Canvas {
    body: String,
    min: Point2,
    max: Point2,
}

impl Canvas {
    fn new() -> Self {
        Canvas {
            body: String::new(),
            min: Point2::new(f64::INFINITY, f64::INFINITY),
            max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: Point2) {
        self.min = Point2::new(self.min.x.min(p.x), self.min.y.min(p.y));
        self.max = Point2::new(self.max.x.max(p.x), self.max.y.max(p.y));
    }

    fn points(&mut self, pts: &[Point2]) -> String {
        let mut out = String::new();
        for (i, p) in pts.iter().enumerate() {
            self.grow(*p);
            if i > 0 {
                out.push(' ');
            }
            // `0.0 - y` avoids printing negative zero.
            let _ = write!(out, "{:.6},{:.6}", p.x, 0.0 - p.y);
        }
        out
    }

    fn polygon(&mut self, pts: &[Point2], style: &str) {
        let pts = self.points(pts);
        let _ = writeln!(self.body, r#"  <polygon points="{pts}" {style}/>"#);
    }

    fn polyline(&mut self, pts: &[Point2], style: &str) {
        let pts = self.points(pts);
        let _ = writeln!(self.body, r#"  <polyline points="{pts}" {style}/>"#);
    }

    fn line(&mut self, seg: &Segment, style: &str) {
        self.polyline(&[seg.a, seg.b], style);
    }

    fn text(&mut self, at: Point2, size: f64, text: &str) {
        self.grow(at);
        let _ = writeln!(
            self.body,
            r#"  <text x="{:.6}" y="{:.6}" font-size="{:.6}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            at.x,
            0.0 - at.y,
            size,
            escape(text)
        );
    }

    fn finish(self, title: &str) -> String {
        let w = (self.max.x - self.min.x).max(1e-9);
        let h = (self.max.y - self.min.y).max(1e-9);
        let pad = MARGIN * w.max(h);
        let (x0, y0) = (self.min.x - pad, -self.max.y - pad);
        let (vw, vh) = (w + 2.0 * pad, h + 2.0 * pad);
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.6} {y0:.6} {vw:.6} {vh:.6}" width="800" height="{:.0}">"#,
            800.0 * vh / vw
        );
        let _ = writeln!(out, "  <title>{}</title>", escape(title));
        let _ = writeln!(
            out,
            "  <!-- billiards {} -->",
            env!("CARGO_PKG_VERSION")
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn stroke(color: &str, width: f64) -> String {
    format!(r#"fill="none" stroke="{color}" stroke-width="{width:.6}" stroke-linejoin="round""#)
}

fn side_labels(c: &mut Canvas, p: &Polygon, size: f64) {
    for i in 1..=p.k() {
        let side = p.side(i);
        let at = side.midpoint() - p.inward_normal(i) * (0.6 * size);
        c.text(at, size, p.label(i));
    }
}

/// The table with labeled sides and, optionally, an orbit polyline through
/// its impact points.
pub fn table_svg(p: &Polygon, orbit: &[Point2], title: &str) -> String {
    let scale = p.diameter();
    let mut c = Canvas::new();
    c.polygon(p.vertices(), &stroke("black", 0.006 * scale));
    if orbit.len() >= 2 {
        c.polyline(orbit, &stroke("#c0392b", 0.004 * scale));
    }
    side_labels(&mut c, p, 0.05 * scale);
    c.finish(title)
}

/// The chain of reflected copies crossed by a corridor's chords, gates
/// highlighted. `chord` is drawn solid; `bounds` (the edges of the
/// cylinder) dashed.
pub fn unfolding_svg(
    p: &Polygon,
    corridor: &Corridor,
    chord: Option<Segment>,
    bounds: &[Segment],
    title: &str,
) -> String {
    let scale = p.diameter();
    let mut c = Canvas::new();
    for j in 1..corridor.frames.len() {
        let copy = corridor.copy(p, j);
        let fill = if j == 1 { "#f4f4f4" } else { "none" };
        c.polygon(
            &copy,
            &format!(
                r#"fill="{fill}" stroke="gray" stroke-width="{:.6}""#,
                0.004 * scale
            ),
        );
    }
    for gate in &corridor.gates {
        c.line(gate, &stroke("#2471a3", 0.008 * scale));
    }
    for b in bounds {
        c.line(
            b,
            &format!(
                r#"{} stroke-dasharray="{:.6} {:.6}""#,
                stroke("#c0392b", 0.003 * scale),
                0.02 * scale,
                0.015 * scale
            ),
        );
    }
    if let Some(ch) = chord {
        c.line(&ch, &stroke("#c0392b", 0.005 * scale));
    }
    for (i, gate) in corridor.gates.iter().enumerate() {
        c.text(gate.midpoint(), 0.04 * scale, p.label(corridor.symbols[i]));
    }
    c.finish(title)
}

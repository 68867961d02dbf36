//! Static SVG figures: trace panels, labelled scatter plots and boxplots.
//!
//! Output depends only on the inputs, so figures regenerate byte for byte.

use std::fmt::Write;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn colour(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rounds for display and drops negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

fn short(x: f64) -> String {
    if x.abs() >= 1e4 || (x != 0.0 && x.abs() < 1e-2) {
        format!("{x:.2e}")
    } else {
        format!("{x:.2}")
    }
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 {
            return Range { lo: lo - 0.5, hi: hi + 0.5 };
        }
        let pad = 0.05 * (hi - lo);
        Range { lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

/// A panel's plotting area in document coordinates.
struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

struct Doc {
    width: f64,
    height: f64,
    body: String,
}

impl Doc {
    fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{anchor}">{}</text>"#,
            num(x),
            num(y),
            num(size),
            escape(text)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    fn axes(&mut self, f: &Frame, xr: Range, yr: Range, title: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(f.x),
            num(f.y),
            num(f.w),
            num(f.h)
        );
        self.text(f.x + f.w / 2.0, f.y - 8.0, 13.0, "middle", title);
        self.text(f.x - 4.0, f.y + f.h, 10.0, "end", &short(yr.lo));
        self.text(f.x - 4.0, f.y + 10.0, 10.0, "end", &short(yr.hi));
        self.text(f.x, f.y + f.h + 13.0, 10.0, "start", &short(xr.lo));
        self.text(f.x + f.w, f.y + f.h + 13.0, 10.0, "end", &short(xr.hi));
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = num(self.width),
            h = num(self.height)
        )
    }
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 180.0;
const MARGIN: f64 = 60.0;

/// One stacked panel per trace, x axis = retained iteration.
pub fn trace_panels(traces: &[(String, Vec<f64>)]) -> String {
    let height = traces.len().max(1) as f64 * (PANEL_H + MARGIN) + MARGIN / 2.0;
    let mut doc = Doc::new(PANEL_W + 1.5 * MARGIN, height);
    for (p, (title, values)) in traces.iter().enumerate() {
        let f = Frame {
            x: MARGIN,
            y: MARGIN / 2.0 + p as f64 * (PANEL_H + MARGIN) + 10.0,
            w: PANEL_W,
            h: PANEL_H,
        };
        let xr = Range {
            lo: 1.0,
            hi: values.len().max(2) as f64,
        };
        let yr = Range::of(values.iter().copied());
        doc.axes(&f, xr, yr, title);
        let mut points = String::new();
        for (i, &v) in values.iter().enumerate() {
            if v.is_finite() {
                let x = xr.map(i as f64 + 1.0, f.x, f.x + f.w);
                let y = yr.map(v, f.y + f.h, f.y);
                let _ = write!(points, "{},{} ", num(x), num(y));
            }
        }
        let _ = writeln!(
            doc.body,
            r#"<polyline fill="none" stroke="{}" stroke-width="0.8" points="{}"/>"#,
            colour(0),
            points.trim_end()
        );
    }
    doc.finish()
}

/// Points in the plane coloured by label.
pub fn scatter(points: &[[f64; 2]], labels: &[usize], title: &str) -> String {
    let side = 360.0;
    let mut doc = Doc::new(side + 1.5 * MARGIN, side + 1.5 * MARGIN);
    let f = Frame {
        x: MARGIN,
        y: MARGIN / 2.0 + 10.0,
        w: side,
        h: side,
    };
    let xr = Range::of(points.iter().map(|p| p[0]));
    let yr = Range::of(points.iter().map(|p| p[1]));
    doc.axes(&f, xr, yr, title);
    for (p, &l) in points.iter().zip(labels) {
        let _ = writeln!(
            doc.body,
            r#"<circle cx="{}" cy="{}" r="3" fill="{}"/>"#,
            num(xr.map(p[0], f.x, f.x + f.w)),
            num(yr.map(p[1], f.y + f.h, f.y)),
            colour(l)
        );
    }
    doc.finish()
}

/// Linear-interpolation quantile of sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One panel per entry, each with one box per method; whiskers span the
/// data range.
pub fn boxplots(panels: &[(String, Vec<(String, Vec<f64>)>)]) -> String {
    let cols = 3usize.min(panels.len().max(1));
    let rows = panels.len().div_ceil(cols).max(1);
    let (pw, ph) = (260.0, 200.0);
    let mut doc = Doc::new(cols as f64 * (pw + MARGIN) + MARGIN / 2.0, rows as f64 * (ph + MARGIN + 20.0) + MARGIN / 2.0);
    for (p, (title, boxes)) in panels.iter().enumerate() {
        let f = Frame {
            x: MARGIN + (p % cols) as f64 * (pw + MARGIN),
            y: MARGIN / 2.0 + (p / cols) as f64 * (ph + MARGIN + 20.0) + 10.0,
            w: pw,
            h: ph,
        };
        let yr = Range::of(boxes.iter().flat_map(|(_, v)| v.iter().copied()));
        let xr = Range { lo: 0.0, hi: 1.0 };
        doc.axes(&f, xr, yr, title);
        let slot = f.w / boxes.len().max(1) as f64;
        for (b, (name, values)) in boxes.iter().enumerate() {
            let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
            v.sort_by(f64::total_cmp);
            let cx = f.x + (b as f64 + 0.5) * slot;
            doc.text(cx, f.y + f.h + 28.0, 11.0, "middle", name);
            if v.is_empty() {
                continue;
            }
            let y = |q: f64| yr.map(quantile(&v, q), f.y + f.h, f.y);
            let half = slot * 0.25;
            doc.line(cx, y(0.0), cx, y(0.25), "black");
            doc.line(cx, y(0.75), cx, y(1.0), "black");
            let _ = writeln!(
                doc.body,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" fill-opacity="0.6" stroke="black"/>"#,
                num(cx - half),
                num(y(0.75)),
                num(2.0 * half),
                num((y(0.25) - y(0.75)).max(0.5)),
                colour(b)
            );
            doc.line(cx - half, y(0.5), cx + half, y(0.5), "black");
        }
    }
    doc.finish()
}

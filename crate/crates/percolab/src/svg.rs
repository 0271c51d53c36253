//! Self-contained SVG renderers: a lattice view of one realized spiral
//! construction and a generic curve plot with confidence whiskers. Output is
//! deterministic: fixed float formatting, no timestamps, no external assets.

use crate::geom::Point2;
use crate::spiral::{DecoratedPath, SpiralPlan};

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

struct Canvas {
    width: f64,
    height: f64,
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Canvas {
        Canvas { width, height, body: String::new() }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" style=\"{style}\"/>\n",
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h)
        ));
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        self.body.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" style=\"{style}\"/>\n",
            fmt(x1),
            fmt(y1),
            fmt(x2),
            fmt(y2)
        ));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, style: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" style=\"{style}\"/>\n",
            fmt(x),
            fmt(y),
            fmt(r)
        ));
    }

    fn polyline(&mut self, points: &[(f64, f64)], style: &str) {
        let pts: Vec<String> =
            points.iter().map(|&(x, y)| format!("{},{}", fmt(x), fmt(y))).collect();
        self.body
            .push_str(&format!("<polyline points=\"{}\" style=\"{style}\"/>\n", pts.join(" ")));
    }

    fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"monospace\">{content}</text>\n",
            fmt(x),
            fmt(y),
            fmt(size)
        ));
    }

    fn render(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            fmt(self.width),
            fmt(self.height),
            fmt(self.width),
            fmt(self.height),
            self.body
        )
    }
}

/// Lattice view of a spiral plan, optionally with one realized decorated
/// path: explored region shaded, path drawn as a polyline, gap vertices and
/// thread sites marked.
pub fn render_spiral(plan: &SpiralPlan, decorated: Option<&DecoratedPath>) -> String {
    let window = plan.window();
    let margin = 20.0;
    let target = 760.0;
    let cell = (target / window.width().max(window.height()) as f64).clamp(1.0, 14.0);
    let to_xy = |p: Point2| -> (f64, f64) {
        // Flip the vertical axis: lattice y grows upward.
        (
            margin + (p.x - window.min.x) as f64 * cell,
            margin + (window.max.y - p.y) as f64 * cell,
        )
    };
    let mut canvas = Canvas::new(
        2.0 * margin + window.width() as f64 * cell,
        2.0 * margin + window.height() as f64 * cell,
    );

    if let Some(dec) = decorated {
        for site in dec.explored.sites() {
            let (x, y) = to_xy(site);
            canvas.rect(
                x - cell / 2.0,
                y - cell / 2.0,
                cell,
                cell,
                "fill:#d9d9d9;stroke:none",
            );
        }
    }

    for (i, rect) in plan.rects().iter().enumerate() {
        let b = rect.bounds();
        let (x0, y0) = to_xy(Point2::new(b.min.x, b.max.y));
        canvas.rect(
            x0,
            y0,
            (b.width() - 1) as f64 * cell + cell,
            (b.height() - 1) as f64 * cell + cell,
            "fill:none;stroke:#555555;stroke-width:1",
        );
        let bottom = plan.bottom_sites(i as u32 + 1);
        let (bx0, by0) = to_xy(*bottom.first().unwrap());
        let (bx1, by1) = to_xy(*bottom.last().unwrap());
        canvas.line(bx0, by0, bx1, by1, "stroke:#000000;stroke-width:3");
    }

    if let Some(dec) = decorated {
        let pts: Vec<(f64, f64)> = dec.path.vertices().iter().map(|&v| to_xy(v)).collect();
        canvas.polyline(&pts, "fill:none;stroke:#c62828;stroke-width:2");
        for &i in &dec.gaps {
            let (x, y) = to_xy(dec.path.vertices()[i]);
            canvas.circle(x, y, cell * 0.45, "fill:#1a237e;stroke:none");
        }
        for y_site in dec.thread_sites() {
            let (x, y) = to_xy(y_site);
            canvas.circle(x, y, cell * 0.35, "fill:none;stroke:#2e7d32;stroke-width:1.5");
        }
    }

    canvas.render()
}

/// One plotted series: a label and (x, y, ci half-width) points.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

/// Curve plot with axes, tick labels, per-point confidence whiskers and an
/// optional horizontal reference line.
pub fn render_curves(
    x_label: &str,
    y_label: &str,
    series: &[Series],
    y_reference: Option<f64>,
) -> String {
    let (w, h) = (800.0, 520.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 20.0, 50.0);
    let mut canvas = Canvas::new(w, h);

    let all: Vec<&(f64, f64, f64)> = series.iter().flat_map(|s| &s.points).collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (0.0f64, 1.0f64);
    for &&(x, y, ci) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y - ci);
        y1 = y1.max(y + ci);
    }
    if !x0.is_finite() || x0 == x1 {
        x0 = 0.0;
        x1 = 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    canvas.line(ml, h - mb, w - mr, h - mb, "stroke:#000;stroke-width:1");
    canvas.line(ml, mt, ml, h - mb, "stroke:#000;stroke-width:1");
    for t in 0..=5 {
        let fx = x0 + (x1 - x0) * t as f64 / 5.0;
        canvas.line(px(fx), h - mb, px(fx), h - mb + 5.0, "stroke:#000;stroke-width:1");
        canvas.text(px(fx) - 14.0, h - mb + 18.0, 11.0, &format!("{fx:.3}"));
        let fy = y0 + (y1 - y0) * t as f64 / 5.0;
        canvas.line(ml - 5.0, py(fy), ml, py(fy), "stroke:#000;stroke-width:1");
        canvas.text(ml - 52.0, py(fy) + 4.0, 11.0, &format!("{fy:.2}"));
    }
    canvas.text(w / 2.0 - 30.0, h - 12.0, 12.0, x_label);
    canvas.text(8.0, mt + 8.0, 12.0, y_label);

    if let Some(yr) = y_reference {
        canvas.line(ml, py(yr), w - mr, py(yr), "stroke:#888;stroke-width:1;stroke-dasharray:6 4");
        canvas.text(w - mr - 40.0, py(yr) - 4.0, 11.0, &format!("{yr:.2}"));
    }

    let palette = ["#c62828", "#1565c0", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f"];
    for (k, s) in series.iter().enumerate() {
        let color = palette[k % palette.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().map(|&(x, y, _)| (px(x), py(y))).collect();
        canvas.polyline(&pts, &format!("fill:none;stroke:{color};stroke-width:1.5"));
        for &(x, y, ci) in &s.points {
            if ci > 0.0 && ci.is_finite() {
                canvas.line(px(x), py(y - ci), px(x), py(y + ci), &format!("stroke:{color};stroke-width:1"));
                canvas.line(px(x) - 3.0, py(y - ci), px(x) + 3.0, py(y - ci), &format!("stroke:{color};stroke-width:1"));
                canvas.line(px(x) - 3.0, py(y + ci), px(x) + 3.0, py(y + ci), &format!("stroke:{color};stroke-width:1"));
            }
            canvas.circle(px(x), py(y), 2.5, &format!("fill:{color};stroke:none"));
        }
        canvas.text(w - mr - 150.0, mt + 16.0 * (k as f64 + 1.0), 12.0, &s.label);
        canvas.line(
            w - mr - 175.0,
            mt + 16.0 * (k as f64 + 1.0) - 4.0,
            w - mr - 155.0,
            mt + 16.0 * (k as f64 + 1.0) - 4.0,
            &format!("stroke:{color};stroke-width:2"),
        );
    }

    canvas.render()
}

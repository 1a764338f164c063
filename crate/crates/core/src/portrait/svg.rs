use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{NullclineKind, PhasePortrait, PortraitError, Window};
use crate::stability::StabilityClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    /// Space around the plot area for ticks and labels, pixels.
    pub margin: f64,
    /// Arc length between trajectory arrowheads, pixels.
    pub arrow_spacing: f64,
    pub ticks: usize,
    pub marker_radius: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { width: 720.0, height: 720.0, margin: 72.0, arrow_spacing: 90.0, ticks: 5, marker_radius: 6.0 }
    }
}

struct Frame {
    window: Window,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let x = self.left + (p[0] - self.window.d1.0) / self.window.width() * self.w;
        let y = self.top + self.h - (p[1] - self.window.d2.0) / self.window.height() * self.h;
        (x, y)
    }
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.abs().log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

/// Pixel polyline with points closer than half a pixel merged.
fn pixel_path(frame: &Frame, points: &[[f64; 2]]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let q = frame.px(*p);
        let keep = match out.last() {
            None => true,
            Some(&(x, y)) => (q.0 - x).hypot(q.1 - y) >= 0.5 || i + 1 == points.len(),
        };
        if keep && q.0.is_finite() && q.1.is_finite() {
            out.push(q);
        }
    }
    out
}

fn polyline_attr(path: &[(f64, f64)]) -> String {
    let mut s = String::with_capacity(path.len() * 16);
    for (i, (x, y)) in path.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

fn arrowheads(path: &[(f64, f64)], spacing: f64, size: f64) -> Vec<String> {
    let mut out = Vec::new();
    let mut next = 0.5 * spacing;
    let mut walked = 0.0;
    for pair in path.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        let len = (x1 - x0).hypot(y1 - y0);
        if len == 0.0 {
            continue;
        }
        let (ux, uy) = ((x1 - x0) / len, (y1 - y0) / len);
        while walked + len >= next {
            let s = next - walked;
            let (tx, ty) = (x0 + ux * s, y0 + uy * s);
            let (bx, by) = (tx - ux * size, ty - uy * size);
            let (nx, ny) = (-uy * size * 0.5, ux * size * 0.5);
            out.push(format!("M{tx:.2},{ty:.2} L{:.2},{:.2} L{:.2},{:.2} Z", bx + nx, by + ny, bx - nx, by - ny));
            next += spacing;
        }
        walked += len;
    }
    out
}

/// Window corners clipped to the half-plane `d1 + d2 >= n`.
fn irrelevant_region(window: &Window, n: f64) -> Vec<[f64; 2]> {
    let corners = [
        [window.d1.0, window.d2.0],
        [window.d1.1, window.d2.0],
        [window.d1.1, window.d2.1],
        [window.d1.0, window.d2.1],
    ];
    let excess = |p: &[f64; 2]| p[0] + p[1] - n;
    let mut out = Vec::new();
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let (fa, fb) = (excess(&a), excess(&b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa > 0.0 && fb < 0.0) || (fa < 0.0 && fb > 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn marker(class: StabilityClass, x: f64, y: f64, r: f64) -> String {
    let circle = |cls: &str, fill: &str| {
        format!(
            "<circle class=\"equilibrium {cls}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\" stroke=\"#000\" stroke-width=\"1.5\"/>"
        )
    };
    match class {
        StabilityClass::StableNode | StabilityClass::StableSpiral => circle("stable", "#000"),
        StabilityClass::UnstableNode | StabilityClass::UnstableSpiral => circle("unstable", "#fff"),
        StabilityClass::Center | StabilityClass::NonHyperbolic => circle("nonhyperbolic", "#999"),
        StabilityClass::Saddle => format!(
            "<g class=\"equilibrium saddle\"><circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"#fff\" stroke=\"#000\" stroke-width=\"1.5\"/><path d=\"M{:.2},{y:.2} A{r:.2},{r:.2} 0 0 0 {:.2},{y:.2} Z\" fill=\"#000\"/></g>",
            x - r,
            x + r
        ),
    }
}

/// Renders a portrait as a standalone SVG 1.1 document. Output depends only
/// on the inputs.
pub fn render_svg(portrait: &PhasePortrait, style: &SvgStyle) -> Result<String, PortraitError> {
    let window = portrait.window;
    window.check()?;
    let n = portrait.coefficients.n_total;
    let frame = Frame {
        window,
        left: style.margin,
        top: style.margin * 0.5,
        w: style.width - 1.5 * style.margin,
        h: style.height - 1.5 * style.margin,
    };
    let mut s = String::new();
    let (w, h) = (style.width, style.height);
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<title>Phase portrait of the reduced two-drug model</title>");
    let _ = writeln!(
        s,
        "<defs><clipPath id=\"plot-area\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath></defs>",
        frame.left, frame.top, frame.w, frame.h
    );
    let _ =
        writeln!(s, "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"#fff\"/>");
    let _ = writeln!(s, "<g clip-path=\"url(#plot-area)\">");

    let region = irrelevant_region(&window, n);
    if region.len() >= 3 {
        let pts = polyline_attr(&region.iter().map(|p| frame.px(*p)).collect::<Vec<_>>());
        let _ = writeln!(s, "<polygon class=\"irrelevant\" points=\"{pts}\" fill=\"#eee\" stroke=\"none\"/>");
    }

    let _ = writeln!(s, "<g class=\"trajectories\" fill=\"none\" stroke=\"#888\" stroke-width=\"0.8\">");
    for traj in &portrait.trajectories {
        let pts: Vec<[f64; 2]> = traj.samples.iter().map(|p| p.x).collect();
        let path = pixel_path(&frame, &pts);
        if path.len() < 2 {
            continue;
        }
        let _ = writeln!(s, "<polyline class=\"trajectory\" points=\"{}\"/>", polyline_attr(&path));
        for d in arrowheads(&path, style.arrow_spacing, 7.0) {
            let _ = writeln!(s, "<path class=\"arrow\" d=\"{d}\" fill=\"#888\" stroke=\"none\"/>");
        }
    }
    let _ = writeln!(s, "</g>");

    for line in &portrait.nullclines {
        let colour = match line.kind {
            NullclineKind::D1Axis | NullclineKind::D1Interior => "#1f5fbf",
            NullclineKind::D2Axis | NullclineKind::D2Interior => "#c0392b",
        };
        let (x0, y0) = frame.px(line.start);
        let (x1, y1) = frame.px(line.end);
        let _ = writeln!(
            s,
            "<line class=\"nullcline\" data-label=\"{}\" x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"{colour}\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
            line.kind.label()
        );
    }

    if let Some(line) = portrait.continuum {
        if let Some([a, b]) = window.clip_line(line.a, line.b, line.c) {
            let (x0, y0) = frame.px(a);
            let (x1, y1) = frame.px(b);
            let _ = writeln!(
                s,
                "<line class=\"continuum\" x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"#2e8b57\" stroke-width=\"3\"/>"
            );
            let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let _ = writeln!(
                s,
                "<text class=\"continuum-label\" x=\"{:.2}\" y=\"{:.2}\" fill=\"#2e8b57\">continuum of equilibria</text>",
                mx + 8.0,
                my - 8.0
            );
        }
    }

    let _ = writeln!(s, "<g class=\"separatrices\" fill=\"none\" stroke=\"#000\" stroke-width=\"2.5\">");
    for branch in &portrait.separatrices {
        let path = pixel_path(&frame, &branch.points);
        if path.len() >= 2 {
            let _ = writeln!(
                s,
                "<polyline class=\"separatrix {}\" points=\"{}\"/>",
                match branch.manifold {
                    super::Manifold::Stable => "stable",
                    super::Manifold::Unstable => "unstable",
                },
                polyline_attr(&path)
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</g>");

    // Axes and ticks.
    let (x_axis_y, y_axis_x) = (frame.top + frame.h, frame.left);
    let _ = writeln!(
        s,
        "<rect class=\"frame\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#000\"/>",
        frame.left, frame.top, frame.w, frame.h
    );
    let ticks = style.ticks.max(1);
    for k in 0..=ticks {
        let f = k as f64 / ticks as f64;
        let v1 = window.d1.0 + f * window.width();
        let v2 = window.d2.0 + f * window.height();
        let (x, _) = frame.px([v1, window.d2.0]);
        let (_, y) = frame.px([window.d1.0, v2]);
        let _ = writeln!(
            s,
            "<line class=\"tick\" x1=\"{x:.2}\" y1=\"{x_axis_y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            x_axis_y + 5.0,
            x_axis_y + 19.0,
            tick_label(v1, window.width() / ticks as f64)
        );
        let _ = writeln!(
            s,
            "<line class=\"tick\" x1=\"{y_axis_x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#000\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            y_axis_x - 5.0,
            y_axis_x - 8.0,
            y + 4.0,
            tick_label(v2, window.height() / ticks as f64)
        );
    }
    let unit = if n == 1.0 { "fraction of N" } else { "persons" };
    let _ = writeln!(
        s,
        "<text class=\"axis-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">D1 ({unit})</text>",
        frame.left + 0.5 * frame.w,
        h - 12.0
    );
    let _ = writeln!(
        s,
        "<text class=\"axis-label\" transform=\"translate({:.2},{:.2}) rotate(-90)\" text-anchor=\"middle\">D2 ({unit})</text>",
        18.0,
        frame.top + 0.5 * frame.h
    );

    for e in portrait.marked_equilibria() {
        let (x, y) = frame.px(e.equilibrium.location.to_array());
        let _ = writeln!(s, "{}", marker(e.stability.class, x, y, style.marker_radius));
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

//! A small deterministic SVG scene: polylines and markers in data
//! coordinates, rendered with linear axes (2D) or a fixed parallel
//! projection (3D).

use std::fmt::Write;

use super::style::{hex, GridKind, LineKind, LineStyle, MarkerShape, MarkerStyle, PlotStyle};
use crate::numfmt::sig6;

/// Azimuth and elevation of the 3D view, in degrees.
pub const VIEW_AZ: f64 = -37.5;
pub const VIEW_EL: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    /// Data coordinates; the third entry is ignored in 2D plots. Non-finite
    /// points break the line.
    pub points: Vec<[f64; 3]>,
    pub style: LineStyle,
    /// Space separated SVG class list, e.g. `branch SEQ`.
    pub class: String,
    pub branch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub at: [f64; 3],
    pub style: MarkerStyle,
    pub class: String,
    /// Tooltip text, usually the labeled point name.
    pub label: String,
    pub branch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LegendKey {
    Line(LineStyle),
    Marker(MarkerStyle),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    /// Two or three axis labels.
    pub axes: Vec<String>,
    pub lines: Vec<Line>,
    pub markers: Vec<Marker>,
    pub legend: Vec<(String, LegendKey)>,
}

impl Plot {
    pub fn new(title: impl Into<String>, axes: Vec<String>) -> Plot {
        Plot { title: title.into(), axes, ..Plot::default() }
    }

    pub fn is_3d(&self) -> bool {
        self.axes.len() == 3
    }

    pub fn add_legend(&mut self, name: &str, key: LegendKey) {
        if !self.legend.iter().any(|(n, _)| n == name) {
            self.legend.push((name.to_string(), key));
        }
    }

    /// Draw `other` on top of this plot.
    pub fn overlay(&mut self, other: Plot) {
        self.lines.extend(other.lines);
        self.markers.extend(other.markers);
        for (n, k) in other.legend {
            self.add_legend(&n, k);
        }
    }

    pub fn to_svg(&self, style: &PlotStyle) -> String {
        Renderer::new(self, style).render()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Debug, Clone, Copy)]
struct Range1 {
    lo: f64,
    hi: f64,
}

impl Range1 {
    fn empty() -> Range1 {
        Range1 { lo: f64::INFINITY, hi: f64::NEG_INFINITY }
    }
    fn add(&mut self, x: f64) {
        if x.is_finite() {
            self.lo = self.lo.min(x);
            self.hi = self.hi.max(x);
        }
    }
    /// Non-degenerate, finite range.
    fn settle(self) -> Range1 {
        if !self.lo.is_finite() {
            return Range1 { lo: 0.0, hi: 1.0 };
        }
        if self.hi - self.lo <= f64::EPSILON * self.lo.abs().max(1.0) {
            let pad = if self.lo == 0.0 { 1.0 } else { 0.05 * self.lo.abs() };
            return Range1 { lo: self.lo - pad, hi: self.hi + pad };
        }
        self
    }
    fn unit(&self, x: f64) -> f64 {
        (x - self.lo) / (self.hi - self.lo)
    }
}

/// Tick positions with a 1-2-5 step, plus the number of decimals to print.
fn ticks(r: Range1) -> (Vec<f64>, usize) {
    // smallest 1-2-5 step giving at most 8 intervals
    let span = r.hi - r.lo;
    let mag = 10f64.powf((span / 8.0).log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 8.0).unwrap_or(10.0 * mag);
    let first = (r.lo / step).ceil() as i64;
    let last = (r.hi / step).floor() as i64;
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn tick_text(x: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, x);
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        s
    }
}

fn ranges_of(plot: &Plot) -> [Range1; 3] {
    let mut ranges = [Range1::empty(); 3];
    let pts = plot.lines.iter().flat_map(|l| l.points.iter()).chain(plot.markers.iter().map(|m| &m.at));
    for p in pts {
        if p.iter().take(plot.axes.len()).all(|x| x.is_finite()) {
            for (r, x) in ranges.iter_mut().zip(p) {
                r.add(*x);
            }
        }
    }
    ranges.map(Range1::settle)
}

/// Axis ranges the renderer will use for `plot`, as `(lo, hi)` pairs.
pub fn data_bounds(plot: &Plot) -> [(f64, f64); 3] {
    ranges_of(plot).map(|r| (r.lo, r.hi))
}

struct Renderer<'a> {
    plot: &'a Plot,
    style: &'a PlotStyle,
    w: f64,
    h: f64,
    /// Plot area: left, top, right, bottom.
    area: [f64; 4],
    ranges: [Range1; 3],
    /// Projected bounds in 3D.
    screen: [Range1; 2],
}

impl<'a> Renderer<'a> {
    fn new(plot: &'a Plot, style: &'a PlotStyle) -> Renderer<'a> {
        let (w, h) = style.pixel_size();
        let f = style.font_size;
        let area = [4.5 * f + 20.0, 2.5 * f + 10.0, w - 15.0, h - 3.5 * f - 10.0];
        let ranges = ranges_of(plot);
        let mut r = Renderer { plot, style, w, h, area, ranges, screen: [Range1::empty(); 2] };
        if plot.is_3d() {
            let mut sx = Range1::empty();
            let mut sy = Range1::empty();
            for corner in 0..8 {
                let u = [(corner & 1) as f64, ((corner >> 1) & 1) as f64, ((corner >> 2) & 1) as f64];
                let (x, y) = project(u);
                sx.add(x);
                sy.add(y);
            }
            r.screen = [sx, sy];
        }
        r
    }

    /// Data point to SVG coordinates.
    fn map(&self, p: &[f64; 3]) -> Option<(f64, f64)> {
        let dims = self.plot.axes.len().max(2);
        if p.iter().take(dims).any(|x| !x.is_finite()) {
            return None;
        }
        let [l, t, rr, b] = self.area;
        if self.plot.is_3d() {
            let u = [self.ranges[0].unit(p[0]), self.ranges[1].unit(p[1]), self.ranges[2].unit(p[2])];
            Some(self.unit_to_screen(u))
        } else {
            let x = l + self.ranges[0].unit(p[0]) * (rr - l);
            let y = b - self.ranges[1].unit(p[1]) * (b - t);
            Some((x, y))
        }
    }

    fn unit_to_screen(&self, u: [f64; 3]) -> (f64, f64) {
        let [l, t, rr, b] = self.area;
        let (x, y) = project(u);
        let [sx, sy] = self.screen;
        // keep the aspect ratio of the projected box
        let scale = ((rr - l) / (sx.hi - sx.lo)).min((b - t) / (sy.hi - sy.lo));
        let cx = 0.5 * (l + rr) + (x - 0.5 * (sx.lo + sx.hi)) * scale;
        let cy = 0.5 * (t + b) - (y - 0.5 * (sy.lo + sy.hi)) * scale;
        (cx, cy)
    }

    fn render(&self) -> String {
        let s = self.style;
        if let Some(res) = &s.resolution {
            log::warn!("resolution `{}` ignored for vector output", res);
        }
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}{}" height="{}{}" viewBox="0 0 {} {}" font-family="{}" font-size="{}">"#,
            sig6(s.width),
            s.units,
            sig6(s.height),
            s.units,
            sig6(self.w),
            sig6(self.h),
            escape(&s.font_name),
            sig6(s.font_size)
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&self.plot.title));
        let _ =
            writeln!(out, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, sig6(self.w), sig6(self.h));
        if self.plot.is_3d() {
            self.axes_3d(&mut out);
        } else {
            self.axes_2d(&mut out);
        }
        out.push_str("<g class=\"data\" fill=\"none\">\n");
        for line in &self.plot.lines {
            self.polyline(&mut out, line);
        }
        out.push_str("</g>\n<g class=\"markers\">\n");
        for m in &self.plot.markers {
            self.marker(&mut out, m);
        }
        out.push_str("</g>\n");
        self.legend(&mut out);
        out.push_str("</svg>\n");
        out
    }

    fn polyline(&self, out: &mut String, line: &Line) {
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for p in &line.points {
            match self.map(p) {
                Some(q) => runs.last_mut().expect("one run").push(q),
                None => {
                    if !runs.last().expect("one run").is_empty() {
                        runs.push(Vec::new());
                    }
                }
            }
        }
        let dash = match line.style.line {
            LineKind::Solid => String::new(),
            LineKind::Dashed => {
                format!(r#" stroke-dasharray="{},{}""#, sig6(4.0 * line.style.width), sig6(3.0 * line.style.width))
            }
        };
        let data = line.branch.map(|b| format!(r#" data-branch="{}""#, b)).unwrap_or_default();
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{},{}", sig6(*x), sig6(*y))).collect();
            let _ = writeln!(
                out,
                r#"<polyline class="{}"{} stroke="{}" stroke-width="{}"{} points="{}"/>"#,
                line.class,
                data,
                hex(line.style.color),
                sig6(line.style.width),
                dash,
                pts.join(" ")
            );
        }
    }

    fn marker(&self, out: &mut String, m: &Marker) {
        let Some((x, y)) = self.map(&m.at) else { return };
        let data = m.branch.map(|b| format!(r#" data-branch="{}""#, b)).unwrap_or_default();
        let color = hex(m.style.color);
        let r = 0.5 * m.style.size;
        let _ = match m.style.shape {
            MarkerShape::Square => writeln!(
                out,
                r#"<rect class="{}"{} x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}"><title>{}</title></rect>"#,
                m.class,
                data,
                sig6(x - r),
                sig6(y - r),
                sig6(m.style.size),
                sig6(m.style.size),
                color,
                color,
                escape(&m.label)
            ),
            MarkerShape::Circle => writeln!(
                out,
                r#"<circle class="{}"{} cx="{}" cy="{}" r="{}" fill="{}" stroke="{}"><title>{}</title></circle>"#,
                m.class,
                data,
                sig6(x),
                sig6(y),
                sig6(r),
                color,
                color,
                escape(&m.label)
            ),
        };
    }

    fn grid_attrs(&self) -> Option<String> {
        let dash = match self.style.grid {
            GridKind::None => return None,
            GridKind::Solid => "",
            GridKind::Dashed => r#" stroke-dasharray="4,3""#,
            GridKind::Dotted => r#" stroke-dasharray="1,3""#,
        };
        Some(format!(
            r##"stroke="#808080" stroke-opacity="{}" stroke-width="0.5"{}"##,
            sig6(self.style.grid_alpha),
            dash
        ))
    }

    fn axes_2d(&self, out: &mut String) {
        let [l, t, r, b] = self.area;
        let f = self.style.font_size;
        let (xt, xd) = ticks(self.ranges[0]);
        let (yt, yd) = ticks(self.ranges[1]);
        if let Some(attrs) = self.grid_attrs() {
            let _ = writeln!(out, "<g class=\"grid\" {}>", attrs);
            for x in &xt {
                let (sx, _) = self.map(&[*x, self.ranges[1].lo, 0.0]).expect("finite tick");
                let _ = writeln!(out, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#, sig6(sx), sig6(t), sig6(b));
            }
            for y in &yt {
                let (_, sy) = self.map(&[self.ranges[0].lo, *y, 0.0]).expect("finite tick");
                let _ = writeln!(out, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}"/>"#, sig6(l), sig6(sy), sig6(r));
            }
            out.push_str("</g>\n");
        }
        out.push_str("<g class=\"axes\" stroke=\"#000000\" fill=\"#000000\">\n");
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none"/>"#,
            sig6(l),
            sig6(t),
            sig6(r - l),
            sig6(b - t)
        );
        for x in &xt {
            let (sx, _) = self.map(&[*x, self.ranges[1].lo, 0.0]).expect("finite tick");
            let _ = writeln!(
                out,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/><text x="{0}" y="{3}" text-anchor="middle" stroke="none">{4}</text>"#,
                sig6(sx),
                sig6(b),
                sig6(b - 5.0),
                sig6(b + 1.2 * f),
                tick_text(*x, xd)
            );
        }
        for y in &yt {
            let (_, sy) = self.map(&[self.ranges[0].lo, *y, 0.0]).expect("finite tick");
            let _ = writeln!(
                out,
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}"/><text x="{3}" y="{4}" text-anchor="end" stroke="none">{5}</text>"#,
                sig6(l),
                sig6(sy),
                sig6(l + 5.0),
                sig6(l - 4.0),
                sig6(sy + 0.35 * f),
                tick_text(*y, yd)
            );
        }
        let _ = writeln!(
            out,
            r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
            sig6(0.5 * (l + r)),
            sig6(b + 2.6 * f),
            escape(self.plot.axes.first().map_or("", String::as_str))
        );
        let _ = writeln!(
            out,
            r#"<text class="ylabel" x="{0}" y="{1}" text-anchor="middle" stroke="none" transform="rotate(-90 {0} {1})">{2}</text>"#,
            sig6(l - 3.8 * f),
            sig6(0.5 * (t + b)),
            escape(self.plot.axes.get(1).map_or("", String::as_str))
        );
        let _ = writeln!(
            out,
            r#"<text class="title" x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
            sig6(0.5 * (l + r)),
            sig6(t - 0.8 * f),
            escape(&self.plot.title)
        );
        out.push_str("</g>\n");
    }

    fn axes_3d(&self, out: &mut String) {
        let f = self.style.font_size;
        out.push_str("<g class=\"axes\" stroke=\"#000000\" fill=\"#000000\">\n");
        let origin = self.unit_to_screen([0.0, 0.0, 0.0]);
        for k in 0..3 {
            let mut end = [0.0; 3];
            end[k] = 1.0;
            let e = self.unit_to_screen(end);
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                sig6(origin.0),
                sig6(origin.1),
                sig6(e.0),
                sig6(e.1)
            );
            let r = self.ranges[k];
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
                sig6(e.0),
                sig6(e.1 + 1.2 * f),
                sig6(r.hi)
            );
            let mut mid = [0.0; 3];
            mid[k] = 0.5;
            let m = self.unit_to_screen(mid);
            let _ = writeln!(
                out,
                r#"<text class="axis{}" x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
                k,
                sig6(m.0),
                sig6(m.1 + 1.4 * f),
                escape(&self.plot.axes[k])
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" stroke="none">({}, {}, {})</text>"#,
            sig6(origin.0 - 4.0),
            sig6(origin.1 + 1.2 * f),
            sig6(self.ranges[0].lo),
            sig6(self.ranges[1].lo),
            sig6(self.ranges[2].lo)
        );
        let [l, t, r, _] = self.area;
        let _ = writeln!(
            out,
            r#"<text class="title" x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
            sig6(0.5 * (l + r)),
            sig6(t - 0.8 * f),
            escape(&self.plot.title)
        );
        out.push_str("</g>\n");
    }

    fn legend(&self, out: &mut String) {
        if self.plot.legend.is_empty() {
            return;
        }
        let f = self.style.font_size;
        let row = 1.3 * f;
        let chars = self.plot.legend.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0) as f64;
        let width = (3.0 + 0.6 * chars) * f;
        let x0 = self.area[2] - width - 0.2 * f;
        let y0 = self.area[1] + 0.5 * f;
        out.push_str("<g class=\"legend\">\n");
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff" fill-opacity="0.8" stroke="#808080" stroke-width="0.5"/>"##,
            sig6(x0 - 0.4 * f),
            sig6(y0 - 0.4 * f),
            sig6(width),
            sig6(row * self.plot.legend.len() as f64 + 0.4 * f)
        );
        for (k, (name, key)) in self.plot.legend.iter().enumerate() {
            let y = y0 + row * (k as f64 + 0.5);
            match key {
                LegendKey::Line(ls) => {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="{3}" stroke-width="{4}"/>"#,
                        sig6(x0),
                        sig6(x0 + 2.0 * f),
                        sig6(y),
                        hex(ls.color),
                        sig6(ls.width)
                    );
                }
                LegendKey::Marker(ms) => {
                    let c = hex(ms.color);
                    let r = 0.5 * ms.size;
                    let _ = match ms.shape {
                        MarkerShape::Square => writeln!(
                            out,
                            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                            sig6(x0 + f - r),
                            sig6(y - r),
                            sig6(ms.size),
                            sig6(ms.size),
                            c
                        ),
                        MarkerShape::Circle => writeln!(
                            out,
                            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                            sig6(x0 + f),
                            sig6(y),
                            sig6(r),
                            c
                        ),
                    };
                }
            }
            let _ =
                writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, sig6(x0 + 2.5 * f), sig6(y + 0.35 * f), escape(name));
        }
        out.push_str("</g>\n");
    }
}

/// Parallel projection of a point of the unit cube.
pub fn project(u: [f64; 3]) -> (f64, f64) {
    let az = VIEW_AZ.to_radians();
    let el = VIEW_EL.to_radians();
    let x = az.cos() * u[0] + az.sin() * u[1];
    let y = -el.sin() * az.sin() * u[0] + el.sin() * az.cos() * u[1] + el.cos() * u[2];
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps() {
        let (t, d) = ticks(Range1 { lo: 0.0, hi: 1.0 });
        assert_eq!(t.len(), 6);
        assert_eq!(d, 1);
        let (t, d) = ticks(Range1 { lo: -80.0, hi: 60.0 });
        assert_eq!(t.first(), Some(&-80.0));
        assert_eq!(d, 0);
        assert_eq!(tick_text(-0.0, 2), "0");
    }

    #[test]
    fn breaks_on_nan() {
        let mut p = Plot::new("t", vec!["x".into(), "y".into()]);
        p.lines.push(Line {
            points: vec![[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [f64::NAN, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 1.0, 0.0]],
            style: PlotStyle::default().trace,
            class: "trace".into(),
            branch: None,
        });
        let svg = p.to_svg(&PlotStyle::default());
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn empty_is_valid() {
        let svg = Plot::new("e", vec!["x".into(), "y".into()]).to_svg(&PlotStyle::default());
        assert!(svg.starts_with("<?xml") && svg.ends_with("</svg>\n"));
        let svg = Plot::new("e", vec!["x".into(), "y".into(), "z".into()]).to_svg(&PlotStyle::default());
        assert!(svg.contains("class=\"axis2\""));
    }

    #[test]
    fn projection_view() {
        // x runs to the upper right, z straight up
        let (x, y) = project([1.0, 0.0, 0.0]);
        assert!(x > 0.0 && y > 0.0);
        assert_eq!(project([0.0, 0.0, 1.0]).0, 0.0);
    }
}

//! Top-down frames of a run (SVG, optional GIF animation) and summary charts.
//!
//! Frames are built as a small display list first, then written either as
//! SVG text or rasterized. Both outputs are pure functions of their inputs.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cues::{ArrowFill, ArrowState, ARROW_HEAD_FRACTION, ARROW_HEAD_WIDTH_FRACTION, ARROW_SHAFT_WIDTH_FRACTION};
use crate::geometry::{Point, Pose2D};
use crate::scenario::ScenarioSpec;
use crate::sim::{Trace, TraceRecord};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("render I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace has no records")]
    EmptyTrace,
    #[error("chart has no facets")]
    EmptyChart,
    #[error("facet '{0}' has no data")]
    EmptyFacet(String),
    #[error("invalid style: {0}")]
    Style(String),
    #[error("GIF encoding: {0}")]
    Gif(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    pub background: String,
    pub wall: String,
    pub obstacle: String,
    pub robot: String,
    pub goal: String,
    pub observer: String,
    pub arrow: String,
    pub arrow_dim: String,
    pub led: String,
    pub text: String,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            background: "#FFFFFF".into(),
            wall: "#111111".into(),
            obstacle: "#7F7F7F".into(),
            robot: "#3D5A80".into(),
            goal: "#0074D9".into(),
            observer: "#B10DC9".into(),
            arrow: "#2ECC40".into(),
            arrow_dim: "#B8EFC0".into(),
            led: "#FF851B".into(),
            text: "#333333".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Style {
    /// SVG pixels per meter.
    pub scale: f64,
    /// GIF pixels per meter.
    pub raster_scale: f64,
    /// Blank border around the scene, meters.
    pub margin: f64,
    /// Render every n-th record.
    pub stride: usize,
    pub colors: Palette,
}

impl Default for Style {
    fn default() -> Self {
        Self {
            scale: 100.0,
            raster_scale: 40.0,
            margin: 0.5,
            stride: 1,
            colors: Palette::default(),
        }
    }
}

impl Style {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RenderError> {
        let text = fs::read_to_string(path)?;
        let style: Style = toml::from_str(&text).map_err(|e| RenderError::Style(e.to_string()))?;
        style.validate()?;
        Ok(style)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.scale > 0.0 && self.raster_scale > 0.0) {
            return Err(RenderError::Style("scales must be positive".into()));
        }
        if self.stride == 0 {
            return Err(RenderError::Style("stride must be at least 1".into()));
        }
        for c in self.palette_entries() {
            parse_hex(c).ok_or_else(|| RenderError::Style(format!("bad color '{c}'")))?;
        }
        Ok(())
    }

    fn palette_entries(&self) -> [&str; 10] {
        let c = &self.colors;
        [
            &c.background,
            &c.wall,
            &c.obstacle,
            &c.robot,
            &c.goal,
            &c.observer,
            &c.arrow,
            &c.arrow_dim,
            &c.led,
            &c.text,
        ]
    }
}

fn parse_hex(s: &str) -> Option<[u8; 3]> {
    let h = s.strip_prefix('#')?;
    if h.len() != 6 {
        return None;
    }
    let v = u32::from_str_radix(h, 16).ok()?;
    Some([(v >> 16) as u8, (v >> 8) as u8, v as u8])
}

/// World-to-canvas mapping, fixed for every frame of a scenario. World y is up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    min: Point,
    max: Point,
    margin: f64,
    scale: f64,
}

impl Canvas {
    pub fn for_scenario(spec: &ScenarioSpec, margin: f64, scale: f64) -> Self {
        let (min, max) = spec.bounds();
        Self {
            min,
            max,
            margin,
            scale,
        }
    }

    pub fn width(&self) -> f64 {
        (self.max.x - self.min.x + 2.0 * self.margin) * self.scale
    }

    pub fn height(&self) -> f64 {
        (self.max.y - self.min.y + 2.0 * self.margin) * self.scale
    }

    pub fn to_px(&self, p: Point) -> Point {
        Point::new(
            (p.x - self.min.x + self.margin) * self.scale,
            (self.max.y - p.y + self.margin) * self.scale,
        )
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// One or more closed rings, filled with the nonzero rule.
    Rings {
        class: &'static str,
        rings: Vec<Vec<Point>>,
        fill: Option<String>,
        stroke: Option<(String, f64)>,
    },
    Line {
        class: &'static str,
        a: Point,
        b: Point,
        color: String,
        width: f64,
    },
    Circle {
        class: &'static str,
        center: Point,
        radius: f64,
        fill: Option<String>,
        stroke: Option<(String, f64)>,
    },
    /// SVG only.
    Text {
        class: &'static str,
        at: Point,
        text: String,
        color: String,
    },
}

/// Shaft dashes (three, with two gaps) and head triangle of a dashed arrow.
fn dashed_arrow_rings(arrow: &ArrowState) -> Vec<Vec<Point>> {
    let len = arrow.tail.distance(arrow.tip);
    if len == 0.0 {
        return Vec::new();
    }
    let ux = (arrow.tip.x - arrow.tail.x) / len;
    let uy = (arrow.tip.y - arrow.tail.y) / len;
    let at = |u: f64, v: f64| Point::new(arrow.tail.x + ux * u - uy * v, arrow.tail.y + uy * u + ux * v);
    let neck = len * (1.0 - ARROW_HEAD_FRACTION);
    let sw = len * ARROW_SHAFT_WIDTH_FRACTION / 2.0;
    let hw = len * ARROW_HEAD_WIDTH_FRACTION / 2.0;
    let piece = neck / 5.0;
    let mut rings: Vec<Vec<Point>> = [0.0, 2.0, 4.0]
        .iter()
        .map(|k| {
            let (u0, u1) = (k * piece, (k + 1.0) * piece);
            vec![at(u0, sw), at(u1, sw), at(u1, -sw), at(u0, -sw)]
        })
        .collect();
    rings.push(vec![at(neck, hw), at(len, 0.0), at(neck, -hw)]);
    rings
}

fn robot_outline(pose: Pose2D, length: f64, width: f64) -> Vec<Point> {
    let (hl, hw) = (length / 2.0, width / 2.0);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        .iter()
        .map(|&(x, y)| pose.to_world(Point::new(x, y)))
        .collect()
}

fn scene(record: &TraceRecord, spec: &ScenarioSpec, style: &Style) -> Vec<Shape> {
    let c = &style.colors;
    let mut shapes = Vec::new();

    for w in spec.walls() {
        shapes.push(Shape::Line {
            class: "wall",
            a: w.a,
            b: w.b,
            color: c.wall.clone(),
            width: 0.05,
        });
    }
    shapes.push(Shape::Rings {
        class: "obstacle",
        rings: vec![spec.obstacle()],
        fill: Some(c.obstacle.clone()),
        stroke: None,
    });
    for (label, goal) in [("G1", spec.goal1), ("G2", spec.goal2)] {
        shapes.push(Shape::Circle {
            class: "goal",
            center: goal.position(),
            radius: 0.12,
            fill: None,
            stroke: Some((c.goal.clone(), 0.03)),
        });
        shapes.push(Shape::Text {
            class: "label",
            at: Point::new(goal.x + 0.18, goal.y + 0.18),
            text: label.to_string(),
            color: c.goal.clone(),
        });
    }
    let obs = spec.observer;
    shapes.push(Shape::Circle {
        class: "observer",
        center: obs.position(),
        radius: 0.2,
        fill: Some(c.observer.clone()),
        stroke: None,
    });
    shapes.push(Shape::Line {
        class: "observer",
        a: obs.position(),
        b: obs.to_world(Point::new(0.45, 0.0)),
        color: c.observer.clone(),
        width: 0.04,
    });

    let pose = record.pose;
    shapes.push(Shape::Rings {
        class: "robot",
        rings: vec![robot_outline(pose, spec.robot.length_m, spec.robot.width_m)],
        fill: Some(c.robot.clone()),
        stroke: None,
    });
    shapes.push(Shape::Line {
        class: "heading",
        a: pose.position(),
        b: pose.to_world(Point::new(spec.robot.length_m / 2.0, 0.0)),
        color: c.background.clone(),
        width: 0.03,
    });

    let lights = &record.cue.lights;
    let hw = spec.robot.width_m / 2.0;
    for (active, side_y) in [(lights.left_active, hw), (lights.right_active, -hw)] {
        if !active {
            continue;
        }
        let (class, fill) = if lights.lit {
            ("led lit", Some(c.led.clone()))
        } else {
            ("led", None)
        };
        shapes.push(Shape::Circle {
            class,
            center: pose.to_world(Point::new(spec.robot.length_m / 4.0, side_y)),
            radius: 0.07,
            fill,
            stroke: Some((c.led.clone(), 0.02)),
        });
    }

    let arrow = &record.cue.arrow;
    if arrow.visible {
        let shape = match (arrow.fill, arrow.lit) {
            (ArrowFill::Solid, _) => Shape::Rings {
                class: "arrow",
                rings: vec![arrow.polygon.clone()],
                fill: Some(c.arrow.clone()),
                stroke: None,
            },
            (ArrowFill::Dashed, true) => Shape::Rings {
                class: "arrow",
                rings: dashed_arrow_rings(arrow),
                fill: Some(c.arrow.clone()),
                stroke: None,
            },
            (ArrowFill::Dashed, false) => Shape::Rings {
                class: "arrow",
                rings: dashed_arrow_rings(arrow),
                fill: None,
                stroke: Some((c.arrow_dim.clone(), 0.01)),
            },
        };
        shapes.push(shape);
    }

    let (min, max) = spec.bounds();
    shapes.push(Shape::Text {
        class: "clock",
        at: Point::new(min.x, max.y + style.margin * 0.4),
        text: format!("t = {:.2} s", record.t),
        color: c.text.clone(),
    });
    shapes
}

fn fmt_paint(fill: &Option<String>, stroke: &Option<(String, f64)>, scale: f64) -> String {
    let mut s = format!(" fill=\"{}\"", fill.as_deref().unwrap_or("none"));
    if let Some((color, w)) = stroke {
        let _ = write!(s, " stroke=\"{color}\" stroke-width=\"{:.2}\"", w * scale);
    }
    s
}

fn shapes_to_svg(shapes: &[Shape], canvas: &Canvas, background: &str) -> String {
    let (w, h) = (canvas.width(), canvas.height());
    let k = canvas.scale();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">"
    );
    let _ = writeln!(out, "<rect class=\"background\" width=\"100%\" height=\"100%\" fill=\"{background}\"/>");
    for shape in shapes {
        match shape {
            Shape::Rings {
                class,
                rings,
                fill,
                stroke,
            } => {
                let mut d = String::new();
                for ring in rings {
                    for (i, p) in ring.iter().enumerate() {
                        let q = canvas.to_px(*p);
                        let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, q.x, q.y);
                    }
                    d.push_str("Z ");
                }
                let _ = writeln!(
                    out,
                    "<path class=\"{class}\" d=\"{}\"{}/>",
                    d.trim_end(),
                    fmt_paint(fill, stroke, k)
                );
            }
            Shape::Line {
                class,
                a,
                b,
                color,
                width,
            } => {
                let (a, b) = (canvas.to_px(*a), canvas.to_px(*b));
                let _ = writeln!(
                    out,
                    "<line class=\"{class}\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"{:.2}\" stroke-linecap=\"round\"/>",
                    a.x, a.y, b.x, b.y, width * k
                );
            }
            Shape::Circle {
                class,
                center,
                radius,
                fill,
                stroke,
            } => {
                let c = canvas.to_px(*center);
                let _ = writeln!(
                    out,
                    "<circle class=\"{class}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\"{}/>",
                    c.x,
                    c.y,
                    radius * k,
                    fmt_paint(fill, stroke, k)
                );
            }
            Shape::Text { class, at, text, color } => {
                let p = canvas.to_px(*at);
                let _ = writeln!(
                    out,
                    "<text class=\"{class}\" x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"{:.0}\" fill=\"{color}\">{}</text>",
                    p.x,
                    p.y,
                    0.25 * k,
                    xml_escape(text)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One top-down SVG frame of a trace record.
pub fn render_frame(record: &TraceRecord, spec: &ScenarioSpec, style: &Style) -> String {
    let canvas = Canvas::for_scenario(spec, style.margin, style.scale);
    shapes_to_svg(&scene(record, spec, style), &canvas, &style.colors.background)
}

struct Rasterizer {
    canvas: Canvas,
    palette: Vec<[u8; 3]>,
}

impl Rasterizer {
    fn new(spec: &ScenarioSpec, style: &Style) -> Self {
        let palette = style
            .palette_entries()
            .iter()
            .map(|c| parse_hex(c).unwrap_or([0, 0, 0]))
            .collect();
        Self {
            canvas: Canvas::for_scenario(spec, style.margin, style.raster_scale),
            palette,
        }
    }

    fn size(&self) -> (u32, u32) {
        (self.canvas.width().ceil() as u32, self.canvas.height().ceil() as u32)
    }

    fn paint(color: &str) -> tiny_skia::Paint<'static> {
        let [r, g, b] = parse_hex(color).unwrap_or([0, 0, 0]);
        let mut paint = tiny_skia::Paint::default();
        paint.set_color_rgba8(r, g, b, 255);
        paint.anti_alias = false;
        paint
    }

    fn ring_path(&self, rings: &[Vec<Point>]) -> Option<tiny_skia::Path> {
        let mut pb = tiny_skia::PathBuilder::new();
        for ring in rings {
            for (i, p) in ring.iter().enumerate() {
                let q = self.canvas.to_px(*p);
                if i == 0 {
                    pb.move_to(q.x as f32, q.y as f32);
                } else {
                    pb.line_to(q.x as f32, q.y as f32);
                }
            }
            pb.close();
        }
        pb.finish()
    }

    fn stroke(&self, width: f64) -> tiny_skia::Stroke {
        tiny_skia::Stroke {
            width: ((width * self.canvas.scale()) as f32).max(1.0),
            line_cap: tiny_skia::LineCap::Round,
            ..Default::default()
        }
    }

    /// Palette-indexed pixels of one frame.
    fn draw(&self, shapes: &[Shape], background: &str) -> Vec<u8> {
        use tiny_skia::{FillRule, PathBuilder, Pixmap, Transform};
        let (w, h) = self.size();
        let mut pm = Pixmap::new(w, h).expect("non-empty canvas");
        let [r, g, b] = parse_hex(background).unwrap_or([255, 255, 255]);
        pm.fill(tiny_skia::Color::from_rgba8(r, g, b, 255));
        let id = Transform::identity();
        for shape in shapes {
            match shape {
                Shape::Rings {
                    rings, fill, stroke, ..
                } => {
                    let Some(path) = self.ring_path(rings) else { continue };
                    if let Some(f) = fill {
                        pm.fill_path(&path, &Self::paint(f), FillRule::Winding, id, None);
                    }
                    if let Some((c, width)) = stroke {
                        pm.stroke_path(&path, &Self::paint(c), &self.stroke(*width), id, None);
                    }
                }
                Shape::Line { a, b, color, width, .. } => {
                    let (a, b) = (self.canvas.to_px(*a), self.canvas.to_px(*b));
                    let mut pb = PathBuilder::new();
                    pb.move_to(a.x as f32, a.y as f32);
                    pb.line_to(b.x as f32, b.y as f32);
                    if let Some(path) = pb.finish() {
                        pm.stroke_path(&path, &Self::paint(color), &self.stroke(*width), id, None);
                    }
                }
                Shape::Circle {
                    center,
                    radius,
                    fill,
                    stroke,
                    ..
                } => {
                    let c = self.canvas.to_px(*center);
                    let r = (radius * self.canvas.scale()) as f32;
                    let Some(path) = PathBuilder::from_circle(c.x as f32, c.y as f32, r.max(1.0)) else {
                        continue;
                    };
                    if let Some(f) = fill {
                        pm.fill_path(&path, &Self::paint(f), FillRule::Winding, id, None);
                    }
                    if let Some((col, width)) = stroke {
                        pm.stroke_path(&path, &Self::paint(col), &self.stroke(*width), id, None);
                    }
                }
                Shape::Text { .. } => {}
            }
        }
        pm.pixels()
            .iter()
            .map(|px| {
                let rgb = [px.red(), px.green(), px.blue()];
                self.palette
                    .iter()
                    .position(|&p| p == rgb)
                    .or_else(|| nearest(&self.palette, rgb))
                    .unwrap_or(0) as u8
            })
            .collect()
    }

    fn palette_bytes(&self) -> Vec<u8> {
        self.palette.iter().flatten().copied().collect()
    }
}

fn nearest(palette: &[[u8; 3]], rgb: [u8; 3]) -> Option<usize> {
    palette
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| {
            p.iter()
                .zip(rgb)
                .map(|(&a, b)| (a as i32 - b as i32).pow(2))
                .sum::<i32>()
        })
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnimationFormat {
    Frames,
    Gif,
}

impl std::str::FromStr for AnimationFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frames" => Ok(Self::Frames),
            "gif" => Ok(Self::Gif),
            other => Err(format!("unknown format '{other}' (expected frames or gif)")),
        }
    }
}

/// Playback rate of an animation that shows every `stride`-th tick.
pub fn animation_fps(dt: f64, stride: usize) -> f64 {
    1.0 / (dt * stride as f64)
}

/// Indices of the records that become frames.
pub fn frame_indices(n_records: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..n_records).step_by(stride.max(1))
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.svg")
}

/// Writes `frame_%06d.svg` files, or a single `animation.gif` played at
/// 1/(dt·stride) frames per second. Returns the files written.
pub fn render_animation(
    trace: &Trace,
    spec: &ScenarioSpec,
    out_dir: impl AsRef<Path>,
    format: AnimationFormat,
    style: &Style,
) -> Result<Vec<PathBuf>, RenderError> {
    if trace.records.is_empty() {
        return Err(RenderError::EmptyTrace);
    }
    style.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    match format {
        AnimationFormat::Frames => frame_indices(trace.len(), style.stride)
            .enumerate()
            .map(|(k, i)| {
                let path = out_dir.join(frame_file_name(k));
                fs::write(&path, render_frame(&trace.records[i], spec, style))?;
                Ok(path)
            })
            .collect(),
        AnimationFormat::Gif => {
            let path = out_dir.join("animation.gif");
            write_gif(trace, spec, style, &path)?;
            Ok(vec![path])
        }
    }
}

fn write_gif(trace: &Trace, spec: &ScenarioSpec, style: &Style, path: &Path) -> Result<(), RenderError> {
    let raster = Rasterizer::new(spec, style);
    let (w, h) = raster.size();
    let (w, h) = (
        u16::try_from(w).map_err(|_| RenderError::Style("raster too wide".into()))?,
        u16::try_from(h).map_err(|_| RenderError::Style("raster too tall".into()))?,
    );
    let gif_err = |e: gif::EncodingError| RenderError::Gif(e.to_string());
    let file = BufWriter::new(File::create(path)?);
    let mut enc = gif::Encoder::new(file, w, h, &raster.palette_bytes()).map_err(gif_err)?;
    enc.set_repeat(gif::Repeat::Infinite).map_err(gif_err)?;
    let delay = (100.0 * trace.header.dt * style.stride as f64).round() as u16;
    for i in frame_indices(trace.len(), style.stride) {
        let pixels = raster.draw(&scene(&trace.records[i], spec, style), &style.colors.background);
        let frame = gif::Frame {
            width: w,
            height: h,
            delay,
            buffer: pixels.into(),
            ..Default::default()
        };
        enc.write_frame(&frame).map_err(gif_err)?;
    }
    Ok(())
}

/// A mean with a symmetric confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub series: String,
    pub category: String,
    pub mean: f64,
    pub ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet<T> {
    pub label: String,
    pub points: Vec<T>,
}

/// Five-number summary of one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxPoint {
    pub series: String,
    pub category: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

const SERIES_COLORS: [&str; 4] = ["#2ECC40", "#FF851B", "#0074D9", "#85144B"];

struct ChartLayout {
    panel_h: f64,
    left: f64,
    top: f64,
    y_min: f64,
    y_max: f64,
}

impl ChartLayout {
    fn y_px(&self, v: f64) -> f64 {
        self.top + (self.y_max - v) / (self.y_max - self.y_min) * self.panel_h
    }
}

fn order_of<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

fn check_facets<T>(facets: &[Facet<T>]) -> Result<(), RenderError> {
    if facets.is_empty() {
        return Err(RenderError::EmptyChart);
    }
    if let Some(f) = facets.iter().find(|f| f.points.is_empty()) {
        return Err(RenderError::EmptyFacet(f.label.clone()));
    }
    Ok(())
}

/// Draws panels, axes, category labels and a legend; `mark` draws the data
/// of one facet at (x center, series color).
fn chart_svg<T>(
    title: &str,
    facets: &[Facet<T>],
    (y_min, y_max): (f64, f64),
    key: impl Fn(&T) -> (&str, &str),
    mut mark: impl FnMut(&mut String, &ChartLayout, &T, f64, &str),
) -> String {
    let series = order_of(facets.iter().flat_map(|f| f.points.iter().map(|p| key(p).0)));
    let categories = order_of(facets.iter().flat_map(|f| f.points.iter().map(|p| key(p).1)));
    let panel_w = 90.0 * categories.len().max(1) as f64 + 40.0;
    let panel_h = 300.0;
    let gap = 50.0;
    let width = 70.0 + facets.len() as f64 * (panel_w + gap);
    let height = panel_h + 150.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"#FFFFFF\"/>");
    let _ = writeln!(out, "<text class=\"title\" x=\"20\" y=\"24\" font-size=\"16\">{}</text>", xml_escape(title));

    for (fi, facet) in facets.iter().enumerate() {
        let layout = ChartLayout {
            panel_h,
            left: 60.0 + fi as f64 * (panel_w + gap),
            top: 60.0,
            y_min,
            y_max,
        };
        let _ = writeln!(
            out,
            "<g class=\"facet\" data-label=\"{}\">",
            xml_escape(&facet.label)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"48\" font-size=\"13\">{}</text>",
            layout.left,
            xml_escape(&facet.label)
        );
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{panel_w:.1}\" height=\"{panel_h:.1}\" fill=\"none\" stroke=\"#999999\"/>",
            layout.left, layout.top
        );
        let mut tick = y_min.ceil();
        while tick <= y_max {
            let y = layout.y_px(tick);
            let _ = writeln!(
                out,
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#EEEEEE\"/><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\">{tick}</text>",
                layout.left,
                layout.left + panel_w,
                layout.left - 18.0,
                y + 3.0
            );
            tick += 1.0;
        }
        let slot = panel_w / categories.len().max(1) as f64;
        for (ci, cat) in categories.iter().enumerate() {
            let x = layout.left + slot * (ci as f64 + 0.5);
            let _ = writeln!(
                out,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                x,
                layout.top + panel_h + 16.0,
                xml_escape(cat)
            );
        }
        for p in &facet.points {
            let (s, cat) = key(p);
            let si = series.iter().position(|x| x == s).unwrap_or(0);
            let ci = categories.iter().position(|x| x == cat).unwrap_or(0);
            let offset = (si as f64 - (series.len() as f64 - 1.0) / 2.0) * (slot / (series.len() as f64 + 1.0));
            let x = layout.left + slot * (ci as f64 + 0.5) + offset;
            mark(&mut out, &layout, p, x, SERIES_COLORS[si % SERIES_COLORS.len()]);
        }
        out.push_str("</g>\n");
    }

    for (si, s) in series.iter().enumerate() {
        let y = 60.0 + panel_h + 40.0 + 16.0 * si as f64;
        let _ = writeln!(
            out,
            "<circle class=\"legend\" cx=\"70\" cy=\"{:.1}\" r=\"5\" fill=\"{}\"/><text x=\"82\" y=\"{:.1}\" font-size=\"11\">{}</text>",
            y,
            SERIES_COLORS[si % SERIES_COLORS.len()],
            y + 4.0,
            xml_escape(s)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Means with confidence-interval whiskers, one panel per facet, categories
/// on the x axis and one colored marker per series.
pub fn plot_condition_means(title: &str, facets: &[Facet<ChartPoint>]) -> Result<String, RenderError> {
    check_facets(facets)?;
    let lo = facets
        .iter()
        .flat_map(|f| &f.points)
        .map(|p| p.mean - p.ci_half_width)
        .fold(1.0_f64, f64::min);
    let hi = facets
        .iter()
        .flat_map(|f| &f.points)
        .map(|p| p.mean + p.ci_half_width)
        .fold(5.0_f64, f64::max);
    Ok(chart_svg(
        title,
        facets,
        (lo.floor(), hi.ceil()),
        |p| (p.series.as_str(), p.category.as_str()),
        |out, layout, p, x, color| {
            let (lo, hi) = (p.mean - p.ci_half_width, p.mean + p.ci_half_width);
            let _ = writeln!(
                out,
                "<line class=\"ci\" x1=\"{x:.1}\" y1=\"{:.2}\" x2=\"{x:.1}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"2\" data-lo=\"{lo}\" data-hi=\"{hi}\"/>",
                layout.y_px(lo),
                layout.y_px(hi)
            );
            let _ = writeln!(
                out,
                "<circle class=\"point\" cx=\"{x:.1}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\" data-series=\"{}\" data-category=\"{}\" data-mean=\"{}\"/>",
                layout.y_px(p.mean),
                xml_escape(&p.series),
                xml_escape(&p.category),
                p.mean
            );
        },
    ))
}

/// Box-and-whisker summaries, laid out like [`plot_condition_means`].
pub fn plot_quartiles(title: &str, facets: &[Facet<BoxPoint>]) -> Result<String, RenderError> {
    check_facets(facets)?;
    Ok(chart_svg(
        title,
        facets,
        (1.0, 5.0),
        |p| (p.series.as_str(), p.category.as_str()),
        |out, layout, p, x, color| {
            let half = 8.0;
            let (yq1, yq3) = (layout.y_px(p.q1), layout.y_px(p.q3));
            let _ = writeln!(
                out,
                "<line x1=\"{x:.1}\" y1=\"{:.2}\" x2=\"{x:.1}\" y2=\"{:.2}\" stroke=\"{color}\"/>",
                layout.y_px(p.min),
                layout.y_px(p.max)
            );
            let _ = writeln!(
                out,
                "<rect class=\"box\" x=\"{:.1}\" y=\"{yq3:.2}\" width=\"{:.1}\" height=\"{:.2}\" fill=\"#FFFFFF\" stroke=\"{color}\" data-series=\"{}\" data-category=\"{}\"/>",
                x - half,
                2.0 * half,
                (yq1 - yq3).max(0.5),
                xml_escape(&p.series),
                xml_escape(&p.category)
            );
            let ym = layout.y_px(p.median);
            let _ = writeln!(
                out,
                "<line class=\"median\" x1=\"{:.1}\" y1=\"{ym:.2}\" x2=\"{:.1}\" y2=\"{ym:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
                x - half,
                x + half
            );
            let _ = writeln!(
                out,
                "<circle class=\"mean\" cx=\"{x:.1}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#000000\"/>",
                layout.y_px(p.mean)
            );
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cues::{arrows_path, CueConfig, CueInputs, CueState, LightState};
    use crate::nav::VelocityCommand;
    use crate::scenario::builtin_by_name;

    fn record(cue: CueState) -> TraceRecord {
        TraceRecord {
            t: 1.25,
            pose: Pose2D::new(2.0, 0.3, 0.2),
            cmd: VelocityCommand::ZERO,
            inputs: CueInputs::new(0.0, 0.0, 0.0, 4.0),
            cue,
            leg: 1,
            paused: false,
        }
    }

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn solid_arrow_frame() {
        let spec = builtin_by_name("turn").unwrap();
        let pose = Pose2D::new(2.0, 0.3, 0.2);
        let mut cue = CueState::empty();
        cue.arrow = arrows_path(&CueInputs::new(0.0, 0.0, 0.0, 4.0), &CueConfig::default()).placed(pose);
        let svg = render_frame(&record(cue.clone()), &spec, &Style::default());
        assert_eq!(count(&svg, "class=\"arrow\""), 1);
        assert_eq!(count(&svg, "fill=\"#2ECC40\""), 1);
        assert!((cue.arrow.tail.distance(cue.arrow.tip) - 0.30).abs() < 1e-12);
        assert_eq!(count(&svg, "class=\"led"), 0);
    }

    #[test]
    fn led_dots_follow_channel_and_lit_state() {
        let spec = builtin_by_name("turn").unwrap();
        let mut cue = CueState::empty();
        cue.lights = LightState {
            left_active: true,
            right_active: false,
            frequency: Some(2.0),
            lit: true,
        };
        let svg = render_frame(&record(cue.clone()), &spec, &Style::default());
        assert_eq!(count(&svg, "class=\"led lit\""), 1);
        cue.lights.lit = false;
        let svg = render_frame(&record(cue), &spec, &Style::default());
        assert_eq!(count(&svg, "class=\"led lit\""), 0);
        assert_eq!(count(&svg, "class=\"led\""), 1);
    }

    #[test]
    fn no_cue_frame_has_scene_only() {
        let spec = builtin_by_name("straight").unwrap();
        let svg = render_frame(&record(CueState::empty()), &spec, &Style::default());
        assert_eq!(count(&svg, "class=\"arrow\""), 0);
        assert_eq!(count(&svg, "class=\"led"), 0);
        assert_eq!(count(&svg, "class=\"robot\""), 1);
        assert_eq!(count(&svg, "class=\"wall\""), spec.walls().len());
    }

    #[test]
    fn dashed_arrow_has_three_dashes_and_head() {
        let arrow = crate::cues::arrows_goal(&CueInputs::new(0.0, 0.0, 90.0, 1.0), &CueConfig::default(), 0.0);
        let rings = dashed_arrow_rings(&arrow);
        assert_eq!(rings.len(), 4);
        assert_eq!(rings[3].len(), 3);
    }

    #[test]
    fn chart_single_point_whiskers() {
        let facets = vec![Facet {
            label: "turn".into(),
            points: vec![ChartPoint {
                series: "arrows".into(),
                category: "path".into(),
                mean: 3.0,
                ci_half_width: 0.2,
            }],
        }];
        let svg = plot_condition_means("SAS", &facets).unwrap();
        assert_eq!(count(&svg, "class=\"point\""), 1);
        assert!(svg.contains("data-lo=\"2.8\" data-hi=\"3.2\""));
    }

    #[test]
    fn chart_rejects_empty_facet() {
        let facets: Vec<Facet<ChartPoint>> = vec![Facet {
            label: "straight".into(),
            points: vec![],
        }];
        assert!(matches!(
            plot_condition_means("SAS", &facets),
            Err(RenderError::EmptyFacet(l)) if l == "straight"
        ));
        assert!(matches!(plot_condition_means("SAS", &[]), Err(RenderError::EmptyChart)));
    }

    #[test]
    fn fps_arithmetic() {
        assert!((animation_fps(0.05, 4) - 5.0).abs() < 1e-12);
        assert_eq!(frame_indices(600, 1).count(), 600);
        assert_eq!(frame_indices(600, 4).count(), 150);
        assert_eq!(frame_file_name(7), "frame_000007.svg");
    }

    #[test]
    fn style_parses_partial_toml() {
        let style: Style = toml::from_str("stride = 3\n[colors]\narrow = \"#00FF00\"\n").unwrap();
        assert_eq!(style.stride, 3);
        assert_eq!(style.colors.arrow, "#00FF00");
        assert_eq!(style.colors.led, Palette::default().led);
        assert!(style.validate().is_ok());
        let bad = Style {
            stride: 0,
            ..Style::default()
        };
        assert!(bad.validate().is_err());
    }
}

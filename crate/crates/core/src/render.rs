//! SVG pictures of wall sets: rays from the origin in rank 2 and
//! stereographic projections of great-circle arcs in rank 3.
//!
//! Floating point is used only here; every number in the output is printed
//! with three decimals so the document is byte-for-byte reproducible.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fans::FanWall;
use crate::finrep::{RepTable, Wall};

pub const DEFAULT_SAMPLES: usize = 720;
pub const DEFAULT_POLE: [f64; 3] = [-1.0, -1.0, -1.0];
const SIZE: f64 = 600.0;
const SCALE: f64 = 150.0;
/// Projected points farther than this from the origin end a polyline.
const CLIP: f64 = 40.0;
const INEQ_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("rendering supports rank 2 and 3, got {0}")]
    UnsupportedRank(usize),
    #[error("projection pole lies on the hyperplane of wall {0}")]
    PoleOnWall(usize),
    #[error("projection pole must be a nonzero 3-vector")]
    BadPole,
    #[error("wall {0} has the wrong length")]
    Shape(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Black,
    Blue,
    Negated,
}

impl Style {
    fn stroke(self) -> &'static str {
        match self {
            Style::Black => "stroke=\"#000000\"",
            Style::Blue => "stroke=\"#1f4fd1\"",
            Style::Negated => "stroke=\"#7a7a7a\" stroke-dasharray=\"6 3\"",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Style::Black => "black",
            Style::Blue => "blue",
            Style::Negated => "negated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneWall {
    pub id: usize,
    pub wall: Wall,
    pub style: Style,
    pub label: Option<String>,
}

/// Stereographic projection from `pole` onto the plane through the origin
/// perpendicular to it.
/// Scene walls for a fan: negated walls are dashed, slot 0 is black and
/// later slots blue. Labels are module names.
pub fn fan_scene_walls(table: &RepTable, walls: &[FanWall]) -> Vec<SceneWall> {
    walls
        .iter()
        .map(|w| SceneWall {
            id: w.brick,
            wall: w.wall.clone(),
            style: if w.negated {
                Style::Negated
            } else if w.slot == 0 {
                Style::Black
            } else {
                Style::Blue
            },
            label: Some(table.module_name(&table.get(w.brick).dim, "PSI")),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Projection {
    pole: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl Default for Projection {
    fn default() -> Self {
        Projection::from_pole(DEFAULT_POLE).expect("default pole is nonzero")
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let len = dot3(&v, &v).sqrt();
    (len > 1e-12).then(|| [v[0] / len, v[1] / len, v[2] / len])
}

/// Unit vector orthogonal to `n`, built from the coordinate axis least
/// aligned with it.
fn orthogonal(n: &[f64; 3]) -> [f64; 3] {
    let axis = (0..3).min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs())).expect("three axes");
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let d = dot3(&e, n);
    normalize([e[0] - d * n[0], e[1] - d * n[1], e[2] - d * n[2]]).expect("axis is not parallel to n")
}

impl Projection {
    pub fn from_pole(pole: [f64; 3]) -> Result<Self, RenderError> {
        let p = normalize(pole).ok_or(RenderError::BadPole)?;
        let e1 = orthogonal(&p);
        let e2 = cross(&p, &e1);
        Ok(Self { pole: p, e1, e2 })
    }

    pub fn pole(&self) -> [f64; 3] {
        self.pole
    }

    pub fn project(&self, x: &[f64; 3]) -> [f64; 2] {
        let denom = 1.0 - dot3(x, &self.pole);
        [dot3(x, &self.e1) / denom, dot3(x, &self.e2) / denom]
    }
}

fn as_f64(v: &[i64]) -> [f64; 3] {
    [v[0] as f64, v[1] as f64, v[2] as f64]
}

/// Points of the great circle `normal^perp` on the unit sphere that satisfy
/// every wall inequality, split into maximal runs of consecutive samples.
/// A run covering the whole circle is closed by repeating its first point.
pub fn sample_wall(w: &Wall, samples: usize) -> Vec<Vec<[f64; 3]>> {
    let n = normalize(as_f64(&w.normal)).expect("wall normal is nonzero");
    let u = orthogonal(&n);
    let v = cross(&n, &u);
    let samples = samples.max(8);
    let pts: Vec<[f64; 3]> = (0..samples)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / samples as f64;
            let (s, c) = t.sin_cos();
            [c * u[0] + s * v[0], c * u[1] + s * v[1], c * u[2] + s * v[2]]
        })
        .collect();
    let ok: Vec<bool> = pts.iter().map(|p| w.subdims.iter().all(|d| dot3(p, &as_f64(d)) <= INEQ_TOL)).collect();
    if ok.iter().all(|&b| b) {
        let mut closed = pts.clone();
        closed.push(pts[0]);
        return vec![closed];
    }
    let start = ok.iter().position(|&b| !b).expect("some sample fails");
    let mut runs = Vec::new();
    let mut current: Vec<[f64; 3]> = Vec::new();
    for step in 1..=samples {
        let i = (start + step) % samples;
        if ok[i] {
            current.push(pts[i]);
        } else if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Projected arcs of a rank-3 wall.
pub fn project_wall(w: &Wall, proj: &Projection, samples: usize) -> Result<Vec<Vec<[f64; 2]>>, RenderError> {
    if w.normal.len() != 3 {
        return Err(RenderError::UnsupportedRank(w.normal.len()));
    }
    let n = normalize(as_f64(&w.normal)).ok_or(RenderError::Shape(0))?;
    if dot3(&n, &proj.pole).abs() < 1e-9 {
        return Err(RenderError::PoleOnWall(0));
    }
    let mut out = Vec::new();
    for run in sample_wall(w, samples) {
        let mut piece: Vec<[f64; 2]> = Vec::new();
        for p in &run {
            let q = proj.project(p);
            if q[0].hypot(q[1]) > CLIP {
                if piece.len() >= 2 {
                    out.push(std::mem::take(&mut piece));
                }
                piece.clear();
            } else {
                piece.push(q);
            }
        }
        if piece.len() >= 2 {
            out.push(piece);
        }
    }
    Ok(out)
}

/// Unit directions of the rays of a rank-2 wall.
fn wall_rays(w: &Wall) -> Vec<[f64; 2]> {
    let dir = [-(w.normal[1] as f64), w.normal[0] as f64];
    let len = dir[0].hypot(dir[1]);
    [1.0, -1.0]
        .iter()
        .map(|s| [s * dir[0] / len, s * dir[1] / len])
        .filter(|r| w.subdims.iter().all(|d| r[0] * d[0] as f64 + r[1] * d[1] as f64 <= INEQ_TOL))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneArc {
    pub wall_id: usize,
    pub points: Vec<[f64; 2]>,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneLabel {
    pub text: String,
    pub at: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneMeta {
    pub rank: usize,
    pub pole: Option<[f64; 3]>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scene {
    pub arcs: Vec<SceneArc>,
    pub labels: Vec<SceneLabel>,
    pub markers: Vec<SceneLabel>,
    pub meta: SceneMeta,
}

/// A point to mark in the picture, such as a chamber representative.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub point: Vec<f64>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub projection: Projection,
    pub samples: usize,
    pub markers: Vec<Marker>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { projection: Projection::default(), samples: DEFAULT_SAMPLES, markers: Vec::new() }
    }
}

pub fn build_scene(rank: usize, walls: &[SceneWall], opts: &RenderOptions) -> Result<Scene, RenderError> {
    if rank != 2 && rank != 3 {
        return Err(RenderError::UnsupportedRank(rank));
    }
    let mut order: Vec<&SceneWall> = walls.iter().collect();
    order.sort_by_key(|w| w.id);
    let mut arcs = Vec::new();
    let mut labels = Vec::new();
    for w in order {
        if w.wall.normal.len() != rank || w.wall.subdims.iter().any(|d| d.len() != rank) {
            return Err(RenderError::Shape(w.id));
        }
        let polylines: Vec<Vec<[f64; 2]>> = if rank == 2 {
            wall_rays(&w.wall).into_iter().map(|r| vec![[0.0, 0.0], r]).collect()
        } else {
            project_wall(&w.wall, &opts.projection, opts.samples).map_err(|e| match e {
                RenderError::PoleOnWall(_) => RenderError::PoleOnWall(w.id),
                other => other,
            })?
        };
        if let Some(text) = &w.label {
            if let Some(longest) = polylines.iter().max_by_key(|p| p.len()) {
                labels.push(SceneLabel { text: text.clone(), at: longest[longest.len() / 2] });
            }
        }
        arcs.extend(polylines.into_iter().map(|points| SceneArc { wall_id: w.id, points, style: w.style }));
    }
    let markers = opts
        .markers
        .iter()
        .filter_map(|m| {
            let at = if rank == 2 {
                let len = m.point[0].hypot(m.point[1]);
                (len > 0.0).then(|| [0.5 * m.point[0] / len, 0.5 * m.point[1] / len])?
            } else {
                let p = normalize([m.point[0], m.point[1], m.point[2]])?;
                opts.projection.project(&p)
            };
            Some(SceneLabel { text: m.label.clone(), at })
        })
        .collect();
    let meta = SceneMeta {
        rank,
        pole: (rank == 3).then(|| opts.projection.pole()),
        samples: if rank == 3 { opts.samples } else { 0 },
    };
    Ok(Scene { arcs, labels, markers, meta })
}

fn svg_point(p: &[f64; 2]) -> (f64, f64) {
    (SIZE / 2.0 + SCALE * p[0], SIZE / 2.0 - SCALE * p[1])
}

/// Serializes a scene as an SVG 1.1 document.
pub fn scene_to_svg(scene: &Scene) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE:.0}\" height=\"{SIZE:.0}\" viewBox=\"0 0 {SIZE:.0} {SIZE:.0}\">"
    );
    let _ = writeln!(s, "<g id=\"frame\">");
    let _ = writeln!(
        s,
        "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"#c8c8c8\" stroke-width=\"1\"/>",
        SIZE / 2.0,
        SIZE / 2.0,
        SCALE
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<g id=\"walls\" fill=\"none\" stroke-width=\"1.5\">");
    let mut i = 0;
    while i < scene.arcs.len() {
        let id = scene.arcs[i].wall_id;
        let style = scene.arcs[i].style;
        let _ = writeln!(s, "<g id=\"wall-{id}\" class=\"{}\" {}>", style.name(), style.stroke());
        while i < scene.arcs.len() && scene.arcs[i].wall_id == id {
            let mut d = String::new();
            for (k, p) in scene.arcs[i].points.iter().enumerate() {
                let (x, y) = svg_point(p);
                let _ = write!(d, "{}{x:.3} {y:.3}", if k == 0 { "M " } else { " L " });
            }
            let _ = writeln!(s, "<path d=\"{d}\"/>");
            i += 1;
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<g id=\"labels\" font-family=\"serif\" font-size=\"12\">");
    for l in &scene.labels {
        let (x, y) = svg_point(&l.at);
        let _ = writeln!(s, "<text x=\"{x:.3}\" y=\"{y:.3}\">{}</text>", escape(&l.text));
    }
    for m in &scene.markers {
        let (x, y) = svg_point(&m.at);
        let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3.000\" fill=\"#d14f1f\"/>");
        let _ = writeln!(s, "<text x=\"{:.3}\" y=\"{y:.3}\">{}</text>", x + 5.0, escape(&m.text));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_picture(rank: usize, walls: &[SceneWall], opts: &RenderOptions) -> Result<String, RenderError> {
    Ok(scene_to_svg(&build_scene(rank, walls, opts)?))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SceneStats {
    pub arc_group_count: usize,
    pub arc_count: usize,
    pub black: usize,
    pub blue: usize,
    pub negated: usize,
}

/// Counts distinct walls (arc groups) overall and per style.
pub fn scene_stats(scene: &Scene) -> SceneStats {
    let mut groups: Vec<(usize, Style)> = scene.arcs.iter().map(|a| (a.wall_id, a.style)).collect();
    groups.sort();
    groups.dedup();
    let count = |s: Style| groups.iter().filter(|g| g.1 == s).count();
    SceneStats {
        arc_group_count: groups.len(),
        arc_count: scene.arcs.len(),
        black: count(Style::Black),
        blue: count(Style::Blue),
        negated: count(Style::Negated),
    }
}

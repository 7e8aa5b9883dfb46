//! SVG and TikZ drawings of assemblies.
//!
//! Planar geometries are drawn as unit squares with glue labels on their
//! sides. Other geometries fall back to a layered adjacency graph.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Compass, Geometry};
use crate::tiles::{self, Assembly, Tileset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn from_degrees(d: i64) -> Option<Rotation> {
        match d.rem_euclid(360) {
            0 => Some(Rotation::R0),
            90 => Some(Rotation::R90),
            180 => Some(Rotation::R180),
            270 => Some(Rotation::R270),
            _ => None,
        }
    }

    fn apply(self, (x, y): (f64, f64)) -> (f64, f64) {
        match self {
            Rotation::R0 => (x, y),
            Rotation::R90 => (-y, x),
            Rotation::R180 => (-x, -y),
            Rotation::R270 => (y, -x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOptions {
    /// Pixels per tile.
    pub scale: f64,
    pub font_size: f64,
    pub show_glues: bool,
    /// Draw bonds between tile centres.
    pub show_paths: bool,
    /// Margin in tile units.
    pub offset: f64,
    /// Point sets drawn as separate pictures, in order.
    pub stages: Vec<Vec<(i64, i64)>>,
    pub rotation: Rotation,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: 20.0,
            font_size: 6.0,
            show_glues: false,
            show_paths: false,
            offset: 1.0,
            stages: Vec::new(),
            rotation: Rotation::R0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("scale must be positive")]
    Scale,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub warnings: Vec<String>,
}

fn num(v: f64) -> String {
    let s = format!("{:.2}", v + 0.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tikz_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '#' | '%' | '&' | '$' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// One drawable square, edge label or bond, in tile units.
#[derive(Clone, Debug)]
struct Scene {
    tiles: Vec<SceneTile>,
    labels: Vec<(f64, f64, String)>,
    bonds: Vec<((f64, f64), (f64, f64))>,
}

#[derive(Clone, Debug)]
struct SceneTile {
    center: (f64, f64),
    color: String,
    name: Option<String>,
    seed: bool,
}

impl Scene {
    fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for t in &self.tiles {
            b.0 = b.0.min(t.center.0 - 0.5);
            b.1 = b.1.min(t.center.1 - 0.5);
            b.2 = b.2.max(t.center.0 + 0.5);
            b.3 = b.3.max(t.center.1 + 0.5);
        }
        if self.tiles.is_empty() {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            b
        }
    }
}

fn planar_scene<G: Geometry>(
    g: &G,
    a: &Assembly<G::Point>,
    ts: &Tileset,
    o: &RenderOptions,
    keep: Option<&[(i64, i64)]>,
) -> Option<Scene> {
    let mut cells: BTreeMap<(i64, i64), (G::Point, usize)> = BTreeMap::new();
    for (p, t) in a.iter() {
        cells.insert(g.planar(p)?, (p.clone(), *t));
    }
    if let Some(k) = keep {
        let k: std::collections::BTreeSet<_> = k.iter().copied().collect();
        cells.retain(|c, _| k.contains(c));
    }
    let rot = |x: f64, y: f64| o.rotation.apply((x, y));
    let mut scene = Scene { tiles: Vec::new(), labels: Vec::new(), bonds: Vec::new() };
    for (&(x, y), (p, t)) in &cells {
        let tile = &ts.tiles[*t];
        scene.tiles.push(SceneTile {
            center: rot(x as f64, y as f64),
            color: tile.color.clone().unwrap_or_else(|| "white".into()),
            name: tile.name.clone(),
            seed: a.seed.contains(p),
        });
        for c in Compass::ALL {
            let Some(d) = g.compass(c) else { continue };
            let glue = tile.glue(d);
            let (dx, dy) = c.delta();
            let nb = cells.get(&(x + dx, y + dy));
            let bonded = nb.is_some_and(|(_, u)| tiles::interacts(tile, &ts.tiles[*u], d));
            if bonded && o.show_paths && matches!(c, Compass::E | Compass::N) {
                scene.bonds.push((rot(x as f64, y as f64), rot((x + dx) as f64, (y + dy) as f64)));
            }
            if !o.show_glues || !glue.is_active() {
                continue;
            }
            // Shared glues are labelled once, on the edge, from the west or south tile.
            if bonded {
                if matches!(c, Compass::E | Compass::N) {
                    let (lx, ly) = (x as f64 + dx as f64 * 0.5, y as f64 + dy as f64 * 0.5);
                    let (lx, ly) = rot(lx, ly);
                    scene.labels.push((lx, ly, ts.glue_display(glue.label)));
                }
            } else {
                let (lx, ly) = rot(x as f64 + dx as f64 * 0.32, y as f64 + dy as f64 * 0.32);
                scene.labels.push((lx, ly, ts.glue_display(glue.label)));
            }
        }
    }
    Some(scene)
}

/// Breadth-first layers from the first seed point; `x` is the position in
/// the layer, `y` the distance.
fn graph_scene<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset) -> Scene {
    let mut layer: HashMap<G::Point, (usize, usize)> = HashMap::new();
    let mut widths: Vec<usize> = Vec::new();
    let mut order: Vec<G::Point> = Vec::new();
    let mut starts: Vec<G::Point> = a.seed.clone();
    starts.extend(a.sorted().into_iter().map(|(p, _)| p));
    for s in starts {
        if layer.contains_key(&s) {
            continue;
        }
        let mut q = VecDeque::from([(s.clone(), 0usize)]);
        while let Some((p, d)) = q.pop_front() {
            if layer.contains_key(&p) || !a.contains(&p) {
                continue;
            }
            if widths.len() <= d {
                widths.resize(d + 1, 0);
            }
            layer.insert(p.clone(), (d, widths[d]));
            widths[d] += 1;
            order.push(p.clone());
            let mut nbs: Vec<G::Point> = g.neighbors(&p).into_iter().map(|(_, q)| q).collect();
            nbs.sort();
            for n in nbs {
                q.push_back((n, d + 1));
            }
        }
    }
    let pos = |p: &G::Point| {
        let (d, i) = layer[p];
        (1.5 * i as f64, -1.5 * d as f64)
    };
    let mut scene = Scene { tiles: Vec::new(), labels: Vec::new(), bonds: Vec::new() };
    for p in &order {
        let t = &ts.tiles[a.get(p).unwrap()];
        scene.tiles.push(SceneTile {
            center: pos(p),
            color: t.color.clone().unwrap_or_else(|| "white".into()),
            name: t.name.clone(),
            seed: a.seed.contains(p),
        });
        let mut nbs = g.neighbors(p);
        nbs.sort_by(|x, y| x.1.cmp(&y.1));
        for (d, q) in nbs {
            if q > *p {
                if let Some(u) = a.get(&q) {
                    if tiles::interacts(t, &ts.tiles[u], d) {
                        scene.bonds.push((pos(p), pos(&q)));
                    }
                }
            }
        }
    }
    scene
}

fn scenes<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset, o: &RenderOptions) -> Result<(Vec<Scene>, Vec<String>), RenderError> {
    if o.scale.is_nan() || o.scale <= 0.0 {
        return Err(RenderError::Scale);
    }
    let mut warnings = Vec::new();
    let planar = if o.stages.is_empty() {
        planar_scene(g, a, ts, o, None).map(|s| vec![s])
    } else {
        o.stages.iter().map(|k| planar_scene(g, a, ts, o, Some(k))).collect()
    };
    let out = match planar {
        Some(s) => s,
        None => {
            warnings.push(format!("{} geometry has no planar layout; drawing the adjacency graph", g.kind()));
            vec![graph_scene(g, a, ts)]
        }
    };
    Ok((out, warnings))
}

/// SVG 1.1 drawing; one `rect` per tile, or one `circle` per tile for
/// geometries without a planar layout.
pub fn render_svg<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset, o: &RenderOptions) -> Result<Rendered, RenderError> {
    let (scenes, warnings) = scenes(g, a, ts, o)?;
    let planar = warnings.is_empty();
    let s = o.scale;
    let boxes: Vec<_> = scenes.iter().map(Scene::bbox).collect();
    let widths: Vec<f64> = boxes.iter().map(|b| (b.2 - b.0 + 2.0 * o.offset) * s).collect();
    let height = boxes.iter().map(|b| (b.3 - b.1 + 2.0 * o.offset) * s).fold(0.0, f64::max);
    let width: f64 = widths.iter().sum();

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let mut shift = 0.0;
    for (k, (scene, b)) in scenes.iter().zip(&boxes).enumerate() {
        let px = |x: f64| num((x - b.0 + o.offset) * s + shift);
        let py = |y: f64| num((b.3 - y + o.offset) * s);
        if scenes.len() > 1 {
            let _ = writeln!(out, "<g id=\"stage-{k}\">");
        }
        for t in &scene.tiles {
            let stroke = if t.seed { "2" } else { "1" };
            let (cx, cy) = t.center;
            if planar {
                let _ = write!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"{stroke}\"",
                    px(cx - 0.5),
                    py(cy + 0.5),
                    num(s),
                    num(s),
                    escape(&t.color)
                );
            } else {
                let _ = write!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"{stroke}\"",
                    px(cx),
                    py(cy),
                    num(s * 0.4),
                    escape(&t.color)
                );
            }
            match &t.name {
                Some(n) => {
                    let _ = writeln!(out, "><title>{}</title></{}>", escape(n), if planar { "rect" } else { "circle" });
                }
                None => out.push_str("/>\n"),
            }
        }
        for (p, q) in &scene.bonds {
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>",
                px(p.0),
                py(p.1),
                px(q.0),
                py(q.1)
            );
        }
        for (x, y, l) in &scene.labels {
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">{}</text>",
                px(*x),
                py(*y),
                num(o.font_size),
                escape(l)
            );
        }
        if scenes.len() > 1 {
            out.push_str("</g>\n");
        }
        shift += widths[k];
    }
    out.push_str("</svg>\n");
    Ok(Rendered { text: out, warnings })
}

/// TikZ fragment, one `tikzpicture` per stage.
pub fn render_tikz<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset, o: &RenderOptions) -> Result<Rendered, RenderError> {
    let (scenes, warnings) = scenes(g, a, ts, o)?;
    let planar = warnings.is_empty();
    let mut out = String::new();
    for scene in &scenes {
        let _ = writeln!(out, "\\begin{{tikzpicture}}[x={}pt,y={}pt,font=\\fontsize{{{}}}{{{}}}\\selectfont]", num(o.scale), num(o.scale), num(o.font_size), num(o.font_size));
        for t in &scene.tiles {
            let (cx, cy) = t.center;
            let width = if t.seed { "very thick" } else { "thin" };
            let label = t.name.as_deref().map(tikz_escape).unwrap_or_default();
            if planar {
                let _ = writeln!(
                    out,
                    "\\draw[{width},fill={}] ({},{}) rectangle ({},{}) node[midway] {{{label}}};",
                    t.color,
                    num(cx - 0.5),
                    num(cy - 0.5),
                    num(cx + 0.5),
                    num(cy + 0.5)
                );
            } else {
                let _ = writeln!(out, "\\draw[{width},fill={}] ({},{}) circle (0.4) node {{{label}}};", t.color, num(cx), num(cy));
            }
        }
        for (p, q) in &scene.bonds {
            let _ = writeln!(out, "\\draw ({},{}) -- ({},{});", num(p.0), num(p.1), num(q.0), num(q.1));
        }
        for (x, y, l) in &scene.labels {
            let _ = writeln!(out, "\\node at ({},{}) {{{}}};", num(*x), num(*y), tikz_escape(l));
        }
        out.push_str("\\end{tikzpicture}\n");
    }
    Ok(Rendered { text: out, warnings })
}

//! JSON artifacts: tilesets, assemblies and analysis reports.
//!
//! Every writer emits pretty-printed JSON with a fixed key order and a
//! trailing newline, so equal inputs give byte-identical files.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::FormatError;
use crate::geometry::{Bs12, Direction, Geometry, GeometryKind, Hyperbolic, Z2};
use crate::simulator::{Attachment, AssemblySequence, Status};
use crate::tiles::{Assembly, Glue, TileId, TileSystem, TileType, Tileset};

/// Render a JSON value the way every artifact is written.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Lowercase hex SHA-256 of a text artifact.
pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn tile_json(kind: &GeometryKind, id: TileId, t: &TileType) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), json!(id));
    if let Some(name) = &t.name {
        obj.insert("name".into(), json!(name));
    }
    if let Some(color) = &t.color {
        obj.insert("color".into(), json!(color));
    }
    let mut glues = Map::new();
    for (key, d) in kind.side_keys().into_iter().zip(kind.side_order()) {
        let g = t.glue(d);
        glues.insert(key, json!([g.label, g.strength]));
    }
    obj.insert("glues".into(), Value::Object(glues));
    Value::Object(obj)
}

pub fn tileset_value<G: Geometry>(sys: &TileSystem<G>) -> Value {
    let kind = sys.tileset.geometry;
    let tiles: Vec<Value> = sys.tileset.tiles.iter().enumerate().map(|(i, t)| tile_json(&kind, i, t)).collect();
    let seed: Vec<Value> = sys
        .seed
        .iter()
        .map(|(p, t)| json!({ "pos": sys.geometry.encode_point(p), "tile": t }))
        .collect();
    let mut obj = Map::new();
    obj.insert("geometry".into(), json!(kind.name()));
    obj.insert("tiles".into(), Value::Array(tiles));
    obj.insert("seed".into(), Value::Array(seed));
    if !sys.tileset.glue_names.is_empty() {
        let names: Map<String, Value> =
            sys.tileset.glue_names.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        obj.insert("glue_names".into(), Value::Object(names));
    }
    Value::Object(obj)
}

pub fn write_tileset<G: Geometry>(sys: &TileSystem<G>) -> String {
    to_text(&tileset_value(sys))
}

/// Hash identifying a tile system inside assembly files.
pub fn tileset_hash<G: Geometry>(sys: &TileSystem<G>) -> String {
    sha256_hex(&write_tileset(sys))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, FormatError> {
    v.get(key).ok_or_else(|| FormatError::Field(key.to_string()))
}

fn as_u64(v: &Value, key: &str) -> Result<u64, FormatError> {
    v.as_u64().ok_or_else(|| FormatError::Field(key.to_string()))
}

/// A tileset file with seed positions still in raw JSON form.
#[derive(Clone, Debug)]
pub struct RawSystem {
    pub tileset: Tileset,
    pub seed: Vec<(Value, TileId)>,
}

impl RawSystem {
    pub fn into_system<G: Geometry>(self, g: G) -> Result<TileSystem<G>, FormatError> {
        if g.kind() != self.tileset.geometry {
            return Err(FormatError::UnknownGeometry(g.kind().name()));
        }
        let seed = self
            .seed
            .iter()
            .map(|(v, t)| g.decode_point(v).map(|p| (p, *t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TileSystem::new(g, self.tileset, seed))
    }
}

pub fn read_tileset(text: &str) -> Result<RawSystem, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    let kind = GeometryKind::parse(field(&v, "geometry")?.as_str().ok_or_else(|| FormatError::Field("geometry".into()))?)?;
    let arr = field(&v, "tiles")?.as_array().ok_or_else(|| FormatError::Field("tiles".into()))?;
    let mut tiles = Vec::with_capacity(arr.len());
    for (i, tv) in arr.iter().enumerate() {
        if let Some(id) = tv.get("id") {
            if as_u64(id, "id")? != i as u64 {
                return Err(FormatError::Field(format!("tiles[{i}].id")));
            }
        }
        let gobj = field(tv, "glues")?.as_object().ok_or_else(|| FormatError::Field("glues".into()))?;
        if gobj.len() != kind.sides() {
            return Err(FormatError::SideCount { tile: i, expected: kind.sides(), found: gobj.len() });
        }
        let mut glues = vec![Glue::NULL; kind.sides()];
        for (key, gv) in gobj {
            let d = kind.side_from_key(key).ok_or_else(|| FormatError::SideKey(key.clone()))?;
            let pair = gv.as_array().filter(|a| a.len() == 2).ok_or_else(|| FormatError::Field(key.clone()))?;
            let label = u32::try_from(as_u64(&pair[0], key)?).map_err(|_| FormatError::Field(key.clone()))?;
            let strength = u8::try_from(as_u64(&pair[1], key)?).map_err(|_| FormatError::Field(key.clone()))?;
            glues[d.index()] = Glue { label, strength };
        }
        tiles.push(TileType {
            name: tv.get("name").and_then(Value::as_str).map(str::to_string),
            color: tv.get("color").and_then(Value::as_str).map(str::to_string),
            glues,
        });
    }
    let mut tileset = Tileset::new(kind, tiles);
    if let Some(names) = v.get("glue_names").and_then(Value::as_object) {
        for (k, name) in names {
            let label = k.parse::<u32>().map_err(|_| FormatError::Field("glue_names".into()))?;
            tileset.glue_names.insert(label, name.as_str().unwrap_or_default().to_string());
        }
    }
    let mut seed = Vec::new();
    if let Some(sv) = v.get("seed") {
        for s in sv.as_array().ok_or_else(|| FormatError::Field("seed".into()))? {
            let t = as_u64(field(s, "tile")?, "tile")? as TileId;
            seed.push((field(s, "pos")?.clone(), t));
        }
    }
    Ok(RawSystem { tileset, seed })
}

/// A tile system over whichever geometry its file names.
#[derive(Clone, Debug)]
pub enum AnySystem {
    Z2(TileSystem<Z2>),
    Bs12(TileSystem<Bs12>),
    Hyperbolic(TileSystem<Hyperbolic>),
}

impl AnySystem {
    pub fn tileset(&self) -> &Tileset {
        match self {
            AnySystem::Z2(s) => &s.tileset,
            AnySystem::Bs12(s) => &s.tileset,
            AnySystem::Hyperbolic(s) => &s.tileset,
        }
    }
}

pub fn read_system(text: &str) -> Result<AnySystem, FormatError> {
    let raw = read_tileset(text)?;
    Ok(match raw.tileset.geometry {
        GeometryKind::Z2 => AnySystem::Z2(raw.into_system(Z2)?),
        GeometryKind::Bs12 => AnySystem::Bs12(raw.into_system(Bs12)?),
        GeometryKind::Hyperbolic { degree } => AnySystem::Hyperbolic(raw.into_system(Hyperbolic::new(degree))?),
    })
}

/// Assembly file contents: placements in attachment order.
#[derive(Clone, Debug)]
pub struct AssemblyFile<P: std::hash::Hash + Eq> {
    pub tileset: String,
    pub sequence: AssemblySequence<P>,
    pub status: Status,
}

impl<P: Clone + std::hash::Hash + Eq + Ord> AssemblyFile<P> {
    pub fn assembly(&self) -> Assembly<P> {
        let mut a = Assembly::new();
        for s in &self.sequence {
            a.place(s.point.clone(), s.tile);
            if s.parent.is_none() {
                a.seed.push(s.point.clone());
            }
        }
        a
    }
}

/// Serialize an assembly sequence; `from` names the side of each tile that
/// bound to its growth parent.
pub fn write_assembly<G: Geometry>(
    g: &G,
    tileset_hash: &str,
    seq: &[Attachment<G::Point>],
    status: Status,
) -> String {
    let kind = g.kind();
    let placements: Vec<Value> = seq
        .iter()
        .map(|s| {
            let mut obj = Map::new();
            obj.insert("pos".into(), g.encode_point(&s.point));
            obj.insert("tile".into(), json!(s.tile));
            if let Some(d) = s.from {
                obj.insert("from".into(), json!(kind.side_key(d)));
            }
            Value::Object(obj)
        })
        .collect();
    to_text(&json!({ "tileset": tileset_hash, "placements": placements, "status": status.as_str() }))
}

pub fn read_assembly<G: Geometry>(g: &G, text: &str) -> Result<AssemblyFile<G::Point>, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    let tileset = field(&v, "tileset")?.as_str().unwrap_or_default().to_string();
    let status = match field(&v, "status")?.as_str() {
        Some("terminal") => Status::Terminal,
        Some("truncated") => Status::Truncated,
        _ => return Err(FormatError::Field("status".into())),
    };
    let kind = g.kind();
    let mut sequence = Vec::new();
    for pv in field(&v, "placements")?.as_array().ok_or_else(|| FormatError::Field("placements".into()))? {
        let point = g.decode_point(field(pv, "pos")?)?;
        let tile = as_u64(field(pv, "tile")?, "tile")? as TileId;
        let (from, parent) = match pv.get("from").and_then(Value::as_str) {
            None => (None, None),
            Some(key) => {
                let d: Direction = kind.side_from_key(key).ok_or_else(|| FormatError::SideKey(key.to_string()))?;
                let q = g.step(&point, d).ok_or_else(|| FormatError::SideKey(key.to_string()))?.0;
                (Some(d), Some(q))
            }
        };
        sequence.push(Attachment { point, tile, from, parent });
    }
    Ok(AssemblyFile { tileset, sequence, status })
}

/// Breadth-first attachment order of a producible assembly along its bonds.
pub fn growth_order<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset) -> AssemblySequence<G::Point> {
    let mut seen: std::collections::HashSet<G::Point> = a.seed.iter().cloned().collect();
    let mut out: AssemblySequence<G::Point> = a
        .seed
        .iter()
        .filter_map(|p| a.get(p).map(|tile| Attachment { point: p.clone(), tile, from: None, parent: None }))
        .collect();
    let mut i = 0;
    while i < out.len() {
        let p = out[i].point.clone();
        let t = &ts.tiles[out[i].tile];
        for (d, q) in g.neighbors(&p) {
            let Some(u) = a.get(&q) else { continue };
            if seen.contains(&q) || !crate::tiles::interacts(t, &ts.tiles[u], d) {
                continue;
            }
            seen.insert(q.clone());
            let back = g.step(&p, d).map(|(_, b)| b);
            out.push(Attachment { point: q, tile: u, from: back, parent: Some(p.clone()) });
        }
        i += 1;
    }
    out
}

/// Terminal assemblies of an exhaustive run, each in growth order.
pub fn write_assemblies<G: Geometry>(
    g: &G,
    tileset_hash: &str,
    ts: &Tileset,
    items: &[Assembly<G::Point>],
    complete: bool,
) -> String {
    let entries: Vec<Value> = items
        .iter()
        .map(|a| {
            let text = write_assembly(g, tileset_hash, &growth_order(g, a, ts), Status::Terminal);
            let mut v: Value = serde_json::from_str(&text).expect("own output parses");
            v.as_object_mut().unwrap().remove("tileset");
            v
        })
        .collect();
    to_text(&json!({ "tileset": tileset_hash, "assemblies": entries, "complete": complete }))
}

/// Every assembly in a single-assembly file or an exhaustive-run file.
pub fn read_assemblies<G: Geometry>(g: &G, text: &str) -> Result<Vec<AssemblyFile<G::Point>>, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    let Some(items) = v.get("assemblies") else {
        return Ok(vec![read_assembly(g, text)?]);
    };
    let hash = field(&v, "tileset")?.clone();
    let mut out = Vec::new();
    for item in items.as_array().ok_or_else(|| FormatError::Field("assemblies".into()))? {
        let mut item = item.clone();
        if let Some(obj) = item.as_object_mut() {
            obj.insert("tileset".into(), hash.clone());
        }
        out.push(read_assembly(g, &item.to_string())?);
    }
    Ok(out)
}

/// Attach the full tile system to an assembly artifact under `system`.
pub fn embed_system(assembly_text: &str, tileset_text: &str) -> Result<String, FormatError> {
    let mut v: Value = serde_json::from_str(assembly_text)?;
    let sys: Value = serde_json::from_str(tileset_text)?;
    v.as_object_mut().ok_or_else(|| FormatError::Field("assembly".into()))?.insert("system".into(), sys);
    Ok(to_text(&v))
}

/// The tile system embedded in an assembly artifact, as tileset text.
pub fn embedded_system(assembly_text: &str) -> Result<Option<String>, FormatError> {
    let v: Value = serde_json::from_str(assembly_text)?;
    Ok(v.get("system").map(to_text))
}

//! Elaboration of let-expression programs into tile systems, export to the
//! core language, decompilation, and tileset isomorphism.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::dsl::{Instr, Program, Side, Stmt};
use crate::geometry::{Compass, Direction, Geometry, GeometryKind};
use crate::tiles::{Glue, TileId, TileSystem, TileType, Tileset};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("`{0}` names a tile that was erased")]
    Erased(String),
    #[error("rewindBy {k} goes past the start of the trace (cursor at index {index})")]
    RewindPastStart { k: u64, index: usize },
    #[error("pump block creates no tile")]
    EmptyPump,
    #[error("`{0}` has no {1} tile in the trace")]
    TraceEnd(String, &'static str),
    #[error("side `{0}` does not exist in this geometry")]
    UnknownSide(String),
    #[error("no neighbor across side {side} of the cursor")]
    NoEdge { side: String },
    #[error("`seed` must be the first instruction")]
    LateSeed,
    #[error("seed coordinates ({0}, {1}) do not name a point of this geometry")]
    SeedPoint(i64, i64),
}

/// A core operation in terms of output tile ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoreOp {
    /// `tile` was created by a move from `from` across `side`.
    Create { tile: TileId, from: TileId, side: Direction },
    /// `bind side target` with the cursor on `cursor`.
    Bind { cursor: TileId, side: Direction, target: TileId },
}

/// A pumped block: `last`'s exit side carries the entry glue of `first`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PumpSegment {
    pub first: TileId,
    pub last: TileId,
    /// Side of `last` (and of the tile preceding `first`) the segment repeats across.
    pub side: Direction,
    /// Side of `first` facing its predecessor.
    pub entry: Direction,
    pub color: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CompileOutput<G: Geometry> {
    pub system: TileSystem<G>,
    /// Creation position of every tile.
    pub positions: Vec<G::Point>,
    /// Every `let`-style name still pointing at a live tile.
    pub names: BTreeMap<String, TileId>,
    pub pumps: Vec<PumpSegment>,
    pub ops: Vec<CoreOp>,
    /// Labels that were copied by a move or unified by a bind.
    pub linked_labels: BTreeSet<u32>,
}

impl<G: Geometry> CompileOutput<G> {
    pub fn tileset(&self) -> &Tileset {
        &self.system.tileset
    }

    pub fn tile_count(&self) -> usize {
        self.system.tileset.len()
    }

    pub fn glue_count(&self) -> usize {
        self.system.tileset.glue_count()
    }

    pub fn seed_point(&self) -> G::Point {
        self.system.seed[0].0.clone()
    }
}

#[derive(Clone, Debug)]
struct RawTile<P> {
    glues: Vec<u32>,
    created: Vec<u32>,
    pos: P,
    color: Option<String>,
    name: Option<String>,
    trace_pos: usize,
    alive: bool,
}

#[derive(Clone, Debug)]
enum RawOp {
    Create { tile: usize, from: usize, side: Direction, back: Direction },
    Bind { cursor: usize, side: Direction, back: Direction, target: usize },
}

struct Builder<'g, G: Geometry> {
    g: &'g G,
    kind: GeometryKind,
    tiles: Vec<RawTile<G::Point>>,
    trace: Vec<usize>,
    env: HashMap<String, usize>,
    cursor: usize,
    cursor_pos: G::Point,
    next_label: u32,
    color: Option<String>,
    log: Vec<RawOp>,
    pumps: Vec<(usize, usize, Direction, Direction, Option<String>)>,
    linked: HashSet<u32>,
}

impl<'g, G: Geometry> Builder<'g, G> {
    fn new(g: &'g G) -> Self {
        Builder {
            g,
            kind: g.kind(),
            tiles: Vec::new(),
            trace: Vec::new(),
            env: HashMap::new(),
            cursor: 0,
            cursor_pos: g.origin(),
            next_label: 1,
            color: None,
            log: Vec::new(),
            pumps: Vec::new(),
            linked: HashSet::new(),
        }
    }

    fn fresh(&mut self) -> u32 {
        let l = self.next_label;
        self.next_label += 1;
        l
    }

    fn new_tile(&mut self, pos: G::Point) -> usize {
        let glues: Vec<u32> = (0..self.kind.sides()).map(|_| self.fresh()).collect();
        let id = self.tiles.len();
        self.tiles.push(RawTile {
            created: glues.clone(),
            glues,
            pos,
            color: self.color.clone(),
            name: None,
            trace_pos: self.trace.len(),
            alive: true,
        });
        self.trace.push(id);
        id
    }

    fn ensure_seed(&mut self) {
        if self.tiles.is_empty() {
            let origin = self.g.origin();
            self.seed_at(origin);
        }
    }

    fn seed_at(&mut self, pos: G::Point) {
        let id = self.new_tile(pos.clone());
        self.cursor = id;
        self.cursor_pos = pos;
    }

    fn side(&self, s: &Side) -> Result<Direction, CompileError> {
        match s {
            Side::Compass(c) => self.g.compass(*c).ok_or_else(|| CompileError::UnknownSide(c.to_string())),
            Side::Key(k) => self.kind.side_from_key(k).ok_or_else(|| CompileError::UnknownSide(k.clone())),
        }
    }

    fn lookup(&self, x: &str) -> Result<usize, CompileError> {
        let t = *self.env.get(x).ok_or_else(|| CompileError::Unbound(x.to_string()))?;
        if !self.tiles[t].alive {
            return Err(CompileError::Erased(x.to_string()));
        }
        Ok(t)
    }

    fn name(&mut self, x: &str, t: usize) {
        self.env.insert(x.to_string(), t);
        if self.tiles[t].name.is_none() {
            self.tiles[t].name = Some(x.to_string());
        }
    }

    fn goto(&mut self, t: usize) {
        self.cursor = t;
        self.cursor_pos = self.tiles[t].pos.clone();
    }

    fn step(&self, d: Direction) -> Result<(G::Point, Direction), CompileError> {
        self.g
            .step(&self.cursor_pos, d)
            .ok_or_else(|| CompileError::NoEdge { side: self.kind.side_key(d) })
    }

    fn mv(&mut self, d: Direction) -> Result<usize, CompileError> {
        let (pos, back) = self.step(d)?;
        let from = self.cursor;
        let id = self.new_tile(pos.clone());
        let label = self.tiles[from].glues[d.index()];
        self.tiles[id].glues[back.index()] = label;
        self.linked.insert(label);
        self.log.push(RawOp::Create { tile: id, from, side: d, back });
        self.cursor = id;
        self.cursor_pos = pos;
        Ok(id)
    }

    fn rename(&mut self, old: u32, new: u32) {
        if old == new {
            return;
        }
        for t in self.tiles.iter_mut().filter(|t| t.alive) {
            for g in t.glues.iter_mut() {
                if *g == old {
                    *g = new;
                }
            }
        }
    }

    fn bind(&mut self, d: Direction, target: usize) -> Result<(), CompileError> {
        let (_, back) = self.step(d)?;
        let new = self.tiles[self.cursor].glues[d.index()];
        let old = self.tiles[target].glues[back.index()];
        self.rename(old, new);
        self.linked.insert(new);
        self.log.push(RawOp::Bind { cursor: self.cursor, side: d, back, target });
        Ok(())
    }

    fn erase_after(&mut self, t: usize) {
        let keep = self.tiles[t].trace_pos + 1;
        for &id in &self.trace[keep..] {
            self.tiles[id].alive = false;
        }
        self.trace.truncate(keep);
        let tiles = &self.tiles;
        self.log.retain(|op| match op {
            RawOp::Create { tile, .. } => tiles[*tile].alive,
            RawOp::Bind { cursor, target, .. } => tiles[*cursor].alive && tiles[*target].alive,
        });
        self.pumps.retain(|p| tiles[p.0].alive && tiles[p.1].alive);
        self.replay();
        self.goto(t);
    }

    /// Recompute every glue from the creation labels and the operation log.
    fn replay(&mut self) {
        for t in self.tiles.iter_mut().filter(|t| t.alive) {
            t.glues = t.created.clone();
        }
        self.linked.clear();
        let log = std::mem::take(&mut self.log);
        for op in &log {
            match *op {
                RawOp::Create { tile, from, side, back } => {
                    let label = self.tiles[from].glues[side.index()];
                    self.tiles[tile].glues[back.index()] = label;
                    self.linked.insert(label);
                }
                RawOp::Bind { cursor, side, back, target } => {
                    let new = self.tiles[cursor].glues[side.index()];
                    let old = self.tiles[target].glues[back.index()];
                    self.rename(old, new);
                    self.linked.insert(new);
                }
            }
        }
        self.log = log;
    }

    fn discrete_vect(&mut self, dx: i64, dy: i64) -> Result<(), CompileError> {
        for c in staircase(dx, dy) {
            let d = self.side(&Side::Compass(c))?;
            self.mv(d)?;
        }
        Ok(())
    }

    fn run(&mut self, stmts: &[Stmt]) -> Result<(), CompileError> {
        for s in stmts {
            self.exec(&s.instr)?;
        }
        Ok(())
    }

    fn exec(&mut self, instr: &Instr) -> Result<(), CompileError> {
        if let Instr::Seed(x, y) = instr {
            if !self.tiles.is_empty() {
                return Err(CompileError::LateSeed);
            }
            let p = self.g.from_pair(*x, *y).ok_or(CompileError::SeedPoint(*x, *y))?;
            self.seed_at(p);
            return Ok(());
        }
        self.ensure_seed();
        match instr {
            Instr::Seed(..) => unreachable!(),
            Instr::Move(s) => {
                let d = self.side(s)?;
                self.mv(d)?;
            }
            Instr::Let(x) | Instr::CurrentTile(x) => self.name(x, self.cursor),
            Instr::Bind(s, x) => {
                let d = self.side(s)?;
                let t = self.lookup(x)?;
                self.bind(d, t)?;
            }
            Instr::From(x) | Instr::RewindTo(x) => {
                let t = self.lookup(x)?;
                self.goto(t);
            }
            Instr::MoveX(n) | Instr::MoveY(n) => {
                let c = match (matches!(instr, Instr::MoveX(_)), *n >= 0) {
                    (true, true) => Compass::E,
                    (true, false) => Compass::W,
                    (false, true) => Compass::N,
                    (false, false) => Compass::S,
                };
                let d = self.side(&Side::Compass(c))?;
                for _ in 0..n.unsigned_abs() {
                    self.mv(d)?;
                }
            }
            Instr::RewindBy(k) => {
                let index = self.tiles[self.cursor].trace_pos;
                if *k as usize > index {
                    return Err(CompileError::RewindPastStart { k: *k, index });
                }
                let t = self.trace[index - *k as usize];
                self.goto(t);
            }
            Instr::NextTile { of, name } => {
                let t = self.lookup(of)?;
                let i = self.tiles[t].trace_pos + 1;
                let n = *self.trace.get(i).ok_or_else(|| CompileError::TraceEnd(of.clone(), "next"))?;
                self.name(name, n);
            }
            Instr::PrevTile { of, name } => {
                let t = self.lookup(of)?;
                let i = self.tiles[t].trace_pos;
                if i == 0 {
                    return Err(CompileError::TraceEnd(of.clone(), "previous"));
                }
                let p = self.trace[i - 1];
                self.name(name, p);
            }
            Instr::EraseAfter(x) => {
                let t = self.lookup(x)?;
                self.erase_after(t);
            }
            Instr::Repeat(k, body) => {
                for _ in 0..*k {
                    self.run(body)?;
                }
            }
            Instr::Pump(body) => {
                let start = self.trace.len();
                let log_start = self.log.len();
                self.run(body)?;
                if self.trace.len() == start {
                    return Err(CompileError::EmptyPump);
                }
                let first = self.trace[start];
                let (side, entry) = self.log[log_start..]
                    .iter()
                    .find_map(|op| match op {
                        RawOp::Create { tile, side, back, .. } if *tile == first => Some((*side, *back)),
                        _ => None,
                    })
                    .expect("every traced tile but the seed has a creation record");
                self.bind(side, first)?;
                self.pumps.push((first, self.cursor, side, entry, self.color.clone()));
            }
            Instr::DiscreteVect(dx, dy) => self.discrete_vect(*dx, *dy)?,
            Instr::SetColor(c) => self.color = Some(c.clone()),
        }
        Ok(())
    }

    fn finish(self) -> CompileOutput<G> {
        let out_id: HashMap<usize, TileId> = self.trace.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut relabel: HashMap<u32, u32> = HashMap::new();
        let mut tiles = Vec::with_capacity(self.trace.len());
        let mut positions = Vec::with_capacity(self.trace.len());
        for (i, &raw) in self.trace.iter().enumerate() {
            let t = &self.tiles[raw];
            let glues = t
                .glues
                .iter()
                .map(|l| {
                    let n = relabel.len() as u32 + 1;
                    Glue::new(*relabel.entry(*l).or_insert(n))
                })
                .collect();
            let name = t.name.clone().or_else(|| (i == 0).then(|| "σ".to_string()));
            tiles.push(TileType { name, color: t.color.clone(), glues });
            positions.push(t.pos.clone());
        }
        let ops = self
            .log
            .iter()
            .map(|op| match *op {
                RawOp::Create { tile, from, side, .. } => CoreOp::Create { tile: out_id[&tile], from: out_id[&from], side },
                RawOp::Bind { cursor, side, target, .. } => {
                    CoreOp::Bind { cursor: out_id[&cursor], side, target: out_id[&target] }
                }
            })
            .collect();
        let names = self
            .env
            .iter()
            .filter_map(|(k, v)| out_id.get(v).map(|id| (k.clone(), *id)))
            .collect();
        let pumps = self
            .pumps
            .iter()
            .map(|(f, l, side, entry, color)| PumpSegment {
                first: out_id[f],
                last: out_id[l],
                side: *side,
                entry: *entry,
                color: color.clone(),
            })
            .collect();
        let linked_labels = self.linked.iter().filter_map(|l| relabel.get(l).copied()).collect();
        let tileset = Tileset::new(self.kind, tiles);
        let seed = vec![(positions[0].clone(), 0)];
        CompileOutput {
            system: TileSystem::new(self.g.clone(), tileset, seed),
            positions,
            names,
            pumps,
            ops,
            linked_labels,
        }
    }
}

/// Balanced monotone staircase of `|dx| + |dy|` unit moves toward `(dx, dy)`.
///
/// Each step takes the axis whose next half-step lies earlier along the
/// segment; ties go horizontal.
pub fn staircase(dx: i64, dy: i64) -> Vec<Compass> {
    let (ax, ay) = (dx.unsigned_abs() as u128, dy.unsigned_abs() as u128);
    let hc = if dx >= 0 { Compass::E } else { Compass::W };
    let vc = if dy >= 0 { Compass::N } else { Compass::S };
    let (mut h, mut v) = (0u128, 0u128);
    let mut out = Vec::with_capacity((ax + ay) as usize);
    while h < ax || v < ay {
        let horizontal = v == ay || (h < ax && (2 * h + 1) * ay <= (2 * v + 1) * ax);
        if horizontal {
            h += 1;
            out.push(hc);
        } else {
            v += 1;
            out.push(vc);
        }
    }
    out
}

pub fn compile<G: Geometry>(p: &Program, g: &G) -> Result<CompileOutput<G>, CompileError> {
    let mut b = Builder::new(g);
    b.run(&p.stmts)?;
    b.ensure_seed();
    Ok(b.finish())
}

fn side_instr(kind: GeometryKind, d: Direction) -> Side {
    if kind == GeometryKind::Z2 {
        let c = Compass::ALL.into_iter().find(|c| c.direction() == d).expect("z2 side");
        Side::Compass(c)
    } else {
        Side::Key(kind.side_key(d))
    }
}

/// Emit a core program replaying `ops` from a seed at `seed`.
fn emit_core(kind: GeometryKind, seed: Option<(i64, i64)>, ops: &[CoreOp]) -> Program {
    let mut needs_name = BTreeSet::new();
    let mut cursor = 0;
    for op in ops {
        match *op {
            CoreOp::Create { tile, from, .. } => {
                if from != cursor {
                    needs_name.insert(from);
                }
                cursor = tile;
            }
            CoreOp::Bind { cursor: c, target, .. } => {
                if c != cursor {
                    needs_name.insert(c);
                }
                needs_name.insert(target);
                cursor = c;
            }
        }
    }
    let name = |t: TileId| format!("t{t}");
    let mut p = Program::default();
    if let Some((x, y)) = seed {
        p.push(Instr::Seed(x, y));
    }
    if needs_name.contains(&0) {
        p.push(Instr::Let(name(0)));
    }
    let mut cursor = 0;
    for op in ops {
        match *op {
            CoreOp::Create { tile, from, side } => {
                if from != cursor {
                    p.push(Instr::From(name(from)));
                }
                p.push(Instr::Move(side_instr(kind, side)));
                if needs_name.contains(&tile) {
                    p.push(Instr::Let(name(tile)));
                }
                cursor = tile;
            }
            CoreOp::Bind { cursor: c, side, target } => {
                if c != cursor {
                    p.push(Instr::From(name(c)));
                }
                p.push(Instr::Bind(side_instr(kind, side), name(target)));
                cursor = c;
            }
        }
    }
    p
}

/// Rewrite a program with sugar into the core language.
pub fn export_core<G: Geometry>(p: &Program, g: &G) -> Result<Program, CompileError> {
    let out = compile(p, g)?;
    let seed = g.planar(&out.positions[0]).filter(|_| g.kind() == GeometryKind::Z2);
    Ok(emit_core(g.kind(), seed, &out.ops))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecompileError {
    #[error("seed must contain exactly one tile, found {0}")]
    SeedSize(usize),
    #[error("decompilation needs a geometry with fixed opposite sides, got {0}")]
    Geometry(String),
    #[error("tiles not reachable from the seed: {0:?}")]
    Unreachable(Vec<TileId>),
    #[error("unknown tile id {0}")]
    UnknownTile(TileId),
}

/// Core program whose compilation is isomorphic to `(ts, seed)`.
///
/// Breadth-first over the attachment relation from the seed tile: each newly
/// reached tile is created by a move, and every matching not produced that way
/// is added with a bind.
pub fn decompile(ts: &Tileset, seed: &[(Option<(i64, i64)>, TileId)]) -> Result<Program, DecompileError> {
    if !ts.geometry.is_involutive() {
        return Err(DecompileError::Geometry(ts.geometry.name()));
    }
    let [(seed_pos, root)] = seed else {
        return Err(DecompileError::SeedSize(seed.len()));
    };
    let root = *root;
    if root >= ts.len() {
        return Err(DecompileError::UnknownTile(root));
    }
    let sides = ts.geometry.sides() as u8;
    let index = ts.side_index();
    let matches_of = |t: TileId, d: Direction| -> Vec<TileId> {
        let g = ts.tiles[t].glue(d);
        if !g.is_active() {
            return Vec::new();
        }
        index.get(&(d.negate().0, g.label)).cloned().unwrap_or_default()
    };

    // Compiled ids follow creation order.
    let mut compiled: HashMap<TileId, TileId> = HashMap::from([(root, 0)]);
    let mut ops = Vec::new();
    let mut induced: HashSet<(TileId, u8, TileId)> = HashSet::new();
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        for d in (0..sides).map(Direction) {
            for u in matches_of(t, d) {
                if compiled.contains_key(&u) {
                    continue;
                }
                let id = compiled.len();
                compiled.insert(u, id);
                ops.push(CoreOp::Create { tile: id, from: compiled[&t], side: d });
                induced.insert((t, d.0, u));
                induced.insert((u, d.negate().0, t));
                queue.push_back(u);
            }
        }
    }
    let mut missing: Vec<TileId> = (0..ts.len()).filter(|t| !compiled.contains_key(t)).collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        return Err(DecompileError::Unreachable(missing));
    }
    let mut order: Vec<TileId> = compiled.keys().copied().collect();
    order.sort_by_key(|t| compiled[t]);
    for &t in &order {
        for d in (0..sides).map(Direction) {
            for u in matches_of(t, d) {
                if induced.insert((t, d.0, u)) {
                    induced.insert((u, d.negate().0, t));
                    ops.push(CoreOp::Bind { cursor: compiled[&t], side: d, target: compiled[&u] });
                }
            }
        }
    }
    Ok(emit_core(ts.geometry, *seed_pos, &ops))
}

/// Decompile a system, taking the seed position from the geometry when planar.
pub fn decompile_system<G: Geometry>(sys: &TileSystem<G>) -> Result<Program, DecompileError> {
    let seed: Vec<(Option<(i64, i64)>, TileId)> = sys
        .seed
        .iter()
        .map(|(p, t)| (sys.geometry.planar(p).filter(|_| sys.geometry.kind() == GeometryKind::Z2), *t))
        .collect();
    decompile(&sys.tileset, &seed)
}

/// Glue table with labels that can never bind replaced by 0.
///
/// A label is live when it occurs on some side `d` and on some side that can
/// abut `d`.
pub fn effective_labels(ts: &Tileset) -> Vec<Vec<u32>> {
    let mut slots: HashMap<u32, HashSet<u8>> = HashMap::new();
    for t in &ts.tiles {
        for (side, g) in t.glues.iter().enumerate() {
            if g.is_active() {
                slots.entry(g.label).or_default().insert(side as u8);
            }
        }
    }
    let live = |label: u32, side: u8| -> bool {
        let Some(s) = slots.get(&label) else { return false };
        ts.geometry.partner_sides(Direction(side)).iter().any(|p| s.contains(&p.0))
    };
    ts.tiles
        .iter()
        .map(|t| {
            t.glues
                .iter()
                .enumerate()
                .map(|(side, g)| if g.is_active() && live(g.label, side as u8) { g.label } else { 0 })
                .collect()
        })
        .collect()
}

/// Give a label a separate identity on each class of mutually abutting
/// sides, since the same label on N/S and on E/W never interacts.
fn split_by_axis(ts: &Tileset, labels: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let sides = ts.geometry.sides();
    let mut class: Vec<usize> = (0..sides).collect();
    loop {
        let mut changed = false;
        for s in 0..sides {
            for p in ts.geometry.partner_sides(Direction(s as u8)) {
                let m = class[s].min(class[p.index()]);
                if class[s] != m || class[p.index()] != m {
                    class[s] = m;
                    class[p.index()] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut ids: HashMap<(usize, u32), u32> = HashMap::new();
    labels
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(s, l)| {
                    if l == 0 {
                        return 0;
                    }
                    let n = ids.len() as u32 + 1;
                    *ids.entry((class[s], l)).or_insert(n)
                })
                .collect()
        })
        .collect()
}

/// Candidates, next position, and label pairs added by the current choice.
type Frame = (Vec<TileId>, usize, Vec<(u32, u32)>);

/// Tile and glue bijection between two tilesets, mapping seed to seed, that
/// preserves every binding-relevant glue. Names and colors are ignored.
pub fn isomorphism(a: &Tileset, seed_a: TileId, b: &Tileset, seed_b: TileId) -> Option<Vec<TileId>> {
    if a.geometry != b.geometry || a.len() != b.len() || seed_a >= a.len() || seed_b >= b.len() {
        return None;
    }
    let ea = split_by_axis(a, effective_labels(a));
    let eb = split_by_axis(b, effective_labels(b));
    let sides = a.geometry.sides();

    // Joint colour refinement over tiles; seeds get a distinguished start colour.
    let mut interner: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut intern = |v: Vec<u64>| -> u64 {
        let n = interner.len() as u64;
        *interner.entry(v).or_insert(n)
    };
    let init = |e: &Vec<Vec<u32>>, seed: TileId, i: usize| -> Vec<u64> {
        let mut v: Vec<u64> = e[i].iter().map(|l| (*l != 0) as u64).collect();
        v.push((i == seed) as u64);
        v
    };
    let mut ca: Vec<u64> = (0..a.len()).map(|i| intern(init(&ea, seed_a, i))).collect();
    let mut cb: Vec<u64> = (0..b.len()).map(|i| intern(init(&eb, seed_b, i))).collect();
    // A few rounds suffice for pruning; the search below enforces the rest.
    let mut classes = 0;
    for _ in 0..8 {
        let label_sig = |e: &Vec<Vec<u32>>, c: &Vec<u64>| -> HashMap<u32, Vec<(usize, u64)>> {
            let mut m: HashMap<u32, Vec<(usize, u64)>> = HashMap::new();
            for (i, row) in e.iter().enumerate() {
                for (side, &l) in row.iter().enumerate() {
                    if l != 0 {
                        m.entry(l).or_default().push((side, c[i]));
                    }
                }
            }
            for v in m.values_mut() {
                v.sort_unstable();
            }
            m
        };
        let la = label_sig(&ea, &ca);
        let lb = label_sig(&eb, &cb);
        let refine = |e: &Vec<Vec<u32>>, c: &Vec<u64>, l: &HashMap<u32, Vec<(usize, u64)>>, intern: &mut dyn FnMut(Vec<u64>) -> u64| {
            (0..e.len())
                .map(|i| {
                    let mut v = vec![c[i]];
                    for &lab in &e[i] {
                        v.push(u64::MAX);
                        if lab != 0 {
                            for &(s, col) in &l[&lab] {
                                v.push(s as u64);
                                v.push(col);
                            }
                        }
                    }
                    intern(v)
                })
                .collect::<Vec<u64>>()
        };
        let na = refine(&ea, &ca, &la, &mut intern);
        let nb = refine(&eb, &cb, &lb, &mut intern);
        ca = na;
        cb = nb;
        let mut all: Vec<u64> = ca.iter().chain(cb.iter()).copied().collect();
        all.sort_unstable();
        all.dedup();
        if all.len() == classes {
            break;
        }
        classes = all.len();
    }
    let mut hist_a: HashMap<u64, usize> = HashMap::new();
    let mut hist_b: HashMap<u64, usize> = HashMap::new();
    for c in &ca {
        *hist_a.entry(*c).or_default() += 1;
    }
    for c in &cb {
        *hist_b.entry(*c).or_default() += 1;
    }
    if hist_a != hist_b || ca[seed_a] != cb[seed_b] {
        return None;
    }

    // Visit tiles of `a` outward from the seed so constraints propagate.
    let mut order = Vec::with_capacity(a.len());
    let mut seen = vec![false; a.len()];
    let mut by_label_a: HashMap<u32, Vec<TileId>> = HashMap::new();
    for (i, row) in ea.iter().enumerate() {
        for &l in row {
            if l != 0 {
                by_label_a.entry(l).or_default().push(i);
            }
        }
    }
    for start in std::iter::once(seed_a).chain(0..a.len()) {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(t) = q.pop_front() {
            order.push(t);
            for &l in &ea[t] {
                if l == 0 {
                    continue;
                }
                for &u in &by_label_a[&l] {
                    if !seen[u] {
                        seen[u] = true;
                        q.push_back(u);
                    }
                }
            }
        }
    }
    let mut by_slot_b: HashMap<(usize, u32), Vec<TileId>> = HashMap::new();
    let mut by_color_b: HashMap<u64, Vec<TileId>> = HashMap::new();
    for (i, row) in eb.iter().enumerate() {
        by_color_b.entry(cb[i]).or_default().push(i);
        for (s, &l) in row.iter().enumerate() {
            if l != 0 {
                by_slot_b.entry((s, l)).or_default().push(i);
            }
        }
    }

    struct Search<'x> {
        ea: &'x [Vec<u32>],
        eb: &'x [Vec<u32>],
        ca: &'x [u64],
        cb: &'x [u64],
        order: &'x [TileId],
        by_slot_b: &'x HashMap<(usize, u32), Vec<TileId>>,
        by_color_b: &'x HashMap<u64, Vec<TileId>>,
        map: Vec<Option<TileId>>,
        used: Vec<bool>,
        lab_ab: HashMap<u32, u32>,
        lab_ba: HashMap<u32, u32>,
        sides: usize,
        budget: u64,
    }

    impl Search<'_> {
        fn candidates(&self, t: TileId) -> Vec<TileId> {
            for s in 0..self.sides {
                let l = self.ea[t][s];
                if l == 0 {
                    continue;
                }
                if let Some(lb) = self.lab_ab.get(&l) {
                    return self.by_slot_b.get(&(s, *lb)).cloned().unwrap_or_default();
                }
            }
            self.by_color_b.get(&self.ca[t]).cloned().unwrap_or_default()
        }

        /// Try `u` as the image of `t`, recording new label pairs in `added`.
        fn assign(&mut self, t: TileId, u: TileId, added: &mut Vec<(u32, u32)>) -> bool {
            if self.used[u] || self.ca[t] != self.cb[u] {
                return false;
            }
            for s in 0..self.sides {
                let (la, lb) = (self.ea[t][s], self.eb[u][s]);
                if (la == 0) != (lb == 0) {
                    return false;
                }
                if la == 0 {
                    continue;
                }
                match (self.lab_ab.get(&la), self.lab_ba.get(&lb)) {
                    (Some(x), _) if *x != lb => return false,
                    (_, Some(y)) if *y != la => return false,
                    (None, None) => {
                        self.lab_ab.insert(la, lb);
                        self.lab_ba.insert(lb, la);
                        added.push((la, lb));
                    }
                    _ => {}
                }
            }
            self.map[t] = Some(u);
            self.used[u] = true;
            true
        }

        fn undo(&mut self, t: TileId, added: &mut Vec<(u32, u32)>) {
            if let Some(u) = self.map[t].take() {
                self.used[u] = false;
            }
            for (la, lb) in added.drain(..) {
                self.lab_ab.remove(&la);
                self.lab_ba.remove(&lb);
            }
        }

        /// Depth-first search over `order` with an explicit stack.
        fn run(&mut self) -> bool {
            if self.order.is_empty() {
                return true;
            }
            let mut frames: Vec<Frame> =
                vec![(self.candidates(self.order[0]), 0, Vec::new())];
            while let Some(depth) = frames.len().checked_sub(1) {
                let t = self.order[depth];
                let mut added = std::mem::take(&mut frames[depth].2);
                self.undo(t, &mut added);
                let mut advanced = false;
                while frames[depth].1 < frames[depth].0.len() {
                    let u = frames[depth].0[frames[depth].1];
                    frames[depth].1 += 1;
                    if self.assign(t, u, &mut added) {
                        advanced = true;
                        break;
                    }
                    self.undo(t, &mut added);
                }
                if !advanced {
                    frames.pop();
                    continue;
                }
                frames[depth].2 = added;
                if depth + 1 == self.order.len() {
                    return true;
                }
                if self.budget == 0 {
                    return false;
                }
                self.budget -= 1;
                let next = self.candidates(self.order[depth + 1]);
                frames.push((next, 0, Vec::new()));
            }
            false
        }
    }

    // The seed must map to the seed: put it first and restrict its candidates.
    let mut s = Search {
        ea: &ea,
        eb: &eb,
        ca: &ca,
        cb: &cb,
        order: &order,
        by_slot_b: &by_slot_b,
        by_color_b: &by_color_b,
        map: vec![None; a.len()],
        used: vec![false; b.len()],
        lab_ab: HashMap::new(),
        lab_ba: HashMap::new(),
        sides,
        budget: 50_000_000,
    };
    // Seed colours are unique on both sides, so colour equality pins seed_a to seed_b.
    if !s.run() {
        return None;
    }
    s.map.into_iter().collect()
}

pub fn isomorphic(a: &Tileset, seed_a: TileId, b: &Tileset, seed_b: TileId) -> bool {
    isomorphism(a, seed_a, b, seed_b).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::geometry::{Z2Point, Z2};

    fn c(src: &str) -> CompileOutput<Z2> {
        compile(&parse(src).unwrap(), &Z2).unwrap()
    }

    #[test]
    fn column_compiles_to_three_tiles() {
        let out = c("seed 0 0\nmoveN\nmoveN");
        assert_eq!(out.tile_count(), 3);
        assert_eq!(out.seed_point(), Z2Point::new(0, 0));
        let ts = out.tileset();
        assert_eq!(ts.tiles[0].glue(Direction::N), ts.tiles[1].glue(Direction::S));
        assert_eq!(ts.tiles[1].glue(Direction::N), ts.tiles[2].glue(Direction::S));
        assert_ne!(ts.tiles[0].glue(Direction::E), ts.tiles[1].glue(Direction::W));
        assert_eq!(out.positions[2], Z2Point::new(0, 2));
    }

    #[test]
    fn glue_labels_are_dense_by_first_use() {
        let out = c("moveE");
        let labels: Vec<u32> = out.tileset().tiles.iter().flat_map(|t| t.glues.iter().map(|g| g.label)).collect();
        assert_eq!(labels, vec![1, 2, 3, 4, 5, 1, 6, 7]);
    }

    #[test]
    fn bind_renames_both_sides_of_the_axis() {
        let out = c("tile a\nmoveN\nmoveE\nbind N a");
        let ts = out.tileset();
        let top = ts.tiles[2].glue(Direction::N);
        assert_eq!(ts.tiles[0].glue(Direction::S), top);
        assert_ne!(ts.tiles[0].glue(Direction::N), top);
    }

    #[test]
    fn bind_unifies_with_predecessor() {
        let out = c("moveN\ntile a\nfrom a\nmoveE\nbind N a");
        let ts = out.tileset();
        // `a` was entered from the seed; the seed's N glue follows the rename.
        assert_eq!(ts.tiles[0].glue(Direction::N), ts.tiles[2].glue(Direction::N));
        assert_eq!(ts.tiles[1].glue(Direction::S), ts.tiles[2].glue(Direction::N));
    }

    #[test]
    fn rewind_by_is_relative_to_the_cursor() {
        let out = c("moveN\nmoveN\ntile top\nmoveE\nrewindTo top\nrewindBy 1\nmoveW");
        assert_eq!(out.positions[4], Z2Point::new(-1, 1));
        let e = compile(&parse("moveN\nrewindBy 2").unwrap(), &Z2).unwrap_err();
        assert_eq!(e, CompileError::RewindPastStart { k: 2, index: 1 });
    }

    #[test]
    fn next_and_prev_follow_creation_order() {
        let out = c("moveN\ntile a\nmoveN\nmoveN\nnext a b\nprev a z");
        assert_eq!(out.names["b"], 2);
        assert_eq!(out.names["z"], 0);
    }

    #[test]
    fn erase_after_drops_tiles_and_binds() {
        let out = c("tile s\nmoveN\ntile c\nmoveE\nbind S s\neraseAfter c\nmoveW");
        assert_eq!(out.tile_count(), 3);
        assert_eq!(out.positions[2], Z2Point::new(-1, 1));
        let fresh = c("moveN\nmoveW");
        assert!(isomorphic(out.tileset(), 0, fresh.tileset(), 0));
        let e = compile(&parse("tile s\nmoveN\ntile c\neraseAfter s\nfrom c").unwrap(), &Z2).unwrap_err();
        assert_eq!(e, CompileError::Erased("c".into()));
    }

    #[test]
    fn pump_links_exit_to_entry() {
        let out = c("moveE\npump { moveN; moveE }");
        assert_eq!(out.tile_count(), 4);
        let p = &out.pumps[0];
        assert_eq!((p.first, p.last, p.side), (2, 3, Direction::N));
        let ts = out.tileset();
        assert_eq!(ts.tiles[p.last].glue(p.side), ts.tiles[p.first].glue(p.entry));
        assert_eq!(ts.tiles[1].glue(Direction::N), ts.tiles[p.first].glue(p.entry));
        assert_eq!(compile(&parse("pump { color red }").unwrap(), &Z2).unwrap_err(), CompileError::EmptyPump);
    }

    #[test]
    fn seed_must_come_first() {
        assert_eq!(compile(&parse("moveN\nseed 1 1").unwrap(), &Z2).unwrap_err(), CompileError::LateSeed);
    }

    #[test]
    fn staircase_is_balanced() {
        use Compass::*;
        assert_eq!(staircase(2, 2), vec![E, N, E, N]);
        assert_eq!(staircase(-1, 3), vec![N, W, N, N]);
        assert_eq!(staircase(0, 0), vec![]);
        assert_eq!(staircase(3, 0), vec![E, E, E]);
    }

    #[test]
    fn export_core_unrolls() {
        let g = Z2;
        let p = parse("repeat 2 { moveN }").unwrap();
        let core = export_core(&p, &g).unwrap();
        assert_eq!(core, parse("seed 0 0\nmoveN\nmoveN").unwrap());
        let p = parse("pump { moveN; moveE }").unwrap();
        let core = export_core(&p, &g).unwrap();
        assert_eq!(core, parse("seed 0 0\nmoveN\nlet t1\nmoveE\nbind N t1").unwrap());
    }

    #[test]
    fn decompile_small_cases() {
        let one = Tileset::new(GeometryKind::Z2, vec![TileType::nesw(0, 0, 0, 0)]);
        assert_eq!(decompile(&one, &[(Some((0, 0)), 0)]).unwrap(), parse("seed 0 0").unwrap());
        let column = c("seed 0 0\nmoveN\nmoveN");
        let back = decompile_system(&column.system).unwrap();
        assert_eq!(back, parse("seed 0 0\nmoveN\nmoveN").unwrap());
    }

    #[test]
    fn decompile_reports_unreachable() {
        let ts = Tileset::new(GeometryKind::Z2, vec![TileType::nesw(1, 0, 0, 0), TileType::nesw(0, 0, 2, 0)]);
        assert_eq!(decompile(&ts, &[(None, 0)]).unwrap_err(), DecompileError::Unreachable(vec![1]));
    }

    #[test]
    fn isomorphism_ignores_inert_labels_and_order() {
        let a = Tileset::new(GeometryKind::Z2, vec![TileType::nesw(1, 7, 0, 0), TileType::nesw(2, 0, 1, 0), TileType::nesw(0, 0, 2, 9)]);
        let b = Tileset::new(GeometryKind::Z2, vec![TileType::nesw(5, 0, 0, 0), TileType::nesw(0, 0, 4, 0), TileType::nesw(4, 0, 5, 0)]);
        assert_eq!(isomorphism(&a, 0, &b, 0), Some(vec![0, 2, 1]));
        assert!(!isomorphic(&a, 0, &b, 1));
        let c2 = Tileset::new(GeometryKind::Z2, vec![TileType::nesw(5, 0, 0, 0), TileType::nesw(0, 0, 5, 0), TileType::nesw(0, 0, 5, 0)]);
        assert!(!isomorphic(&a, 0, &c2, 0));
    }
}

//! Measurements on grid assemblies: Manhattan metrics, growth paths, caves,
//! pumpability witnesses and partially pumped runs.

use std::collections::HashMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{Direction, Z2Point};
use crate::simulator::Attachment;
use crate::tiles::{bonds, Assembly, TileId, Tileset};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("seed point {0} is not part of the assembly")]
    SeedAbsent(Z2Point),
    #[error("assembly sequence is empty or does not start at a seed")]
    MissingSequence,
    #[error("sequence entry {0} names a parent that was not placed before it")]
    BadParent(usize),
    #[error("no terminal assembly given")]
    NoAssembly,
}

/// Largest `|dx| + |dy|` over pairs of placed points, in one pass.
pub fn manhattan_diameter(a: &Assembly<Z2Point>) -> i64 {
    let mut it = a.iter().map(|(p, _)| (p.x + p.y, p.x - p.y));
    let Some((s0, d0)) = it.next() else { return 0 };
    let (mut smin, mut smax, mut dmin, mut dmax) = (s0, s0, d0, d0);
    for (s, d) in it {
        smin = smin.min(s);
        smax = smax.max(s);
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    (smax - smin).max(dmax - dmin)
}

pub fn manhattan_radius(a: &Assembly<Z2Point>, seed: Z2Point) -> Result<i64, AnalysisError> {
    if !a.contains(&seed) {
        return Err(AnalysisError::SeedAbsent(seed));
    }
    Ok(a.iter().map(|(p, _)| p.manhattan(&seed)).max().unwrap_or(0))
}

/// Number of occupied columns and rows of the bounding box.
pub fn extents(a: &Assembly<Z2Point>) -> (i64, i64) {
    if a.is_empty() {
        return (0, 0);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for (p, _) in a.iter() {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0 + 1, y1 - y0 + 1)
}

/// A self-avoiding grid path with the tile type at each point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Path {
    pub points: Vec<Z2Point>,
    pub tiles: Vec<TileId>,
}

impl Path {
    pub fn new(points: Vec<Z2Point>, tiles: Vec<TileId>) -> Self {
        assert_eq!(points.len(), tiles.len());
        Path { points, tiles }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Walk unit moves from `start`, assigning `tiles` in order.
    pub fn from_moves(start: Z2Point, moves: &[crate::geometry::Compass], tiles: Vec<TileId>) -> Self {
        let mut points = vec![start];
        for m in moves {
            let p = points.last().unwrap().offset(*m);
            points.push(p);
        }
        Path::new(points, tiles)
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.points.iter().all(|p| seen.insert(*p))
    }

    fn step(&self, i: usize) -> (i64, i64) {
        let (p, q) = (self.points[i], self.points[i + 1]);
        (q.x - p.x, q.y - p.y)
    }
}

/// Growth tree of an assembly sequence, rooted at the seed.
#[derive(Clone, Debug)]
pub struct GrowthTree {
    pub points: Vec<Z2Point>,
    pub tiles: Vec<TileId>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

pub fn extract_paths(seq: &[Attachment<Z2Point>]) -> Result<GrowthTree, AnalysisError> {
    if seq.is_empty() || seq[0].parent.is_some() {
        return Err(AnalysisError::MissingSequence);
    }
    let mut index: HashMap<Z2Point, usize> = HashMap::new();
    let mut tree = GrowthTree {
        points: Vec::with_capacity(seq.len()),
        tiles: Vec::with_capacity(seq.len()),
        parent: Vec::with_capacity(seq.len()),
        children: vec![Vec::new(); seq.len()],
    };
    for (i, s) in seq.iter().enumerate() {
        let parent = match &s.parent {
            None => None,
            Some(q) => Some(*index.get(q).ok_or(AnalysisError::BadParent(i))?),
        };
        if let Some(j) = parent {
            tree.children[j].push(i);
        }
        index.insert(s.point, i);
        tree.points.push(s.point);
        tree.tiles.push(s.tile);
        tree.parent.push(parent);
    }
    Ok(tree)
}

impl GrowthTree {
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.children[i].is_empty()).collect()
    }

    /// Root-to-node chain.
    pub fn path_to(&self, node: usize) -> Path {
        let mut chain = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent[cur] {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        Path::new(chain.iter().map(|&i| self.points[i]).collect(), chain.iter().map(|&i| self.tiles[i]).collect())
    }

    /// Every root-to-leaf chain, in leaf order.
    pub fn paths(&self) -> Vec<Path> {
        self.leaves().into_iter().map(|l| self.path_to(l)).collect()
    }

    fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.points.len()];
        for i in 0..self.points.len() {
            if let Some(p) = self.parent[i] {
                d[i] = d[p] + 1;
            }
        }
        d
    }

    /// Chain to the tile farthest from the root; ties go to the deeper, then
    /// the earlier, tile.
    pub fn main_path(&self) -> Path {
        let root = self.points[0];
        let depth = self.depths();
        let best = (0..self.points.len())
            .max_by(|&a, &b| {
                let ka = (self.points[a].manhattan(&root), depth[a]);
                let kb = (self.points[b].manhattan(&root), depth[b]);
                ka.cmp(&kb).then(b.cmp(&a))
            })
            .unwrap_or(0);
        self.path_to(best)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Dips below a level, measured on y.
    Vertical,
    /// The same on x.
    Horizontal,
}

/// Index pairs `(i, j)`, `j >= i + 2`, with `c_i = c_j`, no earlier point above
/// `c_i` and every point strictly between them strictly below it.
pub fn find_caves(p: &Path, orientation: Orientation) -> Vec<(usize, usize)> {
    let c: Vec<i64> = p
        .points
        .iter()
        .map(|q| match orientation {
            Orientation::Vertical => q.y,
            Orientation::Horizontal => q.x,
        })
        .collect();
    let mut out = Vec::new();
    let mut prefix_max = i64::MIN;
    for i in 0..c.len() {
        if c[i] >= prefix_max {
            let mut k = i + 1;
            while k < c.len() && c[k] < c[i] {
                k += 1;
            }
            if k < c.len() && c[k] == c[i] && k >= i + 2 {
                out.push((i, k));
            }
        }
        prefix_max = prefix_max.max(c[i]);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PumpWitness {
    pub i: usize,
    pub j: usize,
}

pub fn is_monotone(p: &Path) -> bool {
    let mono = |f: fn(&Z2Point) -> i64| {
        let v: Vec<i64> = p.points.iter().map(f).collect();
        v.windows(2).all(|w| w[0] <= w[1]) || v.windows(2).all(|w| w[0] >= w[1])
    };
    mono(|q| q.x) || mono(|q| q.y)
}

fn side_of(dx: i64, dy: i64) -> Option<Direction> {
    match (dx, dy) {
        (1, 0) => Some(Direction::E),
        (-1, 0) => Some(Direction::W),
        (0, 1) => Some(Direction::N),
        (0, -1) => Some(Direction::S),
        _ => None,
    }
}

/// Lay out `P[0..i]` followed by `reps` copies of `P[i..j)` and check that the
/// result never puts two types on one point and that consecutive tiles bond.
pub fn verify_pump(p: &Path, ts: &Tileset, w: PumpWitness, reps: usize) -> bool {
    let PumpWitness { i, j } = w;
    if !(i < j && j < p.len() && p.tiles[i] == p.tiles[j]) {
        return false;
    }
    let (sx, sy) = (p.points[j].x - p.points[i].x, p.points[j].y - p.points[i].y);
    let mut laid: Vec<(Z2Point, TileId)> = (0..i).map(|k| (p.points[k], p.tiles[k])).collect();
    for r in 0..reps as i64 {
        for k in i..j {
            let q = Z2Point::new(p.points[k].x + r * sx, p.points[k].y + r * sy);
            laid.push((q, p.tiles[k]));
        }
    }
    let mut at: HashMap<Z2Point, TileId> = HashMap::new();
    for (q, t) in &laid {
        if let Some(old) = at.insert(*q, *t) {
            if old != *t {
                return false;
            }
        }
    }
    laid.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        match (side_of(b.0.x - a.0.x, b.0.y - a.0.y), ts.tiles.get(a.1), ts.tiles.get(b.1)) {
            (Some(d), Some(ta), Some(tb)) => bonds(ta, d, tb, d.negate()),
            _ => false,
        }
    })
}

/// First repeat `(i, j)` on a monotone path whose three-fold expansion
/// verifies, scanning `j` upwards.
pub fn monotone_pump_check(p: &Path, ts: &Tileset) -> Option<PumpWitness> {
    if !is_monotone(p) {
        return None;
    }
    let mut last: HashMap<TileId, Vec<usize>> = HashMap::new();
    for j in 0..p.len() {
        if let Some(prev) = last.get(&p.tiles[j]) {
            for &i in prev.iter().rev() {
                let w = PumpWitness { i, j };
                if verify_pump(p, ts, w, 3) {
                    return Some(w);
                }
            }
        }
        last.entry(p.tiles[j]).or_default().push(j);
    }
    None
}

/// A maximal periodic stretch of a path word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialPump {
    pub start: usize,
    pub period: usize,
    /// Symbols covered, starting at `start`.
    pub len: usize,
    /// Copies of the block, counting a final copy that is at least half done.
    pub reps: usize,
}

/// Symbol `k` is the tile type at `k` with the displacement to `k + 1`.
fn pump_word(p: &Path) -> Vec<(TileId, (i64, i64))> {
    (0..p.len()).map(|k| (p.tiles[k], if k + 1 < p.len() { p.step(k) } else { (0, 0) })).collect()
}

/// Maximal runs of at least `min_reps` consecutive copies of one block in
/// the (type, displacement) word, reported with their primitive period.
///
/// The last copy may be cut short, as when a blocker stops the repetition,
/// but must cover at least half of the block.
pub fn find_partial_pumps(p: &Path, min_reps: usize) -> Vec<PartialPump> {
    let min_reps = min_reps.max(2);
    let word = pump_word(p);
    let mut occ: HashMap<(TileId, (i64, i64)), Vec<usize>> = HashMap::new();
    for (k, s) in word.iter().enumerate() {
        occ.entry(*s).or_default().push(k);
    }
    let max_period = 2 * word.len() / (2 * min_reps - 1);
    let mut by_period: HashMap<usize, Vec<usize>> = HashMap::new();
    for list in occ.values() {
        for (a, &x) in list.iter().enumerate() {
            for &y in &list[a + 1..] {
                if y - x > max_period {
                    break;
                }
                by_period.entry(y - x).or_default().push(x);
            }
        }
    }
    let mut periods: Vec<usize> = by_period.keys().copied().collect();
    periods.sort_unstable();
    let mut runs: Vec<PartialPump> = Vec::new();
    for period in periods {
        let mut starts = by_period.remove(&period).unwrap();
        starts.sort_unstable();
        let mut s = 0;
        while s < starts.len() {
            let mut e = s;
            while e + 1 < starts.len() && starts[e + 1] == starts[e] + 1 {
                e += 1;
            }
            let (start, len) = (starts[s], e - s + 1 + period);
            let reps = len / period + usize::from(2 * (len % period) >= period);
            let covered =
                runs.iter().any(|r| period % r.period == 0 && r.start <= start && r.start + r.len >= start + len);
            if reps >= min_reps && !covered {
                runs.push(PartialPump { start, period, len, reps });
            }
            s = e + 1;
        }
    }
    runs.sort_by_key(|r| (r.start, r.period));
    runs
}

/// Expand a run's block from its start and compare with the path word.
pub fn run_matches(p: &Path, r: PartialPump) -> bool {
    let word = pump_word(p);
    r.period > 0
        && r.start + r.len <= word.len()
        && (r.start..r.start + r.len).all(|k| word[k] == word[r.start + (k - r.start) % r.period])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfficiencyReport {
    pub tiles: usize,
    pub seed_size: usize,
    /// Smallest diameter over the given terminal assemblies.
    pub diameter: i64,
    pub radius: i64,
    pub x_extent: i64,
    pub y_extent: i64,
    pub efficient: bool,
}

impl EfficiencyReport {
    pub fn to_value(&self) -> Value {
        json!({
            "tiles": self.tiles,
            "seed_size": self.seed_size,
            "diameter": self.diameter,
            "radius": self.radius,
            "x_extent": self.x_extent,
            "y_extent": self.y_extent,
            "efficient": self.efficient,
        })
    }
}

/// Efficiency requires every assembly's diameter to exceed `|T| + |dom σ|`.
pub fn efficiency_report(
    ts: &Tileset,
    seed: &[Z2Point],
    terminals: &[&Assembly<Z2Point>],
) -> Result<EfficiencyReport, AnalysisError> {
    let first = terminals.first().ok_or(AnalysisError::NoAssembly)?;
    let bound = (ts.len() + seed.len()) as i64;
    let mut rep = EfficiencyReport {
        tiles: ts.len(),
        seed_size: seed.len(),
        diameter: i64::MAX,
        radius: i64::MAX,
        x_extent: extents(first).0,
        y_extent: extents(first).1,
        efficient: true,
    };
    for a in terminals {
        let d = manhattan_diameter(a);
        let mut r = 0;
        for s in seed {
            r = r.max(manhattan_radius(a, *s)?);
        }
        let (xe, ye) = extents(a);
        rep.diameter = rep.diameter.min(d);
        rep.radius = rep.radius.min(r);
        rep.x_extent = rep.x_extent.min(xe);
        rep.y_extent = rep.y_extent.min(ye);
        rep.efficient &= d > bound;
    }
    Ok(rep)
}

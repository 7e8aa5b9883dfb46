//! Cayley-graph geometries the tile model runs on.
//!
//! Three geometries are provided behind the [`Geometry`] trait:
//!
//! - [`Z2`]: the square grid, generators `i0 = (1,0)` and `i1 = (0,1)`.
//! - [`Bs12`]: the Baumslag-Solitar group `BS(1,2) = <a, b | ba = a²b>`, with
//!   elements stored as exact affine maps `x -> 2^k x + t`.
//! - [`Hyperbolic`]: a degree-`k` tree with every level closed into a ring.
//!
//! Sides are numbered per geometry. For the two group geometries side `2g` is
//! generator `g` and side `2g + 1` its inverse, so [`Direction::negate`] is a
//! plain bit flip. The hyperbolic tree is not a group presentation and its
//! opposite side depends on the point; use [`Geometry::step`], which always
//! reports the side of the neighbor that faces back.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::FormatError;

/// A side of a tile / an edge label of the Cayley graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction(pub u8);

impl Direction {
    /// East, `+i0`.
    pub const E: Direction = Direction(0);
    /// West, `-i0`.
    pub const W: Direction = Direction(1);
    /// North, `+i1`.
    pub const N: Direction = Direction(2);
    /// South, `-i1`.
    pub const S: Direction = Direction(3);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Opposite side for generator/inverse pairs (`Z2`, `Bs12`).
    pub fn negate(self) -> Direction {
        Direction(self.0 ^ 1)
    }

    /// Generator index and sign (`true` for the generator itself).
    pub fn generator(self) -> (usize, bool) {
        ((self.0 / 2) as usize, self.0.is_multiple_of(2))
    }
}

/// The four compass moves of the let-expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Compass {
    N,
    E,
    S,
    W,
}

impl Compass {
    pub const ALL: [Compass; 4] = [Compass::N, Compass::E, Compass::S, Compass::W];

    pub fn opposite(self) -> Compass {
        match self {
            Compass::N => Compass::S,
            Compass::S => Compass::N,
            Compass::E => Compass::W,
            Compass::W => Compass::E,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Compass::N => 'N',
            Compass::E => 'E',
            Compass::S => 'S',
            Compass::W => 'W',
        }
    }

    pub fn from_letter(c: &str) -> Option<Compass> {
        match c {
            "N" => Some(Compass::N),
            "E" => Some(Compass::E),
            "S" => Some(Compass::S),
            "W" => Some(Compass::W),
            _ => None,
        }
    }

    /// Grid displacement of one step.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Compass::N => (0, 1),
            Compass::E => (1, 0),
            Compass::S => (0, -1),
            Compass::W => (-1, 0),
        }
    }

    /// Side index in the generator numbering shared by `Z2` and `Bs12`.
    pub fn direction(self) -> Direction {
        match self {
            Compass::N => Direction::N,
            Compass::E => Direction::E,
            Compass::S => Direction::S,
            Compass::W => Direction::W,
        }
    }
}

impl fmt::Display for Compass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Serializable geometry tag, as written in tileset headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Z2,
    Bs12,
    Hyperbolic { degree: u32 },
}

impl GeometryKind {
    pub fn name(&self) -> String {
        match self {
            GeometryKind::Z2 => "z2".to_string(),
            GeometryKind::Bs12 => "bs-1-2".to_string(),
            GeometryKind::Hyperbolic { degree } => format!("hyp-k{degree}"),
        }
    }

    pub fn parse(name: &str) -> Result<GeometryKind, FormatError> {
        match name {
            "z2" => Ok(GeometryKind::Z2),
            "bs-1-2" => Ok(GeometryKind::Bs12),
            other => other
                .strip_prefix("hyp-k")
                .and_then(|k| k.parse::<u32>().ok())
                .filter(|k| *k >= 2)
                .map(|degree| GeometryKind::Hyperbolic { degree })
                .ok_or_else(|| FormatError::UnknownGeometry(other.to_string())),
        }
    }

    /// Number of sides of a tile.
    pub fn sides(&self) -> usize {
        match self {
            GeometryKind::Z2 | GeometryKind::Bs12 => 4,
            GeometryKind::Hyperbolic { degree } => *degree as usize + 3,
        }
    }

    /// Side keys in serialization order.
    pub fn side_keys(&self) -> Vec<String> {
        match self {
            GeometryKind::Z2 => ["N", "E", "S", "W"].iter().map(|s| s.to_string()).collect(),
            GeometryKind::Bs12 => ["g0+", "g0-", "g1+", "g1-"].iter().map(|s| s.to_string()).collect(),
            GeometryKind::Hyperbolic { degree } => {
                let mut keys = vec!["up".to_string()];
                keys.extend((0..*degree).map(|c| format!("c{c}")));
                keys.push("ring+".to_string());
                keys.push("ring-".to_string());
                keys
            }
        }
    }

    /// Side index for each key of [`GeometryKind::side_keys`], same order.
    pub fn side_order(&self) -> Vec<Direction> {
        match self {
            GeometryKind::Z2 => vec![Direction::N, Direction::E, Direction::S, Direction::W],
            GeometryKind::Bs12 => (0..4).map(Direction).collect(),
            GeometryKind::Hyperbolic { degree } => (0..*degree as u8 + 3).map(Direction).collect(),
        }
    }

    pub fn side_key(&self, d: Direction) -> String {
        let order = self.side_order();
        let keys = self.side_keys();
        order
            .iter()
            .position(|x| *x == d)
            .map(|i| keys[i].clone())
            .unwrap_or_else(|| format!("?{}", d.0))
    }

    pub fn side_from_key(&self, key: &str) -> Option<Direction> {
        let keys = self.side_keys();
        let order = self.side_order();
        keys.iter().position(|k| k == key).map(|i| order[i])
    }

    /// `true` when every side has a fixed opposite side.
    pub fn is_involutive(&self) -> bool {
        !matches!(self, GeometryKind::Hyperbolic { .. })
    }

    /// Sides that can abut side `d` of some tile.
    pub fn partner_sides(&self, d: Direction) -> Vec<Direction> {
        match self {
            GeometryKind::Z2 | GeometryKind::Bs12 => vec![d.negate()],
            GeometryKind::Hyperbolic { degree } => {
                let k = *degree as u8;
                match d.0 {
                    0 => (1..=k).map(Direction).collect(),
                    x if x <= k => vec![Direction(0)],
                    x if x == k + 1 => vec![Direction(k + 2)],
                    _ => vec![Direction(k + 1)],
                }
            }
        }
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Region restricting where tiles may be placed during simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    /// Inclusive rectangle in planar coordinates.
    Rect { x0: i64, y0: i64, x1: i64, y1: i64 },
    /// All points of level (tree depth, or BS height) at most this value.
    MaxLevel(i64),
}

/// A Cayley graph the tile model can run on.
pub trait Geometry: Clone + fmt::Debug + Send + Sync {
    type Point: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync;

    fn kind(&self) -> GeometryKind;

    fn sides(&self) -> usize {
        self.kind().sides()
    }

    fn origin(&self) -> Self::Point;

    /// Neighbor across side `d` of `p`, together with the side of the neighbor
    /// that abuts `p`. `None` when the edge does not exist.
    fn step(&self, p: &Self::Point, d: Direction) -> Option<(Self::Point, Direction)>;

    fn neighbors(&self, p: &Self::Point) -> Vec<(Direction, Self::Point)> {
        (0..self.sides() as u8)
            .filter_map(|d| self.step(p, Direction(d)).map(|(q, _)| (Direction(d), q)))
            .collect()
    }

    /// The side used by a compass move, when the geometry has one.
    fn compass(&self, _c: Compass) -> Option<Direction> {
        None
    }

    /// Planar coordinates, for geometries embedded in the grid.
    fn planar(&self, _p: &Self::Point) -> Option<(i64, i64)> {
        None
    }

    /// Point named by a pair of integers (`seed x y`), when meaningful.
    #[allow(clippy::wrong_self_convention)]
    fn from_pair(&self, x: i64, y: i64) -> Option<Self::Point>;

    fn in_region(&self, p: &Self::Point, region: &Region) -> bool;

    fn encode_point(&self, p: &Self::Point) -> Value;

    fn decode_point(&self, v: &Value) -> Result<Self::Point, FormatError>;
}

// ---------------------------------------------------------------------------
// Z²

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Z2Point {
    pub x: i64,
    pub y: i64,
}

impl Z2Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Z2Point { x, y }
    }

    pub fn manhattan(&self, other: &Z2Point) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn offset(&self, c: Compass) -> Z2Point {
        let (dx, dy) = c.delta();
        Z2Point::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Z2Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Z2;

impl Geometry for Z2 {
    type Point = Z2Point;

    fn kind(&self) -> GeometryKind {
        GeometryKind::Z2
    }

    fn origin(&self) -> Z2Point {
        Z2Point::new(0, 0)
    }

    fn step(&self, p: &Z2Point, d: Direction) -> Option<(Z2Point, Direction)> {
        let q = match d {
            Direction::E => Z2Point::new(p.x + 1, p.y),
            Direction::W => Z2Point::new(p.x - 1, p.y),
            Direction::N => Z2Point::new(p.x, p.y + 1),
            Direction::S => Z2Point::new(p.x, p.y - 1),
            _ => return None,
        };
        Some((q, d.negate()))
    }

    fn neighbors(&self, p: &Z2Point) -> Vec<(Direction, Z2Point)> {
        Compass::ALL
            .iter()
            .map(|c| (c.direction(), p.offset(*c)))
            .collect()
    }

    fn compass(&self, c: Compass) -> Option<Direction> {
        Some(c.direction())
    }

    fn planar(&self, p: &Z2Point) -> Option<(i64, i64)> {
        Some((p.x, p.y))
    }

    fn from_pair(&self, x: i64, y: i64) -> Option<Z2Point> {
        Some(Z2Point::new(x, y))
    }

    fn in_region(&self, p: &Z2Point, region: &Region) -> bool {
        match region {
            Region::Rect { x0, y0, x1, y1 } => p.x >= *x0 && p.x <= *x1 && p.y >= *y0 && p.y <= *y1,
            Region::MaxLevel(l) => p.y.abs() <= *l,
        }
    }

    fn encode_point(&self, p: &Z2Point) -> Value {
        json!([p.x, p.y])
    }

    fn decode_point(&self, v: &Value) -> Result<Z2Point, FormatError> {
        let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| FormatError::BadPoint(v.to_string()))?;
        let x = arr[0].as_i64().ok_or_else(|| FormatError::BadPoint(v.to_string()))?;
        let y = arr[1].as_i64().ok_or_else(|| FormatError::BadPoint(v.to_string()))?;
        Ok(Z2Point::new(x, y))
    }
}

// ---------------------------------------------------------------------------
// BS(1,2)

/// Element `(t, k)` of BS(1,2), with `t = num / 2^exp` and `k = level`.
///
/// Canonical form: `num` odd, or `num = 0` and `exp = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BsPoint {
    pub num: BigInt,
    pub exp: u32,
    pub level: i64,
}

impl BsPoint {
    pub fn new(num: impl Into<BigInt>, exp: u32, level: i64) -> Self {
        BsPoint { num: num.into(), exp, level }.canonicalize()
    }

    pub fn identity() -> Self {
        BsPoint { num: BigInt::zero(), exp: 0, level: 0 }
    }

    /// Generator `a = (1, 0)`.
    pub fn a() -> Self {
        BsPoint { num: BigInt::one(), exp: 0, level: 0 }
    }

    /// Generator `b = (0, 1)`.
    pub fn b() -> Self {
        BsPoint { num: BigInt::zero(), exp: 0, level: 1 }
    }

    pub fn canonicalize(self) -> Self {
        let BsPoint { mut num, mut exp, level } = self;
        if num.is_zero() {
            return BsPoint { num, exp: 0, level };
        }
        while exp > 0 && num.is_even() {
            num >>= 1u32;
            exp -= 1;
        }
        BsPoint { num, exp, level }
    }

    pub fn is_canonical(&self) -> bool {
        if self.num.is_zero() {
            self.exp == 0
        } else {
            self.exp == 0 || self.num.is_odd()
        }
    }

    /// Group law `(t1,k1)·(t2,k2) = (t1 + 2^k1 t2, k1 + k2)`.
    pub fn compose(&self, other: &BsPoint) -> BsPoint {
        // 2^k1 * num2 / 2^exp2, brought to a common denominator with t1.
        let (mut scaled, mut scaled_exp) = (other.num.clone(), other.exp as i64);
        if self.level >= 0 {
            scaled <<= self.level as u64;
        } else {
            scaled_exp -= self.level;
        }
        let exp = (self.exp as i64).max(scaled_exp);
        let lhs = self.num.clone() << ((exp - self.exp as i64) as u64);
        let rhs = scaled << ((exp - scaled_exp) as u64);
        BsPoint { num: lhs + rhs, exp: exp as u32, level: self.level + other.level }.canonicalize()
    }

    pub fn inverse(&self) -> BsPoint {
        // (t,k)^-1 = (-2^-k t, -k)
        let neg = BsPoint { num: -self.num.clone(), exp: self.exp, level: 0 };
        let scale = BsPoint { num: BigInt::zero(), exp: 0, level: -self.level };
        scale.compose(&neg)
    }

    /// `t` as an `f64`, for schematic drawing.
    pub fn value_f64(&self) -> f64 {
        self.num.to_f64().unwrap_or(f64::NAN) / 2f64.powi(self.exp as i32)
    }
}

impl fmt::Display for BsPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "({}, {})", self.num, self.level)
        } else {
            write!(f, "({}/2^{}, {})", self.num, self.exp, self.level)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Bs12;

impl Geometry for Bs12 {
    type Point = BsPoint;

    fn kind(&self) -> GeometryKind {
        GeometryKind::Bs12
    }

    fn origin(&self) -> BsPoint {
        BsPoint::identity()
    }

    fn step(&self, p: &BsPoint, d: Direction) -> Option<(BsPoint, Direction)> {
        let g = match d.0 {
            0 => BsPoint::a(),
            1 => BsPoint::a().inverse(),
            2 => BsPoint::b(),
            3 => BsPoint::b().inverse(),
            _ => return None,
        };
        Some((p.compose(&g), d.negate()))
    }

    fn compass(&self, c: Compass) -> Option<Direction> {
        Some(c.direction())
    }

    fn from_pair(&self, x: i64, y: i64) -> Option<BsPoint> {
        Some(BsPoint::new(x, 0, y))
    }

    fn in_region(&self, p: &BsPoint, region: &Region) -> bool {
        match region {
            Region::MaxLevel(l) => p.level.abs() <= *l,
            Region::Rect { x0, y0, x1, y1 } => {
                let t = p.value_f64();
                t >= *x0 as f64 && t <= *x1 as f64 && p.level >= *y0 && p.level <= *y1
            }
        }
    }

    fn encode_point(&self, p: &BsPoint) -> Value {
        json!([p.num.to_string(), p.exp, p.level])
    }

    fn decode_point(&self, v: &Value) -> Result<BsPoint, FormatError> {
        let bad = || FormatError::BadPoint(v.to_string());
        let arr = v.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
        let num: BigInt = match &arr[0] {
            Value::String(s) => s.parse().map_err(|_| bad())?,
            Value::Number(n) => BigInt::from(n.as_i64().ok_or_else(bad)?),
            _ => return Err(bad()),
        };
        let exp = arr[1].as_u64().and_then(|e| u32::try_from(e).ok()).ok_or_else(bad)?;
        let level = arr[2].as_i64().ok_or_else(bad)?;
        Ok(BsPoint { num, exp, level }.canonicalize())
    }
}

// ---------------------------------------------------------------------------
// Hyperbolic tree with level rings

/// Vertex of the degree-`k` tree: `index` ranges over `0..k^level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HypPoint {
    pub level: u32,
    pub index: u64,
}

impl HypPoint {
    pub const fn new(level: u32, index: u64) -> Self {
        HypPoint { level, index }
    }
}

/// Degree-`k` tree plus edges between consecutive vertices of a level and
/// between its first and last vertex.
///
/// Sides: `0` parent, `1..=k` children, `k+1` next on the ring, `k+2` previous.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hyperbolic {
    pub degree: u32,
}

impl Hyperbolic {
    pub fn new(degree: u32) -> Self {
        assert!(degree >= 2, "hyperbolic tree degree must be at least 2");
        Hyperbolic { degree }
    }

    pub const PARENT: Direction = Direction(0);

    pub fn child(&self, c: u32) -> Direction {
        debug_assert!(c < self.degree);
        Direction(1 + c as u8)
    }

    pub fn ring_next(&self) -> Direction {
        Direction(self.degree as u8 + 1)
    }

    pub fn ring_prev(&self) -> Direction {
        Direction(self.degree as u8 + 2)
    }

    pub fn width(&self, level: u32) -> u64 {
        (self.degree as u64)
            .checked_pow(level)
            .expect("hyperbolic level too deep for 64-bit indices")
    }
}

impl Geometry for Hyperbolic {
    type Point = HypPoint;

    fn kind(&self) -> GeometryKind {
        GeometryKind::Hyperbolic { degree: self.degree }
    }

    fn origin(&self) -> HypPoint {
        HypPoint::new(0, 0)
    }

    fn step(&self, p: &HypPoint, d: Direction) -> Option<(HypPoint, Direction)> {
        let k = self.degree as u64;
        let d8 = d.0 as u64;
        if d8 == 0 {
            if p.level == 0 {
                return None;
            }
            let back = self.child((p.index % k) as u32);
            return Some((HypPoint::new(p.level - 1, p.index / k), back));
        }
        if d8 <= k {
            let child = HypPoint::new(p.level + 1, p.index * k + (d8 - 1));
            return Some((child, Self::PARENT));
        }
        let w = self.width(p.level);
        if w <= 1 {
            return None;
        }
        if d8 == k + 1 {
            Some((HypPoint::new(p.level, (p.index + 1) % w), self.ring_prev()))
        } else if d8 == k + 2 {
            Some((HypPoint::new(p.level, (p.index + w - 1) % w), self.ring_next()))
        } else {
            None
        }
    }

    fn from_pair(&self, x: i64, y: i64) -> Option<HypPoint> {
        let level = u32::try_from(y).ok()?;
        let index = u64::try_from(x).ok()?;
        (index < self.width(level)).then(|| HypPoint::new(level, index))
    }

    fn in_region(&self, p: &HypPoint, region: &Region) -> bool {
        match region {
            Region::MaxLevel(l) => (p.level as i64) <= *l,
            Region::Rect { y0, y1, .. } => (p.level as i64) >= *y0 && (p.level as i64) <= *y1,
        }
    }

    fn encode_point(&self, p: &HypPoint) -> Value {
        json!([p.level, p.index])
    }

    fn decode_point(&self, v: &Value) -> Result<HypPoint, FormatError> {
        let bad = || FormatError::BadPoint(v.to_string());
        let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
        let level = arr[0].as_u64().and_then(|l| u32::try_from(l).ok()).ok_or_else(bad)?;
        let index = arr[1].as_u64().ok_or_else(bad)?;
        if index >= self.width(level) {
            return Err(bad());
        }
        Ok(HypPoint::new(level, index))
    }
}

/// Apply a sequence of sides from `p`; `None` if some edge is missing.
pub fn walk<G: Geometry>(g: &G, p: &G::Point, path: &[Direction]) -> Option<G::Point> {
    let mut cur = p.clone();
    for d in path {
        cur = g.step(&cur, *d)?.0;
    }
    Some(cur)
}

/// Graph distance by breadth-first search, bounded by `limit` hops.
pub fn graph_distance<G: Geometry>(g: &G, from: &G::Point, to: &G::Point, limit: usize) -> Option<usize> {
    use std::collections::{HashSet, VecDeque};
    if from == to {
        return Some(0);
    }
    let mut seen: HashSet<G::Point> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(from.clone());
    queue.push_back((from.clone(), 0usize));
    while let Some((p, dist)) = queue.pop_front() {
        if dist >= limit {
            continue;
        }
        for (_, q) in g.neighbors(&p) {
            if q == *to {
                return Some(dist + 1);
            }
            if seen.insert(q.clone()) {
                queue.push_back((q, dist + 1));
            }
        }
    }
    None
}

/// `num` as an `i64` if it fits; handy for tests on small BS points.
pub fn bs_num_i64(p: &BsPoint) -> Option<i64> {
    if p.num.abs() > BigInt::from(i64::MAX) {
        None
    } else {
        p.num.to_i64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_neighbors_of_origin() {
        let n = Z2.neighbors(&Z2Point::new(0, 0));
        assert_eq!(
            n,
            vec![
                (Direction::N, Z2Point::new(0, 1)),
                (Direction::E, Z2Point::new(1, 0)),
                (Direction::S, Z2Point::new(0, -1)),
                (Direction::W, Z2Point::new(-1, 0)),
            ]
        );
    }

    #[test]
    fn z2_step_north() {
        let (q, back) = Z2.step(&Z2Point::new(3, 4), Direction::N).unwrap();
        assert_eq!(q, Z2Point::new(3, 5));
        assert_eq!(back, Direction::S);
    }

    #[test]
    fn negate_is_involution() {
        for d in 0..4u8 {
            assert_eq!(Direction(d).negate().negate(), Direction(d));
        }
        assert_eq!(Direction::N.negate(), Direction::S);
        assert_eq!(Direction::E.negate(), Direction::W);
    }

    #[test]
    fn bs_identity_times_b() {
        let (q, _) = Bs12.step(&BsPoint::identity(), Direction::N).unwrap();
        assert_eq!(q, BsPoint { num: BigInt::zero(), exp: 0, level: 1 });
    }

    #[test]
    fn bs_relation_from_identity() {
        let e = BsPoint::identity();
        let ba = walk(&Bs12, &e, &[Direction::N, Direction::E]).unwrap();
        let aab = walk(&Bs12, &e, &[Direction::E, Direction::E, Direction::N]).unwrap();
        assert_eq!(ba, aab);
    }

    #[test]
    fn bs_one_plus_a_is_two() {
        let one = BsPoint::new(1, 0, 0);
        let (q, _) = Bs12.step(&one, Direction::E).unwrap();
        assert_eq!(q, BsPoint::new(2, 0, 0));
        assert!(q.is_canonical());
    }

    #[test]
    fn bs_canonicalize_examples() {
        assert_eq!(BsPoint { num: 4.into(), exp: 2, level: 0 }.canonicalize(), BsPoint { num: 1.into(), exp: 0, level: 0 });
        assert_eq!(BsPoint { num: 6.into(), exp: 1, level: 3 }.canonicalize(), BsPoint { num: 3.into(), exp: 0, level: 3 });
        assert_eq!(BsPoint { num: 0.into(), exp: 5, level: 1 }.canonicalize(), BsPoint { num: 0.into(), exp: 0, level: 1 });
    }

    #[test]
    fn bs_inverse_composes_to_identity() {
        let p = BsPoint::new(-7, 3, -2);
        assert_eq!(p.compose(&p.inverse()), BsPoint::identity());
        assert_eq!(p.inverse().compose(&p), BsPoint::identity());
    }

    #[test]
    fn hyp_ring_wraps() {
        let h = Hyperbolic::new(3);
        let (q, back) = h.step(&HypPoint::new(2, 0), h.ring_prev()).unwrap();
        assert_eq!(q, HypPoint::new(2, 8));
        assert_eq!(back, h.ring_next());
    }

    #[test]
    fn hyp_root_has_no_parent_or_ring() {
        let h = Hyperbolic::new(2);
        let n = h.neighbors(&HypPoint::new(0, 0));
        assert_eq!(n.len(), 2);
    }

    #[test]
    fn geometry_names_round_trip() {
        for k in [GeometryKind::Z2, GeometryKind::Bs12, GeometryKind::Hyperbolic { degree: 5 }] {
            assert_eq!(GeometryKind::parse(&k.name()).unwrap(), k);
        }
        assert!(GeometryKind::parse("hyp-k1").is_err());
        assert!(GeometryKind::parse("torus").is_err());
    }

    #[test]
    fn z2_graph_distance_is_manhattan() {
        let a = Z2Point::new(-2, 3);
        let b = Z2Point::new(1, -1);
        assert_eq!(graph_distance(&Z2, &a, &b, 20), Some(7));
    }
}

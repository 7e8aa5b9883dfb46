//! Tiles, glues, tilesets and assemblies, with the temperature-1 binding rule.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::ModelError;
use crate::geometry::{Direction, Geometry, GeometryKind};

pub type TileId = usize;

/// A glue label with its strength. Label 0 is the null glue.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Glue {
    pub label: u32,
    pub strength: u8,
}

impl Glue {
    pub const NULL: Glue = Glue { label: 0, strength: 0 };

    /// A strength-1 glue; label 0 yields the null glue.
    pub fn new(label: u32) -> Glue {
        if label == 0 {
            Glue::NULL
        } else {
            Glue { label, strength: 1 }
        }
    }

    pub fn is_null(&self) -> bool {
        self.label == 0
    }

    pub fn is_active(&self) -> bool {
        self.label != 0 && self.strength > 0
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match (self.label, self.strength) {
            (0, 0) => Ok(()),
            (0, s) => Err(ModelError::NullGlueStrength(s)),
            (_, 1) => Ok(()),
            (label, strength) => Err(ModelError::Strength { label, strength }),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TileType {
    pub name: Option<String>,
    pub color: Option<String>,
    /// One glue per side, indexed by [`Direction::index`].
    pub glues: Vec<Glue>,
}

impl TileType {
    pub fn new(glues: Vec<Glue>) -> Self {
        TileType { name: None, color: None, glues }
    }

    /// Build a 4-sided tile from compass labels (0 = null).
    pub fn nesw(n: u32, e: u32, s: u32, w: u32) -> Self {
        let mut glues = vec![Glue::NULL; 4];
        glues[Direction::N.index()] = Glue::new(n);
        glues[Direction::E.index()] = Glue::new(e);
        glues[Direction::S.index()] = Glue::new(s);
        glues[Direction::W.index()] = Glue::new(w);
        TileType::new(glues)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn glue(&self, d: Direction) -> Glue {
        self.glues.get(d.index()).copied().unwrap_or(Glue::NULL)
    }
}

/// Two tiles bind across an edge iff the abutting glues carry the same
/// non-null label with positive strength.
pub fn bonds(t1: &TileType, side1: Direction, t2: &TileType, side2: Direction) -> bool {
    let g1 = t1.glue(side1);
    let g2 = t2.glue(side2);
    g1.is_active() && g2.is_active() && g1.label == g2.label
}

/// `t2` sitting on side `d` of `t1` interacts with it (involutive geometries).
pub fn interacts(t1: &TileType, t2: &TileType, d: Direction) -> bool {
    bonds(t1, d, t2, d.negate())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tileset {
    pub geometry: GeometryKind,
    pub tiles: Vec<TileType>,
    /// Optional display names for glue labels.
    pub glue_names: BTreeMap<u32, String>,
}

impl Tileset {
    pub fn new(geometry: GeometryKind, tiles: Vec<TileType>) -> Self {
        Tileset { geometry, tiles, glue_names: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tile(&self, id: TileId) -> Result<&TileType, ModelError> {
        self.tiles.get(id).ok_or(ModelError::UnknownTile(id))
    }

    /// Number of distinct non-null glue labels.
    pub fn glue_count(&self) -> usize {
        let mut labels: Vec<u32> = self
            .tiles
            .iter()
            .flat_map(|t| t.glues.iter().filter(|g| !g.is_null()).map(|g| g.label))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let sides = self.geometry.sides();
        for (i, t) in self.tiles.iter().enumerate() {
            if t.glues.len() != sides {
                return Err(ModelError::SideCount { tile: i, expected: sides, found: t.glues.len() });
            }
            for g in &t.glues {
                g.validate()?;
            }
        }
        Ok(())
    }

    pub fn glue_display(&self, label: u32) -> String {
        self.glue_names.get(&label).cloned().unwrap_or_else(|| label.to_string())
    }

    /// Tiles carrying `label` on side `d`, for every `(side, label)` in use.
    pub fn side_index(&self) -> HashMap<(u8, u32), Vec<TileId>> {
        let mut index: HashMap<(u8, u32), Vec<TileId>> = HashMap::new();
        for (id, t) in self.tiles.iter().enumerate() {
            for (side, g) in t.glues.iter().enumerate() {
                if g.is_active() {
                    index.entry((side as u8, g.label)).or_default().push(id);
                }
            }
        }
        index
    }
}

/// A tile assembly system at temperature 1: geometry, tiles and seed.
#[derive(Clone, Debug)]
pub struct TileSystem<G: Geometry> {
    pub geometry: G,
    pub tileset: Tileset,
    pub seed: Vec<(G::Point, TileId)>,
}

impl<G: Geometry> TileSystem<G> {
    pub fn new(geometry: G, tileset: Tileset, seed: Vec<(G::Point, TileId)>) -> Self {
        TileSystem { geometry, tileset, seed }
    }

    pub fn seed_assembly(&self) -> Assembly<G::Point> {
        let mut a = Assembly::new();
        for (p, t) in &self.seed {
            a.place(p.clone(), *t);
            a.seed.push(p.clone());
        }
        a
    }

    /// The single seed tile and its position.
    pub fn single_seed(&self) -> Result<(G::Point, TileId), ModelError> {
        match self.seed.as_slice() {
            [(p, t)] => Ok((p.clone(), *t)),
            other => Err(ModelError::SeedSize(other.len())),
        }
    }
}

/// Partial map from points to tile types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assembly<P: std::hash::Hash + Eq> {
    placements: HashMap<P, TileId>,
    pub seed: Vec<P>,
}

impl<P: Clone + std::hash::Hash + Eq + Ord> Default for Assembly<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Clone + std::hash::Hash + Eq + Ord> Assembly<P> {
    pub fn new() -> Self {
        Assembly { placements: HashMap::new(), seed: Vec::new() }
    }

    pub fn single(p: P, tile: TileId) -> Self {
        let mut a = Assembly::new();
        a.place(p.clone(), tile);
        a.seed.push(p);
        a
    }

    pub fn from_placements(items: impl IntoIterator<Item = (P, TileId)>) -> Result<Self, ModelError>
    where
        P: std::fmt::Debug,
    {
        let mut a = Assembly::new();
        for (p, t) in items {
            if a.placements.insert(p.clone(), t).is_some() {
                return Err(ModelError::Overlap(format!("{p:?}")));
            }
        }
        Ok(a)
    }

    /// Place a tile; returns the previous occupant if any.
    pub fn place(&mut self, p: P, tile: TileId) -> Option<TileId> {
        self.placements.insert(p, tile)
    }

    pub fn get(&self, p: &P) -> Option<TileId> {
        self.placements.get(p).copied()
    }

    pub fn contains(&self, p: &P) -> bool {
        self.placements.contains_key(p)
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, &TileId)> {
        self.placements.iter()
    }

    pub fn placements(&self) -> &HashMap<P, TileId> {
        &self.placements
    }

    /// Placements sorted by point.
    pub fn sorted(&self) -> Vec<(P, TileId)> {
        let mut v: Vec<(P, TileId)> = self.placements.iter().map(|(p, t)| (p.clone(), *t)).collect();
        v.sort();
        v
    }

    pub fn same_placements(&self, other: &Self) -> bool {
        self.placements == other.placements
    }
}

/// Weighted binding graph of an assembly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BindingGraph<P> {
    pub vertices: Vec<P>,
    /// `(i, j, weight)` with `i < j`, indices into `vertices`.
    pub edges: Vec<(usize, usize, u8)>,
}

impl<P> BindingGraph<P> {
    pub fn is_connected(&self) -> bool {
        if self.vertices.len() <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.vertices.len()
    }
}

pub fn binding_graph<G: Geometry>(
    g: &G,
    a: &Assembly<G::Point>,
    ts: &Tileset,
) -> Result<BindingGraph<G::Point>, ModelError> {
    let vertices: Vec<G::Point> = a.sorted().into_iter().map(|(p, _)| p).collect();
    let index: HashMap<&G::Point, usize> = vertices.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut edges = Vec::new();
    for (i, p) in vertices.iter().enumerate() {
        let tp = ts.tile(a.get(p).expect("vertex is placed"))?;
        for d in 0..g.sides() as u8 {
            let Some((q, back)) = g.step(p, Direction(d)) else { continue };
            let Some(&j) = index.get(&q) else { continue };
            if j <= i {
                continue;
            }
            let tq = ts.tile(a.get(&q).expect("vertex is placed"))?;
            if bonds(tp, Direction(d), tq, back) {
                edges.push((i, j, tp.glue(Direction(d)).strength));
            }
        }
    }
    Ok(BindingGraph { vertices, edges })
}

/// At temperature 1 an assembly is stable iff its binding graph is connected.
pub fn is_tau_stable<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset) -> bool {
    binding_graph(g, a, ts).map(|bg| bg.is_connected()).unwrap_or(false)
}

/// Adjacent placed pairs whose abutting glues differ.
pub fn mismatches<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset) -> Vec<(G::Point, G::Point)> {
    let mut out = Vec::new();
    for (p, &tp) in a.iter() {
        for d in 0..g.sides() as u8 {
            let Some((q, back)) = g.step(p, Direction(d)) else { continue };
            if q <= *p {
                continue;
            }
            if let Some(tq) = a.get(&q) {
                if ts.tiles[tp].glue(Direction(d)).label != ts.tiles[tq].glue(back).label {
                    out.push((p.clone(), q));
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Z2Point, Z2};

    #[test]
    fn interacts_matching_north_south() {
        let t1 = TileType::nesw(5, 0, 0, 0);
        let t2 = TileType::nesw(0, 0, 5, 0);
        assert!(interacts(&t1, &t2, Direction::N));
        assert!(interacts(&t2, &t1, Direction::S));
    }

    #[test]
    fn interacts_mismatch_and_null() {
        let t1 = TileType::nesw(5, 0, 0, 0);
        let t2 = TileType::nesw(0, 0, 6, 0);
        assert!(!interacts(&t1, &t2, Direction::N));
        let blank = TileType::nesw(0, 0, 0, 0);
        assert!(!interacts(&blank, &blank, Direction::N));
    }

    #[test]
    fn glue_validation() {
        assert!(Glue { label: 0, strength: 1 }.validate().is_err());
        assert!(Glue { label: 3, strength: 2 }.validate().is_err());
        assert!(Glue::new(3).validate().is_ok());
        assert_eq!(Glue::new(0), Glue::NULL);
    }

    fn column() -> Tileset {
        Tileset::new(
            GeometryKind::Z2,
            vec![TileType::nesw(1, 0, 0, 0), TileType::nesw(2, 0, 1, 0), TileType::nesw(0, 0, 2, 0)],
        )
    }

    #[test]
    fn binding_graph_small_cases() {
        let ts = column();
        let a = Assembly::single(Z2Point::new(0, 0), 0);
        let bg = binding_graph(&Z2, &a, &ts).unwrap();
        assert_eq!((bg.vertices.len(), bg.edges.len()), (1, 0));

        let a = Assembly::from_placements([(Z2Point::new(0, 0), 0), (Z2Point::new(0, 1), 1)]).unwrap();
        let bg = binding_graph(&Z2, &a, &ts).unwrap();
        assert_eq!(bg.edges, vec![(0, 1, 1)]);

        let a = Assembly::from_placements([(Z2Point::new(0, 0), 0), (Z2Point::new(0, 1), 2)]).unwrap();
        let bg = binding_graph(&Z2, &a, &ts).unwrap();
        assert!(bg.edges.is_empty());
        assert!(!is_tau_stable(&Z2, &a, &ts));
    }

    #[test]
    fn binding_graph_unknown_tile() {
        let ts = column();
        let a = Assembly::single(Z2Point::new(0, 0), 9);
        assert_eq!(binding_graph(&Z2, &a, &ts), Err(ModelError::UnknownTile(9)));
    }

    #[test]
    fn l_shape_is_stable() {
        let ts = Tileset::new(
            GeometryKind::Z2,
            vec![TileType::nesw(1, 0, 0, 0), TileType::nesw(0, 2, 1, 0), TileType::nesw(0, 0, 0, 2)],
        );
        let a = Assembly::from_placements([
            (Z2Point::new(0, 0), 0),
            (Z2Point::new(0, 1), 1),
            (Z2Point::new(1, 1), 2),
        ])
        .unwrap();
        assert!(is_tau_stable(&Z2, &a, &ts));
        assert!(is_tau_stable(&Z2, &Assembly::single(Z2Point::new(0, 0), 0), &ts));
    }
}

//! Growth of assemblies at temperature 1.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{Direction, Geometry, Region};
use crate::tiles::{Assembly, TileId, TileSystem, Tileset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Any site admitting two tile types is an error.
    #[default]
    Strict,
    /// Ambiguous sites take the lowest tile id and log a warning.
    Permissive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Fifo,
    /// Pick frontier sites uniformly at random from a seeded stream.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimLimits {
    pub max_tiles: usize,
    pub region: Option<Region>,
    /// Distinct producible assemblies explored by the exhaustive search.
    pub max_branches: usize,
}

impl SimLimits {
    pub fn new(max_tiles: usize) -> Self {
        SimLimits { max_tiles: max_tiles.max(1), region: None, max_branches: 1_000_000 }
    }

    /// `2·|T|²` tiles, at least 1.
    pub fn for_tileset(ts: &Tileset) -> Self {
        let n = ts.len().max(1);
        SimLimits::new(n.saturating_mul(n).saturating_mul(2))
    }
}

#[derive(Clone, Debug)]
pub struct SimOptions<P> {
    pub mode: Mode,
    pub order: Order,
    pub limits: SimLimits,
    /// Points that behave as occupied by a glueless block.
    pub obstacles: Vec<P>,
}

impl<P> SimOptions<P> {
    pub fn new(limits: SimLimits) -> Self {
        SimOptions { mode: Mode::Strict, order: Order::Fifo, limits, obstacles: Vec::new() }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn obstacles(mut self, obstacles: Vec<P>) -> Self {
        self.obstacles = obstacles;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Terminal,
    Truncated,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Terminal => "terminal",
            Status::Truncated => "truncated",
        }
    }
}

/// One step of an assembly sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attachment<P> {
    pub point: P,
    pub tile: TileId,
    /// Side of the new tile through which it bound to `parent`.
    pub from: Option<Direction>,
    pub parent: Option<P>,
}

pub type AssemblySequence<P> = Vec<Attachment<P>>;

#[derive(Clone, Debug)]
pub struct SimResult<P: std::hash::Hash + Eq> {
    pub assembly: Assembly<P>,
    pub status: Status,
    pub sequence: AssemblySequence<P>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("conflict at {point}: tiles {candidates:?} can attach")]
    Conflict { point: String, candidates: Vec<TileId> },
    #[error("seed must contain at least one tile")]
    EmptySeed,
    #[error("seed is not stable")]
    UnstableSeed,
    #[error(transparent)]
    Model(#[from] crate::error::ModelError),
}

/// Side-and-label lookup shared by the growth routines.
pub struct Attacher<'a, G: Geometry> {
    pub g: &'a G,
    pub ts: &'a Tileset,
    index: HashMap<(u8, u32), Vec<TileId>>,
}

impl<'a, G: Geometry> Attacher<'a, G> {
    pub fn new(g: &'a G, ts: &'a Tileset) -> Self {
        Attacher { g, ts, index: ts.side_index() }
    }

    /// Tiles that bind at `p` through the neighbor across side `d` of `p`.
    fn via(&self, p: &G::Point, d: Direction, neighbor: Option<TileId>) -> &[TileId] {
        let Some(t) = neighbor else { return &[] };
        let Some((_, back)) = self.g.step(p, d) else { return &[] };
        let glue = self.ts.tiles[t].glue(back);
        if !glue.is_active() {
            return &[];
        }
        self.index.get(&(d.0, glue.label)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Tile ids that can attach at empty site `p`, sorted.
    pub fn candidates(&self, p: &G::Point, occupant: impl Fn(&G::Point) -> Option<TileId>) -> Vec<TileId> {
        let mut out: Vec<TileId> = Vec::new();
        for (d, q) in self.g.neighbors(p) {
            out.extend_from_slice(self.via(p, d, occupant(&q)));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Neighbor side of `p` through which `tile` binds, preferring `rank`-smallest neighbors.
    fn bonding_side(
        &self,
        p: &G::Point,
        tile: TileId,
        occupant: impl Fn(&G::Point) -> Option<TileId>,
        rank: impl Fn(&G::Point) -> usize,
    ) -> Option<(Direction, G::Point)> {
        self.g
            .neighbors(p)
            .into_iter()
            .filter(|(d, q)| self.via(p, *d, occupant(q)).binary_search(&tile).is_ok())
            .min_by_key(|(_, q)| rank(q))
    }
}

/// Tile ids that can attach at `p` in `a` (empty if `p` is occupied).
pub fn attachable<G: Geometry>(g: &G, a: &Assembly<G::Point>, ts: &Tileset, p: &G::Point) -> Vec<TileId> {
    if a.contains(p) {
        return Vec::new();
    }
    Attacher::new(g, ts).candidates(p, |q| a.get(q))
}

fn check_seed<G: Geometry>(sys: &TileSystem<G>) -> Result<(), SimError> {
    if sys.seed.is_empty() {
        return Err(SimError::EmptySeed);
    }
    for (_, t) in &sys.seed {
        sys.tileset.tile(*t)?;
    }
    if !crate::tiles::is_tau_stable(&sys.geometry, &sys.seed_assembly(), &sys.tileset) {
        return Err(SimError::UnstableSeed);
    }
    Ok(())
}

struct Worklist<P> {
    fifo: VecDeque<P>,
    pool: Vec<P>,
    rng: Option<ChaCha8Rng>,
}

impl<P> Worklist<P> {
    fn new(order: Order) -> Self {
        let rng = match order {
            Order::Fifo => None,
            Order::Random(s) => Some(ChaCha8Rng::seed_from_u64(s)),
        };
        Worklist { fifo: VecDeque::new(), pool: Vec::new(), rng }
    }

    fn push(&mut self, p: P) {
        if self.rng.is_some() {
            self.pool.push(p);
        } else {
            self.fifo.push_back(p);
        }
    }

    fn pop(&mut self) -> Option<P> {
        match &mut self.rng {
            None => self.fifo.pop_front(),
            Some(rng) => {
                if self.pool.is_empty() {
                    return None;
                }
                let i = rng.gen_range(0..self.pool.len());
                Some(self.pool.swap_remove(i))
            }
        }
    }

}

/// Grow from the seed until no site is attachable or a limit is reached.
///
/// In strict mode the run fails on the first site where two tile types could
/// attach, and once terminal, re-checks every placed tile against all of its
/// final neighbors outside its own growth subtree.
pub fn run_deterministic<G: Geometry>(
    sys: &TileSystem<G>,
    opts: &SimOptions<G::Point>,
) -> Result<SimResult<G::Point>, SimError> {
    check_seed(sys)?;
    let g = &sys.geometry;
    let at = Attacher::new(g, &sys.tileset);
    let blocked: HashSet<G::Point> = opts.obstacles.iter().cloned().collect();
    let mut a = sys.seed_assembly();
    let mut rank: HashMap<G::Point, usize> = HashMap::new();
    let mut sequence = Vec::new();
    let mut warnings = Vec::new();
    let mut work = Worklist::new(opts.order);

    let allowed = |p: &G::Point| -> bool {
        !blocked.contains(p) && opts.limits.region.as_ref().is_none_or(|r| g.in_region(p, r))
    };

    for (p, t) in &sys.seed {
        rank.insert(p.clone(), sequence.len());
        sequence.push(Attachment { point: p.clone(), tile: *t, from: None, parent: None });
    }
    for (p, _) in &sys.seed {
        for (_, q) in g.neighbors(p) {
            if !a.contains(&q) && allowed(&q) {
                work.push(q);
            }
        }
    }

    let mut status = Status::Terminal;
    while let Some(p) = work.pop() {
        if a.contains(&p) {
            continue;
        }
        let cands = at.candidates(&p, |q| a.get(q));
        if cands.is_empty() {
            continue;
        }
        if a.len() >= opts.limits.max_tiles {
            status = Status::Truncated;
            break;
        }
        if cands.len() > 1 {
            match opts.mode {
                Mode::Strict => {
                    return Err(SimError::Conflict { point: format!("{p:?}"), candidates: cands });
                }
                Mode::Permissive => warnings.push(format!("ambiguous site {p:?}: {cands:?}, took {}", cands[0])),
            }
        }
        let tile = cands[0];
        let (from, parent) = at
            .bonding_side(&p, tile, |q| a.get(q), |q| rank.get(q).copied().unwrap_or(usize::MAX))
            .map(|(d, q)| (Some(d), Some(q)))
            .expect("candidate binds to some neighbor");
        a.place(p.clone(), tile);
        rank.insert(p.clone(), sequence.len());
        sequence.push(Attachment { point: p.clone(), tile, from, parent });
        for (_, q) in g.neighbors(&p) {
            if !a.contains(&q) && allowed(&q) {
                work.push(q);
            }
        }
    }
    if opts.mode == Mode::Strict && status == Status::Terminal {
        post_check(&at, &a, &sequence)?;
    }
    Ok(SimResult { assembly: a, status, sequence, warnings })
}

/// Euler-tour intervals of the growth tree, indexed by sequence position.
pub fn subtree_intervals<P: Clone + std::hash::Hash + Eq>(seq: &[Attachment<P>]) -> Vec<(usize, usize)> {
    let pos: HashMap<&P, usize> = seq.iter().enumerate().map(|(i, s)| (&s.point, i)).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); seq.len()];
    let mut roots = Vec::new();
    for (i, s) in seq.iter().enumerate() {
        match s.parent.as_ref().and_then(|p| pos.get(p)) {
            Some(&j) => children[j].push(i),
            None => roots.push(i),
        }
    }
    let mut iv = vec![(0, 0); seq.len()];
    let mut clock = 0;
    let mut stack: Vec<(usize, bool)> = roots.into_iter().rev().map(|r| (r, false)).collect();
    while let Some((v, done)) = stack.pop() {
        if done {
            iv[v].1 = clock;
            continue;
        }
        iv[v].0 = clock;
        clock += 1;
        stack.push((v, true));
        for &c in children[v].iter().rev() {
            stack.push((c, false));
        }
    }
    iv
}

fn post_check<G: Geometry>(
    at: &Attacher<'_, G>,
    a: &Assembly<G::Point>,
    seq: &[Attachment<G::Point>],
) -> Result<(), SimError> {
    let iv = subtree_intervals(seq);
    let pos: HashMap<&G::Point, usize> = seq.iter().enumerate().map(|(i, s)| (&s.point, i)).collect();
    for (i, s) in seq.iter().enumerate() {
        if s.parent.is_none() {
            continue;
        }
        let mut offered: Vec<TileId> = Vec::new();
        for (d, q) in at.g.neighbors(&s.point) {
            let Some(&j) = pos.get(&q) else { continue };
            let inside = iv[i].0 <= iv[j].0 && iv[j].1 <= iv[i].1;
            if !inside {
                offered.extend_from_slice(at.via(&s.point, d, a.get(&q)));
            }
        }
        offered.sort_unstable();
        offered.dedup();
        if offered.iter().any(|t| *t != s.tile) {
            if !offered.contains(&s.tile) {
                offered.push(s.tile);
                offered.sort_unstable();
            }
            return Err(SimError::Conflict { point: format!("{:?}", s.point), candidates: offered });
        }
    }
    Ok(())
}

/// Every producible assembly, up to `limits.max_tiles` tiles.
#[derive(Clone, Debug)]
pub struct Productions<P: std::hash::Hash + Eq> {
    pub assemblies: Vec<Assembly<P>>,
    /// Indices into `assemblies` with no attachable site.
    pub terminal: Vec<usize>,
    /// `false` when the size or branch limit cut the search short.
    pub complete: bool,
}

impl<P: Clone + std::hash::Hash + Eq + Ord> Productions<P> {
    pub fn terminals(&self) -> Vec<&Assembly<P>> {
        self.terminal.iter().map(|&i| &self.assemblies[i]).collect()
    }
}

/// Enumerate producible assemblies by exploring every single-tile attachment.
pub fn enumerate_productions<G: Geometry>(
    sys: &TileSystem<G>,
    limits: &SimLimits,
    obstacles: &[G::Point],
) -> Result<Productions<G::Point>, SimError> {
    check_seed(sys)?;
    let g = &sys.geometry;
    let at = Attacher::new(g, &sys.tileset);
    let blocked: HashSet<G::Point> = obstacles.iter().cloned().collect();
    let allowed = |p: &G::Point| !blocked.contains(p) && limits.region.as_ref().is_none_or(|r| g.in_region(p, r));

    let start = sys.seed_assembly();
    let mut seen: HashSet<Vec<(G::Point, TileId)>> = HashSet::new();
    seen.insert(start.sorted());
    let mut queue = VecDeque::from([start]);
    let mut assemblies = Vec::new();
    let mut terminal = Vec::new();
    let mut complete = true;
    while let Some(a) = queue.pop_front() {
        let mut moves: Vec<(G::Point, TileId)> = Vec::new();
        let mut sites: HashSet<G::Point> = HashSet::new();
        for (p, _) in a.iter() {
            for (_, q) in g.neighbors(p) {
                if !a.contains(&q) && allowed(&q) && sites.insert(q.clone()) {
                    for t in at.candidates(&q, |r| a.get(r)) {
                        moves.push((q.clone(), t));
                    }
                }
            }
        }
        let idx = assemblies.len();
        if moves.is_empty() {
            terminal.push(idx);
        } else if a.len() >= limits.max_tiles {
            complete = false;
        } else {
            for (q, t) in moves {
                let mut b = a.clone();
                b.place(q, t);
                if seen.insert(b.sorted()) {
                    if seen.len() > limits.max_branches {
                        complete = false;
                        break;
                    }
                    queue.push_back(b);
                }
            }
        }
        assemblies.push(a);
        if seen.len() > limits.max_branches {
            complete = false;
            break;
        }
    }
    Ok(Productions { assemblies, terminal, complete })
}

/// Terminal assemblies reachable from the seed, deduplicated.
#[allow(clippy::type_complexity)]
pub fn run_exhaustive<G: Geometry>(
    sys: &TileSystem<G>,
    limits: &SimLimits,
) -> Result<(Vec<Assembly<G::Point>>, bool), SimError> {
    let prods = enumerate_productions(sys, limits, &[])?;
    let complete = prods.complete;
    let Productions { assemblies, terminal, .. } = prods;
    let mut keep = vec![false; assemblies.len()];
    for i in terminal {
        keep[i] = true;
    }
    let mut out: Vec<Assembly<G::Point>> =
        assemblies.into_iter().zip(keep).filter(|(_, k)| *k).map(|(a, _)| a).collect();
    out.sort_by_key(|a| a.sorted());
    Ok((out, complete))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryKind, Z2Point, Z2};
    use crate::tiles::TileType;

    fn column() -> TileSystem<Z2> {
        let ts = Tileset::new(
            GeometryKind::Z2,
            vec![TileType::nesw(1, 0, 0, 0), TileType::nesw(2, 0, 1, 0), TileType::nesw(0, 0, 2, 0)],
        );
        TileSystem::new(Z2, ts, vec![(Z2Point::new(0, 0), 0)])
    }

    #[test]
    fn attachable_basic() {
        let sys = column();
        let a = sys.seed_assembly();
        assert_eq!(attachable(&Z2, &a, &sys.tileset, &Z2Point::new(0, 1)), vec![1]);
        assert!(attachable(&Z2, &a, &sys.tileset, &Z2Point::new(5, 5)).is_empty());
        assert!(attachable(&Z2, &a, &sys.tileset, &Z2Point::new(1, 0)).is_empty());
    }

    #[test]
    fn column_grows_to_three() {
        let sys = column();
        let r = run_deterministic(&sys, &SimOptions::new(SimLimits::new(100))).unwrap();
        assert_eq!(r.status, Status::Terminal);
        assert_eq!(r.assembly.len(), 3);
        assert_eq!(r.sequence[2].parent, Some(Z2Point::new(0, 1)));
        assert_eq!(r.sequence[2].from, Some(Direction::S));
        let (terms, complete) = run_exhaustive(&sys, &SimLimits::new(10)).unwrap();
        assert!(complete);
        assert_eq!(terms.len(), 1);
    }

    #[test]
    fn truncation_and_obstacles() {
        let ts = Tileset::new(GeometryKind::Z2, vec![TileType::nesw(1, 0, 1, 0)]);
        let sys = TileSystem::new(Z2, ts, vec![(Z2Point::new(0, 0), 0)]);
        let r = run_deterministic(&sys, &SimOptions::new(SimLimits::new(5))).unwrap();
        assert_eq!((r.status, r.assembly.len()), (Status::Truncated, 5));
        let opts = SimOptions::new(SimLimits::new(50)).obstacles(vec![Z2Point::new(0, 3), Z2Point::new(0, -2)]);
        let r = run_deterministic(&sys, &opts).unwrap();
        assert_eq!((r.status, r.assembly.len()), (Status::Terminal, 4));
    }

    #[test]
    fn strict_mode_reports_conflicts() {
        let ts = Tileset::new(
            GeometryKind::Z2,
            vec![TileType::nesw(1, 0, 0, 0), TileType::nesw(0, 0, 1, 0), TileType::nesw(0, 2, 1, 0)],
        );
        let sys = TileSystem::new(Z2, ts, vec![(Z2Point::new(0, 0), 0)]);
        let err = run_deterministic(&sys, &SimOptions::new(SimLimits::new(10))).unwrap_err();
        assert_eq!(err, SimError::Conflict { point: "Z2Point { x: 0, y: 1 }".into(), candidates: vec![1, 2] });
        let r = run_deterministic(&sys, &SimOptions::new(SimLimits::new(10)).mode(Mode::Permissive)).unwrap();
        assert_eq!(r.warnings.len(), 1);
        let (terms, _) = run_exhaustive(&sys, &SimLimits::new(10)).unwrap();
        assert_eq!(terms.len(), 2);
    }

    #[test]
    fn meeting_arms_conflict() {
        // Two arms meet at (1,1): the east arm offers tile 3, the north arm tile 4.
        let ts = Tileset::new(
            GeometryKind::Z2,
            vec![
                TileType::nesw(1, 2, 0, 0),
                TileType::nesw(3, 0, 0, 2),
                TileType::nesw(0, 4, 1, 0),
                TileType::nesw(0, 0, 3, 0),
                TileType::nesw(0, 0, 0, 4),
            ],
        );
        let sys = TileSystem::new(Z2, ts, vec![(Z2Point::new(0, 0), 0)]);
        assert!(run_deterministic(&sys, &SimOptions::new(SimLimits::new(10))).is_err());
        let (terms, _) = run_exhaustive(&sys, &SimLimits::new(10)).unwrap();
        assert_eq!(terms.len(), 2);
    }

    #[test]
    fn random_orders_agree_on_column() {
        let sys = column();
        let fifo = run_deterministic(&sys, &SimOptions::new(SimLimits::new(10))).unwrap();
        for s in 0..5 {
            let r = run_deterministic(&sys, &SimOptions::new(SimLimits::new(10)).order(Order::Random(s))).unwrap();
            assert!(r.assembly.same_placements(&fifo.assembly));
        }
    }
}

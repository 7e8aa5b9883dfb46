mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tileforge::analysis::{self, find_caves, find_partial_pumps, Orientation, Path};
use tileforge::compiler::decompile_system;
use tileforge::geometry::{walk, Bs12, BsPoint, Hyperbolic};
use tileforge::simulator::{enumerate_productions, run_deterministic, Mode, Order, SimLimits, SimOptions};
use tileforge::tiles::{bonds, interacts, Assembly};
use tileforge::{
    compile, isomorphic, parse, unparse, Compass, Direction, Geometry, GeometryKind, HypPoint, TileSystem,
    TileType, Tileset, Z2Point, Z2,
};

fn points() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-40i64..40, -40i64..40), 1..30)
}

fn moves() -> impl Strategy<Value = Vec<Compass>> {
    prop::collection::vec(prop::sample::select(Compass::ALL.to_vec()), 0..40)
}

fn walk_path(moves: &[Compass], tiles: impl Fn(usize) -> usize) -> Path {
    Path::from_moves(Z2Point::new(0, 0), moves, (0..=moves.len()).map(tiles).collect())
}

fn cave_oracle(c: &[i64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..c.len() {
        for j in i + 2..c.len() {
            let earlier_ok = c[..i].iter().all(|&x| x <= c[i]);
            let between_below = c[i + 1..j].iter().all(|&x| x < c[i]);
            if c[i] == c[j] && earlier_ok && between_below {
                out.push((i, j));
            }
        }
    }
    out
}

fn tile(glues: &[u32]) -> TileType {
    TileType::new(glues.iter().map(|&l| tileforge::Glue::new(l)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diameter_matches_pairwise(pts in points()) {
        let cells: std::collections::BTreeSet<Z2Point> = pts.iter().map(|&(x, y)| Z2Point::new(x, y)).collect();
        let a = Assembly::from_placements(cells.iter().map(|p| (*p, 0))).unwrap();
        let cells: Vec<Z2Point> = a.iter().map(|(p, _)| *p).collect();
        let brute = cells.iter().flat_map(|p| cells.iter().map(move |q| p.manhattan(q))).max().unwrap();
        prop_assert_eq!(analysis::manhattan_diameter(&a), brute);
    }

    #[test]
    fn caves_match_definition(m in moves()) {
        let p = walk_path(&m, |_| 0);
        let ys: Vec<i64> = p.points.iter().map(|q| q.y).collect();
        let xs: Vec<i64> = p.points.iter().map(|q| q.x).collect();
        prop_assert_eq!(find_caves(&p, Orientation::Vertical), cave_oracle(&ys));
        prop_assert_eq!(find_caves(&p, Orientation::Horizontal), cave_oracle(&xs));
    }

    #[test]
    fn partial_pump_runs_are_periodic(
        m in moves(),
        period in 1usize..5,
        reps in 2usize..4,
    ) {
        // Periodic tiles on a periodic walk, then an arbitrary tail.
        let block: Vec<Compass> = m.iter().copied().take(period).collect();
        let mut all: Vec<Compass> = block.iter().copied().cycle().take(block.len() * reps).collect();
        all.extend(m.iter().copied().skip(period));
        let k = block.len().max(1);
        let p = walk_path(&all, |i| if i < k * reps { i % k } else { 100 + i });
        for r in find_partial_pumps(&p, 2) {
            prop_assert!(analysis::run_matches(&p, r));
            prop_assert!(r.reps >= 2);
            let full = r.len / r.period;
            let tail = r.len % r.period;
            prop_assert_eq!(r.reps, full + usize::from(2 * tail >= r.period));
            for q in 1..r.period {
                if r.period % q == 0 {
                    let sub = (r.start..r.start + r.len - q).all(|i| {
                        p.tiles[i] == p.tiles[i + q]
                            && (i + q + 1 >= p.len() || p.points[i + 1].x - p.points[i].x == p.points[i + q + 1].x - p.points[i + q].x
                                && p.points[i + 1].y - p.points[i].y == p.points[i + q + 1].y - p.points[i + q].y)
                    });
                    prop_assert!(!sub, "period {} is not primitive", r.period);
                }
            }
        }
    }

    #[test]
    fn pump_witnesses_verify(k in 1usize..5, len in 4usize..20, up in any::<bool>()) {
        // A straight row whose types cycle through k tiles that bond in order.
        let dir = if up { Compass::N } else { Compass::E };
        let tiles: Vec<TileType> = (0..k)
            .map(|i| {
                let (next, prev) = ((i + 1) % k + 1, i + 1);
                if up { TileType::nesw(next as u32, 0, prev as u32, 0) } else { TileType::nesw(0, next as u32, 0, prev as u32) }
            })
            .collect();
        let ts = Tileset::new(GeometryKind::Z2, tiles);
        let p = walk_path(&vec![dir; len], |i| i % k);
        prop_assert!(analysis::is_monotone(&p));
        let w = analysis::monotone_pump_check(&p, &ts);
        if len >= k {
            let w = w.expect("a periodic row pumps");
            prop_assert_eq!((w.j - w.i) % k, 0);
            for reps in 1..6 {
                prop_assert!(analysis::verify_pump(&p, &ts, w, reps));
            }
        }
    }

    #[test]
    fn interaction_is_symmetric(g1 in prop::collection::vec(0u32..3, 4), g2 in prop::collection::vec(0u32..3, 4), d in 0u8..4) {
        let (t1, t2) = (tile(&g1), tile(&g2));
        let d = Direction(d);
        prop_assert_eq!(interacts(&t1, &t2, d), interacts(&t2, &t1, d.negate()));
        prop_assert_eq!(bonds(&t1, d, &t2, d.negate()), bonds(&t2, d.negate(), &t1, d));
    }

    #[test]
    fn bs_relation_and_inverses(word in prop::collection::vec(0u8..4, 0..20)) {
        let g = Bs12;
        let (a, b) = (BsPoint::a(), BsPoint::b());
        let lhs = b.compose(&a).compose(&b.inverse());
        prop_assert_eq!(lhs, a.compose(&a));
        let dirs: Vec<Direction> = word.iter().map(|&d| Direction(d)).collect();
        let p = walk(&g, &g.origin(), &dirs).unwrap();
        prop_assert!(p.is_canonical());
        prop_assert_eq!(p.compose(&p.inverse()), BsPoint::identity());
        for (d, q) in g.neighbors(&p) {
            let (_, back) = g.step(&p, d).unwrap();
            prop_assert_eq!(g.step(&q, back).map(|(r, _)| r), Some(p.clone()));
        }
    }

    #[test]
    fn hyperbolic_adjacency_is_symmetric(k in 2u32..5, level in 0u32..5, idx in 0u64..1000) {
        let g = Hyperbolic::new(k);
        let p = HypPoint::new(level, idx % g.width(level));
        for (d, q) in g.neighbors(&p) {
            let (_, back) = g.step(&p, d).unwrap();
            prop_assert_eq!(g.step(&q, back).map(|(r, _)| r), Some(p));
        }
    }

    #[test]
    fn dsl_round_trips(seed in any::<u64>()) {
        let p = common::random_program(&mut ChaCha8Rng::seed_from_u64(seed), 30);
        let text = unparse(&p);
        prop_assert_eq!(parse(&text).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decompile_then_compile_is_isomorphic(seed in any::<u64>()) {
        let p = common::random_program(&mut ChaCha8Rng::seed_from_u64(seed), 30);
        let Ok(out) = compile(&p, &Z2) else { return Ok(()) };
        let back = compile(&decompile_system(&out.system).unwrap(), &Z2).unwrap();
        let (_, s) = out.system.single_seed().unwrap();
        prop_assert!(isomorphic(out.tileset(), s, back.tileset(), back.system.seed[0].1));
    }

    #[test]
    fn unique_terminal_is_order_independent(
        glues in prop::collection::vec(prop::collection::vec(prop::sample::select(vec![0u32, 0, 1, 2, 3]), 4), 2..6),
        seeds in prop::collection::vec(any::<u64>(), 4),
    ) {
        let ts = Tileset::new(GeometryKind::Z2, glues.iter().map(|g| tile(g)).collect());
        let sys = TileSystem::new(Z2, ts, vec![(Z2Point::new(0, 0), 0)]);
        let mut limits = SimLimits::new(40);
        limits.max_branches = 20_000;
        let Ok(prods) = enumerate_productions(&sys, &limits, &[]) else { return Ok(()) };
        let terms = prods.terminals();
        prop_assume!(prods.complete && terms.len() == 1);
        let unique = terms[0];
        for s in seeds {
            let opts = SimOptions::new(limits.clone()).mode(Mode::Strict).order(Order::Random(s));
            let r = run_deterministic(&sys, &opts).unwrap();
            prop_assert!(r.assembly.same_placements(unique));
        }
    }
}

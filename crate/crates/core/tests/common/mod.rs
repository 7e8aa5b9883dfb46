#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tileforge::automata::{self, Nfa};
use tileforge::geometry::{Region, Z2Point, Z2};
use tileforge::simulator::{self, enumerate_productions, run_exhaustive, SimLimits};
use tileforge::tiles::{self, Assembly, TileId, TileSystem, TileType, Tileset};
use tileforge::{GeometryKind, HypPoint, Hyperbolic};

pub type Placements = Vec<(Z2Point, TileId)>;

pub fn random_nfa(rng: &mut ChaCha8Rng) -> Nfa {
    let q = rng.gen_range(1..=4);
    let s = rng.gen_range(1..=2);
    let mut delta = Vec::new();
    for p in 0..q {
        for l in 0..s {
            for r in 0..q {
                if rng.gen_bool(0.3) {
                    delta.push((p, l, r));
                }
            }
        }
    }
    let finals = (0..q).filter(|_| rng.gen_bool(0.4)).collect();
    Nfa {
        states: (0..q).map(|i| format!("q{i}")).collect(),
        alphabet: ["a", "b"][..s].iter().map(|x| x.to_string()).collect(),
        delta,
        start: 0,
        finals,
    }
}

/// Words of length at most `max_len` with an accepting run, by depth-first
/// search over runs.
pub fn brute_accepted(nfa: &Nfa, max_len: usize) -> BTreeSet<Vec<usize>> {
    fn go(nfa: &Nfa, q: usize, word: &mut Vec<usize>, max_len: usize, out: &mut BTreeSet<Vec<usize>>) {
        if nfa.finals.contains(&q) {
            out.insert(word.clone());
        }
        if word.len() == max_len {
            return;
        }
        for &(p, l, r) in &nfa.delta {
            if p == q {
                word.push(l);
                go(nfa, r, word, max_len, out);
                word.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(nfa, nfa.start, &mut Vec::new(), max_len, &mut out);
    out
}

/// Words carried by capped terminal assemblies of the NFA tileset.
pub fn tile_words(nfa: &Nfa, max_tiles: usize) -> BTreeSet<Vec<usize>> {
    let sys = TileSystem::new(Z2, automata::nfa_to_tas(nfa), vec![(Z2Point::new(0, 0), 0)]);
    let (terms, _) = run_exhaustive(&sys, &SimLimits::new(max_tiles)).unwrap();
    terms.iter().filter_map(|a| automata::nfa_row_word(a, nfa)).collect()
}

/// A random grid system with at most six tiles whose productions up to
/// `max_tiles` never show a mismatch, or `None`.
pub fn random_mismatch_free(rng: &mut ChaCha8Rng, max_tiles: usize) -> Option<TileSystem<Z2>> {
    let n = rng.gen_range(4..=6);
    let glue = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.35) { rng.gen_range(1..=3) } else { 0 };
    let tiles: Vec<TileType> = (0..n)
        .map(|_| {
            let g: Vec<u32> = (0..4).map(|_| glue(rng)).collect();
            TileType::nesw(g[0], g[1], g[2], g[3])
        })
        .collect();
    let sys = TileSystem::new(Z2, Tileset::new(GeometryKind::Z2, tiles), vec![(Z2Point::new(0, 0), 0)]);
    let mut limits = SimLimits::new(max_tiles);
    limits.max_branches = 50_000;
    let prods = enumerate_productions(&sys, &limits, &[]).ok()?;
    let all_sizes_reached = prods.assemblies.iter().any(|a| a.len() >= 4);
    let clean = prods.assemblies.iter().all(|a| tiles::mismatches(&Z2, a, &sys.tileset).is_empty());
    let capped = prods.complete || prods.assemblies.iter().all(|a| a.len() <= max_tiles);
    (clean && all_sizes_reached && capped && prods.assemblies.len() < 50_000).then_some(sys)
}

pub fn placements(a: &Assembly<Z2Point>) -> Placements {
    a.sorted()
}

/// Assemblies of at most `max_tiles` tiles described by grammar derivations
/// that do not collide.
pub fn grammar_assemblies(sys: &TileSystem<Z2>, max_tiles: usize) -> BTreeSet<Placements> {
    let (origin, seed) = sys.single_seed().unwrap();
    let g = automata::tas_to_tree_grammar(&sys.tileset, seed).unwrap();
    g.derivations(max_tiles, 5_000_000)
        .unwrap()
        .iter()
        .filter_map(|d| g.describe(d, origin).ok())
        .map(|seq| placements(&automata::sequence_assembly(&seq)))
        .collect()
}

/// Producible assemblies of at most `max_tiles` tiles, by the simulator.
pub fn simulated_assemblies(sys: &TileSystem<Z2>, max_tiles: usize) -> BTreeSet<Placements> {
    let prods = enumerate_productions(sys, &SimLimits::new(max_tiles), &[]).unwrap();
    prods.assemblies.iter().filter(|a| a.len() <= max_tiles).map(placements).collect()
}

/// Seeds for `count` accepted random systems, from a fixed stream.
pub fn mismatch_free_systems(count: usize, max_tiles: usize) -> Vec<TileSystem<Z2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7167);
    let mut out = Vec::new();
    while out.len() < count {
        if let Some(s) = random_mismatch_free(&mut rng, max_tiles) {
            out.push(s);
        }
    }
    out
}

/// Members of M no longer than `max_len`, built from the exponents.
pub fn m_words(max_len: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let build = |a: usize, b: usize, c: Option<usize>| {
        let mut v = vec![0, 1, 2];
        v.extend(std::iter::repeat_n(3, a));
        v.extend([4, 5, 6]);
        v.extend(std::iter::repeat_n(7, b));
        if let Some(c) = c {
            v.extend([8, 9]);
            v.extend(std::iter::repeat_n(10, c));
        }
        v
    };
    for a in 0..=max_len {
        for b in 0..=max_len {
            if a == b {
                let w = build(a, b, None);
                if w.len() <= max_len {
                    out.insert(w);
                }
            }
            for c in 0..=b.min(max_len) {
                if a > b {
                    let w = build(a, b, Some(c));
                    if w.len() <= max_len {
                        out.insert(w);
                    }
                }
            }
        }
    }
    out
}

/// Prefixes of length at most `cut` of members of M of length at most
/// `max_len`.
pub fn m_prefixes(max_len: usize, cut: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for w in m_words(max_len) {
        for k in 1..=w.len().min(cut) {
            out.insert(w[..k].to_vec());
        }
    }
    out
}

/// Path words of the 11-tile fixture from simulated productions.
pub fn fixture_path_words(max_tiles: usize) -> BTreeSet<Vec<usize>> {
    let ts = automata::fixture_non_context_free();
    let sys = TileSystem::new(Z2, ts, vec![(Z2Point::new(0, 0), 0)]);
    let prods = enumerate_productions(&sys, &SimLimits::new(max_tiles), &[]).unwrap();
    prods
        .assemblies
        .iter()
        .map(|a| automata::path_word(a, &sys.tileset, Z2Point::new(0, 0)).expect("fixture grows paths"))
        .collect()
}

/// The shortest grammar derivation of the 8-tile fixture whose description
/// collides, with its tile word, after replaying the attachments before the
/// collision through the simulator's attachment rule.
pub fn overlap_witness(max_tiles: usize) -> Option<(Vec<TileId>, Z2Point)> {
    let ts = automata::fixture_regularity_gap();
    let g = automata::tas_to_tree_grammar(&ts, 0).unwrap();
    let (seq, point, word) = g
        .derivations(max_tiles, 1_000_000)
        .unwrap()
        .iter()
        .filter_map(|d| {
            let (seq, hit) = g.trace(d, Z2Point::new(0, 0));
            hit.map(|p| (seq, p, g.word(d)))
        })
        .min_by_key(|(_, _, w)| (w.len(), w.clone()))?;
    let mut a = Assembly::single(seq[0].point, seq[0].tile);
    for s in &seq[1..] {
        let ok = simulator::attachable(&Z2, &a, &ts, &s.point).contains(&s.tile);
        assert!(ok, "prefix of a described sequence must replay");
        a.place(s.point, s.tile);
    }
    assert!(a.contains(&point));
    Some((word, point))
}

/// Terms of depth at most `depth` read off complete hyperbolic assemblies.
pub fn hyperbolic_terms(g: &automata::TreeGrammar, k: u32, depth: u32) -> BTreeSet<automata::Tree> {
    let (ts, seed) = automata::tree_grammar_to_hyperbolic_tas(g, k).unwrap();
    let geo = Hyperbolic::new(k);
    let sys = TileSystem::new(geo, ts, vec![(HypPoint::new(0, 0), seed)]);
    let mut limits = SimLimits::new(10_000);
    limits.region = Some(Region::MaxLevel(depth as i64));
    let prods = enumerate_productions(&sys, &limits, &[]).unwrap();
    assert!(prods.complete);
    prods.assemblies.iter().filter_map(|a| automata::hyperbolic_term(a, &sys.tileset, k)).collect()
}

/// A random program of at most `max_len` instructions over the grid sides.
pub fn random_program(rng: &mut ChaCha8Rng, max_len: usize) -> tileforge::Program {
    use tileforge::dsl::{Instr, Side};
    use tileforge::Compass;
    let side = |rng: &mut ChaCha8Rng| Side::Compass(Compass::ALL[rng.gen_range(0..4)]);
    let len = rng.gen_range(1..=max_len);
    let mut p = tileforge::Program::default();
    p.push(Instr::Seed(rng.gen_range(-5..=5), rng.gen_range(-5..=5)));
    let mut names: Vec<String> = Vec::new();
    while p.len() < len {
        let pick = rng.gen_range(0..12);
        let instr = match pick {
            0..=4 => Instr::Move(side(rng)),
            5 => {
                names.push(format!("v{}", names.len()));
                Instr::Let(names.last().unwrap().clone())
            }
            6 | 7 if !names.is_empty() => Instr::Bind(side(rng), names[rng.gen_range(0..names.len())].clone()),
            8 if !names.is_empty() => Instr::From(names[rng.gen_range(0..names.len())].clone()),
            9 => Instr::MoveX(rng.gen_range(-3..=3)),
            10 => Instr::MoveY(rng.gen_range(-3..=3)),
            11 => {
                let body = (0..rng.gen_range(1..=2)).map(|_| Instr::Move(side(rng)).into()).collect();
                Instr::Repeat(rng.gen_range(1..=3), body)
            }
            _ => Instr::Move(side(rng)),
        };
        p.push(instr);
    }
    p
}

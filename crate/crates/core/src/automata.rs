//! Tree grammars, NFAs and the two counterexample tilesets.
//!
//! A grid tile system with a single-tile seed yields a regular tree grammar
//! whose derivations are spanning trees of its assemblies. Rules follow the
//! fixed child order `No(E, S, W)`, `Ea(S, W, N)`, `So(W, N, E)`,
//! `We(N, E, S)`; a child nonterminal is named by the side of the child tile
//! that touches its parent, so `W_g` under an east side grows a tile whose
//! west glue is `g`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde_json::Value;
use thiserror::Error;

use crate::geometry::{Compass, Direction, GeometryKind, HypPoint, Z2Point};
use crate::simulator::Attachment;
use crate::tiles::{Assembly, Glue, TileId, TileType, Tileset};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("`{0}` is both a terminal and a nonterminal")]
    Overlap(String),
    #[error("terminal `{0}` is used with different arities")]
    Arity(String),
    #[error("grammar degree {degree} exceeds {max}")]
    Degree { degree: usize, max: usize },
    #[error("rule `{0}` has a bare nonterminal body")]
    ChainRule(String),
    #[error("tile system must have a single seed tile on the grid")]
    Seed,
    #[error("enumeration exceeded {0} items")]
    TooMany(usize),
}

/// A tree over terminals and nonterminals, written as nested applications.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Nt(String),
    Sym(String, Vec<Tree>),
}

impl Tree {
    pub fn leaf(s: &str) -> Tree {
        Tree::Sym(s.to_string(), Vec::new())
    }

    pub fn app(s: &str, children: Vec<Tree>) -> Tree {
        Tree::Sym(s.to_string(), children)
    }

    pub fn nt(s: &str) -> Tree {
        Tree::Nt(s.to_string())
    }

    /// Height with leaves at 1.
    pub fn depth(&self) -> usize {
        match self {
            Tree::Nt(_) => 1,
            Tree::Sym(_, c) => 1 + c.iter().map(Tree::depth).max().unwrap_or(0),
        }
    }

    fn nonterminals<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tree::Nt(n) => out.push(n),
            Tree::Sym(_, c) => c.iter().for_each(|t| t.nonterminals(out)),
        }
    }

    fn substitute(&self, fill: &mut impl Iterator<Item = Tree>) -> Tree {
        match self {
            Tree::Nt(_) => fill.next().expect("one filler per nonterminal"),
            Tree::Sym(s, c) => Tree::Sym(s.clone(), c.iter().map(|t| t.substitute(fill)).collect()),
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Nt(n) => f.write_str(n),
            Tree::Sym(s, c) if c.is_empty() => f.write_str(s),
            Tree::Sym(s, c) => {
                write!(f, "{s}(")?;
                for (i, t) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: String,
    pub body: Tree,
}

/// Regular tree grammar: axiom plus rules `A -> β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGrammar {
    pub axiom: String,
    pub rules: Vec<Rule>,
}

/// Which rule expanded each nonterminal, children in preorder of the body.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: usize,
    pub children: Vec<Derivation>,
}

impl TreeGrammar {
    pub fn new(axiom: &str) -> Self {
        TreeGrammar { axiom: axiom.to_string(), rules: Vec::new() }
    }

    pub fn rule(mut self, head: &str, body: Tree) -> Self {
        self.rules.push(Rule { head: head.to_string(), body });
        self
    }

    pub fn nonterminals(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.rules.iter().map(|r| r.head.clone()).collect();
        out.insert(self.axiom.clone());
        for r in &self.rules {
            let mut v = Vec::new();
            r.body.nonterminals(&mut v);
            out.extend(v.into_iter().map(str::to_string));
        }
        out
    }

    /// Terminal symbols with their arities.
    pub fn terminals(&self) -> Result<BTreeMap<String, usize>, GrammarError> {
        fn walk(t: &Tree, out: &mut BTreeMap<String, usize>) -> Result<(), GrammarError> {
            if let Tree::Sym(s, c) = t {
                if *out.entry(s.clone()).or_insert(c.len()) != c.len() {
                    return Err(GrammarError::Arity(s.clone()));
                }
                for x in c {
                    walk(x, out)?;
                }
            }
            Ok(())
        }
        let mut out = BTreeMap::new();
        for r in &self.rules {
            walk(&r.body, &mut out)?;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        let terms = self.terminals()?;
        match self.nonterminals().into_iter().find(|n| terms.contains_key(n)) {
            Some(n) => Err(GrammarError::Overlap(n)),
            None => Ok(()),
        }
    }

    /// Largest terminal arity.
    pub fn degree(&self) -> Result<usize, GrammarError> {
        Ok(self.terminals()?.values().copied().max().unwrap_or(0))
    }

    fn rules_of(&self) -> HashMap<&str, Vec<usize>> {
        let mut m: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            m.entry(r.head.as_str()).or_default().push(i);
        }
        m
    }

    fn body_nts(&self, rule: usize) -> Vec<&str> {
        let mut v = Vec::new();
        self.rules[rule].body.nonterminals(&mut v);
        v
    }

    /// All terms of height at most `max_depth` generated from the axiom.
    pub fn terms(&self, max_depth: usize, cap: usize) -> Result<Vec<Tree>, GrammarError> {
        let by_head = self.rules_of();
        let mut memo: HashMap<(String, usize), Vec<Tree>> = HashMap::new();
        let mut out = self.terms_of(&self.axiom, max_depth, cap, &by_head, &mut memo)?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn terms_of(
        &self,
        nt: &str,
        depth: usize,
        cap: usize,
        by_head: &HashMap<&str, Vec<usize>>,
        memo: &mut HashMap<(String, usize), Vec<Tree>>,
    ) -> Result<Vec<Tree>, GrammarError> {
        if let Some(v) = memo.get(&(nt.to_string(), depth)) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        for &ri in by_head.get(nt).map(Vec::as_slice).unwrap_or(&[]) {
            let body = &self.rules[ri].body;
            if body.depth() > depth {
                continue;
            }
            let slots = slot_depths(body, depth);
            let mut options = Vec::with_capacity(slots.len());
            for (child, d) in &slots {
                options.push(self.terms_of(child, *d, cap, by_head, memo)?);
            }
            for combo in product(&options, cap)? {
                out.push(body.substitute(&mut combo.into_iter()));
                if out.len() > cap {
                    return Err(GrammarError::TooMany(cap));
                }
            }
        }
        memo.insert((nt.to_string(), depth), out.clone());
        Ok(out)
    }

    /// Derivations whose total weight is at most `budget`.
    pub fn derivations(
        &self,
        budget: usize,
        cap: usize,
        weight: &dyn Fn(usize) -> usize,
    ) -> Result<Vec<Derivation>, GrammarError> {
        let by_head = self.rules_of();
        let mut memo = HashMap::new();
        let all = self.derive(&self.axiom, budget, cap, weight, &by_head, &mut memo)?;
        Ok(all.into_iter().map(|(d, _)| d).collect())
    }

    #[allow(clippy::type_complexity)]
    fn derive(
        &self,
        nt: &str,
        budget: usize,
        cap: usize,
        weight: &dyn Fn(usize) -> usize,
        by_head: &HashMap<&str, Vec<usize>>,
        memo: &mut HashMap<(String, usize), Vec<(Derivation, usize)>>,
    ) -> Result<Vec<(Derivation, usize)>, GrammarError> {
        if let Some(v) = memo.get(&(nt.to_string(), budget)) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        for &ri in by_head.get(nt).map(Vec::as_slice).unwrap_or(&[]) {
            let w = weight(ri).max(usize::from(!self.body_nts(ri).is_empty()));
            if w > budget {
                continue;
            }
            let mut partial: Vec<(Vec<Derivation>, usize)> = vec![(Vec::new(), w)];
            for child in self.body_nts(ri) {
                let mut next = Vec::new();
                for (kids, used) in &partial {
                    for (d, dw) in self.derive(child, budget - used, cap, weight, by_head, memo)? {
                        let mut k = kids.clone();
                        k.push(d);
                        next.push((k, used + dw));
                        if next.len() > cap {
                            return Err(GrammarError::TooMany(cap));
                        }
                    }
                }
                partial = next;
            }
            for (children, used) in partial {
                out.push((Derivation { rule: ri, children }, used));
                if out.len() > cap {
                    return Err(GrammarError::TooMany(cap));
                }
            }
        }
        memo.insert((nt.to_string(), budget), out.clone());
        Ok(out)
    }

    /// The term a derivation produces.
    pub fn yield_term(&self, d: &Derivation) -> Tree {
        let kids: Vec<Tree> = d.children.iter().map(|c| self.yield_term(c)).collect();
        self.rules[d.rule].body.substitute(&mut kids.into_iter())
    }

    /// One rule per line, `head -> body`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rules {
            s.push_str(&format!("{} -> {}\n", r.head, r.body));
        }
        s
    }

    /// Replace nested terminals by fresh nonterminals so every body is one
    /// terminal applied to nonterminals.
    pub fn normalized(&self) -> Result<TreeGrammar, GrammarError> {
        self.validate()?;
        let taken = self.nonterminals();
        let mut fresh = 0usize;
        let mut out = TreeGrammar::new(&self.axiom);
        let mut queue: Vec<(String, Tree)> = self.rules.iter().map(|r| (r.head.clone(), r.body.clone())).collect();
        queue.reverse();
        while let Some((head, body)) = queue.pop() {
            let Tree::Sym(sym, children) = body else {
                return Err(GrammarError::ChainRule(head));
            };
            let mut flat = Vec::with_capacity(children.len());
            for c in children {
                match c {
                    Tree::Nt(n) => flat.push(Tree::Nt(n)),
                    sub => {
                        let name = loop {
                            fresh += 1;
                            let cand = format!("{head}#{fresh}");
                            if !taken.contains(&cand) {
                                break cand;
                            }
                        };
                        queue.push((name.clone(), sub));
                        flat.push(Tree::Nt(name));
                    }
                }
            }
            out.rules.push(Rule { head, body: Tree::Sym(sym, flat) });
        }
        Ok(out)
    }
}

fn slot_depths(body: &Tree, depth: usize) -> Vec<(String, usize)> {
    fn walk(t: &Tree, level: usize, depth: usize, out: &mut Vec<(String, usize)>) {
        match t {
            Tree::Nt(n) => out.push((n.clone(), depth - level)),
            Tree::Sym(_, c) => c.iter().for_each(|x| walk(x, level + 1, depth, out)),
        }
    }
    let mut out = Vec::new();
    walk(body, 0, depth, &mut out);
    out
}

fn product(options: &[Vec<Tree>], cap: usize) -> Result<Vec<Vec<Tree>>, GrammarError> {
    let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for a in &acc {
            for o in opts {
                let mut v = a.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        if next.len() > cap {
            return Err(GrammarError::TooMany(cap));
        }
        acc = next;
    }
    Ok(acc)
}

/// The lists-of-naturals grammar: `List -> nil | cons(Nat, List)`,
/// `Nat -> 0 | s(Nat)`.
pub fn list_grammar() -> TreeGrammar {
    TreeGrammar::new("List")
        .rule("List", Tree::leaf("nil"))
        .rule("List", Tree::app("cons", vec![Tree::nt("Nat"), Tree::nt("List")]))
        .rule("Nat", Tree::leaf("0"))
        .rule("Nat", Tree::app("s", vec![Tree::nt("Nat")]))
}

// ---------------------------------------------------------------------------
// Grid tile systems as tree grammars

const ORDER: [Compass; 4] = [Compass::N, Compass::E, Compass::S, Compass::W];

fn node_symbol(c: Compass) -> &'static str {
    match c {
        Compass::N => "No",
        Compass::E => "Ea",
        Compass::S => "So",
        Compass::W => "We",
    }
}

/// The three other sides of a tile entered through `entry`, in rule order.
pub fn child_sides(entry: Compass) -> [Compass; 3] {
    let i = ORDER.iter().position(|c| *c == entry).unwrap();
    [ORDER[(i + 1) % 4], ORDER[(i + 2) % 4], ORDER[(i + 3) % 4]]
}

fn nt_name(side: Compass, glue: u32) -> String {
    format!("{}_{glue}", side.letter())
}

/// Tile, entry side and child sides behind each grammar rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInfo {
    pub tile: Option<TileId>,
    pub entry: Option<Compass>,
    /// Side of the placed tile each body nonterminal hangs off.
    pub child_sides: Vec<Compass>,
}

#[derive(Clone, Debug)]
pub struct TasGrammar {
    pub grammar: TreeGrammar,
    pub info: Vec<RuleInfo>,
}

/// Build the grammar of a grid tile system with a one-tile seed.
pub fn tas_to_tree_grammar(ts: &Tileset, seed: TileId) -> Result<TasGrammar, GrammarError> {
    if ts.geometry != GeometryKind::Z2 || seed >= ts.len() {
        return Err(GrammarError::Seed);
    }
    let glue = |t: &TileType, c: Compass| t.glue(c.direction()).label;
    let mut grammar = TreeGrammar::new("S");
    let mut info = Vec::new();
    let mut leaves: BTreeSet<(char, u32)> = BTreeSet::new();

    let s = &ts.tiles[seed];
    let kids: Vec<Tree> = ORDER.iter().map(|c| Tree::Nt(nt_name(c.opposite(), glue(s, *c)))).collect();
    ORDER.iter().for_each(|c| {
        leaves.insert((c.opposite().letter(), glue(s, *c)));
    });
    grammar.rules.push(Rule { head: "S".into(), body: Tree::app("Σ", kids) });
    info.push(RuleInfo { tile: Some(seed), entry: None, child_sides: ORDER.to_vec() });

    for (id, t) in ts.tiles.iter().enumerate() {
        for entry in ORDER {
            let g = glue(t, entry);
            if g == 0 {
                continue;
            }
            let sides = child_sides(entry);
            let kids: Vec<Tree> = sides.iter().map(|c| Tree::Nt(nt_name(c.opposite(), glue(t, *c)))).collect();
            for c in sides {
                leaves.insert((c.opposite().letter(), glue(t, c)));
            }
            grammar.rules.push(Rule { head: nt_name(entry, g), body: Tree::app(node_symbol(entry), kids) });
            info.push(RuleInfo { tile: Some(id), entry: Some(entry), child_sides: sides.to_vec() });
        }
    }
    for (letter, g) in leaves {
        let lower = letter.to_ascii_lowercase();
        grammar.rules.push(Rule { head: format!("{letter}_{g}"), body: Tree::leaf(&format!("{lower}_{g}")) });
        info.push(RuleInfo { tile: None, entry: None, child_sides: Vec::new() });
    }
    Ok(TasGrammar { grammar, info })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DescribeError {
    #[error("point {0} is used twice: the term describes no producible assembly")]
    Overlap(Z2Point),
    #[error("rule {0} places no tile")]
    NotATile(usize),
}

impl TasGrammar {
    /// Derivations placing at most `max_tiles` tiles, seed included.
    pub fn derivations(&self, max_tiles: usize, cap: usize) -> Result<Vec<Derivation>, GrammarError> {
        let info = &self.info;
        self.grammar.derivations(max_tiles, cap, &|r| usize::from(info[r].tile.is_some()))
    }

    /// Every rule has at most one child that can grow a tile.
    pub fn is_linear(&self) -> bool {
        let growing: HashSet<&str> = self
            .grammar
            .rules
            .iter()
            .zip(&self.info)
            .filter(|(_, i)| i.tile.is_some())
            .map(|(r, _)| r.head.as_str())
            .collect();
        self.grammar
            .rules
            .iter()
            .all(|r| self.grammar.body_nts_of(&r.body).iter().filter(|n| growing.contains(*n)).count() <= 1)
    }

    /// The assembly sequence a derivation describes, seed at `origin`.
    ///
    /// A node recurses into its first, third, then second child, so a north
    /// node visits east, west, then south.
    pub fn describe(&self, d: &Derivation, origin: Z2Point) -> Result<Vec<Attachment<Z2Point>>, DescribeError> {
        let mut seq = Vec::new();
        let mut used = HashSet::new();
        self.place(d, origin, None, &mut seq, &mut used)?;
        Ok(seq)
    }

    /// Like [`describe`](Self::describe), but keeps the attachments made
    /// before the first collision, with the colliding point.
    pub fn trace(&self, d: &Derivation, origin: Z2Point) -> (Vec<Attachment<Z2Point>>, Option<Z2Point>) {
        let mut seq = Vec::new();
        let mut used = HashSet::new();
        match self.place(d, origin, None, &mut seq, &mut used) {
            Err(DescribeError::Overlap(p)) => (seq, Some(p)),
            _ => (seq, None),
        }
    }

    fn place(
        &self,
        d: &Derivation,
        at: Z2Point,
        parent: Option<(Z2Point, Compass)>,
        seq: &mut Vec<Attachment<Z2Point>>,
        used: &mut HashSet<Z2Point>,
    ) -> Result<(), DescribeError> {
        let info = &self.info[d.rule];
        let Some(tile) = info.tile else {
            return match parent {
                Some(_) => Ok(()),
                None => Err(DescribeError::NotATile(d.rule)),
            };
        };
        if !used.insert(at) {
            return Err(DescribeError::Overlap(at));
        }
        seq.push(Attachment {
            point: at,
            tile,
            from: parent.map(|(_, c)| c.direction()),
            parent: parent.map(|(p, _)| p),
        });
        let order: Vec<usize> = if info.entry.is_some() { vec![0, 2, 1] } else { (0..d.children.len()).collect() };
        for k in order {
            let side = info.child_sides[k];
            self.place(&d.children[k], at.offset(side), Some((at, side.opposite())), seq, used)?;
        }
        Ok(())
    }

    /// Tile word of a linear derivation, in growth order.
    pub fn word(&self, d: &Derivation) -> Vec<TileId> {
        let mut out = Vec::new();
        let mut cur = Some(d);
        while let Some(x) = cur {
            match self.info[x.rule].tile {
                Some(t) => out.push(t),
                None => break,
            }
            cur = x.children.iter().find(|c| self.info[c.rule].tile.is_some());
        }
        out
    }
}

impl TreeGrammar {
    fn body_nts_of<'a>(&self, body: &'a Tree) -> Vec<&'a str> {
        let mut v = Vec::new();
        body.nonterminals(&mut v);
        v
    }
}

/// Assembly of an attachment list.
pub fn sequence_assembly(seq: &[Attachment<Z2Point>]) -> Assembly<Z2Point> {
    let mut a = Assembly::new();
    for s in seq {
        a.place(s.point, s.tile);
    }
    if let Some(s) = seq.first() {
        a.seed.push(s.point);
    }
    a
}

/// Tile word along a non-branching assembly, read from the seed.
pub fn path_word(a: &Assembly<Z2Point>, ts: &Tileset, seed: Z2Point) -> Option<Vec<TileId>> {
    let mut word = vec![a.get(&seed)?];
    let mut prev: Option<Z2Point> = None;
    let mut cur = seed;
    loop {
        let t = &ts.tiles[a.get(&cur)?];
        let next: Vec<Z2Point> = ORDER
            .iter()
            .filter_map(|c| {
                let q = cur.offset(*c);
                let u = a.get(&q)?;
                (Some(q) != prev && crate::tiles::interacts(t, &ts.tiles[u], c.direction())).then_some(q)
            })
            .collect();
        match next.as_slice() {
            [] => break,
            [q] => {
                word.push(a.get(q)?);
                prev = Some(cur);
                cur = *q;
            }
            _ => return None,
        }
    }
    (word.len() == a.len()).then_some(word)
}

// ---------------------------------------------------------------------------
// NFAs

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NfaError {
    #[error("unknown state `{0}`")]
    State(String),
    #[error("unknown letter `{0}`")]
    Letter(String),
    #[error("malformed NFA JSON: {0}")]
    Format(String),
}

/// Nondeterministic finite automaton over indexed states and letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub delta: Vec<(usize, usize, usize)>,
    pub start: usize,
    pub finals: Vec<usize>,
}

impl Nfa {
    pub fn validate(&self) -> Result<(), NfaError> {
        let q = self.states.len();
        let bad_state = |i: usize| NfaError::State(i.to_string());
        if self.start >= q {
            return Err(bad_state(self.start));
        }
        if let Some(f) = self.finals.iter().find(|f| **f >= q) {
            return Err(bad_state(*f));
        }
        for &(a, s, b) in &self.delta {
            if a >= q || b >= q {
                return Err(bad_state(a.max(b)));
            }
            if s >= self.alphabet.len() {
                return Err(NfaError::Letter(s.to_string()));
            }
        }
        Ok(())
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut cur: BTreeSet<usize> = BTreeSet::from([self.start]);
        for &s in word {
            cur = self.delta.iter().filter(|(a, l, _)| *l == s && cur.contains(a)).map(|t| t.2).collect();
        }
        cur.iter().any(|q| self.finals.contains(q))
    }

    /// Drop transitions that cannot lie on an accepting run.
    pub fn trim(&self) -> Nfa {
        let mut live: BTreeSet<usize> = self.finals.iter().copied().collect();
        loop {
            let before = live.len();
            for &(a, _, b) in &self.delta {
                if live.contains(&b) {
                    live.insert(a);
                }
            }
            if live.len() == before {
                break;
            }
        }
        let mut out = self.clone();
        out.delta.retain(|(a, _, b)| live.contains(a) && live.contains(b));
        out
    }

    pub fn from_json(text: &str) -> Result<Nfa, NfaError> {
        let v: Value = serde_json::from_str(text).map_err(|e| NfaError::Format(e.to_string()))?;
        let strings = |key: &str| -> Result<Vec<String>, NfaError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| NfaError::Format(format!("missing `{key}`")))?
                .iter()
                .map(|x| match x {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(NfaError::Format(format!("bad entry in `{key}`"))),
                })
                .collect()
        };
        let states = strings("states")?;
        let alphabet = strings("alphabet")?;
        let state = |x: &Value| -> Result<usize, NfaError> {
            let name = match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            states.iter().position(|s| *s == name).ok_or(NfaError::State(name))
        };
        let letter = |x: &Value| -> Result<usize, NfaError> {
            let name = match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            alphabet.iter().position(|s| *s == name).ok_or(NfaError::Letter(name))
        };
        let mut delta = Vec::new();
        for t in v.get("delta").and_then(Value::as_array).ok_or_else(|| NfaError::Format("missing `delta`".into()))? {
            let t = t.as_array().filter(|a| a.len() == 3).ok_or_else(|| NfaError::Format("bad transition".into()))?;
            delta.push((state(&t[0])?, letter(&t[1])?, state(&t[2])?));
        }
        let start = state(v.get("start").ok_or_else(|| NfaError::Format("missing `start`".into()))?)?;
        let finals = v
            .get("finals")
            .and_then(Value::as_array)
            .ok_or_else(|| NfaError::Format("missing `finals`".into()))?
            .iter()
            .map(state)
            .collect::<Result<Vec<_>, _>>()?;
        let nfa = Nfa { states, alphabet, delta, start, finals };
        nfa.validate()?;
        Ok(nfa)
    }
}

/// Row-growing tileset of an NFA.
///
/// Tile 0 is the seed with east glue `q0`; each transition `(q, s, q')` is a
/// tile with west `q`, east `q'` and north `s`; each final state `q` has a cap
/// whose only glue is `q` on its west side.
pub fn nfa_to_tas(a: &Nfa) -> Tileset {
    let q = a.states.len() as u32;
    let state = |i: usize| i as u32 + 1;
    let letter = |i: usize| q + 1 + i as u32;
    let mut tiles = vec![TileType::nesw(0, state(a.start), 0, 0).named("σ")];
    for &(p, s, r) in &a.delta {
        tiles.push(
            TileType::nesw(letter(s), state(r), 0, state(p))
                .named(format!("δ({},{},{})", a.states[p], a.alphabet[s], a.states[r])),
        );
    }
    for &f in &a.finals {
        tiles.push(TileType::nesw(0, 0, 0, state(f)).named(format!("f_{}", a.states[f])));
    }
    let mut ts = Tileset::new(GeometryKind::Z2, tiles);
    for (i, s) in a.states.iter().enumerate() {
        ts.glue_names.insert(state(i), s.clone());
    }
    for (i, s) in a.alphabet.iter().enumerate() {
        ts.glue_names.insert(letter(i), s.clone());
    }
    ts
}

/// Letters read west to east from the seed at the origin, when the row ends
/// in a cap tile; an uncapped row describes no word.
pub fn nfa_row_word(a: &Assembly<Z2Point>, nfa: &Nfa) -> Option<Vec<usize>> {
    let cap_start = 1 + nfa.delta.len();
    let mut word = Vec::new();
    for x in 1.. {
        match a.get(&Z2Point::new(x, 0)) {
            Some(t) if (1..cap_start).contains(&t) => word.push(nfa.delta[t - 1].1),
            Some(t) if t >= cap_start => return (a.len() == x as usize + 1).then_some(word),
            _ => return None,
        }
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// Tree grammars on the hyperbolic tree

/// One tile per normalized rule on the degree-`k` tree; the seed sits at
/// level 0 and hands the axiom to its first child.
///
/// Tile names are the rule terminals; the seed is named `σ`.
pub fn tree_grammar_to_hyperbolic_tas(g: &TreeGrammar, k: u32) -> Result<(Tileset, TileId), GrammarError> {
    let norm = g.normalized()?;
    let degree = norm.degree()?;
    if degree > k as usize {
        return Err(GrammarError::Degree { degree, max: k as usize });
    }
    let names: Vec<String> = norm.nonterminals().into_iter().collect();
    let label = |n: &str| names.iter().position(|x| x == n).unwrap() as u32 + 1;
    let sides = k as usize + 3;
    let mut seed = vec![Glue::NULL; sides];
    seed[1] = Glue::new(label(&norm.axiom));
    let mut tiles = vec![TileType { name: Some("σ".into()), color: None, glues: seed }];
    for r in &norm.rules {
        let Tree::Sym(sym, kids) = &r.body else { unreachable!("normalized") };
        let mut glues = vec![Glue::NULL; sides];
        glues[0] = Glue::new(label(&r.head));
        for (i, c) in kids.iter().enumerate() {
            let Tree::Nt(n) = c else { unreachable!("normalized") };
            glues[1 + i] = Glue::new(label(n));
        }
        tiles.push(TileType { name: Some(sym.clone()), color: None, glues });
    }
    let mut ts = Tileset::new(GeometryKind::Hyperbolic { degree: k }, tiles);
    for (i, n) in names.iter().enumerate() {
        ts.glue_names.insert(i as u32 + 1, n.clone());
    }
    Ok((ts, 0))
}

/// Read the term grown below the seed; `None` while some active child glue
/// is still unmatched.
pub fn hyperbolic_term(a: &Assembly<HypPoint>, ts: &Tileset, k: u32) -> Option<Tree> {
    fn walk(a: &Assembly<HypPoint>, ts: &Tileset, k: u32, p: HypPoint) -> Option<Tree> {
        let t = &ts.tiles[a.get(&p)?];
        let mut kids = Vec::new();
        for c in 0..k {
            if t.glue(Direction(1 + c as u8)).is_active() {
                kids.push(walk(a, ts, k, HypPoint::new(p.level + 1, p.index * k as u64 + c as u64))?);
            }
        }
        Some(Tree::Sym(t.name.clone().unwrap_or_default(), kids))
    }
    walk(a, ts, k, HypPoint::new(1, 0))
}

// ---------------------------------------------------------------------------
// Counterexample fixtures

fn named_tiles(rows: &[(u32, u32, u32, u32)], glues: &[&str]) -> Tileset {
    let tiles = rows.iter().enumerate().map(|(i, &(n, e, s, w))| TileType::nesw(n, e, s, w).named(format!("t{i}"))).collect();
    let mut ts = Tileset::new(GeometryKind::Z2, tiles);
    for (i, g) in glues.iter().enumerate() {
        ts.glue_names.insert(i as u32 + 1, g.to_string());
    }
    ts
}

/// Eight tiles whose grammar describes sequences that collide; seed `t0`.
pub fn fixture_regularity_gap() -> Tileset {
    let (a, b, c) = (1, 2, 3);
    named_tiles(
        &[(a, 0, 0, 0), (a, 0, a, 0), (0, a, a, 0), (0, a, 0, a), (0, 0, b, a), (b, 0, b, 0), (b, 0, 0, c), (0, c, 0, c)],
        &["a", "b", "c"],
    )
}

/// Eleven tiles whose path words form a non-context-free language; seed `t0`.
pub fn fixture_non_context_free() -> Tileset {
    let (a0, a1, b, c2, c1, d, e, f) = (1, 2, 3, 4, 5, 6, 7, 8);
    named_tiles(
        &[
            (a0, 0, 0, 0),
            (a1, 0, a0, 0),
            (0, b, a1, 0),
            (0, b, 0, b),
            (0, 0, c2, b),
            (c2, 0, c1, 0),
            (c1, 0, 0, d),
            (0, d, 0, d),
            (e, d, 0, 0),
            (0, f, e, 0),
            (0, f, 0, f),
        ],
        &["a0", "a1", "b", "c2", "c1", "d", "e", "f"],
    )
}

/// `(a, b, c)` when `w = t0 t1 t2 t3^a t4 t5 t6 t7^b t8 t9 t10^c`, with
/// `None` for `c` when the word stops after the `t7` block.
fn m_shape(w: &[usize]) -> Option<(usize, usize, Option<usize>)> {
    let mut i = 0;
    let expect = |t: usize, i: &mut usize| -> Option<()> {
        (w.get(*i) == Some(&t)).then(|| *i += 1)
    };
    let block = |t: usize, i: &mut usize| {
        let s = *i;
        while w.get(*i) == Some(&t) {
            *i += 1;
        }
        *i - s
    };
    for t in [0, 1, 2] {
        expect(t, &mut i)?;
    }
    let a = block(3, &mut i);
    for t in [4, 5, 6] {
        expect(t, &mut i)?;
    }
    let b = block(7, &mut i);
    if i == w.len() {
        return Some((a, b, None));
    }
    for t in [8, 9] {
        expect(t, &mut i)?;
    }
    let c = block(10, &mut i);
    (i == w.len()).then_some((a, b, Some(c)))
}

/// Membership in `{t0t1t2 t3^a t4t5t6 t7^b t8t9 t10^c | a > b >= c}
/// ∪ {t0t1t2 t3^a t4t5t6 t7^a}`.
pub fn in_m(w: &[usize]) -> bool {
    match m_shape(w) {
        Some((a, b, Some(c))) => a > b && b >= c,
        Some((a, b, None)) => a == b,
        None => false,
    }
}

/// `w` is a prefix of some word of `M`.
pub fn m_prefix(w: &[usize]) -> bool {
    const SPINE: [usize; 3] = [0, 1, 2];
    let n = w.len();
    if n <= 3 {
        return w == &SPINE[..n];
    }
    if w[..3] != SPINE {
        return false;
    }
    let mut i = 3;
    let mut a = 0;
    while i < n && w[i] == 3 {
        a += 1;
        i += 1;
    }
    for t in [4, 5, 6] {
        if i == n {
            return true;
        }
        if w[i] != t {
            return false;
        }
        i += 1;
    }
    let mut b = 0;
    while i < n && w[i] == 7 {
        b += 1;
        i += 1;
    }
    if b > a {
        return false;
    }
    if i == n {
        return true;
    }
    if b == a {
        return false;
    }
    for t in [8, 9] {
        if i == n {
            return true;
        }
        if w[i] != t {
            return false;
        }
        i += 1;
    }
    let mut c = 0;
    while i < n && w[i] == 10 {
        c += 1;
        i += 1;
    }
    i == n && c <= b
}

//! Generators for the three efficient-path constructions.
//!
//! Each generator emits a let-expression program with all arithmetic
//! resolved to literals.

use thiserror::Error;

use crate::dsl::{Instr, Program, Side, Stmt};
use crate::geometry::{Compass, Z2Point};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("general scheme needs n >= 2, got {0}")]
    SmallN(u32),
    #[error("general scheme needs h > n, got n = {n}, h = {h}")]
    SmallH { n: u32, h: i64 },
    #[error("3^{0} does not fit in 64 bits")]
    Overflow(u32),
}

#[derive(Default)]
struct B {
    out: Vec<Stmt>,
}

impl B {
    fn i(&mut self, instr: Instr) -> &mut Self {
        self.out.push(instr.into());
        self
    }
    fn seed(&mut self, x: i64, y: i64) -> &mut Self {
        self.i(Instr::Seed(x, y))
    }
    fn x(&mut self, n: i64) -> &mut Self {
        self.i(Instr::MoveX(n))
    }
    fn y(&mut self, n: i64) -> &mut Self {
        self.i(Instr::MoveY(n))
    }
    fn tile(&mut self, name: &str) -> &mut Self {
        self.i(Instr::CurrentTile(name.into()))
    }
    fn bind_n(&mut self, name: &str) -> &mut Self {
        self.i(Instr::Bind(Side::Compass(Compass::N), name.into()))
    }
    fn rewind_to(&mut self, name: &str) -> &mut Self {
        self.i(Instr::RewindTo(name.into()))
    }
    fn rewind_by(&mut self, k: u64) -> &mut Self {
        self.i(Instr::RewindBy(k))
    }
    fn next(&mut self, of: &str, name: &str) -> &mut Self {
        self.i(Instr::NextTile { of: of.into(), name: name.into() })
    }
    fn prev(&mut self, of: &str, name: &str) -> &mut Self {
        self.i(Instr::PrevTile { of: of.into(), name: name.into() })
    }
    fn block(f: impl FnOnce(&mut B)) -> Vec<Stmt> {
        let mut b = B::default();
        f(&mut b);
        b.out
    }
    fn repeat(&mut self, k: u64, f: impl FnOnce(&mut B)) -> &mut Self {
        let body = B::block(f);
        self.i(Instr::Repeat(k, body))
    }
    fn pump(&mut self, f: impl FnOnce(&mut B)) -> &mut Self {
        let body = B::block(f);
        self.i(Instr::Pump(body))
    }
    fn program(self) -> Program {
        Program { stmts: self.out }
    }
}

/// The first efficient family: `38 + 4n` tile types, height `27 + 5n`.
///
/// `n = 0` is the 38-tile baseline; internally the column parameter is `n + 3`.
pub fn gen_eff(n: u32) -> Program {
    let m = n as i64 + 3;
    let mut b = B::default();
    b.seed(7, 0).y(3).tile("a").y(m).tile("a1");
    b.x(-2).y(3).tile("b").y(1).tile("c").y(m - 1).tile("b1");
    b.x(-5).tile("gr").y(2).tile("gr1").y(1).tile("gr2");
    b.y(m - 1).x(1).y(-m - 1).tile("bot").x(2).bind_n("a");
    b.rewind_to("a1").x(1).y(1).x(-1).bind_n("gr1");
    b.rewind_to("bot").rewind_by(1).x(1).bind_n("c");
    b.rewind_to("b1").y(1).x(-1).bind_n("gr2");
    b.program()
}

/// Blocker positions for the four growth stages of [`gen_eff`]: seed only,
/// main path, main path with branches, terminal.
pub fn eff_stage_blockers(n: u32) -> [Vec<Z2Point>; 4] {
    let m = n as i64 + 3;
    let base = vec![
        Z2Point::new(2, 3 * m + 8),
        Z2Point::new(8, m + 3),
        Z2Point::new(2, 2 * m + 8),
        Z2Point::new(5, 2 * m + 7),
    ];
    let with = |p: Z2Point| {
        let mut v = vec![p];
        v.extend(base.iter().copied());
        v
    };
    [with(Z2Point::new(7, 1)), with(Z2Point::new(0, 2 * m + 10)), base.clone(), Vec::new()]
}

fn pow3(k: u32) -> Result<i64, ParamError> {
    3i64.checked_pow(k).ok_or(ParamError::Overflow(k))
}

/// The general scheme with `n` nested widths and initial cave height `h`.
pub fn gen_general(n: u32, h: i64) -> Result<Program, ParamError> {
    if n < 2 {
        return Err(ParamError::SmallN(n));
    }
    if h <= n as i64 {
        return Err(ParamError::SmallH { n, h });
    }
    let mut b = B::default();
    b.seed(pow3(n)? + n as i64, 0).y(2).tile("a").y(h - 2).tile("c");
    b.x(-pow3(n - 1)? - n as i64).tile("b").y(h).x(1).y(-h + 1).tile("d");
    b.x(2 * pow3(n - 2)?).bind_n("a");
    b.rewind_to("c").next("b", "b0").next("b0", "b1").prev("d", "d0");

    let mut k = n as i64 - 2;
    let mut hh = h - 3;
    let mut bk = "b1".to_string();
    let mut dk = "d0".to_string();
    let mut level = 0;
    while k > 0 {
        let ku = k as u32;
        let (an, cn) = (format!("an{level}"), format!("cn{level}"));
        b.y(1).tile(&an).y(hh).tile(&cn);
        b.x(-pow3(ku)? + k).bind_n(&bk);
        b.rewind_to(&dk).x(2 * pow3(ku - 1)? - k).bind_n(&an);
        let (nb, nd) = (format!("bk{level}"), format!("dk{level}"));
        b.next(&bk, &nb).prev(&dk, &nd).rewind_to(&cn);
        bk = nb;
        dk = nd;
        k -= 1;
        hh -= 1;
        level += 1;
    }
    Ok(b.program())
}

/// Horizontal offsets of the bottom row of [`gen_partially`].
pub struct PartiallyConsts {
    pub x2: i64,
    pub tot: i64,
    pub x0: i64,
    pub x1: i64,
}

pub const PARTIALLY: PartiallyConsts = PartiallyConsts { x2: 40, tot: 21 * 15 - 1 - 40, x0: 15, x1: (21 * 15 - 1 - 40 - 15) / 3 - 15 };

/// The partially pumped efficient path.
pub fn gen_partially() -> Program {
    let PartiallyConsts { x2, tot, x0, x1 } = PARTIALLY;
    let mut b = B::default();
    b.seed(0, 0).y(1).tile("a0");
    b.repeat(15, |b| {
        b.repeat(20, |b| {
            b.y(2).x(1);
        })
        .x(1);
    });
    b.next("a0", "a");
    b.x(1).y(-1).x(-2);
    b.repeat(15, |b| {
        b.repeat(20, |b| {
            b.y(-2).x(-1);
        })
        .x(-1);
    });
    b.rewind_by(6).tile("c").i(Instr::EraseAfter("c".into())).y(-1);
    b.x(x0).tile("start0").x(x1).tile("start1").x(tot - x1 - x0).tile("start2");

    b.rewind_to("start2").pump(|b| {
        b.i(Instr::SetColor("blue".into())).i(Instr::DiscreteVect(16, 16 * 15 - 3));
    });
    b.rewind_by(3).x(120).y(2).x(-1).y(-1).x(-x1 - x0 - 5).bind_n("a");

    let distx = tot - x0 - x1 + x2 + 1;
    let disty = 15 * 40;
    b.rewind_to("start1").pump(|b| {
        b.i(Instr::SetColor("red".into())).i(Instr::DiscreteVect(distx / 2, disty / 2));
    });
    b.rewind_by(51).x(10);
    b.repeat(7, |b| {
        b.repeat(20, |b| {
            b.y(2).x(1);
        })
        .x(1);
    });
    b.x(x0 + 4).y(2).x(-1).y(-1).x(-x0 - 4).bind_n("a");

    b.rewind_to("start0").y(1).x(1).pump(|b| {
        b.i(Instr::SetColor("green".into())).repeat(149, |b| {
            b.y(2).x(1);
        });
    });
    b.x(2).repeat(2, |b| {
        b.repeat(148, |b| {
            b.y(2).x(1);
        })
        .x(2);
    });
    b.x(10).y(2).x(-1).y(-1).x(-2).bind_n("a");
    b.program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, unparse};

    #[test]
    fn partially_constants() {
        assert_eq!((PARTIALLY.tot, PARTIALLY.x1), (274, 71));
    }

    #[test]
    fn general_entry_moves() {
        let p = gen_general(8, 10).unwrap();
        assert_eq!(p.stmts[0].instr, Instr::Seed(6569, 0));
        assert!(p.instrs().any(|i| *i == Instr::MoveX(-2195)));
        assert!(p.instrs().any(|i| *i == Instr::MoveX(1458)));
        assert!(p.instrs().any(|i| *i == Instr::MoveX(-723)));
        assert!(p.instrs().any(|i| *i == Instr::MoveX(480)));
        assert_eq!(gen_general(1, 10).unwrap_err(), ParamError::SmallN(1));
        assert_eq!(gen_general(3, 3).unwrap_err(), ParamError::SmallH { n: 3, h: 3 });
        assert!(gen_general(3, 4).is_ok());
    }

    #[test]
    fn generated_programs_round_trip() {
        for p in [gen_eff(3), gen_partially(), gen_general(4, 9).unwrap()] {
            assert_eq!(parse(&unparse(&p)).unwrap(), p);
        }
    }

    #[test]
    fn stage_blockers() {
        let s = eff_stage_blockers(0);
        assert_eq!(s[0][0], Z2Point::new(7, 1));
        assert_eq!(s[1][0], Z2Point::new(0, 16));
        assert_eq!(s[2], vec![Z2Point::new(2, 17), Z2Point::new(8, 6), Z2Point::new(2, 14), Z2Point::new(5, 13)]);
        assert!(s[3].is_empty());
    }
}

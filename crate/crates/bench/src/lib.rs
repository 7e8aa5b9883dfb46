//! Shared inputs for the benchmarks.

use tileforge::compiler::CompileOutput;
use tileforge::constructions::{gen_eff, gen_general, gen_partially};
use tileforge::simulator::{run_deterministic, Mode, SimLimits, SimOptions, SimResult};
use tileforge::{compile, Program, Z2Point, Z2};

pub fn eff(n: u32) -> Program {
    gen_eff(n)
}

pub fn general(n: u32, h: i64) -> Program {
    gen_general(n, h).expect("valid parameters")
}

pub fn partially() -> Program {
    gen_partially()
}

pub fn compiled(p: &Program) -> CompileOutput<Z2> {
    compile(p, &Z2).expect("construction compiles")
}

/// Permissive run with the default tile limit.
pub fn simulate(out: &CompileOutput<Z2>) -> SimResult<Z2Point> {
    let opts = SimOptions::new(SimLimits::for_tileset(out.tileset())).mode(Mode::Permissive);
    run_deterministic(&out.system, &opts).expect("simulation runs")
}

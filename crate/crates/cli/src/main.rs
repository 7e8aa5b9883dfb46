use std::fmt::Display;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tileforge::analysis::{self, Orientation};
use tileforge::automata::{self, Nfa};
use tileforge::constructions;
use tileforge::format::{self, AnySystem};
use tileforge::render::{self, RenderOptions, Rotation};
use tileforge::simulator::{self, Mode, Order, SimLimits, SimOptions, Status};
use tileforge::{Bs12, Geometry, GeometryKind, Hyperbolic, Program, TileSystem, Z2Point, Z2};

#[derive(Parser)]
#[command(name = "tileforge", version, about = "Temperature-1 tile assembly pipeline")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Eff,
    General,
    Partially,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimMode {
    Strict,
    Permissive,
    Exhaustive,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a construction as a program.
    Gen {
        family: Family,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        h: Option<i64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the four growth stages of `eff` as point lists.
        #[arg(long)]
        stages: Option<PathBuf>,
    },
    /// Compile a program to a tileset.
    Compile {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        core_out: Option<PathBuf>,
        /// z2, bs-1-2 or hyp-kK.
        #[arg(long, default_value = "z2")]
        geometry: String,
    },
    /// Grow a tileset from its seed.
    Simulate {
        input: Option<PathBuf>,
        #[arg(long, env = "TILEFORGE_MAX_TILES")]
        max_tiles: Option<usize>,
        #[arg(long, value_enum, default_value = "strict")]
        mode: SimMode,
        /// Pick frontier sites at random from this stream instead of in order.
        #[arg(long)]
        random_order: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Measure terminal assemblies.
    Analyze {
        assembly: Option<PathBuf>,
        tileset: Option<PathBuf>,
        #[arg(long, short = 'o')]
        report: Option<PathBuf>,
    },
    /// Print the tree grammar of a grid tileset.
    Grammar {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Translate an NFA to a row-growing tileset.
    Nfa2tas {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recover a core program from a tileset.
    Decompile {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw an assembly.
    Render {
        assembly: Option<PathBuf>,
        tileset: Option<PathBuf>,
        #[arg(long, conflicts_with = "tikz")]
        svg: bool,
        #[arg(long)]
        tikz: bool,
        #[arg(long)]
        show_glues: bool,
        #[arg(long)]
        show_paths: bool,
        #[arg(long, default_value_t = 20.0)]
        scale: f64,
        #[arg(long, default_value_t = 6.0)]
        font_size: f64,
        #[arg(long, default_value_t = 1.0)]
        offset: f64,
        #[arg(long, default_value_t = 0)]
        rotate: i64,
        /// JSON list of point lists, one picture each.
        #[arg(long)]
        stages: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Fail {
    code: u8,
    msg: String,
}

fn domain(e: impl Display) -> Fail {
    Fail { code: 1, msg: e.to_string() }
}

fn usage(e: impl Display) -> Fail {
    Fail { code: 2, msg: e.to_string() }
}

type Res<T> = Result<T, Fail>;

fn is_stdio(p: &Option<PathBuf>) -> bool {
    p.as_ref().is_none_or(|p| p.as_os_str() == "-")
}

fn read_input(p: &Option<PathBuf>) -> Res<String> {
    if is_stdio(p) {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        return Ok(s);
    }
    let p = p.as_ref().unwrap();
    std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn write_output(p: &Option<PathBuf>, text: &str) -> Res<()> {
    if is_stdio(p) {
        let mut out = io::stdout().lock();
        return out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(domain);
    }
    let p = p.as_ref().unwrap();
    std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd) -> Res<()> {
    match cmd {
        Cmd::Gen { family, n, h, output, stages } => gen(family, n, h, &output, &stages),
        Cmd::Compile { input, output, core_out, geometry } => {
            let p = tileforge::parse(&read_input(&input)?).map_err(domain)?;
            let kind = GeometryKind::parse(&geometry).map_err(usage)?;
            let (text, core) = match kind {
                GeometryKind::Z2 => compile_in(&p, &Z2, core_out.is_some())?,
                GeometryKind::Bs12 => compile_in(&p, &Bs12, core_out.is_some())?,
                GeometryKind::Hyperbolic { degree } => compile_in(&p, &Hyperbolic::new(degree), core_out.is_some())?,
            };
            if let (Some(path), Some(core)) = (&core_out, core) {
                write_output(&Some(path.clone()), &core)?;
            }
            write_output(&output, &text)
        }
        Cmd::Simulate { input, max_tiles, mode, random_order, output } => {
            let text = read_input(&input)?;
            let sys = format::read_system(&text).map_err(domain)?;
            let out = match &sys {
                AnySystem::Z2(s) => simulate(s, max_tiles, mode, random_order)?,
                AnySystem::Bs12(s) => simulate(s, max_tiles, mode, random_order)?,
                AnySystem::Hyperbolic(s) => simulate(s, max_tiles, mode, random_order)?,
            };
            let canonical = match &sys {
                AnySystem::Z2(s) => format::write_tileset(s),
                AnySystem::Bs12(s) => format::write_tileset(s),
                AnySystem::Hyperbolic(s) => format::write_tileset(s),
            };
            write_output(&output, &format::embed_system(&out, &canonical).map_err(domain)?)
        }
        Cmd::Analyze { assembly, tileset, report } => {
            let (asm_text, sys) = assembly_and_system(&assembly, &tileset)?;
            let AnySystem::Z2(sys) = sys else {
                return Err(domain("analysis is defined on the square grid only"));
            };
            write_output(&report, &format::to_text(&analyze(&asm_text, &sys)?))
        }
        Cmd::Grammar { input, output } => {
            let AnySystem::Z2(sys) = format::read_system(&read_input(&input)?).map_err(domain)? else {
                return Err(domain("tree grammars are defined for the square grid"));
            };
            let (_, seed) = sys.single_seed().map_err(domain)?;
            let g = automata::tas_to_tree_grammar(&sys.tileset, seed).map_err(domain)?;
            write_output(&output, &g.grammar.to_text())
        }
        Cmd::Nfa2tas { input, output } => {
            let nfa = Nfa::from_json(&read_input(&input)?).map_err(domain)?;
            let sys = TileSystem::new(Z2, automata::nfa_to_tas(&nfa), vec![(Z2Point::new(0, 0), 0)]);
            write_output(&output, &format::write_tileset(&sys))
        }
        Cmd::Decompile { input, output } => {
            let sys = format::read_system(&read_input(&input)?).map_err(domain)?;
            let p = match &sys {
                AnySystem::Z2(s) => tileforge::compiler::decompile_system(s),
                AnySystem::Bs12(s) => tileforge::compiler::decompile_system(s),
                AnySystem::Hyperbolic(s) => tileforge::compiler::decompile_system(s),
            }
            .map_err(domain)?;
            write_output(&output, &tileforge::unparse(&p))
        }
        Cmd::Render { assembly, tileset, svg: _, tikz, show_glues, show_paths, scale, font_size, offset, rotate, stages, output } => {
            let rotation = Rotation::from_degrees(rotate).ok_or_else(|| usage("rotation must be a multiple of 90"))?;
            if scale.is_nan() || scale <= 0.0 {
                return Err(usage("scale must be positive"));
            }
            let stages = match &stages {
                None => Vec::new(),
                Some(p) => parse_stages(&read_input(&Some(p.clone()))?)?,
            };
            let o = RenderOptions { scale, font_size, show_glues, show_paths, offset, stages, rotation };
            let (asm_text, sys) = assembly_and_system(&assembly, &tileset)?;
            let r = match &sys {
                AnySystem::Z2(s) => draw(s, &asm_text, &o, tikz)?,
                AnySystem::Bs12(s) => draw(s, &asm_text, &o, tikz)?,
                AnySystem::Hyperbolic(s) => draw(s, &asm_text, &o, tikz)?,
            };
            r.warnings.iter().for_each(|w| warn(w));
            write_output(&output, &r.text)
        }
    }
}

fn gen(family: Family, n: Option<u32>, h: Option<i64>, output: &Option<PathBuf>, stages: &Option<PathBuf>) -> Res<()> {
    let p = match family {
        Family::Eff => constructions::gen_eff(n.unwrap_or(0)),
        Family::General => constructions::gen_general(n.unwrap_or(8), h.unwrap_or(10)).map_err(usage)?,
        Family::Partially => constructions::gen_partially(),
    };
    if let Some(path) = stages {
        let Family::Eff = family else {
            return Err(usage("--stages is only defined for eff"));
        };
        let out = tileforge::compile(&p, &Z2).map_err(domain)?;
        let mut pictures = Vec::new();
        for blockers in constructions::eff_stage_blockers(n.unwrap_or(0)) {
            let opts = SimOptions::new(SimLimits::for_tileset(out.tileset())).mode(Mode::Permissive).obstacles(blockers);
            let r = simulator::run_deterministic(&out.system, &opts).map_err(domain)?;
            let pts: Vec<Value> = r.assembly.sorted().iter().map(|(p, _)| json!([p.x, p.y])).collect();
            pictures.push(Value::Array(pts));
        }
        write_output(&Some(path.clone()), &format::to_text(&Value::Array(pictures)))?;
    }
    write_output(output, &tileforge::unparse(&p))
}

fn compile_in<G: Geometry>(p: &Program, g: &G, core: bool) -> Res<(String, Option<String>)> {
    let out = tileforge::compile(p, g).map_err(domain)?;
    let core = if core { Some(tileforge::unparse(&tileforge::export_core(p, g).map_err(domain)?)) } else { None };
    Ok((format::write_tileset(&out.system), core))
}

fn simulate<G: Geometry>(sys: &TileSystem<G>, max_tiles: Option<usize>, mode: SimMode, random: Option<u64>) -> Res<String> {
    let limits = max_tiles.map(SimLimits::new).unwrap_or_else(|| SimLimits::for_tileset(&sys.tileset));
    let hash = format::tileset_hash(sys);
    let mode = match mode {
        SimMode::Exhaustive => {
            let (terms, complete) = simulator::run_exhaustive(sys, &limits).map_err(domain)?;
            if !complete {
                warn("exhaustive search hit the tile limit; listing only the terminal assemblies found");
            }
            return Ok(format::write_assemblies(&sys.geometry, &hash, &sys.tileset, &terms, complete));
        }
        SimMode::Strict => Mode::Strict,
        SimMode::Permissive => Mode::Permissive,
    };
    let order = random.map(Order::Random).unwrap_or(Order::Fifo);
    let r = simulator::run_deterministic(sys, &SimOptions::new(limits).mode(mode).order(order)).map_err(domain)?;
    r.warnings.iter().for_each(|w| warn(w));
    if r.status == Status::Truncated {
        warn(&format!("stopped after {} tiles", r.assembly.len()));
    }
    Ok(format::write_assembly(&sys.geometry, &hash, &r.sequence, r.status))
}

fn assembly_and_system(assembly: &Option<PathBuf>, tileset: &Option<PathBuf>) -> Res<(String, AnySystem)> {
    let asm_text = read_input(assembly)?;
    let sys_text = match tileset {
        Some(_) => read_input(tileset)?,
        None => format::embedded_system(&asm_text)
            .map_err(domain)?
            .ok_or_else(|| usage("assembly carries no tile system; pass the tileset file"))?,
    };
    let sys = format::read_system(&sys_text).map_err(domain)?;
    Ok((asm_text, sys))
}

fn check_hash<G: Geometry>(sys: &TileSystem<G>, files: &[format::AssemblyFile<G::Point>]) {
    let hash = format::tileset_hash(sys);
    if files.iter().any(|f| f.tileset != hash) {
        warn("assembly was produced from a different tileset");
    }
}

fn analyze(asm_text: &str, sys: &TileSystem<Z2>) -> Res<Value> {
    let files = format::read_assemblies(&Z2, asm_text).map_err(domain)?;
    check_hash(sys, &files);
    if files.iter().any(|f| f.status != Status::Terminal) {
        warn("measuring an assembly that is not terminal");
    }
    let assemblies: Vec<_> = files.iter().map(|f| f.assembly()).collect();
    let seed: Vec<Z2Point> = sys.seed.iter().map(|(p, _)| *p).collect();
    let refs: Vec<_> = assemblies.iter().collect();
    let rep = analysis::efficiency_report(&sys.tileset, &seed, &refs).map_err(domain)?;
    let mut v = rep.to_value();
    v["assemblies"] = json!(assemblies.len());
    if let [file] = files.as_slice() {
        let tree = analysis::extract_paths(&file.sequence).map_err(domain)?;
        let main = tree.main_path();
        let caves = |o| -> Vec<Value> { analysis::find_caves(&main, o).iter().map(|(i, j)| json!([i, j])).collect() };
        let pumps: Vec<Value> = analysis::find_partial_pumps(&main, 2)
            .iter()
            .map(|r| json!({ "start": r.start, "period": r.period, "len": r.len, "reps": r.reps }))
            .collect();
        let witness = analysis::monotone_pump_check(&main, &sys.tileset).map(|w| json!([w.i, w.j]));
        v["main_path"] = json!({
            "length": main.len(),
            "end": [main.points.last().map(|p| p.x), main.points.last().map(|p| p.y)],
            "vertical_caves": caves(Orientation::Vertical),
            "horizontal_caves": caves(Orientation::Horizontal),
            "partial_pumps": pumps,
            "pump_witness": witness,
        });
        v["leaves"] = json!(tree.leaves().len());
    }
    Ok(v)
}

fn draw<G: Geometry>(sys: &TileSystem<G>, asm_text: &str, o: &RenderOptions, tikz: bool) -> Res<render::Rendered> {
    let files = format::read_assemblies(&sys.geometry, asm_text).map_err(domain)?;
    check_hash(sys, &files);
    let [file] = files.as_slice() else {
        return Err(domain(format!("expected one assembly, found {}", files.len())));
    };
    let a = file.assembly();
    let r = if tikz {
        render::render_tikz(&sys.geometry, &a, &sys.tileset, o)
    } else {
        render::render_svg(&sys.geometry, &a, &sys.tileset, o)
    };
    r.map_err(usage)
}

fn parse_stages(text: &str) -> Res<Vec<Vec<(i64, i64)>>> {
    let v: Vec<Vec<(i64, i64)>> = serde_json::from_str::<Value>(text)
        .ok()
        .and_then(|v| {
            v.as_array()?
                .iter()
                .map(|s| s.as_array()?.iter().map(|p| Some((p.get(0)?.as_i64()?, p.get(1)?.as_i64()?))).collect())
                .collect()
        })
        .ok_or_else(|| usage("stages must be a JSON list of [x, y] lists"))?;
    Ok(v)
}

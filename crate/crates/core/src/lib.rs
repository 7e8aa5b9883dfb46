//! Temperature-1 tile self-assembly toolkit.
//!
//! Let-expression programs are elaborated into tilesets ([`compiler`]), grown
//! into assemblies ([`simulator`]) and measured ([`analysis`]). The
//! [`constructions`] module generates the efficient-path families and
//! [`automata`] translates between tile systems, tree grammars and NFAs.

pub mod analysis;
pub mod automata;
pub mod compiler;
pub mod constructions;
pub mod dsl;
pub mod error;
pub mod format;
pub mod geometry;
pub mod render;
pub mod simulator;
pub mod tiles;

pub use compiler::{compile, decompile, export_core, isomorphic, CompileError, CompileOutput};
pub use dsl::{parse, unparse, Instr, Program};
pub use error::{FormatError, ModelError};
pub use geometry::{Bs12, BsPoint, Compass, Direction, Geometry, GeometryKind, HypPoint, Hyperbolic, Z2Point, Z2};
pub use tiles::{Assembly, Glue, TileId, TileSystem, TileType, Tileset};

use thiserror::Error;

/// Malformed JSON / text artifacts.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),
    #[error("malformed point {0}")]
    BadPoint(String),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("missing or malformed field `{0}`")]
    Field(String),
    #[error("tile {tile}: expected {expected} sides, found {found}")]
    SideCount { tile: usize, expected: usize, found: usize },
    #[error("unknown side key `{0}`")]
    SideKey(String),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e.to_string())
    }
}

/// Violations of the tile/assembly data model.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown tile id {0}")]
    UnknownTile(usize),
    #[error("glue label 0 is reserved for the null glue but has strength {0}")]
    NullGlueStrength(u8),
    #[error("glue {label} has strength {strength}; only strength 1 is supported at temperature 1")]
    Strength { label: u32, strength: u8 },
    #[error("tile {tile} has {found} sides, geometry needs {expected}")]
    SideCount { tile: usize, expected: usize, found: usize },
    #[error("seed must contain exactly one tile, found {0}")]
    SeedSize(usize),
    #[error("point {0} is occupied twice")]
    Overlap(String),
}

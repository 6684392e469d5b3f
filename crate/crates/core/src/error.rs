use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet mismatch: expected rank {expected}, found rank {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("generator index {index} out of range for alphabet of rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },

    #[error("cannot parse word {input:?}: {reason}")]
    InvalidWord { input: String, reason: String },

    #[error("automaton is not deterministic")]
    NotDeterministic,

    #[error("automaton is not connected")]
    Disconnected,

    #[error("unknown vertex id {0}")]
    UnknownVertex(u32),

    #[error("unknown arc id {0}")]
    UnknownArc(u32),

    #[error("operation undefined for the trivial subgroup")]
    TrivialSubgroup,

    #[error("path is not a reduced basepoint walk: {0}")]
    InvalidPath(&'static str),

    #[error("automaton is not a flower: {0}")]
    NotAFlower(&'static str),

    #[error("walk segment is not a full petal traversal")]
    NotAPetalPath,

    #[error("cannot parse automaton: {0}")]
    InvalidAutomaton(String),

    #[error("enumeration of index-{index} subgroups of a rank-{rank} free group exceeds the cap of {cap} permutation tuples")]
    EnumerationTooLarge { rank: usize, index: usize, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

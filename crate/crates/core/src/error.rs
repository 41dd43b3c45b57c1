use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid field space: n_max = {n_max} exceeds n_trunc = {n_trunc}")]
    InvalidFieldSpace { n_max: usize, n_trunc: usize },

    #[error("atom index {index} out of range (system has {count} atoms)")]
    AtomIndex { index: usize, count: usize },

    #[error("level index {index} out of range for atom {atom} with {levels} levels")]
    LevelIndex {
        atom: usize,
        index: usize,
        levels: usize,
    },

    #[error("atom {atom} has {levels} levels; at least two are required")]
    TooFewLevels { atom: usize, levels: usize },

    #[error("atomic system must contain at least one atom")]
    NoAtoms,

    #[error("coupling matrix of atom {atom} is not symmetric at ({k}, {l})")]
    AsymmetricCoupling { atom: usize, k: usize, l: usize },

    #[error("coupling matrix of atom {atom} has a nonzero diagonal entry at level {k}")]
    DiagonalCoupling { atom: usize, k: usize },

    #[error("coupling matrix of atom {atom} has shape {found}, expected {expected}x{expected}")]
    CouplingShape {
        atom: usize,
        expected: usize,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigendecomposition failed to converge")]
    NoConvergence,

    #[error("state vector has zero norm")]
    ZeroNorm,

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("n_max = {n_max} is out of range for a field of dimension {dim}")]
    NMaxOutOfRange { n_max: usize, dim: usize },

    #[error("control_time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("missing required parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("target `{target}` needs at least {min} atoms, got {found}")]
    TooFewAtoms {
        target: &'static str,
        min: usize,
        found: usize,
    },

    #[error("resonant Fock number {n} exceeds n_max = {n_max}; increase N_max")]
    ResonanceBeyondCap { n: usize, n_max: usize },

    #[error("sector labels split entries coupled by the matrix (max leak {0:e})")]
    SectorLeak(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

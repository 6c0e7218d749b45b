use thiserror::Error;

/// Failure taxonomy shared by every module and surfaced by the CLI exit codes:
/// `Input`/`Domain`/`NeedsWitness` are caller errors (exit 2), `Search` means a
/// verified-search cap was exhausted without finding a witness (exit 3).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input: bad word text, unknown generator, invalid JSON shape.
    #[error("input error: {0}")]
    Input(String),

    /// Structurally valid input that violates an operation precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An amalgamation case whose conjugacy question is not decided here;
    /// the caller must supply a conjugator witness.
    #[error("needs witness: {0}")]
    NeedsWitness(String),

    /// A bounded search ran out of budget. Soundness is preserved by never
    /// returning unverified results; the attempted bounds are reported.
    #[error("search failure in {what}: cap {cap} exhausted (attempted {attempted:?})")]
    Search {
        what: String,
        cap: u64,
        attempted: Vec<(String, i64)>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Search { .. } => 3,
            _ => 2,
        }
    }

    /// Stable machine-readable tag used in JSON error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Domain(_) => "domain",
            Error::NeedsWitness(_) => "needs-witness",
            Error::Search { .. } => "search-failure",
        }
    }
}

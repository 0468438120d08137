use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI's exit codes: [`Error::Input`] and
/// [`Error::Parse`] are caller mistakes, [`Error::Resource`] and
/// [`Error::Budget`] mean the instance is too large for the configured caps,
/// and [`Error::Construction`] means a randomized build gave up.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("resource limit exceeded: {what} requires {required}, cap is {cap}")]
    Resource {
        what: String,
        required: f64,
        cap: f64,
    },

    #[error("exhaustive check refused: estimated cost {estimated} exceeds budget {budget}")]
    Budget { estimated: f64, budget: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

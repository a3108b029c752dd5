use illiq_core::{ArbitrageError, GeometryError, LpError, MarketError, OracleError, PricingError, TreeError};
use thiserror::Error;

/// Failure of a command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input; exit code 2.
    #[error("{0}")]
    Input(String),
    /// The solver could not finish; exit code 3.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn field(file: &str, path: &str, message: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{file}: field `{path}`: {message}"))
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Lp(e) => e.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        match e {
            MarketError::Lp(e) => e.into(),
            MarketError::Geometry(e) => e.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::Lp(e) => e.into(),
            PricingError::Geometry(e) => e.into(),
            PricingError::UnexpectedStatus(s) => CliError::Numerical(format!("unexpected LP status {s:?}")),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<ArbitrageError> for CliError {
    fn from(e: ArbitrageError) -> Self {
        match e {
            ArbitrageError::Lp(e) => e.into(),
            ArbitrageError::Geometry(e) => e.into(),
            ArbitrageError::Pricing(e) => (*e).into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Input(e.to_string())
    }
}

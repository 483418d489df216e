//! Crate-level error with module-qualified codes.

use serde::Serialize;
use thiserror::Error;

use crate::accounting::AccountingError;
use crate::calibrate::CalibrateError;
use crate::data::DataError;
use crate::model::ModelError;
use crate::simulate::SimulateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Calibrate(#[from] CalibrateError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Machine-readable error record, as written to stderr by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorObject {
    pub code: String,
    pub module: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl Error {
    /// Module where the error originated; wrapped errors report their
    /// innermost source.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Data(_) => "data",
            Error::Accounting(AccountingError::Data(_)) => "data",
            Error::Accounting(_) => "accounting",
            Error::Model(ModelError::Accounting(AccountingError::Data(_))) => "data",
            Error::Model(ModelError::Accounting(_)) => "accounting",
            Error::Model(_) => "model",
            Error::Calibrate(CalibrateError::Model(_)) => "model",
            Error::Calibrate(CalibrateError::Data(_)) => "data",
            Error::Calibrate(_) => "calibrate",
            Error::Simulate(SimulateError::Model(_)) => "model",
            Error::Simulate(_) => "simulate",
            Error::Io { .. } => "io",
        }
    }

    /// `module.code`, e.g. `data.gapped_year`.
    pub fn code(&self) -> String {
        let code = match self {
            Error::Data(e) => e.code(),
            Error::Accounting(e) => e.code(),
            Error::Model(e) => e.code(),
            Error::Calibrate(e) => e.code(),
            Error::Simulate(e) => e.code(),
            Error::Io { .. } => "io_error",
        };
        format!("{}.{}", self.module(), code)
    }

    pub fn location(&self) -> Option<String> {
        match self {
            Error::Data(e)
            | Error::Accounting(AccountingError::Data(e))
            | Error::Calibrate(CalibrateError::Data(e)) => e.location(),
            Error::Io { path, .. } => Some(path.clone()),
            _ => None,
        }
    }

    pub fn to_object(&self) -> ErrorObject {
        ErrorObject {
            code: self.code(),
            module: self.module().to_string(),
            message: self.to_string(),
            location: self.location(),
        }
    }
}

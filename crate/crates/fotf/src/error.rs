use std::fmt;

use serde_json::{json, Value};

/// Failure of a subcommand, grouped by the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or malformed input documents.
    Parse(String),
    /// A numerical routine rejected its input or failed.
    Numerical(fotf_core::Error),
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Numerical(e) = self {
            v["detail"] = Value::from(core_error_name(e));
        }
        if let CliError::Io { path, .. } = self {
            v["path"] = Value::from(path.as_str());
        }
        v
    }

    pub(crate) fn io(path: impl Into<String>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), message: err.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "{m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fotf_core::Error> for CliError {
    fn from(e: fotf_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

fn core_error_name(e: &fotf_core::Error) -> &'static str {
    use fotf_core::Error::*;
    match e {
        InvalidCanceller(_) => "invalid_canceller",
        InvalidPolynomial(_) => "invalid_polynomial",
        ZeroDenominator => "zero_denominator",
        DivisionByZero => "division_by_zero",
        DegreeCap { .. } => "degree_cap",
        BranchCut { .. } => "branch_cut",
        PoleHit { .. } => "pole_hit",
        RootsNotConverged { .. } => "roots_not_converged",
        InvalidGrid(_) => "invalid_grid",
        SparseGrid { .. } => "sparse_grid",
        InvalidFitConfig(_) => "invalid_fit_config",
        FlaggedSample { .. } => "flagged_sample",
        RankDeficient { .. } => "rank_deficient",
        Improper { .. } => "improper",
        InvalidSimulation(_) => "invalid_simulation",
        ZeroSteadyState => "zero_steady_state",
        NonFinite => "non_finite",
    }
}

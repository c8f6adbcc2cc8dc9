use std::fmt;
use std::process::ExitCode;

use tep_core::bench::BenchError;
use tep_core::formulation::FormulationError;
use tep_core::graph::GraphError;
use tep_core::instancegen::GenerationError;
use tep_core::netmodel::NetError;
use tep_core::verify::OracleError;
use tep_milp::MilpError;

/// Process exit codes. Usage errors (2) come from clap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Generic = 1,
    Input = 3,
    AngleUnsupported = 4,
    NoSolution = 5,
    Verification = 6,
    TooManyBinaries = 7,
    Numerical = 8,
    CycleExplosion = 9,
}

#[derive(Debug)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl Into<String>) -> CliError {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::new(Code::Input, e.to_string())
    }
}

impl From<GenerationError> for CliError {
    fn from(e: GenerationError) -> Self {
        CliError::new(Code::Input, e.to_string())
    }
}

impl From<MilpError> for CliError {
    fn from(e: MilpError) -> Self {
        let code = match e {
            MilpError::NumericalFailure { .. } => Code::Numerical,
            MilpError::TooManyBinaries { .. } => Code::TooManyBinaries,
            MilpError::Parse { .. } | MilpError::Io(_) => Code::Input,
            _ => Code::Generic,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<FormulationError> for CliError {
    fn from(e: FormulationError) -> Self {
        match e {
            FormulationError::AngleUnsupported(_) => CliError::new(Code::AngleUnsupported, e.to_string()),
            FormulationError::Graph(GraphError::CycleExplosion { .. }) => CliError::new(Code::CycleExplosion, e.to_string()),
            FormulationError::Milp(m) => m.into(),
            FormulationError::MissingBigM(_) => CliError::new(Code::Generic, e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Formulation(f) => f.into(),
            OracleError::Milp(m) => m.into(),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io(e) => e.into(),
            BenchError::Csv(e) => e.into(),
            e => CliError::new(Code::Input, e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Code::Generic, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(Code::Generic, e.to_string())
    }
}

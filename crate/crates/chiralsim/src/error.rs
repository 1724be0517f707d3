use thiserror::Error;

/// Errors produced by configuration validation, the scattering pipeline,
/// spectrum I/O and lineshape fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("spectra are defined on different detuning grids")]
    GridMismatch,
    #[error("malformed CSV row {row}: {msg}")]
    Csv { row: usize, msg: String },
    #[error("detuning grid is not strictly increasing at row {0}")]
    NonMonotoneGrid(usize),
    #[error("non-finite value at row {0}")]
    NonFiniteValue(usize),
    #[error("spectrum has only {0} points, too few for any downstream fit")]
    TooFewPoints(usize),
    #[error("degenerate input: finite Rabi frequency with zero forward coupling")]
    DegenerateInput,
    #[error("nonphysical cavity parameters: |t_sys|^2 = {0} exceeds unity")]
    NonphysicalCavity(f64),
    #[error("nonphysical baseline: non-positive off value at index {0}")]
    NonphysicalBaseline(usize),
    #[error("fit window contains only {0} points (need at least 10)")]
    DegenerateWindow(usize),
    #[error("fit did not converge within {0} iterations")]
    FitNotConverged(usize),
    #[error("undefined contrast: amplitudes sum to zero")]
    UndefinedContrast,
    #[error("contrast requires converged fits on both branches")]
    UnconvergedInput,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

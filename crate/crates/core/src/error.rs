use thiserror::Error;

use crate::cumulant::CumulantState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s); limiting component: {component}")]
    Stiffness {
        t: f64,
        h: f64,
        component: &'static str,
    },

    #[error("no steady state detected before t_max = {t_max:e} s")]
    SettleTimeout {
        t_max: f64,
        last: Box<CumulantState>,
    },

    #[error("no stable physical root: {diagnostics}")]
    NoStableRoot { diagnostics: String },

    #[error("the exact steady-state solver requires zero detuning (got {0:e} s^-1)")]
    NonzeroDetuning(f64),

    #[error("no collective region: N = {n_atoms} is below the critical atom number {n_crit:.4e}")]
    NoCollectiveRegion { n_atoms: f64, n_crit: f64 },

    #[error("adiabatic elimination needs kappa > 100 Gamma (kappa = {kappa:e}, Gamma = {gamma_perp:e})")]
    AdiabaticInvalid { kappa: f64, gamma_perp: f64 },

    #[error("Hilbert space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable short code used in CSV cells and the CLI error summary.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DOMAIN",
            Error::Stiffness { .. } => "STIFF",
            Error::SettleTimeout { .. } => "TIMEOUT",
            Error::NoStableRoot { .. } => "NO_ROOT",
            Error::NonzeroDetuning(_) => "DETUNED",
            Error::NoCollectiveRegion { .. } => "NO_REGION",
            Error::AdiabaticInvalid { .. } => "ADIABATIC",
            Error::DimensionCap { .. } => "DIM_CAP",
            Error::Oracle(_) => "ORACLE",
            Error::Config(_) => "CONFIG",
            Error::UnknownKeys(_) => "UNKNOWN_KEYS",
            Error::Io(_) => "IO",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

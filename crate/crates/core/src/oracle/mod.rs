//! Exact master-equation solver for one to three atoms in a truncated Fock
//! space. It shares the Hamiltonian and dissipators of the cumulant model but
//! drops no correlations, so it measures the error of the moment closure.

mod hilbert;
mod liouvillian;
mod propagate;
mod report;
mod sparse;
mod spectrum;
mod steady;

pub use hilbert::{CMatrix, CVector, DensityMatrix, HilbertSpec, DIM_CAP, MAX_ATOMS};
pub use liouvillian::{build_liouvillian, Liouvillian, Sector};
pub use propagate::propagate;
pub use report::{cumulant_error_report, ErrorReport, ReportRow};
pub use sparse::Csr;
pub use spectrum::{correlation_spectrum, spectrum_oracle, OracleSpectrum};
pub use steady::{moments, steady_oracle, steady_oracle_with, OracleMoments, OracleOptions, OracleSteady, SolveSpace};

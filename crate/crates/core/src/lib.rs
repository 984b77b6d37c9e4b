//! Superradiant bad-cavity laser: second-order cumulant model, exact steady
//! state, quantum-regression spectrum, and an exact small-N Lindblad oracle.

pub mod constants;
pub mod cli;
pub mod cumulant;
pub mod error;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod rootfind;
pub mod spectrum;
pub mod steady;

pub use cumulant::{CumulantState, Method, Trajectory};
pub use error::{Error, Result};
pub use params::{CavityGeometry, DerivedParams, SystemParams};
pub use spectrum::{QrtSystem, SpectrumResult};
pub use steady::{Branch, SteadyReport};

//! Control synthesis for emulating a two-level PT-symmetric Hamiltonian inside a four-level
//! Hermitian system.
//!
//! * [`ptcore`]: closed-form dynamics of the PT-symmetric dimer in dimensionless units.
//! * [`synth`]: coupling and detuning schedules, breakdown times and closed-form oracles.
//! * [`quadsim`]: independent four-level forward integration that checks a schedule end to end.
//! * [`sweep`]: parameter scans, recycling threshold bisection, feasibility maps.
//!
//! The numerical modules are generic over [`Real`]; the aliases at the crate root fix the scalar
//! to `f64`, which is what the sweeps and the command-line tool use.

pub mod error;
pub mod ode;
pub mod ptcore;
pub mod quadsim;
pub mod roots;
pub mod scalar;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result};
pub use ode::Tolerances;
pub use scalar::Real;
pub use synth::{BreakdownCause, Regime};

pub type PtParams = ptcore::PtParams<f64>;
pub type PtState = ptcore::PtState<f64>;
pub type PtObservables = ptcore::PtObservables<f64>;
pub type ControlParams = synth::ControlParams<f64>;
pub type ControlTrace = synth::ControlTrace<f64>;
pub type ControlSample = synth::ControlSample<f64>;
pub type Verdict = synth::Verdict<f64>;
pub type Schedule = quadsim::Schedule<f64>;
pub type QuadState = quadsim::QuadState<f64>;
pub type EmulationReport = quadsim::EmulationReport<f64>;

/// Single-precision variants, adequate for previews and plotting.
pub type PtParams32 = ptcore::PtParams<f32>;
pub type ControlParams32 = synth::ControlParams<f32>;

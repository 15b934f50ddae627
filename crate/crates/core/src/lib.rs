//! Classical force-based and quantum phase-based predictions for the
//! Aharonov-Bohm deflection of a double-slit pattern by a long solenoid.
//!
//! Coordinates: solenoid axis along `z`, beam along `+y`, and "right"
//! (looking along the beam with `+z` up) is `+x`. Signed angles are positive
//! toward `+x`.

pub mod em_fields;
pub mod error;
pub mod dynamics;
pub mod forces;
pub mod interference;
pub mod ode;
pub mod quadrature;
pub mod quantum_phase;
pub mod scenario;
pub mod table;
pub mod vec3;

pub use em_fields::{ChargeState, Solenoid, UnitSystem};
pub use error::{Error, Result};
pub use vec3::Vec3;

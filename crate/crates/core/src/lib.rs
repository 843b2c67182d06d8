//! Quantum conditional states.
//!
//! Operators carry the labels of the regions they act on, and products pad
//! missing regions with identities. On top of that sit conditional states of
//! two flavors (correlations at one time, and channels between times), belief
//! propagation, quantum Bayes inversion, retrodiction, steering and
//! measurement update rules.

pub mod alternative;
pub mod bayes;
pub mod channel;
pub mod classical;
pub mod demos;
pub mod conditional;
pub mod error;
pub mod hybrid;
pub mod instrument;
pub mod limitations;
pub mod random;
pub mod region;
pub mod spectral;
pub mod steering;
pub mod update;
pub mod verify;

pub use error::{Error, Result};
pub use region::{frob_distance, Matrix, Operator, Region, C64};
pub use spectral::Tolerances;

//! Planning SWIPT control links for reconfigurable intelligent surfaces.
//!
//! A base station powers and programs a reflective surface with one control
//! sequence of `l_max` sub-packets, one per reflective element. The surface
//! must both decode a sub-packet and harvest enough energy to apply it. This
//! crate computes how many elements can be updated under four receiver
//! architectures (time sharing, power splitting, dynamic power splitting and
//! element selection), cross-checks the closed forms against brute-force
//! oracles, and measures robustness to received-power fluctuations.

pub mod config;
pub mod error;
pub mod harvest;
pub mod linkbudget;
pub mod montecarlo;
pub mod oracle;
pub mod solvers;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use harvest::EhParams;
pub use montecarlo::{FluctuationModel, McSummary, TrialOutcome};
pub use solvers::{Method, ShareParam, SwiptInputs, SwiptSolution};

//! Safety-driven interactive lane changing.
//!
//! The ego vehicle changes from the original lane (`y = 0`) into the target
//! lane (`y = w_l`) between a leader and a follower. Neural planners propose
//! accelerations; the [`decision`] layer only accepts a proposal when a
//! worst-case evasion back to the original lane stays verifiably safe
//! afterwards ([`safety`]). The follower's aggressiveness is estimated online
//! by [`assessor`] so a cautious follower does not force the worst case.
//!
//! Everything here is pure computation over `alloc`; file formats, the CLI and
//! the batch harness live in the `safin` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assessor;
pub mod decision;
pub mod drivers;
pub mod error;
pub mod kinematics;
pub mod mlp;
pub mod planners;
pub mod safety;
pub mod sim;

pub use error::{Error, Result};
pub use kinematics::{Action, Geometry, KinematicState, Limits, WorldState};

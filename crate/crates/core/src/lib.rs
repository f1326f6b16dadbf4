//! Pliable index coding (PICOD) for complete--S instances.
//!
//! The crate covers both directions of the optimal code length
//! `min(m - s_min, s_max + 1)` for consecutive complete--S instances:
//!
//! * [`codes`] builds the two linear schemes (uncoded prefix and Vandermonde MDS),
//!   and [`decode`] checks them under zero-error linear decodability.
//! * [`chains`] computes decoding-chain (mimic) closures for a fixed choice of
//!   desired messages, and [`mais`] the maximum acyclic induced subgraph bound.
//! * [`verify`] runs the exhaustive and sampled certifications and emits
//!   [`verify::Report`]s.
//!
//! Messages are numbered from 1, users are 0-based positions in the canonical
//! user order of an [`Instance`].

pub mod assignment;
pub mod chains;
pub mod codes;
pub mod decode;
pub mod error;
pub mod exec;
pub mod galois;
pub mod instance;
pub mod mais;
pub mod verify;

pub use assignment::{Assignment, AssignmentSpace};
pub use codes::{LinearCode, Scheme};
pub use error::{PicodError, Result};
pub use exec::Exec;
pub use galois::{GaloisField, Matrix};
pub use instance::{Instance, SideInfo, SpecS};

/// Optimal code length `min(m - s_min, s_max + 1)` of the consecutive complete--S instance.
pub fn optimal_length(m: u8, spec: SpecS) -> u8 {
    (m - spec.s_min).min(spec.s_max + 1)
}

//! Quantifies how strongly a single photon couples to a single atom
//! in free space when a deep parabolic mirror focuses the light from
//! (almost) the full solid angle.
//!
//! The crate models the chain from geometry to excitation
//! probability: mirror ray map, dipole radiation patterns and their
//! weighted solid-angle coverage, the ideal collimated input beam,
//! spatial mode overlap on the sphere, temporal pulse-shape dynamics
//! of the two-level atom, and the equivalent figures for a
//! Fabry-Perot cavity, plus a registry of atomic transitions that
//! realize a closed two-level system.

pub mod beam;
pub mod cavity;
pub mod coupling;
pub mod dipole;
pub mod error;
pub mod mirror;
pub mod quadrature;
pub mod temporal;
pub mod transitions;

pub use beam::{PupilMap, PupilPolarization, RadialProfile};
pub use cavity::{Cavity, CavityFigures, PhysicalConstants};
pub use coupling::{AngularAmplitude, CouplingReport};
pub use dipole::DipoleKind;
pub use error::{Error, Result};
pub use mirror::{AngularDomain, ParabolicMirror};
pub use temporal::{Excitation, PulseEnvelope, PulseShape, TwoLevelAtom};
pub use transitions::{Criterion, TransitionCandidate, Verdict};

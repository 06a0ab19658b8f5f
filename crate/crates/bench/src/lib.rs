//! Shared fixtures for the benchmark targets.

use fourpi_core::{DipoleKind, ParabolicMirror, PulseEnvelope, PulseShape, TwoLevelAtom};

/// The reference geometry: focal length 1, depth 6f.
pub fn deep_mirror() -> ParabolicMirror {
    ParabolicMirror::new(1.0, 6.0).expect("reference mirror parameters are valid")
}

pub fn calcium_like_atom() -> TwoLevelAtom {
    TwoLevelAtom::new(657e-9, 2500.0).expect("reference atom parameters are valid")
}

pub fn matched_rising_pulse() -> PulseEnvelope {
    PulseEnvelope::with_auto_window(PulseShape::RisingExponential, 1.0)
        .expect("matched pulse is representable")
}

pub const BOTH_KINDS: [DipoleKind; 2] = [DipoleKind::LinearPi, DipoleKind::CircularSigma];

//! Minimal end-to-end run: geometric coverage of a deep mirror feeds
//! the excitation integrator as the spatial efficiency.

use fourpi_core::temporal::excite;
use fourpi_core::{DipoleKind, ParabolicMirror, PulseEnvelope, PulseShape, TwoLevelAtom};

fn main() -> fourpi_core::Result<()> {
    let mirror = ParabolicMirror::new(1.0, 6.0)?;
    let eta = DipoleKind::LinearPi.coverage_fraction(&mirror.coverage_domain());

    let atom = TwoLevelAtom::new(657e-9, 2500.0)?;
    let pulse = PulseEnvelope::with_auto_window(PulseShape::RisingExponential, 1.0)?;
    let run = excite(&atom, &pulse, eta)?;
    assert!((run.max_probability - eta).abs() < 1e-4);

    println!(
        "coverage fraction {eta:.6}; max excitation {:.6} at t = {:.3} lifetimes",
        run.max_probability, run.peak_time
    );
    Ok(())
}

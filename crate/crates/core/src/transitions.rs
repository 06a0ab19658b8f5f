//! Which real transitions behave as closed two-level systems.
//!
//! Three criteria: no nuclear spin (so no hyperfine structure), a
//! `J = 0` ground state with a `J = 1` excited state (a plain dipole
//! triplet above a single ground level), and no dipole decay path
//! from the excited state other than back to the ground state. The
//! bundled registry holds the candidates meeting all three.

use crate::error::{Error, Result};
use std::fmt;

/// One atomic or ionic transition under consideration.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCandidate {
    species: String,
    proton_count: u32,
    neutron_count: u32,
    nuclear_spin: f64,
    j_ground: f64,
    j_excited: f64,
    wavelength: f64,
    decay_channels: u32,
}

fn is_half_integer(x: f64) -> bool {
    x.is_finite() && x >= 0.0 && (2.0 * x - (2.0 * x).round()).abs() < 1e-9
}

impl TransitionCandidate {
    /// Angular momenta must be non-negative half-integers; the
    /// wavelength is in meters.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        species: impl Into<String>,
        proton_count: u32,
        neutron_count: u32,
        nuclear_spin: f64,
        j_ground: f64,
        j_excited: f64,
        wavelength: f64,
        decay_channels: u32,
    ) -> Result<Self> {
        for (name, value) in [
            ("nuclear spin", nuclear_spin),
            ("ground-state J", j_ground),
            ("excited-state J", j_excited),
        ] {
            if !is_half_integer(value) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be a non-negative half-integer, got {value}"
                )));
            }
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self {
            species: species.into(),
            proton_count,
            neutron_count,
            nuclear_spin,
            j_ground,
            j_excited,
            wavelength,
            decay_channels,
        })
    }

    pub fn species(&self) -> &str {
        &self.species
    }

    pub fn proton_count(&self) -> u32 {
        self.proton_count
    }

    pub fn neutron_count(&self) -> u32 {
        self.neutron_count
    }

    pub fn nuclear_spin(&self) -> f64 {
        self.nuclear_spin
    }

    pub fn j_ground(&self) -> f64 {
        self.j_ground
    }

    pub fn j_excited(&self) -> f64 {
        self.j_excited
    }

    /// Transition wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn decay_channels(&self) -> u32 {
        self.decay_channels
    }
}

/// The three closure criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// I = 0: no hyperfine splitting.
    NuclearSpinZero,
    /// J = 0 ground state with a J = 1 excited state.
    GroundJZeroExcitedJOne,
    /// Exactly one dipole decay channel from the excited state.
    SingleDecayChannel,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Criterion::NuclearSpinZero => "nuclear spin I = 0 (no hyperfine structure)",
            Criterion::GroundJZeroExcitedJOne => "J = 0 ground state with J = 1 excited state",
            Criterion::SingleDecayChannel => {
                "exactly one dipole decay channel from the excited state"
            }
        };
        f.write_str(text)
    }
}

/// Outcome of [`check_two_level`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Vec<Criterion>),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn violations(&self) -> &[Criterion] {
        match self {
            Verdict::Pass => &[],
            Verdict::Fail(v) => v,
        }
    }
}

/// Test a candidate against all criteria; every violated criterion
/// is reported.
pub fn check_two_level(candidate: &TransitionCandidate) -> Verdict {
    let mut violations = Vec::new();
    if candidate.nuclear_spin != 0.0 {
        violations.push(Criterion::NuclearSpinZero);
    }
    if candidate.j_ground != 0.0 || candidate.j_excited != 1.0 {
        violations.push(Criterion::GroundJZeroExcitedJOne);
    }
    if candidate.decay_channels != 1 {
        violations.push(Criterion::SingleDecayChannel);
    }
    if violations.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail(violations)
    }
}

const REGISTRY_TSV: &str = include_str!("../data/transitions.tsv");

/// Parse a tab-separated candidate table (`#` comments allowed; the
/// header row names the columns of [`registry`]'s bundled file).
pub fn parse_registry(text: &str) -> Result<Vec<TransitionCandidate>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("species") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 8 {
            return Err(Error::InvalidData(format!(
                "line {}: expected 8 tab-separated fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_int = |s: &str, what: &str| {
            s.parse::<u32>()
                .map_err(|e| Error::InvalidData(format!("line {}: {what}: {e}", lineno + 1)))
        };
        let parse_num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidData(format!("line {}: {what}: {e}", lineno + 1)))
        };
        out.push(TransitionCandidate::new(
            fields[0],
            parse_int(fields[1], "protons")?,
            parse_int(fields[2], "neutrons")?,
            parse_num(fields[3], "nuclear spin")?,
            parse_num(fields[4], "ground J")?,
            parse_num(fields[5], "excited J")?,
            parse_num(fields[6], "wavelength")? * 1e-9,
            parse_int(fields[7], "decay channels")?,
        )?);
    }
    Ok(out)
}

/// The bundled candidate transitions.
pub fn registry() -> Vec<TransitionCandidate> {
    parse_registry(REGISTRY_TSV).expect("bundled registry parses")
}

//! Spatial coupling: overlap of an incident angular amplitude with
//! the atomic dipole wave.
//!
//! Far fields live on the sphere in the transverse polarization
//! basis (theta and phi components per direction). Overlaps are
//! `eta_s = |Int A_in* . A_dip dOmega|^2`; the absorption probability
//! for spatially matched illumination is `3 DeltaOmega / (8 pi)`.
//! Quadrature runs on Gauss-Legendre nodes in cos(theta), panel
//! edges pinned to any truncation cuts so sharp apertures integrate
//! exactly, with a uniform grid in phi.

use crate::beam::{PupilMap, PupilPolarization, RadialProfile};
use crate::dipole::{DipoleKind, FULL_WEIGHTED_SOLID_ANGLE};
use crate::error::{Error, Result};
use crate::mirror::{AngularDomain, ParabolicMirror};
use crate::quadrature::{self, NeumaierSum};
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

const PANELS_PER_SEGMENT: usize = 8;
const NODES_PER_PANEL: usize = 16;
const N_PHI: usize = 128;
const NORMALIZATION_TOL: f64 = 1e-6;

/// Complex far-field amplitude sampled on a product quadrature grid.
///
/// Rows index polar nodes (Gauss-Legendre in cos(theta) per panel),
/// columns the uniform azimuthal grid `phi_j = 2 pi j / n_phi`. Each
/// node carries the two transverse polarization components. The
/// field is implicitly zero outside the gridded polar range.
#[derive(Debug, Clone)]
pub struct AngularAmplitude {
    theta: Vec<f64>,
    weight: Vec<f64>,
    phi: Vec<f64>,
    a_theta: Array2<Complex64>,
    a_phi: Array2<Complex64>,
}

impl AngularAmplitude {
    /// Sample `f(theta, phi) -> (a_theta, a_phi)` on a grid whose
    /// panel edges sit exactly at `theta_breakpoints` (ascending,
    /// within [0, pi]).
    pub fn from_polarized_fn(
        theta_breakpoints: &[f64],
        n_phi: usize,
        f: impl Fn(f64, f64) -> (Complex64, Complex64),
    ) -> Result<Self> {
        if theta_breakpoints.len() < 2 || n_phi < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid too small: {} breakpoints x {} azimuths",
                theta_breakpoints.len(),
                n_phi
            )));
        }
        for pair in theta_breakpoints.windows(2) {
            // Comparison is false for NaN, so NaN breakpoints fail too.
            let ascending = pair[0] < pair[1];
            if !ascending {
                return Err(Error::InvalidArgument(
                    "polar breakpoints must be strictly increasing".into(),
                ));
            }
        }
        let (lo, hi) = (theta_breakpoints[0], *theta_breakpoints.last().unwrap());
        if !(0.0..=PI).contains(&lo) || hi > PI + 1e-15 {
            return Err(Error::InvalidArgument(format!(
                "polar range [{lo}, {hi}] leaves [0, pi]"
            )));
        }
        let (gl_nodes, gl_weights) = quadrature::gauss_legendre(NODES_PER_PANEL);
        let mut theta = Vec::new();
        let mut weight = Vec::new();
        // Integrate in mu = cos(theta); descending theta segments map
        // to ascending mu panels.
        for seg in theta_breakpoints.windows(2) {
            let mu_hi = seg[0].cos();
            let mu_lo = seg[1].cos();
            let span = (mu_hi - mu_lo) / PANELS_PER_SEGMENT as f64;
            for p in 0..PANELS_PER_SEGMENT {
                let a = mu_lo + span * p as f64;
                let b = a + span;
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                for (x, w) in gl_nodes.iter().zip(&gl_weights) {
                    let mu = mid + half * x;
                    theta.push(mu.clamp(-1.0, 1.0).acos());
                    weight.push(w * half);
                }
            }
        }
        let phi: Vec<f64> = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        let mut a_theta = Array2::default((theta.len(), n_phi));
        let mut a_phi = Array2::default((theta.len(), n_phi));
        for (i, &th) in theta.iter().enumerate() {
            for (j, &ph) in phi.iter().enumerate() {
                let (at, ap) = f(th, ph);
                if !(at.is_finite() && ap.is_finite()) {
                    return Err(Error::InvalidData(format!(
                        "non-finite amplitude at theta {th}, phi {ph}"
                    )));
                }
                a_theta[(i, j)] = at;
                a_phi[(i, j)] = ap;
            }
        }
        Ok(Self {
            theta,
            weight,
            phi,
            a_theta,
            a_phi,
        })
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }

    /// `Int |A|^2 dOmega` by the grid's own quadrature rule.
    pub fn norm_squared(&self) -> f64 {
        let dphi = 2.0 * PI / self.phi.len() as f64;
        let mut sum = NeumaierSum::new();
        for i in 0..self.theta.len() {
            for j in 0..self.phi.len() {
                let mag = self.a_theta[(i, j)].norm_sqr() + self.a_phi[(i, j)].norm_sqr();
                sum.add(self.weight[i] * dphi * mag);
            }
        }
        sum.total()
    }

    /// Rescaled copy with `norm_squared() = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_squared();
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::InvalidData(format!(
                "cannot normalize amplitude with squared norm {n2}"
            )));
        }
        let scale = Complex64::new(1.0 / n2.sqrt(), 0.0);
        let mut out = self.clone();
        out.a_theta.mapv_inplace(|a| a * scale);
        out.a_phi.mapv_inplace(|a| a * scale);
        Ok(out)
    }

    /// Copy multiplied by the global phase `e^{i alpha}`.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let z = Complex64::from_polar(1.0, alpha);
        let mut out = self.clone();
        out.a_theta.mapv_inplace(|a| a * z);
        out.a_phi.mapv_inplace(|a| a * z);
        out
    }
}

/// Transverse dipole far-field components at one direction, for a
/// unit-normalized pattern (`Int |A|^2 dOmega = 1`).
fn dipole_components(kind: DipoleKind, theta: f64, phi: f64) -> (Complex64, Complex64) {
    match kind {
        DipoleKind::LinearPi => {
            let c = (3.0 / (8.0 * PI)).sqrt();
            (
                Complex64::new(c * theta.sin(), 0.0),
                Complex64::new(0.0, 0.0),
            )
        }
        DipoleKind::CircularSigma => {
            let c = (3.0 / (16.0 * PI)).sqrt();
            let swirl = Complex64::from_polar(c, phi);
            (swirl * theta.cos(), swirl * Complex64::i())
        }
    }
}

/// Unit-normalized dipole far field on a full-sphere grid.
pub fn dipole_angular_amplitude(pattern: DipoleKind) -> AngularAmplitude {
    AngularAmplitude::from_polarized_fn(&[0.0, PI], N_PHI, |th, ph| {
        dipole_components(pattern, th, ph)
    })
    .expect("full-sphere grid parameters are valid")
}

/// Dipole far field zeroed outside `domain`, on a grid with panel
/// edges at the cut angles. Not renormalized: its squared norm is
/// the coverage fraction of `domain`.
pub fn truncated_dipole_amplitude(pattern: DipoleKind, domain: &AngularDomain) -> AngularAmplitude {
    let mut cuts = vec![0.0, domain.theta_min(), domain.theta_max(), PI];
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    AngularAmplitude::from_polarized_fn(&cuts, N_PHI, |th, ph| {
        if domain.contains(th) {
            dipole_components(pattern, th, ph)
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        }
    })
    .expect("cut grid parameters are valid")
}

/// `eta_s = |Int A_in* . A_dip dOmega|^2` against the unit-normalized
/// dipole pattern, evaluated analytically at the input's own nodes.
///
/// The input must be normalized (`norm_squared` within 1e-6 of 1).
pub fn spatial_overlap(input: &AngularAmplitude, pattern: DipoleKind) -> Result<f64> {
    let n2 = input.norm_squared();
    if (n2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidArgument(format!(
            "input amplitude is not normalized: Int |A|^2 dOmega = {n2}"
        )));
    }
    let dphi = 2.0 * PI / input.phi.len() as f64;
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (i, &th) in input.theta.iter().enumerate() {
        let w = input.weight[i] * dphi;
        for (j, &ph) in input.phi.iter().enumerate() {
            let (dt, dp) = dipole_components(pattern, th, ph);
            let term = input.a_theta[(i, j)].conj() * dt + input.a_phi[(i, j)].conj() * dp;
            re.add(w * term.re);
            im.add(w * term.im);
        }
    }
    let overlap = Complex64::new(re.total(), im.total()).norm_sqr();
    Ok(overlap.min(1.0))
}

/// Propagate an aperture field to the far field through the mirror.
///
/// Each aperture point `(rho, phi)` maps to the direction
/// `(theta(rho), phi)` by the inverse ray map; the energy-conserving
/// Jacobian turns the profile intensity into `|A|^2`; the pupil
/// contributes its phase, and its polarization fixes the transverse
/// components (radial maps to the theta-direction). The result is
/// normalized unless the profile is dark everywhere.
pub fn pupil_to_angular(
    profile: &RadialProfile,
    pupil: &PupilMap,
    mirror: &ParabolicMirror,
) -> Result<AngularAmplitude> {
    let rim = mirror.rim_radius();
    let tol = 1e-6 * rim.max(1.0);
    if (profile.max_radius() - rim).abs() > tol || (pupil.max_radius() - rim).abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "aperture mismatch: profile spans {}, pupil {}, rim radius {rim}",
            profile.max_radius(),
            pupil.max_radius()
        )));
    }
    let f = mirror.focal_length();
    let rim_angle = mirror.rim_angle();
    let n_segments = 8;
    let mut cuts: Vec<f64> = (0..=n_segments)
        .map(|k| rim_angle * k as f64 / n_segments as f64)
        .collect();
    cuts[0] = 0.0;
    let polarization = pupil.polarization();
    let raw = AngularAmplitude::from_polarized_fn(&cuts, N_PHI, |th, ph| {
        let t = (0.5 * th).tan();
        let rho = 2.0 * f * t;
        let g = 1.0 + t * t;
        // |A|^2 sin(theta) dtheta dphi = I rho drho dphi with
        // rho = 2 f tan(theta/2) gives |A|^2 = I f^2 (1 + t^2)^2.
        let mag = (profile.intensity_at(rho) * f * f * g * g).sqrt();
        if mag == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let plate = Complex64::from_polar(mag, pupil.phase_at(rho, ph));
        match polarization {
            PupilPolarization::Radial => (plate, Complex64::new(0.0, 0.0)),
            PupilPolarization::Circular => {
                let swirl = plate * Complex64::from_polar(1.0 / 2.0f64.sqrt(), ph);
                (swirl, swirl * Complex64::i())
            }
        }
    })?;
    if raw.norm_squared() == 0.0 {
        return Ok(raw);
    }
    raw.normalized()
}

/// Spatial coupling summary for one mirror-and-beam configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    /// Weighted solid angle collected by the optics, in steradians.
    pub weighted_coverage_sr: f64,
    /// Overlap of the incident field with the dipole wave.
    pub spatial_efficiency: f64,
    /// Absorption probability with perfect temporal matching.
    pub absorption_probability: f64,
}

impl CouplingReport {
    /// Report for a geometrically matched beam covering `domain`.
    pub fn from_coverage(pattern: DipoleKind, domain: &AngularDomain) -> Self {
        let coverage = pattern.weighted_solid_angle(domain);
        Self::from_weighted_coverage(coverage)
    }

    /// Report for a measured spatial efficiency, expressed through
    /// the equivalent weighted solid angle.
    pub fn from_spatial_efficiency(eta_s: f64) -> Self {
        Self::from_weighted_coverage(eta_s * FULL_WEIGHTED_SOLID_ANGLE)
    }

    fn from_weighted_coverage(coverage: f64) -> Self {
        let eta = (coverage / FULL_WEIGHTED_SOLID_ANGLE).min(1.0);
        Self {
            weighted_coverage_sr: coverage,
            spatial_efficiency: eta,
            absorption_probability: eta,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain floats serialize");
        s.push('\n');
        s
    }
}

/// Add the light a hole-covering axial element redirects from the
/// otherwise-lost cap.
///
/// `DeltaOmega' = DeltaOmega + efficiency * weighted_solid_angle
/// (pattern, domain)`; the efficiencies are recomputed from the
/// extended coverage. `domain` is the cap the mirror misses.
pub fn axial_hole_extension(
    report: &CouplingReport,
    pattern: DipoleKind,
    domain: &AngularDomain,
    efficiency: f64,
) -> Result<CouplingReport> {
    if !(0.0..=1.0).contains(&efficiency) || !efficiency.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "redirection efficiency must lie in [0, 1], got {efficiency}"
        )));
    }
    let extra = efficiency * pattern.weighted_solid_angle(domain);
    let coverage = (report.weighted_coverage_sr + extra).min(FULL_WEIGHTED_SOLID_ANGLE);
    Ok(CouplingReport::from_weighted_coverage(coverage))
}

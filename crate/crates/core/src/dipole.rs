//! Angular radiation patterns of dipole transitions and their
//! weighted solid angles.
//!
//! The weighting `D(theta)` is kept unnormalized so that integrating
//! it over the full sphere gives `8 pi / 3` for both transition
//! kinds; coverage fractions divide by that constant.

use crate::error::Result;
use crate::mirror::AngularDomain;
use crate::quadrature;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Weighted solid angle of the full sphere, `8 pi / 3`.
pub const FULL_WEIGHTED_SOLID_ANGLE: f64 = 8.0 * PI / 3.0;

/// Absolute tolerance used for the angular quadrature.
pub const SOLID_ANGLE_TOL: f64 = 1e-10;

/// Dipole transition kind, distinguished by the polarization that
/// drives it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DipoleKind {
    /// Linear dipole along the optical axis (pi-polarized light).
    LinearPi,
    /// Circular dipole in the transverse plane (sigma-polarized light).
    CircularSigma,
}

impl DipoleKind {
    /// Angular intensity weight `D(theta)`.
    ///
    /// `sin^2(theta)` for the linear dipole, `(1 + cos^2(theta)) / 2`
    /// for the circular one. Both integrate to `8 pi / 3` over the
    /// sphere.
    pub fn angular_weight(self, theta: f64) -> f64 {
        match self {
            DipoleKind::LinearPi => {
                let s = theta.sin();
                s * s
            }
            DipoleKind::CircularSigma => {
                let c = theta.cos();
                0.5 * (1.0 + c * c)
            }
        }
    }

    /// Pattern-weighted solid angle over `domain`,
    /// `2 pi Int D(theta) sin(theta) dtheta`.
    pub fn weighted_solid_angle(self, domain: &AngularDomain) -> f64 {
        if domain.is_empty() {
            return 0.0;
        }
        2.0 * PI
            * quadrature::integrate(
                |theta| self.angular_weight(theta) * theta.sin(),
                domain.theta_min(),
                domain.theta_max(),
                SOLID_ANGLE_TOL,
            )
            .expect("pattern quadrature converges: integrand is entire")
    }

    /// Fraction of the dipole's radiated power that falls in `domain`.
    pub fn coverage_fraction(self, domain: &AngularDomain) -> f64 {
        self.weighted_solid_angle(domain) / FULL_WEIGHTED_SOLID_ANGLE
    }
}

impl fmt::Display for DipoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DipoleKind::LinearPi => write!(f, "pi"),
            DipoleKind::CircularSigma => write!(f, "sigma"),
        }
    }
}

impl FromStr for DipoleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pi" | "linear" => Ok(DipoleKind::LinearPi),
            "sigma" | "circular" => Ok(DipoleKind::CircularSigma),
            other => Err(format!("unknown dipole kind '{other}' (want pi|sigma)")),
        }
    }
}

/// Result-returning convenience wrapper used by callers that combine
/// domain construction and integration.
pub fn weighted_solid_angle(kind: DipoleKind, theta_min: f64, theta_max: f64) -> Result<f64> {
    let domain = AngularDomain::new(theta_min, theta_max)?;
    Ok(kind.weighted_solid_angle(&domain))
}

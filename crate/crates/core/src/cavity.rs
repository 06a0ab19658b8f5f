//! Cavity-QED comparison figures.
//!
//! A resonator with waist `w0` intercepts the solid angle of its mode
//! divergence; `N = 1/(1-R)` passes give the figure of merit
//! `F_Omega = 3 lambda^2 / (8 pi^2 w0^2 (1-R))` and the absorption
//! probability `min(F_Omega, 1)`. The conventional strong-coupling
//! figure `F_g = g^2/(kappa gamma)` reduces to exactly `F_Omega` once
//! the dipole moment is eliminated via the free-space linewidth, which
//! `cavity_figures` verifies numerically.

use crate::error::{Error, Result};
use crate::temporal::TwoLevelAtom;
use serde::Serialize;
use std::f64::consts::PI;

/// CODATA values used wherever dimensional physics enters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// c, m/s.
    pub speed_of_light: f64,
    /// hbar, J s.
    pub reduced_planck: f64,
    /// epsilon_0, F/m.
    pub vacuum_permittivity: f64,
}

impl PhysicalConstants {
    pub const CODATA: Self = Self {
        speed_of_light: 299_792_458.0,
        reduced_planck: 1.054_571_817e-34,
        vacuum_permittivity: 8.854_187_812_8e-12,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Symmetric Fabry-Perot resonator in the paraxial regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cavity {
    mirror_reflectivity: f64,
    length: f64,
    waist: f64,
}

impl Cavity {
    /// `mirror_reflectivity` in [0, 1), `length` and `waist` in
    /// meters.
    pub fn new(mirror_reflectivity: f64, length: f64, waist: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mirror_reflectivity) {
            return Err(Error::Domain(format!(
                "mirror reflectivity must lie in [0, 1), got {mirror_reflectivity}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cavity length must be positive, got {length}"
            )));
        }
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beam waist must be positive, got {waist}"
            )));
        }
        Ok(Self {
            mirror_reflectivity,
            length,
            waist,
        })
    }

    pub fn mirror_reflectivity(&self) -> f64 {
        self.mirror_reflectivity
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// Mode divergence half-angle `theta = lambda / (pi w0)`.
    pub fn divergence_angle(&self, wavelength: f64) -> f64 {
        wavelength / (PI * self.waist)
    }

    /// Whether the Gaussian-mode description is trustworthy
    /// (divergence no steeper than 0.1 rad).
    pub fn is_paraxial(&self, wavelength: f64) -> bool {
        self.divergence_angle(wavelength) <= 0.1
    }

    /// Mean number of passes before the photon leaves, `1/(1-R)`.
    pub fn pass_count(&self) -> f64 {
        1.0 / (1.0 - self.mirror_reflectivity)
    }
}

/// Absorption probability in a single transit of the mode waist,
/// `3 lambda^2 / (8 pi^2 w0^2)`: the solid-angle fraction of the
/// dipole pattern the mode divergence covers.
pub fn single_pass_probability(wavelength: f64, cavity: &Cavity) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let w0 = cavity.waist();
    Ok(3.0 * wavelength * wavelength / (8.0 * PI * PI * w0 * w0))
}

/// Geometric cavity figure of merit: pass count times single-pass
/// probability.
pub fn f_omega(wavelength: f64, cavity: &Cavity) -> Result<f64> {
    Ok(cavity.pass_count() * single_pass_probability(wavelength, cavity)?)
}

/// Probability of at-least-one absorption inside the cavity,
/// `min(F_Omega, 1)`.
pub fn p_abs_cav(f_omega: f64) -> Result<f64> {
    if !(f_omega.is_finite() && f_omega >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "figure of merit must be non-negative, got {f_omega}"
        )));
    }
    Ok(f_omega.min(1.0))
}

/// Full set of cavity coupling figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityFigures {
    /// Mean pass count N = 1/(1-R).
    pub pass_count: f64,
    /// Geometric figure of merit (solid-angle form).
    pub f_omega: f64,
    /// Conventional figure of merit g^2/(kappa gamma).
    pub f_g: f64,
    /// Atom-field coupling rate g, 1/s.
    pub coupling_g: f64,
    /// Cavity field decay rate kappa = (1-R) c / L, 1/s.
    pub kappa: f64,
    /// Atomic linewidth gamma, 1/s.
    pub gamma: f64,
}

/// Compute both figures of merit with CODATA constants.
pub fn cavity_figures(atom: &TwoLevelAtom, cavity: &Cavity) -> Result<CavityFigures> {
    cavity_figures_with(atom, cavity, &PhysicalConstants::CODATA)
}

/// Compute both figures of merit.
///
/// The dipole moment is eliminated through the free-space linewidth,
/// `mu^2 = 3 pi eps0 hbar c^3 gamma / omega^3`; with the mode volume
/// `V = pi w0^2 L` and `g^2 = mu^2 omega / (2 hbar eps0 V)` the
/// constants cancel and `F_g` equals `F_Omega` identically.
pub fn cavity_figures_with(
    atom: &TwoLevelAtom,
    cavity: &Cavity,
    constants: &PhysicalConstants,
) -> Result<CavityFigures> {
    let c = constants.speed_of_light;
    let hbar = constants.reduced_planck;
    let eps0 = constants.vacuum_permittivity;
    let gamma = atom.linewidth();
    let omega = 2.0 * PI * c / atom.wavelength();
    let mu_sq = 3.0 * PI * eps0 * hbar * c.powi(3) * gamma / omega.powi(3);
    let volume = PI * cavity.waist() * cavity.waist() * cavity.length();
    let g_sq = mu_sq * omega / (2.0 * hbar * eps0 * volume);
    let kappa = (1.0 - cavity.mirror_reflectivity()) * c / cavity.length();
    Ok(CavityFigures {
        pass_count: cavity.pass_count(),
        f_omega: f_omega(atom.wavelength(), cavity)?,
        f_g: g_sq / (kappa * gamma),
        coupling_g: g_sq.sqrt(),
        kappa,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::FULL_WEIGHTED_SOLID_ANGLE;
    use crate::quadrature;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_cavity() -> Cavity {
        Cavity::new(0.99999, 1e-3, 1e-5).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Cavity::new(1.0, 1e-3, 1e-5).is_err());
        assert!(Cavity::new(-0.1, 1e-3, 1e-5).is_err());
        assert!(Cavity::new(0.5, 0.0, 1e-5).is_err());
        assert!(Cavity::new(0.5, 1e-3, -1e-5).is_err());
    }

    #[test]
    fn reference_figure_of_merit() {
        let f = f_omega(1e-6, &reference_cavity()).unwrap();
        assert_abs_diff_eq!(f, 37.995, epsilon = 1e-3);
        // 0.99999 is not exactly representable, so 1/(1-R) differs
        // from 1e5 by a few 1e-12 relative.
        assert_relative_eq!(f, 375.0 / (PI * PI), max_relative = 1e-9);
        assert_abs_diff_eq!(p_abs_cav(f).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn reference_single_pass_probability() {
        let c = Cavity::new(0.0, 1e-3, 1e-5).unwrap();
        let p = single_pass_probability(1e-6, &c).unwrap();
        assert_relative_eq!(p, 3.0 / (800.0 * PI * PI), max_relative = 1e-15);
        assert_relative_eq!(p, 3.7995e-4, max_relative = 1e-4);
        // With R = 0 the cavity adds nothing.
        assert_eq!(f_omega(1e-6, &c).unwrap(), p);
    }

    #[test]
    fn doubling_the_waist_quarters_the_figure() {
        let narrow = reference_cavity();
        let wide = Cavity::new(0.99999, 1e-3, 2e-5).unwrap();
        let ratio = f_omega(1e-6, &narrow).unwrap() / f_omega(1e-6, &wide).unwrap();
        assert_relative_eq!(ratio, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn huge_waist_limit_vanishes() {
        let c = Cavity::new(0.0, 1e-3, 1e3).unwrap();
        assert!(single_pass_probability(1e-6, &c).unwrap() < 1e-18);
    }

    #[test]
    fn clamped_probability_branches() {
        assert_eq!(p_abs_cav(0.5).unwrap(), 0.5);
        assert_eq!(p_abs_cav(38.0).unwrap(), 1.0);
        assert_eq!(p_abs_cav(1.0).unwrap(), 1.0);
        assert!(p_abs_cav(-0.1).is_err());
    }

    #[test]
    fn clamped_probability_is_monotone() {
        let mut last = 0.0;
        for k in 0..200 {
            let f = 2.0 * k as f64 / 199.0;
            let p = p_abs_cav(f).unwrap();
            assert!(p >= last && p <= 1.0);
            last = p;
        }
    }

    #[test]
    fn the_two_figures_of_merit_are_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let wavelength = rng.gen_range(0.2e-6..2e-6);
            let waist = rng.gen_range(2e-6..100e-6);
            let length = rng.gen_range(0.1e-3..100e-3);
            let reflectivity = rng.gen_range(0.0..(1.0 - 1e-8));
            let gamma = rng.gen_range(1e3..1e9);
            let atom = TwoLevelAtom::new(wavelength, gamma).unwrap();
            let cavity = Cavity::new(reflectivity, length, waist).unwrap();
            let figs = cavity_figures(&atom, &cavity).unwrap();
            assert_relative_eq!(figs.f_g, figs.f_omega, max_relative = 1e-10);
            assert!(figs.coupling_g > 0.0 && figs.kappa > 0.0);
        }
    }

    #[test]
    fn linewidth_and_length_cancel_out_of_f_g() {
        let cavity = reference_cavity();
        let base = cavity_figures(&TwoLevelAtom::new(657e-9, 1e6).unwrap(), &cavity).unwrap();
        let double_gamma =
            cavity_figures(&TwoLevelAtom::new(657e-9, 2e6).unwrap(), &cavity).unwrap();
        assert_relative_eq!(double_gamma.f_g, base.f_g, max_relative = 1e-12);

        let longer = Cavity::new(0.99999, 2e-3, 1e-5).unwrap();
        let far = cavity_figures(&TwoLevelAtom::new(657e-9, 1e6).unwrap(), &longer).unwrap();
        assert_relative_eq!(far.f_g, base.f_g, max_relative = 1e-12);
    }

    #[test]
    fn single_pass_matches_the_small_cap_quadrature() {
        // The mode cone sits at the equatorial maximum of the linear
        // dipole; its weighted solid angle is
        // Int_0^theta (2 pi - pi sin^2 a) sin a da.
        for theta in [0.01, 0.03, 0.05] {
            let waist = 1e-5;
            let wavelength = theta * PI * waist;
            let c = Cavity::new(0.0, 1e-3, waist).unwrap();
            let p = single_pass_probability(wavelength, &c).unwrap();
            let weighted = quadrature::integrate(
                |a| (2.0 * PI - PI * a.sin().powi(2)) * a.sin(),
                0.0,
                theta,
                1e-15,
            )
            .unwrap();
            let fraction = weighted / FULL_WEIGHTED_SOLID_ANGLE;
            assert_relative_eq!(p, fraction, max_relative = 0.01);
        }
    }

    #[test]
    fn paraxial_flag_and_divergence() {
        let c = reference_cavity();
        assert_relative_eq!(
            c.divergence_angle(1e-6),
            1e-6 / (PI * 1e-5),
            max_relative = 1e-15
        );
        assert!(c.is_paraxial(1e-6));
        assert!(!c.is_paraxial(1e-5));
        assert_relative_eq!(c.pass_count(), 1e5, max_relative = 1e-9);
    }

    #[test]
    fn figures_serialize_with_stable_keys() {
        let figs =
            cavity_figures(&TwoLevelAtom::new(1e-6, 1e6).unwrap(), &reference_cavity()).unwrap();
        let json = serde_json::to_string(&figs).unwrap();
        for key in [
            "pass_count",
            "f_omega",
            "f_g",
            "coupling_g",
            "kappa",
            "gamma",
        ] {
            assert!(json.contains(&format!("\"{key}\"")), "missing {key}");
        }
    }
}

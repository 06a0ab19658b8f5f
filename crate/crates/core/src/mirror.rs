//! Deep parabolic mirror geometry.
//!
//! The emitter sits at the focus. Polar angles are measured from the
//! optical axis pointing towards the mirror vertex, so `theta = 0` is
//! the ray hitting the vertex and `theta -> pi` grazes the aperture
//! plane. A ray leaving the focus at angle `theta` is collimated at
//! radius `rho = 2 f tan(theta / 2)` after reflection.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Parabolic mirror described by focal length and depth.
///
/// Depth is measured from the vertex to the rim plane along the
/// optical axis; the rim radius follows from the parabola
/// `z = rho^2 / (4 f)` as `rho_rim = sqrt(4 f d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicMirror {
    focal_length: f64,
    depth: f64,
}

impl ParabolicMirror {
    pub fn new(focal_length: f64, depth: f64) -> Result<Self> {
        if !focal_length.is_finite() || focal_length <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "focal length must be finite and positive, got {focal_length}"
            )));
        }
        if !depth.is_finite() || depth < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "depth must be finite and non-negative, got {depth}"
            )));
        }
        Ok(Self {
            focal_length,
            depth,
        })
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Radius of the aperture at the rim plane, `sqrt(4 f d)`.
    pub fn rim_radius(&self) -> f64 {
        (4.0 * self.focal_length * self.depth).sqrt()
    }

    /// Largest emission angle intercepted by the mirror,
    /// `2 atan(sqrt(d / f))`. Strictly increasing in depth and tends
    /// to `pi` as the mirror gets arbitrarily deep.
    pub fn rim_angle(&self) -> f64 {
        2.0 * (self.depth / self.focal_length).sqrt().atan()
    }

    /// Collimated-beam radius for the ray emitted at `theta`.
    pub fn angle_to_radius(&self, theta: f64) -> Result<f64> {
        if !(0.0..PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "emission angle must lie in [0, pi), got {theta}"
            )));
        }
        Ok(2.0 * self.focal_length * (0.5 * theta).tan())
    }

    /// Emission angle that maps onto collimated radius `rho`.
    /// Inverse of [`angle_to_radius`](Self::angle_to_radius).
    pub fn radius_to_angle(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::Domain(format!(
                "radius must be finite and non-negative, got {rho}"
            )));
        }
        Ok(2.0 * (rho / (2.0 * self.focal_length)).atan())
    }

    /// Angular cap `[0, theta_rim]` covered by the mirror.
    pub fn coverage_domain(&self) -> AngularDomain {
        AngularDomain {
            theta_min: 0.0,
            theta_max: self.rim_angle(),
        }
    }

    /// Angular cap `[theta_rim, pi]` that misses the mirror.
    pub fn uncovered_domain(&self) -> AngularDomain {
        AngularDomain {
            theta_min: self.rim_angle(),
            theta_max: PI,
        }
    }

    /// Distance from the focus to the mirror surface along the ray at
    /// `theta`, `f (1 + tan^2(theta/2))`.
    pub fn surface_distance(&self, theta: f64) -> Result<f64> {
        if !(0.0..PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "emission angle must lie in [0, pi), got {theta}"
            )));
        }
        let t = (0.5 * theta).tan();
        Ok(self.focal_length * (1.0 + t * t))
    }

    /// Total length focus -> surface -> rim plane for the ray at
    /// `theta`. For an ideal parabola this is `f + d` independent of
    /// angle, which is what makes a flat incident phase arrive at the
    /// focus in phase from all directions.
    pub fn optical_path_to_rim(&self, theta: f64) -> Result<f64> {
        if theta > self.rim_angle() {
            return Err(Error::Domain(format!(
                "angle {theta} lies beyond the rim angle {}",
                self.rim_angle()
            )));
        }
        let r = self.surface_distance(theta)?;
        let t = (0.5 * theta).tan();
        // Surface z measured from the focus towards the aperture:
        // z = f (t^2 - 1); the rim plane sits at z = d - f.
        let z_surface = self.focal_length * (t * t - 1.0);
        let z_rim = self.depth - self.focal_length;
        Ok(r + (z_rim - z_surface))
    }
}

/// Azimuthally complete polar-angle interval `[theta_min, theta_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularDomain {
    theta_min: f64,
    theta_max: f64,
}

impl AngularDomain {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite())
            || theta_min < 0.0
            || theta_max > PI
            || theta_min > theta_max
        {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= theta_min <= theta_max <= pi, got [{theta_min}, {theta_max}]"
            )));
        }
        Ok(Self {
            theta_min,
            theta_max,
        })
    }

    /// Cap `[0, theta_max]` about the vertex direction.
    pub fn cap(theta_max: f64) -> Result<Self> {
        Self::new(0.0, theta_max)
    }

    pub fn full_sphere() -> Self {
        Self {
            theta_min: 0.0,
            theta_max: PI,
        }
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn is_empty(&self) -> bool {
        self.theta_min == self.theta_max
    }

    pub fn contains(&self, theta: f64) -> bool {
        (self.theta_min..=self.theta_max).contains(&theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(ParabolicMirror::new(0.0, 1.0).is_err());
        assert!(ParabolicMirror::new(-1.0, 1.0).is_err());
        assert!(ParabolicMirror::new(1.0, -0.5).is_err());
        assert!(ParabolicMirror::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn on_axis_ray_maps_to_zero_radius() {
        let m = ParabolicMirror::new(1.0, 6.0).unwrap();
        assert_eq!(m.angle_to_radius(0.0).unwrap(), 0.0);
    }

    #[test]
    fn equatorial_ray_maps_to_two_focal_lengths() {
        let m = ParabolicMirror::new(1.0, 6.0).unwrap();
        assert_abs_diff_eq!(
            m.angle_to_radius(std::f64::consts::FRAC_PI_2).unwrap(),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn rim_angle_maps_to_rim_radius() {
        let m = ParabolicMirror::new(1.0, 6.0).unwrap();
        let rho = m.angle_to_radius(m.rim_angle()).unwrap();
        assert_relative_eq!(rho, 2.0 * 6.0f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(rho, m.rim_radius(), max_relative = 1e-13);
    }

    #[test]
    fn grazing_angle_is_rejected() {
        let m = ParabolicMirror::new(1.0, 6.0).unwrap();
        assert!(matches!(m.angle_to_radius(PI), Err(Error::Domain(_))));
        assert!(matches!(m.angle_to_radius(3.5), Err(Error::Domain(_))));
        assert!(matches!(m.angle_to_radius(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_depth_covers_a_hemisphere() {
        let m = ParabolicMirror::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            m.coverage_domain().theta_max(),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn flat_mirror_covers_nothing() {
        let m = ParabolicMirror::new(1.0, 0.0).unwrap();
        assert_eq!(m.coverage_domain().theta_max(), 0.0);
        assert!(m.coverage_domain().is_empty());
    }

    #[test]
    fn six_focal_length_depth_rim_angle() {
        let m = ParabolicMirror::new(1.0, 6.0).unwrap();
        assert_abs_diff_eq!(m.rim_angle(), 2.0 * 6.0f64.sqrt().atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.rim_angle(), 2.366_399_280_279_432, epsilon = 1e-12);
    }

    #[test]
    fn rim_angle_increases_with_depth() {
        let mut last = 0.0;
        for d in [0.0, 0.1, 1.0, 6.0, 50.0, 1e6] {
            let m = ParabolicMirror::new(1.0, d).unwrap();
            assert!(m.rim_angle() >= last);
            last = m.rim_angle();
        }
        assert!(last < PI);
        assert!(PI - last < 1e-2);
    }

    #[test]
    fn angular_domain_validation() {
        assert!(AngularDomain::new(0.5, 0.4).is_err());
        assert!(AngularDomain::new(-0.1, 0.4).is_err());
        assert!(AngularDomain::new(0.0, PI + 0.1).is_err());
        assert!(AngularDomain::new(0.2, 0.2).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn angle_radius_round_trip(
            theta in 0.0..(PI - 1e-6),
            f in 0.05f64..20.0,
        ) {
            let m = ParabolicMirror::new(f, 1.0).unwrap();
            let rho = m.angle_to_radius(theta).unwrap();
            let back = m.radius_to_angle(rho).unwrap();
            let scale = theta.abs().max(1.0);
            prop_assert!((back - theta).abs() <= 1e-12 * scale);
        }

        #[test]
        fn optical_path_is_constant(
            frac in 0.0f64..1.0,
            d in 0.01f64..50.0,
        ) {
            let m = ParabolicMirror::new(1.0, d).unwrap();
            let theta = frac * m.rim_angle();
            let path = m.optical_path_to_rim(theta).unwrap();
            let expected = m.focal_length() + m.depth();
            prop_assert!((path - expected).abs() <= 1e-12 * expected);
        }
    }
}

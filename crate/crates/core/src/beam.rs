//! The collimated input field that the mode converter must prepare.
//!
//! Energy conservation along the ray map `rho = 2 f tan(theta/2)`
//! turns the dipole's angular pattern into a radial intensity profile
//! over the mirror aperture: `I(rho) rho drho = D(theta) sin(theta)
//! dtheta`. Profiles here carry that common normalization, so the
//! integrated beam power equals the weighted solid angle covered by
//! the mirror.

use crate::dipole::DipoleKind;
use crate::error::{Error, Result};
use crate::mirror::ParabolicMirror;
use crate::quadrature;
use ndarray::Array2;
use std::f64::consts::PI;

/// Ideal incident intensity at collimated radius `rho`.
///
/// Closed form `D(theta(rho)) / (f^2 (1 + t^2)^2)` with
/// `t = rho / (2 f)`; for the linear dipole this reduces to
/// `4 t^2 / (f^2 (1 + t^2)^4)`, zero on the optical axis.
pub fn ideal_intensity(kind: DipoleKind, mirror: &ParabolicMirror, rho: f64) -> f64 {
    let f = mirror.focal_length();
    let t = rho / (2.0 * f);
    let g = 1.0 + t * t;
    let theta = 2.0 * t.atan();
    kind.angular_weight(theta) / (f * f * g * g)
}

/// Ideal incident amplitude, `sqrt` of [`ideal_intensity`].
pub fn ideal_amplitude(kind: DipoleKind, mirror: &ParabolicMirror, rho: f64) -> f64 {
    ideal_intensity(kind, mirror, rho).sqrt()
}

/// Sampled radial intensity profile over the aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    samples: Vec<(f64, f64)>,
}

impl RadialProfile {
    /// Build from `(radius, intensity)` pairs. Radii must be strictly
    /// increasing, both columns finite, intensities non-negative.
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a profile needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for pair in samples.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidData(format!(
                    "radii must be strictly increasing: {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        for &(r, i) in &samples {
            if !(r.is_finite() && i.is_finite()) || r < 0.0 || i < 0.0 {
                return Err(Error::InvalidData(format!(
                    "bad sample (radius {r}, intensity {i})"
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn max_radius(&self) -> f64 {
        self.samples.last().map(|s| s.0).unwrap_or(0.0)
    }

    /// Integrated power `Int I(rho) 2 pi rho drho` over the sampled
    /// span (composite Simpson, handles non-uniform spacing).
    pub fn power(&self) -> f64 {
        let xs: Vec<f64> = self.samples.iter().map(|s| s.0).collect();
        let gs: Vec<f64> = self
            .samples
            .iter()
            .map(|&(r, i)| 2.0 * PI * r * i)
            .collect();
        simpson_nonuniform(&xs, &gs)
    }

    /// Linear interpolation of intensity; zero outside the sampled span.
    pub fn intensity_at(&self, rho: f64) -> f64 {
        let s = &self.samples;
        if rho < s[0].0 || rho > s[s.len() - 1].0 {
            return 0.0;
        }
        let idx = match s.binary_search_by(|probe| probe.0.partial_cmp(&rho).unwrap()) {
            Ok(i) => return s[i].1,
            Err(i) => i,
        };
        let (r0, i0) = s[idx - 1];
        let (r1, i1) = s[idx];
        i0 + (i1 - i0) * (rho - r0) / (r1 - r0)
    }

    /// Rescaled copy with unit power. Idempotent.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.power();
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidData(format!(
                "cannot normalize a profile with power {p}"
            )));
        }
        Ok(Self {
            samples: self.samples.iter().map(|&(r, i)| (r, i / p)).collect(),
        })
    }

    /// CSV export with radius rescaled to units of the focal length
    /// (intensity rescaled by `f^2` so the integrated power is
    /// unchanged).
    pub fn to_csv(&self, focal_length: f64) -> String {
        let mut out = String::from("# units=focal_length\nradius,intensity\n");
        let f2 = focal_length * focal_length;
        for &(r, i) in &self.samples {
            out.push_str(&format!("{:.11e},{:.11e}\n", r / focal_length, i * f2));
        }
        out
    }
}

/// Ideal profile for `kind`, sampled uniformly on `[0, rho_rim]`.
///
/// Carries the common normalization: its power equals the weighted
/// solid angle covered by the mirror.
pub fn ideal_profile(
    kind: DipoleKind,
    mirror: &ParabolicMirror,
    n_samples: usize,
) -> Result<RadialProfile> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let rim = mirror.rim_radius();
    if rim <= 0.0 {
        return Err(Error::InvalidArgument(
            "mirror with zero depth has an empty aperture".into(),
        ));
    }
    let samples = (0..n_samples)
        .map(|k| {
            let rho = rim * k as f64 / (n_samples - 1) as f64;
            (rho, ideal_intensity(kind, mirror, rho))
        })
        .collect();
    RadialProfile::from_samples(samples)
}

/// Energy-conservation audit: sampled beam power divided by the
/// weighted solid angle the mirror covers. Equals 1 for ideal
/// profiles; 0 for a dark beam.
pub fn profile_power_check(
    profile: &RadialProfile,
    kind: DipoleKind,
    mirror: &ParabolicMirror,
) -> Result<f64> {
    let rim = mirror.rim_radius();
    if (profile.max_radius() - rim).abs() > 1e-6 * rim.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "aperture mismatch: profile spans up to {} but the rim radius is {rim}",
            profile.max_radius()
        )));
    }
    Ok(profile.power() / kind.weighted_solid_angle(&mirror.coverage_domain()))
}

/// Squared amplitude overlap between the ideal linear-dipole beam and
/// a Laguerre-Gaussian mode of zeroth radial and first azimuthal
/// order, radial amplitude `(rho/w) exp(-rho^2/w^2)`.
///
/// Both amplitudes are truncated at the rim and normalized on the
/// aperture before the overlap is taken.
pub fn lg01_overlap(mirror: &ParabolicMirror, waist: f64) -> Result<f64> {
    if !(waist.is_finite() && waist > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "waist must be positive, got {waist}"
        )));
    }
    let rim = mirror.rim_radius();
    let kind = DipoleKind::LinearPi;
    let tol = 1e-13 * rim.max(1.0);
    let cross = quadrature::integrate(
        |r| ideal_amplitude(kind, mirror, r) * lg01_amplitude(r, waist) * r,
        0.0,
        rim,
        tol,
    )?;
    let norm_ideal =
        quadrature::integrate(|r| ideal_intensity(kind, mirror, r) * r, 0.0, rim, tol)?;
    let norm_lg = quadrature::integrate(
        |r| {
            let a = lg01_amplitude(r, waist);
            a * a * r
        },
        0.0,
        rim,
        tol,
    )?;
    if norm_lg <= 0.0 {
        // Waist so small that the mode underflows everywhere.
        return Ok(0.0);
    }
    Ok(cross * cross / (norm_ideal * norm_lg))
}

fn lg01_amplitude(rho: f64, waist: f64) -> f64 {
    (rho / waist) * (-rho * rho / (waist * waist)).exp()
}

/// Waist that maximizes [`lg01_overlap`], found by a coarse
/// logarithmic scan followed by golden-section refinement.
/// Returns `(waist, overlap)`.
pub fn optimize_lg_waist(mirror: &ParabolicMirror) -> Result<(f64, f64)> {
    let f = mirror.focal_length();
    let n_scan = 64;
    let (lo, hi) = (0.01 * f, 10.0 * f);
    let ratio = (hi / lo).powf(1.0 / (n_scan - 1) as f64);
    let mut best = (lo, f64::NEG_INFINITY);
    let mut grid = Vec::with_capacity(n_scan);
    for k in 0..n_scan {
        let w = lo * ratio.powi(k as i32);
        let val = lg01_overlap(mirror, w)?;
        grid.push((w, val));
        if val > best.1 {
            best = (w, val);
        }
    }
    let idx = grid
        .iter()
        .position(|&(w, _)| w == best.0)
        .expect("best waist is on the grid");
    let a = grid[idx.saturating_sub(1)].0;
    let b = grid[(idx + 1).min(n_scan - 1)].0;
    golden_section_max(|w| lg01_overlap(mirror, w), a, b, 1e-10 * f)
}

/// Golden-section maximization on `[a, b]`.
fn golden_section_max<F: Fn(f64) -> Result<f64>>(
    f: F,
    mut a: f64,
    mut b: f64,
    x_tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Transverse polarization layout of the incident beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PupilPolarization {
    /// Field along the local radial direction; maps to the
    /// theta-direction in the far field and focuses to an axially
    /// polarized spot.
    Radial,
    /// Uniform circular polarization in the transverse plane.
    Circular,
}

/// Phase (and polarization) of the incident wave over the aperture,
/// sampled on a polar `(rho, phi)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PupilMap {
    rho: Vec<f64>,
    phi: Vec<f64>,
    phase: Array2<f64>,
    polarization: PupilPolarization,
}

impl PupilMap {
    /// Build from explicit grids. `phase` is indexed `[rho][phi]`;
    /// `phi` must be the uniform grid `2 pi j / n`.
    pub fn new(
        rho: Vec<f64>,
        n_phi: usize,
        phase: Array2<f64>,
        polarization: PupilPolarization,
    ) -> Result<Self> {
        if rho.len() < 2 || n_phi < 1 {
            return Err(Error::InvalidArgument(format!(
                "pupil grid too small: {} radii x {} azimuths",
                rho.len(),
                n_phi
            )));
        }
        for pair in rho.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidData(
                    "pupil radii must be strictly increasing".into(),
                ));
            }
        }
        if rho[0] < 0.0 || !rho.iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidData(
                "pupil radii must be finite and >= 0".into(),
            ));
        }
        if phase.shape() != [rho.len(), n_phi] {
            return Err(Error::InvalidArgument(format!(
                "phase grid shape {:?} does not match {} x {}",
                phase.shape(),
                rho.len(),
                n_phi
            )));
        }
        if !phase.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidData("non-finite phase sample".into()));
        }
        let phi = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        Ok(Self {
            rho,
            phi,
            phase,
            polarization,
        })
    }

    /// Flat-phase pupil over `[0, rho_max]`.
    pub fn flat(
        rho_max: f64,
        n_rho: usize,
        n_phi: usize,
        polarization: PupilPolarization,
    ) -> Result<Self> {
        Self::from_fn(rho_max, n_rho, n_phi, polarization, |_, _| 0.0)
    }

    /// Sample an analytic phase function on a regular grid.
    pub fn from_fn(
        rho_max: f64,
        n_rho: usize,
        n_phi: usize,
        polarization: PupilPolarization,
        phase_fn: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if !(rho_max.is_finite() && rho_max > 0.0) || n_rho < 2 || n_phi < 1 {
            return Err(Error::InvalidArgument(format!(
                "bad pupil grid: rho_max {rho_max}, {n_rho} x {n_phi}"
            )));
        }
        let rho: Vec<f64> = (0..n_rho)
            .map(|i| rho_max * i as f64 / (n_rho - 1) as f64)
            .collect();
        let phase = Array2::from_shape_fn((n_rho, n_phi), |(i, j)| {
            phase_fn(rho[i], 2.0 * PI * j as f64 / n_phi as f64)
        });
        Self::new(rho, n_phi, phase, polarization)
    }

    pub fn polarization(&self) -> PupilPolarization {
        self.polarization
    }

    pub fn rho_grid(&self) -> &[f64] {
        &self.rho
    }

    pub fn phi_grid(&self) -> &[f64] {
        &self.phi
    }

    pub fn max_radius(&self) -> f64 {
        *self.rho.last().unwrap()
    }

    /// Bilinear phase lookup, periodic in phi, clamped in rho.
    pub fn phase_at(&self, rho: f64, phi: f64) -> f64 {
        let n_phi = self.phi.len();
        let two_pi = 2.0 * PI;
        let p = phi.rem_euclid(two_pi);
        let fj = p / two_pi * n_phi as f64;
        let j0 = (fj.floor() as usize).min(n_phi - 1);
        let j1 = (j0 + 1) % n_phi;
        let tj = fj - j0 as f64;

        let (i0, i1, ti) = if rho <= self.rho[0] {
            (0, 0, 0.0)
        } else if rho >= *self.rho.last().unwrap() {
            (self.rho.len() - 1, self.rho.len() - 1, 0.0)
        } else {
            let i = match self
                .rho
                .binary_search_by(|probe| probe.partial_cmp(&rho).unwrap())
            {
                Ok(i) => return self.lerp_phi(i, j0, j1, tj),
                Err(i) => i,
            };
            let t = (rho - self.rho[i - 1]) / (self.rho[i] - self.rho[i - 1]);
            (i - 1, i, t)
        };
        let lo = self.lerp_phi(i0, j0, j1, tj);
        let hi = self.lerp_phi(i1, j0, j1, tj);
        lo + (hi - lo) * ti
    }

    fn lerp_phi(&self, i: usize, j0: usize, j1: usize, t: f64) -> f64 {
        let a = self.phase[(i, j0)];
        let b = self.phase[(i, j1)];
        a + (b - a) * t
    }

    /// Compensating plate: the pointwise-negated phase map. Composing
    /// an aberration with its compensation leaves zero phase
    /// everywhere.
    pub fn compensation(&self) -> PupilMap {
        PupilMap {
            rho: self.rho.clone(),
            phi: self.phi.clone(),
            phase: self.phase.mapv(|p| -p),
            polarization: self.polarization,
        }
    }

    /// Pointwise phase sum with `other`; grids must match.
    pub fn composed_with(&self, other: &PupilMap) -> Result<PupilMap> {
        if self.rho != other.rho || self.phi.len() != other.phi.len() {
            return Err(Error::InvalidArgument(
                "pupil maps sampled on different grids cannot be composed".into(),
            ));
        }
        Ok(PupilMap {
            rho: self.rho.clone(),
            phi: self.phi.clone(),
            phase: &self.phase + &other.phase,
            polarization: self.polarization,
        })
    }

    pub fn phase_grid(&self) -> &Array2<f64> {
        &self.phase
    }

    /// Parse the `rho,phi,phase_rad` CSV format. Rows must cover a
    /// complete grid; blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str, polarization: PupilPolarization) -> Result<Self> {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.eq_ignore_ascii_case("rho,phi,phase_rad") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidData(format!(
                    "line {}: expected rho,phi,phase_rad",
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidData(format!("line {}: {e}", lineno + 1)))
            };
            rows.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
        }
        if rows.is_empty() {
            return Err(Error::InvalidData("pupil CSV holds no samples".into()));
        }
        let mut rho: Vec<f64> = rows.iter().map(|r| r.0).collect();
        rho.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rho.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * a.abs().max(1.0));
        let mut phi: Vec<f64> = rows.iter().map(|r| r.1).collect();
        phi.sort_by(|a, b| a.partial_cmp(b).unwrap());
        phi.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let n_phi = phi.len();
        if rows.len() != rho.len() * n_phi {
            return Err(Error::InvalidData(format!(
                "pupil CSV is not a complete {} x {} grid ({} rows)",
                rho.len(),
                n_phi,
                rows.len()
            )));
        }
        let mut phase = Array2::zeros((rho.len(), n_phi));
        let find = |grid: &[f64], v: f64| {
            grid.iter()
                .position(|g| (g - v).abs() < 1e-9 * v.abs().max(1.0))
                .ok_or_else(|| Error::InvalidData(format!("grid value {v} not matched")))
        };
        for (r, p, val) in rows {
            let i = find(&rho, r)?;
            let j = find(&phi, p)?;
            phase[(i, j)] = val;
        }
        Self::new(rho, n_phi, phase, polarization)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,phi,phase_rad\n");
        for (i, &r) in self.rho.iter().enumerate() {
            for (j, &p) in self.phi.iter().enumerate() {
                out.push_str(&format!(
                    "{:.11e},{:.11e},{:.11e}\n",
                    r,
                    p,
                    self.phase[(i, j)]
                ));
            }
        }
        out
    }
}

/// Overlap reduction from residual wavefront error.
///
/// `eta = |Int I e^{i Phi} dA|^2 / (Int I dA)^2` with the ideal
/// intensity for `kind` as weight, evaluated on the map's own grid
/// restricted to the mirror aperture. Equals 1 exactly when the phase
/// is constant on the support of the beam (Strehl-like; approximately
/// `exp(-sigma^2)` for small weighted RMS `sigma`).
pub fn phase_overlap_penalty(
    aberration: &PupilMap,
    kind: DipoleKind,
    mirror: &ParabolicMirror,
) -> f64 {
    let rim = mirror.rim_radius();
    let mut re = quadrature::NeumaierSum::new();
    let mut im = quadrature::NeumaierSum::new();
    let mut total = quadrature::NeumaierSum::new();
    let rho = &aberration.rho;
    let n_phi = aberration.phi.len();
    for i in 0..rho.len() {
        let r = rho[i];
        if r > rim {
            break;
        }
        let left = if i == 0 { rho[0] } else { rho[i - 1] };
        let right = if i + 1 == rho.len() {
            rho[i]
        } else {
            rho[i + 1].min(rim)
        };
        let dr = 0.5 * (right - left);
        let w_radial = ideal_intensity(kind, mirror, r) * r * dr;
        if w_radial == 0.0 {
            continue;
        }
        for j in 0..n_phi {
            let w = w_radial / n_phi as f64;
            let p = aberration.phase[(i, j)];
            re.add(w * p.cos());
            im.add(w * p.sin());
            total.add(w);
        }
    }
    let norm = total.total();
    if norm <= 0.0 {
        // No beam weight under the map: nothing to penalize.
        return 1.0;
    }
    let re = re.total() / norm;
    let im = im.total() / norm;
    re * re + im * im
}

/// Composite Simpson for samples at arbitrary strictly increasing
/// abscissae. Falls back to a three-point quadratic for a trailing
/// odd interval.
pub(crate) fn simpson_nonuniform(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]);
    }
    let mut sum = quadrature::NeumaierSum::new();
    let mut i = 0;
    while i + 2 < n {
        let h0 = xs[i + 1] - xs[i];
        let h1 = xs[i + 2] - xs[i + 1];
        let hsum = h0 + h1;
        sum.add(
            hsum / 6.0
                * ((2.0 - h1 / h0) * ys[i]
                    + hsum * hsum / (h0 * h1) * ys[i + 1]
                    + (2.0 - h0 / h1) * ys[i + 2]),
        );
        i += 2;
    }
    if i + 2 == n {
        // One interval left: integrate the quadratic through the last
        // three points over it.
        let h1 = xs[n - 2] - xs[n - 3];
        let h2 = xs[n - 1] - xs[n - 2];
        let alpha = (2.0 * h2 * h2 + 3.0 * h1 * h2) / (6.0 * (h1 + h2));
        let beta = (h2 * h2 + 3.0 * h1 * h2) / (6.0 * h1);
        let eta = h2 * h2 * h2 / (6.0 * h1 * (h1 + h2));
        sum.add(alpha * ys[n - 1] + beta * ys[n - 2] - eta * ys[n - 3]);
    }
    sum.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn deep_mirror() -> ParabolicMirror {
        ParabolicMirror::new(1.0, 6.0).unwrap()
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert_abs_diff_eq!(simpson_nonuniform(&xs, &ys), 0.25, epsilon = 1e-4);
        // Quadratics are exact even on a ragged grid with an odd
        // trailing interval.
        let xs = vec![0.0, 0.13, 0.4, 0.55, 0.8, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        assert_abs_diff_eq!(simpson_nonuniform(&xs, &ys), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn linear_profile_is_dark_on_axis() {
        let p = ideal_profile(DipoleKind::LinearPi, &deep_mirror(), 256).unwrap();
        assert_eq!(p.samples()[0].1, 0.0);
        assert!(p.samples()[1].1 > 0.0);
    }

    #[test]
    fn circular_profile_is_bright_on_axis() {
        let p = ideal_profile(DipoleKind::CircularSigma, &deep_mirror(), 256).unwrap();
        assert!(p.samples()[0].1 > 0.0);
    }

    #[test]
    fn linear_profile_peaks_near_two_over_sqrt3() {
        // Dense scan oracle for the maximizer of t^2/(1+t^2)^4.
        let m = deep_mirror();
        let mut best = (0.0, 0.0);
        let n = 2_000_000;
        for k in 0..=n {
            let rho = m.rim_radius() * k as f64 / n as f64;
            let v = ideal_intensity(DipoleKind::LinearPi, &m, rho);
            if v > best.1 {
                best = (rho, v);
            }
        }
        assert_abs_diff_eq!(best.0, 2.0 / 3.0f64.sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn linear_profile_is_unimodal_for_deep_mirrors() {
        let p = ideal_profile(DipoleKind::LinearPi, &deep_mirror(), 4096).unwrap();
        let mut sign_changes = 0;
        let mut last_sign = 0;
        for pair in p.samples().windows(2) {
            let diff = pair[1].1 - pair[0].1;
            let sign = if diff > 0.0 {
                1
            } else if diff < 0.0 {
                -1
            } else {
                last_sign
            };
            if last_sign != 0 && sign != last_sign {
                sign_changes += 1;
            }
            last_sign = sign;
        }
        assert_eq!(sign_changes, 1);
        // Zero only at the axis.
        assert!(p.samples().iter().skip(1).all(|s| s.1 > 0.0));
    }

    #[test]
    fn power_check_is_unity_for_ideal_profiles() {
        let m6 = deep_mirror();
        let pi = ideal_profile(DipoleKind::LinearPi, &m6, 1001).unwrap();
        let check = profile_power_check(&pi, DipoleKind::LinearPi, &m6).unwrap();
        assert_abs_diff_eq!(check, 1.0, epsilon = 1e-6);

        let m1 = ParabolicMirror::new(1.0, 1.0).unwrap();
        let sigma = ideal_profile(DipoleKind::CircularSigma, &m1, 1001).unwrap();
        let check = profile_power_check(&sigma, DipoleKind::CircularSigma, &m1).unwrap();
        assert_abs_diff_eq!(check, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn power_check_is_zero_for_a_dark_beam() {
        let m = deep_mirror();
        let rim = m.rim_radius();
        let zero =
            RadialProfile::from_samples((0..32).map(|k| (rim * k as f64 / 31.0, 0.0)).collect())
                .unwrap();
        assert_eq!(
            profile_power_check(&zero, DipoleKind::LinearPi, &m).unwrap(),
            0.0
        );
    }

    #[test]
    fn power_check_rejects_mismatched_aperture() {
        let m = deep_mirror();
        let other = ParabolicMirror::new(1.0, 2.0).unwrap();
        let p = ideal_profile(DipoleKind::LinearPi, &other, 64).unwrap();
        assert!(profile_power_check(&p, DipoleKind::LinearPi, &m).is_err());
    }

    #[test]
    fn normalization_is_idempotent() {
        let p = ideal_profile(DipoleKind::LinearPi, &deep_mirror(), 513).unwrap();
        let once = p.normalized().unwrap();
        assert_abs_diff_eq!(once.power(), 1.0, epsilon = 1e-9);
        let twice = once.normalized().unwrap();
        for (a, b) in once.samples().iter().zip(twice.samples()) {
            assert_relative_eq!(a.1, b.1, max_relative = 1e-12);
        }
    }

    #[test]
    fn lg_overlap_limits() {
        let m = deep_mirror();
        let (w_opt, ov_opt) = optimize_lg_waist(&m).unwrap();
        assert!(lg01_overlap(&m, 1e-3).unwrap() < 1e-3);
        assert!(lg01_overlap(&m, 100.0).unwrap() < ov_opt);
        assert!(lg01_overlap(&m, 0.5 * w_opt).unwrap() <= ov_opt);
        assert!(lg01_overlap(&m, 2.0 * w_opt).unwrap() <= ov_opt);
        assert!(lg01_overlap(&m, -1.0).is_err());
    }

    #[test]
    fn lg_optimum_matches_brute_force_scan() {
        let m = deep_mirror();
        let (w_opt, ov_opt) = optimize_lg_waist(&m).unwrap();
        let mut scan_best = (0.0, 0.0);
        for k in 0..=4000 {
            let w = 0.5 + 3.5 * k as f64 / 4000.0;
            let v = lg01_overlap(&m, w).unwrap();
            if v > scan_best.1 {
                scan_best = (w, v);
            }
        }
        assert!(ov_opt >= scan_best.1 - 1e-6);
        assert_relative_eq!(w_opt, scan_best.0, max_relative = 1e-3);
        // Golden values computed with an independent integrator.
        assert_relative_eq!(w_opt, 2.275_794_6, max_relative = 1e-4);
        assert_abs_diff_eq!(ov_opt, 0.962_309_8, epsilon = 1e-5);
    }

    #[test]
    fn lg_overlap_is_continuous_in_waist() {
        let m = deep_mirror();
        let mut last = lg01_overlap(&m, 1.0).unwrap();
        let mut w = 1.0;
        for _ in 0..200 {
            w *= 1.001;
            let v = lg01_overlap(&m, w).unwrap();
            assert!((v - last).abs() < 1e-3);
            last = v;
        }
    }

    #[test]
    fn compensation_cancels_pointwise() {
        let ab = PupilMap::from_fn(2.0, 16, 8, PupilPolarization::Radial, |r, p| {
            0.7 * r * r + 0.3 * p.sin()
        })
        .unwrap();
        let comp = ab.compensation();
        let composed = ab.composed_with(&comp).unwrap();
        assert!(composed.phase_grid().iter().all(|&p| p == 0.0));

        let zero = PupilMap::flat(2.0, 16, 8, PupilPolarization::Radial).unwrap();
        assert_eq!(zero.compensation(), zero);
    }

    #[test]
    fn constant_phase_composes_to_zero_variance() {
        let c = PupilMap::from_fn(2.0, 12, 6, PupilPolarization::Radial, |_, _| 1.234).unwrap();
        let composed = c.composed_with(&c.compensation()).unwrap();
        let mean = composed.phase_grid().iter().sum::<f64>() / composed.phase_grid().len() as f64;
        let var = composed
            .phase_grid()
            .iter()
            .map(|p| (p - mean) * (p - mean))
            .sum::<f64>()
            / composed.phase_grid().len() as f64;
        assert_eq!(var, 0.0);
    }

    #[test]
    fn flat_and_constant_phase_have_no_penalty() {
        let m = deep_mirror();
        let rim = m.rim_radius();
        let flat = PupilMap::flat(rim, 64, 16, PupilPolarization::Radial).unwrap();
        assert_abs_diff_eq!(
            phase_overlap_penalty(&flat, DipoleKind::LinearPi, &m),
            1.0,
            epsilon = 1e-12
        );
        let piston = PupilMap::from_fn(rim, 64, 16, PupilPolarization::Radial, |_, _| 2.0).unwrap();
        assert_abs_diff_eq!(
            phase_overlap_penalty(&piston, DipoleKind::LinearPi, &m),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn compensated_aberration_restores_full_overlap() {
        let m = deep_mirror();
        let rim = m.rim_radius();
        let ab = PupilMap::from_fn(rim, 48, 24, PupilPolarization::Radial, |r, p| {
            1.5 * (r / rim).powi(2) + 0.8 * (2.0 * p).cos()
        })
        .unwrap();
        assert!(phase_overlap_penalty(&ab, DipoleKind::LinearPi, &m) < 0.9);
        let composed = ab.composed_with(&ab.compensation()).unwrap();
        assert_abs_diff_eq!(
            phase_overlap_penalty(&composed, DipoleKind::LinearPi, &m),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn small_rms_penalty_follows_marechal() {
        let m = deep_mirror();
        let rim = m.rim_radius();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for &target in &[0.05, 0.15, 0.3] {
            let raw: Vec<f64> = (0..48 * 24).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let map = build_rms_map(&m, rim, &raw, target);
            let eta = phase_overlap_penalty(&map, DipoleKind::LinearPi, &m);
            let expected = (-target * target).exp();
            assert!(
                (eta / expected - 1.0).abs() < 0.05,
                "sigma {target}: eta {eta} vs {expected}"
            );
        }
    }

    /// Rescale a raw random grid so its beam-weighted RMS (about the
    /// weighted mean) equals `target`, using the same trapezoid
    /// weighting as the penalty integral.
    fn build_rms_map(m: &ParabolicMirror, rim: f64, raw: &[f64], target: f64) -> PupilMap {
        let n_rho = 48;
        let n_phi = 24;
        let rho: Vec<f64> = (0..n_rho)
            .map(|i| rim * i as f64 / (n_rho - 1) as f64)
            .collect();
        let mut weights = vec![0.0; n_rho];
        for i in 0..n_rho {
            let left = if i == 0 { rho[0] } else { rho[i - 1] };
            let right = if i + 1 == n_rho { rho[i] } else { rho[i + 1] };
            weights[i] =
                ideal_intensity(DipoleKind::LinearPi, m, rho[i]) * rho[i] * 0.5 * (right - left);
        }
        let total: f64 = weights.iter().sum::<f64>() * n_phi as f64;
        let mean: f64 = (0..n_rho)
            .flat_map(|i| (0..n_phi).map(move |j| (i, j)))
            .map(|(i, j)| weights[i] * raw[i * n_phi + j])
            .sum::<f64>()
            / total;
        let var: f64 = (0..n_rho)
            .flat_map(|i| (0..n_phi).map(move |j| (i, j)))
            .map(|(i, j)| {
                let d = raw[i * n_phi + j] - mean;
                weights[i] * d * d
            })
            .sum::<f64>()
            / total;
        let scale = target / var.sqrt();
        let phase =
            Array2::from_shape_fn((n_rho, n_phi), |(i, j)| (raw[i * n_phi + j] - mean) * scale);
        PupilMap::new(rho, n_phi, phase, PupilPolarization::Radial).unwrap()
    }

    #[test]
    fn pupil_csv_round_trip() {
        let ab =
            PupilMap::from_fn(2.0, 5, 4, PupilPolarization::Radial, |r, p| r + p.cos()).unwrap();
        let csv = ab.to_csv();
        let back = PupilMap::from_csv(&csv, PupilPolarization::Radial).unwrap();
        assert_eq!(back.rho_grid().len(), 5);
        assert_eq!(back.phi_grid().len(), 4);
        for i in 0..5 {
            for j in 0..4 {
                assert_relative_eq!(
                    back.phase_grid()[(i, j)],
                    ab.phase_grid()[(i, j)],
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn pupil_csv_rejects_ragged_grids() {
        let text = "rho,phi,phase_rad\n0.0,0.0,0.1\n1.0,0.0,0.2\n1.0,3.14,0.3\n";
        assert!(PupilMap::from_csv(text, PupilPolarization::Radial).is_err());
    }

    #[test]
    fn pupil_rejects_non_finite_phase() {
        let phase = Array2::from_elem((3, 2), f64::NAN);
        assert!(PupilMap::new(vec![0.0, 1.0, 2.0], 2, phase, PupilPolarization::Radial).is_err());
    }

    #[test]
    fn profile_csv_has_metadata_and_zero_first_sample() {
        let p = ideal_profile(DipoleKind::LinearPi, &deep_mirror(), 8).unwrap();
        let csv = p.to_csv(1.0);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# units=focal_length");
        assert_eq!(lines.next().unwrap(), "radius,intensity");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(first[1].parse::<f64>().unwrap(), 0.0);
    }
}

//! Temporal mode matching: single-photon pulse envelopes driving a
//! two-level atom.
//!
//! Dynamics follow the single-excitation amplitude equation
//! `db/dt = -(Gamma/2 + i Delta) b + sqrt(eta_s Gamma) xi(t)` with
//! `b(t_start) = 0`; the excited-state population is `P_e = |b|^2`.
//! Internally time runs in units of the lifetime `tau = 1/Gamma`, so
//! the equation reads `db/ds = -(1/2 + i d) b + sqrt(eta_s) xi(s)`
//! with the detuning `d` in linewidths. Envelopes are normalized to
//! unit intensity integral over their window, the single-photon
//! condition.

use crate::error::{Error, Result};
use crate::quadrature;
use num_complex::Complex64;

/// Fraction of pulse energy allowed to fall outside the window.
const MISSING_NORM_TOL: f64 = 1e-8;

/// A closed optical transition: wavelength and natural linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelAtom {
    wavelength: f64,
    linewidth: f64,
}

impl TwoLevelAtom {
    /// `wavelength` in meters, `linewidth` (Gamma) in 1/seconds.
    pub fn new(wavelength: f64, linewidth: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !(linewidth.is_finite() && linewidth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "linewidth must be positive, got {linewidth}"
            )));
        }
        Ok(Self {
            wavelength,
            linewidth,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn linewidth(&self) -> f64 {
        self.linewidth
    }

    /// Excited-state lifetime `tau = 1/Gamma`, in seconds.
    pub fn lifetime(&self) -> f64 {
        1.0 / self.linewidth
    }
}

/// Envelope families. `Custom` holds `(time, amplitude)` samples in
/// lifetime units, interpolated linearly and zero outside the span.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    RisingExponential,
    FallingExponential,
    Gaussian,
    Custom(Vec<(f64, f64)>),
}

/// Normalized single-photon amplitude envelope `xi(s)` on a finite
/// window, all times in units of the atomic lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEnvelope {
    shape: PulseShape,
    time_constant: f64,
    window: (f64, f64),
    /// Rescaling applied so the windowed intensity integrates to 1.
    scale: f64,
}

impl PulseEnvelope {
    /// Build and normalize an envelope.
    ///
    /// `time_constant` is the intensity 1/e time in lifetime units
    /// (the rising exponential is `xi(s) ~ e^{s/(2 tc)}` for `s <= 0`,
    /// so a matched pulse has `tc = 1`). The window must capture all
    /// but 1e-8 of the pulse energy; custom samples must lie inside
    /// the window.
    pub fn new(shape: PulseShape, time_constant: f64, window: (f64, f64)) -> Result<Self> {
        if !(time_constant.is_finite() && time_constant > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time constant must be positive, got {time_constant}"
            )));
        }
        let (a, b) = window;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!(
                "window [{a}, {b}] is not a finite interval"
            )));
        }
        if let PulseShape::Custom(samples) = &shape {
            if samples.len() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "custom envelope needs at least 2 samples, got {}",
                    samples.len()
                )));
            }
            for pair in samples.windows(2) {
                // Comparison is false for NaN, so NaN times fail too.
                let ascending = pair[1].0 > pair[0].0;
                if !ascending {
                    return Err(Error::InvalidData(
                        "custom envelope times must be strictly increasing".into(),
                    ));
                }
            }
            if samples
                .iter()
                .any(|&(s, x)| !(s.is_finite() && x.is_finite()))
            {
                return Err(Error::InvalidData(
                    "custom envelope holds non-finite samples".into(),
                ));
            }
            if samples[0].0 < a || samples[samples.len() - 1].0 > b {
                return Err(Error::InvalidArgument(
                    "custom envelope samples fall outside the window".into(),
                ));
            }
        }
        let captured = captured_norm(&shape, time_constant, window)?;
        match shape {
            PulseShape::Custom(_) => {
                // User data is taken as the complete pulse; it only
                // needs nonzero energy.
                if captured <= 0.0 {
                    return Err(Error::InvalidData(
                        "custom envelope carries no energy".into(),
                    ));
                }
            }
            _ => {
                let missing = (1.0 - captured).max(0.0);
                if missing > MISSING_NORM_TOL {
                    return Err(Error::WindowTruncation {
                        missing_norm: missing,
                    });
                }
            }
        }
        Ok(Self {
            shape,
            time_constant,
            window,
            scale: 1.0 / captured.sqrt(),
        })
    }

    /// Envelope with a window wide enough that truncation is
    /// negligible for the analytic shapes.
    pub fn with_auto_window(shape: PulseShape, time_constant: f64) -> Result<Self> {
        let tc = time_constant;
        let window = match &shape {
            PulseShape::RisingExponential => (-25.0 * tc, 5.0),
            PulseShape::FallingExponential => (0.0, 25.0 * tc + 10.0),
            PulseShape::Gaussian => (-10.0 * tc, 10.0 * tc + 10.0),
            PulseShape::Custom(samples) => {
                let lo = samples.first().map(|s| s.0).unwrap_or(0.0);
                let hi = samples.last().map(|s| s.0).unwrap_or(1.0);
                (lo, hi)
            }
        };
        Self::new(shape, time_constant, window)
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn time_constant(&self) -> f64 {
        self.time_constant
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Normalized amplitude `xi(s)`; zero outside the window.
    pub fn amplitude(&self, s: f64) -> f64 {
        if s < self.window.0 || s > self.window.1 {
            return 0.0;
        }
        self.scale * raw_amplitude(&self.shape, self.time_constant, s)
    }

    /// Times inside the window where the envelope is not smooth; the
    /// integrator restarts there.
    fn kinks(&self) -> Vec<f64> {
        let (a, b) = self.window;
        match &self.shape {
            PulseShape::RisingExponential | PulseShape::FallingExponential => {
                if 0.0 > a && 0.0 < b {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            PulseShape::Gaussian => vec![],
            PulseShape::Custom(samples) => samples
                .iter()
                .map(|s| s.0)
                .filter(|&s| s > a && s < b)
                .collect(),
        }
    }
}

fn raw_amplitude(shape: &PulseShape, tc: f64, s: f64) -> f64 {
    match shape {
        PulseShape::RisingExponential => {
            if s <= 0.0 {
                (1.0 / tc).sqrt() * (0.5 * s / tc).exp()
            } else {
                0.0
            }
        }
        PulseShape::FallingExponential => {
            if s >= 0.0 {
                (1.0 / tc).sqrt() * (-0.5 * s / tc).exp()
            } else {
                0.0
            }
        }
        PulseShape::Gaussian => {
            let norm = (2.0 / (std::f64::consts::PI * tc * tc)).powf(0.25);
            norm * (-s * s / (tc * tc)).exp()
        }
        PulseShape::Custom(samples) => {
            let n = samples.len();
            if s < samples[0].0 || s > samples[n - 1].0 {
                return 0.0;
            }
            let idx = match samples.binary_search_by(|probe| probe.0.partial_cmp(&s).unwrap()) {
                Ok(i) => return samples[i].1,
                Err(i) => i,
            };
            let (s0, x0) = samples[idx - 1];
            let (s1, x1) = samples[idx];
            x0 + (x1 - x0) * (s - s0) / (s1 - s0)
        }
    }
}

/// `Int |xi|^2 ds` over the window for the unscaled shape (the full
/// integral is 1 for the analytic shapes).
fn captured_norm(shape: &PulseShape, tc: f64, window: (f64, f64)) -> Result<f64> {
    let (a, b) = window;
    match shape {
        PulseShape::RisingExponential => {
            let hi = b.min(0.0);
            if hi <= a {
                return Ok(0.0);
            }
            Ok((hi / tc).exp() - (a / tc).exp())
        }
        PulseShape::FallingExponential => {
            let lo = a.max(0.0);
            if lo >= b {
                return Ok(0.0);
            }
            Ok((-lo / tc).exp() - (-b / tc).exp())
        }
        PulseShape::Gaussian => {
            let norm = (2.0 / (std::f64::consts::PI * tc * tc)).sqrt();
            quadrature::integrate(|s| norm * (-2.0 * s * s / (tc * tc)).exp(), a, b, 1e-13)
        }
        PulseShape::Custom(samples) => {
            // Exact integral of the squared linear interpolant.
            let mut sum = quadrature::NeumaierSum::new();
            for pair in samples.windows(2) {
                let h = pair[1].0 - pair[0].0;
                let (f0, f1) = (pair[0].1, pair[1].1);
                sum.add(h * (f0 * f0 + f0 * f1 + f1 * f1) / 3.0);
            }
            Ok(sum.total())
        }
    }
}

/// Knobs for [`excite_with`]. `detuning` is in units of the
/// linewidth; `max_step` in lifetimes bounds the output resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExciteOptions {
    pub detuning: f64,
    pub local_tol: f64,
    pub max_step: f64,
}

impl Default for ExciteOptions {
    fn default() -> Self {
        Self {
            detuning: 0.0,
            local_tol: 1e-10,
            max_step: 0.01,
        }
    }
}

/// Excitation history of one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    /// `(t / tau, P_e)` at every accepted integrator step.
    pub trajectory: Vec<(f64, f64)>,
    /// Largest excited-state population reached.
    pub max_probability: f64,
    /// Time of the maximum, in lifetimes.
    pub peak_time: f64,
    /// Lifetime in seconds, for converting the time axis.
    pub lifetime_seconds: f64,
}

impl Excitation {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_over_tau,P_e\n");
        for &(s, p) in &self.trajectory {
            out.push_str(&format!("{:.11e},{:.11e}\n", s, p));
        }
        out
    }
}

/// Integrate the excitation dynamics with default options.
pub fn excite(
    atom: &TwoLevelAtom,
    pulse: &PulseEnvelope,
    spatial_efficiency: f64,
) -> Result<Excitation> {
    excite_with(atom, pulse, spatial_efficiency, &ExciteOptions::default())
}

/// Integrate `db/ds = -(1/2 + i d) b + sqrt(eta_s) xi(s)` over the
/// pulse window with an adaptive embedded 5(4) Runge-Kutta pair,
/// restarting at envelope kinks; the population maximum is refined
/// to machine resolution inside its bracketing steps.
pub fn excite_with(
    atom: &TwoLevelAtom,
    pulse: &PulseEnvelope,
    spatial_efficiency: f64,
    options: &ExciteOptions,
) -> Result<Excitation> {
    if !(0.0..=1.0).contains(&spatial_efficiency) || !spatial_efficiency.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "spatial efficiency must lie in [0, 1], got {spatial_efficiency}"
        )));
    }
    if !(options.local_tol > 0.0 && options.max_step > 0.0 && options.detuning.is_finite()) {
        return Err(Error::InvalidArgument(
            "tolerance and max step must be positive, detuning finite".into(),
        ));
    }
    let drive = spatial_efficiency.sqrt();
    let decay = Complex64::new(-0.5, -options.detuning);
    let rhs = |s: f64, b: Complex64| decay * b + drive * pulse.amplitude(s);

    let (start, end) = pulse.window();
    let mut segments = vec![start];
    segments.extend(pulse.kinks());
    segments.push(end);
    segments.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut states: Vec<(f64, Complex64)> = vec![(start, Complex64::new(0.0, 0.0))];
    let mut b = Complex64::new(0.0, 0.0);
    for seg in segments.windows(2) {
        integrate_segment(&rhs, seg[0], seg[1], &mut b, options, &mut states)?;
    }

    let trajectory: Vec<(f64, f64)> = states
        .iter()
        .map(|&(s, b)| (s, b.norm_sqr().min(1.0)))
        .collect();
    let k = trajectory
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let (peak_time, max_probability) = refine_peak(&rhs, &states, &trajectory, k);
    Ok(Excitation {
        trajectory,
        max_probability: max_probability.min(1.0),
        peak_time,
        lifetime_seconds: atom.lifetime(),
    })
}

/// Dormand-Prince 5(4) over `[s0, s1]`, appending accepted states.
fn integrate_segment(
    rhs: &impl Fn(f64, Complex64) -> Complex64,
    s0: f64,
    s1: f64,
    b: &mut Complex64,
    options: &ExciteOptions,
    states: &mut Vec<(f64, Complex64)>,
) -> Result<()> {
    let tol = options.local_tol;
    let span = s1 - s0;
    if span <= 0.0 {
        return Ok(());
    }
    let mut s = s0;
    let mut h = options.max_step.min(span);
    let mut rejected_in_a_row = 0u32;
    while s < s1 {
        let remaining = s1 - s;
        // A remainder this small is endpoint roundoff, not a step.
        if remaining <= 1e-12 * span.max(1.0) {
            break;
        }
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::Numerics(format!(
                "integrator step underflow at t/tau = {s}"
            )));
        }
        // Snap onto the segment end instead of leaving a sliver.
        let h_step = if remaining <= 1.05 * h { remaining } else { h };
        let (b_new, err) = dp54_step(rhs, s, *b, h_step);
        let scale = tol * (1.0 + b.norm().max(b_new.norm()));
        let ratio = err / scale;
        if ratio <= 1.0 {
            s += h_step;
            *b = b_new;
            states.push((s, *b));
            rejected_in_a_row = 0;
            let grow = if ratio > 0.0 {
                0.9 * ratio.powf(-0.2)
            } else {
                5.0
            };
            h = (h_step * grow.clamp(0.2, 5.0)).min(options.max_step);
        } else {
            rejected_in_a_row += 1;
            if rejected_in_a_row > 60 {
                return Err(Error::Numerics(format!(
                    "integrator failed to converge at t/tau = {s}"
                )));
            }
            h = h_step * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(())
}

/// One embedded Dormand-Prince step; returns the 5th-order update and
/// the local error estimate.
fn dp54_step(
    rhs: &impl Fn(f64, Complex64) -> Complex64,
    s: f64,
    y: Complex64,
    h: f64,
) -> (Complex64, f64) {
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // Difference between the 5th- and 4th-order weights.
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];
    let mut k = [Complex64::new(0.0, 0.0); 7];
    k[0] = rhs(s, y);
    for i in 0..6 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=i {
            acc += A[i][j] * k[j];
        }
        k[i + 1] = rhs(s + C[i] * h, y + h * acc);
    }
    // The 6th stage row holds the 5th-order weights (FSAL pair).
    let y_new = y + h * (0..6).map(|j| A[5][j] * k[j]).sum::<Complex64>();
    let err = h * (0..7).map(|j| E[j] * k[j]).sum::<Complex64>();
    (y_new, err.norm())
}

/// Maximize `|b|^2` inside the steps bracketing the grid maximum by
/// golden-section search, re-integrating from the stored state with
/// fixed fine Runge-Kutta substeps.
fn refine_peak(
    rhs: &impl Fn(f64, Complex64) -> Complex64,
    states: &[(f64, Complex64)],
    trajectory: &[(f64, f64)],
    k: usize,
) -> (f64, f64) {
    let lo = if k == 0 { 0 } else { k - 1 };
    let hi = (k + 1).min(states.len() - 1);
    let (s_lo, b_lo) = states[lo];
    let s_hi = states[hi].0;
    if s_hi <= s_lo {
        return (trajectory[k].0, trajectory[k].1);
    }
    let eval = |s: f64| -> f64 {
        let mut b = b_lo;
        let n = 32;
        let h = (s - s_lo) / n as f64;
        let mut t = s_lo;
        for _ in 0..n {
            b = rk4_step(rhs, t, b, h);
            t += h;
        }
        b.norm_sqr()
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (s_lo, s_hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let s_star = 0.5 * (a + b);
    let p_star = eval(s_star);
    if p_star >= trajectory[k].1 {
        (s_star, p_star)
    } else {
        (trajectory[k].0, trajectory[k].1)
    }
}

fn rk4_step(rhs: &impl Fn(f64, Complex64) -> Complex64, s: f64, y: Complex64, h: f64) -> Complex64 {
    let k1 = rhs(s, y);
    let k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1);
    let k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2);
    let k4 = rhs(s + h, y + h * k3);
    y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Maximum excitation versus pulse time constant: one [`excite`] per
/// entry. Custom shapes carry a fixed timescale and cannot be swept.
pub fn sweep_bandwidth(
    atom: &TwoLevelAtom,
    shape: &PulseShape,
    time_constants: &[f64],
    spatial_efficiency: f64,
) -> Result<Vec<(f64, f64)>> {
    if matches!(shape, PulseShape::Custom(_)) {
        return Err(Error::InvalidArgument(
            "custom envelopes have a fixed timescale; sweep analytic shapes".into(),
        ));
    }
    time_constants
        .iter()
        .map(|&tc| {
            let pulse = PulseEnvelope::with_auto_window(shape.clone(), tc)?;
            let run = excite(atom, &pulse, spatial_efficiency)?;
            Ok((tc, run.max_probability))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn atom() -> TwoLevelAtom {
        TwoLevelAtom::new(657e-9, 2500.0).unwrap()
    }

    fn matched(shape: PulseShape) -> PulseEnvelope {
        PulseEnvelope::with_auto_window(shape, 1.0).unwrap()
    }

    #[test]
    fn atom_validation_and_lifetime() {
        assert!(TwoLevelAtom::new(0.0, 1.0).is_err());
        assert!(TwoLevelAtom::new(1e-6, -1.0).is_err());
        assert_abs_diff_eq!(atom().lifetime(), 4e-4, epsilon = 1e-18);
    }

    #[test]
    fn rising_envelope_is_normalized() {
        let p = PulseEnvelope::new(PulseShape::RisingExponential, 1.0, (-40.0, 0.0)).unwrap();
        let norm = quadrature::integrate(|s| p.amplitude(s).powi(2), -40.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-9);
        assert_eq!(p.amplitude(0.5), 0.0);
    }

    #[test]
    fn short_window_reports_missing_norm() {
        let err = PulseEnvelope::new(PulseShape::RisingExponential, 1.0, (-5.0, 0.0)).unwrap_err();
        match err {
            Error::WindowTruncation { missing_norm } => {
                assert_abs_diff_eq!(missing_norm, (-5.0f64).exp(), epsilon = 1e-9);
            }
            other => panic!("expected truncation error, got {other}"),
        }
    }

    #[test]
    fn falling_mirrors_rising() {
        let rise = PulseEnvelope::new(PulseShape::RisingExponential, 1.7, (-50.0, 3.0)).unwrap();
        let fall = PulseEnvelope::new(PulseShape::FallingExponential, 1.7, (-3.0, 50.0)).unwrap();
        for k in 0..200 {
            let s = -3.0 + 6.0 * k as f64 / 199.0;
            assert_abs_diff_eq!(fall.amplitude(s), rise.amplitude(-s), epsilon = 1e-12);
        }
    }

    #[test]
    fn matched_rising_reaches_unity() {
        let run = excite(&atom(), &matched(PulseShape::RisingExponential), 1.0).unwrap();
        assert_abs_diff_eq!(run.max_probability, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(run.peak_time, 0.0, epsilon = 1e-2);
    }

    #[test]
    fn max_probability_scales_with_spatial_efficiency() {
        let pulse = matched(PulseShape::RisingExponential);
        for eta in [0.1, 0.5, 0.94, 1.0] {
            let run = excite(&atom(), &pulse, eta).unwrap();
            assert_abs_diff_eq!(run.max_probability, eta, epsilon = 1e-4);
        }
    }

    #[test]
    fn matched_falling_peaks_at_four_over_e_squared() {
        let run = excite(&atom(), &matched(PulseShape::FallingExponential), 1.0).unwrap();
        assert_abs_diff_eq!(
            run.max_probability,
            4.0 / (1.0f64.exp().powi(2)),
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(run.peak_time, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn unmatched_rising_follows_closed_form() {
        // P_max = 4 eta tc / (1 + tc)^2 for a rising exponential of
        // intensity time constant tc lifetimes.
        for (tc, expected) in [(2.0, 8.0 / 9.0), (0.5, 8.0 / 9.0), (4.0, 16.0 / 25.0)] {
            let pulse = PulseEnvelope::with_auto_window(PulseShape::RisingExponential, tc).unwrap();
            let run = excite(&atom(), &pulse, 1.0).unwrap();
            assert_abs_diff_eq!(run.max_probability, expected, epsilon = 1e-4);
        }
    }

    #[test]
    fn dark_pulse_leaves_the_atom_dark() {
        let run = excite(&atom(), &matched(PulseShape::RisingExponential), 0.0).unwrap();
        assert!(run.trajectory.iter().all(|&(_, p)| p == 0.0));
        assert_eq!(run.max_probability, 0.0);
    }

    #[test]
    fn custom_samples_of_rising_match_analytic() {
        let n = 6001;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let s = -25.0 + 25.0 * k as f64 / (n - 1) as f64;
                (s, if s <= 0.0 { (0.5 * s).exp() } else { 0.0 })
            })
            .collect();
        let pulse = PulseEnvelope::new(PulseShape::Custom(samples), 1.0, (-25.0, 0.0)).unwrap();
        let run = excite(&atom(), &pulse, 1.0).unwrap();
        assert_abs_diff_eq!(run.max_probability, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn probabilities_stay_in_the_unit_interval() {
        let cases = [
            (PulseShape::RisingExponential, 0.3, 1.0, 0.0),
            (PulseShape::RisingExponential, 3.0, 0.7, 0.4),
            (PulseShape::FallingExponential, 1.0, 1.0, 0.0),
            (PulseShape::Gaussian, 2.0, 0.9, -0.2),
        ];
        for (shape, tc, eta, detuning) in cases {
            let pulse = PulseEnvelope::with_auto_window(shape, tc).unwrap();
            let opts = ExciteOptions {
                detuning,
                ..Default::default()
            };
            let run = excite_with(&atom(), &pulse, eta, &opts).unwrap();
            assert!(run
                .trajectory
                .iter()
                .all(|&(_, p)| (0.0..=1.0).contains(&p)));
            assert!(run.max_probability <= 1.0);
        }
    }

    #[test]
    fn step_halving_leaves_the_peak_unchanged() {
        let pulse = matched(PulseShape::FallingExponential);
        let coarse = excite_with(
            &atom(),
            &pulse,
            1.0,
            &ExciteOptions {
                max_step: 0.01,
                ..Default::default()
            },
        )
        .unwrap();
        let fine = excite_with(
            &atom(),
            &pulse,
            1.0,
            &ExciteOptions {
                max_step: 0.005,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((coarse.max_probability - fine.max_probability).abs() < 1e-8);
    }

    #[test]
    fn detuning_reduces_excitation_by_a_lorentzian() {
        let pulse = matched(PulseShape::RisingExponential);
        let resonant = excite(&atom(), &pulse, 1.0).unwrap().max_probability;
        for detuning in [0.1, 0.5, 1.0, 3.0, -0.5] {
            let run = excite_with(
                &atom(),
                &pulse,
                1.0,
                &ExciteOptions {
                    detuning,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(run.max_probability < resonant);
            // Closed form: P = eta / (1 + detuning^2) at the pulse end.
            assert_abs_diff_eq!(
                run.max_probability,
                1.0 / (1.0 + detuning * detuning),
                epsilon = 1e-4
            );
        }
    }

    #[test]
    fn rising_sweep_peaks_at_the_lifetime() {
        let constants: Vec<f64> = (0..41)
            .map(|k| 10.0f64.powf(-1.0 + 2.0 * k as f64 / 40.0))
            .collect();
        let table =
            sweep_bandwidth(&atom(), &PulseShape::RisingExponential, &constants, 1.0).unwrap();
        let best = table
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        assert_abs_diff_eq!(table[best].0, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(table[best].1, 1.0, epsilon = 1e-4);
        for pair in table.windows(2) {
            if pair[1].0 <= 1.0 {
                assert!(pair[1].1 >= pair[0].1 - 1e-9);
            } else if pair[0].0 >= 1.0 {
                assert!(pair[1].1 <= pair[0].1 + 1e-9);
            }
        }
    }

    #[test]
    fn falling_sweep_stays_below_the_bound() {
        let constants: Vec<f64> = (0..30)
            .map(|k| 10.0f64.powf(-1.0 + 2.0 * k as f64 / 29.0))
            .collect();
        let table =
            sweep_bandwidth(&atom(), &PulseShape::FallingExponential, &constants, 1.0).unwrap();
        assert!(table.iter().all(|&(_, p)| p < 0.56));
    }

    #[test]
    fn gaussian_underperforms_the_matched_rising_pulse() {
        let pulse = matched(PulseShape::Gaussian);
        let run = excite(&atom(), &pulse, 1.0).unwrap();
        assert!(run.max_probability < 0.95);
        assert!(run.max_probability > 0.3);
    }

    #[test]
    fn custom_sweep_is_rejected() {
        let shape = PulseShape::Custom(vec![(0.0, 1.0), (1.0, 0.0)]);
        assert!(sweep_bandwidth(&atom(), &shape, &[1.0], 1.0).is_err());
    }

    #[test]
    fn out_of_range_efficiency_is_rejected() {
        let pulse = matched(PulseShape::RisingExponential);
        assert!(excite(&atom(), &pulse, -0.1).is_err());
        assert!(excite(&atom(), &pulse, 1.1).is_err());
    }

    #[test]
    fn trajectory_csv_has_the_contract_header() {
        let run = excite(&atom(), &matched(PulseShape::RisingExponential), 0.5).unwrap();
        let csv = run.to_csv();
        assert!(csv.starts_with("t_over_tau,P_e\n"));
        assert_eq!(csv.lines().count(), run.trajectory.len() + 1);
    }
}

//! Core data types: wall-unit profile samples, run metadata, and fitted-law
//! results shared by every other module.
//!
//! All types are immutable after construction and safe to share across
//! threads. Validation happens in the constructors so that a value of one of
//! these types is always internally consistent.

use crate::error::{Error, Result};

/// Minimum number of samples a profile must carry: a two-segment fit needs
/// three points per side plus headroom below the sublayer cut.
pub const MIN_PROFILE_POINTS: usize = 10;

/// Relative tolerance for the Re_theta = U*theta/nu consistency check.
const RE_THETA_CONSISTENCY_TOL: f64 = 1e-6;

/// A closed interval of wall-normal coordinate used to window fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "window bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.lo && y <= self.hi
    }
}

/// One sample of a mean-velocity profile in wall units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    /// Dimensionless wall distance u* y / nu.
    pub y_plus: f64,
    /// Dimensionless mean velocity u / u*.
    pub u_plus: f64,
}

impl ProfilePoint {
    pub fn new(y_plus: f64, u_plus: f64) -> Result<Self> {
        if !(y_plus.is_finite() && y_plus > 0.0) {
            return Err(Error::NonPositive {
                what: "y_plus",
                value: y_plus,
            });
        }
        if !(u_plus.is_finite() && u_plus > 0.0) {
            return Err(Error::NonPositive {
                what: "u_plus",
                value: u_plus,
            });
        }
        Ok(ProfilePoint { y_plus, u_plus })
    }
}

/// Per-run flow parameters. `re_theta` is the required run key; the
/// momentum thickness itself is optional and, when present, must be
/// consistent with Re_theta = U theta / nu.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    /// Momentum-thickness Reynolds number.
    pub re_theta: f64,
    /// Free-stream velocity [m/s].
    pub u_free: f64,
    /// Friction velocity [m/s].
    pub u_tau: f64,
    /// Kinematic viscosity [m^2/s].
    pub nu: f64,
    /// Momentum thickness [m], if known.
    pub momentum_thickness: Option<f64>,
    /// Run identifier.
    pub label: String,
}

impl RunMetadata {
    pub fn new(
        re_theta: f64,
        u_free: f64,
        u_tau: f64,
        nu: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        for (what, value) in [
            ("re_theta", re_theta),
            ("u_free", u_free),
            ("u_tau", u_tau),
            ("nu", nu),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositive { what, value });
            }
        }
        Ok(RunMetadata {
            re_theta,
            u_free,
            u_tau,
            nu,
            momentum_thickness: None,
            label: label.into(),
        })
    }

    /// Attach the measured momentum thickness, checking it against re_theta.
    pub fn with_momentum_thickness(mut self, theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::NonPositive {
                what: "momentum_thickness",
                value: theta,
            });
        }
        let derived = self.u_free * theta / self.nu;
        if ((self.re_theta - derived) / self.re_theta).abs() >= RE_THETA_CONSISTENCY_TOL {
            return Err(Error::InconsistentReTheta {
                stated: self.re_theta,
                derived,
            });
        }
        self.momentum_thickness = Some(theta);
        Ok(self)
    }
}

/// One run's mean-velocity profile: metadata plus samples strictly
/// increasing in y_plus.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    meta: RunMetadata,
    points: Vec<ProfilePoint>,
}

impl VelocityProfile {
    /// Build a profile from samples already in wall units.
    pub fn new(meta: RunMetadata, points: Vec<ProfilePoint>) -> Result<Self> {
        if points.len() < MIN_PROFILE_POINTS {
            return Err(Error::TooFewPoints {
                found: points.len(),
                min: MIN_PROFILE_POINTS,
            });
        }
        for (i, pair) in points.windows(2).enumerate() {
            if pair[1].y_plus <= pair[0].y_plus {
                return Err(Error::UnorderedPoints { index: i + 1 });
            }
        }
        Ok(VelocityProfile { meta, points })
    }

    /// Build a profile from dimensional samples (y [m], u [m/s]), converting
    /// to wall units with the run's friction velocity and viscosity.
    pub fn from_dimensional(meta: RunMetadata, samples: &[(f64, f64)]) -> Result<Self> {
        let points = samples
            .iter()
            .map(|&(y, u)| ProfilePoint::new(meta.u_tau * y / meta.nu, u / meta.u_tau))
            .collect::<Result<Vec<_>>>()?;
        VelocityProfile::new(meta, points)
    }

    pub fn meta(&self) -> &RunMetadata {
        &self.meta
    }

    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn y_plus_min(&self) -> f64 {
        self.points[0].y_plus
    }

    pub fn y_plus_max(&self) -> f64 {
        self.points[self.points.len() - 1].y_plus
    }

    /// Contiguous index range of points with y_plus inside `window`.
    pub(crate) fn index_range(&self, window: Window) -> std::ops::Range<usize> {
        let start = self.points.partition_point(|p| p.y_plus < window.lo);
        let end = self.points.partition_point(|p| p.y_plus <= window.hi);
        start..end
    }

    /// Points with y_plus inside `window`.
    pub fn points_in(&self, window: Window) -> &[ProfilePoint] {
        &self.points[self.index_range(window)]
    }
}

/// Fitted power law U+ = amplitude * (y+)^exponent over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub stderr_amplitude: f64,
    pub stderr_exponent: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub window: Window,
}

impl PowerLawFit {
    /// Evaluate the fitted law at `y_plus`.
    pub fn evaluate(&self, y_plus: f64) -> Result<f64> {
        evaluate_power_law(self.amplitude, self.exponent, y_plus)
    }
}

/// Evaluate amplitude * y_plus^exponent, rejecting nonpositive y_plus.
pub fn evaluate_power_law(amplitude: f64, exponent: f64, y_plus: f64) -> Result<f64> {
    if !(y_plus.is_finite() && y_plus > 0.0) {
        return Err(Error::Domain(format!(
            "power law requires y_plus > 0, got {y_plus}"
        )));
    }
    Ok(amplitude * y_plus.powf(exponent))
}

/// Fitted logarithmic law U+ = (1/kappa) ln(y+) + B over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLawFit {
    pub kappa: f64,
    pub intercept_b: f64,
    pub stderr_kappa: f64,
    pub stderr_b: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub window: Window,
}

impl LogLawFit {
    /// Evaluate the fitted law at `y_plus`.
    pub fn evaluate(&self, y_plus: f64) -> Result<f64> {
        evaluate_log_law(self.kappa, self.intercept_b, y_plus)
    }
}

/// Evaluate (1/kappa) ln(y_plus) + b, rejecting nonpositive y_plus.
pub fn evaluate_log_law(kappa: f64, intercept_b: f64, y_plus: f64) -> Result<f64> {
    if !(y_plus.is_finite() && y_plus > 0.0) {
        return Err(Error::Domain(format!(
            "log law requires y_plus > 0, got {y_plus}"
        )));
    }
    Ok(y_plus.ln() / kappa + intercept_b)
}

/// Two-region broken-line fit in log-log coordinates: the breakpoint plus
/// the power laws on each side and the combined residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedFit {
    pub breakpoint_y_plus: f64,
    /// Region adjacent to the viscous sublayer.
    pub region1: PowerLawFit,
    /// Region adjacent to the free stream.
    pub region2: PowerLawFit,
    /// Sum of squared residuals over both segments, log-log coordinates.
    pub total_sse: f64,
}

impl SegmentedFit {
    /// Whether the log-log slope decreases toward the free stream
    /// (region1.exponent > region2.exponent). An inverted ordering is
    /// reported, not rejected.
    pub fn slope_decreases_outward(&self) -> bool {
        self.region1.exponent > self.region2.exponent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn meta() -> RunMetadata {
        RunMetadata::new(12000.0, 15.0, 0.5, 1.5e-5, "t1").unwrap()
    }

    fn wall_points(n: usize) -> Vec<ProfilePoint> {
        (0..n)
            .map(|i| ProfilePoint::new(100.0 + 10.0 * i as f64, 15.0 + 0.1 * i as f64).unwrap())
            .collect()
    }

    #[test]
    fn power_law_identity_cases() {
        assert_relative_eq!(evaluate_power_law(1.0, 0.0, 50.0).unwrap(), 1.0);
        assert_relative_eq!(evaluate_power_law(8.5, 0.14, 1.0).unwrap(), 8.5);
    }

    #[test]
    fn power_law_direct_evaluation() {
        // Oracle: exp/log route, independent of powf.
        let a: f64 = 7.6962;
        let alpha = 1.0 / 6.0;
        let expected = (a.ln() + alpha * (1000.0f64).ln()).exp();
        let got = evaluate_power_law(a, alpha, 1000.0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert_relative_eq!(got, 24.34, max_relative = 1e-3);
    }

    #[test]
    fn power_law_rejects_nonpositive() {
        assert!(evaluate_power_law(8.5, 0.14, 0.0).is_err());
        assert!(evaluate_power_law(8.5, 0.14, -3.0).is_err());
    }

    #[test]
    fn log_law_cases() {
        assert_relative_eq!(evaluate_log_law(0.40, 5.1, 1.0).unwrap(), 5.1);
        let e4 = (4.0f64).exp();
        assert_relative_eq!(
            evaluate_log_law(0.40, 5.1, e4).unwrap(),
            15.1,
            max_relative = 1e-12
        );
        // Thesis constants kappa = 0.38, B = 4.1.
        assert_relative_eq!(
            evaluate_log_law(0.38, 4.1, 1000.0).unwrap(),
            (1000.0f64).ln() / 0.38 + 4.1,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            evaluate_log_law(0.38, 4.1, 1000.0).unwrap(),
            22.28,
            max_relative = 1e-3
        );
        assert!(evaluate_log_law(0.40, 5.1, 0.0).is_err());
    }

    #[test]
    fn profile_rejects_too_few_points() {
        let err = VelocityProfile::new(meta(), wall_points(3)).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { found: 3, min: 10 }));
    }

    #[test]
    fn profile_rejects_unordered_points() {
        let mut pts = wall_points(12);
        pts.swap(4, 5);
        let err = VelocityProfile::new(meta(), pts).unwrap_err();
        assert!(matches!(err, Error::UnorderedPoints { .. }));
    }

    #[test]
    fn profile_rejects_duplicate_y_plus() {
        let mut pts = wall_points(12);
        pts[5] = pts[4];
        assert!(VelocityProfile::new(meta(), pts).is_err());
    }

    #[test]
    fn dimensional_conversion_matches_wall_units() {
        let m = meta();
        let (u_tau, nu) = (m.u_tau, m.nu);
        let dimensional: Vec<(f64, f64)> = wall_points(12)
            .iter()
            .map(|p| (p.y_plus * nu / u_tau, p.u_plus * u_tau))
            .collect();
        let prof = VelocityProfile::from_dimensional(m.clone(), &dimensional).unwrap();
        for (got, want) in prof.points().iter().zip(wall_points(12)) {
            assert_relative_eq!(got.y_plus, want.y_plus, max_relative = 1e-14);
            assert_relative_eq!(got.u_plus, want.u_plus, max_relative = 1e-14);
        }
    }

    #[test]
    fn re_theta_consistency_check() {
        let m = meta();
        // theta consistent with Re_theta = U theta / nu.
        let theta = m.re_theta * m.nu / m.u_free;
        assert!(m.clone().with_momentum_thickness(theta).is_ok());
        let err = m.with_momentum_thickness(theta * 1.01).unwrap_err();
        assert!(matches!(err, Error::InconsistentReTheta { .. }));
    }

    #[test]
    fn window_selection_is_inclusive() {
        let prof = VelocityProfile::new(meta(), wall_points(12)).unwrap();
        let w = Window::new(110.0, 150.0).unwrap();
        let pts = prof.points_in(w);
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0].y_plus, 110.0);
        assert_eq!(pts[4].y_plus, 150.0);
    }
}

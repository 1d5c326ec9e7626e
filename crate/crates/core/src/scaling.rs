//! The Reynolds-number-dependent scaling law and its inversion: velocity
//! evaluation, the two-equation solve for ln Re from fitted amplitude and
//! exponent, the geometric-mean effective Reynolds number with its length
//! scale, and the outer-exponent correlation.

use crate::error::{Error, Result};
use crate::profile::RunMetadata;

/// Constants of the scaling law U+ = (c1 ln Re + c2) (y+)^(c / ln Re).
///
/// The defaults are the pipe-flow calibration c1 = 1/sqrt(3), c2 = 5/2,
/// c = 3/2. They are parameters so sensitivity studies can vary them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLawConstants {
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
}

impl Default for ScalingLawConstants {
    fn default() -> Self {
        ScalingLawConstants {
            c1: 1.0 / 3.0f64.sqrt(),
            c2: 2.5,
            c: 1.5,
        }
    }
}

impl ScalingLawConstants {
    pub fn new(c1: f64, c2: f64, c: f64) -> Result<Self> {
        for (what, value) in [("c1", c1), ("c2", c2), ("c", c)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositive { what, value });
            }
        }
        Ok(ScalingLawConstants { c1, c2, c })
    }

    /// Exponent of the law at a given ln Re.
    pub fn exponent(&self, ln_re: f64) -> f64 {
        self.c / ln_re
    }

    /// Amplitude of the law at a given ln Re.
    pub fn amplitude(&self, ln_re: f64) -> f64 {
        self.c1 * ln_re + self.c2
    }
}

/// Evaluate the scaling-law velocity at one point.
pub fn scaling_law_velocity(ln_re: f64, y_plus: f64, k: &ScalingLawConstants) -> Result<f64> {
    if !(ln_re.is_finite() && ln_re > 0.0) {
        return Err(Error::Domain(format!(
            "scaling law requires ln_re > 0, got {ln_re}"
        )));
    }
    if !(y_plus.is_finite() && y_plus > 0.0) {
        return Err(Error::Domain(format!(
            "scaling law requires y_plus > 0, got {y_plus}"
        )));
    }
    Ok(k.amplitude(ln_re) * y_plus.powf(k.exponent(ln_re)))
}

/// Solve c1 ln Re1 + c2 = A for ln Re1.
pub fn solve_ln_re1(amplitude_a: f64, k: &ScalingLawConstants) -> Result<f64> {
    if !(amplitude_a.is_finite() && amplitude_a > k.c2) {
        return Err(Error::NonPhysicalFit(format!(
            "amplitude A = {amplitude_a} must exceed c2 = {} for a positive ln Re1",
            k.c2
        )));
    }
    Ok((amplitude_a - k.c2) / k.c1)
}

/// Solve c / ln Re2 = alpha for ln Re2.
pub fn solve_ln_re2(exponent_alpha: f64, k: &ScalingLawConstants) -> Result<f64> {
    if !(exponent_alpha.is_finite() && exponent_alpha > 0.0) {
        return Err(Error::NonPhysicalFit(format!(
            "exponent alpha = {exponent_alpha} must be positive for a finite ln Re2"
        )));
    }
    Ok(k.c / exponent_alpha)
}

/// Outer-region exponent correlation beta = 2 / ln Re + 0.01.
pub fn beta_correlation(ln_re: f64) -> Result<f64> {
    if !(ln_re.is_finite() && ln_re > 0.0) {
        return Err(Error::Domain(format!(
            "beta correlation requires ln_re > 0, got {ln_re}"
        )));
    }
    Ok(2.0 / ln_re + 0.01)
}

/// Result of combining the two ln Re estimates for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSolution {
    pub ln_re1: f64,
    pub ln_re2: f64,
    /// 100 * |ln Re1 - ln Re2| / mean(ln Re1, ln Re2).
    pub discrepancy_pct: f64,
    pub ln_re_eff: f64,
    /// exp(ln_re_eff) = sqrt(Re1 * Re2), the geometric mean.
    pub re_eff: f64,
    /// Effective length scale Lambda = nu * Re / U [m].
    pub lambda_scale: f64,
    pub close_enough: bool,
}

impl ScalingSolution {
    /// theta / Lambda when the momentum thickness is known.
    pub fn theta_over_lambda(&self, meta: &RunMetadata) -> Option<f64> {
        meta.momentum_thickness.map(|t| t / self.lambda_scale)
    }
}

/// Combine the two ln Re estimates into the effective Reynolds number,
/// length scale, and closeness verdict.
pub fn effective_reynolds(
    ln_re1: f64,
    ln_re2: f64,
    meta: &RunMetadata,
    threshold_pct: f64,
) -> Result<ScalingSolution> {
    for (what, value) in [("ln_re1", ln_re1), ("ln_re2", ln_re2)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositive { what, value });
        }
    }
    let ln_re_eff = 0.5 * (ln_re1 + ln_re2);
    let re_eff = ln_re_eff.exp();
    let discrepancy_pct = 100.0 * (ln_re1 - ln_re2).abs() / ln_re_eff;
    Ok(ScalingSolution {
        ln_re1,
        ln_re2,
        discrepancy_pct,
        ln_re_eff,
        re_eff,
        lambda_scale: meta.nu * re_eff / meta.u_free,
        close_enough: discrepancy_pct <= threshold_pct,
    })
}

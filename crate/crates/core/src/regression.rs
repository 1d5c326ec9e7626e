//! Least-squares machinery: straight-line fits in transformed coordinates
//! and the exhaustive two-segment broken-line fit.
//!
//! All fitting is unweighted ordinary least squares. Power-law fits run on
//! (ln y+, ln U+), log-law fits on (ln y+, U+). Natural logs throughout;
//! base-10 appears only in plot output.

use crate::error::{Error, Result};
use crate::profile::{LogLawFit, PowerLawFit, SegmentedFit, VelocityProfile, Window};

/// Ordinary least-squares line fit with residual diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFitResult {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub stderr_intercept: f64,
    pub r_squared: f64,
    /// Sum of squared residuals.
    pub sse: f64,
    pub n_points: usize,
}

impl LinearFitResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Unweighted OLS on (xs, ys). Standard errors use the residual variance
/// with n - 2 degrees of freedom. When the ys are constant, r^2 is defined
/// as 1 (perfect fit by a constant).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFitResult> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::Domain(format!(
            "fit_line requires equal-length inputs, got {} and {}",
            n,
            ys.len()
        )));
    }
    if n < 3 {
        return Err(Error::InsufficientPoints {
            context: "line fit".to_string(),
            needed: 3,
            found: n,
        });
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ConstantAbscissa);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let mut sse = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        sse += r * r;
    }

    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };

    let resid_var = sse / (nf - 2.0);
    let stderr_slope = (resid_var / sxx).sqrt();
    let stderr_intercept = (resid_var * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();

    Ok(LinearFitResult {
        slope,
        intercept,
        stderr_slope,
        stderr_intercept,
        r_squared,
        sse,
        n_points: n,
    })
}

fn insufficient(context: &str, window: Window, found: usize) -> Error {
    Error::InsufficientPoints {
        context: format!("{context} over window [{}, {}]", window.lo, window.hi),
        needed: 3,
        found,
    }
}

/// Power-law fit on the profile points inside `window`, performed as a line
/// fit in double-logarithmic coordinates. Returns the fit together with the
/// underlying line-fit diagnostics.
pub fn fit_power_law_full(
    profile: &VelocityProfile,
    window: Window,
) -> Result<(PowerLawFit, LinearFitResult)> {
    let pts = profile.points_in(window);
    if pts.len() < 3 {
        return Err(insufficient("power-law fit", window, pts.len()));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.y_plus.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.u_plus.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    let amplitude = line.intercept.exp();
    let fit = PowerLawFit {
        amplitude,
        exponent: line.slope,
        // First-order propagation through exp.
        stderr_amplitude: amplitude * line.stderr_intercept,
        stderr_exponent: line.stderr_slope,
        r_squared: line.r_squared,
        n_points: line.n_points,
        window,
    };
    Ok((fit, line))
}

/// Power-law fit on the windowed points; see [`fit_power_law_full`].
pub fn fit_power_law(profile: &VelocityProfile, window: Window) -> Result<PowerLawFit> {
    fit_power_law_full(profile, window).map(|(fit, _)| fit)
}

/// Log-law fit on the profile points inside `window`, performed as a line
/// fit in semi-logarithmic coordinates. A nonpositive fitted slope has no
/// corresponding kappa and is rejected.
pub fn fit_log_law_full(
    profile: &VelocityProfile,
    window: Window,
) -> Result<(LogLawFit, LinearFitResult)> {
    let pts = profile.points_in(window);
    if pts.len() < 3 {
        return Err(insufficient("log-law fit", window, pts.len()));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.y_plus.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.u_plus).collect();
    let line = fit_line(&xs, &ys)?;
    if line.slope <= 0.0 {
        return Err(Error::NonPhysicalFit(format!(
            "log-law slope {} is not positive, kappa undefined",
            line.slope
        )));
    }
    let fit = LogLawFit {
        kappa: 1.0 / line.slope,
        intercept_b: line.intercept,
        // First-order propagation through 1/slope.
        stderr_kappa: line.stderr_slope / (line.slope * line.slope),
        stderr_b: line.stderr_intercept,
        r_squared: line.r_squared,
        n_points: line.n_points,
        window,
    };
    Ok((fit, line))
}

/// Log-law fit on the windowed points; see [`fit_log_law_full`].
pub fn fit_log_law(profile: &VelocityProfile, window: Window) -> Result<LogLawFit> {
    fit_log_law_full(profile, window).map(|(fit, _)| fit)
}

/// Prefix sums over the log-log coordinates of a contiguous index range,
/// letting each candidate window's OLS residual be evaluated in O(1).
struct LogLogPrefix {
    offset: usize,
    sx: Vec<f64>,
    sy: Vec<f64>,
    sxx: Vec<f64>,
    sxy: Vec<f64>,
    syy: Vec<f64>,
}

impl LogLogPrefix {
    fn new(profile: &VelocityProfile, range: std::ops::Range<usize>) -> Self {
        let pts = &profile.points()[range.clone()];
        let n = pts.len();
        let mut sx = vec![0.0; n + 1];
        let mut sy = vec![0.0; n + 1];
        let mut sxx = vec![0.0; n + 1];
        let mut sxy = vec![0.0; n + 1];
        let mut syy = vec![0.0; n + 1];
        for (i, p) in pts.iter().enumerate() {
            let x = p.y_plus.ln();
            let y = p.u_plus.ln();
            sx[i + 1] = sx[i] + x;
            sy[i + 1] = sy[i] + y;
            sxx[i + 1] = sxx[i] + x * x;
            sxy[i + 1] = sxy[i] + x * y;
            syy[i + 1] = syy[i] + y * y;
        }
        LogLogPrefix {
            offset: range.start,
            sx,
            sy,
            sxx,
            sxy,
            syy,
        }
    }

    /// OLS residual sum over absolute point indices [a, b] inclusive.
    fn sse(&self, a: usize, b: usize) -> f64 {
        let (i, j) = (a - self.offset, b + 1 - self.offset);
        let n = (j - i) as f64;
        let sx = self.sx[j] - self.sx[i];
        let sy = self.sy[j] - self.sy[i];
        let sxx = self.sxx[j] - self.sxx[i];
        let sxy = self.sxy[j] - self.sxy[i];
        let syy = self.syy[j] - self.syy[i];
        let cxx = sxx - sx * sx / n;
        let cxy = sxy - sx * sy / n;
        let cyy = syy - sy * sy / n;
        if cxx <= 0.0 {
            return f64::INFINITY;
        }
        (cyy - cxy * cxy / cxx).max(0.0)
    }

    /// Centered y variance over the whole range, used to scale the tie floor.
    fn total_cyy(&self) -> f64 {
        let j = self.sy.len() - 1;
        let n = j as f64;
        self.syy[j] - self.sy[j] * self.sy[j] / n
    }
}

/// Residual sums below this fraction of the data's log-log variance are
/// numerically indistinguishable from zero; candidates inside the band tie
/// and the smallest breakpoint wins.
const SSE_TIE_RELATIVE_FLOOR: f64 = 1e-12;

/// Exhaustive two-segment broken-line fit in log-log coordinates.
///
/// Candidate breakpoints are the observed data points with y+ inside
/// [search_lo, search_hi]. For each candidate, region 1 is fit over
/// [sublayer_cutoff, candidate] and region 2 over [candidate, y+_max]; the
/// candidate datum belongs to both windows. The candidate minimizing the
/// combined residual wins, ties broken toward the smallest breakpoint.
pub fn fit_broken_line(
    profile: &VelocityProfile,
    search_lo: f64,
    search_hi: f64,
    sublayer_cutoff: f64,
) -> Result<SegmentedFit> {
    if !(sublayer_cutoff.is_finite() && sublayer_cutoff > 0.0) {
        return Err(Error::NonPositive {
            what: "sublayer_cutoff",
            value: sublayer_cutoff,
        });
    }
    if !(search_lo.is_finite() && search_hi.is_finite() && search_lo < search_hi) {
        return Err(Error::Domain(format!(
            "breakpoint search range must satisfy lo < hi, got [{search_lo}, {search_hi}]"
        )));
    }

    let y_max = profile.y_plus_max();
    let fit_span = Window {
        lo: sublayer_cutoff,
        hi: y_max,
    };
    let fit_range = profile.index_range(fit_span);
    let points = profile.points();
    let last = fit_range.end.saturating_sub(1);

    // Candidates need three points on each side, the candidate included in both.
    let candidates: Vec<usize> = fit_range
        .clone()
        .filter(|&i| {
            let y = points[i].y_plus;
            y >= search_lo
                && y <= search_hi
                && i >= fit_range.start + 2
                && i + 2 <= last
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoValidBreakpoint {
            lo: search_lo,
            hi: search_hi,
        });
    }

    let prefix = LogLogPrefix::new(profile, fit_range.clone());
    let floor = SSE_TIE_RELATIVE_FLOOR * prefix.total_cyy();

    let mut best_idx = candidates[0];
    let mut best_score = f64::INFINITY;
    for &i in &candidates {
        let score = (prefix.sse(fit_range.start, i) + prefix.sse(i, last)).max(floor);
        if score < best_score {
            best_score = score;
            best_idx = i;
        }
    }

    // Refit the winning windows with the stable two-pass path; those fits
    // and their residuals are what the caller sees.
    let bp = points[best_idx].y_plus;
    let w1 = Window {
        lo: sublayer_cutoff,
        hi: bp,
    };
    let w2 = Window { lo: bp, hi: y_max };
    let (region1, line1) = fit_power_law_full(profile, w1)?;
    let (region2, line2) = fit_power_law_full(profile, w2)?;

    Ok(SegmentedFit {
        breakpoint_y_plus: bp,
        region1,
        region2,
        total_sse: line1.sse + line2.sse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{ProfilePoint, RunMetadata};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn meta() -> RunMetadata {
        RunMetadata::new(12000.0, 15.0, 0.5, 1.5e-5, "reg").unwrap()
    }

    fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let step = (hi / lo).ln() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo * (step * i as f64).exp()
                }
            })
            .collect()
    }

    fn power_profile(a: f64, alpha: f64, lo: f64, hi: f64, n: usize) -> VelocityProfile {
        let pts = log_spaced(lo, hi, n)
            .into_iter()
            .map(|y| ProfilePoint::new(y, a * y.powf(alpha)).unwrap())
            .collect();
        VelocityProfile::new(meta(), pts).unwrap()
    }

    #[test]
    fn exact_line() {
        let fit = fit_line(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-14);
        assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.sse, 0.0, epsilon = 1e-26);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn constant_data_r_squared_convention() {
        let fit = fit_line(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.0, epsilon = 1e-15);
        assert_relative_eq!(fit.intercept, 5.0, max_relative = 1e-14);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn normal_equations_hand_case() {
        // Normal equations for xs=[0,1,2,3], ys=[1,3,2,4]:
        // slope = (n*Sxy - Sx*Sy) / (n*Sxx - Sx^2) = (76-60)/(56-36) = 0.8,
        // intercept = (Sy - slope*Sx)/n = (10 - 4.8)/4 = 1.3.
        let fit = fit_line(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(fit.slope, 0.8, max_relative = 1e-14);
        assert_relative_eq!(fit.intercept, 1.3, max_relative = 1e-14);
    }

    #[test]
    fn residual_orthogonality() {
        let xs = [0.3, 1.1, 2.9, 4.0, 5.5, 7.2];
        let ys = [1.0, 0.4, 2.2, 1.9, 3.8, 3.1];
        let fit = fit_line(&xs, &ys).unwrap();
        let mut sum_r = 0.0;
        let mut sum_rx = 0.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            let r = y - fit.predict(x);
            sum_r += r;
            sum_rx += r * x;
        }
        assert_abs_diff_eq!(sum_r, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sum_rx, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            fit_line(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::InsufficientPoints { .. })
        ));
        assert!(matches!(
            fit_line(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::ConstantAbscissa)
        ));
    }

    #[test]
    fn power_law_recovery_exact() {
        let prof = power_profile(8.5, 0.14, 100.0, 5000.0, 40);
        let fit = fit_power_law(&prof, Window::new(100.0, 5000.0).unwrap()).unwrap();
        assert_abs_diff_eq!(fit.amplitude, 8.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.exponent, 0.14, epsilon = 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn power_law_recovery_scaling_constants() {
        // Scaling-law profile at ln Re = 9: A = 3*sqrt(3) + 2.5, alpha = 1/6.
        let a = 3.0 * 3.0f64.sqrt() + 2.5;
        let prof = power_profile(a, 1.0 / 6.0, 100.0, 5000.0, 40);
        let fit = fit_power_law(&prof, Window::new(100.0, 5000.0).unwrap()).unwrap();
        assert_abs_diff_eq!(fit.amplitude, a, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.exponent, 1.0 / 6.0, epsilon = 1e-10);
    }

    #[test]
    fn power_law_window_too_small() {
        let prof = power_profile(8.5, 0.14, 100.0, 5000.0, 40);
        let err = fit_power_law(&prof, Window::new(1.0, 50.0).unwrap()).unwrap_err();
        match err {
            Error::InsufficientPoints { context, .. } => assert!(context.contains("[1, 50]")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn log_law_profile(kappa: f64, b: f64, lo: f64, hi: f64, n: usize) -> VelocityProfile {
        let pts = log_spaced(lo, hi, n)
            .into_iter()
            .map(|y| ProfilePoint::new(y, y.ln() / kappa + b).unwrap())
            .collect();
        VelocityProfile::new(meta(), pts).unwrap()
    }

    #[test]
    fn log_law_recovery() {
        for (kappa, b) in [(0.40, 5.1), (0.417, 5.84), (0.38, 4.1)] {
            let prof = log_law_profile(kappa, b, 100.0, 5000.0, 40);
            let fit = fit_log_law(&prof, Window::new(100.0, 5000.0).unwrap()).unwrap();
            assert_abs_diff_eq!(fit.kappa, kappa, epsilon = 1e-10);
            assert_abs_diff_eq!(fit.intercept_b, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn log_law_rejects_decreasing_velocity() {
        let pts: Vec<ProfilePoint> = (0..20)
            .map(|i| {
                let y = 100.0 * 1.2f64.powi(i);
                ProfilePoint::new(y, 30.0 - i as f64).unwrap()
            })
            .collect();
        let prof = VelocityProfile::new(meta(), pts).unwrap();
        let err = fit_log_law(&prof, Window::new(100.0, 1e5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonPhysicalFit(_)));
    }

    fn two_segment_profile(
        a: f64,
        alpha: f64,
        bp: f64,
        beta: f64,
        grid: &[f64],
    ) -> VelocityProfile {
        // Continuity at bp fixes the outer amplitude.
        let b2 = a * bp.powf(alpha - beta);
        let pts = grid
            .iter()
            .map(|&y| {
                let u = if y <= bp {
                    a * y.powf(alpha)
                } else {
                    b2 * y.powf(beta)
                };
                ProfilePoint::new(y, u).unwrap()
            })
            .collect();
        VelocityProfile::new(meta(), pts).unwrap()
    }

    /// Log-spaced grid that contains `anchor` as an exact grid point.
    fn anchored_grid(lo: f64, anchor: f64, hi: f64, n_below: usize, n_total: usize) -> Vec<f64> {
        let mut grid = log_spaced(lo, anchor, n_below);
        grid.extend(log_spaced(anchor, hi, n_total - n_below + 1).into_iter().skip(1));
        grid
    }

    #[test]
    fn broken_line_recovers_on_grid_breakpoint() {
        let grid = anchored_grid(100.0, 500.0, 10000.0, 20, 60);
        let prof = two_segment_profile(8.0, 0.16, 500.0, 0.10, &grid);
        let fit = fit_broken_line(&prof, 150.0, 5000.0, 100.0).unwrap();
        assert_eq!(fit.breakpoint_y_plus, 500.0);
        assert_abs_diff_eq!(fit.region1.exponent, 0.16, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.region2.exponent, 0.10, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.region1.amplitude, 8.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            fit.region2.amplitude,
            8.0 * 500.0f64.powf(0.06),
            epsilon = 1e-8
        );
        assert!(fit.slope_decreases_outward());
    }

    #[test]
    fn broken_line_off_grid_breakpoint_snaps_to_nearest() {
        // 500 is not a grid point here; the search lands on the log-nearest
        // neighbour of the construction breakpoint.
        let grid = log_spaced(100.0, 10000.0, 60);
        let prof = two_segment_profile(8.0, 0.16, 500.0, 0.10, &grid);
        let fit = fit_broken_line(&prof, 150.0, 5000.0, 100.0).unwrap();
        let nearest = grid
            .iter()
            .copied()
            .min_by(|a, b| {
                let da = (a.ln() - 500.0f64.ln()).abs();
                let db = (b.ln() - 500.0f64.ln()).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        assert_eq!(fit.breakpoint_y_plus, nearest);
    }

    #[test]
    fn broken_line_degenerate_single_law_ties_to_smallest() {
        let prof = power_profile(8.5, 0.14, 100.0, 10000.0, 50);
        let fit = fit_broken_line(&prof, 150.0, 5000.0, 100.0).unwrap();
        // Every candidate fits exactly; the tie goes to the smallest one.
        let first_candidate = prof
            .points()
            .iter()
            .enumerate()
            .find(|(i, p)| p.y_plus >= 150.0 && *i >= 2)
            .map(|(_, p)| p.y_plus)
            .unwrap();
        assert_eq!(fit.breakpoint_y_plus, first_candidate);
        assert_abs_diff_eq!(fit.region1.exponent, fit.region2.exponent, epsilon = 1e-10);
        assert!(fit.total_sse < 1e-20);
    }

    #[test]
    fn broken_line_no_valid_candidate() {
        let prof = power_profile(8.5, 0.14, 1.0, 50.0, 20);
        let err = fit_broken_line(&prof, 150.0, 5000.0, 100.0).unwrap_err();
        assert!(matches!(err, Error::NoValidBreakpoint { .. }));
    }

    #[test]
    fn broken_line_windows_share_breakpoint() {
        let grid = anchored_grid(100.0, 500.0, 10000.0, 20, 60);
        let prof = two_segment_profile(8.0, 0.16, 500.0, 0.10, &grid);
        let fit = fit_broken_line(&prof, 150.0, 5000.0, 100.0).unwrap();
        assert_eq!(fit.region1.window.hi, fit.breakpoint_y_plus);
        assert_eq!(fit.region2.window.lo, fit.breakpoint_y_plus);
    }
}

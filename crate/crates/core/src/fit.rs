//! Exponent estimation: the spatial decay exponent `b` from log-profile
//! least squares, the temporal exponent `2d` from a log-log variance fit,
//! and a moment-based `b` estimator through the kurtosis map.

use thiserror::Error;

use crate::ensemble::{even_central_moment, variance, EnsembleError};
use crate::theory::{self, TheoryError};
use crate::walk::Distribution;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {need} usable sites, found {got}")]
    InsufficientData { got: usize, need: usize },
    #[error("degenerate profile: {0}")]
    DegenerateProfile(&'static str),
    #[error("variance series needs at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("variance series point (t = {t}, var = {value}) must have t >= 1 and var > 0")]
    InvalidVariancePoint { t: f64, value: f64 },
    #[error("distribution has zero variance")]
    ZeroVariance,
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Result of fitting `ln P(x) = -δ|x|^b + κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialFit {
    pub b: f64,
    pub delta: f64,
    pub intercept: f64,
    pub stderr_b: f64,
    pub stderr_delta: f64,
    pub residual_rms: f64,
    pub points_used: usize,
}

/// Result of fitting `ln σ² = 2d·ln t + ln c²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalFit {
    pub two_d: f64,
    pub c_squared: f64,
    pub stderr_two_d: f64,
}

/// Moment-based estimate of the decay exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub b: f64,
    /// Measured excess kurtosis, before any clamping.
    pub phi: f64,
    /// Whether `phi` fell outside `[f(2), f(1)]` and was clamped.
    pub clamped: bool,
}

/// Default probability cutoff: sites at or below it are treated as
/// structural zeros and excluded from log-space fits.
pub const DEFAULT_MIN_PROB: f64 = 1e-6;

/// Default search interval for the decay exponent.
pub const DEFAULT_B_RANGE: (f64, f64) = (0.5, 3.5);

/// Fit the stretched-exponential log profile over the default `b` range.
pub fn fit_spatial_profile(dist: &Distribution, min_prob: f64) -> Result<SpatialFit, FitError> {
    fit_spatial_profile_in(dist, min_prob, DEFAULT_B_RANGE.0, DEFAULT_B_RANGE.1)
}

/// Fit `ln P(x) = -δ|x|^b + κ` to all sites with `P > min_prob`.
///
/// The outer 1-D problem in `b` is solved by a coarse scan (step 0.05)
/// followed by golden-section refinement to 1e-4; for each candidate `b` the
/// inner problem in `(δ, κ)` is ordinary linear least squares. Standard
/// errors come from the Gauss-Newton covariance of the full three-parameter
/// model at the optimum, so they are linearized (conditional) estimates.
pub fn fit_spatial_profile_in(
    dist: &Distribution,
    min_prob: f64,
    b_lo: f64,
    b_hi: f64,
) -> Result<SpatialFit, FitError> {
    assert!(b_lo > 0.0 && b_hi > b_lo, "bad b search range");
    let points: Vec<(f64, f64)> = dist
        .iter()
        .filter(|&(_, p)| p > min_prob)
        .map(|(x, p)| (x as f64, p.ln()))
        .collect();

    if points.len() <= 1 {
        return Err(FitError::DegenerateProfile(
            "all probability concentrated on one site",
        ));
    }
    if points.len() < 4 {
        return Err(FitError::InsufficientData {
            got: points.len(),
            need: 4,
        });
    }
    // lattice positions are unique, so >= 4 sites always span >= 2 distinct
    // |x| values and the inner problem is identifiable

    let rss_at = |b: f64| inner_least_squares(&points, b).2;

    // coarse pre-scan guards against local minima of the outer objective
    let steps = ((b_hi - b_lo) / 0.05).ceil() as usize;
    let mut best_k = 0;
    let mut best_rss = f64::INFINITY;
    for k in 0..=steps {
        let b = b_lo + (b_hi - b_lo) * k as f64 / steps as f64;
        let rss = rss_at(b);
        if rss < best_rss {
            best_rss = rss;
            best_k = k;
        }
    }
    let grid = (b_hi - b_lo) / steps as f64;
    let lo = (b_lo + grid * (best_k as f64 - 1.0)).max(b_lo);
    let hi = (b_lo + grid * (best_k as f64 + 1.0)).min(b_hi);
    let b = golden_min(&rss_at, lo, hi, 1e-4);

    let (delta, kappa, rss) = inner_least_squares(&points, b);
    if delta < 0.0 {
        return Err(FitError::DegenerateProfile("profile does not decay"));
    }

    let n = points.len();
    let (stderr_b, stderr_delta) = gauss_newton_errors(&points, b, delta, rss);
    Ok(SpatialFit {
        b,
        delta,
        intercept: kappa,
        stderr_b,
        stderr_delta,
        residual_rms: (rss / n as f64).sqrt(),
        points_used: n,
    })
}

/// Fit the log profile with the decay coefficient pinned to the measured
/// spread: `δ(b) = (a(b)/σ̂)^b`, where `σ̂` is the distribution's own standard
/// deviation and `a(b)` the profile family's scale. Only the exponent `b`
/// (and the free constant) remain, which keeps the fit off the flat `b`–`δ`
/// ridge that the unconstrained problem develops on localized profiles.
pub fn fit_spatial_profile_pinned(
    dist: &Distribution,
    min_prob: f64,
    b_lo: f64,
    b_hi: f64,
) -> Result<SpatialFit, FitError> {
    assert!(b_lo > 0.0 && b_hi > b_lo, "bad b search range");
    let points: Vec<(f64, f64)> = dist
        .iter()
        .filter(|&(_, p)| p > min_prob)
        .map(|(x, p)| (x as f64, p.ln()))
        .collect();
    if points.len() <= 1 {
        return Err(FitError::DegenerateProfile(
            "all probability concentrated on one site",
        ));
    }
    if points.len() < 4 {
        return Err(FitError::InsufficientData {
            got: points.len(),
            need: 4,
        });
    }
    let sigma = variance(dist)?.sqrt();
    if sigma <= 0.0 {
        return Err(FitError::ZeroVariance);
    }

    // the theory scale is defined on a bounded exponent domain
    let lo = b_lo.max(theory::B_MIN);
    let hi = b_hi.min(theory::B_MAX);
    let delta_of = |b: f64| -> f64 {
        let a = theory::scale_factor(b).expect("b stays inside the domain");
        (a / sigma).powf(b)
    };
    let n = points.len() as f64;
    let fit_at = |b: f64| -> (f64, f64, f64) {
        let delta = delta_of(b);
        let kappa = points
            .iter()
            .map(|&(x, y)| y + delta * x.abs().powf(b))
            .sum::<f64>()
            / n;
        let rss = points
            .iter()
            .map(|&(x, y)| {
                let r = y - (-delta * x.abs().powf(b) + kappa);
                r * r
            })
            .sum();
        (delta, kappa, rss)
    };
    let rss_at = |b: f64| fit_at(b).2;

    let steps = ((hi - lo) / 0.05).ceil() as usize;
    let mut best_k = 0;
    let mut best_rss = f64::INFINITY;
    for k in 0..=steps {
        let b = lo + (hi - lo) * k as f64 / steps as f64;
        let rss = rss_at(b);
        if rss < best_rss {
            best_rss = rss;
            best_k = k;
        }
    }
    let grid = (hi - lo) / steps as f64;
    let bracket_lo = (lo + grid * (best_k as f64 - 1.0)).max(lo);
    let bracket_hi = (lo + grid * (best_k as f64 + 1.0)).min(hi);
    let b = golden_min(&rss_at, bracket_lo, bracket_hi, 1e-4);
    let (delta, kappa, rss) = fit_at(b);

    // two-parameter (b, κ) linearized errors; δ inherits b's through the pin
    let h = 1e-5;
    let ddelta_db = (delta_of((b + h).min(hi)) - delta_of((b - h).max(lo)))
        / ((b + h).min(hi) - (b - h).max(lo));
    let mut jtj = [[0.0f64; 2]; 2];
    for &(x, _) in &points {
        let ax = x.abs();
        let u = ax.powf(b);
        let du_db = if ax > 0.0 { u * ax.ln() } else { 0.0 };
        let row = [-(ddelta_db * u + delta * du_db), 1.0];
        for i in 0..2 {
            for j in 0..2 {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    let dof = points.len() - 2;
    let s2 = rss / dof as f64;
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    let stderr_b = if det.abs() > 1e-300 {
        (s2 * jtj[1][1] / det).max(0.0).sqrt()
    } else {
        f64::NAN
    };
    Ok(SpatialFit {
        b,
        delta,
        intercept: kappa,
        stderr_b,
        stderr_delta: ddelta_db.abs() * stderr_b,
        residual_rms: (rss / n).sqrt(),
        points_used: points.len(),
    })
}

/// For fixed `b`, solve `y = -δ·|x|^b + κ` by least squares.
/// Returns `(δ, κ, rss)`.
fn inner_least_squares(points: &[(f64, f64)], b: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let u: Vec<f64> = points.iter().map(|&(x, _)| x.abs().powf(b)).collect();
    let u_mean = u.iter().sum::<f64>() / n;
    let y_mean = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut suu = 0.0;
    let mut suy = 0.0;
    for (&(_, y), &ui) in points.iter().zip(&u) {
        suu += (ui - u_mean) * (ui - u_mean);
        suy += (ui - u_mean) * (y - y_mean);
    }
    let slope = suy / suu;
    let kappa = y_mean - slope * u_mean;
    let rss: f64 = points
        .iter()
        .zip(&u)
        .map(|(&(_, y), &ui)| {
            let r = y - (slope * ui + kappa);
            r * r
        })
        .sum();
    (-slope, kappa, rss)
}

/// Linearized standard errors for `(b, δ)` from the 3-parameter Jacobian
/// at the optimum.
fn gauss_newton_errors(points: &[(f64, f64)], b: f64, delta: f64, rss: f64) -> (f64, f64) {
    let n = points.len();
    if n <= 3 {
        return (f64::NAN, f64::NAN);
    }
    // model m = -δu + κ with u = |x|^b; columns: ∂m/∂b, ∂m/∂δ, ∂m/∂κ
    let mut jtj = [[0.0f64; 3]; 3];
    for &(x, _) in points {
        let ax = x.abs();
        let u = ax.powf(b);
        let du_db = if ax > 0.0 { u * ax.ln() } else { 0.0 };
        let row = [-delta * du_db, -u, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    let s2 = rss / (n - 3) as f64;
    let cov = invert3(&jtj);
    match cov {
        Some(c) => (
            (s2 * c[0][0]).max(0.0).sqrt(),
            (s2 * c[1][1]).max(0.0).sqrt(),
        ),
        None => (f64::NAN, f64::NAN),
    }
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b, c, d) = (
                m[(j + 1) % 3][(i + 1) % 3],
                m[(j + 1) % 3][(i + 2) % 3],
                m[(j + 2) % 3][(i + 1) % 3],
                m[(j + 2) % 3][(i + 2) % 3],
            );
            out[i][j] = (a * d - b * c) * inv_det;
        }
    }
    Some(out)
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Ordinary least squares of `ln σ²` against `ln t`: the slope is `2d` and
/// the intercept is `ln c²`.
pub fn fit_variance_power_law(series: &[(f64, f64)]) -> Result<TemporalFit, FitError> {
    if series.len() < 3 {
        return Err(FitError::TooFewPoints {
            got: series.len(),
            need: 3,
        });
    }
    for &(t, var) in series {
        if t < 1.0 || var <= 0.0 || !t.is_finite() || !var.is_finite() {
            return Err(FitError::InvalidVariancePoint { t, value: var });
        }
    }
    let n = series.len() as f64;
    let logs: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let u_mean = logs.iter().map(|&(u, _)| u).sum::<f64>() / n;
    let y_mean = logs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut suu = 0.0;
    let mut suy = 0.0;
    for &(u, y) in &logs {
        suu += (u - u_mean) * (u - u_mean);
        suy += (u - u_mean) * (y - y_mean);
    }
    let slope = suy / suu;
    let intercept = y_mean - slope * u_mean;
    let rss: f64 = logs
        .iter()
        .map(|&(u, y)| {
            let r = y - (slope * u + intercept);
            r * r
        })
        .sum();
    let stderr = if series.len() > 2 {
        (rss / (n - 2.0) / suu).sqrt()
    } else {
        f64::NAN
    };
    Ok(TemporalFit {
        two_d: slope,
        c_squared: intercept.exp(),
        stderr_two_d: stderr,
    })
}

/// Estimate `b` from the excess kurtosis `φ = m₄/m₂² - 3` of a distribution,
/// inverting the theory map on `[1, 2]`. Values of `φ` outside `[f(2), f(1)]`
/// are clamped before inversion and flagged.
pub fn estimate_b_from_moments(dist: &Distribution) -> Result<MomentEstimate, FitError> {
    let m2 = even_central_moment(dist, 1)?;
    if m2 <= 0.0 {
        return Err(FitError::ZeroVariance);
    }
    let m4 = even_central_moment(dist, 2)?;
    let phi = m4 / (m2 * m2) - 3.0;
    let clamped_phi = phi.clamp(0.0, 3.0);
    let b = theory::b_from_phi(clamped_phi)?;
    Ok(MomentEstimate {
        b,
        phi,
        clamped: clamped_phi != phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::TheoryProfile;

    /// Normalized lattice distribution `P(x) ∝ exp(-δ|x|^b)` on the even
    /// parity sites of a walk of `t` steps.
    fn synthetic_parity_profile(b: f64, delta: f64, t: usize) -> Distribution {
        let half_width = t;
        let mut probs = vec![0.0; 2 * t + 1];
        let mut total = 0.0;
        for x in (-(t as i64)..=t as i64).filter(|x| (x + t as i64) % 2 == 0) {
            let v = (-delta * (x.abs() as f64).powf(b)).exp();
            probs[(x + t as i64) as usize] = v;
            total += v;
        }
        for p in &mut probs {
            *p /= total;
        }
        Distribution::from_probs(half_width, probs).unwrap()
    }

    /// Fine-grid lattice discretization of a continuous profile; `sigma` is
    /// in lattice units so large values emulate a fine grid.
    fn fine_grid_profile(b: f64, sigma: f64, half_width: usize) -> Distribution {
        let profile = TheoryProfile::new(b, sigma).unwrap();
        let raw: Vec<f64> = (-(half_width as i64)..=half_width as i64)
            .map(|x| profile.pdf(x as f64))
            .collect();
        let total: f64 = raw.iter().sum();
        let probs = raw.into_iter().map(|p| p / total).collect();
        Distribution::from_probs(half_width, probs).unwrap()
    }

    #[test]
    fn recovers_discrete_gaussian() {
        let sigma = 4.0;
        let delta = 1.0 / (2.0 * sigma * sigma);
        let dist = synthetic_parity_profile(2.0, delta, 20);
        let fit = fit_spatial_profile(&dist, 1e-12).unwrap();
        assert!((fit.b - 2.0).abs() < 0.01, "b = {}", fit.b);
        assert!(
            (fit.delta - delta).abs() < 0.01 * delta,
            "delta = {}",
            fit.delta
        );
        assert!(fit.residual_rms < 1e-6);
    }

    #[test]
    fn recovers_discrete_laplace() {
        let dist = synthetic_parity_profile(1.0, 0.25, 20);
        let fit = fit_spatial_profile(&dist, 1e-12).unwrap();
        assert!((fit.b - 1.0).abs() < 0.01, "b = {}", fit.b);
        assert!((fit.delta - 0.25).abs() < 0.0025, "delta = {}", fit.delta);
    }

    #[test]
    fn model_class_recovery_within_one_percent() {
        for &(b, delta) in &[
            (1.0, 0.8),
            (1.2, 0.3),
            (1.5, 0.17),
            (1.8, 0.08),
            (2.0, 0.03),
        ] {
            let dist = synthetic_parity_profile(b, delta, 20);
            let fit = fit_spatial_profile(&dist, 1e-12).unwrap();
            assert!((fit.b - b).abs() < 0.01 * b, "b* = {b}, b = {}", fit.b);
            assert!(
                (fit.delta - delta).abs() < 0.01 * delta,
                "delta* = {delta}, delta = {}",
                fit.delta
            );
        }
    }

    #[test]
    fn scale_covariance_of_delta() {
        // rescaling sigma -> lambda*sigma multiplies delta by lambda^-b
        let b = 1.5;
        let (sigma, lambda) = (3.0, 1.7);
        let delta1 = (1.0f64 / sigma).powf(b);
        let delta2 = (1.0f64 / (lambda * sigma)).powf(b);
        let fit1 = fit_spatial_profile(&synthetic_parity_profile(b, delta1, 20), 1e-12).unwrap();
        let fit2 = fit_spatial_profile(&synthetic_parity_profile(b, delta2, 20), 1e-12).unwrap();
        assert!((fit1.b - fit2.b).abs() < 1e-3);
        let ratio = fit2.delta / fit1.delta;
        assert!((ratio - lambda.powf(-b)).abs() < 0.01 * lambda.powf(-b));
    }

    #[test]
    fn point_mass_is_degenerate() {
        let mut probs = vec![0.0; 41];
        probs[0] = 1.0;
        let dist = Distribution::from_probs(20, probs).unwrap();
        assert!(matches!(
            fit_spatial_profile(&dist, 1e-6),
            Err(FitError::DegenerateProfile(_))
        ));
    }

    #[test]
    fn too_few_sites_is_insufficient_data() {
        let dist = Distribution::from_probs(2, vec![0.3, 0.0, 0.4, 0.0, 0.3]).unwrap();
        assert!(matches!(
            fit_spatial_profile(&dist, 1e-6),
            Err(FitError::InsufficientData { got: 3, need: 4 })
        ));
    }

    #[test]
    fn two_site_support_is_insufficient() {
        let dist = Distribution::from_probs(3, vec![0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.75]).unwrap();
        assert!(matches!(
            fit_spatial_profile(&dist, 1e-6),
            Err(FitError::InsufficientData { got: 2, need: 4 })
        ));
    }

    #[test]
    fn power_law_fit_is_exact_on_power_laws() {
        let series: Vec<(f64, f64)> = [5.0, 8.0, 11.0, 14.0, 17.0, 20.0]
            .iter()
            .map(|&t| (t, t))
            .collect();
        let fit = fit_variance_power_law(&series).unwrap();
        assert!((fit.two_d - 1.0).abs() < 1e-12);
        assert!((fit.c_squared - 1.0).abs() < 1e-12);
        assert!(fit.stderr_two_d < 1e-12);

        let series: Vec<(f64, f64)> = [5.0f64, 8.0, 11.0, 14.0, 17.0, 20.0]
            .iter()
            .map(|&t| (t, 4.0 * t.sqrt()))
            .collect();
        let fit = fit_variance_power_law(&series).unwrap();
        assert!((fit.two_d - 0.5).abs() < 1e-12);
        assert!((fit.c_squared - 4.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_fit_rejects_bad_series() {
        assert!(matches!(
            fit_variance_power_law(&[(5.0, 1.0), (8.0, 2.0)]),
            Err(FitError::TooFewPoints { got: 2, need: 3 })
        ));
        assert!(matches!(
            fit_variance_power_law(&[(5.0, 1.0), (8.0, 0.0), (11.0, 2.0)]),
            Err(FitError::InvalidVariancePoint { .. })
        ));
        assert!(fit_variance_power_law(&[(0.5, 1.0), (8.0, 1.0), (11.0, 2.0)]).is_err());
    }

    #[test]
    fn pinned_fit_recovers_profile_family_members() {
        // delta is not free here: it must emerge from the measured spread,
        // so recovery checks the whole (b, sigma, a) relation at once
        for &b in &[1.0, 1.5, 2.0] {
            let profile = TheoryProfile::new(b, 30.0).unwrap();
            let dist = fine_grid_profile(b, 30.0, 500);
            let fit = fit_spatial_profile_pinned(&dist, 1e-12, 0.5, 3.5).unwrap();
            assert!((fit.b - b).abs() < 0.01, "b* = {b}, b = {}", fit.b);
            let delta = profile.delta();
            assert!(
                (fit.delta - delta).abs() < 0.02 * delta,
                "b* = {b}: delta* = {delta}, delta = {}",
                fit.delta
            );
        }
        // on the coarse parity lattice of a 20-step walk the measured spread
        // carries discretization bias, so recovery is looser
        let profile = TheoryProfile::new(1.0, 4.0).unwrap();
        let dist = synthetic_parity_profile(1.0, profile.delta(), 20);
        let fit = fit_spatial_profile_pinned(&dist, 1e-12, 0.5, 3.5).unwrap();
        assert!((fit.b - 1.0).abs() < 0.06, "b = {}", fit.b);
    }

    #[test]
    fn pinned_fit_rejects_degenerate_input() {
        let mut probs = vec![0.0; 41];
        probs[0] = 1.0;
        let dist = Distribution::from_probs(20, probs).unwrap();
        assert!(matches!(
            fit_spatial_profile_pinned(&dist, 1e-6, 0.5, 3.5),
            Err(FitError::DegenerateProfile(_))
        ));
    }

    #[test]
    fn moment_estimator_on_gaussian_and_laplace() {
        let gauss = fine_grid_profile(2.0, 30.0, 400);
        let est = estimate_b_from_moments(&gauss).unwrap();
        assert!((est.b - 2.0).abs() < 0.02, "b = {}", est.b);
        assert!(est.phi.abs() < 0.01);

        let laplace = fine_grid_profile(1.0, 30.0, 500);
        let est = estimate_b_from_moments(&laplace).unwrap();
        assert!((est.b - 1.0).abs() < 0.02, "b = {}", est.b);
        assert!((est.phi - 3.0).abs() < 0.05, "phi = {}", est.phi);
    }

    #[test]
    fn moment_estimator_recovers_intermediate_b() {
        let dist = fine_grid_profile(1.5, 30.0, 450);
        let est = estimate_b_from_moments(&dist).unwrap();
        assert!((est.b - 1.5).abs() < 0.05, "b = {}", est.b);
        assert!(!est.clamped);
    }

    #[test]
    fn moment_estimator_flags_clamping() {
        // sub-Gaussian (b > 2) data has negative excess kurtosis
        let dist = fine_grid_profile(3.0, 30.0, 300);
        let est = estimate_b_from_moments(&dist).unwrap();
        assert!(est.clamped);
        assert!((est.b - 2.0).abs() < 1e-6);
        assert!(est.phi < 0.0);
    }

    #[test]
    fn moment_estimator_rejects_zero_variance() {
        let mut probs = vec![0.0; 9];
        probs[4] = 1.0;
        let dist = Distribution::from_probs(4, probs).unwrap();
        assert!(matches!(
            estimate_b_from_moments(&dist),
            Err(FitError::ZeroVariance)
        ));
    }

    #[test]
    fn estimators_agree_on_noiseless_profiles() {
        // grid spacing 0.01 sigma over +/- 12 sigma
        for &b in &[1.0, 1.25, 1.5, 1.75, 2.0] {
            let dist = fine_grid_profile(b, 100.0, 1200);
            let profile_fit = fit_spatial_profile(&dist, 1e-9).unwrap();
            let moment_fit = estimate_b_from_moments(&dist).unwrap();
            assert!(
                (moment_fit.b - b).abs() < 0.02,
                "b = {b}: moment estimate {}",
                moment_fit.b
            );
            assert!(
                (profile_fit.b - moment_fit.b).abs() < 0.05,
                "b = {b}: profile {} vs moments {}",
                profile_fit.b,
                moment_fit.b
            );
        }
    }
}

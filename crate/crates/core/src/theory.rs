//! Continuous theory of anomalous diffusion profiles: the stretched
//! exponential family, its Gamma-function moments, the small-k expansion of
//! the characteristic function, and the kurtosis map `f(b)` with its
//! monotone inverse.
//!
//! The family is `P(x) = ab/(2σΓ(1/b)) · exp(-|ax/σ|^b)` with
//! `a = sqrt(Γ(3/b)/Γ(1/b))`, which pins the second moment to `σ²`. The
//! excess kurtosis `f(b) = Γ(5/b)Γ(1/b)/Γ(3/b)² - 3` decreases strictly from
//! `f(1) = 3` (Laplace) to `f(2) = 0` (Gaussian), so `b` can be read off a
//! measured fourth moment by inversion.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("decay exponent b must lie in [{lo}, {hi}], got {b}")]
    ExponentOutOfDomain { b: f64, lo: f64, hi: f64 },
    #[error("phi must lie in [{lo}, {hi}] = [f(2), f(1)], got {phi}")]
    PhiOutOfRange { phi: f64, lo: f64, hi: f64 },
    #[error("standard deviation must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("expansion validated only for |k|·sigma <= {max}, got {got}")]
    WavenumberOutOfRange { got: f64, max: f64 },
}

/// Domain of the decay exponent handled by this module.
pub const B_MIN: f64 = 0.5;
pub const B_MAX: f64 = 3.5;

/// Interval on which `f` is inverted.
pub const B_INVERSE_LO: f64 = 1.0;
pub const B_INVERSE_HI: f64 = 2.0;

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

const GAMMA_R: f64 = 10.900511;
#[allow(clippy::excessive_precision)] // published coefficients kept verbatim
const GAMMA_DK: &[f64] = &[
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

/// Natural log of the Gamma function, Lanczos approximation (Pugh 2004),
/// accurate to ~16 significant digits for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |s, t| s + t.1 / (t.0 as f64 - x));
        LN_PI
            - (std::f64::consts::PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + GAMMA_R) / std::f64::consts::E).ln()
    } else {
        let s = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |s, t| s + t.1 / (x + t.0 as f64 - 1.0));
        s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + GAMMA_R) / std::f64::consts::E).ln()
    }
}

fn check_b(b: f64) -> Result<(), TheoryError> {
    if !b.is_finite() || !(B_MIN..=B_MAX).contains(&b) {
        return Err(TheoryError::ExponentOutOfDomain {
            b,
            lo: B_MIN,
            hi: B_MAX,
        });
    }
    Ok(())
}

/// Excess kurtosis of the profile family:
/// `f(b) = Γ(5/b)Γ(1/b)/Γ(3/b)² - 3`, via log-Gamma differences.
pub fn f_of_b(b: f64) -> Result<f64, TheoryError> {
    check_b(b)?;
    Ok((ln_gamma(5.0 / b) + ln_gamma(1.0 / b) - 2.0 * ln_gamma(3.0 / b)).exp() - 3.0)
}

/// Profile scale `a = sqrt(Γ(3/b)/Γ(1/b))`, which pins the family's second
/// moment to `σ²`.
pub fn scale_factor(b: f64) -> Result<f64, TheoryError> {
    check_b(b)?;
    Ok((0.5 * (ln_gamma(3.0 / b) - ln_gamma(1.0 / b))).exp())
}

/// Invert `f` on `[1, 2]` by bisection to `|f(b) - phi| < 1e-10`.
pub fn b_from_phi(phi: f64) -> Result<f64, TheoryError> {
    if !phi.is_finite() || !(0.0..=3.0).contains(&phi) {
        return Err(TheoryError::PhiOutOfRange {
            phi,
            lo: 0.0,
            hi: 3.0,
        });
    }
    let (mut lo, mut hi) = (B_INVERSE_LO, B_INVERSE_HI);
    // f is strictly decreasing: f(lo) >= phi >= f(hi)
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let val = f_of_b(mid).expect("mid stays inside the domain");
        if (val - phi).abs() < 1e-12 {
            return Ok(mid);
        }
        if val > phi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A stretched-exponential profile with unit-normalized density and
/// standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryProfile {
    b: f64,
    sigma: f64,
    a: f64,
}

impl TheoryProfile {
    pub fn new(b: f64, sigma: f64) -> Result<TheoryProfile, TheoryError> {
        let a = scale_factor(b)?;
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(TheoryError::NonPositiveSigma(sigma));
        }
        Ok(TheoryProfile { b, sigma, a })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Scale factor `a = sqrt(Γ(3/b)/Γ(1/b))`.
    pub fn scale_a(&self) -> f64 {
        self.a
    }

    /// Decay coefficient `δ = (a/σ)^b` of the log profile.
    pub fn delta(&self) -> f64 {
        (self.a / self.sigma).powf(self.b)
    }

    /// Density `ab/(2σΓ(1/b)) · exp(-|ax/σ|^b)`.
    pub fn pdf(&self, x: f64) -> f64 {
        let norm = self.a * self.b / (2.0 * self.sigma) * (-ln_gamma(1.0 / self.b)).exp();
        norm * (-(self.a * x / self.sigma).abs().powf(self.b)).exp()
    }

    /// Closed-form even moment `E(x^{2n}) = Γ((2n+1)/b)/Γ(1/b) · (σ/a)^{2n}`.
    pub fn even_moment(&self, n: u32) -> f64 {
        assert!(n >= 1, "moment order starts at 2 (n = 1)");
        let ratio = (ln_gamma((2.0 * n as f64 + 1.0) / self.b) - ln_gamma(1.0 / self.b)).exp();
        ratio * (self.sigma / self.a).powi(2 * n as i32)
    }

    /// Truncation radius for quadrature; the tail beyond it is negligible
    /// for `b ≥ 1` and still below 1e-10 at the shallow end of the domain.
    pub fn support_radius(&self) -> f64 {
        12.0 * self.sigma * (2.0 / self.b).max(1.0)
    }

    /// Characteristic function `Φ(k) = ∫ e^{-ikx} pdf dx` by quadrature
    /// (the density is even, so the transform is real).
    pub fn characteristic_function(&self, k: f64) -> f64 {
        let radius = self.support_radius();
        2.0 * adaptive_simpson(&|x: f64| (k * x).cos() * self.pdf(x), 0.0, radius, 1e-10)
    }
}

/// Result of comparing the quadrature characteristic function against its
/// fourth-order Taylor series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCheck {
    pub quadrature: f64,
    pub series: f64,
    pub residual: f64,
}

/// Evaluate `Φ(k)` two ways: by quadrature and by the series
/// `1 - σ²k²/2 + [Γ(5/b)Γ(1/b)/Γ(3/b)²]σ⁴k⁴/24`. The residual is of order
/// `(kσ)⁶` inside the validated range `|k|σ ≤ 0.5`.
pub fn characteristic_expansion_check(
    profile: &TheoryProfile,
    k: f64,
) -> Result<ExpansionCheck, TheoryError> {
    let ks = (k * profile.sigma()).abs();
    if ks > 0.5 {
        return Err(TheoryError::WavenumberOutOfRange { got: ks, max: 0.5 });
    }
    let quadrature = profile.characteristic_function(k);
    let kurtosis_ratio = f_of_b(profile.b())? + 3.0;
    let s2 = profile.sigma() * profile.sigma();
    let series = 1.0 - s2 * k * k / 2.0 + kurtosis_ratio * s2 * s2 * k.powi(4) / 24.0;
    Ok(ExpansionCheck {
        quadrature,
        series,
        residual: quadrature - series,
    })
}

/// Integrated Taylor coefficients of the evolution generator at fixed time,
/// as pinned by matching the characteristic function: the second-order
/// integral equals `σ(t)²` and the fourth-order one equals `-f(b)·σ(t)⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMoments {
    pub lambda2_integral: f64,
    pub lambda4_integral: f64,
    pub phi: f64,
}

pub fn generator_moments(b: f64, sigma_of_t: f64) -> Result<GeneratorMoments, TheoryError> {
    if !sigma_of_t.is_finite() || sigma_of_t <= 0.0 {
        return Err(TheoryError::NonPositiveSigma(sigma_of_t));
    }
    let phi = f_of_b(b)?;
    let s2 = sigma_of_t * sigma_of_t;
    Ok(GeneratorMoments {
        lambda2_integral: s2,
        lambda4_integral: -phi * s2 * s2,
        phi,
    })
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

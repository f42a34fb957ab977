//! Special functions used by the estimator and the decision layer.
//!
//! Everything here is a standard method: Lanczos log-gamma, the Gauss
//! hypergeometric series with an Euler transformation for the large-parameter
//! regime, and the complementary error function with its inverse. `erfc`
//! itself is delegated to `libm`; the inverse is a rational seed polished by
//! Newton steps on the forward function.

/// Lanczos coefficients, g = 7, n = 9 (Godfrey's tableau).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive real arguments.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π/sin(πx)
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t
        + libm::log(acc)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Inverse complementary error function on (0, 2).
///
/// Seeded from the Acklam inverse-normal approximation and refined with
/// Newton iterations on `erfc`, which brings the result to machine accuracy
/// down to y ~ 1e-300.
pub fn erfc_inv(y: f64) -> f64 {
    assert!(y > 0.0 && y < 2.0, "erfc_inv domain is (0, 2), got {y}");
    if y == 1.0 {
        return 0.0;
    }
    // erfc(x) = y  <=>  x = -Phi^{-1}(y/2) / sqrt(2)
    let mut x = -inverse_normal_cdf(0.5 * y) * core::f64::consts::FRAC_1_SQRT_2;
    // Newton on f(x) = erfc(x) - y, f'(x) = -2/sqrt(pi) exp(-x^2).
    // Work with the log-residual for tiny y to keep the step well scaled.
    for _ in 0..4 {
        let f = libm::erfc(x) - y;
        if f == 0.0 {
            break;
        }
        let df = -2.0 / libm::sqrt(core::f64::consts::PI) * libm::exp(-x * x);
        x -= f / df;
    }
    x
}

/// Acklam's rational approximation to the standard normal quantile.
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    debug_assert!(p > 0.0 && p < 1.0);
    if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

/// Error raised when the hypergeometric series fails to converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeometricError;

impl core::fmt::Display for HypergeometricError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "hypergeometric series did not converge")
    }
}

const HYP_TOL: f64 = 1e-14;
const HYP_MAX_TERMS: usize = 1_000_000;

/// Log of the (positive) Gauss series 2F1(a, b; c; z) for a, b >= 0, c > 0,
/// 0 <= z <= 1/2.
///
/// When a + b > c the Euler transformation
/// 2F1(a,b;c;z) = (1-z)^{c-a-b} 2F1(c-a, c-b; c; z) is applied first so the
/// summed series has bounded parameters. Terms are accumulated with a running
/// scale so intermediate peaks cannot overflow.
fn ln_hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64, HypergeometricError> {
    if !(0.0..=0.5).contains(&z) || c <= 0.0 || a < 0.0 || b < 0.0 {
        return Err(HypergeometricError);
    }
    if a + b > c && c - a >= 0.0 && c - b >= 0.0 {
        // keeps the summed parameters small; the direct series below still
        // converges without it, only with a larger intermediate peak
        return Ok((c - a - b) * libm::log1p(-z) + ln_hyp2f1(c - a, c - b, c, z)?);
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0f64;
    for k in 0..HYP_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) * z / ((c + kf) * (kf + 1.0));
        sum += term;
        if sum > 1e250 {
            ln_scale += libm::log(sum);
            term /= sum;
            sum = 1.0;
        }
        if term.abs() < HYP_TOL * sum.abs() {
            return Ok(ln_scale + libm::log(sum));
        }
    }
    Err(HypergeometricError)
}

/// Log of the regularized Gauss hypergeometric 2F1(a, b; c; z) / Γ(c).
pub fn ln_hyp2f1_regularized(
    a: f64,
    b: f64,
    c: f64,
    z: f64,
) -> Result<f64, HypergeometricError> {
    Ok(ln_hyp2f1(a, b, c, z)? - ln_gamma(c))
}

/// Regularized Gauss hypergeometric function 2F1(a, b; c; z) / Γ(c).
///
/// Valid for a, b >= 0, c > 0 and z in [0, 1/2], the regime produced by
/// non-negative coincidence totals.
pub fn hyp2f1_regularized(a: f64, b: f64, c: f64, z: f64) -> Result<f64, HypergeometricError> {
    Ok(libm::exp(ln_hyp2f1_regularized(a, b, c, z)?))
}

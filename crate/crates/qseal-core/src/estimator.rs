//! Bayesian estimation of the correlation parameter from coincidence totals.
//!
//! The posterior over the coincidence-type probabilities given totals
//! κ = (k_sd, k_ss, k_ds, k_dd) is, up to normalization,
//!
//! ```text
//! p_sd^k_sd  p_ds^k_ds  p_dd^k_dd  (p_ss/4)^k_ss / (1 - p_ss/4)^(k_ss+1)
//! ```
//!
//! on the probability simplex. The same-port same-polarization factor is the
//! closed form of the geometric tail sum over the unobserved true event count
//! (one arm is unmonitored and the detectors are not number-resolving, so
//! only a quarter of those events is recorded).
//!
//! The posterior mean of p_dd - p_ds has the closed form
//!
//! ```text
//! E_κ = (k_dd - k_ds) · F(5+n) / F(4+n)
//! ```
//!
//! with F(c) = 2F̃1(1+k_ss, 1+k_ss; c; 1/4) and n the κ total, and the second
//! moment follows from the same Dirichlet-moment recursion:
//!
//! ```text
//! (E²)_κ = [(k_dd - k_ds)² + k_dd + k_ds + 2] · F(6+n) / F(4+n)
//! ```
//!
//! Totals are real-valued (the efficiency correction is fractional); the
//! closed forms extend through the gamma function and are validated against
//! [`oracle_estimate`], a deterministic tanh-sinh quadrature over the simplex
//! that never touches the hypergeometric path.

use crate::special::{self, HypergeometricError};
use crate::wire::KappaTotals;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorError {
    /// Probabilities not on the simplex.
    OffSimplex,
    /// Negative coincidence total.
    NegativeKappa,
    /// Hypergeometric series failure (out-of-domain parameters).
    Hypergeometric,
    /// Oracle quadrature exceeded its resolution budget.
    ResolutionBudget,
}

impl core::fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::OffSimplex => write!(f, "probabilities must lie on the simplex"),
            Self::NegativeKappa => write!(f, "coincidence totals must be non-negative"),
            Self::Hypergeometric => write!(f, "hypergeometric evaluation failed"),
            Self::ResolutionBudget => write!(f, "oracle quadrature budget exceeded"),
        }
    }
}

impl From<HypergeometricError> for EstimatorError {
    fn from(_: HypergeometricError) -> Self {
        EstimatorError::Hypergeometric
    }
}

/// Windowed correlation estimate: posterior mean, posterior standard
/// deviation, and the total normalized coincidences it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub e_kappa: f64,
    pub sigma_kappa: f64,
    pub n: f64,
    pub window_id: u32,
}

impl Estimate {
    pub fn with_window(self, window_id: u32) -> Self {
        Self { window_id, ..self }
    }
}

fn check_kappa(kappa: &KappaTotals) -> Result<(), EstimatorError> {
    let ok = [kappa.k_sd, kappa.k_ss, kappa.k_ds, kappa.k_dd]
        .iter()
        .all(|k| k.is_finite() && *k >= 0.0);
    if ok {
        Ok(())
    } else {
        Err(EstimatorError::NegativeKappa)
    }
}

/// Unnormalized posterior density at a point of the probability simplex.
///
/// `probs` is (p_sd, p_ss, p_ds, p_dd); the four entries must be
/// non-negative and sum to one within 1e-9.
pub fn posterior_density(probs: [f64; 4], kappa: &KappaTotals) -> Result<f64, EstimatorError> {
    check_kappa(kappa)?;
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|p| *p < 0.0) || libm::fabs(sum - 1.0) > 1e-9 {
        return Err(EstimatorError::OffSimplex);
    }
    let [p_sd, p_ss, p_ds, p_dd] = probs;
    let ks = [kappa.k_sd, kappa.k_ds, kappa.k_dd];
    let ps = [p_sd, p_ds, p_dd];
    let mut ln = 0.0f64;
    for (&k, &p) in ks.iter().zip(&ps) {
        if k > 0.0 {
            if p == 0.0 {
                return Ok(0.0);
            }
            ln += k * libm::log(p);
        }
    }
    if kappa.k_ss > 0.0 {
        if p_ss == 0.0 {
            return Ok(0.0);
        }
        ln += kappa.k_ss * libm::log(p_ss / 4.0);
    }
    ln -= (kappa.k_ss + 1.0) * libm::log1p(-p_ss / 4.0);
    Ok(libm::exp(ln))
}

/// Posterior mean and standard deviation of p_dd - p_ds via the regularized
/// hypergeometric closed form.
pub fn estimate_correlation(kappa: &KappaTotals) -> Result<Estimate, EstimatorError> {
    check_kappa(kappa)?;
    let n = kappa.total();
    let a = 1.0 + kappa.k_ss;
    let ln_f4 = special::ln_hyp2f1_regularized(a, a, 4.0 + n, 0.25)?;
    let ln_f5 = special::ln_hyp2f1_regularized(a, a, 5.0 + n, 0.25)?;
    let ln_f6 = special::ln_hyp2f1_regularized(a, a, 6.0 + n, 0.25)?;
    let diff = kappa.k_dd - kappa.k_ds;
    let mean = diff * libm::exp(ln_f5 - ln_f4);
    let second = (diff * diff + kappa.k_dd + kappa.k_ds + 2.0) * libm::exp(ln_f6 - ln_f4);
    let var = second - mean * mean;
    Ok(Estimate {
        e_kappa: mean.clamp(-1.0, 1.0),
        sigma_kappa: libm::sqrt(var.max(0.0)),
        n,
        window_id: 0,
    })
}

/// The regularized Gauss hypergeometric function, re-exported at the
/// estimator surface since it is the estimator's working special function.
pub fn hyp2f1_regularized(a: f64, b: f64, c: f64, z: f64) -> Result<f64, EstimatorError> {
    Ok(special::hyp2f1_regularized(a, b, c, z)?)
}

/// Gaussian approximation to the sampling distribution of the estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    pub center: f64,
    pub sigma: f64,
}

/// Normal density in the estimate, centered on the operating value.
pub fn gaussian_model(center: f64, sigma: f64) -> GaussianModel {
    assert!(sigma > 0.0, "sigma must be positive");
    GaussianModel { center, sigma }
}

impl GaussianModel {
    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        libm::exp(-0.5 * z * z) / (self.sigma * libm::sqrt(2.0 * core::f64::consts::PI))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.center) / (self.sigma * libm::sqrt(2.0));
        0.5 * special::erfc(-z)
    }
}

// ---------------------------------------------------------------------------
// Quadrature oracle
// ---------------------------------------------------------------------------

/// tanh-sinh nodes and weights on (0, 1). Handles the algebraic endpoint
/// behavior of fractional-power densities at near machine accuracy.
/// k * ln(x) with the 0 * ln(0) = 0 convention for zero exponents.
fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * libm::log(x)
    }
}

fn tanh_sinh_nodes() -> alloc::vec::Vec<(f64, f64)> {
    let h = 1.0 / 32.0;
    let half_pi = 0.5 * core::f64::consts::PI;
    let mut nodes = alloc::vec::Vec::new();
    let mut k = 0i64;
    loop {
        let t = k as f64 * h;
        let s = libm::sinh(t);
        let c = libm::cosh(t);
        let ch = libm::cosh(half_pi * s);
        let w = h * half_pi * c / (ch * ch);
        if w < 1e-17 && k != 0 {
            break;
        }
        let x = 0.5 * (1.0 + libm::tanh(half_pi * s));
        nodes.push((x, w));
        if k > 0 {
            nodes.push((1.0 - x, w));
        }
        k += 1;
        if k > 10_000 {
            break;
        }
    }
    nodes
}

/// Streaming scaled accumulator for three simultaneous moments; keeps a
/// common log-scale so huge densities cannot overflow.
struct MomentAcc {
    ln_scale: f64,
    m: [f64; 3],
}

impl MomentAcc {
    fn new() -> Self {
        Self {
            ln_scale: f64::NEG_INFINITY,
            m: [0.0; 3],
        }
    }

    fn add(&mut self, ln_factor: f64, s: [f64; 3]) {
        if !ln_factor.is_finite() {
            return;
        }
        if ln_factor > self.ln_scale {
            let shrink = libm::exp(self.ln_scale - ln_factor);
            for v in &mut self.m {
                *v *= shrink;
            }
            self.ln_scale = ln_factor;
            for (v, si) in self.m.iter_mut().zip(&s) {
                *v += si;
            }
        } else {
            let grow = libm::exp(ln_factor - self.ln_scale);
            for (v, si) in self.m.iter_mut().zip(&s) {
                *v += grow * si;
            }
        }
    }
}

/// Deterministic quadrature of the posterior moments of p_dd - p_ds over the
/// simplex; the independent check on [`estimate_correlation`].
///
/// Coordinates: u = p_ss on (0,1), then p_ds = (1-u)x and
/// p_dd = (1-u)(1-x)y with x, y on (0,1); p_sd takes the remainder. The
/// Jacobian is (1-u)²(1-x). Intended for test-scale totals (n ≤ 1e4).
pub fn oracle_estimate(kappa: &KappaTotals) -> Result<Estimate, EstimatorError> {
    check_kappa(kappa)?;
    let n = kappa.total();
    if n > 1.0e4 {
        return Err(EstimatorError::ResolutionBudget);
    }
    let nodes = tanh_sinh_nodes();
    let (k_sd, k_ss, k_ds, k_dd) = (kappa.k_sd, kappa.k_ss, kappa.k_ds, kappa.k_dd);

    // y-direction table: y^k_dd (1-y)^k_sd together with its weight, offset
    // by the table maximum so inner sums stay in range.
    let ln_y: alloc::vec::Vec<f64> = nodes
        .iter()
        .map(|&(y, w)| xlogy(k_dd, y) + xlogy(k_sd, 1.0 - y) + libm::log(w))
        .collect();
    let off_y = ln_y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let table_y: alloc::vec::Vec<(f64, f64)> = nodes
        .iter()
        .zip(&ln_y)
        .map(|(&(y, _), &ln)| (y, libm::exp(ln - off_y)))
        .collect();

    let mut acc = MomentAcc::new();
    for &(u, wu) in &nodes {
        let r1 = 1.0 - u;
        let ln_u = xlogy(k_ss, u / 4.0) - (k_ss + 1.0) * libm::log1p(-u / 4.0)
            + libm::log(wu)
            // (1-u)^(k_ds + k_dd + k_sd) from scaled coordinates plus
            // (1-u)^2 from the Jacobian
            + (k_ds + k_dd + k_sd + 2.0) * libm::log(r1);
        for &(x, wx) in &nodes {
            let v = r1 * x; // p_ds
            let r2 = r1 * (1.0 - x);
            let ln_factor = ln_u
                + xlogy(k_ds, x)
                + (k_dd + k_sd + 1.0) * libm::log(1.0 - x) // +1 from the Jacobian
                + libm::log(wx)
                + off_y;
            let mut s = [0.0f64; 3];
            for &(y, ty) in &table_y {
                let diff = r2 * y - v; // p_dd - p_ds
                s[0] += ty;
                s[1] += ty * diff;
                s[2] += ty * diff * diff;
            }
            acc.add(ln_factor, s);
        }
    }
    if acc.m[0] <= 0.0 {
        return Err(EstimatorError::ResolutionBudget);
    }
    let mean = acc.m[1] / acc.m[0];
    let second = acc.m[2] / acc.m[0];
    Ok(Estimate {
        e_kappa: mean,
        sigma_kappa: libm::sqrt((second - mean * mean).max(0.0)),
        n,
        window_id: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(k_sd: f64, k_ss: f64, k_ds: f64, k_dd: f64) -> KappaTotals {
        KappaTotals::new(k_sd, k_ss, k_ds, k_dd)
    }

    #[test]
    fn zero_kappa_is_symmetric() {
        let est = estimate_correlation(&kappa(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(est.e_kappa, 0.0);
        assert!(est.sigma_kappa > 0.25 && est.sigma_kappa <= 1.0);
        let oracle = oracle_estimate(&kappa(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(oracle.e_kappa.abs() < 1e-10);
        assert!((oracle.sigma_kappa - est.sigma_kappa).abs() < 1e-6);
    }

    #[test]
    fn single_dd_count() {
        let est = estimate_correlation(&kappa(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(
            (est.e_kappa - 0.198).abs() < 5e-4,
            "e_kappa = {}",
            est.e_kappa
        );
        let oracle = oracle_estimate(&kappa(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((est.e_kappa - oracle.e_kappa).abs() < 1e-6);
        assert!((est.sigma_kappa - oracle.sigma_kappa).abs() < 1e-4);
    }

    #[test]
    fn bulk_counts_match_oracle() {
        let k = kappa(30.0, 30.0, 20.0, 320.0);
        let est = estimate_correlation(&k).unwrap();
        let oracle = oracle_estimate(&k).unwrap();
        assert!(
            (est.e_kappa - oracle.e_kappa).abs() < 1e-6,
            "closed {} vs oracle {}",
            est.e_kappa,
            oracle.e_kappa
        );
        assert!((est.sigma_kappa - oracle.sigma_kappa).abs() < 1e-4);
        assert!((est.e_kappa - 0.74).abs() < 0.02);
    }

    #[test]
    fn fractional_kappa_matches_oracle() {
        for k in [
            kappa(1.5, 0.25, 3.75, 12.5),
            kappa(0.0, 7.3, 0.1, 0.1),
            kappa(45.2, 0.0, 44.0, 2.2),
        ] {
            let est = estimate_correlation(&k).unwrap();
            let oracle = oracle_estimate(&k).unwrap();
            assert!(
                (est.e_kappa - oracle.e_kappa).abs() < 1e-6,
                "{k:?}: closed {} vs oracle {}",
                est.e_kappa,
                oracle.e_kappa
            );
            assert!((est.sigma_kappa - oracle.sigma_kappa).abs() < 1e-4, "{k:?}");
        }
    }

    #[test]
    fn sign_equivariance() {
        let a = estimate_correlation(&kappa(3.0, 5.0, 7.0, 21.0)).unwrap();
        let b = estimate_correlation(&kappa(3.0, 5.0, 21.0, 7.0)).unwrap();
        assert_eq!(a.e_kappa, -b.e_kappa);
        assert_eq!(a.sigma_kappa, b.sigma_kappa);
    }

    #[test]
    fn shrinks_with_off_axis_mass() {
        // adding k_ss or k_sd with the dd/ds difference fixed moves posterior
        // mass off the p_dd - p_ds axis and shrinks the estimate
        let base = estimate_correlation(&kappa(0.0, 0.0, 5.0, 45.0)).unwrap();
        let more_ss = estimate_correlation(&kappa(0.0, 40.0, 5.0, 45.0)).unwrap();
        let more_sd = estimate_correlation(&kappa(40.0, 0.0, 5.0, 45.0)).unwrap();
        assert!(more_ss.e_kappa < base.e_kappa);
        assert!(more_sd.e_kappa < base.e_kappa);
        assert!(base.e_kappa.abs() <= 1.0);
    }

    #[test]
    fn consistency_at_scale() {
        // scaling counts with fixed proportions drives the mean to the
        // generating p_dd - p_ds and sigma to zero
        let p = (0.05, 0.10, 0.10, 0.75); // sd, ss, ds, dd -> E = 0.65
        let mut prev_sigma = f64::INFINITY;
        for lambda in [10.0, 100.0, 1000.0] {
            let k = kappa(p.0 * lambda, p.1 * lambda, p.2 * lambda, p.3 * lambda);
            let est = estimate_correlation(&k).unwrap();
            assert!(est.sigma_kappa < prev_sigma);
            prev_sigma = est.sigma_kappa;
            if lambda >= 1000.0 {
                assert!((est.e_kappa - 0.65).abs() < 0.01, "e = {}", est.e_kappa);
                assert!(est.sigma_kappa < 0.03);
            }
        }
    }

    #[test]
    fn geometric_tail_closed_form() {
        // sum_{n>=k} C(n,k) q^n = q^k / (1-q)^{k+1}, the reduction used in
        // the posterior; checked against a 1000-term partial sum
        for &(q, k) in &[(0.25f64, 0u64), (0.2, 3), (0.1, 10), (0.24, 25)] {
            let mut sum = 0.0f64;
            let mut binom = 1.0f64; // C(n, k) starting at n = k
            for i in 0..1000u64 {
                let n = k + i;
                if i > 0 {
                    binom *= n as f64 / (n - k) as f64;
                }
                sum += binom * libm::pow(q, n as f64);
            }
            let closed = libm::pow(q, k as f64) / libm::pow(1.0 - q, k as f64 + 1.0);
            assert!(
                (sum - closed).abs() < 1e-12 * closed,
                "q={q} k={k}: {sum} vs {closed}"
            );
        }
    }

    #[test]
    fn posterior_density_examples() {
        let zero = kappa(0.0, 0.0, 0.0, 0.0);
        // empty products leave only the k_ss = 0 tail term 1/(1 - p_ss/4)
        let d = posterior_density([0.25, 0.25, 0.25, 0.25], &zero).unwrap();
        assert!((d - 1.0 / (1.0 - 0.25 / 4.0)).abs() < 1e-14);

        let with_ss = kappa(0.0, 2.0, 0.0, 0.0);
        assert_eq!(posterior_density([0.5, 0.0, 0.25, 0.25], &with_ss).unwrap(), 0.0);

        let single_dd = kappa(0.0, 0.0, 0.0, 1.0);
        let d = posterior_density([0.0, 0.0, 0.0, 1.0], &single_dd).unwrap();
        assert!((d - 1.0).abs() < 1e-14);

        assert_eq!(
            posterior_density([0.5, 0.5, 0.5, 0.5], &zero),
            Err(EstimatorError::OffSimplex)
        );
    }

    #[test]
    fn oracle_cross_checked_by_monte_carlo() {
        // importance-free MC over the uniform simplex distribution
        use rand::{rngs::StdRng, Rng, SeedableRng};
        let k = kappa(0.0, 0.0, 0.0, 1.0);
        let mut rng = StdRng::seed_from_u64(7);
        let (mut w_sum, mut wx_sum) = (0.0f64, 0.0f64);
        for _ in 0..2_000_000 {
            // uniform on the 3-simplex via normalized exponentials
            let draws: [f64; 4] = core::array::from_fn(|_| -f64::ln(1.0 - rng.gen::<f64>()));
            let total: f64 = draws.iter().sum();
            let p: [f64; 4] = core::array::from_fn(|i| draws[i] / total);
            let w = posterior_density(p, &k).unwrap();
            w_sum += w;
            wx_sum += w * (p[3] - p[2]);
        }
        let mc = wx_sum / w_sum;
        let oracle = oracle_estimate(&k).unwrap();
        assert!(
            (mc - oracle.e_kappa).abs() < 2e-3,
            "mc {mc} vs oracle {}",
            oracle.e_kappa
        );
    }

    #[test]
    fn gaussian_model_normalizes() {
        let g = gaussian_model(0.8, 0.03);
        // trapezoid over +-8 sigma
        let (lo, hi, steps) = (0.8 - 0.24, 0.8 + 0.24, 20_000);
        let dx = (hi - lo) / steps as f64;
        let mut integral = 0.0;
        for i in 0..=steps {
            let x = lo + i as f64 * dx;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            integral += w * g.pdf(x) * dx;
        }
        assert!((integral - 1.0).abs() < 1e-9);
        assert!(g.pdf(0.8) > g.pdf(0.81));
        assert!((g.cdf(0.8) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(
            estimate_correlation(&kappa(-1.0, 0.0, 0.0, 0.0)),
            Err(EstimatorError::NegativeKappa)
        );
        assert_eq!(
            oracle_estimate(&kappa(0.0, 0.0, 0.0, 2.0e4)),
            Err(EstimatorError::ResolutionBudget)
        );
    }
}

//! Likelihood and objective terms.
//!
//! Every qualitative observation is stored in the canonical one-sided form
//! "reduced value < threshold". The probability of reporting it is
//!
//! ```text
//! P = eps_plus + (1 - eps_plus - eps_minus) * cdf(prediction, sigma, threshold)
//! ```
//!
//! where `cdf(mu, sigma, x)` is the Gaussian CDF with mean `mu` and standard
//! deviation `sigma` evaluated at `x`. The symmetric two-category form is the
//! special case `eps_plus == eps_minus`, and quantitative points contribute the
//! usual chi-squared kernel. All functions here are pure.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::ops::{Add, AddAssign};

use crate::constraint::{reduce_over_trajectory, ReducedBinding};
use crate::error::{Error, Result};
use crate::model::Trajectory;

/// A single numeric measurement `value ± sigma` of an observable at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantitativePoint {
    pub observable: String,
    pub enforcement_time: f64,
    pub value: f64,
    pub sigma: f64,
}

impl QuantitativePoint {
    pub fn new(observable: impl Into<String>, time: f64, value: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Config(format!(
                "quantitative point sigma must be positive, got {sigma}"
            )));
        }
        if !value.is_finite() || !time.is_finite() {
            return Err(Error::Config("quantitative point must be finite".into()));
        }
        Ok(Self {
            observable: observable.into(),
            enforcement_time: time,
            value,
            sigma,
        })
    }
}

/// Normalized one-sided qualitative observation "reduced value < threshold".
#[derive(Debug, Clone, PartialEq)]
pub struct QualitativeObservation {
    pub binding: ReducedBinding,
    pub threshold: f64,
    pub sigma: f64,
    /// Probability the constraint is reported satisfied regardless of the model.
    pub eps_plus: f64,
    /// Probability the constraint is reported violated regardless of the model.
    pub eps_minus: f64,
}

impl QualitativeObservation {
    pub fn new(binding: ReducedBinding, threshold: f64, sigma: f64, eps_plus: f64, eps_minus: f64) -> Result<Self> {
        check_discrepancy(eps_plus, eps_minus)?;
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Config(format!("tolerance must be >= 0, got {sigma}")));
        }
        if !threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        Ok(Self {
            binding,
            threshold,
            sigma,
            eps_plus,
            eps_minus,
        })
    }

    /// Probability of the observation given the predicted reduced value.
    pub fn probability(&self, prediction: f64) -> f64 {
        discrepancy_probability(
            self.eps_plus,
            self.eps_minus,
            gaussian_cdf(prediction, self.sigma, self.threshold),
        )
    }

    /// Negative log probability of the observation given the predicted reduced value.
    pub fn term(&self, prediction: f64) -> f64 {
        many_category_term(self.eps_plus, self.eps_minus, self.sigma, self.threshold, prediction)
    }
}

fn check_discrepancy(eps_plus: f64, eps_minus: f64) -> Result<()> {
    let ok = |e: f64| (0.0..1.0).contains(&e);
    if !ok(eps_plus) || !ok(eps_minus) || !(eps_plus + eps_minus < 1.0) {
        return Err(Error::Config(format!(
            "discrepancy rates must satisfy 0 <= eps and eps_plus + eps_minus < 1, got {eps_plus} and {eps_minus}"
        )));
    }
    Ok(())
}

/// Static penalty contribution `weight * max(0, reduced - threshold)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticPenaltyTerm {
    pub binding: ReducedBinding,
    pub threshold: f64,
    pub weight: f64,
}

/// A negative log likelihood: non-negative up to additive constants, never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct NegLogLikelihood(f64);

impl NegLogLikelihood {
    pub const ZERO: Self = Self(0.0);
    pub const INFINITE: Self = Self(f64::INFINITY);

    /// Wraps a raw value, mapping NaN to +infinity.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            Self::INFINITE
        } else {
            Self(value)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Add for NegLogLikelihood {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.0 + rhs.0)
    }
}

impl AddAssign for NegLogLikelihood {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl fmt::Display for NegLogLikelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Gaussian CDF `P(Y < x)` for `Y ~ N(mu, sigma^2)`.
///
/// Evaluated as `erfc(-(x - mu) / (sigma * sqrt 2)) / 2`, which equals
/// `(1 + erf((x - mu) / (sigma * sqrt 2))) / 2` but keeps relative precision in
/// the lower tail. With `sigma == 0` the CDF is a step that takes the value
/// 0.5 at `mu == x`.
pub fn gaussian_cdf(mu: f64, sigma: f64, x: f64) -> f64 {
    if sigma == 0.0 {
        return step(mu, x);
    }
    0.5 * libm::erfc(-(x - mu) / (sigma * SQRT_2))
}

/// Upper tail `P(Y > x)`, the complement of [`gaussian_cdf`] computed without cancellation.
pub fn gaussian_sf(mu: f64, sigma: f64, x: f64) -> f64 {
    if sigma == 0.0 {
        return step(x, mu);
    }
    0.5 * libm::erfc((x - mu) / (sigma * SQRT_2))
}

fn step(mu: f64, x: f64) -> f64 {
    if mu < x {
        1.0
    } else if mu > x {
        0.0
    } else {
        0.5
    }
}

/// `ln Phi(z)` for the standard normal, finite for every finite `z`.
pub fn log_standard_cdf(z: f64) -> f64 {
    if z > -30.0 {
        return (0.5 * libm::erfc(-z / SQRT_2)).ln();
    }
    // asymptotic series of the Mills ratio
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2);
    -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

/// `eps_plus + (1 - eps_plus - eps_minus) * cdf`.
pub fn discrepancy_probability(eps_plus: f64, eps_minus: f64, cdf: f64) -> f64 {
    eps_plus + (1.0 - eps_plus - eps_minus) * cdf
}

/// Chi-squared kernel `sum (y_i - f_i)^2 / (2 sigma_i^2)`.
pub fn chi_squared_nll(points: &[QuantitativePoint], predictions: &[f64]) -> Result<NegLogLikelihood> {
    if points.len() != predictions.len() {
        return Err(Error::Config(format!(
            "{} quantitative points but {} predictions",
            points.len(),
            predictions.len()
        )));
    }
    let total = points
        .iter()
        .zip(predictions)
        .map(|(p, &f)| {
            let r = p.value - f;
            r * r / (2.0 * p.sigma * p.sigma)
        })
        .sum::<f64>();
    Ok(NegLogLikelihood::new(total))
}

/// Two-category term `-ln(eps + (1 - 2 eps) * cdf(prediction, sigma, threshold))`.
pub fn two_category_term(eps: f64, sigma: f64, threshold: f64, prediction: f64) -> f64 {
    many_category_term(eps, eps, sigma, threshold, prediction)
}

/// Many-category term `-ln(eps_plus + (1 - eps_plus - eps_minus) * cdf(prediction, sigma, threshold))`.
///
/// Returns +infinity when the probability is exactly zero (only possible with
/// `eps_plus == 0`) or when `prediction` is NaN.
pub fn many_category_term(eps_plus: f64, eps_minus: f64, sigma: f64, threshold: f64, prediction: f64) -> f64 {
    if prediction.is_nan() {
        return f64::INFINITY;
    }
    let w = 1.0 - eps_plus - eps_minus;
    let cdf = gaussian_cdf(prediction, sigma, threshold);
    let sf = gaussian_sf(prediction, sigma, threshold);
    // complement 1 - P, used when P is close to one
    let q = eps_minus + w * sf;
    if q < 0.5 {
        return -(-q).ln_1p();
    }
    let p = eps_plus + w * cdf;
    if p > 1e-300 {
        return -p.ln();
    }
    if eps_plus == 0.0 && sigma > 0.0 {
        return -w.ln() - log_standard_cdf((threshold - prediction) / sigma);
    }
    if p == 0.0 {
        f64::INFINITY
    } else {
        -p.ln()
    }
}

/// Outcome probabilities of an ordinal observation with ascending `thresholds`
/// and a discrepancy base `eps` for every category.
///
/// Category `k` lies between `thresholds[k-1]` and `thresholds[k]`. Interior
/// categories use the one-sided split `cdf(c_k) * (1 - cdf(c_{k-1}))`, which
/// is what two independent one-sided statements describe; it matches the
/// exact interval probability when neighbouring thresholds are well separated
/// and otherwise overshoots it slightly, so the probabilities sum to at least 1.
pub fn ordinal_probabilities(eps: f64, sigma: f64, thresholds: &[f64], prediction: f64) -> Vec<f64> {
    let k = thresholds.len() + 1;
    let w = 1.0 - k as f64 * eps;
    let below = |c: f64| gaussian_cdf(prediction, sigma, c);
    let above = |c: f64| gaussian_sf(prediction, sigma, c);
    (0..k)
        .map(|i| {
            let upper = thresholds.get(i).map_or(1.0, |&c| below(c));
            let lower = if i == 0 { 1.0 } else { above(thresholds[i - 1]) };
            eps + w * upper * lower
        })
        .collect()
}

/// Static penalty `sum C_i * max(0, g_i)` over `(g_i, C_i)` pairs.
pub fn static_penalty(constraints: &[(f64, f64)]) -> f64 {
    constraints
        .iter()
        .map(
            |&(g, weight)| {
                if g.is_nan() {
                    f64::INFINITY
                } else {
                    weight * g.max(0.0)
                }
            },
        )
        .sum()
}

/// Combined negative log likelihood of quantitative and qualitative data for one trajectory.
///
/// A failed trajectory or a NaN model output yields +infinity; missing
/// observables and out-of-range enforcement times are configuration errors.
pub fn total_nll(
    quant: &[QuantitativePoint],
    qual: &[QualitativeObservation],
    trajectory: &Trajectory,
) -> Result<NegLogLikelihood> {
    if let Some(reason) = trajectory.failure() {
        log::debug!("simulation failed: {reason}");
        return Ok(NegLogLikelihood::INFINITE);
    }
    let predictions = quant
        .iter()
        .map(|p| {
            trajectory
                .value_at(&p.observable, p.enforcement_time)
                .map_err(|e| match e {
                    Error::OutOfRange { time, start, end, .. } => Error::OutOfRange {
                        context: format!("quantitative point for `{}`", p.observable),
                        time,
                        start,
                        end,
                    },
                    other => other,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = chi_squared_nll(quant, &predictions)?;
    for obs in qual {
        let reduced = reduce_over_trajectory(&obs.binding, trajectory)?;
        if reduced.is_nan() {
            log::debug!("NaN model output for {}", obs.binding);
            return Ok(NegLogLikelihood::INFINITE);
        }
        total += NegLogLikelihood::new(obs.term(reduced));
    }
    if total.value().is_nan() {
        return Ok(NegLogLikelihood::INFINITE);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn simpson_standard_normal(lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let mut s = pdf(lo) + pdf(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(x);
        }
        s * h / 3.0
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(gaussian_cdf(0.0, 1.0, 0.0), 0.5);
        assert_eq!(gaussian_cdf(3.0, 2.0, 3.0), 0.5);
        assert_eq!(gaussian_cdf(5.0, 0.0, 4.0), 0.0);
        assert_eq!(gaussian_cdf(3.0, 0.0, 4.0), 1.0);
        assert_eq!(gaussian_cdf(4.0, 0.0, 4.0), 0.5);
        let oracle = simpson_standard_normal(-12.0, 1.96, 20_000);
        assert_abs_diff_eq!(oracle, 0.9750, epsilon = 1e-4);
        assert_abs_diff_eq!(gaussian_cdf(0.0, 1.0, 1.96), oracle, epsilon = 1e-10);
    }

    #[test]
    fn cdf_matches_erf_form() {
        for &(mu, s, x) in &[(0.0, 1.0, 0.3), (2.0, 0.5, 1.1), (-1.0, 3.0, 4.0)] {
            let erf_form = (1.0 + libm::erf((x - mu) / (s * SQRT_2))) / 2.0;
            assert_abs_diff_eq!(gaussian_cdf(mu, s, x), erf_form, epsilon = 1e-15);
            assert_abs_diff_eq!(gaussian_cdf(mu, s, x) + gaussian_sf(mu, s, x), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn log_cdf_is_continuous_across_branch() {
        let a = log_standard_cdf(-30.0 + 1e-9);
        let b = log_standard_cdf(-30.0 - 1e-9);
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        assert!(log_standard_cdf(-1e3).is_finite());
    }

    #[test]
    fn chi_squared_examples() {
        let p = |y, s| QuantitativePoint::new("A", 0.0, y, s).unwrap();
        assert_eq!(chi_squared_nll(&[p(1.0, 0.5)], &[1.0]).unwrap().value(), 0.0);
        assert_eq!(chi_squared_nll(&[p(1.0, 1.0)], &[0.0]).unwrap().value(), 0.5);
        let two = [p(1.0, 1.0), p(2.0, 2.0)];
        assert_eq!(chi_squared_nll(&two, &[0.0, 4.0]).unwrap().value(), 1.0);
        assert!(chi_squared_nll(&two, &[0.0]).is_err());
        assert!(QuantitativePoint::new("A", 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn two_category_examples() {
        let t = two_category_term(0.01, 0.5, 4.0, 4.0);
        assert_abs_diff_eq!(t, -(0.01f64 + 0.98 * 0.5).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(t, LN_2, epsilon = 1e-12);
        let saturated = two_category_term(0.01, 0.5, 4.0, 4.0 - 10.0 * 0.5);
        assert_abs_diff_eq!(saturated, -(0.99f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(saturated, 0.01005, epsilon = 1e-5);
    }

    #[test]
    fn zero_discrepancy_zero_probability_is_infinite() {
        assert_eq!(two_category_term(0.0, 0.0, 4.0, 5.0), f64::INFINITY);
        // sigma > 0 keeps the tail finite through the log-cdf branch
        let deep = two_category_term(0.0, 1.0, 0.0, 60.0);
        assert!(deep.is_finite() && deep > 1000.0);
        assert_eq!(two_category_term(0.01, 1.0, 0.0, f64::NAN), f64::INFINITY);
    }

    #[test]
    fn many_category_saturation() {
        // pmin 0.01 pmax 0.98 → P = 0.01 + 0.97 * cdf, saturating at 0.98
        let t = many_category_term(0.01, 0.02, 0.5, 4.0, -100.0);
        assert_abs_diff_eq!(t, -(0.98f64).ln(), epsilon = 1e-12);
        let lo = many_category_term(0.01, 0.02, 0.5, 4.0, 100.0);
        assert_abs_diff_eq!(lo, -(0.01f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn static_penalty_examples() {
        assert_eq!(static_penalty(&[(-1.0, 2.0)]), 0.0);
        assert_eq!(static_penalty(&[(3.0, 2.0)]), 6.0);
        let a1 = 5.0;
        assert_eq!(static_penalty(&[(a1 - 4.0, 2.0)]), 2.0);
        assert_eq!(static_penalty(&[]), 0.0);
    }

    #[test]
    fn ordinal_saturation_and_two_category_case() {
        let far_low = ordinal_probabilities(0.03, 5.0, &[85.0, 115.0], -1e3);
        for (p, want) in far_low.iter().zip([0.94, 0.03, 0.03]) {
            assert_abs_diff_eq!(*p, want, epsilon = 1e-15);
        }
        let mid = ordinal_probabilities(0.03, 5.0, &[85.0, 115.0], 100.0);
        assert_abs_diff_eq!(mid[0], mid[2], epsilon = 1e-15);
        // one threshold reduces to the symmetric two-category probabilities
        let two = ordinal_probabilities(0.01, 0.5, &[4.0], 3.7);
        assert_abs_diff_eq!(two[0], (-two_category_term(0.01, 0.5, 4.0, 3.7)).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(two[0] + two[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nll_never_nan() {
        assert_eq!(NegLogLikelihood::new(f64::NAN), NegLogLikelihood::INFINITE);
        let s = NegLogLikelihood::INFINITE + NegLogLikelihood::new(-f64::INFINITY);
        assert!(!s.value().is_nan());
    }
}

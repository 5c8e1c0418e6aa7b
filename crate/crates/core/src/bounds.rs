//! Closed-form accuracy bounds for the truncated, discretized problem and the certificate
//! bundle attached to designs.
//!
//! Every bound that only holds under a hypothesis is returned as a [`BoundOutcome`], so a report
//! never carries a value computed outside its valid region.

use crate::error::Result;
use crate::model::SensingModel;
use crate::optimizer::{nemhauser_bound, online_bound, Constraint, Design};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundOutcome<T> {
    Value(T),
    /// The hypothesis of the bound fails for these inputs.
    Inapplicable,
}

impl<T: Copy> BoundOutcome<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            BoundOutcome::Value(v) => Some(*v),
            BoundOutcome::Inapplicable => None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, BoundOutcome::Value(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonSource {
    Model,
    Injected,
}

/// `N^{3/2}`.
fn n_pow(n: usize) -> f64 {
    (n as f64).powf(1.5)
}

/// Truncation bracket `(-N log(1 + εN^{3/2}/σ²), -N log(1 - εN^{3/2}/σ²))` on the change in
/// information caused by dropping the prior tail, valid while `ε < σ² N^{-3/2}`.
pub fn truncation_bounds_with(epsilon: f64, noise_var: f64, n: usize) -> BoundOutcome<(f64, f64)> {
    let ratio = epsilon * n_pow(n) / noise_var;
    if !(epsilon >= 0.0) || !(ratio < 1.0) {
        return BoundOutcome::Inapplicable;
    }
    let nf = n as f64;
    BoundOutcome::Value((-nf * ratio.ln_1p(), -nf * (-ratio).ln_1p()))
}

/// Truncation bracket using the model's own tail mass.
pub fn truncation_bounds(model: &SensingModel, n: usize) -> BoundOutcome<(f64, f64)> {
    truncation_bounds_with(model.prior().tail_epsilon().value, model.noise_var(), n)
}

/// `N log(1 + 4δP(1+δ)N^{3/2} / (λσ²))`: largest loss from restricting positions to a grid of
/// spacing `δ`.
pub fn discretization_bound_with(delta: f64, power: f64, lambda: f64, noise_var: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf * (4.0 * delta * power * (1.0 + delta) * n_pow(n) / (lambda * noise_var)).ln_1p()
}

pub fn discretization_bound(model: &SensingModel, n: usize) -> f64 {
    discretization_bound_with(model.grid().delta(), model.prior().power(), model.lambda(), model.noise_var(), n)
}

/// Combined truncation + discretization + greedy guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedBound {
    /// `N log((λσ² + 4δP(1+δ)N^{3/2}) / (λσ² - ελN^{3/2}))`.
    pub penalty: f64,
    /// Upper bound on the untruncated continuous optimum implied by the achieved greedy value:
    /// `achieved / (1 - 1/e) + penalty`.
    pub opt_upper: f64,
}

impl CombinedBound {
    /// Lower bound on the greedy value implied by a hypothesized optimum.
    pub fn greedy_lower(&self, opt: f64) -> f64 {
        (1.0 - (-1.0f64).exp()) * (opt - self.penalty)
    }
}

pub fn combined_bound_with(
    epsilon: f64,
    delta: f64,
    power: f64,
    lambda: f64,
    noise_var: f64,
    design_mi: f64,
    n: usize,
) -> BoundOutcome<CombinedBound> {
    let np = n_pow(n);
    let denominator = lambda * noise_var - epsilon * lambda * np;
    if !(denominator > 0.0) {
        return BoundOutcome::Inapplicable;
    }
    let numerator = lambda * noise_var + 4.0 * delta * power * (1.0 + delta) * np;
    let penalty = n as f64 * (numerator / denominator).ln();
    BoundOutcome::Value(CombinedBound { penalty, opt_upper: nemhauser_bound(design_mi) + penalty })
}

pub fn combined_bound(model: &SensingModel, design_mi: f64, n: usize) -> BoundOutcome<CombinedBound> {
    combined_bound_with(
        model.prior().tail_epsilon().value,
        model.grid().delta(),
        model.prior().power(),
        model.lambda(),
        model.noise_var(),
        design_mi,
        n,
    )
}

/// All certificates for one design.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub epsilon: f64,
    pub epsilon_half_width: f64,
    pub epsilon_source: EpsilonSource,
    pub delta: f64,
    pub n: usize,
    pub noise_var: f64,
    pub achieved_mi: f64,
    pub truncation: BoundOutcome<(f64, f64)>,
    pub discretization_hi: f64,
    pub combined: BoundOutcome<CombinedBound>,
    /// Worst-case greedy factor used for `approx_hi` (`1 - 1/e` or `1/2`).
    pub approx_factor: f64,
    /// `achieved_mi / approx_factor`.
    pub approx_hi: f64,
    pub online_hi: f64,
}

impl BoundsReport {
    /// Nemhauser upper bound, present for cardinality-constrained designs.
    pub fn nemhauser_hi(&self) -> Option<f64> {
        (self.approx_factor == 1.0 - (-1.0f64).exp()).then_some(self.approx_hi)
    }
}

/// Builds the report for `design`. `inject_epsilon` replaces the model's tail mass in the
/// truncation and combined bounds.
pub fn certify(model: &SensingModel, design: &Design, inject_epsilon: Option<f64>) -> Result<BoundsReport> {
    let n = design.budget();
    let tail = model.prior().tail_epsilon();
    let (epsilon, epsilon_half_width, epsilon_source) = match inject_epsilon {
        Some(e) => (e, 0.0, EpsilonSource::Injected),
        None => (tail.value, tail.half_width, EpsilonSource::Model),
    };
    let approx_factor = design.constraint.greedy_factor();
    let combined = match design.constraint {
        Constraint::Cardinality { .. } => combined_bound_with(
            epsilon,
            model.grid().delta(),
            model.prior().power(),
            model.lambda(),
            model.noise_var(),
            design.mi_nats,
            n,
        ),
        // the combined bound is stated for the cardinality guarantee only
        Constraint::Matroid(_) => BoundOutcome::Inapplicable,
    };
    Ok(BoundsReport {
        epsilon,
        epsilon_half_width,
        epsilon_source,
        delta: model.grid().delta(),
        n,
        noise_var: model.noise_var(),
        achieved_mi: design.mi_nats,
        truncation: truncation_bounds_with(epsilon, model.noise_var(), n),
        discretization_hi: discretization_bound(model, n),
        combined,
        approx_factor,
        approx_hi: design.mi_nats / approx_factor,
        online_hi: online_bound(model, design)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_vanishes_without_tail() {
        assert_eq!(truncation_bounds_with(0.0, 0.1, 11), BoundOutcome::Value((-0.0, 0.0)));
    }

    #[test]
    fn truncation_with_injected_epsilon_at_0db() {
        let (lo, hi) = truncation_bounds_with(1e-4, 1.0 / 11.0, 11).value().unwrap();
        // ratio = 1e-4 · 11^{1.5} · 11
        let ratio: f64 = 1e-4 * 11f64.powf(1.5) * 11.0;
        assert!((lo + 11.0 * (1.0 + ratio).ln()).abs() < 1e-12);
        assert!((hi + 11.0 * (1.0 - ratio).ln()).abs() < 1e-12);
        assert!((lo + 0.45).abs() <= 0.02, "lo = {lo}");
        assert!((hi - 0.47).abs() <= 0.02, "hi = {hi}");
    }

    #[test]
    fn truncation_hypothesis_threshold() {
        let noise = 1.0 / 11000.0;
        let threshold = noise / 11f64.powf(1.5);
        assert!((threshold - 2.49e-6).abs() < 1e-8);
        assert!(truncation_bounds_with(threshold * 1.01, noise, 11) == BoundOutcome::Inapplicable);
        assert!(truncation_bounds_with(threshold * 0.99, noise, 11).is_applicable());
    }

    #[test]
    fn discretization_formula() {
        let v = discretization_bound_with(0.0625, 1.0, 1.0, 1.0 / 11.0, 11);
        let expected = 11.0 * (1.0 + 4.0 * 0.0625 * 1.0625 * 11f64.powf(1.5) * 11.0).ln();
        assert!((v - expected).abs() < 1e-12);
        assert_eq!(discretization_bound_with(0.0, 1.0, 1.0, 0.1, 11), 0.0);
        let mut prev = 0.0;
        for k in 1..50 {
            let cur = discretization_bound_with(k as f64 * 1e-3, 1.0, 1.0, 0.1, 11);
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn combined_reduces_to_nemhauser() {
        let c = combined_bound_with(0.0, 0.0, 1.0, 1.0, 0.1, 10.0, 11).value().unwrap();
        assert_eq!(c.penalty, 0.0);
        assert!((c.opt_upper - nemhauser_bound(10.0)).abs() < 1e-12);
        assert!((c.greedy_lower(nemhauser_bound(10.0)) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn combined_penalty_splits_into_two_terms() {
        let (eps, delta, noise) = (1e-3, 0.0625, 1.0 / 11.0);
        let c = combined_bound_with(eps, delta, 1.0, 1.0, noise, 7.0, 11).value().unwrap();
        let (_, hi) = truncation_bounds_with(eps, noise, 11).value().unwrap();
        let disc = discretization_bound_with(delta, 1.0, 1.0, noise, 11);
        assert!((c.penalty - (hi + disc)).abs() < 1e-10);
        assert!(combined_bound_with(eps, delta, 1.0, 1.0, 1.0 / 11000.0, 7.0, 11) == BoundOutcome::Inapplicable);
    }

    #[test]
    fn bounds_monotone_in_epsilon() {
        let noise = 0.05;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..40 {
            let eps = k as f64 * 1e-4;
            match truncation_bounds_with(eps, noise, 11) {
                BoundOutcome::Value((lo, hi)) => {
                    assert!(lo <= 0.0 && hi >= 0.0);
                    if let Some((plo, phi)) = prev {
                        assert!(lo <= plo && hi >= phi);
                    }
                    prev = Some((lo, hi));
                }
                BoundOutcome::Inapplicable => assert!(eps * 11f64.powf(1.5) >= noise),
            }
        }
    }
}

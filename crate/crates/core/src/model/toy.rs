use std::collections::BTreeMap;

use super::{check_theta, Model, Parameter, Protocol, Trajectory};

/// Closed-form two-stimulus response model.
///
/// The primary response is `p1 = A`. After a delay `t` the secondary response is
///
/// ```text
/// p3(t) = A * (1 + b * exp(-t / tau_b) - d * exp(-t / tau_d))
/// ```
///
/// clipped at zero, so depending on the delay the secondary response is weaker
/// or stronger than the primary. The trajectory's time axis is the delay.
///
/// Observables: `p1`, `p3`, `degrHigh = p1 + band`, `degrLow = p1 - band` and a
/// constant alias `p3_<t>` for every delay `t` of the protocol.
#[derive(Debug, Clone)]
pub struct BiphasicToyModel {
    params: Vec<Parameter>,
    pub band: f64,
}

impl BiphasicToyModel {
    pub const GROUND_TRUTH: [f64; 5] = [1.0, 0.6, 30.0, 1.1, 8.0];
    pub const DEFAULT_BAND: f64 = 0.15;

    pub fn new(band: f64) -> Self {
        let names = ["A", "b", "tau_b", "d", "tau_d"];
        let params = names
            .iter()
            .zip(Self::GROUND_TRUTH)
            .map(|(n, v)| Parameter::new(n, v))
            .collect();
        Self { params, band }
    }

    /// Name of the per-delay alias observable, e.g. `p3_8` or `p3_1.681792830507429`.
    pub fn delay_alias(delay: f64) -> String {
        format!("p3_{delay}")
    }

    /// Closed-form `(p1, p3(t))`.
    pub fn responses(theta: &[f64], delay: f64) -> (f64, f64) {
        let (a, b, tau_b, d, tau_d) = (theta[0], theta[1], theta[2], theta[3], theta[4]);
        let ratio = 1.0 + b * (-delay / tau_b).exp() - d * (-delay / tau_d).exp();
        (a, (a * ratio).max(0.0))
    }
}

impl Default for BiphasicToyModel {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BAND)
    }
}

impl Model for BiphasicToyModel {
    fn name(&self) -> &str {
        "biphasic"
    }

    fn parameters(&self) -> &[Parameter] {
        &self.params
    }

    fn observables(&self, protocol: &Protocol) -> Vec<String> {
        let mut names: Vec<String> = ["p1", "p3", "degrHigh", "degrLow"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        names.extend(protocol.times.iter().map(|&t| Self::delay_alias(t)));
        names
    }

    fn simulate(&self, theta: &[f64], protocol: &Protocol) -> Trajectory {
        if let Err(reason) = check_theta(self, theta) {
            return Trajectory::failed(protocol.times.clone(), reason);
        }
        if !(theta[2] > 0.0 && theta[4] > 0.0) {
            return Trajectory::failed(protocol.times.clone(), "time constants must be positive");
        }
        let n = protocol.times.len();
        let (p1, p3): (Vec<f64>, Vec<f64>) = protocol.times.iter().map(|&t| Self::responses(theta, t)).unzip();
        let mut series = BTreeMap::new();
        series.insert("degrHigh".to_string(), vec![theta[0] + self.band; n]);
        series.insert("degrLow".to_string(), vec![theta[0] - self.band; n]);
        for (&t, &v) in protocol.times.iter().zip(&p3) {
            series.insert(Self::delay_alias(t), vec![v; n]);
        }
        series.insert("p1".to_string(), p1);
        series.insert("p3".to_string(), p3);
        Trajectory::new(protocol.times.clone(), series)
            .unwrap_or_else(|e| Trajectory::failed(protocol.times.clone(), e.to_string()))
    }
}

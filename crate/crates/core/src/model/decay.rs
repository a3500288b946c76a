use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{check_theta, rk4_integrate, Model, Parameter, Protocol, Trajectory};

/// First-order decay `dx/dt = -k x`, `x(0) = x0`, integrated with fixed-step RK4.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecayOdeModel;

impl DecayOdeModel {
    pub fn closed_form(k: f64, x0: f64, t: f64) -> f64 {
        x0 * (-k * t).exp()
    }
}

fn params() -> &'static [Parameter] {
    static PARAMS: OnceLock<Vec<Parameter>> = OnceLock::new();
    PARAMS.get_or_init(|| vec![Parameter::new("k", 1.0), Parameter::new("x0", 1.0)])
}

impl Model for DecayOdeModel {
    fn name(&self) -> &str {
        "decay"
    }

    fn parameters(&self) -> &[Parameter] {
        params()
    }

    fn observables(&self, _protocol: &Protocol) -> Vec<String> {
        vec!["x".to_string()]
    }

    fn simulate(&self, theta: &[f64], protocol: &Protocol) -> Trajectory {
        if let Err(reason) = check_theta(self, theta) {
            return Trajectory::failed(protocol.times.clone(), reason);
        }
        let (k, x0) = (theta[0], theta[1]);
        // integrate from t = 0 even when the output grid starts later
        let prepend = protocol.times[0] > 0.0;
        let mut grid = Vec::with_capacity(protocol.times.len() + 1);
        if prepend {
            grid.push(0.0);
        }
        grid.extend_from_slice(&protocol.times);
        let states = match rk4_integrate(|_, x, dx| dx[0] = -k * x[0], &[x0], &grid, protocol.step) {
            Ok(s) => s,
            Err(e) => return Trajectory::failed(protocol.times.clone(), e.to_string()),
        };
        let x: Vec<f64> = states.iter().skip(usize::from(prepend)).map(|s| s[0]).collect();
        let mut series = BTreeMap::new();
        series.insert("x".to_string(), x);
        Trajectory::new(protocol.times.clone(), series)
            .unwrap_or_else(|e| Trajectory::failed(protocol.times.clone(), e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_decay_at_one() {
        let p = Protocol::new(vec![0.0, 1.0], 0.01).unwrap();
        let tr = DecayOdeModel.simulate(&[1.0, 1.0], &p);
        assert!((tr.value_at("x", 1.0).unwrap() - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn matches_closed_form_over_ten_units() {
        let p = Protocol::uniform(10.0, 0.5, 0.01).unwrap();
        let tr = DecayOdeModel.simulate(&[0.7, 2.0], &p);
        let err = p
            .times
            .iter()
            .zip(tr.series("x").unwrap())
            .map(|(&t, &x)| (x - DecayOdeModel::closed_form(0.7, 2.0, t)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn grid_not_starting_at_zero() {
        let p = Protocol::new(vec![2.0, 3.0], 0.01).unwrap();
        let tr = DecayOdeModel.simulate(&[1.0, 1.0], &p);
        assert!((tr.value_at("x", 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-8);
    }
}

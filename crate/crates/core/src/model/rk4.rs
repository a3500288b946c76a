use crate::error::{Error, Result};

/// Classical fourth-order Runge-Kutta with a fixed step.
///
/// Integrates `dx/dt = rhs(t, x)` from `t_grid[0]` with initial state `x0` and
/// returns the state at every grid time. Each grid interval is split into
/// `ceil(interval / step)` equal sub-steps so grid times are hit exactly.
pub fn rk4_integrate<F>(rhs: F, x0: &[f64], t_grid: &[f64], step: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("integrator step must be positive, got {step}")));
    }
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(x.clone());

    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if !(t1 > t0) {
            return Err(Error::Config("time grid must be strictly increasing".into()));
        }
        let substeps = ((t1 - t0) / step).ceil().max(1.0) as usize;
        let h = (t1 - t0) / substeps as f64;
        for i in 0..substeps {
            let t = t0 + i as f64 * h;
            rhs(t, &x, &mut k1);
            for j in 0..n {
                tmp[j] = x[j] + 0.5 * h * k1[j];
            }
            rhs(t + 0.5 * h, &tmp, &mut k2);
            for j in 0..n {
                tmp[j] = x[j] + 0.5 * h * k2[j];
            }
            rhs(t + 0.5 * h, &tmp, &mut k3);
            for j in 0..n {
                tmp[j] = x[j] + h * k3[j];
            }
            rhs(t + h, &tmp, &mut k4);
            for j in 0..n {
                x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation(format!("non-finite state at t = {t1}")));
        }
        out.push(x.clone());
    }
    Ok(out)
}

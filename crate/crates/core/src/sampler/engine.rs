use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{PosteriorSamples, Prior, SampleRow, SamplerConfig};
use crate::error::{Error, Result};

/// Objective the sampler explores: NLL (or penalty) as a function of natural-unit parameters.
///
/// Must be side-effect free; `+inf` marks an infeasible or failed point.
pub trait Target: Sync {
    fn objective(&self, theta: &[f64]) -> f64;
}

impl<F> Target for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn objective(&self, theta: &[f64]) -> f64 {
        self(theta)
    }
}

/// One replica: position in sampling space plus its private RNG stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    /// Position in sampling space (log10 for log-uniform priors).
    pub x: Vec<f64>,
    /// Same position in natural units.
    pub theta: Vec<f64>,
    /// Objective at `theta`; NaN is stored as `+inf`.
    pub nll: f64,
    /// `nll - log prior`, the quantity tempered by the ladder.
    pub energy: f64,
    pub rng: ChaCha8Rng,
    pub proposals: u64,
    pub accepted: u64,
    pub failures: u64,
}

impl ChainState {
    pub fn new(x: Vec<f64>, priors: &[Prior], target: &dyn Target, rng: ChaCha8Rng) -> Self {
        let theta = to_natural(priors, &x);
        let nll = sanitize(target.objective(&theta));
        let energy = nll - log_prior(priors, &x);
        Self {
            x,
            theta,
            nll,
            energy,
            rng,
            proposals: 0,
            accepted: 0,
            failures: 0,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn exchange_position(&mut self, other: &mut ChainState) {
        std::mem::swap(&mut self.x, &mut other.x);
        std::mem::swap(&mut self.theta, &mut other.theta);
        std::mem::swap(&mut self.nll, &mut other.nll);
        std::mem::swap(&mut self.energy, &mut other.energy);
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn to_natural(priors: &[Prior], x: &[f64]) -> Vec<f64> {
    priors.iter().zip(x).map(|(p, &v)| p.to_natural(v)).collect()
}

fn log_prior(priors: &[Prior], x: &[f64]) -> f64 {
    priors.iter().zip(x).map(|(p, &v)| p.log_density_sampling(v)).sum()
}

/// Metropolis acceptance probability `min(1, exp(-dE / T))`.
pub fn acceptance_probability(delta_energy: f64, temperature: f64) -> f64 {
    if delta_energy.is_nan() {
        return 0.0;
    }
    if delta_energy <= 0.0 {
        return 1.0;
    }
    (-delta_energy / temperature).exp()
}

/// Replica-exchange acceptance `min(1, exp((E_a - E_b)(1/T_a - 1/T_b)))`.
pub fn swap_probability(energy_a: f64, energy_b: f64, t_a: f64, t_b: f64) -> f64 {
    if t_a == t_b {
        return 1.0;
    }
    let exponent = (energy_a - energy_b) * (1.0 / t_a - 1.0 / t_b);
    if exponent.is_nan() {
        return 0.0;
    }
    exponent.exp().min(1.0)
}

/// One random-walk Metropolis step at `temperature`.
///
/// The Gaussian step is drawn in sampling space with standard deviation
/// `scale * sqrt(temperature)`. Out-of-prior proposals are rejected without
/// evaluating the target.
pub fn mh_step(state: &mut ChainState, temperature: f64, scale: &[f64], priors: &[Prior], target: &dyn Target) {
    let widen = temperature.sqrt();
    let proposal: Vec<f64> = state
        .x
        .iter()
        .zip(scale)
        .map(|(&x, &s)| {
            let z: f64 = state.rng.sample(StandardNormal);
            x + s * widen * z
        })
        .collect();
    let u: f64 = state.rng.random();
    state.proposals += 1;

    let lp = log_prior(priors, &proposal);
    if lp == f64::NEG_INFINITY {
        return;
    }
    let theta = to_natural(priors, &proposal);
    let raw = target.objective(&theta);
    if !raw.is_finite() {
        state.failures += 1;
        log::trace!("rejected proposal with objective {raw} at {theta:?}");
        return;
    }
    let energy = raw - lp;
    if u < acceptance_probability(energy - state.energy, temperature) {
        state.x = proposal;
        state.theta = theta;
        state.nll = raw;
        state.energy = energy;
        state.accepted += 1;
    }
}

/// Attempts an exchange between replicas at `t_a < t_b`, drawing from `rng`.
/// Returns whether the positions were exchanged.
pub fn swap_attempt(a: &mut ChainState, b: &mut ChainState, t_a: f64, t_b: f64, rng: &mut ChaCha8Rng) -> bool {
    let u: f64 = rng.random();
    if u < swap_probability(a.energy, b.energy, t_a, t_b) {
        a.exchange_position(b);
        true
    } else {
        false
    }
}

/// Temperature multiplier for annealed runs: geometric from 1 down to `final_factor`.
#[derive(Debug, Clone, Copy)]
struct Cooling {
    final_factor: f64,
    n_steps: usize,
}

impl Cooling {
    fn factor(&self, step: usize) -> f64 {
        let frac = step as f64 / self.n_steps as f64;
        self.final_factor.powf(frac)
    }
}

/// Summary of a finished run besides the recorded samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    /// Acceptance rate per temperature level.
    pub acceptance: Vec<f64>,
    /// Accepted / attempted exchanges per adjacent pair.
    pub swap_acceptance: Vec<f64>,
    /// Proposals whose objective was not finite.
    pub failures: u64,
}

/// Result of an annealed optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub objective: f64,
    /// Best objective among the starting points.
    pub initial_objective: f64,
}

struct Engine<'a> {
    config: &'a SamplerConfig,
    priors: &'a [Prior],
    target: &'a dyn Target,
    slots: Vec<ChainState>,
    swap_rng: ChaCha8Rng,
    swap_counts: Vec<(u64, u64)>,
    swap_rounds: u64,
}

impl<'a> Engine<'a> {
    fn new(config: &'a SamplerConfig, priors: &'a [Prior], target: &'a dyn Target) -> Result<Self> {
        config.validate(priors.len())?;
        let mut swap_rng = ChaCha8Rng::seed_from_u64(config.seed);
        swap_rng.set_stream(0);
        let start = match &config.initial {
            Some(init) => {
                let x: Vec<f64> = priors.iter().zip(init).map(|(p, &v)| p.to_sampling(v)).collect();
                if log_prior(priors, &x) == f64::NEG_INFINITY {
                    return Err(Error::Config(format!("initial point {init:?} lies outside the prior")));
                }
                Some(x)
            }
            None => None,
        };
        let slots = (0..config.n_chains())
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(i as u64 + 1);
                let x = match &start {
                    Some(x) => x.clone(),
                    None => priors
                        .iter()
                        .map(|p| {
                            let (lo, hi) = p.sampling_bounds();
                            lo + (hi - lo) * rng.random::<f64>()
                        })
                        .collect(),
                };
                ChainState::new(x, priors, target, rng)
            })
            .collect();
        Ok(Self {
            config,
            priors,
            target,
            slots,
            swap_rng,
            swap_counts: vec![(0, 0); config.temperatures.len().saturating_sub(1)],
            swap_rounds: 0,
        })
    }

    fn per(&self) -> usize {
        self.config.chains_per_temperature
    }

    /// Advances every slot by `steps` steps starting after `first_step - 1`.
    ///
    /// `on_step(slot, step, state)` runs after each step inside the worker.
    fn advance<F, R>(&mut self, first_step: usize, steps: usize, cooling: Option<Cooling>, on_step: F) -> Vec<Vec<R>>
    where
        F: Fn(usize, usize, &ChainState) -> Option<R> + Sync,
        R: Send,
    {
        let per = self.per();
        let temps = &self.config.temperatures;
        let scale = &self.config.proposal_scale;
        let priors = self.priors;
        let target = self.target;
        let work = |(slot, state): (usize, &mut ChainState)| {
            let base = temps[slot / per];
            let mut out = Vec::new();
            for step in first_step..first_step + steps {
                let t = match cooling {
                    Some(c) => base * c.factor(step),
                    None => base,
                };
                mh_step(state, t, scale, priors, target);
                if let Some(r) = on_step(slot, step, state) {
                    out.push(r);
                }
            }
            out
        };
        match self.config.threads {
            Some(1) => self.slots.iter_mut().enumerate().map(work).collect(),
            _ => self.slots.par_iter_mut().enumerate().map(work).collect(),
        }
    }

    /// One exchange round over alternating even/odd adjacent pairs.
    fn swap_round(&mut self, factor: f64) {
        let per = self.per();
        let temps = &self.config.temperatures;
        let parity = (self.swap_rounds % 2) as usize;
        self.swap_rounds += 1;
        let mut level = parity;
        while level + 1 < temps.len() {
            let (t_a, t_b) = (temps[level] * factor, temps[level + 1] * factor);
            for j in 0..per {
                let ia = level * per + j;
                let (lo, hi) = self.slots.split_at_mut(ia + per);
                let accepted = swap_attempt(&mut lo[ia], &mut hi[0], t_a, t_b, &mut self.swap_rng);
                let counts = &mut self.swap_counts[level];
                counts.1 += 1;
                if accepted {
                    counts.0 += 1;
                }
            }
            level += 2;
        }
    }

    fn stats(&self) -> RunStats {
        let per = self.per();
        let acceptance = self
            .slots
            .chunks(per)
            .map(|level| {
                let (a, p) = level.iter().fold((0, 0), |(a, p), s| (a + s.accepted, p + s.proposals));
                if p == 0 {
                    0.0
                } else {
                    a as f64 / p as f64
                }
            })
            .collect();
        let swap_acceptance = self
            .swap_counts
            .iter()
            .map(|&(a, n)| if n == 0 { 0.0 } else { a as f64 / n as f64 })
            .collect();
        RunStats {
            acceptance,
            swap_acceptance,
            failures: self.slots.iter().map(|s| s.failures).sum(),
        }
    }
}

/// Runs parallel tempering and returns the temperature-1 samples recorded after burn-in.
///
/// Results are bit-identical for any thread count: each chain owns a ChaCha8
/// stream and exchanges are decided on a separate stream in a fixed pair order.
pub fn pt_run(
    config: &SamplerConfig,
    priors: &[Prior],
    names: &[String],
    target: &dyn Target,
) -> Result<(PosteriorSamples, RunStats)> {
    if names.len() != priors.len() {
        return Err(Error::Config(format!(
            "{} parameter names for {} priors",
            names.len(),
            priors.len()
        )));
    }
    let run = || -> Result<_> {
        let mut engine = Engine::new(config, priors, target)?;
        let per = engine.per();
        let mut by_chain: Vec<Vec<SampleRow>> = vec![Vec::new(); per];
        let mut step = 1;
        while step <= config.n_steps {
            let steps = config.swap_interval.min(config.n_steps + 1 - step);
            let record = |slot: usize, s: usize, st: &ChainState| {
                let keep = slot < per && s > config.burn_in && (s - config.burn_in).is_multiple_of(config.thin);
                keep.then(|| SampleRow {
                    chain: slot,
                    step: s,
                    nll: st.nll,
                    theta: st.theta.clone(),
                })
            };
            let rows = engine.advance(step, steps, None, record);
            for (slot, r) in rows.into_iter().enumerate().take(per) {
                by_chain[slot].extend(r);
            }
            step += steps;
            if steps == config.swap_interval {
                engine.swap_round(1.0);
            }
        }
        let stats = engine.stats();
        let rows = by_chain.into_iter().flatten().collect();
        Ok((PosteriorSamples::new(names.to_vec(), rows)?, stats))
    };
    with_pool(config.threads, run)
}

/// Annealed optimization: the whole ladder is cooled geometrically by
/// `final_factor` over the run and the best point ever visited is returned.
pub fn anneal(config: &SamplerConfig, priors: &[Prior], target: &dyn Target, final_factor: f64) -> Result<FitResult> {
    if !(final_factor > 0.0 && final_factor <= 1.0) {
        return Err(Error::Config(format!(
            "cooling factor must lie in (0, 1], got {final_factor}"
        )));
    }
    let run = || -> Result<_> {
        let mut engine = Engine::new(config, priors, target)?;
        let cooling = Cooling {
            final_factor,
            n_steps: config.n_steps,
        };
        let best_of = |states: &[ChainState]| {
            states
                .iter()
                .min_by(|a, b| a.nll.total_cmp(&b.nll))
                .map(|s| (s.nll, s.theta.clone()))
                .expect("at least one chain")
        };
        let (initial_objective, mut best_theta) = best_of(&engine.slots);
        let mut best = initial_objective;
        let mut step = 1;
        while step <= config.n_steps {
            let steps = config.swap_interval.min(config.n_steps + 1 - step);
            let improvements = engine.advance(step, steps, Some(cooling), |_, _, st| Some((st.nll, st.theta.clone())));
            for (nll, theta) in improvements.into_iter().flatten() {
                if nll < best {
                    best = nll;
                    best_theta = theta;
                }
            }
            step += steps;
            if steps == config.swap_interval {
                engine.swap_round(cooling.factor(step - 1));
            }
        }
        Ok(FitResult {
            theta: best_theta,
            objective: best,
            initial_objective,
        })
    };
    with_pool(config.threads, run)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?
            .install(f),
        _ => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_edge_cases() {
        assert_eq!(acceptance_probability(0.0, 1.0), 1.0);
        assert_eq!(acceptance_probability(f64::INFINITY, 1.0), 0.0);
        assert_eq!(acceptance_probability(f64::NEG_INFINITY, 1.0), 1.0);
        assert!((acceptance_probability(2.0, 2.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn swap_edge_cases() {
        assert_eq!(swap_probability(3.0, 3.0, 1.0, 2.0), 1.0);
        assert_eq!(swap_probability(1.0, 50.0, 4.0, 4.0), 1.0);
        assert_eq!(swap_probability(f64::INFINITY, f64::INFINITY, 4.0, 4.0), 1.0);
        // hotter state has lower energy: always swap down
        assert_eq!(swap_probability(5.0, 1.0, 1.0, 2.0), 1.0);
        let p = swap_probability(1.0, 5.0, 1.0, 2.0);
        assert!((p - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn infinite_proposals_never_accepted() {
        let priors = [Prior::uniform(-1.0, 1.0).unwrap()];
        let target = |t: &[f64]| if t[0] > 0.0 { f64::INFINITY } else { 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        rng.set_stream(1);
        let mut st = ChainState::new(vec![-0.5], &priors, &target, rng);
        for _ in 0..2000 {
            mh_step(&mut st, 1.0, &[0.5], &priors, &target);
            assert!(st.x[0] <= 0.0);
        }
        assert!(st.failures > 0);
    }

    #[test]
    fn interval_not_dividing_steps() {
        let priors = [Prior::uniform(-5.0, 5.0).unwrap()];
        let mut cfg = SamplerConfig::new(2, 2, 95, 10, 1);
        cfg.threads = Some(1);
        let names = ["x".to_string()];
        let (s, stats) = pt_run(&cfg, &priors, &names, &|t: &[f64]| 0.5 * t[0] * t[0]).unwrap();
        assert_eq!(s.rows().len(), 2 * 85);
        assert!(s.rows().iter().all(|r| r.step > 10 && r.step <= 95));
        assert_eq!(stats.swap_acceptance.len(), 1);
    }
}

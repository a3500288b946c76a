use crate::error::{Error, Result};

/// Parallel-tempering run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Ascending temperature ladder starting at exactly 1.
    pub temperatures: Vec<f64>,
    pub chains_per_temperature: usize,
    /// Total steps per chain, burn-in included.
    pub n_steps: usize,
    /// Steps discarded before recording.
    pub burn_in: usize,
    /// Steps between replica-exchange rounds.
    pub swap_interval: usize,
    /// Proposal standard deviation per parameter, in sampling space, at T = 1.
    pub proposal_scale: Vec<f64>,
    pub seed: u64,
    /// Record every `thin`-th post-burn-in step.
    pub thin: usize,
    /// Worker threads; `None` uses the global rayon pool, `Some(1)` runs inline.
    pub threads: Option<usize>,
    /// Starting point in natural units; drawn from the prior per chain when `None`.
    pub initial: Option<Vec<f64>>,
}

impl SamplerConfig {
    /// Geometric ladder `1, r, r^2, ..., t_max`.
    pub fn geometric_ladder(n: usize, t_max: f64) -> Vec<f64> {
        if n <= 1 {
            return vec![1.0];
        }
        let ratio = t_max.powf(1.0 / (n - 1) as f64);
        let mut ladder: Vec<f64> = (0..n).map(|i| ratio.powi(i as i32)).collect();
        ladder[0] = 1.0;
        ladder[n - 1] = t_max;
        ladder
    }

    /// Defaults: geometric ladder with `T_max = 100`, swaps every 10 steps.
    pub fn new(
        n_temperatures: usize,
        chains_per_temperature: usize,
        n_steps: usize,
        burn_in: usize,
        dim: usize,
    ) -> Self {
        Self {
            temperatures: Self::geometric_ladder(n_temperatures, 100.0),
            chains_per_temperature,
            n_steps,
            burn_in,
            swap_interval: 10,
            proposal_scale: vec![0.1; dim],
            seed: 0,
            thin: 1,
            threads: None,
            initial: None,
        }
    }

    /// Nine temperatures with four chains each, 50,000 steps including a 10,000-step burn-in.
    pub fn reference(dim: usize) -> Self {
        Self::new(9, 4, 50_000, 10_000, dim)
    }

    pub fn n_chains(&self) -> usize {
        self.temperatures.len() * self.chains_per_temperature
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.temperatures.is_empty() || self.temperatures[0] != 1.0 {
            return err("temperature ladder must start at 1".into());
        }
        if self.temperatures.windows(2).any(|w| !(w[1] >= w[0])) || self.temperatures.iter().any(|t| !t.is_finite()) {
            return err("temperatures must be finite and ascending".into());
        }
        if self.chains_per_temperature == 0 {
            return err("need at least one chain per temperature".into());
        }
        if self.burn_in >= self.n_steps {
            return err(format!(
                "burn_in {} must be smaller than n_steps {}",
                self.burn_in, self.n_steps
            ));
        }
        if self.swap_interval == 0 || self.thin == 0 {
            return err("swap_interval and thin must be positive".into());
        }
        if self.proposal_scale.len() != dim {
            return err(format!(
                "{} proposal scales for {dim} parameters",
                self.proposal_scale.len()
            ));
        }
        if self.proposal_scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return err("proposal scales must be positive".into());
        }
        if let Some(init) = &self.initial {
            if init.len() != dim {
                return err(format!("initial point has {} values for {dim} parameters", init.len()));
            }
        }
        if self.threads == Some(0) {
            return err("threads must be positive".into());
        }
        Ok(())
    }
}

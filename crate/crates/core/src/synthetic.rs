//! Synthetic datasets from a ground-truth parameterization of the biphasic toy model.
//!
//! At every delay the generator computes `p1` and `p3(t)`, adds independent
//! Gaussian noise to each and records either the noisy values (quantitative),
//! which one was larger (two categories) or whether their difference falls
//! below, inside or above a band of half-width `threshold` (three categories).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::likelihood::QuantitativePoint;
use crate::model::BiphasicToyModel;

/// How per-output noise combines into the standard deviation of `p1 - p3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaRule {
    /// `2 * sigma`.
    #[default]
    Sum,
    /// `sqrt(2) * sigma`, exact for independent noise.
    Quadrature,
}

impl SigmaRule {
    pub fn difference_sigma(self, per_output: f64) -> f64 {
        match self {
            Self::Sum => 2.0 * per_output,
            Self::Quadrature => std::f64::consts::SQRT_2 * per_output,
        }
    }
}

impl std::str::FromStr for SigmaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "quadrature" => Ok(Self::Quadrature),
            _ => Err(Error::Config(format!(
                "sigma rule must be `sum` or `quadrature`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CategoryMode {
    Quantitative,
    TwoCategory,
    /// Band half-width `threshold` on `p1 - p3`; `None` means 3x the difference sigma.
    ThreeCategory {
        threshold: Option<f64>,
    },
}

/// Outcome of one three-category observation of `y = p1 - p3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    /// `y < -threshold`: the secondary response clearly exceeds the primary.
    Lower,
    /// `|y| < threshold`: within error.
    Middle,
    /// `y > threshold`: the primary response clearly exceeds the secondary.
    Upper,
}

impl Category {
    pub fn classify(y: f64, threshold: f64) -> Self {
        if y < -threshold {
            Self::Lower
        } else if y > threshold {
            Self::Upper
        } else {
            Self::Middle
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub theta: Vec<f64>,
    pub delays: Vec<f64>,
    /// Noise standard deviation added to each output.
    pub noise_sigma: f64,
    pub mode: CategoryMode,
    pub seed: u64,
    pub sigma_rule: SigmaRule,
    /// Two-category `confidence`.
    pub confidence: f64,
    /// Three-category `pmin` and `pmax`.
    pub pmin: f64,
    pub pmax: f64,
}

impl SyntheticSpec {
    pub const DEFAULT_NOISE_SIGMA: f64 = 0.025;

    pub fn new(delays: Vec<f64>, mode: CategoryMode, seed: u64) -> Self {
        Self {
            theta: BiphasicToyModel::GROUND_TRUTH.to_vec(),
            delays,
            noise_sigma: Self::DEFAULT_NOISE_SIGMA,
            mode,
            seed,
            sigma_rule: SigmaRule::Sum,
            confidence: 0.98,
            pmin: 0.01,
            pmax: 0.98,
        }
    }

    /// Declared standard deviation of `p1 - p3`; emitted as `tolerance`.
    pub fn difference_sigma(&self) -> f64 {
        self.sigma_rule.difference_sigma(self.noise_sigma)
    }

    /// Three-category band half-width, also the toy model's `band`.
    pub fn threshold(&self) -> f64 {
        match self.mode {
            CategoryMode::ThreeCategory { threshold: Some(h) } => h,
            _ => 3.0 * self.difference_sigma(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.theta.len() != 5 {
            return err(format!("biphasic model takes 5 parameters, got {}", self.theta.len()));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return err(format!("noise sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.delays.is_empty() || self.delays.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return err("delays must be a non-empty list of non-negative numbers".into());
        }
        if let CategoryMode::ThreeCategory { .. } = self.mode {
            if !(self.threshold() > 0.0) {
                return err(format!(
                    "three-category threshold must be > 0, got {}",
                    self.threshold()
                ));
            }
        }
        if self.mode != CategoryMode::Quantitative && !(self.difference_sigma() > 0.0) {
            // a zero tolerance is legal but makes the step likelihood degenerate
            log::warn!("qualitative data generated with zero tolerance");
        }
        if !(self.confidence > 0.0 && self.confidence <= 1.0) {
            return err(format!("confidence must lie in (0, 1], got {}", self.confidence));
        }
        if !(0.0 <= self.pmin && self.pmin < self.pmax && self.pmax <= 1.0) {
            return err(format!(
                "need 0 <= pmin < pmax <= 1, got {} and {}",
                self.pmin, self.pmax
            ));
        }
        Ok(())
    }
}

/// Noisy `(p1, p3)` at one delay.
///
/// The noise stream is keyed by the seed and the delay's bit pattern, so
/// datasets over nested delay grids share their draws.
pub fn noisy_responses(spec: &SyntheticSpec, delay: f64) -> (f64, f64) {
    let (p1, p3) = BiphasicToyModel::responses(&spec.theta, delay);
    if spec.noise_sigma == 0.0 {
        return (p1, p3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(delay.to_bits());
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
    let n1 = noise.sample(&mut rng);
    let n3 = noise.sample(&mut rng);
    (p1 + n1, p3 + n3)
}

/// A generated dataset: quantitative rows and/or constraint statements.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyntheticDataset {
    pub quantitative: Vec<QuantitativePoint>,
    /// One constraint statement per line.
    pub statements: Vec<String>,
}

impl SyntheticDataset {
    pub fn constraint_text(&self) -> String {
        self.statements.iter().fold(String::new(), |mut s, l| {
            s.push_str(l);
            s.push('\n');
            s
        })
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut out = SyntheticDataset::default();
    let tol = spec.difference_sigma();
    for &t in &spec.delays {
        let (p1, p3) = noisy_responses(spec, t);
        let alias = BiphasicToyModel::delay_alias(t);
        match spec.mode {
            CategoryMode::Quantitative => {
                out.quantitative
                    .push(QuantitativePoint::new("p1", t, p1, nonzero(spec.noise_sigma))?);
                out.quantitative
                    .push(QuantitativePoint::new("p3", t, p3, nonzero(spec.noise_sigma))?);
            }
            CategoryMode::TwoCategory => {
                let op = if p1 > p3 { ">" } else { "<" };
                out.statements.push(format!(
                    "p1 {op} {alias} at time={t} confidence {} tolerance {tol}",
                    spec.confidence
                ));
            }
            CategoryMode::ThreeCategory { .. } => {
                let tail = format!("at time={t} pmin {} pmax {} tolerance {tol}", spec.pmin, spec.pmax);
                let mut push = |body: &str| out.statements.push(format!("{body} {tail}"));
                match Category::classify(p1 - p3, spec.threshold()) {
                    Category::Upper => push(&format!("{alias} < degrLow")),
                    Category::Lower => push(&format!("{alias} > degrHigh")),
                    Category::Middle => {
                        push(&format!("{alias} > degrLow"));
                        push(&format!("{alias} < degrHigh"));
                    }
                }
            }
        }
    }
    Ok(out)
}

// Noise-free quantitative data still needs a positive sigma to define a likelihood.
fn nonzero(sigma: f64) -> f64 {
    if sigma > 0.0 {
        sigma
    } else {
        f64::MIN_POSITIVE
    }
}

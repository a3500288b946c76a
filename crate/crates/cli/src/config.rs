//! Run configuration: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [run]
//! seed = 1
//! out = results
//!
//! [model]
//! name = biphasic
//! parameters = truth.params
//!
//! [protocol]
//! geometric = 64, 64
//!
//! [data]
//! constraints = data/constraints.txt
//!
//! [priors]
//! A = loguniform 0.1 10
//!
//! [sampler]
//! temperatures = 4
//! chains = 2
//! steps = 20000
//! burn_in = 4000
//! proposal_scale = 0.05
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qualifit::model::geometric_delays;
use qualifit::sampler::Prior;
use qualifit::synthetic::{CategoryMode, SigmaRule};
use qualifit::Objective;

use crate::error::CliError;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed but uninterpreted sections, keys in file order.
#[derive(Debug, Default)]
pub struct Ini {
    sections: BTreeMap<String, Vec<(String, Entry)>>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut ini = Ini::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::config(format!("line {line}: unterminated section header")))?
                    .trim();
                if ini.sections.contains_key(name) {
                    return Err(CliError::config(format!("line {line}: section [{name}] appears twice")));
                }
                ini.sections.insert(name.to_string(), Vec::new());
                current = Some(name.to_string());
                continue;
            }
            let Some(section) = current.as_ref() else {
                return Err(CliError::config(format!(
                    "line {line}: `{body}` appears before any [section]"
                )));
            };
            let Some((key, value)) = body.split_once('=') else {
                return Err(CliError::config(format!("line {line}: expected `key = value`")));
            };
            let key = key.trim().to_string();
            let entries = ini.sections.get_mut(section).unwrap();
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(CliError::config(format!(
                    "line {line}: `{key}` given twice in [{section}]"
                )));
            }
            entries.push((
                key,
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            ));
        }
        Ok(ini)
    }

    fn section<'a>(&'a self, name: &'a str, allowed: &[&str]) -> Result<Section<'a>, CliError> {
        let entries = self.sections.get(name).map(Vec::as_slice).unwrap_or(&[]);
        if !allowed.is_empty() {
            if let Some((key, e)) = entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
                return Err(CliError::config(format!(
                    "line {}: unknown key `{key}` in [{name}]; expected one of {}",
                    e.line,
                    allowed.join(", ")
                )));
            }
        }
        Ok(Section { name, entries })
    }

    fn check_sections(&self) -> Result<(), CliError> {
        const KNOWN: [&str; 9] = [
            "run", "model", "protocol", "data", "priors", "sampler", "fit", "generate", "analyze",
        ];
        match self.sections.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            Some(k) => Err(CliError::config(format!("unknown section [{k}]"))),
            None => Ok(()),
        }
    }
}

struct Section<'a> {
    name: &'a str,
    entries: &'a [(String, Entry)],
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                CliError::config(format!(
                    "line {}: invalid value `{}` for {}.{key}",
                    e.line, e.value, self.name
                ))
            }),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.raw(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| {
                CliError::config(format!(
                    "line {}: {}.{key} must be a comma-separated list of numbers",
                    e.line, self.name
                ))
            })
    }

    fn path(&self, key: &str, base: &Path) -> Option<PathBuf> {
        self.raw(key).map(|e| base.join(&e.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// Each chain starts at a draw from the prior.
    Prior,
    /// Every chain starts at the parameter-file values.
    Parameters,
}

#[derive(Debug, Clone)]
pub struct SamplerSettings {
    pub ladder: Vec<f64>,
    pub chains: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub swap_interval: usize,
    /// One value for all parameters or one per free parameter.
    pub proposal_scale: Vec<f64>,
    pub thin: usize,
    pub start: Start,
}

#[derive(Debug, Clone)]
pub struct GenerateSettings {
    pub mode: CategoryMode,
    pub noise_sigma: f64,
    pub sigma_rule: SigmaRule,
    pub confidence: f64,
    pub pmin: f64,
    pub pmax: f64,
}

#[derive(Debug, Clone)]
pub enum LogColumns {
    None,
    All,
    Names(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub runs: usize,
    pub threads: Option<usize>,
    pub model: String,
    pub parameters: Option<PathBuf>,
    pub band: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub step: f64,
    pub quantitative: Option<PathBuf>,
    pub constraints: Option<PathBuf>,
    pub objective: Objective,
    pub priors: Vec<(String, Prior)>,
    pub sampler: SamplerSettings,
    pub cooling: f64,
    pub generate: GenerateSettings,
    pub level: f64,
    pub bins: usize,
    pub log10: LogColumns,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_text(&text, base).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn from_text(text: &str, base: &Path) -> Result<Self, CliError> {
        let ini = Ini::parse(text)?;
        ini.check_sections()?;

        let run = ini.section("run", &["seed", "out", "runs", "threads"])?;
        let model = ini.section("model", &["name", "parameters", "band"])?;
        let protocol = ini.section("protocol", &["times", "geometric", "step"])?;
        let data = ini.section("data", &["quantitative", "constraints", "objective"])?;
        let priors = ini.section("priors", &[])?;
        let sampler = ini.section(
            "sampler",
            &[
                "temperatures",
                "t_max",
                "ladder",
                "chains",
                "steps",
                "burn_in",
                "swap_interval",
                "proposal_scale",
                "thin",
                "start",
            ],
        )?;
        let fit = ini.section("fit", &["cooling"])?;
        let generate = ini.section(
            "generate",
            &[
                "mode",
                "noise_sigma",
                "sigma_rule",
                "threshold",
                "confidence",
                "pmin",
                "pmax",
            ],
        )?;
        let analyze = ini.section("analyze", &["level", "bins", "log10"])?;

        let times = match (protocol.list("times")?, protocol.list("geometric")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "[protocol] takes either `times` or `geometric`, not both",
                ))
            }
            (Some(t), None) => Some(t),
            (None, Some(g)) => match g.as_slice() {
                &[count, max] if count >= 1.0 && count.fract() == 0.0 && max > 0.0 => {
                    Some(geometric_delays(count as usize, max))
                }
                _ => return Err(CliError::config("protocol.geometric must be `COUNT, MAX`")),
            },
            (None, None) => None,
        };

        let objective = match data.raw("objective").map(|e| e.value.as_str()) {
            None | Some("likelihood") => Objective::Likelihood,
            Some("penalty") => Objective::Penalty,
            Some(other) => {
                return Err(CliError::config(format!(
                    "data.objective must be `likelihood` or `penalty`, got `{other}`"
                )))
            }
        };

        let mut prior_list = Vec::new();
        for (name, e) in priors.entries {
            let p: Prior = e
                .value
                .parse()
                .map_err(|err| CliError::config(format!("line {}: prior for `{name}`: {err}", e.line)))?;
            prior_list.push((name.clone(), p));
        }

        let t_max: f64 = sampler.get_or("t_max", 100.0)?;
        let ladder = match sampler.list("ladder")? {
            Some(l) => l,
            None => qualifit::sampler::SamplerConfig::geometric_ladder(sampler.get_or("temperatures", 9usize)?, t_max),
        };
        let steps = sampler.get_or("steps", 50_000usize)?;
        let start = match sampler.raw("start").map(|e| e.value.as_str()) {
            None | Some("prior") => Start::Prior,
            Some("parameters") => Start::Parameters,
            Some(other) => {
                return Err(CliError::config(format!(
                    "sampler.start must be `prior` or `parameters`, got `{other}`"
                )))
            }
        };
        let sampler = SamplerSettings {
            ladder,
            chains: sampler.get_or("chains", 4)?,
            steps,
            burn_in: sampler.get_or("burn_in", steps / 5)?,
            swap_interval: sampler.get_or("swap_interval", 10)?,
            proposal_scale: sampler.list("proposal_scale")?.unwrap_or_else(|| vec![0.1]),
            thin: sampler.get_or("thin", 1)?,
            start,
        };

        let mode = match generate.raw("mode").map(|e| e.value.as_str()) {
            None | Some("two-category") => CategoryMode::TwoCategory,
            Some("three-category") => CategoryMode::ThreeCategory {
                threshold: generate.get("threshold")?,
            },
            Some("quantitative") => CategoryMode::Quantitative,
            Some(other) => {
                return Err(CliError::config(format!(
                    "generate.mode must be `two-category`, `three-category` or `quantitative`, got `{other}`"
                )))
            }
        };
        let sigma_rule = match generate.raw("sigma_rule") {
            None => SigmaRule::Sum,
            Some(e) => e
                .value
                .parse()
                .map_err(|err| CliError::config(format!("line {}: {err}", e.line)))?,
        };
        let generate = GenerateSettings {
            mode,
            noise_sigma: generate.get_or("noise_sigma", qualifit::synthetic::SyntheticSpec::DEFAULT_NOISE_SIGMA)?,
            sigma_rule,
            confidence: generate.get_or("confidence", 0.98)?,
            pmin: generate.get_or("pmin", 0.01)?,
            pmax: generate.get_or("pmax", 0.98)?,
        };

        let log10 = match analyze.raw("log10").map(|e| e.value.trim()) {
            None | Some("") | Some("none") => LogColumns::None,
            Some("all") => LogColumns::All,
            Some(list) => LogColumns::Names(list.split(',').map(|s| s.trim().to_string()).collect()),
        };

        let threads: Option<usize> = run.get("threads")?;
        Ok(RunConfig {
            seed: run.get_or("seed", 0)?,
            out: run.path("out", base).unwrap_or_else(|| base.join("out")),
            runs: run.get_or("runs", 1)?,
            threads,
            model: model.get_or("name", "biphasic".to_string())?,
            parameters: model.path("parameters", base),
            band: model.get("band")?,
            times,
            step: protocol.get_or("step", 0.01)?,
            quantitative: data.path("quantitative", base),
            constraints: data.path("constraints", base),
            objective,
            priors: prior_list,
            sampler,
            cooling: fit.get_or("cooling", 1e-3)?,
            generate,
            level: analyze.get_or("level", qualifit::analysis::DEFAULT_LEVEL)?,
            bins: analyze.get_or("bins", qualifit::analysis::DEFAULT_BINS)?,
            log10,
        })
    }
}

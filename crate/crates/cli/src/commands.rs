use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qualifit::analysis::{compare_widths, log10_columns, pairwise_correlation, plot_data_export, summarize};
use qualifit::constraint::{
    normalize, parse_constraints, parse_constraints_all, validate_category_family, ConstraintStatement,
};
use qualifit::data::{format_parameters, load_quantitative, parse_parameters, resolve_parameters, save_quantitative};
use qualifit::model::{builtin, BiphasicToyModel, Model, Protocol};
use qualifit::sampler::{anneal, format_float, pt_run, PosteriorSamples, Prior, SamplerConfig, Target};
use qualifit::synthetic::{generate, SyntheticSpec};
use qualifit::Problem;

use crate::config::{LogColumns, RunConfig, Start};
use crate::error::CliError;

pub const CONSTRAINTS_FILE: &str = "constraints.txt";
pub const QUANTITATIVE_FILE: &str = "data.csv";
pub const TRUTH_FILE: &str = "truth.params";
pub const FIT_FILE: &str = "fit.params";

pub fn samples_file(run: usize) -> String {
    format!("samples_{run}.csv")
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

fn build_model(cfg: &RunConfig) -> Result<Arc<dyn Model>, CliError> {
    if matches!(cfg.model.as_str(), "biphasic" | "biphasic-toy") {
        let band = cfg.band.unwrap_or(BiphasicToyModel::DEFAULT_BAND);
        return Ok(Arc::new(BiphasicToyModel::new(band)));
    }
    if cfg.band.is_some() {
        return Err(CliError::config(format!(
            "model.band only applies to the biphasic model, not `{}`",
            cfg.model
        )));
    }
    builtin(&cfg.model).map(Arc::from).ok_or_else(|| {
        CliError::config(format!(
            "unknown model `{}`; built-in models are biphasic and decay",
            cfg.model
        ))
    })
}

/// Model defaults overridden by the parameter file, in model order.
fn parameter_values(cfg: &RunConfig, model: &dyn Model) -> Result<Vec<f64>, CliError> {
    let given = match &cfg.parameters {
        None => Vec::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read parameter file {}: {e}", path.display())))?;
            parse_parameters(&text).map_err(|e| CliError::from(e).context(&path.display().to_string()))?
        }
    };
    Ok(resolve_parameters(&model.parameter_names(), &model.defaults(), &given)?)
}

fn protocol(cfg: &RunConfig) -> Result<Protocol, CliError> {
    let times = cfg
        .times
        .clone()
        .ok_or_else(|| CliError::config("[protocol] needs `times` or `geometric`"))?;
    Ok(Protocol::new(times, cfg.step)?)
}

fn read_statements(path: &Path) -> Result<Vec<ConstraintStatement>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read constraints {}: {e}", path.display())))?;
    parse_constraints(&text).map_err(|d| CliError::data(format!("{}: {d}", path.display())))
}

/// The problem restricted to the parameters that carry a prior; the rest stay fixed.
struct Posterior {
    problem: Problem,
    base: Vec<f64>,
    free: Vec<usize>,
    names: Vec<String>,
    priors: Vec<Prior>,
}

impl Posterior {
    fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let model = build_model(cfg)?;
        let base = parameter_values(cfg, model.as_ref())?;
        let all = model.parameter_names();
        if cfg.priors.is_empty() {
            return Err(CliError::config("[priors] must declare at least one parameter"));
        }
        let mut free = Vec::new();
        let mut names = Vec::new();
        let mut priors = Vec::new();
        for (i, name) in all.iter().enumerate() {
            if let Some((_, p)) = cfg.priors.iter().find(|(n, _)| n == name) {
                free.push(i);
                names.push(name.clone());
                priors.push(*p);
            }
        }
        if let Some((unknown, _)) = cfg.priors.iter().find(|(n, _)| !all.contains(n)) {
            return Err(CliError::config(format!(
                "prior for unknown parameter `{unknown}`; {} parameters are {}",
                model.name(),
                all.join(", ")
            )));
        }
        let quantitative = match &cfg.quantitative {
            Some(path) => load_quantitative(path)?,
            None => Vec::new(),
        };
        let statements = match &cfg.constraints {
            Some(path) => read_statements(path)?,
            None => Vec::new(),
        };
        let problem = Problem::new(model, protocol(cfg)?, quantitative, &statements, cfg.objective)?;
        Ok(Self {
            problem,
            base,
            free,
            names,
            priors,
        })
    }

    fn full(&self, theta: &[f64]) -> Vec<f64> {
        let mut full = self.base.clone();
        for (&i, &v) in self.free.iter().zip(theta) {
            full[i] = v;
        }
        full
    }

    fn sampler_config(&self, cfg: &RunConfig, seed: u64) -> Result<SamplerConfig, CliError> {
        let s = &cfg.sampler;
        let dim = self.free.len();
        let proposal_scale = match s.proposal_scale.as_slice() {
            [one] => vec![*one; dim],
            many if many.len() == dim => many.to_vec(),
            many => {
                return Err(CliError::config(format!(
                    "sampler.proposal_scale has {} values for {dim} free parameters",
                    many.len()
                )))
            }
        };
        let initial = match s.start {
            Start::Prior => None,
            Start::Parameters => Some(self.free.iter().map(|&i| self.base[i]).collect()),
        };
        let config = SamplerConfig {
            temperatures: s.ladder.clone(),
            chains_per_temperature: s.chains,
            n_steps: s.steps,
            burn_in: s.burn_in,
            swap_interval: s.swap_interval,
            proposal_scale,
            seed,
            thin: s.thin,
            threads: cfg.threads,
            initial,
        };
        config.validate(dim)?;
        Ok(config)
    }
}

impl Target for Posterior {
    fn objective(&self, theta: &[f64]) -> f64 {
        self.problem.evaluate(&self.full(theta))
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<String, CliError> {
    if !matches!(cfg.model.as_str(), "biphasic" | "biphasic-toy") {
        return Err(CliError::config(format!(
            "synthetic data is generated from the biphasic model, not `{}`",
            cfg.model
        )));
    }
    let model = build_model(cfg)?;
    let theta = parameter_values(cfg, model.as_ref())?;
    let g = &cfg.generate;
    let spec = SyntheticSpec {
        theta: theta.clone(),
        delays: protocol(cfg)?.times,
        noise_sigma: g.noise_sigma,
        mode: g.mode,
        seed: cfg.seed,
        sigma_rule: g.sigma_rule,
        confidence: g.confidence,
        pmin: g.pmin,
        pmax: g.pmax,
    };
    let data = generate(&spec)?;
    create_dir(&cfg.out)?;
    write(
        &cfg.out.join(TRUTH_FILE),
        &format_parameters(&model.parameter_names(), &theta),
    )?;
    let mut report = String::new();
    if data.quantitative.is_empty() {
        let path = cfg.out.join(CONSTRAINTS_FILE);
        write(&path, &data.constraint_text())?;
        writeln!(
            report,
            "wrote {} statements to {}",
            data.statements.len(),
            path.display()
        )
        .unwrap();
    } else {
        let path = cfg.out.join(QUANTITATIVE_FILE);
        save_quantitative(&data.quantitative, &path)?;
        writeln!(report, "wrote {} points to {}", data.quantitative.len(), path.display()).unwrap();
    }
    Ok(report)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<String, CliError> {
    let post = Posterior::build(cfg)?;
    create_dir(&cfg.out)?;
    let mut report = String::new();
    for run in 0..cfg.runs {
        let config = post.sampler_config(cfg, cfg.seed.wrapping_add(run as u64))?;
        let (samples, stats) = pt_run(&config, &post.priors, &post.names, &post)?;
        if samples.rows().iter().all(|r| !r.nll.is_finite()) {
            return Err(CliError::runtime(format!(
                "run {run}: every recorded sample has a non-finite objective; check the model and priors"
            )));
        }
        let path = cfg.out.join(samples_file(run));
        samples.save(&path)?;
        let acc: Vec<String> = stats.acceptance.iter().map(|a| format!("{a:.3}")).collect();
        let swap: Vec<String> = stats.swap_acceptance.iter().map(|a| format!("{a:.3}")).collect();
        writeln!(
            report,
            "run {run}: {} samples -> {}\n  acceptance by temperature: {}\n  swap acceptance: {}\n  failed evaluations: {}",
            samples.len(),
            path.display(),
            acc.join(" "),
            swap.join(" "),
            stats.failures
        )
        .unwrap();
    }
    Ok(report)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<String, CliError> {
    let post = Posterior::build(cfg)?;
    let config = post.sampler_config(cfg, cfg.seed)?;
    let fit = anneal(&config, &post.priors, &post, cfg.cooling)?;
    if !fit.objective.is_finite() {
        return Err(CliError::runtime("no finite objective value was found"));
    }
    let full = post.full(&fit.theta);
    create_dir(&cfg.out)?;
    let path = cfg.out.join(FIT_FILE);
    write(&path, &format_parameters(&post.problem.parameter_names(), &full))?;
    Ok(format!(
        "initial objective {}\nbest objective {}\nwrote {}\n",
        format_float(fit.initial_objective),
        format_float(fit.objective),
        path.display()
    ))
}

fn load_samples(files: &[PathBuf]) -> Result<PosteriorSamples, CliError> {
    let sets = files
        .iter()
        .map(|f| PosteriorSamples::load(f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PosteriorSamples::merge(&sets)?)
}

fn transform(cfg: &RunConfig, samples: PosteriorSamples) -> Result<PosteriorSamples, CliError> {
    let which: Vec<String> = match &cfg.log10 {
        LogColumns::None => return Ok(samples),
        LogColumns::All => samples.names().to_vec(),
        LogColumns::Names(n) => n.clone(),
    };
    if let Some(bad) = which.iter().find(|n| !samples.names().contains(n)) {
        return Err(CliError::config(format!("cannot log-transform unknown column `{bad}`")));
    }
    Ok(log10_columns(&samples, &which)?)
}

/// Sample files of every run in `dir`, in run order.
pub fn run_files(dir: &Path) -> Vec<PathBuf> {
    (0..)
        .map(|k| dir.join(samples_file(k)))
        .take_while(|p| p.exists())
        .collect()
}

pub fn cmd_analyze(cfg: &RunConfig, files: &[PathBuf], compare: &[String]) -> Result<String, CliError> {
    let files = if files.is_empty() {
        run_files(&cfg.out)
    } else {
        files.to_vec()
    };
    if files.is_empty() && compare.is_empty() {
        return Err(CliError::config(format!(
            "no sample files given and none found in {}",
            cfg.out.display()
        )));
    }
    create_dir(&cfg.out)?;
    let mut report = String::new();
    if !files.is_empty() {
        let samples = transform(cfg, load_samples(&files)?)?;
        let summaries = summarize(&samples, cfg.level, cfg.bins)?;
        plot_data_export(&summaries, &samples, &cfg.out)?;
        let corr = pairwise_correlation(&samples)?;
        let mut text = format!("param,{}\n", samples.names().join(","));
        for (name, row) in samples.names().iter().zip(&corr) {
            let cells: Vec<String> = row.iter().map(|&r| format_float(r)).collect();
            writeln!(text, "{name},{}", cells.join(",")).unwrap();
        }
        write(&cfg.out.join("correlation.csv"), &text)?;
        writeln!(report, "{} samples from {} file(s)", samples.len(), files.len()).unwrap();
        writeln!(
            report,
            "{:<16}{:>12}{:>12}{:>12}{:>12}{:>12}",
            "param", "mean", "median", "lo", "hi", "width"
        )
        .unwrap();
        for m in &summaries {
            writeln!(
                report,
                "{:<16}{:>12.5}{:>12.5}{:>12.5}{:>12.5}{:>12.5}",
                m.name,
                m.mean,
                m.median,
                m.lo,
                m.hi,
                m.width()
            )
            .unwrap();
        }
    }
    if !compare.is_empty() {
        let mut labels = Vec::new();
        let mut sets = Vec::new();
        for item in compare {
            let (label, list) = item
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("--compare expects LABEL=FILE[,FILE...], got `{item}`")))?;
            let paths: Vec<PathBuf> = list.split(',').map(PathBuf::from).collect();
            let samples = transform(cfg, load_samples(&paths)?)?;
            labels.push(label.to_string());
            sets.push(summarize(&samples, cfg.level, 1)?);
        }
        let widths = compare_widths(&labels, &sets)?;
        write(&cfg.out.join("widths.csv"), &widths.to_csv())?;
        report.push_str(&widths.render(0.0));
    }
    Ok(report)
}

/// Parses and normalizes a constraint file; returns the report and whether it is clean.
pub fn cmd_check(path: &Path, strict: bool) -> Result<String, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let (stmts, mut errors) = parse_constraints_all(&text);
    for s in &stmts {
        if let Err(d) = normalize(s) {
            errors.push(d);
        }
    }
    errors.sort_by_key(|d| (d.span.line, d.span.column));
    let warnings = validate_category_family(&stmts);
    let mut report = String::new();
    for d in &errors {
        writeln!(report, "{}:{d}", path.display()).unwrap();
    }
    for w in &warnings {
        writeln!(report, "{}: warning: {w}", path.display()).unwrap();
    }
    if !errors.is_empty() || (strict && !warnings.is_empty()) {
        return Err(CliError::data(format!(
            "{report}{}: {} error(s), {} warning(s)",
            path.display(),
            errors.len(),
            warnings.len()
        )));
    }
    writeln!(
        report,
        "{}: {} statements, {} warning(s)",
        path.display(),
        stmts.len(),
        warnings.len()
    )
    .unwrap();
    Ok(report)
}

/// Default analysis settings for runs without a config file.
pub fn default_config(out: Option<PathBuf>) -> RunConfig {
    let mut cfg = RunConfig::from_text("", Path::new(".")).expect("empty config is valid");
    if let Some(out) = out {
        cfg.out = out;
    }
    cfg
}

mod common;

use std::sync::Arc;

use common::{every_nth, ks_one_sample, ks_two_sample, mean, variance};
use qualifit::constraint::parse_constraints;
use qualifit::likelihood::QuantitativePoint;
use qualifit::model::{DecayOdeModel, Protocol};
use qualifit::sampler::{anneal, pt_run, Prior, SamplerConfig, Target};
use qualifit::{Objective, Problem};

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn flat(dim: usize, half: f64) -> Vec<Prior> {
    vec![Prior::uniform(-half, half).unwrap(); dim]
}

fn single_level(per: usize, steps: usize, scale: f64, dim: usize, seed: u64) -> SamplerConfig {
    let mut c = SamplerConfig::new(1, per, steps, steps / 10, dim);
    c.proposal_scale = vec![scale; dim];
    c.seed = seed;
    c
}

#[test]
fn standard_normal_moments() {
    let target = |x: &[f64]| 0.5 * x[0] * x[0];
    let cfg = single_level(4, 100_000, 2.4, 1, 11);
    let (samples, stats) = pt_run(&cfg, &flat(1, 20.0), &names(1), &target).unwrap();
    let x = samples.column(0);
    assert!(mean(&x).abs() < 0.03, "mean {}", mean(&x));
    let v = variance(&x);
    assert!((0.95..=1.05).contains(&v), "variance {v}");
    assert!(stats.acceptance[0] > 0.2 && stats.acceptance[0] < 0.7);
}

#[test]
fn correlated_gaussian_covariance() {
    let cov = [[1.0, 0.8], [0.8, 2.0]];
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let prec = [[cov[1][1] / det, -cov[0][1] / det], [-cov[1][0] / det, cov[0][0] / det]];
    let target =
        move |x: &[f64]| 0.5 * (prec[0][0] * x[0] * x[0] + 2.0 * prec[0][1] * x[0] * x[1] + prec[1][1] * x[1] * x[1]);
    let cfg = single_level(4, 50_000, 1.2, 2, 5);
    let (samples, _) = pt_run(&cfg, &flat(2, 30.0), &names(2), &target).unwrap();
    assert!(samples.len() >= 180_000);
    let (a, b) = (samples.column(0), samples.column(1));
    let (ma, mb) = (mean(&a), mean(&b));
    let n = a.len() as f64 - 1.0;
    let cab = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let est = [[variance(&a), cab], [cab, variance(&b)]];
    let frob = |m: [[f64; 2]; 2]| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let diff = [
        [est[0][0] - cov[0][0], est[0][1] - cov[0][1]],
        [est[1][0] - cov[1][0], est[1][1] - cov[1][1]],
    ];
    let rel = frob(diff) / frob(cov);
    assert!(rel < 0.15, "relative Frobenius error {rel}");
}

fn bimodal(x: &[f64]) -> f64 {
    let a = -0.5 * (x[0] - 5.0).powi(2);
    let b = -0.5 * (x[0] + 5.0).powi(2);
    let m = a.max(b);
    -(m + ((a - m).exp() + (b - m).exp()).ln())
}

fn occupancy_ratio(samples: &[f64]) -> f64 {
    let right = samples.iter().filter(|&&v| v > 0.0).count() as f64;
    right / (samples.len() as f64 - right)
}

#[test]
fn tempering_balances_separated_modes() {
    let mut pt = SamplerConfig::new(5, 2, 40_000, 4_000, 1);
    pt.proposal_scale = vec![1.0];
    pt.initial = Some(vec![-5.0]);
    pt.seed = 3;
    let (s, stats) = pt_run(&pt, &flat(1, 20.0), &names(1), &bimodal).unwrap();
    let r = occupancy_ratio(&s.column(0));
    assert!((0.8..=1.25).contains(&r), "tempered ratio {r}");
    assert!(
        stats.swap_acceptance.iter().all(|&a| a > 0.05),
        "{:?}",
        stats.swap_acceptance
    );

    let mut mh = single_level(2, 40_000, 1.0, 1, 3);
    mh.initial = Some(vec![-5.0]);
    let (s, _) = pt_run(&mh, &flat(1, 20.0), &names(1), &bimodal).unwrap();
    let r = occupancy_ratio(&s.column(0));
    assert!(!(0.8..=1.25).contains(&r), "single-temperature ratio {r}");
}

fn empty_decay_problem() -> Problem {
    Problem::new(
        Arc::new(DecayOdeModel),
        Protocol::uniform(1.0, 0.5, 0.05).unwrap(),
        vec![],
        &[],
        Objective::Likelihood,
    )
    .unwrap()
}

#[test]
fn zero_data_reproduces_prior() {
    let priors = vec![
        Prior::log_uniform(0.1, 100.0).unwrap(),
        Prior::uniform(0.0, 2.0).unwrap(),
    ];
    let problem = empty_decay_problem();
    let mut cfg = SamplerConfig::new(3, 2, 60_000, 1_000, 2);
    cfg.proposal_scale = vec![0.75, 0.5];
    cfg.thin = 50;
    cfg.seed = 17;
    let (samples, _) = pt_run(&cfg, &priors, &problem.parameter_names(), &problem).unwrap();
    for (i, prior) in priors.iter().enumerate() {
        let x: Vec<f64> = samples.column(i).iter().map(|&v| prior.to_sampling(v)).collect();
        let (d, p) = ks_one_sample(&x, |v| prior.sampling_cdf(v));
        assert!(p > 0.01, "parameter {i}: D = {d}, p = {p}");
    }
}

#[test]
fn exchanges_at_equal_temperatures_preserve_the_target() {
    let target = |x: &[f64]| 0.5 * x[0] * x[0] + 0.25 * x[0].powi(4);
    for seed in 0..3 {
        let mut swapped = SamplerConfig::new(1, 1, 40_000, 2_000, 1);
        swapped.temperatures = vec![1.0, 1.0, 1.0];
        swapped.proposal_scale = vec![1.5];
        swapped.seed = seed;
        swapped.thin = 20;
        let (a, stats) = pt_run(&swapped, &flat(1, 10.0), &names(1), &target).unwrap();
        assert!(stats.swap_acceptance.iter().all(|&r| r == 1.0));

        let mut plain = swapped.clone();
        plain.temperatures = vec![1.0];
        plain.seed = seed + 100;
        let (b, _) = pt_run(&plain, &flat(1, 10.0), &names(1), &target).unwrap();
        let (d, p) = ks_two_sample(&a.column(0), &b.column(0));
        assert!(p > 0.01, "seed {seed}: D = {d}, p = {p}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let target = |x: &[f64]| 0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1]);
    let mut cfg = SamplerConfig::new(4, 3, 3_000, 500, 2);
    cfg.seed = 99;
    let mut runs = Vec::new();
    for threads in [Some(1), Some(4), None] {
        cfg.threads = threads;
        let (s, stats) = pt_run(&cfg, &flat(2, 10.0), &names(2), &target).unwrap();
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        runs.push((csv, stats));
    }
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn reference_schedule_is_valid() {
    let cfg = SamplerConfig::reference(5);
    cfg.validate(5).unwrap();
    assert_eq!(cfg.n_chains(), 36);
    assert_eq!(cfg.temperatures.len(), 9);
    assert_eq!((cfg.n_steps, cfg.burn_in), (50_000, 10_000));
}

const DECAY_TIMES: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];
// x(t) = exp(-0.7 t) plus fixed perturbations
const DECAY_NOISE: [f64; 5] = [0.031, -0.022, 0.012, -0.041, 0.018];
const DECAY_SIGMA: f64 = 0.05;

fn decay_data() -> Vec<QuantitativePoint> {
    DECAY_TIMES
        .iter()
        .zip(DECAY_NOISE)
        .map(|(&t, e)| QuantitativePoint::new("x", t, (-0.7 * t).exp() + e, DECAY_SIGMA).unwrap())
        .collect()
}

fn decay_problem() -> Problem {
    Problem::new(
        Arc::new(DecayOdeModel),
        Protocol::new(DECAY_TIMES.to_vec(), 0.01).unwrap(),
        decay_data(),
        &[],
        Objective::Likelihood,
    )
    .unwrap()
}

/// Closed-form negative log likelihood of the decay data.
fn decay_nll(k: f64, x0: f64) -> f64 {
    decay_data()
        .iter()
        .map(|p| {
            (p.value - DecayOdeModel::closed_form(k, x0, p.enforcement_time)).powi(2)
                / (2.0 * DECAY_SIGMA * DECAY_SIGMA)
        })
        .sum()
}

/// Posterior moments of `log10 k` and `x0` on a dense grid over the prior box.
fn grid_posterior() -> ([f64; 2], [f64; 2], (f64, f64)) {
    let n = 600;
    let (lk_lo, lk_hi, x_lo, x_hi) = (-2.0, 1.0, 0.5, 1.5);
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let lk = lk_lo + (lk_hi - lk_lo) * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let x0 = x_lo + (x_hi - x_lo) * (j as f64 + 0.5) / n as f64;
            pts.push((lk, x0, decay_nll(10f64.powf(lk), x0)));
        }
    }
    let best = pts.iter().copied().min_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
    let w: Vec<f64> = pts.iter().map(|p| (best.2 - p.2).exp()).collect();
    let z: f64 = w.iter().sum();
    let m = [
        pts.iter().zip(&w).map(|(p, w)| p.0 * w).sum::<f64>() / z,
        pts.iter().zip(&w).map(|(p, w)| p.1 * w).sum::<f64>() / z,
    ];
    let sd = [
        (pts.iter().zip(&w).map(|(p, w)| (p.0 - m[0]).powi(2) * w).sum::<f64>() / z).sqrt(),
        (pts.iter().zip(&w).map(|(p, w)| (p.1 - m[1]).powi(2) * w).sum::<f64>() / z).sqrt(),
    ];
    (m, sd, (10f64.powf(best.0), best.1))
}

fn decay_priors() -> Vec<Prior> {
    vec![
        Prior::log_uniform(0.01, 10.0).unwrap(),
        Prior::uniform(0.5, 1.5).unwrap(),
    ]
}

#[test]
fn decay_posterior_matches_grid() {
    let problem = decay_problem();
    let (m, sd, _) = grid_posterior();
    let mut cfg = SamplerConfig::new(3, 2, 30_000, 3_000, 2);
    cfg.proposal_scale = vec![0.05, 0.05];
    cfg.seed = 8;
    let (samples, stats) = pt_run(&cfg, &decay_priors(), &problem.parameter_names(), &problem).unwrap();
    assert_eq!(stats.failures, 0);
    let lk: Vec<f64> = samples.column(0).iter().map(|k| k.log10()).collect();
    let x0 = samples.column(1);
    assert!(
        (mean(&lk) - m[0]).abs() < 0.15 * sd[0],
        "log10 k: {} vs {}",
        mean(&lk),
        m[0]
    );
    assert!((mean(&x0) - m[1]).abs() < 0.15 * sd[1], "x0: {} vs {}", mean(&x0), m[1]);
    let sd_lk = variance(&lk).sqrt();
    assert!((sd_lk / sd[0] - 1.0).abs() < 0.1, "{sd_lk} vs {}", sd[0]);
    // thinned draws stay consistent with the full chain
    assert!((mean(&every_nth(&lk, 7)) - mean(&lk)).abs() < 0.2 * sd[0]);
}

#[test]
fn annealing_finds_the_likelihood_optimum() {
    let problem = decay_problem();
    let (_, _, (k_best, x0_best)) = grid_posterior();
    let mut cfg = SamplerConfig::new(4, 2, 8_000, 0, 2);
    cfg.proposal_scale = vec![0.05, 0.05];
    cfg.seed = 21;
    let fit = anneal(&cfg, &decay_priors(), &problem, 1e-3).unwrap();
    assert!(fit.objective <= fit.initial_objective);
    assert!(
        (fit.theta[0] / k_best - 1.0).abs() < 0.05,
        "k {} vs {k_best}",
        fit.theta[0]
    );
    assert!((fit.theta[1] - x0_best).abs() < 0.02);
    assert!((problem.objective(&fit.theta) - fit.objective).abs() < 1e-12);
}

#[test]
fn annealing_satisfies_penalty_constraints() {
    let stmts =
        parse_constraints("x<0.3 at time=2 weight 1\nx>0.2 at time=2 weight 5\nx>0.9 at time=0 weight 1").unwrap();
    let problem = Problem::new(
        Arc::new(DecayOdeModel),
        Protocol::uniform(2.0, 0.5, 0.01).unwrap(),
        vec![],
        &stmts,
        Objective::Penalty,
    )
    .unwrap();
    let mut cfg = SamplerConfig::new(3, 2, 4_000, 0, 2);
    cfg.seed = 4;
    cfg.initial = Some(vec![0.05, 0.6]);
    let fit = anneal(&cfg, &decay_priors(), &problem, 1e-2).unwrap();
    assert!(fit.initial_objective > 0.0);
    assert_eq!(fit.objective, 0.0);
    assert_eq!(problem.penalty(&fit.theta).unwrap(), 0.0);
}

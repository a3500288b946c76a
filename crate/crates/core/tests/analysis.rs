mod common;

use common::binomial_se;
use proptest::prelude::*;
use qualifit::analysis::*;
use qualifit::sampler::{PosteriorSamples, SampleRow};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn table(names: &[&str], cols: &[Vec<f64>]) -> PosteriorSamples {
    let rows = (0..cols[0].len())
        .map(|j| SampleRow {
            chain: j % 3,
            step: j / 3 + 1,
            nll: 0.0,
            theta: cols.iter().map(|c| c[j]).collect(),
        })
        .collect();
    PosteriorSamples::new(names.iter().map(|s| s.to_string()).collect(), rows).unwrap()
}

#[test]
fn uniform_interval_has_nominal_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000;
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let m = summarize_values("u", u, 0.95, DEFAULT_BINS).unwrap();
    assert!(
        (m.lo - 0.025).abs() < 0.003 && (m.hi - 0.975).abs() < 0.003,
        "{} {}",
        m.lo,
        m.hi
    );
    assert!((m.median - 0.5).abs() < 0.005);
    let fresh = (0..n).filter(|_| m.contains(rng.random::<f64>())).count() as f64 / n as f64;
    assert!((fresh - 0.95).abs() < 4.0 * binomial_se(0.95, n) + 0.003, "{fresh}");
    assert_eq!(m.histogram.total(), n as u64);
}

#[test]
fn independent_columns_are_uncorrelated() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let c: Vec<f64> = a.iter().map(|x| 3.0 - 2.0 * x).collect();
    let r = pairwise_correlation(&table(&["a", "b", "c"], &[a, b, c])).unwrap();
    assert!(r[0][1].abs() < 0.02, "{}", r[0][1]);
    assert!((r[0][2] + 1.0).abs() < 1e-12);
    assert_eq!(r[1][0], r[0][1]);
}

#[test]
fn log_columns_and_export() {
    let k: Vec<f64> = (1..=200).map(|i| 10f64.powf(i as f64 / 100.0)).collect();
    let x: Vec<f64> = (0..200).map(|i| i as f64).collect();
    let s = log10_columns(&table(&["k", "x"], &[k, x]), &["k".to_string()]).unwrap();
    assert_eq!(s.names(), ["log10(k)", "x"]);
    let summaries = summarize(&s, DEFAULT_LEVEL, 10).unwrap();
    assert!((summaries[0].mean - 1.005).abs() < 1e-12);
    let dir = tempfile::tempdir().unwrap();
    let written = plot_data_export(&summaries, &s, dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["summary.csv", "log10_k_.hist", "x.hist", "log10_k_.trace", "x.trace"]
    );
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(1).unwrap().starts_with("log10(k),"));
    let trace = std::fs::read_to_string(dir.path().join("x.trace")).unwrap();
    assert_eq!(trace.lines().count(), 201);
    let hist = std::fs::read_to_string(dir.path().join("x.hist")).unwrap();
    let total: u64 = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 200);
}

#[test]
fn width_report_detects_growth() {
    let mk = |w: f64| {
        vec![MarginalSummary {
            name: "a".into(),
            mean: 0.0,
            median: 0.0,
            lo: -w / 2.0,
            hi: w / 2.0,
            level: 0.95,
            histogram: Histogram::new(&[0.0], 1),
        }]
    };
    let labels: Vec<String> = ["8", "16", "32", "64"].iter().map(|s| s.to_string()).collect();
    let report = compare_widths(&labels, &[mk(2.0), mk(1.5), mk(1.55), mk(1.0)]).unwrap();
    assert!(report.is_non_increasing(0, 0.05));
    assert_eq!(report.increases(0, 0.0), 1);
    assert!(report.to_csv().starts_with("param,8,16,32,64\na,"));
}

proptest! {
    #[test]
    fn quantiles_interpolate_order_statistics(mut v in prop::collection::vec(-1e6..1e6f64, 1..60), p in 0.0..=1.0f64) {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        prop_assert_eq!(quantile_sorted(&v, 0.0), v[0]);
        prop_assert_eq!(quantile_sorted(&v, 1.0), v[n - 1]);
        if n > 1 {
            for (k, x) in v.iter().enumerate() {
                // the position k / (n - 1) * (n - 1) may round just below k
                prop_assert!((quantile_sorted(&v, k as f64 / (n - 1) as f64) - x).abs() < 1e-8);
            }
        }
        let q = quantile_sorted(&v, p);
        prop_assert!(q >= v[0] && q <= v[n - 1]);
        prop_assert!(quantile_sorted(&v, (p + 0.1).min(1.0)) >= q);
    }

    #[test]
    fn summary_ignores_row_order(v in prop::collection::vec(-1e3..1e3f64, 1..200), seed in any::<u64>()) {
        let mut w = v.clone();
        w.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = summarize_values("p", v, 0.9, 7).unwrap();
        let b = summarize_values("p", w, 0.9, 7).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn histogram_bins_cover_every_sample(v in prop::collection::vec(-50.0..50.0f64, 1..300), bins in 1usize..50) {
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let h = Histogram::new(&s, bins);
        prop_assert_eq!(h.total(), v.len() as u64);
        prop_assert_eq!(h.counts.len() + 1, h.edges.len());
        prop_assert!(h.edges.windows(2).all(|e| e[0] <= e[1]));
        prop_assert_eq!(h.edges[0], s[0]);
        prop_assert_eq!(*h.edges.last().unwrap(), s[s.len() - 1]);
    }
}

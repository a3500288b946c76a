//! Posterior summaries: marginal statistics, credible intervals, histograms,
//! correlations and width comparisons across datasets.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sampler::{format_float, PosteriorSamples, SampleRow};

pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_BINS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed.
    pub fn new(sorted: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let (lo, hi) = match (sorted.first(), sorted.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => {
                return Self {
                    edges: vec![0.0, 0.0],
                    counts: vec![0],
                }
            }
        };
        if lo == hi {
            return Self {
                edges: vec![lo, hi],
                counts: vec![sorted.len() as u64],
            };
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        edges[bins] = hi;
        let mut counts = vec![0u64; bins];
        for &v in sorted {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSummary {
    pub name: String,
    pub mean: f64,
    pub median: f64,
    /// Equal-tailed interval at `level`.
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub histogram: Histogram,
}

impl MarginalSummary {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Quantile of sorted data by linear interpolation between order statistics:
/// position `(n - 1) p`, 0-based.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 >= sorted.len() || frac == 0.0 {
        return sorted[i];
    }
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}

/// Summarizes one column of values.
pub fn summarize_values(name: &str, values: Vec<f64>, level: f64, bins: usize) -> Result<MarginalSummary> {
    if values.is_empty() {
        return Err(Error::Config(format!("no samples for `{name}`")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("credible level must lie in (0, 1), got {level}")));
    }
    let v = sorted(values);
    // summing in sorted order makes the mean independent of row order
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let tail = (1.0 - level) / 2.0;
    Ok(MarginalSummary {
        name: name.to_string(),
        mean,
        median: quantile_sorted(&v, 0.5),
        lo: quantile_sorted(&v, tail),
        hi: quantile_sorted(&v, 1.0 - tail),
        level,
        histogram: Histogram::new(&v, bins),
    })
}

/// Marginal summary of every parameter.
pub fn summarize(samples: &PosteriorSamples, level: f64, bins: usize) -> Result<Vec<MarginalSummary>> {
    if samples.is_empty() {
        return Err(Error::Config("cannot summarize an empty sample set".into()));
    }
    samples
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| summarize_values(name, samples.column(i), level, bins))
        .collect()
}

/// Replaces the listed parameters by their base-10 logarithm, renamed `log10(name)`.
pub fn log10_columns(samples: &PosteriorSamples, which: &[String]) -> Result<PosteriorSamples> {
    let flags: Vec<bool> = samples.names().iter().map(|n| which.contains(n)).collect();
    let names = samples
        .names()
        .iter()
        .zip(&flags)
        .map(|(n, &f)| if f { format!("log10({n})") } else { n.clone() })
        .collect();
    let rows = samples
        .rows()
        .iter()
        .map(|r| SampleRow {
            theta: r
                .theta
                .iter()
                .zip(&flags)
                .map(|(&v, &f)| if f { v.log10() } else { v })
                .collect(),
            ..r.clone()
        })
        .collect();
    PosteriorSamples::new(names, rows)
}

/// Pearson correlation matrix. Columns without variance get NaN off the diagonal.
pub fn pairwise_correlation(samples: &PosteriorSamples) -> Result<Vec<Vec<f64>>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Config("correlation needs at least two samples".into()));
    }
    let cols: Vec<Vec<f64>> = (0..samples.names().len()).map(|i| samples.column(i)).collect();
    let centered: Vec<(Vec<f64>, f64)> = cols
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n as f64;
            let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
            let ss = d.iter().map(|x| x * x).sum::<f64>();
            (d, ss.sqrt())
        })
        .collect();
    let k = cols.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        m[i][i] = 1.0;
        for j in i + 1..k {
            let (di, si) = &centered[i];
            let (dj, sj) = &centered[j];
            let r = if *si == 0.0 || *sj == 0.0 {
                f64::NAN
            } else {
                let dot: f64 = di.iter().zip(dj).map(|(a, b)| a * b).sum();
                (dot / (si * sj)).clamp(-1.0, 1.0)
            };
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

/// Interval widths of each parameter across datasets, in the order given.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthReport {
    pub labels: Vec<String>,
    pub params: Vec<String>,
    /// `widths[p][d]`: width of parameter `p` in dataset `d`.
    pub widths: Vec<Vec<f64>>,
}

impl WidthReport {
    /// Number of adjacent dataset pairs where the width of parameter `p` grows
    /// by more than the relative `slack`.
    pub fn increases(&self, p: usize, slack: f64) -> usize {
        self.widths[p]
            .windows(2)
            .filter(|w| w[1] > w[0] * (1.0 + slack))
            .count()
    }

    pub fn is_non_increasing(&self, p: usize, slack: f64) -> bool {
        self.increases(p, slack) == 0
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("param,{}\n", self.labels.join(","));
        for (name, row) in self.params.iter().zip(&self.widths) {
            let cells: Vec<String> = row.iter().map(|&w| format_float(w)).collect();
            writeln!(s, "{name},{}", cells.join(",")).unwrap();
        }
        s
    }

    /// Width table plus a non-increasing verdict per parameter.
    pub fn render(&self, slack: f64) -> String {
        let mut s = String::new();
        let col = self.labels.iter().map(|l| l.len() + 2).fold(12, usize::max);
        let head: Vec<String> = self.labels.iter().map(|l| format!("{l:>col$}")).collect();
        writeln!(s, "{:<16}{}  trend", "param", head.join("")).unwrap();
        for (p, name) in self.params.iter().enumerate() {
            let cells: Vec<String> = self.widths[p].iter().map(|w| format!("{w:>col$.5}")).collect();
            let verdict = if self.is_non_increasing(p, slack) {
                "non-increasing"
            } else {
                "increases"
            };
            writeln!(s, "{name:<16}{}  {verdict}", cells.join("")).unwrap();
        }
        s
    }
}

pub fn compare_widths(labels: &[String], summaries: &[Vec<MarginalSummary>]) -> Result<WidthReport> {
    if labels.len() != summaries.len() {
        return Err(Error::Config("one label per dataset required".into()));
    }
    let Some(first) = summaries.first() else {
        return Err(Error::Config("no datasets to compare".into()));
    };
    let params: Vec<String> = first.iter().map(|m| m.name.clone()).collect();
    for (label, set) in labels.iter().zip(summaries) {
        let names: Vec<&String> = set.iter().map(|m| &m.name).collect();
        if names != params.iter().collect::<Vec<_>>() {
            return Err(Error::Config(format!("dataset `{label}` has different parameters")));
        }
    }
    let widths = (0..params.len())
        .map(|p| summaries.iter().map(|set| set[p].width()).collect())
        .collect();
    Ok(WidthReport {
        labels: labels.to_vec(),
        params,
        widths,
    })
}

/// Relative width difference `|w1 - w2| / mean(w1, w2)` between the first and
/// second half of every chain, per parameter.
pub fn split_half(samples: &PosteriorSamples, level: f64) -> Result<Vec<(String, f64)>> {
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut chains: Vec<usize> = samples.rows().iter().map(|r| r.chain).collect();
    chains.sort_unstable();
    chains.dedup();
    for c in chains {
        let mut rows: Vec<&SampleRow> = samples.rows().iter().filter(|r| r.chain == c).collect();
        rows.sort_by_key(|r| r.step);
        let half = rows.len() / 2;
        first.extend(rows[..half].iter().map(|r| (*r).clone()));
        second.extend(rows[half..].iter().map(|r| (*r).clone()));
    }
    let a = summarize(&PosteriorSamples::new(samples.names().to_vec(), first)?, level, 1)?;
    let b = summarize(&PosteriorSamples::new(samples.names().to_vec(), second)?, level, 1)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| {
            let mean = 0.5 * (x.width() + y.width());
            let rel = if mean == 0.0 {
                0.0
            } else {
                (x.width() - y.width()).abs() / mean
            };
            (x.name.clone(), rel)
        })
        .collect())
}

pub fn summary_csv(summaries: &[MarginalSummary]) -> String {
    let mut s = String::from("param,mean,median,lo,hi,width\n");
    for m in summaries {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            m.name,
            format_float(m.mean),
            format_float(m.median),
            format_float(m.lo),
            format_float(m.hi),
            format_float(m.width())
        )
        .unwrap();
    }
    s
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("bin_lo,bin_hi,count\n");
    for (i, c) in h.counts.iter().enumerate() {
        writeln!(s, "{},{},{c}", format_float(h.edges[i]), format_float(h.edges[i + 1])).unwrap();
    }
    s
}

/// Trace of one parameter: `chain,step,value` rows in sample order.
pub fn trace_csv(samples: &PosteriorSamples, index: usize) -> String {
    let mut s = String::from("chain,step,value\n");
    for r in samples.rows() {
        writeln!(s, "{},{},{}", r.chain, r.step, format_float(r.theta[index])).unwrap();
    }
    s
}

/// File-system safe stem for a parameter name such as `log10(k)`.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `summary.csv`, `<param>.hist` and `<param>.trace` into `dir`.
/// Returns the written paths.
pub fn plot_data_export(summaries: &[MarginalSummary], samples: &PosteriorSamples, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::File::create(&path)?.write_all(text.as_bytes())?;
        written.push(path);
        Ok(())
    };
    put("summary.csv".into(), summary_csv(summaries))?;
    for m in summaries {
        put(format!("{}.hist", file_stem(&m.name)), histogram_csv(&m.histogram))?;
    }
    for (i, name) in samples.names().iter().enumerate() {
        put(format!("{}.trace", file_stem(name)), trace_csv(samples, i))?;
    }
    Ok(written)
}

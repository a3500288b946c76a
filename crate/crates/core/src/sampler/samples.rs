use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One saved temperature-1 sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub chain: usize,
    pub step: usize,
    pub nll: f64,
    pub theta: Vec<f64>,
}

/// Posterior samples from the temperature-1 chains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PosteriorSamples {
    names: Vec<String>,
    rows: Vec<SampleRow>,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl PosteriorSamples {
    pub fn new(names: Vec<String>, rows: Vec<SampleRow>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.theta.len() != names.len()) {
            return Err(Error::Config(format!(
                "sample at chain {} step {} has {} values for {} parameters",
                r.chain,
                r.step,
                r.theta.len(),
                names.len()
            )));
        }
        Ok(Self { names, rows })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[SampleRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of parameter `index` across all rows.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.theta[index]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.names.iter().position(|n| n == name).map(|i| self.column(i))
    }

    /// Concatenates sample sets with identical parameter names.
    pub fn merge(sets: &[PosteriorSamples]) -> Result<Self> {
        let Some(first) = sets.first() else {
            return Ok(Self::default());
        };
        let mut rows = Vec::with_capacity(sets.iter().map(|s| s.len()).sum());
        for s in sets {
            if s.names != first.names {
                return Err(Error::Config(format!(
                    "cannot merge samples over [{}] with [{}]",
                    s.names.join(", "),
                    first.names.join(", ")
                )));
            }
            rows.extend(s.rows.iter().cloned());
        }
        Ok(Self {
            names: first.names.clone(),
            rows,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["chain".to_string(), "step".into(), "nll".into()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.chain.to_string(), r.step.to_string(), format_float(r.nll)];
            rec.extend(r.theta.iter().map(|&v| format_float(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers()?.clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < 3 || cols[..3] != ["chain", "step", "nll"] {
            return Err(Error::Config(
                "sample file header must start with chain,step,nll".into(),
            ));
        }
        let names: Vec<String> = cols[3..].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Config(format!("sample row {}: invalid {what}", i + 2));
            let chain = rec[0].parse().map_err(|_| bad("chain"))?;
            let step = rec[1].parse().map_err(|_| bad("step"))?;
            let nll = rec[2].parse().map_err(|_| bad("nll"))?;
            let theta = rec
                .iter()
                .skip(3)
                .map(|v| v.parse::<f64>().map_err(|_| bad("value")))
                .collect::<Result<Vec<_>>>()?;
            rows.push(SampleRow {
                chain,
                step,
                nll,
                theta,
            });
        }
        Self::new(names, rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file)).map_err(|e| match e {
            Error::Config(message) => Error::Data {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }
}

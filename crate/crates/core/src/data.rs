//! Plain-text data formats: quantitative CSV and parameter files.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::likelihood::QuantitativePoint;
use crate::sampler::format_float;

/// Writes `observable,delay,value,sigma` rows.
pub fn write_quantitative<W: Write>(points: &[QuantitativePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["observable", "delay", "value", "sigma"])?;
    for p in points {
        w.write_record([
            p.observable.clone(),
            p.enforcement_time.to_string(),
            format_float(p.value),
            format_float(p.sigma),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `observable,delay,value,sigma` format. A `time` header is accepted for `delay`.
pub fn read_quantitative<R: Read>(input: R) -> Result<Vec<QuantitativePoint>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let expected = ["observable", "delay", "value", "sigma"];
    let ok = header.len() == 4
        && header[0] == expected[0]
        && (header[1] == "delay" || header[1] == "time")
        && header[2] == expected[2]
        && header[3] == expected[3];
    if !ok {
        return Err(Error::Config(format!(
            "quantitative data header must be `observable,delay,value,sigma`, got `{}`",
            header.join(",")
        )));
    }
    let mut points = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("line {line}: `{}` is not a number", &rec[k])))
        };
        let point = QuantitativePoint::new(&rec[0], num(1)?, num(2)?, num(3)?)
            .map_err(|e| Error::Config(format!("line {line}: {e}")))?;
        points.push(point);
    }
    Ok(points)
}

pub fn load_quantitative(path: &Path) -> Result<Vec<QuantitativePoint>> {
    let file = std::fs::File::open(path).map_err(|e| data_error(path, e.to_string()))?;
    read_quantitative(std::io::BufReader::new(file)).map_err(|e| data_error(path, e.to_string()))
}

pub fn save_quantitative(points: &[QuantitativePoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_quantitative(points, std::io::BufWriter::new(file))
}

fn data_error(path: &Path, message: String) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        message,
    }
}

/// Parses `name = value` lines; `#` starts a comment.
pub fn parse_parameters(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected `name = value`", i + 1)));
        };
        let name = name.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("line {}: `{}` is not a number", i + 1, value.trim())))?;
        if out.iter().any(|(n, _)| n == name) {
            return Err(Error::Config(format!("line {}: parameter `{name}` given twice", i + 1)));
        }
        out.push((name.to_string(), value));
    }
    Ok(out)
}

pub fn format_parameters(names: &[String], values: &[f64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n} = {}\n", format_float(*v)))
        .collect()
}

/// Orders `(name, value)` pairs to match `names`, filling gaps from `defaults`.
pub fn resolve_parameters(names: &[String], defaults: &[f64], given: &[(String, f64)]) -> Result<Vec<f64>> {
    if let Some((unknown, _)) = given.iter().find(|(n, _)| !names.contains(n)) {
        return Err(Error::Config(format!(
            "unknown parameter `{unknown}`; model parameters are {}",
            names.join(", ")
        )));
    }
    Ok(names
        .iter()
        .zip(defaults)
        .map(|(n, d)| given.iter().find(|(g, _)| g == n).map_or(*d, |(_, v)| *v))
        .collect())
}

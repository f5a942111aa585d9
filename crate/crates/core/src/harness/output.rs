//! CSV and JSON artifacts. Every JSON file carries a provenance block naming the
//! library operations its numbers come from.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::config::Config;
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub producer: String,
    /// Library operations the numbers in `data` come from.
    pub operations: Vec<String>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(config: &Config, operations: &[&str]) -> Self {
        let cfg = config
            .render()
            .lines()
            .filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
            .collect();
        Provenance {
            producer: format!("qsslab {}", env!("CARGO_PKG_VERSION")),
            operations: operations.iter().map(|s| s.to_string()).collect(),
            seed: config.seed,
            config: cfg,
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    data: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, data: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Document { provenance, data })?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    std::fs::write(path, csv_string(rows)?)?;
    Ok(())
}

pub fn csv_string<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| crate::error::Error::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// One row of `dissipation_*.csv`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissipationCsvRow {
    pub m: u32,
    pub mu: f64,
    pub t: f64,
    pub grad_sq: f64,
    #[serde(rename = "D_partial")]
    pub d_partial: f64,
}

/// One row of `diagnostics.csv`: a norm at one level and the slope fitted over all levels.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsCsvRow {
    pub level: u32,
    pub norm: String,
    pub value: f64,
    pub slope: f64,
}

/// One row of `forcing.csv`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForcingCsvRow {
    pub m: u32,
    pub mu: f64,
    pub forcing: f64,
    pub transport: f64,
    pub viscous: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dissipation_header() {
        let rows = [DissipationCsvRow { m: 1, mu: 0.04, t: 0.5, grad_sq: 2.0, d_partial: 0.25 }];
        assert_eq!(csv_string(&rows).unwrap(), "m,mu,t,grad_sq,D_partial\n1,0.04,0.5,2.0,0.25\n");
    }

    #[test]
    fn provenance_lists_config() {
        let p = Provenance::new(&Config::defaults(), &["qss::scaling_diagnostics"]);
        assert_eq!(p.config["family"], "snake");
        assert_eq!(p.operations, vec!["qss::scaling_diagnostics"]);
    }
}

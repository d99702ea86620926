//! CSV and JSON artifacts, and the run manifest that accompanies them.
//!
//! CSV schemas (version [`CSV_SCHEMA_VERSION`], header row always present):
//!
//! | schema          | columns                                            |
//! |-----------------|----------------------------------------------------|
//! | `cdf`           | `return,cdf`                                       |
//! | `empirical_cdf` | `return,mean_cdf,std_cdf`                          |
//! | `var_function`  | `return,var,policy`                                |
//! | `var_functions` | `return,transformed,simplified,policy_transformed,policy_simplified` |
//! | `pmf`           | `return,probability`                               |
//!
//! Policies are written as action labels joined by `;`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{Cdf, VarFunction};
use crate::mdp::{Mdp, Pmf, Policy};
use crate::simulate::EmpiricalDistribution;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    /// CSV schema name, or `json`.
    pub schema: String,
}

/// Everything needed to rerun a command bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub csv_schema_version: u32,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    /// Fully resolved configuration.
    pub config: serde_json::Value,
    pub artifacts: Vec<ArtifactRecord>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, seed: Option<u64>, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_owned(),
            tool_version: TOOL_VERSION.to_owned(),
            csv_schema_version: CSV_SCHEMA_VERSION,
            inputs,
            seed,
            config,
            artifacts: Vec::new(),
        }
    }
}

/// Writes artifacts into one directory and records them in a manifest.
pub struct ArtifactWriter {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl ArtifactWriter {
    pub fn create(dir: impl AsRef<Path>, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(ArtifactWriter {
            dir: dir.as_ref().to_path_buf(),
            manifest,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, file: &str, schema: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(file);
        let mut f = fs::File::create(&path)?;
        f.write_all(body.as_bytes())?;
        if !body.ends_with('\n') {
            f.write_all(b"\n")?;
        }
        self.manifest.artifacts.push(ArtifactRecord {
            file: file.to_owned(),
            schema: schema.to_owned(),
        });
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<PathBuf> {
        self.text(file, "json", &serde_json::to_string_pretty(value)?)
    }

    /// Writes `manifest.json` and returns its path.
    pub fn finish(self) -> Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&self.manifest)? + "\n")?;
        Ok(path)
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn policy_label(mdp: Option<&Mdp>, policy: &Policy) -> String {
    let label = |a: usize| match mdp {
        Some(m) => m.action_labels()[a].clone(),
        None => a.to_string(),
    };
    match policy {
        Policy::Deterministic(a) => a.iter().map(|&a| label(a)).collect::<Vec<_>>().join(";"),
        Policy::Randomized(rows) => rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&(a, p)| format!("{}:{p}", label(a)))
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect::<Vec<_>>()
            .join(";"),
    }
}

/// `cdf` schema: `cdf` evaluated on `grid`.
pub fn cdf_csv(cdf: &dyn Cdf, grid: &[f64]) -> Result<String> {
    csv_string(
        &["return", "cdf"],
        grid.iter().map(|&t| vec![t.to_string(), cdf.cdf(t).to_string()]),
    )
}

/// `empirical_cdf` schema.
pub fn empirical_csv(e: &EmpiricalDistribution) -> Result<String> {
    csv_string(
        &["return", "mean_cdf", "std_cdf"],
        e.grid
            .iter()
            .zip(e.mean_cdf.iter().zip(&e.std_cdf))
            .map(|(t, (m, s))| vec![t.to_string(), m.to_string(), s.to_string()]),
    )
}

/// `var_function` schema.
pub fn var_function_csv(vf: &VarFunction, mdp: Option<&Mdp>) -> Result<String> {
    csv_string(
        &["return", "var", "policy"],
        vf.grid.iter().enumerate().map(|(k, t)| {
            vec![
                t.to_string(),
                vf.values[k].to_string(),
                policy_label(mdp, &vf.policies[vf.argmin[k]]),
            ]
        }),
    )
}

/// `var_functions` schema: two VaR functions on the same grid.
pub fn var_functions_csv(transformed: &VarFunction, simplified: &VarFunction, mdp: Option<&Mdp>) -> Result<String> {
    if transformed.grid != simplified.grid {
        return Err(Error::Config("VaR functions must share a grid".into()));
    }
    csv_string(
        &["return", "transformed", "simplified", "policy_transformed", "policy_simplified"],
        transformed.grid.iter().enumerate().map(|(k, t)| {
            vec![
                t.to_string(),
                transformed.values[k].to_string(),
                simplified.values[k].to_string(),
                policy_label(mdp, &transformed.policies[transformed.argmin[k]]),
                policy_label(mdp, &simplified.policies[simplified.argmin[k]]),
            ]
        }),
    )
}

/// `pmf` schema.
pub fn pmf_csv(pmf: &Pmf) -> Result<String> {
    csv_string(
        &["return", "probability"],
        pmf.atoms().iter().map(|(v, p)| vec![v.to_string(), p.to_string()]),
    )
}

/// A CDF tabulated on a grid, linearly interpolated between points and
/// clamped to the end values outside it. Read back from any CSV whose first
/// two columns are a return value and a CDF value.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::EmptySupport("tabulated CDF needs matching, non-empty columns"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("CDF grid must be strictly increasing".into()));
        }
        Ok(TabulatedCdf { grid, values })
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)?;
        let (mut grid, mut values) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::Parse(format!("{}: row {} has fewer than 2 columns", path.display(), line + 2)))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("{}: row {}: {e}", path.display(), line + 2)))
            };
            grid.push(parse(0)?);
            values.push(parse(1)?);
        }
        TabulatedCdf::new(grid, values)
    }
}

impl Cdf for TabulatedCdf {
    fn cdf(&self, t: f64) -> f64 {
        let g = &self.grid;
        let i = g.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i == g.len() {
            return self.values[g.len() - 1];
        }
        let (x0, x1, y0, y1) = (g[i - 1], g[i], self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    fn grid_points(&self) -> Vec<f64> {
        self.grid.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::ReturnDistribution;

    #[test]
    fn cdf_csv_round_trips_through_tabulated() {
        let d = ReturnDistribution::empirical(vec![0.0, 1.0, 2.0, 3.0], 1, 4).unwrap();
        let grid = vec![-1.0, 0.5, 1.5, 2.5, 4.0];
        let text = cdf_csv(&d, &grid).unwrap();
        assert!(text.starts_with("return,cdf\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        fs::write(&path, text).unwrap();
        let t = TabulatedCdf::from_csv(&path).unwrap();
        assert_eq!(t.grid, grid);
        assert_eq!(t.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(t.cdf(1.0), 0.375);
    }

    #[test]
    fn policy_labels() {
        assert_eq!(policy_label(None, &Policy::Deterministic(vec![2, 1, 0])), "2;1;0");
        let r = Policy::Randomized(vec![vec![(0, 0.5), (1, 0.5)]]);
        assert_eq!(policy_label(None, &r), "0:0.5|1:0.5");
    }

    #[test]
    fn bad_csv_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        fs::write(&path, "return,cdf\n1,abc\n").unwrap();
        assert!(matches!(TabulatedCdf::from_csv(&path), Err(Error::Parse(_))));
    }
}

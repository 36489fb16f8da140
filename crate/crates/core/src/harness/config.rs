//! Experiment files: TOML with one flat section per experiment.
//!
//! ```toml
//! [cor2_scan]
//! counter = "H"
//! predictor = "cor2"
//! x = 100000000
//! y = [100, 1000, 10000]
//! z_over_y = 2
//! ```
//!
//! Every key holds a scalar or an array of scalars; arrays are grid axes and
//! the grid is their cartesian product in key order `x, y, z | z_over_y, r,
//! shift, delta` (windows) or `k, v, alpha, s, gamma, u, m` (regions).
//! Sections run in file order. A section with `region = "U" | "Y" | "T" | "S"` describes a region grid.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::counts::WindowSpec;
use crate::mc::{RegionKind, RegionSpec};
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridPoint {
    Window(WindowSpec),
    Region(RegionSpec),
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridPoint::Window(w) => {
                write!(f, "x={} y={} z={}", w.x, w.y, w.z)?;
                if let Some(r) = w.r {
                    write!(f, " r={r}")?;
                }
                if let Some(d) = w.delta {
                    write!(f, " delta={d}")?;
                }
                if let Some(l) = w.shift {
                    write!(f, " shift={l}")?;
                }
                if w.squarefree {
                    f.write_str(" squarefree")?;
                }
                Ok(())
            }
            GridPoint::Region(r) => {
                write!(f, "{} k={} v={}", r.kind, r.k, r.v)?;
                for (name, val) in [("alpha", r.alpha), ("s", r.s), ("gamma", r.gamma), ("u", r.u)] {
                    if let Some(v) = val {
                        write!(f, " {name}={v}")?;
                    }
                }
                if let Some(m) = r.m {
                    write!(f, " m={m}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub counter: String,
    pub predictor: Option<String>,
    pub grid: Vec<GridPoint>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Result store the rows are appended to.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, counter: impl Into<String>, grid: Vec<GridPoint>) -> Self {
        ExperimentConfig {
            name: name.into(),
            counter: counter.into(),
            predictor: None,
            grid,
            samples: None,
            seed: None,
            output: None,
        }
    }

    pub fn with_predictor(mut self, id: impl Into<String>) -> Self {
        self.predictor = Some(id.into());
        self
    }

    pub fn with_mc(mut self, samples: u64, seed: u64) -> Self {
        self.samples = Some(samples);
        self.seed = Some(seed);
        self
    }

    pub fn has_regions(&self) -> bool {
        self.grid.iter().any(|p| matches!(p, GridPoint::Region(_)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config(format!("experiment `{}` has an empty grid", self.name)));
        }
        if self.has_regions() && self.seed.is_none() {
            return Err(Error::Config(format!(
                "experiment `{}` has Monte Carlo regions but no seed",
                self.name
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (output path excluded), hex encoded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Axis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Axis<T> {
    fn values(a: &Option<Axis<T>>) -> Vec<Option<T>> {
        match a {
            None => vec![None],
            Some(Axis::One(v)) => vec![Some(v.clone())],
            Some(Axis::Many(v)) => v.iter().cloned().map(Some).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Section {
    counter: Option<String>,
    predictor: Option<String>,
    region: Option<String>,
    samples: Option<u64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    squarefree: Option<bool>,
    x: Option<Axis<u64>>,
    y: Option<Axis<f64>>,
    z: Option<Axis<f64>>,
    z_over_y: Option<Axis<f64>>,
    r: Option<Axis<u32>>,
    shift: Option<Axis<i64>>,
    delta: Option<Axis<u64>>,
    k: Option<Axis<usize>>,
    v: Option<Axis<f64>>,
    alpha: Option<Axis<f64>>,
    s: Option<Axis<f64>>,
    gamma: Option<Axis<f64>>,
    u: Option<Axis<f64>>,
    m: Option<Axis<usize>>,
}

fn required<T: Clone>(name: &str, section: &str, a: &Option<Axis<T>>) -> Result<Vec<T>> {
    match a {
        None => Err(Error::Config(format!("section `{section}` is missing `{name}`"))),
        Some(_) => Ok(Axis::values(a).into_iter().flatten().collect()),
    }
}

impl Section {
    fn window_grid(&self, name: &str) -> Result<Vec<GridPoint>> {
        let xs = required("x", name, &self.x)?;
        let ys = required("y", name, &self.y)?;
        let zs: Vec<(f64, bool)> = match (&self.z, &self.z_over_y) {
            (Some(_), None) => required("z", name, &self.z)?.into_iter().map(|z| (z, false)).collect(),
            (None, Some(_)) => required("z_over_y", name, &self.z_over_y)?
                .into_iter()
                .map(|q| (q, true))
                .collect(),
            _ => {
                return Err(Error::Config(format!(
                    "section `{name}` needs exactly one of `z`, `z_over_y`"
                )))
            }
        };
        let mut grid = Vec::new();
        for &x in &xs {
            for &y in &ys {
                for &(zv, relative) in &zs {
                    for r in Axis::values(&self.r) {
                        for shift in Axis::values(&self.shift) {
                            for delta in Axis::values(&self.delta) {
                                let mut w = WindowSpec::new(x, y, if relative { y * zv } else { zv });
                                w.r = r;
                                w.shift = shift;
                                w.delta = delta;
                                w.squarefree = self.squarefree.unwrap_or(false);
                                grid.push(GridPoint::Window(w));
                            }
                        }
                    }
                }
            }
        }
        Ok(grid)
    }

    fn region_grid(&self, name: &str, kind: RegionKind) -> Result<Vec<GridPoint>> {
        let ks = required("k", name, &self.k)?;
        let vs = required("v", name, &self.v)?;
        let mut grid = Vec::new();
        for &k in &ks {
            for &v in &vs {
                for alpha in Axis::values(&self.alpha) {
                    for s in Axis::values(&self.s) {
                        for gamma in Axis::values(&self.gamma) {
                            for u in Axis::values(&self.u) {
                                for m in Axis::values(&self.m) {
                                    grid.push(GridPoint::Region(RegionSpec {
                                        kind,
                                        k,
                                        v,
                                        alpha,
                                        s,
                                        gamma,
                                        u,
                                        m,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(grid)
    }

    fn into_config(self, name: &str) -> Result<ExperimentConfig> {
        let (grid, default_counter) = match &self.region {
            Some(kind) => {
                let kind: RegionKind = kind.parse().map_err(|_| {
                    Error::Config(format!("section `{name}`: unknown region kind `{kind}`"))
                })?;
                (self.region_grid(name, kind)?, "mc")
            }
            None => (self.window_grid(name)?, "H"),
        };
        let config = ExperimentConfig {
            name: name.to_string(),
            counter: self.counter.unwrap_or_else(|| default_counter.to_string()),
            predictor: self.predictor,
            grid,
            samples: self.samples,
            seed: self.seed,
            output: self.output,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses every section of an experiment file.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if table.is_empty() {
        return Err(Error::Config("no experiment sections".into()));
    }
    let mut out = Vec::with_capacity(table.len());
    for (name, value) in table {
        let toml::Value::Table(body) = value else {
            return Err(Error::Config(format!("top-level key `{name}` is not a section")));
        };
        if let Some((key, _)) = body.iter().find(|(_, v)| v.is_table()) {
            return Err(Error::Config(format!("section `{name}`: nested table `{key}` not allowed")));
        }
        let section: Section = toml::Value::Table(body)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("section `{name}`: {}", e.message())))?;
        out.push(section.into_config(&name)?);
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

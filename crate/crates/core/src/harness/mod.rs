//! Experiment orchestration: grid scans of counters against predictors,
//! ratio envelopes, an append-only result store and plot output.

mod config;
mod plot;
mod registry;
mod store;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{load_config, parse_config, ExperimentConfig, GridPoint, DEFAULT_SAMPLES};
pub use plot::{emit_plot_data, smirnov_plot_data, PlotAxis, PlotData, PlotFiles, Series};
pub use registry::{counter, predictor, CounterDef, EvalContext, Measured, PredictorDef, Quantity, COUNTERS, PREDICTORS};
pub use store::{Record, ResultStore, SCHEMA, SCHEMA_VERSION};

use crate::counts::IntervalCounter;
use crate::{Error, Result};

/// One evaluated grid point. Missing values are `None` and print as empty
/// CSV fields; non-finite values are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config: String,
    pub index: usize,
    pub counter: String,
    pub predictor: Option<String>,
    pub x: Option<u64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub r: Option<u32>,
    pub delta: Option<u64>,
    pub shift: Option<i64>,
    pub squarefree: Option<bool>,
    pub region: Option<String>,
    pub k: Option<usize>,
    pub v: Option<f64>,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub u: Option<f64>,
    pub m: Option<usize>,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
    pub elapsed: f64,
    pub seed: Option<u64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn field<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

impl ResultRow {
    pub const CSV_HEADER: &'static str = "config,index,counter,predictor,x,y,z,r,delta,shift,squarefree,\
region,k,v,alpha,s,gamma,u,m,value,stderr,predicted,ratio,elapsed,seed";

    fn blank(config: &str, index: usize, counter: &str, predictor: Option<&str>) -> Self {
        ResultRow {
            config: config.into(),
            index,
            counter: counter.into(),
            predictor: predictor.map(str::to_string),
            x: None,
            y: None,
            z: None,
            r: None,
            delta: None,
            shift: None,
            squarefree: None,
            region: None,
            k: None,
            v: None,
            alpha: None,
            s: None,
            gamma: None,
            u: None,
            m: None,
            value: None,
            stderr: None,
            predicted: None,
            ratio: None,
            elapsed: 0.0,
            seed: None,
        }
    }

    fn with_point(mut self, point: &GridPoint) -> Self {
        match point {
            GridPoint::Window(w) => {
                self.x = Some(w.x);
                self.y = Some(w.y);
                self.z = Some(w.z);
                self.r = w.r;
                self.delta = w.delta;
                self.shift = w.shift;
                self.squarefree = Some(w.squarefree);
            }
            GridPoint::Region(rg) => {
                self.region = Some(rg.kind.to_string());
                self.k = Some(rg.k);
                self.v = Some(rg.v);
                self.alpha = rg.alpha;
                self.s = rg.s;
                self.gamma = rg.gamma;
                self.u = rg.u;
                self.m = rg.m;
            }
        }
        self
    }

    pub fn to_csv(&self) -> String {
        let cols = [
            self.config.clone(),
            self.index.to_string(),
            self.counter.clone(),
            field(&self.predictor),
            field(&self.x),
            field(&self.y),
            field(&self.z),
            field(&self.r),
            field(&self.delta),
            field(&self.shift),
            field(&self.squarefree),
            field(&self.region),
            field(&self.k),
            field(&self.v),
            field(&self.alpha),
            field(&self.s),
            field(&self.gamma),
            field(&self.u),
            field(&self.m),
            field(&self.value),
            field(&self.stderr),
            field(&self.predicted),
            field(&self.ratio),
            format!("{:.6}", self.elapsed),
            field(&self.seed),
        ];
        cols.join(",")
    }

    /// The row with `elapsed` zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        ResultRow {
            elapsed: 0.0,
            ..self.clone()
        }
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(ResultRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

fn evaluate_point(
    config: &ExperimentConfig,
    ctx: &EvalContext,
    c: &CounterDef,
    p: Option<&PredictorDef>,
    index: usize,
    point: &GridPoint,
) -> Result<ResultRow> {
    let start = Instant::now();
    let measured = c.eval(ctx, point)?;
    let predicted = match p {
        Some(p) => finite(p.eval(ctx, c.quantity, point)?),
        None => None,
    };
    let value = finite(measured.value);
    let ratio = match (value, predicted) {
        (Some(v), Some(q)) if q != 0.0 => finite(v / q),
        _ => None,
    };
    let mut row = ResultRow::blank(&config.name, index, c.id, p.map(|p| p.id)).with_point(point);
    row.value = value;
    row.stderr = measured.stderr.and_then(finite);
    row.predicted = predicted;
    row.ratio = ratio;
    row.seed = matches!(point, GridPoint::Region(_)).then_some(ctx.seed);
    row.elapsed = start.elapsed().as_secs_f64();
    Ok(row)
}

/// Evaluates every grid point (in parallel, rows in grid order) without
/// touching any store.
pub fn evaluate_grid(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let c = counter(&config.counter)?;
    let p = config.predictor.as_deref().map(predictor).transpose()?;
    let ctx = EvalContext {
        counter: IntervalCounter::default(),
        samples: config.samples.unwrap_or(DEFAULT_SAMPLES),
        seed: config.seed.unwrap_or(0),
    };
    let results: Vec<Result<ResultRow>> = config
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, point)| evaluate_point(config, &ctx, c, p, i, point))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::GridPoint {
                index: i,
                point: config.grid[i].to_string(),
                source: Box::new(e),
            })
        })
        .collect()
}

/// Evaluates the grid and appends the rows to `config.output` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let rows = evaluate_grid(config)?;
    if let Some(path) = &config.output {
        ResultStore::open(path)?.append_run(&config.name, &config.hash(), &rows)?;
    }
    Ok(rows)
}

/// Ratio envelope of a scan: min, max and geometric mean over rows with a
/// defined ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub counter: String,
    pub predictor: String,
    pub rows: Vec<ResultRow>,
    pub points: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub geomean: Option<f64>,
}

impl RatioTable {
    pub fn from_rows(counter: &str, predictor: &str, rows: Vec<ResultRow>) -> Self {
        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).filter(|&q| q > 0.0).collect();
        let (min, max, geomean) = if ratios.is_empty() {
            (None, None, None)
        } else {
            let lmean = ratios.iter().map(|q| q.ln()).sum::<f64>() / ratios.len() as f64;
            (
                ratios.iter().copied().reduce(f64::min),
                ratios.iter().copied().reduce(f64::max),
                finite(lmean.exp()),
            )
        };
        RatioTable {
            counter: counter.into(),
            predictor: predictor.into(),
            points: ratios.len(),
            rows,
            min,
            max,
            geomean,
        }
    }

    /// `max / min`.
    pub fn spread(&self) -> Option<f64> {
        match (self.min, self.max) {
            (Some(lo), Some(hi)) => finite(hi / lo),
            _ => None,
        }
    }

    pub const SUMMARY_HEADER: &'static str = "counter,predictor,points,min,max,geomean,spread";

    pub fn summary_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{},{},{}\n",
            Self::SUMMARY_HEADER,
            self.counter,
            self.predictor,
            self.points,
            field(&self.min),
            field(&self.max),
            field(&self.geomean),
            field(&self.spread())
        )
    }

    pub fn rows_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

/// Scans `grid` with a registered counter and predictor. Region grids use
/// [`DEFAULT_SAMPLES`] samples and seed 0.
pub fn scan_ratio_table(counter_id: &str, predictor_id: &str, grid: &[GridPoint]) -> Result<RatioTable> {
    counter(counter_id)?;
    predictor(predictor_id)?;
    let config = ExperimentConfig::new("scan", counter_id, grid.to_vec())
        .with_predictor(predictor_id)
        .with_mc(DEFAULT_SAMPLES, 0);
    let rows = evaluate_grid(&config)?;
    Ok(RatioTable::from_rows(counter_id, predictor_id, rows))
}

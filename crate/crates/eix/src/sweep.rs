//! Parameter sweeps over `(epsilon, rho)` cells on the twin-Gaussians stream.

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use eix_core::bench::{summarize_cell, SweepRow};
use eix_core::{gen_stream, EngineConfig, RunMetrics, TwinGaussians};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::run::timed_run;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GridCell {
    pub epsilon: f64,
    pub rho: f64,
}

/// The default six-cell grid. `(0.065, 0.55)` appears twice on purpose so the
/// output rows line up with the usual benchmark layout.
pub fn default_grid() -> Vec<GridCell> {
    [
        (0.035, 0.25),
        (0.045, 0.35),
        (0.055, 0.45),
        (0.065, 0.55),
        (0.055, 0.55),
        (0.065, 0.55),
    ]
    .into_iter()
    .map(|(epsilon, rho)| GridCell { epsilon, rho })
    .collect()
}

/// Reads a CSV with header `epsilon,rho`.
pub fn read_grid(path: &Path) -> Result<Vec<GridCell>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::Config(format!("{}: {e}", path.display()))))
        .collect()
}

/// Parses `a..b` (half-open) or a comma-separated list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("invalid seed list {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a >= b {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Template for every cell; `epsilon` and `rho` are overwritten per cell.
    pub base: EngineConfig,
    pub stream: TwinGaussians,
    pub seeds: Vec<u64>,
    pub stage_split: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: GridCell,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<(u64, RunMetrics)>,
}

/// Runs every cell for every seed. Cells are independent and run in parallel;
/// output order follows the grid.
pub fn run_sweep(grid: &[GridCell], opts: &SweepOptions) -> Result<Vec<CellResult>> {
    if grid.is_empty() {
        return Err(Error::Config("empty parameter grid".into()));
    }
    if opts.seeds.is_empty() {
        return Err(Error::Config("no seeds given".into()));
    }
    let streams = opts
        .seeds
        .iter()
        .map(|&s| Ok((s, gen_stream(&opts.stream, s)?)))
        .collect::<Result<Vec<_>>>()?;
    grid.par_iter()
        .map(|&cell| {
            let cfg = EngineConfig {
                epsilon: cell.epsilon,
                rho: cell.rho,
                ..opts.base
            };
            cfg.validate()?;
            let runs = streams
                .iter()
                .map(|(seed, stream)| Ok((*seed, timed_run(cfg, stream, opts.stage_split)?.0)))
                .collect::<Result<Vec<_>>>()?;
            let metrics: Vec<RunMetrics> = runs.iter().map(|(_, m)| m.clone()).collect();
            Ok(CellResult {
                cell,
                rows: summarize_cell(cell.epsilon, cell.rho, &metrics),
                runs,
            })
        })
        .collect()
}

/// `epsilon,rho,stage,acc,avg_granules,time_s`, one row per cell and stage.
pub fn sweep_csv(results: &[CellResult]) -> String {
    let mut out = String::from("epsilon,rho,stage,acc,avg_granules,time_s\n");
    for r in results {
        for row in &r.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.epsilon, row.rho, row.stage, row.acc, row.avg_granules, row.time_s
            );
        }
    }
    out
}

/// Per-step granule counts for every cell and seed: `epsilon,rho,seed,h,k`.
pub fn series_csv(results: &[CellResult]) -> String {
    let mut out = String::from("epsilon,rho,seed,h,k\n");
    for r in results {
        for (seed, m) in &r.runs {
            for s in &m.steps {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.cell.epsilon, r.cell.rho, seed, s.h, s.k
                );
            }
        }
    }
    out
}

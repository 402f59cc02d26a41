//! Free-form parameter sweeps: run a base experiment over a 1-2 axis grid of
//! numeric config values, one subdirectory per point, plus a merged summary
//! table sorted by axis values (independent of execution order).

use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeSet;

use super::config::set_path;
use super::{
    find_experiment, run_experiment, Cell, Experiment, ExperimentConfig, ExperimentError,
    RunArtifact, Summary,
};

pub struct Sweep;

impl Experiment for Sweep {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn run(
        &self,
        cfg: &ExperimentConfig,
        art: &mut RunArtifact,
    ) -> Result<Summary, ExperimentError> {
        let sweep = cfg
            .sweep
            .clone()
            .ok_or_else(|| ExperimentError::Config("sweep requires a `sweep` section".into()))?;
        if sweep.base == "sweep" || find_experiment(&sweep.base).is_none() {
            return Err(ExperimentError::Config(format!(
                "sweep base must be a non-sweep experiment, got `{}`",
                sweep.base
            )));
        }
        if sweep.axes.len() > 2 {
            return Err(ExperimentError::Config(format!(
                "at most 2 sweep axes are supported, got {}",
                sweep.axes.len()
            )));
        }
        for ax in &sweep.axes {
            if ax.values.is_empty() {
                return Err(ExperimentError::Config(format!(
                    "sweep axis `{}` has no values",
                    ax.path
                )));
            }
        }

        let mut base_cfg = cfg.clone();
        base_cfg.experiment = sweep.base.clone();
        base_cfg.sweep = None;
        let base_value = serde_json::to_value(&base_cfg)?;
        for ax in &sweep.axes {
            let leaf = lookup(&base_value, &ax.path)?;
            if !(leaf.is_number() || leaf.is_null()) {
                return Err(ExperimentError::Config(format!(
                    "sweep axis `{}` targets a non-numeric leaf ({leaf})",
                    ax.path
                )));
            }
        }

        // row-major cartesian product of the axis values
        let shape: Vec<usize> = sweep.axes.iter().map(|a| a.values.len()).collect();
        let n_points: usize = shape.iter().product::<usize>().max(1);
        let points: Vec<Vec<f64>> = (0..n_points)
            .map(|flat| {
                let mut rem = flat;
                let mut vals = Vec::new();
                for (ax, &len) in sweep.axes.iter().zip(&shape).rev() {
                    vals.push(ax.values[rem % len]);
                    rem /= len;
                }
                vals.reverse();
                vals
            })
            .collect();

        let out_dir = art.out_dir().to_path_buf();
        let results: Vec<Result<(Vec<f64>, Summary), ExperimentError>> = points
            .par_iter()
            .enumerate()
            .map(|(flat, vals)| {
                let mut value = base_value.clone();
                for (ax, &v) in sweep.axes.iter().zip(vals.iter()) {
                    set_path(&mut value, &ax.path, json!(v))?;
                }
                let point_cfg: ExperimentConfig = serde_json::from_value(value)
                    .map_err(|e| ExperimentError::Config(format!("point config: {e}")))?;
                let dir = out_dir.join(format!("point_{flat:03}"));
                let summary = run_experiment(&point_cfg, &dir)?;
                Ok((vals.clone(), summary))
            })
            .collect();

        let mut merged: Vec<(Vec<f64>, Summary)> = Vec::with_capacity(n_points);
        for r in results {
            merged.push(r?);
        }
        merged.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        let keys: BTreeSet<String> = merged
            .iter()
            .flat_map(|(_, s)| s.keys().cloned())
            .collect();
        let mut header: Vec<String> = sweep.axes.iter().map(|a| a.path.clone()).collect();
        header.extend(keys.iter().cloned());
        let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let rows: Vec<Vec<Cell>> = merged
            .iter()
            .map(|(vals, s)| {
                let mut row: Vec<Cell> = vals.iter().map(|&v| Cell::from(v)).collect();
                for k in &keys {
                    row.push(match s.get(k) {
                        Some(&v) => Cell::Float(v),
                        None => Cell::Text(String::new()),
                    });
                }
                row
            })
            .collect();
        art.write_csv("sweep.csv", &header_refs, &rows)?;

        art.meta("base", json!(sweep.base));
        art.meta("n_points", json!(n_points));
        let mut summary = Summary::new();
        summary.insert("n_points".into(), n_points as f64);
        Ok(summary)
    }
}

fn lookup<'a>(root: &'a Value, path: &str) -> Result<&'a Value, ExperimentError> {
    let mut cur = root;
    for seg in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get(seg).ok_or_else(|| {
                ExperimentError::Config(format!("unknown config key `{seg}` in `{path}`"))
            })?,
            Value::Array(arr) => {
                let idx: usize = seg.parse().map_err(|_| {
                    ExperimentError::Config(format!("`{seg}` is not an array index in `{path}`"))
                })?;
                arr.get(idx).ok_or_else(|| {
                    ExperimentError::Config(format!("index {idx} out of range in `{path}`"))
                })?
            }
            _ => {
                return Err(ExperimentError::Config(format!(
                    "`{path}` descends into a scalar at `{seg}`"
                )))
            }
        };
    }
    Ok(cur)
}

//! Multi-run studies: outlet comparison, grid convergence and parameter
//! sweeps. Independent runs execute concurrently; results come back in
//! input order and each run is deterministic, so output does not depend
//! on scheduling.

use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::model::{OutletModel, VesselParams};
use crate::solver::FlowField;

use super::output::{fmt_num, outlet_velocity};
use super::{run, Result, RunOutput, ScenarioConfig, ScenarioError};

/// Applies `f` to every item on a small worker pool, preserving order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every item is processed"))
        .collect()
}

/// The same scenario under each outlet closure.
pub struct BcComparison {
    pub runs: Vec<(OutletModel, Result<RunOutput>)>,
}

pub fn compare_bc(cfg: &ScenarioConfig) -> Result<BcComparison> {
    if cfg.stenosis.is_none() {
        return Err(ScenarioError::Study(
            "compare-bc needs a [stenosis] section".into(),
        ));
    }
    let runs = parallel_map(&OutletModel::ALL, |m| run(&cfg.with_outlet(*m)));
    Ok(BcComparison {
        runs: OutletModel::ALL.into_iter().zip(runs).collect(),
    })
}

impl BcComparison {
    pub fn successful(&self) -> impl Iterator<Item = (OutletModel, &RunOutput)> {
        self.runs
            .iter()
            .filter_map(|(m, r)| r.as_ref().ok().map(|o| (*m, o)))
    }

    /// `t` plus outlet velocity and inlet pressure per successful closure,
    /// aligned on the common snapshot times.
    pub fn write_table<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let ok: Vec<_> = self.successful().collect();
        let mut head = vec!["t".to_string()];
        for (m, _) in &ok {
            head.push(format!("V_D_{}", m.name()));
            head.push(format!("y_{}", m.name()));
        }
        writeln!(w, "{}", head.join(","))?;
        let Some((_, first)) = ok.first() else {
            return Ok(());
        };
        let vd: Vec<Vec<f64>> = ok.iter().map(|(_, o)| outlet_velocity(o)).collect();
        for (k, s) in first.sensor.iter().enumerate() {
            let mut cells = vec![fmt_num(s.t)];
            for (j, (_, o)) in ok.iter().enumerate() {
                cells.push(fmt_num(vd[j][k]));
                cells.push(fmt_num(o.sensor[k].reading.pressure));
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub cells: Vec<usize>,
    /// `e_k`: L1 distance between the final areas on levels `k` and `k + 1`.
    pub differences: Vec<f64>,
    /// `log2(e_k / e_{k+1})`.
    pub orders: Vec<f64>,
}

/// L1 distance (per unit length and reference area) between a field and
/// one on twice as many cells, projected by averaging fine-cell pairs.
pub fn projected_difference(coarse: &FlowField, fine: &FlowField, vp: &VesselParams) -> f64 {
    assert_eq!(fine.len(), 2 * coarse.len());
    let sum: f64 = (0..coarse.len())
        .map(|i| (coarse.area[i] - 0.5 * (fine.area[2 * i] + fine.area[2 * i + 1])).abs())
        .sum();
    sum / (coarse.len() as f64 * vp.area0)
}

/// Self-convergence on `levels` grids of `n, 2n, 4n, ...` cells.
pub fn convergence(cfg: &ScenarioConfig, levels: usize) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(ScenarioError::Study(format!(
            "convergence needs at least 3 levels to estimate an order, got {levels}"
        )));
    }
    let cells: Vec<usize> = (0..levels).map(|k| cfg.n_cells << k).collect();
    let runs = parallel_map(&cells, |n| {
        let mut c = cfg.clone();
        c.n_cells = *n;
        run(&c).map(|o| o.final_field())
    });
    let fields = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let differences: Vec<f64> = fields
        .windows(2)
        .map(|w| projected_difference(&w[0], &w[1], &cfg.vessel))
        .collect();
    let orders = differences
        .windows(2)
        .map(|e| (e[0] / e[1]).log2())
        .collect();
    Ok(ConvergenceReport {
        cells,
        differences,
        orders,
    })
}

impl ConvergenceReport {
    pub fn write_table<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "cells,diff_to_next,order")?;
        for (k, n) in self.cells.iter().enumerate() {
            let e = self
                .differences
                .get(k)
                .map(|e| fmt_num(*e))
                .unwrap_or_default();
            let p = k
                .checked_sub(1)
                .and_then(|j| self.orders.get(j))
                .map(|p| fmt_num(*p))
                .unwrap_or_default();
            writeln!(w, "{n},{e},{p}")?;
        }
        Ok(())
    }
}

pub struct SweepPoint {
    pub value: f64,
    pub result: Result<RunOutput>,
}

/// One run per value of `param` (see [`ScenarioConfig::set_param`]).
pub fn sweep(cfg: &ScenarioConfig, param: &str, values: &[f64]) -> Result<Vec<SweepPoint>> {
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set_param(param, *v).map_err(ScenarioError::Study)?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let results = parallel_map(&configs, run);
    Ok(values
        .iter()
        .zip(results)
        .map(|(value, result)| SweepPoint {
            value: *value,
            result,
        })
        .collect())
}

/// One summary row per sweep value.
pub fn write_sweep_table<W: Write>(
    w: &mut W,
    param: &str,
    points: &[SweepPoint],
) -> io::Result<()> {
    writeln!(w, "{param},status,steps,y_final,y_max,V_D_final")?;
    for p in points {
        match &p.result {
            Ok(o) => {
                let y_final = o.sensor.last().map_or(f64::NAN, |s| s.reading.pressure);
                let y_max = o
                    .sensor
                    .iter()
                    .map(|s| s.reading.pressure)
                    .fold(f64::NEG_INFINITY, f64::max);
                let vd = outlet_velocity(o).last().copied().unwrap_or(f64::NAN);
                writeln!(
                    w,
                    "{},ok,{},{},{},{}",
                    fmt_num(p.value),
                    o.steps(),
                    fmt_num(y_final),
                    fmt_num(y_max),
                    fmt_num(vd)
                )?;
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                writeln!(w, "{},failed: {msg},,,,", fmt_num(p.value))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<u64> = (0..100).collect();
        assert_eq!(
            parallel_map(&items, |x| x * x),
            items.iter().map(|x| x * x).collect::<Vec<_>>()
        );
        let empty: Vec<u64> = Vec::new();
        assert!(parallel_map(&empty, |x| *x).is_empty());
    }

    #[test]
    fn projection_of_refined_constant_is_exact() {
        let c = FlowField::uniform(16, 1.0, 0.1);
        let f = FlowField::uniform(32, 1.0, 0.1);
        assert_eq!(projected_difference(&c, &f, &VesselParams::unit()), 0.0);
    }
}

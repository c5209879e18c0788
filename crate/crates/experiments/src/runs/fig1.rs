//! Success-rate maps of the lower restricted bound around a fixed sparse signal.

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, Cell, Csv, Heatmap, OutputDir};
use crate::registry::{Experiment, RunContext, RunSummary};
use anyhow::{anyhow, bail, Result};
use quasilin::ripprobe::{build_rate_map, RateMap, RateMapSpec};
use quasilin::derive_seed;

pub fn run_fig1(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<RateMap>> {
    let rm = cfg.ratemap.as_ref().ok_or_else(|| anyhow!("fig1 needs a [ratemap] section"))?;
    if rm.ks.is_empty() {
        bail!("ratemap.ks is empty");
    }
    rm.ks
        .iter()
        .map(|&k| {
            let spec = RateMapSpec {
                k,
                thresholds: rm.thresholds.clone(),
                resolution: rm.resolution,
                draws: rm.draws,
                p: rm.p,
                seed: derive_seed(cfg.seed, &[k as u64]),
            };
            let factory = |s: u64| ctx.operators.build(&cfg.ensemble.with_seed(s));
            Ok(build_rate_map(factory, &spec)?)
        })
        .collect()
}

pub fn map_csv(map: &RateMap) -> Csv {
    let mut header = vec!["angle1_deg".to_string(), "angle2_deg".to_string(), "antipode_deg".to_string(), "valid_draws".to_string()];
    header.extend((0..map.thresholds.len()).map(|i| format!("rate_t{i}")));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new("quasilin-ratemap", &refs);
    for c in &map.cells {
        let mut row = vec![
            Cell::F(c.angles[0]),
            Cell::F(c.angles.get(1).copied().unwrap_or(0.0)),
            Cell::F(c.antipode_deg),
            Cell::I(c.valid_draws),
        ];
        row.extend(c.rates.iter().map(|&r| Cell::F(r)));
        csv.push(row);
    }
    csv
}

pub fn meta_csv(maps: &[RateMap]) -> Csv {
    let mut csv = Csv::new(
        "quasilin-ratemap-meta",
        &["k", "kind", "n", "d", "p", "draws", "seed", "threshold_index", "threshold", "xhat_support", "xhat_values"],
    );
    for m in maps {
        let sup = m.xhat.support();
        let sup_s = sup.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let val_s = sup.iter().map(|&i| fmt_f64(m.xhat.get(i))).collect::<Vec<_>>().join(" ");
        for (i, &t) in m.thresholds.iter().enumerate() {
            csv.push(vec![
                Cell::I(m.k),
                Cell::S(m.kind.clone()),
                Cell::I(m.n),
                Cell::I(m.d),
                Cell::F(m.p),
                Cell::I(m.draws),
                Cell::U(m.seed),
                Cell::I(i),
                Cell::F(t),
                Cell::S(sup_s.clone()),
                Cell::S(val_s.clone()),
            ]);
        }
    }
    csv
}

/// Heatmap of one threshold: rows are thresholds for k = 2 (angle on the
/// columns) and polar angles for k = 3 (azimuth on the columns).
pub fn map_svg(map: &RateMap, t: usize) -> String {
    let title = format!("k = {}: rate of ratio > {}", map.k, map.thresholds[t]);
    if map.k == 2 {
        let cols: Vec<String> = map.cells.iter().map(|c| format!("{:.0}", c.angles[0])).collect();
        let values = vec![map.cells.iter().map(|c| c.rates[t]).collect()];
        Heatmap {
            title: &title,
            row_label: "threshold",
            col_label: "angle from x (deg)",
            row_ticks: vec![format!("{}", map.thresholds[t])],
            col_ticks: cols,
            values,
        }
        .to_svg()
    } else {
        let mut psis: Vec<f64> = map.cells.iter().map(|c| c.angles[0]).collect();
        psis.dedup();
        let azimuths: Vec<f64> = map.cells.iter().filter(|c| c.angles[0] == psis[1.min(psis.len() - 1)]).map(|c| c.angles[1]).collect();
        let values: Vec<Vec<f64>> = psis
            .iter()
            .map(|&psi| {
                let row: Vec<&_> = map.cells.iter().filter(|c| c.angles[0] == psi).collect();
                // poles are a single point: repeat it across the azimuths
                azimuths.iter().enumerate().map(|(i, _)| row[i.min(row.len() - 1)].rates[t]).collect()
            })
            .collect();
        Heatmap {
            title: &title,
            row_label: "polar angle from x (deg)",
            col_label: "azimuth (deg)",
            row_ticks: psis.iter().map(|p| format!("{p:.0}")).collect(),
            col_ticks: azimuths.iter().map(|a| format!("{a:.0}")).collect(),
            values,
        }
        .to_svg()
    }
}

pub fn write_fig1(maps: &[RateMap], out: &OutputDir) -> Result<()> {
    for m in maps {
        out.csv(&format!("ratemap_k{}.csv", m.k), &map_csv(m))?;
        for t in 0..m.thresholds.len() {
            out.text(&format!("ratemap_k{}_t{t}.svg", m.k), &map_svg(m, t))?;
        }
    }
    out.csv("meta.csv", &meta_csv(maps))?;
    Ok(())
}

pub struct Fig1RateMap;

impl Experiment for Fig1RateMap {
    fn name(&self) -> &'static str {
        "fig1_rate_map"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let maps = run_fig1(cfg, ctx)?;
        write_fig1(&maps, out)?;
        let middle = cfg.ratemap.as_ref().map_or(0, |r| r.middle);
        let lines = maps
            .iter()
            .map(|m| {
                format!(
                    "k = {}: threshold {}: max rate within 10 deg of -x = {:.3}, min rate beyond 45 deg = {:.3}",
                    m.k,
                    m.thresholds[middle],
                    m.max_rate_near_antipode(middle, 10.0),
                    m.min_rate_away_from_antipode(middle, 45.0)
                )
            })
            .collect();
        Ok(RunSummary { lines, diverged: false })
    }
}

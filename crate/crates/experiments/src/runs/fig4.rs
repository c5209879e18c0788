//! Greedy phase retrieval: success rate against sparsity for each
//! measurement count.

use super::{trial_seed, OPERATOR_STREAM, SIGNAL_STREAM};
use crate::config::ExperimentConfig;
use crate::grid::RateGrid;
use crate::output::{Cell, Csv, OutputDir};
use crate::registry::{Experiment, RunContext, RunSummary};
use crate::signals::sparse_gaussian;
use crate::stats::spearman;
use anyhow::{bail, Result};
use quasilin::greedy::greedy_recover_with;
use quasilin::{derive_seed, phase_aligned_distance, SeededRng};
use rayon::prelude::*;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrial {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    /// Sign-aligned error, NaN if the solver failed.
    pub error: f64,
    pub success: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct Fig4Result {
    pub grid: RateGrid,
    pub trials: Vec<PhaseTrial>,
}

impl Fig4Result {
    /// Spearman correlation of rate against k at measurement count `n`.
    pub fn spearman_k(&self, n: usize) -> Option<f64> {
        let c = self.grid.cols.iter().position(|&v| v == n as f64)?;
        let ks: Vec<f64> = self.grid.ks.iter().map(|&k| k as f64).collect();
        Some(spearman(&ks, &self.grid.column_rates(c)))
    }

    pub fn rate(&self, n: usize, k: usize) -> Option<f64> {
        let c = self.grid.cols.iter().position(|&v| v == n as f64)?;
        Some(self.grid.rate(self.grid.row_of(k)?, c))
    }

    pub fn trials_csv(&self) -> Csv {
        let mut csv = Csv::new(
            "quasilin-fig4-trials",
            &["n", "k", "trial", "seed", "error", "success", "note"],
        );
        for t in &self.trials {
            csv.push(vec![
                Cell::I(t.n),
                Cell::I(t.k),
                Cell::I(t.trial),
                Cell::U(t.seed),
                Cell::F(t.error),
                Cell::B(t.success),
                Cell::S(t.note.clone()),
            ]);
        }
        csv
    }
}

/// One trial of one cell; re-runnable in isolation from its cell seed.
pub fn run_trial(cfg: &ExperimentConfig, ctx: &RunContext, n: usize, k: usize, cell_seed: u64, trial: usize) -> PhaseTrial {
    let seed = trial_seed(cell_seed, trial);
    let outcome = (|| -> Result<f64> {
        let mut spec = cfg.ensemble.with_seed(derive_seed(seed, &[OPERATOR_STREAM]));
        spec.n = n;
        let op = ctx.operators.build(&spec)?;
        let mut rng = SeededRng::new(derive_seed(seed, &[SIGNAL_STREAM]));
        let x = sparse_gaussian(spec.d, k, 1.0, cfg.signal.support, cfg.signal.max_index, &mut rng)?;
        let b = op.evaluate(&x);
        let trace = greedy_recover_with(op.as_ref(), &b, &cfg.greedy.to_config(k, seed), &ctx.subsolvers)?;
        if let Err(e) = trace.check_invariants() {
            bail!("trace invariant violated: {e}");
        }
        let xr = trace.final_iterate().expect("k >= 1 steps");
        Ok(phase_aligned_distance(xr, &x)? / x.norm())
    })();
    let (error, note) = match outcome {
        Ok(e) => (e, String::new()),
        Err(e) => (f64::NAN, e.to_string().replace(',', ";")),
    };
    PhaseTrial {
        n,
        k,
        trial,
        seed,
        error,
        success: error <= cfg.success.phase_tol,
        note,
    }
}

pub fn cell_seed(base: u64, n: usize, k: usize) -> u64 {
    derive_seed(base, &[n as u64, k as u64])
}

pub fn run_fig4(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Fig4Result> {
    if cfg.grid.ks.is_empty() {
        bail!("fig4 needs grid.ks");
    }
    let ns = if cfg.grid.ns.is_empty() { vec![cfg.ensemble.n] } else { cfg.grid.ns.clone() };
    let mut grid = RateGrid::new(
        "fig4",
        "n",
        cfg.grid.ks.clone(),
        ns.iter().map(|&n| n as f64).collect(),
        cfg.trials,
    );
    let mut all = Vec::new();
    for (c, &n) in ns.iter().enumerate() {
        for (r, &k) in cfg.grid.ks.iter().enumerate() {
            let cs = cell_seed(cfg.seed, n, k);
            let start = Instant::now();
            let trials: Vec<PhaseTrial> =
                (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, ctx, n, k, cs, t)).collect();
            grid.wall_seconds[r][c] = start.elapsed().as_secs_f64();
            grid.cell_seeds[r][c] = cs;
            grid.successes[r][c] = trials.iter().filter(|t| t.success).count();
            all.extend(trials);
        }
    }
    Ok(Fig4Result { grid, trials: all })
}

pub fn write_fig4(res: &Fig4Result, out: &OutputDir) -> Result<()> {
    out.csv("rates.csv", &res.grid.to_csv())?;
    out.csv("trials.csv", &res.trials_csv())?;
    out.csv("timing.csv", &res.grid.timing_csv())?;
    out.text("rates.svg", &res.grid.to_svg("greedy phase retrieval: success rate"))?;
    Ok(())
}

pub struct Fig4PhaseGreedy;

impl Experiment for Fig4PhaseGreedy {
    fn name(&self) -> &'static str {
        "fig4_phase_greedy"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let res = run_fig4(cfg, ctx)?;
        write_fig4(&res, out)?;
        let mut lines = vec![res.grid.pretty()];
        for &n in &res.grid.cols {
            if let Some(s) = res.spearman_k(n as usize) {
                lines.push(format!("n = {n}: spearman(rate, k) = {s:.3}"));
            }
        }
        Ok(RunSummary { lines, diverged: false })
    }
}

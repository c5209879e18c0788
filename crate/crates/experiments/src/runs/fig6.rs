//! Soft and hard thresholding: success rate over sparsity and signal norm.

use super::{trial_seed, OPERATOR_STREAM, SIGNAL_STREAM};
use crate::config::ExperimentConfig;
use crate::grid::RateGrid;
use crate::output::{Cell, Csv, OutputDir};
use crate::registry::{Experiment, RunContext, RunSummary};
use crate::signals::sparse_gaussian;
use crate::stats::spearman;
use anyhow::{bail, Result};
use quasilin::thresholding::{alpha_continuation, default_alpha, geometric_alphas, iht, IhtConfig, IstConfig};
use quasilin::{derive_seed, QuasiLinearOperator, SeededRng, Signal};
use rayon::prelude::*;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTrial {
    pub k: usize,
    pub norm: f64,
    pub trial: usize,
    pub seed: u64,
    pub soft_error: f64,
    pub soft_success: bool,
    /// Fixed-point residual and stop tolerance of the last soft stage.
    pub soft_fp_residual: f64,
    pub soft_stop_tol: f64,
    pub soft_converged: bool,
    pub soft_iterations: usize,
    pub hard_error: f64,
    pub hard_success: bool,
    pub hard_converged: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct Fig6Result {
    pub soft: RateGrid,
    pub hard: RateGrid,
    pub trials: Vec<ThresholdTrial>,
}

impl Fig6Result {
    /// Spearman of the soft rate against k at the smallest norm.
    pub fn soft_trend_in_k(&self) -> f64 {
        let ks: Vec<f64> = self.soft.ks.iter().map(|&k| k as f64).collect();
        spearman(&ks, &self.soft.column_rates(0))
    }

    /// Spearman of a rate row against norm.
    pub fn soft_trend_in_norm(&self, k: usize) -> Option<f64> {
        let r = self.soft.row_of(k)?;
        Some(spearman(&self.soft.cols, &self.soft.row_rates(r)))
    }

    /// Spearman against norm of the soft rate averaged over all `k >= k_min`.
    pub fn soft_pooled_trend_in_norm(&self, k_min: usize) -> f64 {
        let rows: Vec<usize> = (0..self.soft.ks.len()).filter(|&r| self.soft.ks[r] >= k_min).collect();
        let pooled: Vec<f64> = (0..self.soft.cols.len())
            .map(|c| rows.iter().map(|&r| self.soft.rate(r, c)).sum::<f64>() / rows.len().max(1) as f64)
            .collect();
        spearman(&self.soft.cols, &pooled)
    }

    pub fn trials_csv(&self) -> Csv {
        let mut csv = Csv::new(
            "quasilin-fig6-trials",
            &[
                "k",
                "norm",
                "trial",
                "seed",
                "soft_error",
                "soft_success",
                "soft_fp_residual",
                "soft_stop_tol",
                "soft_converged",
                "soft_iterations",
                "hard_error",
                "hard_success",
                "hard_converged",
                "note",
            ],
        );
        for t in &self.trials {
            csv.push(vec![
                Cell::I(t.k),
                Cell::F(t.norm),
                Cell::I(t.trial),
                Cell::U(t.seed),
                Cell::F(t.soft_error),
                Cell::B(t.soft_success),
                Cell::F(t.soft_fp_residual),
                Cell::F(t.soft_stop_tol),
                Cell::B(t.soft_converged),
                Cell::I(t.soft_iterations),
                Cell::F(t.hard_error),
                Cell::B(t.hard_success),
                Cell::B(t.hard_converged),
                Cell::S(t.note.clone()),
            ]);
        }
        csv
    }
}

pub fn cell_seed(base: u64, k: usize, norm_index: usize) -> u64 {
    derive_seed(base, &[k as u64, norm_index as u64])
}

struct SoftOutcome {
    x: Signal,
    fp_residual: f64,
    stop_tol: f64,
    converged: bool,
    iterations: usize,
}

fn soft(cfg: &ExperimentConfig, op: &dyn QuasiLinearOperator, b: &Signal, norm: f64) -> Result<SoftOutcome> {
    let stop_tol = cfg.ist.stop_tol_rel * norm;
    let base = IstConfig { max_iters: cfg.ist.max_iters, stop_tol, ..IstConfig::new(1.0) };
    let alphas = match cfg.ist.alpha {
        Some(a) => vec![a],
        None => {
            let a0 = default_alpha(op, b)?;
            if !(a0 > 0.0) {
                bail!("zero data: no alpha path");
            }
            if cfg.ist.stages == 1 {
                vec![a0]
            } else {
                geometric_alphas(a0, cfg.ist.floor_ratio, cfg.ist.stages)?
            }
        }
    };
    let path = alpha_continuation(op, b, &alphas, &base, None)?;
    let last = path.reports.last().expect("nonempty path");
    Ok(SoftOutcome {
        x: last.final_x.clone(),
        fp_residual: last.fixed_point_residual,
        stop_tol,
        converged: last.converged,
        iterations: path.reports.iter().map(|r| r.iterations).sum(),
    })
}

pub fn run_trial(cfg: &ExperimentConfig, ctx: &RunContext, k: usize, norm: f64, cell_seed: u64, trial: usize) -> ThresholdTrial {
    let seed = trial_seed(cell_seed, trial);
    let tol = cfg.success.threshold_tol * norm.max(cfg.success.norm_floor);
    let mut t = ThresholdTrial {
        k,
        norm,
        trial,
        seed,
        soft_error: f64::NAN,
        soft_success: false,
        soft_fp_residual: f64::NAN,
        soft_stop_tol: cfg.ist.stop_tol_rel * norm,
        soft_converged: false,
        soft_iterations: 0,
        hard_error: f64::NAN,
        hard_success: false,
        hard_converged: false,
        note: String::new(),
    };
    let mut notes = Vec::new();
    let setup = (|| -> Result<_> {
        let op = ctx.operators.build(&cfg.ensemble.with_seed(derive_seed(seed, &[OPERATOR_STREAM])))?;
        let mut rng = SeededRng::new(derive_seed(seed, &[SIGNAL_STREAM]));
        let x = sparse_gaussian(cfg.ensemble.d, k, norm, cfg.signal.support, cfg.signal.max_index, &mut rng)?;
        let b = op.evaluate(&x);
        Ok((op, x, b))
    })();
    let (op, x, b) = match setup {
        Ok(v) => v,
        Err(e) => {
            t.note = e.to_string().replace(',', ";");
            return t;
        }
    };
    match soft(cfg, op.as_ref(), &b, norm) {
        Ok(s) => {
            t.soft_error = s.x.distance(&x).unwrap_or(f64::NAN);
            t.soft_success = t.soft_error <= tol;
            t.soft_fp_residual = s.fp_residual;
            t.soft_stop_tol = s.stop_tol;
            t.soft_converged = s.converged;
            t.soft_iterations = s.iterations;
        }
        Err(e) => notes.push(format!("soft: {e}")),
    }
    let hc = IhtConfig {
        mu: cfg.iht.mu,
        max_iters: cfg.iht.max_iters,
        stop_tol: cfg.iht.stop_tol_rel * norm,
        ..IhtConfig::new(k)
    };
    match iht(op.as_ref(), &b, &hc) {
        Ok(r) => {
            t.hard_error = r.final_x.distance(&x).unwrap_or(f64::NAN);
            t.hard_success = t.hard_error <= tol;
            t.hard_converged = r.converged;
        }
        Err(e) => notes.push(format!("hard: {e}")),
    }
    t.note = notes.join("; ").replace(',', ";");
    t
}

pub fn run_fig6(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Fig6Result> {
    if cfg.grid.ks.is_empty() {
        bail!("fig6 needs grid.ks");
    }
    let norms = match &cfg.grid.norms {
        Some(ax) => ax.values(),
        None => vec![cfg.signal.norm],
    };
    let mut soft = RateGrid::new("soft", "norm", cfg.grid.ks.clone(), norms.clone(), cfg.trials);
    let mut hard = RateGrid::new("hard", "norm", cfg.grid.ks.clone(), norms.clone(), cfg.trials);
    let mut all = Vec::new();
    for (r, &k) in cfg.grid.ks.iter().enumerate() {
        for (c, &norm) in norms.iter().enumerate() {
            let cs = cell_seed(cfg.seed, k, c);
            let start = Instant::now();
            let trials: Vec<ThresholdTrial> =
                (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, ctx, k, norm, cs, t)).collect();
            let secs = start.elapsed().as_secs_f64();
            for g in [&mut soft, &mut hard] {
                g.wall_seconds[r][c] = secs;
                g.cell_seeds[r][c] = cs;
            }
            soft.successes[r][c] = trials.iter().filter(|t| t.soft_success).count();
            hard.successes[r][c] = trials.iter().filter(|t| t.hard_success).count();
            all.extend(trials);
        }
    }
    Ok(Fig6Result { soft, hard, trials: all })
}

pub fn write_fig6(res: &Fig6Result, out: &OutputDir) -> Result<()> {
    out.csv("soft.csv", &res.soft.to_csv())?;
    out.csv("hard.csv", &res.hard.to_csv())?;
    out.csv("trials.csv", &res.trials_csv())?;
    out.csv("timing.csv", &res.soft.timing_csv())?;
    out.text("soft.svg", &res.soft.to_svg("soft thresholding: success rate"))?;
    out.text("hard.svg", &res.hard.to_svg("hard thresholding: success rate"))?;
    Ok(())
}

pub struct Fig6ThresholdGrid;

impl Experiment for Fig6ThresholdGrid {
    fn name(&self) -> &'static str {
        "fig6_threshold_grid"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let res = run_fig6(cfg, ctx)?;
        write_fig6(&res, out)?;
        let lines = vec![
            "soft".to_string(),
            res.soft.pretty(),
            "hard".to_string(),
            res.hard.pretty(),
            format!("soft: spearman(rate, k) at smallest norm = {:.3}", res.soft_trend_in_k()),
            format!("soft: spearman(mean rate over k >= 2, norm) = {:.3}", res.soft_pooled_trend_in_norm(2)),
        ];
        Ok(RunSummary { lines, diverged: false })
    }
}

//! Single solver runs on one operator draw and one signal.

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, Cell, Csv, OutputDir};
use crate::registry::{Experiment, RunContext, RunSummary};
use crate::signals::sparse_gaussian;
use anyhow::Result;
use quasilin::greedy::greedy_recover_with;
use quasilin::thresholding::{alpha_continuation, default_alpha, geometric_alphas, iht, IhtConfig, IstConfig, ThresholdingReport};
use quasilin::{derive_seed, phase_aligned_distance, SeededRng, SharedOperator, Signal};

use super::{OPERATOR_STREAM, SIGNAL_STREAM};

fn problem(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<(SharedOperator, Signal, Signal)> {
    let op = ctx.operators.build(&cfg.ensemble.with_seed(derive_seed(cfg.seed, &[OPERATOR_STREAM])))?;
    let mut rng = SeededRng::new(derive_seed(cfg.seed, &[SIGNAL_STREAM]));
    let x = sparse_gaussian(cfg.ensemble.d, cfg.signal.k, cfg.signal.norm, cfg.signal.support, cfg.signal.max_index, &mut rng)?;
    let b = op.evaluate(&x);
    Ok((op, x, b))
}

fn signal_text(x: &Signal) -> String {
    x.support().iter().map(|&i| format!("{i}:{}", fmt_f64(x.get(i)))).collect::<Vec<_>>().join(" ")
}

fn result_csv(x: &Signal, xr: &Signal, error: f64, diverged: bool) -> Csv {
    let mut csv = Csv::new("quasilin-single", &["truth", "recovered", "error", "diverged"]);
    csv.push(vec![Cell::S(signal_text(x)), Cell::S(signal_text(xr)), Cell::F(error), Cell::B(diverged)]);
    csv
}

fn history_csv(rep: &ThresholdingReport, stage: usize, csv: &mut Csv) {
    for (j, &obj) in rep.objective_history.iter().enumerate() {
        csv.push(vec![Cell::I(stage), Cell::I(j), Cell::F(obj)]);
    }
}

pub struct SingleGreedy;

impl Experiment for SingleGreedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let (op, x, b) = problem(cfg, ctx)?;
        let k_max = cfg.greedy.k_max.unwrap_or(cfg.signal.k);
        let trace = greedy_recover_with(op.as_ref(), &b, &cfg.greedy.to_config(k_max, cfg.seed), &ctx.subsolvers)?;
        let mut steps = Csv::new("quasilin-greedy-trace", &["step", "selected", "residual", "error"]);
        for j in 0..trace.steps() {
            steps.push(vec![
                Cell::I(j + 1),
                Cell::I(trace.selected[j]),
                Cell::F(trace.residual_lp[j]),
                Cell::F(trace.iterates[j].distance(&x)?),
            ]);
        }
        let xr = trace.final_iterate().cloned().unwrap_or_else(|| Signal::zeros(x.len()));
        let diverged = !xr.as_slice().iter().all(|v| v.is_finite());
        let error = phase_aligned_distance(&xr, &x).unwrap_or(f64::NAN);
        out.csv("trace.csv", &steps)?;
        out.csv("result.csv", &result_csv(&x, &xr, error, diverged))?;
        Ok(RunSummary {
            lines: vec![format!("greedy: {} steps, sign-aligned error {error:.3e}", trace.steps())],
            diverged,
        })
    }
}

pub struct SingleIht;

impl Experiment for SingleIht {
    fn name(&self) -> &'static str {
        "iht"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let (op, x, b) = problem(cfg, ctx)?;
        let hc = IhtConfig {
            mu: cfg.iht.mu,
            max_iters: cfg.iht.max_iters,
            stop_tol: cfg.iht.stop_tol_rel * cfg.signal.norm,
            ..IhtConfig::new(cfg.signal.k)
        };
        let rep = iht(op.as_ref(), &b, &hc)?;
        let mut hist = Csv::new("quasilin-iht-history", &["stage", "iteration", "objective"]);
        history_csv(&rep, 0, &mut hist);
        let error = rep.final_x.distance(&x).unwrap_or(f64::NAN);
        out.csv("history.csv", &hist)?;
        out.csv("result.csv", &result_csv(&x, &rep.final_x, error, rep.diverged))?;
        Ok(RunSummary {
            lines: vec![format!(
                "iht: {} iterations, converged {}, diverged {}, error {error:.3e}",
                rep.iterations, rep.converged, rep.diverged
            )],
            diverged: rep.diverged,
        })
    }
}

pub struct SingleIst;

impl Experiment for SingleIst {
    fn name(&self) -> &'static str {
        "ist"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let (op, x, b) = problem(cfg, ctx)?;
        let base = IstConfig {
            max_iters: cfg.ist.max_iters,
            stop_tol: cfg.ist.stop_tol_rel * cfg.signal.norm,
            ..IstConfig::new(1.0)
        };
        let alphas = match cfg.ist.alpha {
            Some(a) => vec![a],
            None if cfg.ist.stages == 1 => vec![default_alpha(op.as_ref(), &b)?],
            None => geometric_alphas(default_alpha(op.as_ref(), &b)?, cfg.ist.floor_ratio, cfg.ist.stages)?,
        };
        let path = alpha_continuation(op.as_ref(), &b, &alphas, &base, Some(&x))?;
        let mut hist = Csv::new("quasilin-ist-history", &["stage", "iteration", "objective"]);
        for (s, rep) in path.reports.iter().enumerate() {
            history_csv(rep, s, &mut hist);
        }
        let last = path.reports.last().expect("nonempty path");
        let error = last.final_x.distance(&x).unwrap_or(f64::NAN);
        out.csv("history.csv", &hist)?;
        out.csv("result.csv", &result_csv(&x, &last.final_x, error, last.diverged))?;
        Ok(RunSummary {
            lines: vec![format!(
                "ist: {} stages, final alpha {:.3e}, fixed-point residual {:.3e}, diverged {}, error {error:.3e}",
                path.reports.len(),
                path.alphas.last().copied().unwrap_or(f64::NAN),
                last.fixed_point_residual,
                last.diverged
            )],
            diverged: last.diverged,
        })
    }
}

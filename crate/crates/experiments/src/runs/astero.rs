//! Greedy recovery of low-frequency pulsation contours from windowed light curves.

use super::{OPERATOR_STREAM, SIGNAL_STREAM};
use crate::config::{AsteroCase, ExperimentConfig};
use crate::output::{Cell, Csv, OutputDir};
use crate::registry::{Experiment, RunContext, RunSummary};
use crate::signals::{decaying, sparse_balanced};
use anyhow::{anyhow, Result};
use quasilin::greedy::{greedy_recover_with, GreedyTrace};
use quasilin::operators::Asteroseismology;
use quasilin::{derive_seed, QuasiLinearOperator, SeededRng, Signal};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct AsteroRun {
    pub case: String,
    pub seed: u64,
    pub truth: Signal,
    pub trace: GreedyTrace,
    /// `||x_j - x|| / ||x||` per step.
    pub rel_errors: Vec<f64>,
    /// Whether the support after `k` steps equals the true support; `None`
    /// for decaying (non-sparse) cases.
    pub exact_support: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct CaseSummary {
    pub case: String,
    pub k: usize,
    /// False for decaying cases, where exact support is not defined.
    pub sparse: bool,
    pub runs: usize,
    pub exact: usize,
    pub median_rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct AsteroResult {
    pub runs: Vec<AsteroRun>,
    pub summaries: Vec<CaseSummary>,
    pub contour: Csv,
}

fn truth(case: &AsteroCase, d: usize, rng: &mut SeededRng) -> Result<Signal> {
    match case.decay {
        Some(ratio) => decaying(d, case.max_index, ratio, case.norm, rng),
        None => sparse_balanced(d, case.k, case.norm, case.max_index, case.min_ratio.unwrap_or(0.0), rng),
    }
}

pub fn build_operator(cfg: &ExperimentConfig, seed: u64) -> Result<Asteroseismology> {
    let e = &cfg.ensemble;
    Ok(Asteroseismology::new(e.n, e.d, derive_seed(seed, &[OPERATOR_STREAM]), &e.astero)?)
}

pub fn run_case(cfg: &ExperimentConfig, ctx: &RunContext, case: &AsteroCase, seed: u64) -> Result<AsteroRun> {
    let op = build_operator(cfg, seed)?;
    let mut rng = SeededRng::new(derive_seed(seed, &[SIGNAL_STREAM]));
    let x = truth(case, cfg.ensemble.d, &mut rng)?;
    let b = op.evaluate(&x);
    let trace = greedy_recover_with(&op, &b, &cfg.greedy.to_config(case.k, seed), &ctx.subsolvers)?;
    let rel_errors = trace
        .iterates
        .iter()
        .map(|xi| Ok(xi.distance(&x)? / x.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let exact_support = case.decay.is_none().then(|| {
        let mut got = trace.supports.last().cloned().unwrap_or_default();
        got.sort_unstable();
        got == x.support()
    });
    Ok(AsteroRun {
        case: case.name.clone(),
        seed,
        truth: x,
        trace,
        rel_errors,
        exact_support,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn run_astero(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<AsteroResult> {
    let sec = cfg.astero.as_ref().ok_or_else(|| anyhow!("astero experiment needs an [astero] section"))?;
    let jobs: Vec<(&AsteroCase, u64)> =
        sec.cases.iter().flat_map(|c| sec.seeds.iter().map(move |&s| (c, s))).collect();
    let runs = jobs
        .par_iter()
        .map(|(c, s)| run_case(cfg, ctx, c, *s))
        .collect::<Result<Vec<_>>>()?;

    let summaries = sec
        .cases
        .iter()
        .map(|c| {
            let mine: Vec<&AsteroRun> = runs.iter().filter(|r| r.case == c.name).collect();
            CaseSummary {
                case: c.name.clone(),
                k: c.k,
                sparse: c.decay.is_none(),
                runs: mine.len(),
                exact: mine.iter().filter(|r| r.exact_support == Some(true)).count(),
                median_rel_error: median(mine.iter().filter_map(|r| r.rel_errors.last().copied()).collect()),
            }
        })
        .collect();

    // Contours of the first seed of every case.
    let phis: Vec<f64> = (0..sec.phi_points)
        .map(|i| i as f64 / (sec.phi_points.max(2) - 1) as f64)
        .collect();
    let mut contour = Csv::new("quasilin-astero-contour", &["case", "seed", "phi", "truth", "recovered"]);
    if let Some(&first) = sec.seeds.first() {
        let op = build_operator(cfg, first)?;
        for r in runs.iter().filter(|r| r.seed == first) {
            let u = op.contour(&r.truth, &phis);
            let v = op.contour(r.trace.final_iterate().expect("k >= 1 steps"), &phis);
            for (i, &phi) in phis.iter().enumerate() {
                contour.push(vec![
                    Cell::S(r.case.clone()),
                    Cell::U(first),
                    Cell::F(phi),
                    Cell::F(u[i]),
                    Cell::F(v[i]),
                ]);
            }
        }
    }
    Ok(AsteroResult { runs, summaries, contour })
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_astero(res: &AsteroResult, out: &OutputDir) -> Result<()> {
    let mut steps = Csv::new(
        "quasilin-astero-steps",
        &["case", "seed", "step", "selected", "support", "true_support", "residual", "rel_error"],
    );
    for r in &res.runs {
        for j in 0..r.trace.steps() {
            steps.push(vec![
                Cell::S(r.case.clone()),
                Cell::U(r.seed),
                Cell::I(j + 1),
                Cell::I(r.trace.selected[j]),
                Cell::S(join(&r.trace.supports[j])),
                Cell::S(join(&r.truth.support())),
                Cell::F(r.trace.residual_lp[j]),
                Cell::F(r.rel_errors[j]),
            ]);
        }
    }
    let mut summary = Csv::new("quasilin-astero-summary", &["case", "k", "runs", "exact_support", "median_rel_error"]);
    for s in &res.summaries {
        summary.push(vec![
            Cell::S(s.case.clone()),
            Cell::I(s.k),
            Cell::I(s.runs),
            Cell::I(s.exact),
            Cell::F(s.median_rel_error),
        ]);
    }
    out.csv("steps.csv", &steps)?;
    out.csv("summary.csv", &summary)?;
    out.csv("contour.csv", &res.contour)?;
    Ok(())
}

pub struct AsteroDemo;

impl Experiment for AsteroDemo {
    fn name(&self) -> &'static str {
        "astero_demo"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        let res = run_astero(cfg, ctx)?;
        write_astero(&res, out)?;
        let lines = res
            .summaries
            .iter()
            .map(|s| {
                let exact = if s.sparse { format!("exact support {}/{}", s.exact, s.runs) } else { "decaying".into() };
                format!("{}: k = {}, {exact}, median relative error {:.3e}", s.case, s.k, s.median_rel_error)
            })
            .collect();
        Ok(RunSummary { lines, diverged: false })
    }
}

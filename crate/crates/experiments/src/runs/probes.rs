//! Monte-Carlo estimates of the restricted conditions, one runner per condition.

use crate::config::{ExperimentConfig, ProbeEntry};
use crate::output::{Cell, Csv, OutputDir};
use crate::registry::{Experiment, RunContext, RunSummary};
use crate::signals::anchor_with_tail;
use anyhow::{anyhow, Result};
use quasilin::ripprobe::{probe_eq1, probe_eq1b, probe_f_rip, probe_lipschitz_f, probe_linear_rip, ProbeResult};
use quasilin::{derive_seed, SeededRng, SharedOperator, Signal};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Seed streams below a probe entry's seed.
const ANCHOR_STREAM: u64 = 0;
const PROBE_STREAM: u64 = 1;
const PILOT_STREAM: u64 = 2;

/// One line of `probes.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub name: String,
    pub condition: String,
    pub result: Option<ProbeResult>,
    /// Empty on success, the error message otherwise.
    pub status: String,
}

pub trait ProbeRunner: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, entry: &ProbeEntry, ctx: &RunContext) -> Result<Vec<ProbeRow>>;
}

#[derive(Default)]
pub struct ProbeRegistry {
    entries: BTreeMap<String, Arc<dyn ProbeRunner>>,
}

impl ProbeRegistry {
    pub fn with_defaults() -> Self {
        let mut r = Self::default();
        r.register(Arc::new(LinearRipRunner));
        r.register(Arc::new(PairRunner { outer: false }));
        r.register(Arc::new(PairRunner { outer: true }));
        r.register(Arc::new(FRipRunner));
        r.register(Arc::new(LipschitzRunner));
        r
    }

    pub fn register(&mut self, runner: Arc<dyn ProbeRunner>) {
        self.entries.insert(runner.name().to_string(), runner);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ProbeRunner>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| anyhow!("unknown probe condition `{name}` (known: {})", self.names().join(", ")))
    }
}

fn ok_row(entry: &ProbeEntry, condition: &str, r: ProbeResult) -> ProbeRow {
    ProbeRow {
        name: entry.name.clone(),
        condition: condition.to_string(),
        result: Some(r),
        status: String::new(),
    }
}

fn operator(entry: &ProbeEntry, ctx: &RunContext) -> Result<SharedOperator> {
    Ok(ctx.operators.build(&entry.ensemble)?)
}

fn anchor(entry: &ProbeEntry) -> Result<Signal> {
    let mut rng = SeededRng::new(derive_seed(entry.seed, &[ANCHOR_STREAM]));
    anchor_with_tail(
        entry.ensemble.d,
        entry.k,
        entry.signal_norm,
        entry.tail,
        entry.tail_ratio.unwrap_or(0.5),
        &mut rng,
    )
}

struct LinearRipRunner;

impl ProbeRunner for LinearRipRunner {
    fn name(&self) -> &'static str {
        "linear_rip"
    }

    fn run(&self, entry: &ProbeEntry, ctx: &RunContext) -> Result<Vec<ProbeRow>> {
        let op = operator(entry, ctx)?;
        let a = op
            .linear_matrix()
            .ok_or_else(|| anyhow!("linear_rip needs a linear operator, got `{}`", op.kind()))?;
        let r = probe_linear_rip(a, entry.k, entry.trials, derive_seed(entry.seed, &[PROBE_STREAM]))?;
        Ok(vec![ok_row(entry, self.name(), r)])
    }
}

/// `eq1` (Euclidean denominator) and `eq1b` (outer-product denominator).
struct PairRunner {
    outer: bool,
}

impl ProbeRunner for PairRunner {
    fn name(&self) -> &'static str {
        if self.outer {
            "eq1b"
        } else {
            "eq1"
        }
    }

    fn run(&self, entry: &ProbeEntry, ctx: &RunContext) -> Result<Vec<ProbeRow>> {
        let op = operator(entry, ctx)?;
        let xhat = anchor(entry)?;
        let probe = |trials: usize, t: f64, seed: u64| {
            if self.outer {
                probe_eq1b(op.as_ref(), &xhat, entry.k, entry.p, trials, t, seed)
            } else {
                probe_eq1(op.as_ref(), &xhat, entry.k, entry.p, trials, t, seed)
            }
        };
        let threshold = match (entry.threshold, entry.calibrate) {
            (Some(t), _) => t,
            (None, Some(frac)) => {
                let pilot = probe(entry.trials, 0.0, derive_seed(entry.seed, &[PILOT_STREAM]))?;
                frac * pilot.median_ratio()
            }
            (None, None) => 0.0,
        };
        let r = probe(entry.trials, threshold, derive_seed(entry.seed, &[PROBE_STREAM]))?;
        Ok(vec![ok_row(entry, self.name(), r)])
    }
}

struct FRipRunner;

impl ProbeRunner for FRipRunner {
    fn name(&self) -> &'static str {
        "f_rip"
    }

    fn run(&self, entry: &ProbeEntry, ctx: &RunContext) -> Result<Vec<ProbeRow>> {
        let op = operator(entry, ctx)?;
        let r = probe_f_rip(op.as_ref(), entry.k, entry.trials, derive_seed(entry.seed, &[PROBE_STREAM]))?;
        Ok(vec![ok_row(entry, self.name(), r)])
    }
}

/// Reports the factor Lipschitz estimate and the tail ratio as two rows.
struct LipschitzRunner;

impl ProbeRunner for LipschitzRunner {
    fn name(&self) -> &'static str {
        "lipschitz_F"
    }

    fn run(&self, entry: &ProbeEntry, ctx: &RunContext) -> Result<Vec<ProbeRow>> {
        let op = operator(entry, ctx)?;
        let xhat = anchor(entry)?;
        let l = probe_lipschitz_f(
            op.as_ref(),
            &xhat,
            entry.k,
            entry.p,
            entry.trials,
            derive_seed(entry.seed, &[PROBE_STREAM]),
        )?;
        let mut tail = ok_row(entry, "tail_L", l.tail);
        if l.tail_undefined {
            tail.status = "undefined: x is exactly k-sparse".into();
        }
        Ok(vec![ok_row(entry, self.name(), l.factor), tail])
    }
}

/// Runs every entry; a failing entry becomes a row with its error message.
pub fn run_probes(entries: &[ProbeEntry], ctx: &RunContext) -> Vec<ProbeRow> {
    entries
        .iter()
        .flat_map(|e| {
            let outcome = ctx.probes.get(&e.condition).and_then(|r| r.run(e, ctx));
            match outcome {
                Ok(rows) => rows,
                Err(err) => vec![ProbeRow {
                    name: e.name.clone(),
                    condition: e.condition.clone(),
                    result: None,
                    status: format!("error: {err}"),
                }],
            }
        })
        .collect()
}

pub fn probes_csv(rows: &[ProbeRow]) -> Csv {
    let mut csv = Csv::new(
        "quasilin-probes",
        &[
            "name",
            "condition",
            "samples",
            "skipped",
            "seed",
            "alpha_hat",
            "beta_hat",
            "delta_hat",
            "median_ratio",
            "threshold",
            "success_rate",
            "sandwich_violations",
            "status",
        ],
    );
    for row in rows {
        let mut cells = vec![Cell::S(row.name.clone()), Cell::S(row.condition.clone())];
        match &row.result {
            Some(r) => cells.extend([
                Cell::I(r.samples),
                Cell::I(r.skipped),
                Cell::U(r.seed),
                Cell::F(r.alpha_hat),
                Cell::F(r.beta_hat),
                Cell::F(r.delta_hat()),
                Cell::F(r.median_ratio()),
                Cell::F(r.threshold.unwrap_or(f64::NAN)),
                Cell::F(r.success_rate),
                Cell::I(r.sandwich_violations),
            ]),
            None => {
                cells.extend([Cell::I(0), Cell::I(0), Cell::U(0)]);
                cells.extend((0..6).map(|_| Cell::F(f64::NAN)));
                cells.push(Cell::I(0));
            }
        }
        cells.push(Cell::S(row.status.replace(',', ";")));
        csv.push(cells);
    }
    csv
}

pub struct ProbeSuite;

impl Experiment for ProbeSuite {
    fn name(&self) -> &'static str {
        "probe_suite"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary> {
        if cfg.probes.is_empty() {
            return Err(anyhow!("probe_suite needs at least one [[probes]] entry"));
        }
        let rows = run_probes(&cfg.probes, ctx);
        out.csv("probes.csv", &probes_csv(&rows))?;
        let lines = rows
            .iter()
            .map(|r| match &r.result {
                Some(p) => format!(
                    "{} [{}]: alpha {:.4} beta {:.4} rate {:.3} {}",
                    r.name, r.condition, p.alpha_hat, p.beta_hat, p.success_rate, r.status
                ),
                None => format!("{} [{}]: {}", r.name, r.condition, r.status),
            })
            .collect();
        Ok(RunSummary { lines, diverged: false })
    }
}

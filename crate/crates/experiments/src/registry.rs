//! Experiments as named strategies.

use crate::config::ExperimentConfig;
use crate::output::OutputDir;
use anyhow::{anyhow, Result};
use quasilin::greedy::SubsolverRegistry;
use quasilin::OperatorRegistry;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Registries shared by every run.
pub struct RunContext {
    pub operators: OperatorRegistry,
    pub subsolvers: SubsolverRegistry,
    pub probes: crate::runs::probes::ProbeRegistry,
}

impl Default for RunContext {
    fn default() -> Self {
        Self {
            operators: OperatorRegistry::with_defaults(),
            subsolvers: SubsolverRegistry::with_defaults(),
            probes: crate::runs::probes::ProbeRegistry::with_defaults(),
        }
    }
}

/// What a run reports back to the CLI.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub lines: Vec<String>,
    /// Set by single runs whose solver diverged.
    pub diverged: bool,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext, out: &OutputDir) -> Result<RunSummary>;
}

#[derive(Default)]
pub struct ExperimentRegistry {
    entries: BTreeMap<String, Arc<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        use crate::runs::*;
        let mut r = Self::empty();
        r.register(Arc::new(fig1::Fig1RateMap));
        r.register(Arc::new(fig4::Fig4PhaseGreedy));
        r.register(Arc::new(fig6::Fig6ThresholdGrid));
        r.register(Arc::new(astero::AsteroDemo));
        r.register(Arc::new(probes::ProbeSuite));
        r.register(Arc::new(single::SingleGreedy));
        r.register(Arc::new(single::SingleIht));
        r.register(Arc::new(single::SingleIst));
        r
    }

    pub fn register(&mut self, e: Arc<dyn Experiment>) {
        self.entries.insert(e.name().to_string(), e);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Experiment>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            anyhow!("unknown experiment `{name}` (known: {})", self.names().join(", "))
        })
    }
}

pub mod astero;
pub mod fig1;
pub mod fig4;
pub mod fig6;
pub mod probes;
pub mod single;

use quasilin::derive_seed;

/// Per-trial stream labels below a trial seed.
pub(crate) const OPERATOR_STREAM: u64 = 0;
pub(crate) const SIGNAL_STREAM: u64 = 1;

pub(crate) fn trial_seed(cell_seed: u64, trial: usize) -> u64 {
    derive_seed(cell_seed, &[trial as u64])
}

//! Ground-truth signals for the experiments.

use crate::config::SupportRule;
use anyhow::{bail, Result};
use quasilin::{SeededRng, Signal};

/// `k` Gaussian coefficients on a random support, scaled to norm `norm`.
/// With [`SupportRule::LowFrequency`] the support is drawn from `0..max_index`.
pub fn sparse_gaussian(
    d: usize,
    k: usize,
    norm: f64,
    rule: SupportRule,
    max_index: Option<usize>,
    rng: &mut SeededRng,
) -> Result<Signal> {
    let pool = match rule {
        SupportRule::Uniform => d,
        SupportRule::LowFrequency => max_index.unwrap_or(d).min(d),
    };
    if k == 0 || k > pool {
        bail!("cannot place {k} nonzeros among {pool} indices");
    }
    let support = rng.subset(pool, k);
    loop {
        let entries: Vec<(usize, f64)> = support.iter().map(|&i| (i, rng.gaussian())).collect();
        let x = Signal::sparse(d, &entries)?;
        if x.norm() > 0.0 {
            return Ok(x.scaled(norm / x.norm()));
        }
    }
}

/// As [`sparse_gaussian`] on `0..max_index`, redrawn until the smallest
/// nonzero magnitude is at least `min_ratio` times the largest.
pub fn sparse_balanced(
    d: usize,
    k: usize,
    norm: f64,
    max_index: usize,
    min_ratio: f64,
    rng: &mut SeededRng,
) -> Result<Signal> {
    for _ in 0..10_000 {
        let x = sparse_gaussian(d, k, norm, SupportRule::LowFrequency, Some(max_index), rng)?;
        let mags: Vec<f64> = x.support().iter().map(|&i| x.get(i).abs()).collect();
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(0.0, f64::max);
        if lo >= min_ratio * hi {
            return Ok(x);
        }
    }
    bail!("no draw met the magnitude ratio {min_ratio} in 10000 attempts")
}

/// `m` nonzeros on `0..m` with magnitudes `ratio^j` in a random order and
/// random signs, scaled to `norm`. Its rearrangement decays geometrically.
pub fn decaying(d: usize, m: usize, ratio: f64, norm: f64, rng: &mut SeededRng) -> Result<Signal> {
    if m == 0 || m > d || !(ratio > 0.0 && ratio < 1.0) {
        bail!("decaying signal needs 1 <= m <= d and ratio in (0, 1)");
    }
    let order = {
        let mut idx: Vec<usize> = (0..m).collect();
        for i in 0..m {
            let j = i + rng.below(m - i);
            idx.swap(i, j);
        }
        idx
    };
    let entries: Vec<(usize, f64)> = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            (i, sign * ratio.powi(rank as i32))
        })
        .collect();
    let x = Signal::sparse(d, &entries)?;
    Ok(x.scaled(norm / x.norm()))
}

/// A unit k-sparse anchor with `tail` further nonzeros whose magnitudes
/// continue below the head by factors of `tail_ratio`.
pub fn anchor_with_tail(
    d: usize,
    k: usize,
    norm: f64,
    tail: usize,
    tail_ratio: f64,
    rng: &mut SeededRng,
) -> Result<Signal> {
    if k + tail > d {
        bail!("k + tail = {} exceeds d = {d}", k + tail);
    }
    let mut x = sparse_gaussian(d, k, 1.0, SupportRule::Uniform, None, rng)?;
    if tail > 0 {
        let head = x.support();
        let floor = head.iter().map(|&i| x.get(i).abs()).fold(f64::INFINITY, f64::min);
        let free: Vec<usize> = (0..d).filter(|i| !head.contains(i)).collect();
        let picks = rng.subset(free.len(), tail);
        for (j, &p) in picks.iter().enumerate() {
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            x.set(free[p], sign * floor * tail_ratio.powi(j as i32 + 1))?;
        }
    }
    let n = x.norm();
    Ok(x.scaled(norm / n))
}

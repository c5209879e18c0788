//! Success-rate maps of the lower bound `||A(x) - A(y)||_p > alpha ||x - y||`
//! for `y` sweeping the unit sphere on the support of a fixed sparse `x`.

use super::{sample_sparse_sphere, DEGENERATE_TOL};
use crate::error::{invalid, Result};
use crate::operators::SharedOperator;
use crate::rng::derive_seed;
use crate::signal::{lp_norm, Signal};
use rayon::prelude::*;

/// Layout of a rate map. The sphere through `x` on its support is
/// parametrized by angles measured from `x`: one angle `theta` in `[0, 360)`
/// for `k = 2`; a polar angle `psi` in `[0, 180]` from `x` and an azimuth for
/// `k = 3`. `theta = 180` and `psi = 180` are exactly `-x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMapSpec {
    pub k: usize,
    pub thresholds: Vec<f64>,
    /// Azimuthal steps around the full circle; the polar axis uses half as many.
    pub resolution: usize,
    /// Number of independent operator draws averaged per cell.
    pub draws: usize,
    pub p: f64,
    pub seed: u64,
}

impl RateMapSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k == 2 || self.k == 3) {
            return Err(invalid(format!("rate maps support k in {{2, 3}}, got {}", self.k)));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("rate map needs at least one finite nonnegative threshold"));
        }
        if self.resolution < 4 || !self.resolution.is_multiple_of(4) {
            return Err(invalid(format!(
                "resolution must be a positive multiple of 4, got {}",
                self.resolution
            )));
        }
        if self.draws == 0 {
            return Err(invalid("rate map needs at least one operator draw"));
        }
        lp_norm(&Signal::<f64>::zeros(1), self.p)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCell {
    /// `[theta]` for k = 2, `[psi, phi]` for k = 3, in degrees.
    pub angles: Vec<f64>,
    /// Angle between `y` and `-x`, in degrees.
    pub antipode_deg: f64,
    /// One rate per threshold; NaN when every draw was degenerate (`y = x`).
    pub rates: Vec<f64>,
    pub valid_draws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateMap {
    pub kind: String,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub draws: usize,
    pub thresholds: Vec<f64>,
    pub xhat: Signal,
    pub cells: Vec<RateCell>,
}

impl RateMap {
    /// Largest rate at threshold `t` among cells within `deg` degrees of `-x`.
    pub fn max_rate_near_antipode(&self, t: usize, deg: f64) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.antipode_deg <= deg && !c.rates[t].is_nan())
            .map(|c| c.rates[t])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest rate at threshold `t` among cells more than `deg` degrees from `-x`.
    pub fn min_rate_away_from_antipode(&self, t: usize, deg: f64) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.antipode_deg > deg && !c.rates[t].is_nan())
            .map(|c| c.rates[t])
            .fold(f64::INFINITY, f64::min)
    }
}

/// `(cos, sin)` of `2 pi i / steps`, exact at quarter turns.
fn circle_point(i: usize, steps: usize) -> (f64, f64) {
    let i = i % steps;
    if i == 0 {
        (1.0, 0.0)
    } else if 4 * i == steps {
        (0.0, 1.0)
    } else if 2 * i == steps {
        (-1.0, 0.0)
    } else if 4 * i == 3 * steps {
        (0.0, -1.0)
    } else {
        let a = std::f64::consts::TAU * i as f64 / steps as f64;
        (a.cos(), a.sin())
    }
}

/// Orthonormal basis of the coordinate subspace on `support`, starting with `x`.
fn support_frame(x: &Signal, support: &[usize]) -> Vec<Signal> {
    let d = x.len();
    let mut frame = vec![x.clone()];
    for &i in support {
        if frame.len() == support.len() {
            break;
        }
        let mut v = Signal::basis(d, i);
        for b in &frame {
            let c = b.inner(&v).expect("same length");
            v = v.sub(&b.scaled(c)).expect("same length");
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            frame.push(v.scaled(1.0 / nrm));
        }
    }
    frame
}

struct GridPoint {
    angles: Vec<f64>,
    antipode_deg: f64,
    y: Signal,
}

fn grid(x: &Signal, k: usize, resolution: usize) -> Vec<GridPoint> {
    let frame = support_frame(x, &x.support());
    let combine = |coef: &[f64]| {
        frame
            .iter()
            .zip(coef)
            .fold(Signal::zeros(x.len()), |acc, (b, &c)| acc.add(&b.scaled(c)).expect("same length"))
    };
    let step = 360.0 / resolution as f64;
    let mut points = Vec::new();
    if k == 2 {
        for i in 0..resolution {
            let (c, s) = circle_point(i, resolution);
            let theta = i as f64 * step;
            let from_x = theta.min(360.0 - theta);
            points.push(GridPoint {
                angles: vec![theta],
                antipode_deg: 180.0 - from_x,
                y: if 2 * i == resolution { x.neg() } else { combine(&[c, s]) },
            });
        }
    } else {
        let polar = resolution / 2;
        for j in 0..=polar {
            let (cp, sp) = circle_point(j, resolution);
            let psi = j as f64 * step;
            let azimuths = if j == 0 || j == polar { 1 } else { resolution };
            for i in 0..azimuths {
                let (ca, sa) = circle_point(i, resolution);
                let y = if j == polar { x.neg() } else { combine(&[cp, sp * ca, sp * sa]) };
                points.push(GridPoint {
                    angles: vec![psi, i as f64 * step],
                    antipode_deg: 180.0 - psi,
                    y,
                });
            }
        }
    }
    points
}

/// Builds the map: a fixed unit `x` with a random k-sparse support, `y` on
/// the angle grid, and for each operator draw `factory(seed_r)` the
/// indicator `||A(x) - A(y)||_p > t ||x - y||` per threshold `t`, averaged
/// over draws. `x` uses stream `[0]` of the spec seed and draw `r` uses
/// `[1, r]`.
pub fn build_rate_map<F>(factory: F, spec: &RateMapSpec) -> Result<RateMap>
where
    F: Fn(u64) -> Result<SharedOperator> + Sync,
{
    spec.validate()?;
    let first = factory(derive_seed(spec.seed, &[1, 0]))?;
    let (n, d) = first.dims();
    let kind = first.kind().to_string();
    drop(first);
    if spec.k > d {
        return Err(invalid(format!("k = {} exceeds d = {d}", spec.k)));
    }
    let xhat = sample_sparse_sphere(d, spec.k, derive_seed(spec.seed, &[0]))?;
    let points = grid(&xhat, spec.k, spec.resolution);

    // ratios[r][c]: None when y coincides with x.
    let ratios = (0..spec.draws)
        .into_par_iter()
        .map(|r| {
            let op = factory(derive_seed(spec.seed, &[1, r as u64]))?;
            let ax = op.evaluate(&xhat);
            points
                .iter()
                .map(|pt| {
                    let den = xhat.distance(&pt.y)?;
                    if den < DEGENERATE_TOL {
                        return Ok(None);
                    }
                    Ok(Some(lp_norm(&ax.sub(&op.evaluate(&pt.y))?, spec.p)? / den))
                })
                .collect::<Result<Vec<Option<f64>>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = points
        .into_iter()
        .enumerate()
        .map(|(c, pt)| {
            let column: Vec<f64> = ratios.iter().filter_map(|row| row[c]).collect();
            let rates = spec
                .thresholds
                .iter()
                .map(|&t| {
                    if column.is_empty() {
                        f64::NAN
                    } else {
                        column.iter().filter(|&&v| v > t).count() as f64 / column.len() as f64
                    }
                })
                .collect();
            RateCell {
                angles: pt.angles,
                antipode_deg: pt.antipode_deg,
                rates,
                valid_draws: column.len(),
            }
        })
        .collect();

    Ok(RateMap {
        kind,
        d,
        n,
        k: spec.k,
        p: spec.p,
        seed: spec.seed,
        draws: spec.draws,
        thresholds: spec.thresholds.clone(),
        xhat,
        cells,
    })
}

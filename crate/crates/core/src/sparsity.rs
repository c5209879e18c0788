//! Sparsity structure: nonincreasing rearrangement, best k-term approximation
//! and the class of rapidly decaying vectors.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::signal::Signal;

/// Magnitudes of a signal sorted nonincreasingly, with the index map back to
/// the original positions. Equal magnitudes keep ascending original order.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub values: Vec<f64>,
    pub permutation: Vec<usize>,
}

impl Rearrangement {
    /// `r_j(x)` with 1-based `j`, as in the decay-class definitions. Returns 0
    /// past the end.
    pub fn r(&self, j: usize) -> f64 {
        assert!(j >= 1, "rearrangement is 1-indexed");
        self.values.get(j - 1).copied().unwrap_or(0.0)
    }

    /// `sum_{j > k} r_j^2`, the squared best k-term approximation error.
    pub fn tail_energy(&self, k: usize) -> f64 {
        self.values.iter().skip(k).map(|v| v * v).sum()
    }
}

pub fn rearrange<T: Scalar>(x: &Signal<T>) -> Rearrangement {
    let mags: Vec<f64> = x.as_slice().iter().map(|v| v.modulus()).collect();
    let mut permutation: Vec<usize> = (0..mags.len()).collect();
    // Stable sort keeps ties in ascending index order.
    permutation.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let values = permutation.iter().map(|&i| mags[i]).collect();
    Rearrangement { values, permutation }
}

/// Keeps the `k` largest-magnitude entries (ties by ascending index).
pub fn best_k_approx<T: Scalar>(x: &Signal<T>, k: usize) -> Result<Signal<T>> {
    if k > x.len() {
        return Err(invalid(format!("k = {k} exceeds signal length {}", x.len())));
    }
    let r = rearrange(x);
    Ok(x.restricted_to(&r.permutation[..k]))
}

/// Support of the best k-term approximation, ascending.
pub fn best_k_support<T: Scalar>(x: &Signal<T>, k: usize) -> Result<Vec<usize>> {
    if k > x.len() {
        return Err(invalid(format!("k = {k} exceeds signal length {}", x.len())));
    }
    let r = rearrange(x);
    let mut s: Vec<usize> = r.permutation[..k]
        .iter()
        .copied()
        .filter(|&i| !x.get(i).is_zero())
        .collect();
    s.sort_unstable();
    Ok(s)
}

/// Decay-class parameter `kappa`, restricted to the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayClassParams {
    kappa: f64,
}

impl DecayClassParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa < 1.0 {
            Ok(Self { kappa })
        } else {
            Err(invalid(format!("kappa must lie in (0, 1), got {kappa}")))
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Whether `r_{j+1}(x) <= kappa * r_j(x)` for every `j`. Zero tails satisfy the
/// inequality trivially, so exactly sparse vectors with geometric head decay
/// are members.
pub fn in_decay_class<T: Scalar>(x: &Signal<T>, kappa: f64) -> Result<bool> {
    let params = DecayClassParams::new(kappa)?;
    Ok(rearrangement_decays(&rearrange(x), params.kappa()))
}

fn rearrangement_decays(r: &Rearrangement, kappa: f64) -> bool {
    r.values.windows(2).all(|w| w[1] <= kappa * w[0])
}

/// Both sides of the tail estimate for a rapidly decaying vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// `||x - x_{[j]}||`
    pub lhs: f64,
    /// `r_{j+1}(x) / sqrt(1 - kappa^2)`
    pub bound1: f64,
    /// `r_j(x) * kappa / sqrt(1 - kappa^2)`
    pub bound2: f64,
}

impl TailBounds {
    /// `lhs <= bound1 <= bound2` with a relative slack for rounding.
    pub fn chain_holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.bound1 * (1.0 + rel_tol) + f64::MIN_POSITIVE
            && self.bound1 <= self.bound2 * (1.0 + rel_tol) + f64::MIN_POSITIVE
    }
}

pub fn decay_tail_bound_check<T: Scalar>(x: &Signal<T>, j: usize, kappa: f64) -> Result<TailBounds> {
    let params = DecayClassParams::new(kappa)?;
    if j < 1 || j >= x.len() {
        return Err(invalid(format!("j must satisfy 1 <= j < d = {}, got {j}", x.len())));
    }
    let r = rearrange(x);
    if !rearrangement_decays(&r, params.kappa()) {
        return Err(Error::Precondition(format!(
            "signal is not {kappa}-rapidly decaying"
        )));
    }
    let lhs = r.tail_energy(j).sqrt();
    let denom = (1.0 - kappa * kappa).sqrt();
    Ok(TailBounds {
        lhs,
        bound1: r.r(j + 1) / denom,
        bound2: r.r(j) * kappa / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn sig(v: &[f64]) -> Signal {
        Signal::from_slice(v).unwrap()
    }

    #[test]
    fn rearrange_examples() {
        let r = rearrange(&sig(&[0.0, -3.0, 1.0]));
        assert_eq!(r.values, vec![3.0, 1.0, 0.0]);
        assert_eq!(r.permutation, vec![1, 2, 0]);
        let r = rearrange(&sig(&[2.0, 2.0]));
        assert_eq!(r.values, vec![2.0, 2.0]);
        assert_eq!(r.permutation, vec![0, 1]);
    }

    #[test]
    fn rearrange_matches_naive_sort() {
        let mut rng = SeededRng::new(1);
        for t in 0..1000 {
            let d = 1 + t % 23;
            let x = sig(&rng.gaussian_vec(d));
            let r = rearrange(&x);
            let mut naive: Vec<f64> = x.as_slice().iter().map(|v| v.abs()).collect();
            naive.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert_eq!(r.values, naive);
            for (rank, &i) in r.permutation.iter().enumerate() {
                assert_eq!(x.get(i).abs(), r.values[rank]);
            }
        }
    }

    #[test]
    fn best_k_examples() {
        assert_eq!(best_k_approx(&sig(&[3.0, 1.0, 2.0]), 2).unwrap(), sig(&[3.0, 0.0, 2.0]));
        assert_eq!(best_k_approx(&sig(&[1.0, 1.0, 1.0]), 0).unwrap(), sig(&[0.0, 0.0, 0.0]));
        assert!(best_k_approx(&sig(&[1.0]), 2).is_err());
        // ties broken by ascending index
        assert_eq!(best_k_approx(&sig(&[1.0, -1.0, 1.0]), 2).unwrap(), sig(&[1.0, -1.0, 0.0]));
    }

    /// Exhaustive oracle: minimum over all k-subsets of the projection error.
    fn brute_force_best_k_error(x: &[f64], k: usize) -> f64 {
        let d = x.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << d) {
            if mask.count_ones() as usize != k {
                continue;
            }
            // the best y on a fixed support copies x there
            let err: f64 = (0..d)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| x[i] * x[i])
                .sum();
            best = best.min(err);
        }
        best.sqrt()
    }

    #[test]
    fn best_k_is_optimal_against_exhaustive_supports() {
        let mut rng = SeededRng::new(2);
        for t in 0..400 {
            let d = 1 + t % 8;
            let k = rng.below(d + 1);
            let x = sig(&rng.gaussian_vec(d));
            let approx = best_k_approx(&x, k).unwrap();
            assert!(approx.l0() <= k);
            let err = x.distance(&approx).unwrap();
            assert!(err <= brute_force_best_k_error(x.as_slice(), k) + 1e-12);
        }
    }

    #[test]
    fn best_k_error_equals_rearrangement_tail() {
        let mut rng = SeededRng::new(9);
        for _ in 0..200 {
            let x = sig(&rng.gaussian_vec(12));
            let k = rng.below(13);
            let err = x.distance(&best_k_approx(&x, k).unwrap()).unwrap();
            let tail = rearrange(&x).tail_energy(k);
            assert!((err * err - tail).abs() <= 1e-12 * (1.0 + tail));
        }
    }

    #[test]
    fn decay_class_examples() {
        assert!(in_decay_class(&sig(&[1.0, 0.5, 0.25]), 0.5).unwrap());
        assert!(!in_decay_class(&sig(&[1.0, 0.9]), 0.5).unwrap());
        assert!(in_decay_class(&sig(&[0.0, 1.0, 0.0]), 0.1).unwrap());
        assert!(in_decay_class(&sig(&[1.0]), 0.0).is_err());
        assert!(in_decay_class(&sig(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn geometric_vectors_on_kappa_grid() {
        // r_i = kappa0^i belongs to D_kappa iff kappa >= kappa0. Dyadic
        // ratios keep the powers exact so the boundary case is decidable.
        for &k0 in &[0.25, 0.5, 0.75] {
            let x = sig(&(0..10).map(|i| f64::powi(k0, i)).collect::<Vec<_>>());
            for step in 1..40 {
                let kappa = step as f64 / 40.0;
                assert_eq!(in_decay_class(&x, kappa).unwrap(), kappa >= k0, "k0={k0} kappa={kappa}");
            }
        }
    }

    #[test]
    fn decay_class_is_monotone_in_kappa() {
        let mut rng = SeededRng::new(8);
        for _ in 0..300 {
            let x = sig(&rng.gaussian_vec(5));
            let a = rng.uniform_in(0.01, 0.99);
            let b = rng.uniform_in(a, 0.999);
            if in_decay_class(&x, a).unwrap() {
                assert!(in_decay_class(&x, b).unwrap());
            }
        }
    }

    #[test]
    fn tail_bound_examples() {
        let t = decay_tail_bound_check(&sig(&[1.0, 0.0, 0.0]), 1, 0.5).unwrap();
        assert_eq!(t.lhs, 0.0);
        assert_eq!(t.bound1, 0.0);
        assert!((t.bound2 - 0.5 / 0.75f64.sqrt()).abs() < 1e-15);
        assert!((t.bound2 - 0.5773502691896258).abs() < 1e-12);

        let x = sig(&(0..10).map(|i| 0.5f64.powi(i)).collect::<Vec<_>>());
        let t = decay_tail_bound_check(&x, 3, 0.5).unwrap();
        // direct evaluation: tail = sqrt(sum_{i>=3} 4^{-i})
        let tail: f64 = (3..10).map(|i| 0.25f64.powi(i)).sum::<f64>().sqrt();
        assert!((t.lhs - tail).abs() < 1e-15);
        assert!(t.lhs <= t.bound1 && t.bound1 <= t.bound2);

        assert!(matches!(
            decay_tail_bound_check(&sig(&[1.0, 0.9]), 1, 0.5),
            Err(Error::Precondition(_))
        ));
    }
}

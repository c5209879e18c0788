//! Dense signals and the norms recovery conditions are stated in.

use crate::error::{ensure_len, invalid, Error, Result};
use crate::scalar::Scalar;
use nalgebra::DVector;

/// A dense coefficient vector of length `d >= 1` with finite entries.
///
/// Used for the unknown signal, its approximations, measurement data and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T: Scalar = f64> {
    entries: DVector<T>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(entries))
    }

    pub fn from_vector(entries: DVector<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("signal must have at least one entry"));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("signal entry {i} is not finite")));
        }
        Ok(Self { entries })
    }

    /// Wraps the result of internal arithmetic. Length and finiteness are the
    /// caller's responsibility.
    pub(crate) fn from_vector_unchecked(entries: DVector<T>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "signal length must be positive");
        Self {
            entries: DVector::zeros(d),
        }
    }

    /// Unit basis vector `e_i` of length `d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut s = Self::zeros(d);
        s.entries[i] = T::one();
        s
    }

    /// Signal of length `d` with the given `(index, value)` pairs set.
    pub fn sparse(d: usize, entries: &[(usize, T)]) -> Result<Self> {
        let mut s = Self::zeros(d);
        for &(i, v) in entries {
            if i >= d {
                return Err(invalid(format!("index {i} out of range for length {d}")));
            }
            s.entries[i] = v;
        }
        Self::from_vector(s.entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[T] {
        self.entries.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.entries
    }

    pub fn into_vector(self) -> DVector<T> {
        self.entries
    }

    pub fn get(&self, i: usize) -> T {
        self.entries[i]
    }

    pub fn set(&mut self, i: usize, value: T) -> Result<()> {
        if !value.is_finite() {
            return Err(invalid("non-finite value"));
        }
        self.entries[i] = value;
        Ok(())
    }

    /// Indices of nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of nonzero entries.
    pub fn l0(&self) -> usize {
        self.entries.iter().filter(|v| !v.is_zero()).count()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.norm_squared()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.modulus()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// `<self, other>` conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        ensure_len("inner product operands", self.len(), other.len())?;
        Ok(self.entries.dotc(&other.entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure_len("difference operands", self.len(), other.len())?;
        Ok(Self::from_vector_unchecked(&self.entries - &other.entries))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_len("sum operands", self.len(), other.len())?;
        Ok(Self::from_vector_unchecked(&self.entries + &other.entries))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_vector_unchecked(&self.entries * c)
    }

    pub fn neg(&self) -> Self {
        Self::from_vector_unchecked(-&self.entries)
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        ensure_len("distance operands", self.len(), other.len())?;
        Ok((&self.entries - &other.entries).norm())
    }

    /// Copy with every entry outside `support` zeroed.
    pub fn restricted_to(&self, support: &[usize]) -> Self {
        let mut out = Self::zeros(self.len());
        for &i in support {
            out.entries[i] = self.entries[i];
        }
        out
    }

    pub fn is_k_sparse(&self, k: usize) -> bool {
        self.l0() <= k
    }
}

impl Signal<f64> {
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.entries.iter().copied().collect()
    }
}

/// `l_p` norm `(sum |v_i|^p)^(1/p)` for `p >= 1`.
pub fn lp_norm<T: Scalar>(v: &Signal<T>, p: f64) -> Result<f64> {
    lp_norm_slice(v.as_slice(), p)
}

/// `l_p` norm of a raw slice; shared by solvers working on unwrapped buffers.
pub fn lp_norm_slice<T: Scalar>(v: &[T], p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("l_p norm needs p in [1, inf), got {p}")));
    }
    if p == 2.0 {
        return Ok(v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt());
    }
    if p == 1.0 {
        return Ok(v.iter().map(|x| x.modulus()).sum());
    }
    // Scale by the largest magnitude so |v_i|^p cannot overflow.
    let scale = v.iter().map(|x| x.modulus()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = v.iter().map(|x| (x.modulus() / scale).powf(p)).sum();
    Ok(scale * sum.powf(1.0 / p))
}

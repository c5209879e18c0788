use super::{
    make_gaussian, AsteroParams, Asteroseismology, GaussianNormalization, InverseQuadratic,
    LinearOperator, LipschitzPerturbed, NearlyIsometric, Rank1Phase, RankMProjectorPhase,
    SharedOperator, VectorDistribution,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_norm, Matrix};
use crate::rng::derive_seed;
use crate::signal::Signal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMatrix {
    /// Rectangular `n × d` identity.
    #[default]
    Identity,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    #[default]
    InverseQuadratic,
}

fn default_epsilon() -> f64 {
    1.0
}

/// Serializable description of a random operator. Fields a kind does not use
/// are ignored by its builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: String,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub seed: u64,
    /// Projector rank (`rankm_projector_phase`).
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Scaling of Gaussian matrices (`gaussian_matrix`, and `A1` of `lipschitz_perturbed`).
    #[serde(default)]
    pub normalize: GaussianNormalization,
    #[serde(default)]
    pub a2: PerturbationMatrix,
    /// Anchor `x0` of the perturbation; zero when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub profile: ProfileKind,
    /// Divide `A1` and `A2` by `||A1|| + eps sup|f| ||A2||` so that `||F(x)|| <= 1`.
    #[serde(default)]
    pub unit_bound: bool,
    /// Measurement-vector law (`rank1_phase`).
    #[serde(default)]
    pub vectors: VectorDistribution,
    #[serde(default)]
    pub astero: AsteroParams,
}

impl EnsembleSpec {
    pub fn new(kind: &str, n: usize, d: usize, seed: u64) -> Self {
        Self {
            kind: kind.to_string(),
            n,
            d,
            seed,
            m: None,
            epsilon: default_epsilon(),
            normalize: GaussianNormalization::None,
            a2: PerturbationMatrix::Identity,
            x0: None,
            profile: ProfileKind::InverseQuadratic,
            unit_bound: false,
            vectors: VectorDistribution::Gaussian,
            astero: AsteroParams::default(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(invalid(format!("ensemble needs n, d >= 1, got n={}, d={}", self.n, self.d)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if let Some(m) = self.m {
            if m == 0 || m > self.d {
                return Err(invalid(format!("m must satisfy 1 <= m <= d, got {m}")));
            }
        }
        Ok(())
    }
}

/// Constructs one operator family from a spec.
pub trait EnsembleBuilder: Send + Sync {
    fn build(&self, spec: &EnsembleSpec) -> Result<SharedOperator>;
}

impl<F> EnsembleBuilder for F
where
    F: Fn(&EnsembleSpec) -> Result<SharedOperator> + Send + Sync,
{
    fn build(&self, spec: &EnsembleSpec) -> Result<SharedOperator> {
        self(spec)
    }
}

/// Name-keyed table of ensemble builders.
pub struct OperatorRegistry {
    builders: BTreeMap<String, Box<dyn EnsembleBuilder>>,
}

impl OperatorRegistry {
    pub fn empty() -> Self {
        Self { builders: BTreeMap::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("gaussian_matrix", build_gaussian);
        r.register("lipschitz_perturbed", build_perturbed);
        r.register("rank1_phase", build_rank1);
        r.register("rankm_projector_phase", build_projector);
        r.register("nearly_isometric", build_isometric);
        r.register("asteroseismology", build_astero);
        r
    }

    pub fn register(&mut self, name: &str, builder: impl EnsembleBuilder + 'static) {
        self.builders.insert(name.to_string(), Box::new(builder));
    }

    pub fn kinds(&self) -> Vec<String> {
        self.builders.keys().cloned().collect()
    }

    pub fn build(&self, spec: &EnsembleSpec) -> Result<SharedOperator> {
        spec.validate()?;
        let builder = self.builders.get(&spec.kind).ok_or_else(|| Error::UnknownStrategy {
            registry: "ensemble",
            name: spec.kind.clone(),
            known: self.kinds().join(", "),
        })?;
        builder.build(spec)
    }
}

impl Default for OperatorRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

fn build_gaussian(spec: &EnsembleSpec) -> Result<SharedOperator> {
    Ok(Arc::new(LinearOperator::new(make_gaussian(spec.n, spec.d, spec.seed, spec.normalize))))
}

/// `A1` uses the spec seed directly and a Gaussian `A2` a derived one, so `A1`
/// matches `gaussian_matrix` with the same seed.
pub(crate) fn build_perturbed_concrete(spec: &EnsembleSpec) -> Result<LipschitzPerturbed> {
    let a1 = make_gaussian(spec.n, spec.d, spec.seed, spec.normalize);
    let a2 = match spec.a2 {
        PerturbationMatrix::Identity => Matrix::identity(spec.n, spec.d),
        PerturbationMatrix::Gaussian => {
            make_gaussian(spec.n, spec.d, derive_seed(spec.seed, &[2]), spec.normalize)
        }
    };
    let x0 = match &spec.x0 {
        Some(v) => Signal::from_slice(v)?,
        None => Signal::zeros(spec.d),
    };
    let profile = match spec.profile {
        ProfileKind::InverseQuadratic => Arc::new(InverseQuadratic),
    };
    let op = LipschitzPerturbed::new(a1, a2, spec.epsilon, x0, profile)?;
    if spec.unit_bound {
        let s = spectral_norm(op.a1()).value
            + spec.epsilon * op.profile().bound() * spectral_norm(op.a2()).value;
        return Ok(op.rescaled(s));
    }
    Ok(op)
}

fn build_perturbed(spec: &EnsembleSpec) -> Result<SharedOperator> {
    Ok(Arc::new(build_perturbed_concrete(spec)?))
}

fn build_rank1(spec: &EnsembleSpec) -> Result<SharedOperator> {
    Ok(Arc::new(Rank1Phase::<f64>::random(spec.n, spec.d, spec.seed, spec.vectors)?))
}

fn build_projector(spec: &EnsembleSpec) -> Result<SharedOperator> {
    let m = spec
        .m
        .ok_or_else(|| invalid("rankm_projector_phase requires m"))?;
    Ok(Arc::new(RankMProjectorPhase::random(spec.n, spec.d, m, spec.seed)?))
}

fn build_isometric(spec: &EnsembleSpec) -> Result<SharedOperator> {
    Ok(Arc::new(NearlyIsometric::random(spec.n, spec.d, spec.seed)?))
}

fn build_astero(spec: &EnsembleSpec) -> Result<SharedOperator> {
    Ok(Arc::new(Asteroseismology::new(spec.n, spec.d, spec.seed, &spec.astero)?))
}

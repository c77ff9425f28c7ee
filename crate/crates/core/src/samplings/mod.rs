//! Sample families: for every `n`, a finite list of finite structures such
//! that an instance with at most `n` variables is satisfiable in some model
//! of the theory iff it is satisfiable in one of the structures.

mod builtin;
mod debruijn;
mod deciders;
mod derived;
mod product;
mod verify;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::definition::QfFormula;
use crate::formulas::{FormulaError, Instance};
use crate::model::{ModelError, Signature, Structure};

pub use builtin::{
    alternating_cycles_sampling, collapse, colored_partition_sampling, dense_order_sampling, succ2col_sampling,
    successor_sampling, two_models_sampling,
};
pub use debruijn::de_bruijn;
pub use derived::{equality_expansion, sampling_from_decider, MAX_ENUMERATED_ATOMS};
pub use product::product_sampling;
pub use verify::{verify_equality_matching, Counterexample, EqualityMatchingReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("definition of `{name}`: {source}")]
    Definition { name: String, source: ModelError },
    #[error("`{name}` must be defined from equality alone")]
    NotEqualityOnly { name: String },
    #[error("family `{family}` produced a sample over {found}, expected {expected}")]
    SampleSignature {
        family: String,
        expected: String,
        found: String,
    },
    #[error("signatures of `{left}` and `{right}` share the symbol `{symbol}`")]
    OverlappingSignatures {
        left: String,
        right: String,
        symbol: String,
    },
    #[error("family `{family}` is not marked {property}")]
    MissingProperty { family: String, property: &'static str },
    #[error("family `{0}` has no reference decider")]
    MissingDecider(String),
    #[error("index {n} exceeds the configured maximum {max_n}")]
    IndexTooLarge { n: usize, max_n: usize },
    #[error("{atoms} candidate atoms exceed the enumeration limit of {limit}")]
    TooManyAtoms { atoms: usize, limit: usize },
    #[error("a partition sampling needs at least one part")]
    NoParts,
}

/// Reference decision procedure: satisfiability of an instance (equalities,
/// disequalities and `⊥` allowed) in some model of the theory.
pub type Decider = Arc<dyn Fn(&Instance) -> bool + Send + Sync>;

type Generator = Arc<dyn Fn(usize) -> Result<Vec<Structure>, SamplingError> + Send + Sync>;

/// A relation added to a base structure through a quantifier-free
/// definition with free variables `x1..x_arity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationDef {
    pub name: String,
    pub arity: usize,
    pub formula: QfFormula,
}

impl RelationDef {
    pub fn new(name: impl Into<String>, arity: usize, formula: QfFormula) -> Self {
        RelationDef {
            name: name.into(),
            arity,
            formula,
        }
    }

    /// Parses the formula text; see [`QfFormula::parse`].
    pub fn parse(name: impl Into<String>, arity: usize, formula: &str) -> Result<Self, crate::definition::DefinitionError> {
        Ok(RelationDef::new(name, arity, QfFormula::parse(formula)?))
    }
}

/// An indexed family `n ↦ generate(n)` of finite structures, with trusted
/// metadata and an optional reference decider.
///
/// `generate(0)` is `generate(1)`. Results are memoized, so repeated calls
/// return the same structures.
#[derive(Clone)]
pub struct SampleFamily {
    name: String,
    signature: Signature,
    generator: Generator,
    cache: Arc<Mutex<HashMap<usize, Arc<Vec<Structure>>>>>,
    equality_matching: bool,
    no_pp_algebraicity: bool,
    decider: Option<Decider>,
}

impl fmt::Debug for SampleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampleFamily")
            .field("name", &self.name)
            .field("signature", &self.signature.to_string())
            .field("equality_matching", &self.equality_matching)
            .field("no_pp_algebraicity", &self.no_pp_algebraicity)
            .field("decider", &self.decider.is_some())
            .finish()
    }
}

impl SampleFamily {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        generator: impl Fn(usize) -> Result<Vec<Structure>, SamplingError> + Send + Sync + 'static,
    ) -> Self {
        SampleFamily {
            name: name.into(),
            signature,
            generator: Arc::new(generator),
            cache: Arc::default(),
            equality_matching: false,
            no_pp_algebraicity: false,
            decider: None,
        }
    }

    pub fn with_flags(mut self, equality_matching: bool, no_pp_algebraicity: bool) -> Self {
        self.equality_matching = equality_matching;
        self.no_pp_algebraicity = no_pp_algebraicity;
        self
    }

    pub fn with_decider(mut self, decider: impl Fn(&Instance) -> bool + Send + Sync + 'static) -> Self {
        self.decider = Some(Arc::new(decider));
        self
    }

    pub(crate) fn with_shared_decider(mut self, decider: Option<Decider>) -> Self {
        self.decider = decider;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn equality_matching(&self) -> bool {
        self.equality_matching
    }

    pub fn no_pp_algebraicity(&self) -> bool {
        self.no_pp_algebraicity
    }

    pub fn decider(&self) -> Option<&Decider> {
        self.decider.as_ref()
    }

    /// The reference verdict, when a decider is attached.
    pub fn decide(&self, inst: &Instance) -> Option<bool> {
        self.decider.as_ref().map(|d| d(inst))
    }

    pub fn generate(&self, n: usize) -> Result<Arc<Vec<Structure>>, SamplingError> {
        let n = n.max(1);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&n) {
            return Ok(Arc::clone(hit));
        }
        let samples = (self.generator)(n)?;
        if let Some(bad) = samples.iter().find(|s| s.signature() != &self.signature) {
            return Err(SamplingError::SampleSignature {
                family: self.name.clone(),
                expected: self.signature.to_string(),
                found: bad.signature().to_string(),
            });
        }
        let samples = Arc::new(samples);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(n, Arc::clone(&samples));
        Ok(samples)
    }

    /// Sum of the domain sizes of `generate(n)`.
    pub fn family_size(&self, n: usize) -> Result<usize, SamplingError> {
        Ok(self.generate(n)?.iter().map(Structure::domain_size).sum())
    }
}

/// Wraps caller-supplied structures verbatim.
pub fn explicit_sampling(
    name: impl Into<String>,
    signature: Signature,
    samples: impl Fn(usize) -> Vec<Structure> + Send + Sync + 'static,
    equality_matching: bool,
    no_pp_algebraicity: bool,
) -> SampleFamily {
    SampleFamily::new(name, signature, move |n| Ok(samples(n))).with_flags(equality_matching, no_pp_algebraicity)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new([("R", 2)]).unwrap()
    }

    #[test]
    fn zero_index_is_one() {
        let f = explicit_sampling("c", sig(), |n| vec![Structure::empty(sig(), n)], false, false);
        assert_eq!(f.family_size(0).unwrap(), 1);
        assert_eq!(f.family_size(4).unwrap(), 4);
    }

    #[test]
    fn generate_is_memoized() {
        let f = explicit_sampling("c", sig(), |n| vec![Structure::empty(sig(), n)], false, false);
        let a = f.generate(3).unwrap();
        let b = f.generate(3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn foreign_samples_are_rejected() {
        let other = Signature::new([("S", 1)]).unwrap();
        let f = explicit_sampling("bad", sig(), move |_| vec![Structure::empty(other.clone(), 1)], false, false);
        assert!(matches!(f.generate(1), Err(SamplingError::SampleSignature { .. })));
    }

    #[test]
    fn empty_family_has_size_zero() {
        let f = explicit_sampling("none", sig(), |_| Vec::new(), true, true);
        assert_eq!(f.family_size(5).unwrap(), 0);
    }
}

//! Finite relational structures and the operations the rest of the crate
//! builds on: disjoint unions, homomorphism checks, homomorphic images and
//! relations materialized from quantifier-free definitions.

mod relation;
mod signature;
mod structure;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::definition::QfFormula;

pub(crate) use relation::{PositionIndex, Projections};
pub use relation::{Element, Relation};
pub use signature::{Signature, Symbol};
pub use structure::{Structure, StructureBuilder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate relation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("relation symbol `{0}` must have positive arity")]
    ZeroArity(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` has arity {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} outside domain of size {domain_size}")]
    ElementOutOfRange { element: Element, domain_size: usize },
    #[error("structures are over different signatures")]
    SignatureMismatch,
    #[error("element map covers {found} elements, domain has {expected}")]
    PartialMap { expected: usize, found: usize },
    #[error("map is not a homomorphism")]
    NotAHomomorphism,
    #[error("{found} labels for a domain of size {expected}")]
    LabelCount { expected: usize, found: usize },
    #[error("definition uses variable x{index} but the relation has arity {arity}")]
    DefinitionVariable { index: usize, arity: usize },
}

/// Disjoint union: domains are concatenated in input order and every tuple is
/// shifted by the offset of the summand it came from.
pub fn disjoint_union(structures: &[Structure]) -> Result<Structure, ModelError> {
    let Some(first) = structures.first() else {
        return Ok(Structure::empty(Signature::empty(), 0));
    };
    let signature = first.signature().clone();
    if structures.iter().any(|s| s.signature() != &signature) {
        return Err(ModelError::SignatureMismatch);
    }
    let total: usize = structures.iter().map(Structure::domain_size).sum();
    let mut relations = Vec::with_capacity(signature.len());
    for (r, sym) in signature.symbols().iter().enumerate() {
        let mut data = Vec::new();
        let mut offset = 0 as Element;
        for s in structures {
            for t in s.relation(r).iter() {
                data.extend(t.iter().map(|&e| e + offset));
            }
            offset += s.domain_size() as Element;
        }
        relations.push(Relation::from_flat(sym.arity, data));
    }
    let union = Structure::new(signature, total, relations)?;
    if structures.iter().any(|s| s.labels().is_some()) {
        let labels = structures
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.elements().map(move |e| format!("{}.{}", i, s.label(e))))
            .collect();
        union.with_labels(labels)
    } else {
        Ok(union)
    }
}

fn check_map(map: &[Element], from: &Structure, to: &Structure) -> Result<(), ModelError> {
    if from.signature() != to.signature() {
        return Err(ModelError::SignatureMismatch);
    }
    if map.len() != from.domain_size() {
        return Err(ModelError::PartialMap {
            expected: from.domain_size(),
            found: map.len(),
        });
    }
    if let Some(&e) = map.iter().find(|&&e| e as usize >= to.domain_size()) {
        return Err(ModelError::ElementOutOfRange {
            element: e,
            domain_size: to.domain_size(),
        });
    }
    Ok(())
}

/// Whether `map` (indexed by the elements of `from`) sends every tuple of
/// every relation of `from` into the same relation of `to`.
pub fn is_homomorphism(map: &[Element], from: &Structure, to: &Structure) -> Result<bool, ModelError> {
    check_map(map, from, to)?;
    let mut image = Vec::new();
    for (r, rel) in from.relations().iter().enumerate() {
        let target = to.relation(r);
        for t in rel.iter() {
            image.clear();
            image.extend(t.iter().map(|&e| map[e as usize]));
            if !target.contains(&image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The substructure of `to` induced on the image of a homomorphism.
///
/// Elements of the result are the image elements in ascending id order,
/// labelled with their labels in `to`.
pub fn image_structure(map: &[Element], from: &Structure, to: &Structure) -> Result<Structure, ModelError> {
    if !is_homomorphism(map, from, to)? {
        return Err(ModelError::NotAHomomorphism);
    }
    let mut image: Vec<Element> = map.to_vec();
    image.sort_unstable();
    image.dedup();
    let renumber: BTreeMap<Element, Element> = image
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i as Element))
        .collect();
    let mut relations = Vec::with_capacity(to.signature().len());
    for rel in to.relations() {
        let mut data = Vec::new();
        for t in rel.iter() {
            if t.iter().all(|e| renumber.contains_key(e)) {
                data.extend(t.iter().map(|e| renumber[e]));
            }
        }
        relations.push(Relation::from_flat(rel.arity(), data));
    }
    let labels = image.iter().map(|&e| to.label(e)).collect();
    Structure::new(to.signature().clone(), image.len(), relations)?.with_labels(labels)
}

/// All `arity`-tuples over the domain of `base` satisfying `def`, where
/// `x1..x_arity` name the tuple positions and relation atoms are read from
/// `base`.
pub fn evaluate_definition(def: &QfFormula, base: &Structure, arity: usize) -> Result<Relation, ModelError> {
    if let Some(max) = def.max_var() {
        if max >= arity {
            return Err(ModelError::DefinitionVariable {
                index: max + 1,
                arity,
            });
        }
    }
    for (symbol, n) in def.atom_arities() {
        match base.signature().arity_of(symbol) {
            None => return Err(ModelError::UnknownSymbol(symbol.to_string())),
            Some(a) if a != n => {
                return Err(ModelError::ArityMismatch {
                    symbol: symbol.to_string(),
                    expected: a,
                    found: n,
                })
            }
            _ => {}
        }
    }
    let d = base.domain_size();
    let mut data = Vec::new();
    if arity == 0 || d == 0 {
        return Ok(Relation::new(arity));
    }
    let mut tuple = vec![0 as Element; arity];
    let mut lookup = |symbol: &str, t: &[Element]| base.relation_by_name(symbol).is_some_and(|r| r.contains(t));
    // odometer over domain^arity in lexicographic order
    loop {
        if def.eval(&tuple, &mut lookup) {
            data.extend_from_slice(&tuple);
        }
        let mut pos = arity;
        loop {
            if pos == 0 {
                return Ok(Relation::from_flat(arity, data));
            }
            pos -= 1;
            tuple[pos] += 1;
            if (tuple[pos] as usize) < d {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

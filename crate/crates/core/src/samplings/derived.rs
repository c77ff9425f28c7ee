//! Families derived from other families or from a decision procedure.

use std::sync::Arc;

use crate::formulas::{canonical_database, relational_atoms, conjunctions_up_to_renaming, default_var_names, Atom, Instance};
use crate::model::{evaluate_definition, Signature};

use super::deciders::{normalize, set_partitions};
use super::{Decider, RelationDef, SampleFamily, SamplingError};

/// Largest number of candidate atoms [`sampling_from_decider`] will take
/// subsets of.
pub const MAX_ENUMERATED_ATOMS: usize = 24;

/// Adds relations defined from equality alone to every sample.
pub fn equality_expansion(s: &SampleFamily, defs: Vec<RelationDef>) -> Result<SampleFamily, SamplingError> {
    if let Some(d) = defs.iter().find(|d| !d.formula.uses_only_equality()) {
        return Err(SamplingError::NotEqualityOnly { name: d.name.clone() });
    }
    if !s.equality_matching() {
        return Err(SamplingError::MissingProperty {
            family: s.name().to_string(),
            property: "equality-matching",
        });
    }
    let mut signature = s.signature().clone();
    for d in &defs {
        signature.push(d.name.clone(), d.arity)?;
        if let Some(max) = d.formula.max_var().filter(|&v| v >= d.arity) {
            return Err(SamplingError::Definition {
                name: d.name.clone(),
                source: crate::model::ModelError::DefinitionVariable {
                    index: max + 1,
                    arity: d.arity,
                },
            });
        }
    }
    let defs = Arc::new(defs);
    let decider = s
        .decider()
        .map(|base| expansion_decider(s.signature().clone(), Arc::clone(base), Arc::clone(&defs)));
    let (inner, gen_defs) = (s.clone(), Arc::clone(&defs));
    Ok(SampleFamily::new(format!("expand({})", s.name()), signature, move |n| {
        inner
            .generate(n)?
            .iter()
            .map(|sample| {
                let additions = gen_defs
                    .iter()
                    .map(|d| {
                        evaluate_definition(&d.formula, sample, d.arity)
                            .map(|r| (d.name.clone(), r))
                            .map_err(|source| SamplingError::Definition {
                                name: d.name.clone(),
                                source,
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(sample.clone().expand(additions)?)
            })
            .collect()
    })
    .with_flags(true, s.no_pp_algebraicity())
    .with_shared_decider(decider))
}

/// Decides the expanded theory by guessing the equality type of the
/// variables: the defined atoms are then fixed truth values and the rest is
/// handed to the base decider.
fn expansion_decider(base_sig: Signature, base: Decider, defs: Arc<Vec<RelationDef>>) -> Decider {
    Arc::new(move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let split = base_sig.len();
        let n = inst.num_vars();
        let vars: Vec<String> = inst.variables().map(str::to_string).collect();
        set_partitions(n).into_iter().any(|blocks| {
            let mut atoms = Vec::new();
            for atom in inst.atoms() {
                match atom {
                    Atom::Rel { symbol, args } if *symbol >= split => {
                        let tuple: Vec<u32> = args.iter().map(|&v| blocks[v] as u32).collect();
                        if !defs[symbol - split].formula.eval(&tuple, &mut |_, _| false) {
                            return false;
                        }
                    }
                    Atom::Neq(a, b) if blocks[*a] == blocks[*b] => return false,
                    other => atoms.push(other.clone()),
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    atoms.push(if blocks[i] == blocks[j] {
                        Atom::Eq(i, j)
                    } else {
                        Atom::Neq(i, j)
                    });
                }
            }
            base(&Instance::from_parts(base_sig.clone(), vars.clone(), atoms))
        })
    })
}

/// Samples made of the canonical databases of all satisfiable conjunctions.
///
/// `generate(n)` enumerates the sets of relational atoms over `n` variables
/// up to renaming (variables not mentioned become isolated elements), keeps
/// those the decider accepts and returns their canonical databases.
/// Exponential; `n` is capped by `max_n` and by [`MAX_ENUMERATED_ATOMS`].
pub fn sampling_from_decider(
    signature: Signature,
    decider: impl Fn(&Instance) -> bool + Send + Sync + 'static,
    max_n: usize,
) -> SampleFamily {
    let decider: Decider = Arc::new(decider);
    let (sig, dec) = (signature.clone(), Arc::clone(&decider));
    SampleFamily::new("decider", signature, move |n| {
        if n > max_n {
            return Err(SamplingError::IndexTooLarge { n, max_n });
        }
        let atoms = relational_atoms(&sig, n).len();
        if atoms > MAX_ENUMERATED_ATOMS {
            return Err(SamplingError::TooManyAtoms {
                atoms,
                limit: MAX_ENUMERATED_ATOMS,
            });
        }
        let names = default_var_names(n);
        conjunctions_up_to_renaming(&sig, n, None)
            .into_iter()
            .map(|atoms| Instance::from_parts(sig.clone(), names.clone(), atoms))
            .filter(|inst| dec(inst))
            .map(|inst| Ok(canonical_database(&inst)?))
            .collect()
    })
    .with_shared_decider(Some(decider))
}

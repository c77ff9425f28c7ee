//! Exhaustive small-scale check of the equality-matching property.

use crate::formulas::{conjunctions_up_to_renaming, default_var_names, Atom, Instance};
use crate::solvers::hom_search;

use super::{SampleFamily, SamplingError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub n: usize,
    /// The relational part.
    pub phi: Instance,
    /// The equalities and disequalities conjoined to it.
    pub psi: Vec<Atom>,
    pub decider: bool,
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqualityMatchingReport {
    Verified { checked: usize },
    Counterexample(Box<Counterexample>),
}

impl EqualityMatchingReport {
    pub fn is_verified(&self) -> bool {
        matches!(self, EqualityMatchingReport::Verified { .. })
    }
}

/// All conjunctions of `x_i = x_j`, `x_i != x_j` or nothing per pair, the
/// empty conjunction first.
fn arrangements(k: usize) -> Vec<Vec<Atom>> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let mut out = vec![Vec::new()];
    for &(i, j) in pairs.iter().rev() {
        let mut next = Vec::with_capacity(out.len() * 3);
        for choice in 0..3 {
            for rest in &out {
                let mut psi = Vec::with_capacity(rest.len() + 1);
                match choice {
                    1 => psi.push(Atom::Eq(i, j)),
                    2 => psi.push(Atom::Neq(i, j)),
                    _ => {}
                }
                psi.extend(rest.iter().cloned());
                next.push(psi);
            }
        }
        out = next;
    }
    out
}

/// For `n ≤ n_max` and `k ≤ min(n, vars_max)` variables, compares the
/// decider with satisfiability in `generate(n)` on every `φ ∧ ψ`, where `φ`
/// ranges over sets of at most `atoms_max` relational atoms (up to renaming)
/// and `ψ` over all (dis)equality arrangements. Stops at the first
/// disagreement.
pub fn verify_equality_matching(
    s: &SampleFamily,
    n_max: usize,
    vars_max: usize,
    atoms_max: usize,
) -> Result<EqualityMatchingReport, SamplingError> {
    let decider = s
        .decider()
        .ok_or_else(|| SamplingError::MissingDecider(s.name().to_string()))?;
    let mut checked = 0;
    for n in 1..=n_max {
        let samples = s.generate(n)?;
        for k in 1..=n.min(vars_max) {
            let names = default_var_names(k);
            let phis = conjunctions_up_to_renaming(s.signature(), k, Some(atoms_max));
            for psi in arrangements(k) {
                for phi in &phis {
                    let mut atoms = phi.clone();
                    atoms.extend(psi.iter().cloned());
                    let inst = Instance::from_parts(s.signature().clone(), names.clone(), atoms);
                    let expected = decider(&inst);
                    let mut sampled = false;
                    for sample in samples.iter() {
                        if hom_search(&inst, sample).expect("instance is well-formed").is_sat() {
                            sampled = true;
                            break;
                        }
                    }
                    checked += 1;
                    if expected != sampled {
                        return Ok(EqualityMatchingReport::Counterexample(Box::new(Counterexample {
                            n,
                            phi: Instance::from_parts(s.signature().clone(), names, phi.clone()),
                            psi,
                            decider: expected,
                            sampled,
                        })));
                    }
                }
            }
        }
    }
    Ok(EqualityMatchingReport::Verified { checked })
}

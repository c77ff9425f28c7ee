//! Solving an instance of a theory by solving it on every sample.

use rayon::prelude::*;

use super::{arc_consistency, establish_23_consistency, hom_search, SolveError, SolveResult, Witness};
use crate::formulas::{contract_equalities, validate, Instance, Validity};
use crate::samplings::SampleFamily;

/// The family index an instance is solved at: the number of distinct
/// variables after contracting equalities. `None` for instances that are
/// unsatisfiable outright.
pub fn instance_index(family: &SampleFamily, inst: &Instance) -> Result<Option<usize>, SolveError> {
    if inst.signature() != family.signature() {
        return Err(SolveError::SignatureMismatch {
            instance: inst.signature().to_string(),
            target: family.signature().to_string(),
        });
    }
    if validate(inst)? == Validity::ContainsBot {
        return Ok(None);
    }
    let c = contract_equalities(inst);
    Ok((!c.is_contradictory()).then(|| c.instance.num_vars()))
}

/// Satisfiable iff some structure of `generate(n)` satisfies `inst`, where
/// `n` is the number of variables after contracting equalities.
///
/// Samples are searched in parallel; the reported witness is the one from
/// the lowest sample index, independently of scheduling.
pub fn solve_via_sampling(family: &SampleFamily, inst: &Instance) -> Result<SolveResult, SolveError> {
    if inst.has_neq() && !family.equality_matching() {
        return Err(SolveError::NeqWithoutEqualityMatching(family.name().to_string()));
    }
    let Some(n) = instance_index(family, inst)? else {
        return Ok(SolveResult::unsat());
    };
    let samples = family.generate(n)?;
    let found = samples
        .par_iter()
        .enumerate()
        .map(|(i, sample)| hom_search(inst, sample).map(|r| (i, r)))
        .find_map_first(|r| match r {
            Ok((i, res)) if res.is_sat() => Some(Ok((i, res))),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        });
    match found {
        Some(Ok((i, res))) => Ok(SolveResult {
            verdict: res.verdict,
            witness: res.witness.map(|w| Witness {
                sample_index: i,
                assignment: w.assignment,
            }),
        }),
        Some(Err(e)) => Err(e),
        None => Ok(SolveResult::unsat()),
    }
}

fn any_sample<F>(family: &SampleFamily, inst: &Instance, method: &'static str, accept: F) -> Result<SolveResult, SolveError>
where
    F: Fn(&Instance, &crate::model::Structure) -> Result<bool, SolveError> + Sync,
{
    if inst.has_neq() {
        return Err(SolveError::NeqUnsupported(method));
    }
    let Some(n) = instance_index(family, inst)? else {
        return Ok(SolveResult::unsat());
    };
    let samples = family.generate(n)?;
    let found = samples
        .par_iter()
        .map(|sample| accept(inst, sample))
        .find_map_first(|r| match r {
            Ok(true) => Some(Ok(())),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        });
    match found {
        Some(Ok(())) => Ok(SolveResult::sat_without_witness()),
        Some(Err(e)) => Err(e),
        None => Ok(SolveResult::unsat()),
    }
}

/// Satisfiable iff arc-consistency does not fail on some sample.
///
/// Exact only when every sample maps homomorphically into a model whose
/// image has totally symmetric polymorphisms of all arities; otherwise
/// `Satisfiable` may be wrong. Never produces a witness.
pub fn solve_ac_over_sampling(family: &SampleFamily, inst: &Instance) -> Result<SolveResult, SolveError> {
    any_sample(family, inst, "arc-consistency", |i, s| Ok(arc_consistency(i, s)?.is_consistent()))
}

/// Satisfiable iff (2,3)-consistency does not fail on some sample.
///
/// Exact only when every sample has a ternary near-unanimity polymorphism.
pub fn solve_nu_over_sampling(family: &SampleFamily, inst: &Instance) -> Result<SolveResult, SolveError> {
    any_sample(family, inst, "(2,3)-consistency", |i, s| {
        Ok(establish_23_consistency(i, s)?.is_consistent())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplings::{dense_order_sampling, successor_sampling, two_models_sampling};

    fn two_models_inst(atoms: &[(&str, &[&str])]) -> Instance {
        let mut i = Instance::new(two_models_sampling().signature().clone());
        for (s, args) in atoms {
            i.add_rel(s, args).unwrap();
        }
        i
    }

    #[test]
    fn two_models_verdicts() {
        let f = two_models_sampling();
        let res = solve_via_sampling(&f, &two_models_inst(&[("O", &["x"]), ("P", &["x"])])).unwrap();
        assert_eq!(res.witness.unwrap().sample_index, 0);
        let res = solve_via_sampling(&f, &two_models_inst(&[("O", &["y"]), ("Q", &["y"])])).unwrap();
        assert_eq!(res.witness.unwrap().sample_index, 1);
        assert!(!solve_via_sampling(&f, &two_models_inst(&[("P", &["x"]), ("Q", &["x"])]))
            .unwrap()
            .is_sat());
    }

    #[test]
    fn neq_needs_equality_matching() {
        let f = dense_order_sampling(Vec::new()).unwrap().with_flags(false, true);
        let mut i = Instance::new(f.signature().clone());
        i.declare("x");
        i.declare("y");
        i.add_neq("x", "y");
        assert!(matches!(
            solve_via_sampling(&f, &i),
            Err(SolveError::NeqWithoutEqualityMatching(_))
        ));
    }

    #[test]
    fn index_counts_contracted_variables() {
        // x = y = z leaves one variable; succ(x, x) is then a loop
        let f = successor_sampling();
        let mut i = Instance::new(f.signature().clone());
        i.add_rel("succ", &["x", "y"]).unwrap();
        i.add_eq("x", "y");
        assert!(!solve_via_sampling(&f, &i).unwrap().is_sat());
    }

    #[test]
    fn ac_over_order() {
        let f = dense_order_sampling(Vec::new()).unwrap();
        let mut i = Instance::new(f.signature().clone());
        i.add_rel("lt", &["x", "y"]).unwrap().add_rel("lt", &["y", "x"]).unwrap();
        assert!(!solve_ac_over_sampling(&f, &i).unwrap().is_sat());
        assert!(solve_ac_over_sampling(&f, &Instance::new(f.signature().clone()))
            .unwrap()
            .is_sat());
    }
}

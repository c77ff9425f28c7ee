//! Decision procedures over finite structures and sample families.
//!
//! [`hom_search`] is exact and serves as the reference for everything else.
//! [`arc_consistency`] and [`establish_23_consistency`] are one-sided filters
//! that become decision procedures only on templates with the matching
//! polymorphisms.

mod pairwise;
mod propagate;
mod sampling;

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::formulas::{contract_equalities, validate, Contraction, FormulaError, Instance, Validity};
use crate::model::{Element, Structure};
use crate::samplings::SamplingError;

pub use pairwise::{establish_23_consistency, Consistency};
pub use sampling::{instance_index, solve_ac_over_sampling, solve_nu_over_sampling, solve_via_sampling};

use propagate::{Domains, Network};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("instance signature {instance} does not match {target}")]
    SignatureMismatch { instance: String, target: String },
    #[error("{0} does not support disequality atoms")]
    NeqUnsupported(&'static str),
    #[error("disequalities require an equality-matching sampling; `{0}` is not marked as one")]
    NeqWithoutEqualityMatching(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Satisfiable,
    Unsatisfiable,
}

impl Verdict {
    pub fn from_bool(sat: bool) -> Self {
        if sat {
            Verdict::Satisfiable
        } else {
            Verdict::Unsatisfiable
        }
    }

    pub fn is_sat(self) -> bool {
        self == Verdict::Satisfiable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfiable => "satisfiable",
            Verdict::Unsatisfiable => "unsatisfiable",
        })
    }
}

/// Values of the instance variables, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: IndexMap<String, Element>,
}

impl Assignment {
    pub fn get(&self, var: &str) -> Option<Element> {
        self.values.get(var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Element)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values indexed by variable id of `inst`, which must declare the same
    /// variables.
    pub fn to_vec(&self, inst: &Instance) -> Option<Vec<Element>> {
        inst.variables().map(|v| self.get(v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Position of the satisfying sample within `generate(n)`; always 0 for
    /// single-structure solves.
    pub sample_index: usize,
    pub assignment: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl SolveResult {
    pub fn unsat() -> Self {
        SolveResult {
            verdict: Verdict::Unsatisfiable,
            witness: None,
        }
    }

    pub fn sat_without_witness() -> Self {
        SolveResult {
            verdict: Verdict::Satisfiable,
            witness: None,
        }
    }

    pub fn is_sat(&self) -> bool {
        self.verdict.is_sat()
    }
}

/// Candidate values per variable after arc-consistency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcState {
    variables: Vec<String>,
    domains: Vec<Vec<Element>>,
}

impl AcState {
    pub fn domain(&self, var: &str) -> Option<&[Element]> {
        self.variables
            .iter()
            .position(|v| v == var)
            .map(|i| self.domains[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Element])> {
        self.variables
            .iter()
            .map(String::as_str)
            .zip(self.domains.iter().map(Vec::as_slice))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcOutcome {
    Inconsistent,
    Consistent(AcState),
}

impl AcOutcome {
    pub fn is_consistent(&self) -> bool {
        matches!(self, AcOutcome::Consistent(_))
    }
}

fn check_signature(inst: &Instance, target: &Structure) -> Result<(), SolveError> {
    if inst.signature() != target.signature() {
        return Err(SolveError::SignatureMismatch {
            instance: inst.signature().to_string(),
            target: target.signature().to_string(),
        });
    }
    Ok(())
}

/// Validates and contracts; `None` when the instance is trivially
/// unsatisfiable.
fn prepare(inst: &Instance, target: &Structure) -> Result<Option<Contraction>, SolveError> {
    check_signature(inst, target)?;
    if validate(inst)? == Validity::ContainsBot {
        return Ok(None);
    }
    let contraction = contract_equalities(inst);
    Ok((!contraction.is_contradictory()).then_some(contraction))
}

fn expand(inst: &Instance, contraction: &Contraction, values: &[Element]) -> Assignment {
    Assignment {
        values: inst
            .variables()
            .zip(&contraction.representative)
            .map(|(name, &r)| (name.to_string(), values[r]))
            .collect(),
    }
}

/// Exact satisfiability of `inst` in `target`, with a witness when one
/// exists.
///
/// Backtracking with arc-consistency maintained at every node (including
/// disequalities); branches on the variable with the fewest candidates,
/// ties broken by variable name, values tried in ascending order.
pub fn hom_search(inst: &Instance, target: &Structure) -> Result<SolveResult, SolveError> {
    let Some(contraction) = prepare(inst, target)? else {
        return Ok(SolveResult::unsat());
    };
    let reduced = &contraction.instance;
    let mut net = Network::new(reduced, target, true);
    let mut domains = net.full_domains();
    if !net.propagate_all(&mut domains) {
        return Ok(SolveResult::unsat());
    }
    let mut by_name: Vec<usize> = (0..reduced.num_vars()).collect();
    by_name.sort_by(|&a, &b| reduced.var_name(a).cmp(reduced.var_name(b)));
    let mut rank = vec![0; by_name.len()];
    for (r, &v) in by_name.iter().enumerate() {
        rank[v] = r;
    }
    Ok(match search(&mut net, domains, &rank) {
        Some(values) => SolveResult {
            verdict: Verdict::Satisfiable,
            witness: Some(Witness {
                sample_index: 0,
                assignment: expand(inst, &contraction, &values),
            }),
        },
        None => SolveResult::unsat(),
    })
}

fn search(net: &mut Network<'_>, domains: Domains, rank: &[usize]) -> Option<Vec<Element>> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (v, d) in domains.iter().enumerate() {
        let size = d.count_ones(..);
        if size > 1 && best.map_or(true, |(s, r, _)| (size, rank[v]) < (s, r)) {
            best = Some((size, rank[v], v));
        }
    }
    let Some((_, _, var)) = best else {
        return Some(
            domains
                .iter()
                .map(|d| d.ones().next().expect("propagated domains are non-empty") as Element)
                .collect(),
        );
    };
    let values: Vec<usize> = domains[var].ones().collect();
    for value in values {
        let mut next = domains.clone();
        next[var].clear();
        next[var].insert(value);
        if net.propagate_from(&mut next, var) {
            if let Some(found) = search(net, next, rank) {
                return Some(found);
            }
        }
    }
    None
}

/// Generalized arc-consistency of the relational atoms of `inst` on
/// `target`.
///
/// Equalities are contracted first; disequalities are rejected. Never reports
/// `Inconsistent` for a satisfiable pair.
pub fn arc_consistency(inst: &Instance, target: &Structure) -> Result<AcOutcome, SolveError> {
    if inst.has_neq() {
        return Err(SolveError::NeqUnsupported("arc-consistency"));
    }
    let Some(contraction) = prepare(inst, target)? else {
        return Ok(AcOutcome::Inconsistent);
    };
    let mut net = Network::new(&contraction.instance, target, false);
    let mut domains = net.full_domains();
    if !net.propagate_all(&mut domains) {
        return Ok(AcOutcome::Inconsistent);
    }
    Ok(AcOutcome::Consistent(AcState {
        variables: inst.variables().map(str::to_string).collect(),
        domains: contraction
            .representative
            .iter()
            .map(|&r| domains[r].ones().map(|e| e as Element).collect())
            .collect(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_homomorphism, Signature};

    fn edge_sig() -> Signature {
        Signature::new([("E", 2)]).unwrap()
    }

    fn edge() -> Structure {
        let mut b = Structure::builder(edge_sig(), 2);
        b.add("E", &[0, 1]).unwrap();
        b.build().unwrap()
    }

    fn k2() -> Structure {
        let mut b = Structure::builder(edge_sig(), 2);
        b.add("E", &[0, 1]).unwrap().add("E", &[1, 0]).unwrap();
        b.build().unwrap()
    }

    fn chain(n: usize) -> Structure {
        let sig = Signature::new([("lt", 2)]).unwrap();
        let mut b = Structure::builder(sig, n);
        for i in 0..n as Element {
            for j in i + 1..n as Element {
                b.add("lt", &[i, j]).unwrap();
            }
        }
        b.build().unwrap()
    }

    fn inst(sig: Signature, atoms: &[(&str, &[&str])]) -> Instance {
        let mut i = Instance::new(sig);
        for (s, args) in atoms {
            i.add_rel(s, args).unwrap();
        }
        i
    }

    fn triangle() -> Instance {
        inst(edge_sig(), &[("E", &["x", "y"]), ("E", &["y", "z"]), ("E", &["z", "x"])])
    }

    #[test]
    fn edge_into_loopless_point() {
        let point = Structure::empty(edge_sig(), 1);
        let i = inst(edge_sig(), &[("E", &["x", "y"])]);
        assert_eq!(hom_search(&i, &point).unwrap().verdict, Verdict::Unsatisfiable);
    }

    #[test]
    fn two_cycle_in_strict_order() {
        let sig = chain(3).signature().clone();
        let i = inst(sig, &[("lt", &["x", "y"]), ("lt", &["y", "x"])]);
        assert!(!hom_search(&i, &chain(3)).unwrap().is_sat());
    }

    #[test]
    fn witness_is_a_homomorphism() {
        let sig = chain(4).signature().clone();
        let i = inst(sig, &[("lt", &["a", "b"]), ("lt", &["b", "c"]), ("lt", &["c", "d"])]);
        let res = hom_search(&i, &chain(4)).unwrap();
        let map = res.witness.unwrap().assignment.to_vec(&i).unwrap();
        assert_eq!(map, vec![0, 1, 2, 3]);
        let db = crate::formulas::canonical_database(&i).unwrap().without_labels();
        assert!(is_homomorphism(&map, &db, &chain(4)).unwrap());
    }

    #[test]
    fn disequalities_are_enforced() {
        let sig = chain(2).signature().clone();
        let mut i = Instance::new(sig);
        i.declare("x");
        i.declare("y");
        i.declare("z");
        i.add_neq("x", "y").add_neq("y", "z").add_neq("x", "z");
        assert!(!hom_search(&i, &chain(2)).unwrap().is_sat());
        assert!(hom_search(&i, &chain(3)).unwrap().is_sat());
    }

    #[test]
    fn equalities_and_bot() {
        let sig = chain(3).signature().clone();
        let mut i = inst(sig.clone(), &[("lt", &["x", "y"])]);
        i.add_eq("x", "y");
        assert!(!hom_search(&i, &chain(3)).unwrap().is_sat());
        let mut j = Instance::new(sig);
        j.add_bot();
        assert!(!hom_search(&j, &chain(3)).unwrap().is_sat());
    }

    #[test]
    fn empty_instance_is_satisfiable() {
        let i = Instance::new(edge_sig());
        let res = hom_search(&i, &edge()).unwrap();
        assert!(res.is_sat());
        assert!(res.witness.unwrap().assignment.is_empty());
    }

    #[test]
    fn signature_mismatch_is_reported() {
        let i = Instance::new(edge_sig());
        assert!(matches!(
            hom_search(&i, &chain(2)),
            Err(SolveError::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn ac_on_single_edge() {
        let i = inst(edge_sig(), &[("E", &["x", "y"])]);
        let AcOutcome::Consistent(state) = arc_consistency(&i, &edge()).unwrap() else {
            panic!("expected consistent");
        };
        assert_eq!(state.domain("x"), Some(&[0][..]));
        assert_eq!(state.domain("y"), Some(&[1][..]));
    }

    #[test]
    fn ac_passes_triangle_on_two_coloring() {
        let AcOutcome::Consistent(state) = arc_consistency(&triangle(), &k2()).unwrap() else {
            panic!("expected consistent");
        };
        assert!(state.iter().all(|(_, d)| d == [0, 1]));
        assert!(!hom_search(&triangle(), &k2()).unwrap().is_sat());
    }

    #[test]
    fn ac_detects_empty_relation() {
        let i = inst(edge_sig(), &[("E", &["x", "y"])]);
        let empty = Structure::empty(edge_sig(), 3);
        assert_eq!(arc_consistency(&i, &empty).unwrap(), AcOutcome::Inconsistent);
    }

    #[test]
    fn ac_rejects_neq() {
        let mut i = inst(edge_sig(), &[("E", &["x", "y"])]);
        i.add_neq("x", "y");
        assert!(matches!(arc_consistency(&i, &edge()), Err(SolveError::NeqUnsupported(_))));
    }

    #[test]
    fn ac_handles_repeated_variables() {
        let i = inst(edge_sig(), &[("E", &["x", "x"])]);
        assert_eq!(arc_consistency(&i, &k2()).unwrap(), AcOutcome::Inconsistent);
    }
}

//! (2,3)-consistency: pair relations between every two variables, pruned
//! against every third variable and against the constraints.

use fixedbitset::FixedBitSet;

use super::propagate::Network;
use super::{prepare, SolveError};
use crate::formulas::{Atom, Instance, VarId};
use crate::model::{Element, Relation, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Inconsistent,
}

impl Consistency {
    pub fn is_consistent(self) -> bool {
        self == Consistency::Consistent
    }
}

struct Pairs {
    n: usize,
    // rows[x * n + y][a] = { b : (a, b) allowed for (x, y) }
    rows: Vec<Vec<FixedBitSet>>,
}

impl Pairs {
    fn row(&self, x: usize, y: usize, a: usize) -> &FixedBitSet {
        &self.rows[x * self.n + y][a]
    }

    fn allows(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.rows[x * self.n + y][a].contains(b)
    }

    fn remove(&mut self, x: usize, y: usize, a: usize, b: usize) {
        self.rows[x * self.n + y][a].set(b, false);
        self.rows[y * self.n + x][b].set(a, false);
    }
}

/// Establishes (2,3)-consistency of the relational atoms of `inst` on
/// `target`.
///
/// Sound: `Inconsistent` implies unsatisfiable. On templates with a ternary
/// near-unanimity polymorphism `Consistent` also implies satisfiable.
pub fn establish_23_consistency(inst: &Instance, target: &Structure) -> Result<Consistency, SolveError> {
    if inst.has_neq() {
        return Err(SolveError::NeqUnsupported("(2,3)-consistency"));
    }
    let Some(contraction) = prepare(inst, target)? else {
        return Ok(Consistency::Inconsistent);
    };
    let reduced = &contraction.instance;
    let mut net = Network::new(reduced, target, false);
    let mut domains = net.full_domains();
    if !net.propagate_all(&mut domains) {
        return Ok(Consistency::Inconsistent);
    }
    let n = reduced.num_vars();
    let d = target.domain_size();
    if n < 2 {
        return Ok(Consistency::Consistent);
    }

    let mut pairs = Pairs {
        n,
        rows: Vec::with_capacity(n * n),
    };
    for x in 0..n {
        for y in 0..n {
            let mut rows = vec![FixedBitSet::with_capacity(d); d];
            if x != y {
                for a in domains[x].ones() {
                    rows[a] = domains[y].clone();
                }
            }
            pairs.rows.push(rows);
        }
    }

    let constraints: Vec<(&Relation, &[VarId])> = reduced
        .atoms()
        .iter()
        .filter_map(|a| match a {
            Atom::Rel { symbol, args } => Some((target.relation(*symbol), args.as_slice())),
            _ => None,
        })
        .collect();

    loop {
        let mut changed = false;

        for &(rel, scope) in &constraints {
            for p in 0..scope.len() {
                for q in 0..scope.len() {
                    let (x, y) = (scope[p], scope[q]);
                    if x >= y {
                        continue;
                    }
                    let mut supported = vec![FixedBitSet::with_capacity(d); d];
                    for t in rel.iter() {
                        if tuple_fits(t, scope, &pairs, &domains) {
                            supported[t[p] as usize].insert(t[q] as usize);
                        }
                    }
                    for a in 0..d {
                        let stale: Vec<usize> = pairs.row(x, y, a).difference(&supported[a]).collect();
                        for b in stale {
                            pairs.remove(x, y, a, b);
                            changed = true;
                        }
                    }
                }
            }
        }

        for x in 0..n {
            for y in x + 1..n {
                for a in 0..d {
                    let candidates: Vec<usize> = pairs.row(x, y, a).ones().collect();
                    for b in candidates {
                        let blocked = (0..n).any(|z| {
                            z != x && z != y && pairs.row(x, z, a).is_disjoint(pairs.row(y, z, b))
                        });
                        if blocked {
                            pairs.remove(x, y, a, b);
                            changed = true;
                        }
                    }
                }
            }
        }

        for x in 0..n {
            let values: Vec<usize> = domains[x].ones().collect();
            for a in values {
                if (0..n).any(|y| y != x && pairs.row(x, y, a).is_clear()) {
                    domains[x].set(a, false);
                    changed = true;
                    for y in (0..n).filter(|&y| y != x) {
                        let bs: Vec<usize> = pairs.row(x, y, a).ones().collect();
                        for b in bs {
                            pairs.remove(x, y, a, b);
                        }
                    }
                }
            }
            if domains[x].is_clear() {
                return Ok(Consistency::Inconsistent);
            }
        }

        if !changed {
            return Ok(Consistency::Consistent);
        }
    }
}

fn tuple_fits(t: &[Element], scope: &[VarId], pairs: &Pairs, domains: &[FixedBitSet]) -> bool {
    for (p, &x) in scope.iter().enumerate() {
        if !domains[x].contains(t[p] as usize) {
            return false;
        }
        for (q, &y) in scope.iter().enumerate().skip(p + 1) {
            if x == y {
                if t[p] != t[q] {
                    return false;
                }
            } else if !pairs.allows(x, y, t[p] as usize, t[q] as usize) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Signature;

    fn sig() -> Signature {
        Signature::new([("E", 2)]).unwrap()
    }

    fn structure(n: usize, edges: &[[Element; 2]]) -> Structure {
        let mut b = Structure::builder(sig(), n);
        for e in edges {
            b.add("E", e).unwrap();
        }
        b.build().unwrap()
    }

    fn inst(edges: &[(&str, &str)]) -> Instance {
        let mut i = Instance::new(sig());
        for (a, b) in edges {
            i.add_rel("E", &[a, b]).unwrap();
        }
        i
    }

    #[test]
    fn single_edge_is_consistent() {
        let s = structure(2, &[[0, 1]]);
        assert!(establish_23_consistency(&inst(&[("x", "y")]), &s).unwrap().is_consistent());
    }

    #[test]
    fn triangle_on_two_coloring_is_refuted() {
        // arc-consistency cannot see this; path consistency can
        let k2 = structure(2, &[[0, 1], [1, 0]]);
        let tri = inst(&[("x", "y"), ("y", "z"), ("z", "x")]);
        assert_eq!(establish_23_consistency(&tri, &k2).unwrap(), Consistency::Inconsistent);
    }

    #[test]
    fn refines_arc_consistency() {
        let s = structure(3, &[[0, 1]]);
        let path = inst(&[("x", "y"), ("y", "z")]);
        assert_eq!(establish_23_consistency(&path, &s).unwrap(), Consistency::Inconsistent);
    }

    #[test]
    fn rejects_neq() {
        let mut i = inst(&[("x", "y")]);
        i.add_neq("x", "y");
        assert!(establish_23_consistency(&i, &structure(2, &[[0, 1]])).is_err());
    }
}

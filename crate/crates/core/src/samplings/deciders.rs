//! Reference decision procedures for the built-in theories.
//!
//! These reason about the theory directly (union-find, order and parity
//! arguments, or search over abstract models) and never look at samples.

use std::collections::HashMap;
use std::sync::Arc;

use crate::definition::{part_symbol, QfFormula, ORDER_SYMBOL};
use crate::formulas::{contract_equalities, validate, Atom, Instance, Validity, VarId};
use crate::model::Element;

use super::RelationDef;

/// Contracted form of a well-formed, non-contradictory instance.
pub(crate) fn normalize(inst: &Instance) -> Option<Instance> {
    if validate(inst).ok()? == Validity::ContainsBot {
        return None;
    }
    let c = contract_equalities(inst);
    (!c.is_contradictory()).then_some(c.instance)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns whether two distinct classes were merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn binary_edges(inst: &Instance, symbol: usize) -> Vec<(VarId, VarId)> {
    inst.atoms()
        .iter()
        .filter_map(|a| match a {
            Atom::Rel { symbol: s, args } if *s == symbol => Some((args[0], args[1])),
            _ => None,
        })
        .collect()
}

fn neqs(inst: &Instance) -> impl Iterator<Item = (VarId, VarId)> + '_ {
    inst.atoms().iter().filter_map(|a| match a {
        Atom::Neq(x, y) => Some((*x, *y)),
        _ => None,
    })
}

fn neqs_hold(inst: &Instance, uf: &mut UnionFind) -> bool {
    neqs(inst).all(|(a, b)| uf.find(a) != uf.find(b))
}

/// Merges variables until every relation in `relations` is a partial
/// injective function on classes.
fn functional_closure(uf: &mut UnionFind, relations: &[Vec<(VarId, VarId)>]) {
    loop {
        let mut changed = false;
        for edges in relations {
            let mut out: HashMap<usize, usize> = HashMap::new();
            let mut inc: HashMap<usize, usize> = HashMap::new();
            for &(a, b) in edges {
                let (ra, rb) = (uf.find(a), uf.find(b));
                if let Some(&prev) = out.get(&ra) {
                    changed |= uf.union(prev, rb);
                } else {
                    out.insert(ra, rb);
                }
                let rb = uf.find(b);
                if let Some(&prev) = inc.get(&rb) {
                    changed |= uf.union(prev, ra);
                } else {
                    inc.insert(rb, ra);
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Whether the class graph of `edges` has a directed cycle (loops included).
fn has_cycle(n: usize, uf: &mut UnionFind, edges: &[(VarId, VarId)]) -> bool {
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for &(a, b) in edges {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            return true;
        }
        succ[ra].push(rb);
        indegree[rb] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &w in &succ[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    seen < n
}

/// Backtracking over abstract values for each variable; `holds` evaluates an
/// atom once all of its variables are assigned.
fn search_values<F>(inst: &Instance, candidates: &[Element], holds: F) -> bool
where
    F: Fn(&Atom, &[Element]) -> bool,
{
    let n = inst.num_vars();
    let mut due: Vec<Vec<&Atom>> = vec![Vec::new(); n.max(1)];
    for atom in inst.atoms() {
        match atom.vars().into_iter().max() {
            Some(v) => due[v].push(atom),
            None => {
                if !holds(atom, &[]) {
                    return false;
                }
            }
        }
    }
    fn go<F: Fn(&Atom, &[Element]) -> bool>(
        var: usize,
        n: usize,
        values: &mut Vec<Element>,
        due: &[Vec<&Atom>],
        candidates: &[Element],
        holds: &F,
    ) -> bool {
        if var == n {
            return true;
        }
        for &c in candidates {
            values.push(c);
            if due[var].iter().all(|a| holds(a, values)) && go(var + 1, n, values, due, candidates, holds) {
                return true;
            }
            values.pop();
        }
        false
    }
    let mut values = Vec::with_capacity(n);
    go(0, n, &mut values, &due, candidates, &holds)
}

fn eval_atom<B>(atom: &Atom, values: &[Element], defs: &[RelationDef], base: &mut B) -> bool
where
    B: FnMut(&str, &[Element]) -> bool,
{
    match atom {
        Atom::Rel { symbol, args } => {
            let tuple: Vec<Element> = args.iter().map(|&v| values[v]).collect();
            defs[*symbol].formula.eval(&tuple, base)
        }
        Atom::Eq(a, b) => values[*a] == values[*b],
        Atom::Neq(a, b) => values[*a] != values[*b],
        Atom::Bot => false,
    }
}

/// Satisfiability in the expansion of `(Q; <)` by `defs`.
///
/// Any finite configuration of rationals is order-isomorphic to ranks
/// `0..n`, so the search runs over rank assignments. When every symbol is
/// the order itself this reduces to acyclicity of the contracted graph.
pub(crate) fn order_decider(defs: Arc<Vec<RelationDef>>) -> impl Fn(&Instance) -> bool + Send + Sync {
    let pure = defs.iter().all(|d| d.arity == 2 && d.formula == QfFormula::order());
    move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let n = inst.num_vars();
        if pure {
            let edges: Vec<(VarId, VarId)> = inst
                .atoms()
                .iter()
                .filter_map(|a| match a {
                    Atom::Rel { args, .. } => Some((args[0], args[1])),
                    _ => None,
                })
                .collect();
            return !has_cycle(n, &mut UnionFind::new(n), &edges);
        }
        let ranks: Vec<Element> = (0..n.max(1) as Element).collect();
        search_values(&inst, &ranks, |atom, values| {
            eval_atom(atom, values, &defs, &mut |symbol, t| symbol == ORDER_SYMBOL && t[0] < t[1])
        })
    }
}

/// Satisfiability in the expansion of `m` disjoint infinite unary parts by
/// `defs`.
///
/// Abstract elements are pairs (part, index) with index below the number of
/// variables. With the default one-symbol-per-part expansion this is a
/// colour-consistency check on classes.
pub(crate) fn partition_decider(m: usize, defs: Arc<Vec<RelationDef>>) -> impl Fn(&Instance) -> bool + Send + Sync {
    let pure_parts: Option<Vec<usize>> = defs
        .iter()
        .map(|d| {
            (1..=m).find(|&j| d.arity == 1 && d.formula == QfFormula::part(j))
        })
        .collect();
    move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let n = inst.num_vars();
        if let Some(parts) = &pure_parts {
            let mut colour: Vec<Option<usize>> = vec![None; n];
            for atom in inst.atoms() {
                if let Atom::Rel { symbol, args } = atom {
                    let want = parts[*symbol];
                    match colour[args[0]] {
                        Some(c) if c != want => return false,
                        _ => colour[args[0]] = Some(want),
                    }
                }
            }
            return true;
        }
        let stride = n.max(1) as Element;
        let candidates: Vec<Element> = (0..m as Element * stride).collect();
        search_values(&inst, &candidates, |atom, values| {
            eval_atom(atom, values, &defs, &mut |symbol, t| {
                (1..=m).any(|j| symbol == part_symbol(j) && (t[0] / stride) as usize == j - 1)
            })
        })
    }
}

/// Successor on the naturals, optionally with two disjoint colours given by
/// the indices of their unary symbols.
pub(crate) fn successor_decider(succ: usize, colours: Option<[usize; 2]>) -> impl Fn(&Instance) -> bool + Send + Sync {
    move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let n = inst.num_vars();
        let edges = binary_edges(&inst, succ);
        let mut uf = UnionFind::new(n);
        functional_closure(&mut uf, std::slice::from_ref(&edges));
        if has_cycle(n, &mut uf, &edges) || !neqs_hold(&inst, &mut uf) {
            return false;
        }
        if let Some(colours) = colours {
            let mut colour: Vec<Option<usize>> = vec![None; n];
            for atom in inst.atoms() {
                if let Atom::Rel { symbol, args } = atom {
                    if let Some(c) = colours.iter().position(|s| s == symbol) {
                        let r = uf.find(args[0]);
                        match colour[r] {
                            Some(prev) if prev != c => return false,
                            _ => colour[r] = Some(c),
                        }
                    }
                }
            }
        }
        true
    }
}

/// Disjoint directed cycles alternating between `E1` and `E2` edges, of
/// every even length.
///
/// Both relations are partial injective functions, and every element is
/// either an `E1`-source/`E2`-target or an `E1`-target/`E2`-source.
pub(crate) fn alternating_decider(e1: usize, e2: usize) -> impl Fn(&Instance) -> bool + Send + Sync {
    move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let n = inst.num_vars();
        let relations = [binary_edges(&inst, e1), binary_edges(&inst, e2)];
        let mut uf = UnionFind::new(n);
        functional_closure(&mut uf, &relations);
        // parity: true for E1-sources
        let mut parity: Vec<Option<bool>> = vec![None; n];
        for (i, edges) in relations.iter().enumerate() {
            let source_parity = i == 0;
            for &(a, b) in edges {
                let (ra, rb) = (uf.find(a), uf.find(b));
                if ra == rb {
                    return false;
                }
                for (r, p) in [(ra, source_parity), (rb, !source_parity)] {
                    match parity[r] {
                        Some(q) if q != p => return false,
                        _ => parity[r] = Some(p),
                    }
                }
            }
        }
        neqs_hold(&inst, &mut uf)
    }
}

/// The theory with unary `O`, `P`, `Q` and binary `I`: at most one element
/// in `O`, `P` and `Q` disjoint, `I` is disequality.
pub(crate) fn two_models_decider(o: usize, p: usize, q: usize, i: usize) -> impl Fn(&Instance) -> bool + Send + Sync {
    move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let n = inst.num_vars();
        let mut uf = UnionFind::new(n);
        let mut first_o = None;
        for atom in inst.atoms() {
            if let Atom::Rel { symbol, args } = atom {
                if *symbol == o {
                    match first_o {
                        None => first_o = Some(args[0]),
                        Some(v) => {
                            uf.union(v, args[0]);
                        }
                    }
                }
            }
        }
        let mut in_p = vec![false; n];
        let mut in_q = vec![false; n];
        for atom in inst.atoms() {
            match atom {
                Atom::Rel { symbol, args } if *symbol == i => {
                    if uf.find(args[0]) == uf.find(args[1]) {
                        return false;
                    }
                }
                Atom::Rel { symbol, args } if *symbol == p => in_p[uf.find(args[0])] = true,
                Atom::Rel { symbol, args } if *symbol == q => in_q[uf.find(args[0])] = true,
                _ => {}
            }
        }
        (0..n).all(|v| !(in_p[v] && in_q[v])) && neqs_hold(&inst, &mut uf)
    }
}

/// All partitions of `0..n` as restricted growth strings: `block[i]` is the
/// block of `i`, and blocks are numbered in order of first appearance.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, blocks: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(current.clone());
            return;
        }
        for b in 0..=blocks {
            current.push(b);
            go(i + 1, n, blocks.max(b + 1), current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Signature;

    #[test]
    fn union_find_merges_to_smallest() {
        let mut uf = UnionFind::new(4);
        assert!(uf.union(3, 1));
        assert!(uf.union(1, 2));
        assert!(!uf.union(2, 3));
        assert_eq!(uf.find(3), 1);
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn cycles_include_loops() {
        let mut uf = UnionFind::new(2);
        assert!(has_cycle(2, &mut uf, &[(0, 0)]));
        assert!(has_cycle(2, &mut uf, &[(0, 1), (1, 0)]));
        assert!(!has_cycle(2, &mut uf, &[(0, 1)]));
    }

    #[test]
    fn successor_merges_before_checking_cycles() {
        let sig = Signature::new([("succ", 2)]).unwrap();
        let decide = successor_decider(0, None);
        // x->y, x->z forces y=z, so y != z fails
        let mut i = Instance::new(sig.clone());
        i.add_rel("succ", &["x", "y"]).unwrap().add_rel("succ", &["x", "z"]).unwrap();
        assert!(decide(&i));
        i.add_neq("y", "z");
        assert!(!decide(&i));
        // y->x, z->x, and y->w, z->x' cannot produce a cycle unless merged
        let mut j = Instance::new(sig);
        j.add_rel("succ", &["a", "b"]).unwrap().add_rel("succ", &["c", "b"]).unwrap();
        j.add_rel("succ", &["b", "c"]).unwrap();
        assert!(!decide(&j));
    }

    #[test]
    fn alternation_parity() {
        let sig = Signature::new([("E1", 2), ("E2", 2)]).unwrap();
        let decide = alternating_decider(0, 1);
        let mut i = Instance::new(sig.clone());
        i.add_rel("E1", &["x", "y"]).unwrap().add_rel("E2", &["y", "x"]).unwrap();
        assert!(decide(&i));
        let mut j = Instance::new(sig);
        j.add_rel("E1", &["x", "y"]).unwrap().add_rel("E1", &["y", "x"]).unwrap();
        assert!(!decide(&j));
    }
}

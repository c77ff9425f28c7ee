//! Generalized arc-consistency over a finite target structure.
//!
//! The same network backs the exact search (maintained at every node) and
//! the stand-alone arc-consistency procedure.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::formulas::{Atom, Instance, VarId};
use crate::model::{Element, PositionIndex, Projections, Relation, Structure};

const NO_RESIDUE: u32 = u32::MAX;

pub(crate) type Domains = Vec<FixedBitSet>;

struct Constraint<'a> {
    relation: &'a Relation,
    index: &'a PositionIndex,
    projections: Option<&'a Projections>,
    scope: Vec<VarId>,
    // position pairs carrying the same variable
    repeats: Vec<(usize, usize)>,
    // per position, the first earlier position carrying the same variable
    partner: Vec<Option<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Arc {
    /// Revise the variable at `position` of relational constraint `constraint`.
    Rel { constraint: usize, position: usize },
    /// Revise one side of a disequality against the other.
    Neq { pair: usize, revise_first: bool },
}

pub(crate) struct Network<'a> {
    domain_size: usize,
    num_vars: usize,
    constraints: Vec<Constraint<'a>>,
    neqs: Vec<(VarId, VarId)>,
    // per variable: arcs to enqueue when its domain shrinks
    dependents: Vec<Vec<Arc>>,
    residues: Vec<Vec<Vec<u32>>>,
    // by arity, so cheap constraints settle before wide ones are revised
    queues: [VecDeque<Arc>; 3],
    queued_rel: Vec<Vec<bool>>,
    queued_neq: Vec<[bool; 2]>,
    scratch: Vec<Element>,
    marks: FixedBitSet,
}

impl<'a> Network<'a> {
    /// Builds the network of a contracted, ⊥-free instance. Disequalities are
    /// included only when `with_neq` is set.
    pub(crate) fn new(inst: &Instance, target: &'a Structure, with_neq: bool) -> Self {
        let domain_size = target.domain_size();
        let num_vars = inst.num_vars();
        let mut constraints = Vec::new();
        let mut neqs = Vec::new();
        for atom in inst.atoms() {
            match atom {
                Atom::Rel { symbol, args } => {
                    let relation = target.relation(*symbol);
                    let mut repeats = Vec::new();
                    for p in 0..args.len() {
                        for q in p + 1..args.len() {
                            if args[p] == args[q] {
                                repeats.push((p, q));
                            }
                        }
                    }
                    constraints.push(Constraint {
                        relation,
                        index: relation.position_index(domain_size),
                        projections: relation.projections(domain_size),
                        scope: args.clone(),
                        partner: (0..args.len()).map(|q| (0..q).find(|&p| args[p] == args[q])).collect(),
                        repeats,
                    });
                }
                Atom::Neq(a, b) if with_neq => neqs.push((*a, *b)),
                _ => {}
            }
        }
        let mut dependents = vec![Vec::new(); num_vars];
        for (c, con) in constraints.iter().enumerate() {
            for (p, &x) in con.scope.iter().enumerate() {
                for &y in &con.scope {
                    let arc = Arc::Rel { constraint: c, position: p };
                    if !dependents[y].contains(&arc) && (y != x || !con.repeats.is_empty()) {
                        dependents[y].push(arc);
                    }
                }
            }
        }
        for (k, &(a, b)) in neqs.iter().enumerate() {
            dependents[b].push(Arc::Neq { pair: k, revise_first: true });
            dependents[a].push(Arc::Neq { pair: k, revise_first: false });
        }
        let residues = constraints
            .iter()
            .map(|c| vec![vec![NO_RESIDUE; domain_size]; c.scope.len()])
            .collect();
        let queued_rel = constraints.iter().map(|c| vec![false; c.scope.len()]).collect();
        let queued_neq = vec![[false; 2]; neqs.len()];
        Network {
            domain_size,
            num_vars,
            constraints,
            neqs,
            dependents,
            residues,
            queues: Default::default(),
            queued_rel,
            queued_neq,
            scratch: Vec::new(),
            marks: FixedBitSet::new(),
        }
    }

    pub(crate) fn full_domains(&self) -> Domains {
        let mut full = FixedBitSet::with_capacity(self.domain_size);
        full.insert_range(..);
        vec![full; self.num_vars]
    }

    fn enqueue(&mut self, arc: Arc) {
        match arc {
            Arc::Rel { constraint, position } => {
                if !self.queued_rel[constraint][position] {
                    self.queued_rel[constraint][position] = true;
                    let tier = self.constraints[constraint].scope.len().clamp(1, 3) - 1;
                    self.queues[tier].push_back(arc);
                }
            }
            Arc::Neq { pair, revise_first } => {
                let slot = &mut self.queued_neq[pair][usize::from(!revise_first)];
                if !*slot {
                    *slot = true;
                    self.queues[0].push_back(arc);
                }
            }
        }
    }

    fn clear_queue(&mut self) {
        for tier in 0..3 {
            while let Some(arc) = self.queues[tier].pop_front() {
                self.mark_dequeued(arc);
            }
        }
    }

    fn mark_dequeued(&mut self, arc: Arc) {
        match arc {
            Arc::Rel { constraint, position } => self.queued_rel[constraint][position] = false,
            Arc::Neq { pair, revise_first } => self.queued_neq[pair][usize::from(!revise_first)] = false,
        }
    }

    /// Runs propagation from scratch. Returns `false` on a domain wipe-out.
    pub(crate) fn propagate_all(&mut self, domains: &mut Domains) -> bool {
        if domains.iter().any(|d| d.is_clear()) {
            return false;
        }
        for c in 0..self.constraints.len() {
            for p in 0..self.constraints[c].scope.len() {
                self.enqueue(Arc::Rel { constraint: c, position: p });
            }
        }
        for k in 0..self.neqs.len() {
            self.enqueue(Arc::Neq { pair: k, revise_first: true });
            self.enqueue(Arc::Neq { pair: k, revise_first: false });
        }
        self.run(domains)
    }

    /// Propagates the consequences of a change to `var`'s domain.
    pub(crate) fn propagate_from(&mut self, domains: &mut Domains, var: VarId) -> bool {
        if domains[var].is_clear() {
            return false;
        }
        for i in 0..self.dependents[var].len() {
            let arc = self.dependents[var][i];
            self.enqueue(arc);
        }
        self.run(domains)
    }

    fn run(&mut self, domains: &mut Domains) -> bool {
        while let Some(arc) = self.queues.iter_mut().find_map(VecDeque::pop_front) {
            self.mark_dequeued(arc);
            let (var, changed) = match arc {
                Arc::Rel { constraint, position } => {
                    let var = self.constraints[constraint].scope[position];
                    (var, self.revise(domains, constraint, position))
                }
                Arc::Neq { pair, revise_first } => {
                    let (a, b) = self.neqs[pair];
                    let (var, other) = if revise_first { (a, b) } else { (b, a) };
                    let mut changed = false;
                    if domains[other].count_ones(..) == 1 {
                        let w = domains[other].ones().next().unwrap();
                        if domains[var].contains(w) {
                            domains[var].set(w, false);
                            changed = true;
                        }
                    }
                    (var, changed)
                }
            };
            if changed {
                if domains[var].is_clear() {
                    self.clear_queue();
                    return false;
                }
                for i in 0..self.dependents[var].len() {
                    let dep = self.dependents[var][i];
                    if dep != arc {
                        self.enqueue(dep);
                    }
                }
            }
        }
        true
    }

    /// Removes unsupported values of the variable at position `p` of
    /// constraint `c`; reports whether anything was removed.
    ///
    /// Values are checked one by one against their residual support. Once the
    /// tuples scanned exceed the cost of enumerating the tuples through the
    /// smallest other domain, the remaining values are settled that way.
    fn revise(&mut self, domains: &mut Domains, c: usize, p: usize) -> bool {
        let mut values = std::mem::take(&mut self.scratch);
        values.clear();
        values.extend(domains[self.constraints[c].scope[p]].ones().map(|v| v as Element));
        let (changed, fallback) = self.revise_by_residues(domains, c, p, &values);
        self.scratch = values;
        match fallback {
            Some(q) => self.revise_by_marking(domains, c, p, q) || changed,
            None => changed,
        }
    }

    /// Cost of enumerating the live tuples through the cheapest position
    /// other than `p`, with that position.
    fn cheapest_other(&self, domains: &Domains, c: usize, p: usize) -> Option<(usize, usize)> {
        let con = &self.constraints[c];
        let var = con.scope[p];
        (0..con.scope.len())
            .filter(|&q| con.scope[q] != var)
            .map(|q| {
                let cost: usize = domains[con.scope[q]]
                    .ones()
                    .map(|u| con.index.count(q, u as Element))
                    .sum();
                (cost, q)
            })
            .min()
    }

    /// Returns whether anything was removed and, if scanning outgrew the
    /// cost of marking, the position to mark through for the rest.
    fn revise_by_residues(
        &mut self,
        domains: &mut Domains,
        c: usize,
        p: usize,
        values: &[Element],
    ) -> (bool, Option<usize>) {
        let var = self.constraints[c].scope[p];
        let mut changed = false;
        let mut scanned = 0usize;
        let mut budget: Option<Option<(usize, usize)>> = None;
        for &v in values {
            let con = &self.constraints[c];
            let residue = self.residues[c][p][v as usize];
            if residue != NO_RESIDUE && supports(con, domains, con.relation.tuple(residue as usize)) {
                continue;
            }
            if let Some(pr) = con.projections {
                let possible = (0..con.scope.len()).filter(|&q| q != p).all(|q| {
                    let dom = domains[con.scope[q]].as_slice();
                    pr.row(p, q, v).iter().zip(dom).any(|(a, b)| a & b != 0)
                });
                if !possible {
                    domains[var].set(v as usize, false);
                    changed = true;
                    continue;
                }
                // for a binary constraint on two variables the test is exact
                if con.scope.len() == 2 && con.repeats.is_empty() {
                    continue;
                }
            }
            let limit = *budget.get_or_insert_with(|| self.cheapest_other(domains, c, p));
            if let Some((cost, q)) = limit {
                if scanned > cost {
                    return (changed, Some(q));
                }
            }
            let con = &self.constraints[c];
            let (found, steps) = find_support(con, domains, p, v);
            scanned += steps;
            match found {
                Some(i) => {
                    // a support for v is one for every value it contains
                    let id = con.index.tuples_with(p, v)[i];
                    for (q, &e) in con.relation.tuple(id as usize).iter().enumerate() {
                        self.residues[c][q][e as usize] = id;
                    }
                }
                None => {
                    domains[var].set(v as usize, false);
                    changed = true;
                }
            }
        }
        (changed, None)
    }

    /// Collects the values at `p` of all live tuples through the domain of
    /// position `q`.
    fn revise_by_marking(&mut self, domains: &mut Domains, c: usize, p: usize, q: usize) -> bool {
        let con = &self.constraints[c];
        let var = con.scope[p];
        let mut supported = std::mem::take(&mut self.marks);
        supported.clear();
        supported.grow(self.domain_size);
        for u in domains[con.scope[q]].ones() {
            let ids = con.index.tuples_with(q, u as Element);
            let rows = con.index.rows_with(q, u as Element).chunks_exact(con.scope.len());
            for (&id, t) in ids.iter().zip(rows) {
                let v = t[p] as usize;
                if !supported.contains(v) && supports(con, domains, t) {
                    supported.insert(v);
                    self.residues[c][p][v] = id;
                }
            }
        }
        let before = domains[var].count_ones(..);
        domains[var].intersect_with(&supported);
        let changed = domains[var].count_ones(..) != before;
        self.marks = supported;
        changed
    }
}

/// Position in `tuples_with(p, v)` of the first live tuple, with the number
/// of steps taken.
///
/// The tuples are in lexicographic order, so at a tuple whose first dead
/// position is `j`, everything up to the next allowed value at `j` (carrying
/// into earlier positions when there is none) is dead too and is skipped by
/// galloping search.
fn find_support(con: &Constraint<'_>, domains: &Domains, p: usize, v: Element) -> (Option<usize>, usize) {
    let k = con.scope.len();
    let rows = con.index.rows_with(p, v);
    let len = rows.len() / k;
    let row = |i: usize| &rows[i * k..(i + 1) * k];
    let fixed = |j: usize| con.scope[j] == con.scope[p];
    let dead = |t: &[Element], j: usize| match con.partner[j] {
        _ if fixed(j) => t[j] != v,
        Some(a) => t[a] != t[j],
        None => !domains[con.scope[j]].contains(t[j] as usize),
    };
    // smallest allowed value at `j` that is at least `from`, given the prefix
    let next = |key: &[Element], j: usize, from: usize| match con.partner[j] {
        _ if fixed(j) => (v as usize >= from).then_some(v as usize),
        Some(a) => (key[a] as usize >= from).then_some(key[a] as usize),
        None => next_one(&domains[con.scope[j]], from),
    };
    let mut key: Vec<Element> = Vec::new();
    let (mut i, mut steps) = (0, 0);
    'scan: while i < len {
        steps += 1;
        let t = row(i);
        let Some(mut j) = (0..k).find(|&j| j != p && dead(t, j)) else {
            return (Some(i), steps);
        };
        key.clear();
        key.extend_from_slice(t);
        let mut from = key[j] as usize + 1;
        loop {
            if let Some(e) = next(&key, j, from) {
                key[j] = e as Element;
                for r in j + 1..k {
                    if r != p {
                        key[r] = 0;
                    }
                }
                break;
            }
            match (0..j).rev().find(|&r| r != p) {
                Some(r) => {
                    j = r;
                    from = key[j] as usize + 1;
                }
                None => break 'scan,
            }
        }
        // gallop, then bisect
        let mut step = 1;
        while i + step < len && row(i + step) < &key[..] {
            step *= 2;
        }
        let (mut lo, mut hi) = (i + step / 2 + 1, (i + step).min(len));
        while lo < hi {
            let mid = (lo + hi) / 2;
            if row(mid) < &key[..] {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        i = lo;
    }
    (None, steps)
}

/// Smallest member of `set` that is at least `from`.
fn next_one(set: &FixedBitSet, from: usize) -> Option<usize> {
    const BITS: usize = usize::BITS as usize;
    let blocks = set.as_slice();
    let mut b = from / BITS;
    let mut word = *blocks.get(b)? & (usize::MAX << (from % BITS));
    loop {
        if word != 0 {
            return Some(b * BITS + word.trailing_zeros() as usize);
        }
        b += 1;
        word = *blocks.get(b)?;
    }
}

fn supports(con: &Constraint<'_>, domains: &Domains, tuple: &[Element]) -> bool {
    con.scope
        .iter()
        .zip(tuple)
        .all(|(&y, &e)| domains[y].contains(e as usize))
        && con.repeats.iter().all(|&(p, q)| tuple[p] == tuple[q])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constraint<'a>(relation: &'a Relation, d: usize, scope: Vec<VarId>) -> Constraint<'a> {
        let k = scope.len();
        let repeats = (0..k)
            .flat_map(|p| (p + 1..k).map(move |q| (p, q)))
            .filter(|&(p, q)| scope[p] == scope[q])
            .collect();
        Constraint {
            relation,
            index: relation.position_index(d),
            projections: relation.projections(d),
            partner: (0..k).map(|q| (0..q).find(|&p| scope[p] == scope[q])).collect(),
            scope,
            repeats,
        }
    }

    #[test]
    fn seek_finds_the_first_live_tuple() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 6;
        for round in 0..300 {
            let k = rng.gen_range(1..=4);
            let flat: Vec<Element> = (0..rng.gen_range(0..120) * k).map(|_| rng.gen_range(0..d as Element)).collect();
            let relation = Relation::from_flat(k, flat);
            let scope: Vec<VarId> = (0..k).map(|_| rng.gen_range(0..3)).collect();
            let con = constraint(&relation, d, scope);
            let domains: Domains = (0..3)
                .map(|_| {
                    let mut b = FixedBitSet::with_capacity(d);
                    for e in 0..d {
                        b.set(e, rng.gen_bool(0.5));
                    }
                    b
                })
                .collect();
            for p in 0..k {
                for v in domains[con.scope[p]].ones().map(|v| v as Element) {
                    let expected = con
                        .index
                        .tuples_with(p, v)
                        .iter()
                        .position(|&id| supports(&con, &domains, relation.tuple(id as usize)));
                    assert_eq!(find_support(&con, &domains, p, v).0, expected, "round {round}");
                }
            }
        }
    }

    #[test]
    fn next_one_crosses_blocks() {
        let mut b = FixedBitSet::with_capacity(200);
        b.insert(3);
        b.insert(130);
        assert_eq!(next_one(&b, 0), Some(3));
        assert_eq!(next_one(&b, 4), Some(130));
        assert_eq!(next_one(&b, 131), None);
        assert_eq!(next_one(&b, 500), None);
    }
}

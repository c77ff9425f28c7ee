//! Operations on finite domains and the algebraic properties the solvers
//! rely on: polymorphisms, total symmetry and near-unanimity.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::formulas::{Atom, Instance};
use crate::model::{Element, Structure};
use crate::solvers::hom_search;

/// Most support sets [`find_totally_symmetric_polymorphism`] will search over.
pub const MAX_SUPPORT_SETS: usize = 4096;
/// Most constraints [`find_totally_symmetric_polymorphism`] will generate.
pub const MAX_CONSTRAINTS: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolymorphismError {
    #[error("operation arity must be positive")]
    ZeroArity,
    #[error("table has {found} entries, expected {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("table value {value} outside domain of size {domain_size}")]
    ValueOutOfRange { value: Element, domain_size: usize },
    #[error("operation is on {operation} elements, structure has {structure}")]
    DomainMismatch { operation: usize, structure: usize },
    #[error("near-unanimity needs arity at least 3, got {0}")]
    ArityTooSmall(usize),
    #[error("search over {what} = {size} exceeds the cap of {cap}")]
    SearchTooLarge { what: &'static str, size: usize, cap: usize },
}

/// A `k`-ary operation on `0..domain_size`, tabulated in lexicographic order
/// of the argument tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationTable {
    domain_size: usize,
    arity: usize,
    table: Vec<Element>,
}

fn table_len(domain_size: usize, arity: usize) -> usize {
    domain_size.pow(arity as u32)
}

/// Calls `f` on every tuple of `0..d` of length `k`, in lexicographic order.
fn for_each_tuple(d: usize, k: usize, mut f: impl FnMut(&[Element])) {
    if d == 0 {
        return;
    }
    let mut t = vec![0 as Element; k];
    loop {
        f(&t);
        let mut p = k;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            t[p] += 1;
            if (t[p] as usize) < d {
                break;
            }
            t[p] = 0;
        }
    }
}

impl OperationTable {
    pub fn new(domain_size: usize, arity: usize, table: Vec<Element>) -> Result<Self, PolymorphismError> {
        if arity == 0 {
            return Err(PolymorphismError::ZeroArity);
        }
        let expected = table_len(domain_size, arity);
        if table.len() != expected {
            return Err(PolymorphismError::TableLength {
                expected,
                found: table.len(),
            });
        }
        if let Some(&value) = table.iter().find(|&&v| v as usize >= domain_size) {
            return Err(PolymorphismError::ValueOutOfRange { value, domain_size });
        }
        Ok(OperationTable {
            domain_size,
            arity,
            table,
        })
    }

    pub fn from_fn(
        domain_size: usize,
        arity: usize,
        f: impl Fn(&[Element]) -> Element,
    ) -> Result<Self, PolymorphismError> {
        let mut table = Vec::with_capacity(table_len(domain_size, arity));
        for_each_tuple(domain_size, arity, |t| table.push(f(t)));
        OperationTable::new(domain_size, arity, table)
    }

    /// The `i`-th (0-based) projection.
    pub fn projection(domain_size: usize, arity: usize, i: usize) -> Result<Self, PolymorphismError> {
        OperationTable::from_fn(domain_size, arity, |t| t[i])
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Element] {
        &self.table
    }

    pub fn apply(&self, args: &[Element]) -> Element {
        debug_assert_eq!(args.len(), self.arity);
        let index = args
            .iter()
            .fold(0usize, |acc, &a| acc * self.domain_size + a as usize);
        self.table[index]
    }
}

/// Whether `f` preserves every relation of `s`: applying it column-wise to
/// any `k` tuples of a relation yields a tuple of that relation.
pub fn check_polymorphism(f: &OperationTable, s: &Structure) -> Result<bool, PolymorphismError> {
    if f.domain_size != s.domain_size() {
        return Err(PolymorphismError::DomainMismatch {
            operation: f.domain_size,
            structure: s.domain_size(),
        });
    }
    let k = f.arity;
    for rel in s.relations() {
        let m = rel.len();
        if m == 0 {
            continue;
        }
        let r = rel.arity();
        let mut image = vec![0 as Element; r];
        let mut args = vec![0 as Element; k];
        let mut ok = true;
        for_each_tuple(m, k, |choice| {
            if !ok {
                return;
            }
            for (p, out) in image.iter_mut().enumerate() {
                for (j, &c) in choice.iter().enumerate() {
                    args[j] = rel.tuple(c as usize)[p];
                }
                *out = f.apply(&args);
            }
            ok = rel.contains(&image);
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn support(args: &[Element]) -> Vec<Element> {
    let mut s = args.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Whether the value depends only on the set of arguments.
pub fn is_totally_symmetric(f: &OperationTable) -> bool {
    let mut by_support: HashMap<Vec<Element>, Element> = HashMap::new();
    let mut ok = true;
    for_each_tuple(f.domain_size, f.arity, |t| {
        if !ok {
            return;
        }
        let v = f.apply(t);
        match by_support.entry(support(t)) {
            std::collections::hash_map::Entry::Occupied(e) => ok = *e.get() == v,
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(v);
            }
        }
    });
    ok
}

/// Whether `f(a, b, ..., b) = f(b, a, b, ..., b) = ... = f(b, ..., b, a) = b`
/// for all `a`, `b`.
pub fn is_near_unanimity(f: &OperationTable) -> Result<bool, PolymorphismError> {
    if f.arity < 3 {
        return Err(PolymorphismError::ArityTooSmall(f.arity));
    }
    let d = f.domain_size as Element;
    let mut args = vec![0; f.arity];
    for a in 0..d {
        for b in 0..d {
            for i in 0..f.arity {
                args.fill(b);
                args[i] = a;
                if f.apply(&args) != b {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinOperation {
    /// Minimum of `arity` arguments, where `order` lists the domain from
    /// least to greatest.
    Min { order: Vec<Element>, arity: usize },
    /// `f(x, y, z) = y` if `y = z`, otherwise `x`.
    MajorityEq { domain_size: usize },
}

pub fn builtin_operation(kind: &BuiltinOperation) -> Result<OperationTable, PolymorphismError> {
    match kind {
        BuiltinOperation::Min { order, arity } => {
            let mut rank = vec![0usize; order.len()];
            for (r, &e) in order.iter().enumerate() {
                if e as usize >= order.len() {
                    return Err(PolymorphismError::ValueOutOfRange {
                        value: e,
                        domain_size: order.len(),
                    });
                }
                rank[e as usize] = r;
            }
            OperationTable::from_fn(order.len(), *arity, |t| {
                *t.iter().min_by_key(|&&e| rank[e as usize]).expect("positive arity")
            })
        }
        BuiltinOperation::MajorityEq { domain_size } => {
            OperationTable::from_fn(*domain_size, 3, |t| if t[1] == t[2] { t[1] } else { t[0] })
        }
    }
}

fn subset_name(set: &[Element]) -> String {
    let inner: Vec<String> = set.iter().map(Element::to_string).collect();
    format!("s{}", inner.join("_"))
}

/// Searches for a totally symmetric polymorphism of arity `k`.
///
/// Such an operation is a map `g` from non-empty sets of at most `k`
/// elements to elements. Every set `T` of at most `k` tuples of a relation
/// `R` forces `(g(T[.,1]), ..., g(T[.,r])) ∈ R`, where `T[.,p]` is the set of
/// `p`-th entries. These constraints form an instance whose solutions in `s`
/// are exactly the valid `g`, and it is solved with the exact solver.
pub fn find_totally_symmetric_polymorphism(s: &Structure, k: usize) -> Result<Option<OperationTable>, PolymorphismError> {
    if k == 0 {
        return Err(PolymorphismError::ZeroArity);
    }
    let d = s.domain_size();
    let mut subsets: Vec<Vec<Element>> = Vec::new();
    for_each_tuple(d, k, |t| subsets.push(support(t)));
    let subsets: BTreeSet<Vec<Element>> = subsets.into_iter().collect();
    if subsets.len() > MAX_SUPPORT_SETS {
        return Err(PolymorphismError::SearchTooLarge {
            what: "support sets",
            size: subsets.len(),
            cap: MAX_SUPPORT_SETS,
        });
    }
    let mut inst = Instance::new(s.signature().clone());
    let mut id_of: HashMap<Vec<Element>, usize> = HashMap::new();
    for set in &subsets {
        id_of.insert(set.clone(), inst.declare(&subset_name(set)));
    }

    let mut atoms: BTreeSet<Atom> = BTreeSet::new();
    for (symbol, rel) in s.relations().iter().enumerate() {
        let m = rel.len();
        let r = rel.arity();
        // choices of at most k tuple ids, as strictly increasing sequences
        let mut choice: Vec<usize> = Vec::with_capacity(k);
        let mut overflow = false;
        fn go(
            start: usize,
            m: usize,
            k: usize,
            choice: &mut Vec<usize>,
            visit: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            for i in start..m {
                choice.push(i);
                if !visit(choice) {
                    return false;
                }
                if choice.len() < k && !go(i + 1, m, k, choice, visit) {
                    return false;
                }
                choice.pop();
            }
            true
        }
        let mut visit = |ids: &[usize]| {
            let args = (0..r)
                .map(|p| {
                    let column: Vec<Element> = ids.iter().map(|&t| rel.tuple(t)[p]).collect();
                    id_of[&support(&column)]
                })
                .collect();
            atoms.insert(Atom::Rel { symbol, args });
            if atoms.len() > MAX_CONSTRAINTS {
                overflow = true;
                return false;
            }
            true
        };
        go(0, m, k, &mut choice, &mut visit);
        if overflow {
            return Err(PolymorphismError::SearchTooLarge {
                what: "constraints",
                size: atoms.len(),
                cap: MAX_CONSTRAINTS,
            });
        }
    }
    for atom in atoms {
        inst.push(atom);
    }

    let result = hom_search(&inst, s).expect("instance is built over the structure's signature");
    let Some(witness) = result.witness else {
        return Ok(None);
    };
    let g: HashMap<&Vec<Element>, Element> = subsets
        .iter()
        .map(|set| (set, witness.assignment.get(&subset_name(set)).expect("total")))
        .collect();
    Ok(Some(OperationTable::from_fn(d, k, |t| g[&support(t)])?))
}

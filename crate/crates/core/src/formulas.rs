//! Conjunctions of atomic formulas: the instances every solver consumes.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::model::{Element, Signature, Structure};

/// Index of a variable within its [`Instance`].
pub type VarId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `R(x1, ..., xk)` with `symbol` indexing the instance signature.
    Rel { symbol: usize, args: Vec<VarId> },
    Eq(VarId, VarId),
    Neq(VarId, VarId),
    Bot,
}

impl Atom {
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Atom::Rel { args, .. } => args.clone(),
            Atom::Eq(a, b) | Atom::Neq(a, b) => vec![*a, *b],
            Atom::Bot => Vec::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` has arity {expected}, got {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("atom refers to undeclared variable #{0}")]
    UnknownVariable(VarId),
    #[error("instance contains {0} atoms; contract equalities and drop disequalities first")]
    NotNormalized(&'static str),
    #[error("instances are over different signatures")]
    SignatureMismatch,
}

/// Outcome of [`validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    WellFormed,
    ContainsBot,
}

/// A conjunction of atoms over named variables.
///
/// Variables keep first-declaration order; a variable may be declared without
/// occurring in any atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    signature: Signature,
    variables: IndexSet<String>,
    atoms: Vec<Atom>,
}

impl Instance {
    pub fn new(signature: Signature) -> Self {
        Instance {
            signature,
            variables: IndexSet::new(),
            atoms: Vec::new(),
        }
    }

    /// Assembles an instance without checking atoms; see [`validate`].
    pub fn from_parts(signature: Signature, variables: Vec<String>, atoms: Vec<Atom>) -> Self {
        Instance {
            signature,
            variables: variables.into_iter().collect(),
            atoms,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn variables(&self) -> impl ExactSizeIterator<Item = &str> {
        self.variables.iter().map(String::as_str)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.variables[id]
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.variables.get_index_of(name)
    }

    pub fn declare(&mut self, name: &str) -> VarId {
        match self.variables.get_index_of(name) {
            Some(i) => i,
            None => self.variables.insert_full(name.to_string()).0,
        }
    }

    pub fn add_rel(&mut self, symbol: &str, args: &[&str]) -> Result<&mut Self, FormulaError> {
        let index = self
            .signature
            .index_of(symbol)
            .ok_or_else(|| FormulaError::UnknownSymbol(symbol.to_string()))?;
        let expected = self.signature.symbol(index).arity;
        if expected != args.len() {
            return Err(FormulaError::ArityMismatch {
                symbol: symbol.to_string(),
                expected,
                found: args.len(),
            });
        }
        let args = args.iter().map(|a| self.declare(a)).collect();
        self.atoms.push(Atom::Rel { symbol: index, args });
        Ok(self)
    }

    pub fn add_eq(&mut self, a: &str, b: &str) -> &mut Self {
        let (a, b) = (self.declare(a), self.declare(b));
        self.atoms.push(Atom::Eq(a, b));
        self
    }

    pub fn add_neq(&mut self, a: &str, b: &str) -> &mut Self {
        let (a, b) = (self.declare(a), self.declare(b));
        self.atoms.push(Atom::Neq(a, b));
        self
    }

    pub fn add_bot(&mut self) -> &mut Self {
        self.atoms.push(Atom::Bot);
        self
    }

    /// Appends an atom over already-declared variables.
    pub fn push(&mut self, atom: Atom) -> &mut Self {
        self.atoms.push(atom);
        self
    }

    pub fn has_neq(&self) -> bool {
        self.atoms.iter().any(|a| matches!(a, Atom::Neq(..)))
    }

    pub fn has_bot(&self) -> bool {
        self.atoms.contains(&Atom::Bot)
    }

    /// Conjunction of two instances over the same signature; variables are
    /// matched by name.
    pub fn conjoin(&self, other: &Instance) -> Result<Instance, FormulaError> {
        if self.signature != other.signature {
            return Err(FormulaError::SignatureMismatch);
        }
        let mut out = self.clone();
        let remap: Vec<VarId> = other.variables().map(|v| out.declare(v)).collect();
        for atom in &other.atoms {
            out.atoms.push(rename(atom, &remap));
        }
        Ok(out)
    }

    /// The same atoms re-indexed against a larger signature containing every
    /// symbol used here.
    pub fn lift(&self, signature: &Signature) -> Result<Instance, FormulaError> {
        let remap: Vec<usize> = self
            .signature
            .symbols()
            .iter()
            .map(|s| match signature.index_of(&s.name) {
                Some(i) if signature.symbol(i).arity == s.arity => Ok(i),
                _ => Err(FormulaError::UnknownSymbol(s.name.clone())),
            })
            .collect::<Result<_, _>>()?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Rel { symbol, args } => Atom::Rel {
                    symbol: remap[*symbol],
                    args: args.clone(),
                },
                other => other.clone(),
            })
            .collect();
        Ok(Instance {
            signature: signature.clone(),
            variables: self.variables.clone(),
            atoms,
        })
    }

    /// Reads the atoms off a structure: one variable per element (named by
    /// its label) and one atom per tuple.
    pub fn from_structure(structure: &Structure) -> Instance {
        let mut inst = Instance::new(structure.signature().clone());
        for e in structure.elements() {
            inst.declare(&structure.label(e));
        }
        for (r, rel) in structure.relations().iter().enumerate() {
            for t in rel.iter() {
                inst.atoms.push(Atom::Rel {
                    symbol: r,
                    args: t.iter().map(|&e| e as VarId).collect(),
                });
            }
        }
        inst
    }
}

fn rename(atom: &Atom, map: &[VarId]) -> Atom {
    match atom {
        Atom::Rel { symbol, args } => Atom::Rel {
            symbol: *symbol,
            args: args.iter().map(|&v| map[v]).collect(),
        },
        Atom::Eq(a, b) => Atom::Eq(map[*a], map[*b]),
        Atom::Neq(a, b) => Atom::Neq(map[*a], map[*b]),
        Atom::Bot => Atom::Bot,
    }
}

/// Checks symbol indices, arities and variable references.
pub fn validate(inst: &Instance) -> Result<Validity, FormulaError> {
    let n = inst.num_vars();
    let mut bot = false;
    for atom in &inst.atoms {
        match atom {
            Atom::Rel { symbol, args } => {
                if *symbol >= inst.signature.len() {
                    return Err(FormulaError::UnknownSymbol(format!("#{symbol}")));
                }
                let sym = inst.signature.symbol(*symbol);
                if sym.arity != args.len() {
                    return Err(FormulaError::ArityMismatch {
                        symbol: sym.name.clone(),
                        expected: sym.arity,
                        found: args.len(),
                    });
                }
                if let Some(&v) = args.iter().find(|&&v| v >= n) {
                    return Err(FormulaError::UnknownVariable(v));
                }
            }
            Atom::Eq(a, b) | Atom::Neq(a, b) => {
                if let Some(&v) = [a, b].into_iter().find(|&&v| v >= n) {
                    return Err(FormulaError::UnknownVariable(v));
                }
            }
            Atom::Bot => bot = true,
        }
    }
    Ok(if bot { Validity::ContainsBot } else { Validity::WellFormed })
}

/// Result of [`contract_equalities`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub instance: Instance,
    /// For every variable of the input, its representative in `instance`.
    pub representative: Vec<VarId>,
}

impl Contraction {
    pub fn is_contradictory(&self) -> bool {
        self.instance.has_bot()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges every class of variables connected by `=` atoms into its
/// first-declared member and rewrites the remaining atoms accordingly.
///
/// A disequality between two merged variables, or any `⊥`, turns the whole
/// instance into the single atom `⊥`. Duplicate atoms are dropped.
pub fn contract_equalities(inst: &Instance) -> Contraction {
    let n = inst.num_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    for atom in &inst.atoms {
        if let Atom::Eq(a, b) = atom {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            // the smaller index (earlier declaration) becomes the root
            if ra < rb {
                parent[rb] = ra;
            } else {
                parent[ra] = rb;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    let mut kept = IndexSet::new();
    let mut new_id = vec![usize::MAX; n];
    for v in 0..n {
        if roots[v] == v {
            new_id[v] = kept.insert_full(inst.variables[v].clone()).0;
        }
    }
    let representative: Vec<VarId> = (0..n).map(|v| new_id[roots[v]]).collect();

    let mut atoms = Vec::new();
    let mut seen = BTreeSet::new();
    let mut contradiction = false;
    for atom in &inst.atoms {
        let rewritten = match atom {
            Atom::Eq(..) => continue,
            Atom::Bot => {
                contradiction = true;
                break;
            }
            Atom::Neq(a, b) if representative[*a] == representative[*b] => {
                contradiction = true;
                break;
            }
            other => rename(other, &representative),
        };
        if seen.insert(rewritten.clone()) {
            atoms.push(rewritten);
        }
    }
    if contradiction {
        atoms = vec![Atom::Bot];
    }
    Contraction {
        instance: Instance {
            signature: inst.signature.clone(),
            variables: kept,
            atoms,
        },
        representative,
    }
}

/// The structure whose elements are the instance's variables (in order) and
/// whose relations are exactly its relational atoms.
pub fn canonical_database(inst: &Instance) -> Result<Structure, FormulaError> {
    let mut builder = Structure::builder(inst.signature.clone(), inst.num_vars());
    for atom in &inst.atoms {
        match atom {
            Atom::Rel { symbol, args } => {
                let tuple: Vec<Element> = args.iter().map(|&v| v as Element).collect();
                builder.add_at(*symbol, &tuple).map_err(|_| FormulaError::ArityMismatch {
                    symbol: inst.signature.symbol(*symbol).name.clone(),
                    expected: inst.signature.symbol(*symbol).arity,
                    found: args.len(),
                })?;
            }
            Atom::Eq(..) => return Err(FormulaError::NotNormalized("equality")),
            Atom::Neq(..) => return Err(FormulaError::NotNormalized("disequality")),
            Atom::Bot => return Err(FormulaError::NotNormalized("⊥")),
        }
    }
    builder.labels(inst.variables.iter().cloned().collect());
    Ok(builder.build().expect("canonical database tuples are in range"))
}

/// Every relational atom over variables `0..num_vars`, ordered by symbol and
/// then lexicographically by arguments.
pub fn relational_atoms(signature: &Signature, num_vars: usize) -> Vec<Atom> {
    let mut out = Vec::new();
    for (s, sym) in signature.symbols().iter().enumerate() {
        if num_vars == 0 {
            continue;
        }
        let mut args = vec![0; sym.arity];
        loop {
            out.push(Atom::Rel {
                symbol: s,
                args: args.clone(),
            });
            let mut p = sym.arity;
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                args[p] += 1;
                if args[p] < num_vars {
                    break;
                }
                args[p] = 0;
            }
            if args.iter().all(|&a| a == 0) {
                break;
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Sets of distinct relational atoms over exactly `num_vars` variables, one
/// representative per class under renaming of the variables.
///
/// `max_atoms` bounds the number of atoms per set. A set is emitted iff its
/// sorted atom list is the lexicographically least among all its renamings.
pub fn conjunctions_up_to_renaming(
    signature: &Signature,
    num_vars: usize,
    max_atoms: Option<usize>,
) -> Vec<Vec<Atom>> {
    let atoms = relational_atoms(signature, num_vars);
    let limit = max_atoms.unwrap_or(atoms.len()).min(atoms.len());
    let perms = permutations(num_vars);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();

    fn canonical(set: &[Atom], perms: &[Vec<usize>]) -> bool {
        let mut sorted = set.to_vec();
        sorted.sort();
        for p in perms {
            let mut image: Vec<Atom> = sorted.iter().map(|a| rename(a, p)).collect();
            image.sort();
            if image < sorted {
                return false;
            }
        }
        true
    }

    fn go(
        start: usize,
        atoms: &[Atom],
        limit: usize,
        chosen: &mut Vec<usize>,
        perms: &[Vec<usize>],
        out: &mut Vec<Vec<Atom>>,
    ) {
        let set: Vec<Atom> = chosen.iter().map(|&i| atoms[i].clone()).collect();
        if canonical(&set, perms) {
            out.push(set);
        }
        if chosen.len() == limit {
            return;
        }
        for i in start..atoms.len() {
            chosen.push(i);
            go(i + 1, atoms, limit, chosen, perms, out);
            chosen.pop();
        }
    }

    go(0, &atoms, limit, &mut chosen, &perms, &mut out);
    out
}

/// Default variable names `x1, x2, ...`.
pub fn default_var_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl fmt::Display for Instance {
    /// Prints the instance in the text syntax read by
    /// [`parse_instance`](crate::io::parse_instance).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        // re-reading the atoms alone must reproduce the declaration order
        let mut first_seen: Vec<VarId> = Vec::with_capacity(self.num_vars());
        for a in &self.atoms {
            for v in a.vars() {
                if !first_seen.contains(&v) {
                    first_seen.push(v);
                }
            }
        }
        if first_seen.iter().copied().ne(0..self.num_vars()) {
            let all: Vec<&str> = self.variables().collect();
            parts.push(format!("vars({})", all.join(", ")));
        }
        for a in &self.atoms {
            parts.push(match a {
                Atom::Rel { symbol, args } => {
                    let names: Vec<&str> = args.iter().map(|&v| self.var_name(v)).collect();
                    format!("{}({})", self.signature.symbol(*symbol).name, names.join(", "))
                }
                Atom::Eq(a, b) => format!("{} = {}", self.var_name(*a), self.var_name(*b)),
                Atom::Neq(a, b) => format!("{} != {}", self.var_name(*a), self.var_name(*b)),
                Atom::Bot => "false".to_string(),
            });
        }
        if parts.is_empty() {
            return write!(f, "true");
        }
        write!(f, "{}", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new([("E", 2), ("lt", 2)]).unwrap()
    }

    #[test]
    fn contraction_merges_single_equality() {
        let mut i = Instance::new(sig());
        i.add_rel("E", &["x", "y"]).unwrap();
        i.add_eq("x", "y");
        let c = contract_equalities(&i);
        assert_eq!(c.instance.to_string(), "E(x, x)");
        assert_eq!(c.representative, vec![0, 0]);
    }

    #[test]
    fn contraction_surfaces_contradiction() {
        let mut i = Instance::new(sig());
        i.add_eq("x", "y").add_eq("y", "z").add_neq("x", "z");
        let c = contract_equalities(&i);
        assert!(c.is_contradictory());
        assert_eq!(c.instance.atoms(), &[Atom::Bot]);
        assert_eq!(c.representative, vec![0, 0, 0]);
    }

    #[test]
    fn contraction_uses_first_declared_representative() {
        let mut i = Instance::new(sig());
        i.add_rel("lt", &["x", "y"]).unwrap();
        i.add_eq("y", "w");
        i.add_rel("lt", &["w", "z"]).unwrap();
        let c = contract_equalities(&i);
        assert_eq!(c.instance.to_string(), "lt(x, y); lt(y, z)");
        assert_eq!(c.instance.var_name(c.representative[i.var("w").unwrap()]), "y");
    }

    #[test]
    fn canonical_database_transcribes_atoms() {
        let mut i = Instance::new(sig());
        i.declare("x");
        let d = canonical_database(&i).unwrap();
        assert_eq!(d.domain_size(), 1);
        assert!(d.relations().iter().all(|r| r.is_empty()));

        let mut i = Instance::new(sig());
        i.add_rel("E", &["x", "y"]).unwrap().add_rel("E", &["y", "x"]).unwrap();
        let d = canonical_database(&i).unwrap();
        let e: Vec<_> = d.relation(0).iter().map(<[Element]>::to_vec).collect();
        assert_eq!(e, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(d.labels().unwrap(), &["x".to_string(), "y".to_string()]);

        let mut i = Instance::new(sig());
        i.add_neq("x", "y");
        assert!(matches!(canonical_database(&i), Err(FormulaError::NotNormalized(_))));
    }

    #[test]
    fn validation_verdicts() {
        let mut i = Instance::new(sig());
        i.add_bot();
        assert_eq!(validate(&i), Ok(Validity::ContainsBot));
        let mut i = Instance::new(sig());
        i.add_rel("lt", &["x", "y"]).unwrap();
        assert_eq!(validate(&i), Ok(Validity::WellFormed));
        assert!(matches!(
            Instance::new(sig()).add_rel("lt", &["x"]),
            Err(FormulaError::ArityMismatch { .. })
        ));
        let raw = Instance::from_parts(sig(), vec!["x".into()], vec![Atom::Rel { symbol: 1, args: vec![0] }]);
        assert!(matches!(validate(&raw), Err(FormulaError::ArityMismatch { .. })));
    }

    #[test]
    fn enumeration_up_to_renaming_counts() {
        let u = Signature::new([("U", 1)]).unwrap();
        assert_eq!(conjunctions_up_to_renaming(&u, 1, None).len(), 2);
        // on two variables: {}, {U(a)}, {U(a),U(b)}
        assert_eq!(conjunctions_up_to_renaming(&u, 2, None).len(), 3);
        let e = Signature::new([("E", 2)]).unwrap();
        // loops and edges on two vertices up to swapping the vertices
        let classes = conjunctions_up_to_renaming(&e, 2, None);
        assert_eq!(classes.len(), 10);
    }
}

use std::fmt;

use super::ModelError;

/// A relation symbol together with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered, finite relational vocabulary.
///
/// Symbols are addressed either by name or by their position in the
/// signature; relation storage in [`Structure`](super::Structure) follows the
/// same order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<I, S>(symbols: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut sig = Signature::default();
        for (name, arity) in symbols {
            sig.push(name, arity)?;
        }
        Ok(sig)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Appends a symbol, rejecting duplicates and nullary symbols.
    pub fn push(&mut self, name: impl Into<String>, arity: usize) -> Result<usize, ModelError> {
        let name = name.into();
        if arity == 0 {
            return Err(ModelError::ZeroArity(name));
        }
        if self.index_of(&name).is_some() {
            return Err(ModelError::DuplicateSymbol(name));
        }
        self.symbols.push(Symbol { name, arity });
        Ok(self.symbols.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &Symbol {
        &self.symbols[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }

    pub fn is_disjoint(&self, other: &Signature) -> bool {
        self.symbols.iter().all(|s| other.index_of(&s.name).is_none())
    }

    /// Concatenates two signatures; fails on any shared name.
    pub fn union(&self, other: &Signature) -> Result<Signature, ModelError> {
        let mut out = self.clone();
        for s in &other.symbols {
            out.push(s.name.clone(), s.arity)?;
        }
        Ok(out)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        write!(f, "]")
    }
}

use super::relation::{Element, Relation};
use super::signature::Signature;
use super::ModelError;

/// A finite relational structure over an explicit signature.
///
/// Elements are the ids `0..domain_size`; `labels` only affect display.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    signature: Signature,
    domain_size: usize,
    relations: Vec<Relation>,
    labels: Option<Vec<String>>,
}

impl Structure {
    pub fn new(
        signature: Signature,
        domain_size: usize,
        relations: Vec<Relation>,
    ) -> Result<Self, ModelError> {
        if relations.len() != signature.len() {
            return Err(ModelError::SignatureMismatch);
        }
        for (sym, rel) in signature.symbols().iter().zip(&relations) {
            if rel.arity() != sym.arity {
                return Err(ModelError::ArityMismatch {
                    symbol: sym.name.clone(),
                    expected: sym.arity,
                    found: rel.arity(),
                });
            }
            if let Some(max) = rel.max_element() {
                if max as usize >= domain_size {
                    return Err(ModelError::ElementOutOfRange {
                        element: max,
                        domain_size,
                    });
                }
            }
        }
        Ok(Structure {
            signature,
            domain_size,
            relations,
            labels: None,
        })
    }

    /// A structure with every relation empty.
    pub fn empty(signature: Signature, domain_size: usize) -> Self {
        let relations = signature
            .symbols()
            .iter()
            .map(|s| Relation::new(s.arity))
            .collect();
        Structure {
            signature,
            domain_size,
            relations,
            labels: None,
        }
    }

    pub fn builder(signature: Signature, domain_size: usize) -> StructureBuilder {
        StructureBuilder::new(signature, domain_size)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.domain_size {
            return Err(ModelError::LabelCount {
                expected: self.domain_size,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        0..self.domain_size as Element
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, index: usize) -> &Relation {
        &self.relations[index]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&Relation> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of an element: its label, or its id.
    pub fn label(&self, element: Element) -> String {
        match &self.labels {
            Some(labels) => labels[element as usize].clone(),
            None => element.to_string(),
        }
    }

    /// Adds relations for new symbols, keeping everything else.
    pub fn expand(
        mut self,
        additions: impl IntoIterator<Item = (String, Relation)>,
    ) -> Result<Self, ModelError> {
        for (name, rel) in additions {
            if let Some(max) = rel.max_element() {
                if max as usize >= self.domain_size {
                    return Err(ModelError::ElementOutOfRange {
                        element: max,
                        domain_size: self.domain_size,
                    });
                }
            }
            self.signature.push(name, rel.arity())?;
            self.relations.push(rel);
        }
        Ok(self)
    }

    /// Restriction to the symbols of `signature` (which must be a subset).
    pub fn reduct(&self, signature: &Signature) -> Result<Self, ModelError> {
        let mut relations = Vec::with_capacity(signature.len());
        for sym in signature.symbols() {
            let idx = self
                .signature
                .index_of(&sym.name)
                .ok_or_else(|| ModelError::UnknownSymbol(sym.name.clone()))?;
            relations.push(self.relations[idx].clone());
        }
        Ok(Structure {
            signature: signature.clone(),
            domain_size: self.domain_size,
            relations,
            labels: self.labels.clone(),
        })
    }
}

/// Accumulates tuples before sorting them into a [`Structure`].
#[derive(Debug)]
pub struct StructureBuilder {
    signature: Signature,
    domain_size: usize,
    data: Vec<Vec<Element>>,
    labels: Option<Vec<String>>,
}

impl StructureBuilder {
    pub fn new(signature: Signature, domain_size: usize) -> Self {
        let data = vec![Vec::new(); signature.len()];
        StructureBuilder {
            signature,
            domain_size,
            data,
            labels: None,
        }
    }

    pub fn add(&mut self, symbol: &str, tuple: &[Element]) -> Result<&mut Self, ModelError> {
        let idx = self
            .signature
            .index_of(symbol)
            .ok_or_else(|| ModelError::UnknownSymbol(symbol.to_string()))?;
        self.add_at(idx, tuple)
    }

    pub fn add_at(&mut self, index: usize, tuple: &[Element]) -> Result<&mut Self, ModelError> {
        let sym = self.signature.symbol(index);
        if tuple.len() != sym.arity {
            return Err(ModelError::ArityMismatch {
                symbol: sym.name.clone(),
                expected: sym.arity,
                found: tuple.len(),
            });
        }
        if let Some(&e) = tuple.iter().find(|&&e| e as usize >= self.domain_size) {
            return Err(ModelError::ElementOutOfRange {
                element: e,
                domain_size: self.domain_size,
            });
        }
        self.data[index].extend_from_slice(tuple);
        Ok(self)
    }

    pub fn labels(&mut self, labels: Vec<String>) -> &mut Self {
        self.labels = Some(labels);
        self
    }

    pub fn build(self) -> Result<Structure, ModelError> {
        let relations = self
            .signature
            .symbols()
            .iter()
            .zip(self.data)
            .map(|(s, d)| Relation::from_flat(s.arity, d))
            .collect();
        let s = Structure::new(self.signature, self.domain_size, relations)?;
        match self.labels {
            Some(l) => s.with_labels(l),
            None => Ok(s),
        }
    }
}

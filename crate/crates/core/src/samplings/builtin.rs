//! The built-in sample families.

use std::sync::Arc;

use crate::definition::{part_symbol, QfFormula, ORDER_SYMBOL};
use crate::model::{disjoint_union, evaluate_definition, Element, Relation, Signature, Structure};

use super::debruijn::de_bruijn;
use super::deciders::{
    alternating_decider, order_decider, partition_decider, successor_decider, two_models_decider,
};
use super::{RelationDef, SampleFamily, SamplingError};

fn signature_of(defs: &[RelationDef]) -> Result<Signature, SamplingError> {
    Ok(Signature::new(defs.iter().map(|d| (d.name.clone(), d.arity)))?)
}

/// Materializes every definition over `base` and keeps only the defined
/// relations.
fn expand_base(base: &Structure, defs: &[RelationDef], signature: &Signature) -> Result<Structure, SamplingError> {
    let relations = defs
        .iter()
        .map(|d| {
            evaluate_definition(&d.formula, base, d.arity).map_err(|source| SamplingError::Definition {
                name: d.name.clone(),
                source,
            })
        })
        .collect::<Result<Vec<Relation>, _>>()?;
    let s = Structure::new(signature.clone(), base.domain_size(), relations)?;
    match base.labels() {
        Some(labels) => Ok(s.with_labels(labels.to_vec())?),
        None => Ok(s),
    }
}

fn chain(n: usize) -> Structure {
    let sig = Signature::new([(ORDER_SYMBOL, 2)]).expect("valid");
    let mut data = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n as Element {
        for j in i + 1..n as Element {
            data.extend([i, j]);
        }
    }
    Structure::new(sig, n, vec![Relation::from_flat(2, data)])
        .expect("chain is well-formed")
        .with_labels((1..=n).map(|i| i.to_string()).collect())
        .expect("label count")
}

/// `{1..n}` with its strict order, reduced to the relations of `expansion`.
///
/// Definitions may use `x1 < x2` and equality. An empty expansion means the
/// single relation `lt` defined as the order itself.
pub fn dense_order_sampling(expansion: Vec<RelationDef>) -> Result<SampleFamily, SamplingError> {
    let defs = if expansion.is_empty() {
        vec![RelationDef::new("lt", 2, QfFormula::order())]
    } else {
        expansion
    };
    let signature = signature_of(&defs)?;
    expand_base(&chain(2), &defs, &signature)?;
    let defs = Arc::new(defs);
    let (gen_defs, gen_sig) = (Arc::clone(&defs), signature.clone());
    Ok(SampleFamily::new("dense_order", signature, move |n| {
        Ok(vec![expand_base(&chain(n), &gen_defs, &gen_sig)?])
    })
    .with_flags(true, true)
    .with_decider(order_decider(defs)))
}

fn parts(n: usize, m: usize) -> Structure {
    let sig = Signature::new((1..=m).map(|j| (part_symbol(j), 1))).expect("valid");
    let relations = (0..m)
        .map(|j| Relation::from_flat(1, (0..n).map(|i| (i * m + j) as Element).collect()))
        .collect();
    let labels = (0..n)
        .flat_map(|i| (0..m).map(move |j| format!("a{},{}", i + 1, j + 1)))
        .collect();
    Structure::new(sig, n * m, relations)
        .expect("parts are well-formed")
        .with_labels(labels)
        .expect("label count")
}

/// `n` elements in each of `m` unary parts, reduced to `expansion`.
///
/// Element `i * m + j` is the `i`-th member of part `j + 1`, labelled
/// `a{i+1},{j+1}`. Definitions may use `part(J)(xI)` and equality; an empty
/// expansion means `p1..pm` with `pj = part(j)`.
pub fn colored_partition_sampling(m: usize, expansion: Vec<RelationDef>) -> Result<SampleFamily, SamplingError> {
    if m == 0 {
        return Err(SamplingError::NoParts);
    }
    let defs = if expansion.is_empty() {
        (1..=m)
            .map(|j| RelationDef::new(format!("p{j}"), 1, QfFormula::part(j)))
            .collect()
    } else {
        expansion
    };
    let signature = signature_of(&defs)?;
    expand_base(&parts(1, m), &defs, &signature)?;
    let defs = Arc::new(defs);
    let (gen_defs, gen_sig) = (Arc::clone(&defs), signature.clone());
    Ok(SampleFamily::new(format!("partition({m})"), signature, move |n| {
        Ok(vec![expand_base(&parts(n, m), &gen_defs, &gen_sig)?])
    })
    .with_flags(true, true)
    .with_decider(partition_decider(m, defs)))
}

/// `n` disjoint directed `succ`-paths with `n + 1` elements each.
pub fn successor_sampling() -> SampleFamily {
    let signature = Signature::new([("succ", 2)]).expect("valid");
    let sig = signature.clone();
    SampleFamily::new("successor", signature, move |n| {
        let len = n + 1;
        let mut data = Vec::with_capacity(2 * n * n);
        for p in 0..n {
            for i in 0..n {
                let a = (p * len + i) as Element;
                data.extend([a, a + 1]);
            }
        }
        let labels = (0..n)
            .flat_map(|p| (0..len).map(move |i| format!("{}.{}", p + 1, i)))
            .collect();
        Ok(vec![Structure::new(sig.clone(), n * len, vec![Relation::from_flat(2, data)])?.with_labels(labels)?])
    })
    .with_flags(true, false)
    .with_decider(successor_decider(0, None))
}

/// Two structures on `{1..2n}` with `P = {1..n}`, `Q = {n+1..2n}`, `I` the
/// disequality, and `O = {1}` in the first, `O = {n+1}` in the second.
///
/// Fixture for a theory where every sampling needs more than one structure.
pub fn two_models_sampling() -> SampleFamily {
    let signature = Signature::new([("O", 1), ("P", 1), ("Q", 1), ("I", 2)]).expect("valid");
    let sig = signature.clone();
    SampleFamily::new("two_models", signature, move |n| {
        let size = 2 * n;
        let labels: Vec<String> = (1..=size).map(|i| i.to_string()).collect();
        let p: Vec<Element> = (0..n as Element).collect();
        let q: Vec<Element> = (n as Element..size as Element).collect();
        let mut neq = Vec::new();
        for a in 0..size as Element {
            for b in 0..size as Element {
                if a != b {
                    neq.extend([a, b]);
                }
            }
        }
        [0, n as Element]
            .into_iter()
            .map(|o| {
                let relations = vec![
                    Relation::from_flat(1, vec![o]),
                    Relation::from_flat(1, p.clone()),
                    Relation::from_flat(1, q.clone()),
                    Relation::from_flat(2, neq.clone()),
                ];
                Ok(Structure::new(sig.clone(), size, relations)?.with_labels(labels.clone())?)
            })
            .collect()
    })
    .with_flags(true, false)
    .with_decider(two_models_decider(0, 1, 2, 3))
}

/// For each `k` in `1..=⌈n/2⌉`, `⌈n/2k⌉` copies of the alternating cycle
/// `E1(x1,x2), E2(x2,x3), ..., E2(x2k,x1)`.
pub fn alternating_cycles_sampling() -> SampleFamily {
    let signature = Signature::new([("E1", 2), ("E2", 2)]).expect("valid");
    let sig = signature.clone();
    SampleFamily::new("alternating_cycles", signature, move |n| {
        let (mut e1, mut e2, mut labels) = (Vec::new(), Vec::new(), Vec::new());
        let mut offset: Element = 0;
        for k in 1..=n.div_ceil(2) {
            let len = 2 * k;
            for copy in 0..n.div_ceil(len) {
                for p in 0..len {
                    let a = offset + p as Element;
                    let b = offset + ((p + 1) % len) as Element;
                    if p % 2 == 0 {
                        e1.extend([a, b]);
                    } else {
                        e2.extend([a, b]);
                    }
                    labels.push(format!("c{}.{}.{}", k, copy + 1, p + 1));
                }
                offset += len as Element;
            }
        }
        let s = Structure::new(
            sig.clone(),
            offset as usize,
            vec![Relation::from_flat(2, e1), Relation::from_flat(2, e2)],
        )?;
        Ok(vec![s.with_labels(labels)?])
    })
    .with_flags(true, false)
    .with_decider(alternating_decider(0, 1))
}

/// A directed `succ`-cycle of length `2^n` coloured `p0`/`p1` along a binary
/// de Bruijn sequence of order `n`, so every colour word of length `n` labels
/// a path.
pub fn succ2col_sampling() -> SampleFamily {
    let signature = Signature::new([("succ", 2), ("p0", 1), ("p1", 1)]).expect("valid");
    let sig = signature.clone();
    SampleFamily::new("succ2col", signature, move |n| {
        let word = de_bruijn(2, n);
        let size = word.len();
        let mut succ = Vec::with_capacity(2 * size);
        let (mut p0, mut p1) = (Vec::new(), Vec::new());
        for (i, &bit) in word.iter().enumerate() {
            succ.extend([i as Element, ((i + 1) % size) as Element]);
            if bit == 0 {
                p0.push(i as Element);
            } else {
                p1.push(i as Element);
            }
        }
        let relations = vec![
            Relation::from_flat(2, succ),
            Relation::from_flat(1, p0),
            Relation::from_flat(1, p1),
        ];
        let labels = (0..size).map(|i| format!("v{i}")).collect();
        Ok(vec![Structure::new(sig.clone(), size, relations)?.with_labels(labels)?])
    })
    .with_flags(true, false)
    .with_decider(successor_decider(0, Some([1, 2])))
}

/// Collapses every `generate(n)` into a single structure by disjoint union.
///
/// Still a sampling for the same theory, but equality-matching may be lost,
/// so the result is never flagged as such.
pub fn collapse(family: &SampleFamily) -> SampleFamily {
    let inner = family.clone();
    SampleFamily::new(format!("collapse({})", family.name()), family.signature().clone(), move |n| {
        let samples = inner.generate(n)?;
        if samples.is_empty() {
            return Ok(Vec::new());
        }
        Ok(vec![disjoint_union(&samples)?])
    })
    .with_flags(false, family.no_pp_algebraicity())
    .with_shared_decider(family.decider().cloned())
}

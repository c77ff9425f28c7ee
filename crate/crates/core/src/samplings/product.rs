//! Product of two samplings for theories with disjoint signatures.

use crate::formulas::{Atom, Instance};
use crate::model::{Element, Relation, Signature, Structure};

use super::deciders::{normalize, set_partitions};
use super::{Decider, SampleFamily, SamplingError};

fn require(family: &SampleFamily) -> Result<(), SamplingError> {
    if !family.equality_matching() {
        return Err(SamplingError::MissingProperty {
            family: family.name().to_string(),
            property: "equality-matching",
        });
    }
    if !family.no_pp_algebraicity() {
        return Err(SamplingError::MissingProperty {
            family: family.name().to_string(),
            property: "free of pp-algebraicity",
        });
    }
    Ok(())
}

/// Sampling for the union of two theories over disjoint signatures.
///
/// Each pair `(B1, B2)` of samples yields one structure on `B1 × B2`: a tuple
/// of pairs is in a relation of the first signature iff its first
/// coordinates form a tuple of `B1` and both coordinate sequences have the
/// same equality pattern (and symmetrically for the second signature). The
/// total size is the product of the factor sizes.
///
/// Both factors must be equality-matching and free of pp-algebraicity.
pub fn product_sampling(s1: &SampleFamily, s2: &SampleFamily) -> Result<SampleFamily, SamplingError> {
    if let Some(shared) = s1
        .signature()
        .symbols()
        .iter()
        .find(|s| s2.signature().index_of(&s.name).is_some())
    {
        return Err(SamplingError::OverlappingSignatures {
            left: s1.name().to_string(),
            right: s2.name().to_string(),
            symbol: shared.name.clone(),
        });
    }
    require(s1)?;
    require(s2)?;
    let signature = s1.signature().union(s2.signature())?;
    let decider = match (s1.decider(), s2.decider()) {
        (Some(d1), Some(d2)) => Some(product_decider(
            s1.signature().clone(),
            s2.signature().clone(),
            d1.clone(),
            d2.clone(),
        )),
        _ => None,
    };
    let (f1, f2, sig) = (s1.clone(), s2.clone(), signature.clone());
    Ok(SampleFamily::new(format!("union({},{})", s1.name(), s2.name()), signature, move |n| {
        let (l1, l2) = (f1.generate(n)?, f2.generate(n)?);
        let mut out = Vec::with_capacity(l1.len() * l2.len());
        for b1 in l1.iter() {
            for b2 in l2.iter() {
                out.push(product_structure(b1, b2, &sig)?);
            }
        }
        Ok(out)
    })
    .with_flags(true, true)
    .with_shared_decider(decider))
}

/// Class of each position under equality of entries, numbered by first
/// occurrence; returns the classes and their count.
fn equality_pattern(t: &[Element]) -> (Vec<usize>, usize) {
    let mut firsts: Vec<Element> = Vec::with_capacity(t.len());
    let classes = t
        .iter()
        .map(|e| match firsts.iter().position(|f| f == e) {
            Some(c) => c,
            None => {
                firsts.push(*e);
                firsts.len() - 1
            }
        })
        .collect();
    (classes, firsts.len())
}

/// Calls `f` with every injective map from `0..k` into `0..size`.
fn for_each_injection(k: usize, size: usize, f: &mut impl FnMut(&[Element])) {
    fn go(choice: &mut Vec<Element>, k: usize, used: &mut [bool], f: &mut impl FnMut(&[Element])) {
        if choice.len() == k {
            f(choice);
            return;
        }
        for e in 0..used.len() {
            if !used[e] {
                used[e] = true;
                choice.push(e as Element);
                go(choice, k, used, f);
                choice.pop();
                used[e] = false;
            }
        }
    }
    if k <= size {
        go(&mut Vec::with_capacity(k), k, &mut vec![false; size], f);
    }
}

pub(crate) fn product_structure(b1: &Structure, b2: &Structure, signature: &Signature) -> Result<Structure, SamplingError> {
    let (d1, d2) = (b1.domain_size(), b2.domain_size());
    let width = d2 as Element;
    let mut relations: Vec<Relation> = Vec::with_capacity(signature.len());
    for rel in b1.relations() {
        let mut data = Vec::new();
        for t in rel.iter() {
            let (classes, k) = equality_pattern(t);
            for_each_injection(k, d2, &mut |choice| {
                data.extend(t.iter().zip(&classes).map(|(&a, &c)| a * width + choice[c]));
            });
        }
        relations.push(Relation::from_flat(rel.arity(), data));
    }
    for rel in b2.relations() {
        let mut data = Vec::new();
        for t in rel.iter() {
            let (classes, k) = equality_pattern(t);
            for_each_injection(k, d1, &mut |choice| {
                data.extend(t.iter().zip(&classes).map(|(&b, &c)| choice[c] * width + b));
            });
        }
        relations.push(Relation::from_flat(rel.arity(), data));
    }
    let labels = (0..d1 as Element)
        .flat_map(|a| (0..width).map(move |b| (a, b)))
        .map(|(a, b)| format!("({},{})", b1.label(a), b2.label(b)))
        .collect();
    Ok(Structure::new(signature.clone(), d1 * d2, relations)?.with_labels(labels)?)
}

/// Satisfiable in the union iff, for some arrangement of the variables into
/// equal and distinct classes, each side is satisfiable together with that
/// arrangement.
fn product_decider(sig1: Signature, sig2: Signature, d1: Decider, d2: Decider) -> Decider {
    std::sync::Arc::new(move |inst: &Instance| {
        let Some(inst) = normalize(inst) else {
            return false;
        };
        let split = sig1.len();
        let (mut atoms1, mut atoms2, mut neqs) = (Vec::new(), Vec::new(), Vec::new());
        for atom in inst.atoms() {
            match atom {
                Atom::Rel { symbol, args } if *symbol < split => atoms1.push(atom.clone()),
                Atom::Rel { symbol, args } => atoms2.push(Atom::Rel {
                    symbol: symbol - split,
                    args: args.clone(),
                }),
                Atom::Neq(a, b) => neqs.push((*a, *b)),
                Atom::Eq(..) | Atom::Bot => unreachable!("normalized"),
            }
        }
        let n = inst.num_vars();
        let vars: Vec<String> = inst.variables().map(str::to_string).collect();
        set_partitions(n).into_iter().any(|blocks| {
            if neqs.iter().any(|&(a, b)| blocks[a] == blocks[b]) {
                return false;
            }
            let mut arrangement = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    arrangement.push(if blocks[i] == blocks[j] {
                        Atom::Eq(i, j)
                    } else {
                        Atom::Neq(i, j)
                    });
                }
            }
            let side = |sig: &Signature, atoms: &[Atom]| {
                let mut all = atoms.to_vec();
                all.extend(arrangement.iter().cloned());
                Instance::from_parts(sig.clone(), vars.clone(), all)
            };
            d1(&side(&sig1, &atoms1)) && d2(&side(&sig2, &atoms2))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplings::{colored_partition_sampling, dense_order_sampling, successor_sampling};

    #[test]
    fn sizes_multiply() {
        let p = product_sampling(
            &dense_order_sampling(Vec::new()).unwrap(),
            &colored_partition_sampling(2, Vec::new()).unwrap(),
        )
        .unwrap();
        let samples = p.generate(2).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(p.family_size(2).unwrap(), 8);
    }

    #[test]
    fn equality_pattern_condition() {
        let order = dense_order_sampling(Vec::new()).unwrap();
        let parts = colored_partition_sampling(2, Vec::new()).unwrap();
        let p = product_sampling(&order, &parts).unwrap();
        let m = &p.generate(2).unwrap()[0];
        let lt = m.relation_by_name("lt").unwrap();
        let id = |a: Element, b: Element| a * 4 + b;
        assert!(!lt.contains(&[id(0, 1), id(1, 1)]));
        assert!(lt.contains(&[id(0, 1), id(1, 2)]));
        let p1 = m.relation_by_name("p1").unwrap();
        // (a, b) in p1 iff b in p1 of the partition sample: b in {0, 2}
        for a in 0..2 {
            for b in 0..4 {
                assert_eq!(p1.contains(&[id(a, b)]), b % 2 == 0);
            }
        }
        assert_eq!(m.label(id(1, 2)), "(2,a2,1)");
    }

    #[test]
    fn hypotheses_are_enforced() {
        let order = dense_order_sampling(Vec::new()).unwrap();
        assert!(matches!(
            product_sampling(&order, &order),
            Err(SamplingError::OverlappingSignatures { .. })
        ));
        assert!(matches!(
            product_sampling(&order, &successor_sampling()),
            Err(SamplingError::MissingProperty { .. })
        ));
    }

    #[test]
    fn injections_are_counted() {
        let mut count = 0;
        for_each_injection(2, 4, &mut |_| count += 1);
        assert_eq!(count, 12);
        count = 0;
        for_each_injection(3, 2, &mut |_| count += 1);
        assert_eq!(count, 0);
    }
}

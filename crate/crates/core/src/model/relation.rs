use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

/// Element ids of a finite structure are dense integers `0..domain_size`.
pub type Element = u32;

/// A deduplicated set of equal-length tuples, stored flat in lexicographic
/// order.
///
/// The per-position index used by the solvers is built on first use and
/// cached; it does not take part in equality.
pub struct Relation {
    arity: usize,
    data: Vec<Element>,
    index: OnceLock<PositionIndex>,
    projections: OnceLock<Option<Projections>>,
}

/// For every tuple position, the ids of the tuples carrying each value there
/// (CSR layout, tuple ids ascending within a value), alongside a copy of
/// the tuples in the same order so that scans read memory sequentially.
#[derive(Debug)]
pub(crate) struct PositionIndex {
    arity: usize,
    offsets: Vec<Vec<u32>>,
    ids: Vec<Vec<u32>>,
    rows: Vec<Vec<Element>>,
}

impl PositionIndex {
    pub(crate) fn tuples_with(&self, position: usize, value: Element) -> &[u32] {
        let offsets = &self.offsets[position];
        let v = value as usize;
        if v + 1 >= offsets.len() {
            return &[];
        }
        &self.ids[position][offsets[v] as usize..offsets[v + 1] as usize]
    }

    /// The tuples of [`Self::tuples_with`], flattened.
    pub(crate) fn rows_with(&self, position: usize, value: Element) -> &[Element] {
        let offsets = &self.offsets[position];
        let v = value as usize;
        if v + 1 >= offsets.len() {
            return &[];
        }
        &self.rows[position][offsets[v] as usize * self.arity..offsets[v + 1] as usize * self.arity]
    }

    pub(crate) fn count(&self, position: usize, value: Element) -> usize {
        self.tuples_with(position, value).len()
    }
}

/// Most bytes spent on [`Projections`] of a single relation.
const MAX_PROJECTION_BYTES: usize = 1 << 28;

/// For positions `p != q` and a value `v`, the set of values occurring at
/// `q` in tuples with `v` at `p`, as bitset rows of `usize` blocks.
pub(crate) struct Projections {
    arity: usize,
    blocks: usize,
    domain_size: usize,
    rows: Vec<Vec<usize>>,
}

impl Projections {
    pub(crate) fn row(&self, p: usize, q: usize, v: Element) -> &[usize] {
        let v = v as usize;
        if v >= self.domain_size {
            return &[];
        }
        &self.rows[p * self.arity + q][v * self.blocks..(v + 1) * self.blocks]
    }
}

impl Relation {
    pub fn new(arity: usize) -> Self {
        Relation {
            arity,
            data: Vec::new(),
            index: OnceLock::new(),
            projections: OnceLock::new(),
        }
    }

    /// Builds a relation from a flat buffer of `arity`-length tuples in any
    /// order, possibly with repetitions.
    pub fn from_flat(arity: usize, data: Vec<Element>) -> Self {
        assert!(arity > 0, "relations have positive arity");
        assert_eq!(data.len() % arity, 0, "flat buffer length not a multiple of arity");
        let count = data.len() / arity;
        let already_sorted = (1..count).all(|i| {
            data[(i - 1) * arity..i * arity].cmp(&data[i * arity..(i + 1) * arity]) == Ordering::Less
        });
        if already_sorted {
            return Relation {
                arity,
                data,
                index: OnceLock::new(),
            projections: OnceLock::new(),
            };
        }
        let mut order: Vec<u32> = (0..count as u32).collect();
        let tuple = |i: u32| &data[i as usize * arity..(i as usize + 1) * arity];
        order.sort_unstable_by(|&a, &b| tuple(a).cmp(tuple(b)));
        order.dedup_by(|a, b| tuple(*a) == tuple(*b));
        let mut sorted = Vec::with_capacity(order.len() * arity);
        for i in order {
            sorted.extend_from_slice(tuple(i));
        }
        Relation {
            arity,
            data: sorted,
            index: OnceLock::new(),
            projections: OnceLock::new(),
        }
    }

    pub fn from_tuples<I, T>(arity: usize, tuples: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[Element]>,
    {
        let mut data = Vec::new();
        for t in tuples {
            let t = t.as_ref();
            assert_eq!(t.len(), arity, "tuple length differs from arity");
            data.extend_from_slice(t);
        }
        Self::from_flat(arity, data)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        if self.arity == 0 {
            0
        } else {
            self.data.len() / self.arity
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuple(&self, id: usize) -> &[Element] {
        &self.data[id * self.arity..(id + 1) * self.arity]
    }

    /// Tuples in lexicographic order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[Element]> + '_ {
        self.data.chunks_exact(self.arity.max(1))
    }

    pub fn contains(&self, tuple: &[Element]) -> bool {
        if tuple.len() != self.arity {
            return false;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(tuple) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return true,
            }
        }
        false
    }

    pub(crate) fn max_element(&self) -> Option<Element> {
        self.data.iter().copied().max()
    }

    /// Built on first use; `None` when the table would be too large.
    pub(crate) fn projections(&self, domain_size: usize) -> Option<&Projections> {
        self.projections
            .get_or_init(|| {
                let bits = usize::BITS as usize;
                let blocks = domain_size.div_ceil(bits);
                let pairs = self.arity * self.arity.saturating_sub(1);
                if pairs.saturating_mul(domain_size).saturating_mul(blocks).saturating_mul(8) > MAX_PROJECTION_BYTES {
                    return None;
                }
                let mut rows = vec![Vec::new(); self.arity * self.arity];
                for p in 0..self.arity {
                    for q in (0..self.arity).filter(|&q| q != p) {
                        let row = &mut rows[p * self.arity + q];
                        *row = vec![0usize; domain_size * blocks];
                        for t in self.iter() {
                            let (v, w) = (t[p] as usize, t[q] as usize);
                            row[v * blocks + w / bits] |= 1 << (w % bits);
                        }
                    }
                }
                Some(Projections {
                    arity: self.arity,
                    blocks,
                    domain_size,
                    rows,
                })
            })
            .as_ref()
            .filter(|pr| pr.domain_size == domain_size)
    }

    pub(crate) fn position_index(&self, domain_size: usize) -> &PositionIndex {
        self.index.get_or_init(|| {
            let mut offsets = Vec::with_capacity(self.arity);
            let mut ids = Vec::with_capacity(self.arity);
            let mut rows = Vec::with_capacity(self.arity);
            for p in 0..self.arity {
                let mut counts = vec![0u32; domain_size + 1];
                for t in self.iter() {
                    counts[t[p] as usize + 1] += 1;
                }
                for v in 0..domain_size {
                    counts[v + 1] += counts[v];
                }
                let mut cursor = counts.clone();
                let mut list = vec![0u32; self.len()];
                for (id, t) in self.iter().enumerate() {
                    let slot = &mut cursor[t[p] as usize];
                    list[*slot as usize] = id as u32;
                    *slot += 1;
                }
                rows.push(list.iter().flat_map(|&id| self.tuple(id as usize)).copied().collect());
                offsets.push(counts);
                ids.push(list);
            }
            PositionIndex {
                arity: self.arity,
                offsets,
                ids,
                rows,
            }
        })
    }
}

impl Clone for Relation {
    fn clone(&self) -> Self {
        Relation {
            arity: self.arity,
            data: self.data.clone(),
            index: OnceLock::new(),
            projections: OnceLock::new(),
        }
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.data == other.data
    }
}

impl Eq for Relation {}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_deduplicates() {
        let r = Relation::from_tuples(2, [[1, 0], [0, 1], [1, 0], [0, 0]]);
        let tuples: Vec<_> = r.iter().map(|t| t.to_vec()).collect();
        assert_eq!(tuples, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert!(r.contains(&[0, 1]));
        assert!(!r.contains(&[1, 1]));
        assert!(!r.contains(&[0]));
    }

    #[test]
    fn position_index_lists_matching_tuples() {
        let r = Relation::from_tuples(2, [[0, 1], [1, 2], [0, 2]]);
        let idx = r.position_index(3);
        let firsts: Vec<_> = idx.tuples_with(0, 0).iter().map(|&i| r.tuple(i as usize).to_vec()).collect();
        assert_eq!(firsts, vec![vec![0, 1], vec![0, 2]]);
        assert_eq!(idx.tuples_with(1, 2).len(), 2);
        assert!(idx.tuples_with(1, 0).is_empty());
        assert!(idx.tuples_with(0, 7).is_empty());
    }
}

//! Finite multisets of ground elements (the free abelian monoid over a
//! ground set) with divisibility, concatenation and sub-multiset walks.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, GroupSpec};

/// Default cap on the number of sub-multisets a single walk may visit.
pub const DEFAULT_SUBSEQUENCE_BUDGET: u128 = 2_000_000;

/// A finite subset of a group, stored in canonical element order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    group: Arc<GroupSpec>,
    elements: Vec<Element>,
}

impl GroundSet {
    pub fn new(group: Arc<GroupSpec>, mut elements: Vec<Element>) -> Result<Self> {
        for &e in &elements {
            if !group.contains(e) {
                return Err(Error::ForeignElement(e));
            }
        }
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateElement(group.format_element(w[0])));
        }
        Ok(GroundSet { group, elements })
    }

    /// The whole group, for finite groups.
    pub fn whole(group: Arc<GroupSpec>) -> Result<Self> {
        let elements = group.elements()?;
        Self::new(group, elements)
    }

    /// Parses a comma-separated list of element names.
    pub fn parse(group: Arc<GroupSpec>, text: &str) -> Result<Self> {
        let elements = split_terms(text)
            .into_iter()
            .map(|t| group.parse_element(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, elements)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, idx: usize) -> Element {
        self.elements[idx]
    }

    pub fn index_of(&self, e: Element) -> Option<usize> {
        self.elements.binary_search(&e).ok()
    }

    /// The ground set with `e` removed.
    pub fn without(&self, e: Element) -> GroundSet {
        GroundSet {
            group: Arc::clone(&self.group),
            elements: self.elements.iter().copied().filter(|&x| x != e).collect(),
        }
    }

    /// Re-expresses a sequence over `other` (which must contain its support) in this ground.
    pub fn embed(&self, other: &GroundSet, seq: &Sequence) -> Result<Sequence> {
        let mut counts = vec![0u32; self.len()];
        for (i, &m) in seq.counts().iter().enumerate() {
            if m == 0 {
                continue;
            }
            let e = other.element(i);
            let j = self
                .index_of(e)
                .ok_or_else(|| Error::NotInGround(self.group.format_element(e)))?;
            counts[j] = m;
        }
        Ok(Sequence { counts })
    }

    pub fn empty_sequence(&self) -> Sequence {
        Sequence::empty(self.len())
    }

    /// Parses the text form `elem^[m], elem, ...`; `^[1]` may be omitted.
    pub fn parse_sequence(&self, text: &str) -> Result<Sequence> {
        let mut counts = vec![0u32; self.len()];
        for (el, m) in parse_terms(&self.group, text)? {
            let i = self
                .index_of(el)
                .ok_or_else(|| Error::NotInGround(self.group.format_element(el)))?;
            counts[i] = counts[i]
                .checked_add(m)
                .ok_or(Error::Overflow("sequence multiplicity"))?;
        }
        Sequence::from_counts(counts)
    }

    /// Parses the JSON form: a list of `[element-string, multiplicity]` pairs.
    pub fn parse_sequence_json(&self, text: &str) -> Result<Sequence> {
        let pairs: Vec<(String, u32)> =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("sequence JSON: {e}")))?;
        let mut counts = vec![0u32; self.len()];
        for (name, m) in pairs {
            let el = self.group.parse_element(&name)?;
            let i = self
                .index_of(el)
                .ok_or_else(|| Error::NotInGround(self.group.format_element(el)))?;
            counts[i] = counts[i]
                .checked_add(m)
                .ok_or(Error::Overflow("sequence multiplicity"))?;
        }
        Sequence::from_counts(counts)
    }

    pub fn format_sequence(&self, seq: &Sequence) -> String {
        if seq.is_empty() {
            return "1_F".to_string();
        }
        seq.counts()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(i, &m)| {
                let name = self.group.format_element(self.elements[i]);
                if m == 1 {
                    name
                } else {
                    format!("{name}^[{m}]")
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn format_subset(&self) -> String {
        self.elements
            .iter()
            .map(|&e| self.group.format_element(e))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// The terms of `seq` as a word in canonical order (with repetition).
    pub fn terms(&self, seq: &Sequence) -> Vec<Element> {
        seq.counts()
            .iter()
            .enumerate()
            .flat_map(|(i, &m)| std::iter::repeat_n(self.elements[i], m as usize))
            .collect()
    }
}

/// Parses a sequence whose ground set is its own support.
pub fn parse_with_support(group: Arc<GroupSpec>, text: &str) -> Result<(GroundSet, Sequence)> {
    let terms = parse_terms(&group, text)?;
    let ground = GroundSet::new(Arc::clone(&group), {
        let mut els: Vec<Element> = terms.iter().map(|&(e, _)| e).collect();
        els.sort_unstable();
        els.dedup();
        els
    })?;
    let mut counts = vec![0u32; ground.len()];
    for (el, m) in terms {
        let i = ground.index_of(el).expect("support element");
        counts[i] = counts[i]
            .checked_add(m)
            .ok_or(Error::Overflow("sequence multiplicity"))?;
    }
    Ok((ground, Sequence::from_counts(counts)?))
}

fn split_terms(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

fn parse_terms(group: &GroupSpec, text: &str) -> Result<Vec<(Element, u32)>> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "1_F" {
        return Ok(Vec::new());
    }
    split_terms(trimmed)
        .into_iter()
        .map(|term| {
            let (name, m) = match term.rfind("^[") {
                Some(pos) if term.ends_with(']') => {
                    let m = term[pos + 2..term.len() - 1]
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad multiplicity in `{term}`")))?;
                    (&term[..pos], m)
                }
                _ => (term, 1),
            };
            if m == 0 {
                return Err(Error::Parse(format!("zero multiplicity in `{term}`")));
            }
            Ok((group.parse_element(name)?, m))
        })
        .collect()
}

/// A multiset over a ground set, stored densely: `counts[i]` is the
/// multiplicity of the `i`-th ground element. This vector is also the
/// canonical encoding used as a memo key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sequence {
    counts: Vec<u32>,
}

const MAX_LEN: u64 = 1 << 31;

impl Sequence {
    pub fn empty(width: usize) -> Self {
        Sequence { counts: vec![0; width] }
    }

    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        let len: u64 = counts.iter().map(|&c| c as u64).sum();
        if len > MAX_LEN {
            return Err(Error::Overflow("sequence length"));
        }
        Ok(Sequence { counts })
    }

    pub fn single(width: usize, idx: usize, mult: u32) -> Self {
        let mut counts = vec![0; width];
        counts[idx] = mult;
        Sequence { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn width(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, idx: usize) -> u32 {
        self.counts[idx]
    }

    /// `|S|`, the number of terms counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.counts[i] > 0).collect()
    }

    fn same_ground(&self, other: &Sequence) -> Result<()> {
        if self.counts.len() == other.counts.len() {
            Ok(())
        } else {
            Err(Error::GroundMismatch(self.counts.len(), other.counts.len()))
        }
    }

    pub fn concat(&self, other: &Sequence) -> Result<Sequence> {
        self.same_ground(other)?;
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(&a, &b)| a.checked_add(b).ok_or(Error::Overflow("sequence multiplicity")))
            .collect::<Result<Vec<_>>>()?;
        Sequence::from_counts(counts)
    }

    /// `self | other` in the free abelian monoid.
    pub fn divides(&self, other: &Sequence) -> Result<bool> {
        self.same_ground(other)?;
        Ok(self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b))
    }

    /// `self / other`; requires `other | self`.
    pub fn subtract(&self, other: &Sequence) -> Result<Sequence> {
        if !other.divides(self)? {
            return Err(Error::NotDividing);
        }
        Ok(Sequence {
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a - b).collect(),
        })
    }

    /// `S^[n]`, the n-fold concatenation.
    pub fn power(&self, n: u32) -> Result<Sequence> {
        let counts = self
            .counts
            .iter()
            .map(|&c| c.checked_mul(n).ok_or(Error::Overflow("sequence multiplicity")))
            .collect::<Result<Vec<_>>>()?;
        Sequence::from_counts(counts)
    }

    /// Number of sub-multisets, `prod (v_g + 1)`.
    pub fn divisor_count(&self) -> u128 {
        self.counts
            .iter()
            .fold(1u128, |acc, &c| acc.saturating_mul(c as u128 + 1))
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u32] {
        &mut self.counts
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.counts)
    }
}

/// Mixed-radix indexing of the sub-multisets of a fixed sequence: the
/// sub-multiset with counts `c` sits at `sum c_i * stride_i`, so every
/// `T - g` has a smaller index than `T`.
#[derive(Clone, Debug)]
pub struct DivisorLattice {
    bounds: Vec<u32>,
    strides: Vec<usize>,
    size: usize,
}

impl DivisorLattice {
    pub fn new(seq: &Sequence, budget: u128) -> Result<Self> {
        let size = seq.divisor_count();
        if size > budget {
            return Err(Error::budget("sub-multisets", size, budget));
        }
        let bounds = seq.counts().to_vec();
        let mut strides = vec![0usize; bounds.len()];
        let mut acc = 1usize;
        for i in (0..bounds.len()).rev() {
            strides[i] = acc;
            acc *= bounds[i] as usize + 1;
        }
        Ok(DivisorLattice {
            bounds,
            strides,
            size: size as usize,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    pub fn width(&self) -> usize {
        self.bounds.len()
    }

    pub fn index_of(&self, counts: &[u32]) -> usize {
        counts.iter().zip(&self.strides).map(|(&c, &s)| c as usize * s).sum()
    }

    pub fn counts_at(&self, mut idx: usize) -> Vec<u32> {
        self.strides
            .iter()
            .map(|&s| {
                let c = idx / s;
                idx %= s;
                c as u32
            })
            .collect()
    }

    pub fn full_index(&self) -> usize {
        self.size - 1
    }

    /// Index of the complement `S / T`.
    pub fn complement(&self, idx: usize) -> usize {
        self.full_index() - idx
    }

    /// Walks indices in increasing order together with their count vectors.
    pub fn walk(&self) -> LatticeWalk<'_> {
        LatticeWalk {
            lattice: self,
            next: 0,
            counts: vec![0; self.bounds.len()],
        }
    }
}

pub struct LatticeWalk<'a> {
    lattice: &'a DivisorLattice,
    next: usize,
    counts: Vec<u32>,
}

impl LatticeWalk<'_> {
    /// Advances and returns the next `(index, counts)`; the slice is valid until the next call.
    pub fn advance(&mut self) -> Option<(usize, &[u32])> {
        if self.next >= self.lattice.size {
            return None;
        }
        if self.next > 0 {
            // increment the mixed-radix counter, last digit fastest
            for i in (0..self.counts.len()).rev() {
                if self.counts[i] < self.lattice.bounds[i] {
                    self.counts[i] += 1;
                    break;
                }
                self.counts[i] = 0;
            }
        }
        let idx = self.next;
        self.next += 1;
        Some((idx, &self.counts))
    }
}

/// Visits every sub-multiset of `seq` exactly once in canonical order
/// (lexicographic on the count vector).
pub fn enumerate_subsequences(seq: &Sequence, budget: u128, mut visit: impl FnMut(&Sequence)) -> Result<u128> {
    let lattice = DivisorLattice::new(seq, budget)?;
    let mut walk = lattice.walk();
    let mut visited = 0u128;
    while let Some((_, counts)) = walk.advance() {
        visit(&Sequence {
            counts: counts.to_vec(),
        });
        visited += 1;
    }
    Ok(visited)
}

/// All multisets of length exactly `len` over `width` elements, in
/// lexicographically decreasing order of count vectors.
pub fn multisets_of_length(width: usize, len: u32) -> Vec<Sequence> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; width];
    fn rec(i: usize, left: u32, counts: &mut Vec<u32>, out: &mut Vec<Sequence>) {
        if i + 1 == counts.len() {
            counts[i] = left;
            out.push(Sequence { counts: counts.clone() });
            counts[i] = 0;
            return;
        }
        for c in (0..=left).rev() {
            counts[i] = c;
            rec(i + 1, left - c, counts, out);
        }
        counts[i] = 0;
    }
    if width == 0 {
        if len == 0 {
            out.push(Sequence { counts });
        }
        return out;
    }
    rec(0, len, &mut counts, &mut out);
    out
}

/// Number of multisets of length at most `max_len` over `width` elements.
pub fn multiset_count_up_to(width: usize, max_len: u32) -> u128 {
    // C(max_len + width, width)
    let (n, k) = (max_len as u128 + width as u128, width as u128);
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

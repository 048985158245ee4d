//! Product sets `pi(S)`: the set of all products of the terms of `S` taken
//! in every order. Two independent evaluators are provided, a permutation
//! oracle and a dynamic program over sub-multisets, and they must agree.
//!
//! The dynamic program uses `reach(empty) = {1}` and
//! `reach(T) = union over g in supp(T) of reach(T - g) * g`.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::dihedral;
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupSpec};
use crate::sequence::{DivisorLattice, GroundSet, Sequence};

/// Resource limits shared by the enumeration kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Longest sequence the permutation oracle accepts.
    pub perm_len: u64,
    /// Cap on (sub-multiset, element) pairs stored by the product DP.
    pub dp_pairs: u128,
    /// Cap on sub-multisets visited by a single walk.
    pub subsequences: u128,
    /// Cap on reachable states in the dihedral balancing DP.
    pub balance_states: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            perm_len: 8,
            dp_pairs: 2_000_000,
            subsequences: 2_000_000,
            balance_states: 4_000_000,
        }
    }
}

/// A sorted set of group elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSet {
    elements: Vec<Element>,
}

impl ProductSet {
    pub fn from_elements(elements: impl IntoIterator<Item = Element>) -> Self {
        let set: BTreeSet<Element> = elements.into_iter().collect();
        ProductSet {
            elements: set.into_iter().collect(),
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn contains(&self, e: Element) -> bool {
        self.elements.binary_search(&e).is_ok()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A representation of element sets in which right multiplication by a
/// ground term is cheap.
pub trait ProductDomain {
    type Set: Clone;
    /// `{1}`.
    fn unit(&self) -> Self::Set;
    fn empty(&self) -> Self::Set;
    /// `acc = acc ∪ from · g_term`.
    fn extend_into(&self, acc: &mut Self::Set, from: &Self::Set, term: usize) -> Result<()>;
    fn has_identity(&self, set: &Self::Set) -> bool;
    fn size(&self, set: &Self::Set) -> usize;
    fn elements(&self, set: &Self::Set) -> Vec<Element>;
}

/// Bitsets over the elements of a finite group.
pub struct FiniteDomain {
    order: usize,
    words: usize,
    identity: u32,
    /// `right[term][x] = x * g_term`
    right: Vec<Vec<u32>>,
}

impl FiniteDomain {
    pub fn new(ground: &GroundSet) -> Result<Self> {
        let table = ground
            .group()
            .cayley()
            .ok_or_else(|| Error::Unsupported("finite domain over an infinite group".into()))?;
        let order = table.order();
        let right = ground
            .elements()
            .iter()
            .map(|&g| match g {
                Element::FiniteIdx(gi) => Ok((0..order as u32).map(|x| table.mul(x, gi)).collect()),
                other => Err(Error::ForeignElement(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteDomain {
            order,
            words: order.div_ceil(64),
            identity: table.identity(),
            right,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl ProductDomain for FiniteDomain {
    type Set = Vec<u64>;

    fn unit(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.words];
        s[self.identity as usize / 64] |= 1 << (self.identity % 64);
        s
    }

    fn empty(&self) -> Vec<u64> {
        vec![0u64; self.words]
    }

    fn extend_into(&self, acc: &mut Vec<u64>, from: &Vec<u64>, term: usize) -> Result<()> {
        let map = &self.right[term];
        for (w, &word) in from.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let y = map[w * 64 + b] as usize;
                acc[y / 64] |= 1 << (y % 64);
            }
        }
        Ok(())
    }

    fn has_identity(&self, set: &Vec<u64>) -> bool {
        set[self.identity as usize / 64] >> (self.identity % 64) & 1 == 1
    }

    fn size(&self, set: &Vec<u64>) -> usize {
        set.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn elements(&self, set: &Vec<u64>) -> Vec<Element> {
        (0..self.order)
            .filter(|&x| set[x / 64] >> (x % 64) & 1 == 1)
            .map(|x| Element::FiniteIdx(x as u32))
            .collect()
    }
}

/// Half-width of the exponent window used by [`DihedralWindow`].
pub const WINDOW: i64 = 63;

/// Element sets of the infinite dihedral group whose exponents lie in
/// `[-WINDOW, WINDOW]`, as a pair of bitsets (rotations, reflections).
/// Right multiplication by any element is a shift.
pub struct DihedralWindow {
    terms: Vec<Element>,
}

impl DihedralWindow {
    /// Usable when every partial product of `seq` stays inside the window.
    pub fn new(ground: &GroundSet, seq: &Sequence) -> Option<Self> {
        if !ground.group().is_infinite_dihedral() {
            return None;
        }
        let mut total: i64 = 0;
        for (i, &m) in seq.counts().iter().enumerate() {
            let k = match ground.element(i) {
                Element::DihRot(k) | Element::DihRefl(k) => k,
                _ => return None,
            };
            total = total.checked_add(k.checked_abs()?.checked_mul(m as i64)?)?;
        }
        (total <= WINDOW).then(|| DihedralWindow {
            terms: ground.elements().to_vec(),
        })
    }

    /// A window domain over `terms` without a fit check; callers guarantee the bound.
    pub fn unchecked(terms: Vec<Element>) -> Self {
        DihedralWindow { terms }
    }

    #[inline]
    fn shift(x: u128, s: i64) -> u128 {
        if s >= 0 {
            x << s
        } else {
            x >> (-s)
        }
    }

    /// Right multiplication of a (rotations, reflections) pair by one element.
    #[inline]
    pub fn mul_right(set: (u128, u128), g: Element) -> (u128, u128) {
        let (rot, refl) = set;
        match g {
            // a^x a^k = a^(x+k); a^x t a^k = a^(x-k) t
            Element::DihRot(k) => (Self::shift(rot, k), Self::shift(refl, -k)),
            // a^x a^k t = a^(x+k) t; a^x t a^k t = a^(x-k)
            Element::DihRefl(k) => (Self::shift(refl, -k), Self::shift(rot, k)),
            _ => (0, 0),
        }
    }

    pub const UNIT: (u128, u128) = (1 << WINDOW, 0);
}

impl ProductDomain for DihedralWindow {
    type Set = (u128, u128);

    fn unit(&self) -> (u128, u128) {
        Self::UNIT
    }

    fn empty(&self) -> (u128, u128) {
        (0, 0)
    }

    fn extend_into(&self, acc: &mut (u128, u128), from: &(u128, u128), term: usize) -> Result<()> {
        let (r, f) = Self::mul_right(*from, self.terms[term]);
        acc.0 |= r;
        acc.1 |= f;
        Ok(())
    }

    fn has_identity(&self, set: &(u128, u128)) -> bool {
        set.0 >> WINDOW & 1 == 1
    }

    fn size(&self, set: &(u128, u128)) -> usize {
        (set.0.count_ones() + set.1.count_ones()) as usize
    }

    fn elements(&self, set: &(u128, u128)) -> Vec<Element> {
        let mut out = Vec::new();
        for b in 0..128i64 {
            if set.0 >> b & 1 == 1 {
                out.push(Element::DihRot(b - WINDOW));
            }
        }
        for b in 0..128i64 {
            if set.1 >> b & 1 == 1 {
                out.push(Element::DihRefl(b - WINDOW));
            }
        }
        out
    }
}

/// Ordered element sets, multiplied through [`GroupSpec::mul`].
pub struct GenericDomain<'a> {
    group: &'a GroupSpec,
    terms: Vec<Element>,
}

impl<'a> GenericDomain<'a> {
    pub fn new(ground: &'a GroundSet) -> Self {
        GenericDomain {
            group: ground.group(),
            terms: ground.elements().to_vec(),
        }
    }
}

impl ProductDomain for GenericDomain<'_> {
    type Set = BTreeSet<Element>;

    fn unit(&self) -> BTreeSet<Element> {
        BTreeSet::from([self.group.identity()])
    }

    fn empty(&self) -> BTreeSet<Element> {
        BTreeSet::new()
    }

    fn extend_into(&self, acc: &mut BTreeSet<Element>, from: &BTreeSet<Element>, term: usize) -> Result<()> {
        let g = self.terms[term];
        for &x in from {
            acc.insert(self.group.mul(x, g)?);
        }
        Ok(())
    }

    fn has_identity(&self, set: &BTreeSet<Element>) -> bool {
        set.contains(&self.group.identity())
    }

    fn size(&self, set: &BTreeSet<Element>) -> usize {
        set.len()
    }

    fn elements(&self, set: &BTreeSet<Element>) -> Vec<Element> {
        set.iter().copied().collect()
    }
}

/// `pi(T)` for every sub-multiset `T` of a fixed sequence.
pub trait SubProducts {
    fn lattice(&self) -> &DivisorLattice;
    fn has_identity(&self, idx: usize) -> bool;
    fn product_set(&self, idx: usize) -> ProductSet;
}

struct Table<D: ProductDomain> {
    domain: D,
    lattice: DivisorLattice,
    reach: Vec<D::Set>,
}

impl<D: ProductDomain> SubProducts for Table<D> {
    fn lattice(&self) -> &DivisorLattice {
        &self.lattice
    }

    fn has_identity(&self, idx: usize) -> bool {
        self.domain.has_identity(&self.reach[idx])
    }

    fn product_set(&self, idx: usize) -> ProductSet {
        ProductSet::from_elements(self.domain.elements(&self.reach[idx]))
    }
}

fn build_table<D: ProductDomain>(domain: D, seq: &Sequence, budgets: &Budgets) -> Result<Table<D>> {
    let lattice = DivisorLattice::new(seq, budgets.subsequences)?;
    let mut reach: Vec<D::Set> = Vec::with_capacity(lattice.size());
    let mut pairs: u128 = 0;
    let mut walk = lattice.walk();
    while let Some((idx, counts)) = walk.advance() {
        let set = if idx == 0 {
            domain.unit()
        } else {
            let mut acc = domain.empty();
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    domain.extend_into(&mut acc, &reach[idx - lattice.stride(i)], i)?;
                }
            }
            acc
        };
        pairs += domain.size(&set) as u128;
        if pairs > budgets.dp_pairs {
            return Err(Error::budget(
                "product DP (sub-multiset, element) pairs",
                pairs,
                budgets.dp_pairs,
            ));
        }
        reach.push(set);
    }
    Ok(Table { domain, lattice, reach })
}

/// Runs the sub-multiset DP with the fastest representation available.
pub fn subproducts<'a>(ground: &'a GroundSet, seq: &Sequence, budgets: &Budgets) -> Result<Box<dyn SubProducts + 'a>> {
    if ground.group().is_finite() {
        return Ok(Box::new(build_table(FiniteDomain::new(ground)?, seq, budgets)?));
    }
    if let Some(window) = DihedralWindow::new(ground, seq) {
        return Ok(Box::new(build_table(window, seq, budgets)?));
    }
    Ok(Box::new(build_table(GenericDomain::new(ground), seq, budgets)?))
}

/// `pi(S)` by the sub-multiset DP.
pub fn product_set_dp(ground: &GroundSet, seq: &Sequence, budgets: &Budgets) -> Result<ProductSet> {
    let table = subproducts(ground, seq, budgets)?;
    Ok(table.product_set(table.lattice().full_index()))
}

/// `pi(S)` by folding every distinct ordering of the terms.
pub fn product_set_perm(ground: &GroundSet, seq: &Sequence, budgets: &Budgets) -> Result<ProductSet> {
    let len = seq.len();
    if len > budgets.perm_len {
        return Err(Error::budget("permutation oracle length", len, budgets.perm_len));
    }
    let group = ground.group();
    let mut word = ground.terms(seq);
    let mut out = BTreeSet::new();
    loop {
        out.insert(group.product(&word)?);
        if !next_permutation(&mut word) {
            break;
        }
    }
    Ok(ProductSet {
        elements: out.into_iter().collect(),
    })
}

/// Lexicographic successor; returns false after the last arrangement.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `1 in pi(S)`. Infinite dihedral grounds use the balancing criterion,
/// the integers use the sum, and finite groups use the DP.
pub fn is_product_one(ground: &GroundSet, seq: &Sequence, budgets: &Budgets) -> Result<bool> {
    match ground.group().kind() {
        GroupKind::InfiniteDihedral => dihedral::is_product_one_dihedral(ground, seq, budgets),
        GroupKind::Integers => integer_sum(ground, seq).map(|s| s == 0),
        _ => {
            if seq.is_empty() {
                return Ok(true);
            }
            let table = subproducts(ground, seq, budgets)?;
            Ok(table.has_identity(table.lattice().full_index()))
        }
    }
}

/// An ordering of the terms of `S` whose product is `1`, if one exists.
/// Sequences over the infinite dihedral group with reflections take the
/// ordering of the balancing witness. The rest take the least ordering by
/// ground index, found by a search over (remaining terms, prefix product)
/// that remembers dead states.
pub fn product_one_ordering(ground: &GroundSet, seq: &Sequence, budgets: &Budgets) -> Result<Option<Vec<Element>>> {
    if ground.group().is_infinite_dihedral() {
        if let Some(w) = dihedral::decompose(ground, seq, budgets)? {
            return Ok(Some(w.ordering(ground)));
        }
    }
    if !is_product_one(ground, seq, budgets)? {
        return Ok(None);
    }
    let group = ground.group();
    let mut remaining = seq.counts().to_vec();
    let mut word = Vec::with_capacity(seq.len() as usize);
    let mut dead: HashSet<(Vec<u32>, Element)> = HashSet::new();
    if order_search(
        ground,
        group,
        &mut remaining,
        group.identity(),
        &mut word,
        &mut dead,
        budgets,
    )? {
        Ok(Some(word))
    } else {
        Ok(None)
    }
}

fn order_search(
    ground: &GroundSet,
    group: &GroupSpec,
    remaining: &mut [u32],
    prefix: Element,
    word: &mut Vec<Element>,
    dead: &mut HashSet<(Vec<u32>, Element)>,
    budgets: &Budgets,
) -> Result<bool> {
    if remaining.iter().all(|&m| m == 0) {
        return Ok(prefix == group.identity());
    }
    if dead.contains(&(remaining.to_vec(), prefix)) {
        return Ok(false);
    }
    for i in 0..remaining.len() {
        if remaining[i] == 0 {
            continue;
        }
        let g = ground.element(i);
        remaining[i] -= 1;
        word.push(g);
        let found = order_search(ground, group, remaining, group.mul(prefix, g)?, word, dead, budgets)?;
        remaining[i] += 1;
        if found {
            return Ok(true);
        }
        word.pop();
    }
    if dead.len() as u128 >= budgets.dp_pairs {
        return Err(Error::budget(
            "ordering search states",
            dead.len() as u128 + 1,
            budgets.dp_pairs,
        ));
    }
    dead.insert((remaining.to_vec(), prefix));
    Ok(false)
}

/// True iff no nonempty `T | S` is product-one.
pub fn is_product_one_free(ground: &GroundSet, seq: &Sequence, budgets: &Budgets) -> Result<bool> {
    let table = subproducts(ground, seq, budgets)?;
    Ok((1..table.lattice().size()).all(|i| !table.has_identity(i)))
}

pub(crate) fn integer_sum(ground: &GroundSet, seq: &Sequence) -> Result<i128> {
    seq.counts()
        .iter()
        .enumerate()
        .try_fold(0i128, |acc, (i, &m)| match ground.element(i) {
            Element::Int(k) => Ok(acc + k as i128 * m as i128),
            other => Err(Error::ForeignElement(other)),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn ground(group: GroupSpec, text: &str) -> GroundSet {
        GroundSet::parse(Arc::new(group), text).unwrap()
    }

    fn b() -> Budgets {
        Budgets::default()
    }

    #[test]
    fn perm_examples() {
        let g = ground(GroupSpec::infinite_dihedral(), "a, a^-1, t");
        let s = g.parse_sequence("a, a^-1").unwrap();
        assert_eq!(
            product_set_perm(&g, &s, &b()).unwrap().elements(),
            &[Element::DihRot(0)]
        );
        let s = g.parse_sequence("a, t").unwrap();
        assert_eq!(
            product_set_perm(&g, &s, &b()).unwrap().elements(),
            &[Element::DihRefl(-1), Element::DihRefl(1)]
        );
        let e = g.empty_sequence();
        assert_eq!(
            product_set_perm(&g, &e, &b()).unwrap().elements(),
            &[Element::DihRot(0)]
        );
    }

    #[test]
    fn dp_examples() {
        let g = ground(GroupSpec::infinite_dihedral(), "a^2, a^6, t");
        let s = g.parse_sequence("t^[2]").unwrap();
        assert_eq!(product_set_dp(&g, &s, &b()).unwrap().elements(), &[Element::DihRot(0)]);
        let s = g.parse_sequence("a^2, a^6, t^[2]").unwrap();
        let pi = product_set_dp(&g, &s, &b()).unwrap();
        let expected: Vec<Element> = [-8, -4, 4, 8].into_iter().map(Element::DihRot).collect();
        assert_eq!(pi.elements(), expected.as_slice());
        assert_eq!(pi, product_set_perm(&g, &s, &b()).unwrap());
        assert!(!pi.contains(Element::DihRot(0)));
    }

    #[test]
    fn ordering_multiplies_to_identity() {
        let cases = [
            (GroupSpec::finite_dihedral(3).unwrap(), "a, a^2, t, a*t", true),
            (GroupSpec::cyclic(5).unwrap(), "g^2, g^3", true),
            (GroupSpec::cyclic(5).unwrap(), "g^2, g^2", false),
            (GroupSpec::integers(), "3, -1, -2", true),
            (GroupSpec::infinite_dihedral(), "a^-3, a^2, a^5*t, t", true),
            (GroupSpec::infinite_dihedral(), "a^-3, a^2, a^4*t, t", false),
            (GroupSpec::infinite_dihedral(), "a^2, a^6, t^[2]", false),
        ];
        for (group, text, expected) in cases {
            let (g, s) = crate::sequence::parse_with_support(Arc::new(group), text).unwrap();
            let word = product_one_ordering(&g, &s, &b()).unwrap();
            assert_eq!(word.is_some(), expected, "{text}");
            if let Some(word) = word {
                let mut sorted = word.clone();
                sorted.sort();
                assert_eq!(sorted, g.terms(&s));
                assert_eq!(g.group().product(&word).unwrap(), g.group().identity());
            }
        }
    }

    #[test]
    fn generic_domain_matches_window() {
        let g = ground(GroupSpec::infinite_dihedral(), "a^-3, a^2, t, a^5*t");
        let s = g.parse_sequence("a^-3^[2], a^2, t^[2], a^5*t").unwrap();
        let window = build_table(DihedralWindow::new(&g, &s).unwrap(), &s, &b()).unwrap();
        let generic = build_table(GenericDomain::new(&g), &s, &b()).unwrap();
        for idx in 0..window.lattice().size() {
            assert_eq!(window.product_set(idx), generic.product_set(idx));
        }
    }

    #[test]
    fn large_exponents_fall_back_to_generic() {
        let g = ground(GroupSpec::infinite_dihedral(), "a^40, t");
        let s = g.parse_sequence("a^40^[2], t^[2]").unwrap();
        assert!(DihedralWindow::new(&g, &s).is_none());
        let pi = product_set_dp(&g, &s, &b()).unwrap();
        assert_eq!(pi, product_set_perm(&g, &s, &b()).unwrap());
        assert!(pi.contains(Element::DihRot(0)));
    }

    #[test]
    fn product_one_examples() {
        let g = ground(GroupSpec::infinite_dihedral(), "a^2, a^6, t");
        assert!(is_product_one(&g, &g.empty_sequence(), &b()).unwrap());
        let s = g.parse_sequence("a^2, a^6, t^[2]").unwrap();
        assert!(!is_product_one(&g, &s, &b()).unwrap());
        assert!(is_product_one(&g, &s.power(2).unwrap(), &b()).unwrap());
        assert!(is_product_one(&g, &s.power(3).unwrap(), &b()).unwrap());
    }

    #[test]
    fn product_one_free_examples() {
        let c3 = ground(GroupSpec::cyclic(3).unwrap(), "g");
        assert!(is_product_one_free(&c3, &c3.parse_sequence("g^[2]").unwrap(), &b()).unwrap());
        assert!(!is_product_one_free(&c3, &c3.parse_sequence("g^[3]").unwrap(), &b()).unwrap());
        let d = ground(GroupSpec::infinite_dihedral(), "a");
        assert!(is_product_one_free(&d, &d.parse_sequence("a^[5]").unwrap(), &b()).unwrap());
        let z = ground(GroupSpec::integers(), "2, -3");
        assert!(!is_product_one_free(&z, &z.parse_sequence("2^[3], -3^[2]").unwrap(), &b()).unwrap());
        assert!(is_product_one_free(&z, &z.parse_sequence("2^[2], -3^[2]").unwrap(), &b()).unwrap());
    }

    #[test]
    fn budgets_are_enforced() {
        let g = ground(GroupSpec::infinite_dihedral(), "a, t");
        let s = g.parse_sequence("a^[5], t^[4]").unwrap();
        assert!(matches!(
            product_set_perm(&g, &s, &b()),
            Err(Error::BudgetExceeded { .. })
        ));
        let tight = Budgets { dp_pairs: 10, ..b() };
        assert!(matches!(
            product_set_dp(&g, &s, &tight),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn next_permutation_counts_distinct_orderings() {
        let mut v = vec![1, 1, 2, 2, 3];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 30); // 5! / (2! 2!)
    }

    #[test]
    fn s3_product_set() {
        let s3 = GroupSpec::finite_dihedral(3).unwrap();
        let g = ground(s3, "a, t");
        let s = g.parse_sequence("a, t").unwrap();
        let pi = product_set_dp(&g, &s, &b()).unwrap();
        assert_eq!(pi.len(), 2);
        assert_eq!(pi, product_set_perm(&g, &s, &b()).unwrap());
    }
}

//! Arithmetic of the monoid `B(G0)` of product-one sequences: atoms,
//! Davenport constants, factorizations, length invariants, catenary
//! degrees, the tame-type invariants and a handful of structural probes.
//!
//! Membership is memoized per [`Monoid`] on the count vector. Scans visit
//! sequences by length, then in canonical order (more copies of earlier
//! ground elements first), so every report is deterministic.

use std::cell::RefCell;
use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dihedral;
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind};
use crate::product::{self, is_product_one, product_set_dp, product_set_perm, subproducts, Budgets};
use crate::sequence::{multiset_count_up_to, multisets_of_length, DivisorLattice, GroundSet, Sequence};

/// Length first, then the sorted term vector lexicographically.
pub fn canonical_cmp(a: &Sequence, b: &Sequence) -> Ordering {
    (a.len(), Reverse(a.counts())).cmp(&(b.len(), Reverse(b.counts())))
}

/// Every multiset of length `1..=max_len`, in canonical order.
pub fn canonical_multisets(width: usize, max_len: u32, budget: u128) -> Result<Vec<Sequence>> {
    let total = multiset_count_up_to(width, max_len);
    if total > budget {
        return Err(Error::budget("multisets in scan", total, budget));
    }
    let mut out = Vec::with_capacity(total as usize);
    for len in 1..=max_len {
        let mut level = multisets_of_length(width, len);
        level.sort_by(canonical_cmp);
        out.extend(level);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// The enumeration provably found every atom.
    Exact,
    /// Every atom of at most this length is listed.
    CompleteUpToLength(u32),
}

impl Certificate {
    pub fn covers(&self, len: u64) -> bool {
        match self {
            Certificate::Exact => true,
            Certificate::CompleteUpToLength(l) => len <= *l as u64,
        }
    }
}

/// A set of atoms over a ground set, sorted canonically and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomInventory {
    ground: GroundSet,
    atoms: Vec<Sequence>,
    certificate: Certificate,
}

impl AtomInventory {
    pub fn new(ground: GroundSet, mut atoms: Vec<Sequence>, certificate: Certificate) -> Self {
        atoms.sort_by(canonical_cmp);
        atoms.dedup();
        AtomInventory {
            ground,
            atoms,
            certificate,
        }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn atoms(&self) -> &[Sequence] {
        &self.atoms
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn max_len(&self) -> u64 {
        self.atoms.iter().map(Sequence::len).max().unwrap_or(0)
    }

    pub fn covers(&self, len: u64) -> bool {
        self.certificate.covers(len)
    }

    pub fn position(&self, atom: &Sequence) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }
}

/// How membership `1 in pi(S)` is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oracle {
    /// Sub-multiset DP for finite groups, balancing for the infinite dihedral group.
    Fast,
    /// Folding every ordering of the terms.
    Permutation,
}

/// `B(G0)` with memoized membership.
pub struct Monoid {
    ground: GroundSet,
    budgets: Budgets,
    oracle: Oracle,
    memo: RefCell<HashMap<Vec<u32>, bool>>,
}

impl Monoid {
    pub fn new(ground: GroundSet, budgets: Budgets) -> Self {
        Self::with_oracle(ground, budgets, Oracle::Fast)
    }

    pub fn with_oracle(ground: GroundSet, budgets: Budgets, oracle: Oracle) -> Self {
        Monoid {
            ground,
            budgets,
            oracle,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn budgets(&self) -> &Budgets {
        &self.budgets
    }

    fn check_width(&self, s: &Sequence) -> Result<()> {
        if s.width() != self.ground.len() {
            return Err(Error::GroundMismatch(s.width(), self.ground.len()));
        }
        Ok(())
    }

    pub fn is_product_one(&self, s: &Sequence) -> Result<bool> {
        if let Some(&v) = self.memo.borrow().get(s.counts()) {
            return Ok(v);
        }
        self.check_width(s)?;
        let v = match self.oracle {
            Oracle::Fast => is_product_one(&self.ground, s, &self.budgets)?,
            Oracle::Permutation => {
                s.is_empty()
                    || product_set_perm(&self.ground, s, &self.budgets)?.contains(self.ground.group().identity())
            }
        };
        self.memo.borrow_mut().insert(s.counts().to_vec(), v);
        Ok(v)
    }

    fn remember(&self, s: &Sequence, v: bool) {
        self.memo.borrow_mut().insert(s.counts().to_vec(), v);
    }

    /// All product-one sequences with `1 <= |S| <= max_len`, canonical order.
    /// Membership is evaluated in parallel and memoized.
    pub fn scan(&self, max_len: u32) -> Result<Vec<Sequence>> {
        let all = canonical_multisets(self.ground.len(), max_len, self.budgets.subsequences)?;
        let verdicts: Vec<Result<bool>> = match self.oracle {
            Oracle::Fast => {
                let (ground, budgets) = (&self.ground, &self.budgets);
                all.par_iter().map(|s| is_product_one(ground, s, budgets)).collect()
            }
            Oracle::Permutation => all.iter().map(|s| self.is_product_one(s)).collect(),
        };
        let mut out = Vec::new();
        for (s, v) in all.into_iter().zip(verdicts) {
            let v = v?;
            self.remember(&s, v);
            if v {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// `S` is nonempty, product-one, and admits no split into two nonempty product-one parts.
    pub fn is_atom(&self, s: &Sequence) -> Result<bool> {
        self.check_width(s)?;
        if !self.is_product_one(s)? {
            return Err(Error::Precondition(format!(
                "{} is not product-one",
                self.ground.format_sequence(s)
            )));
        }
        if s.is_empty() {
            return Ok(false);
        }
        if self.oracle == Oracle::Fast {
            let table = subproducts(&self.ground, s, &self.budgets)?;
            let lat = table.lattice();
            let full = lat.full_index();
            return Ok((1..full).all(|i| !(table.has_identity(i) && table.has_identity(lat.complement(i)))));
        }
        let lat = DivisorLattice::new(s, self.budgets.subsequences)?;
        let full = lat.full_index();
        for i in 1..full {
            let t = Sequence::from_counts(lat.counts_at(i))?;
            if self.is_product_one(&t)? && self.is_product_one(&s.subtract(&t)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Atomicity through memoized membership of every divisor.
    fn is_atom_memo(&self, s: &Sequence) -> Result<bool> {
        let lat = DivisorLattice::new(s, self.budgets.subsequences)?;
        let full = lat.full_index();
        for i in 1..full {
            let t = Sequence::from_counts(lat.counts_at(i))?;
            if self.is_product_one(&t)?
                && self.is_product_one(&Sequence::from_counts(lat.counts_at(lat.complement(i)))?)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `u | a` in `B(G0)`: `u` divides `a` in `F(G0)` and the cofactor is product-one.
    pub fn divides(&self, u: &Sequence, a: &Sequence) -> Result<bool> {
        Ok(u.divides(a)? && self.is_product_one(&a.subtract(u)?)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomMode {
    Exact,
    MaxLen(u32),
}

/// Enumerates atoms, BFS by length.
///
/// Abelian groups extend product-one-free sequences one element at a time
/// (every atom minus a term is product-one-free). Other groups test every
/// multiset up to the length cap; for a finite group every product-one
/// sequence longer than the group order splits, so the order is an exact cap.
/// Grounds of integers or of rotations use the cap from `integer_length_cap`.
pub fn enumerate_atoms(monoid: &Monoid, mode: AtomMode) -> Result<AtomInventory> {
    let ground = monoid.ground();
    let group = ground.group();
    let capped = |cap: Option<u32>| match (mode, cap) {
        (AtomMode::Exact, Some(c)) => Some((c, Certificate::Exact)),
        (AtomMode::MaxLen(l), Some(c)) if l >= c => Some((c, Certificate::Exact)),
        (AtomMode::MaxLen(l), _) => Some((l, Certificate::CompleteUpToLength(l))),
        (AtomMode::Exact, None) => None,
    };
    match group.kind() {
        GroupKind::InfiniteDihedral => {
            if mode == AtomMode::Exact {
                if let Some(inv) = dihedral::closed_form_atoms(ground)? {
                    return Ok(inv);
                }
            }
            let (cap, cert) = capped(integer_length_cap(ground)?).ok_or_else(|| {
                Error::Unsupported("exact atom enumeration needs a finite group, rotations or a closed form".into())
            })?;
            exhaustive_atoms(monoid, cap, cert)
        }
        GroupKind::Integers => {
            let (cap, cert) = capped(integer_length_cap(ground)?).expect("integer grounds have a cap");
            let inv = free_extension_atoms(monoid, Some(cap))?;
            Ok(AtomInventory::new(ground.clone(), inv.atoms().to_vec(), cert))
        }
        _ if group.is_abelian() => free_extension_atoms(
            monoid,
            match mode {
                AtomMode::Exact => None,
                AtomMode::MaxLen(l) => Some(l),
            },
        ),
        _ => {
            let order = group.order().expect("finite group") as u32;
            let (cap, cert) = match mode {
                AtomMode::Exact => (order, Certificate::Exact),
                AtomMode::MaxLen(l) if l >= order => (order, Certificate::Exact),
                AtomMode::MaxLen(l) => (l, Certificate::CompleteUpToLength(l)),
            };
            exhaustive_atoms(monoid, cap, cert)
        }
    }
}

/// Length cap for atoms over integers, or over rotations `a^k`: an atom with
/// terms in `[-n, p]` has length at most `p + n`. The cap is at least 1 so
/// that the identity is found. `None` when the ground holds a reflection.
pub fn integer_length_cap(ground: &GroundSet) -> Result<Option<u32>> {
    let (mut p, mut n) = (0u64, 0u64);
    for &e in ground.elements() {
        let k = match e {
            Element::Int(k) | Element::DihRot(k) => k,
            _ => return Ok(None),
        };
        if k > 0 {
            p = p.max(k.unsigned_abs());
        } else {
            n = n.max(k.unsigned_abs());
        }
    }
    u32::try_from((p + n).max(1))
        .map(Some)
        .map_err(|_| Error::Overflow("atom length cap"))
}

fn exhaustive_atoms(monoid: &Monoid, max_len: u32, certificate: Certificate) -> Result<AtomInventory> {
    let candidates = monoid.scan(max_len)?;
    let mut atoms = Vec::new();
    for s in candidates {
        if monoid.is_atom_memo(&s)? {
            atoms.push(s);
        }
    }
    Ok(AtomInventory::new(monoid.ground().clone(), atoms, certificate))
}

fn free_extension_atoms(monoid: &Monoid, cap: Option<u32>) -> Result<AtomInventory> {
    let width = monoid.ground().len();
    let mut frontier = vec![Sequence::empty(width)];
    let mut atoms = Vec::new();
    let mut visited: u128 = 0;
    let mut len = 0u32;
    let mut exhausted = false;
    while cap.is_none_or(|c| len < c) {
        len += 1;
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.support().last().copied().unwrap_or(0);
            for g in start..width {
                let mut ext = s.clone();
                ext.counts_mut()[g] += 1;
                visited += 1;
                if visited > monoid.budgets().subsequences {
                    return Err(Error::budget(
                        "product-one-free extensions",
                        visited,
                        monoid.budgets().subsequences,
                    ));
                }
                if monoid.is_product_one(&ext)? {
                    atoms.push(ext);
                } else if extension_stays_free(monoid, s, g)? {
                    next.push(ext);
                }
            }
        }
        if next.is_empty() {
            exhausted = true;
            break;
        }
        frontier = next;
    }
    let certificate = match cap {
        _ if exhausted => Certificate::Exact,
        Some(c) => Certificate::CompleteUpToLength(c),
        None => unreachable!("uncapped search ends only when exhausted"),
    };
    Ok(AtomInventory::new(monoid.ground().clone(), atoms, certificate))
}

/// `s` is product-one-free; checks that no `U g` with `U | s` is product-one.
fn extension_stays_free(monoid: &Monoid, s: &Sequence, g: usize) -> Result<bool> {
    let lat = DivisorLattice::new(s, monoid.budgets().subsequences)?;
    for i in 0..lat.size() {
        let mut t = Sequence::from_counts(lat.counts_at(i))?;
        t.counts_mut()[g] += 1;
        if monoid.is_product_one(&t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DavenportResult {
    Exact { value: u64 },
    LowerBound { value: u64, searched_len: u32 },
    Infinite { witness: String },
}

/// The large Davenport constant: the supremum of atom lengths.
pub fn davenport(monoid: &Monoid, max_len: u32) -> Result<DavenportResult> {
    let ground = monoid.ground();
    if ground.group().is_infinite_dihedral() {
        let report = dihedral::classify(ground)?;
        if let Some(family) = report.long_atom_family {
            return Ok(DavenportResult::Infinite { witness: family });
        }
        if let Some(inv) = dihedral::closed_form_atoms(ground)? {
            return Ok(DavenportResult::Exact { value: inv.max_len() });
        }
    }
    let exact_possible = ground.group().is_finite() || integer_length_cap(ground)?.is_some();
    if exact_possible {
        match enumerate_atoms(monoid, AtomMode::Exact) {
            Ok(inv) => return Ok(DavenportResult::Exact { value: inv.max_len() }),
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    }
    let inv = enumerate_atoms(monoid, AtomMode::MaxLen(max_len))?;
    Ok(match inv.certificate() {
        Certificate::Exact => DavenportResult::Exact { value: inv.max_len() },
        Certificate::CompleteUpToLength(l) => DavenportResult::LowerBound {
            value: inv.max_len(),
            searched_len: *l,
        },
    })
}

/// Factorizations of one sequence, as sorted lists of atom indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationSet {
    pub target: Sequence,
    pub factorizations: Vec<Vec<usize>>,
    pub lengths: Vec<u32>,
}

fn check_inventory(monoid: &Monoid, inv: &AtomInventory, len: u64) -> Result<()> {
    if inv.ground() != monoid.ground() {
        return Err(Error::Precondition(
            "inventory and monoid use different ground sets".into(),
        ));
    }
    if !inv.covers(len) {
        return Err(Error::Precondition(format!(
            "atom inventory {:?} does not cover length {len}",
            inv.certificate()
        )));
    }
    Ok(())
}

/// Peels atoms in index order, so each multiset of atoms is produced once.
pub fn factorizations(monoid: &Monoid, s: &Sequence, inv: &AtomInventory) -> Result<FactorizationSet> {
    check_inventory(monoid, inv, s.len())?;
    if !monoid.is_product_one(s)? {
        return Err(Error::Precondition(format!(
            "{} is not product-one",
            monoid.ground().format_sequence(s)
        )));
    }
    let mut out = Vec::new();
    let mut stack = Vec::new();
    peel(monoid, inv, s, 0, &mut stack, &mut out)?;
    let lengths: BTreeSet<u32> = out.iter().map(|z: &Vec<usize>| z.len() as u32).collect();
    Ok(FactorizationSet {
        target: s.clone(),
        factorizations: out,
        lengths: lengths.into_iter().collect(),
    })
}

fn peel(
    monoid: &Monoid,
    inv: &AtomInventory,
    rest: &Sequence,
    start: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    if rest.is_empty() {
        out.push(stack.clone());
        if out.len() as u128 > monoid.budgets().subsequences {
            return Err(Error::budget(
                "factorizations",
                out.len() as u128,
                monoid.budgets().subsequences,
            ));
        }
        return Ok(());
    }
    for (i, a) in inv.atoms().iter().enumerate().skip(start) {
        if a.divides(rest)? {
            let next = rest.subtract(a)?;
            if monoid.is_product_one(&next)? {
                stack.push(i);
                peel(monoid, inv, &next, i, stack, out)?;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// `d(z, z') = max(|z|, |z'|) - |gcd(z, z')|` for sorted atom-index lists.
pub fn distance(z: &[usize], w: &[usize]) -> u32 {
    let (mut i, mut j, mut common) = (0, 0, 0u32);
    while i < z.len() && j < w.len() {
        match z[i].cmp(&w[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    z.len().max(w.len()) as u32 - common
}

/// Least `N` connecting all factorizations by steps of distance at most `N`
/// (bottleneck spanning tree); 0 with at most one factorization.
pub fn catenary_degree(z: &FactorizationSet) -> u32 {
    let n = z.factorizations.len();
    if n <= 1 {
        return 0;
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push((distance(&z.factorizations[a], &z.factorizations[b]), a, b));
        }
    }
    edges.sort_unstable();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = n;
    for (d, a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
            if components == 1 {
                return d;
            }
        }
    }
    unreachable!("complete graph is connected")
}

/// Memoized sets of lengths: `L(S) = union over atoms A | S with S - A
/// product-one of L(S - A) + 1`.
pub struct Lengths<'a> {
    monoid: &'a Monoid,
    inv: &'a AtomInventory,
    memo: HashMap<Vec<u32>, BTreeSet<u32>>,
}

impl<'a> Lengths<'a> {
    pub fn new(monoid: &'a Monoid, inv: &'a AtomInventory) -> Result<Self> {
        if inv.ground() != monoid.ground() {
            return Err(Error::Precondition(
                "inventory and monoid use different ground sets".into(),
            ));
        }
        Ok(Lengths {
            monoid,
            inv,
            memo: HashMap::new(),
        })
    }

    pub fn of(&mut self, s: &Sequence) -> Result<BTreeSet<u32>> {
        if !self.inv.covers(s.len()) {
            return Err(Error::Precondition(format!(
                "atom inventory does not cover length {}",
                s.len()
            )));
        }
        if !self.monoid.is_product_one(s)? {
            return Err(Error::Precondition(format!(
                "{} is not product-one",
                self.monoid.ground().format_sequence(s)
            )));
        }
        self.rec(s)
    }

    fn rec(&mut self, s: &Sequence) -> Result<BTreeSet<u32>> {
        if s.is_empty() {
            return Ok(BTreeSet::from([0]));
        }
        if let Some(l) = self.memo.get(s.counts()) {
            return Ok(l.clone());
        }
        let mut out = BTreeSet::new();
        for a in self.inv.atoms() {
            if a.len() > s.len() {
                break;
            }
            if a.divides(s)? {
                let rest = s.subtract(a)?;
                if self.monoid.is_product_one(&rest)? {
                    out.extend(self.rec(&rest)?.into_iter().map(|l| l + 1));
                }
            }
        }
        self.memo.insert(s.counts().to_vec(), out.clone());
        Ok(out)
    }
}

/// A value known exactly within a scan bound, or only from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Bounded {
    ExactWithinBound { value: u32, bound: u32 },
    LowerBound { value: u32, bound: u32 },
}

impl Bounded {
    pub fn value(&self) -> u32 {
        match *self {
            Bounded::ExactWithinBound { value, .. } | Bounded::LowerBound { value, .. } => value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Bounded::ExactWithinBound { .. })
    }

    fn tag(value: u32, bound: u32, exact: bool) -> Self {
        if exact {
            Bounded::ExactWithinBound { value, bound }
        } else {
            Bounded::LowerBound { value, bound }
        }
    }
}

/// A minimal multiset of atoms whose product is divisible by a fixed atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bullet {
    pub atoms: Vec<usize>,
    pub product: Sequence,
}

/// Every minimal multiset of atoms (from the inventory, total length at
/// most `bound`) whose product `u` divides in `B(G0)`.
pub fn bullets(monoid: &Monoid, inv: &AtomInventory, u: &Sequence, bound: u32) -> Result<Vec<Bullet>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    let product = monoid.ground().empty_sequence();
    bullet_rec(monoid, inv, u, bound as u64, 0, &product, &mut stack, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn bullet_rec(
    monoid: &Monoid,
    inv: &AtomInventory,
    u: &Sequence,
    bound: u64,
    start: usize,
    product: &Sequence,
    stack: &mut Vec<usize>,
    out: &mut Vec<Bullet>,
) -> Result<()> {
    for (i, a) in inv.atoms().iter().enumerate().skip(start) {
        if product.len() + a.len() > bound {
            break;
        }
        let p = product.concat(a)?;
        stack.push(i);
        if monoid.divides(u, &p)? {
            let mut minimal = true;
            let mut distinct = stack.clone();
            distinct.dedup();
            for &b in &distinct {
                if monoid.divides(u, &p.subtract(&inv.atoms()[b])?)? {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                out.push(Bullet {
                    atoms: stack.clone(),
                    product: p,
                });
            }
        } else {
            bullet_rec(monoid, inv, u, bound, i, &p, stack, out)?;
        }
        stack.pop();
    }
    Ok(())
}

/// `omega(u)`, `tau(u)` and `t(u)` over one bounded scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameReport {
    pub omega: Bounded,
    pub tau: Bounded,
    pub tame: Bounded,
    /// No atom product within the bound is divisible by `u` except through `u` itself.
    pub prime_within_bound: bool,
}

/// `omega(u)`: the largest bullet size (1 for a prime).
pub fn omega_bound(monoid: &Monoid, inv: &AtomInventory, u: &Sequence, bound: u32) -> Result<Bounded> {
    let bs = bullets(monoid, inv, u, bound)?;
    let value = bs.iter().map(|b| b.atoms.len() as u32).max().unwrap_or(1).max(1);
    Ok(Bounded::tag(value, bound, inv.covers(bound as u64)))
}

/// `tau(u)` from the bullets other than `{u}`, and `t(u)` from a separate
/// scan over every product-one `a` with `|a| <= bound` divisible by `u`.
pub fn tame_bounds(monoid: &Monoid, inv: &AtomInventory, u: &Sequence, bound: u32) -> Result<TameReport> {
    check_inventory(monoid, inv, 0)?;
    if !monoid.is_product_one(u)? || !monoid.is_atom(u)? {
        return Err(Error::Precondition("tame bounds need an atom".into()));
    }
    let exact = inv.covers(bound as u64);
    let ui = inv
        .position(u)
        .ok_or_else(|| Error::Precondition("atom missing from the inventory".into()))?;
    let bs = bullets(monoid, inv, u, bound)?;
    let mut lengths = Lengths::new(monoid, inv)?;
    let mut omega = 1u32;
    let mut tau = 0u32;
    let mut nontrivial = false;
    for b in &bs {
        omega = omega.max(b.atoms.len() as u32);
        if b.atoms != [ui] {
            nontrivial = true;
            let rest = b.product.subtract(u)?;
            let min = *lengths
                .of(&rest)?
                .first()
                .expect("product-one rest has a factorization");
            tau = tau.max(min);
        }
    }
    let mut t = 0u32;
    for a in monoid.scan(bound)? {
        if !monoid.divides(u, &a)? {
            continue;
        }
        let z = factorizations(monoid, &a, inv)?;
        let with_u: Vec<&Vec<usize>> = z.factorizations.iter().filter(|f| f.contains(&ui)).collect();
        for f in &z.factorizations {
            if f.contains(&ui) {
                continue;
            }
            let best = with_u.iter().map(|g| distance(f, g)).min().expect("u divides a");
            t = t.max(best);
        }
    }
    Ok(TameReport {
        omega: Bounded::tag(omega, bound, exact),
        tau: Bounded::tag(tau, bound, exact),
        tame: Bounded::tag(t, bound, exact),
        prime_within_bound: !nontrivial,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRow {
    pub k: u32,
    pub rho: Option<u32>,
    pub lambda: Option<u32>,
    pub union: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Elasticity {
    /// `max L / min L` over the scan, reduced.
    Ratio {
        num: u32,
        den: u32,
        witness: String,
    },
    Unbounded {
        witness: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatenaryScan {
    pub value: u32,
    pub bound: u32,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomTameRow {
    pub atom: String,
    #[serde(flatten)]
    pub report: TameReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub bound: u32,
    pub max_k: u32,
    pub scanned: usize,
    pub delta: Vec<u32>,
    pub k_table: Vec<KRow>,
    pub elasticity: Elasticity,
    pub catenary: CatenaryScan,
    pub tame_table: Vec<AtomTameRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvariantOptions {
    pub bound: u32,
    pub max_k: u32,
    /// Sequences up to this length get full factorization sets for `c`.
    pub catenary_bound: u32,
    /// Scan bound for `omega`, `tau`, `t` per atom; skipped when `None`.
    pub tame_bound: Option<u32>,
}

/// Length invariants over every product-one `S` with `1 <= |S| <= bound`.
pub fn length_invariants(monoid: &Monoid, inv: &AtomInventory, opts: InvariantOptions) -> Result<InvariantReport> {
    check_inventory(monoid, inv, opts.bound as u64)?;
    let ground = monoid.ground();
    let scan = monoid.scan(opts.bound)?;
    let mut lengths = Lengths::new(monoid, inv)?;
    let mut delta = BTreeSet::new();
    let mut unions: BTreeMap<u32, BTreeSet<u32>> = (1..=opts.max_k).map(|k| (k, BTreeSet::new())).collect();
    let mut best: Option<(u32, u32, &Sequence)> = None;
    let mut catenary = CatenaryScan {
        value: 0,
        bound: opts.catenary_bound.min(opts.bound),
        witness: None,
    };
    for s in &scan {
        let l = lengths.of(s)?;
        let v: Vec<u32> = l.iter().copied().collect();
        delta.extend(v.windows(2).map(|w| w[1] - w[0]));
        for (&k, set) in unions.iter_mut() {
            if l.contains(&k) {
                set.extend(&v);
            }
        }
        let (lo, hi) = (v[0], *v.last().expect("nonempty"));
        if best.is_none_or(|(n, d, _)| (hi as u64) * (d as u64) > (n as u64) * (lo as u64)) {
            best = Some((hi, lo, s));
        }
        if s.len() <= catenary.bound as u64 {
            let z = factorizations(monoid, s, inv)?;
            let c = catenary_degree(&z);
            if c > catenary.value {
                catenary.value = c;
                catenary.witness = Some(ground.format_sequence(s));
            }
        }
    }
    let elasticity = if ground.group().is_infinite_dihedral()
        && !dihedral::classify_locally_tame(&dihedral::DihedralGround::from_ground(ground)?)
    {
        let report = dihedral::classify(ground)?;
        Elasticity::Unbounded {
            witness: report.elasticity_family.expect("not locally tame"),
        }
    } else {
        match best {
            Some((n, d, s)) => {
                let g = dihedral::gcd(n as u64, d as u64) as u32;
                Elasticity::Ratio {
                    num: n / g,
                    den: d / g,
                    witness: ground.format_sequence(s),
                }
            }
            None => Elasticity::Ratio {
                num: 1,
                den: 1,
                witness: ground.format_sequence(&ground.empty_sequence()),
            },
        }
    };
    let k_table = unions
        .into_iter()
        .map(|(k, set)| KRow {
            k,
            rho: set.last().copied(),
            lambda: set.first().copied(),
            union: set.into_iter().collect(),
        })
        .collect();
    let mut tame_table = Vec::new();
    if let Some(tb) = opts.tame_bound {
        for u in inv.atoms().iter().filter(|a| a.len() <= tb as u64) {
            tame_table.push(AtomTameRow {
                atom: ground.format_sequence(u),
                report: tame_bounds(monoid, inv, u, tb)?,
            });
        }
    }
    Ok(InvariantReport {
        bound: opts.bound,
        max_k: opts.max_k,
        scanned: scan.len(),
        delta: delta.into_iter().collect(),
        k_table,
        elasticity,
        catenary,
        tame_table,
    })
}

/// `pi(S)` lies in the commutator subgroup of the ambient group.
pub fn bstar_membership(monoid: &Monoid, s: &Sequence) -> Result<bool> {
    let ground = monoid.ground();
    let group = ground.group();
    match group.kind() {
        // the commutator subgroup is the even rotations; pi(S) consists of
        // rotations iff the reflection count is even, all of one exponent parity
        GroupKind::InfiniteDihedral => {
            let mut refl = 0u64;
            let mut parity = 0i64;
            for (i, &m) in s.counts().iter().enumerate() {
                match ground.element(i) {
                    Element::DihRefl(k) => {
                        refl += m as u64;
                        parity += (k.rem_euclid(2)) * m as i64 % 2;
                    }
                    Element::DihRot(k) => parity += (k.rem_euclid(2)) * m as i64 % 2,
                    other => return Err(Error::ForeignElement(other)),
                }
            }
            Ok(refl.is_multiple_of(2) && parity % 2 == 0)
        }
        GroupKind::Integers => Ok(product::integer_sum(ground, s)? == 0),
        _ => {
            let comm: BTreeSet<Element> = group.commutator_subgroup()?.into_iter().collect();
            let pi = product_set_dp(ground, s, monoid.budgets())?;
            Ok(pi.elements().iter().all(|e| comm.contains(e)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeResult {
    NoCounterexample {
        bound: u32,
        quotients_checked: usize,
    },
    Counterexample {
        t: Sequence,
        s1: Sequence,
        s2: Sequence,
        /// The power of `T` found in `B(G0)`.
        powers: Vec<u32>,
        bound: u32,
        quotients_checked: usize,
        counterexamples_found: usize,
    },
}

/// Walks quotients `T = S1 - S2` (`S2 | S1`, both product-one, `|S1| <= bound`)
/// with `T` not product-one; reports the canonically least `T` accepted by `test`.
fn quotient_probe(
    monoid: &Monoid,
    bound: u32,
    mut test: impl FnMut(&Sequence) -> Result<Option<Vec<u32>>>,
) -> Result<ProbeResult> {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut best: Option<(Sequence, Sequence, Sequence, Vec<u32>)> = None;
    let mut found = 0usize;
    for s1 in monoid.scan(bound)? {
        let lat = DivisorLattice::new(&s1, monoid.budgets().subsequences)?;
        for i in 0..lat.full_index() {
            let s2 = Sequence::from_counts(lat.counts_at(i))?;
            if !monoid.is_product_one(&s2)? {
                continue;
            }
            let t = s1.subtract(&s2)?;
            if !seen.insert(t.counts().to_vec()) || monoid.is_product_one(&t)? {
                continue;
            }
            if let Some(powers) = test(&t)? {
                found += 1;
                if best
                    .as_ref()
                    .is_none_or(|(bt, ..)| canonical_cmp(&t, bt) == Ordering::Less)
                {
                    best = Some((t, s1.clone(), s2, powers));
                }
            }
        }
    }
    Ok(match best {
        None => ProbeResult::NoCounterexample {
            bound,
            quotients_checked: seen.len(),
        },
        Some((t, s1, s2, powers)) => ProbeResult::Counterexample {
            t,
            s1,
            s2,
            powers,
            bound,
            quotients_checked: seen.len(),
            counterexamples_found: found,
        },
    })
}

/// Seminormality: `T` not product-one but `T^[2]` and `T^[3]` are.
pub fn seminormality_probe(monoid: &Monoid, bound: u32) -> Result<ProbeResult> {
    quotient_probe(monoid, bound, |t| {
        Ok((monoid.is_product_one(&t.power(2)?)? && monoid.is_product_one(&t.power(3)?)?).then(|| vec![2, 3]))
    })
}

/// Root closure: `T` not product-one but `T^[n]` is for some `2 <= n <= max_power`.
pub fn root_closure_probe(monoid: &Monoid, bound: u32, max_power: u32) -> Result<ProbeResult> {
    quotient_probe(monoid, bound, |t| {
        for n in 2..=max_power {
            if monoid.is_product_one(&t.power(n)?)? {
                return Ok(Some(vec![n]));
            }
        }
        Ok(None)
    })
}

/// Searches a product-one `T` avoiding `g` with `|T| <= bound` and `S T` product-one.
pub fn in_localization(monoid: &Monoid, s: &Sequence, g: Element, bound: u32) -> Result<Option<Sequence>> {
    let ground = monoid.ground();
    let gi = ground
        .index_of(g)
        .ok_or_else(|| Error::NotInGround(ground.group().format_element(g)))?;
    if monoid.is_product_one(s)? {
        return Ok(Some(ground.empty_sequence()));
    }
    for t in canonical_multisets(ground.len(), bound, monoid.budgets().subsequences)? {
        if t.get(gi) == 0 && monoid.is_product_one(&t)? && monoid.is_product_one(&s.concat(&t)?)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondensedSubset {
    pub elements: Vec<Element>,
    pub certificate: Certificate,
}

/// Elements lying in the support of some product-one sequence: torsion
/// elements at once, the rest by a bounded scan.
pub fn condensed_subset(monoid: &Monoid, bound: u32) -> Result<CondensedSubset> {
    let ground = monoid.ground();
    let group = ground.group();
    let mut found = vec![false; ground.len()];
    for (i, &g) in ground.elements().iter().enumerate() {
        found[i] = group.element_order(g)?.is_some();
    }
    if found.iter().any(|f| !f) {
        for s in monoid.scan(bound)? {
            for i in s.support() {
                found[i] = true;
            }
        }
    }
    let complete = found.iter().all(|&f| f);
    Ok(CondensedSubset {
        elements: (0..ground.len())
            .filter(|&i| found[i])
            .map(|i| ground.element(i))
            .collect(),
        certificate: if complete {
            Certificate::Exact
        } else {
            Certificate::CompleteUpToLength(bound)
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FinitaryResult {
    Found { witnesses: Vec<Sequence>, bound: u32 },
    NotFound { minimal_supports: usize, bound: u32 },
}

/// One product-one sequence per minimal support among the scanned supports,
/// when there are at most `n_max` of them.
pub fn finitary_witness(monoid: &Monoid, n_max: usize, bound: u32) -> Result<FinitaryResult> {
    let mut reps: BTreeMap<Vec<usize>, Sequence> = BTreeMap::new();
    for s in monoid.scan(bound)? {
        reps.entry(s.support()).or_insert(s);
    }
    let supports: Vec<&Vec<usize>> = reps.keys().collect();
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.contains(x));
    let minimal: Vec<&Vec<usize>> = supports
        .iter()
        .filter(|&&a| !supports.iter().any(|&b| b != a && subset(b, a)))
        .copied()
        .collect();
    if minimal.len() > n_max {
        return Ok(FinitaryResult::NotFound {
            minimal_supports: minimal.len(),
            bound,
        });
    }
    let mut witnesses: Vec<Sequence> = minimal.iter().map(|k| reps[*k].clone()).collect();
    witnesses.sort_by(canonical_cmp);
    Ok(FinitaryResult::Found { witnesses, bound })
}

//! Group arithmetic for finite groups given by a Cayley table, the integers
//! and the infinite dihedral group `<a, t : t^2 = 1, a t = t a^-1>`.
//!
//! Elements of the infinite dihedral group are kept in normal form: a
//! rotation `a^k` is `DihRot(k)` and a reflection `a^k t` is `DihRefl(k)`.
//! The finite dihedral group of order `2n` uses the same names with
//! exponents reduced modulo `n`, but is stored as a Cayley table.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// A group element. Variants never mix inside one [`GroupSpec`].
///
/// The derived ordering is the canonical element order: finite indices
/// ascending, integers ascending, every rotation before every reflection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    FiniteIdx(u32),
    Int(i64),
    DihRot(i64),
    DihRefl(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    FiniteCayley,
    Cyclic(u32),
    FiniteDihedral(u32),
    Elementary2(u32),
    Integers,
    InfiniteDihedral,
}

impl GroupKind {
    pub fn label(&self) -> &'static str {
        match self {
            GroupKind::FiniteCayley => "finite-cayley",
            GroupKind::Cyclic(_) => "cyclic",
            GroupKind::FiniteDihedral(_) => "finite-dihedral",
            GroupKind::Elementary2(_) => "elementary-2",
            GroupKind::Integers => "integers",
            GroupKind::InfiniteDihedral => "infinite-dihedral",
        }
    }
}

/// Validated multiplication table of a finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyTable {
    names: Vec<String>,
    table: Vec<u32>,
    identity: u32,
    inverses: Vec<u32>,
}

impl CayleyTable {
    pub fn new(names: Vec<String>, rows: Vec<Vec<u32>>, identity: Option<u32>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty element list".into()));
        }
        if n > u32::MAX as usize / 2 {
            return Err(Error::InvalidTable("group too large".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidTable(format!("table must be {n}x{n}")));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != n {
            return Err(Error::InvalidTable("element names are not distinct".into()));
        }
        let table: Vec<u32> = rows.into_iter().flatten().collect();
        if let Some(bad) = table.iter().find(|&&x| x as usize >= n) {
            return Err(Error::InvalidTable(format!("entry {bad} out of range")));
        }
        for i in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for j in 0..n {
                let r = table[i * n + j] as usize;
                let c = table[j * n + i] as usize;
                if row_seen[r] || col_seen[c] {
                    return Err(Error::InvalidTable(format!("not a Latin square (row/column {i})")));
                }
                row_seen[r] = true;
                col_seen[c] = true;
            }
        }
        let is_identity = |e: usize| (0..n).all(|j| table[e * n + j] as usize == j && table[j * n + e] as usize == j);
        let identity = match identity {
            Some(e) => {
                if e as usize >= n || !is_identity(e as usize) {
                    return Err(Error::InvalidTable(format!("index {e} is not a two-sided identity")));
                }
                e
            }
            None => (0..n)
                .find(|&e| is_identity(e))
                .ok_or_else(|| Error::InvalidTable("no identity element".into()))? as u32,
        };
        let mut inverses = vec![0u32; n];
        for (i, inv) in inverses.iter_mut().enumerate() {
            let j = (0..n)
                .find(|&j| table[i * n + j] == identity && table[j * n + i] == identity)
                .ok_or_else(|| Error::InvalidTable(format!("element {i} has no two-sided inverse")))?;
            *inv = j as u32;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a * n + b] as usize;
                for c in 0..n {
                    let bc = table[b * n + c] as usize;
                    if table[ab * n + c] != table[a * n + bc] {
                        return Err(Error::InvalidTable(format!(
                            "multiplication is not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(CayleyTable {
            names,
            table,
            identity,
            inverses,
        })
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.names.len() + b as usize]
    }

    #[inline]
    pub fn inverse(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.names.len()).map(|r| r.to_vec()).collect()
    }
}

/// A group together with its arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    kind: GroupKind,
    cayley: Option<CayleyTable>,
}

impl GroupSpec {
    pub fn cyclic(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("cyclic group needs n >= 1".into()));
        }
        let names = (0..n).map(|i| power_name("g", i as i64)).collect();
        let rows = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Ok(GroupSpec {
            kind: GroupKind::Cyclic(n),
            cayley: Some(CayleyTable::new(names, rows, Some(0))?),
        })
    }

    /// Dihedral group of order `2n`; index `i < n` is `a^i`, index `n + i` is `a^i t`.
    pub fn finite_dihedral(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("dihedral group needs n >= 1".into()));
        }
        let m = 2 * n;
        let names = (0..m)
            .map(|x| {
                if x < n {
                    power_name("a", x as i64)
                } else {
                    reflection_name((x - n) as i64)
                }
            })
            .collect();
        let rows = (0..m)
            .map(|x| {
                (0..m)
                    .map(|y| {
                        let (xr, xi) = (x >= n, x % n);
                        let (yr, yi) = (y >= n, y % n);
                        // Rot.Rot = Rot(+), Rot.Refl = Refl(+), Refl.Rot = Refl(-), Refl.Refl = Rot(-)
                        let exp = if xr { (xi + n - yi) % n } else { (xi + yi) % n };
                        if xr != yr {
                            n + exp
                        } else {
                            exp
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(GroupSpec {
            kind: GroupKind::FiniteDihedral(n),
            cayley: Some(CayleyTable::new(names, rows, Some(0))?),
        })
    }

    /// Elementary abelian 2-group of rank `r`; index bits are coordinates.
    pub fn elementary_2(r: u32) -> Result<Self> {
        if r > 10 {
            return Err(Error::InvalidTable(
                "elementary-2 rank above 10 is not supported".into(),
            ));
        }
        let n = 1u32 << r;
        let names = (0..n)
            .map(|x| {
                if x == 0 {
                    "e".to_string()
                } else {
                    (0..r)
                        .filter(|b| x >> b & 1 == 1)
                        .map(|b| format!("b{}", b + 1))
                        .collect::<Vec<_>>()
                        .join("*")
                }
            })
            .collect();
        let rows = (0..n).map(|i| (0..n).map(|j| i ^ j).collect()).collect();
        Ok(GroupSpec {
            kind: GroupKind::Elementary2(r),
            cayley: Some(CayleyTable::new(names, rows, Some(0))?),
        })
    }

    pub fn from_cayley(names: Vec<String>, rows: Vec<Vec<u32>>, identity: Option<u32>) -> Result<Self> {
        Ok(GroupSpec {
            kind: GroupKind::FiniteCayley,
            cayley: Some(CayleyTable::new(names, rows, identity)?),
        })
    }

    pub fn integers() -> Self {
        GroupSpec {
            kind: GroupKind::Integers,
            cayley: None,
        }
    }

    pub fn infinite_dihedral() -> Self {
        GroupSpec {
            kind: GroupKind::InfiniteDihedral,
            cayley: None,
        }
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn cayley(&self) -> Option<&CayleyTable> {
        self.cayley.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.cayley.is_some()
    }

    pub fn is_infinite_dihedral(&self) -> bool {
        self.kind == GroupKind::InfiniteDihedral
    }

    pub fn order(&self) -> Option<usize> {
        self.cayley.as_ref().map(CayleyTable::order)
    }

    pub fn is_abelian(&self) -> bool {
        match &self.cayley {
            Some(t) => {
                let n = t.order() as u32;
                (0..n).all(|a| (0..n).all(|b| t.mul(a, b) == t.mul(b, a)))
            }
            None => self.kind == GroupKind::Integers,
        }
    }

    pub fn identity(&self) -> Element {
        match (&self.kind, &self.cayley) {
            (_, Some(t)) => Element::FiniteIdx(t.identity()),
            (GroupKind::Integers, None) => Element::Int(0),
            _ => Element::DihRot(0),
        }
    }

    pub fn contains(&self, a: Element) -> bool {
        match (a, &self.cayley, &self.kind) {
            (Element::FiniteIdx(i), Some(t), _) => (i as usize) < t.order(),
            (Element::Int(_), None, GroupKind::Integers) => true,
            (Element::DihRot(_) | Element::DihRefl(_), None, GroupKind::InfiniteDihedral) => true,
            _ => false,
        }
    }

    fn check(&self, a: Element) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::ForeignElement(a))
        }
    }

    pub fn mul(&self, a: Element, b: Element) -> Result<Element> {
        use Element::*;
        let ovf = || Error::Overflow("group multiplication");
        let out = match (a, b) {
            (FiniteIdx(x), FiniteIdx(y)) => {
                self.check(a)?;
                self.check(b)?;
                FiniteIdx(self.cayley.as_ref().expect("finite").mul(x, y))
            }
            (Int(x), Int(y)) => {
                self.check(a)?;
                Int(x.checked_add(y).ok_or_else(ovf)?)
            }
            (DihRot(x), DihRot(y)) => DihRot(x.checked_add(y).ok_or_else(ovf)?),
            (DihRot(x), DihRefl(y)) => DihRefl(x.checked_add(y).ok_or_else(ovf)?),
            (DihRefl(x), DihRot(y)) => DihRefl(x.checked_sub(y).ok_or_else(ovf)?),
            (DihRefl(x), DihRefl(y)) => DihRot(x.checked_sub(y).ok_or_else(ovf)?),
            _ => return Err(Error::MixedVariants(a, b)),
        };
        if matches!(out, DihRot(_) | DihRefl(_)) {
            self.check(a)?;
        }
        Ok(out)
    }

    pub fn inverse(&self, a: Element) -> Result<Element> {
        self.check(a)?;
        let ovf = || Error::Overflow("inverse");
        Ok(match a {
            Element::FiniteIdx(x) => Element::FiniteIdx(self.cayley.as_ref().expect("finite").inverse(x)),
            Element::Int(k) => Element::Int(k.checked_neg().ok_or_else(ovf)?),
            Element::DihRot(k) => Element::DihRot(k.checked_neg().ok_or_else(ovf)?),
            Element::DihRefl(k) => Element::DihRefl(k),
        })
    }

    /// Multiplies a word of elements left to right.
    pub fn product<'a>(&self, word: impl IntoIterator<Item = &'a Element>) -> Result<Element> {
        word.into_iter().try_fold(self.identity(), |acc, &g| self.mul(acc, g))
    }

    /// Order of `a`, or `None` when `a` has infinite order.
    pub fn element_order(&self, a: Element) -> Result<Option<u64>> {
        self.check(a)?;
        Ok(match a {
            Element::FiniteIdx(x) => {
                let t = self.cayley.as_ref().expect("finite");
                let mut acc = x;
                let mut k = 1u64;
                while acc != t.identity() {
                    acc = t.mul(acc, x);
                    k += 1;
                }
                Some(k)
            }
            Element::Int(0) | Element::DihRot(0) => Some(1),
            Element::Int(_) | Element::DihRot(_) => None,
            Element::DihRefl(_) => Some(2),
        })
    }

    pub fn elements(&self) -> Result<Vec<Element>> {
        match &self.cayley {
            Some(t) => Ok((0..t.order() as u32).map(Element::FiniteIdx).collect()),
            None => Err(Error::Unsupported(format!(
                "cannot list the elements of the infinite group {}",
                self.kind.label()
            ))),
        }
    }

    /// Subgroup generated by all commutators `g^-1 h^-1 g h`, sorted.
    pub fn commutator_subgroup(&self) -> Result<Vec<Element>> {
        let t = self.cayley.as_ref().ok_or_else(|| {
            Error::Unsupported(format!(
                "commutator subgroup of {} is only available as a membership predicate",
                self.kind.label()
            ))
        })?;
        let n = t.order() as u32;
        let mut gens = BTreeSet::new();
        for g in 0..n {
            for h in 0..n {
                let c = t.mul(t.mul(t.inverse(g), t.inverse(h)), t.mul(g, h));
                gens.insert(c);
            }
        }
        let mut closure: BTreeSet<u32> = BTreeSet::from([t.identity()]);
        let mut frontier: Vec<u32> = vec![t.identity()];
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = t.mul(x, g);
                if closure.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Ok(closure.into_iter().map(Element::FiniteIdx).collect())
    }

    /// Membership in the commutator subgroup; for the infinite dihedral group
    /// this is the subgroup of even rotations.
    pub fn in_commutator_subgroup(&self, a: Element) -> Result<bool> {
        self.check(a)?;
        match a {
            Element::FiniteIdx(_) => Ok(self.commutator_subgroup()?.contains(&a)),
            Element::Int(k) => Ok(k == 0),
            Element::DihRot(k) => Ok(k % 2 == 0),
            Element::DihRefl(_) => Ok(false),
        }
    }

    pub fn format_element(&self, a: Element) -> String {
        match a {
            Element::FiniteIdx(i) => match &self.cayley {
                Some(t) if (i as usize) < t.order() => t.names()[i as usize].clone(),
                _ => format!("#{i}"),
            },
            Element::Int(k) => k.to_string(),
            Element::DihRot(k) => power_name("a", k),
            Element::DihRefl(k) => reflection_name(k),
        }
    }

    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty element".into()));
        }
        match &self.kind {
            GroupKind::Integers => text
                .parse::<i64>()
                .map(Element::Int)
                .map_err(|_| Error::Parse(format!("`{text}` is not a decimal integer"))),
            GroupKind::InfiniteDihedral | GroupKind::FiniteDihedral(_) => self.parse_word(text, |sym, k| match sym {
                "a" => Ok(Element::DihRot(k)),
                "t" => Ok(if k.rem_euclid(2) == 0 {
                    Element::DihRot(0)
                } else {
                    Element::DihRefl(0)
                }),
                _ => Err(Error::UnknownElement(sym.to_string())),
            }),
            GroupKind::Cyclic(n) => {
                if let Some(i) = self.lookup_name(text) {
                    return Ok(i);
                }
                let n = *n as i64;
                self.parse_word(text, |sym, k| match sym {
                    "g" => Ok(Element::FiniteIdx(k.rem_euclid(n) as u32)),
                    _ => Err(Error::UnknownElement(sym.to_string())),
                })
            }
            GroupKind::Elementary2(r) => {
                if let Some(i) = self.lookup_name(text) {
                    return Ok(i);
                }
                let r = *r;
                self.parse_word(text, |sym, k| {
                    let bit = sym
                        .strip_prefix('b')
                        .and_then(|s| s.parse::<u32>().ok())
                        .filter(|&b| b >= 1 && b <= r)
                        .ok_or_else(|| Error::UnknownElement(sym.to_string()))?;
                    Ok(Element::FiniteIdx(if k.rem_euclid(2) == 1 {
                        1 << (bit - 1)
                    } else {
                        0
                    }))
                })
            }
            GroupKind::FiniteCayley => self
                .lookup_name(text)
                .or_else(|| (text == "e" || text == "1").then(|| self.identity()))
                .ok_or_else(|| Error::UnknownElement(text.to_string())),
        }
    }

    fn lookup_name(&self, text: &str) -> Option<Element> {
        let t = self.cayley.as_ref()?;
        t.names()
            .iter()
            .position(|n| n == text)
            .map(|i| Element::FiniteIdx(i as u32))
    }

    /// Parses `f1*f2*...` where each factor is `e`, `1`, `sym` or `sym^K`;
    /// `gen(sym, K)` yields the group element for one factor.
    fn parse_word(&self, text: &str, gen: impl Fn(&str, i64) -> Result<Element>) -> Result<Element> {
        let mut acc = self.identity();
        for factor in text.split('*') {
            let factor = factor.trim();
            let el = if factor == "e" || factor == "1" {
                self.identity()
            } else {
                let (sym, k) = match factor.split_once('^') {
                    Some((s, k)) => {
                        let k = k
                            .trim()
                            .trim_start_matches('(')
                            .trim_end_matches(')')
                            .parse::<i64>()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?;
                        (s.trim(), k)
                    }
                    None => (factor, 1),
                };
                if sym.is_empty() {
                    return Err(Error::Parse(format!("missing symbol in `{text}`")));
                }
                let el = gen(sym, k)?;
                self.reduce(el)?
            };
            acc = self.mul(acc, el)?;
        }
        Ok(acc)
    }

    /// Maps dihedral normal forms into the Cayley indices of a finite dihedral group.
    fn reduce(&self, el: Element) -> Result<Element> {
        match (&self.kind, el) {
            (GroupKind::FiniteDihedral(n), Element::DihRot(k)) => {
                Ok(Element::FiniteIdx(k.rem_euclid(*n as i64) as u32))
            }
            (GroupKind::FiniteDihedral(n), Element::DihRefl(k)) => {
                Ok(Element::FiniteIdx(*n + k.rem_euclid(*n as i64) as u32))
            }
            _ => Ok(el),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("group document: {e}")))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("group document needs a string field `kind`".into()))?;
        let uint = |key: &str| -> Result<u32> {
            v.get(key)
                .and_then(Value::as_u64)
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::Parse(format!("`{kind}` needs a non-negative integer field `{key}`")))
        };
        match kind {
            "cyclic" => Self::cyclic(uint("n")?),
            "finite-dihedral" => Self::finite_dihedral(uint("n")?),
            "elementary-2" => Self::elementary_2(uint("r")?),
            "integers" => Ok(Self::integers()),
            "infinite-dihedral" => Ok(Self::infinite_dihedral()),
            "finite-cayley" => {
                let names: Vec<String> = serde_json::from_value(
                    v.get("elements")
                        .cloned()
                        .ok_or_else(|| Error::Parse("missing `elements`".into()))?,
                )
                .map_err(|e| Error::Parse(format!("`elements`: {e}")))?;
                let rows: Vec<Vec<u32>> = serde_json::from_value(
                    v.get("table")
                        .cloned()
                        .ok_or_else(|| Error::Parse("missing `table`".into()))?,
                )
                .map_err(|e| Error::Parse(format!("`table`: {e}")))?;
                let identity = match v.get("identity") {
                    None | Some(Value::Null) => None,
                    Some(x) => Some(
                        x.as_u64()
                            .and_then(|x| u32::try_from(x).ok())
                            .ok_or_else(|| Error::Parse("`identity` must be an index".into()))?,
                    ),
                };
                Self::from_cayley(names, rows, identity)
            }
            other => Err(Error::Parse(format!("unknown group kind `{other}`"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.kind {
            GroupKind::Cyclic(n) | GroupKind::FiniteDihedral(n) => json!({"kind": self.kind.label(), "n": n}),
            GroupKind::Elementary2(r) => json!({"kind": self.kind.label(), "r": r}),
            GroupKind::Integers | GroupKind::InfiniteDihedral => json!({"kind": self.kind.label()}),
            GroupKind::FiniteCayley => {
                let t = self.cayley.as_ref().expect("finite");
                json!({
                    "kind": "finite-cayley",
                    "elements": t.names(),
                    "table": t.rows(),
                    "identity": t.identity(),
                })
            }
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GroupKind::Cyclic(n) => write!(f, "C_{n}"),
            GroupKind::FiniteDihedral(n) => write!(f, "D_{}", 2 * n),
            GroupKind::Elementary2(r) => write!(f, "C_2^{r}"),
            GroupKind::Integers => write!(f, "Z"),
            GroupKind::InfiniteDihedral => write!(f, "D_inf"),
            GroupKind::FiniteCayley => write!(f, "G(order {})", self.order().unwrap_or(0)),
        }
    }
}

fn power_name(sym: &str, k: i64) -> String {
    match k {
        0 => "e".to_string(),
        1 => sym.to_string(),
        _ => format!("{sym}^{k}"),
    }
}

fn reflection_name(k: i64) -> String {
    match k {
        0 => "t".to_string(),
        1 => "a*t".to_string(),
        _ => format!("a^{k}*t"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Element::*;

    fn dinf() -> GroupSpec {
        GroupSpec::infinite_dihedral()
    }

    #[test]
    fn dihedral_relations() {
        let g = dinf();
        assert_eq!(g.mul(DihRot(1), DihRefl(0)).unwrap(), DihRefl(1));
        assert_eq!(g.mul(DihRefl(0), DihRot(1)).unwrap(), DihRefl(-1));
        assert_eq!(g.mul(DihRefl(3), DihRefl(3)).unwrap(), DihRot(0));
        // a t = t a^-1
        let lhs = g.mul(DihRot(1), DihRefl(0)).unwrap();
        let rhs = g.mul(DihRefl(0), DihRot(-1)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn identity_and_inverse() {
        for g in [GroupSpec::cyclic(6).unwrap(), GroupSpec::finite_dihedral(4).unwrap()] {
            let e = g.identity();
            for a in g.elements().unwrap() {
                assert_eq!(g.mul(e, a).unwrap(), a);
                assert_eq!(g.mul(a, g.inverse(a).unwrap()).unwrap(), e);
            }
        }
        let d = dinf();
        assert_eq!(d.inverse(DihRot(5)).unwrap(), DihRot(-5));
        assert_eq!(d.inverse(DihRefl(7)).unwrap(), DihRefl(7));
    }

    #[test]
    fn cyclic_inverse_scans_row() {
        let g = GroupSpec::cyclic(6).unwrap();
        let t = g.cayley().unwrap();
        // generator g = index 1 has order 6; its inverse is g^5
        let row_scan = (0..6).find(|&j| t.mul(1, j) == t.identity()).unwrap();
        assert_eq!(row_scan, 5);
        assert_eq!(g.inverse(FiniteIdx(1)).unwrap(), FiniteIdx(5));
        assert_eq!(g.element_order(FiniteIdx(1)).unwrap(), Some(6));
    }

    #[test]
    fn overflow_is_an_error() {
        let d = dinf();
        assert!(matches!(d.mul(DihRot(i64::MAX), DihRot(1)), Err(Error::Overflow(_))));
        assert!(matches!(d.inverse(DihRot(i64::MIN)), Err(Error::Overflow(_))));
        let z = GroupSpec::integers();
        assert!(matches!(z.inverse(Int(i64::MIN)), Err(Error::Overflow(_))));
    }

    #[test]
    fn mixed_variants_rejected() {
        let d = dinf();
        assert!(matches!(d.mul(DihRot(1), Int(2)), Err(Error::MixedVariants(..))));
        assert!(d.mul(FiniteIdx(0), FiniteIdx(0)).is_err());
    }

    #[test]
    fn commutator_subgroups() {
        let c = GroupSpec::cyclic(5).unwrap();
        assert_eq!(c.commutator_subgroup().unwrap(), vec![FiniteIdx(0)]);
        let e = GroupSpec::elementary_2(3).unwrap();
        assert_eq!(e.commutator_subgroup().unwrap(), vec![FiniteIdx(0)]);
        let s3 = GroupSpec::finite_dihedral(3).unwrap();
        assert_eq!(
            s3.commutator_subgroup().unwrap(),
            vec![FiniteIdx(0), FiniteIdx(1), FiniteIdx(2)]
        );
        // D_8: commutator subgroup is {e, a^2}
        let d8 = GroupSpec::finite_dihedral(4).unwrap();
        assert_eq!(d8.commutator_subgroup().unwrap(), vec![FiniteIdx(0), FiniteIdx(2)]);
        assert!(dinf().commutator_subgroup().is_err());
        assert!(dinf().in_commutator_subgroup(DihRot(-4)).unwrap());
        assert!(!dinf().in_commutator_subgroup(DihRot(3)).unwrap());
    }

    #[test]
    fn commutator_subgroup_elements_are_products_of_commutators() {
        let g = GroupSpec::finite_dihedral(5).unwrap();
        let t = g.cayley().unwrap();
        let n = t.order() as u32;
        let comms: BTreeSet<u32> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| t.mul(t.mul(t.inverse(a), t.inverse(b)), t.mul(a, b)))
            .collect();
        // products of up to n commutators
        let mut prods: BTreeSet<u32> = BTreeSet::from([t.identity()]);
        for _ in 0..n {
            let next: BTreeSet<u32> = prods
                .iter()
                .flat_map(|&p| comms.iter().map(move |&c| (p, c)))
                .map(|(p, c)| t.mul(p, c))
                .chain(prods.iter().copied())
                .collect();
            prods = next;
        }
        let sub: BTreeSet<u32> = g
            .commutator_subgroup()
            .unwrap()
            .into_iter()
            .map(|e| match e {
                FiniteIdx(i) => i,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(sub, prods);
    }

    #[test]
    fn cayley_validation() {
        let names = vec!["e".to_string(), "x".to_string()];
        assert!(GroupSpec::from_cayley(names.clone(), vec![vec![0, 1], vec![1, 0]], None).is_ok());
        // not Latin
        assert!(matches!(
            GroupSpec::from_cayley(names.clone(), vec![vec![0, 1], vec![1, 1]], None),
            Err(Error::InvalidTable(_))
        ));
        // Latin square without identity
        assert!(matches!(
            GroupSpec::from_cayley(
                vec!["p".into(), "q".into(), "r".into()],
                vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]],
                None
            ),
            Err(Error::InvalidTable(_))
        ));
        // wrong declared identity
        assert!(GroupSpec::from_cayley(names, vec![vec![0, 1], vec![1, 0]], Some(1)).is_err());
        // Latin square with identity that is not associative (order-5 loop)
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let names5 = (0..5).map(|i| format!("x{i}")).collect();
        assert!(GroupSpec::from_cayley(names5, loop5, Some(0)).is_err());
    }

    #[test]
    fn parse_examples() {
        let d = GroupSpec::parse(r#"{"kind":"infinite-dihedral"}"#).unwrap();
        assert_eq!(d.parse_element("a^3*t").unwrap(), DihRefl(3));
        assert_eq!(d.parse_element("t").unwrap(), DihRefl(0));
        assert_eq!(d.parse_element("a^-1").unwrap(), DihRot(-1));
        assert_eq!(d.parse_element("t*a").unwrap(), DihRefl(-1));
        assert_eq!(d.parse_element("e").unwrap(), DihRot(0));
        let c4 = GroupSpec::parse(r#"{"kind":"cyclic","n":4}"#).unwrap();
        assert_eq!(c4.parse_element("g^2").unwrap(), FiniteIdx(2));
        assert_eq!(c4.parse_element("g^-1").unwrap(), FiniteIdx(3));
        let z = GroupSpec::parse(r#"{"kind":"integers"}"#).unwrap();
        assert_eq!(z.parse_element("-7").unwrap(), Int(-7));
        let s3 = GroupSpec::parse(r#"{"kind":"finite-dihedral","n":3}"#).unwrap();
        assert_eq!(s3.parse_element("a^4*t").unwrap(), FiniteIdx(4));
        let e2 = GroupSpec::parse(r#"{"kind":"elementary-2","r":3}"#).unwrap();
        assert_eq!(e2.parse_element("b1*b3").unwrap(), FiniteIdx(5));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(GroupSpec::parse("{"), Err(Error::Parse(_))));
        assert!(matches!(GroupSpec::parse(r#"{"kind":"free"}"#), Err(Error::Parse(_))));
        let c = GroupSpec::parse(r#"{"kind":"finite-cayley","elements":["e","x"],"table":[[0,1],[1,1]]}"#);
        assert!(matches!(c, Err(Error::InvalidTable(_))));
        let c = GroupSpec::parse(r#"{"kind":"finite-cayley","elements":["e","x"],"table":[[0,1],[1,0]]}"#).unwrap();
        assert!(matches!(c.parse_element("y"), Err(Error::UnknownElement(_))));
        assert_eq!(c.parse_element("x").unwrap(), FiniteIdx(1));
        assert!(dinf().parse_element("b^2").is_err());
        assert!(dinf().parse_element("a^x").is_err());
    }

    #[test]
    fn json_round_trip() {
        for g in [
            GroupSpec::cyclic(3).unwrap(),
            GroupSpec::finite_dihedral(3).unwrap(),
            GroupSpec::elementary_2(2).unwrap(),
            GroupSpec::integers(),
            dinf(),
        ] {
            assert_eq!(GroupSpec::from_json(&g.to_json()).unwrap(), g);
            if let Some(t) = g.cayley() {
                let custom = GroupSpec::from_cayley(t.names().to_vec(), t.rows(), None).unwrap();
                let back = GroupSpec::from_json(&custom.to_json()).unwrap();
                assert_eq!(back, custom);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        let d = dinf();
        for el in [DihRot(0), DihRot(1), DihRot(-3), DihRefl(0), DihRefl(1), DihRefl(-2)] {
            assert_eq!(d.parse_element(&d.format_element(el)).unwrap(), el);
        }
        let s = GroupSpec::finite_dihedral(4).unwrap();
        for el in s.elements().unwrap() {
            assert_eq!(s.parse_element(&s.format_element(el)).unwrap(), el);
        }
    }
}

//! Multivalued functions `A^n -> P(B)` and the function-side closures.
//!
//! A function is a table indexed by input-tuple rank; each entry is a bitmask
//! over the codomain (bit `b` set means `b` belongs to the value), so the
//! codomain may have at most 64 elements.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::{self, Budget};
use crate::error::{Error, Result};
use crate::universe::{digits, odometer, rank_of, Relation, Tuple, Universe, UniverseRef};

#[derive(Clone, Debug)]
pub struct MultiFunction {
    domain: UniverseRef,
    codomain: UniverseRef,
    arity: usize,
    table: Vec<u64>,
}

impl PartialEq for MultiFunction {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.table == other.table
            && Universe::same(&self.domain, &other.domain)
            && Universe::same(&self.codomain, &other.codomain)
    }
}

impl Eq for MultiFunction {}

impl Hash for MultiFunction {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.table.hash(state);
    }
}

impl PartialOrd for MultiFunction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Arity first, then tables lexicographically (entry 0 most significant).
impl Ord for MultiFunction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arity
            .cmp(&other.arity)
            .then_with(|| self.table.cmp(&other.table))
    }
}

fn value_mask_limit(codomain: &Universe) -> Result<u64> {
    let k = codomain.size();
    if k > 64 {
        return Err(Error::CodomainTooLarge(k));
    }
    Ok(if k == 64 { u64::MAX } else { (1u64 << k) - 1 })
}

impl MultiFunction {
    pub fn new(
        domain: &UniverseRef,
        codomain: &UniverseRef,
        arity: usize,
        table: Vec<u64>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        let space = domain.space(arity)?;
        if table.len() != space {
            return Err(Error::TableLength {
                expected: space,
                found: table.len(),
            });
        }
        let limit = value_mask_limit(codomain)?;
        if let Some(&v) = table.iter().find(|&&v| v & !limit != 0) {
            return Err(Error::ValueOutOfRange {
                value: v,
                size: codomain.size(),
            });
        }
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            arity,
            table,
        })
    }

    /// Builds a function from a rule on input tuples.
    pub fn from_fn(
        domain: &UniverseRef,
        codomain: &UniverseRef,
        arity: usize,
        mut rule: impl FnMut(&[usize]) -> u64,
    ) -> Result<Self> {
        let space = domain.space(arity.max(1))?;
        let k = domain.size();
        let table = (0..space).map(|r| rule(&digits(r, arity, k))).collect();
        Self::new(domain, codomain, arity, table)
    }

    /// The n-ary empty-valued function `e_n`.
    pub fn empty_valued(domain: &UniverseRef, codomain: &UniverseRef, arity: usize) -> Result<Self> {
        let space = domain.space(arity.max(1))?;
        Self::new(domain, codomain, arity, vec![0; space])
    }

    pub(crate) fn from_parts_unchecked(
        domain: &UniverseRef,
        codomain: &UniverseRef,
        arity: usize,
        table: Vec<u64>,
    ) -> Self {
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            arity,
            table,
        }
    }

    pub fn domain(&self) -> &UniverseRef {
        &self.domain
    }

    pub fn codomain(&self) -> &UniverseRef {
        &self.codomain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    /// Value at the input tuple of the given rank.
    pub fn value(&self, rank: usize) -> u64 {
        self.table[rank]
    }

    pub fn value_of(&self, input: &Tuple) -> Result<u64> {
        if input.arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: input.arity(),
            });
        }
        Ok(self.table[self.domain.rank(input)?])
    }

    pub fn is_total(&self) -> bool {
        self.table.iter().all(|&v| v != 0)
    }

    pub fn is_partial(&self) -> bool {
        self.table.iter().all(|&v| v.count_ones() <= 1)
    }

    pub fn is_single_valued(&self) -> bool {
        self.table.iter().all(|&v| v.count_ones() == 1)
    }

    pub fn is_empty_valued(&self) -> bool {
        self.table.iter().all(|&v| v == 0)
    }

    /// Ranks of the inputs with a non-empty value, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.table.len()).filter(|&r| self.table[r] != 0).collect()
    }

    fn check_shape(&self, other: &MultiFunction) -> Result<()> {
        Universe::check_same(&self.domain, &other.domain)?;
        Universe::check_same(&self.codomain, &other.codomain)?;
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    /// `f(a^1 ... a^n)`: the product of the row images of the given columns.
    pub fn image_of_columns(&self, columns: &[Tuple]) -> Result<Relation> {
        if columns.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: columns.len(),
            });
        }
        let m = columns[0].arity();
        if let Some(c) = columns.iter().find(|c| c.arity() != m) {
            return Err(Error::ArityMismatch {
                expected: m,
                found: c.arity(),
            });
        }
        let k = self.domain.size();
        for c in columns {
            if let Some(&x) = c.entries().iter().find(|&&x| x >= k) {
                return Err(Error::ElementOutOfRange { index: x, size: k });
            }
        }
        let values: Vec<u64> = (0..m)
            .map(|i| self.table[rank_of(columns.iter().map(|c| c.get(i)), k)])
            .collect();
        let mut bits = FixedBitSet::with_capacity(self.codomain.space(m)?);
        for_each_product(&values, self.codomain.size(), |r| bits.insert(r));
        Ok(Relation::from_bits(&self.codomain, m, bits))
    }

    /// `fR`: the union of `f(a^1 ... a^n)` over all column choices from `R`.
    pub fn image_of_relation(&self, r: &Relation) -> Result<Relation> {
        Universe::check_same(&self.domain, r.universe())?;
        let m = r.arity();
        let (k, n) = (self.domain.size(), self.arity);
        let mut bits = FixedBitSet::with_capacity(self.codomain.space(m)?);
        let members: Vec<Vec<usize>> = r.ranks().map(|x| digits(x, m, k)).collect();
        if members.is_empty() {
            return Ok(Relation::from_bits(&self.codomain, m, bits));
        }
        let mut choice = vec![0usize; n];
        let mut values = vec![0u64; m];
        loop {
            for (i, v) in values.iter_mut().enumerate() {
                *v = self.table[rank_of(choice.iter().map(|&c| members[c][i]), k)];
            }
            for_each_product(&values, self.codomain.size(), |x| bits.insert(x));
            if !odometer(&mut choice, members.len()) {
                break;
            }
        }
        Ok(Relation::from_bits(&self.codomain, m, bits))
    }

    /// Whether `self(a) ⊆ f(a)` for every input `a`.
    pub fn is_value_restriction_of(&self, f: &MultiFunction) -> Result<bool> {
        self.check_shape(f)?;
        Ok(self.table.iter().zip(&f.table).all(|(g, f)| g & !f == 0))
    }

    /// The pointwise-maximal substitution instance `g(a) = f(a ∘ l)` of arity `m`.
    pub fn substitute(&self, l: &[usize], m: usize) -> Result<MultiFunction> {
        if l.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: l.len(),
            });
        }
        if let Some(&j) = l.iter().find(|&&j| j >= m) {
            return Err(Error::MapOutOfRange { index: j, arity: m });
        }
        let k = self.domain.size();
        let space = self.domain.space(m)?;
        let table = (0..space)
            .map(|r| {
                let a = digits(r, m, k);
                self.table[rank_of(l.iter().map(|&j| a[j]), k)]
            })
            .collect();
        Ok(Self::from_parts_unchecked(&self.domain, &self.codomain, m, table))
    }

    /// All value restrictions of `self`, including `self` and the empty-valued function.
    pub fn value_restrictions(&self) -> impl Iterator<Item = MultiFunction> + '_ {
        let mut current: Option<Vec<u64>> = Some(vec![0; self.table.len()]);
        std::iter::from_fn(move || {
            let out = current.clone()?;
            // submask odometer, last entry fastest
            let mut next = out.clone();
            let mut advanced = false;
            for i in (0..next.len()).rev() {
                if next[i] != self.table[i] {
                    next[i] = (next[i].wrapping_sub(self.table[i])) & self.table[i];
                    advanced = true;
                    break;
                }
                next[i] = 0;
            }
            current = advanced.then_some(next);
            Some(Self::from_parts_unchecked(
                &self.domain,
                &self.codomain,
                self.arity,
                out,
            ))
        })
    }

    /// Number of value restrictions, `2^(Σ |f(a)|)`.
    pub fn value_restriction_count(&self) -> u128 {
        let bits: u32 = self.table.iter().map(|v| v.count_ones()).sum();
        1u128.checked_shl(bits).unwrap_or(u128::MAX)
    }

    pub fn display_value(&self, v: u64) -> String {
        let parts: Vec<String> = (0..self.codomain.size())
            .filter(|&b| v >> b & 1 == 1)
            .map(|b| self.codomain.label(b))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for MultiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.domain.size();
        let rows: Vec<String> = self
            .table
            .iter()
            .enumerate()
            .map(|(r, &v)| {
                format!(
                    "{} -> {}",
                    Tuple(digits(r, self.arity, k)).display(&self.domain),
                    self.display_value(v)
                )
            })
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

/// Calls `sink` with the rank of every tuple in the product `Π sets[i]` over a
/// universe of size `k`. Nothing is emitted when some factor is empty.
pub(crate) fn for_each_product(sets: &[u64], k: usize, mut sink: impl FnMut(usize)) {
    if sets.iter().any(|&s| s == 0) {
        return;
    }
    let elems: Vec<Vec<usize>> = sets
        .iter()
        .map(|&s| (0..k).filter(|&b| s >> b & 1 == 1).collect())
        .collect();
    let mut idx = vec![0usize; sets.len()];
    loop {
        sink(idx.iter().zip(&elems).fold(0, |r, (&i, e)| r * k + e[i]));
        let mut carry = true;
        for p in (0..idx.len()).rev() {
            idx[p] += 1;
            if idx[p] < elems[p].len() {
                carry = false;
                break;
            }
            idx[p] = 0;
        }
        if carry {
            return;
        }
    }
}

/// The product as a mask; requires `k^sets.len() <= 64`.
pub(crate) fn product_mask(sets: &[u64], k: usize) -> u64 {
    let mut mask = 0u64;
    for_each_product(sets, k, |r| mask |= 1 << r);
    mask
}

/// Restricts which functions a closure or enumeration keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    #[default]
    Any,
    Total,
    Partial,
    SingleValued,
}

impl FunctionKind {
    pub fn admits(self, f: &MultiFunction) -> bool {
        match self {
            FunctionKind::Any => true,
            FunctionKind::Total => f.is_total(),
            FunctionKind::Partial => f.is_partial(),
            FunctionKind::SingleValued => f.is_single_valued(),
        }
    }
}

/// A class of functions of arities `1..=arity_cap`, deduplicated per arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionClass {
    domain: UniverseRef,
    codomain: UniverseRef,
    arity_cap: usize,
    per_arity: Vec<BTreeSet<MultiFunction>>,
}

impl FunctionClass {
    pub fn new(domain: &UniverseRef, codomain: &UniverseRef, arity_cap: usize) -> Result<Self> {
        if arity_cap == 0 {
            return Err(Error::InvalidBounds("function arity cap must be positive".into()));
        }
        value_mask_limit(codomain)?;
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            arity_cap,
            per_arity: vec![BTreeSet::new(); arity_cap],
        })
    }

    pub fn from_functions(
        domain: &UniverseRef,
        codomain: &UniverseRef,
        arity_cap: usize,
        functions: impl IntoIterator<Item = MultiFunction>,
    ) -> Result<Self> {
        let mut c = Self::new(domain, codomain, arity_cap)?;
        for f in functions {
            c.insert(f)?;
        }
        Ok(c)
    }

    pub fn domain(&self) -> &UniverseRef {
        &self.domain
    }

    pub fn codomain(&self) -> &UniverseRef {
        &self.codomain
    }

    pub fn arity_cap(&self) -> usize {
        self.arity_cap
    }

    /// Inserts `f`; returns whether it was new.
    pub fn insert(&mut self, f: MultiFunction) -> Result<bool> {
        Universe::check_same(&self.domain, &f.domain)?;
        Universe::check_same(&self.codomain, &f.codomain)?;
        if f.arity > self.arity_cap {
            return Err(Error::ArityCap {
                arity: f.arity,
                cap: self.arity_cap,
            });
        }
        Ok(self.per_arity[f.arity - 1].insert(f))
    }

    pub fn contains(&self, f: &MultiFunction) -> bool {
        f.arity >= 1
            && f.arity <= self.arity_cap
            && self.per_arity[f.arity - 1].contains(f)
    }

    /// Members of arity `n` (empty beyond the cap).
    pub fn of_arity(&self, n: usize) -> impl Iterator<Item = &MultiFunction> {
        self.per_arity
            .get(n.wrapping_sub(1))
            .into_iter()
            .flat_map(|s| s.iter())
    }

    pub fn count_of_arity(&self, n: usize) -> usize {
        self.per_arity.get(n.wrapping_sub(1)).map_or(0, |s| s.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiFunction> {
        self.per_arity.iter().flat_map(|s| s.iter())
    }

    pub fn len(&self) -> usize {
        self.per_arity.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &FunctionClass) -> bool {
        self.iter().all(|f| other.contains(f))
    }

    /// Members admitted by `kind`.
    pub fn restrict(&self, kind: FunctionKind) -> FunctionClass {
        let mut out = self.clone();
        for s in &mut out.per_arity {
            s.retain(|f| kind.admits(f));
        }
        out
    }

    pub fn all_admitted(&self, kind: FunctionKind) -> bool {
        self.iter().all(|f| kind.admits(f))
    }

    pub fn union(&self, other: &FunctionClass) -> Result<FunctionClass> {
        let mut out = self.clone();
        for f in other.iter() {
            out.insert(f.clone())?;
        }
        Ok(out)
    }

    /// `M ∪ {e_1}`.
    pub fn with_empty_valued(&self) -> FunctionClass {
        let mut out = self.clone();
        out.per_arity[0].insert(
            MultiFunction::empty_valued(&self.domain, &self.codomain, 1)
                .expect("unary space of a valid universe"),
        );
        out
    }

    /// The first member (in canonical order) not in `other`.
    pub fn first_not_in(&self, other: &FunctionClass) -> Option<&MultiFunction> {
        self.iter().find(|f| !other.contains(f))
    }
}

/// All maps `n -> m` in lexicographic order.
pub fn all_maps(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur = Some(vec![0usize; n]);
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        cur = (m > 0 && odometer(&mut next, m)).then_some(next);
        if m == 0 && n > 0 {
            return None;
        }
        Some(out)
    })
}

/// Pointwise-maximal members `f(a ∘ l)` for every `l: n -> m`, deduplicated.
pub fn rvs_maximal(f: &MultiFunction, m: usize) -> Result<BTreeSet<MultiFunction>> {
    if m == 0 {
        return Err(Error::ZeroArity);
    }
    all_maps(f.arity, m).map(|l| f.substitute(&l, m)).collect()
}

/// Every `m`-ary function obtained from `f` by restrictive variable substitution.
pub fn rvs_members(f: &MultiFunction, m: usize, budget: &Budget) -> Result<BTreeSet<MultiFunction>> {
    let maxima = rvs_maximal(f, m)?;
    let count: u128 = maxima.iter().map(|g| g.value_restriction_count()).sum();
    budget.check("restrictive variable substitutions", count)?;
    let mut out = BTreeSet::new();
    for g in &maxima {
        out.extend(g.value_restrictions());
    }
    Ok(out)
}

/// Maxima of `RVS(M)` at arity `m`: every other member is a value restriction of one of these.
pub fn rvs_maxima_of_class(class: &FunctionClass, m: usize) -> Result<Vec<MultiFunction>> {
    let mut all = BTreeSet::new();
    for f in class.iter() {
        all.extend(rvs_maximal(f, m)?);
    }
    let all: Vec<MultiFunction> = all.into_iter().collect();
    Ok(all
        .iter()
        .enumerate()
        .filter(|(i, g)| {
            !all.iter().enumerate().any(|(j, h)| {
                j != *i
                    && g.table.iter().zip(&h.table).all(|(x, y)| x & !y == 0)
                    && (g.table != h.table || j < *i)
            })
        })
        .map(|(_, g)| g.clone())
        .collect())
}

/// Whether `g ∈ RVS(M)`.
pub fn rvs_contains(class: &FunctionClass, g: &MultiFunction) -> Result<bool> {
    for f in class.iter() {
        for l in all_maps(f.arity, g.arity) {
            if g.is_value_restriction_of(&f.substitute(&l, g.arity)?)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `RVS(M)` up to the class's arity cap.
pub fn rvs_closure(class: &FunctionClass, budget: &Budget) -> Result<FunctionClass> {
    let mut out = FunctionClass::new(&class.domain, &class.codomain, class.arity_cap)?;
    for m in 1..=class.arity_cap {
        for g in rvs_maxima_of_class(class, m)? {
            budget.check("restrictive variable substitutions", g.value_restriction_count())?;
            out.per_arity[m - 1].extend(g.value_restrictions());
        }
    }
    Ok(out)
}

/// `RVS^t(M)`: `M` together with its everywhere non-empty substitution instances.
pub fn rvst_closure(class: &FunctionClass, budget: &Budget) -> Result<FunctionClass> {
    let mut out = class.clone();
    for m in 1..=class.arity_cap {
        for g in rvs_maxima_of_class(class, m)? {
            if !g.is_total() {
                continue;
            }
            budget.check("restrictive variable substitutions", g.value_restriction_count())?;
            out.per_arity[m - 1].extend(g.value_restrictions().filter(|h| h.is_total()));
        }
    }
    Ok(out)
}

/// Whether every selection on `supp(f)` lies inside the value product of a
/// single member of `members` (all of `f`'s arity). Requires `members` non-empty.
pub fn covered_by<'a>(f: &MultiFunction, members: impl IntoIterator<Item = &'a MultiFunction>) -> bool {
    let members: Vec<&MultiFunction> = members.into_iter().collect();
    if members.is_empty() {
        return false;
    }
    let supp = f.support();
    // cand[d][b]: members containing b at the d-th support point
    let k = f.codomain.size();
    let cand: Vec<Vec<FixedBitSet>> = supp
        .iter()
        .map(|&a| {
            (0..k)
                .map(|b| {
                    let mut s = FixedBitSet::with_capacity(members.len());
                    for (i, g) in members.iter().enumerate() {
                        if g.table[a] >> b & 1 == 1 {
                            s.insert(i);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut all = FixedBitSet::with_capacity(members.len());
    all.insert_range(..);
    fn dfs(f: &MultiFunction, supp: &[usize], cand: &[Vec<FixedBitSet>], d: usize, cur: &FixedBitSet) -> bool {
        if d == supp.len() {
            return true;
        }
        let v = f.table[supp[d]];
        (0..cand[d].len()).filter(|&b| v >> b & 1 == 1).all(|b| {
            let mut next = cur.clone();
            next.intersect_with(&cand[d][b]);
            !next.is_clear() && dfs(f, supp, cand, d + 1, &next)
        })
    }
    dfs(f, &supp, &cand, 0, &all)
}

/// Whether `f ∈ LC(M)`.
pub fn lc_contains(class: &FunctionClass, f: &MultiFunction) -> bool {
    f.arity <= class.arity_cap && covered_by(f, class.of_arity(f.arity))
}

/// `LC(M)` (or `tLC`, `pLC`, `sLC` for the other kinds) up to the class's cap,
/// by sweeping every candidate table.
pub fn lc_closure(class: &FunctionClass, kind: FunctionKind, budget: &Budget) -> Result<FunctionClass> {
    let mut out = FunctionClass::new(&class.domain, &class.codomain, class.arity_cap)?;
    for n in 1..=class.arity_cap {
        let members: Vec<&MultiFunction> = class.of_arity(n).collect();
        if members.is_empty() {
            continue;
        }
        let candidates: Vec<MultiFunction> =
            enumerate::all_functions(&class.domain, &class.codomain, n, budget)?.collect();
        let kept: Vec<MultiFunction> = candidates
            .into_par_iter()
            .filter(|f| kind.admits(f) && covered_by(f, members.iter().copied()))
            .collect();
        out.per_arity[n - 1].extend(kept);
    }
    Ok(out)
}

/// `LC` restricted to the candidates of `kind`, starting from the maxima of `RVS(M)`.
///
/// Coverage by a class is the same as coverage by its maxima under value
/// restriction, so this avoids materializing the substitution closure.
pub fn lc_of_rvs_contains(class: &FunctionClass, f: &MultiFunction) -> Result<bool> {
    let maxima = rvs_maxima_of_class(class, f.arity)?;
    Ok(covered_by(f, maxima.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> (UniverseRef, UniverseRef) {
        (Universe::new("A", 2).unwrap(), Universe::new("B", 2).unwrap())
    }

    fn unary(a: &UniverseRef, b: &UniverseRef, t: [u64; 2]) -> MultiFunction {
        MultiFunction::new(a, b, 1, t.to_vec()).unwrap()
    }

    #[test]
    fn predicates() {
        let (a, b) = ab();
        let e = MultiFunction::empty_valued(&a, &b, 2).unwrap();
        assert!(e.is_partial() && !e.is_total() && e.is_empty_valued());
        let id = unary(&a, &b, [0b01, 0b10]);
        assert!(id.is_single_valued() && id.is_total() && id.is_partial());
        assert!(MultiFunction::new(&a, &b, 1, vec![0]).is_err());
        assert!(MultiFunction::new(&a, &b, 1, vec![0, 4]).is_err());
    }

    #[test]
    fn image_examples() {
        let (a, b) = ab();
        let f = unary(&a, &b, [0b11, 0b10]);
        let img = f.image_of_columns(&[Tuple::new([0, 1])]).unwrap();
        assert_eq!(
            img.tuples().collect::<Vec<_>>(),
            vec![Tuple::new([0, 1]), Tuple::new([1, 1])]
        );
        let e = MultiFunction::empty_valued(&a, &b, 1).unwrap();
        let full = Relation::full(&a, 2).unwrap();
        assert_eq!(e.image_of_relation(&full).unwrap(), Relation::empty(&b, 2).unwrap());
        assert!(f
            .image_of_relation(&Relation::empty(&a, 3).unwrap())
            .unwrap()
            .is_empty());
        let zero = unary(&a, &b, [0b01, 0b01]);
        let r = Relation::from_tuples(&a, 2, &[Tuple::new([0, 1]), Tuple::new([1, 1])]).unwrap();
        assert_eq!(
            zero.image_of_relation(&r).unwrap().tuples().collect::<Vec<_>>(),
            vec![Tuple::new([0, 0])]
        );
    }

    #[test]
    fn identity_image_is_relation() {
        let a = Universe::new("A", 3).unwrap();
        let id = MultiFunction::from_fn(&a, &a, 1, |x| 1 << x[0]).unwrap();
        let r = Relation::from_ranks(&a, 2, [0, 5, 7]).unwrap();
        assert_eq!(id.image_of_relation(&r).unwrap(), r);
    }

    #[test]
    fn value_restrictions_enumerate_all_submasks() {
        let (a, b) = ab();
        let f = unary(&a, &b, [0b11, 0b10]);
        let all: Vec<_> = f.value_restrictions().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|g| g.is_value_restriction_of(&f).unwrap()));
        let set: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 8);
        let g = unary(&a, &b, [0b11, 0b11]);
        assert!(!g.is_value_restriction_of(&f).unwrap());
    }

    #[test]
    fn substitution_and_maps() {
        let (a, b) = ab();
        assert_eq!(all_maps(2, 3).count(), 9);
        assert_eq!(all_maps(1, 1).collect::<Vec<_>>(), vec![vec![0]]);
        let id = unary(&a, &b, [0b01, 0b10]);
        // g(x, y) = id(y)
        let g = id.substitute(&[1], 2).unwrap();
        assert_eq!(g.table(), &[0b01, 0b10, 0b01, 0b10]);
        let e2 = MultiFunction::empty_valued(&a, &b, 2).unwrap();
        let members = rvs_members(&id, 2, &Budget::default()).unwrap();
        assert!(members.contains(&e2) && members.contains(&g));
    }

    #[test]
    fn worked_example_membership() {
        let (a, b) = ab();
        let zero = unary(&a, &b, [0b01, 0b01]);
        let one = unary(&a, &b, [0b10, 0b10]);
        let id = unary(&a, &b, [0b01, 0b10]);
        let m = FunctionClass::from_functions(&a, &b, 1, [zero, one, id]).unwrap();
        let f = unary(&a, &b, [0b11, 0b10]);
        let g = unary(&a, &b, [0b11, 0b11]);
        assert!(lc_contains(&m, &f));
        assert!(!lc_contains(&m, &g));
        assert!(!rvs_contains(&m, &f).unwrap());
        assert!(!rvs_contains(&m, &g).unwrap());
    }

    #[test]
    fn lc_requires_members_of_same_arity() {
        let (a, b) = ab();
        let m = FunctionClass::new(&a, &b, 2).unwrap();
        let e1 = MultiFunction::empty_valued(&a, &b, 1).unwrap();
        assert!(!lc_contains(&m, &e1));
        let m = m.with_empty_valued();
        assert!(lc_contains(&m, &e1));
        assert!(!lc_contains(&m, &MultiFunction::empty_valued(&a, &b, 2).unwrap()));
    }

    #[test]
    fn closures_of_empty_class() {
        let (a, b) = ab();
        let m = FunctionClass::new(&a, &b, 2).unwrap();
        let budget = Budget::default();
        assert!(rvs_closure(&m, &budget).unwrap().is_empty());
        assert!(rvst_closure(&m, &budget).unwrap().is_empty());
        assert!(lc_closure(&m, FunctionKind::Any, &budget).unwrap().is_empty());
    }

    #[test]
    fn maxima_cover_closure() {
        let (a, b) = ab();
        let f = MultiFunction::new(&a, &b, 2, vec![0b01, 0, 0b11, 0b10]).unwrap();
        let m = FunctionClass::from_functions(&a, &b, 2, [f]).unwrap();
        let closure = rvs_closure(&m, &Budget::default()).unwrap();
        for n in 1..=2 {
            let maxima = rvs_maxima_of_class(&m, n).unwrap();
            for g in closure.of_arity(n) {
                assert!(maxima.iter().any(|h| g.is_value_restriction_of(h).unwrap()));
                assert!(rvs_contains(&m, g).unwrap());
            }
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::enumerate::{all_functions, sample_class, seeded};
    use crate::universe::Universe;
    use proptest::prelude::*;

    const KINDS: [FunctionKind; 4] = [
        FunctionKind::Any,
        FunctionKind::Total,
        FunctionKind::Partial,
        FunctionKind::SingleValued,
    ];

    fn ab() -> (UniverseRef, UniverseRef) {
        (Universe::new("A", 2).unwrap(), Universe::new("B", 2).unwrap())
    }

    fn class(seed: u64, index: u64, kind: FunctionKind) -> FunctionClass {
        let (a, b) = ab();
        sample_class(&mut seeded(seed, index), &a, &b, 2, 4, kind).unwrap()
    }

    fn every_function(n: usize) -> Vec<MultiFunction> {
        let (a, b) = ab();
        all_functions(&a, &b, n, &Budget::default()).unwrap().collect()
    }

    // condition (1) for every F, by listing the selections of the product
    fn covered_on_every_subset(f: &MultiFunction, members: &[&MultiFunction]) -> bool {
        let space = f.table().len();
        (0u32..1 << space).all(|fmask| {
            let rows: Vec<usize> = (0..space).filter(|r| fmask >> r & 1 == 1).collect();
            let mut selections: Vec<Vec<usize>> = vec![vec![]];
            for &r in &rows {
                selections = selections
                    .into_iter()
                    .flat_map(|s| {
                        (0..2).filter(move |b| f.value(r) >> b & 1 == 1).map(move |b| {
                            let mut s = s.clone();
                            s.push(b);
                            s
                        })
                    })
                    .collect();
            }
            selections.iter().all(|sel| {
                members
                    .iter()
                    .any(|g| rows.iter().zip(sel).all(|(&r, &b)| g.value(r) >> b & 1 == 1))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn support_reduction_agrees_with_every_subset(seed in any::<u64>()) {
            let m = class(seed, 0, FunctionKind::Any);
            for n in 1..=2 {
                let members: Vec<&MultiFunction> = m.of_arity(n).collect();
                for f in every_function(n) {
                    prop_assert_eq!(lc_contains(&m, &f), covered_on_every_subset(&f, &members), "{}", f);
                }
            }
        }

        #[test]
        fn partial_coverings_are_single_members(seed in any::<u64>()) {
            let m = class(seed, 1, FunctionKind::Any);
            for n in 1..=2 {
                for f in every_function(n).into_iter().filter(|f| f.is_partial()) {
                    let single = m.of_arity(n).any(|g| f.is_value_restriction_of(g).unwrap());
                    prop_assert_eq!(lc_contains(&m, &f), single);
                }
            }
        }

        #[test]
        fn simple_coverings_are_restrictions(seed in any::<u64>()) {
            let m = class(seed, 2, FunctionKind::SingleValued);
            for n in 1..=2 {
                for f in every_function(n).into_iter().filter(|f| f.is_single_valued()) {
                    let same = m.of_arity(n).any(|g| g.table() == f.table());
                    prop_assert_eq!(lc_contains(&m, &f), same);
                }
            }
        }

        #[test]
        fn substitution_closures_are_closure_operators(seed in any::<u64>()) {
            let budget = Budget::default();
            for (close, kind) in [
                (rvs_closure as fn(&FunctionClass, &Budget) -> Result<FunctionClass>, FunctionKind::Any),
                (rvst_closure, FunctionKind::Total),
            ] {
                let small = class(seed, 3, kind);
                let big = small.union(&class(seed, 4, kind)).unwrap();
                let c = close(&small, &budget).unwrap();
                prop_assert!(small.is_subset(&c));
                prop_assert!(c.is_subset(&close(&big, &budget).unwrap()));
                prop_assert_eq!(close(&c, &budget).unwrap(), c);
            }
        }

        #[test]
        fn covering_closures_are_closure_operators(seed in any::<u64>()) {
            let budget = Budget::default();
            for kind in KINDS {
                let small = class(seed, 5, kind);
                let big = small.union(&class(seed, 6, kind)).unwrap();
                let c = lc_closure(&small, kind, &budget).unwrap();
                prop_assert!(small.is_subset(&c), "{:?}", kind);
                prop_assert!(c.is_subset(&lc_closure(&big, kind, &budget).unwrap()));
                prop_assert_eq!(lc_closure(&c, kind, &budget).unwrap(), c);
            }
        }

        #[test]
        fn substitution_stays_in_the_subclasses(seed in any::<u64>()) {
            let budget = Budget::default();
            let p = rvs_closure(&class(seed, 7, FunctionKind::Partial), &budget).unwrap();
            prop_assert!(p.all_admitted(FunctionKind::Partial));
            let s = rvst_closure(&class(seed, 8, FunctionKind::SingleValued), &budget).unwrap();
            prop_assert!(s.all_admitted(FunctionKind::SingleValued));
        }

        // Holds for partial and single-valued classes only; see
        // `repeated_rows_break_substitution_of_coverings` for the general case.
        #[test]
        fn coverings_preserve_substitution_closure(seed in any::<u64>()) {
            let budget = Budget::default();
            let m = rvs_closure(&class(seed, 9, FunctionKind::Partial), &budget).unwrap();
            let plc = lc_closure(&m, FunctionKind::Partial, &budget).unwrap();
            prop_assert_eq!(rvs_closure(&plc, &budget).unwrap(), plc);
            let ms = rvst_closure(&class(seed, 10, FunctionKind::SingleValued), &budget).unwrap();
            let slc = lc_closure(&ms, FunctionKind::SingleValued, &budget).unwrap();
            prop_assert_eq!(rvst_closure(&slc, &budget).unwrap(), slc);
        }
    }

    // g(x, y) ⊆ f(x) with f = ({1}, {0, 1}) covered by M, but g picks 1 at
    // (1, 0) and 0 at (1, 1) from the same value f(1), which no member does.
    #[test]
    fn repeated_rows_break_substitution_of_coverings() {
        let (a, b) = ab();
        let budget = Budget::default();
        let base = FunctionClass::from_functions(
            &a,
            &b,
            2,
            [
                MultiFunction::new(&a, &b, 1, vec![0b10, 0b01]).unwrap(),
                MultiFunction::new(&a, &b, 1, vec![0b10, 0b10]).unwrap(),
            ],
        )
        .unwrap();
        let m = rvs_closure(&base, &budget).unwrap();
        assert_eq!(rvs_closure(&m, &budget).unwrap(), m);
        let lc = lc_closure(&m, FunctionKind::Any, &budget).unwrap();
        let f = MultiFunction::new(&a, &b, 1, vec![0b10, 0b11]).unwrap();
        assert!(lc.contains(&f));
        let g = MultiFunction::new(&a, &b, 2, vec![0, 0b10, 0b10, 0b01]).unwrap();
        assert!(g.is_value_restriction_of(&f.substitute(&[0], 2).unwrap()).unwrap());
        assert!(!lc.contains(&g));
        assert!(rvs_closure(&lc, &budget).unwrap().contains(&g));
    }
}

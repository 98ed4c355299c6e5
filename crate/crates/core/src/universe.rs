//! Finite carriers, tuples and relations.
//!
//! A tuple of arity `m` over a universe of size `k` is identified with its
//! row-major rank in `0..k^m` (position 0 most significant). Relations are
//! bitsets over those ranks and always carry their arity, so `empty^1` and
//! `empty^2` are different values.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Largest tuple space a relation may span.
pub const MAX_SPACE: usize = 1 << 26;

pub type UniverseRef = Arc<Universe>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe {
    name: String,
    size: usize,
    labels: Option<Vec<String>>,
}

impl Universe {
    pub fn new(name: impl Into<String>, size: usize) -> Result<UniverseRef> {
        if size == 0 {
            return Err(Error::EmptyUniverse);
        }
        Ok(Arc::new(Self {
            name: name.into(),
            size,
            labels: None,
        }))
    }

    pub fn with_labels<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<UniverseRef> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Arc::new(Self {
            name: name.into(),
            size: labels.len(),
            labels: Some(labels),
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, index: usize) -> String {
        match &self.labels {
            Some(l) => l[index].clone(),
            None => index.to_string(),
        }
    }

    /// Resolves a label (or, for unlabelled universes, a decimal index).
    pub fn element(&self, token: &str) -> Result<usize> {
        let found = match &self.labels {
            Some(l) => l.iter().position(|x| x == token),
            None => token.parse::<usize>().ok().filter(|&i| i < self.size),
        };
        found.ok_or_else(|| Error::UnknownElement(self.name.clone(), token.to_string()))
    }

    /// Number of tuples of the given arity, `size^arity`.
    pub fn space(&self, arity: usize) -> Result<usize> {
        checked_space(self.size, arity)
    }

    pub fn rank(&self, t: &Tuple) -> Result<usize> {
        let mut r = 0usize;
        for &x in &t.0 {
            if x >= self.size {
                return Err(Error::ElementOutOfRange {
                    index: x,
                    size: self.size,
                });
            }
            r = r
                .checked_mul(self.size)
                .and_then(|r| r.checked_add(x))
                .ok_or(Error::BudgetExceeded {
                    what: "tuple rank",
                    count: u128::MAX,
                    budget: usize::MAX as u128,
                })?;
        }
        Ok(r)
    }

    pub fn unrank(&self, rank: usize, arity: usize) -> Result<Tuple> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        let space = self.space(arity)?;
        if rank >= space {
            return Err(Error::RankOutOfRange { rank, space });
        }
        Ok(Tuple(digits(rank, arity, self.size)))
    }

    pub(crate) fn same(a: &UniverseRef, b: &UniverseRef) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }

    pub(crate) fn check_same(a: &UniverseRef, b: &UniverseRef) -> Result<()> {
        if Self::same(a, b) {
            Ok(())
        } else {
            Err(Error::UniverseMismatch(a.name.clone(), b.name.clone()))
        }
    }
}

pub(crate) fn checked_space(size: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| size.checked_pow(a))
        .filter(|&s| s <= MAX_SPACE)
        .ok_or(Error::BudgetExceeded {
            what: "tuple space",
            count: (size as u128).saturating_pow(arity.min(128) as u32),
            budget: MAX_SPACE as u128,
        })
}

/// Base-`size` digits of `rank`, most significant first.
pub(crate) fn digits(mut rank: usize, arity: usize, size: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = rank % size;
        rank /= size;
    }
    out
}

pub(crate) fn rank_of(entries: impl IntoIterator<Item = usize>, size: usize) -> usize {
    entries.into_iter().fold(0, |r, x| r * size + x)
}

/// Advances `d` as a base-`size` odometer; returns false after the last value.
pub(crate) fn odometer(d: &mut [usize], size: usize) -> bool {
    for x in d.iter_mut().rev() {
        *x += 1;
        if *x < size {
            return true;
        }
        *x = 0;
    }
    false
}

/// An `m`-tuple, i.e. a map from positions `0..m` to element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(pub Vec<usize>);

impl Tuple {
    pub fn new(entries: impl Into<Vec<usize>>) -> Self {
        Tuple(entries.into())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `a ∘ h` for `h: n → m`; position `i` of the result is `a(h(i))`.
    pub fn compose(&self, h: &[usize]) -> Result<Tuple> {
        h.iter()
            .map(|&j| {
                self.0.get(j).copied().ok_or(Error::MapOutOfRange {
                    index: j,
                    arity: self.arity(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Tuple)
    }

    /// `(a + σ) ∘ h` where `h` maps into target positions and indeterminates.
    pub fn extend_compose(&self, sigma: &[usize], h: &[Slot]) -> Result<Tuple> {
        h.iter()
            .map(|slot| match *slot {
                Slot::Target(j) => self.0.get(j).copied().ok_or(Error::MapOutOfRange {
                    index: j,
                    arity: self.arity(),
                }),
                Slot::Var(v) => sigma.get(v).copied().ok_or(Error::MissingBinding(v)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Tuple)
    }

    pub fn display(&self, u: &Universe) -> String {
        let parts: Vec<String> = self.0.iter().map(|&x| u.label(x)).collect();
        format!("({})", parts.join(", "))
    }
}

/// Codomain of a scheme map: either a target position or an indeterminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Slot {
    Target(usize),
    Var(usize),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Target(i) => write!(f, "{i}"),
            Slot::Var(v) => write!(f, "v{v}"),
        }
    }
}

/// An `m`-ary relation on a universe, stored as a bitset over tuple ranks.
#[derive(Clone, Debug)]
pub struct Relation {
    universe: UniverseRef,
    arity: usize,
    members: FixedBitSet,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.members == other.members
            && Universe::same(&self.universe, &other.universe)
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.universe.name.hash(state);
        self.arity.hash(state);
        self.members.hash(state);
    }
}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Relation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.universe
            .name
            .cmp(&other.universe.name)
            .then(self.arity.cmp(&other.arity))
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl Relation {
    pub fn empty(universe: &UniverseRef, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        let space = universe.space(arity)?;
        Ok(Self {
            universe: universe.clone(),
            arity,
            members: FixedBitSet::with_capacity(space),
        })
    }

    pub fn full(universe: &UniverseRef, arity: usize) -> Result<Self> {
        let mut r = Self::empty(universe, arity)?;
        r.members.insert_range(..);
        Ok(r)
    }

    /// The binary equality relation `{(x, x)}`.
    pub fn equality(universe: &UniverseRef) -> Self {
        let k = universe.size();
        let mut r = Self::empty(universe, 2).expect("binary space of a valid universe");
        for x in 0..k {
            r.members.insert(x * k + x);
        }
        r
    }

    pub fn from_tuples<'a>(
        universe: &UniverseRef,
        arity: usize,
        tuples: impl IntoIterator<Item = &'a Tuple>,
    ) -> Result<Self> {
        let mut r = Self::empty(universe, arity)?;
        for t in tuples {
            if t.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: t.arity(),
                });
            }
            r.members.insert(universe.rank(t)?);
        }
        Ok(r)
    }

    pub fn from_ranks(
        universe: &UniverseRef,
        arity: usize,
        ranks: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut r = Self::empty(universe, arity)?;
        let space = r.space();
        for rank in ranks {
            if rank >= space {
                return Err(Error::RankOutOfRange { rank, space });
            }
            r.members.insert(rank);
        }
        Ok(r)
    }

    pub(crate) fn from_bits(universe: &UniverseRef, arity: usize, members: FixedBitSet) -> Self {
        debug_assert_eq!(members.len(), universe.space(arity).unwrap());
        Self {
            universe: universe.clone(),
            arity,
            members,
        }
    }

    /// Builds a relation from the low `space` bits of `mask`.
    pub fn from_mask(universe: &UniverseRef, arity: usize, mask: u64) -> Result<Self> {
        let mut r = Self::empty(universe, arity)?;
        let space = r.space();
        if space < 64 && mask >> space != 0 {
            return Err(Error::RankOutOfRange {
                rank: 63 - mask.leading_zeros() as usize,
                space,
            });
        }
        for i in 0..space.min(64) {
            if mask >> i & 1 == 1 {
                r.members.insert(i);
            }
        }
        Ok(r)
    }

    /// The member bitset as an integer, when the tuple space has at most 64 ranks.
    pub fn to_mask(&self) -> Option<u64> {
        if self.space() > 64 {
            return None;
        }
        Some(self.members.ones().fold(0u64, |m, i| m | 1 << i))
    }

    pub fn universe(&self) -> &UniverseRef {
        &self.universe
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn space(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.members.is_full()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        t.arity() == self.arity
            && self
                .universe
                .rank(t)
                .map(|r| self.members.contains(r))
                .unwrap_or(false)
    }

    pub fn contains_rank(&self, rank: usize) -> bool {
        self.members.contains(rank)
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    /// Members in ascending rank order.
    pub fn tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        let (m, k) = (self.arity, self.universe.size());
        self.members.ones().map(move |r| Tuple(digits(r, m, k)))
    }

    fn check_compatible(&self, other: &Relation) -> Result<()> {
        Universe::check_same(&self.universe, &other.universe)?;
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &Relation) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.members.is_subset(&other.members))
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.members.union_with(&other.members);
        Ok(out)
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.members.intersect_with(&other.members);
        Ok(out)
    }

    pub fn complement(&self) -> Relation {
        let mut out = self.clone();
        out.members.toggle_range(..);
        out
    }

    pub fn with(&self, t: &Tuple) -> Result<Relation> {
        self.set(t, true)
    }

    pub fn without(&self, t: &Tuple) -> Result<Relation> {
        self.set(t, false)
    }

    fn set(&self, t: &Tuple, present: bool) -> Result<Relation> {
        if t.arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: t.arity(),
            });
        }
        let mut out = self.clone();
        out.members.set(self.universe.rank(t)?, present);
        Ok(out)
    }

    pub fn display(&self) -> String {
        if self.is_empty() {
            return format!("empty^{}", self.arity);
        }
        let parts: Vec<String> = self.tuples().map(|t| t.display(&self.universe)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

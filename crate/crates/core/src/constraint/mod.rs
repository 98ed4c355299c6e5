//! Relational constraints, minor formation schemes and conjunctive minors.

mod closure;
mod table;

pub use closure::{close, cm_closure, lo_closure, wcm_closure, BoundedClosure, ClosureKind};
pub use table::{ConstraintTable, Violation, MAX_ANTECEDENT_BITS};
pub(crate) use table::column_mask;

use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::{checked_space, digits, Relation, Slot, Universe, UniverseRef};

/// An A-to-B constraint `(R, S)` with `R ⊆ A^m` and `S ⊆ B^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    antecedent: Relation,
    consequent: Relation,
}

impl Constraint {
    pub fn new(antecedent: Relation, consequent: Relation) -> Result<Self> {
        if antecedent.arity() != consequent.arity() {
            return Err(Error::ArityMismatch {
                expected: antecedent.arity(),
                found: consequent.arity(),
            });
        }
        Ok(Self {
            antecedent,
            consequent,
        })
    }

    /// `(∅^m, ∅^m)`.
    pub fn empty(a: &UniverseRef, b: &UniverseRef, m: usize) -> Result<Self> {
        Self::new(Relation::empty(a, m)?, Relation::empty(b, m)?)
    }

    /// `(A^m, B^m)`.
    pub fn trivial(a: &UniverseRef, b: &UniverseRef, m: usize) -> Result<Self> {
        Self::new(Relation::full(a, m)?, Relation::full(b, m)?)
    }

    /// `(=_A, =_B)`.
    pub fn equality(a: &UniverseRef, b: &UniverseRef) -> Self {
        Self {
            antecedent: Relation::equality(a),
            consequent: Relation::equality(b),
        }
    }

    pub fn antecedent(&self) -> &Relation {
        &self.antecedent
    }

    pub fn consequent(&self) -> &Relation {
        &self.consequent
    }

    pub fn arity(&self) -> usize {
        self.antecedent.arity()
    }

    pub fn domain(&self) -> &UniverseRef {
        self.antecedent.universe()
    }

    pub fn codomain(&self) -> &UniverseRef {
        self.consequent.universe()
    }

    /// Whether `self` relaxes `c0`: smaller antecedent, larger consequent.
    pub fn is_relaxation_of(&self, c0: &Constraint) -> Result<bool> {
        Ok(self.antecedent.is_subset(&c0.antecedent)? && c0.consequent.is_subset(&self.consequent)?)
    }

    /// Over finite universes every antecedent is finite, so this agrees with
    /// [`Constraint::is_relaxation_of`].
    pub fn is_finite_relaxation_of(&self, c0: &Constraint) -> Result<bool> {
        self.is_relaxation_of(c0)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.antecedent, self.consequent)
    }
}

/// A minor formation scheme: target arity `m`, `vars` indeterminates, and one
/// map `n_j -> m ⊎ V` per source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Scheme {
    target: usize,
    vars: usize,
    sources: Vec<Vec<Slot>>,
}

impl Scheme {
    pub fn new(target: usize, vars: usize, sources: Vec<Vec<Slot>>) -> Result<Self> {
        if target == 0 {
            return Err(Error::ZeroArity);
        }
        if sources.is_empty() {
            return Err(Error::MalformedScheme("the source family is empty".into()));
        }
        for (j, h) in sources.iter().enumerate() {
            if h.is_empty() {
                return Err(Error::MalformedScheme(format!("source {j} has arity 0")));
            }
            for slot in h {
                match *slot {
                    Slot::Target(i) if i >= target => {
                        return Err(Error::MalformedScheme(format!(
                            "source {j} maps to position {i} of a {target}-ary target"
                        )))
                    }
                    Slot::Var(v) if v >= vars => {
                        return Err(Error::MalformedScheme(format!(
                            "source {j} uses indeterminate {v} of {vars}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            target,
            vars,
            sources,
        })
    }

    /// The single identity map on `m`.
    pub fn identity(m: usize) -> Result<Self> {
        Self::new(m, 0, vec![(0..m).map(Slot::Target).collect()])
    }

    /// `J` copies of the identity map on `m`.
    pub fn intersection(m: usize, j: usize) -> Result<Self> {
        Self::new(m, 0, vec![(0..m).map(Slot::Target).collect(); j])
    }

    /// The simple single-source scheme given by `h: n -> m`.
    pub fn simple(m: usize, h: &[usize]) -> Result<Self> {
        Self::new(m, 0, vec![h.iter().map(|&i| Slot::Target(i)).collect()])
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn sources(&self) -> &[Vec<Slot>] {
        &self.sources
    }

    pub fn source_arities(&self) -> Vec<usize> {
        self.sources.iter().map(Vec::len).collect()
    }

    pub fn is_simple(&self) -> bool {
        self.vars == 0
    }

    /// For each assignment `x ∈ U^{m+V}` (target digits most significant), the
    /// rank of `(x)h_j` in `U^{n_j}`.
    pub(crate) fn source_ranks(&self, k: usize) -> Result<Vec<Vec<u32>>> {
        let width = self.target + self.vars;
        let space = checked_space(k, width)?;
        let mut out = vec![Vec::with_capacity(space); self.sources.len()];
        for x in 0..space {
            let d = digits(x, width, k);
            for (j, h) in self.sources.iter().enumerate() {
                let r = h.iter().fold(0usize, |r, slot| {
                    r * k
                        + match *slot {
                            Slot::Target(i) => d[i],
                            Slot::Var(v) => d[self.target + v],
                        }
                });
                out[j].push(r as u32);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let maps: Vec<String> = self
            .sources
            .iter()
            .map(|h| {
                let s: Vec<String> = h.iter().map(Slot::to_string).collect();
                format!("[{}]", s.join(" "))
            })
            .collect();
        write!(f, "target {} vars {} maps {}", self.target, self.vars, maps.join(" "))
    }
}

/// `K` with `k_j^i = (h_j + ι) h_j^i`: indeterminates of `outer` come first,
/// then those of each inner scheme in order.
pub fn compose_schemes(outer: &Scheme, inner: &[Scheme]) -> Result<Scheme> {
    if inner.len() != outer.sources.len() {
        return Err(Error::FamilySize {
            expected: outer.sources.len(),
            found: inner.len(),
        });
    }
    let mut offset = outer.vars;
    let mut sources = Vec::new();
    for (h, hj) in outer.sources.iter().zip(inner) {
        if hj.target != h.len() {
            return Err(Error::MalformedScheme(format!(
                "inner scheme has target {} but the outer source has arity {}",
                hj.target,
                h.len()
            )));
        }
        for hji in &hj.sources {
            sources.push(
                hji.iter()
                    .map(|slot| match *slot {
                        Slot::Target(t) => h[t],
                        Slot::Var(w) => Slot::Var(offset + w),
                    })
                    .collect(),
            );
        }
        offset += hj.vars;
    }
    Scheme::new(outer.target, offset, sources)
}

/// The side of a tight minor over one universe: `{x : ∃σ ∀j (x+σ)h_j ∈ rels[j]}`.
fn minor_side(u: &UniverseRef, rels: &[&Relation], scheme: &Scheme) -> Result<Relation> {
    let k = u.size();
    let ranks = scheme.source_ranks(k)?;
    let per = checked_space(k, scheme.vars)?;
    let mut bits = FixedBitSet::with_capacity(checked_space(k, scheme.target)?);
    for a in 0..bits.len() {
        let found = (a * per..(a + 1) * per)
            .any(|x| rels.iter().zip(&ranks).all(|(r, rk)| r.contains_rank(rk[x] as usize)));
        if found {
            bits.insert(a);
        }
    }
    Ok(Relation::from_bits(u, scheme.target, bits))
}

fn check_family(family: &[Constraint], scheme: &Scheme) -> Result<(UniverseRef, UniverseRef)> {
    if family.len() != scheme.sources.len() || family.is_empty() {
        return Err(Error::FamilySize {
            expected: scheme.sources.len(),
            found: family.len(),
        });
    }
    let (a, b) = (family[0].domain().clone(), family[0].codomain().clone());
    for (c, h) in family.iter().zip(&scheme.sources) {
        Universe::check_same(&a, c.domain())?;
        Universe::check_same(&b, c.codomain())?;
        if c.arity() != h.len() {
            return Err(Error::ArityMismatch {
                expected: h.len(),
                found: c.arity(),
            });
        }
    }
    Ok((a, b))
}

/// The tight conjunctive minor of `family` via `scheme` (Skolem maps found by
/// exhaustive search).
pub fn tight_conjunctive_minor(family: &[Constraint], scheme: &Scheme) -> Result<Constraint> {
    let (a, b) = check_family(family, scheme)?;
    let rs: Vec<&Relation> = family.iter().map(|c| &c.antecedent).collect();
    let ss: Vec<&Relation> = family.iter().map(|c| &c.consequent).collect();
    Constraint::new(minor_side(&a, &rs, scheme)?, minor_side(&b, &ss, scheme)?)
}

/// Whether `c` is a conjunctive minor of `family` via `scheme`.
pub fn is_conjunctive_minor(c: &Constraint, family: &[Constraint], scheme: &Scheme) -> Result<bool> {
    let tight = tight_conjunctive_minor(family, scheme)?;
    if tight.arity() != c.arity() {
        return Err(Error::ArityMismatch {
            expected: tight.arity(),
            found: c.arity(),
        });
    }
    c.is_relaxation_of(&tight)
}

/// As [`is_conjunctive_minor`], for simple schemes only.
pub fn is_weak_conjunctive_minor(c: &Constraint, family: &[Constraint], scheme: &Scheme) -> Result<bool> {
    if !scheme.is_simple() {
        return Err(Error::NotSimple);
    }
    is_conjunctive_minor(c, family, scheme)
}

/// A finite set of constraints of arities `1..=arity_cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    domain: UniverseRef,
    codomain: UniverseRef,
    arity_cap: usize,
    per_arity: Vec<BTreeSet<Constraint>>,
}

impl ConstraintSet {
    pub fn new(a: &UniverseRef, b: &UniverseRef, arity_cap: usize) -> Result<Self> {
        if arity_cap == 0 {
            return Err(Error::InvalidBounds("constraint arity cap must be positive".into()));
        }
        Ok(Self {
            domain: a.clone(),
            codomain: b.clone(),
            arity_cap,
            per_arity: vec![BTreeSet::new(); arity_cap],
        })
    }

    pub fn from_constraints(
        a: &UniverseRef,
        b: &UniverseRef,
        arity_cap: usize,
        items: impl IntoIterator<Item = Constraint>,
    ) -> Result<Self> {
        let mut t = Self::new(a, b, arity_cap)?;
        for c in items {
            t.insert(c)?;
        }
        Ok(t)
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

    pub fn insert(&mut self, c: Constraint) -> Result<bool> {
        Universe::check_same(&self.domain, c.domain())?;
        Universe::check_same(&self.codomain, c.codomain())?;
        if c.arity() > self.arity_cap {
            return Err(Error::ArityCap {
                arity: c.arity(),
                cap: self.arity_cap,
            });
        }
        Ok(self.per_arity[c.arity() - 1].insert(c))
    }

    /// A copy with the given constraints added, raising the cap if needed.
    pub fn with(&self, extra: impl IntoIterator<Item = Constraint>) -> Result<Self> {
        let extra: Vec<Constraint> = extra.into_iter().collect();
        let cap = extra.iter().map(Constraint::arity).fold(self.arity_cap, usize::max);
        let mut out = Self::from_constraints(&self.domain, &self.codomain, cap, self.iter().cloned())?;
        for c in extra {
            out.insert(c)?;
        }
        Ok(out)
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        c.arity() >= 1 && c.arity() <= self.arity_cap && self.per_arity[c.arity() - 1].contains(c)
    }

    pub fn of_arity(&self, m: usize) -> impl Iterator<Item = &Constraint> {
        self.per_arity
            .get(m.wrapping_sub(1))
            .into_iter()
            .flat_map(|s| s.iter())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.per_arity.iter().flat_map(|s| s.iter())
    }

    pub fn len(&self) -> usize {
        self.per_arity.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &ConstraintSet) -> bool {
        self.iter().all(|c| other.contains(c))
    }

    pub fn max_arity(&self) -> usize {
        (1..=self.arity_cap)
            .rev()
            .find(|&m| !self.per_arity[m - 1].is_empty())
            .unwrap_or(0)
    }
}

/// Finitization of the unbounded quantifications in the closures and checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    /// Constraint and scheme target arity cap.
    pub m_max: usize,
    /// Function arity cap.
    pub n_max: usize,
    /// Scheme family size cap.
    pub j_max: usize,
    /// Indeterminate count cap.
    pub v_max: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            m_max: 2,
            n_max: 2,
            j_max: 2,
            v_max: 2,
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 || self.n_max == 0 || self.j_max == 0 {
            return Err(Error::InvalidBounds(format!(
                "m_max, n_max and j_max must be positive (got {}, {}, {})",
                self.m_max, self.n_max, self.j_max
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m_max={} n_max={} j_max={} v_max={}",
            self.m_max, self.n_max, self.j_max, self.v_max
        )
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::enumerate::{sample_constraint, sample_constraint_set, sample_scheme, seeded, Budget};
    use proptest::prelude::*;
    use rand::Rng;

    fn ab() -> (UniverseRef, UniverseRef) {
        (Universe::new("A", 2).unwrap(), Universe::new("B", 2).unwrap())
    }

    fn family(rng: &mut impl Rng, arities: &[usize]) -> Vec<Constraint> {
        let (a, b) = ab();
        arities.iter().map(|&n| sample_constraint(rng, &a, &b, n).unwrap()).collect()
    }

    fn arities(rng: &mut impl Rng, j_max: usize) -> Vec<usize> {
        let j = rng.random_range(1..=j_max);
        (0..j).map(|_| rng.random_range(1..=2)).collect()
    }

    // {a : a ∘ h_j ∈ R_j for every j}, read straight off the definition
    fn simple_side(u: &UniverseRef, rels: &[&Relation], scheme: &Scheme) -> Relation {
        let m = scheme.target();
        let maps: Vec<Vec<usize>> = scheme
            .sources()
            .iter()
            .map(|h| h.iter().map(|s| match s { Slot::Target(i) => *i, Slot::Var(_) => unreachable!() }).collect())
            .collect();
        let keep = (0..u.space(m).unwrap()).filter(|&r| {
            let a = u.unrank(r, m).unwrap();
            rels.iter().zip(&maps).all(|(rel, h)| rel.contains(&a.compose(h).unwrap()))
        });
        Relation::from_ranks(u, m, keep).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn simple_minors_need_no_skolem_search(seed in any::<u64>()) {
            let mut rng = seeded(seed, 0);
            let ar = arities(&mut rng, 3);
            let fam = family(&mut rng, &ar);
            let target = rng.random_range(1..=3);
            let scheme = sample_scheme(&mut rng, target, 0, &ar).unwrap();
            let tight = tight_conjunctive_minor(&fam, &scheme).unwrap();
            let (a, b) = ab();
            let rs: Vec<&Relation> = fam.iter().map(|c| c.antecedent()).collect();
            let ss: Vec<&Relation> = fam.iter().map(|c| c.consequent()).collect();
            prop_assert_eq!(tight.antecedent(), &simple_side(&a, &rs, &scheme));
            prop_assert_eq!(tight.consequent(), &simple_side(&b, &ss, &scheme));
        }

        #[test]
        fn minors_of_minors_are_minors(seed in any::<u64>(), vars in 0usize..=1) {
            let mut rng = seeded(seed, 1);
            let outer_ar = arities(&mut rng, 2);
            let mut base = Vec::new();
            let mut inner = Vec::new();
            let mut middle = Vec::new();
            for &n in &outer_ar {
                let ar = arities(&mut rng, 2);
                let fam = family(&mut rng, &ar);
                let h = sample_scheme(&mut rng, n, vars, &ar).unwrap();
                middle.push(tight_conjunctive_minor(&fam, &h).unwrap());
                base.extend(fam);
                inner.push(h);
            }
            let target = rng.random_range(1..=2);
            let outer = sample_scheme(&mut rng, target, vars, &outer_ar).unwrap();
            let c = tight_conjunctive_minor(&middle, &outer).unwrap();
            let k = compose_schemes(&outer, &inner).unwrap();
            prop_assert!(is_conjunctive_minor(&c, &base, &k).unwrap());
            if vars == 0 {
                prop_assert!(k.is_simple());
                prop_assert!(is_weak_conjunctive_minor(&c, &base, &k).unwrap());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn bounded_closures_are_closure_operators(seed in any::<u64>()) {
            let (a, b) = ab();
            let bounds = Bounds::default();
            let small = sample_constraint_set(&mut seeded(seed, 2), &a, &b, 2, 3).unwrap();
            let big = small.with(sample_constraint_set(&mut seeded(seed, 3), &a, &b, 2, 3).unwrap().iter().cloned()).unwrap();
            for kind in [ClosureKind::Weak, ClosureKind::Full] {
                let c = close(ConstraintTable::from_set(&small, 2).unwrap(), &bounds, kind).unwrap().table;
                prop_assert!(small.iter().all(|x| c.contains(x)));
                let cb = close(ConstraintTable::from_set(&big, 2).unwrap(), &bounds, kind).unwrap().table;
                prop_assert!(c.is_subset(&cb));
                prop_assert_eq!(&close(c.clone(), &bounds, kind).unwrap().table, &c);
                // local closure is the identity, so closed sets stay closed under it
                let closed = c.to_set(&Budget::default()).unwrap();
                prop_assert_eq!(&lo_closure(&closed), &closed);
                prop_assert_eq!(&ConstraintTable::from_set(&lo_closure(&closed), 2).unwrap(), &c);
            }
        }
    }
}

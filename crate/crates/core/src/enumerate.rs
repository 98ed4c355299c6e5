//! Bounded exhaustive enumerators and seeded samplers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::{Bounds, Constraint, ConstraintSet, Scheme};
use crate::error::{Error, Result};
use crate::multifunction::{FunctionClass, FunctionKind, MultiFunction};
use crate::universe::{odometer, Relation, Slot, UniverseRef};

pub const DEFAULT_MAX_TABLES: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_tables: u128,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_tables: DEFAULT_MAX_TABLES,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn new(max_tables: u128, seed: u64) -> Result<Self> {
        if max_tables == 0 {
            return Err(Error::InvalidBounds("budget must be at least 1".into()));
        }
        Ok(Self { max_tables, seed })
    }

    pub fn check(&self, what: &'static str, count: u128) -> Result<()> {
        if count > self.max_tables {
            Err(Error::BudgetExceeded {
                what,
                count,
                budget: self.max_tables,
            })
        } else {
            Ok(())
        }
    }

    /// The generator for the `index`-th sample drawn under this budget's seed.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        seeded(self.seed, index)
    }
}

/// Independent stream `index` of the generator seeded with `seed`.
pub fn seeded(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn pow_u128(base: u128, exp: usize) -> u128 {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// Number of `n`-ary tables from `A` to `P(B)`.
pub fn function_count(a: &UniverseRef, b: &UniverseRef, n: usize) -> u128 {
    let inputs = pow_u128(a.size() as u128, n);
    let values = pow_u128(2, b.size());
    usize::try_from(inputs).map_or(u128::MAX, |i| pow_u128(values, i))
}

/// Every `n`-ary function in rank order (entry 0 most significant).
pub fn all_functions(
    a: &UniverseRef,
    b: &UniverseRef,
    n: usize,
    budget: &Budget,
) -> Result<impl Iterator<Item = MultiFunction>> {
    if n == 0 {
        return Err(Error::ZeroArity);
    }
    budget.check("function tables", function_count(a, b, n))?;
    if b.size() > 64 {
        return Err(Error::CodomainTooLarge(b.size()));
    }
    let len = a.space(n)?;
    let values = 1usize << b.size();
    let (a, b) = (a.clone(), b.clone());
    let mut cur = Some(vec![0usize; len]);
    Ok(std::iter::from_fn(move || {
        let t = cur.take()?;
        let mut next = t.clone();
        if odometer(&mut next, values) {
            cur = Some(next);
        }
        Some(MultiFunction::from_parts_unchecked(
            &a,
            &b,
            n,
            t.into_iter().map(|v| v as u64).collect(),
        ))
    }))
}

/// Every `m`-ary relation, by bitmask over tuple ranks.
pub fn all_relations(
    u: &UniverseRef,
    m: usize,
    budget: &Budget,
) -> Result<impl Iterator<Item = Relation>> {
    let space = u.space(m)?;
    budget.check("relations", pow_u128(2, space))?;
    let u = u.clone();
    Ok((0..1u64 << space).map(move |mask| Relation::from_mask(&u, m, mask).expect("mask in range")))
}

/// Every `m`-ary constraint, antecedent-major.
pub fn all_constraints(
    a: &UniverseRef,
    b: &UniverseRef,
    m: usize,
    budget: &Budget,
) -> Result<impl Iterator<Item = Constraint>> {
    let (sa, sb) = (a.space(m)?, b.space(m)?);
    budget.check("constraints", pow_u128(2, sa).saturating_mul(pow_u128(2, sb)))?;
    let rs: Vec<Relation> = all_relations(a, m, budget)?.collect();
    let ss: Vec<Relation> = all_relations(b, m, budget)?.collect();
    Ok(rs.into_iter().flat_map(move |r| {
        ss.clone()
            .into_iter()
            .map(move |s| Constraint::new(r.clone(), s).expect("matching arities"))
    }))
}

/// Source maps `n_j -> target ⊎ V` for the given source arities, with the
/// indeterminates named in order of first occurrence and every one used.
pub fn schemes_with_sources(target: usize, vars: usize, arities: &[usize]) -> Vec<Scheme> {
    let total: usize = arities.iter().sum();
    let mut out = Vec::new();
    let mut slots = vec![Slot::Target(0); total];
    fn rec(
        pos: usize,
        next_var: usize,
        target: usize,
        vars: usize,
        arities: &[usize],
        slots: &mut Vec<Slot>,
        out: &mut Vec<Scheme>,
    ) {
        if pos == slots.len() {
            if next_var == vars {
                let mut sources = Vec::with_capacity(arities.len());
                let mut at = 0;
                for &n in arities {
                    sources.push(slots[at..at + n].to_vec());
                    at += n;
                }
                out.push(Scheme::new(target, vars, sources).expect("well-formed by construction"));
            }
            return;
        }
        // not enough positions left to introduce the remaining indeterminates
        if vars - next_var > slots.len() - pos {
            return;
        }
        for t in 0..target {
            slots[pos] = Slot::Target(t);
            rec(pos + 1, next_var, target, vars, arities, slots, out);
        }
        for v in 0..(next_var + 1).min(vars) {
            slots[pos] = Slot::Var(v);
            rec(pos + 1, next_var.max(v + 1), target, vars, arities, slots, out);
        }
    }
    rec(0, 0, target, vars, arities, &mut slots, &mut out);
    out
}

/// Every canonical scheme with target `<= m_max`, at most `j_max` sources of
/// arity `<= max_source_arity`, and at most `v_max` indeterminates.
///
/// Canonical: indeterminates named by first occurrence, all used, and
/// sources listed in non-decreasing order.
pub fn all_schemes(bounds: &Bounds, max_source_arity: usize, budget: &Budget) -> Result<Vec<Scheme>> {
    bounds.validate()?;
    let mut out = Vec::new();
    for target in 1..=bounds.m_max {
        for vars in 0..=bounds.v_max {
            for j in 1..=bounds.j_max {
                let mut arities = vec![1usize; j];
                loop {
                    if arities.windows(2).all(|w| w[0] <= w[1]) {
                        for s in schemes_with_sources(target, vars, &arities) {
                            if s.sources().windows(2).all(|w| {
                                w[0].len() < w[1].len() || (w[0].len() == w[1].len() && w[0] <= w[1])
                            }) {
                                out.push(s);
                                budget.check("schemes", out.len() as u128)?;
                            }
                        }
                    }
                    let mut d: Vec<usize> = arities.iter().map(|&x| x - 1).collect();
                    if !odometer(&mut d, max_source_arity) {
                        break;
                    }
                    arities = d.into_iter().map(|x| x + 1).collect();
                }
            }
        }
    }
    Ok(out)
}

/// A uniformly random value mask admitted by `kind` over a codomain of size `k`.
fn sample_value(rng: &mut impl Rng, k: usize, kind: FunctionKind) -> u64 {
    match kind {
        FunctionKind::Any => rng.random_range(0..1u64 << k),
        FunctionKind::Total => rng.random_range(1..1u64 << k),
        FunctionKind::Partial => {
            let x = rng.random_range(0..=k);
            if x == k {
                0
            } else {
                1 << x
            }
        }
        FunctionKind::SingleValued => 1 << rng.random_range(0..k),
    }
}

/// A uniformly random `n`-ary table of the given kind.
pub fn sample_function(
    rng: &mut impl Rng,
    a: &UniverseRef,
    b: &UniverseRef,
    n: usize,
    kind: FunctionKind,
) -> Result<MultiFunction> {
    let len = a.space(n)?;
    let table = (0..len).map(|_| sample_value(rng, b.size(), kind)).collect();
    MultiFunction::new(a, b, n, table)
}

/// A class with a uniformly chosen number of members in `1..=max_size`, each of
/// uniformly chosen arity `1..=arity_cap`.
pub fn sample_class(
    rng: &mut impl Rng,
    a: &UniverseRef,
    b: &UniverseRef,
    arity_cap: usize,
    max_size: usize,
    kind: FunctionKind,
) -> Result<FunctionClass> {
    let mut c = FunctionClass::new(a, b, arity_cap)?;
    let size = rng.random_range(1..=max_size.max(1));
    for _ in 0..size {
        let n = rng.random_range(1..=arity_cap);
        c.insert(sample_function(rng, a, b, n, kind)?)?;
    }
    Ok(c)
}

/// A uniformly random relation (each tuple present with probability `density`).
pub fn sample_relation(rng: &mut impl Rng, u: &UniverseRef, m: usize, density: f64) -> Result<Relation> {
    let space = u.space(m)?;
    Relation::from_ranks(u, m, (0..space).filter(|_| rng.random_bool(density)))
}

pub fn sample_constraint(
    rng: &mut impl Rng,
    a: &UniverseRef,
    b: &UniverseRef,
    m: usize,
) -> Result<Constraint> {
    Constraint::new(
        sample_relation(rng, a, m, 0.5)?,
        sample_relation(rng, b, m, 0.5)?,
    )
}

/// A set of `1..=max_size` constraints of arities `1..=m_max`.
pub fn sample_constraint_set(
    rng: &mut impl Rng,
    a: &UniverseRef,
    b: &UniverseRef,
    m_max: usize,
    max_size: usize,
) -> Result<ConstraintSet> {
    let mut t = ConstraintSet::new(a, b, m_max)?;
    let size = rng.random_range(1..=max_size.max(1));
    for _ in 0..size {
        let m = rng.random_range(1..=m_max);
        t.insert(sample_constraint(rng, a, b, m)?)?;
    }
    Ok(t)
}

/// A random scheme with the given target, indeterminate count and source arities.
pub fn sample_scheme(rng: &mut impl Rng, target: usize, vars: usize, arities: &[usize]) -> Result<Scheme> {
    let sources = arities
        .iter()
        .map(|&n| {
            (0..n)
                .map(|_| {
                    let x = rng.random_range(0..target + vars);
                    if x < target {
                        Slot::Target(x)
                    } else {
                        Slot::Var(x - target)
                    }
                })
                .collect()
        })
        .collect();
    Scheme::new(target, vars, sources)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::Universe;

    fn u(k: usize) -> UniverseRef {
        Universe::new("U", k).unwrap()
    }

    #[test]
    fn function_counts() {
        let b = Budget::default();
        assert_eq!(all_functions(&u(2), &u(2), 1, &b).unwrap().count(), 16);
        assert_eq!(all_functions(&u(2), &u(2), 2, &b).unwrap().count(), 256);
        assert_eq!(all_functions(&u(1), &u(1), 1, &b).unwrap().count(), 2);
        for ka in 1..=3 {
            for kb in 1..=3 {
                for n in 1..=2 {
                    let expected = (1u128 << kb).pow((ka as u32).pow(n as u32));
                    assert_eq!(function_count(&u(ka), &u(kb), n), expected);
                    match all_functions(&u(ka), &u(kb), n, &b) {
                        Ok(it) => assert_eq!(it.count() as u128, expected),
                        Err(e) => assert!(expected > b.max_tables, "{e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn function_stream_is_in_rank_order() {
        let all: Vec<_> = all_functions(&u(2), &u(2), 1, &Budget::default()).unwrap().collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all[0].is_empty_valued());
    }

    #[test]
    fn budget_refusal() {
        let b = Budget::new(100, 0).unwrap();
        assert!(matches!(
            all_functions(&u(2), &u(2), 2, &b),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(Budget::new(0, 0).is_err());
    }

    #[test]
    fn relation_and_constraint_counts() {
        let b = Budget::default();
        assert_eq!(all_relations(&u(2), 1, &b).unwrap().count(), 4);
        assert_eq!(all_constraints(&u(2), &u(2), 1, &b).unwrap().count(), 16);
        assert_eq!(all_relations(&u(3), 2, &b).unwrap().count(), 512);
        assert_eq!(all_constraints(&u(3), &u(2), 1, &b).unwrap().count(), 32);
    }

    #[test]
    fn schemes_contain_diagonal_collapse() {
        let bounds = Bounds { m_max: 1, n_max: 1, j_max: 1, v_max: 0 };
        let all = all_schemes(&bounds, 2, &Budget::default()).unwrap();
        let collapse = Scheme::new(1, 0, vec![vec![Slot::Target(0), Slot::Target(0)]]).unwrap();
        assert!(all.contains(&collapse));
        assert_eq!(all.len(), 2);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn indeterminates_are_canonical() {
        for s in schemes_with_sources(1, 2, &[2, 2]) {
            let mut seen = 0;
            for slot in s.sources().iter().flatten() {
                if let Slot::Var(v) = *slot {
                    assert!(v <= seen);
                    seen = seen.max(v + 1);
                }
            }
            assert_eq!(seen, 2);
        }
    }

    #[test]
    fn samplers_reproduce() {
        let (a, b) = (u(2), u(3));
        let f1 = sample_function(&mut seeded(7, 3), &a, &b, 2, FunctionKind::Any).unwrap();
        let f2 = sample_function(&mut seeded(7, 3), &a, &b, 2, FunctionKind::Any).unwrap();
        assert_eq!(f1, f2);
        let c1 = sample_class(&mut seeded(1, 0), &a, &b, 2, 5, FunctionKind::Total).unwrap();
        let c2 = sample_class(&mut seeded(1, 0), &a, &b, 2, 5, FunctionKind::Total).unwrap();
        assert_eq!(c1, c2);
        assert!(c1.all_admitted(FunctionKind::Total));
        let t1 = sample_constraint_set(&mut seeded(9, 1), &a, &b, 2, 4).unwrap();
        let t2 = sample_constraint_set(&mut seeded(9, 1), &a, &b, 2, 4).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn kinds_are_respected() {
        let a = u(2);
        let mut rng = seeded(3, 0);
        for kind in [FunctionKind::Total, FunctionKind::Partial, FunctionKind::SingleValued] {
            for _ in 0..50 {
                assert!(kind.admits(&sample_function(&mut rng, &a, &a, 2, kind).unwrap()));
            }
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::universe::Universe;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn same_seed_same_samples(seed in any::<u64>(), index in 0u64..8) {
            let (a, b) = (Universe::new("A", 3).unwrap(), Universe::new("B", 2).unwrap());
            let draw = || {
                let mut rng = seeded(seed, index);
                let m = sample_class(&mut rng, &a, &b, 2, 5, FunctionKind::Any).unwrap();
                let t = sample_constraint_set(&mut rng, &a, &b, 2, 5).unwrap();
                let s = sample_scheme(&mut rng, 2, 1, &[1, 2]).unwrap();
                (
                    m.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    t.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    s.to_string(),
                )
            };
            prop_assert_eq!(draw(), draw());
        }
    }
}

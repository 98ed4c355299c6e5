//! Intensional storage for constraint sets closed under relaxation and
//! intersection.
//!
//! Such a set is determined, at each arity `m`, by one minimal consequent per
//! antecedent: `(R, S)` belongs to the set iff `S ⊇ S_min(R)`. Antecedents and
//! consequents are bitmasks over tuple ranks, so `|A|^m <= 20` and
//! `|B|^m <= 64` are required at every represented arity.

use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::multifunction::{product_mask, MultiFunction};
use crate::universe::{checked_space, digits, Relation, Tuple, Universe, UniverseRef};

use super::{Constraint, ConstraintSet};

/// Largest antecedent tuple space an intensional table indexes.
pub const MAX_ANTECEDENT_BITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    ant_bits: usize,
    cons_bits: usize,
    entries: Vec<Option<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintTable {
    domain: UniverseRef,
    codomain: UniverseRef,
    levels: Vec<Level>,
}

/// A failed satisfaction check: `f(columns)` contains `tuple`, which lies
/// outside the minimal consequent of the antecedent spanned by `columns`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub columns: Vec<Tuple>,
    pub tuple: Tuple,
}

pub(crate) fn meet(x: Option<u64>, y: Option<u64>) -> Option<u64> {
    match (x, y) {
        (Some(a), Some(b)) => Some(a & b),
        (a, None) => a,
        (None, b) => b,
    }
}

impl ConstraintTable {
    /// A table with every antecedent unconstrained (`fill = None`) or with the
    /// given minimal consequent everywhere.
    pub(crate) fn filled(a: &UniverseRef, b: &UniverseRef, m_max: usize, fill: Option<u64>) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::InvalidBounds("constraint arity cap must be positive".into()));
        }
        let mut levels = Vec::with_capacity(m_max);
        for m in 1..=m_max {
            let ant_bits = checked_space(a.size(), m)?;
            let cons_bits = checked_space(b.size(), m)?;
            if ant_bits > MAX_ANTECEDENT_BITS || cons_bits > 64 {
                return Err(Error::BudgetExceeded {
                    what: "intensional table tuple space",
                    count: ant_bits.max(cons_bits) as u128,
                    budget: MAX_ANTECEDENT_BITS as u128,
                });
            }
            levels.push(Level {
                ant_bits,
                cons_bits,
                entries: vec![fill; 1 << ant_bits],
            });
        }
        Ok(Self {
            domain: a.clone(),
            codomain: b.clone(),
            levels,
        })
    }

    /// The empty constraint set.
    pub fn new(a: &UniverseRef, b: &UniverseRef, m_max: usize) -> Result<Self> {
        Self::filled(a, b, m_max, None)
    }

    /// The closure of `t` under relaxation and intersection, at arities `<= m_max`.
    pub fn from_set(t: &ConstraintSet, m_max: usize) -> Result<Self> {
        let mut table = Self::new(t.domain(), t.codomain(), m_max)?;
        for c in t.iter() {
            table.insert(c)?;
        }
        table.relax();
        Ok(table)
    }

    pub fn domain(&self) -> &UniverseRef {
        &self.domain
    }

    pub fn codomain(&self) -> &UniverseRef {
        &self.codomain
    }

    pub fn m_max(&self) -> usize {
        self.levels.len()
    }

    pub(crate) fn full_cons(&self, m: usize) -> u64 {
        let bits = self.levels[m - 1].cons_bits;
        if bits == 64 {
            u64::MAX
        } else {
            (1 << bits) - 1
        }
    }

    pub(crate) fn ant_bits(&self, m: usize) -> usize {
        self.levels[m - 1].ant_bits
    }

    pub(crate) fn entries(&self, m: usize) -> &[Option<u64>] {
        &self.levels[m - 1].entries
    }

    pub fn entry(&self, m: usize, antecedent: u64) -> Option<u64> {
        self.levels[m - 1].entries[antecedent as usize]
    }

    pub(crate) fn set_entry(&mut self, m: usize, antecedent: u64, s: Option<u64>) {
        self.levels[m - 1].entries[antecedent as usize] = s;
    }

    /// Intersects the stored consequent at `antecedent` with `s`; returns whether it changed.
    pub(crate) fn meet_at(&mut self, m: usize, antecedent: u64, s: u64) -> bool {
        let slot = &mut self.levels[m - 1].entries[antecedent as usize];
        let next = meet(*slot, Some(s));
        let changed = next != *slot;
        *slot = next;
        changed
    }

    fn check_constraint(&self, c: &Constraint) -> Result<()> {
        Universe::check_same(&self.domain, c.domain())?;
        Universe::check_same(&self.codomain, c.codomain())?;
        if c.arity() > self.m_max() {
            return Err(Error::ArityCap {
                arity: c.arity(),
                cap: self.m_max(),
            });
        }
        Ok(())
    }

    /// Adds `c` without re-closing under relaxation; call [`ConstraintTable::relax`] afterwards.
    pub fn insert(&mut self, c: &Constraint) -> Result<bool> {
        self.check_constraint(c)?;
        let r = c.antecedent().to_mask().expect("antecedent space bounded");
        let s = c.consequent().to_mask().expect("consequent space bounded");
        Ok(self.meet_at(c.arity(), r, s))
    }

    /// Closes every level under relaxation: each antecedent inherits the
    /// consequents of its supersets.
    pub fn relax(&mut self) {
        for level in &mut self.levels {
            let e = &mut level.entries;
            for bit in 0..level.ant_bits {
                let b = 1usize << bit;
                for mask in 0..e.len() {
                    if mask & b == 0 {
                        e[mask] = meet(e[mask], e[mask | b]);
                    }
                }
            }
        }
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        if self.check_constraint(c).is_err() {
            return false;
        }
        let r = c.antecedent().to_mask().expect("antecedent space bounded");
        let s = c.consequent().to_mask().expect("consequent space bounded");
        matches!(self.entry(c.arity(), r), Some(min) if min & !s == 0)
    }

    /// `S_min(R)`, or `None` when no constraint with antecedent `R` is present.
    pub fn minimal_consequent(&self, r: &Relation) -> Result<Option<Relation>> {
        Universe::check_same(&self.domain, r.universe())?;
        if r.arity() > self.m_max() {
            return Err(Error::ArityCap {
                arity: r.arity(),
                cap: self.m_max(),
            });
        }
        let mask = r.to_mask().expect("antecedent space bounded");
        self.entry(r.arity(), mask)
            .map(|s| Relation::from_mask(&self.codomain, r.arity(), s))
            .transpose()
    }

    /// Entries not obtained by relaxing an immediate superset with the same consequent.
    pub fn generators(&self, m: usize) -> Vec<(u64, u64)> {
        let level = &self.levels[m - 1];
        let e = &level.entries;
        (0..e.len())
            .filter_map(|mask| {
                let s = e[mask]?;
                let redundant =
                    (0..level.ant_bits).any(|bit| mask >> bit & 1 == 0 && e[mask | 1 << bit] == Some(s));
                (!redundant).then_some((mask as u64, s))
            })
            .collect()
    }

    /// Set inclusion of the represented constraint sets.
    pub fn is_subset(&self, other: &ConstraintTable) -> bool {
        self.m_max() == other.m_max()
            && self.levels.iter().zip(&other.levels).all(|(x, y)| {
                x.entries.iter().zip(&y.entries).all(|(a, b)| match (a, b) {
                    (None, _) => true,
                    (Some(_), None) => false,
                    (Some(s), Some(t)) => t & !s == 0,
                })
            })
    }

    /// Number of constraints represented at arity `m`.
    pub fn count(&self, m: usize) -> u128 {
        let level = &self.levels[m - 1];
        level
            .entries
            .iter()
            .flatten()
            .map(|s| 1u128 << (level.cons_bits - s.count_ones() as usize))
            .sum()
    }

    /// The first constraint (antecedent-major order) in `self` but not in `other`.
    pub fn first_difference(&self, other: &ConstraintTable) -> Option<Constraint> {
        for m in 1..=self.m_max().min(other.m_max()) {
            for (mask, (a, b)) in self.entries(m).iter().zip(other.entries(m)).enumerate() {
                let s = match (a, b) {
                    (Some(s), None) => *s,
                    (Some(s), Some(t)) if t & !s != 0 => *s,
                    _ => continue,
                };
                return Some(self.constraint_at(m, mask as u64, s));
            }
        }
        None
    }

    pub(crate) fn constraint_at(&self, m: usize, r: u64, s: u64) -> Constraint {
        Constraint::new(
            Relation::from_mask(&self.domain, m, r).expect("mask within antecedent space"),
            Relation::from_mask(&self.codomain, m, s).expect("mask within consequent space"),
        )
        .expect("same arity")
    }

    /// Every represented constraint, as an explicit set.
    pub fn to_set(&self, budget: &Budget) -> Result<ConstraintSet> {
        let total: u128 = (1..=self.m_max()).map(|m| self.count(m)).sum();
        budget.check("constraints", total)?;
        let mut out = ConstraintSet::new(&self.domain, &self.codomain, self.m_max())?;
        for m in 1..=self.m_max() {
            let free_all = self.full_cons(m);
            for (r, e) in self.entries(m).iter().enumerate() {
                let Some(s) = *e else { continue };
                let free = free_all & !s;
                let mut extra = 0u64;
                loop {
                    out.insert(self.constraint_at(m, r as u64, s | extra))?;
                    extra = extra.wrapping_sub(free) & free;
                    if extra == 0 {
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The first violated constraint, scanning arities upward and row tuples in rank order.
    pub fn violation(&self, f: &MultiFunction) -> Result<Option<Violation>> {
        Universe::check_same(&self.domain, f.domain())?;
        Universe::check_same(&self.codomain, f.codomain())?;
        let k = self.domain.size();
        let kb = self.codomain.size();
        let n = f.arity();
        let rows = self.domain.space(n)?;
        let row_digits: Vec<Vec<usize>> = (0..rows).map(|r| digits(r, n, k)).collect();
        let live: Vec<usize> = (0..rows).filter(|&r| f.value(r) != 0).collect();
        if live.is_empty() {
            return Ok(None);
        }
        for m in 1..=self.m_max() {
            let entries = self.entries(m);
            let mut pick = vec![0usize; m];
            let mut values = vec![0u64; m];
            loop {
                let chosen: Vec<usize> = pick.iter().map(|&i| live[i]).collect();
                let cols = column_mask(&chosen, &row_digits, n, k);
                if let Some(s) = entries[cols as usize] {
                    for (v, &r) in values.iter_mut().zip(&chosen) {
                        *v = f.value(r);
                    }
                    let p = product_mask(&values, kb);
                    if p & !s != 0 {
                        let bad = (p & !s).trailing_zeros() as usize;
                        let columns = (0..n)
                            .map(|j| Tuple::new(chosen.iter().map(|&r| row_digits[r][j]).collect::<Vec<_>>()))
                            .collect();
                        return Ok(Some(Violation {
                            constraint: self.constraint_at(m, cols, s),
                            columns,
                            tuple: Tuple::new(digits(bad, m, kb)),
                        }));
                    }
                }
                if !crate::universe::odometer(&mut pick, live.len()) {
                    break;
                }
            }
        }
        Ok(None)
    }

    pub fn satisfied_by(&self, f: &MultiFunction) -> Result<bool> {
        Ok(self.violation(f)?.is_none())
    }
}

/// Set of columns `(rows[0][j], ..., rows[m-1][j])`, `j < n`, as an antecedent mask.
pub(crate) fn column_mask(rows: &[usize], row_digits: &[Vec<usize>], n: usize, k: usize) -> u64 {
    let mut mask = 0u64;
    for j in 0..n {
        let rank = rows.iter().fold(0usize, |acc, &r| acc * k + row_digits[r][j]);
        mask |= 1 << rank;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> (UniverseRef, UniverseRef) {
        (Universe::new("A", 2).unwrap(), Universe::new("B", 2).unwrap())
    }

    #[test]
    fn relaxation_sweep_and_membership() {
        let (a, b) = ab();
        let c = Constraint::new(
            Relation::from_ranks(&a, 2, [0, 3]).unwrap(),
            Relation::from_ranks(&b, 2, [0, 3]).unwrap(),
        )
        .unwrap();
        let t = ConstraintSet::from_constraints(&a, &b, 2, [c.clone()]).unwrap();
        let table = ConstraintTable::from_set(&t, 2).unwrap();
        assert!(table.contains(&c));
        let weaker = Constraint::new(
            Relation::from_ranks(&a, 2, [3]).unwrap(),
            Relation::from_ranks(&b, 2, [0, 1, 3]).unwrap(),
        )
        .unwrap();
        assert!(table.contains(&weaker));
        let stronger = Constraint::new(
            Relation::from_ranks(&a, 2, [3]).unwrap(),
            Relation::from_ranks(&b, 2, [3]).unwrap(),
        )
        .unwrap();
        assert!(!table.contains(&stronger));
        assert!(!table.contains(&Constraint::trivial(&a, &b, 1).unwrap()));
        assert_eq!(table.generators(2), vec![(0b1001, 0b1001)]);
        // every subset of {0, 3} with every superset of {0, 3}
        assert_eq!(table.count(2), 4 * 4);
        let set = table.to_set(&Budget::default()).unwrap();
        assert_eq!(set.len(), 16);
        assert!(set.iter().all(|x| table.contains(x)));
    }

    #[test]
    fn intersections_are_implied() {
        let (a, b) = ab();
        let c1 = Constraint::new(
            Relation::from_ranks(&a, 1, [0, 1]).unwrap(),
            Relation::from_ranks(&b, 1, [0]).unwrap(),
        )
        .unwrap();
        let c2 = Constraint::new(
            Relation::from_ranks(&a, 1, [0]).unwrap(),
            Relation::from_ranks(&b, 1, [1]).unwrap(),
        )
        .unwrap();
        let t = ConstraintSet::from_constraints(&a, &b, 1, [c1, c2]).unwrap();
        let table = ConstraintTable::from_set(&t, 1).unwrap();
        assert_eq!(table.entry(1, 0b01), Some(0));
        assert_eq!(table.entry(1, 0b11), Some(0b01));
    }

    #[test]
    fn subset_and_difference() {
        let (a, b) = ab();
        let empty = ConstraintTable::new(&a, &b, 2).unwrap();
        let t = ConstraintSet::from_constraints(&a, &b, 2, [Constraint::trivial(&a, &b, 1).unwrap()]).unwrap();
        let table = ConstraintTable::from_set(&t, 2).unwrap();
        assert!(empty.is_subset(&table));
        assert!(!table.is_subset(&empty));
        assert_eq!(
            table.first_difference(&empty),
            Some(Constraint::new(Relation::empty(&a, 1).unwrap(), Relation::full(&b, 1).unwrap()).unwrap())
        );
    }

    #[test]
    fn satisfaction_against_table() {
        let (a, b) = ab();
        let t = ConstraintSet::from_constraints(&a, &b, 2, [Constraint::equality(&a, &b)]).unwrap();
        let table = ConstraintTable::from_set(&t, 2).unwrap();
        let partial = MultiFunction::new(&a, &b, 1, vec![0b01, 0]).unwrap();
        assert!(table.satisfied_by(&partial).unwrap());
        let multi = MultiFunction::new(&a, &b, 1, vec![0b11, 0]).unwrap();
        let v = table.violation(&multi).unwrap().unwrap();
        assert_eq!(v.columns, vec![Tuple::new([0, 0])]);
        assert_eq!(v.tuple, Tuple::new([0, 1]));
    }

    #[test]
    fn oversized_tables_are_refused() {
        let a = Universe::new("A", 5).unwrap();
        assert!(matches!(
            ConstraintTable::new(&a, &a, 2),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}

//! Bounded fixpoints for closure under (weak) conjunctive minors, and the
//! local-closure operator.
//!
//! Tables are always closed under relaxation and intersection, so a round only
//! needs to form minors whose families consist of generators. For simple
//! schemes every minor is an intersection of single-source minors, and
//! single-source simple minors compose, so the weak closure is exact at all
//! represented arities. The full closure is a lower approximation: families
//! are capped at `j_max` members and schemes at `v_max` indeterminates.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::schemes_with_sources;
use crate::error::Result;
use crate::universe::{checked_space, Slot};

use super::{Bounds, ConstraintSet, ConstraintTable, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureKind {
    /// Closure under weak (simple-scheme) conjunctive minors.
    Weak,
    /// Closure under conjunctive minors.
    Full,
}

/// A closed table together with the bounds it was computed under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedClosure {
    pub table: ConstraintTable,
    pub bounds: Bounds,
    pub kind: ClosureKind,
    /// Whether the table equals the unbounded closure at every represented arity.
    pub exact: bool,
    pub rounds: usize,
}

pub fn wcm_closure(t: &ConstraintSet, bounds: &Bounds) -> Result<BoundedClosure> {
    close(ConstraintTable::from_set(t, bounds.m_max)?, bounds, ClosureKind::Weak)
}

pub fn cm_closure(t: &ConstraintSet, bounds: &Bounds) -> Result<BoundedClosure> {
    close(ConstraintTable::from_set(t, bounds.m_max)?, bounds, ClosureKind::Full)
}

/// Over finite universes every constraint is a finite relaxation of itself,
/// so every set is locally closed and this is the identity.
pub fn lo_closure(t: &ConstraintSet) -> ConstraintSet {
    debug_assert!(t.iter().all(|c| c.is_finite_relaxation_of(c).unwrap_or(false)));
    t.clone()
}

struct CompiledScheme {
    target: usize,
    per_a: usize,
    per_b: usize,
    ranks_a: Vec<Vec<u32>>,
    ranks_b: Vec<Vec<u32>>,
}

impl CompiledScheme {
    fn new(s: &Scheme, ka: usize, kb: usize) -> Result<Self> {
        Ok(Self {
            target: s.target(),
            per_a: checked_space(ka, s.vars())?,
            per_b: checked_space(kb, s.vars())?,
            ranks_a: s.source_ranks(ka)?,
            ranks_b: s.source_ranks(kb)?,
        })
    }

    fn side(ranks: &[Vec<u32>], per: usize, rels: &[u64]) -> u64 {
        let points = ranks[0].len() / per;
        let mut out = 0u64;
        for p in 0..points {
            if (p * per..(p + 1) * per).any(|x| rels.iter().zip(ranks).all(|(r, rk)| r >> rk[x] & 1 == 1)) {
                out |= 1 << p;
            }
        }
        out
    }

    fn apply(&self, family: &[(u64, u64)]) -> (u64, u64) {
        let rs: Vec<u64> = family.iter().map(|g| g.0).collect();
        let ss: Vec<u64> = family.iter().map(|g| g.1).collect();
        (
            Self::side(&self.ranks_a, self.per_a, &rs),
            Self::side(&self.ranks_b, self.per_b, &ss),
        )
    }
}

/// Sources each use an indeterminate and are linked through shared ones.
fn is_linked(s: &Scheme) -> bool {
    let vars_of: Vec<BTreeSet<usize>> = s
        .sources()
        .iter()
        .map(|h| {
            h.iter()
                .filter_map(|x| match *x {
                    Slot::Var(v) => Some(v),
                    Slot::Target(_) => None,
                })
                .collect()
        })
        .collect();
    if vars_of.iter().any(BTreeSet::is_empty) {
        return false;
    }
    let mut reached = vec![false; vars_of.len()];
    reached[0] = true;
    let mut frontier = vec![0];
    while let Some(j) = frontier.pop() {
        for i in 0..vars_of.len() {
            if !reached[i] && !vars_of[i].is_disjoint(&vars_of[j]) {
                reached[i] = true;
                frontier.push(i);
            }
        }
    }
    reached.into_iter().all(|r| r)
}

type Generator = (usize, u64, u64);

/// Multisets of `size` generator indices (non-decreasing), with at least one new member.
fn families(count: usize, size: usize, fresh: &[bool]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(count: usize, size: usize, start: usize, fresh: &[bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            if cur.iter().any(|&i| fresh[i]) {
                out.push(cur.clone());
            }
            return;
        }
        for i in start..count {
            cur.push(i);
            rec(count, size, i, fresh, cur, out);
            cur.pop();
        }
    }
    rec(count, size, 0, fresh, &mut cur, &mut out);
    out
}

/// Closes `table` under the minors allowed by `kind` and `bounds`.
pub fn close(mut table: ConstraintTable, bounds: &Bounds, kind: ClosureKind) -> Result<BoundedClosure> {
    bounds.validate()?;
    table.relax();
    let m_max = table.m_max();
    let (ka, kb) = (table.domain().size(), table.codomain().size());
    let vcap = match kind {
        ClosureKind::Weak => 0,
        ClosureKind::Full => bounds.v_max,
    };
    let mut cache: HashMap<(Vec<usize>, usize, usize), Vec<CompiledScheme>> = HashMap::new();
    let ensure = |cache: &mut HashMap<(Vec<usize>, usize, usize), Vec<CompiledScheme>>,
                  arities: &[usize],
                  m: usize,
                  v: usize,
                  linked: bool|
     -> Result<()> {
        let key = (arities.to_vec(), m, v);
        if !cache.contains_key(&key) {
            let list = schemes_with_sources(m, v, arities)
                .iter()
                .filter(|s| !linked || is_linked(s))
                .map(|s| CompiledScheme::new(s, ka, kb))
                .collect::<Result<Vec<_>>>()?;
            cache.insert(key, list);
        }
        Ok(())
    };

    let mut seen: BTreeSet<Generator> = BTreeSet::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let gens: Vec<Generator> = (1..=m_max)
            .flat_map(|m| table.generators(m).into_iter().map(move |(r, s)| (m, r, s)))
            .collect();
        let fresh: Vec<bool> = gens.iter().map(|g| !seen.contains(g)).collect();
        if !fresh.iter().any(|&f| f) {
            break;
        }

        // (family, target, vars) jobs
        let mut jobs: Vec<(Vec<usize>, usize, usize)> = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            if !fresh[i] {
                continue;
            }
            for m in 1..=m_max {
                for v in 0..=vcap {
                    ensure(&mut cache, &[g.0], m, v, false)?;
                    jobs.push((vec![i], m, v));
                }
            }
        }
        if kind == ClosureKind::Full {
            for size in 2..=bounds.j_max {
                for fam in families(gens.len(), size, &fresh) {
                    let arities: Vec<usize> = fam.iter().map(|&i| gens[i].0).collect();
                    for m in 1..=m_max {
                        for v in 1..=vcap {
                            ensure(&mut cache, &arities, m, v, true)?;
                            jobs.push((fam.clone(), m, v));
                        }
                    }
                }
            }
        }

        let updates: Vec<(usize, u64, u64)> = jobs
            .par_iter()
            .flat_map_iter(|(fam, m, v)| {
                let arities: Vec<usize> = fam.iter().map(|&i| gens[i].0).collect();
                let members: Vec<(u64, u64)> = fam.iter().map(|&i| (gens[i].1, gens[i].2)).collect();
                let list = &cache[&(arities, *m, *v)];
                let table = &table;
                list.iter().filter_map(move |cs| {
                    let (r, s) = cs.apply(&members);
                    // skip minors the table already implies
                    match table.entry(cs.target, r) {
                        Some(cur) if cur & !s == 0 => None,
                        _ => Some((cs.target, r, s)),
                    }
                })
            })
            .collect();

        seen.extend(gens.iter().copied());
        let mut changed = false;
        for (m, r, s) in updates {
            changed |= table.meet_at(m, r, s);
        }
        if !changed {
            break;
        }
        table.relax();
    }
    Ok(BoundedClosure {
        table,
        bounds: *bounds,
        kind,
        exact: kind == ClosureKind::Weak,
        rounds,
    })
}

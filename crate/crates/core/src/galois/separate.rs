//! Separating objects: a constraint keeping a function out of a class, and
//! functions keeping a constraint out of a closed constraint set.

use serde::Serialize;

use crate::constraint::{Constraint, ConstraintTable, Scheme};
use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::multifunction::{lc_of_rvs_contains, product_mask, FunctionClass, FunctionKind, MultiFunction};
use crate::universe::{digits, rank_of, Relation, Slot, Tuple, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Inside,
    Outside,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Constraint(Constraint),
    Function(MultiFunction),
}

/// Intermediate objects of a construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    /// The columns `a^1 ... a^n` of the antecedent, ascending by rank.
    pub columns: Vec<Tuple>,
    /// The tuple left out of the consequent, when one was chosen.
    pub s: Option<Tuple>,
    /// Candidates tried before the witness (or before giving up).
    pub candidates: usize,
    /// `(R_F, S_F)` for the total construction, when small enough to build.
    pub lifted: Option<Constraint>,
    /// Scheme through which `lifted` is a conjunctive minor of the input constraint.
    pub scheme: Option<Scheme>,
}

/// Why a candidate function was rejected: it violates `violated` by
/// producing `s1`, whose rows come from the antecedent rows selected by `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub candidate: MultiFunction,
    pub violated: Constraint,
    pub s1: Tuple,
    pub h: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub trace: Trace,
    pub gap: Option<Gap>,
}

impl SeparationReport {
    pub fn function(&self) -> Option<&MultiFunction> {
        match &self.witness {
            Some(Witness::Function(g)) => Some(g),
            _ => None,
        }
    }
}

/// A constraint satisfied by every member of `class` but not by `f`.
///
/// Fails with [`Error::Inside`] when `f` lies in the local closure of the
/// substitution closure of `class ∪ {e_1}`, where no separator exists.
pub fn separating_constraint(class: &FunctionClass, f: &MultiFunction) -> Result<Constraint> {
    Universe::check_same(class.domain(), f.domain())?;
    Universe::check_same(class.codomain(), f.codomain())?;
    let mut base = FunctionClass::new(class.domain(), class.codomain(), class.arity_cap().max(f.arity()))?;
    for g in class.iter() {
        base.insert(g.clone())?;
    }
    let base = base.with_empty_valued();
    if lc_of_rvs_contains(&base, f)? {
        return Err(Error::Inside(format!("{f} is in the closure of the class")));
    }
    let (a, n) = (f.domain(), f.arity());
    let support = f.support();
    let m = support.len();
    let rows: Vec<Vec<usize>> = support.iter().map(|&r| digits(r, n, a.size())).collect();
    let columns: Vec<Tuple> = (0..n).map(|k| Tuple::new(rows.iter().map(|d| d[k]).collect::<Vec<_>>())).collect();
    let r = Relation::from_tuples(a, m, &columns)?;
    let mut s = Relation::empty(f.codomain(), m)?;
    for g in class.iter() {
        s = s.union(&g.image_of_relation(&r)?)?;
    }
    Constraint::new(r, s)
}

fn check_inputs(t: &ConstraintTable, c: &Constraint) -> Result<()> {
    Universe::check_same(t.domain(), c.domain())?;
    Universe::check_same(t.codomain(), c.codomain())?;
    if c.arity() > t.m_max() {
        return Err(Error::ArityCap {
            arity: c.arity(),
            cap: t.m_max(),
        });
    }
    let (a, b) = (t.domain(), t.codomain());
    if !t.contains(&Constraint::empty(a, b, 1)?) || !t.contains(&Constraint::trivial(a, b, 1)?) {
        return Err(Error::Precondition(
            "the constraint set must contain the empty and trivial constraints".into(),
        ));
    }
    if t.contains(c) {
        return Err(Error::Inside(format!("{c} belongs to the constraint set")));
    }
    Ok(())
}

/// Antecedent rows `(a^1 ... a^n)(i)` as ranks in `A^n`, together with the columns.
fn antecedent_rows(c: &Constraint) -> (Vec<Tuple>, Vec<usize>) {
    let (m, k) = (c.arity(), c.domain().size());
    let columns: Vec<Tuple> = c.antecedent().tuples().collect();
    let rows = (0..m).map(|i| rank_of(columns.iter().map(|t| t.get(i)), k)).collect();
    (columns, rows)
}

/// Ranks of `S_min(F) ∖ S_0`, ascending.
fn candidates(t: &ConstraintTable, c: &Constraint) -> Vec<usize> {
    let m = c.arity();
    let f = c.antecedent().to_mask().expect("antecedent space bounded");
    let smin = t.entry(m, f).unwrap_or(t.full_cons(m));
    let s0 = c.consequent().to_mask().expect("consequent space bounded");
    let rest = smin & !s0;
    (0..64).filter(|&x| rest >> x & 1 == 1).collect()
}

fn build(c: &Constraint, rows: &[usize], s: &[usize], extra: &[(usize, usize)], n: usize) -> Result<MultiFunction> {
    let (a, b) = (c.domain(), c.codomain());
    let mut table = vec![0u64; a.space(n)?];
    for (&r, &x) in rows.iter().zip(s).chain(extra.iter().map(|(r, x)| (r, x))) {
        table[r] |= 1 << x;
    }
    MultiFunction::new(a, b, n, table)
}

/// `h(t)`: the least `i` with `row_i` equal to the `t`-th violation row and `s_i = s1_t`.
fn gap_map(rows: &[usize], s: &[usize], columns: &[Tuple], s1: &Tuple, k: usize) -> Vec<usize> {
    (0..s1.arity())
        .map(|t| {
            let row = rank_of(columns.iter().map(|col| col.get(t)), k);
            (0..rows.len())
                .find(|&i| rows[i] == row && s[i] == s1.get(t))
                .or_else(|| (0..rows.len()).find(|&i| rows[i] == row))
                .unwrap_or(0)
        })
        .collect()
}

fn separate_by_rows(t: &ConstraintTable, c: &Constraint, partial: bool) -> Result<SeparationReport> {
    check_inputs(t, c)?;
    let (columns, rows) = antecedent_rows(c);
    let n = columns.len();
    let (m, kb) = (c.arity(), c.codomain().size());
    let mut trace = Trace {
        columns,
        ..Trace::default()
    };
    let mut gap = None;
    for x in candidates(t, c) {
        trace.candidates += 1;
        let s = digits(x, m, kb);
        let g = build(c, &rows, &s, &[], n)?;
        if partial && !g.is_partial() {
            return Err(Error::PartialityViolated(format!(
                "candidate {g} for {} is not partial",
                Tuple::new(s).display(c.codomain())
            )));
        }
        match t.violation(&g)? {
            None if !super::satisfies(&g, c)? => {
                trace.s = Some(Tuple::new(s));
                return Ok(SeparationReport {
                    verdict: Verdict::Outside,
                    witness: Some(Witness::Function(g)),
                    trace,
                    gap: None,
                });
            }
            None => {}
            Some(v) => {
                if gap.is_none() {
                    let h = gap_map(&rows, &s, &v.columns, &v.tuple, c.domain().size());
                    gap = Some(Gap {
                        candidate: g,
                        violated: v.constraint,
                        s1: v.tuple,
                        h,
                    });
                }
            }
        }
    }
    Ok(SeparationReport {
        verdict: Verdict::Inconclusive,
        witness: None,
        trace,
        gap,
    })
}

/// A function satisfying every member of the closed table `t` but violating `c`.
///
/// `t` should be closed under weak conjunctive minors and contain the empty
/// and trivial constraints. A bounded closure may be too small for the
/// construction to verify, which is reported as inconclusive.
pub fn separating_function(t: &ConstraintTable, c: &Constraint) -> Result<SeparationReport> {
    separate_by_rows(t, c, false)
}

/// As [`separating_function`], with `t` also containing the equality constraint;
/// the witness is then a partial function.
pub fn separating_partial_function(t: &ConstraintTable, c: &Constraint) -> Result<SeparationReport> {
    let eq = Constraint::equality(t.domain(), t.codomain());
    if t.m_max() < 2 || !t.contains(&eq) {
        return Err(Error::Precondition("the constraint set must contain the equality constraint".into()));
    }
    separate_by_rows(t, c, true)
}

/// Largest tuple space for which the lifted constraint is materialized.
const TRACE_SPACE: usize = 1 << 16;

/// A total (or single-valued) function satisfying every member of `t` but violating `c`.
///
/// The witness has arity `n = |F|` and is defined on every `n`-tuple: the
/// antecedent rows receive the entries of a tuple outside the consequent and
/// every other row receives one value, found by backtracking search against
/// `t`. `t` should be closed under conjunctive minors.
pub fn separating_total_function(
    t: &ConstraintTable,
    c: &Constraint,
    kind: FunctionKind,
    budget: &Budget,
) -> Result<SeparationReport> {
    if !matches!(kind, FunctionKind::Total | FunctionKind::SingleValued) {
        return Err(Error::Precondition("the total construction needs a total or single-valued kind".into()));
    }
    check_inputs(t, c)?;
    let (columns, rows) = antecedent_rows(c);
    let n = columns.len();
    let (a, b) = (c.domain(), c.codomain());
    let (k, kb, m) = (a.size(), b.size(), c.arity());
    let space = a.space(n)?;
    let rest: Vec<usize> = (0..space).filter(|r| !rows.contains(r)).collect();

    // row tuples of length <= m_max, bucketed by the last free row they use
    let mut checks: u128 = 0;
    for len in 1..=t.m_max() {
        checks = checks.saturating_add((space as u128).saturating_pow(len as u32));
    }
    budget.check("row tuples checked by the total construction", checks)?;
    let row_digits: Vec<Vec<usize>> = (0..space).map(|r| digits(r, n, k)).collect();
    let mut position = vec![0usize; space];
    for (p, &r) in rest.iter().enumerate() {
        position[r] = p + 1;
    }
    let mut buckets: Vec<Vec<(usize, Vec<usize>, u64)>> = vec![Vec::new(); rest.len() + 1];
    for len in 1..=t.m_max() {
        let mut pick = vec![0usize; len];
        loop {
            let cols = crate::constraint::column_mask(&pick, &row_digits, n, k);
            if let Some(s) = t.entry(len, cols) {
                let last = pick.iter().map(|&r| position[r]).max().unwrap_or(0);
                buckets[last].push((len, pick.clone(), s));
            }
            if !crate::universe::odometer(&mut pick, space) {
                break;
            }
        }
    }

    let mut trace = Trace {
        columns: columns.clone(),
        ..Trace::default()
    };
    let mut values = vec![0u64; space];
    for x in candidates(t, c) {
        let s0 = digits(x, m, kb);
        if kind == FunctionKind::SingleValued
            && (0..m).any(|i| (0..m).any(|j| rows[i] == rows[j] && s0[i] != s0[j]))
        {
            continue;
        }
        trace.candidates += 1;
        values.iter_mut().for_each(|v| *v = 0);
        for (&r, &v) in rows.iter().zip(&s0) {
            values[r] |= 1 << v;
        }
        if !bucket_ok(&buckets[0], &values, kb) {
            continue;
        }
        if let Some(assignment) = search(&rest, &buckets, &mut values, kb, 0) {
            let extra: Vec<(usize, usize)> = rest.iter().copied().zip(assignment.iter().copied()).collect();
            let g = build(c, &rows, &s0, &extra, n)?;
            debug_assert!(g.is_total());
            if t.violation(&g)?.is_some() || super::satisfies(&g, c)? {
                continue;
            }
            let mut s = s0.clone();
            s.extend(assignment);
            trace.lifted = lifted(c, &columns, &rest, n)?;
            trace.scheme = Some(Scheme::new(m + rest.len(), 0, vec![(0..m).map(Slot::Target).collect()])?);
            trace.s = Some(Tuple::new(s));
            return Ok(SeparationReport {
                verdict: Verdict::Outside,
                witness: Some(Witness::Function(g)),
                trace,
                gap: None,
            });
        }
    }
    Ok(SeparationReport {
        verdict: Verdict::Inconclusive,
        witness: None,
        trace,
        gap: None,
    })
}

fn bucket_ok(bucket: &[(usize, Vec<usize>, u64)], values: &[u64], kb: usize) -> bool {
    bucket.iter().all(|(_, pick, s)| {
        let sets: Vec<u64> = pick.iter().map(|&r| values[r]).collect();
        product_mask(&sets, kb) & !s == 0
    })
}

fn search(
    rest: &[usize],
    buckets: &[Vec<(usize, Vec<usize>, u64)>],
    values: &mut [u64],
    kb: usize,
    p: usize,
) -> Option<Vec<usize>> {
    if p == rest.len() {
        return Some(Vec::new());
    }
    for x in 0..kb {
        values[rest[p]] = 1 << x;
        if bucket_ok(&buckets[p + 1], values, kb) {
            if let Some(mut tail) = search(rest, buckets, values, kb, p + 1) {
                tail.insert(0, x);
                return Some(tail);
            }
        }
    }
    values[rest[p]] = 0;
    None
}

/// `(R_F, S_F)`: the columns extended by the remaining rows, and the
/// consequent of tuples whose first `m` entries lie in `S_0`.
fn lifted(c: &Constraint, columns: &[Tuple], rest: &[usize], n: usize) -> Result<Option<Constraint>> {
    let (a, b) = (c.domain(), c.codomain());
    let (k, m) = (a.size(), c.arity());
    let rho = m + rest.len();
    let (Ok(sa), Ok(sb)) = (a.space(rho), b.space(rho)) else {
        return Ok(None);
    };
    if sa > TRACE_SPACE || sb > TRACE_SPACE {
        return Ok(None);
    }
    let long: Vec<Tuple> = (0..n)
        .map(|j| {
            let mut e = columns[j].entries().to_vec();
            e.extend(rest.iter().map(|&r| digits(r, n, k)[j]));
            Tuple::new(e)
        })
        .collect();
    let r = Relation::from_tuples(a, rho, &long)?;
    let tail = b.space(rest.len())?;
    let s = Relation::from_ranks(
        b,
        rho,
        c.consequent().ranks().flat_map(|x| (0..tail).map(move |y| x * tail + y)),
    )?;
    Ok(Some(Constraint::new(r, s)?))
}

//! Satisfaction and the Galois connections between function classes and
//! constraint sets.

mod separate;
mod verify;

pub use separate::{
    separating_constraint, separating_function, separating_partial_function, separating_total_function, Gap,
    SeparationReport, Trace, Verdict, Witness,
};
pub use verify::{
    cross_validate_prop4, separator, verify_prop2, verify_prop4, ArityAgreement, CrossValidation, Prop2Report, Prop4Report,
    Variant,
};

use rayon::prelude::*;

use crate::constraint::{Constraint, ConstraintSet, ConstraintTable};
use crate::enumerate::{self, Budget};
use crate::error::{Error, Result};
use crate::multifunction::{for_each_product, FunctionClass, FunctionKind, MultiFunction};
use crate::universe::{digits, odometer, Tuple, Universe, UniverseRef};

/// Whether `fR ⊆ S`.
pub fn satisfies(f: &MultiFunction, c: &Constraint) -> Result<bool> {
    Ok(violation(f, c)?.is_none())
}

/// Columns `a^1 ... a^n ∈ R` and a tuple of `f(a^1 ... a^n)` outside `S`, if any.
pub fn violation(f: &MultiFunction, c: &Constraint) -> Result<Option<(Vec<Tuple>, Tuple)>> {
    Universe::check_same(f.domain(), c.domain())?;
    Universe::check_same(f.codomain(), c.codomain())?;
    let (k, kb, n, m) = (f.domain().size(), f.codomain().size(), f.arity(), c.arity());
    let members: Vec<Vec<usize>> = c.antecedent().ranks().map(|x| digits(x, m, k)).collect();
    if members.is_empty() {
        return Ok(None);
    }
    let mut choice = vec![0usize; n];
    let mut values = vec![0u64; m];
    loop {
        for (i, v) in values.iter_mut().enumerate() {
            let row = choice.iter().fold(0usize, |r, &j| r * k + members[j][i]);
            *v = f.value(row);
        }
        let mut bad = None;
        for_each_product(&values, kb, |x| {
            if bad.is_none() && !c.consequent().contains_rank(x) {
                bad = Some(x);
            }
        });
        if let Some(x) = bad {
            let columns = choice.iter().map(|&j| Tuple::new(members[j].clone())).collect();
            return Ok(Some((columns, Tuple::new(digits(x, m, kb)))));
        }
        if !odometer(&mut choice, members.len()) {
            return Ok(None);
        }
    }
}

/// Anything functions can be checked against.
pub trait ConstraintSystem: Sync {
    fn domain(&self) -> &UniverseRef;
    fn codomain(&self) -> &UniverseRef;
    /// A constraint of the system violated by `f`, if any.
    fn violated_by(&self, f: &MultiFunction) -> Result<Option<Constraint>>;

    fn satisfied_by(&self, f: &MultiFunction) -> Result<bool> {
        Ok(self.violated_by(f)?.is_none())
    }
}

impl ConstraintSystem for ConstraintSet {
    fn domain(&self) -> &UniverseRef {
        ConstraintSet::domain(self)
    }

    fn codomain(&self) -> &UniverseRef {
        ConstraintSet::codomain(self)
    }

    fn violated_by(&self, f: &MultiFunction) -> Result<Option<Constraint>> {
        for c in self.iter() {
            if !satisfies(f, c)? {
                return Ok(Some(c.clone()));
            }
        }
        Ok(None)
    }
}

impl ConstraintSystem for ConstraintTable {
    fn domain(&self) -> &UniverseRef {
        ConstraintTable::domain(self)
    }

    fn codomain(&self) -> &UniverseRef {
        ConstraintTable::codomain(self)
    }

    fn violated_by(&self, f: &MultiFunction) -> Result<Option<Constraint>> {
        Ok(self.violation(f)?.map(|v| v.constraint))
    }
}

/// `CSF(M)` at arities `<= m_max`, as minimal consequents `S_min(R) = ∪_{f∈M} fR`.
pub fn csf(class: &FunctionClass, m_max: usize) -> Result<ConstraintTable> {
    csf_of(class.domain(), class.codomain(), class.iter(), m_max)
}

/// [`csf`] for an arbitrary collection of functions.
pub fn csf_of<'a>(
    a: &UniverseRef,
    b: &UniverseRef,
    functions: impl IntoIterator<Item = &'a MultiFunction>,
    m_max: usize,
) -> Result<ConstraintTable> {
    let mut table = ConstraintTable::filled(a, b, m_max, Some(0))?;
    let (k, kb) = (a.size(), b.size());
    let functions: Vec<&MultiFunction> = functions.into_iter().collect();
    for f in &functions {
        Universe::check_same(a, f.domain())?;
        Universe::check_same(b, f.codomain())?;
    }
    for m in 1..=m_max {
        let mut base = vec![0u64; 1 << table.ant_bits(m)];
        for f in &functions {
            let n = f.arity();
            let rows = a.space(n)?;
            let row_digits: Vec<Vec<usize>> = (0..rows).map(|r| digits(r, n, k)).collect();
            let live: Vec<usize> = (0..rows).filter(|&r| f.value(r) != 0).collect();
            if live.is_empty() {
                continue;
            }
            let mut pick = vec![0usize; m];
            let mut values = vec![0u64; m];
            loop {
                let chosen: Vec<usize> = pick.iter().map(|&i| live[i]).collect();
                for (v, &r) in values.iter_mut().zip(&chosen) {
                    *v = f.value(r);
                }
                let cols = crate::constraint::column_mask(&chosen, &row_digits, n, k);
                let mut p = 0u64;
                for_each_product(&values, kb, |x| p |= 1 << x);
                base[cols as usize] |= p;
                if !odometer(&mut pick, live.len()) {
                    break;
                }
            }
        }
        // S_min(R) is the union of base over subsets of R
        let bits = table.ant_bits(m);
        for bit in 0..bits {
            let b = 1usize << bit;
            for mask in 0..base.len() {
                if mask & b != 0 {
                    base[mask] |= base[mask ^ b];
                }
            }
        }
        for (mask, s) in base.into_iter().enumerate() {
            table.set_entry(m, mask as u64, Some(s));
        }
    }
    Ok(table)
}

/// Functions of arities `1..=n_max` admitted by `kind` that satisfy `t`, by
/// sweeping all tables (refused beyond the budget).
pub fn mfsc(
    t: &impl ConstraintSystem,
    n_max: usize,
    kind: FunctionKind,
    budget: &Budget,
) -> Result<FunctionClass> {
    let (a, b) = (t.domain().clone(), t.codomain().clone());
    let mut out = FunctionClass::new(&a, &b, n_max)?;
    for n in 1..=n_max {
        let candidates: Vec<MultiFunction> = enumerate::all_functions(&a, &b, n, budget)?.collect();
        let kept: Vec<Result<Option<MultiFunction>>> = candidates
            .into_par_iter()
            .map(|f| Ok((kind.admits(&f) && t.satisfied_by(&f)?).then_some(f)))
            .collect();
        for f in kept {
            if let Some(f) = f? {
                out.insert(f)?;
            }
        }
    }
    Ok(out)
}

/// Membership in `mFSC(T)` (or a restricted variant) without enumeration.
pub fn mfsc_contains(t: &impl ConstraintSystem, f: &MultiFunction, kind: FunctionKind) -> Result<bool> {
    if !Universe::same(t.domain(), f.domain()) || !Universe::same(t.codomain(), f.codomain()) {
        return Err(Error::UniverseMismatch(
            f.domain().name().to_string(),
            t.domain().name().to_string(),
        ));
    }
    Ok(kind.admits(f) && t.satisfied_by(f)?)
}

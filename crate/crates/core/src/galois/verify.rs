//! Both-sides checks of the factorizations of the two Galois closure operators.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraint::{close, Bounds, ClosureKind, Constraint, ConstraintSet, ConstraintTable};
use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::multifunction::{lc_closure, rvs_closure, rvst_closure, FunctionClass, FunctionKind, MultiFunction};
use crate::universe::Relation;

use super::separate::{
    separating_function, separating_partial_function, separating_total_function, SeparationReport, Verdict,
};
use super::{csf, csf_of, mfsc, satisfies, ConstraintSystem};

/// Which of the four connections: all, partial, total or single-valued functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    I,
    Ii,
    Iii,
    Iv,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::I, Variant::Ii, Variant::Iii, Variant::Iv];

    pub fn kind(self) -> FunctionKind {
        match self {
            Variant::I => FunctionKind::Any,
            Variant::Ii => FunctionKind::Partial,
            Variant::Iii => FunctionKind::Total,
            Variant::Iv => FunctionKind::SingleValued,
        }
    }

    /// Constraints added before closing, and the closure used.
    pub fn extras(self, t: &ConstraintSet) -> Result<(Vec<Constraint>, ClosureKind)> {
        let (a, b) = (t.domain(), t.codomain());
        let empty = Constraint::empty(a, b, 1)?;
        let trivial = Constraint::trivial(a, b, 1)?;
        let eq = Constraint::equality(a, b);
        Ok(match self {
            Variant::I => (vec![empty, trivial], ClosureKind::Weak),
            Variant::Ii => (vec![empty, trivial, eq], ClosureKind::Weak),
            Variant::Iii => (vec![empty, trivial], ClosureKind::Full),
            Variant::Iv => (vec![empty, eq], ClosureKind::Full),
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::I => "i",
            Variant::Ii => "ii",
            Variant::Iii => "iii",
            Variant::Iv => "iv",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Variant::I),
            "ii" => Ok(Variant::Ii),
            "iii" => Ok(Variant::Iii),
            "iv" => Ok(Variant::Iv),
            _ => Err(Error::InvalidBounds(format!("unknown variant {s:?} (expected i, ii, iii or iv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop2Report {
    pub variant: Variant,
    pub bounds: Bounds,
    /// Functions satisfying every constraint the class satisfies.
    pub lhs: FunctionClass,
    /// The local closure of the substitution closure.
    pub rhs: FunctionClass,
    pub equal: bool,
    /// A function on exactly one side, if any.
    pub counterexample: Option<MultiFunction>,
}

/// Computes `FSC(CSF(M))` and its factorization through substitution and
/// local closure on arities `<= n_max`.
///
/// Constraints are represented up to `m_max`, which must be at least
/// `|A|^n_max` so that every separating constraint is available.
pub fn verify_prop2(class: &FunctionClass, variant: Variant, bounds: &Bounds, budget: &Budget) -> Result<Prop2Report> {
    bounds.validate()?;
    let (a, b) = (class.domain(), class.codomain());
    let needed = (a.size() as u128).checked_pow(bounds.n_max as u32).unwrap_or(u128::MAX);
    if (bounds.m_max as u128) < needed {
        return Err(Error::InvalidBounds(format!(
            "m_max = {} is below |A|^n_max = {needed}",
            bounds.m_max
        )));
    }
    let kind = variant.kind();
    if !class.all_admitted(kind) {
        return Err(Error::Precondition(format!("the class is not contained in the {kind:?} functions")));
    }

    let table = csf(class, bounds.m_max)?;
    let lhs = mfsc(&table, bounds.n_max, kind, budget)?;

    let mut base = FunctionClass::new(a, b, class.arity_cap().max(bounds.n_max))?;
    for f in class.iter() {
        base.insert(f.clone())?;
    }
    let subst = match variant {
        Variant::I | Variant::Ii => rvs_closure(&base.with_empty_valued(), budget)?,
        Variant::Iii | Variant::Iv => rvst_closure(&base, budget)?,
    };
    let mut capped = FunctionClass::new(a, b, bounds.n_max)?;
    for f in subst.iter().filter(|f| f.arity() <= bounds.n_max) {
        capped.insert(f.clone())?;
    }
    let rhs = lc_closure(&capped, kind, budget)?;

    let counterexample = lhs.first_not_in(&rhs).or_else(|| rhs.first_not_in(&lhs)).cloned();
    Ok(Prop2Report {
        variant,
        bounds: *bounds,
        equal: counterexample.is_none(),
        lhs,
        rhs,
        counterexample,
    })
}

/// Agreement counts at one constraint arity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ArityAgreement {
    pub arity: usize,
    /// Constraints in the closure (satisfied by every function satisfying the set).
    pub inside: u128,
    /// Constraints outside the closure with a verified separating function.
    pub outside: u128,
    /// Constraints outside the closure that no separating function certified.
    pub inconclusive: u128,
    /// Separating functions that failed replay.
    pub false_certificates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop4Report {
    pub variant: Variant,
    pub bounds: Bounds,
    pub closure: ConstraintTable,
    pub rounds: usize,
    pub per_arity: Vec<ArityAgreement>,
    /// Up to a few `(R, B^m ∖ {s})` constraints left undecided.
    pub undecided: Vec<Constraint>,
}

impl Prop4Report {
    pub fn agrees(&self) -> bool {
        self.per_arity
            .iter()
            .all(|a| a.inconclusive == 0 && a.false_certificates == 0)
    }

    pub fn inconclusive(&self) -> u128 {
        self.per_arity.iter().map(|a| a.inconclusive).sum()
    }
}

const UNDECIDED_SHOWN: usize = 8;

/// The separating function construction matching the variant's kind.
pub fn separator(
    variant: Variant,
    table: &ConstraintTable,
    c: &Constraint,
    budget: &Budget,
) -> Result<SeparationReport> {
    match variant {
        Variant::I => separating_function(table, c),
        Variant::Ii => separating_partial_function(table, c),
        Variant::Iii => separating_total_function(table, c, FunctionKind::Total, budget),
        Variant::Iv => separating_total_function(table, c, FunctionKind::SingleValued, budget),
    }
}

fn pow2(e: u32) -> u128 {
    1u128 << e
}

/// Compares the closure of `t` (with the variant's extra constraints) with
/// `CSF(FSC(t))` at every arity `<= m_max`. Membership on the left is decided
/// by the separating-function constructions; each witness is replayed.
pub fn verify_prop4(t: &ConstraintSet, variant: Variant, bounds: &Bounds, budget: &Budget) -> Result<Prop4Report> {
    bounds.validate()?;
    let (extras, kind) = variant.extras(t)?;
    let cap = bounds.m_max.max(t.arity_cap()).max(2);
    let base = t.with(extras)?;
    let closed = close(ConstraintTable::from_set(&base, cap)?, bounds, kind)?;
    let table = closed.table;
    let (a, b) = (table.domain().clone(), table.codomain().clone());
    let fkind = variant.kind();

    let mut per_arity = Vec::new();
    let mut undecided = Vec::new();
    for m in 1..=bounds.m_max {
        let cb = b.space(m)? as u32;
        let ants = 1u64 << a.space(m)?;
        let results: Vec<Result<(u128, u128, u128, usize, Vec<Constraint>)>> = (0..ants)
            .into_par_iter()
            .map(|r| {
                let smin = table
                    .entry(m, r)
                    .ok_or_else(|| Error::Precondition("the closure lacks the trivial constraint".into()))?;
                let antecedent = Relation::from_mask(&a, m, r)?;
                let full = table.full_cons(m);
                let mut unresolved = 0u64;
                let mut falses = 0;
                let mut open = Vec::new();
                for x in (0..cb).filter(|&x| smin >> x & 1 == 1) {
                    let c = Constraint::new(antecedent.clone(), Relation::from_mask(&b, m, full & !(1 << x))?)?;
                    let report = separator(variant, &table, &c, budget)?;
                    match (report.verdict, report.function()) {
                        (Verdict::Outside, Some(g)) => {
                            if !(fkind.admits(g) && base.satisfied_by(g)? && !satisfies(g, &c)?) {
                                falses += 1;
                            }
                        }
                        _ => {
                            unresolved |= 1 << x;
                            if open.len() < UNDECIDED_SHOWN {
                                open.push(c);
                            }
                        }
                    }
                }
                let k = smin.count_ones();
                let inside = pow2(cb - k);
                let inconclusive = pow2(cb - (smin & !unresolved).count_ones()) - inside;
                let outside = pow2(cb) - inside - inconclusive;
                Ok((inside, outside, inconclusive, falses, open))
            })
            .collect();
        let mut row = ArityAgreement {
            arity: m,
            ..ArityAgreement::default()
        };
        for res in results {
            let (i, o, u, f, open) = res?;
            row.inside += i;
            row.outside += o;
            row.inconclusive += u;
            row.false_certificates += f;
            for c in open {
                if undecided.len() < UNDECIDED_SHOWN {
                    undecided.push(c);
                }
            }
        }
        per_arity.push(row);
    }
    Ok(Prop4Report {
        variant,
        bounds: *bounds,
        closure: table,
        rounds: closed.rounds,
        per_arity,
        undecided,
    })
}

/// Agreement of the arity-1 part of a closure with `CSF` of the functions it admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossValidation {
    pub variant: Variant,
    /// Functions of arity `<= n_max` satisfying the set and the variant's extras.
    pub functions: usize,
    pub agrees: bool,
    /// A unary constraint on which the two sides differ.
    pub difference: Option<Constraint>,
}

/// Cross-checks [`verify_prop4`]'s closure at arity 1 against `CSF` of the
/// enumerated function class.
pub fn cross_validate_prop4(
    t: &ConstraintSet,
    variant: Variant,
    bounds: &Bounds,
    budget: &Budget,
) -> Result<CrossValidation> {
    bounds.validate()?;
    let (extras, kind) = variant.extras(t)?;
    let cap = bounds.m_max.max(t.arity_cap()).max(2);
    let base = t.with(extras)?;
    let closed = close(ConstraintTable::from_set(&base, cap)?, bounds, kind)?;
    let class = mfsc(&base, bounds.n_max, variant.kind(), budget)?;
    let lhs = csf_of(base.domain(), base.codomain(), class.iter(), 1)?;
    let b = base.codomain();
    let mut difference = None;
    for r in 0..1u64 << base.domain().size() {
        if lhs.entry(1, r) != closed.table.entry(1, r) {
            let s = lhs.entry(1, r).unwrap_or(0);
            let rel = Relation::from_mask(base.domain(), 1, r)?;
            difference = Some(Constraint::new(rel, Relation::from_mask(b, 1, s)?)?);
            break;
        }
    }
    Ok(CrossValidation {
        variant,
        functions: class.len(),
        agrees: difference.is_none(),
        difference,
    })
}

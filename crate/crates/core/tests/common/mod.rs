//! Brute-force reference implementations, written from the definitions and
//! sharing nothing with the library beyond its data accessors.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use mvgalois::{Constraint, MultiFunction, Scheme, Slot, UniverseRef};

pub type Tup = Vec<usize>;

/// All `arity`-tuples over `0..size`, position 0 most significant.
pub fn tuples(size: usize, arity: usize) -> Vec<Tup> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn rank(t: &[usize], size: usize) -> usize {
    t.iter().fold(0, |r, &x| r * size + x)
}

pub fn value(f: &MultiFunction, row: &[usize]) -> Vec<usize> {
    let v = f.table()[rank(row, f.domain().size())];
    (0..f.codomain().size()).filter(|b| v >> b & 1 == 1).collect()
}

/// Every `m`-tuple `y` with `y_i ∈ sets[i]`.
pub fn product(sets: &[Vec<usize>]) -> Vec<Tup> {
    let mut out = vec![vec![]];
    for s in sets {
        out = out
            .into_iter()
            .flat_map(|t| {
                s.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// `fR`: union over every choice of `n` columns from `R` of the product of
/// `f` along the rows.
pub fn image(f: &MultiFunction, r: &[Tup], m: usize) -> BTreeSet<Tup> {
    let n = f.arity();
    let mut out = BTreeSet::new();
    let idx: Vec<usize> = (0..r.len()).collect();
    let choices = product(&vec![idx; n]);
    for cols in choices {
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|i| value(f, &cols.iter().map(|&c| r[c][i]).collect::<Vec<_>>()))
            .collect();
        out.extend(product(&sets));
    }
    out
}

pub fn antecedent(c: &Constraint) -> Vec<Tup> {
    c.antecedent().tuples().map(|t| t.entries().to_vec()).collect()
}

pub fn consequent(c: &Constraint) -> BTreeSet<Tup> {
    c.consequent().tuples().map(|t| t.entries().to_vec()).collect()
}

pub fn satisfies(f: &MultiFunction, c: &Constraint) -> bool {
    image(f, &antecedent(c), c.arity()).is_subset(&consequent(c))
}

pub fn function(a: &UniverseRef, b: &UniverseRef, n: usize, table: Vec<u64>) -> MultiFunction {
    MultiFunction::new(a, b, n, table).unwrap()
}

/// Every `n`-ary function from `A` to subsets of `B`.
pub fn all_functions(a: &UniverseRef, b: &UniverseRef, n: usize) -> Vec<MultiFunction> {
    let rows = a.size().pow(n as u32);
    let values: Vec<usize> = (0..1usize << b.size()).collect();
    product(&vec![values; rows])
        .into_iter()
        .map(|t| function(a, b, n, t.into_iter().map(|v| v as u64).collect()))
        .collect()
}

/// `g(a) ⊆ f(a ∘ l)` for every `a`, for some `f` in `members` and some map
/// `l`; with `nonempty`, `g` must also be total.
pub fn rvs_contains(members: &[MultiFunction], g: &MultiFunction, nonempty: bool) -> bool {
    if nonempty && g.table().iter().any(|&v| v == 0) {
        return false;
    }
    let (k, m) = (g.domain().size(), g.arity());
    members.iter().any(|f| {
        product(&vec![(0..m).collect::<Vec<_>>(); f.arity()]).into_iter().any(|l| {
            tuples(k, m).iter().all(|a| {
                let sub: Vec<usize> = l.iter().map(|&i| a[i]).collect();
                let fv = f.table()[rank(&sub, k)];
                g.table()[rank(a, k)] & !fv == 0
            })
        })
    })
}

/// Condition (1) of local coverings for every subset `F` of the domain.
pub fn lc_contains(members: &[&MultiFunction], f: &MultiFunction) -> bool {
    let same: Vec<&&MultiFunction> = members.iter().filter(|g| g.arity() == f.arity()).collect();
    if same.is_empty() {
        return false;
    }
    let rows = f.table().len();
    (0u64..1 << rows).all(|fmask| {
        let fs: Vec<usize> = (0..rows).filter(|r| fmask >> r & 1 == 1).collect();
        let sets: Vec<Vec<usize>> = fs
            .iter()
            .map(|&r| (0..f.codomain().size()).filter(|b| f.table()[r] >> b & 1 == 1).collect())
            .collect();
        product(&sets).iter().all(|y| {
            same.iter()
                .any(|g| fs.iter().zip(y).all(|(&r, &b)| g.table()[r] >> b & 1 == 1))
        })
    })
}

fn extend(t: &[usize], sigma: &[usize], h: &[Slot]) -> Tup {
    h.iter()
        .map(|s| match *s {
            Slot::Target(i) => t[i],
            Slot::Var(v) => sigma[v],
        })
        .collect()
}

fn minor_side(size: usize, rels: &[BTreeSet<Tup>], scheme: &Scheme) -> BTreeSet<Tup> {
    let sigmas = tuples(size, scheme.vars());
    tuples(size, scheme.target())
        .into_iter()
        .filter(|t| {
            sigmas.iter().any(|sigma| {
                scheme
                    .sources()
                    .iter()
                    .zip(rels)
                    .all(|(h, r)| r.contains(&extend(t, sigma, h)))
            })
        })
        .collect()
}

/// The tight conjunctive minor, by searching every Skolem map.
pub fn tight_minor(family: &[Constraint], scheme: &Scheme) -> (BTreeSet<Tup>, BTreeSet<Tup>) {
    let rs: Vec<BTreeSet<Tup>> = family.iter().map(|c| antecedent(c).into_iter().collect()).collect();
    let ss: Vec<BTreeSet<Tup>> = family.iter().map(consequent).collect();
    let (a, b) = (family[0].domain().size(), family[0].codomain().size());
    (minor_side(a, &rs, scheme), minor_side(b, &ss, scheme))
}

/// Whether `c` relaxes the tight minor: smaller antecedent, larger consequent.
pub fn is_minor(c: &Constraint, family: &[Constraint], scheme: &Scheme) -> bool {
    let (r, s) = tight_minor(family, scheme);
    let cr: BTreeSet<Tup> = antecedent(c).into_iter().collect();
    cr.is_subset(&r) && consequent(c).is_superset(&s)
}

/// For each candidate, whether it satisfies every constraint `(R, S_min(R))`
/// of `CSF(members)` up to arity `m_max`. Only antecedents spanned by at most
/// `arity(f)` columns matter, since `fR` is the union of the images of such
/// sub-relations.
pub fn in_mfsc_of_csf(members: &[MultiFunction], candidates: &[MultiFunction], m_max: usize) -> Vec<bool> {
    let mut smin: HashMap<(usize, Vec<Tup>), BTreeSet<Tup>> = HashMap::new();
    candidates
        .iter()
        .map(|f| {
            let (ka, n) = (f.domain().size(), f.arity());
            (1..=m_max).all(|m| {
                let cols = tuples(ka, m);
                product(&vec![(0..cols.len()).collect::<Vec<_>>(); n]).into_iter().all(|choice| {
                    let mut r: Vec<Tup> = choice.iter().map(|&c| cols[c].clone()).collect();
                    r.sort();
                    r.dedup();
                    let s = smin.entry((m, r.clone())).or_insert_with(|| {
                        members.iter().flat_map(|g| image(g, &r, m)).collect()
                    });
                    image(f, &r, m).is_subset(s)
                })
            })
        })
        .collect()
}

//! Batch front end: parse a problem document, run one operation, and report
//! the result as text or JSON.
//!
//! Exit codes: 0 computed, 1 property violated or separated (witness
//! printed), 2 input error, 3 inconclusive at the given bounds.

mod document;

pub use document::{builtin_constraint, parse, DocBounds, Document, ParseError};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::constraint::{close, lo_closure, Bounds, ClosureKind, Constraint, ConstraintSet, ConstraintTable};
use crate::enumerate::{self, Budget};
use crate::error::Error;
use crate::galois::{self, Variant, Verdict};
use crate::multifunction::{lc_closure, rvs_closure, rvst_closure, FunctionClass, FunctionKind, MultiFunction};
use crate::universe::{Relation, UniverseRef};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Environment variable selecting the worker thread count.
pub const WORKERS_ENV: &str = "MVGALOIS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "mvgalois", version, about = "Multivalued functions, relational constraints and their Galois connections")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Bound overrides, e.g. `m_max=2,n_max=1,j_max=2,v_max=2`.
    #[arg(long, global = true)]
    pub bounds: Option<String>,
    /// Seed for sampled output.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest number of function tables an exhaustive sweep may visit.
    #[arg(long, global = true)]
    pub budget: Option<u128>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Any,
    Total,
    Partial,
    SingleValued,
}

impl From<KindArg> for FunctionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Any => FunctionKind::Any,
            KindArg::Total => FunctionKind::Total,
            KindArg::Partial => FunctionKind::Partial,
            KindArg::SingleValued => FunctionKind::SingleValued,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    I,
    Ii,
    Iii,
    Iv,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::I => Variant::I,
            VariantArg::Ii => Variant::Ii,
            VariantArg::Iii => Variant::Iii,
            VariantArg::Iv => Variant::Iv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnumerateWhat {
    Functions,
    Relations,
    Constraints,
    Schemes,
}

#[derive(Debug, Args)]
pub struct FileArg {
    /// Problem document.
    pub file: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Whether a function satisfies a constraint.
    CheckSat {
        #[command(flatten)]
        doc: FileArg,
        function: String,
        constraint: String,
    },
    /// The image `fR` of a relation.
    Image {
        #[command(flatten)]
        doc: FileArg,
        function: String,
        relation: String,
    },
    /// Closure of a class under restrictive variable substitution.
    CloseRvs {
        #[command(flatten)]
        doc: FileArg,
        class: String,
        /// Only everywhere non-empty substitution instances.
        #[arg(long)]
        total: bool,
    },
    /// Closure of a class under local coverings.
    CloseLc {
        #[command(flatten)]
        doc: FileArg,
        class: String,
        #[arg(long, value_enum, default_value_t = KindArg::Any)]
        kind: KindArg,
    },
    /// Bounded closure under weak conjunctive minors.
    CloseWcm {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// Bounded closure under conjunctive minors.
    CloseCm {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// Local closure (the identity on finite universes).
    CloseLo {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// Constraints satisfied by every member of a class.
    Csf {
        #[command(flatten)]
        doc: FileArg,
        class: String,
    },
    /// Functions satisfying every constraint of a set.
    Mfsc {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// Total functions satisfying every constraint of a set.
    Tfsc {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// Partial functions satisfying every constraint of a set.
    Pfsc {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// Single-valued functions satisfying every constraint of a set.
    Sfsc {
        #[command(flatten)]
        doc: FileArg,
        set: String,
    },
    /// A constraint satisfied by a class but not by a function.
    SeparateConstraint {
        #[command(flatten)]
        doc: FileArg,
        class: String,
        function: String,
    },
    /// A function satisfying a set of constraints but not a given constraint.
    SeparateFunction {
        #[command(flatten)]
        doc: FileArg,
        set: String,
        constraint: String,
        #[arg(long, group = "mode")]
        partial: bool,
        #[arg(long, group = "mode")]
        total: bool,
        #[arg(long, group = "mode")]
        single_valued: bool,
    },
    /// Both sides of the factorization of the function-class closure.
    VerifyProp2 {
        #[command(flatten)]
        doc: FileArg,
        class: String,
        #[arg(value_enum, default_value_t = VariantArg::I)]
        variant: VariantArg,
    },
    /// Both sides of the factorization of the constraint-set closure.
    VerifyProp4 {
        #[command(flatten)]
        doc: FileArg,
        set: String,
        #[arg(value_enum, default_value_t = VariantArg::I)]
        variant: VariantArg,
    },
    /// Exhaustive (or, with --sample, seeded random) listing of objects.
    Enumerate {
        #[command(flatten)]
        doc: FileArg,
        #[arg(value_enum)]
        what: EnumerateWhat,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        codomain: Option<String>,
        #[arg(long, default_value_t = 1)]
        arity: usize,
        /// Draw this many seeded samples instead of listing everything.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// The document in canonical form.
    Print {
        #[command(flatten)]
        doc: FileArg,
    },
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    fn new(code: i32, text: String, json: Value) -> Self {
        Self { code, text, json }
    }

    fn input_error(message: String) -> Self {
        Self::new(
            EXIT_INPUT,
            format!("error: {message}\n"),
            json!({"status": "error", "message": message}),
        )
    }

    /// The output in the requested format.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Machine => {
                let mut v = self.json.clone();
                if let Value::Object(map) = &mut v {
                    map.insert("exit_code".into(), json!(self.code));
                }
                serde_json::to_string_pretty(&v).expect("serializable") + "\n"
            }
        }
    }
}

struct Ctx {
    doc: Document,
    bounds: Bounds,
    budget: Budget,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn parse_bounds(spec: &str, mut b: Bounds) -> Run<Bounds> {
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("bad bound {part:?}, expected key=value")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("bad value in {part:?}")))?;
        match k.trim() {
            "m_max" => b.m_max = v,
            "n_max" => b.n_max = v,
            "j_max" => b.j_max = v,
            "v_max" => b.v_max = v,
            other => return Err(Failure::Input(format!("unknown bound {other:?}"))),
        }
    }
    b.validate()?;
    Ok(b)
}

fn load(cli: &Cli, file: &PathBuf) -> Run<Ctx> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", file.display())))?;
    let doc = parse(&text).map_err(|e| Failure::Input(format!("{}:{e}", file.display())))?;
    let bounds = match &cli.bounds {
        Some(spec) => parse_bounds(spec, doc.bounds.bounds)?,
        None => doc.bounds.bounds,
    };
    let budget = Budget::new(
        cli.budget.unwrap_or(doc.bounds.budget),
        cli.seed.unwrap_or(doc.bounds.seed),
    )?;
    Ok(Ctx { doc, bounds, budget })
}

impl Ctx {
    fn function(&self, name: &str) -> Run<&MultiFunction> {
        self.doc
            .function(name)
            .ok_or_else(|| Failure::Input(format!("unknown function {name:?}")))
    }

    fn relation(&self, name: &str) -> Run<&Relation> {
        self.doc
            .relation(name)
            .ok_or_else(|| Failure::Input(format!("unknown relation {name:?}")))
    }

    fn constraint(&self, name: &str, a: &UniverseRef, b: &UniverseRef) -> Run<Constraint> {
        Ok(self
            .doc
            .constraint(name, a, b)
            .ok_or_else(|| Failure::Input(format!("unknown constraint {name:?}")))??)
    }

    fn class(&self, name: &str) -> Run<FunctionClass> {
        Ok(self
            .doc
            .class(name)
            .ok_or_else(|| Failure::Input(format!("unknown class {name:?}")))??)
    }

    fn set(&self, name: &str) -> Run<ConstraintSet> {
        Ok(self
            .doc
            .set(name)
            .ok_or_else(|| Failure::Input(format!("unknown constraint set {name:?}")))??)
    }

    fn universe(&self, name: Option<&str>, fallback: usize) -> Run<UniverseRef> {
        match name {
            Some(n) => self
                .doc
                .universe(n)
                .cloned()
                .ok_or_else(|| Failure::Input(format!("unknown universe {n:?}"))),
            None => self
                .doc
                .universes
                .get(fallback)
                .or_else(|| self.doc.universes.first())
                .cloned()
                .ok_or_else(|| Failure::Input("the document declares no universe".into())),
        }
    }

    /// `class` re-capped at `n_max` (members above the cap kept for substitution).
    fn recap(&self, class: &FunctionClass) -> Run<FunctionClass> {
        let mut out = FunctionClass::new(class.domain(), class.codomain(), class.arity_cap().max(self.bounds.n_max))?;
        for f in class.iter() {
            out.insert(f.clone())?;
        }
        Ok(out)
    }

    fn truncate(&self, class: &FunctionClass) -> Run<FunctionClass> {
        let mut out = FunctionClass::new(class.domain(), class.codomain(), self.bounds.n_max)?;
        for f in class.iter().filter(|f| f.arity() <= self.bounds.n_max) {
            out.insert(f.clone())?;
        }
        Ok(out)
    }
}

fn function_text(f: &MultiFunction) -> String {
    f.to_string()
}

fn function_json(f: &MultiFunction) -> Value {
    json!({
        "arity": f.arity(),
        "domain": f.domain().name(),
        "codomain": f.codomain().name(),
        "table": document::function_rows(f),
    })
}

fn relation_json(r: &Relation) -> Value {
    json!({
        "universe": r.universe().name(),
        "arity": r.arity(),
        "tuples": document::relation_tuples(r),
    })
}

fn constraint_json(c: &Constraint) -> Value {
    json!({
        "arity": c.arity(),
        "antecedent": document::relation_tuples(c.antecedent()),
        "consequent": document::relation_tuples(c.consequent()),
    })
}

fn class_outcome(label: &str, class: &FunctionClass) -> Outcome {
    let mut text = format!("{label}: {} functions\n", class.len());
    for f in class.iter() {
        text.push_str(&format!("  {}\n", function_text(f)));
    }
    let json = json!({
        "status": "computed",
        "operation": label,
        "count": class.len(),
        "functions": class.iter().map(function_json).collect::<Vec<_>>(),
    });
    Outcome::new(EXIT_OK, text, json)
}

fn table_outcome(label: &str, table: &ConstraintTable, extra: Value) -> Outcome {
    let mut text = format!("{label}:\n");
    let mut levels = Vec::new();
    for m in 1..=table.m_max() {
        let gens = table.generators(m);
        text.push_str(&format!(
            "  arity {m}: {} constraints, {} generators\n",
            table.count(m),
            gens.len()
        ));
        let mut js = Vec::new();
        for &(r, s) in &gens {
            let c = table.constraint_at(m, r, s);
            text.push_str(&format!("    {c}\n"));
            js.push(constraint_json(&c));
        }
        levels.push(json!({
            "arity": m,
            "constraints": table.count(m).to_string(),
            "generators": js,
        }));
    }
    let mut json = json!({
        "status": "computed",
        "operation": label,
        "arities": levels,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        for (k, v) in more {
            text.push_str(&format!("{k}: {v}\n"));
            map.insert(k, v);
        }
    }
    Outcome::new(EXIT_OK, text, json)
}

fn closure_for(set: &ConstraintSet, extras: Vec<Constraint>, bounds: &Bounds, kind: ClosureKind, m: usize) -> Run<ConstraintTable> {
    let base = set.with(extras)?;
    let cap = bounds.m_max.max(base.arity_cap()).max(m);
    Ok(close(ConstraintTable::from_set(&base, cap)?, bounds, kind)?.table)
}

fn execute(cli: &Cli) -> Run<Outcome> {
    match &cli.command {
        Command::CheckSat {
            doc,
            function,
            constraint,
        } => {
            let ctx = load(cli, &doc.file)?;
            let f = ctx.function(function)?;
            let c = ctx.constraint(constraint, f.domain(), f.codomain())?;
            Ok(match galois::violation(f, &c)? {
                None => Outcome::new(
                    EXIT_OK,
                    format!("{function} satisfies {constraint}\nresult: satisfied\n"),
                    json!({"status": "satisfied", "function": function, "constraint": constraint}),
                ),
                Some((columns, tuple)) => {
                    let cols: Vec<String> = columns.iter().map(|t| t.display(c.domain())).collect();
                    Outcome::new(
                        EXIT_VIOLATED,
                        format!(
                            "{function} violates {constraint}\nresult: violated\nwitness: columns {} give {} outside {}\n",
                            cols.join(" "),
                            tuple.display(c.codomain()),
                            c.consequent()
                        ),
                        json!({
                            "status": "violated",
                            "function": function,
                            "constraint": constraint,
                            "witness": {
                                "columns": columns.iter().map(|t| t.entries().iter().map(|&x| c.domain().label(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                                "tuple": tuple.entries().iter().map(|&x| c.codomain().label(x)).collect::<Vec<_>>(),
                            },
                        }),
                    )
                }
            })
        }
        Command::Image { doc, function, relation } => {
            let ctx = load(cli, &doc.file)?;
            let f = ctx.function(function)?;
            let r = ctx.relation(relation)?;
            let image = f.image_of_relation(r)?;
            Ok(Outcome::new(
                EXIT_OK,
                format!("{function}{relation} = {image}\n"),
                json!({"status": "computed", "operation": "image", "image": relation_json(&image)}),
            ))
        }
        Command::CloseRvs { doc, class, total } => {
            let ctx = load(cli, &doc.file)?;
            let m = ctx.recap(&ctx.class(class)?)?;
            let closed = if *total {
                rvst_closure(&m, &ctx.budget)?
            } else {
                rvs_closure(&m, &ctx.budget)?
            };
            Ok(class_outcome(if *total { "close-rvs-total" } else { "close-rvs" }, &ctx.truncate(&closed)?))
        }
        Command::CloseLc { doc, class, kind } => {
            let ctx = load(cli, &doc.file)?;
            let m = ctx.truncate(&ctx.recap(&ctx.class(class)?)?)?;
            let closed = lc_closure(&m, (*kind).into(), &ctx.budget)?;
            Ok(class_outcome("close-lc", &closed))
        }
        Command::CloseWcm { doc, set } | Command::CloseCm { doc, set } => {
            let ctx = load(cli, &doc.file)?;
            let t = ctx.set(set)?;
            let kind = if matches!(cli.command, Command::CloseWcm { .. }) {
                ClosureKind::Weak
            } else {
                ClosureKind::Full
            };
            let cap = ctx.bounds.m_max.max(t.arity_cap());
            let closed = close(ConstraintTable::from_set(&t, cap)?, &ctx.bounds, kind)?;
            let label = if kind == ClosureKind::Weak { "close-wcm" } else { "close-cm" };
            Ok(table_outcome(
                label,
                &closed.table,
                json!({"exact": closed.exact, "rounds": closed.rounds, "bounds": ctx.bounds.to_string()}),
            ))
        }
        Command::CloseLo { doc, set } => {
            let ctx = load(cli, &doc.file)?;
            let t = lo_closure(&ctx.set(set)?);
            let mut text = format!("close-lo: {} constraints\n", t.len());
            for c in t.iter() {
                text.push_str(&format!("  {c}\n"));
            }
            Ok(Outcome::new(
                EXIT_OK,
                text,
                json!({"status": "computed", "operation": "close-lo", "constraints": t.iter().map(constraint_json).collect::<Vec<_>>()}),
            ))
        }
        Command::Csf { doc, class } => {
            let ctx = load(cli, &doc.file)?;
            let table = galois::csf(&ctx.class(class)?, ctx.bounds.m_max)?;
            Ok(table_outcome("csf", &table, json!({"m_max": ctx.bounds.m_max})))
        }
        Command::Mfsc { doc, set } | Command::Tfsc { doc, set } | Command::Pfsc { doc, set } | Command::Sfsc { doc, set } => {
            let (label, kind) = match cli.command {
                Command::Mfsc { .. } => ("mfsc", FunctionKind::Any),
                Command::Tfsc { .. } => ("tfsc", FunctionKind::Total),
                Command::Pfsc { .. } => ("pfsc", FunctionKind::Partial),
                _ => ("sfsc", FunctionKind::SingleValued),
            };
            let ctx = load(cli, &doc.file)?;
            let t = ctx.set(set)?;
            let class = galois::mfsc(&t, ctx.bounds.n_max, kind, &ctx.budget)?;
            Ok(class_outcome(label, &class))
        }
        Command::SeparateConstraint { doc, class, function } => {
            let ctx = load(cli, &doc.file)?;
            let m = ctx.class(class)?;
            let f = ctx.function(function)?;
            match galois::separating_constraint(&m, f) {
                Ok(c) => {
                    let (columns, tuple) = galois::violation(f, &c)?.expect("the separator is violated");
                    let cols: Vec<String> = columns.iter().map(|t| t.display(c.domain())).collect();
                    Ok(Outcome::new(
                        EXIT_VIOLATED,
                        format!(
                            "verdict: outside\nwitness: {c}\n{function} gives {} on columns {}\n",
                            tuple.display(c.codomain()),
                            cols.join(" ")
                        ),
                        json!({
                            "status": "outside",
                            "witness": constraint_json(&c),
                            "violating_tuple": tuple.entries().iter().map(|&x| c.codomain().label(x)).collect::<Vec<_>>(),
                        }),
                    ))
                }
                Err(Error::Inside(msg)) => Ok(Outcome::new(
                    EXIT_OK,
                    format!("verdict: inside\n{msg}\n"),
                    json!({"status": "inside"}),
                )),
                Err(e) => Err(e.into()),
            }
        }
        Command::SeparateFunction {
            doc,
            set,
            constraint,
            partial,
            total,
            single_valued,
        } => {
            let ctx = load(cli, &doc.file)?;
            let t = ctx.set(set)?;
            let (a, b) = (t.domain().clone(), t.codomain().clone());
            let c = ctx.constraint(constraint, &a, &b)?;
            let variant = if *partial {
                Variant::Ii
            } else if *total {
                Variant::Iii
            } else if *single_valued {
                Variant::Iv
            } else {
                Variant::I
            };
            let (extras, kind) = variant.extras(&t)?;
            let table = closure_for(&t, extras, &ctx.bounds, kind, c.arity())?;
            let report = match variant {
                Variant::I => galois::separating_function(&table, &c),
                Variant::Ii => galois::separating_partial_function(&table, &c),
                Variant::Iii => galois::separating_total_function(&table, &c, FunctionKind::Total, &ctx.budget),
                Variant::Iv => galois::separating_total_function(&table, &c, FunctionKind::SingleValued, &ctx.budget),
            };
            match report {
                Ok(r) => Ok(separation_outcome(&r, &ctx.bounds)),
                Err(Error::Inside(msg)) => Ok(Outcome::new(
                    EXIT_OK,
                    format!("verdict: inside\n{msg}\n"),
                    json!({"status": "inside"}),
                )),
                Err(Error::PartialityViolated(msg)) => Ok(Outcome::new(
                    EXIT_INCONCLUSIVE,
                    format!("verdict: inconclusive\n{msg}\nraise j_max or v_max and retry\n"),
                    json!({"status": "inconclusive", "message": msg, "bounds": ctx.bounds.to_string()}),
                )),
                Err(e) => Err(e.into()),
            }
        }
        Command::VerifyProp2 { doc, class, variant } => {
            let ctx = load(cli, &doc.file)?;
            let m = ctx.class(class)?;
            let r = galois::verify_prop2(&m, (*variant).into(), &ctx.bounds, &ctx.budget)?;
            let mut text = format!(
                "variant {}: lhs {} functions, rhs {} functions\nresult: {}\n",
                r.variant,
                r.lhs.len(),
                r.rhs.len(),
                if r.equal { "equal" } else { "different" }
            );
            if let Some(f) = &r.counterexample {
                let side = if r.lhs.contains(f) { "left" } else { "right" };
                text.push_str(&format!("witness: {} (only on the {side} side)\n", function_text(f)));
            }
            Ok(Outcome::new(
                if r.equal { EXIT_OK } else { EXIT_VIOLATED },
                text,
                json!({
                    "status": if r.equal { "equal" } else { "violated" },
                    "variant": r.variant.to_string(),
                    "lhs_size": r.lhs.len(),
                    "rhs_size": r.rhs.len(),
                    "counterexample": r.counterexample.as_ref().map(function_json),
                }),
            ))
        }
        Command::VerifyProp4 { doc, set, variant } => {
            let ctx = load(cli, &doc.file)?;
            let t = ctx.set(set)?;
            let r = galois::verify_prop4(&t, (*variant).into(), &ctx.bounds, &ctx.budget)?;
            let mut text = format!("variant {} at {}\n", r.variant, r.bounds);
            for a in &r.per_arity {
                text.push_str(&format!(
                    "  arity {}: inside {}, outside {}, inconclusive {}, false certificates {}\n",
                    a.arity, a.inside, a.outside, a.inconclusive, a.false_certificates
                ));
            }
            for c in &r.undecided {
                text.push_str(&format!("  undecided: {c}\n"));
            }
            let falses: usize = r.per_arity.iter().map(|a| a.false_certificates).sum();
            let (code, status) = if falses > 0 {
                (EXIT_VIOLATED, "violated")
            } else if r.inconclusive() > 0 {
                (EXIT_INCONCLUSIVE, "inconclusive")
            } else {
                (EXIT_OK, "agree")
            };
            text.push_str(&format!("result: {status}\n"));
            if code == EXIT_INCONCLUSIVE {
                text.push_str("raise j_max or v_max and retry\n");
            }
            Ok(Outcome::new(
                code,
                text,
                json!({
                    "status": status,
                    "variant": r.variant.to_string(),
                    "bounds": r.bounds.to_string(),
                    "per_arity": r.per_arity.iter().map(|a| json!({
                        "arity": a.arity,
                        "inside": a.inside.to_string(),
                        "outside": a.outside.to_string(),
                        "inconclusive": a.inconclusive.to_string(),
                        "false_certificates": a.false_certificates,
                    })).collect::<Vec<_>>(),
                    "undecided": r.undecided.iter().map(constraint_json).collect::<Vec<_>>(),
                }),
            ))
        }
        Command::Enumerate {
            doc,
            what,
            domain,
            codomain,
            arity,
            sample,
        } => {
            let ctx = load(cli, &doc.file)?;
            let a = ctx.universe(domain.as_deref(), 0)?;
            let b = ctx.universe(codomain.as_deref(), 1)?;
            enumerate_outcome(&ctx, *what, &a, &b, *arity, *sample)
        }
        Command::Print { doc } => {
            let ctx = load(cli, &doc.file)?;
            Ok(Outcome::new(EXIT_OK, ctx.doc.serialize(), ctx.doc.to_json()))
        }
    }
}

fn separation_outcome(r: &galois::SeparationReport, bounds: &Bounds) -> Outcome {
    match r.verdict {
        Verdict::Outside => {
            let g = r.function().expect("witness present");
            let s = r.trace.s.as_ref().map(|s| s.entries().to_vec());
            Outcome::new(
                EXIT_VIOLATED,
                format!(
                    "verdict: outside\nwitness: {}\ncandidates tried: {}\n",
                    function_text(g),
                    r.trace.candidates
                ),
                json!({
                    "status": "outside",
                    "witness": function_json(g),
                    "s": s,
                    "candidates": r.trace.candidates,
                }),
            )
        }
        _ => {
            let mut text = format!(
                "verdict: inconclusive\ncandidates tried: {}\nbounds: {bounds}\n",
                r.trace.candidates
            );
            if let Some(gap) = &r.gap {
                text.push_str(&format!(
                    "first candidate {} violates {} with {}\n",
                    function_text(&gap.candidate),
                    gap.violated,
                    gap.s1.display(gap.violated.codomain())
                ));
            }
            text.push_str("raise j_max or v_max and retry\n");
            Outcome::new(
                EXIT_INCONCLUSIVE,
                text,
                json!({
                    "status": "inconclusive",
                    "candidates": r.trace.candidates,
                    "bounds": bounds.to_string(),
                    "gap": r.gap.as_ref().map(|g| json!({
                        "candidate": function_json(&g.candidate),
                        "violated": constraint_json(&g.violated),
                        "h": g.h,
                    })),
                }),
            )
        }
    }
}

fn enumerate_outcome(
    ctx: &Ctx,
    what: EnumerateWhat,
    a: &UniverseRef,
    b: &UniverseRef,
    arity: usize,
    sample: Option<usize>,
) -> Run<Outcome> {
    let mut rng = ctx.budget.rng(0);
    let mut lines = Vec::new();
    let mut items = Vec::new();
    match what {
        EnumerateWhat::Functions => {
            let list: Vec<MultiFunction> = match sample {
                Some(k) => (0..k)
                    .map(|_| enumerate::sample_function(&mut rng, a, b, arity, FunctionKind::Any))
                    .collect::<Result<_, _>>()?,
                None => enumerate::all_functions(a, b, arity, &ctx.budget)?.collect(),
            };
            for f in &list {
                lines.push(function_text(f));
                items.push(function_json(f));
            }
        }
        EnumerateWhat::Relations => {
            let list: Vec<Relation> = match sample {
                Some(k) => (0..k)
                    .map(|_| enumerate::sample_relation(&mut rng, a, arity, 0.5))
                    .collect::<Result<_, _>>()?,
                None => enumerate::all_relations(a, arity, &ctx.budget)?.collect(),
            };
            for r in &list {
                lines.push(r.to_string());
                items.push(relation_json(r));
            }
        }
        EnumerateWhat::Constraints => {
            let list: Vec<Constraint> = match sample {
                Some(k) => (0..k)
                    .map(|_| enumerate::sample_constraint(&mut rng, a, b, arity))
                    .collect::<Result<_, _>>()?,
                None => enumerate::all_constraints(a, b, arity, &ctx.budget)?.collect(),
            };
            for c in &list {
                lines.push(c.to_string());
                items.push(constraint_json(c));
            }
        }
        EnumerateWhat::Schemes => {
            for s in enumerate::all_schemes(&ctx.bounds, ctx.bounds.m_max, &ctx.budget)? {
                lines.push(s.to_string());
                items.push(serde_json::to_value(&s).expect("serializable"));
            }
        }
    }
    let mut text = format!("{} items\n", lines.len());
    for l in &lines {
        text.push_str(&format!("  {l}\n"));
    }
    Ok(Outcome::new(
        EXIT_OK,
        text,
        json!({"status": "computed", "operation": "enumerate", "count": items.len(), "items": items}),
    ))
}

/// Sets the worker count from [`WORKERS_ENV`] (once per process).
pub fn configure_workers() {
    if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses arguments and runs one command.
pub fn run_with<I, T>(args: I) -> (Format, Outcome)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return (Format::Text, Outcome::new(code, e.to_string(), json!({"status": "usage"})));
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(Failure::Input(msg)) => Outcome::input_error(msg),
        Err(Failure::Lib(e)) => Outcome::input_error(e.to_string()),
    };
    (cli.format, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> String {
        format!("{}/tests/fixtures/worked.mvg", env!("CARGO_MANIFEST_DIR"))
    }

    fn run(args: &[&str]) -> Outcome {
        let mut full = vec!["mvgalois".to_string()];
        full.extend(args.iter().map(|a| a.replace("@", &fixture())));
        run_with(full).1
    }

    #[test]
    fn satisfaction_and_witnesses() {
        let o = run(&["check-sat", "@", "f", "trivial1"]);
        assert_eq!(o.code, EXIT_OK);
        assert!(o.text.contains("satisfied"));
        let o = run(&["check-sat", "@", "g", "sep"]);
        assert_eq!(o.code, EXIT_VIOLATED);
        assert!(o.text.contains("witness: columns (0, 1) give (1, 0)"), "{}", o.text);
        let o = run(&["separate-constraint", "@", "M", "g"]);
        assert_eq!(o.code, EXIT_VIOLATED);
        assert!(o.text.contains("({(0, 1)}, {(0, 0), (0, 1), (1, 1)})"), "{}", o.text);
    }

    #[test]
    fn prop2_reports_sizes() {
        let o = run(&["verify-prop2", "@", "M", "ii"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.text);
        assert!(o.text.contains("lhs 8 functions, rhs 8 functions"));
        let o = run(&["--format", "machine", "verify-prop2", "@", "M", "iv"]);
        assert_eq!(o.code, EXIT_OK);
        assert_eq!(o.json["lhs_size"], o.json["rhs_size"]);
    }

    #[test]
    fn input_errors_exit_with_two() {
        assert_eq!(run(&["check-sat", "@", "nope", "trivial1"]).code, EXIT_INPUT);
        assert_eq!(run(&["check-sat", "/nonexistent/file", "f", "trivial1"]).code, EXIT_INPUT);
        assert_eq!(run(&["frobnicate"]).code, EXIT_INPUT);
        assert_eq!(run(&["csf", "@", "M", "--bounds", "m_max=0"]).code, EXIT_INPUT);
    }

    #[test]
    fn separating_functions_by_mode() {
        let o = run(&["separate-function", "@", "T", "equality"]);
        assert_eq!(o.code, EXIT_VIOLATED, "{}", o.text);
        let o = run(&["separate-function", "@", "T", "equality", "--partial"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.text);
        let o = run(&["--format", "machine", "separate-function", "@", "T", "equality", "--total"]);
        assert_eq!(o.code, EXIT_VIOLATED);
        assert_eq!(o.json["status"], "outside");
        assert!(run(&["separate-function", "@", "T", "sep", "--partial", "--total"]).code == EXIT_INPUT);
    }

    #[test]
    fn closures_and_listings() {
        assert_eq!(run(&["close-rvs", "@", "M"]).json["count"], 8);
        assert_eq!(run(&["close-lc", "@", "M", "--kind", "partial"]).code, EXIT_OK);
        for cmd in ["close-wcm", "close-cm", "close-lo", "mfsc", "tfsc", "pfsc", "sfsc"] {
            assert_eq!(run(&[cmd, "@", "T"]).code, EXIT_OK, "{cmd}");
        }
        let o = run(&["verify-prop4", "@", "T", "iii"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.text);
        let o = run(&["enumerate", "@", "functions", "--arity", "1"]);
        assert_eq!(o.json["count"], 16);
        let a = run(&["enumerate", "@", "constraints", "--sample", "5", "--seed", "9"]);
        let b = run(&["enumerate", "@", "constraints", "--sample", "5", "--seed", "9"]);
        assert_eq!(a, b);
    }

    #[test]
    fn printing_is_canonical() {
        let o = run(&["print", "@"]);
        let doc = parse(&o.text).unwrap();
        assert_eq!(doc.serialize(), o.text);
        let original = parse(&std::fs::read_to_string(fixture()).unwrap()).unwrap();
        assert_eq!(doc, original);
        let m = run(&["--format", "machine", "print", "@"]);
        assert_eq!(m.json["functions"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn output_does_not_depend_on_workers() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run(&["verify-prop4", "@", "T", "i"]));
        let parallel = run(&["verify-prop4", "@", "T", "i"]);
        assert_eq!(serial, parallel);
    }
}

//! Problem documents: a line-oriented text format with section headers.
//!
//! ```text
//! [universes]
//! A = 2
//! B = {no, yes}
//! [functions]
//! f : A^1 -> B
//!   (0) -> {no, yes}
//!   (1) -> {}
//! [relations]
//! R : A^2 = {(0, 1)}
//! S : B^2 = empty^2
//! [constraints]
//! c = (R, S)
//! [classes]
//! M : A -> B = {f}
//! [sets]
//! T : A -> B = {c, trivial1}
//! [bounds]
//! m_max = 2
//! ```
//!
//! `empty<m>`, `trivial<m>` and `equality` name the built-in constraints
//! wherever a constraint is expected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::constraint::{Bounds, Constraint, ConstraintSet};
use crate::enumerate::DEFAULT_MAX_TABLES;
use crate::error::Error;
use crate::multifunction::{FunctionClass, MultiFunction};
use crate::universe::{Relation, Tuple, Universe, UniverseRef};

/// A diagnostic with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFunction {
    pub name: String,
    pub function: MultiFunction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedRelation {
    pub name: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedConstraint {
    pub name: String,
    pub antecedent: String,
    pub consequent: String,
    pub constraint: Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedClass {
    pub name: String,
    pub domain: UniverseRef,
    pub codomain: UniverseRef,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSet {
    pub name: String,
    pub domain: UniverseRef,
    pub codomain: UniverseRef,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocBounds {
    pub bounds: Bounds,
    pub budget: u128,
    pub seed: u64,
}

impl Default for DocBounds {
    fn default() -> Self {
        Self {
            bounds: Bounds::default(),
            budget: DEFAULT_MAX_TABLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub universes: Vec<UniverseRef>,
    pub functions: Vec<NamedFunction>,
    pub relations: Vec<NamedRelation>,
    pub constraints: Vec<NamedConstraint>,
    pub classes: Vec<NamedClass>,
    pub sets: Vec<NamedSet>,
    pub bounds: DocBounds,
}

/// Built-in constraint names: `empty<m>`, `trivial<m>`, `equality`.
pub fn builtin_constraint(name: &str, a: &UniverseRef, b: &UniverseRef) -> Option<crate::error::Result<Constraint>> {
    if name == "equality" {
        return Some(Ok(Constraint::equality(a, b)));
    }
    for (prefix, make) in [
        ("empty", Constraint::empty as fn(&UniverseRef, &UniverseRef, usize) -> crate::error::Result<Constraint>),
        ("trivial", Constraint::trivial),
    ] {
        if let Some(m) = name.strip_prefix(prefix).and_then(|d| d.parse::<usize>().ok()) {
            if m == 0 {
                return Some(Err(Error::ZeroArity));
            }
            return Some(make(a, b, m));
        }
    }
    None
}

impl Document {
    pub fn universe(&self, name: &str) -> Option<&UniverseRef> {
        self.universes.iter().find(|u| u.name() == name)
    }

    pub fn function(&self, name: &str) -> Option<&MultiFunction> {
        self.functions.iter().find(|f| f.name == name).map(|f| &f.function)
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name).map(|r| &r.relation)
    }

    /// A declared constraint, or a built-in one over `a` and `b`.
    pub fn constraint(&self, name: &str, a: &UniverseRef, b: &UniverseRef) -> Option<crate::error::Result<Constraint>> {
        if let Some(c) = self.constraints.iter().find(|c| c.name == name) {
            return Some(Ok(c.constraint.clone()));
        }
        builtin_constraint(name, a, b)
    }

    pub fn class(&self, name: &str) -> Option<crate::error::Result<FunctionClass>> {
        let c = self.classes.iter().find(|c| c.name == name)?;
        let members: Vec<MultiFunction> = c
            .members
            .iter()
            .map(|m| self.function(m).expect("resolved at parse time").clone())
            .collect();
        let cap = members.iter().map(MultiFunction::arity).max().unwrap_or(1);
        Some(FunctionClass::from_functions(&c.domain, &c.codomain, cap, members))
    }

    pub fn set(&self, name: &str) -> Option<crate::error::Result<ConstraintSet>> {
        let s = self.sets.iter().find(|s| s.name == name)?;
        let members: crate::error::Result<Vec<Constraint>> = s
            .members
            .iter()
            .map(|m| self.constraint(m, &s.domain, &s.codomain).expect("resolved at parse time"))
            .collect();
        Some(members.and_then(|members| {
            let cap = members.iter().map(Constraint::arity).max().unwrap_or(1);
            ConstraintSet::from_constraints(&s.domain, &s.codomain, cap, members)
        }))
    }

    /// The canonical text form; parsing it gives back an equal document.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("[universes]\n");
        for u in &self.universes {
            match u.labels() {
                Some(l) => writeln!(out, "{} = {{{}}}", u.name(), l.join(", ")),
                None => writeln!(out, "{} = {}", u.name(), u.size()),
            }
            .unwrap();
        }
        if !self.functions.is_empty() {
            out.push_str("[functions]\n");
            for f in &self.functions {
                let g = &f.function;
                writeln!(out, "{} : {}^{} -> {}", f.name, g.domain().name(), g.arity(), g.codomain().name()).unwrap();
                for (r, &v) in g.table().iter().enumerate() {
                    let t = g.domain().unrank(r, g.arity()).expect("rank in range");
                    writeln!(out, "  {} -> {}", t.display(g.domain()), g.display_value(v)).unwrap();
                }
            }
        }
        if !self.relations.is_empty() {
            out.push_str("[relations]\n");
            for r in &self.relations {
                let rel = &r.relation;
                writeln!(out, "{} : {}^{} = {}", r.name, rel.universe().name(), rel.arity(), rel.display()).unwrap();
            }
        }
        if !self.constraints.is_empty() {
            out.push_str("[constraints]\n");
            for c in &self.constraints {
                writeln!(out, "{} = ({}, {})", c.name, c.antecedent, c.consequent).unwrap();
            }
        }
        if !self.classes.is_empty() {
            out.push_str("[classes]\n");
            for c in &self.classes {
                writeln!(
                    out,
                    "{} : {} -> {} = {{{}}}",
                    c.name,
                    c.domain.name(),
                    c.codomain.name(),
                    c.members.join(", ")
                )
                .unwrap();
            }
        }
        if !self.sets.is_empty() {
            out.push_str("[sets]\n");
            for s in &self.sets {
                writeln!(
                    out,
                    "{} : {} -> {} = {{{}}}",
                    s.name,
                    s.domain.name(),
                    s.codomain.name(),
                    s.members.join(", ")
                )
                .unwrap();
            }
        }
        let b = &self.bounds;
        out.push_str("[bounds]\n");
        writeln!(out, "n_max = {}", b.bounds.n_max).unwrap();
        writeln!(out, "m_max = {}", b.bounds.m_max).unwrap();
        writeln!(out, "j_max = {}", b.bounds.j_max).unwrap();
        writeln!(out, "v_max = {}", b.bounds.v_max).unwrap();
        writeln!(out, "budget = {}", b.budget).unwrap();
        writeln!(out, "seed = {}", b.seed).unwrap();
        out
    }

    /// The structured-object form of the document.
    pub fn to_json(&self) -> Value {
        json!({
            "universes": self.universes.iter().map(|u| json!({
                "name": u.name(),
                "size": u.size(),
                "labels": u.labels(),
            })).collect::<Vec<_>>(),
            "functions": self.functions.iter().map(|f| json!({
                "name": f.name,
                "domain": f.function.domain().name(),
                "codomain": f.function.codomain().name(),
                "arity": f.function.arity(),
                "table": function_rows(&f.function),
            })).collect::<Vec<_>>(),
            "relations": self.relations.iter().map(|r| json!({
                "name": r.name,
                "universe": r.relation.universe().name(),
                "arity": r.relation.arity(),
                "tuples": relation_tuples(&r.relation),
            })).collect::<Vec<_>>(),
            "constraints": self.constraints.iter().map(|c| json!({
                "name": c.name,
                "antecedent": c.antecedent,
                "consequent": c.consequent,
            })).collect::<Vec<_>>(),
            "classes": self.classes.iter().map(|c| json!({
                "name": c.name,
                "domain": c.domain.name(),
                "codomain": c.codomain.name(),
                "members": c.members,
            })).collect::<Vec<_>>(),
            "sets": self.sets.iter().map(|s| json!({
                "name": s.name,
                "domain": s.domain.name(),
                "codomain": s.codomain.name(),
                "members": s.members,
            })).collect::<Vec<_>>(),
            "bounds": {
                "n_max": self.bounds.bounds.n_max,
                "m_max": self.bounds.bounds.m_max,
                "j_max": self.bounds.bounds.j_max,
                "v_max": self.bounds.bounds.v_max,
                "budget": self.bounds.budget.to_string(),
                "seed": self.bounds.seed,
            },
        })
    }
}

fn labels_of(u: &Universe, t: &Tuple) -> Vec<String> {
    t.entries().iter().map(|&x| u.label(x)).collect()
}

/// `[[input labels], [output labels]]` per row, in rank order.
pub fn function_rows(f: &MultiFunction) -> Vec<Value> {
    f.table()
        .iter()
        .enumerate()
        .map(|(r, &v)| {
            let t = f.domain().unrank(r, f.arity()).expect("rank in range");
            let out: Vec<String> = (0..f.codomain().size())
                .filter(|&b| v >> b & 1 == 1)
                .map(|b| f.codomain().label(b))
                .collect();
            json!([labels_of(f.domain(), &t), out])
        })
        .collect()
}

pub fn relation_tuples(r: &Relation) -> Vec<Vec<String>> {
    r.tuples().map(|t| labels_of(r.universe(), &t)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Lexed {
    tok: Tok,
    column: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let column = i + 1;
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Lexed {
                tok: Tok::Punct("->"),
                column,
            });
            i += 2;
            continue;
        }
        let punct = match c {
            ':' => Some(":"),
            '=' => Some("="),
            '{' => Some("{"),
            '}' => Some("}"),
            '(' => Some("("),
            ')' => Some(")"),
            ',' => Some(","),
            '^' => Some("^"),
            '[' => Some("["),
            ']' => Some("]"),
            _ => None,
        };
        if let Some(p) = punct {
            out.push(Lexed {
                tok: Tok::Punct(p),
                column,
            });
            i += 1;
            continue;
        }
        if c.is_alphanumeric() || c == '_' || c == '.' || c == '\'' || c == '-' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '.' | '\'' | '-'))
                && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
            {
                i += 1;
            }
            out.push(Lexed {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        return Err(ParseError {
            line: line_no,
            column,
            message: format!("unexpected character {c:?}"),
        });
    }
    Ok(out)
}

struct Line {
    no: usize,
    toks: Vec<Lexed>,
    pos: usize,
    end_column: usize,
}

impl Line {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.no,
            column,
            message: message.into(),
        }
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn punct(&mut self, p: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(self.column(), format!("expected `{p}`"))),
        }
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, column))
            }
            _ => Err(self.err(column, format!("expected {what}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<(u128, usize), ParseError> {
        let (s, column) = self.ident(what)?;
        s.parse::<u128>()
            .map(|n| (n, column))
            .map_err(|_| self.err(column, format!("expected {what}, found {s:?}")))
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(self.column(), "unexpected trailing input"))
        }
    }

    /// `{x, y, ...}` of identifiers, with columns.
    fn ident_set(&mut self, what: &str) -> Result<Vec<(String, usize)>, ParseError> {
        self.punct("{")?;
        let mut out = Vec::new();
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            out.push(self.ident(what)?);
            if self.eat("}") {
                return Ok(out);
            }
            self.punct(",")?;
        }
    }

    /// `(x, y, ...)` of elements of `u`.
    fn tuple(&mut self, u: &Universe) -> Result<Tuple, ParseError> {
        self.punct("(")?;
        let mut out = Vec::new();
        loop {
            let (s, column) = self.ident("an element")?;
            out.push(u.element(&s).map_err(|e| self.err(column, e.to_string()))?);
            if self.eat(")") {
                return Ok(Tuple::new(out));
            }
            self.punct(",")?;
        }
    }

    /// `U^m` (the exponent defaults to 1).
    fn power<'a>(&mut self, doc: &'a Document) -> Result<(&'a UniverseRef, usize), ParseError> {
        let (name, column) = self.ident("a universe")?;
        let u = doc
            .universe(&name)
            .ok_or_else(|| self.err(column, format!("unknown universe {name:?}")))?;
        let m = if self.eat("^") {
            let (m, col) = self.number("an arity")?;
            if m == 0 {
                return Err(self.err(col, "arity must be positive"));
            }
            m as usize
        } else {
            1
        };
        Ok((u, m))
    }

    fn universe<'a>(&mut self, doc: &'a Document) -> Result<&'a UniverseRef, ParseError> {
        let (name, column) = self.ident("a universe")?;
        doc.universe(&name)
            .ok_or_else(|| self.err(column, format!("unknown universe {name:?}")))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Universes,
    Functions,
    Relations,
    Constraints,
    Classes,
    Sets,
    Bounds,
}

struct PendingFunction {
    name: String,
    line: usize,
    domain: UniverseRef,
    codomain: UniverseRef,
    arity: usize,
    rows: BTreeMap<usize, u64>,
}

fn finish_function(doc: &mut Document, p: PendingFunction) -> Result<(), ParseError> {
    let space = p.domain.space(p.arity).map_err(|e| ParseError {
        line: p.line,
        column: 1,
        message: e.to_string(),
    })?;
    let mut table = Vec::with_capacity(space);
    for r in 0..space {
        match p.rows.get(&r) {
            Some(&v) => table.push(v),
            None => {
                let t = p.domain.unrank(r, p.arity).expect("rank in range");
                return Err(ParseError {
                    line: p.line,
                    column: 1,
                    message: format!("function {} has no row for input {}", p.name, t.display(&p.domain)),
                });
            }
        }
    }
    let function = MultiFunction::new(&p.domain, &p.codomain, p.arity, table).map_err(|e| ParseError {
        line: p.line,
        column: 1,
        message: e.to_string(),
    })?;
    doc.functions.push(NamedFunction { name: p.name, function });
    Ok(())
}

/// Parses and validates a document.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let mut doc = Document::default();
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    let mut section = Section::None;
    let mut pending: Option<PendingFunction> = None;
    let mut bound_keys: BTreeMap<String, usize> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let toks = lex(raw, no)?;
        if toks.is_empty() {
            continue;
        }
        let mut line = Line {
            no,
            toks,
            pos: 0,
            end_column: raw.trim_end().chars().count() + 1,
        };

        // function rows
        if section == Section::Functions && matches!(line.peek(), Some(Tok::Punct("("))) {
            let Some(p) = pending.as_mut() else {
                return Err(line.err(line.column(), "table row outside a function"));
            };
            let column = line.column();
            let t = line.tuple(&p.domain)?;
            if t.arity() != p.arity {
                return Err(line.err(
                    column,
                    format!("row has arity {} but {} has arity {}", t.arity(), p.name, p.arity),
                ));
            }
            line.punct("->")?;
            let mut value = 0u64;
            for (s, col) in line.ident_set("an element")? {
                let b = p.codomain.element(&s).map_err(|e| line.err(col, e.to_string()))?;
                value |= 1 << b;
            }
            line.finish()?;
            let r = p.domain.rank(&t).expect("elements resolved");
            if p.rows.insert(r, value).is_some() {
                return Err(line.err(column, format!("duplicate row {} in {}", t.display(&p.domain), p.name)));
            }
            continue;
        }
        if let Some(p) = pending.take() {
            finish_function(&mut doc, p)?;
        }

        if line.eat("[") {
            let (name, column) = line.ident("a section name")?;
            line.punct("]")?;
            line.finish()?;
            section = match name.as_str() {
                "universes" => Section::Universes,
                "functions" => Section::Functions,
                "relations" => Section::Relations,
                "constraints" => Section::Constraints,
                "classes" => Section::Classes,
                "sets" => Section::Sets,
                "bounds" => Section::Bounds,
                _ => return Err(line.err(column, format!("unknown section {name:?}"))),
            };
            continue;
        }

        let (name, name_col) = line.ident("a name")?;
        if section != Section::Bounds {
            if let Some(prev) = names.insert(name.clone(), no) {
                return Err(line.err(name_col, format!("duplicate name {name:?} (first defined on line {prev})")));
            }
        }
        match section {
            Section::None => return Err(line.err(name_col, "definition before any section header")),
            Section::Universes => {
                line.punct("=")?;
                let u = if matches!(line.peek(), Some(Tok::Punct("{"))) {
                    let labels: Vec<String> = line.ident_set("a label")?.into_iter().map(|(s, _)| s).collect();
                    Universe::with_labels(name, labels).map_err(|e| line.err(name_col, e.to_string()))?
                } else {
                    let (n, col) = line.number("a size")?;
                    Universe::new(name, n as usize).map_err(|e| line.err(col, e.to_string()))?
                };
                line.finish()?;
                doc.universes.push(u);
            }
            Section::Functions => {
                line.punct(":")?;
                let (domain, arity) = line.power(&doc)?;
                line.punct("->")?;
                let codomain = line.universe(&doc)?;
                line.finish()?;
                pending = Some(PendingFunction {
                    name,
                    line: no,
                    domain: domain.clone(),
                    codomain: codomain.clone(),
                    arity,
                    rows: BTreeMap::new(),
                });
            }
            Section::Relations => {
                line.punct(":")?;
                let (u, m) = line.power(&doc)?;
                let u = u.clone();
                line.punct("=")?;
                let column = line.column();
                let relation = if matches!(line.peek(), Some(Tok::Punct("{"))) {
                    line.punct("{")?;
                    let mut tuples = Vec::new();
                    if !line.eat("}") {
                        loop {
                            let col = line.column();
                            let t = line.tuple(&u)?;
                            if t.arity() != m {
                                return Err(line.err(col, format!("tuple has arity {} but {name} has arity {m}", t.arity())));
                            }
                            tuples.push(t);
                            if line.eat("}") {
                                break;
                            }
                            line.punct(",")?;
                        }
                    }
                    Relation::from_tuples(&u, m, &tuples)
                } else {
                    let (word, col) = line.ident("a relation")?;
                    let k = if line.eat("^") { line.number("an arity")?.0 as usize } else { m };
                    if k != m {
                        return Err(line.err(col, format!("{word}^{k} does not have arity {m}")));
                    }
                    match word.as_str() {
                        "empty" => Relation::empty(&u, m),
                        "full" => Relation::full(&u, m),
                        "equality" if m == 2 => Ok(Relation::equality(&u)),
                        _ => return Err(line.err(col, format!("expected a tuple set, found {word:?}"))),
                    }
                }
                .map_err(|e| line.err(column, e.to_string()))?;
                line.finish()?;
                doc.relations.push(NamedRelation { name, relation });
            }
            Section::Constraints => {
                line.punct("=")?;
                line.punct("(")?;
                let (ra, ca) = line.ident("an antecedent relation")?;
                line.punct(",")?;
                let (rs, cs) = line.ident("a consequent relation")?;
                line.punct(")")?;
                line.finish()?;
                let r = doc
                    .relation(&ra)
                    .ok_or_else(|| line.err(ca, format!("unknown relation {ra:?}")))?
                    .clone();
                let s = doc
                    .relation(&rs)
                    .ok_or_else(|| line.err(cs, format!("unknown relation {rs:?}")))?
                    .clone();
                let constraint = Constraint::new(r, s).map_err(|e| line.err(cs, e.to_string()))?;
                doc.constraints.push(NamedConstraint {
                    name,
                    antecedent: ra,
                    consequent: rs,
                    constraint,
                });
            }
            Section::Classes | Section::Sets => {
                line.punct(":")?;
                let domain = line.universe(&doc)?.clone();
                line.punct("->")?;
                let codomain = line.universe(&doc)?.clone();
                line.punct("=")?;
                let members = line.ident_set("a member name")?;
                line.finish()?;
                for (m, col) in &members {
                    if section == Section::Classes {
                        let f = doc
                            .function(m)
                            .ok_or_else(|| line.err(*col, format!("unknown function {m:?}")))?;
                        if f.domain() != &domain || f.codomain() != &codomain {
                            return Err(line.err(*col, format!("function {m} is not from {} to {}", domain.name(), codomain.name())));
                        }
                    } else {
                        let c = doc
                            .constraint(m, &domain, &codomain)
                            .ok_or_else(|| line.err(*col, format!("unknown constraint {m:?}")))?
                            .map_err(|e| line.err(*col, e.to_string()))?;
                        if c.domain() != &domain || c.codomain() != &codomain {
                            return Err(line.err(*col, format!("constraint {m} is not from {} to {}", domain.name(), codomain.name())));
                        }
                    }
                }
                let members = members.into_iter().map(|(m, _)| m).collect();
                if section == Section::Classes {
                    doc.classes.push(NamedClass {
                        name,
                        domain,
                        codomain,
                        members,
                    });
                } else {
                    doc.sets.push(NamedSet {
                        name,
                        domain,
                        codomain,
                        members,
                    });
                }
            }
            Section::Bounds => {
                line.punct("=")?;
                let (value, col) = line.number("a non-negative integer")?;
                line.finish()?;
                if let Some(prev) = bound_keys.insert(name.clone(), no) {
                    return Err(line.err(name_col, format!("duplicate bound {name:?} (first set on line {prev})")));
                }
                let small = || usize::try_from(value).map_err(|_| line.err(col, "value too large"));
                let b = &mut doc.bounds;
                match name.as_str() {
                    "n_max" => b.bounds.n_max = small()?,
                    "m_max" => b.bounds.m_max = small()?,
                    "j_max" => b.bounds.j_max = small()?,
                    "v_max" => b.bounds.v_max = small()?,
                    "budget" => b.budget = value,
                    "seed" => b.seed = u64::try_from(value).map_err(|_| line.err(col, "seed too large"))?,
                    _ => return Err(line.err(name_col, format!("unknown bound {name:?}"))),
                }
            }
        }
    }
    if let Some(p) = pending.take() {
        finish_function(&mut doc, p)?;
    }
    doc.bounds.bounds.validate().map_err(|e| ParseError {
        line: bound_keys.values().min().copied().unwrap_or(1),
        column: 1,
        message: e.to_string(),
    })?;
    Ok(doc)
}

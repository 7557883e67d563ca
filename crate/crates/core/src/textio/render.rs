use std::fmt::Write as _;
use std::str::FromStr;

use super::lexer::{is_bare_query_constant, is_bare_token};
use super::Program;
use crate::model::{AnswerBag, Atom, Dependency, Fact, Instance, Term, Ucq};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BagFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for BagFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(BagFormat::Table),
            "csv" => Ok(BagFormat::Csv),
            "json" => Ok(BagFormat::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A constant as it appears in a fact: bare when it lexes as one token.
pub fn render_constant(name: &str) -> String {
    if is_bare_token(name) {
        name.to_string()
    } else {
        quote(name)
    }
}

fn fact_term(t: &Term) -> String {
    match t {
        Term::Const(c) => render_constant(c),
        Term::Null(id) => format!("_:n{id}"),
        Term::Var(v) => v.to_string(),
    }
}

fn query_term(t: &Term) -> String {
    match t {
        Term::Const(c) if is_bare_query_constant(c) => c.to_string(),
        Term::Const(c) => quote(c),
        Term::Null(id) => format!("_:n{id}"),
        Term::Var(v) => v.to_string(),
    }
}

fn atom_with(name: &str, args: &[Term], term: fn(&Term) -> String) -> String {
    let args: Vec<String> = args.iter().map(term).collect();
    format!("{name}({})", args.join(", "))
}

/// `R(a, _:n0)` without the trailing period.
pub fn render_fact(fact: &Fact) -> String {
    atom_with(fact.relation().name(), fact.args(), fact_term)
}

/// One `R(a, b).` line per fact, in insertion order.
pub fn render_facts(instance: &Instance) -> String {
    let mut out = String::new();
    for f in instance.iter() {
        let _ = writeln!(out, "{}.", render_fact(f));
    }
    out
}

fn render_dependency(dep: &Dependency) -> String {
    format!("{dep}.")
}

pub fn render_program(program: &Program) -> String {
    let mut out = String::new();
    for r in program.schema.iter() {
        let _ = writeln!(out, "rel {}/{}.", r.name(), r.arity());
    }
    out.push_str(&render_facts(&program.instance));
    for d in &program.dependencies {
        let _ = writeln!(out, "{}", render_dependency(d));
    }
    out
}

fn query_atom(a: &Atom) -> String {
    atom_with(a.relation.name(), &a.args, query_term)
}

/// The query in `.uq` syntax, terminated by a period and newline.
pub fn render_query(q: &Ucq) -> String {
    let head: Vec<&str> = q.head().iter().map(|v| &**v).collect();
    let body: Vec<String> = q
        .disjuncts()
        .iter()
        .map(|d| {
            d.atoms()
                .iter()
                .map(query_atom)
                .chain(
                    d.bindings()
                        .iter()
                        .map(|(v, t)| format!("{v} = {}", query_term(t))),
                )
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    format!(
        "{}({}) <- {}.\n",
        q.name(),
        head.join(", "),
        body.join(" | ")
    )
}

fn plain(t: &Term) -> String {
    match t {
        Term::Const(c) => c.to_string(),
        other => other.to_string(),
    }
}

/// Rows are in lexicographic tuple order.
pub fn render_bag(bag: &AnswerBag, format: BagFormat) -> String {
    let header: Vec<String> = (1..=bag.arity())
        .map(|i| format!("col{i}"))
        .chain(std::iter::once("multiplicity".to_string()))
        .collect();
    let rows: Vec<Vec<String>> = bag
        .iter()
        .map(|(t, m)| {
            t.iter()
                .map(plain)
                .chain(std::iter::once(m.to_string()))
                .collect()
        })
        .collect();
    match format {
        BagFormat::Table => {
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut out = String::new();
            for row in std::iter::once(&header).chain(rows.iter()) {
                let last = row.len() - 1;
                for (i, cell) in row.iter().enumerate() {
                    if i == last {
                        out.push_str(cell);
                    } else {
                        let pad = widths[i] - cell.chars().count() + 2;
                        out.push_str(cell);
                        out.extend(std::iter::repeat_n(' ', pad));
                    }
                }
                out.push('\n');
            }
            let _ = writeln!(out, "{}", bag.exactness());
            out
        }
        BagFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(&header).expect("write to memory");
            for row in &rows {
                w.write_record(row).expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
        }
        BagFormat::Json => {
            let exact = bag.exactness().is_exact();
            let mut out = String::new();
            for (t, m) in bag.iter() {
                let tuple: Vec<String> = t.iter().map(plain).collect();
                let _ = writeln!(
                    out,
                    "{{\"tuple\":{},\"multiplicity\":{m},\"exact\":{exact}}}",
                    serde_json::to_string(&tuple).expect("strings serialize"),
                );
            }
            out
        }
    }
}

use std::sync::Arc;

use super::lexer::{tokenize, Pos, Spanned, Tok};
use super::{Program, SourceError};
use crate::model::{Atom, Dependency, Disjunct, Fact, Instance, Name, Relation, Schema, Term, Ucq};

#[derive(Clone, Debug)]
enum RawArg {
    /// Bare identifier starting with a letter or underscore.
    Word(String),
    /// Numeric literal or identifier starting with a digit.
    Num(String),
    Quoted(String),
}

#[derive(Clone, Debug)]
struct RawArgAt {
    arg: RawArg,
    pos: Pos,
}

#[derive(Clone, Debug)]
struct RawAtom {
    name: String,
    pos: Pos,
    args: Vec<RawArgAt>,
}

enum Decl {
    Rel {
        name: String,
        arity: usize,
        pos: Pos,
    },
    Fact(RawAtom),
    Dep {
        body: RawAtom,
        existentials: Vec<(String, Pos)>,
        head: RawAtom,
    },
}

struct Cursor {
    toks: Vec<Spanned>,
    at: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Self, SourceError> {
        Ok(Cursor {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, SourceError> {
        if *self.peek() == want {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(&want.describe()))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.next();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> SourceError {
        self.pos().error(format!(
            "expected {wanted}, found {}",
            self.peek().describe()
        ))
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), SourceError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                let pos = self.next().pos;
                Ok((w, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn arg(&mut self) -> Result<RawArgAt, SourceError> {
        let t = self.next();
        let arg = match t.tok {
            Tok::Word(w) => RawArg::Word(w),
            Tok::NumWord(w) => RawArg::Num(w),
            Tok::Str(s) => {
                if s.starts_with("_:") {
                    return Err(t.pos.error("labeled nulls (`_:`) cannot appear in input"));
                }
                RawArg::Quoted(s)
            }
            other => {
                return Err(t
                    .pos
                    .error(format!("expected a term, found {}", other.describe())))
            }
        };
        Ok(RawArgAt { arg, pos: t.pos })
    }

    fn atom(&mut self) -> Result<RawAtom, SourceError> {
        let (name, pos) = self.name("a relation name")?;
        self.expect(Tok::LParen)?;
        let mut args = vec![self.arg()?];
        while self.eat(&Tok::Comma) {
            args.push(self.arg()?);
        }
        self.expect(Tok::RParen)?;
        Ok(RawAtom { name, pos, args })
    }
}

fn resolve_relation(schema: &Schema, atom: &RawAtom) -> Result<Relation, SourceError> {
    let rel = schema
        .get(&atom.name)
        .ok_or_else(|| atom.pos.error(format!("unknown relation `{}`", atom.name)))?;
    if rel.arity() != atom.args.len() {
        return Err(atom.pos.error(format!(
            "arity mismatch for `{}`: declared {}, used with {}",
            atom.name,
            rel.arity(),
            atom.args.len()
        )));
    }
    Ok(rel.clone())
}

fn constant(arg: &RawArgAt) -> Term {
    match &arg.arg {
        RawArg::Word(s) | RawArg::Num(s) | RawArg::Quoted(s) => Term::constant(s),
    }
}

/// Parses an `.idb` program: relation declarations, facts and dependencies,
/// in any order.
pub fn parse_program(text: &str) -> Result<Program, SourceError> {
    let mut cur = Cursor::new(text)?;
    let mut decls = Vec::new();
    while *cur.peek() != Tok::Eof {
        if matches!(cur.peek(), Tok::Word(w) if w == "rel")
            && matches!(cur.peek_at(1), Tok::Word(_))
        {
            cur.next();
            let (name, pos) = cur.name("a relation name")?;
            cur.expect(Tok::Slash)?;
            let arity_pos = cur.pos();
            let arity = match cur.next().tok {
                Tok::NumWord(n) => n.parse::<usize>().ok(),
                _ => None,
            }
            .filter(|&a| a >= 1)
            .ok_or_else(|| arity_pos.error("expected a positive integer arity"))?;
            cur.expect(Tok::Dot)?;
            decls.push(Decl::Rel { name, arity, pos });
            continue;
        }
        let atom = cur.atom()?;
        if cur.eat(&Tok::Arrow) {
            let mut existentials = Vec::new();
            if matches!(cur.peek(), Tok::Word(w) if w == "exists")
                && !matches!(cur.peek_at(1), Tok::LParen)
            {
                cur.next();
                existentials.push(cur.name("an existential variable")?);
                while cur.eat(&Tok::Comma) {
                    existentials.push(cur.name("an existential variable")?);
                }
                cur.expect(Tok::Colon)?;
            }
            let head = cur.atom()?;
            cur.expect(Tok::Dot)?;
            decls.push(Decl::Dep {
                body: atom,
                existentials,
                head,
            });
        } else {
            cur.expect(Tok::Dot)?;
            decls.push(Decl::Fact(atom));
        }
    }

    let mut schema = Schema::new();
    for d in &decls {
        if let Decl::Rel { name, arity, pos } = d {
            schema
                .add(Relation::new(name, *arity))
                .map_err(|e| pos.error(e.to_string()))?;
        }
    }
    let schema = Arc::new(schema);
    let mut instance = Instance::new(schema.clone());
    let mut dependencies = Vec::new();
    for d in &decls {
        match d {
            Decl::Rel { .. } => {}
            Decl::Fact(atom) => {
                let rel = resolve_relation(&schema, atom)?;
                let fact = Fact::new(rel, atom.args.iter().map(constant).collect())
                    .map_err(|e| atom.pos.error(e.to_string()))?;
                instance
                    .insert(fact)
                    .map_err(|e| atom.pos.error(e.to_string()))?;
            }
            Decl::Dep {
                body,
                existentials,
                head,
            } => dependencies.push(dependency(&schema, body, existentials, head)?),
        }
    }
    Ok(Program {
        schema,
        instance,
        dependencies,
    })
}

fn dependency(
    schema: &Schema,
    body: &RawAtom,
    existentials: &[(String, Pos)],
    head: &RawAtom,
) -> Result<Dependency, SourceError> {
    let from = resolve_relation(schema, body)?;
    let to = resolve_relation(schema, head)?;
    let unsupported =
        |pos: Pos, why: &str| pos.error(format!("unsupported dependency form: {why}"));

    let mut vars: Vec<&str> = Vec::new();
    for a in &body.args {
        match &a.arg {
            RawArg::Word(w) if !vars.contains(&w.as_str()) => vars.push(w),
            RawArg::Word(_) => return Err(unsupported(a.pos, "repeated variable in the body")),
            _ => {
                return Err(unsupported(
                    a.pos,
                    "constants are not allowed in dependencies",
                ))
            }
        }
    }
    let mut exist: Vec<&str> = Vec::new();
    for (e, pos) in existentials {
        if vars.contains(&e.as_str()) || exist.contains(&e.as_str()) {
            return Err(unsupported(
                *pos,
                "existential variable clashes with another variable",
            ));
        }
        exist.push(e);
    }
    let expected: Vec<&str> = vars.iter().chain(exist.iter()).copied().collect();
    for a in &head.args {
        if !matches!(a.arg, RawArg::Word(_)) {
            return Err(unsupported(
                a.pos,
                "constants are not allowed in dependencies",
            ));
        }
    }
    let actual: Vec<&str> = head
        .args
        .iter()
        .map(|a| match &a.arg {
            RawArg::Word(w) => w.as_str(),
            _ => unreachable!(),
        })
        .collect();
    if actual != expected {
        return Err(unsupported(
            head.pos,
            "the head must repeat the body variables in order, followed by the existential variables",
        ));
    }
    let dep = if exist.is_empty() {
        Dependency::inclusion(from, to)
    } else {
        Dependency::tgd(from, to)
    };
    dep.map_err(|e| head.pos.error(e.to_string()))
}

/// Parses a `.uq` query against `schema`. Bare identifiers starting with a
/// letter or underscore are variables; quoted strings and tokens starting
/// with a digit or minus sign are constants.
pub fn parse_query(text: &str, schema: &Schema) -> Result<Ucq, SourceError> {
    let mut cur = Cursor::new(text)?;
    let (name, _) = cur.name("a query name")?;
    cur.expect(Tok::LParen)?;
    let mut head: Vec<(String, Pos)> = Vec::new();
    if *cur.peek() != Tok::RParen {
        head.push(cur.name("a head variable")?);
        while cur.eat(&Tok::Comma) {
            head.push(cur.name("a head variable")?);
        }
    }
    cur.expect(Tok::RParen)?;
    cur.expect(Tok::LArrow)?;

    let mut disjuncts = Vec::new();
    loop {
        let start = cur.pos();
        let mut atoms = Vec::new();
        let mut bindings = Vec::new();
        loop {
            if *cur.peek_at(1) == Tok::Eq {
                let (v, _) = cur.name("a variable")?;
                cur.expect(Tok::Eq)?;
                let rhs = cur.arg()?;
                let t = match &rhs.arg {
                    RawArg::Word(w) => Term::var(w),
                    _ => constant(&rhs),
                };
                bindings.push((Name::from(v.as_str()), t));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
                continue;
            }
            let raw = cur.atom()?;
            let rel = resolve_relation(schema, &raw)?;
            let args = raw
                .args
                .iter()
                .map(|a| match &a.arg {
                    RawArg::Word(w) => Term::var(w),
                    _ => constant(a),
                })
                .collect();
            atoms.push(Atom::new(rel, args).map_err(|e| raw.pos.error(e.to_string()))?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        let disjunct =
            Disjunct::with_bindings(atoms, bindings).map_err(|e| start.error(e.to_string()))?;
        for (v, pos) in &head {
            if !disjunct.mentions(v) {
                return Err(pos.error(format!(
                    "unsafe query: head variable `{v}` does not occur in disjunct {}",
                    disjuncts.len() + 1
                )));
            }
        }
        if let Some((v, _)) = disjunct
            .bindings()
            .iter()
            .find(|(v, _)| !head.iter().any(|(h, _)| **h == **v))
        {
            return Err(start.error(format!("bad binding: `{v}` is not a head variable")));
        }
        disjuncts.push(disjunct);
        if !cur.eat(&Tok::Pipe) {
            break;
        }
    }
    cur.expect(Tok::Dot)?;
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("end of input"));
    }
    let head_names = head.iter().map(|(v, _)| Name::from(v.as_str())).collect();
    Ucq::new(name, head_names, disjuncts)
        .map_err(|e| Pos { line: 1, column: 1 }.error(e.to_string()))
}

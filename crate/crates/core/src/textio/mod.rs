//! Parsers and printers for `.idb` programs, `.uq` queries, chase instances
//! and answer bags.
//!
//! ```text
//! # program.idb
//! rel Emp/1.  rel WorksIn/2.
//! Emp(ann).
//! Emp(x) -> exists d: WorksIn(x, d).
//!
//! # query.uq
//! q(x) <- WorksIn(x, d) | Emp(x).
//! ```
//!
//! In queries and dependencies bare words are variables; quoted strings and
//! numbers are constants. A query disjunct may end with bindings such as
//! `y = "c"` or `y = x` for head variables that occur in none of its atoms.

mod lexer;
mod parser;
mod render;

use std::fmt;
use std::sync::Arc;

pub use parser::{parse_program, parse_query};
pub use render::{
    render_bag, render_constant, render_fact, render_facts, render_program, render_query, BagFormat,
};

use crate::model::{Dependency, Instance, Schema};

/// An incomplete database: schema, ground facts and dependencies in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub schema: Arc<Schema>,
    pub instance: Instance,
    pub dependencies: Vec<Dependency>,
}

impl Program {
    /// Same schema and facts, no dependencies.
    pub fn without_dependencies(&self) -> Program {
        Program {
            schema: self.schema.clone(),
            instance: self.instance.clone(),
            dependencies: Vec::new(),
        }
    }
}

/// A parse or validation failure, located in the source text.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct SourceError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnswerBag, Exactness, Term};

    #[test]
    fn program_with_one_inclusion_dependency() {
        let p = parse_program("rel R/1. rel S/1. R(a). R(x) -> S(x).").unwrap();
        assert_eq!(p.instance.len(), 1);
        assert_eq!(p.dependencies.len(), 1);
        assert!(!p.dependencies[0].is_tgd());
    }

    #[test]
    fn program_with_one_tgd() {
        let p = parse_program("rel R/1. rel S/2. R(x) -> exists y: S(x,y).").unwrap();
        assert_eq!(p.dependencies.len(), 1);
        assert_eq!(p.dependencies[0].n_existential(), 1);
    }

    #[test]
    fn projection_is_an_unsupported_dependency() {
        let e = parse_program("rel R/2. rel S/1. R(x,y) -> S(x).").unwrap_err();
        assert!(e.message.contains("unsupported dependency form"), "{e}");
    }

    #[test]
    fn other_dependency_shapes_are_rejected() {
        for src in [
            "rel R/2. rel S/2. R(x,y) -> S(y,x).",
            "rel R/2. rel S/2. R(x,x) -> S(x,x).",
            "rel R/1. rel S/1. R(\"a\") -> S(\"a\").",
            "rel R/1. rel S/2. R(x) -> exists y: S(y,x).",
            "rel R/1. rel S/2. R(x) -> exists x: S(x,x).",
            "rel R/1. rel S/1. R(x) -> exists y: S(x).",
            "rel R/1. rel S/1. R(x) -> S(\"c\").",
        ] {
            let e = parse_program(src).unwrap_err();
            assert!(
                e.message.contains("unsupported dependency form"),
                "{src}: {e}"
            );
        }
    }

    #[test]
    fn unknown_relation_and_arity_errors_are_located() {
        let e = parse_program("rel R/1.\nS(a).").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.message.contains("unknown relation"));
        let e = parse_program("rel R/1.\n  R(a, b).").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(e.message.contains("arity mismatch"));
    }

    #[test]
    fn null_prefix_in_input_is_rejected() {
        assert!(parse_program("rel R/1. R(_:n0).").is_err());
        assert!(parse_program("rel R/1. R(\"_:n0\").").is_err());
    }

    #[test]
    fn query_bindings_round_trip() {
        let p = parse_program("rel R/2.").unwrap();
        let q = parse_query(r#"q(x, y) <- R(x, z), y = "a" | R(x, y)."#, &p.schema).unwrap();
        assert_eq!(q.disjuncts()[0].bindings().len(), 1);
        let text = render_query(&q);
        assert_eq!(text, "q(x, y) <- R(x, z), y = \"a\" | R(x, y).\n");
        assert_eq!(parse_query(&text, &p.schema).unwrap(), q);
    }

    #[test]
    fn bindings_must_fix_head_variables_outside_the_atoms() {
        let p = parse_program("rel R/2.").unwrap();
        for src in [
            "q(x) <- R(x, y), x = \"a\".",
            "q(x) <- R(x, x), z = x.",
            "q(x, y) <- R(x, x), y = w.",
        ] {
            let e = parse_query(src, &p.schema).unwrap_err();
            assert!(e.message.contains("bad binding"), "{src}: {e}");
        }
    }

    #[test]
    fn declarations_may_follow_use() {
        let p = parse_program("R(a). rel R/1.").unwrap();
        assert_eq!(p.instance.len(), 1);
    }

    #[test]
    fn duplicate_and_zero_arity_declarations_fail() {
        assert!(parse_program("rel R/1. rel R/2.").is_err());
        assert!(parse_program("rel R/0.").is_err());
    }

    #[test]
    fn numeric_and_quoted_constants() {
        let p = parse_program("rel S/2. S(a, 2). S(\"hello world\", -1.5).").unwrap();
        let args: Vec<&Term> = p.instance.iter().flat_map(|f| f.args()).collect();
        assert_eq!(args[1], &Term::constant("2"));
        assert_eq!(args[2], &Term::constant("hello world"));
        assert_eq!(args[3], &Term::constant("-1.5"));
    }

    fn schema_rt() -> Arc<Schema> {
        parse_program("rel R/2. rel T/1.").unwrap().schema
    }

    #[test]
    fn query_with_two_disjuncts() {
        let q = parse_query("q(x) <- R(x,y) | T(x).", &schema_rt()).unwrap();
        assert_eq!(q.disjuncts().len(), 2);
        assert_eq!(q.arity(), 1);
    }

    #[test]
    fn boolean_query() {
        let q = parse_query("q() <- R(a,b).", &schema_rt()).unwrap();
        assert!(q.is_boolean());
    }

    #[test]
    fn unsafe_head_is_rejected() {
        let e = parse_query("q(x) <- R(y,y).", &schema_rt()).unwrap_err();
        assert!(e.message.contains("head variable `x`"), "{e}");
        assert_eq!((e.line, e.column), (1, 3));
    }

    #[test]
    fn query_constants_are_quoted_or_numeric() {
        let q = parse_query("q(x) <- R(x, \"b\") | R(x, 7).", &schema_rt()).unwrap();
        assert_eq!(q.disjuncts()[0].atoms()[0].args[1], Term::constant("b"));
        assert_eq!(q.disjuncts()[1].atoms()[0].args[1], Term::constant("7"));
        assert_eq!(q.disjuncts()[0].atoms()[0].args[0], Term::var("x"));
    }

    #[test]
    fn query_errors() {
        let s = schema_rt();
        assert!(parse_query("q(x) <- U(x).", &s)
            .unwrap_err()
            .message
            .contains("unknown relation"));
        assert!(parse_query("q(x) <- R(x).", &s)
            .unwrap_err()
            .message
            .contains("arity mismatch"));
        assert!(parse_query("q(x) <- T(x). extra", &s).is_err());
        assert!(parse_query("q(\"a\") <- T(a).", &s).is_err());
    }

    #[test]
    fn csv_bag() {
        let mut bag = AnswerBag::new(1, Exactness::Exact);
        bag.add(vec![Term::constant("a")], 2u8.into()).unwrap();
        bag.add_one(vec![Term::constant("b")]).unwrap();
        assert_eq!(
            render_bag(&bag, BagFormat::Csv),
            "col1,multiplicity\na,2\nb,1\n"
        );
    }

    #[test]
    fn empty_table_bag_has_header_and_footer_only() {
        let bag = AnswerBag::new(1, Exactness::Exact);
        assert_eq!(
            render_bag(&bag, BagFormat::Table),
            "col1  multiplicity\nexact\n"
        );
        let lower = AnswerBag::new(0, Exactness::LowerBoundAtLevel(5));
        assert_eq!(
            render_bag(&lower, BagFormat::Table),
            "multiplicity\nlower bound at level 5\n"
        );
    }

    #[test]
    fn boolean_json_bag() {
        let mut bag = AnswerBag::new(0, Exactness::Exact);
        bag.add(vec![], 3u8.into()).unwrap();
        assert_eq!(
            render_bag(&bag, BagFormat::Json),
            "{\"tuple\":[],\"multiplicity\":3,\"exact\":true}\n"
        );
    }

    #[test]
    fn table_rows_are_aligned_and_sorted() {
        let mut bag = AnswerBag::new(2, Exactness::LowerBoundAtLevel(3));
        bag.add_one(vec![Term::constant("bob"), Term::constant("x")])
            .unwrap();
        bag.add(vec![Term::constant("al"), Term::constant("y")], 12u8.into())
            .unwrap();
        assert_eq!(
            render_bag(&bag, BagFormat::Table),
            "col1  col2  multiplicity\nal    y     12\nbob   x     1\nlower bound at level 3\n"
        );
    }

    #[test]
    fn csv_quotes_awkward_constants() {
        let mut bag = AnswerBag::new(1, Exactness::Exact);
        bag.add_one(vec![Term::constant("a,b")]).unwrap();
        assert_eq!(
            render_bag(&bag, BagFormat::Csv),
            "col1,multiplicity\n\"a,b\",1\n"
        );
    }
}

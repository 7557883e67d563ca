//! Bag-set certain answers of unions of conjunctive queries over incomplete
//! databases.
//!
//! An incomplete database is a set of ground facts together with inclusion
//! dependencies and prefix tuple-generating dependencies. Certain answers
//! are computed either by evaluating the query over the chase ([`chase`],
//! [`eval`]) or by compiling the dependencies into the query first
//! ([`rewrite`]).
//!
//! ```
//! use chasebag::{chase::ChaseConfig, eval::{evaluate_certain_bag, EvalMode}};
//! use chasebag::textio::{parse_program, parse_query, render_bag, BagFormat};
//!
//! let program = parse_program("rel T/1. rel P/1. T(a). T(x) -> P(x).").unwrap();
//! let q = parse_query("q(x) <- P(x).", &program.schema).unwrap();
//! let bag = evaluate_certain_bag(&q, &program, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
//! assert_eq!(render_bag(&bag, BagFormat::Csv), "col1,multiplicity\na,1\n");
//! ```

pub mod aggregate;
pub mod chase;
pub mod cli;
pub mod eval;
pub mod model;
pub mod oracle;
pub mod rewrite;
pub mod textio;

pub use model::{AnswerBag, Atom, Dependency, Exactness, Fact, Instance, Term, Ucq};
pub use textio::Program;

//! Slow reference implementations for differential testing.
//!
//! Nothing here uses the join or counting code of [`crate::eval`]: answers
//! are found by enumerating every grounding over the active domain, and
//! derivations by iterative deepening over the dependencies.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::chase::{run_chase, ChaseConfig, ChaseError, ChaseResult};
use crate::eval::EvalMode;
use crate::model::{
    AnswerBag, Disjunct, Exactness, Fact, Grounding, Instance, ModelError, Name, Term, Tuple, Ucq,
};
use crate::textio::Program;

pub const MAX_VARIABLES: usize = 8;
pub const MAX_DOMAIN: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle scale exceeded: {variables} variables over {domain} values (limits {MAX_VARIABLES} and {MAX_DOMAIN})")]
    ScaleExceeded { variables: usize, domain: usize },
    #[error("cannot compare bags of arity {0} and {1}")]
    ArityMismatch(usize, usize),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub tuple: Tuple,
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub context: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple: Vec<String> = self.tuple.iter().map(Term::to_string).collect();
        write!(
            f,
            "{}: ({}) {} vs {}",
            self.context,
            tuple.join(", "),
            self.lhs,
            self.rhs
        )
    }
}

/// Every tuple whose multiplicities differ, in tuple order.
pub fn diff_bags(
    lhs: &AnswerBag,
    rhs: &AnswerBag,
    context: &str,
) -> Result<Vec<Divergence>, OracleError> {
    if lhs.arity() != rhs.arity() {
        return Err(OracleError::ArityMismatch(lhs.arity(), rhs.arity()));
    }
    let keys: BTreeSet<&Tuple> = lhs.keys().chain(rhs.keys()).collect();
    Ok(keys
        .into_iter()
        .filter_map(|t| {
            let (l, r) = (lhs.multiplicity(t), rhs.multiplicity(t));
            (l != r).then(|| Divergence {
                tuple: t.clone(),
                lhs: l,
                rhs: r,
                context: context.to_string(),
            })
        })
        .collect())
}

/// Calls `visit` with every total assignment of `vars` into `domain`.
fn for_each_assignment(vars: &[Name], domain: &[Term], visit: &mut dyn FnMut(&Grounding)) {
    let n = vars.len();
    if n > 0 && domain.is_empty() {
        return;
    }
    let mut counter = vec![0usize; n];
    loop {
        let g: Grounding = vars
            .iter()
            .cloned()
            .zip(counter.iter().map(|&i| domain[i].clone()))
            .collect();
        visit(&g);
        // odometer increment
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            counter[k] += 1;
            if counter[k] < domain.len() {
                break;
            }
            counter[k] = 0;
        }
    }
}

fn holds(d: &Disjunct, g: &Grounding, facts: &Instance) -> bool {
    let value = |t: &Term| match t {
        Term::Var(v) => g.get(v).expect("total grounding").clone(),
        other => other.clone(),
    };
    if d.bindings()
        .iter()
        .any(|(v, t)| g.get(v) != Some(&value(t)))
    {
        return false;
    }
    d.atoms().iter().all(|a| {
        let args: Vec<Term> = a.args.iter().map(value).collect();
        Fact::new(a.relation.clone(), args).is_ok_and(|f| facts.contains(&f))
    })
}

/// Groundings of `d`'s variables into `adom(facts)` that make every atom a
/// fact, found by full enumeration.
pub fn brute_force_groundings(d: &Disjunct, facts: &Instance) -> BTreeSet<Grounding> {
    let domain: Vec<Term> = facts.adom().into_iter().collect();
    let mut out = BTreeSet::new();
    for_each_assignment(&d.variables(), &domain, &mut |g| {
        if holds(d, g, facts) {
            out.insert(g.clone());
        }
    });
    out
}

/// Certain answers by enumeration over a capped chase.
pub fn brute_force_certain_bag(
    q: &Ucq,
    program: &Program,
    config: &ChaseConfig,
    mode: EvalMode,
) -> Result<AnswerBag, OracleError> {
    let chase = run_chase(program, config)?;
    brute_force_over_chase(q, program, &chase, mode)
}

pub fn brute_force_over_chase(
    q: &Ucq,
    program: &Program,
    chase: &ChaseResult,
    mode: EvalMode,
) -> Result<AnswerBag, OracleError> {
    let domain: Vec<Term> = chase.instance.adom().into_iter().collect();
    let vars = q.variables();
    if vars.len() > MAX_VARIABLES || domain.len() > MAX_DOMAIN {
        return Err(OracleError::ScaleExceeded {
            variables: vars.len(),
            domain: domain.len(),
        });
    }
    let input_domain = program.instance.adom();
    let exactness = if chase.terminated {
        Exactness::Exact
    } else {
        Exactness::LowerBoundAtLevel(chase.levels_run)
    };
    let mut bag = AnswerBag::new(q.arity(), exactness);
    let mut result = Ok(());
    let mut count = |g: &Grounding, bag: &mut AnswerBag| {
        let tuple: Vec<Term> = q
            .head()
            .iter()
            .map(|h| g.get(h).expect("head bound").clone())
            .collect();
        if tuple
            .iter()
            .all(|t| t.is_const() && input_domain.contains(t))
        {
            if let Err(e) = bag.add_one(tuple) {
                result = Err(e);
            }
        }
    };
    match mode {
        EvalMode::PerDisjunct => {
            for d in q.disjuncts() {
                for_each_assignment(&d.variables(), &domain, &mut |g| {
                    if holds(d, g, &chase.instance) {
                        count(g, &mut bag);
                    }
                });
            }
        }
        EvalMode::WholeQuery => {
            for_each_assignment(&vars, &domain, &mut |g| {
                if q.disjuncts().iter().any(|d| holds(d, g, &chase.instance)) {
                    count(g, &mut bag);
                }
            });
        }
    }
    result?;
    debug_assert!(bag.iter().all(|(_, m)| !m.is_zero()));
    Ok(bag)
}

/// Looks for a sequence of facts ending in `fact` where each element is an
/// input fact or follows from an earlier one by a single dependency, using
/// at most `depth` dependency applications.
///
/// A tuple-generating step may introduce only labeled nulls, pairwise
/// distinct and absent from the premise.
pub fn derivation_search(program: &Program, fact: &Fact, depth: usize) -> Option<Vec<Fact>> {
    (0..=depth).find_map(|limit| search(program, fact, limit, &mut Vec::new()))
}

fn search(
    program: &Program,
    fact: &Fact,
    limit: usize,
    goals: &mut Vec<Fact>,
) -> Option<Vec<Fact>> {
    if program.instance.contains(fact) {
        return Some(vec![fact.clone()]);
    }
    // a derivation never needs to revisit an open goal
    if limit == 0 || goals.contains(fact) {
        return None;
    }
    for dep in &program.dependencies {
        if dep.to() != fact.relation() {
            continue;
        }
        let k = dep.from().arity();
        let (prefix, tail) = fact.args().split_at(k);
        if dep.is_tgd() {
            let mut seen = BTreeSet::new();
            let fresh = tail
                .iter()
                .all(|t| t.is_null() && !prefix.contains(t) && seen.insert(t));
            if !fresh {
                continue;
            }
        }
        let Ok(premise) = Fact::new(dep.from().clone(), prefix.to_vec()) else {
            continue;
        };
        goals.push(fact.clone());
        let found = search(program, &premise, limit - 1, goals);
        goals.pop();
        if let Some(mut path) = found {
            path.push(fact.clone());
            return Some(path);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Relation;
    use crate::textio::{parse_program, parse_query};

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    fn bag(rows: &[(&str, u32)]) -> AnswerBag {
        let mut b = AnswerBag::new(1, Exactness::Exact);
        for (t, m) in rows {
            b.add(vec![c(t)], (*m).into()).unwrap();
        }
        b
    }

    #[test]
    fn diff_examples() {
        assert!(diff_bags(&bag(&[("a", 1)]), &bag(&[("a", 1)]), "x")
            .unwrap()
            .is_empty());
        let d = diff_bags(&bag(&[("a", 2)]), &bag(&[("a", 1)]), "x").unwrap();
        assert_eq!(
            (d[0].lhs.clone(), d[0].rhs.clone()),
            (2u8.into(), 1u8.into())
        );
        let d = diff_bags(&bag(&[]), &bag(&[("b", 1)]), "x").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].tuple, vec![c("b")]);
        assert!(d[0].lhs.is_zero());
        assert!(diff_bags(&bag(&[]), &AnswerBag::new(2, Exactness::Exact), "x").is_err());
    }

    fn certain(program: &str, query: &str) -> AnswerBag {
        let p = parse_program(program).unwrap();
        let q = parse_query(query, &p.schema).unwrap();
        brute_force_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap()
    }

    #[test]
    fn plain_projection() {
        assert_eq!(
            certain("rel R/2. R(a,b).", "q(x) <- R(x,y)."),
            bag(&[("a", 1)])
        );
    }

    #[test]
    fn two_sources_one_answer() {
        let b = certain(
            "rel T/1. rel U/1. rel P/1. T(a). U(a). T(x) -> P(x). U(x) -> P(x).",
            "q(x) <- P(x).",
        );
        assert_eq!(b, bag(&[("a", 1)]));
    }

    #[test]
    fn whole_query_scope() {
        let p = parse_program("rel R/1. rel S/1. R(a). S(b).").unwrap();
        let q = parse_query("q(x) <- R(x) | R(x), S(y).", &p.schema).unwrap();
        let b =
            brute_force_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::WholeQuery).unwrap();
        assert_eq!(b, bag(&[("a", 2)]));
    }

    #[test]
    fn guard() {
        let p = parse_program(
            "rel R/1. R(a). R(b). R(c). R(d). R(e). R(f). R(g). R(h). R(i). R(j). R(k).",
        )
        .unwrap();
        let q = parse_query("q(x) <- R(x).", &p.schema).unwrap();
        let e = brute_force_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct)
            .unwrap_err();
        assert!(e.to_string().starts_with("oracle scale exceeded"));
    }

    fn chain() -> Program {
        parse_program("rel R/1. rel S/1. rel T/1. R(a). R(x) -> S(x). S(x) -> T(x).").unwrap()
    }

    fn fact(rel: &str, args: Vec<Term>) -> Fact {
        Fact::new(Relation::new(rel, args.len()), args).unwrap()
    }

    #[test]
    fn two_step_derivation() {
        let p = chain();
        let path = derivation_search(&p, &fact("T", vec![c("a")]), 5).unwrap();
        let shown: Vec<String> = path.iter().map(Fact::to_string).collect();
        assert_eq!(shown, ["R(a)", "S(a)", "T(a)"]);
        assert!(derivation_search(&p, &fact("T", vec![c("a")]), 1).is_none());
    }

    #[test]
    fn input_fact_is_its_own_derivation() {
        let f = fact("R", vec![c("a")]);
        assert_eq!(derivation_search(&chain(), &f, 0), Some(vec![f]));
    }

    #[test]
    fn underivable_fact() {
        assert_eq!(
            derivation_search(&chain(), &fact("T", vec![c("b")]), 10),
            None
        );
    }

    #[test]
    fn tgd_steps_need_fresh_nulls() {
        let p = parse_program("rel P/1. rel R/3. P(a). P(x) -> exists y, z: R(x,y,z).").unwrap();
        assert!(derivation_search(
            &p,
            &fact("R", vec![c("a"), Term::Null(0), Term::Null(1)]),
            1
        )
        .is_some());
        assert!(derivation_search(
            &p,
            &fact("R", vec![c("a"), Term::Null(0), Term::Null(0)]),
            1
        )
        .is_none());
        assert!(
            derivation_search(&p, &fact("R", vec![c("a"), c("b"), Term::Null(0)]), 1).is_none()
        );
    }

    #[test]
    fn enumeration_finds_groundings() {
        let p = parse_program("rel R/2. R(a,b). R(b,b).").unwrap();
        let q = parse_query("q() <- R(x,y), R(y,y).", &p.schema).unwrap();
        assert_eq!(
            brute_force_groundings(&q.disjuncts()[0], &p.instance).len(),
            2
        );
    }
}

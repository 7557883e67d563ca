//! Bag-set evaluation of UCQs.
//!
//! The multiplicity of an answer tuple is the number of satisfying groundings
//! that produce it. Two grounding scopes are supported for multi-disjunct
//! queries:
//!
//! * [`EvalMode::PerDisjunct`]: each disjunct's groundings range over that
//!   disjunct's own variables and counts are summed (`UNION ALL`).
//! * [`EvalMode::WholeQuery`]: a grounding assigns every variable of the
//!   query and counts once if any disjunct holds under it. Variables that a
//!   satisfied disjunct does not mention range over the whole active domain.
//!
//! The two coincide for single-disjunct queries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use thiserror::Error;

use crate::chase::{run_chase, ChaseConfig, ChaseError, ChaseResult};
use crate::model::{
    AnswerBag, Atom, Disjunct, Exactness, Grounding, Instance, ModelError, Name, Term, Ucq,
};
use crate::textio::Program;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EvalMode {
    #[default]
    PerDisjunct,
    WholeQuery,
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-disjunct" => Ok(EvalMode::PerDisjunct),
            "whole-query" => Ok(EvalMode::WholeQuery),
            other => Err(format!("unknown grounding scope `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("query does not match the schema: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn check_schema(q: &Ucq, inst: &Instance) -> Result<(), EvalError> {
    for rel in q.disjuncts().iter().flat_map(Disjunct::relations) {
        if !inst.schema().contains(rel) {
            return Err(EvalError::SchemaMismatch(format!(
                "relation {rel} is not declared"
            )));
        }
    }
    Ok(())
}

fn bound_positions(atom: &Atom, binding: &HashMap<Name, Term>) -> usize {
    atom.args
        .iter()
        .filter(|t| match t {
            Term::Var(v) => binding.contains_key(v),
            _ => true,
        })
        .count()
}

fn join(
    atoms: &[Atom],
    remaining: &mut Vec<usize>,
    inst: &Instance,
    binding: &mut HashMap<Name, Term>,
    out: &mut BTreeSet<Grounding>,
) {
    if remaining.is_empty() {
        out.insert(
            binding
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        );
        return;
    }
    // most-bound-first; ties go to the earlier atom
    let (slot, _) = remaining
        .iter()
        .enumerate()
        .max_by_key(|&(slot, &ai)| {
            (
                bound_positions(&atoms[ai], binding),
                std::cmp::Reverse(slot),
            )
        })
        .expect("nonempty");
    let ai = remaining.swap_remove(slot);
    let atom = &atoms[ai];
    for fact in inst.facts_of(atom.relation.name()) {
        let mut newly = Vec::new();
        let mut ok = true;
        for (t, value) in atom.args.iter().zip(fact.args()) {
            match t {
                Term::Var(v) => match binding.get(v) {
                    Some(b) if b != value => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding.insert(v.clone(), value.clone());
                        newly.push(v.clone());
                    }
                },
                other => {
                    if other != value {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            join(atoms, remaining, inst, binding, out);
        }
        for v in newly {
            binding.remove(&v);
        }
    }
    remaining.push(ai);
    let last = remaining.len() - 1;
    remaining.swap(slot, last);
}

/// All groundings of the disjunct's variables under which every atom is a
/// fact of `inst`. Bound variables take the value their binding names.
pub fn satisfying_groundings(d: &Disjunct, inst: &Instance) -> BTreeSet<Grounding> {
    let mut out = BTreeSet::new();
    let mut remaining: Vec<usize> = (0..d.atoms().len()).collect();
    join(
        d.atoms(),
        &mut remaining,
        inst,
        &mut HashMap::new(),
        &mut out,
    );
    if d.bindings().is_empty() {
        return out;
    }
    let adom = inst.adom();
    out.into_iter()
        .filter_map(|g| {
            let mut extra = Vec::new();
            for (v, t) in d.bindings() {
                let value = match t {
                    Term::Var(w) => g.get(w).expect("bound to an atom variable").clone(),
                    other => other.clone(),
                };
                if !adom.contains(&value) {
                    return None;
                }
                extra.push((v.clone(), value));
            }
            Some(
                g.iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .chain(extra)
                    .collect(),
            )
        })
        .collect()
}

/// A set of rows over named columns.
pub(crate) struct Family<V> {
    pub vars: Vec<Name>,
    pub rows: BTreeSet<Vec<V>>,
}

fn natural_join<V: Clone + Ord + Hash>(a: &Family<V>, b: &Family<V>) -> Family<V> {
    let shared: Vec<(usize, usize)> = a
        .vars
        .iter()
        .enumerate()
        .filter_map(|(i, v)| b.vars.iter().position(|w| w == v).map(|j| (i, j)))
        .collect();
    let extra: Vec<usize> = (0..b.vars.len())
        .filter(|j| !shared.iter().any(|&(_, sj)| sj == *j))
        .collect();
    let mut index: HashMap<Vec<V>, Vec<&Vec<V>>> = HashMap::new();
    for row in &b.rows {
        let key = shared.iter().map(|&(_, j)| row[j].clone()).collect();
        index.entry(key).or_default().push(row);
    }
    let mut rows = BTreeSet::new();
    for row in &a.rows {
        let key: Vec<V> = shared.iter().map(|&(i, _)| row[i].clone()).collect();
        for other in index.get(&key).into_iter().flatten() {
            let mut joined = row.clone();
            joined.extend(extra.iter().map(|&j| other[j].clone()));
            rows.insert(joined);
        }
    }
    let mut vars = a.vars.clone();
    vars.extend(extra.iter().map(|&j| b.vars[j].clone()));
    Family { vars, rows }
}

/// Counts, per head tuple, the assignments of `all_vars` over a domain of
/// `domain_size` values that extend a row of at least one family.
///
/// Uses inclusion–exclusion over subsets of families, pruning supersets of
/// subsets whose join is already empty. Every family must contain all head
/// variables.
pub(crate) fn count_union<V: Clone + Ord + Hash>(
    families: &[Family<V>],
    all_vars: usize,
    head: &[Name],
    domain_size: usize,
) -> BTreeMap<Vec<V>, BigUint> {
    #[allow(clippy::too_many_arguments)]
    fn visit<V: Clone + Ord + Hash>(
        families: &[Family<V>],
        current: &Family<V>,
        last: usize,
        depth: usize,
        all_vars: usize,
        head: &[Name],
        domain: &BigInt,
        acc: &mut BTreeMap<Vec<V>, BigInt>,
    ) {
        let free = all_vars.saturating_sub(current.vars.len());
        let mut weight = num_traits::pow(domain.clone(), free);
        if depth.is_multiple_of(2) {
            weight = -weight;
        }
        let head_pos: Vec<usize> = head
            .iter()
            .map(|h| {
                current
                    .vars
                    .iter()
                    .position(|v| v == h)
                    .expect("head variable in family")
            })
            .collect();
        for row in &current.rows {
            let key: Vec<V> = head_pos.iter().map(|&i| row[i].clone()).collect();
            *acc.entry(key).or_insert_with(BigInt::zero) += &weight;
        }
        for next in last + 1..families.len() {
            let joined = natural_join(current, &families[next]);
            if !joined.rows.is_empty() {
                visit(
                    families,
                    &joined,
                    next,
                    depth + 1,
                    all_vars,
                    head,
                    domain,
                    acc,
                );
            }
        }
    }

    let domain = BigInt::from(domain_size);
    let mut acc = BTreeMap::new();
    for (i, f) in families.iter().enumerate() {
        if !f.rows.is_empty() {
            visit(families, f, i, 1, all_vars, head, &domain, &mut acc);
        }
    }
    acc.into_iter()
        .filter_map(|(k, n)| match n.sign() {
            Sign::Plus => Some((k, n.magnitude().clone())),
            Sign::NoSign => None,
            Sign::Minus => unreachable!("inclusion–exclusion produced a negative count"),
        })
        .collect()
}

fn answer_key(tuple: Vec<Term>, answer_domain: &BTreeSet<Term>) -> Option<Vec<Term>> {
    tuple
        .iter()
        .all(|t| t.is_const() && answer_domain.contains(t))
        .then_some(tuple)
}

/// `q[I]`: bag-set answers of `q` over `inst`, with answer tuples confined to
/// the constants of `answer_domain`.
pub fn evaluate_cq_bag(
    q: &Ucq,
    inst: &Instance,
    answer_domain: &Instance,
    mode: EvalMode,
) -> Result<AnswerBag, EvalError> {
    check_schema(q, inst)?;
    let dom = answer_domain.adom();
    let mut bag = AnswerBag::new(q.arity(), Exactness::Exact);
    match mode {
        EvalMode::PerDisjunct => {
            for d in q.disjuncts() {
                for g in satisfying_groundings(d, inst) {
                    let tuple = g.project(q.head()).expect("head variables are safe");
                    if let Some(key) = answer_key(tuple, &dom) {
                        bag.add_one(key)?;
                    }
                }
            }
        }
        EvalMode::WholeQuery => {
            let families: Vec<Family<Term>> = q
                .disjuncts()
                .iter()
                .map(|d| {
                    let vars = d.variables();
                    let rows = satisfying_groundings(d, inst)
                        .into_iter()
                        .map(|g| g.project(&vars).expect("total grounding"))
                        .collect();
                    Family { vars, rows }
                })
                .collect();
            let counts = count_union(&families, q.variables().len(), q.head(), inst.adom().len());
            for (tuple, n) in counts {
                if let Some(key) = answer_key(tuple, &dom) {
                    bag.add(key, n)?;
                }
            }
        }
    }
    Ok(bag)
}

/// Evaluates over an existing chase result, tagging the bag as a lower bound
/// when that chase stopped early.
pub fn evaluate_over_chase(
    q: &Ucq,
    program: &Program,
    chase: &ChaseResult,
    mode: EvalMode,
) -> Result<AnswerBag, EvalError> {
    let mut bag = evaluate_cq_bag(q, &chase.instance, &program.instance, mode)?;
    if !chase.terminated {
        bag.set_exactness(Exactness::LowerBoundAtLevel(chase.levels_run));
    }
    Ok(bag)
}

/// `q[Σ, I]` computed as `q[chase(Σ, I)]`.
pub fn evaluate_certain_bag(
    q: &Ucq,
    program: &Program,
    config: &ChaseConfig,
    mode: EvalMode,
) -> Result<AnswerBag, EvalError> {
    check_schema(q, &program.instance)?;
    let chase = run_chase(program, config)?;
    evaluate_over_chase(q, program, &chase, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{parse_program, parse_query};

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    fn groundings(d: &Disjunct, inst: &Instance) -> Vec<Vec<(String, String)>> {
        satisfying_groundings(d, inst)
            .into_iter()
            .map(|g| {
                g.iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect()
            })
            .collect()
    }

    fn setup(program: &str, query: &str) -> (Program, Ucq) {
        let p = parse_program(program).unwrap();
        let q = parse_query(query, &p.schema).unwrap();
        (p, q)
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn bindings_extend_each_grounding() {
        let (p, q) = setup(
            "rel R/2. R(a, b). R(a, c). R(b, b).",
            r#"q(x, y, w) <- R(x, y), w = x | R(x, y), w = "b" | R(x, y), w = "z"."#,
        );
        for d in q.disjuncts() {
            assert_eq!(
                satisfying_groundings(d, &p.instance),
                crate::oracle::brute_force_groundings(d, &p.instance)
            );
        }
        assert_eq!(
            groundings(&q.disjuncts()[0], &p.instance)[0],
            pairs(&[("w", "a"), ("x", "a"), ("y", "b")])
        );
        // a constant outside the active domain admits no grounding
        assert!(satisfying_groundings(&q.disjuncts()[2], &p.instance).is_empty());
    }

    #[test]
    fn groundings_of_a_single_atom() {
        let (p, q) = setup("rel R/2. R(a,b). R(a,c).", "q(x) <- R(x,y).");
        assert_eq!(
            groundings(&q.disjuncts()[0], &p.instance),
            vec![
                pairs(&[("x", "a"), ("y", "b")]),
                pairs(&[("x", "a"), ("y", "c")])
            ]
        );
    }

    #[test]
    fn repeated_variable_needs_a_diagonal_fact() {
        let (p, q) = setup("rel R/2. R(a,b).", "q(x) <- R(x,x).");
        assert!(groundings(&q.disjuncts()[0], &p.instance).is_empty());
    }

    #[test]
    fn join_over_two_atoms() {
        // Enumerating all 9 groundings of {x,y} over {a,b,c} leaves only x=a, y=b.
        let (p, q) = setup(
            "rel R/2. rel S/1. R(a,b). S(b). S(c).",
            "q(x) <- R(x,y), S(y).",
        );
        assert_eq!(
            groundings(&q.disjuncts()[0], &p.instance),
            vec![pairs(&[("x", "a"), ("y", "b")])]
        );
    }

    #[test]
    fn constants_in_query_atoms() {
        let (p, q) = setup("rel R/2. R(a,b). R(c,b). R(a,d).", "q(x) <- R(x,\"b\").");
        let bag = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.len(), 2);
    }

    #[test]
    fn witnesses_are_counted() {
        let (p, q) = setup("rel R/2. R(a,b). R(a,c). R(b,c).", "q(x) <- R(x,y).");
        let bag = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.multiplicity(&[c("a")]), 2u8.into());
        assert_eq!(bag.multiplicity(&[c("b")]), 1u8.into());
        assert_eq!(bag.len(), 2);
    }

    #[test]
    fn per_disjunct_sums_over_disjuncts() {
        let (p, q) = setup("rel R/2. rel T/1. R(a,b). T(a).", "q(x) <- R(x,y) | T(x).");
        let bag = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.multiplicity(&[c("a")]), 2u8.into());
        assert_eq!(bag.len(), 1);
    }

    #[test]
    fn whole_query_counts_full_groundings() {
        // Groundings of {x,y} over {a,b}: (a,a) via T(a); (a,b) via R(a,b) or T(a).
        let (p, q) = setup("rel R/2. rel T/1. R(a,b). T(a).", "q(x) <- R(x,y) | T(x).");
        let bag = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::WholeQuery).unwrap();
        assert_eq!(bag.multiplicity(&[c("a")]), 2u8.into());
        assert_eq!(bag.len(), 1);
    }

    #[test]
    fn boolean_query_counts_groundings() {
        let (p, q) = setup("rel R/2. R(a,b). R(b,c). R(c,c).", "q() <- R(x,y).");
        let bag = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.multiplicity(&[]), 3u8.into());
        let (p, q) = setup("rel R/2. R(a,b).", "q() <- R(x,x).");
        let bag = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct).unwrap();
        assert!(bag.is_empty());
    }

    #[test]
    fn empty_dependencies_match_plain_evaluation() {
        let (p, q) = setup("rel R/2. R(a,b). R(a,c).", "q(x) <- R(x,y).");
        let plain = evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct).unwrap();
        let certain =
            evaluate_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
        assert_eq!(plain, certain);
    }

    #[test]
    fn derived_fact_counted_once() {
        let (p, q) = setup(
            "rel T/1. rel U/1. rel P/1. T(a). U(a). T(x) -> P(x). U(x) -> P(x).",
            "q(x) <- P(x).",
        );
        let bag =
            evaluate_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.multiplicity(&[c("a")]), 1u8.into());
        assert!(bag.exactness().is_exact());
    }

    #[test]
    fn nulls_bind_existential_variables_but_never_answers() {
        let (p, q) = setup(
            "rel P/1. rel R/2. P(a). P(x) -> exists y: R(x,y).",
            "q(x) <- R(x,y).",
        );
        let bag =
            evaluate_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.multiplicity(&[c("a")]), 1u8.into());
        let (p, q) = setup(
            "rel P/1. rel R/2. P(a). P(x) -> exists y: R(x,y).",
            "q(y) <- R(x,y).",
        );
        let bag =
            evaluate_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
        assert!(bag.is_empty());
    }

    #[test]
    fn capped_chase_gives_lower_bound() {
        let (p, q) = setup(
            "rel A/1. rel B/1. rel C/1. A(a). A(b). A(x) -> B(x). B(x) -> C(x).",
            "q(x) <- C(x).",
        );
        let bag =
            evaluate_certain_bag(&q, &p, &ChaseConfig::bounded(3), EvalMode::PerDisjunct).unwrap();
        assert_eq!(bag.exactness(), Exactness::LowerBoundAtLevel(3));
        assert_eq!(bag.len(), 1);
    }

    #[test]
    fn undeclared_relation_is_a_schema_mismatch() {
        let p = parse_program("rel R/1. R(a).").unwrap();
        let other = parse_program("rel S/1.").unwrap();
        let q = parse_query("q(x) <- S(x).", &other.schema).unwrap();
        assert!(matches!(
            evaluate_cq_bag(&q, &p.instance, &p.instance, EvalMode::PerDisjunct),
            Err(EvalError::SchemaMismatch(_))
        ));
    }
}

//! The level-bounded chase.
//!
//! A run starts from the program's facts and fires one dependency per level.
//! Candidate `(fact, dependency)` pairs sit in a FIFO queue seeded in fact
//! insertion order times dependency file order; every new fact enqueues its
//! own pairs at the back, so any pair that stays applicable is eventually
//! popped. Applicability is re-checked at pop time.
//!
//! Two strategies are available. [`Strategy::Oblivious`] fires every pair
//! exactly once, unconditionally. [`Strategy::Restricted`] (the default)
//! skips an inclusion dependency whose conclusion is already present and a
//! TGD whose conclusion already has a witness `S(c.., w..)` for some `w`.
//!
//! Fresh values are labeled nulls `_:n0, _:n1, ...` numbered in firing
//! order, so identical inputs give identical runs.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{Atom, Dependency, Fact, Instance, ModelError, Name, Term};
use crate::textio::{render_fact, Program};

pub const DEFAULT_MAX_LEVEL: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxLevel {
    Bounded(u64),
    Unbounded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    Restricted,
    Oblivious,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "restricted" => Ok(Strategy::Restricted),
            "oblivious" => Ok(Strategy::Oblivious),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseConfig {
    pub max_level: MaxLevel,
    pub strategy: Strategy,
    pub trace: bool,
    /// Wall-clock budget; exceeding it aborts the run with
    /// [`ChaseError::DidNotTerminate`].
    pub deadline: Option<Duration>,
}

impl Default for ChaseConfig {
    fn default() -> Self {
        ChaseConfig {
            max_level: MaxLevel::Bounded(DEFAULT_MAX_LEVEL),
            strategy: Strategy::Restricted,
            trace: false,
            deadline: None,
        }
    }
}

impl ChaseConfig {
    pub fn bounded(max_level: u64) -> Self {
        ChaseConfig {
            max_level: MaxLevel::Bounded(max_level),
            ..Default::default()
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn validate(&self) -> Result<(), ChaseError> {
        if self.max_level == MaxLevel::Unbounded && self.strategy == Strategy::Oblivious {
            return Err(ChaseError::InvalidConfig(
                "an unbounded chase requires the restricted strategy".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChaseError {
    #[error("invalid chase configuration: {0}")]
    InvalidConfig(String),
    #[error("chase did not terminate within the time limit (stopped at level {levels})")]
    DidNotTerminate { levels: u64 },
    #[error("dependency expects a `{expected}` premise, got `{found}`")]
    RelationMismatch { expected: String, found: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Hands out consecutive labeled-null ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NullCounter(u64);

impl NullCounter {
    pub fn starting_at(next: u64) -> Self {
        NullCounter(next)
    }

    pub fn next_null(&mut self) -> Term {
        let t = Term::Null(self.0);
        self.0 += 1;
        t
    }

    pub fn peek(&self) -> u64 {
        self.0
    }
}

/// One chase step: the conclusion of `dep` on `premise`.
pub fn apply_rule(
    dep: &Dependency,
    premise: &Fact,
    nulls: &mut NullCounter,
) -> Result<Fact, ChaseError> {
    if premise.relation() != dep.from() {
        return Err(ChaseError::RelationMismatch {
            expected: dep.from().to_string(),
            found: premise.relation().to_string(),
        });
    }
    let mut args = premise.args().to_vec();
    for _ in 0..dep.n_existential() {
        args.push(nulls.next_null());
    }
    Ok(Fact::new(dep.to().clone(), args)?)
}

/// Whether `dep` may fire on `premise` in `current`.
///
/// `already_fired` only matters for the oblivious strategy, which fires each
/// pair exactly once.
pub fn applicable(
    dep: &Dependency,
    premise: &Fact,
    current: &Instance,
    strategy: Strategy,
    already_fired: bool,
) -> bool {
    if premise.relation() != dep.from() {
        return false;
    }
    match strategy {
        Strategy::Oblivious => !already_fired,
        Strategy::Restricted => {
            let prefix = premise.args();
            !current
                .facts_of(dep.to().name())
                .any(|f| f.args().starts_with(prefix))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiringRecord {
    pub level: u64,
    pub dependency_index: usize,
    pub premise: Fact,
    pub conclusion: Fact,
}

impl fmt::Display for FiringRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {}: dep#{} + {} => {}",
            self.level,
            self.dependency_index,
            render_fact(&self.premise),
            render_fact(&self.conclusion)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseResult {
    pub instance: Instance,
    pub levels_run: u64,
    /// True iff no pair was applicable when the run stopped.
    pub terminated: bool,
    pub trace: Option<Vec<FiringRecord>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivability {
    Proven,
    Refuted,
    /// Not produced before the level cap; the chase had not terminated.
    Unknown(u64),
}

impl ChaseResult {
    /// Derivability of a ground fact, read off this run.
    pub fn derivability(&self, fact: &Fact) -> Derivability {
        if self.instance.contains(fact) {
            Derivability::Proven
        } else if self.terminated {
            Derivability::Refuted
        } else {
            Derivability::Unknown(self.levels_run)
        }
    }

    pub fn render_trace(&self) -> String {
        self.trace
            .iter()
            .flatten()
            .map(|r| format!("{r}\n"))
            .collect()
    }
}

struct Run<'a> {
    deps: &'a [Dependency],
    deps_by_from: HashMap<&'a str, Vec<usize>>,
    instance: Instance,
    queue: VecDeque<(usize, usize)>,
    /// `(relation, prefix)` keys of existing TGD witnesses.
    witnesses: HashSet<(Name, Vec<Term>)>,
    /// `(relation, prefix length)` pairs some TGD checks for witnesses.
    witness_shapes: HashSet<(Name, usize)>,
    fired: HashSet<(usize, usize)>,
}

impl<'a> Run<'a> {
    fn new(program: &'a Program) -> Self {
        let deps = &program.dependencies;
        let mut deps_by_from: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, d) in deps.iter().enumerate() {
            deps_by_from.entry(d.from().name()).or_default().push(i);
        }
        let witness_shapes = deps
            .iter()
            .filter(|d| d.is_tgd())
            .map(|d| (Name::from(d.to().name()), d.from().arity()))
            .collect();
        let mut run = Run {
            deps,
            deps_by_from,
            instance: Instance::new(program.schema.clone()),
            queue: VecDeque::new(),
            witnesses: HashSet::new(),
            witness_shapes,
            fired: HashSet::new(),
        };
        for f in program.instance.iter() {
            run.add(f.clone());
        }
        run
    }

    fn add(&mut self, fact: Fact) -> bool {
        let rel = Name::from(fact.relation().name());
        for (shape_rel, len) in &self.witness_shapes {
            if *shape_rel == rel && *len <= fact.args().len() {
                self.witnesses
                    .insert((rel.clone(), fact.args()[..*len].to_vec()));
            }
        }
        let fresh = self
            .instance
            .insert(fact)
            .expect("chase facts use schema relations");
        if fresh {
            let idx = self.instance.len() - 1;
            let rel = self
                .instance
                .get(idx)
                .expect("just inserted")
                .relation()
                .name();
            if let Some(ds) = self.deps_by_from.get(rel) {
                self.queue.extend(ds.iter().map(|&d| (idx, d)));
            }
        }
        fresh
    }

    fn applicable(&self, fact_idx: usize, dep_idx: usize, strategy: Strategy) -> bool {
        let dep = &self.deps[dep_idx];
        let premise = self.instance.get(fact_idx).expect("queued fact exists");
        match strategy {
            Strategy::Oblivious => !self.fired.contains(&(fact_idx, dep_idx)),
            Strategy::Restricted if dep.is_tgd() => !self
                .witnesses
                .contains(&(Name::from(dep.to().name()), premise.args().to_vec())),
            Strategy::Restricted => {
                let conclusion = Fact::new(dep.to().clone(), premise.args().to_vec())
                    .expect("inclusion dependencies preserve arity");
                !self.instance.contains(&conclusion)
            }
        }
    }
}

/// Runs the chase of `program` under `config`.
///
/// Hitting the level cap is not an error: the result reports
/// `terminated = false`.
pub fn run_chase(program: &Program, config: &ChaseConfig) -> Result<ChaseResult, ChaseError> {
    config.validate()?;
    let started = Instant::now();
    let mut run = Run::new(program);
    let mut nulls = NullCounter::default();
    let mut level = 0u64;
    let mut trace = config.trace.then(Vec::new);
    let mut terminated = true;
    let mut polls = 0u32;

    while let Some((fi, di)) = run.queue.pop_front() {
        if let Some(limit) = config.deadline {
            polls = polls.wrapping_add(1);
            if polls.is_multiple_of(256) && started.elapsed() > limit {
                return Err(ChaseError::DidNotTerminate { levels: level });
            }
        }
        if !run.applicable(fi, di, config.strategy) {
            continue;
        }
        if let MaxLevel::Bounded(cap) = config.max_level {
            if level >= cap {
                terminated = false;
                break;
            }
        }
        let premise = run.instance.get(fi).expect("queued fact exists").clone();
        let conclusion = apply_rule(&run.deps[di], &premise, &mut nulls)?;
        level += 1;
        run.fired.insert((fi, di));
        if let Some(t) = trace.as_mut() {
            t.push(FiringRecord {
                level,
                dependency_index: di,
                premise,
                conclusion: conclusion.clone(),
            });
        }
        run.add(conclusion);
    }

    Ok(ChaseResult {
        instance: run.instance,
        levels_run: level,
        terminated,
        trace,
    })
}

/// `Σ ∪ I ⊢ f`, decided by chase membership.
pub fn derivable(
    program: &Program,
    fact: &Atom,
    config: &ChaseConfig,
) -> Result<Derivability, ChaseError> {
    let fact = Fact::try_from(fact.clone())?;
    let result = run_chase(program, config)?;
    Ok(result.derivability(&fact))
}

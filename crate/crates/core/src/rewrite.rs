//! Compiles dependencies into a UCQ so that plain evaluation over the input
//! facts yields the certain answers.
//!
//! Saturation works on disjuncts. Each step either rewrites one atom
//! backwards through a dependency (`S(t) ~> R(t)` for an inclusion
//! dependency `R -> S`; `S(t, u) ~> R(t)` for a TGD when every `u` is an
//! unshared, non-head variable) or merges two atoms of the same relation with
//! a most general unifier. The unifier prefers to substitute non-head
//! variables; a head variable it does substitute stays in the disjunct as a
//! binding `x = t`. Merges are kept only when they unlock a TGD step on the
//! merged atom. New disjuncts are deduplicated up to variable renaming and
//! atom order.
//!
//! Each output disjunct also records how its groundings map back to
//! groundings of the input disjuncts ([`Origin`]). Evaluation through those
//! maps counts every input grounding once, however many rewritten disjuncts
//! reproduce it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::eval::{check_schema, count_union, satisfying_groundings, EvalError, EvalMode, Family};
use crate::model::{AnswerBag, Atom, Dependency, Disjunct, Exactness, Name, Term, Ucq};
use crate::textio::Program;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("dependency {dep} does not apply to atom {atom}")]
    NotApplicable { dep: String, atom: String },
}

/// The two atoms of a [`reduce_step`] have no unifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("atoms are not unifiable")]
pub struct NotUnifiable;

fn occurrences(d: &Disjunct, var: &str) -> usize {
    d.atoms()
        .iter()
        .flat_map(|a| &a.args)
        .chain(d.bindings().iter().map(|(_, t)| t))
        .filter(|t| t.as_var().is_some_and(|v| &**v == var))
        .count()
}

/// Whether `dep` can rewrite `atom` (an atom of `disjunct`) backwards.
pub fn dep_applicable_to_atom(
    dep: &Dependency,
    atom: &Atom,
    disjunct: &Disjunct,
    head: &[Name],
) -> bool {
    if &atom.relation != dep.to() {
        return false;
    }
    atom.args[dep.from().arity()..].iter().all(|t| match t {
        Term::Var(v) => !head.contains(v) && occurrences(disjunct, v) == 1,
        _ => false,
    })
}

/// `S(t..)` to `R(t..)` for an inclusion dependency, `S(t.., u..)` to
/// `R(t..)` for a TGD.
pub fn rewrite_atom(dep: &Dependency, atom: &Atom) -> Result<Atom, RewriteError> {
    let existentials_ok = atom.args[dep.from().arity().min(atom.args.len())..]
        .iter()
        .all(|t| t.as_var().is_some());
    if &atom.relation != dep.to() || !existentials_ok {
        return Err(RewriteError::NotApplicable {
            dep: dep.to_string(),
            atom: atom.to_string(),
        });
    }
    Ok(Atom {
        relation: dep.from().clone(),
        args: atom.args[..dep.from().arity()].to_vec(),
    })
}

/// Result of merging two atoms of a disjunct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub disjunct: Disjunct,
    /// Image of every variable of the original disjunct.
    pub substitution: BTreeMap<Name, Term>,
    /// Index of the merged atom in `disjunct`.
    pub merged: usize,
}

fn resolve(subst: &HashMap<Name, Term>, t: &Term) -> Term {
    let mut t = t.clone();
    while let Term::Var(v) = &t {
        match subst.get(v) {
            Some(next) => t = next.clone(),
            None => break,
        }
    }
    t
}

fn dedup_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut seen = BTreeSet::new();
    atoms
        .into_iter()
        .filter(|a| seen.insert(a.clone()))
        .collect()
}

/// Unifies atoms `i` and `j` of `disjunct`, applies the unifier everywhere
/// and drops the now duplicate atom. Non-head variables are substituted
/// first; a head variable that is substituted anyway becomes a binding.
pub fn reduce_step(
    disjunct: &Disjunct,
    i: usize,
    j: usize,
    head: &[Name],
) -> Result<Reduction, NotUnifiable> {
    let (a, b) = (&disjunct.atoms()[i], &disjunct.atoms()[j]);
    if i == j || a.relation != b.relation {
        return Err(NotUnifiable);
    }
    let rank = |t: &Term| match t {
        Term::Var(v) if !head.contains(v) => 0,
        Term::Var(_) => 1,
        _ => 2,
    };
    let mut subst: HashMap<Name, Term> = HashMap::new();
    for (s, t) in a.args.iter().zip(&b.args) {
        let (s, t) = (resolve(&subst, s), resolve(&subst, t));
        if s == t {
            continue;
        }
        let (from, to) = if rank(&t) <= rank(&s) { (t, s) } else { (s, t) };
        match from {
            Term::Var(v) => {
                subst.insert(v, to);
            }
            _ => return Err(NotUnifiable),
        }
    }
    let apply = |atom: &Atom| Atom {
        relation: atom.relation.clone(),
        args: atom.args.iter().map(|t| resolve(&subst, t)).collect(),
    };
    let merged_atom = apply(a);
    let atoms: Vec<Atom> = disjunct
        .atoms()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, atom)| apply(atom))
        .collect();
    let atoms = dedup_atoms(atoms);
    let merged = atoms
        .iter()
        .position(|x| *x == merged_atom)
        .expect("merged atom kept");
    let mut bindings: Vec<(Name, Term)> = disjunct
        .bindings()
        .iter()
        .map(|(v, t)| (v.clone(), resolve(&subst, t)))
        .collect();
    for h in head {
        if subst.contains_key(h) {
            bindings.push((h.clone(), resolve(&subst, &Term::Var(h.clone()))));
        }
    }
    let substitution = disjunct
        .variables()
        .into_iter()
        .map(|v| {
            let image = resolve(&subst, &Term::Var(v.clone()));
            (v, image)
        })
        .collect();
    Ok(Reduction {
        disjunct: Disjunct::with_bindings(atoms, bindings)
            .expect("bindings name surviving variables"),
        substitution,
        merged,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum CTerm {
    Const(Name),
    Head(Name),
    Local(usize),
}

type CanonAtom = (Name, Vec<CTerm>);

/// Pseudo relation name for bindings in a canonical key; never a relation.
const BINDING: &str = "=";
type CanonKey = Vec<CanonAtom>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Mask {
    Const(Name),
    Head(Name),
    Local,
}

/// Canonical form of a disjunct up to renaming of non-head variables and
/// reordering of atoms: the least renamed atom list over all orderings that
/// respect the variable-blind sort key. Also returns the renaming.
fn canonicalize(d: &Disjunct, head: &[Name]) -> (CanonKey, HashMap<Name, usize>) {
    let atoms = d.atoms();
    let mask = |a: &Atom| -> (Name, Vec<Mask>) {
        let args = a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) if head.contains(v) => Mask::Head(v.clone()),
                Term::Var(_) => Mask::Local,
                Term::Const(c) => Mask::Const(c.clone()),
                Term::Null(_) => unreachable!("queries hold no nulls"),
            })
            .collect();
        (Name::from(a.relation.name()), args)
    };
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by_key(|&i| mask(&atoms[i]));
    let masks: Vec<_> = order.iter().map(|&i| mask(&atoms[i])).collect();
    // group boundaries over sorted positions
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && masks[pos] == masks[pos - 1] {
            groups.last_mut().expect("group").push(i);
        } else {
            groups.push(vec![i]);
        }
    }

    struct Search<'a> {
        atoms: &'a [Atom],
        head: &'a [Name],
        best: Option<(CanonKey, HashMap<Name, usize>)>,
    }

    impl Search<'_> {
        fn go(
            &mut self,
            groups: &[Vec<usize>],
            used: &mut Vec<bool>,
            prefix: &mut CanonKey,
            renaming: &mut HashMap<Name, usize>,
        ) {
            if let Some((best, _)) = &self.best {
                if prefix.as_slice() > &best[..prefix.len()] {
                    return;
                }
            }
            let Some(group) = groups.iter().find(|g| g.iter().any(|&i| !used[i])) else {
                let better = match &self.best {
                    Some((best, _)) => &**prefix < best,
                    None => true,
                };
                if better {
                    self.best = Some((prefix.clone(), renaming.clone()));
                }
                return;
            };
            for &i in group {
                if used[i] {
                    continue;
                }
                used[i] = true;
                let mut added = Vec::new();
                let args = self.atoms[i]
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) if self.head.contains(v) => CTerm::Head(v.clone()),
                        Term::Var(v) => {
                            let next = renaming.len();
                            CTerm::Local(*renaming.entry(v.clone()).or_insert_with(|| {
                                added.push(v.clone());
                                next
                            }))
                        }
                        Term::Const(c) => CTerm::Const(c.clone()),
                        Term::Null(_) => unreachable!("queries hold no nulls"),
                    })
                    .collect();
                prefix.push((Name::from(self.atoms[i].relation.name()), args));
                self.go(groups, used, prefix, renaming);
                prefix.pop();
                for v in added {
                    renaming.remove(&v);
                }
                used[i] = false;
            }
        }
    }

    let mut search = Search {
        atoms,
        head,
        best: None,
    };
    search.go(
        &groups,
        &mut vec![false; atoms.len()],
        &mut Vec::new(),
        &mut HashMap::new(),
    );
    let (mut key, renaming) = search.best.expect("at least one ordering");
    for (v, t) in d.bindings() {
        let value = match t {
            Term::Var(w) if head.contains(w) => CTerm::Head(w.clone()),
            Term::Var(w) => CTerm::Local(renaming[w]),
            Term::Const(c) => CTerm::Const(c.clone()),
            Term::Null(_) => unreachable!("queries hold no nulls"),
        };
        key.push((Name::from(BINDING), vec![CTerm::Head(v.clone()), value]));
    }
    (key, renaming)
}

/// Maps the variables of an input disjunct (in first-occurrence order) to
/// terms of an output disjunct. `None` marks a variable whose value was
/// dropped by a TGD step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Origin {
    pub disjunct: usize,
    pub map: Vec<Option<Term>>,
}

#[derive(Clone, Debug)]
pub struct RewriteResult {
    pub query: Ucq,
    /// Saturation rounds that produced at least one new disjunct.
    pub iterations: usize,
    /// Candidate disjuncts produced before deduplication.
    pub disjuncts_generated: usize,
    /// Per output disjunct, how its groundings map to input groundings.
    pub origins: Vec<Vec<Origin>>,
    /// Per output disjunct, whether some derivation of it used a TGD step.
    pub tgd_derived: Vec<bool>,
}

impl RewriteResult {
    /// Output disjuncts in canonical form, sorted; equal for rewritings that
    /// differ only in variable names or disjunct order.
    pub fn canonical_form(&self) -> Vec<String> {
        let mut forms: Vec<String> = self
            .query
            .disjuncts()
            .iter()
            .map(|d| format!("{:?}", canonicalize(d, self.query.head()).0))
            .collect();
        forms.sort();
        forms
    }
}

struct Edge {
    parent: usize,
    child: usize,
    /// Parent representative variable -> child term.
    map: HashMap<Name, Option<Term>>,
    via_tgd: bool,
}

struct Store<'a> {
    head: &'a [Name],
    reps: Vec<Disjunct>,
    from_canon: Vec<HashMap<CTerm, Term>>,
    generation: Vec<usize>,
    index: HashMap<CanonKey, usize>,
}

impl Store<'_> {
    fn fresh_names(&self, n: usize) -> Vec<Name> {
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        while out.len() < n {
            let name = Name::from(format!("v{k}"));
            k += 1;
            if !self.head.contains(&name) {
                out.push(name);
            }
        }
        out
    }

    /// Inserts `d` (or finds its isomorphic twin). Returns the index, whether
    /// it is new, and how each variable of `d` reads in the stored
    /// representative. Input disjuncts keep their variable names.
    fn intern(
        &mut self,
        d: Disjunct,
        generation: usize,
        keep_as_is: bool,
    ) -> (usize, bool, HashMap<Name, Term>) {
        let (key, renaming) = canonicalize(&d, self.head);
        if let (false, Some(&k)) = (keep_as_is, self.index.get(&key)) {
            let back = &self.from_canon[k];
            let translate = d
                .variables()
                .into_iter()
                .map(|v| {
                    let c = if self.head.contains(&v) {
                        CTerm::Head(v.clone())
                    } else {
                        CTerm::Local(renaming[&v])
                    };
                    (v, back[&c].clone())
                })
                .collect();
            return (k, false, translate);
        }
        let k = self.reps.len();
        let (rep, back, translate) = if keep_as_is {
            let back = d
                .variables()
                .into_iter()
                .map(|v| {
                    let c = if self.head.contains(&v) {
                        CTerm::Head(v.clone())
                    } else {
                        CTerm::Local(renaming[&v])
                    };
                    (c, Term::Var(v))
                })
                .collect();
            let translate = d
                .variables()
                .into_iter()
                .map(|v| (v.clone(), Term::Var(v)))
                .collect();
            (d, back, translate)
        } else {
            let names = self.fresh_names(renaming.len());
            let term_of = |c: &CTerm| match c {
                CTerm::Const(c) => Term::Const(c.clone()),
                CTerm::Head(h) => Term::Var(h.clone()),
                CTerm::Local(i) => Term::Var(names[*i].clone()),
            };
            let atoms = key
                .iter()
                .filter(|(rel, _)| &**rel != BINDING)
                .map(|(rel, args)| {
                    let relation = d
                        .relations()
                        .find(|r| r.name() == &**rel)
                        .expect("relation of the disjunct")
                        .clone();
                    Atom {
                        relation,
                        args: args.iter().map(term_of).collect(),
                    }
                })
                .collect();
            let mut back: HashMap<CTerm, Term> = HashMap::new();
            for (_, args) in &key {
                for c in args {
                    if !matches!(c, CTerm::Const(_)) {
                        back.insert(c.clone(), term_of(c));
                    }
                }
            }
            let translate = d
                .variables()
                .into_iter()
                .map(|v| {
                    let c = if self.head.contains(&v) {
                        CTerm::Head(v.clone())
                    } else {
                        CTerm::Local(renaming[&v])
                    };
                    (v, back[&c].clone())
                })
                .collect();
            let bindings = key
                .iter()
                .filter(|(rel, _)| &**rel == BINDING)
                .map(|(_, args)| match &args[0] {
                    CTerm::Head(v) => (v.clone(), term_of(&args[1])),
                    _ => unreachable!("bindings fix head variables"),
                })
                .collect();
            let rep =
                Disjunct::with_bindings(atoms, bindings).expect("renamed copy of a valid disjunct");
            (rep, back, translate)
        };
        self.reps.push(rep);
        self.from_canon.push(back);
        self.generation.push(generation);
        self.index.entry(key).or_insert(k);
        (k, true, translate)
    }
}

fn compose(
    first: &HashMap<Name, Option<Term>>,
    then: &HashMap<Name, Term>,
) -> HashMap<Name, Option<Term>> {
    first
        .iter()
        .map(|(v, t)| {
            let image = match t {
                Some(Term::Var(w)) => then.get(w).cloned(),
                other => other.clone(),
            };
            (v.clone(), image)
        })
        .collect()
}

/// Saturates `q` under `deps`. Depends on `q` and `deps` only.
pub fn perfect_rewrite(q: &Ucq, deps: &[Dependency]) -> RewriteResult {
    let head = q.head();
    let mut store = Store {
        head,
        reps: Vec::new(),
        from_canon: Vec::new(),
        generation: Vec::new(),
        index: HashMap::new(),
    };
    let mut seeds: Vec<(usize, HashMap<Name, Term>)> = Vec::new();
    let mut queue = VecDeque::new();
    for d in q.disjuncts() {
        // a repeated atom adds no constraint, and would hide TGD applicability
        let d = Disjunct::with_bindings(dedup_atoms(d.atoms().to_vec()), d.bindings().to_vec())
            .expect("same variables");
        let (k, fresh, translate) = store.intern(d, 0, true);
        if fresh {
            queue.push_back(k);
        }
        seeds.push((k, translate));
    }

    let mut edges: Vec<Edge> = Vec::new();
    let mut generated = 0usize;
    while let Some(k) = queue.pop_front() {
        let parent = store.reps[k].clone();
        let generation = store.generation[k] + 1;
        let mut children: Vec<(Disjunct, HashMap<Name, Option<Term>>, bool)> = Vec::new();

        let atom_steps = parent.atoms();

        for (ai, atom) in atom_steps.iter().enumerate() {
            for dep in deps {
                if !dep_applicable_to_atom(dep, atom, &parent, head) {
                    continue;
                }
                let rewritten = rewrite_atom(dep, atom).expect("applicability checked");
                let dropped: BTreeSet<&Name> = atom.args[dep.from().arity()..]
                    .iter()
                    .filter_map(Term::as_var)
                    .collect();
                let mut atoms = parent.atoms().to_vec();
                atoms[ai] = rewritten;
                let child = Disjunct::with_bindings(dedup_atoms(atoms), parent.bindings().to_vec())
                    .expect("dropped variables occur once");
                let map = parent
                    .variables()
                    .into_iter()
                    .map(|v| {
                        let image = (!dropped.contains(&v)).then(|| Term::Var(v.clone()));
                        (v, image)
                    })
                    .collect();
                children.push((child, map, dep.is_tgd()));
            }
        }

        let n = atom_steps.len();
        for i in 0..n {
            for j in i + 1..n {
                let Ok(red) = reduce_step(&parent, i, j, head) else {
                    continue;
                };
                let merged = &red.disjunct.atoms()[red.merged];
                let unlocks = deps
                    .iter()
                    .any(|d| d.is_tgd() && dep_applicable_to_atom(d, merged, &red.disjunct, head));
                if !unlocks {
                    continue;
                }
                let map = red
                    .substitution
                    .iter()
                    .map(|(v, t)| (v.clone(), Some(t.clone())))
                    .collect();
                children.push((red.disjunct, map, false));
            }
        }

        for (child, map, via_tgd) in children {
            generated += 1;
            let (c, fresh, translate) = store.intern(child, generation, false);
            if fresh {
                queue.push_back(c);
            }
            edges.push(Edge {
                parent: k,
                child: c,
                map: compose(&map, &translate),
                via_tgd,
            });
        }
    }

    // propagate input provenance along the derivation edges
    let count = store.reps.len();
    let mut origins: Vec<BTreeSet<Origin>> = vec![BTreeSet::new(); count];
    let mut tgd_derived = vec![false; count];
    for (i, (k, translate)) in seeds.iter().enumerate() {
        let map = q.disjuncts()[i]
            .variables()
            .iter()
            .map(|v| Some(translate[v].clone()))
            .collect();
        origins[*k].insert(Origin { disjunct: i, map });
    }
    let mut changed = true;
    while changed {
        changed = false;
        for e in &edges {
            if (tgd_derived[e.parent] || e.via_tgd) && !tgd_derived[e.child] {
                tgd_derived[e.child] = true;
                changed = true;
            }
            let incoming: Vec<Origin> = origins[e.parent]
                .iter()
                .map(|o| Origin {
                    disjunct: o.disjunct,
                    map: o
                        .map
                        .iter()
                        .map(|t| match t {
                            Some(Term::Var(v)) => e.map.get(v).cloned().flatten(),
                            other => other.clone(),
                        })
                        .collect(),
                })
                .collect();
            for o in incoming {
                changed |= origins[e.child].insert(o);
            }
        }
    }

    let iterations = store.generation.iter().copied().max().unwrap_or(0);
    let query =
        Ucq::new(q.name(), head.to_vec(), store.reps).expect("rewriting keeps head variables");
    RewriteResult {
        query,
        iterations,
        disjuncts_generated: generated,
        origins: origins
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        tgd_derived,
    }
}

/// Evaluates a rewriting of `q` over `program`'s facts alone.
///
/// Groundings of the rewritten disjuncts are mapped back to groundings of
/// the input disjuncts and counted once each, so a grounding reachable
/// through several dependency paths is not counted twice.
pub fn evaluate_rewriting(
    q: &Ucq,
    rewriting: &RewriteResult,
    program: &Program,
    mode: EvalMode,
) -> Result<AnswerBag, EvalError> {
    check_schema(q, &program.instance)?;
    let inst = &program.instance;
    let dom = inst.adom();
    let input_vars: Vec<Vec<Name>> = q.disjuncts().iter().map(Disjunct::variables).collect();
    let mut rows: Vec<BTreeSet<Vec<Option<Term>>>> = vec![BTreeSet::new(); q.disjuncts().len()];
    for (k, d) in rewriting.query.disjuncts().iter().enumerate() {
        let groundings = satisfying_groundings(d, inst);
        for g in &groundings {
            for o in &rewriting.origins[k] {
                let row = o
                    .map
                    .iter()
                    .map(|t| match t {
                        Some(Term::Var(v)) => g.get(v).cloned(),
                        other => other.clone(),
                    })
                    .collect();
                rows[o.disjunct].insert(row);
            }
        }
    }

    let mut bag = AnswerBag::new(q.arity(), Exactness::Exact);
    let keep = |tuple: Vec<Option<Term>>| -> Option<Vec<Term>> {
        let tuple: Vec<Term> = tuple.into_iter().collect::<Option<_>>()?;
        tuple
            .iter()
            .all(|t| t.is_const() && dom.contains(t))
            .then_some(tuple)
    };
    match mode {
        EvalMode::PerDisjunct => {
            for (i, set) in rows.iter().enumerate() {
                let pos: Vec<usize> = q
                    .head()
                    .iter()
                    .map(|h| {
                        input_vars[i]
                            .iter()
                            .position(|v| v == h)
                            .expect("safe head")
                    })
                    .collect();
                for row in set {
                    if let Some(key) = keep(pos.iter().map(|&p| row[p].clone()).collect()) {
                        bag.add_one(key)?;
                    }
                }
            }
        }
        EvalMode::WholeQuery => {
            let families: Vec<Family<Option<Term>>> = input_vars
                .into_iter()
                .zip(rows)
                .map(|(vars, rows)| Family { vars, rows })
                .collect();
            for (tuple, n) in count_union(&families, q.variables().len(), q.head(), dom.len()) {
                if let Some(key) = keep(tuple) {
                    bag.add(key, n)?;
                }
            }
        }
    }
    Ok(bag)
}

/// Certain answers of `q` by rewriting, without running the chase.
pub fn evaluate_via_rewriting(
    q: &Ucq,
    program: &Program,
    mode: EvalMode,
) -> Result<AnswerBag, EvalError> {
    let rewriting = perfect_rewrite(q, &program.dependencies);
    evaluate_rewriting(q, &rewriting, program, mode)
}

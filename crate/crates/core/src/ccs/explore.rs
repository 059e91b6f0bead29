use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::semantics::{check_guarded, derive_transitions, GuardViolation};
use super::{Action, Environment, Process, Relabelling};
use crate::clts::{Clts, StateId, Transition, TransitionId};

pub const DEFAULT_MAX_STATES: usize = 10_000;

/// The blocking set `B` used when building a system from a CCS term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Blocking {
    /// `Act ∖ {τ}`: every visible action may be refused by the environment.
    #[default]
    AllVisible,
    Only(BTreeSet<Action>),
}

impl Blocking {
    pub fn contains(&self, a: &Action) -> bool {
        match self {
            Blocking::AllVisible => !a.is_tau(),
            Blocking::Only(set) => set.contains(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("state budget of {max_states} exceeded with {frontier} states still unexplored")]
    StateBudgetExceeded { max_states: usize, frontier: usize },
    #[error("relabelling [{new}/{old}] maps the non-blocking action `{from}` to the blocking `{to}`")]
    RelabellingIntoBlocking { old: String, new: String, from: Action, to: Action },
    #[error("unguarded recursion in {}", .0.iter().map(|v| v.identifier.as_str()).collect::<Vec<_>>().join(", "))]
    Unguarded(Vec<GuardViolation>),
}

fn check_relabellings(p: &Process, blocking: &Blocking) -> Result<(), ExploreError> {
    match p {
        Process::Choice(s) => s.iter().try_for_each(|(_, q)| check_relabellings(q, blocking)),
        Process::Par(l, r) => {
            check_relabellings(l, blocking)?;
            check_relabellings(r, blocking)
        }
        Process::Restrict(q, _) => check_relabellings(q, blocking),
        Process::Relabel(q, f) => {
            check_relabelling(f, blocking)?;
            check_relabellings(q, blocking)
        }
        Process::Agent(_) => Ok(()),
    }
}

fn check_relabelling(f: &Relabelling, blocking: &Blocking) -> Result<(), ExploreError> {
    for (old, new) in f.pairs() {
        let pairs = [
            (Action::name(old), Action::name(new)),
            (Action::coname(old), Action::coname(new)),
        ];
        for (from, to) in pairs {
            if !blocking.contains(&from) && blocking.contains(&to) {
                return Err(ExploreError::RelabellingIntoBlocking {
                    old: old.to_owned(),
                    new: new.to_owned(),
                    from,
                    to,
                });
            }
        }
    }
    Ok(())
}

/// Builds the CLTS of all processes reachable from `p`.
///
/// States are terms up to summand order, numbered breadth-first from the
/// initial state 0; transitions are numbered in the same sweep, each
/// state's in the order of [`derive_transitions`]. With
/// [`Blocking::AllVisible`] the stored `B` is the set of visible labels
/// that occur.
pub fn explore(
    p: &Process,
    env: &Environment,
    blocking: &Blocking,
    max_states: usize,
) -> Result<Clts, ExploreError> {
    check_guarded(env, p).map_err(ExploreError::Unguarded)?;

    let root = p.normalized();
    let mut index: HashMap<Process, StateId> = HashMap::new();
    let mut terms: Vec<Process> = Vec::new();
    let mut queue = VecDeque::new();
    let mut transitions = Vec::new();

    index.insert(root.clone(), StateId(0));
    terms.push(root.clone());
    queue.push_back(StateId(0));

    let mut agents_seen = BTreeSet::new();
    while let Some(s) = queue.pop_front() {
        let term = terms[s.0].clone();
        check_relabellings(&term, blocking)?;
        for x in term.agents() {
            mark_agents(&x, env, blocking, &mut agents_seen)?;
        }
        for d in derive_transitions(&term, env) {
            let target = d.target.normalized();
            let tgt = match index.get(&target) {
                Some(&t) => t,
                None => {
                    if terms.len() >= max_states {
                        return Err(ExploreError::StateBudgetExceeded {
                            max_states,
                            frontier: queue.len() + 1,
                        });
                    }
                    let id = StateId(terms.len());
                    index.insert(target.clone(), id);
                    terms.push(target);
                    queue.push_back(id);
                    id
                }
            };
            transitions.push(Transition {
                id: TransitionId(transitions.len()),
                source: s,
                label: d.action,
                comps: d.comps,
                target: tgt,
            });
        }
    }

    let stored_blocking = match blocking {
        Blocking::AllVisible => transitions
            .iter()
            .map(|t: &Transition| t.label.clone())
            .filter(|a| !a.is_tau())
            .collect(),
        Blocking::Only(set) => set.clone(),
    };
    let names = terms.iter().map(|t| t.to_string()).collect();
    Ok(Clts::new(names, StateId(0), stored_blocking, transitions).expect("explored system is well formed"))
}

/// Checks relabellings in the bodies of every agent reachable from `x`.
fn mark_agents(
    x: &str,
    env: &Environment,
    blocking: &Blocking,
    seen: &mut BTreeSet<String>,
) -> Result<(), ExploreError> {
    if !seen.insert(x.to_owned()) {
        return Ok(());
    }
    if let Some(body) = env.get(x) {
        check_relabellings(body, blocking)?;
        for y in body.agents() {
            mark_agents(&y, env, blocking, seen)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn build(text: &str) -> Clts {
        let (env, p) = parse(text).unwrap();
        explore(&p, &env, &Blocking::AllVisible, 100).unwrap()
    }

    #[test]
    fn phone_process_has_two_states() {
        let c = build("X = a.X + 'b.X\nmain = (X | b.0) \\ {b}");
        assert_eq!(c.num_states(), 2);
        assert_eq!(c.num_transitions(), 3);
        assert_eq!(c.state_name(StateId(1)), "(X | 0) \\ {b}");
        assert!(c.validate().is_ok());
        assert_eq!(c.blocking(), &BTreeSet::from([Action::name("a")]));
    }

    #[test]
    fn nil_is_a_single_state() {
        let c = build("0");
        assert_eq!((c.num_states(), c.num_transitions()), (1, 0));
    }

    #[test]
    fn simple_recursion() {
        let c = build("X = a.X\nmain = X");
        assert_eq!((c.num_states(), c.num_transitions()), (1, 1));
        let t = &c.transitions()[0];
        assert_eq!(t.label, Action::name("a"));
        assert_eq!(t.comps, BTreeSet::from([crate::ccs::Component::root()]));
    }

    #[test]
    fn summand_order_does_not_split_states() {
        let c = build("X = a.(b.X + c.X)\nY = a.(c.Y + b.Y)\nmain = X");
        let d = build("X = a.(c.X + b.X)\nmain = X");
        assert_eq!(c.num_states(), d.num_states());
    }

    #[test]
    fn budget_exceeded() {
        let (env, p) = parse("X = a.(X | X)\nmain = X").unwrap();
        let err = explore(&p, &env, &Blocking::AllVisible, 5).unwrap_err();
        assert!(matches!(err, ExploreError::StateBudgetExceeded { max_states: 5, .. }));
    }

    #[test]
    fn relabelling_into_blocking_rejected() {
        let (env, p) = parse("X = a.X\nmain = X[b/a]").unwrap();
        let only_b = Blocking::Only(BTreeSet::from([Action::name("b")]));
        let err = explore(&p, &env, &only_b, 10).unwrap_err();
        assert!(matches!(err, ExploreError::RelabellingIntoBlocking { .. }));
        // Blocking into blocking is fine, and the default B never trips.
        assert!(explore(&p, &env, &Blocking::AllVisible, 10).is_ok());
    }

    #[test]
    fn relabelling_hidden_in_a_definition() {
        let (env, p) = parse("Z = tau.Z\nY = a.Z[b/a]\nmain = Y").unwrap();
        let only_b = Blocking::Only(BTreeSet::from([Action::name("b")]));
        assert!(explore(&p, &env, &only_b, 10).is_err());
    }

    #[test]
    fn exploration_is_deterministic() {
        let text = "X = a.X + 'b.X\nY = b.Y + c.0\nmain = (X | Y | tau.X) \\ {b}";
        assert_eq!(build(text), build(text));
    }
}

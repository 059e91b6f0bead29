use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{prefix_all, Action, Component, Components, Environment, Process, Side};

/// One derivable step `p --action, comps--> target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Derivation {
    pub action: Action,
    pub comps: Components,
    pub target: Process,
}

/// An agent identifier whose definition reaches itself without passing
/// through an action prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardViolation {
    pub identifier: String,
    /// Starts at `identifier`; each entry refers unguardedly to the next,
    /// and the last refers back to the first.
    pub cycle: Vec<String>,
}

impl fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} via {} -> {}", self.identifier, self.cycle.join(" -> "), self.identifier)
    }
}

fn unguarded_refs(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::Choice(_) => {}
        Process::Par(l, r) => {
            unguarded_refs(l, out);
            unguarded_refs(r, out);
        }
        Process::Restrict(q, _) | Process::Relabel(q, _) => unguarded_refs(q, out),
        Process::Agent(x) => {
            out.insert(x.clone());
        }
    }
}

/// Checks that every recursive reference lies beneath an action prefix.
///
/// Builds the graph `X → Y` for each `Y` occurring unguarded in the body of
/// `X` and reports every identifier lying on a cycle, with one witness
/// cycle each. The root only matters through the definitions it uses, so
/// all definitions are checked.
pub fn check_guarded(env: &Environment, _root: &Process) -> Result<(), Vec<GuardViolation>> {
    let graph: BTreeMap<&str, Vec<String>> = env
        .iter()
        .map(|(name, body)| {
            let mut refs = BTreeSet::new();
            unguarded_refs(body, &mut refs);
            (name, refs.into_iter().filter(|r| env.contains(r)).collect())
        })
        .collect();

    let mut violations = Vec::new();
    for &start in graph.keys() {
        // BFS for the shortest path start → ... → start
        let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([start]);
        let mut closing = None;
        'search: while let Some(node) = queue.pop_front() {
            for next in &graph[node] {
                if next == start {
                    closing = Some(node);
                    break 'search;
                }
                if !parent.contains_key(next.as_str()) {
                    parent.insert(next, node);
                    queue.push_back(next);
                }
            }
        }
        if let Some(mut node) = closing {
            let mut cycle = vec![node.to_owned()];
            while node != start {
                node = parent[node];
                cycle.push(node.to_owned());
            }
            cycle.reverse();
            violations.push(GuardViolation { identifier: start.to_owned(), cycle });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// All transitions of `p` derivable by the component-labelled SOS rules.
///
/// Requires `env` guarded; an identifier with no definition has no
/// transitions.
pub fn derive_transitions(p: &Process, env: &Environment) -> BTreeSet<Derivation> {
    let mut out = BTreeSet::new();
    derive_into(p, env, &mut out);
    out
}

fn derive_into(p: &Process, env: &Environment, out: &mut BTreeSet<Derivation>) {
    match p {
        Process::Choice(summands) => {
            for (action, then) in summands {
                out.insert(Derivation {
                    action: action.clone(),
                    comps: BTreeSet::from([Component::root()]),
                    target: then.clone(),
                });
            }
        }
        Process::Par(l, r) => {
            let left = derive_transitions(l, env);
            let right = derive_transitions(r, env);
            for d in &left {
                out.insert(Derivation {
                    action: d.action.clone(),
                    comps: prefix_all(Side::L, &d.comps),
                    target: Process::Par(Box::new(d.target.clone()), r.clone()),
                });
            }
            for d in &right {
                out.insert(Derivation {
                    action: d.action.clone(),
                    comps: prefix_all(Side::R, &d.comps),
                    target: Process::Par(l.clone(), Box::new(d.target.clone())),
                });
            }
            for dl in &left {
                let Some(co) = dl.action.complement() else { continue };
                for dr in right.iter().filter(|dr| dr.action == co) {
                    let mut comps = prefix_all(Side::L, &dl.comps);
                    comps.extend(prefix_all(Side::R, &dr.comps));
                    out.insert(Derivation {
                        action: Action::Tau,
                        comps,
                        target: Process::par(dl.target.clone(), dr.target.clone()),
                    });
                }
            }
        }
        Process::Restrict(q, names) => {
            for d in derive_transitions(q, env) {
                if d.action.base().is_some_and(|b| names.contains(b)) {
                    continue;
                }
                out.insert(Derivation {
                    action: d.action,
                    comps: d.comps,
                    target: Process::Restrict(Box::new(d.target), names.clone()),
                });
            }
        }
        Process::Relabel(q, f) => {
            for d in derive_transitions(q, env) {
                out.insert(Derivation {
                    action: d.action.relabel(f),
                    comps: d.comps,
                    target: Process::Relabel(Box::new(d.target), f.clone()),
                });
            }
        }
        Process::Agent(x) => {
            if let Some(body) = env.get(x) {
                derive_into(body, env, out);
            }
        }
    }
}

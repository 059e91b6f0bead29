//! Component-labelled transition systems.
//!
//! A [`Clts`] holds states, transitions carrying an action label and a
//! nonempty set of components, a set `B` of blocking actions and an initial
//! state. The non-interference axiom is not assumed; [`Clts::validate`]
//! checks it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccs::{fmt_components, Action, Component, Components};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: TransitionId,
    pub source: StateId,
    pub label: Action,
    pub comps: Components,
    pub target: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CltsError {
    #[error("system has no states")]
    NoStates,
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("unknown transition {0}")]
    UnknownTransition(TransitionId),
    #[error("transition ids must be 0..{expected} without gaps, found {found}")]
    TransitionIds { expected: usize, found: TransitionId },
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// A failure of the well-formedness conditions checked by [`Clts::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// The transition has an empty component set.
    EmptyComponents { transition: TransitionId },
    /// `t` and `v` leave the same state with disjoint components, but no
    /// transition from `target(v)` has the label and components of `t`.
    NonInterference { t: TransitionId, v: TransitionId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyComponents { transition } => write!(f, "{transition} has no components"),
            Violation::NonInterference { t, v } => {
                write!(f, "({t}, {v}): {t} is not preserved by the concurrent {v}")
            }
        }
    }
}

/// The tasks `T_σ = {t | σ ∈ comps(t)}` for every component `σ` that occurs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskFamily {
    pub tasks: BTreeMap<Component, BTreeSet<TransitionId>>,
}

impl TaskFamily {
    pub fn get(&self, sigma: &Component) -> Option<&BTreeSet<TransitionId>> {
        self.tasks.get(sigma)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Component, &BTreeSet<TransitionId>)> {
        self.tasks.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clts {
    states: Vec<String>,
    transitions: Vec<Transition>,
    initial: StateId,
    blocking: BTreeSet<Action>,
    outgoing: Vec<Vec<TransitionId>>,
}

impl Clts {
    /// Builds a system from state display names and transitions.
    /// Transition ids must be `0..n`; they are sorted into place.
    pub fn new(
        states: Vec<String>,
        initial: StateId,
        blocking: BTreeSet<Action>,
        mut transitions: Vec<Transition>,
    ) -> Result<Self, CltsError> {
        if states.is_empty() {
            return Err(CltsError::NoStates);
        }
        let n = states.len();
        if initial.0 >= n {
            return Err(CltsError::UnknownState(initial));
        }
        transitions.sort_by_key(|t| t.id);
        let mut outgoing = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            if t.id.0 != i {
                return Err(CltsError::TransitionIds { expected: transitions.len(), found: t.id });
            }
            for s in [t.source, t.target] {
                if s.0 >= n {
                    return Err(CltsError::UnknownState(s));
                }
            }
            outgoing[t.source.0].push(t.id);
        }
        Ok(Clts { states, transitions, initial, blocking, outgoing })
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn blocking(&self) -> &BTreeSet<Action> {
        &self.blocking
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn contains_state(&self, s: StateId) -> bool {
        s.0 < self.states.len()
    }

    pub fn transition(&self, t: TransitionId) -> Result<&Transition, CltsError> {
        self.transitions.get(t.0).ok_or(CltsError::UnknownTransition(t))
    }

    /// Panics on an unknown id; for ids already checked.
    pub fn tr(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    /// Outgoing transitions of `s` in id order.
    pub fn outgoing(&self, s: StateId) -> &[TransitionId] {
        &self.outgoing[s.0]
    }

    pub fn is_blocking(&self, label: &Action) -> bool {
        self.blocking.contains(label)
    }

    pub fn is_nonblocking(&self, t: TransitionId) -> bool {
        !self.is_blocking(&self.tr(t).label)
    }

    /// Transitions leaving `s` whose label is not in `B`.
    pub fn enabled_nonblocking(&self, s: StateId) -> Result<Vec<TransitionId>, CltsError> {
        if !self.contains_state(s) {
            return Err(CltsError::UnknownState(s));
        }
        Ok(self.nonblocking_from(s).collect())
    }

    pub(crate) fn nonblocking_from(&self, s: StateId) -> impl Iterator<Item = TransitionId> + '_ {
        self.outgoing[s.0].iter().copied().filter(move |&t| self.is_nonblocking(t))
    }

    /// `t ⌣ u`: the component sets are disjoint.
    pub fn concurrent(&self, t: TransitionId, u: TransitionId) -> Result<bool, CltsError> {
        let a = self.transition(t)?;
        let b = self.transition(u)?;
        Ok(a.comps.is_disjoint(&b.comps))
    }

    pub(crate) fn interferes(&self, t: TransitionId, u: TransitionId) -> bool {
        !self.tr(t).comps.is_disjoint(&self.tr(u).comps)
    }

    pub fn component_tasks(&self) -> TaskFamily {
        let mut tasks: BTreeMap<Component, BTreeSet<TransitionId>> = BTreeMap::new();
        for t in &self.transitions {
            for c in &t.comps {
                tasks.entry(c.clone()).or_default().insert(t.id);
            }
        }
        TaskFamily { tasks }
    }

    /// Checks nonempty component sets and the non-interference axiom: for
    /// all `t`, `v` with a common source and disjoint components there is a
    /// `u` from `target(v)` with the label and components of `t`.
    ///
    /// Brute force over all pairs, `O(|Tr|² · out-degree)`.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        for t in &self.transitions {
            if t.comps.is_empty() {
                violations.push(Violation::EmptyComponents { transition: t.id });
            }
        }
        for t in &self.transitions {
            for &v in self.outgoing(t.source) {
                let v = self.tr(v);
                if !t.comps.is_disjoint(&v.comps) {
                    continue;
                }
                let preserved = self.outgoing(v.target).iter().any(|&u| {
                    let u = self.tr(u);
                    u.label == t.label && u.comps == t.comps
                });
                if !preserved {
                    violations.push(Violation::NonInterference { t: t.id, v: v.id });
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Graphviz rendering: goal states filled, a point node with a short
    /// arrow marking the initial state, edges labelled `action / {comps}`.
    pub fn export_dot(&self, goal: &BTreeSet<StateId>) -> String {
        let mut out = String::from("digraph clts {\n  rankdir=LR;\n  node [shape=circle];\n");
        out.push_str("  init [shape=point, width=0];\n");
        for s in self.states() {
            let name = escape(self.state_name(s));
            if goal.contains(&s) {
                let _ = writeln!(out, "  {} [label=\"{}\", style=filled, fillcolor=gray];", s.0, name);
            } else {
                let _ = writeln!(out, "  {} [label=\"{}\"];", s.0, name);
            }
        }
        let _ = writeln!(out, "  init -> {};", self.initial.0);
        for t in &self.transitions {
            let label = escape(&format!("{} / {}", t.label, fmt_components(&t.comps)));
            let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", t.source.0, t.target.0, label);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> CltsJson {
        CltsJson {
            states: self.states.clone(),
            initial: self.initial.0,
            blocking: self.blocking.iter().cloned().collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionJson {
                    id: t.id.0,
                    src: t.source.0,
                    act: t.label.clone(),
                    comps: t.comps.iter().cloned().collect(),
                    tgt: t.target.0,
                })
                .collect(),
        }
    }

    pub fn from_json(json: CltsJson) -> Result<Self, CltsError> {
        let transitions = json
            .transitions
            .into_iter()
            .map(|t| Transition {
                id: TransitionId(t.id),
                source: StateId(t.src),
                label: t.act,
                comps: t.comps.into_iter().collect(),
                target: StateId(t.tgt),
            })
            .collect();
        Clts::new(json.states, StateId(json.initial), json.blocking.into_iter().collect(), transitions)
    }

    pub fn from_json_str(text: &str) -> Result<Self, CltsError> {
        let json: CltsJson = serde_json::from_str(text).map_err(|e| CltsError::Json(e.to_string()))?;
        Self::from_json(json)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("CLTS JSON is always serialisable")
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The on-disk CLTS format:
///
/// ```json
/// {"states": ["1", "2"], "initial": 0, "blocking": ["a"],
///  "transitions": [{"id": 0, "src": 0, "act": "cr", "comps": [""], "tgt": 1}]}
/// ```
///
/// States are display names addressed by position. Actions are written
/// `a`, `'a` or `tau`; components are strings over `L`/`R`, `""` being ε.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CltsJson {
    pub states: Vec<String>,
    pub initial: usize,
    #[serde(default)]
    pub blocking: Vec<Action>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub id: usize,
    pub src: usize,
    pub act: Action,
    pub comps: Vec<Component>,
    pub tgt: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comps(codes: &[&str]) -> Components {
        codes.iter().map(|c| c.parse().unwrap()).collect()
    }

    fn tr(id: usize, src: usize, act: &str, c: &[&str], tgt: usize) -> Transition {
        Transition {
            id: TransitionId(id),
            source: StateId(src),
            label: act.parse().unwrap(),
            comps: comps(c),
            target: StateId(tgt),
        }
    }

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn violating_fixture_reports_the_pair() {
        // s0 --a,{L}--> s1, s0 --b,{R}--> s2, and s2 has no a-step.
        let c = Clts::new(
            names(3),
            StateId(0),
            BTreeSet::new(),
            vec![tr(0, 0, "a", &["L"], 1), tr(1, 0, "b", &["R"], 2), tr(2, 1, "b", &["R"], 1)],
        )
        .unwrap();
        let v = c.validate().unwrap_err();
        assert_eq!(v, vec![Violation::NonInterference { t: TransitionId(0), v: TransitionId(1) }]);
    }

    #[test]
    fn empty_system_is_valid() {
        let c = Clts::new(names(1), StateId(0), BTreeSet::new(), vec![]).unwrap();
        assert!(c.validate().is_ok());
        assert!(c.component_tasks().is_empty());
    }

    #[test]
    fn empty_component_set_is_flagged() {
        let c = Clts::new(names(1), StateId(0), BTreeSet::new(), vec![tr(0, 0, "a", &[], 0)]).unwrap();
        assert_eq!(c.validate().unwrap_err(), vec![Violation::EmptyComponents { transition: TransitionId(0) }]);
    }

    #[test]
    fn structural_errors() {
        assert_eq!(Clts::new(vec![], StateId(0), BTreeSet::new(), vec![]).unwrap_err(), CltsError::NoStates);
        assert_eq!(
            Clts::new(names(1), StateId(0), BTreeSet::new(), vec![tr(0, 0, "a", &[""], 3)]).unwrap_err(),
            CltsError::UnknownState(StateId(3))
        );
        assert!(matches!(
            Clts::new(names(1), StateId(0), BTreeSet::new(), vec![tr(1, 0, "a", &[""], 0)]).unwrap_err(),
            CltsError::TransitionIds { .. }
        ));
    }

    #[test]
    fn concurrency_is_disjointness() {
        let c = Clts::new(
            names(2),
            StateId(0),
            BTreeSet::new(),
            vec![tr(0, 0, "a", &["L"], 0), tr(1, 0, "tau", &["R"], 1), tr(2, 0, "b", &["L", "R"], 0)],
        )
        .unwrap();
        assert!(c.concurrent(TransitionId(0), TransitionId(1)).unwrap());
        assert!(!c.concurrent(TransitionId(0), TransitionId(2)).unwrap());
        assert!(!c.concurrent(TransitionId(1), TransitionId(1)).unwrap());
        assert_eq!(
            c.concurrent(TransitionId(0), TransitionId(9)).unwrap_err(),
            CltsError::UnknownTransition(TransitionId(9))
        );
    }

    #[test]
    fn single_transition_single_task() {
        let c = Clts::new(names(2), StateId(0), BTreeSet::new(), vec![tr(0, 0, "cr", &[""], 1)]).unwrap();
        let tk = c.component_tasks();
        assert_eq!(tk.len(), 1);
        assert_eq!(tk.get(&Component::root()), Some(&BTreeSet::from([TransitionId(0)])));
    }

    #[test]
    fn enabled_respects_blocking() {
        let c = Clts::new(
            names(2),
            StateId(0),
            BTreeSet::from(["r0".parse().unwrap()]),
            vec![tr(0, 0, "r0", &[""], 1), tr(1, 0, "tau", &[""], 1)],
        )
        .unwrap();
        assert_eq!(c.enabled_nonblocking(StateId(0)).unwrap(), vec![TransitionId(1)]);
        assert_eq!(c.enabled_nonblocking(StateId(1)).unwrap(), vec![]);
        assert_eq!(c.enabled_nonblocking(StateId(7)).unwrap_err(), CltsError::UnknownState(StateId(7)));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"states":["1","2"],"initial":0,"blocking":["'a"],
            "transitions":[{"id":0,"src":0,"act":"cr","comps":[""],"tgt":1},
                           {"id":1,"src":1,"act":"'a","comps":["RL","L"],"tgt":1}]}"#;
        let c = Clts::from_json_str(text).unwrap();
        assert_eq!(c.tr(TransitionId(1)).comps, comps(&["L", "RL"]));
        assert!(c.is_blocking(&Action::coname("a")));
        assert_eq!(Clts::from_json_str(&c.to_json_string()).unwrap(), c);
        assert!(matches!(Clts::from_json_str("{\"states\":[]}"), Err(CltsError::Json(_))));
        assert!(matches!(
            Clts::from_json_str(r#"{"states":["1"],"initial":0,"transitions":[{"id":0,"src":0,"act":"a","comps":["X"],"tgt":0}]}"#),
            Err(CltsError::Json(_))
        ));
    }

    #[test]
    fn dot_shading() {
        let c = Clts::new(names(2), StateId(0), BTreeSet::new(), vec![tr(0, 0, "cr", &[""], 1)]).unwrap();
        let dot = c.export_dot(&BTreeSet::from([StateId(1)]));
        assert!(dot.contains("1 [label=\"2\", style=filled"));
        assert!(dot.contains("0 -> 1 [label=\"cr / {ε}\"]"));
        assert!(dot.contains("init -> 0;"));
        assert!(!c.export_dot(&BTreeSet::new()).contains("filled"));
    }
}

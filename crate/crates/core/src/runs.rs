//! Finite runs and lassos, and the completeness criteria evaluated on them.
//!
//! A lasso `prefix · cycle^ω` is decided through finite characterisations.
//! Every suffix of the infinite path contains the whole cycle infinitely
//! often, so for the fairness notions only the cycle matters:
//!
//! * weakly fair: each task enabled at every cycle state occurs in the cycle;
//! * strongly fair: each task enabled at some cycle state occurs in the cycle;
//! * J-fair: each task enabled at every cycle state and during every cycle
//!   transition occurs in the cycle.
//!
//! Justness is existential per occurrence, so prefix positions keep their
//! own obligations: a non-blocking transition enabled at prefix position
//! `i` needs an interfering transition after `i`, in the rest of the prefix
//! or in the cycle; one enabled at a cycle state needs one in the cycle.
//!
//! Tasks are those of fairness of components ([`Clts::component_tasks`]).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccs::Component;
use crate::clts::{Clts, StateId, TaskFamily, TransitionId};

/// A path `s0 t1 s1 … tn sn`, optionally followed by a cycle from `sn`
/// back to `sn` repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Run {
    pub start: StateId,
    pub prefix: Vec<TransitionId>,
    /// Empty for a finite run.
    pub cycle: Vec<TransitionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("unknown transition {0}")]
    UnknownTransition(TransitionId),
    #[error("{transition} does not leave {expected}")]
    NotAdjacent { transition: TransitionId, expected: StateId },
    #[error("cycle ends in {ends} instead of returning to {junction}")]
    CycleNotClosed { junction: StateId, ends: StateId },
    #[error("cannot parse run: {0}")]
    Syntax(String),
}

impl Run {
    pub fn finite(start: StateId, prefix: Vec<TransitionId>) -> Self {
        Run { start, prefix, cycle: Vec::new() }
    }

    pub fn lasso(start: StateId, prefix: Vec<TransitionId>, cycle: Vec<TransitionId>) -> Self {
        Run { start, prefix, cycle }
    }

    pub fn is_infinite(&self) -> bool {
        !self.cycle.is_empty()
    }

    /// Checks ids and source/target adjacency, including the cycle closing.
    pub fn check(&self, c: &Clts) -> Result<(), RunError> {
        if !c.contains_state(self.start) {
            return Err(RunError::UnknownState(self.start));
        }
        let mut at = self.start;
        for &t in self.prefix.iter().chain(&self.cycle) {
            let tr = c.transition(t).map_err(|_| RunError::UnknownTransition(t))?;
            if tr.source != at {
                return Err(RunError::NotAdjacent { transition: t, expected: at });
            }
            at = tr.target;
        }
        if self.is_infinite() {
            let junction = self.junction(c);
            if at != junction {
                return Err(RunError::CycleNotClosed { junction, ends: at });
            }
        }
        Ok(())
    }

    /// The states `s0 … sn` of the prefix. Assumes [`Run::check`] passed.
    pub fn prefix_states(&self, c: &Clts) -> Vec<StateId> {
        let mut out = vec![self.start];
        out.extend(self.prefix.iter().map(|&t| c.tr(t).target));
        out
    }

    /// `sn`: the last prefix state, where the cycle (if any) starts.
    pub fn junction(&self, c: &Clts) -> StateId {
        self.prefix.last().map(|&t| c.tr(t).target).unwrap_or(self.start)
    }

    /// States visited by the cycle (its sources), in order.
    pub fn cycle_states(&self, c: &Clts) -> Vec<StateId> {
        self.cycle.iter().map(|&t| c.tr(t).source).collect()
    }

    /// All states of the run.
    pub fn states(&self, c: &Clts) -> BTreeSet<StateId> {
        let mut out: BTreeSet<StateId> = self.prefix_states(c).into_iter().collect();
        out.extend(self.cycle_states(c));
        out
    }

    /// Rotates the cycle left by `k`, moving the rotated-off transitions to
    /// the end of the prefix. Denotes the same infinite path.
    pub fn rotated(&self, k: usize) -> Run {
        if self.cycle.is_empty() {
            return self.clone();
        }
        let k = k % self.cycle.len();
        let mut prefix = self.prefix.clone();
        prefix.extend_from_slice(&self.cycle[..k]);
        let mut cycle = self.cycle[k..].to_vec();
        cycle.extend_from_slice(&self.cycle[..k]);
        Run { start: self.start, prefix, cycle }
    }

    /// Repeats the cycle `times` times. Denotes the same infinite path.
    pub fn unrolled(&self, times: usize) -> Run {
        Run { start: self.start, prefix: self.prefix.clone(), cycle: self.cycle.repeat(times.max(1)) }
    }

    pub fn to_json(&self, c: &Clts) -> RunJson {
        let mut prefix = vec![self.start.to_string()];
        for &t in &self.prefix {
            prefix.push(t.to_string());
            prefix.push(c.tr(t).target.to_string());
        }
        let mut cycle = Vec::new();
        for &t in &self.cycle {
            cycle.push(t.to_string());
            cycle.push(c.tr(t).target.to_string());
        }
        RunJson { prefix, cycle }
    }

    pub fn from_json(json: &RunJson) -> Result<Run, RunError> {
        let mut items = json.prefix.iter();
        let start = parse_state(items.next().ok_or_else(|| RunError::Syntax("empty prefix".into()))?)?;
        let mut prefix = Vec::new();
        let mut states = vec![start];
        while let Some(t) = items.next() {
            prefix.push(parse_transition(t)?);
            let s = items.next().ok_or_else(|| RunError::Syntax(format!("{t} has no target state")))?;
            states.push(parse_state(s)?);
        }
        let mut cycle = Vec::new();
        let mut items = json.cycle.iter();
        while let Some(t) = items.next() {
            cycle.push(parse_transition(t)?);
            let s = items.next().ok_or_else(|| RunError::Syntax(format!("{t} has no target state")))?;
            parse_state(s)?;
        }
        Ok(Run { start, prefix, cycle })
    }

    /// Parses and checks a run against `c`, also checking that the states
    /// written between transitions are the actual targets.
    pub fn parse_in(text: &str, c: &Clts) -> Result<Run, RunError> {
        let (run, listed) = parse_text(text)?;
        run.check(c)?;
        let mut actual = run.prefix_states(c);
        let junction = run.junction(c);
        actual.extend(run.cycle.iter().map(|&t| c.tr(t).target));
        let mut want = listed.prefix;
        want.extend(listed.cycle_targets);
        if let Some(cs) = listed.cycle_start {
            if cs != junction {
                return Err(RunError::Syntax(format!("cycle must start at {junction}, not {cs}")));
            }
        }
        if want != actual {
            return Err(RunError::Syntax("listed states do not match transition targets".into()));
        }
        Ok(run)
    }

    /// Formats as `s0 -t3-> s1 @ cycle: s1 -t7-> s1`.
    pub fn display<'a>(&'a self, c: &'a Clts) -> RunDisplay<'a> {
        RunDisplay { run: self, clts: c }
    }
}

pub struct RunDisplay<'a> {
    run: &'a Run,
    clts: &'a Clts,
}

impl fmt::Display for RunDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.clts;
        write!(f, "{}", self.run.start)?;
        for &t in &self.run.prefix {
            write!(f, " -{}-> {}", t, c.tr(t).target)?;
        }
        if self.run.is_infinite() {
            write!(f, " @ cycle: {}", self.run.junction(c))?;
            for &t in &self.run.cycle {
                write!(f, " -{}-> {}", t, c.tr(t).target)?;
            }
        }
        Ok(())
    }
}

/// `{"prefix": ["s0", "t3", "s1"], "cycle": ["t7", "s1"]}`: the prefix
/// alternates states and transitions; the cycle lists transition/target
/// pairs starting from the last prefix state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunJson {
    pub prefix: Vec<String>,
    #[serde(default)]
    pub cycle: Vec<String>,
}

fn parse_state(s: &str) -> Result<StateId, RunError> {
    let digits = s.strip_prefix('s').unwrap_or(s);
    digits.parse().map(StateId).map_err(|_| RunError::Syntax(format!("bad state `{s}`")))
}

fn parse_transition(s: &str) -> Result<TransitionId, RunError> {
    let digits = s.strip_prefix('t').unwrap_or(s);
    digits.parse().map(TransitionId).map_err(|_| RunError::Syntax(format!("bad transition `{s}`")))
}

struct Listed {
    prefix: Vec<StateId>,
    cycle_start: Option<StateId>,
    cycle_targets: Vec<StateId>,
}

fn parse_chain(text: &str) -> Result<(Vec<StateId>, Vec<TransitionId>), RunError> {
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut tokens = text.split_whitespace();
    let first = tokens.next().ok_or_else(|| RunError::Syntax("missing start state".into()))?;
    states.push(parse_state(first)?);
    while let Some(arrow) = tokens.next() {
        let inner = arrow
            .strip_prefix('-')
            .and_then(|a| a.strip_suffix("->"))
            .ok_or_else(|| RunError::Syntax(format!("expected `-tN->`, found `{arrow}`")))?;
        transitions.push(parse_transition(inner)?);
        let s = tokens.next().ok_or_else(|| RunError::Syntax(format!("{arrow} has no target")))?;
        states.push(parse_state(s)?);
    }
    Ok((states, transitions))
}

fn parse_text(text: &str) -> Result<(Run, Listed), RunError> {
    let (head, tail) = match text.split_once('@') {
        Some((h, t)) => (h, Some(t)),
        None => (text, None),
    };
    let (states, prefix) = parse_chain(head)?;
    let mut listed = Listed { prefix: states.clone(), cycle_start: None, cycle_targets: Vec::new() };
    let mut cycle = Vec::new();
    if let Some(tail) = tail {
        let tail = tail.trim();
        let tail = tail
            .strip_prefix("cycle:")
            .ok_or_else(|| RunError::Syntax("expected `cycle:` after `@`".into()))?;
        let (cstates, ctrans) = parse_chain(tail)?;
        if ctrans.is_empty() {
            return Err(RunError::Syntax("cycle has no transitions".into()));
        }
        listed.cycle_start = Some(cstates[0]);
        listed.cycle_targets = cstates[1..].to_vec();
        cycle = ctrans;
    }
    Ok((Run { start: states[0], prefix, cycle }, listed))
}

impl FromStr for Run {
    type Err = RunError;

    /// Parses the text form without a system to check against.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_text(s).map(|(r, _)| r)
    }
}

/// The criteria a run satisfies, with a witness for each one it violates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub progressing: bool,
    pub just: bool,
    pub j_fair: bool,
    pub weakly_fair: bool,
    pub strongly_fair: bool,
    pub witnesses: Vec<Witness>,
}

/// Why a run violates a criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// The finite run ends in `state`, which enables the non-blocking `transition`.
    Stuck { state: StateId, transition: TransitionId },
    /// `transition` is enabled at run position `position` (counting prefix
    /// states first, then cycle states) and nothing after it interferes.
    Unjust { position: usize, state: StateId, transition: TransitionId },
    /// The task of `component` is enabled as required at `state` but never occurs.
    Unfair { notion: Fairness, component: Component, state: StateId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fairness {
    Weak,
    Strong,
    J,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Stuck { state, transition } => {
                write!(f, "not progressing: ends in {state}, which enables non-blocking {transition}")
            }
            Witness::Unjust { position, state, transition } => write!(
                f,
                "not just: {transition} enabled at {state} (position {position}) is never interfered with"
            ),
            Witness::Unfair { notion, component, state } => {
                let what = match notion {
                    Fairness::Weak => "not weakly fair: perpetually enabled",
                    Fairness::Strong => "not strongly fair: relentlessly enabled",
                    Fairness::J => "not J-fair: continuously enabled",
                };
                write!(f, "{what} task of component {component} (e.g. at {state}) never occurs")
            }
        }
    }
}

pub fn is_progressing(c: &Clts, r: &Run) -> Result<bool, RunError> {
    r.check(c)?;
    Ok(stuck_witness(c, r).is_none())
}

fn stuck_witness(c: &Clts, r: &Run) -> Option<Witness> {
    if r.is_infinite() {
        return None;
    }
    let last = r.junction(c);
    c.nonblocking_from(last).next().map(|t| Witness::Stuck { state: last, transition: t })
}

pub fn is_just(c: &Clts, r: &Run) -> Result<bool, RunError> {
    r.check(c)?;
    Ok(unjust_witness(c, r).is_none())
}

fn unjust_witness(c: &Clts, r: &Run) -> Option<Witness> {
    let states = r.prefix_states(c);
    // Obligations at prefix position i: any later prefix transition or any
    // cycle transition may discharge them.
    for (i, &s) in states.iter().enumerate() {
        for t in c.nonblocking_from(s) {
            let later = r.prefix[i..].iter().chain(&r.cycle);
            if !later.clone().any(|&u| c.interferes(t, u)) {
                return Some(Witness::Unjust { position: i, state: s, transition: t });
            }
        }
    }
    for (j, s) in r.cycle_states(c).into_iter().enumerate() {
        for t in c.nonblocking_from(s) {
            if !r.cycle.iter().any(|&u| c.interferes(t, u)) {
                return Some(Witness::Unjust { position: states.len() + j, state: s, transition: t });
            }
        }
    }
    None
}

fn task_enabled_at(c: &Clts, task: &BTreeSet<TransitionId>, s: StateId) -> bool {
    c.nonblocking_from(s).any(|t| task.contains(&t))
}

fn task_enabled_during(c: &Clts, task: &BTreeSet<TransitionId>, u: TransitionId) -> bool {
    c.nonblocking_from(c.tr(u).source)
        .any(|t| task.contains(&t) && !c.interferes(t, u))
}

fn occurs(task: &BTreeSet<TransitionId>, transitions: &[TransitionId]) -> bool {
    transitions.iter().any(|t| task.contains(t))
}

/// For a finite run every fairness notion reduces to the last state
/// enabling no task.
fn unfair_finite(c: &Clts, r: &Run, tk: &TaskFamily, notion: Fairness) -> Option<Witness> {
    let last = r.junction(c);
    tk.iter()
        .find(|(_, task)| task_enabled_at(c, task, last))
        .map(|(sigma, _)| Witness::Unfair { notion, component: sigma.clone(), state: last })
}

fn unfair_witness(c: &Clts, r: &Run, tk: &TaskFamily, notion: Fairness) -> Option<Witness> {
    if !r.is_infinite() {
        return unfair_finite(c, r, tk, notion);
    }
    let states = r.cycle_states(c);
    for (sigma, task) in tk.iter() {
        if occurs(task, &r.cycle) {
            continue;
        }
        let enabled = |s: &StateId| task_enabled_at(c, task, *s);
        let obliged = match notion {
            Fairness::Weak => states.iter().all(enabled).then(|| states[0]),
            Fairness::Strong => states.iter().copied().find(|s| enabled(s)),
            Fairness::J => (states.iter().all(enabled)
                && r.cycle.iter().all(|&u| task_enabled_during(c, task, u)))
            .then(|| states[0]),
        };
        if let Some(state) = obliged {
            return Some(Witness::Unfair { notion, component: sigma.clone(), state });
        }
    }
    None
}

pub fn is_weakly_fair(c: &Clts, r: &Run, tk: &TaskFamily) -> Result<bool, RunError> {
    r.check(c)?;
    Ok(unfair_witness(c, r, tk, Fairness::Weak).is_none())
}

pub fn is_strongly_fair(c: &Clts, r: &Run, tk: &TaskFamily) -> Result<bool, RunError> {
    r.check(c)?;
    Ok(unfair_witness(c, r, tk, Fairness::Strong).is_none())
}

pub fn is_j_fair(c: &Clts, r: &Run, tk: &TaskFamily) -> Result<bool, RunError> {
    r.check(c)?;
    Ok(unfair_witness(c, r, tk, Fairness::J).is_none())
}

/// Evaluates all five criteria with the component tasks of `c`.
pub fn classify(c: &Clts, r: &Run) -> Result<CriteriaReport, RunError> {
    r.check(c)?;
    let tk = c.component_tasks();
    let checks = [
        stuck_witness(c, r),
        unjust_witness(c, r),
        unfair_witness(c, r, &tk, Fairness::J),
        unfair_witness(c, r, &tk, Fairness::Weak),
        unfair_witness(c, r, &tk, Fairness::Strong),
    ];
    let report = CriteriaReport {
        progressing: checks[0].is_none(),
        just: checks[1].is_none(),
        j_fair: checks[2].is_none(),
        weakly_fair: checks[3].is_none(),
        strongly_fair: checks[4].is_none(),
        witnesses: checks.into_iter().flatten().collect(),
    };
    debug_assert!(!report.strongly_fair || report.weakly_fair);
    debug_assert!(!report.weakly_fair || report.j_fair);
    debug_assert!(!report.just || report.progressing);
    // J-fair ⇒ just relies on the non-interference axiom.
    debug_assert!(!report.j_fair || report.just || c.validate().is_err());
    Ok(report)
}

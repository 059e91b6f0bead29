//! Liveness checking: does every run that counts under a completeness
//! criterion visit a goal state?
//!
//! A property fails exactly when some run avoiding the goal satisfies the
//! criterion, so the checker searches for such a run inside the part of
//! the system reachable from the initial state without touching the goal.
//!
//! Finite counterexamples are paths to a state enabling no non-blocking
//! transition (for justness, additionally discharging every obligation met
//! on the way). Infinite ones are lassos whose cycle traverses a strongly
//! connected set of states together with all transitions among them. Such
//! supports are found by pruning: start from the strongly connected
//! components, drop states whose obligations cannot be met inside the
//! current set, split again, repeat until stable.
//!
//! Full fairness is not a predicate on runs. It is checked as: every
//! reachable goal-avoiding state can still reach the goal, and none of
//! them is a dead end (enabling no non-blocking transition).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccs::Components;
use crate::clts::{Clts, StateId, TransitionId};
use crate::runs::{classify, CriteriaReport, Run, RunJson};

/// Completeness criteria, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Empty,
    Progress,
    Justness,
    JFairness,
    WeakFairness,
    StrongFairness,
    FullFairness,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::Empty,
        Criterion::Progress,
        Criterion::Justness,
        Criterion::JFairness,
        Criterion::WeakFairness,
        Criterion::StrongFairness,
        Criterion::FullFairness,
    ];

    /// Human-readable name as used in tables.
    pub fn title(self) -> &'static str {
        match self {
            Criterion::Empty => "∅",
            Criterion::Progress => "progress",
            Criterion::Justness => "justness",
            Criterion::JFairness => "J-fairness",
            Criterion::WeakFairness => "weak fairness",
            Criterion::StrongFairness => "strong fairness",
            Criterion::FullFairness => "full fairness",
        }
    }

    /// Whether a run with this report counts under the criterion.
    /// Full fairness does not select runs and yields `None`.
    pub fn admits(self, report: &CriteriaReport) -> Option<bool> {
        Some(match self {
            Criterion::Empty => true,
            Criterion::Progress => report.progressing,
            Criterion::Justness => report.just,
            Criterion::JFairness => report.j_fair,
            Criterion::WeakFairness => report.weakly_fair,
            Criterion::StrongFairness => report.strongly_fair,
            Criterion::FullFairness => return None,
        })
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Empty => "empty",
            Criterion::Progress => "progress",
            Criterion::Justness => "justness",
            Criterion::JFairness => "j-fairness",
            Criterion::WeakFairness => "weak-fairness",
            Criterion::StrongFairness => "strong-fairness",
            Criterion::FullFairness => "full-fairness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown criterion `{0}` (expected one of empty, progress, justness, j-fairness, weak-fairness, strong-fairness, full-fairness)")]
pub struct UnknownCriterion(pub String);

impl FromStr for Criterion {
    type Err = UnknownCriterion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Ok(match key.as_str() {
            "empty" | "none" | "∅" => Criterion::Empty,
            "progress" => Criterion::Progress,
            "justness" => Criterion::Justness,
            "j-fairness" | "jfairness" => Criterion::JFairness,
            "weak-fairness" | "weak" => Criterion::WeakFairness,
            "strong-fairness" | "strong" => Criterion::StrongFairness,
            "full-fairness" | "full" => Criterion::FullFairness,
            _ => return Err(UnknownCriterion(s.to_owned())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LivenessError {
    #[error("goal refers to unknown state {0}")]
    UnknownGoalState(StateId),
    #[error("full fairness does not select runs; use check_full_fairness")]
    NotRunBased,
    #[error("internal error: assembled counterexample {run} does not satisfy {criterion}")]
    SelfCheck { criterion: Criterion, run: String },
}

/// Metadata attached to a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Note {
    /// The system fails the non-interference check; the run-based
    /// definitions were still evaluated as stated.
    Property1Unverified,
    /// Full fairness is checked as "the goal stays reachable from every
    /// goal-avoiding reachable state, using all transitions, and no such
    /// state enables zero non-blocking transitions".
    FullFairnessOperationalized,
    /// Full-fairness counterexample: the goal is unreachable from `state`.
    GoalUnreachable { state: StateId },
    /// Full-fairness counterexample: `state` is outside the goal and
    /// enables no non-blocking transition.
    DeadEnd { state: StateId },
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Note::Property1Unverified => write!(f, "non-interference property unverified for this system"),
            Note::FullFairnessOperationalized => write!(
                f,
                "full fairness operationalized: goal reachable (all transitions) from every reachable goal-avoiding state, none of which is a non-blocking dead end"
            ),
            Note::GoalUnreachable { state } => write!(f, "goal unreachable from {state}"),
            Note::DeadEnd { state } => write!(f, "{state} enables no non-blocking transition"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: Criterion,
    pub goal: BTreeSet<StateId>,
    pub holds: bool,
    pub counterexample: Option<Run>,
    pub notes: Vec<Note>,
}

impl Verdict {
    pub fn sign(&self) -> char {
        if self.holds {
            '+'
        } else {
            '-'
        }
    }
}

/// Machine-readable verdict with the counterexample in run JSON form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub criterion: Criterion,
    pub goal: Vec<usize>,
    pub holds: bool,
    pub counterexample: Option<RunJson>,
    pub notes: Vec<Note>,
}

impl Verdict {
    pub fn to_json(&self, c: &Clts) -> VerdictJson {
        VerdictJson {
            criterion: self.criterion,
            goal: self.goal.iter().map(|s| s.0).collect(),
            holds: self.holds,
            counterexample: self.counterexample.as_ref().map(|r| r.to_json(c)),
            notes: self.notes.clone(),
        }
    }
}

fn check_goal(c: &Clts, goal: &BTreeSet<StateId>) -> Result<(), LivenessError> {
    match goal.iter().find(|s| !c.contains_state(**s)) {
        Some(&s) => Err(LivenessError::UnknownGoalState(s)),
        None => Ok(()),
    }
}

/// Search context: the goal-avoiding part of the system reachable from
/// the initial state.
struct Avoiding<'a> {
    c: &'a Clts,
    inside: Vec<bool>,
}

impl<'a> Avoiding<'a> {
    fn new(c: &'a Clts, goal: &BTreeSet<StateId>) -> Self {
        let mut inside = vec![false; c.num_states()];
        let init = c.initial();
        if !goal.contains(&init) {
            inside[init.0] = true;
            let mut queue = VecDeque::from([init]);
            while let Some(s) = queue.pop_front() {
                for &t in c.outgoing(s) {
                    let tgt = c.tr(t).target;
                    if !goal.contains(&tgt) && !inside[tgt.0] {
                        inside[tgt.0] = true;
                        queue.push_back(tgt);
                    }
                }
            }
        }
        Avoiding { c, inside }
    }

    fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    fn contains(&self, s: StateId) -> bool {
        self.inside[s.0]
    }

    /// Transitions usable by a goal-avoiding run leaving `s`, in id order.
    fn steps(&self, s: StateId) -> impl Iterator<Item = TransitionId> + '_ {
        self.c.outgoing(s).iter().copied().filter(move |&t| self.inside[self.c.tr(t).target.0])
    }

    fn is_dead(&self, s: StateId) -> bool {
        self.c.nonblocking_from(s).next().is_none()
    }

    /// Shortest path (lowest transition ids first) from the initial state
    /// to the first state satisfying `target`.
    fn path_to(&self, target: impl Fn(StateId) -> bool) -> Option<Vec<TransitionId>> {
        let init = self.c.initial();
        let mut parent: Vec<Option<TransitionId>> = vec![None; self.c.num_states()];
        let mut seen = vec![false; self.c.num_states()];
        seen[init.0] = true;
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            if target(s) {
                let mut path = Vec::new();
                let mut at = s;
                while let Some(t) = parent[at.0] {
                    path.push(t);
                    at = self.c.tr(t).source;
                }
                path.reverse();
                return Some(path);
            }
            for t in self.steps(s) {
                let tgt = self.c.tr(t).target;
                if !seen[tgt.0] {
                    seen[tgt.0] = true;
                    parent[tgt.0] = Some(t);
                    queue.push_back(tgt);
                }
            }
        }
        None
    }

    /// Non-blocking obligations at `s` whose components avoid `discharged`.
    fn obligations(&self, s: StateId, discharged: &Components) -> BTreeSet<Components> {
        self.c
            .nonblocking_from(s)
            .map(|t| self.c.tr(t).comps.clone())
            .filter(|comps| comps.is_disjoint(discharged))
            .collect()
    }

    /// Shortest path from the initial state to a state satisfying `target`
    /// such that every non-blocking transition enabled along the way is
    /// interfered with later on the path, unless its components meet
    /// `discharged`.
    fn just_path_to(&self, discharged: &Components, target: impl Fn(StateId) -> bool) -> Option<Vec<TransitionId>> {
        type Key = (StateId, BTreeSet<Components>);
        let init = self.c.initial();
        let start: Key = (init, self.obligations(init, discharged));
        let mut parent: HashMap<Key, Option<(Key, TransitionId)>> = HashMap::new();
        parent.insert(start.clone(), None);
        let mut queue = VecDeque::from([start]);
        while let Some(key) = queue.pop_front() {
            if key.1.is_empty() && target(key.0) {
                let mut path = Vec::new();
                let mut at = key;
                while let Some(Some((prev, t))) = parent.get(&at).cloned() {
                    path.push(t);
                    at = prev;
                }
                path.reverse();
                return Some(path);
            }
            for t in self.steps(key.0) {
                let tr = self.c.tr(t);
                let mut pending: BTreeSet<Components> =
                    key.1.iter().filter(|p| p.is_disjoint(&tr.comps)).cloned().collect();
                pending.extend(self.obligations(tr.target, discharged));
                let next = (tr.target, pending);
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((key.clone(), t)));
                    queue.push_back(next);
                }
            }
        }
        None
    }

    fn internal(&self, set: &BTreeSet<StateId>) -> Vec<TransitionId> {
        set.iter()
            .flat_map(|&s| self.c.outgoing(s).iter().copied())
            .filter(|&t| set.contains(&self.c.tr(t).target))
            .collect()
    }

    /// Strongly connected components of the subgraph induced by `set`.
    fn sccs(&self, set: &BTreeSet<StateId>) -> Vec<BTreeSet<StateId>> {
        let mut g: DiGraphMap<usize, ()> = DiGraphMap::new();
        for &s in set {
            g.add_node(s.0);
            for &t in self.c.outgoing(s) {
                let tgt = self.c.tr(t).target;
                if set.contains(&tgt) {
                    g.add_edge(s.0, tgt.0, ());
                }
            }
        }
        tarjan_scc(&g).into_iter().map(|comp| comp.into_iter().map(StateId).collect()).collect()
    }

    /// Maximal strongly connected supports meeting the cycle conditions:
    /// `local(s, E)` must hold at every state, `global(V, E)` for the set.
    fn supports(
        &self,
        local: impl Fn(StateId, &[TransitionId]) -> bool,
        global: impl Fn(&BTreeSet<StateId>, &[TransitionId]) -> bool,
    ) -> Vec<(BTreeSet<StateId>, Vec<TransitionId>)> {
        let all: BTreeSet<StateId> = self.c.states().filter(|&s| self.contains(s)).collect();
        let mut work = self.sccs(&all);
        let mut found = Vec::new();
        while let Some(set) = work.pop() {
            let edges = self.internal(&set);
            if edges.is_empty() {
                continue;
            }
            let bad: Vec<StateId> = set.iter().copied().filter(|&s| !local(s, &edges)).collect();
            if !bad.is_empty() {
                let rest: BTreeSet<StateId> = set.iter().copied().filter(|s| !bad.contains(s)).collect();
                work.extend(self.sccs(&rest));
                continue;
            }
            if global(&set, &edges) {
                found.push((set, edges));
            }
        }
        found.sort_by_key(|(set, _)| set.first().copied());
        found
    }

    /// A closed walk from `start` traversing every transition of `edges`.
    /// Uncovered transitions are taken lowest id first, each reached by a
    /// shortest path inside the support.
    fn covering_cycle(&self, start: StateId, edges: &[TransitionId]) -> Vec<TransitionId> {
        let mut uncovered: BTreeSet<TransitionId> = edges.iter().copied().collect();
        let mut walk = Vec::new();
        let mut at = start;
        while let Some(&next) = uncovered.iter().next() {
            let tr = self.c.tr(next);
            let path = self.path_within(edges, at, tr.source);
            for t in path.into_iter().chain([next]) {
                uncovered.remove(&t);
                walk.push(t);
            }
            at = tr.target;
        }
        walk.extend(self.path_within(edges, at, start));
        walk
    }

    fn path_within(&self, edges: &[TransitionId], from: StateId, to: StateId) -> Vec<TransitionId> {
        let mut parent: BTreeMap<StateId, TransitionId> = BTreeMap::new();
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            if s == to {
                break;
            }
            for &t in self.c.outgoing(s) {
                if !edges.contains(&t) {
                    continue;
                }
                let tgt = self.c.tr(t).target;
                if seen.insert(tgt) {
                    parent.insert(tgt, t);
                    queue.push_back(tgt);
                }
            }
        }
        let mut path = Vec::new();
        let mut at = to;
        while at != from {
            let t = parent[&at];
            path.push(t);
            at = self.c.tr(t).source;
        }
        path.reverse();
        path
    }
}

fn union_comps(c: &Clts, edges: &[TransitionId]) -> Components {
    edges.iter().flat_map(|&t| c.tr(t).comps.iter().cloned()).collect()
}

/// Searches for a run that avoids `goal` and satisfies `criterion`.
///
/// Finite counterexamples are preferred; among infinite ones the support
/// with the lowest state id wins. The result is deterministic.
pub fn find_counterexample(
    c: &Clts,
    goal: &BTreeSet<StateId>,
    criterion: Criterion,
) -> Result<Option<Run>, LivenessError> {
    check_goal(c, goal)?;
    if criterion == Criterion::FullFairness {
        return Err(LivenessError::NotRunBased);
    }
    let av = Avoiding::new(c, goal);
    if av.is_empty() {
        return Ok(None);
    }
    let init = c.initial();
    if criterion == Criterion::Empty {
        return Ok(Some(Run::finite(init, Vec::new())));
    }

    // Finite runs ending in a dead state.
    let finite = if criterion == Criterion::Justness {
        av.just_path_to(&Components::new(), |s| av.is_dead(s))
    } else {
        av.path_to(|s| av.is_dead(s))
    };
    if let Some(prefix) = finite {
        return Ok(Some(Run::finite(init, prefix)));
    }

    let tasks = c.component_tasks();
    let enabled = |sigma_task: &BTreeSet<TransitionId>, s: StateId| c.nonblocking_from(s).any(|t| sigma_task.contains(&t));
    let occurs = |task: &BTreeSet<TransitionId>, edges: &[TransitionId]| edges.iter().any(|t| task.contains(t));

    let supports = match criterion {
        Criterion::Progress => av.supports(|_, _| true, |_, _| true),
        Criterion::Justness => av.supports(
            |s, edges| {
                let k = union_comps(c, edges);
                c.nonblocking_from(s).all(|t| !c.tr(t).comps.is_disjoint(&k))
            },
            |_, _| true,
        ),
        Criterion::StrongFairness => av.supports(
            |s, edges| tasks.iter().all(|(_, task)| !enabled(task, s) || occurs(task, edges)),
            |_, _| true,
        ),
        Criterion::WeakFairness => av.supports(
            |_, _| true,
            |set, edges| {
                tasks
                    .iter()
                    .all(|(_, task)| occurs(task, edges) || !set.iter().all(|&s| enabled(task, s)))
            },
        ),
        Criterion::JFairness => av.supports(
            |_, _| true,
            |set, edges| {
                tasks.iter().all(|(_, task)| {
                    if occurs(task, edges) {
                        return true;
                    }
                    let in_states = set.iter().all(|&s| enabled(task, s));
                    let during = edges.iter().all(|&u| {
                        c.nonblocking_from(c.tr(u).source)
                            .any(|t| task.contains(&t) && c.tr(t).comps.is_disjoint(&c.tr(u).comps))
                    });
                    !(in_states && during)
                })
            },
        ),
        Criterion::Empty | Criterion::FullFairness => unreachable!("handled above"),
    };

    for (set, edges) in supports {
        let prefix = if criterion == Criterion::Justness {
            av.just_path_to(&union_comps(c, &edges), |s| set.contains(&s))
        } else {
            av.path_to(|s| set.contains(&s))
        };
        let Some(prefix) = prefix else { continue };
        let junction = prefix.last().map(|&t| c.tr(t).target).unwrap_or(init);
        let cycle = av.covering_cycle(junction, &edges);
        return Ok(Some(Run::lasso(init, prefix, cycle)));
    }
    Ok(None)
}

fn self_check(c: &Clts, goal: &BTreeSet<StateId>, criterion: Criterion, run: &Run) -> Result<(), LivenessError> {
    let fail = || LivenessError::SelfCheck { criterion, run: run.display(c).to_string() };
    let report = classify(c, run).map_err(|_| fail())?;
    if criterion.admits(&report) != Some(true) || run.states(c).iter().any(|s| goal.contains(s)) {
        return Err(fail());
    }
    Ok(())
}

/// Decides whether every run admitted by `criterion` visits `goal`.
///
/// Counterexamples are replayed through [`classify`] before being returned.
pub fn check_liveness(c: &Clts, goal: &BTreeSet<StateId>, criterion: Criterion) -> Result<Verdict, LivenessError> {
    if criterion == Criterion::FullFairness {
        return check_full_fairness(c, goal);
    }
    let counterexample = find_counterexample(c, goal, criterion)?;
    if let Some(run) = &counterexample {
        self_check(c, goal, criterion, run)?;
    }
    let mut notes = Vec::new();
    if c.validate().is_err() {
        notes.push(Note::Property1Unverified);
    }
    Ok(Verdict { criterion, goal: goal.clone(), holds: counterexample.is_none(), counterexample, notes })
}

/// Full fairness: holds iff the goal remains reachable from every
/// goal-avoiding reachable state and none of those states is a dead end.
/// The counterexample is a finite path to the first offending state in
/// breadth-first order.
pub fn check_full_fairness(c: &Clts, goal: &BTreeSet<StateId>) -> Result<Verdict, LivenessError> {
    check_goal(c, goal)?;
    let av = Avoiding::new(c, goal);

    // Backward reachability of the goal over all transitions.
    let mut reaches = vec![false; c.num_states()];
    let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); c.num_states()];
    for t in c.transitions() {
        incoming[t.target.0].push(t.source);
    }
    let mut queue: VecDeque<StateId> = goal.iter().copied().collect();
    for s in goal {
        reaches[s.0] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &incoming[s.0] {
            if !reaches[p.0] {
                reaches[p.0] = true;
                queue.push_back(p);
            }
        }
    }

    let offending = |s: StateId| av.contains(s) && (!reaches[s.0] || av.is_dead(s));
    let mut notes = vec![Note::FullFairnessOperationalized];
    if c.validate().is_err() {
        notes.push(Note::Property1Unverified);
    }
    let counterexample = if av.is_empty() {
        None
    } else {
        av.path_to(offending).map(|path| Run::finite(c.initial(), path))
    };
    if let Some(run) = &counterexample {
        let s = run.junction(c);
        notes.push(if reaches[s.0] { Note::DeadEnd { state: s } } else { Note::GoalUnreachable { state: s } });
    }
    Ok(Verdict {
        criterion: Criterion::FullFairness,
        goal: goal.clone(),
        holds: counterexample.is_none(),
        counterexample,
        notes,
    })
}

/// One column of a liveness matrix: a system with a goal.
#[derive(Debug, Clone)]
pub struct MatrixEntry<'a> {
    /// Heading shared by adjacent columns (e.g. the goal), may be empty.
    pub group: String,
    pub label: String,
    pub clts: &'a Clts,
    pub goal: BTreeSet<StateId>,
}

#[derive(Debug, Clone)]
pub struct Matrix {
    pub groups: Vec<String>,
    pub labels: Vec<String>,
    pub criteria: Vec<Criterion>,
    /// `cells[row][column]`, rows following `criteria`.
    pub cells: Vec<Vec<Result<Verdict, LivenessError>>>,
}

/// Checks every entry under every criterion.
pub fn liveness_matrix(entries: &[MatrixEntry<'_>], criteria: &[Criterion]) -> Matrix {
    let cells = criteria
        .iter()
        .map(|&k| entries.iter().map(|e| check_liveness(e.clts, &e.goal, k)).collect())
        .collect();
    Matrix {
        groups: entries.iter().map(|e| e.group.clone()).collect(),
        labels: entries.iter().map(|e| e.label.clone()).collect(),
        criteria: criteria.to_vec(),
        cells,
    }
}

impl Matrix {
    pub fn signs(&self) -> Vec<Vec<char>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|c| c.as_ref().map(Verdict::sign).unwrap_or('!')).collect())
            .collect()
    }

    /// Aligned text table: criteria as rows, one column per entry, with
    /// group headings over runs of equal groups. `!` marks a failed cell.
    pub fn render_text(&self, corner_group: &str, corner_label: &str) -> String {
        let signs = self.signs();
        let row_w = self
            .criteria
            .iter()
            .map(|k| k.title().chars().count())
            .chain([corner_group.chars().count(), corner_label.chars().count()])
            .max()
            .unwrap_or(0);
        let col_w = self.labels.iter().map(|l| l.chars().count()).max().unwrap_or(1).max(1) + 2;

        // Split columns into runs of equal group.
        let mut runs: Vec<(String, usize)> = Vec::new();
        for g in &self.groups {
            match runs.last_mut() {
                Some((name, n)) if name == g => *n += 1,
                _ => runs.push((g.clone(), 1)),
            }
        }
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));

        let mut out = String::new();
        if self.groups.iter().any(|g| !g.is_empty()) {
            out.push_str(&pad(corner_group, row_w));
            for (name, n) in &runs {
                out.push_str(" |");
                out.push_str(&pad(&format!(" {name}"), n * col_w));
            }
            out = out.trim_end().to_owned();
            out.push('\n');
        }
        let mut header = pad(corner_label, row_w);
        let mut col = 0;
        for (_, n) in &runs {
            header.push_str(" |");
            for _ in 0..*n {
                header.push_str(&pad(&format!(" {}", self.labels[col]), col_w));
                col += 1;
            }
        }
        out.push_str(header.trim_end());
        out.push('\n');
        let mut rule = "-".repeat(row_w);
        for (_, n) in &runs {
            rule.push_str("-+");
            rule.push_str(&"-".repeat(n * col_w));
        }
        out.push_str(&rule);
        out.push('\n');
        for (k, row) in self.criteria.iter().zip(&signs) {
            let mut line = pad(k.title(), row_w);
            let mut col = 0;
            for (_, n) in &runs {
                line.push_str(" |");
                for _ in 0..*n {
                    line.push_str(&pad(&format!(" {}", row[col]), col_w));
                    col += 1;
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .criteria
            .iter()
            .zip(&self.cells)
            .map(|(k, row)| {
                let cells: Vec<serde_json::Value> = row
                    .iter()
                    .zip(self.groups.iter().zip(&self.labels))
                    .map(|(cell, (g, l))| match cell {
                        Ok(v) => serde_json::json!({
                            "group": g, "label": l, "holds": v.holds, "sign": v.sign().to_string(),
                            "notes": v.notes,
                        }),
                        Err(e) => serde_json::json!({ "group": g, "label": l, "error": e.to_string() }),
                    })
                    .collect();
                serde_json::json!({ "criterion": k, "cells": cells })
            })
            .collect();
        serde_json::json!({ "rows": rows })
    }
}

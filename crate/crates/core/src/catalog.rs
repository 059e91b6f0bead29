//! Named example systems with their goal sets.
//!
//! Each entry is either CCS text (explored with `B = Act ∖ {τ}`) or a
//! hand-entered CLTS. The same systems are shipped as JSON under `data/`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccs::{explore, parse, Action, Blocking, DEFAULT_MAX_STATES};
use crate::clts::{Clts, CltsError, CltsJson, StateId, Transition, TransitionId};
use crate::liveness::{liveness_matrix, Criterion, Matrix, MatrixEntry};

pub type Goals = BTreeMap<String, BTreeSet<StateId>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown example `{name}`; available: {}", .available.join(", "))]
    UnknownExample { name: String, available: Vec<String> },
    #[error("unknown goal `{goal}` for `{example}`; available: {}", .available.join(", "))]
    UnknownGoal { example: String, goal: String, available: Vec<String> },
}

pub const NAMES: [&str; 12] = [
    "croissant",
    "alice-cataline",
    "phone-Q",
    "par-P",
    "buffer-a",
    "buffer-b",
    "buffer-c",
    "buffer-d",
    "buffer-e",
    "prog-P-counter",
    "prog-Q-counter",
    "prog-Pprime",
];

pub const PHONE_Q: &str = "X = a.X + 'b.X\nmain = (X | b.0) \\ {b}\n";
pub const PAR_P: &str = "Y = a.Y\nmain = Y | tau.0\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Ccs(&'static str),
    Drawn,
}

#[derive(Debug, Clone)]
pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
    pub source: Source,
    pub clts: Clts,
    pub goals: Goals,
}

impl Example {
    pub fn goal(&self, name: &str) -> Result<&BTreeSet<StateId>, CatalogError> {
        self.goals.get(name).ok_or_else(|| CatalogError::UnknownGoal {
            example: self.name.to_owned(),
            goal: name.to_owned(),
            available: self.goals.keys().cloned().collect(),
        })
    }

    pub fn to_json(&self) -> ExampleJson {
        ExampleJson {
            name: self.name.to_owned(),
            description: self.description.to_owned(),
            ccs: match self.source {
                Source::Ccs(text) => Some(text.to_owned()),
                Source::Drawn => None,
            },
            clts: self.clts.to_json(),
            goals: self.goals.iter().map(|(k, v)| (k.clone(), v.iter().map(|s| s.0).collect())).collect(),
        }
    }
}

/// On-disk form of an example: the CLTS fields plus metadata, so a file
/// can also be read as a plain CLTS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleJson {
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccs: Option<String>,
    #[serde(flatten)]
    pub clts: CltsJson,
    pub goals: BTreeMap<String, Vec<usize>>,
}

impl ExampleJson {
    pub fn load(self) -> Result<(Clts, Goals), CltsError> {
        let clts = Clts::from_json(self.clts)?;
        let goals = self.goals.into_iter().map(|(k, v)| (k, v.into_iter().map(StateId).collect())).collect();
        Ok((clts, goals))
    }
}

pub fn load_example(name: &str) -> Result<(Clts, Goals), CatalogError> {
    let e = example(name)?;
    Ok((e.clts, e.goals))
}

pub fn example(name: &str) -> Result<Example, CatalogError> {
    let (description, source, clts, goals) = match name {
        "croissant" => (
            "Cataline eats a croissant",
            Source::Drawn,
            drawn(2, &[], &[(0, "cr", &[""], 1)]),
            goals(&[("eaten", &[1])]),
        ),
        "alice-cataline" => (
            "Alice loops on a while Cataline, beside her, eats",
            Source::Drawn,
            drawn(2, &[], &[(0, "a", &["L"], 0), (0, "cr", &["R"], 1), (1, "a", &["L"], 1)]),
            goals(&[("eaten", &[1])]),
        ),
        "phone-Q" => {
            let c = from_ccs(PHONE_Q);
            let g = tau_targets(&c);
            ("X keeps calling on a while a partner waits on b", Source::Ccs(PHONE_Q), c, BTreeMap::from([("connected".into(), g)]))
        }
        "par-P" => {
            let c = from_ccs(PAR_P);
            let g = tau_targets(&c);
            ("an a-loop beside an independent τ", Source::Ccs(PAR_P), c, BTreeMap::from([("done".into(), g)]))
        }
        "buffer-a" | "buffer-b" | "buffer-c" | "buffer-d" | "buffer-e" => {
            let (n, trs, forward): (usize, Vec<Step>, usize) = match name {
                "buffer-a" => (5, buffer_a(), 2),
                "buffer-b" => (
                    5,
                    vec![(0, "tau", &[""], 1), (1, "r1", &[""], 2), (1, "tau", &[""], 3), (3, "tau", &[""], 4), (2, "s1", &[""], 4), (4, "tau", &[""], 0)],
                    2,
                ),
                "buffer-c" => (4, vec![(0, "tau", &[""], 1), (1, "r1", &[""], 2), (2, "s1", &[""], 3), (3, "tau", &[""], 0)], 2),
                "buffer-d" => {
                    let mut t = buffer_a();
                    t.extend([
                        (0, "i", &[""][..], 6),
                        (5, "i", &[""], 6),
                        (6, "r0", &[""], 7),
                        (7, "s0", &[""], 8),
                        (8, "tau", &[""], 5),
                    ]);
                    (9, t, 2)
                }
                _ => (
                    5,
                    vec![(0, "i", &[""], 1), (1, "tau", &[""], 2), (1, "tau", &[""], 3), (3, "s0", &[""], 4), (2, "s1", &[""], 4), (4, "tau", &[""], 0)],
                    2,
                ),
            };
            let description = match name {
                "buffer-a" => "one-bit buffer: input i, reads r0/r1, sends s0/s1",
                "buffer-b" => "one-bit buffer variant: internal choice against reading 1",
                "buffer-c" => "one-bit buffer variant: only ever reads 1",
                "buffer-d" => "one-bit buffer with a second branch that only reads 0",
                _ => "one-bit buffer variant: reads rendered internal",
            };
            (description, Source::Drawn, drawn(n, &["r0", "r1"], &trs), goals(&[("forward-1", &[forward])]))
        }
        "prog-P-counter" => ("x := 1 beside a counter, as independent threads", Source::Drawn, counter(&["L"]), counter_goals()),
        "prog-Q-counter" => ("x := 1 and the counter as cases of one loop", Source::Drawn, counter(&["L", "R"]), counter_goals()),
        "prog-Pprime" => (
            "repeat x := 1 beside repeat y := y + 1, one state",
            Source::Drawn,
            drawn(1, &[], &[(0, "set", &["L"], 0), (0, "inc", &["R"], 0)]),
            Goals::new(),
        ),
        _ => {
            return Err(CatalogError::UnknownExample {
                name: name.to_owned(),
                available: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    let name = NAMES.iter().find(|n| **n == name).copied().expect("listed");
    Ok(Example { name, description, source, clts, goals })
}

type Step = (usize, &'static str, &'static [&'static str], usize);

fn buffer_a() -> Vec<Step> {
    vec![(0, "i", &[""], 1), (1, "r1", &[""], 2), (1, "r0", &[""], 3), (3, "s0", &[""], 4), (2, "s1", &[""], 4), (4, "tau", &[""], 0)]
}

fn drawn(n: usize, blocking: &[&str], steps: &[Step]) -> Clts {
    let transitions = steps
        .iter()
        .enumerate()
        .map(|(i, &(src, act, comps, tgt))| Transition {
            id: TransitionId(i),
            source: StateId(src),
            label: act.parse().expect("catalog action"),
            comps: comps.iter().map(|c| c.parse().expect("catalog component")).collect(),
            target: StateId(tgt),
        })
        .collect();
    let blocking = blocking.iter().map(|&a| Action::name(a)).collect();
    Clts::new((1..=n).map(|i| i.to_string()).collect(), StateId(0), blocking, transitions).expect("catalog system")
}

fn goals(list: &[(&str, &[usize])]) -> Goals {
    list.iter().map(|(k, v)| (k.to_string(), v.iter().map(|&s| StateId(s)).collect())).collect()
}

fn from_ccs(text: &str) -> Clts {
    let (env, p) = parse(text).expect("catalog CCS parses");
    explore(&p, &env, &Blocking::AllVisible, DEFAULT_MAX_STATES).expect("catalog CCS explores")
}

fn tau_targets(c: &Clts) -> BTreeSet<StateId> {
    c.transitions().iter().filter(|t| t.label.is_tau()).map(|t| t.target).collect()
}

const COUNTER_MAX: usize = 7;

fn counter_state(x: usize, y: usize) -> usize {
    x * (COUNTER_MAX + 1) + y
}

/// The two-state program unfolded over `(x, y)` with `y` saturating at 7.
/// `inc` is `y := y + 1` on component R, `set` is `x := 1`.
fn counter(set_comps: &'static [&'static str]) -> Clts {
    let mut steps: Vec<Step> = Vec::new();
    for x in 0..2 {
        for y in 0..=COUNTER_MAX {
            let s = counter_state(x, y);
            steps.push((s, "inc", &["R"], counter_state(x, (y + 1).min(COUNTER_MAX))));
            if x == 0 {
                steps.push((s, "set", set_comps, counter_state(1, y)));
            }
        }
    }
    let c = drawn(2 * (COUNTER_MAX + 1), &[], &steps);
    let names = (0..2).flat_map(|x| (0..=COUNTER_MAX).map(move |y| format!("x={x},y={y}"))).collect();
    Clts::new(names, c.initial(), c.blocking().clone(), c.transitions().to_vec()).expect("counter system")
}

fn counter_goals() -> Goals {
    let y7 = (0..2).map(|x| StateId(counter_state(x, COUNTER_MAX))).collect();
    let x1 = (0..=COUNTER_MAX).map(|y| StateId(counter_state(1, y))).collect();
    BTreeMap::from([("y7".into(), y7), ("x1".into(), x1)])
}

/// Rows of the counter-program table, strongest first.
pub const FIG3_CRITERIA: [Criterion; 4] =
    [Criterion::FullFairness, Criterion::Justness, Criterion::Progress, Criterion::Empty];

/// Liveness of `y = 7` and `x = 1` for both counter programs under full
/// fairness, justness, progress and no assumption.
pub fn fig3_matrix() -> Matrix {
    let p = example("prog-P-counter").expect("listed");
    let q = example("prog-Q-counter").expect("listed");
    let mut entries = Vec::new();
    for (goal, heading) in [("y7", "y=7"), ("x1", "x=1")] {
        for (label, e) in [("P", &p), ("Q", &q)] {
            entries.push(MatrixEntry {
                group: heading.to_owned(),
                label: label.to_owned(),
                clts: &e.clts,
                goal: e.goals[goal].clone(),
            });
        }
    }
    liveness_matrix(&entries, &FIG3_CRITERIA)
}

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use justcheck::clts::{Clts, StateId, Transition, TransitionId};
use justcheck::runs::{classify, CriteriaReport, Run};
use justcheck::liveness::Criterion;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn tr(id: usize, src: usize, act: &str, comps: &[&str], tgt: usize) -> Transition {
    Transition {
        id: TransitionId(id),
        source: StateId(src),
        label: act.parse().unwrap(),
        comps: comps.iter().map(|c| c.parse().unwrap()).collect(),
        target: StateId(tgt),
    }
}

pub fn build(n: usize, blocking: &[&str], trs: Vec<Transition>) -> Clts {
    Clts::new(
        (0..n).map(|i| i.to_string()).collect(),
        StateId(0),
        blocking.iter().map(|a| a.parse().unwrap()).collect(),
        trs,
    )
    .unwrap()
}

const COMPONENTS: [&str; 4] = ["LL", "LR", "RL", "RR"];
const LABELS: [&str; 3] = ["a", "b", "tau"];

/// A random system that satisfies the non-interference property, or
/// `None` if closing it under the property needs more than
/// `max_transitions` transitions. `a` is blocking.
pub fn random_validated(rng: &mut StdRng, max_states: usize, max_transitions: usize) -> Option<Clts> {
    let n = rng.gen_range(1..=max_states);
    let m = rng.gen_range(0..=max_transitions.min(2 * n + 2));
    let mut raw: Vec<(usize, &str, Vec<&str>, usize)> = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=2);
            let comps: Vec<&str> = COMPONENTS.choose_multiple(rng, k).copied().collect();
            (rng.gen_range(0..n), *LABELS.choose(rng).unwrap(), comps, rng.gen_range(0..n))
        })
        .collect();
    loop {
        let trs = raw.iter().enumerate().map(|(i, (s, a, c, t))| tr(i, *s, a, c, *t)).collect();
        let c = build(n, &["a"], trs);
        match c.validate() {
            Ok(()) => return Some(c),
            Err(violations) => {
                let justcheck::clts::Violation::NonInterference { t, v } = violations[0] else {
                    unreachable!("components are never empty")
                };
                let (t, v) = (c.tr(t).clone(), c.tr(v).clone());
                let comps: Vec<&str> = COMPONENTS
                    .iter()
                    .copied()
                    .filter(|x| t.comps.contains(&x.parse().unwrap()))
                    .collect();
                let label = LABELS.iter().copied().find(|l| t.label.to_string() == *l).unwrap();
                raw.push((v.target.0, label, comps, rng.gen_range(0..n)));
                if raw.len() > max_transitions {
                    return None;
                }
            }
        }
    }
}

/// A random run from the initial state: a random walk, closed into a
/// lasso at a repeated state if one occurs, otherwise finite.
pub fn random_run(rng: &mut StdRng, c: &Clts) -> Run {
    let mut states = vec![c.initial()];
    let mut path = Vec::new();
    let len = rng.gen_range(0..=12);
    for _ in 0..len {
        let out = c.outgoing(*states.last().unwrap());
        let Some(&t) = out.choose(rng) else { break };
        path.push(t);
        states.push(c.tr(t).target);
    }
    let last = *states.last().unwrap();
    let repeats: Vec<usize> = (0..states.len() - 1).filter(|&i| states[i] == last).collect();
    match repeats.choose(rng) {
        Some(&i) if rng.gen_bool(0.85) => Run::lasso(c.initial(), path[..i].to_vec(), path[i..].to_vec()),
        _ => Run::finite(c.initial(), path),
    }
}

/// Exhaustive reference check by enumerating concrete runs and
/// classifying each with the run predicates.
///
/// Prefixes are explored breadth-first up to equivalence of (state, set of
/// transitions still waiting for interference); cycles at each junction
/// up to their set of traversed transitions. Every run is judged by
/// [`classify`], so the search only decides which runs to look at.
/// Returns, per criterion (excluding full fairness), whether the
/// liveness property holds.
pub fn oracle(c: &Clts, goal: &BTreeSet<StateId>) -> Vec<(Criterion, bool)> {
    let run_criteria = &Criterion::ALL[..6];
    let mut found = [false; 6];
    if goal.contains(&c.initial()) {
        return run_criteria.iter().map(|&k| (k, true)).collect();
    }
    let allowed = |t: TransitionId| !goal.contains(&c.tr(t).target);
    let record = |report: &CriteriaReport, found: &mut [bool; 6]| {
        for (i, k) in run_criteria.iter().enumerate() {
            if k.admits(report) == Some(true) {
                found[i] = true;
            }
        }
    };

    let mut cycles: HashMap<StateId, Vec<Vec<TransitionId>>> = HashMap::new();
    let mut seen: BTreeSet<(StateId, BTreeSet<TransitionId>)> = BTreeSet::new();
    let init = c.initial();
    let pending0: BTreeSet<TransitionId> = enabled(c, init);
    seen.insert((init, pending0.clone()));
    let mut queue = VecDeque::from([(init, pending0, Vec::<TransitionId>::new())]);
    while let Some((s, pending, path)) = queue.pop_front() {
        let finite = Run::finite(init, path.clone());
        record(&classify(c, &finite).unwrap(), &mut found);
        let here = cycles.entry(s).or_insert_with(|| closed_walks(c, s, &allowed));
        for cycle in here.iter() {
            let lasso = Run::lasso(init, path.clone(), cycle.clone());
            record(&classify(c, &lasso).unwrap(), &mut found);
        }
        for &t in c.outgoing(s) {
            if !allowed(t) {
                continue;
            }
            let tt = c.tr(t);
            let mut next: BTreeSet<TransitionId> =
                pending.iter().copied().filter(|&p| c.tr(p).comps.is_disjoint(&tt.comps)).collect();
            next.extend(enabled(c, tt.target));
            if seen.insert((tt.target, next.clone())) {
                let mut p = path.clone();
                p.push(t);
                queue.push_back((tt.target, next, p));
            }
        }
    }
    run_criteria.iter().zip(found).map(|(&k, f)| (k, !f)).collect()
}

fn enabled(c: &Clts, s: StateId) -> BTreeSet<TransitionId> {
    c.outgoing(s).iter().copied().filter(|&t| c.is_nonblocking(t)).collect()
}

/// One closed walk from `s` for every reachable set of traversed transitions.
fn closed_walks(c: &Clts, s: StateId, allowed: &dyn Fn(TransitionId) -> bool) -> Vec<Vec<TransitionId>> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<(StateId, BTreeSet<TransitionId>)> = BTreeSet::new();
    let mut queue = VecDeque::from([(s, BTreeSet::new(), Vec::new())]);
    seen.insert((s, BTreeSet::new()));
    let mut closed: BTreeSet<BTreeSet<TransitionId>> = BTreeSet::new();
    while let Some((at, covered, walk)) = queue.pop_front() {
        if at == s && !walk.is_empty() && closed.insert(covered.clone()) {
            out.push(walk.clone());
        }
        for &t in c.outgoing(at) {
            if !allowed(t) {
                continue;
            }
            let mut cov = covered.clone();
            cov.insert(t);
            let tgt = c.tr(t).target;
            if seen.insert((tgt, cov.clone())) {
                let mut w = walk.clone();
                w.push(t);
                queue.push_back((tgt, cov, w));
            }
        }
    }
    out
}

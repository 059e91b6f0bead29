mod common;

use std::collections::BTreeSet;

use justcheck::ccs::{explore, parse, Action, Blocking, Environment, Process, Relabelling};
use justcheck::clts::{Clts, StateId};
use justcheck::equivalence::{quotient, strong_bisimilar};
use justcheck::liveness::{check_liveness, Criterion};
use justcheck::runs::{classify, Run};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{random_run, random_validated};

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(Action::name),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(Action::coname),
        Just(Action::Tau),
    ]
}

fn names() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(prop::sample::select(vec!["a", "b", "c"]).prop_map(String::from), 1..3)
}

fn process() -> impl Strategy<Value = Process> {
    let leaf = Just(Process::nil());
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec((action(), inner.clone()), 1..3).prop_map(Process::Choice),
            (inner.clone(), inner.clone()).prop_map(|(p, q)| Process::par(p, q)),
            (inner.clone(), names()).prop_map(|(p, l)| p.restrict(l)),
            (inner, prop::sample::select(vec!["a", "b"]), prop::sample::select(vec!["b", "c"]))
                .prop_map(|(p, old, new)| p.relabel(Relabelling::new().with(new, old))),
        ]
    })
}

fn validated(seed: u64) -> Clts {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        if let Some(c) = random_validated(&mut rng, 6, 12) {
            return c;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_terms_parse_back(p in process()) {
        let (env, q) = parse(&p.to_string()).unwrap();
        prop_assert_eq!(env, Environment::new());
        prop_assert_eq!(q, p);
    }

    #[test]
    fn explored_terms_satisfy_non_interference(p in process()) {
        let c = explore(&p, &Environment::new(), &Blocking::AllVisible, 5000).unwrap();
        prop_assert!(c.validate().is_ok(), "{}", p);
    }

    #[test]
    fn liveness_is_monotone_in_the_criterion(seed in any::<u64>()) {
        let c = validated(seed);
        let mut rng = StdRng::seed_from_u64(seed ^ 1);
        let goal: BTreeSet<StateId> = c.states().filter(|_| rng.gen_bool(0.3)).collect();
        let holds: Vec<bool> = Criterion::ALL.iter().map(|&k| check_liveness(&c, &goal, k).unwrap().holds).collect();
        for w in holds.windows(2) {
            prop_assert!(!w[0] || w[1], "{:?}", holds);
        }
    }

    #[test]
    fn counterexamples_avoid_the_goal_and_satisfy_the_criterion(seed in any::<u64>()) {
        let c = validated(seed);
        let goal: BTreeSet<StateId> = c.states().filter(|s| s.0 % 3 == 2).collect();
        for k in &Criterion::ALL[..6] {
            let v = check_liveness(&c, &goal, *k).unwrap();
            if let Some(run) = v.counterexample {
                prop_assert!(run.states(&c).is_disjoint(&goal));
                prop_assert_eq!(k.admits(&classify(&c, &run).unwrap()), Some(true));
            }
        }
    }

    #[test]
    fn bisimilarity_is_an_equivalence(seed in any::<u64>()) {
        let c = validated(seed);
        let states: Vec<StateId> = c.states().collect();
        let bis = |s: StateId, t: StateId| strong_bisimilar(&c, s, &c, t).unwrap().bisimilar;
        for &x in &states {
            prop_assert!(bis(x, x));
            for &y in &states {
                prop_assert_eq!(bis(x, y), bis(y, x));
                for &z in &states {
                    prop_assert!(!(bis(x, y) && bis(y, z)) || bis(x, z));
                }
            }
        }
    }

    #[test]
    fn distinguishing_formulas_distinguish(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (validated(a), validated(b));
        let r = strong_bisimilar(&x, x.initial(), &y, y.initial()).unwrap();
        match r.distinguishing {
            Some(phi) => {
                prop_assert!(!r.bisimilar);
                prop_assert!(phi.holds(&x, x.initial()));
                prop_assert!(!phi.holds(&y, y.initial()));
            }
            None => prop_assert!(r.bisimilar),
        }
    }

    #[test]
    fn blocks_share_outgoing_labels(seed in any::<u64>()) {
        let c = validated(seed);
        let labels = |s: StateId| -> BTreeSet<Action> {
            c.outgoing(s).iter().map(|&t| c.tr(t).label.clone()).collect()
        };
        let q = quotient(&c);
        let covered: usize = q.blocks.iter().map(|b| b.len()).sum();
        prop_assert_eq!(covered, c.num_states());
        for block in &q.blocks {
            let first = *block.first().unwrap();
            for &s in block {
                prop_assert_eq!(labels(s), labels(first));
                prop_assert!(strong_bisimilar(&c, s, &c, first).unwrap().bisimilar);
            }
        }
    }

    #[test]
    fn clts_json_round_trips(seed in any::<u64>()) {
        let c = validated(seed);
        prop_assert_eq!(Clts::from_json_str(&c.to_json_string()).unwrap(), c);
    }

    #[test]
    fn run_formats_round_trip(seed in any::<u64>()) {
        let c = validated(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let r = random_run(&mut rng, &c);
        prop_assert_eq!(Run::from_json(&r.to_json(&c)).unwrap(), r.clone());
        let text = r.display(&c).to_string();
        prop_assert_eq!(Run::parse_in(&text, &c).unwrap(), r.clone());
        prop_assert_eq!(text.parse::<Run>().unwrap(), r);
    }
}

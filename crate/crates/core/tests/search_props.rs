mod oracle;

use std::sync::Arc;

use oracle::{mask, mask_actions, random_task, random_tree_task, replay};
use parplan_core::blackbox::{lift_heuristic, wrap_strips_as_blackbox};
use parplan_core::heuristics::{heuristic_ranker, ConstantEvaluator, FfHeuristic, Ranker};
use parplan_core::search::{gbfs, search, Algorithm, Guidance, Outcome};
use parplan_core::{Evaluator, PartialModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn discrepancy_invariants_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (task, depth) = random_tree_task(&mut rng, 6, 3);
        let task = Arc::new(task);
        let bb = wrap_strips_as_blackbox(task.clone());
        let ff: Arc<dyn Evaluator> = Arc::new(lift_heuristic(
            Arc::new(FfHeuristic::new(task.clone())),
            &PartialModel::identity(task.clone()),
        ));
        let perfect: Arc<dyn Ranker> = Arc::new(heuristic_ranker(ff));
        let r = search(&bb, &Algorithm::Gbfs(Guidance::policy(perfect)), 10_000, None).unwrap();
        assert_eq!(r.outcome, Outcome::Solved);
        assert_eq!(r.expansions, depth);

        let blind: Arc<dyn Ranker> = Arc::new(heuristic_ranker(Arc::new(ConstantEvaluator::blind())));
        let mut buf = Vec::new();
        let r = search(&bb, &Algorithm::Gbfs(Guidance::policy(blind)), 10_000, Some(&mut buf)).unwrap();
        assert_eq!(r.outcome, Outcome::Solved);
        let mut value_of = std::collections::HashMap::new();
        let mut first = true;
        for line in String::from_utf8(buf).unwrap().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let value = v["values"][0].as_u64().unwrap();
            if first {
                assert_eq!(value, 0);
                first = false;
            }
            if v["event"] == "generate" {
                value_of.insert(v["state"].as_str().unwrap().to_string(), value);
            }
        }
        // Every generated value is at least its parent's: check along the plan.
        let mut s = task.init().clone();
        let mut last = 0;
        for label in &r.plan {
            s = task.action_by_name(label).unwrap().apply(&s).unwrap();
            let h = format!("{:016x}", bb.encode(&s).stable_hash());
            let v = value_of[&h];
            assert!(v >= last);
            last = v;
        }
    }
}

#[test]
fn solved_plans_replay_on_random_tasks() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut solved = 0;
    let mut attempts = 0;
    while solved < 100 {
        attempts += 1;
        assert!(attempts < 10_000);
        let task = Arc::new(random_task(&mut rng));
        let bb = wrap_strips_as_blackbox(task.clone());
        let r = gbfs(&bb, Arc::new(ConstantEvaluator::blind()), 10_000).unwrap();
        assert!(r.expansions <= 10_000);
        if r.outcome != Outcome::Solved {
            continue;
        }
        solved += 1;
        let idx: Vec<usize> = r.plan.iter().map(|l| task.action_by_name(l).unwrap().id.index()).collect();
        let actions = mask_actions(&task);
        let expected = replay(&actions, mask(task.init().iter()), mask(task.goal().iter().copied()), &idx);
        assert_eq!(expected, Some(r.cost));
        assert_eq!(task.validate_named_plan(&r.plan).unwrap(), r.cost);
    }
}

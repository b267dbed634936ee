use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use parplan_core::blackbox::{lift_heuristic, StripsBlackBox};
use parplan_core::heuristics::FfHeuristic;
use parplan_core::search::gbfs;
use parplan_core::{BlackBoxState, BlackBoxTask, Evaluator, HValue, PartialModel, StripsState};
use parplan_domains::*;

fn ff_of(pm: &PartialModel) -> parplan_core::blackbox::LiftedHeuristic {
    lift_heuristic(Arc::new(FfHeuristic::new(pm.task.clone())), pm)
}

/// Full-task state built from the initial state by swapping facts by name.
fn edit(inst: &DomainInstance, remove: &[&str], add: &[&str]) -> BlackBoxState {
    let t = &inst.task;
    let mut s = t.init().clone();
    for n in remove {
        s.remove(t.fact(n).unwrap_or_else(|| panic!("{n}")));
    }
    for n in add {
        s.insert(t.fact(n).unwrap_or_else(|| panic!("{n}")));
    }
    inst.blackbox().encode(&s)
}

const TINY_LOGISTICS: &str = "(define (problem tiny) (:domain logistics)
  (:objects c1 c2 - city ap1 ap2 - airport l2 - location t1 t2 - truck a1 - airplane p1 - package)
  (:init (in-city ap1 c1) (in-city ap2 c2) (in-city l2 c2)
         (at t1 ap1) (at t2 ap2) (at a1 ap1) (at p1 ap1))
  (:goal (at p1 l2)))";

const TINY_LOGISTICS_ANN: &str = r#"{"domain":"logistics","cities":["c1","c2"],
  "city_of":{"ap1":"c1","ap2":"c2","l2":"c2"},"airports":{"c1":"ap1","c2":"ap2"},
  "trucks":{"t1":"c1","t2":"c2"},"airplanes":["a1"],"packages":["p1"],"goal":{"p1":"l2"}}"#;

#[test]
fn air_model_counts_load_fly_unload() {
    let inst = DomainInstance::from_parts(DomainKind::Logistics, "tiny", TINY_LOGISTICS, TINY_LOGISTICS_ANN).unwrap();
    let air = make_partial_model(&inst, PartialKind::Air).unwrap();
    let h = ff_of(&air);
    assert_eq!(h.evaluate(&inst.blackbox().initial_state()).unwrap(), HValue::new(3));
    let there = edit(&inst, &["at(p1,ap1)"], &["at(p1,ap2)"]);
    assert_eq!(h.evaluate(&there).unwrap(), HValue::new(0));
    let in_truck = edit(&inst, &["at(p1,ap1)"], &["in(p1,t2)"]);
    assert_eq!(h.evaluate(&in_truck).unwrap(), HValue::new(0));

    let trucks = make_partial_model(&inst, PartialKind::Trucks).unwrap();
    let h = ff_of(&trucks);
    // ship, load, drive, unload
    assert_eq!(h.evaluate(&inst.blackbox().initial_state()).unwrap(), HValue::new(4));
    let full = gbfs(&inst.blackbox(), Arc::new(ff_of(&inst.full_model())), 1000).unwrap();
    assert!(full.solved());
    assert_eq!(inst.task.validate_named_plan(&full.plan).unwrap(), 6);
}

#[test]
fn air_model_is_zero_on_solved_states() {
    let insts = generate(&Params::dataset(DomainKind::Logistics, "default").unwrap(), 11, 5).unwrap();
    for inst in &insts {
        let Annotation::Logistics(ann) = &inst.annotation else { panic!() };
        let air = make_partial_model(inst, PartialKind::Air).unwrap();
        let mut remove = Vec::new();
        let mut add = Vec::new();
        for p in &ann.packages {
            for f in inst.task.init().iter() {
                let n = inst.task.fact_name(f);
                if n.starts_with(&format!("at({p},")) {
                    remove.push(n.to_string());
                }
            }
            add.push(format!("at({p},{})", ann.goal[p]));
        }
        let remove: Vec<&str> = remove.iter().map(String::as_str).collect();
        let add: Vec<&str> = add.iter().map(String::as_str).collect();
        let solved = edit(inst, &remove, &add);
        assert!(inst.blackbox().is_goal(&solved));
        assert_eq!(ff_of(&air).evaluate(&solved).unwrap(), HValue::new(0));
    }
}

const TINY_GRID: &str = "(define (problem tiny) (:domain grid)
  (:objects c0-0 c1-0 - place k1 - key s1 - shape)
  (:init (conn c0-0 c1-0) (conn c1-0 c0-0) (key-shape k1 s1) (open c0-0) (open c1-0)
         (at k1 c0-0) (at-robot c0-0) (arm-empty))
  (:goal (at k1 c1-0)))";

const TINY_GRID_ANN: &str = r#"{"domain":"grid","width":2,"height":1,"cells":["c0-0","c1-0"],
  "keys":["k1"],"shapes":["s1"],"locks":{},"key_shape":{"k1":"s1"},"targets":{"k1":"c1-0"}}"#;

#[test]
fn robot_model_on_two_cells() {
    let inst = DomainInstance::from_parts(DomainKind::Grid, "tiny", TINY_GRID, TINY_GRID_ANN).unwrap();
    let robot = make_partial_model(&inst, PartialKind::Robot).unwrap();
    // move to the target, deliver
    assert_eq!(ff_of(&robot).evaluate(&inst.blackbox().initial_state()).unwrap(), HValue::new(2));
    let keys = make_partial_model(&inst, PartialKind::Keys).unwrap();
    let h = ff_of(&keys);
    assert_eq!(h.evaluate(&inst.blackbox().initial_state()).unwrap(), HValue::new(2));
    let r = gbfs(&inst.blackbox(), Arc::new(ff_of(&inst.full_model())), 100).unwrap();
    assert_eq!(inst.task.validate_named_plan(&r.plan).unwrap(), 3);
    let done = edit(&inst, &["at(k1,c0-0)"], &["at(k1,c1-0)"]);
    assert_eq!(h.evaluate(&done).unwrap(), HValue::new(0));
}

#[test]
fn grid_plans_validate() {
    let insts = generate(&Params::dataset(DomainKind::Grid, "default").unwrap(), 12, 5).unwrap();
    for inst in &insts {
        let keys = make_partial_model(inst, PartialKind::Keys).unwrap();
        let r = gbfs(&inst.blackbox(), Arc::new(ff_of(&keys)), 100_000).unwrap();
        if r.solved() {
            assert_eq!(inst.task.validate_named_plan(&r.plan).unwrap(), r.cost);
        }
        let r = gbfs(&inst.blackbox(), Arc::new(ff_of(&inst.full_model())), 100_000).unwrap();
        assert!(r.solved());
        assert_eq!(inst.task.validate_named_plan(&r.plan).unwrap(), r.cost);
    }
}

/// Reachable states with their successor lists, or `None` above `cap`.
fn explore(bb: &StripsBlackBox, cap: usize) -> Option<Vec<(BlackBoxState, Vec<usize>)>> {
    let mut index: HashMap<BlackBoxState, usize> = HashMap::new();
    let mut states = vec![(bb.initial_state(), Vec::new())];
    index.insert(bb.initial_state(), 0);
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        let mut succ = Vec::new();
        for (_, t) in bb.successors(&states[i].0) {
            let j = *index.entry(t.clone()).or_insert_with(|| {
                states.push((t, Vec::new()));
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            succ.push(j);
        }
        if states.len() > cap {
            return None;
        }
        states[i].1 = succ;
    }
    Some(states)
}

/// Every black-box transition maps to no partial change or one partial
/// transition, and infinite lifted values only occur on dead ends.
fn check_projection(inst: &DomainInstance, pm: &PartialModel) -> bool {
    let Some(space) = explore(&inst.blackbox(), 10_000) else { return false };
    let mapped: Vec<StripsState> = space.iter().map(|(s, _)| pm.map(s).unwrap()).collect();
    for (i, (_, succ)) in space.iter().enumerate() {
        let from = &mapped[i];
        let options: HashSet<StripsState> = pm.task.successors(from).into_iter().map(|(_, t)| t).collect();
        for &j in succ {
            let to = &mapped[j];
            assert!(to == from || options.contains(to), "{}: transition {i}->{j} has no partial image", inst.id);
        }
    }
    let bb = inst.blackbox();
    let mut alive: Vec<bool> = space.iter().map(|(s, _)| bb.is_goal(s)).collect();
    loop {
        let mut changed = false;
        for (i, (_, succ)) in space.iter().enumerate() {
            if !alive[i] && succ.iter().any(|&j| alive[j]) {
                alive[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let h = ff_of(pm);
    for (i, (s, _)) in space.iter().enumerate() {
        if h.evaluate(s).unwrap().is_infinite() {
            assert!(!alive[i], "{}: infinite value on a state that reaches the goal", inst.id);
        }
    }
    true
}

#[test]
fn keys_is_a_projection() {
    let params = Params::Grid(GridParams {
        width: Range::new(2, 3),
        height: Range::new(1, 2),
        locks: Range::new(0, 1),
        keys: Range::new(1, 2),
    });
    let checked = generate(&params, 13, 8)
        .unwrap()
        .iter()
        .filter(|inst| check_projection(inst, &make_partial_model(inst, PartialKind::Keys).unwrap()))
        .count();
    assert!(checked >= 4, "{checked}");
}

#[test]
fn wood_and_logistics_are_projections() {
    let params = Params::Woodworking(WoodParams {
        parts: Range::exactly(1),
        locations: Range::new(1, 2),
        wood_factor: (1.0, 1.0),
        pre_cut: false,
    });
    let mut checked = 0;
    for inst in generate(&params, 14, 8).unwrap() {
        for kind in [PartialKind::Wood, PartialKind::Logistics] {
            checked += check_projection(&inst, &make_partial_model(&inst, kind).unwrap()) as usize;
        }
    }
    assert!(checked >= 8, "{checked}");
}

use std::collections::BTreeSet;

use parplan_core::pddl::LiftedProblem;
use parplan_core::PartialModel;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::partial::partial_domain;
use crate::sigma::{assemble, atom, split, PartialSpec, SigmaSpec};
use crate::{
    generate_with, pick, shuffle_pick, Annotation, DomainError, DomainInstance, DomainKind, NameMap,
    PartialKind, Range,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParams {
    pub width: Range,
    pub height: Range,
    pub locks: Range,
    pub keys: Range,
}

impl GridParams {
    pub const TEST: GridParams = GridParams {
        width: Range::new(7, 8),
        height: Range::exactly(6),
        locks: Range::new(2, 3),
        keys: Range::new(2, 4),
    };

    pub const DEFAULT: GridParams = GridParams {
        width: Range::new(4, 6),
        height: Range::new(4, 6),
        locks: Range::new(1, 2),
        keys: Range::new(1, 3),
    };

    pub const GRIDSIZE: GridParams = GridParams {
        width: Range::exactly(2),
        height: Range::exactly(1),
        locks: Range::exactly(1),
        keys: Range::exactly(1),
    };

    pub fn validate(&self) -> Result<(), DomainError> {
        self.width.check("width", 1)?;
        self.height.check("height", 1)?;
        self.locks.check("locks", 0)?;
        self.keys.check("keys", 1)?;
        if self.locks.lo >= self.width.hi * self.height.hi {
            return Err(DomainError::InfeasibleRange {
                name: "locks",
                message: "every cell but the robot's would be locked".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridAnnotation {
    pub width: usize,
    pub height: usize,
    /// Row-major.
    pub cells: Vec<String>,
    pub keys: Vec<String>,
    pub shapes: Vec<String>,
    /// Locked cell to its shape.
    pub locks: NameMap,
    pub key_shape: NameMap,
    /// Goal key to its target cell.
    pub targets: NameMap,
}

pub(crate) fn cell(x: usize, y: usize) -> String {
    format!("c{x}-{y}")
}

/// Lock shapes are drawn uniformly from the shapes of the generated keys, so
/// every lock has a matching key.
pub fn gen_grid(params: &GridParams, seed: u64, count: usize) -> Result<Vec<DomainInstance>, DomainError> {
    params.validate()?;
    let domain = DomainKind::Grid.lifted();
    generate_with(DomainKind::Grid, seed, count, |rng, id| {
        let (w, h) = loop {
            let w = params.width.sample(rng);
            let h = params.height.sample(rng);
            if w * h > params.locks.lo {
                break (w, h);
            }
        };
        let nlocks = params.locks.sample(rng).min(w * h - 1);
        let nkeys = params.keys.sample(rng);
        let cells: Vec<String> = (0..h).flat_map(|y| (0..w).map(move |x| cell(x, y))).collect();
        let keys: Vec<String> = (1..=nkeys).map(|k| format!("k{k}")).collect();
        let shapes: Vec<String> = (1..=nlocks.max(1)).map(|s| format!("s{s}")).collect();

        let key_shape: NameMap = keys.iter().map(|k| (k.clone(), pick(rng, &shapes).clone())).collect();
        let used: Vec<String> = key_shape.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let robot = pick(rng, &cells).clone();
        let free: Vec<String> = cells.iter().filter(|c| **c != robot).cloned().collect();
        let locks: NameMap =
            shuffle_pick(rng, &free, nlocks).into_iter().map(|c| (c, pick(rng, &used).clone())).collect();
        let key_at: NameMap = keys.iter().map(|k| (k.clone(), pick(rng, &cells).clone())).collect();
        let ngoal = rng.gen_range(1..=nkeys);
        let mut targets = NameMap::new();
        for k in shuffle_pick(rng, &keys, ngoal) {
            let options: Vec<String> = cells.iter().filter(|c| **c != key_at[&k]).cloned().collect();
            if options.is_empty() {
                continue;
            }
            targets.insert(k, pick(rng, &options).clone());
        }

        let mut b = LiftedProblem::builder(&domain, &format!("grid-{id}"));
        for c in &cells {
            b.object(c, "place")?;
        }
        for k in &keys {
            b.object(k, "key")?;
        }
        for s in &shapes {
            b.object(s, "shape")?;
        }
        for y in 0..h {
            for x in 0..w {
                let here = cell(x, y);
                let mut next = Vec::new();
                if x > 0 {
                    next.push(cell(x - 1, y));
                }
                if x + 1 < w {
                    next.push(cell(x + 1, y));
                }
                if y > 0 {
                    next.push(cell(x, y - 1));
                }
                if y + 1 < h {
                    next.push(cell(x, y + 1));
                }
                for n in next {
                    b.init("conn", &[&here, &n])?;
                }
            }
        }
        for (k, s) in &key_shape {
            b.init("key-shape", &[k, s])?;
        }
        for (c, s) in &locks {
            b.init("lock-shape", &[c, s])?;
            b.init("locked", &[c])?;
        }
        for c in &cells {
            if !locks.contains_key(c) {
                b.init("open", &[c])?;
            }
        }
        for (k, c) in &key_at {
            b.init("at", &[k, c])?;
        }
        b.init("at-robot", &[&robot])?;
        b.init("arm-empty", &[])?;
        for (k, c) in &targets {
            b.goal("at", &[k, c])?;
        }
        let ann = GridAnnotation { width: w, height: h, cells, keys, shapes, locks, key_shape, targets };
        Ok((b.build(), Annotation::Grid(ann)))
    })
}

fn place_objects(ann: &GridAnnotation) -> Vec<(String, &'static str)> {
    let mut objects: Vec<(String, &'static str)> = ann.cells.iter().map(|c| (c.clone(), "place")).collect();
    objects.extend(ann.keys.iter().map(|k| (k.clone(), "key")));
    objects
}

/// Robot position and open cells. A goal key counts as delivered while it
/// lies on its target.
pub(crate) fn robot_model(inst: &DomainInstance, ann: &GridAnnotation) -> Result<PartialModel, DomainError> {
    let task = &inst.task;
    let mut sigma = SigmaSpec::new(task);
    let mut statics = Vec::new();
    for (i, name) in task.fact_names().iter().enumerate() {
        let (pred, args) = split(name);
        match (pred, args.as_slice()) {
            ("at-robot", [c]) => sigma.direct[i].push(atom("robot-at", &[c])),
            ("locked", [c]) => sigma.direct[i].push(atom("locked", &[c])),
            ("open", [c]) => sigma.direct[i].push(atom("open", &[c])),
            ("at", [k, c]) if ann.targets.get(*k).is_some_and(|t| t == c) => {
                sigma.direct[i].push(atom("delivered", &[k]))
            }
            ("conn", [x, y]) if task.init().contains(parplan_core::FactId(i as u32)) => {
                statics.push(atom("conn", &[x, y]))
            }
            _ => {}
        }
    }
    statics.extend(ann.targets.iter().map(|(k, c)| atom("target", &[k, c])));
    let goal = ann.targets.keys().map(|k| atom("delivered", &[k])).collect();
    assemble(
        inst,
        PartialSpec { domain: partial_domain(PartialKind::Robot), objects: place_objects(ann), statics, goal, sigma },
    )
}

/// Key positions and the held key; keys move without the robot.
pub(crate) fn keys_model(inst: &DomainInstance, ann: &GridAnnotation) -> Result<PartialModel, DomainError> {
    let task = &inst.task;
    let mut sigma = SigmaSpec::new(task);
    for (i, name) in task.fact_names().iter().enumerate() {
        let (pred, args) = split(name);
        match (pred, args.as_slice()) {
            ("at", [k, c]) => sigma.direct[i].push(atom("at", &[k, c])),
            ("holding", [k]) => sigma.direct[i].push(atom("holding", &[k])),
            ("arm-empty", []) => sigma.direct[i].push(atom("arm-empty", &[])),
            _ => {}
        }
    }
    let goal = ann.targets.iter().map(|(k, c)| atom("at", &[k, c])).collect();
    assemble(
        inst,
        PartialSpec {
            domain: partial_domain(PartialKind::Keys),
            objects: place_objects(ann),
            statics: Vec::new(),
            goal,
            sigma,
        },
    )
}

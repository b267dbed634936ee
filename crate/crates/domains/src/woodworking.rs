use std::collections::BTreeMap;

use parplan_core::pddl::LiftedProblem;
use parplan_core::PartialModel;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::partial::partial_domain;
use crate::sigma::{assemble, atom, split, Guard, PartialSpec, SigmaSpec};
use crate::{generate_with, pick, Annotation, DomainError, DomainInstance, DomainKind, PartialKind, Range};

const COLOURS: [&str; 3] = ["red", "green", "blue"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoodParams {
    pub parts: Range,
    pub locations: Range,
    /// Total board units over the number of parts, sampled uniformly.
    pub wood_factor: (f64, f64),
    /// Parts start cut and processed, so only delivery remains.
    #[serde(default)]
    pub pre_cut: bool,
}

impl WoodParams {
    pub const TEST: WoodParams =
        WoodParams { parts: Range::new(2, 3), locations: Range::new(3, 8), wood_factor: (1.0, 1.4), pre_cut: false };

    pub const DEFAULT: WoodParams =
        WoodParams { parts: Range::new(1, 2), locations: Range::new(2, 6), wood_factor: (1.0, 1.4), pre_cut: false };

    pub fn validate(&self) -> Result<(), DomainError> {
        self.parts.check("parts", 1)?;
        self.locations.check("locations", 1)?;
        let (lo, hi) = self.wood_factor;
        if !(1.0..=hi).contains(&lo) || !hi.is_finite() {
            return Err(DomainError::InfeasibleRange {
                name: "wood_factor",
                message: format!("need 1 <= lo <= hi, got {lo}..{hi}"),
            });
        }
        Ok(())
    }
}

/// Goal of one part: a destination and at least one attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartGoal {
    pub location: String,
    pub surface: Option<String>,
    pub treatment: Option<String>,
    pub colour: Option<String>,
}

impl PartGoal {
    fn attribute_atoms(&self, part: &str) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(s) = &self.surface {
            v.push(atom("surface-condition", &[part, s]));
        }
        if let Some(t) = &self.treatment {
            v.push(atom("treatment", &[part, t]));
        }
        if let Some(c) = &self.colour {
            v.push(atom("colour", &[part, c]));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WoodAnnotation {
    pub workshop: String,
    pub locations: Vec<String>,
    pub truck: String,
    pub boards: Vec<String>,
    pub sizes: Vec<String>,
    pub colours: Vec<String>,
    pub parts: BTreeMap<String, PartGoal>,
}

pub fn gen_woodworking_pd(
    params: &WoodParams,
    seed: u64,
    count: usize,
) -> Result<Vec<DomainInstance>, DomainError> {
    params.validate()?;
    let domain = DomainKind::Woodworking.lifted();
    generate_with(DomainKind::Woodworking, seed, count, |rng, id| {
        let nl = params.locations.sample(rng);
        let np = params.parts.sample(rng);
        let wf = rng.gen_range(params.wood_factor.0..=params.wood_factor.1);
        let units = ((np as f64 * wf).ceil() as usize).max(np);
        let nb = rng.gen_range(1..=units);
        let mut board_size = vec![1usize; nb];
        for _ in nb..units {
            board_size[rng.gen_range(0..nb)] += 1;
        }

        let locations: Vec<String> = (1..=nl).map(|l| format!("l{l}")).collect();
        let workshop = pick(rng, &locations).clone();
        let boards: Vec<String> = (1..=nb).map(|b| format!("b{b}")).collect();
        let sizes: Vec<String> = (0..=units).map(|s| format!("s{s}")).collect();
        let colours: Vec<String> = COLOURS.iter().map(|c| c.to_string()).collect();
        let truck = "t1".to_string();

        let mut roads = Vec::new();
        for i in 1..nl {
            let j = rng.gen_range(0..i);
            roads.push((i, j));
        }
        for i in 0..nl {
            for j in 0..i {
                if !roads.contains(&(i, j)) && rng.gen_bool(0.2) {
                    roads.push((i, j));
                }
            }
        }

        let mut parts = BTreeMap::new();
        for p in 1..=np {
            let mask = rng.gen_range(1..8u8);
            let goal = PartGoal {
                location: pick(rng, &locations).clone(),
                surface: (mask & 1 != 0).then(|| "smooth".to_string()),
                treatment: (mask & 2 != 0).then(|| "varnished".to_string()),
                colour: (mask & 4 != 0).then(|| pick(rng, &colours).clone()),
            };
            parts.insert(format!("p{p}"), goal);
        }

        let mut b = LiftedProblem::builder(&domain, &format!("woodworking-{id}"));
        for l in &locations {
            b.object(l, "location")?;
        }
        b.object(&truck, "truck")?;
        for x in &boards {
            b.object(x, "board")?;
        }
        for p in parts.keys() {
            b.object(p, "part")?;
        }
        for s in &sizes {
            b.object(s, "size")?;
        }
        for c in &colours {
            b.object(c, "colour")?;
            b.init("paint", &[c])?;
        }
        b.init("workshop", &[&workshop])?;
        for &(i, j) in &roads {
            b.init("road", &[&locations[i], &locations[j]])?;
            b.init("road", &[&locations[j], &locations[i]])?;
        }
        for w in sizes.windows(2) {
            b.init("size-succ", &[&w[0], &w[1]])?;
        }
        b.init("truck-at", &[&truck, pick(rng, &locations)])?;
        for (x, &size) in boards.iter().zip(&board_size) {
            b.init("at", &[x, pick(rng, &locations)])?;
            b.init("boardsize", &[x, &sizes[size]])?;
        }
        for (p, g) in &parts {
            if params.pre_cut {
                b.init("at", &[p, pick(rng, &locations)])?;
                b.init("surface-condition", &[p, "smooth"])?;
                b.init("treatment", &[p, g.treatment.as_deref().unwrap_or("untreated")])?;
                b.init("colour", &[p, g.colour.as_deref().unwrap_or("natural")])?;
            } else {
                b.init("unused", &[p])?;
            }
            b.goal("at", &[p, &g.location])?;
            for a in g.attribute_atoms(p) {
                let (pred, args) = split(&a);
                b.goal(pred, &args)?;
            }
        }
        let ann = WoodAnnotation { workshop, locations, truck, boards, sizes, colours, parts };
        Ok((b.build(), Annotation::Woodworking(ann)))
    })
}

/// Sawing and processing without locations.
pub(crate) fn wood_model(inst: &DomainInstance, ann: &WoodAnnotation) -> Result<PartialModel, DomainError> {
    let task = &inst.task;
    let mut sigma = SigmaSpec::new(task);
    let mut statics = Vec::new();
    for (i, name) in task.fact_names().iter().enumerate() {
        let (pred, args) = split(name);
        match pred {
            "unused" | "boardsize" | "colour" | "surface-condition" | "treatment" => {
                sigma.direct[i].push(name.clone())
            }
            "paint" | "size-succ" if task.init().contains(parplan_core::FactId(i as u32)) => {
                statics.push(atom(pred, &args))
            }
            _ => {}
        }
    }
    let mut objects: Vec<(String, &'static str)> = ann.boards.iter().map(|b| (b.clone(), "board")).collect();
    objects.extend(ann.parts.keys().map(|p| (p.clone(), "part")));
    objects.extend(ann.sizes.iter().map(|s| (s.clone(), "size")));
    objects.extend(ann.colours.iter().map(|c| (c.clone(), "colour")));
    let goal = ann.parts.iter().flat_map(|(p, g)| g.attribute_atoms(p)).collect();
    assemble(inst, PartialSpec { domain: partial_domain(PartialKind::Wood), objects, statics, goal, sigma })
}

/// Transport by the single truck. Parts that do not exist yet are placed at
/// the workshop; with `unprocessed`, so is every part still missing one of
/// its goal attributes.
pub(crate) fn logistics_model(
    inst: &DomainInstance,
    ann: &WoodAnnotation,
    unprocessed: bool,
) -> Result<PartialModel, DomainError> {
    let task = &inst.task;
    let mut sigma = SigmaSpec::new(task);
    let mut statics = Vec::new();
    let mut guards: BTreeMap<&str, Guard> = BTreeMap::new();
    if unprocessed {
        for (p, g) in &ann.parts {
            let require = g.attribute_atoms(p).iter().map(|a| task.fact(a).expect("attribute fact")).collect();
            guards.insert(p, Guard { require, facts: Vec::new(), otherwise: vec![atom("at", &[p, &ann.workshop])] });
        }
    }
    for (i, name) in task.fact_names().iter().enumerate() {
        let (pred, args) = split(name);
        let out = match (pred, args.as_slice()) {
            ("truck-at", [_, l]) => atom("truck-at", &[l]),
            ("at", [o, l]) => atom("at", &[o, l]),
            ("in-truck", [o, _]) => atom("in-truck", &[o]),
            ("unused", [p]) if !unprocessed => atom("at", &[p, &ann.workshop]),
            ("road", [x, y]) => {
                if task.init().contains(parplan_core::FactId(i as u32)) {
                    statics.push(atom("road", &[x, y]));
                }
                continue;
            }
            _ => continue,
        };
        match args.first().and_then(|o| guards.get_mut(o)) {
            Some(g) => g.facts.push((parplan_core::FactId(i as u32), out)),
            _ => sigma.direct[i].push(out),
        }
    }
    sigma.guards = guards.into_values().collect();
    let mut objects: Vec<(String, &'static str)> = ann.locations.iter().map(|l| (l.clone(), "location")).collect();
    objects.extend(ann.boards.iter().map(|b| (b.clone(), "board")));
    objects.extend(ann.parts.keys().map(|p| (p.clone(), "part")));
    let goal = ann.parts.iter().map(|(p, g)| atom("at", &[p, &g.location])).collect();
    let kind = if unprocessed { PartialKind::LogisticsUnprocessed } else { PartialKind::Logistics };
    assemble(inst, PartialSpec { domain: partial_domain(kind), objects, statics, goal, sigma })
}

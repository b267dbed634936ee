use std::collections::HashSet;

use parplan_core::pddl::LiftedProblem;
use parplan_core::PartialModel;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::partial::partial_domain;
use crate::sigma::{assemble, atom, full_fact, split, PartialSpec, SigmaSpec};
use crate::{
    generate_with, pick, Annotation, DomainError, DomainInstance, DomainKind, NameMap, PartialKind, Range,
};

/// Logistics sizes. Each city has one truck and one airport; the airport
/// counts towards the city's locations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogisticsParams {
    pub packages: Range,
    pub cities: Range,
    pub airplanes: Range,
    pub locations: Range,
    /// Places every package's initial and goal location in one city.
    #[serde(default)]
    pub one_city: bool,
}

impl LogisticsParams {
    pub const TEST: LogisticsParams = LogisticsParams {
        packages: Range::new(3, 4),
        cities: Range::new(5, 7),
        airplanes: Range::new(4, 5),
        locations: Range::new(4, 6),
        one_city: false,
    };

    pub const DEFAULT: LogisticsParams = LogisticsParams {
        packages: Range::new(2, 4),
        cities: Range::new(2, 5),
        airplanes: Range::new(2, 4),
        locations: Range::new(2, 5),
        one_city: false,
    };

    pub fn validate(&self) -> Result<(), DomainError> {
        self.packages.check("packages", 1)?;
        self.cities.check("cities", 1)?;
        self.airplanes.check("airplanes", 1)?;
        self.locations.check("locations", 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogisticsAnnotation {
    pub cities: Vec<String>,
    /// Place to city.
    pub city_of: NameMap,
    /// City to its airport.
    pub airports: NameMap,
    /// Truck to its city.
    pub trucks: NameMap,
    pub airplanes: Vec<String>,
    pub packages: Vec<String>,
    /// Package to goal place.
    pub goal: NameMap,
}

pub fn gen_logistics(
    params: &LogisticsParams,
    seed: u64,
    count: usize,
) -> Result<Vec<DomainInstance>, DomainError> {
    params.validate()?;
    let domain = DomainKind::Logistics.lifted();
    generate_with(DomainKind::Logistics, seed, count, |rng, id| {
        let nc = params.cities.sample(rng);
        let nl = params.locations.sample(rng);
        let na = params.airplanes.sample(rng);
        let np = params.packages.sample(rng);

        let mut ann = LogisticsAnnotation {
            cities: (1..=nc).map(|c| format!("c{c}")).collect(),
            city_of: NameMap::new(),
            airports: NameMap::new(),
            trucks: NameMap::new(),
            airplanes: (1..=na).map(|a| format!("a{a}")).collect(),
            packages: (1..=np).map(|p| format!("p{p}")).collect(),
            goal: NameMap::new(),
        };
        let mut b = LiftedProblem::builder(&domain, &format!("logistics-{id}"));
        let mut places_of: Vec<Vec<String>> = Vec::new();
        for (ci, city) in ann.cities.iter().enumerate() {
            b.object(city, "city")?;
            let ap = format!("ap{}", ci + 1);
            b.object(&ap, "airport")?;
            let mut places = vec![ap.clone()];
            for j in 1..nl {
                let l = format!("l{}-{j}", ci + 1);
                b.object(&l, "location")?;
                places.push(l);
            }
            for pl in &places {
                ann.city_of.insert(pl.clone(), city.clone());
            }
            ann.airports.insert(city.clone(), ap);
            places_of.push(places);
        }
        for (ci, city) in ann.cities.iter().enumerate() {
            let t = format!("t{}", ci + 1);
            b.object(&t, "truck")?;
            b.init("at", &[&t, pick(rng, &places_of[ci])])?;
            ann.trucks.insert(t, city.clone());
        }
        let airports: Vec<String> = ann.airports.values().cloned().collect();
        for a in &ann.airplanes {
            b.object(a, "airplane")?;
            b.init("at", &[a, pick(rng, &airports)])?;
        }
        let all_places: Vec<String> = places_of.concat();
        let home = rng.gen_range(0..nc);
        for p in &ann.packages {
            b.object(p, "package")?;
            let pool = if params.one_city { &places_of[home] } else { &all_places };
            let from = pick(rng, pool).clone();
            let to = pick(rng, pool).clone();
            b.init("at", &[p, &from])?;
            b.goal("at", &[p, &to])?;
            ann.goal.insert(p.clone(), to);
        }
        for (pl, c) in &ann.city_of {
            b.init("in-city", &[pl, c])?;
        }
        Ok((b.build(), Annotation::Logistics(ann)))
    })
}

/// Airplane transport between cities. Packages and airplanes are mapped to
/// the city they are in; a package in a truck is in the truck's city.
pub(crate) fn air_model(inst: &DomainInstance, ann: &LogisticsAnnotation) -> Result<PartialModel, DomainError> {
    let task = &inst.task;
    let packages: HashSet<&str> = ann.packages.iter().map(String::as_str).collect();
    let airplanes: HashSet<&str> = ann.airplanes.iter().map(String::as_str).collect();
    let mut sigma = SigmaSpec::new(task);
    for (i, name) in task.fact_names().iter().enumerate() {
        let (pred, args) = split(name);
        match (pred, args.as_slice()) {
            ("at", [x, l]) if packages.contains(x) || airplanes.contains(x) => {
                sigma.direct[i].push(atom("at-city", &[x, &ann.city_of[*l]]));
            }
            ("in", [p, a]) if airplanes.contains(a) => sigma.direct[i].push(atom("in-plane", &[p, a])),
            ("in", [p, t]) => {
                for (l, c) in &ann.city_of {
                    let partner = full_fact(task, "at", &[t, l]);
                    sigma.joins[i].push((partner, atom("at-city", &[p, c])));
                }
            }
            _ => {}
        }
    }
    let mut objects: Vec<(String, &'static str)> = ann.cities.iter().map(|c| (c.clone(), "city")).collect();
    objects.extend(ann.airplanes.iter().map(|a| (a.clone(), "airplane")));
    objects.extend(ann.packages.iter().map(|p| (p.clone(), "package")));
    let goal = ann.goal.iter().map(|(p, l)| atom("at-city", &[p, &ann.city_of[l]])).collect();
    assemble(
        inst,
        PartialSpec { domain: partial_domain(PartialKind::Air), objects, statics: Vec::new(), goal, sigma },
    )
}

/// Truck transport inside cities with packages moving between airports in
/// one step. A package in an airplane is at the airport of the plane's city.
pub(crate) fn trucks_model(
    inst: &DomainInstance,
    ann: &LogisticsAnnotation,
) -> Result<PartialModel, DomainError> {
    let task = &inst.task;
    let packages: HashSet<&str> = ann.packages.iter().map(String::as_str).collect();
    let mut sigma = SigmaSpec::new(task);
    for (i, name) in task.fact_names().iter().enumerate() {
        let (pred, args) = split(name);
        match (pred, args.as_slice()) {
            ("at", [p, l]) if packages.contains(p) => sigma.direct[i].push(atom("at", &[p, l])),
            ("at", [t, l]) if ann.trucks.contains_key(*t) => sigma.direct[i].push(atom("truck-at", &[t, l])),
            ("in", [p, t]) if ann.trucks.contains_key(*t) => sigma.direct[i].push(atom("in", &[p, t])),
            ("in", [p, a]) => {
                for ap in ann.airports.values() {
                    let partner = full_fact(task, "at", &[a, ap]);
                    sigma.joins[i].push((partner, atom("at", &[p, ap])));
                }
            }
            _ => {}
        }
    }
    let mut objects: Vec<(String, &'static str)> = ann.cities.iter().map(|c| (c.clone(), "city")).collect();
    for pl in ann.city_of.keys() {
        let airport = ann.airports.values().any(|a| a == pl);
        objects.push((pl.clone(), if airport { "airport" } else { "location" }));
    }
    objects.extend(ann.packages.iter().map(|p| (p.clone(), "package")));
    objects.extend(ann.trucks.keys().map(|t| (t.clone(), "truck")));
    let mut statics: Vec<String> = ann.city_of.iter().map(|(l, c)| atom("in-city", &[l, c])).collect();
    statics.extend(ann.airports.values().map(|a| atom("airport-of", &[a])));
    let goal = ann.goal.iter().map(|(p, l)| atom("at", &[p, l])).collect();
    assemble(inst, PartialSpec { domain: partial_domain(PartialKind::Trucks), objects, statics, goal, sigma })
}

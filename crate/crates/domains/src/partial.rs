use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use parplan_core::pddl::{parse_domain, LiftedDomain};
use parplan_core::PartialModel;
use serde::{Deserialize, Serialize};

use crate::{grid, logistics, woodworking, Annotation, DomainError, DomainInstance};

/// The partial models available per domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartialKind {
    /// Logistics: airplanes between cities.
    Air,
    /// Logistics: trucks inside cities, airports linked directly.
    Trucks,
    /// Grid: robot movement.
    Robot,
    /// Grid: key positions.
    Keys,
    /// Woodworking: processing.
    Wood,
    /// Woodworking: transport, uncut parts at the workshop.
    Logistics,
    /// Woodworking: transport, unfinished parts at the workshop.
    LogisticsUnprocessed,
}

impl PartialKind {
    pub const ALL: [PartialKind; 7] = [
        PartialKind::Air,
        PartialKind::Trucks,
        PartialKind::Robot,
        PartialKind::Keys,
        PartialKind::Wood,
        PartialKind::Logistics,
        PartialKind::LogisticsUnprocessed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartialKind::Air => "air",
            PartialKind::Trucks => "trucks",
            PartialKind::Robot => "robot",
            PartialKind::Keys => "keys",
            PartialKind::Wood => "wood",
            PartialKind::Logistics => "logistics",
            PartialKind::LogisticsUnprocessed => "logistics-unprocessed",
        }
    }

    pub fn pddl(self) -> &'static str {
        match self {
            PartialKind::Air => include_str!("../pddl/logistics-air.pddl"),
            PartialKind::Trucks => include_str!("../pddl/logistics-trucks.pddl"),
            PartialKind::Robot => include_str!("../pddl/grid-robot.pddl"),
            PartialKind::Keys => include_str!("../pddl/grid-keys.pddl"),
            PartialKind::Wood => include_str!("../pddl/woodworking-processing.pddl"),
            PartialKind::Logistics | PartialKind::LogisticsUnprocessed => {
                include_str!("../pddl/woodworking-logistics.pddl")
            }
        }
    }
}

impl fmt::Display for PartialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartialKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PartialKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DomainError::Unknown { what: "partial model", name: s.to_string() })
    }
}

pub(crate) fn partial_domain(kind: PartialKind) -> Arc<LiftedDomain> {
    static CACHE: [OnceLock<Arc<LiftedDomain>>; 7] = [const { OnceLock::new() }; 7];
    CACHE[kind as usize]
        .get_or_init(|| Arc::new(parse_domain(kind.pddl()).expect("bundled partial domain parses")))
        .clone()
}

/// Builds the partial task of `kind` for `inst` with its state mapping.
pub fn make_partial_model(inst: &DomainInstance, kind: PartialKind) -> Result<PartialModel, DomainError> {
    let mismatch = || DomainError::KindMismatch { kind, domain: inst.domain };
    match (&inst.annotation, kind) {
        (Annotation::Logistics(a), PartialKind::Air) => logistics::air_model(inst, a),
        (Annotation::Logistics(a), PartialKind::Trucks) => logistics::trucks_model(inst, a),
        (Annotation::Grid(a), PartialKind::Robot) => grid::robot_model(inst, a),
        (Annotation::Grid(a), PartialKind::Keys) => grid::keys_model(inst, a),
        (Annotation::Woodworking(a), PartialKind::Wood) => woodworking::wood_model(inst, a),
        (Annotation::Woodworking(a), PartialKind::Logistics) => woodworking::logistics_model(inst, a, false),
        (Annotation::Woodworking(a), PartialKind::LogisticsUnprocessed) => {
            woodworking::logistics_model(inst, a, true)
        }
        _ => Err(mismatch()),
    }
}

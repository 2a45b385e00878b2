//! Comparison planners and a common entry point over all planners.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::planner::{train, Association, TrainOutcome};
use crate::radio::RadioMap;
use crate::scenario::{GridPoint, Scenario, Weights};
use crate::trajectory::Trajectory;

/// Canonical octile geodesic from start to goal: diagonal steps while both
/// offsets are non-zero, then straight. Every waypoint is served by its
/// strongest cell.
pub fn shortest_path(scenario: &Scenario, map: &RadioMap) -> Result<Trajectory> {
    if map.grid() != &scenario.grid {
        return Err(Error::Mismatch("map grid differs from scenario grid".into()));
    }
    let (goal, mut p) = (scenario.goal, scenario.start);
    let mut t = Trajectory::default();
    let attach = |t: &mut Trajectory, p: GridPoint| {
        let best = map.best(p);
        t.push(p, best.cell, best.rsrp);
    };
    attach(&mut t, p);
    while p != goal {
        let step = |from: usize, to: usize| match from.cmp(&to) {
            std::cmp::Ordering::Less => from + 1,
            std::cmp::Ordering::Greater => from - 1,
            std::cmp::Ordering::Equal => from,
        };
        p = GridPoint::new(step(p.i, goal.i), step(p.j, goal.j));
        attach(&mut t, p);
    }
    Ok(t)
}

/// Octile distance in metres between two grid points.
pub fn octile_distance(a: GridPoint, b: GridPoint, step: f64) -> f64 {
    let (di, dj) = (a.i.abs_diff(b.i), a.j.abs_diff(b.j));
    let (long, short) = (di.max(dj) as f64, di.min(dj) as f64);
    step * ((long - short) + short * std::f64::consts::SQRT_2)
}

/// Q-learning that only cares about coverage and distance: the given
/// weights (normally [`Weights::RSRP_AWARE`]) and strongest-cell association.
pub fn rsrp_aware_plan_with(scenario: &Scenario, map: &RadioMap, weights: Weights) -> Result<TrainOutcome> {
    let mut s = scenario.with_weights(weights)?;
    s.rl.association = Association::Strongest;
    train(&s, map)
}

pub fn rsrp_aware_plan(scenario: &Scenario, map: &RadioMap) -> Result<TrainOutcome> {
    rsrp_aware_plan_with(scenario, map, Weights::RSRP_AWARE)
}

/// The planners compared in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Planner {
    /// Q-learning with the scenario weights.
    Proposed,
    /// Q-learning with the handoff-heavier `(4%, 80%, 16%)` weights.
    Proposed2,
    Shortest,
    RsrpAware,
}

impl Planner {
    pub const ALL: [Planner; 4] = [Planner::Proposed, Planner::Proposed2, Planner::Shortest, Planner::RsrpAware];

    pub fn name(self) -> &'static str {
        match self {
            Planner::Proposed => "proposed",
            Planner::Proposed2 => "proposed-2",
            Planner::Shortest => "shortest",
            Planner::RsrpAware => "rsrp-aware",
        }
    }

    /// The scenario as this planner sees it, with its weights applied.
    pub fn configure(self, scenario: &Scenario) -> Result<Scenario> {
        match self {
            Planner::Proposed | Planner::Shortest => Ok(scenario.clone()),
            Planner::Proposed2 => scenario.with_weights(Weights::PROPOSED_2),
            Planner::RsrpAware => {
                let mut s = scenario.with_weights(Weights::RSRP_AWARE)?;
                s.rl.association = Association::Strongest;
                Ok(s)
            }
        }
    }

    /// Runs the planner. Learning planners also return their training run.
    pub fn plan(self, scenario: &Scenario, map: &RadioMap) -> Result<(Trajectory, Option<TrainOutcome>)> {
        match self {
            Planner::Shortest => Ok((shortest_path(scenario, map)?, None)),
            _ => {
                let out = train(&self.configure(scenario)?, map)?;
                Ok((out.best.clone(), Some(out)))
            }
        }
    }
}

impl fmt::Display for Planner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Planner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Planner::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown planner {s:?} (expected proposed, proposed-2, shortest or rsrp-aware)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::RadioMap;
    use crate::scenario::{generate_scenario, DeploymentParams, GridSpec};

    fn scenario(points: usize, start: (usize, usize), goal: (usize, usize)) -> (Scenario, RadioMap) {
        let mut s = generate_scenario(1, &DeploymentParams::default()).unwrap();
        s.grid = GridSpec { origin: [0.0, 0.0], step: 20.0, points, altitude: 80.0 };
        s.start = GridPoint::new(start.0, start.1);
        s.goal = GridPoint::new(goal.0, goal.1);
        let map = RadioMap::from_fn(s.grid.clone(), 2, 1, 0, |p, c| Ok(if (p.i + c) % 2 == 0 { -50.0 } else { -60.0 })).unwrap();
        (s, map)
    }

    #[test]
    fn straight_and_diagonal_geodesics() {
        let (s, m) = scenario(8, (0, 0), (5, 0));
        let t = shortest_path(&s, &m).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(t.total_distance(&s.grid), 100.0);

        let (s, m) = scenario(8, (0, 0), (3, 3));
        let t = shortest_path(&s, &m).unwrap();
        assert!((t.total_distance(&s.grid) - 3.0 * 20.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn geodesic_uses_strongest_cells_and_is_well_formed() {
        let (s, m) = scenario(8, (6, 1), (0, 4));
        let t = shortest_path(&s, &m).unwrap();
        assert!(t.is_well_formed());
        assert_eq!(t.first(), Some(s.start));
        assert_eq!(t.last(), Some(s.goal));
        for (p, c) in t.waypoints.iter().zip(&t.cells) {
            assert_eq!(*c, m.best(*p).cell);
        }
    }

    #[test]
    fn planner_names_round_trip() {
        for p in Planner::ALL {
            assert_eq!(p.name().parse::<Planner>().unwrap(), p);
        }
        assert!("dijkstra".parse::<Planner>().is_err());
    }
}

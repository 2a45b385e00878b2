use std::fmt::Write as _;

use serde::Serialize;

use crate::energy::{battery_pct, mission_energy};
use crate::error::{Error, Result};
use crate::radio::is_covered;
use crate::scenario::{GridSpec, Scenario};
use crate::trajectory::Trajectory;

/// Number of consecutive waypoint pairs served by different cells.
pub fn count_handoffs(trajectory: &Trajectory) -> usize {
    trajectory.cells.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distance flown with both segment endpoints below `threshold`, in metres
/// and as a percentage of the total distance (0 for an empty path).
pub fn disconnectivity_distance(trajectory: &Trajectory, grid: &GridSpec, threshold: f64) -> (f64, f64) {
    let mut hole = 0.0;
    let mut total = 0.0;
    for (k, w) in trajectory.waypoints.windows(2).enumerate() {
        let d = grid.distance(w[0], w[1]);
        total += d;
        let r = &trajectory.rsrps[k..k + 2];
        if !is_covered(r[0], threshold) && !is_covered(r[1], threshold) {
            hole += d;
        }
    }
    let pct = if total > 0.0 { 100.0 * hole / total } else { 0.0 };
    (hole, pct)
}

/// Weighted sum of propulsion energy (J), disconnected distance (m) and
/// handoff count, with the scenario weights.
pub fn objective_value(trajectory: &Trajectory, scenario: &Scenario) -> Result<f64> {
    let w = &scenario.weights;
    let energy = mission_energy(trajectory, &scenario.grid, scenario.speed, &scenario.power)?;
    let (hole, _) = disconnectivity_distance(trajectory, &scenario.grid, scenario.rsrp_threshold);
    Ok(w.en * energy + w.sig * hole + w.ho * count_handoffs(trajectory) as f64)
}

/// The same trade-off in the learner's unit-free convention: per step,
/// `w_en` times `1/sqrt(2)` (cardinal) or `1` (diagonal), plus `w_sig` if
/// the arrival waypoint is uncovered, plus `w_ho` on a handoff. Equals the
/// negated cumulative reward of the step sequence.
pub fn normalized_objective(trajectory: &Trajectory, scenario: &Scenario) -> f64 {
    let w = &scenario.weights;
    let mut cost = 0.0;
    for k in 1..trajectory.len() {
        let (a, b) = (trajectory.waypoints[k - 1], trajectory.waypoints[k]);
        let motion = if a.i != b.i && a.j != b.j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
        cost += w.en * motion;
        if !is_covered(trajectory.rsrps[k], scenario.rsrp_threshold) {
            cost += w.sig;
        }
        if trajectory.cells[k] != trajectory.cells[k - 1] {
            cost += w.ho;
        }
    }
    cost
}

/// Per-mission summary used to compare planners.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionMetrics {
    pub handoffs: usize,
    pub disconnectivity_m: f64,
    pub disconnectivity_pct: f64,
    pub battery_pct: f64,
    pub energy_j: f64,
    pub objective: f64,
    pub normalized_objective: f64,
    pub total_distance: f64,
    pub waypoints: usize,
    pub reached_goal: bool,
}

pub fn evaluate(trajectory: &Trajectory, scenario: &Scenario) -> Result<MissionMetrics> {
    if trajectory.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty trajectory"));
    }
    let energy = mission_energy(trajectory, &scenario.grid, scenario.speed, &scenario.power)?;
    let (hole, pct) = disconnectivity_distance(trajectory, &scenario.grid, scenario.rsrp_threshold);
    Ok(MissionMetrics {
        handoffs: count_handoffs(trajectory),
        disconnectivity_m: hole,
        disconnectivity_pct: pct,
        battery_pct: battery_pct(energy, &scenario.budget(), &scenario.power, scenario.battery.count_vertical_legs)?,
        energy_j: energy,
        objective: objective_value(trajectory, scenario)?,
        normalized_objective: normalized_objective(trajectory, scenario),
        total_distance: trajectory.total_distance(&scenario.grid),
        waypoints: trajectory.len(),
        reached_goal: trajectory.first() == Some(scenario.start) && trajectory.last() == Some(scenario.goal),
    })
}

/// Empirical CDF as `(value, P[X <= value])` steps, one per distinct value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    pub steps: Vec<(f64, f64)>,
}

impl EmpiricalCdf {
    pub fn from_samples(samples: &[f64]) -> Result<EmpiricalCdf> {
        if samples.is_empty() {
            return Err(Error::invalid("CDF of an empty sample"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("CDF sample contains NaN"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut steps: Vec<(f64, f64)> = Vec::new();
        for (k, v) in sorted.iter().enumerate() {
            let p = (k + 1) as f64 / n;
            match steps.last_mut() {
                Some(last) if last.0 == *v => last.1 = p,
                _ => steps.push((*v, p)),
            }
        }
        Ok(EmpiricalCdf { steps })
    }

    /// `P[X <= x]`.
    pub fn at(&self, x: f64) -> f64 {
        let idx = self.steps.partition_point(|(v, _)| *v <= x);
        if idx == 0 {
            0.0
        } else {
            self.steps[idx - 1].1
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rsrp_dbm,cdf\n");
        for (v, p) in &self.steps {
            let _ = writeln!(out, "{v},{p}");
        }
        out
    }
}

/// CDF of the serving-cell RSRP over the waypoints of `trajectory`.
pub fn rsrp_cdf(trajectory: &Trajectory) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_samples(&trajectory.rsrps)
}

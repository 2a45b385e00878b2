//! Rotary-wing propulsion power and mission energy accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::GridSpec;
use crate::trajectory::Trajectory;

/// Rotary-wing power model coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerParams {
    /// Blade profile power in hover, W.
    pub blade_profile_power: f64,
    /// Induced power in hover, W.
    pub induced_power: f64,
    /// Rotor blade tip speed, m/s.
    pub tip_speed: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub mean_rotor_induced_velocity: f64,
    /// Fuselage drag ratio.
    pub fuselage_drag_ratio: f64,
    /// Air density, kg/m^3.
    pub air_density: f64,
    /// Rotor solidity.
    pub rotor_solidity: f64,
    /// Rotor disc area, m^2.
    pub rotor_disc_area: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams {
            blade_profile_power: 79.86,
            induced_power: 88.63,
            tip_speed: 120.0,
            mean_rotor_induced_velocity: 4.03,
            fuselage_drag_ratio: 0.6,
            air_density: 1.225,
            rotor_solidity: 0.05,
            rotor_disc_area: 0.503,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.blade_profile_power,
            self.induced_power,
            self.tip_speed,
            self.mean_rotor_induced_velocity,
            self.fuselage_drag_ratio,
            self.air_density,
            self.rotor_solidity,
            self.rotor_disc_area,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::invalid("power model parameters must all be positive"))
        }
    }

    /// Power drawn while hovering, `P0 + Pi`.
    pub fn hover_power(&self) -> f64 {
        self.blade_profile_power + self.induced_power
    }
}

/// Capacity, reserve and the cruise parameters needed for the vertical legs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBudget {
    pub capacity: f64,
    pub reserve: f64,
    pub speed: f64,
    pub altitude: f64,
}

/// Propulsion power at forward speed `v` (W): blade profile, induced and
/// parasite terms.
pub fn propulsion_power(v: f64, params: &PowerParams) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Speed(v));
    }
    let profile = params.blade_profile_power * (1.0 + 3.0 * v * v / (params.tip_speed * params.tip_speed));
    // sqrt(1 + x^2) - x written as 1 / (sqrt(1 + x^2) + x) to avoid cancellation at speed.
    let x = v * v / (2.0 * params.mean_rotor_induced_velocity.powi(2));
    let induced = params.induced_power * (1.0 / ((1.0 + x * x).sqrt() + x)).sqrt();
    let parasite = 0.5
        * params.fuselage_drag_ratio
        * params.air_density
        * params.rotor_solidity
        * params.rotor_disc_area
        * v.powi(3);
    Ok(profile + induced + parasite)
}

/// Energy (J) to fly `d` metres at speed `v`.
pub fn segment_energy(v: f64, d: f64, params: &PowerParams) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Speed(v));
    }
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::invalid(format!("segment length must be non-negative, got {d}")));
    }
    Ok(propulsion_power(v, params)? * d / v)
}

/// Energy left for the horizontal part of the mission once the reserve and
/// the take-off/landing legs are set aside.
pub fn available_energy(budget: &EnergyBudget, params: &PowerParams) -> Result<f64> {
    let vertical = 2.0 * segment_energy(budget.speed, budget.altitude, params)?;
    let available = budget.capacity - budget.reserve - vertical;
    if available > 0.0 {
        Ok(available)
    } else {
        Err(Error::Infeasible(format!(
            "no energy left for horizontal flight: capacity {} J, reserve {} J, vertical legs {vertical:.1} J",
            budget.capacity, budget.reserve
        )))
    }
}

/// Propulsion energy along a trajectory; zero for a single waypoint.
pub fn mission_energy(trajectory: &Trajectory, grid: &GridSpec, v: f64, params: &PowerParams) -> Result<f64> {
    let per_metre = segment_energy(v, 1.0, params)?;
    Ok(trajectory.total_distance(grid) * per_metre)
}

/// Battery consumption in percent of `E_C - E_S`.
pub fn battery_pct(mission: f64, budget: &EnergyBudget, params: &PowerParams, count_vertical_legs: bool) -> Result<f64> {
    let vertical = if count_vertical_legs {
        2.0 * segment_energy(budget.speed, budget.altitude, params)?
    } else {
        0.0
    };
    Ok(100.0 * (mission + vertical) / (budget.capacity - budget.reserve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::GridPoint;

    fn grid() -> GridSpec {
        GridSpec { origin: [0.0, 0.0], step: 20.0, points: 10, altitude: 80.0 }
    }

    fn path(points: &[(usize, usize)]) -> Trajectory {
        let mut t = Trajectory::default();
        for &(i, j) in points {
            t.push(GridPoint::new(i, j), 0, -50.0);
        }
        t
    }

    #[test]
    fn hover_power_is_profile_plus_induced() {
        let p = PowerParams::default();
        let hover = propulsion_power(0.0, &p).unwrap();
        assert_eq!(hover, 79.86 + 88.63);
        assert!((hover - 168.49).abs() < 1e-12);
    }

    #[test]
    fn negative_speed_rejected() {
        assert!(matches!(propulsion_power(-1.0, &PowerParams::default()), Err(Error::Speed(_))));
        assert!(matches!(segment_energy(0.0, 10.0, &PowerParams::default()), Err(Error::Speed(_))));
    }

    #[test]
    fn power_has_an_interior_minimum_below_hover() {
        let p = PowerParams::default();
        let (best_v, best) = (1..1200)
            .map(|k| k as f64 * 0.1)
            .map(|v| (v, propulsion_power(v, &p).unwrap()))
            .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        assert!(best < p.hover_power());
        assert!(best_v > 1.0 && best_v < 119.0, "minimum at {best_v}");
    }

    #[test]
    fn power_is_continuous_near_hover() {
        let p = PowerParams::default();
        let near = propulsion_power(1e-6, &p).unwrap();
        assert!((near - p.hover_power()).abs() < 1e-6);
    }

    #[test]
    fn segment_energy_basics() {
        let p = PowerParams::default();
        assert_eq!(segment_energy(30.0, 0.0, &p).unwrap(), 0.0);
        let one = segment_energy(30.0, 20.0, &p).unwrap();
        let two = segment_energy(30.0, 40.0, &p).unwrap();
        assert!((two - 2.0 * one).abs() <= 4.0 * f64::EPSILON * two);
        assert_eq!(one, propulsion_power(30.0, &p).unwrap() * 20.0 / 30.0);
    }

    #[test]
    fn available_energy_cases() {
        let p = PowerParams::default();
        let flat = EnergyBudget { capacity: 3.0e6, reserve: 0.5e6, speed: 30.0, altitude: 0.0 };
        assert_eq!(available_energy(&flat, &p).unwrap(), 2.5e6);
        let b = EnergyBudget { altitude: 80.0, ..flat.clone() };
        let expected = 2.5e6 - 2.0 * propulsion_power(30.0, &p).unwrap() * 80.0 / 30.0;
        assert!((available_energy(&b, &p).unwrap() - expected).abs() < 1e-6);
        let degenerate = EnergyBudget { reserve: 3.0e6, ..flat };
        assert!(matches!(available_energy(&degenerate, &p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn mission_energy_sums_steps() {
        let p = PowerParams::default();
        let g = grid();
        let step = segment_energy(30.0, 20.0, &p).unwrap();
        assert_eq!(mission_energy(&path(&[(0, 0)]), &g, 30.0, &p).unwrap(), 0.0);
        let straight = mission_energy(&path(&[(0, 0), (1, 0), (2, 0)]), &g, 30.0, &p).unwrap();
        let single = segment_energy(30.0, 40.0, &p).unwrap();
        assert!((straight - single).abs() < 1e-9);
        let ell = mission_energy(&path(&[(0, 0), (1, 0), (1, 1)]), &g, 30.0, &p).unwrap();
        assert!((ell - 2.0 * step).abs() < 1e-9);
        let diag = mission_energy(&path(&[(0, 0), (1, 1)]), &g, 30.0, &p).unwrap();
        let expected = segment_energy(30.0, 20.0 * 2f64.sqrt(), &p).unwrap();
        assert!((diag - expected).abs() < 1e-9);
    }

    #[test]
    fn battery_percentage_modes() {
        let p = PowerParams::default();
        let b = EnergyBudget { capacity: 3.0e6, reserve: 0.5e6, speed: 30.0, altitude: 80.0 };
        let without = battery_pct(25_000.0, &b, &p, false).unwrap();
        assert!((without - 1.0).abs() < 1e-12);
        assert!(battery_pct(25_000.0, &b, &p, true).unwrap() > without);
    }
}

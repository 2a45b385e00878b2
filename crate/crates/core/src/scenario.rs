//! World definition: grid geometry, base-station deployment and mission
//! configuration.
//!
//! A [`Scenario`] is immutable once built and is what every other module
//! consumes. Scenarios are produced either by [`generate_scenario`] (seeded
//! synthetic deployment) or loaded from a TOML file with [`Scenario::load`].

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::{EnergyBudget, PowerParams};
use crate::error::{Error, Result};
use crate::planner::TrainConfig;
use crate::radio::ChannelParams;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Seed of the reference deployment used by the tools and the acceptance suite.
pub const DEFAULT_SEED: u64 = 7;

/// A point of the flight grid, `i` along x (east) and `j` along y (north).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: usize,
    pub j: usize,
}

impl GridPoint {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }

    /// Whether `other` is one of the eight neighbours of `self`.
    pub fn is_neighbor(&self, other: &GridPoint) -> bool {
        let di = self.i.abs_diff(other.i);
        let dj = self.j.abs_diff(other.j);
        di <= 1 && dj <= 1 && (di + dj) > 0
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Square horizontal grid at a fixed flight altitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// South-west corner, metres.
    pub origin: [f64; 2],
    /// Spacing between neighbouring points on both axes, metres.
    pub step: f64,
    /// Points per axis (`J`).
    pub points: usize,
    /// Flight altitude above ground, metres.
    pub altitude: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::invalid(format!("grid step must be positive, got {}", self.step)));
        }
        if self.points < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points per axis, got {}", self.points)));
        }
        if !(self.altitude > 0.0) || !self.altitude.is_finite() {
            return Err(Error::invalid(format!("altitude must be positive, got {}", self.altitude)));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(())
    }

    /// Length of one side of the covered area, `(J - 1) * step`.
    pub fn side(&self) -> f64 {
        (self.points - 1) as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        let n = self.points as i64;
        (0..n).contains(&i) && (0..n).contains(&j)
    }

    fn check(&self, p: GridPoint) -> Result<()> {
        if p.i >= self.points || p.j >= self.points {
            return Err(Error::OffGrid { i: p.i as i64, j: p.j as i64, points: self.points });
        }
        Ok(())
    }

    /// Row-major flat index of a grid point (rows are constant `j`).
    pub fn index(&self, p: GridPoint) -> usize {
        debug_assert!(p.i < self.points && p.j < self.points);
        p.j * self.points + p.i
    }

    pub fn point(&self, index: usize) -> GridPoint {
        GridPoint::new(index % self.points, index / self.points)
    }

    pub fn points_iter(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Position of grid point `(i, j)` in metres, at flight altitude.
    pub fn grid_to_coords(&self, i: usize, j: usize) -> Result<[f64; 3]> {
        self.check(GridPoint::new(i, j))?;
        Ok(self.coords(GridPoint::new(i, j)))
    }

    pub(crate) fn coords(&self, p: GridPoint) -> [f64; 3] {
        [
            self.origin[0] + p.i as f64 * self.step,
            self.origin[1] + p.j as f64 * self.step,
            self.altitude,
        ]
    }

    /// Inverse of [`grid_to_coords`](Self::grid_to_coords). Positions must sit
    /// on the lattice to within a millimetre.
    pub fn coords_to_grid(&self, x: f64, y: f64) -> Result<GridPoint> {
        let fi = (x - self.origin[0]) / self.step;
        let fj = (y - self.origin[1]) / self.step;
        let (ri, rj) = (fi.round(), fj.round());
        let off = ((fi - ri).abs().max((fj - rj).abs())) * self.step;
        if !self.contains(ri as i64, rj as i64) || off > 1e-3 {
            return Err(Error::OffGrid { i: ri as i64, j: rj as i64, points: self.points });
        }
        Ok(GridPoint::new(ri as usize, rj as usize))
    }

    /// Euclidean distance in metres between two grid points.
    pub fn distance(&self, a: GridPoint, b: GridPoint) -> f64 {
        let di = a.i.abs_diff(b.i) as f64;
        let dj = a.j.abs_diff(b.j) as f64;
        di.hypot(dj) * self.step
    }
}

/// One sector of a base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    /// Antenna position including mast height, metres.
    pub bs_position: [f64; 3],
    /// Boresight azimuth, degrees counter-clockwise from the +x (east) axis,
    /// in `[0, 360)`.
    pub azimuth: f64,
    /// Downtilt below the horizon, degrees.
    pub downtilt: f64,
    /// Transmit power, dBm.
    pub tx_power: f64,
}

/// Relative importance of energy, disconnectivity and handoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub en: f64,
    pub sig: f64,
    pub ho: f64,
}

impl Weights {
    /// `(2.5%, 90%, 7.5%)`.
    pub const PROPOSED: Weights = Weights { en: 0.025, sig: 0.90, ho: 0.075 };
    /// `(4%, 80%, 16%)`.
    pub const PROPOSED_2: Weights = Weights { en: 0.04, sig: 0.80, ho: 0.16 };
    /// Handoff-blind weighting used by the RSRP-aware baseline.
    pub const RSRP_AWARE: Weights = Weights { en: 0.10, sig: 0.90, ho: 0.0 };

    pub fn new(en: f64, sig: f64, ho: f64) -> Result<Self> {
        let w = Weights { en, sig, ho };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.en, self.sig, self.ho];
        if parts.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(format!("weights must be non-negative, got {self}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::invalid(format!("weights must sum to 1, got {self} (sum {sum})")));
        }
        Ok(())
    }
}

impl Default for Weights {
    fn default() -> Self {
        Weights::PROPOSED
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(en={}, sig={}, ho={})", self.en, self.sig, self.ho)
    }
}

/// Battery capacity `E_C` and emergency reserve `E_S`, joules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Battery {
    pub capacity: f64,
    pub reserve: f64,
    /// Whether take-off and landing count towards the battery percentage.
    pub count_vertical_legs: bool,
}

impl Default for Battery {
    fn default() -> Self {
        Battery { capacity: 3.0e6, reserve: 0.5e6, count_vertical_legs: true }
    }
}

/// A complete, validated world and mission description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    /// RSRP threshold `T_th`, dBm.
    pub rsrp_threshold: f64,
    /// Cruise speed, m/s.
    pub speed: f64,
    pub start: GridPoint,
    pub goal: GridPoint,
    pub weights: Weights,
    pub grid: GridSpec,
    pub battery: Battery,
    pub power: PowerParams,
    pub channel: ChannelParams,
    pub rl: TrainConfig,
    pub cells: Vec<Cell>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.weights.validate()?;
        self.power.validate()?;
        self.channel.validate()?;
        self.rl.validate()?;
        if self.cells.is_empty() {
            return Err(Error::NoCells);
        }
        for (k, cell) in self.cells.iter().enumerate() {
            if cell.id != k {
                return Err(Error::invalid(format!("cell ids must be dense and ordered, found id {} at {k}", cell.id)));
            }
            if !(0.0..360.0).contains(&cell.azimuth) {
                return Err(Error::invalid(format!("cell {k}: azimuth {} outside [0, 360)", cell.azimuth)));
            }
            if !(cell.downtilt >= 0.0) {
                return Err(Error::invalid(format!("cell {k}: negative downtilt {}", cell.downtilt)));
            }
            if !cell.tx_power.is_finite() || !cell.bs_position.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid(format!("cell {k}: non-finite parameters")));
            }
        }
        self.grid.check(self.start)?;
        self.grid.check(self.goal)?;
        if self.start == self.goal {
            return Err(Error::invalid("start and goal must differ"));
        }
        if !(self.speed > 0.0) || !self.speed.is_finite() {
            return Err(Error::invalid(format!("speed must be positive, got {}", self.speed)));
        }
        if !self.rsrp_threshold.is_finite() {
            return Err(Error::invalid("RSRP threshold must be finite"));
        }
        if !(self.battery.reserve >= 0.0) || !(self.battery.capacity > self.battery.reserve) {
            return Err(Error::invalid(format!(
                "battery capacity {} J must exceed reserve {} J >= 0",
                self.battery.capacity, self.battery.reserve
            )));
        }
        Ok(())
    }

    /// `E_C - E_S`, joules.
    pub fn energy_budget(&self) -> f64 {
        self.battery.capacity - self.battery.reserve
    }

    pub fn budget(&self) -> EnergyBudget {
        EnergyBudget {
            capacity: self.battery.capacity,
            reserve: self.battery.reserve,
            speed: self.speed,
            altitude: self.grid.altitude,
        }
    }

    pub fn carrier_freq(&self) -> f64 {
        self.channel.carrier_freq
    }

    /// Copy of this scenario flown at another altitude.
    pub fn at_altitude(&self, altitude: f64) -> Result<Scenario> {
        let mut s = self.clone();
        s.grid.altitude = altitude;
        s.grid.validate()?;
        Ok(s)
    }

    pub fn with_weights(&self, weights: Weights) -> Result<Scenario> {
        weights.validate()?;
        let mut s = self.clone();
        s.weights = weights;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("cannot serialise scenario: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Scenario::from_toml(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// Hash of everything that determines a radio map except the altitude.
    pub fn radio_fingerprint(&self) -> u64 {
        let payload = serde_json::to_vec(&(
            &self.grid.origin,
            self.grid.step,
            self.grid.points,
            &self.channel,
            &self.cells,
        ))
        .expect("scenario geometry is always serialisable");
        let digest = Sha256::digest(&payload);
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }
}

/// Parameters of the synthetic base-station deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeploymentParams {
    pub origin: [f64; 2],
    pub area_side: f64,
    pub step: f64,
    pub altitude: f64,
    pub three_sector_sites: usize,
    pub two_sector_sites: usize,
    pub min_site_distance: f64,
    /// Sites keep at least this distance from the area border.
    pub edge_margin: f64,
    pub mast_height: f64,
    pub downtilt: f64,
    pub tx_power: f64,
    /// Full-layout restarts before giving up.
    pub max_attempts: usize,
}

impl Default for DeploymentParams {
    fn default() -> Self {
        DeploymentParams {
            origin: [0.0, 0.0],
            area_side: 3000.0,
            step: 20.0,
            altitude: 80.0,
            three_sector_sites: 20,
            two_sector_sites: 2,
            min_site_distance: 400.0,
            edge_margin: 50.0,
            mast_height: 25.0,
            downtilt: 6.0,
            tx_power: 46.0,
            max_attempts: 200,
        }
    }
}

impl DeploymentParams {
    fn grid(&self) -> Result<GridSpec> {
        if !(self.area_side > 0.0) || !(self.step > 0.0) {
            return Err(Error::invalid("area side and step must be positive"));
        }
        let ratio = self.area_side / self.step;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "area side {} is not a multiple of the step {}",
                self.area_side, self.step
            )));
        }
        let grid = GridSpec {
            origin: self.origin,
            step: self.step,
            points: ratio.round() as usize + 1,
            altitude: self.altitude,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Seeded layout of BS sites with rejection sampling on the inter-site
/// distance. Returns the site centres (x, y).
fn place_sites(rng: &mut ChaCha8Rng, params: &DeploymentParams, sites: usize) -> Result<Vec<[f64; 2]>> {
    let lo = params.edge_margin;
    let hi = params.area_side - params.edge_margin;
    if !(hi > lo) {
        return Err(Error::Placement { sites, min_distance: params.min_site_distance, attempts: 0 });
    }
    let per_site_draws = 2_000;
    for _ in 0..params.max_attempts.max(1) {
        let mut placed: Vec<[f64; 2]> = Vec::with_capacity(sites);
        'site: for _ in 0..sites {
            for _ in 0..per_site_draws {
                let x = rng.gen_range(lo..hi);
                let y = rng.gen_range(lo..hi);
                let ok = placed
                    .iter()
                    .all(|p| (p[0] - x).hypot(p[1] - y) >= params.min_site_distance);
                if ok && x > 0.0 && y > 0.0 {
                    placed.push([x, y]);
                    continue 'site;
                }
            }
            break;
        }
        if placed.len() == sites {
            return Ok(placed
                .into_iter()
                .map(|[x, y]| [params.origin[0] + x, params.origin[1] + y])
                .collect());
        }
    }
    Err(Error::Placement {
        sites,
        min_distance: params.min_site_distance,
        attempts: params.max_attempts,
    })
}

/// Sector azimuths for a site with `sectors` cells.
pub fn sector_azimuths(sectors: usize) -> Vec<f64> {
    (0..sectors).map(|k| k as f64 * 360.0 / sectors as f64).collect()
}

/// Build the cells of a seeded synthetic deployment.
pub fn deploy_cells(seed: u64, params: &DeploymentParams) -> Result<Vec<Cell>> {
    let sites = params.three_sector_sites + params.two_sector_sites;
    if sites == 0 {
        return Err(Error::NoCells);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = place_sites(&mut rng, params, sites)?;
    let mut cells = Vec::with_capacity(3 * params.three_sector_sites + 2 * params.two_sector_sites);
    for (k, centre) in centres.iter().enumerate() {
        let sectors = if k < params.three_sector_sites { 3 } else { 2 };
        for azimuth in sector_azimuths(sectors) {
            cells.push(Cell {
                id: cells.len(),
                bs_position: [centre[0], centre[1], params.mast_height],
                azimuth,
                downtilt: params.downtilt,
                tx_power: params.tx_power,
            });
        }
    }
    Ok(cells)
}

/// Seeded synthetic scenario with default mission settings.
pub fn generate_scenario(seed: u64, params: &DeploymentParams) -> Result<Scenario> {
    ScenarioConfig { deployment: params.clone(), ..ScenarioConfig::default() }.build(seed)
}

/// Everything needed to generate a scenario; the on-disk form of `gen`
/// configuration files. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub rsrp_threshold: f64,
    pub speed: f64,
    pub start: Option<GridPoint>,
    pub goal: Option<GridPoint>,
    pub weights: Weights,
    pub deployment: DeploymentParams,
    pub battery: Battery,
    pub power: PowerParams,
    pub channel: ChannelParams,
    pub rl: TrainConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            rsrp_threshold: -65.0,
            speed: 30.0,
            start: None,
            goal: None,
            weights: Weights::PROPOSED,
            deployment: DeploymentParams::default(),
            battery: Battery::default(),
            power: PowerParams::default(),
            channel: ChannelParams::default(),
            rl: TrainConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<ScenarioConfig> {
        toml::from_str(text).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self, seed: u64) -> Result<Scenario> {
        let grid = self.deployment.grid()?;
        let cells = deploy_cells(seed, &self.deployment)?;
        let last = grid.points - 1;
        let mut rl = self.rl.clone();
        rl.seed = seed;
        let scenario = Scenario {
            seed,
            rsrp_threshold: self.rsrp_threshold,
            speed: self.speed,
            start: self.start.unwrap_or(GridPoint::new(0, 0)),
            goal: self.goal.unwrap_or(GridPoint::new(last, last)),
            weights: self.weights,
            grid,
            battery: self.battery.clone(),
            power: self.power.clone(),
            channel: self.channel.clone(),
            rl,
            cells,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
